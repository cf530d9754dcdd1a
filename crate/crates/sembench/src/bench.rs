//! Design-space sweeps over the kernel variants, weak-scaling runs, and
//! the CSV/JSON reporting both share.
//!
//! Throughput is reported as GNOPS, giga node-updates per second:
//! `nodes * rk_stages * time_steps / runtime_ns`. Records round-trip
//! through CSV exactly because floating-point fields are printed with
//! Rust's shortest-roundtrip formatting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{AccessVariant, Fusion, KernelConfig, ScatterMode};
use crate::precision::{Precision, Scalar};
use crate::timeloop::{CaseKind, Diagnostics, RunStats, SimConfig, Simulation};

/// Giga node-updates per second. Errors on a zero runtime and on
/// degenerate zero work.
pub fn gnops(total_nodes: u64, rk_steps: u64, time_steps: u64, runtime_ns: u64) -> Result<f64> {
    if runtime_ns == 0 {
        return Err(Error::ZeroRuntime);
    }
    if total_nodes == 0 || rk_steps == 0 || time_steps == 0 {
        return Err(Error::Config(format!(
            "throughput needs positive work: nodes={total_nodes} rk={rk_steps} steps={time_steps}"
        )));
    }
    let updates = total_nodes as f64 * rk_steps as f64 * time_steps as f64;
    Ok(updates / runtime_ns as f64)
}

/// Column order of the sweep CSV. One record per (cell, repetition).
pub const CSV_HEADER: &str = "case,variant,fusion,precision,partitions,nodes,rk_steps,\
time_steps,rep,runtime_ns,gnops,t_convec_ns,t_diff_ns,t_scatter_ns,t_update_ns,status";

/// One benchmark repetition, as it appears in the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub case: CaseKind,
    pub variant: AccessVariant,
    pub fusion: Fusion,
    pub precision: Precision,
    pub partitions: usize,
    pub nodes: usize,
    pub rk_steps: usize,
    pub time_steps: usize,
    pub rep: usize,
    pub runtime_ns: u64,
    pub gnops: f64,
    pub t_convec_ns: u64,
    pub t_diff_ns: u64,
    pub t_scatter_ns: u64,
    pub t_update_ns: u64,
    pub status: String,
    /// Carried in memory for the cross-variant gate; not a CSV column.
    pub final_diagnostics: Option<Diagnostics>,
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.case,
            self.variant,
            self.fusion,
            self.precision,
            self.partitions,
            self.nodes,
            self.rk_steps,
            self.time_steps,
            self.rep,
            self.runtime_ns,
            self.gnops,
            self.t_convec_ns,
            self.t_diff_ns,
            self.t_scatter_ns,
            self.t_update_ns,
            self.status
        )
    }

    pub fn parse_csv_row(line: &str) -> Result<Self> {
        let cols: Vec<&str> = line.split(',').collect();
        let expected = CSV_HEADER.split(',').count();
        if cols.len() != expected {
            return Err(Error::Config(format!(
                "csv row has {} columns, expected {expected}: {line:?}",
                cols.len()
            )));
        }
        let field = |i: usize| cols[i].trim();
        let num = |i: usize| -> Result<u64> {
            field(i)
                .parse()
                .map_err(|e| Error::Config(format!("bad integer in column {i}: {e}")))
        };
        Ok(Self {
            case: field(0).parse()?,
            variant: field(1).parse()?,
            fusion: field(2).parse()?,
            precision: field(3).parse().map_err(Error::Config)?,
            partitions: num(4)? as usize,
            nodes: num(5)? as usize,
            rk_steps: num(6)? as usize,
            time_steps: num(7)? as usize,
            rep: num(8)? as usize,
            runtime_ns: num(9)?,
            gnops: field(10)
                .parse()
                .map_err(|e| Error::Config(format!("bad gnops value: {e}")))?,
            t_convec_ns: num(11)?,
            t_diff_ns: num(12)?,
            t_scatter_ns: num(13)?,
            t_update_ns: num(14)?,
            status: field(15).to_string(),
            final_diagnostics: None,
        })
    }
}

/// Render records as a CSV document with the canonical header.
pub fn records_to_csv(records: &[RunRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Parse a CSV document produced by [`records_to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<RunRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        other => {
            return Err(Error::Config(format!(
                "csv header mismatch: got {other:?}"
            )))
        }
    }
    lines.map(RunRecord::parse_csv_row).collect()
}

/// A mesh size in the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshSize {
    pub order: usize,
    pub elems: [usize; 3],
}

/// Full description of a design-space sweep: the cross product of the
/// axes, run `reps` times per cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub case: CaseKind,
    pub variants: Vec<AccessVariant>,
    pub fusions: Vec<Fusion>,
    pub precisions: Vec<Precision>,
    pub meshes: Vec<MeshSize>,
    pub partition_counts: Vec<usize>,
    pub scatter: ScatterMode,
    pub reps: usize,
    pub steps: usize,
    pub warmup_steps: usize,
    pub dt: f64,
    pub workers: Option<usize>,
    pub chunk_elements: usize,
    pub seed: u64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            case: CaseKind::Tgv,
            variants: AccessVariant::ALL.to_vec(),
            fusions: Fusion::ALL.to_vec(),
            precisions: vec![Precision::Fp64, Precision::Fp32],
            meshes: vec![MeshSize { order: 3, elems: [4, 4, 4] }],
            partition_counts: vec![1],
            scatter: ScatterMode::Deterministic,
            reps: 5,
            steps: 20,
            warmup_steps: 1,
            dt: 2.0e-4,
            workers: None,
            chunk_elements: 8,
            seed: 0,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let empty = [
            ("variants", self.variants.is_empty()),
            ("fusions", self.fusions.is_empty()),
            ("precisions", self.precisions.is_empty()),
            ("meshes", self.meshes.is_empty()),
            ("partition counts", self.partition_counts.is_empty()),
        ];
        for (name, is_empty) in empty {
            if is_empty {
                return Err(Error::Config(format!("sweep axis {name} must be non-empty")));
            }
        }
        if self.reps == 0 {
            return Err(Error::Config("sweep needs at least one repetition".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("sweep needs at least one timed step".into()));
        }
        Ok(())
    }

    pub fn num_cells(&self) -> usize {
        self.variants.len()
            * self.fusions.len()
            * self.precisions.len()
            * self.meshes.len()
            * self.partition_counts.len()
    }

    fn cell_config(
        &self,
        mesh: MeshSize,
        partitions: usize,
        precision: Precision,
        variant: AccessVariant,
        fusion: Fusion,
    ) -> SimConfig {
        SimConfig {
            case: self.case,
            order: mesh.order,
            elems: mesh.elems,
            extents: None,
            dt: self.dt,
            num_steps: self.steps,
            warmup_steps: self.warmup_steps,
            kernel: KernelConfig { access: variant, fusion, scatter: self.scatter, precision },
            partitions,
            workers: self.workers,
            chunk_elements: self.chunk_elements,
            check_finite: false,
            seed: self.seed,
        }
    }
}

/// Per-cell summary over repetitions, serialized to the aggregate JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellAggregate {
    pub case: CaseKind,
    pub variant: AccessVariant,
    pub fusion: Fusion,
    pub precision: Precision,
    pub partitions: usize,
    pub nodes: usize,
    pub mean_runtime_ns: f64,
    pub min_runtime_ns: u64,
    pub mean_gnops: f64,
    pub best_variant: bool,
}

/// Everything a sweep produced: the raw records, per-cell aggregates,
/// and the verdict of the cross-variant correctness gate.
#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<CellAggregate>,
    pub gate_passed: bool,
    pub gate_failures: Vec<String>,
}

impl SweepOutcome {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, records_to_csv(&self.records))?;
        Ok(())
    }

    pub fn aggregates_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.aggregates)?)
    }

    pub fn write_aggregates_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.aggregates_json()?)?;
        Ok(())
    }
}

fn run_cell(config: &SimConfig, reps: usize) -> Vec<std::result::Result<RunStats, String>> {
    match config.kernel.precision {
        Precision::Fp64 => run_cell_typed::<f64>(config, reps),
        Precision::Fp32 => run_cell_typed::<f32>(config, reps),
    }
}

fn run_cell_typed<S: Scalar>(
    config: &SimConfig,
    reps: usize,
) -> Vec<std::result::Result<RunStats, String>> {
    let mut out = Vec::with_capacity(reps);
    let mut sim = match Simulation::<S>::prepare(config) {
        Ok(sim) => sim,
        Err(e) => {
            let msg = sanitize_status(&e.to_string());
            for _ in 0..reps {
                out.push(Err(msg.clone()));
            }
            return out;
        }
    };
    for rep in 0..reps {
        let r = if rep == 0 { Ok(()) } else { sim.reset() };
        let run = r.and_then(|()| sim.execute());
        match run {
            Ok(stats) => out.push(Ok(stats)),
            Err(e) => {
                out.push(Err(sanitize_status(&e.to_string())));
                if sim.reset().is_err() {
                    let msg = sanitize_status("reset failed after error");
                    for _ in rep + 1..reps {
                        out.push(Err(msg.clone()));
                    }
                    break;
                }
            }
        }
    }
    out
}

/// Status strings live in an unquoted CSV column, so strip the
/// delimiter and newlines.
fn sanitize_status(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

/// Relative disagreement tolerance for the cross-variant gate. All
/// variants share one arithmetic under deterministic scatter, so only
/// atomic reassociation can introduce differences.
fn gate_tolerance(precision: Precision, scatter: ScatterMode) -> f64 {
    match (scatter, precision) {
        (ScatterMode::Deterministic, _) => 0.0,
        (ScatterMode::Atomic, Precision::Fp64) => 1e-9,
        (ScatterMode::Atomic, Precision::Fp32) => 1e-3,
    }
}

fn diag_close(a: &Diagnostics, b: &Diagnostics, tol: f64) -> bool {
    let close = |x: f64, y: f64| {
        if tol == 0.0 {
            x.to_bits() == y.to_bits()
        } else {
            (x - y).abs() <= tol * x.abs().max(y.abs()).max(1.0)
        }
    };
    close(a.total_mass, b.total_mass)
        && close(a.total_energy, b.total_energy)
        && close(a.max_speed, b.max_speed)
}

/// Execute every cell of the sweep sequentially, `reps` repetitions
/// each, then run the cross-variant correctness gate: for a given
/// (mesh, partitions, precision), every variant and fusion must report
/// the same final diagnostics (bitwise under deterministic scatter).
/// Cell failures are recorded in the status column and the sweep
/// continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutcome> {
    spec.validate()?;
    let mut records = Vec::with_capacity(spec.num_cells() * spec.reps);
    let mut aggregates = Vec::with_capacity(spec.num_cells());

    for &mesh in &spec.meshes {
        for &partitions in &spec.partition_counts {
            for &precision in &spec.precisions {
                for &variant in &spec.variants {
                    for &fusion in &spec.fusions {
                        let config = spec.cell_config(mesh, partitions, precision, variant, fusion);
                        let results = run_cell(&config, spec.reps);
                        let mut cell_records = Vec::with_capacity(spec.reps);
                        for (rep, res) in results.into_iter().enumerate() {
                            let record = match res {
                                Ok(stats) => RunRecord {
                                    case: spec.case,
                                    variant,
                                    fusion,
                                    precision,
                                    partitions,
                                    nodes: stats.nodes,
                                    rk_steps: stats.rk_steps,
                                    time_steps: stats.time_steps,
                                    rep,
                                    runtime_ns: stats.runtime_ns,
                                    gnops: gnops(
                                        stats.nodes as u64,
                                        stats.rk_steps as u64,
                                        stats.time_steps as u64,
                                        stats.runtime_ns,
                                    )?,
                                    t_convec_ns: stats.t_convection_ns,
                                    t_diff_ns: stats.t_diffusion_ns,
                                    t_scatter_ns: stats.t_scatter_ns,
                                    t_update_ns: stats.t_update_ns,
                                    status: "ok".into(),
                                    final_diagnostics: Some(stats.final_diagnostics),
                                },
                                Err(msg) => RunRecord {
                                    case: spec.case,
                                    variant,
                                    fusion,
                                    precision,
                                    partitions,
                                    nodes: 0,
                                    rk_steps: crate::timeloop::RK_STEPS,
                                    time_steps: spec.steps,
                                    rep,
                                    runtime_ns: 0,
                                    gnops: 0.0,
                                    t_convec_ns: 0,
                                    t_diff_ns: 0,
                                    t_scatter_ns: 0,
                                    t_update_ns: 0,
                                    status: format!("error: {msg}"),
                                    final_diagnostics: None,
                                },
                            };
                            cell_records.push(record);
                        }
                        aggregates.push(aggregate_cell(&cell_records));
                        records.extend(cell_records);
                    }
                }
            }
        }
    }

    mark_best_variants(&mut aggregates);
    let (gate_passed, gate_failures) = correctness_gate(&mut records, spec.scatter);
    Ok(SweepOutcome { records, aggregates, gate_passed, gate_failures })
}

fn aggregate_cell(cell: &[RunRecord]) -> CellAggregate {
    let first = &cell[0];
    let ok: Vec<&RunRecord> = cell.iter().filter(|r| r.status == "ok").collect();
    let (mean_runtime_ns, min_runtime_ns, mean_gnops) = if ok.is_empty() {
        (0.0, 0, 0.0)
    } else {
        let mean_rt = ok.iter().map(|r| r.runtime_ns as f64).sum::<f64>() / ok.len() as f64;
        let min_rt = ok.iter().map(|r| r.runtime_ns).min().unwrap();
        let mean_g = ok.iter().map(|r| r.gnops).sum::<f64>() / ok.len() as f64;
        (mean_rt, min_rt, mean_g)
    };
    CellAggregate {
        case: first.case,
        variant: first.variant,
        fusion: first.fusion,
        precision: first.precision,
        partitions: first.partitions,
        nodes: ok.first().map_or(0, |r| r.nodes),
        mean_runtime_ns,
        min_runtime_ns,
        mean_gnops,
        best_variant: false,
    }
}

/// Flag the highest-mean-throughput cell within each
/// (case, precision, nodes, partitions) group.
fn mark_best_variants(aggregates: &mut [CellAggregate]) {
    let groups: Vec<(CaseKind, Precision, usize, usize)> = {
        let mut g: Vec<_> = aggregates
            .iter()
            .map(|a| (a.case, a.precision, a.nodes, a.partitions))
            .collect();
        g.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
        g.dedup();
        g
    };
    for key in groups {
        let best = aggregates
            .iter()
            .enumerate()
            .filter(|(_, a)| (a.case, a.precision, a.nodes, a.partitions) == key)
            .filter(|(_, a)| a.mean_gnops > 0.0)
            .max_by(|(_, x), (_, y)| x.mean_gnops.total_cmp(&y.mean_gnops))
            .map(|(i, _)| i);
        if let Some(i) = best {
            aggregates[i].best_variant = true;
        }
    }
}

/// Compare final diagnostics across variants within each
/// (precision, nodes, partitions) group; mismatching records are marked
/// `diverged`.
fn correctness_gate(records: &mut [RunRecord], scatter: ScatterMode) -> (bool, Vec<String>) {
    let mut failures = Vec::new();
    let mut keys: Vec<(Precision, usize, usize)> = records
        .iter()
        .filter(|r| r.final_diagnostics.is_some())
        .map(|r| (r.precision, r.nodes, r.partitions))
        .collect();
    keys.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    keys.dedup();

    for key in keys {
        let tol = gate_tolerance(key.0, scatter);
        let reference = records
            .iter()
            .find(|r| {
                (r.precision, r.nodes, r.partitions) == key && r.final_diagnostics.is_some()
            })
            .and_then(|r| r.final_diagnostics);
        let Some(ref_diag) = reference else { continue };
        for r in records.iter_mut() {
            if (r.precision, r.nodes, r.partitions) != key {
                continue;
            }
            let Some(diag) = r.final_diagnostics else { continue };
            if !diag_close(&ref_diag, &diag, tol) {
                failures.push(format!(
                    "{} {}/{} {} nodes={} P={} rep {}: diagnostics diverged \
                     (mass {} vs {}, energy {} vs {}, max speed {} vs {})",
                    r.case,
                    r.variant,
                    r.fusion,
                    r.precision,
                    r.nodes,
                    r.partitions,
                    r.rep,
                    diag.total_mass,
                    ref_diag.total_mass,
                    diag.total_energy,
                    ref_diag.total_energy,
                    diag.max_speed,
                    ref_diag.max_speed,
                ));
                r.status = "diverged".into();
            }
        }
    }
    // Run failures also fail the gate: a missing cell means the variants
    // were not actually cross-checked.
    for r in records.iter() {
        if r.status != "ok" && r.status != "diverged" {
            failures.push(format!(
                "{} {}/{} {} P={} rep {}: {}",
                r.case, r.variant, r.fusion, r.precision, r.partitions, r.rep, r.status
            ));
        }
    }
    (failures.is_empty(), failures)
}

/// Weak-scaling study: hold nodes per partition near constant while the
/// partition count grows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakScaleSpec {
    pub base_nodes_per_partition: usize,
    /// Strictly ascending partition counts.
    pub partition_counts: Vec<usize>,
    pub order: usize,
    pub case: CaseKind,
    pub variants: Vec<AccessVariant>,
    pub fusions: Vec<Fusion>,
    pub precisions: Vec<Precision>,
    pub scatter: ScatterMode,
    pub reps: usize,
    pub steps: usize,
    pub warmup_steps: usize,
    pub dt: f64,
    /// Worker threads; `None` gives each partition one worker.
    pub workers: Option<usize>,
    pub chunk_elements: usize,
    pub seed: u64,
}

impl Default for WeakScaleSpec {
    fn default() -> Self {
        Self {
            base_nodes_per_partition: 50_000,
            partition_counts: vec![1, 2, 4],
            order: 4,
            case: CaseKind::Tgv,
            variants: AccessVariant::ALL.to_vec(),
            fusions: Fusion::ALL.to_vec(),
            precisions: vec![Precision::Fp64],
            scatter: ScatterMode::Atomic,
            reps: 3,
            steps: 20,
            warmup_steps: 1,
            dt: 2.0e-4,
            workers: None,
            chunk_elements: 8,
            seed: 0,
        }
    }
}

impl WeakScaleSpec {
    pub fn validate(&self) -> Result<()> {
        if self.base_nodes_per_partition == 0 {
            return Err(Error::Config("nodes per partition must be positive".into()));
        }
        if self.partition_counts.is_empty() {
            return Err(Error::Config("weak scaling needs partition counts".into()));
        }
        if !self.partition_counts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config(format!(
                "partition counts must be strictly ascending, got {:?}",
                self.partition_counts
            )));
        }
        if self.variants.is_empty() || self.fusions.is_empty() || self.precisions.is_empty() {
            return Err(Error::Config("weak scaling needs non-empty variant axes".into()));
        }
        if self.reps == 0 || self.steps == 0 {
            return Err(Error::Config("weak scaling needs positive reps and steps".into()));
        }
        Ok(())
    }
}

/// The mesh chosen for one partition count of a weak-scaling study.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct WeakScaleMesh {
    pub partitions: usize,
    pub elems: [usize; 3],
    pub nodes: usize,
}

/// Results of a weak-scaling study. Aggregates carry one best-variant
/// flag per partition count.
#[derive(Debug, Clone)]
pub struct WeakScaleOutcome {
    pub meshes: Vec<WeakScaleMesh>,
    pub records: Vec<RunRecord>,
    pub aggregates: Vec<CellAggregate>,
    pub gate_passed: bool,
    pub gate_failures: Vec<String>,
}

impl WeakScaleOutcome {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, records_to_csv(&self.records))?;
        Ok(())
    }

    pub fn aggregates_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.aggregates)?)
    }

    pub fn write_aggregates_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.aggregates_json()?)?;
        Ok(())
    }

    /// Highest mean throughput per partition count.
    pub fn best_per_partition(&self) -> Vec<(usize, f64)> {
        self.meshes
            .iter()
            .map(|m| {
                let best = self
                    .aggregates
                    .iter()
                    .filter(|a| a.partitions == m.partitions)
                    .map(|a| a.mean_gnops)
                    .fold(0.0f64, f64::max);
                (m.partitions, best)
            })
            .collect()
    }
}

/// Total node count of a periodic (or walled, per `periodic`) box with
/// `elems` elements of order `p`.
fn box_node_count(order: usize, elems: [usize; 3], periodic: [bool; 3]) -> usize {
    let mut n = 1usize;
    for d in 0..3 {
        let ticks = if periodic[d] { elems[d] * order } else { elems[d] * order + 1 };
        n *= ticks;
    }
    n
}

/// Pick an element grid whose node count lands within 10% of `target`,
/// preferring grids whose longest axis divides evenly into `partitions`
/// slabs and breaking remaining ties toward cubic shapes.
///
/// Errors with the nearest achievable grid when the tolerance cannot be
/// met.
pub fn weak_scale_mesh(
    order: usize,
    target: usize,
    partitions: usize,
    periodic: [bool; 3],
) -> Result<[usize; 3]> {
    const TOL_PCT: u32 = 10;
    let per_elem = order * order * order;
    let guess = ((target as f64 / per_elem as f64).cbrt().ceil() as usize).max(1);
    let nmax = (2 * guess + partitions).clamp(4, 64);

    let mut best_feasible: Option<([usize; 3], usize, (u64, u64, u64))> = None;
    let mut nearest: Option<([usize; 3], usize)> = None;
    for nx in 1..=nmax {
        for ny in 1..=nmax {
            for nz in 1..=nmax {
                let elems = [nx, ny, nz];
                let nodes = box_node_count(order, elems, periodic);
                let dist = nodes.abs_diff(target);
                match &mut nearest {
                    Some((_, d)) if *d <= dist => {}
                    _ => nearest = Some((elems, nodes)),
                }
                if dist * 100 > target * TOL_PCT as usize {
                    continue;
                }
                if elems.iter().max().unwrap() * order < partitions {
                    continue;
                }
                // Slab axis is the longest one, ties to the highest index.
                let slab = (0..3).rev().max_by_key(|&d| elems[d]).unwrap();
                let undivided = u64::from(elems[slab] % partitions != 0);
                let aspect =
                    (elems.iter().max().unwrap() * 1000 / elems.iter().min().unwrap()) as u64;
                let score = (undivided, dist as u64, aspect);
                match &best_feasible {
                    Some((_, _, s)) if *s <= score => {}
                    _ => best_feasible = Some((elems, nodes, score)),
                }
            }
        }
    }
    match best_feasible {
        Some((elems, _, _)) => Ok(elems),
        None => {
            let (nearest_grid, nearest_nodes) = nearest.unwrap_or(([1, 1, 1], per_elem));
            Err(Error::NodeTarget {
                target,
                tolerance_pct: TOL_PCT,
                nearest_grid,
                nearest_nodes,
            })
        }
    }
}

/// Run the weak-scaling study: per partition count, find a mesh holding
/// nodes-per-partition near `base`, then sweep the variant axes on it.
pub fn weak_scaling(spec: &WeakScaleSpec) -> Result<WeakScaleOutcome> {
    spec.validate()?;
    let periodic = match spec.case {
        CaseKind::Tgv => [true, true, true],
        CaseKind::Cf => [true, false, true],
    };
    let mut meshes = Vec::with_capacity(spec.partition_counts.len());
    let mut records = Vec::new();
    let mut aggregates = Vec::new();
    let mut gate_passed = true;
    let mut gate_failures = Vec::new();

    for &parts in &spec.partition_counts {
        let target = spec
            .base_nodes_per_partition
            .checked_mul(parts)
            .ok_or_else(|| Error::Config("node target overflow".into()))?;
        let elems = weak_scale_mesh(spec.order, target, parts, periodic)?;
        let nodes = box_node_count(spec.order, elems, periodic);
        meshes.push(WeakScaleMesh { partitions: parts, elems, nodes });

        let sub = SweepSpec {
            case: spec.case,
            variants: spec.variants.clone(),
            fusions: spec.fusions.clone(),
            precisions: spec.precisions.clone(),
            meshes: vec![MeshSize { order: spec.order, elems }],
            partition_counts: vec![parts],
            scatter: spec.scatter,
            reps: spec.reps,
            steps: spec.steps,
            warmup_steps: spec.warmup_steps,
            dt: spec.dt,
            workers: spec.workers.or(Some(parts)),
            chunk_elements: spec.chunk_elements,
            seed: spec.seed,
        };
        let outcome = run_sweep(&sub)?;
        gate_passed &= outcome.gate_passed;
        gate_failures.extend(outcome.gate_failures);
        records.extend(outcome.records);
        aggregates.extend(outcome.aggregates);
    }

    Ok(WeakScaleOutcome { meshes, records, aggregates, gate_passed, gate_failures })
}
