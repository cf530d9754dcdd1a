//! The `sembench` command line: single runs, design-space sweeps,
//! weak-scaling studies, and the correctness checks.
//!
//! Human-readable summaries go to stdout; machine-readable output is
//! written only when `--out` names a file (CSV for records, a sibling
//! `.json` for aggregates). Exit codes: 0 success, 1 runtime or
//! verification failure, 2 command-line errors.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand};

use crate::bench::{run_sweep, weak_scaling, MeshSize, SweepSpec, WeakScaleSpec};
use crate::error::{Error, Result};
use crate::kernels::{AccessVariant, Fusion, KernelConfig, ScatterMode};
use crate::precision::Precision;
use crate::timeloop::{run_with_dumps, CaseKind, RunStats, SimConfig};

#[derive(Debug, Parser)]
#[command(
    name = "sembench",
    version,
    about = "Spectral-element compressible-flow kernel laboratory",
    long_about = "Times the convection/diffusion residual pipeline of a high-order \
                  spectral-element flow solver under four memory-access variants, two \
                  kernel-fusion strategies, two scatter modes, and two floating-point \
                  precisions, and reports throughput in giga node-updates per second."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute one configuration and print its timing summary.
    Run(RunArgs),
    /// Run the variant/fusion/precision cross product and report CSV.
    Sweep(SweepArgs),
    /// Grow mesh and partitions together, nodes per partition constant.
    WeakScale(WeakScaleArgs),
    /// Run the named correctness checks and report pass/fail lines.
    Verify(VerifyArgs),
}

fn parse_elems(s: &str) -> std::result::Result<[usize; 3], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected NX,NY,NZ, got {s:?}"));
    }
    let mut out = [0usize; 3];
    for (d, p) in parts.iter().enumerate() {
        out[d] = p
            .trim()
            .parse()
            .map_err(|e| format!("bad element count {p:?}: {e}"))?;
        if out[d] == 0 {
            return Err("element counts must be at least 1".into());
        }
    }
    Ok(out)
}

#[derive(Debug, Clone)]
struct VariantList(Vec<AccessVariant>);

fn parse_variant_list(s: &str) -> std::result::Result<VariantList, String> {
    if s == "all" {
        return Ok(VariantList(AccessVariant::ALL.to_vec()));
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|e: Error| e.to_string()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(VariantList)
}

#[derive(Debug, Clone)]
struct FusionList(Vec<Fusion>);

fn parse_fusion_list(s: &str) -> std::result::Result<FusionList, String> {
    if s == "all" {
        return Ok(FusionList(Fusion::ALL.to_vec()));
    }
    s.split(',')
        .map(|v| v.trim().parse().map_err(|e: Error| e.to_string()))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(FusionList)
}

#[derive(Debug, Clone)]
struct PrecisionList(Vec<Precision>);

fn parse_precision_list(s: &str) -> std::result::Result<PrecisionList, String> {
    if s == "all" {
        return Ok(PrecisionList(vec![Precision::Fp64, Precision::Fp32]));
    }
    s.split(',')
        .map(|v| v.trim().parse())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map(PrecisionList)
}

#[derive(Debug, Clone)]
struct PartitionList(Vec<usize>);

fn parse_partition_list(s: &str) -> std::result::Result<PartitionList, String> {
    let parts = s
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<usize>()
                .map_err(|e| format!("bad partition count {v:?}: {e}"))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if parts.iter().any(|&p| p == 0) {
        return Err("partition counts must be at least 1".into());
    }
    Ok(PartitionList(parts))
}

/// Flags shared by every simulation-running subcommand.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Flow case: tgv (Taylor-Green vortex) or cf (channel flow)
    #[arg(long, default_value = "tgv")]
    case: CaseKind,

    /// Polynomial order of the element basis
    #[arg(long, default_value_t = 3)]
    order: usize,

    /// Time-step size
    #[arg(long, default_value_t = 2.0e-4)]
    dt: f64,

    /// Timed steps per run
    #[arg(long, default_value_t = 20)]
    steps: usize,

    /// Untimed steps before the timers start
    #[arg(long, default_value_t = 1)]
    warmup_steps: usize,

    /// Scatter mode: atomic or deterministic
    #[arg(long, default_value = "deterministic")]
    scatter: ScatterMode,

    /// Worker threads (default: SEMBENCH_WORKERS, then all cores)
    #[arg(long)]
    workers: Option<usize>,

    /// Elements per worker task when no partition ranges apply
    #[arg(long, default_value_t = 8)]
    chunk: usize,

    /// Seed for randomized diagnostics
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Element counts NX,NY,NZ
    #[arg(long, value_parser = parse_elems, default_value = "4,4,4")]
    elems: [usize; 3],

    /// Memory-access variant: base, no_prl, prl_prf, or reg
    #[arg(long, default_value = "base")]
    variant: AccessVariant,

    /// Kernel fusion: unified or split
    #[arg(long, default_value = "unified")]
    fusion: Fusion,

    /// Floating-point precision: fp64 or fp32
    #[arg(long, default_value = "fp64")]
    precision: Precision,

    /// Partition count
    #[arg(long, default_value_t = 1)]
    partitions: usize,

    /// Scan kernel output for non-finite values every pass
    #[arg(long)]
    check_finite: bool,

    /// Write the run statistics as JSON to this file
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write the mesh dump (JSON header + binary payload) to this file
    #[arg(long)]
    dump_mesh: Option<PathBuf>,

    /// Write the final state dump to this file
    #[arg(long)]
    dump_state: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Element counts NX,NY,NZ; repeat the flag for several mesh sizes
    #[arg(long, value_parser = parse_elems)]
    elems: Vec<[usize; 3]>,

    /// Access variants to sweep: comma list or "all"
    #[arg(long, value_parser = parse_variant_list, default_value = "all")]
    variant: VariantList,

    /// Fusion strategies to sweep: comma list or "all"
    #[arg(long, value_parser = parse_fusion_list, default_value = "all")]
    fusion: FusionList,

    /// Precisions to sweep: comma list or "all"
    #[arg(long, value_parser = parse_precision_list, default_value = "all")]
    precision: PrecisionList,

    /// Partition counts to sweep, comma separated
    #[arg(long, value_parser = parse_partition_list, default_value = "1")]
    partitions: PartitionList,

    /// Repetitions per cell
    #[arg(long, default_value_t = 5)]
    reps: usize,

    /// Write the per-repetition CSV here (aggregates go to .json sibling)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WeakScaleArgs {
    #[command(flatten)]
    common: CommonArgs,

    /// Target nodes per partition
    #[arg(long, default_value_t = 50_000)]
    base_nodes: usize,

    /// Ascending partition counts, comma separated
    #[arg(long, value_parser = parse_partition_list, default_value = "1,2,4")]
    partitions: PartitionList,

    /// Access variants to compare: comma list or "all"
    #[arg(long, value_parser = parse_variant_list, default_value = "all")]
    variant: VariantList,

    /// Fusion strategies to compare: comma list or "all"
    #[arg(long, value_parser = parse_fusion_list, default_value = "all")]
    fusion: FusionList,

    /// Precisions to compare: comma list or "all"
    #[arg(long, value_parser = parse_precision_list, default_value = "fp64")]
    precision: PrecisionList,

    /// Repetitions per cell
    #[arg(long, default_value_t = 3)]
    reps: usize,

    /// Write the per-repetition CSV here (aggregates go to .json sibling)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Seed for the randomized checks
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Parse `args` and execute the chosen subcommand, returning the
/// process exit code.
pub fn parse_and_dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

/// Full help text of the command and all subcommands, for tests that
/// confirm every flag is documented.
pub fn long_help() -> String {
    let mut cmd = Cli::command();
    let mut out = cmd.render_long_help().to_string();
    for sub in Cli::command().get_subcommands() {
        let mut sub = sub.clone();
        out.push('\n');
        out.push_str(&sub.render_long_help().to_string());
    }
    out
}

fn dispatch(command: Command) -> Result<i32> {
    match command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::WeakScale(args) => cmd_weak_scale(args),
        Command::Verify(args) => cmd_verify(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let config = SimConfig {
        case: args.common.case,
        order: args.common.order,
        elems: args.elems,
        extents: None,
        dt: args.common.dt,
        num_steps: args.common.steps,
        warmup_steps: args.common.warmup_steps,
        kernel: KernelConfig {
            access: args.variant,
            fusion: args.fusion,
            scatter: args.common.scatter,
            precision: args.precision,
        },
        partitions: args.partitions,
        workers: args.common.workers,
        chunk_elements: args.common.chunk,
        check_finite: args.check_finite,
        seed: args.common.seed,
    };
    let stats = run_with_dumps(
        &config,
        args.dump_mesh.as_deref(),
        args.dump_state.as_deref(),
    )?;
    print_run_summary(&config, &stats);
    if let Some(path) = &args.out {
        std::fs::write(path, serde_json::to_string_pretty(&stats)?)?;
        println!("wrote statistics to {}", path.display());
    }
    Ok(0)
}

fn print_run_summary(config: &SimConfig, stats: &RunStats) {
    println!(
        "{} on {}x{}x{} elements at order {} ({} nodes)",
        config.case,
        config.elems[0],
        config.elems[1],
        config.elems[2],
        config.order,
        stats.nodes
    );
    println!(
        "kernel {}/{} {} with {} scatter, {} partition(s)",
        config.kernel.access,
        config.kernel.fusion,
        config.kernel.precision,
        config.kernel.scatter,
        config.partitions
    );
    let g = crate::bench::gnops(
        stats.nodes as u64,
        stats.rk_steps as u64,
        stats.time_steps as u64,
        stats.runtime_ns.max(1),
    )
    .unwrap_or(0.0);
    let gnops_text = if g >= 1e-3 {
        format!("{g:.4}")
    } else {
        format!("{g:.3e}")
    };
    println!(
        "{} steps of dt {:.3e} in {:.3} ms: {gnops_text} GNOPS",
        stats.time_steps,
        config.dt,
        stats.runtime_ns as f64 / 1e6
    );
    let pct = |ns: u64| 100.0 * ns as f64 / stats.runtime_ns.max(1) as f64;
    println!(
        "phases: convection {:.1}%, diffusion {:.1}%, scatter {:.1}%, update {:.1}%",
        pct(stats.t_convection_ns),
        pct(stats.t_diffusion_ns),
        pct(stats.t_scatter_ns),
        pct(stats.t_update_ns)
    );
    let d0 = &stats.initial_diagnostics;
    let d1 = &stats.final_diagnostics;
    println!(
        "mass {:.6} -> {:.6} (drift {:.2e}), energy {:.6} -> {:.6}, peak speed {:.4}",
        d0.total_mass,
        d1.total_mass,
        ((d1.total_mass - d0.total_mass) / d0.total_mass).abs(),
        d0.total_energy,
        d1.total_energy,
        d1.max_speed
    );
}

fn sweep_spec_from(args: &SweepArgs) -> SweepSpec {
    let meshes = if args.elems.is_empty() {
        vec![MeshSize { order: args.common.order, elems: [4, 4, 4] }]
    } else {
        args.elems
            .iter()
            .map(|&elems| MeshSize { order: args.common.order, elems })
            .collect()
    };
    SweepSpec {
        case: args.common.case,
        variants: args.variant.0.clone(),
        fusions: args.fusion.0.clone(),
        precisions: args.precision.0.clone(),
        meshes,
        partition_counts: args.partitions.0.clone(),
        scatter: args.common.scatter,
        reps: args.reps,
        steps: args.common.steps,
        warmup_steps: args.common.warmup_steps,
        dt: args.common.dt,
        workers: args.common.workers,
        chunk_elements: args.common.chunk,
        seed: args.common.seed,
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<i32> {
    let spec = sweep_spec_from(&args);
    let outcome = run_sweep(&spec)?;
    print_aggregates(&outcome.aggregates);
    report_gate(outcome.gate_passed, &outcome.gate_failures);
    write_outputs(args.out.as_deref(), |csv, json| {
        outcome.write_csv(csv)?;
        outcome.write_aggregates_json(json)?;
        Ok(())
    })?;
    Ok(if outcome.gate_passed { 0 } else { 1 })
}

fn cmd_weak_scale(args: WeakScaleArgs) -> Result<i32> {
    let spec = WeakScaleSpec {
        base_nodes_per_partition: args.base_nodes,
        partition_counts: args.partitions.0.clone(),
        order: args.common.order,
        case: args.common.case,
        variants: args.variant.0.clone(),
        fusions: args.fusion.0.clone(),
        precisions: args.precision.0.clone(),
        scatter: args.common.scatter,
        reps: args.reps,
        steps: args.common.steps,
        warmup_steps: args.common.warmup_steps,
        dt: args.common.dt,
        workers: args.common.workers,
        chunk_elements: args.common.chunk,
        seed: args.common.seed,
    };
    let outcome = weak_scaling(&spec)?;
    for m in &outcome.meshes {
        let target = spec.base_nodes_per_partition * m.partitions;
        println!(
            "P={}: {}x{}x{} elements, {} nodes (target {target}, deviation {:.1}%)",
            m.partitions,
            m.elems[0],
            m.elems[1],
            m.elems[2],
            m.nodes,
            100.0 * (m.nodes as f64 - target as f64).abs() / target as f64
        );
    }
    print_aggregates(&outcome.aggregates);
    println!("best throughput per partition count:");
    for (p, g) in outcome.best_per_partition() {
        println!("  P={p}: {g:.4} GNOPS");
    }
    report_gate(outcome.gate_passed, &outcome.gate_failures);
    write_outputs(args.out.as_deref(), |csv, json| {
        outcome.write_csv(csv)?;
        outcome.write_aggregates_json(json)?;
        Ok(())
    })?;
    Ok(if outcome.gate_passed { 0 } else { 1 })
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    let results = crate::verify::run_all(args.seed);
    let mut failures = 0usize;
    for r in &results {
        println!("{r}");
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{} of {} checks passed",
        results.len() - failures,
        results.len()
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn print_aggregates(aggregates: &[crate::bench::CellAggregate]) {
    println!(
        "{:<5} {:<8} {:<8} {:<5} {:>3} {:>9} {:>14} {:>10}  {}",
        "case", "variant", "fusion", "prec", "P", "nodes", "mean ms", "GNOPS", "best"
    );
    for a in aggregates {
        println!(
            "{:<5} {:<8} {:<8} {:<5} {:>3} {:>9} {:>14.3} {:>10.4}  {}",
            a.case.to_string(),
            a.variant.to_string(),
            a.fusion.to_string(),
            a.precision.to_string(),
            a.partitions,
            a.nodes,
            a.mean_runtime_ns / 1e6,
            a.mean_gnops,
            if a.best_variant { "*" } else { "" }
        );
    }
}

fn report_gate(passed: bool, failures: &[String]) {
    if passed {
        println!("cross-variant correctness gate: passed");
    } else {
        println!("cross-variant correctness gate: FAILED");
        for f in failures {
            println!("  {f}");
        }
    }
}

fn write_outputs<F>(out: Option<&std::path::Path>, write: F) -> Result<()>
where
    F: FnOnce(&std::path::Path, &std::path::Path) -> Result<()>,
{
    let Some(csv_path) = out else { return Ok(()) };
    let json_path = csv_path.with_extension("json");
    write(csv_path, &json_path)?;
    println!(
        "wrote records to {}, aggregates to {}",
        csv_path.display(),
        json_path.display()
    );
    Ok(())
}
