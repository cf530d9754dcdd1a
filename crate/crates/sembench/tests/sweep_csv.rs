//! Sweep harness output contracts: CSV schema, parse round trips, and
//! the weak-scaling mesh search.

mod common;

use sembench::bench::{
    gnops, parse_csv, run_sweep, weak_scale_mesh, weak_scaling, MeshSize, SweepSpec,
    WeakScaleSpec, CSV_HEADER,
};
use sembench::kernels::{AccessVariant, Fusion, ScatterMode};
use sembench::timeloop::CaseKind;
use sembench::Precision;

fn tiny_sweep_spec() -> SweepSpec {
    SweepSpec {
        case: CaseKind::Tgv,
        variants: vec![AccessVariant::Base, AccessVariant::Reg],
        fusions: vec![Fusion::Unified, Fusion::Split],
        precisions: vec![Precision::Fp64],
        meshes: vec![MeshSize { order: 2, elems: [2, 2, 2] }],
        partition_counts: vec![1],
        scatter: ScatterMode::Deterministic,
        reps: 2,
        steps: 2,
        warmup_steps: 0,
        workers: Some(1),
        ..SweepSpec::default()
    }
}

#[test]
fn csv_document_round_trips_and_gnops_recomputes_bit_for_bit() {
    let outcome = run_sweep(&tiny_sweep_spec()).unwrap();
    assert!(outcome.gate_passed, "gate failures: {:?}", outcome.gate_failures);
    assert_eq!(outcome.records.len(), 2 * 2 * 2);

    let dir = tempfile::tempdir().unwrap();
    let csv_path = dir.path().join("sweep.csv");
    outcome.write_csv(&csv_path).unwrap();
    let text = std::fs::read_to_string(&csv_path).unwrap();

    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    assert_eq!(text.lines().count(), 1 + outcome.records.len());

    let parsed = parse_csv(&text).unwrap();
    assert_eq!(parsed.len(), outcome.records.len());
    for (row, original) in parsed.iter().zip(&outcome.records) {
        assert_eq!(row.status, "ok");
        assert_eq!(row.variant, original.variant);
        assert_eq!(row.fusion, original.fusion);
        assert_eq!(row.rep, original.rep);
        assert_eq!(row.runtime_ns, original.runtime_ns);
        // The throughput column must be recomputable from its own row
        // without losing a single bit.
        let recomputed = gnops(
            row.nodes as u64,
            row.rk_steps as u64,
            row.time_steps as u64,
            row.runtime_ns,
        )
        .unwrap();
        assert_eq!(recomputed.to_bits(), row.gnops.to_bits());
        assert_eq!(row.gnops.to_bits(), original.gnops.to_bits());
    }
}

#[test]
fn aggregates_mark_exactly_one_best_variant_per_group() {
    let outcome = run_sweep(&tiny_sweep_spec()).unwrap();
    assert_eq!(outcome.aggregates.len(), 4);
    let best: Vec<_> = outcome.aggregates.iter().filter(|a| a.best_variant).collect();
    assert_eq!(best.len(), 1, "one (case, precision, nodes, partitions) group here");
    let top = best[0].mean_gnops;
    for a in &outcome.aggregates {
        assert!(a.mean_gnops <= top);
        assert!(a.min_runtime_ns as f64 <= a.mean_runtime_ns);
    }
}

#[test]
fn aggregates_json_is_machine_readable() {
    let outcome = run_sweep(&tiny_sweep_spec()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agg.json");
    outcome.write_aggregates_json(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let rows = parsed.as_array().unwrap();
    assert_eq!(rows.len(), outcome.aggregates.len());
    for row in rows {
        assert!(row["mean_gnops"].as_f64().unwrap() > 0.0);
        assert!(row["precision"].as_str() == Some("fp64"));
    }
}

#[test]
fn deterministic_sweep_records_identical_diagnostics_across_cells() {
    // The correctness gate's raw material: every variant, fusion, and
    // repetition of a (precision, nodes, partitions) group must land on
    // the same flow field.
    let outcome = run_sweep(&tiny_sweep_spec()).unwrap();
    let reference = outcome.records[0].final_diagnostics.unwrap();
    for r in &outcome.records[1..] {
        let d = r.final_diagnostics.unwrap();
        assert_eq!(d.total_mass.to_bits(), reference.total_mass.to_bits());
        assert_eq!(d.total_energy.to_bits(), reference.total_energy.to_bits());
        assert_eq!(d.max_speed.to_bits(), reference.max_speed.to_bits());
    }
}

#[test]
fn failed_cells_fail_the_gate_but_not_the_sweep() {
    let mut spec = tiny_sweep_spec();
    spec.partition_counts = vec![500];
    let outcome = run_sweep(&spec).unwrap();
    assert!(!outcome.gate_passed);
    assert!(outcome.records.iter().all(|r| r.status.starts_with("error")));
}

#[test]
fn weak_scale_meshes_stay_within_ten_percent() {
    // `target` is the total node count wanted for one partition count;
    // a weak-scaling driver passes base * P.
    for (base, parts) in [(1000usize, vec![1usize, 2, 4]), (4000, vec![1, 2])] {
        for &p in &parts {
            let want = base * p;
            let elems = weak_scale_mesh(3, want, p, [true; 3]).unwrap();
            let nodes: usize = elems.iter().map(|&e| e * 3).product();
            let dev = (nodes as f64 - want as f64).abs() / want as f64;
            assert!(
                dev <= 0.10,
                "target {want} partitions {p}: got {elems:?} = {nodes} nodes ({dev:.2}%)"
            );
        }
    }
    // A target that admits an exact cubic grid divisible by the
    // partition count must be hit exactly.
    assert_eq!(weak_scale_mesh(3, 1728, 4, [true; 3]).unwrap(), [4, 4, 4]);
}

#[test]
fn unreachable_node_targets_propose_the_nearest_grid() {
    let err = weak_scale_mesh(4, 10, 1, [true; 3]).unwrap_err();
    let text = err.to_string();
    assert!(text.contains("10"), "error should name the target: {text}");
    assert!(text.contains("nearest"), "error should propose an alternative: {text}");
}

#[test]
fn weak_scaling_flags_a_best_variant_per_partition_count() {
    let spec = WeakScaleSpec {
        base_nodes_per_partition: 216,
        partition_counts: vec![1, 2],
        order: 2,
        case: CaseKind::Tgv,
        variants: vec![AccessVariant::Base, AccessVariant::NoPrl],
        fusions: vec![Fusion::Unified],
        precisions: vec![Precision::Fp64],
        scatter: ScatterMode::Deterministic,
        reps: 1,
        steps: 1,
        warmup_steps: 0,
        workers: Some(1),
        ..WeakScaleSpec::default()
    };
    let outcome = weak_scaling(&spec).unwrap();
    assert_eq!(outcome.meshes.len(), 2);
    for m in &outcome.meshes {
        let want = 216 * m.partitions;
        let dev = (m.nodes as f64 - want as f64).abs() / want as f64;
        assert!(dev <= 0.10, "P={}: {} nodes vs target {want}", m.partitions, m.nodes);
    }
    let best = outcome.best_per_partition();
    assert_eq!(best.len(), 2);
    for (p, g) in best {
        assert!(g > 0.0, "partition count {p} reported no throughput");
    }
    for &p in &[1usize, 2] {
        let flags = outcome
            .aggregates
            .iter()
            .filter(|a| a.partitions == p && a.best_variant)
            .count();
        assert_eq!(flags, 1, "expected one best flag for P={p}");
    }
}
