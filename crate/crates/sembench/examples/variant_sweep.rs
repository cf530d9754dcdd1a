//! Sweeping the kernel design space.
//!
//! Runs every access variant and fusion strategy on one small mesh,
//! prints the per-cell throughput table, and shows the cross-variant
//! gate that compares final diagnostics across cells. Sizes here are
//! kept small so the example finishes quickly even unoptimized; real
//! measurements want `--release` and larger meshes (see the `sembench`
//! binary's `sweep` subcommand).
//!
//! ```bash
//! cargo run --release --example variant_sweep
//! ```

use sembench::bench::{run_sweep, MeshSize, SweepSpec};
use sembench::precision::Precision;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SweepSpec {
        precisions: vec![Precision::Fp64],
        meshes: vec![MeshSize { order: 3, elems: [3, 3, 3] }],
        reps: 3,
        steps: 4,
        warmup_steps: 1,
        ..SweepSpec::default()
    };
    let m = spec.meshes[0];
    let nodes: usize = m.elems.iter().map(|&e| e * m.order).product();
    println!("{} cells x {} reps, {nodes} nodes each\n", spec.num_cells(), spec.reps);

    let outcome = run_sweep(&spec)?;
    println!("variant  fusion   mean GNOPS     min ns");
    for a in &outcome.aggregates {
        let flag = if a.best_variant { " <- best" } else { "" };
        println!(
            "{:<8} {:<8} {:>10.3e} {:>10}{flag}",
            a.variant.to_string(),
            a.fusion.to_string(),
            a.mean_gnops,
            a.min_runtime_ns
        );
    }

    println!(
        "\ncross-variant gate: {}",
        if outcome.gate_passed { "passed" } else { "FAILED" }
    );
    for f in &outcome.gate_failures {
        println!("  {f}");
    }
    Ok(())
}
