//! Weak scaling: grow the mesh with the partition count.
//!
//! Asks the harness for meshes near 4000 nodes per partition at 1 and 2
//! partitions, times two access variants on each, and prints the best
//! per partition count. The interesting part is the mesh search: node
//! counts only come in coarse steps (whole elements), so the harness
//! picks the grid closest to the target and reports the deviation.
//!
//! ```bash
//! cargo run --release --example weak_scaling
//! ```

use sembench::bench::{weak_scaling, WeakScaleSpec};
use sembench::kernels::{AccessVariant, Fusion};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = WeakScaleSpec {
        base_nodes_per_partition: 4000,
        partition_counts: vec![1, 2],
        order: 3,
        variants: vec![AccessVariant::Base, AccessVariant::Reg],
        fusions: vec![Fusion::Unified],
        reps: 2,
        steps: 2,
        warmup_steps: 1,
        ..WeakScaleSpec::default()
    };
    let outcome = weak_scaling(&spec)?;

    for m in &outcome.meshes {
        let target = spec.base_nodes_per_partition * m.partitions;
        let dev = 100.0 * (m.nodes as f64 - target as f64) / target as f64;
        println!(
            "P = {}: elements {:?} -> {} nodes (target {target}, {dev:+.1}%)",
            m.partitions, m.elems, m.nodes
        );
    }

    println!("\nbest variant per partition count:");
    for (parts, g) in outcome.best_per_partition() {
        let best = outcome
            .aggregates
            .iter()
            .find(|a| a.partitions == parts && a.best_variant)
            .expect("every partition count has a best cell");
        println!("  P = {parts}: {}/{} at {g:.3e} GNOPS", best.variant, best.fusion);
    }
    Ok(())
}
