//! A short Taylor-Green vortex run.
//!
//! Integrates the periodic vortex for 30 steps and prints the wall-clock
//! accounting and the conservation diagnostics. Build with `--release`
//! for meaningful throughput numbers.
//!
//! ```bash
//! cargo run --release --example tgv_run
//! ```

use sembench::bench::gnops;
use sembench::kernels::KernelConfig;
use sembench::timeloop::{run_simulation, CaseKind, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = SimConfig {
        case: CaseKind::Tgv,
        order: 3,
        elems: [4, 4, 4],
        extents: None,
        dt: 1e-4,
        num_steps: 30,
        warmup_steps: 2,
        kernel: KernelConfig::default(),
        partitions: 1,
        workers: None,
        chunk_elements: 8,
        check_finite: true,
        seed: 0,
    };

    let stats = run_simulation(&config)?;
    let secs = stats.runtime_ns as f64 * 1e-9;
    let g = gnops(
        stats.nodes as u64,
        stats.rk_steps as u64,
        stats.time_steps as u64,
        stats.runtime_ns,
    )?;
    let g = if g >= 1e-2 { format!("{g:.3}") } else { format!("{g:.2e}") };
    println!(
        "{} nodes, {} timed steps in {secs:.2} s ({g} GNOPS)",
        stats.nodes, stats.time_steps
    );

    let timed = stats.t_convection_ns + stats.t_diffusion_ns + stats.t_scatter_ns
        + stats.t_update_ns;
    let pct = |ns: u64| 100.0 * ns as f64 / timed.max(1) as f64;
    println!(
        "phase split: convection {:.0}%, diffusion {:.0}%, scatter {:.0}%, update {:.0}%",
        pct(stats.t_convection_ns),
        pct(stats.t_diffusion_ns),
        pct(stats.t_scatter_ns),
        pct(stats.t_update_ns)
    );

    let i = &stats.initial_diagnostics;
    let f = &stats.final_diagnostics;
    println!(
        "mass drift {:.2e}, energy drift {:.2e}, peak speed {:.4} -> {:.4}",
        ((f.total_mass - i.total_mass) / i.total_mass).abs(),
        ((f.total_energy - i.total_energy) / i.total_energy).abs(),
        i.max_speed,
        f.max_speed
    );
    Ok(())
}
