//! Spectral-element kernel laboratory for compressible flow.
//!
//! This crate isolates the hot path of a high-order spectral-element
//! Navier-Stokes solver (convective and diffusive residual assembly on
//! hexahedral meshes with Gauss-Lobatto-Legendre collocation) and makes its
//! memory-access strategy a runtime parameter instead of a compile-time
//! accident. Four access variants (scratch preloading, direct global
//! indexing, per-point line prefetch, precomputed gather tables) crossed
//! with two fusion strategies (one unified pass vs. one pass per equation)
//! give eight kernel configurations that all compute the same residuals;
//! the harness times them, checks them against each other, and reports
//! throughput as giga node-updates per second.
//!
//! The main pieces:
//!
//! - [`basis`]: GLL quadrature rules and Lagrange derivative matrices.
//! - [`mesh`]: structured hexahedral box meshes stored with unstructured
//!   connectivity, Jacobians, gather tables, slab partitions.
//! - [`state`]: conserved flow state, ideal-gas closure, analytic
//!   initial conditions (Taylor-Green vortex, laminar channel flow).
//! - [`kernels`]: the residual kernels themselves, parameterized by
//!   access variant, fusion, and scatter mode.
//! - [`timeloop`]: classical RK4 time integration with per-phase timers.
//! - [`bench`]: design-space sweeps, weak scaling, CSV/JSON reporting.
//! - [`cli`]: the `sembench` command-line front end.
//!
//! Each major capability has a runnable demo under `examples/`; start with
//! `cargo run --release --example tgv_run`.

pub mod basis;
pub mod bench;
pub mod cli;
mod error;
pub mod kernels;
pub mod mesh;
pub mod precision;
pub mod state;
pub mod timeloop;
pub mod verify;

pub use error::{Error, Result};
pub use precision::{Precision, Scalar};

/// Number of worker threads to use, resolving the `SEMBENCH_WORKERS`
/// environment variable against an explicit request.
///
/// Priority: explicit `requested` value, then `SEMBENCH_WORKERS`, then the
/// machine's available parallelism. A malformed or zero environment value is
/// rejected rather than silently ignored so benchmark runs never execute
/// with a surprise thread count.
pub fn resolve_workers(requested: Option<usize>) -> Result<usize> {
    if let Some(n) = requested {
        if n == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        return Ok(n);
    }
    match std::env::var("SEMBENCH_WORKERS") {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(Error::Config(format!(
                "SEMBENCH_WORKERS must be a positive integer, got {raw:?}"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)),
    }
}
