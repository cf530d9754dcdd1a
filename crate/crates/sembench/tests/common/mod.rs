//! Shared fixtures for the integration tests.

// Each test binary compiles its own copy of this module and none of them
// uses every helper.
#![allow(dead_code)]

pub mod oracle;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use sembench::basis::QuadratureSet;
use sembench::kernels::{
    convection_residual, diffusion_residual, lumped_mass, scatter_accumulate, AccessVariant,
    ContribBuffer, EquationMask, ExecutionPlan, Fusion, KernelContext, ResidualSet, ScatterMode,
};
use sembench::mesh::{
    build_box_mesh, build_gather_table, compute_jacobians, GatherTable, HexMesh, JacobianData,
};
use sembench::state::{Conserved, FlowState, FluidProperties};
use sembench::Scalar;

/// One mesh with everything the kernels need, kept in f64 master form.
pub struct Fixture {
    pub mesh: HexMesh,
    pub quad: QuadratureSet,
    pub jac: JacobianData,
    pub gather: GatherTable,
    pub lumped: Vec<f64>,
    pub props: FluidProperties,
}

pub fn fixture(
    order: usize,
    elems: [usize; 3],
    extents: [f64; 3],
    periodic: [bool; 3],
) -> Fixture {
    let props = FluidProperties::new(1.4, 287.0, 2.0e-3, 0.71).unwrap();
    let mesh = build_box_mesh(order, elems, extents, periodic).unwrap();
    let quad = QuadratureSet::new(order).unwrap();
    let jac = compute_jacobians(&mesh, &quad).unwrap();
    let gather = build_gather_table(&mesh).unwrap();
    let lumped = lumped_mass(&mesh, &quad, &jac);
    Fixture { mesh, quad, jac, gather, lumped, props }
}

impl Fixture {
    pub fn context<S: Scalar>(&self) -> KernelContext<S> {
        KernelContext::new(
            &self.mesh,
            &self.quad,
            &self.jac,
            &self.gather,
            &self.props,
            &self.lumped,
        )
    }

    pub fn state<S: Scalar>(&self, cons: &Conserved<f64>) -> FlowState<S> {
        FlowState::from_conserved(cast_conserved(cons), &self.props).unwrap()
    }
}

/// Random thermodynamically valid conserved fields: density near one,
/// moderate velocities, pressures near a hundred.
pub fn random_conserved(num_nodes: usize, seed: u64) -> Conserved<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gamma_m1 = 0.4;
    let mut c = Conserved::zeros(num_nodes);
    for n in 0..num_nodes {
        let rho: f64 = rng.gen_range(0.8..1.2);
        let u = [
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
            rng.gen_range(-0.3..0.3),
        ];
        let p: f64 = rng.gen_range(80.0..120.0);
        let ke = 0.5 * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        c.rho[n] = rho;
        for d in 0..3 {
            c.mom[d][n] = rho * u[d];
        }
        c.energy[n] = p / gamma_m1 + ke;
    }
    c
}

pub fn cast_conserved<S: Scalar>(src: &Conserved<f64>) -> Conserved<S> {
    let n = src.num_nodes();
    let mut out = Conserved::zeros(n);
    for node in 0..n {
        out.rho[node] = S::from_f64(src.rho[node]);
        for d in 0..3 {
            out.mom[d][node] = S::from_f64(src.mom[d][node]);
        }
        out.energy[node] = S::from_f64(src.energy[node]);
    }
    out
}

/// Convective residual assembled through the public kernel pipeline.
pub fn assemble_convection<S: Scalar>(
    fix: &Fixture,
    ctx: &KernelContext<S>,
    state: &FlowState<S>,
    access: AccessVariant,
    fusion: Fusion,
    scatter: ScatterMode,
    workers: usize,
) -> ResidualSet<S> {
    assemble(fix, ctx, state, access, fusion, scatter, workers, Part::Convection)
}

/// Diffusive residual assembled through the public kernel pipeline.
pub fn assemble_diffusion<S: Scalar>(
    fix: &Fixture,
    ctx: &KernelContext<S>,
    state: &FlowState<S>,
    access: AccessVariant,
    fusion: Fusion,
    scatter: ScatterMode,
    workers: usize,
) -> ResidualSet<S> {
    assemble(fix, ctx, state, access, fusion, scatter, workers, Part::Diffusion)
}

enum Part {
    Convection,
    Diffusion,
}

#[allow(clippy::too_many_arguments)]
fn assemble<S: Scalar>(
    fix: &Fixture,
    ctx: &KernelContext<S>,
    state: &FlowState<S>,
    access: AccessVariant,
    fusion: Fusion,
    scatter: ScatterMode,
    workers: usize,
    part: Part,
) -> ResidualSet<S> {
    let plan = ExecutionPlan {
        workers,
        chunk_elements: 2,
        check_finite: true,
        partition_ranges: None,
    };
    let mut contrib =
        ContribBuffer::new(fix.mesh.num_elements(), fix.mesh.nodes_per_element());
    let mut residual =
        ResidualSet::new(fix.lumped.iter().map(|&m| S::from_f64(m)).collect());
    let passes: Vec<EquationMask> = match fusion {
        Fusion::Unified => vec![EquationMask::ALL],
        Fusion::Split => EquationMask::SPLIT_PASSES.to_vec(),
    };
    for mask in passes {
        let mask = match part {
            Part::Convection => mask,
            Part::Diffusion => EquationMask {
                mass: false,
                momentum: mask.momentum,
                energy: mask.energy,
            },
        };
        if !(mask.mass || mask.momentum || mask.energy) {
            continue;
        }
        contrib.fill_components(mask);
        match part {
            Part::Convection => {
                convection_residual(ctx, state, access, mask, &plan, &mut contrib).unwrap()
            }
            Part::Diffusion => {
                diffusion_residual(ctx, state, access, mask, &plan, &mut contrib).unwrap()
            }
        }
        scatter_accumulate(ctx, &contrib, scatter, mask, &plan, &mut residual);
    }
    residual
}

/// Largest entry-wise deviation between two residual sets, relative to
/// the per-component infinity norm of `reference`.
pub fn max_rel_diff<S: Scalar>(reference: &ResidualSet<S>, other: &ResidualSet<S>) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..5 {
        let a = reference.component(c);
        let b = other.component(c);
        let scale = a
            .iter()
            .fold(0.0f64, |m, &v| m.max(v.to_f64().abs()))
            .max(1e-300);
        for (&x, &y) in a.iter().zip(b) {
            worst = worst.max((x.to_f64() - y.to_f64()).abs() / scale);
        }
    }
    worst
}

/// Largest deviation of the five named global component vectors from a
/// residual set, relative to each component's oracle infinity norm.
pub fn max_rel_diff_vs_vectors(reference: &[Vec<f64>; 5], other: &ResidualSet<f64>) -> f64 {
    let mut worst = 0.0f64;
    for c in 0..5 {
        let a = &reference[c];
        let b = other.component(c);
        let scale = a.iter().fold(0.0f64, |m, &v| m.max(v.abs())).max(1e-300);
        for (&x, &y) in a.iter().zip(b) {
            worst = worst.max((x - y).abs() / scale);
        }
    }
    worst
}
