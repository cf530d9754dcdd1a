//! Convective residual in strong collocation form.
//!
//! At every quadrature point the three convective fluxes (mass rho u,
//! momentum rho u times u plus pressure, energy (E + p) u) are
//! differentiated along the tensor lines, contracted with the inverse
//! Jacobian, and the divergence deposited at that point weighted by
//! w det J. With single-valued nodal fluxes the weighted column sums of
//! the derivative matrix telescope across element faces, so the summed
//! residual vanishes on periodic meshes to roundoff.

use super::access::{
    fill_line_buffers, line_offsets, stage_element, DirectView, FieldRefs, LineBufferView,
    QpAccess, StagedView, StencilView, NUM_Q, Q_E, Q_MOM, Q_P, Q_RHO, Q_U,
};
use super::context::KernelContext;
use super::{check_element_finite, run_chunked, AccessVariant, ContribBuffer, EquationMask,
    ExecutionPlan};
use crate::mesh::inv_linearize;
use crate::precision::Scalar;
use crate::state::FlowState;
use crate::Result;

/// Divergence of one flux family at the current point. Per reference
/// axis, the physical flux components at each line node are contracted
/// with that axis's inverse-Jacobian row (evaluated at the point), the
/// result differentiated with the matching derivative-matrix row, and
/// the three axis terms summed. The loop nest fixes the summation order
/// every access variant shares.
#[inline(always)]
fn strong_divergence<S, A, F>(v: &A, d_rows: [&[S]; 3], inv: &[S], flux: F) -> S
where
    S: Scalar,
    A: QpAccess<S>,
    F: Fn(&A, usize, usize, usize) -> S,
{
    let mut div = S::zero();
    for r in 0..3 {
        let mut acc = S::zero();
        for (m, &dm) in d_rows[r].iter().enumerate() {
            let mut h = S::zero();
            for c in 0..3 {
                h += inv[r * 3 + c] * flux(v, r, m, c);
            }
            acc += dm * h;
        }
        div += acc;
    }
    div
}

/// All masked equations at one quadrature point; writes only the
/// point's own slot in each component.
#[inline(always)]
fn qp_convection<S: Scalar, A: QpAccess<S>>(
    v: &A,
    d_rows: [&[S]; 3],
    inv: &[S],
    wd: S,
    mask: EquationMask,
    nloc: usize,
    a: usize,
    out: &mut [S],
) {
    if mask.mass {
        let div = strong_divergence(v, d_rows, inv, |v, ax, m, c| {
            v.line(Q_RHO, ax, m) * v.line(Q_U + c, ax, m)
        });
        out[a] += wd * div;
    }
    if mask.momentum {
        for d in 0..3 {
            let div = strong_divergence(v, d_rows, inv, |v, ax, m, c| {
                let mut f = v.line(Q_MOM + d, ax, m) * v.line(Q_U + c, ax, m);
                if c == d {
                    f += v.line(Q_P, ax, m);
                }
                f
            });
            out[(1 + d) * nloc + a] += wd * div;
        }
    }
    if mask.energy {
        let div = strong_divergence(v, d_rows, inv, |v, ax, m, c| {
            (v.line(Q_E, ax, m) + v.line(Q_P, ax, m)) * v.line(Q_U + c, ax, m)
        });
        out[4 * nloc + a] += wd * div;
    }
}

/// Nodal quantities the masked equations gather.
fn needed_quantities(mask: EquationMask) -> Vec<usize> {
    let mut q = Vec::new();
    if mask.mass {
        q.extend([Q_RHO, Q_U, Q_U + 1, Q_U + 2]);
    }
    if mask.momentum {
        q.extend([Q_MOM, Q_MOM + 1, Q_MOM + 2, Q_P, Q_U, Q_U + 1, Q_U + 2]);
    }
    if mask.energy {
        q.extend([Q_E, Q_P, Q_U, Q_U + 1, Q_U + 2]);
    }
    q.sort_unstable();
    q.dedup();
    q
}

/// Convective contributions for all elements, added into `out`
/// (element blocks the caller has zeroed for the masked components).
pub fn convection_residual<S: Scalar>(
    ctx: &KernelContext<S>,
    state: &FlowState<S>,
    access: AccessVariant,
    mask: EquationMask,
    plan: &ExecutionPlan,
    out: &mut ContribBuffer<S>,
) -> Result<()> {
    assert_eq!(out.num_elements(), ctx.num_elements());
    assert_eq!(state.num_nodes(), ctx.num_nodes());
    let fields = FieldRefs::new(state);
    let nloc = ctx.nodes_per_element();
    let np = ctx.order() + 1;
    let order = ctx.order();
    let stride = ctx.stride();
    let needed = needed_quantities(mask);
    let check = plan.check_finite;

    run_chunked(plan, out, |e0, data| {
        let mut scratch = vec![S::zero(); NUM_Q * nloc];
        let mut lines = vec![S::zero(); NUM_Q * 3 * np];
        for (slot, block) in data.chunks_mut(5 * nloc).enumerate() {
            let e = e0 + slot;
            match access {
                AccessVariant::Base => {
                    stage_element(&fields, ctx.element_nodes(e), &needed, nloc, &mut scratch);
                    for a in 0..nloc {
                        let (i, j, k) = inv_linearize(order, a);
                        let off = line_offsets(stride, i, j, k);
                        let view = StagedView { scratch: &scratch, nloc, off, stride, a };
                        qp_convection(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mask,
                            nloc,
                            a,
                            block,
                        );
                    }
                }
                AccessVariant::NoPrl => {
                    let nodes = ctx.element_nodes(e);
                    for a in 0..nloc {
                        let (i, j, k) = inv_linearize(order, a);
                        let off = line_offsets(stride, i, j, k);
                        let view = DirectView { fields: &fields, nodes, off, stride, a };
                        qp_convection(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mask,
                            nloc,
                            a,
                            block,
                        );
                    }
                }
                AccessVariant::PrlPrf => {
                    stage_element(&fields, ctx.element_nodes(e), &needed, nloc, &mut scratch);
                    for a in 0..nloc {
                        let (i, j, k) = inv_linearize(order, a);
                        let off = line_offsets(stride, i, j, k);
                        fill_line_buffers(&scratch, nloc, np, off, stride, &needed, &mut lines);
                        let view =
                            LineBufferView { lines: &lines, scratch: &scratch, np, nloc, a };
                        qp_convection(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mask,
                            nloc,
                            a,
                            block,
                        );
                    }
                }
                AccessVariant::Reg => {
                    let nodes = ctx.element_nodes(e);
                    for a in 0..nloc {
                        let (i, j, k) = inv_linearize(order, a);
                        let view = StencilView {
                            fields: &fields,
                            stencil: ctx.stencil_point(e, a),
                            np,
                            node: nodes[a] as usize,
                        };
                        qp_convection(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mask,
                            nloc,
                            a,
                            block,
                        );
                    }
                }
            }
            if check {
                check_element_finite(block, nloc, mask, e)?;
            }
        }
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::QuadratureSet;
    use crate::kernels::lumped_mass;
    use crate::mesh::build_gather_table;
    use crate::mesh::compute_jacobians;
    use crate::mesh::build_box_mesh;
    use crate::state::{Conserved, FlowState, FluidProperties};

    fn uniform_state(n: usize, props: &FluidProperties) -> FlowState<f64> {
        let mut c = Conserved::zeros(n);
        for node in 0..n {
            c.rho[node] = 1.2;
            c.mom[0][node] = 0.6;
            c.mom[1][node] = -0.3;
            c.mom[2][node] = 0.12;
            c.energy[node] = 10.0;
        }
        FlowState::from_conserved(c, props).unwrap()
    }

    #[test]
    fn uniform_state_gives_zero_contributions_for_every_variant() {
        let props = FluidProperties::new(1.4, 287.0, 1e-3, 0.71).unwrap();
        let mesh = build_box_mesh(3, [2, 2, 2], [1.0; 3], [true; 3]).unwrap();
        let basis = QuadratureSet::new(3).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let gather = build_gather_table(&mesh).unwrap();
        let lumped = lumped_mass(&mesh, &basis, &jac);
        let ctx: KernelContext<f64> =
            KernelContext::new(&mesh, &basis, &jac, &gather, &props, &lumped);
        let state = uniform_state(mesh.num_nodes(), &props);
        let plan = ExecutionPlan::sequential();
        for access in AccessVariant::ALL {
            let mut out = ContribBuffer::new(mesh.num_elements(), ctx.nodes_per_element());
            convection_residual(&ctx, &state, access, EquationMask::ALL, &plan, &mut out)
                .unwrap();
            let worst = out.data().iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            // Constant fluxes differentiate to zero because the derivative
            // matrix annihilates constants exactly.
            assert!(worst <= 1e-11, "{access}: nonzero contribution {worst:.3e}");
        }
    }

    #[test]
    fn masked_passes_write_disjoint_components() {
        let props = FluidProperties::new(1.4, 287.0, 1e-3, 0.71).unwrap();
        let mesh = build_box_mesh(2, [2, 1, 1], [1.0, 1.0, 1.0], [true; 3]).unwrap();
        let basis = QuadratureSet::new(2).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let gather = build_gather_table(&mesh).unwrap();
        let lumped = lumped_mass(&mesh, &basis, &jac);
        let ctx: KernelContext<f64> =
            KernelContext::new(&mesh, &basis, &jac, &gather, &props, &lumped);
        // A gently varying state so contributions are nonzero.
        let mut c = Conserved::zeros(mesh.num_nodes());
        for (node, x) in mesh.coords().iter().enumerate() {
            let s = (2.0 * std::f64::consts::PI * x[0]).sin();
            c.rho[node] = 1.0 + 0.1 * s;
            c.mom[0][node] = c.rho[node] * 0.5;
            c.energy[node] = 10.0 + 0.2 * s;
        }
        let state = FlowState::from_conserved(c, &props).unwrap();
        let plan = ExecutionPlan::sequential();
        let nloc = ctx.nodes_per_element();
        let mut mass_only = ContribBuffer::new(mesh.num_elements(), nloc);
        convection_residual(&ctx, &state, AccessVariant::Base, EquationMask::MASS, &plan,
            &mut mass_only)
            .unwrap();
        let block = mass_only.element(0);
        assert!(block[..nloc].iter().any(|&v| v != 0.0));
        assert!(block[nloc..].iter().all(|&v| v == 0.0));
    }
}
