//! Viscous and thermal residual in weak form.
//!
//! At every quadrature point the velocity gradient is assembled, the
//! deviatoric stress tau = mu (grad u + grad u^T - 2/3 div u I) and the
//! energy flux tau u + kappa grad T formed, and each flux tested
//! against the basis gradients: per tensor axis, the metric-contracted
//! flux spreads w det J D[a][m]-weighted contributions over the p+1
//! nodes of that line. Zero derivative-matrix row sums make the summed
//! residual vanish identically, so conservation needs no face terms.
//!
//! The continuity equation has no diffusive flux; a mass-only pass
//! returns without touching the buffer.

use super::access::{
    fill_line_buffers, line_offsets, stage_element, DirectView, FieldRefs, LineBufferView,
    QpAccess, StagedView, StencilView, NUM_Q, Q_T, Q_U,
};
use super::context::KernelContext;
use super::{check_element_finite, run_chunked, AccessVariant, ContribBuffer, EquationMask,
    ExecutionPlan};
use crate::mesh::inv_linearize;
use crate::precision::Scalar;
use crate::state::FlowState;
use crate::Result;

/// Reference-space gradient of quantity `q` at the current point: one
/// derivative-matrix contraction per tensor axis.
#[inline(always)]
fn reference_gradient<S: Scalar, A: QpAccess<S>>(v: &A, d_rows: [&[S]; 3], q: usize) -> [S; 3] {
    let mut g = [S::zero(); 3];
    for r in 0..3 {
        let mut acc = S::zero();
        for (m, &dm) in d_rows[r].iter().enumerate() {
            acc += dm * v.line(q, r, m);
        }
        g[r] = acc;
    }
    g
}

/// Push a reference-space gradient to physical space with the inverse
/// Jacobian at the point.
#[inline(always)]
fn physical_gradient<S: Scalar>(gxi: [S; 3], inv: &[S]) -> [S; 3] {
    let mut g = [S::zero(); 3];
    for c in 0..3 {
        let mut acc = S::zero();
        for r in 0..3 {
            acc += inv[r * 3 + c] * gxi[r];
        }
        g[c] = acc;
    }
    g
}

/// Weak-form deposit of one physical flux vector from the current point
/// onto its three tensor lines.
#[inline(always)]
fn scatter_weak<S: Scalar>(
    flux: &[S; 3],
    d_rows: [&[S]; 3],
    inv: &[S],
    wd: S,
    off: [usize; 3],
    stride: [usize; 3],
    comp_base: usize,
    out: &mut [S],
) {
    for r in 0..3 {
        let mut k = S::zero();
        for c in 0..3 {
            k += inv[r * 3 + c] * flux[c];
        }
        let wk = wd * k;
        for (m, &dm) in d_rows[r].iter().enumerate() {
            out[comp_base + off[r] + m * stride[r]] += dm * wk;
        }
    }
}

/// Momentum and energy diffusion at one quadrature point. The stress
/// tensor is assembled the same way whichever equations are enabled, so
/// split passes reproduce the unified arithmetic bitwise.
#[inline(always)]
#[allow(clippy::too_many_arguments)]
fn qp_diffusion<S: Scalar, A: QpAccess<S>>(
    v: &A,
    d_rows: [&[S]; 3],
    inv: &[S],
    wd: S,
    mu: S,
    kappa: S,
    mask: EquationMask,
    nloc: usize,
    off: [usize; 3],
    stride: [usize; 3],
    out: &mut [S],
) {
    let gu = [
        physical_gradient(reference_gradient(v, d_rows, Q_U), inv),
        physical_gradient(reference_gradient(v, d_rows, Q_U + 1), inv),
        physical_gradient(reference_gradient(v, d_rows, Q_U + 2), inv),
    ];
    let div_u = gu[0][0] + gu[1][1] + gu[2][2];
    let two_thirds = S::from_f64(2.0 / 3.0);
    let mut tau = [[S::zero(); 3]; 3];
    for d in 0..3 {
        for c in 0..3 {
            let sym = gu[d][c] + gu[c][d];
            tau[d][c] =
                if d == c { mu * (sym - two_thirds * div_u) } else { mu * sym };
        }
    }
    if mask.momentum {
        for d in 0..3 {
            scatter_weak(&tau[d], d_rows, inv, wd, off, stride, (1 + d) * nloc, out);
        }
    }
    if mask.energy {
        let gt = physical_gradient(reference_gradient(v, d_rows, Q_T), inv);
        let u = [v.point(Q_U), v.point(Q_U + 1), v.point(Q_U + 2)];
        let mut flux = [S::zero(); 3];
        for c in 0..3 {
            let mut work = S::zero();
            for d in 0..3 {
                work += tau[d][c] * u[d];
            }
            flux[c] = work + kappa * gt[c];
        }
        scatter_weak(&flux, d_rows, inv, wd, off, stride, 4 * nloc, out);
    }
}

fn needed_quantities(mask: EquationMask) -> Vec<usize> {
    let mut q = vec![Q_U, Q_U + 1, Q_U + 2];
    if mask.energy {
        q.push(Q_T);
    }
    q
}

/// Diffusive contributions for all elements, added into `out`.
pub fn diffusion_residual<S: Scalar>(
    ctx: &KernelContext<S>,
    state: &FlowState<S>,
    access: AccessVariant,
    mask: EquationMask,
    plan: &ExecutionPlan,
    out: &mut ContribBuffer<S>,
) -> Result<()> {
    assert_eq!(out.num_elements(), ctx.num_elements());
    assert_eq!(state.num_nodes(), ctx.num_nodes());
    if !mask.momentum && !mask.energy {
        return Ok(());
    }
    let fields = FieldRefs::new(state);
    let nloc = ctx.nodes_per_element();
    let np = ctx.order() + 1;
    let order = ctx.order();
    let stride = ctx.stride();
    let needed = needed_quantities(mask);
    let (mu, kappa) = (ctx.mu(), ctx.kappa());
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
                        qp_diffusion(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mu,
                            kappa,
                            mask,
                            nloc,
                            off,
                            stride,
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
                        qp_diffusion(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mu,
                            kappa,
                            mask,
                            nloc,
                            off,
                            stride,
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
                        qp_diffusion(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mu,
                            kappa,
                            mask,
                            nloc,
                            off,
                            stride,
                            block,
                        );
                    }
                }
                AccessVariant::Reg => {
                    let nodes = ctx.element_nodes(e);
                    for a in 0..nloc {
                        let (i, j, k) = inv_linearize(order, a);
                        let off = line_offsets(stride, i, j, k);
                        let view = StencilView {
                            fields: &fields,
                            stencil: ctx.stencil_point(e, a),
                            np,
                            node: nodes[a] as usize,
                        };
                        qp_diffusion(
                            &view,
                            [ctx.d_row(i), ctx.d_row(j), ctx.d_row(k)],
                            ctx.inv(e, a),
                            ctx.wdet(e, a),
                            mu,
                            kappa,
                            mask,
                            nloc,
                            off,
                            stride,
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
