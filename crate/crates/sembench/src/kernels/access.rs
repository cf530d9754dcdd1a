//! The four operand-access paths the kernels are parameterized by.
//!
//! A quadrature-point view answers two questions: the value of a nodal
//! quantity at the m-th node of the tensor line through the current
//! point along an axis, and its value at the point itself. The residual
//! math is written once against that interface; each access variant
//! supplies a different route from global memory to the answer.

use crate::precision::Scalar;
use crate::state::FlowState;

pub(crate) const Q_RHO: usize = 0;
pub(crate) const Q_MOM: usize = 1; // 1..=3: momentum components
pub(crate) const Q_E: usize = 4;
pub(crate) const Q_P: usize = 5;
pub(crate) const Q_U: usize = 6; // 6..=8: velocity components
pub(crate) const Q_T: usize = 9;
pub(crate) const NUM_Q: usize = 10;

/// Borrowed views of the ten nodal quantity arrays, indexed by the Q_*
/// constants.
pub(crate) struct FieldRefs<'a, S> {
    pub f: [&'a [S]; NUM_Q],
}

impl<'a, S: Scalar> FieldRefs<'a, S> {
    pub fn new(state: &'a FlowState<S>) -> Self {
        let c = &state.conserved;
        Self {
            f: [
                &c.rho,
                &c.mom[0],
                &c.mom[1],
                &c.mom[2],
                &c.energy,
                &state.pressure,
                &state.vel[0],
                &state.vel[1],
                &state.vel[2],
                &state.temperature,
            ],
        }
    }
}

/// Operand access at one quadrature point.
pub(crate) trait QpAccess<S: Scalar> {
    /// Quantity `q` at the `m`-th node of the line through the current
    /// point along tensor `axis`.
    fn line(&self, q: usize, axis: usize, m: usize) -> S;
    /// Quantity `q` at the point itself.
    fn point(&self, q: usize) -> S;
}

/// Local-index offsets of the three lines through local node (i, j, k):
/// `line(axis, m)` lives at `off[axis] + m * stride[axis]`.
#[inline(always)]
pub(crate) fn line_offsets(stride: [usize; 3], i: usize, j: usize, k: usize) -> [usize; 3] {
    [
        j * stride[1] + k * stride[2],
        i * stride[0] + k * stride[2],
        i * stride[0] + j * stride[1],
    ]
}

/// Stage the listed quantities of one element into contiguous scratch,
/// laid out `[quantity][local node]`.
#[inline(always)]
pub(crate) fn stage_element<S: Scalar>(
    fields: &FieldRefs<'_, S>,
    nodes: &[u32],
    needed: &[usize],
    nloc: usize,
    scratch: &mut [S],
) {
    for &q in needed {
        let dst = &mut scratch[q * nloc..(q + 1) * nloc];
        let src = fields.f[q];
        for (slot, &g) in dst.iter_mut().zip(nodes.iter()) {
            *slot = src[g as usize];
        }
    }
}

/// Base variant: reads come from the element's staged scratch.
pub(crate) struct StagedView<'a, S> {
    pub scratch: &'a [S],
    pub nloc: usize,
    pub off: [usize; 3],
    pub stride: [usize; 3],
    pub a: usize,
}

impl<S: Scalar> QpAccess<S> for StagedView<'_, S> {
    #[inline(always)]
    fn line(&self, q: usize, axis: usize, m: usize) -> S {
        self.scratch[q * self.nloc + self.off[axis] + m * self.stride[axis]]
    }

    #[inline(always)]
    fn point(&self, q: usize) -> S {
        self.scratch[q * self.nloc + self.a]
    }
}

/// no_prl variant: every read goes through the connectivity into the
/// global arrays, index arithmetic and all.
pub(crate) struct DirectView<'a, 'f, S> {
    pub fields: &'a FieldRefs<'f, S>,
    pub nodes: &'a [u32],
    pub off: [usize; 3],
    pub stride: [usize; 3],
    pub a: usize,
}

impl<S: Scalar> QpAccess<S> for DirectView<'_, '_, S> {
    #[inline(always)]
    fn line(&self, q: usize, axis: usize, m: usize) -> S {
        let g = self.nodes[self.off[axis] + m * self.stride[axis]];
        self.fields.f[q][g as usize]
    }

    #[inline(always)]
    fn point(&self, q: usize) -> S {
        self.fields.f[q][self.nodes[self.a] as usize]
    }
}

/// prl_prf variant: staged scratch plus per-point line buffers for the
/// operands of the innermost contractions.
pub(crate) struct LineBufferView<'a, S> {
    pub lines: &'a [S],
    pub scratch: &'a [S],
    pub np: usize,
    pub nloc: usize,
    pub a: usize,
}

impl<S: Scalar> QpAccess<S> for LineBufferView<'_, S> {
    #[inline(always)]
    fn line(&self, q: usize, axis: usize, m: usize) -> S {
        self.lines[(q * 3 + axis) * self.np + m]
    }

    #[inline(always)]
    fn point(&self, q: usize) -> S {
        self.scratch[q * self.nloc + self.a]
    }
}

/// Fill the line buffers of one quadrature point from staged scratch.
#[inline(always)]
pub(crate) fn fill_line_buffers<S: Scalar>(
    scratch: &[S],
    nloc: usize,
    np: usize,
    off: [usize; 3],
    stride: [usize; 3],
    needed: &[usize],
    lines: &mut [S],
) {
    for &q in needed {
        let base = &scratch[q * nloc..(q + 1) * nloc];
        for axis in 0..3 {
            let dst = &mut lines[(q * 3 + axis) * np..(q * 3 + axis + 1) * np];
            for (m, slot) in dst.iter_mut().enumerate() {
                *slot = base[off[axis] + m * stride[axis]];
            }
        }
    }
}

/// reg variant: one stencil-table lookup per read, no index arithmetic.
pub(crate) struct StencilView<'a, 'f, S> {
    pub fields: &'a FieldRefs<'f, S>,
    /// The 3 x (p+1) stencil slice for the current point.
    pub stencil: &'a [u32],
    pub np: usize,
    /// Global id of the point itself.
    pub node: usize,
}

impl<S: Scalar> QpAccess<S> for StencilView<'_, '_, S> {
    #[inline(always)]
    fn line(&self, q: usize, axis: usize, m: usize) -> S {
        self.fields.f[q][self.stencil[axis * self.np + m] as usize]
    }

    #[inline(always)]
    fn point(&self, q: usize) -> S {
        self.fields.f[q][self.node]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::QuadratureSet;
    use crate::kernels::{lumped_mass, KernelContext};
    use crate::mesh::build_gather_table;
    use crate::mesh::compute_jacobians;
    use crate::mesh::{build_box_mesh, inv_linearize, linearize};
    use crate::state::{init_tgv, mach_scaled_pressure, FluidProperties};

    #[test]
    fn all_views_agree_on_every_line_read() {
        let order = 3;
        let mesh =
            build_box_mesh(order, [2, 2, 2], [2.0 * std::f64::consts::PI; 3], [true; 3]).unwrap();
        let basis = QuadratureSet::new(order).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let gather = build_gather_table(&mesh).unwrap();
        let props = FluidProperties::new(1.4, 287.0, 1e-3, 0.71).unwrap();
        let lumped = lumped_mass(&mesh, &basis, &jac);
        let ctx: KernelContext<f64> =
            KernelContext::new(&mesh, &basis, &jac, &gather, &props, &lumped);
        let p0 = mach_scaled_pressure(&props, 1.0, 1.0, 0.1);
        let state = init_tgv::<f64>(&mesh, &props, 1.0, 1.0, p0).unwrap();
        let fields = FieldRefs::new(&state);

        let np = order + 1;
        let nloc = ctx.nodes_per_element();
        let needed: Vec<usize> = (0..NUM_Q).collect();
        let mut scratch = vec![0.0f64; NUM_Q * nloc];
        let mut lines = vec![0.0f64; NUM_Q * 3 * np];
        for e in 0..mesh.num_elements() {
            let nodes = ctx.element_nodes(e);
            stage_element(&fields, nodes, &needed, nloc, &mut scratch);
            for a in 0..nloc {
                let (i, j, k) = inv_linearize(order, a);
                let off = line_offsets(ctx.stride(), i, j, k);
                fill_line_buffers(&scratch, nloc, np, off, ctx.stride(), &needed, &mut lines);
                let staged =
                    StagedView { scratch: &scratch, nloc, off, stride: ctx.stride(), a };
                let direct =
                    DirectView { fields: &fields, nodes, off, stride: ctx.stride(), a };
                let buffered =
                    LineBufferView { lines: &lines, scratch: &scratch, np, nloc, a };
                let stencil = StencilView {
                    fields: &fields,
                    stencil: ctx.stencil_point(e, a),
                    np,
                    node: nodes[a] as usize,
                };
                for q in 0..NUM_Q {
                    for axis in 0..3 {
                        for m in 0..np {
                            let v = staged.line(q, axis, m);
                            assert_eq!(v, direct.line(q, axis, m));
                            assert_eq!(v, buffered.line(q, axis, m));
                            assert_eq!(v, stencil.line(q, axis, m));
                        }
                    }
                    let v = staged.point(q);
                    assert_eq!(v, direct.point(q));
                    assert_eq!(v, buffered.point(q));
                    assert_eq!(v, stencil.point(q));
                }
                // The point is the a-th node of each of its own lines.
                assert_eq!(staged.line(Q_RHO, 0, i), staged.point(Q_RHO));
                assert_eq!(staged.line(Q_RHO, 1, j), staged.point(Q_RHO));
                assert_eq!(staged.line(Q_RHO, 2, k), staged.point(Q_RHO));
                let _ = linearize(order, i, j, k).unwrap();
            }
        }
    }
}
