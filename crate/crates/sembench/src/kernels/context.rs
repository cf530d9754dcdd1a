//! Precomputed, precision-cast operator data shared by all kernel
//! passes of a run.

use crate::basis::QuadratureSet;
use crate::mesh::GatherTable;
use crate::mesh::JacobianData;
use crate::mesh::HexMesh;
use crate::precision::Scalar;
use crate::state::FluidProperties;

/// Everything the element kernels read besides the flow state, cast to
/// the working precision once up front: the derivative matrix, combined
/// quadrature-weight-times-detJ factors, inverse Jacobians, the
/// connectivity, and the expanded stencil table. Owning casts (rather
/// than borrowing the f64 masters) keeps the hot loops free of
/// conversions and the kernel functions free of lifetime plumbing.
#[derive(Debug, Clone)]
pub struct KernelContext<S> {
    order: usize,
    nloc: usize,
    num_elements: usize,
    num_nodes: usize,
    /// Row-major (p+1) x (p+1) nodal derivative matrix.
    dmat: Vec<S>,
    /// Per (element, local node): w_i w_j w_k det J.
    wdet: Vec<S>,
    /// Per (element, local node): row-major inverse Jacobian.
    inv_jac: Vec<S>,
    /// Per (element, local node): global node id.
    node_ids: Vec<u32>,
    /// Per (element, local node, axis): the p+1 global ids of the tensor
    /// line through that node.
    stencil: Vec<u32>,
    /// Local-index strides per tensor axis.
    stride: [usize; 3],
    mu: S,
    kappa: S,
    /// Diagonal lumped mass per global node.
    lumped: Vec<S>,
}

impl<S: Scalar> KernelContext<S> {
    pub fn new(
        mesh: &HexMesh,
        basis: &QuadratureSet,
        jac: &JacobianData,
        gather: &GatherTable,
        props: &FluidProperties,
        lumped: &[f64],
    ) -> Self {
        let p = mesh.order();
        let np = p + 1;
        let nloc = np * np * np;
        let e_count = mesh.num_elements();
        let w = basis.weights();
        let mut wdet = Vec::with_capacity(e_count * nloc);
        for e in 0..e_count {
            for a in 0..nloc {
                let (i, j, k) = crate::mesh::inv_linearize(p, a);
                wdet.push(S::from_f64(w[i] * w[j] * w[k] * jac.det(e, a)));
            }
        }
        Self {
            order: p,
            nloc,
            num_elements: e_count,
            num_nodes: mesh.num_nodes(),
            dmat: basis.deriv_matrix().iter().map(|&v| S::from_f64(v)).collect(),
            wdet,
            inv_jac: jac.inv_flat().iter().map(|&v| S::from_f64(v)).collect(),
            node_ids: gather.node_ids().to_vec(),
            stencil: gather.stencil().to_vec(),
            stride: [1, np, np * np],
            mu: S::from_f64(props.mu),
            kappa: S::from_f64(props.kappa),
            lumped: lumped.iter().map(|&v| S::from_f64(v)).collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes per element, (p+1)^3.
    pub fn nodes_per_element(&self) -> usize {
        self.nloc
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// Row `i` of the derivative matrix.
    #[inline(always)]
    pub fn d_row(&self, i: usize) -> &[S] {
        &self.dmat[i * (self.order + 1)..(i + 1) * (self.order + 1)]
    }

    #[inline(always)]
    pub fn wdet(&self, e: usize, a: usize) -> S {
        self.wdet[e * self.nloc + a]
    }

    /// Row-major 3x3 inverse Jacobian at a local node.
    #[inline(always)]
    pub fn inv(&self, e: usize, a: usize) -> &[S] {
        let base = (e * self.nloc + a) * 9;
        &self.inv_jac[base..base + 9]
    }

    /// Global ids for one element, local-lexicographic order.
    #[inline(always)]
    pub fn element_nodes(&self, e: usize) -> &[u32] {
        &self.node_ids[e * self.nloc..(e + 1) * self.nloc]
    }

    /// The p+1 global ids of the tensor line through local node `a` of
    /// element `e` along `axis`.
    #[inline(always)]
    pub fn stencil_line(&self, e: usize, a: usize, axis: usize) -> &[u32] {
        let np = self.order + 1;
        let base = ((e * self.nloc + a) * 3 + axis) * np;
        &self.stencil[base..base + np]
    }

    /// All three lines of local node `a` as one contiguous 3 x (p+1)
    /// slice, axis-major.
    #[inline(always)]
    pub fn stencil_point(&self, e: usize, a: usize) -> &[u32] {
        let np = self.order + 1;
        let base = (e * self.nloc + a) * 3 * np;
        &self.stencil[base..base + 3 * np]
    }

    /// Local-index stride along each tensor axis.
    #[inline(always)]
    pub fn stride(&self) -> [usize; 3] {
        self.stride
    }

    pub fn mu(&self) -> S {
        self.mu
    }

    pub fn kappa(&self) -> S {
        self.kappa
    }

    pub fn lumped(&self) -> &[S] {
        &self.lumped
    }
}
