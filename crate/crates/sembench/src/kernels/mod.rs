//! Residual kernels over all elements, parameterized by memory-access
//! variant and kernel-fusion strategy.
//!
//! Every variant performs the same floating-point operations in the same
//! order; they differ only in how nodal operands reach the arithmetic
//! (per-element staging, direct global indexing, per-point line buffers,
//! or a precomputed stencil table). That makes cross-variant agreement a
//! meaningful correctness check and keeps the measured differences about
//! memory traffic.
//!
//! Kernels run in two phases: a compute phase fills a per-element
//! contribution buffer, then [`scatter_accumulate`] folds contributions
//! into global residual arrays, either in a fixed element order or with
//! atomic adds.

mod access;
mod context;
mod convection;
mod diffusion;
mod scatter;

pub use context::KernelContext;
pub use convection::convection_residual;
pub use diffusion::diffusion_residual;
pub use scatter::scatter_accumulate;

use crate::basis::QuadratureSet;
use crate::mesh::JacobianData;
use crate::mesh::HexMesh;
use crate::precision::{Precision, Scalar};
use crate::{Error, Result};
use std::fmt;
use std::str::FromStr;

/// How nodal operands are fetched inside the element loops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AccessVariant {
    /// Stage all needed global quantities into per-element scratch
    /// before the quadrature loop.
    Base,
    /// No staging: index the global arrays through the connectivity
    /// inside the quadrature loop.
    NoPrl,
    /// Base staging plus per-quadrature-point copies of the operands of
    /// the innermost contraction loops into fixed-size line buffers.
    PrlPrf,
    /// Direct global access through a precomputed per-point stencil
    /// table, removing the index-arithmetic chain entirely.
    Reg,
}

impl AccessVariant {
    pub const ALL: [AccessVariant; 4] = [
        AccessVariant::Base,
        AccessVariant::NoPrl,
        AccessVariant::PrlPrf,
        AccessVariant::Reg,
    ];
}

impl fmt::Display for AccessVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AccessVariant::Base => "base",
            AccessVariant::NoPrl => "no_prl",
            AccessVariant::PrlPrf => "prl_prf",
            AccessVariant::Reg => "reg",
        })
    }
}

impl FromStr for AccessVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "base" => Ok(AccessVariant::Base),
            "no_prl" => Ok(AccessVariant::NoPrl),
            "prl_prf" => Ok(AccessVariant::PrlPrf),
            "reg" => Ok(AccessVariant::Reg),
            other => Err(Error::Config(format!(
                "unknown access variant '{other}' (expected base|no_prl|prl_prf|reg)"
            ))),
        }
    }
}

/// Whether one element sweep computes all equations or each equation
/// gets its own sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fusion {
    Unified,
    Split,
}

impl Fusion {
    pub const ALL: [Fusion; 2] = [Fusion::Unified, Fusion::Split];
}

impl fmt::Display for Fusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fusion::Unified => "unified",
            Fusion::Split => "split",
        })
    }
}

impl FromStr for Fusion {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unified" => Ok(Fusion::Unified),
            "split" => Ok(Fusion::Split),
            other => Err(Error::Config(format!(
                "unknown fusion mode '{other}' (expected unified|split)"
            ))),
        }
    }
}

/// How per-element contributions reach the global residual arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterMode {
    /// Concurrent accumulation with atomic read-modify-write adds.
    Atomic,
    /// Fixed ascending element order on a single worker; the bitwise
    /// reference.
    Deterministic,
}

impl fmt::Display for ScatterMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScatterMode::Atomic => "atomic",
            ScatterMode::Deterministic => "deterministic",
        })
    }
}

impl FromStr for ScatterMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "atomic" => Ok(ScatterMode::Atomic),
            "deterministic" => Ok(ScatterMode::Deterministic),
            other => Err(Error::Config(format!(
                "unknown scatter mode '{other}' (expected atomic|deterministic)"
            ))),
        }
    }
}

/// Full kernel parameterization of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KernelConfig {
    pub access: AccessVariant,
    pub fusion: Fusion,
    pub scatter: ScatterMode,
    pub precision: Precision,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            access: AccessVariant::Base,
            fusion: Fusion::Unified,
            scatter: ScatterMode::Deterministic,
            precision: Precision::Fp64,
        }
    }
}

/// Which conservation equations a kernel pass computes. Split fusion
/// runs three passes with one flag set each; unified runs one pass with
/// all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EquationMask {
    pub mass: bool,
    pub momentum: bool,
    pub energy: bool,
}

impl EquationMask {
    pub const ALL: EquationMask = EquationMask { mass: true, momentum: true, energy: true };
    pub const MASS: EquationMask = EquationMask { mass: true, momentum: false, energy: false };
    pub const MOMENTUM: EquationMask = EquationMask { mass: false, momentum: true, energy: false };
    pub const ENERGY: EquationMask = EquationMask { mass: false, momentum: false, energy: true };
    /// Components with diffusive contributions (mass has none).
    pub const VISCOUS: EquationMask = EquationMask { mass: false, momentum: true, energy: true };

    /// The three single-equation passes in the order split fusion runs
    /// them.
    pub const SPLIT_PASSES: [EquationMask; 3] =
        [EquationMask::MASS, EquationMask::MOMENTUM, EquationMask::ENERGY];

    /// Indices into the five-component residual layout covered by this
    /// mask (0 mass, 1..=3 momentum, 4 energy).
    pub fn components(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(5);
        if self.mass {
            out.push(0);
        }
        if self.momentum {
            out.extend([1, 2, 3]);
        }
        if self.energy {
            out.push(4);
        }
        out
    }

    /// Per-component enablement in layout order, allocation-free for
    /// use inside element loops.
    pub fn flags(&self) -> [bool; NUM_COMPONENTS] {
        [self.mass, self.momentum, self.momentum, self.momentum, self.energy]
    }
}

/// Number of residual components (mass, three momentum, energy).
pub const NUM_COMPONENTS: usize = 5;

/// Global nodal residuals for the five conserved components, together
/// with the diagonal lumped mass vector that turns them into time
/// derivatives.
#[derive(Debug, Clone)]
pub struct ResidualSet<S> {
    pub mass: Vec<S>,
    pub mom: [Vec<S>; 3],
    pub energy: Vec<S>,
    pub lumped_mass: Vec<S>,
}

impl<S: Scalar> ResidualSet<S> {
    /// Allocate zeroed residuals over `lumped` (one entry per node).
    pub fn new(lumped: Vec<S>) -> Self {
        let n = lumped.len();
        Self {
            mass: vec![S::zero(); n],
            mom: [vec![S::zero(); n], vec![S::zero(); n], vec![S::zero(); n]],
            energy: vec![S::zero(); n],
            lumped_mass: lumped,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.lumped_mass.len()
    }

    /// Zero the residual arrays (the lumped mass is left alone).
    pub fn fill_zero(&mut self) {
        self.mass.fill(S::zero());
        for d in 0..3 {
            self.mom[d].fill(S::zero());
        }
        self.energy.fill(S::zero());
    }

    pub fn component(&self, c: usize) -> &[S] {
        match c {
            0 => &self.mass,
            1..=3 => &self.mom[c - 1],
            4 => &self.energy,
            _ => panic!("component index {c} out of range"),
        }
    }

    pub fn component_mut(&mut self, c: usize) -> &mut Vec<S> {
        match c {
            0 => &mut self.mass,
            1..=3 => &mut self.mom[c - 1],
            4 => &mut self.energy,
            _ => panic!("component index {c} out of range"),
        }
    }

    /// Largest absolute residual entry over all five components.
    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        for c in 0..NUM_COMPONENTS {
            for &v in self.component(c) {
                m = m.max(v.to_f64().abs());
            }
        }
        m
    }
}

/// Per-element kernel output: for each element a block of five
/// component slices of `nodes_per_element` values each, element blocks
/// contiguous so disjoint chunks can go to different workers.
#[derive(Debug, Clone)]
pub struct ContribBuffer<S> {
    data: Vec<S>,
    nloc: usize,
}

impl<S: Scalar> ContribBuffer<S> {
    pub fn new(num_elements: usize, nodes_per_element: usize) -> Self {
        Self {
            data: vec![S::zero(); num_elements * NUM_COMPONENTS * nodes_per_element],
            nloc: nodes_per_element,
        }
    }

    pub fn block_len(&self) -> usize {
        NUM_COMPONENTS * self.nloc
    }

    pub fn num_elements(&self) -> usize {
        self.data.len() / self.block_len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.nloc
    }

    pub fn fill_zero(&mut self) {
        self.data.fill(S::zero());
    }

    pub fn element(&self, e: usize) -> &[S] {
        let b = self.block_len();
        &self.data[e * b..(e + 1) * b]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [S] {
        let b = self.block_len();
        &mut self.data[e * b..(e + 1) * b]
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut Vec<S> {
        &mut self.data
    }

    /// Zero the component slices a pass is about to write, leaving the
    /// others untouched (split passes share one buffer).
    pub fn fill_components(&mut self, mask: EquationMask) {
        let nloc = self.nloc;
        let block = self.block_len();
        let flags = mask.flags();
        for blk in self.data.chunks_mut(block) {
            for (c, &on) in flags.iter().enumerate() {
                if on {
                    blk[c * nloc..(c + 1) * nloc].fill(S::zero());
                }
            }
        }
    }
}

/// Drive a per-element closure over the contribution buffer, one task
/// per chunk (or per partition range when the plan pins those),
/// sequentially or across the ambient worker pool. The closure receives
/// the id of its first element and the raw span of element blocks.
pub(crate) fn run_chunked<S, F>(
    plan: &ExecutionPlan,
    buf: &mut ContribBuffer<S>,
    per_chunk: F,
) -> Result<()>
where
    S: Scalar,
    F: Fn(usize, &mut [S]) -> Result<()> + Sync,
{
    use rayon::prelude::*;
    let block = buf.block_len();
    let bounds = plan.task_bounds(buf.num_elements());
    let mut tasks: Vec<(usize, &mut [S])> = Vec::with_capacity(bounds.len());
    let mut rest: &mut [S] = buf.data_mut();
    for (start, len) in bounds {
        let (head, tail) = rest.split_at_mut(len * block);
        tasks.push((start, head));
        rest = tail;
    }
    if plan.workers <= 1 {
        for (e0, data) in tasks {
            per_chunk(e0, data)?;
        }
        Ok(())
    } else {
        tasks
            .into_par_iter()
            .try_for_each(|(e0, data)| per_chunk(e0, data))
    }
}

/// Reject non-finite kernel output, naming the offending element.
pub(crate) fn check_element_finite<S: Scalar>(
    block: &[S],
    nloc: usize,
    mask: EquationMask,
    element: usize,
) -> Result<()> {
    for (c, &on) in mask.flags().iter().enumerate() {
        if !on {
            continue;
        }
        for &v in &block[c * nloc..(c + 1) * nloc] {
            if !v.is_finite() {
                return Err(Error::NumericalFault { element });
            }
        }
    }
    Ok(())
}

/// Execution knobs orthogonal to the kernel math: worker count, the
/// element-chunk granularity handed to each worker, whether compute
/// passes scan their output for non-finite values, and optionally the
/// partition element ranges that define the concurrent tasks.
#[derive(Debug, Clone)]
pub struct ExecutionPlan {
    pub workers: usize,
    pub chunk_elements: usize,
    pub check_finite: bool,
    /// When set, each range becomes one compute task (partitions run
    /// concurrently); ranges must be ascending, disjoint, and cover all
    /// elements. When unset, uniform chunks of `chunk_elements` are used.
    pub partition_ranges: Option<Vec<std::ops::Range<usize>>>,
}

impl Default for ExecutionPlan {
    fn default() -> Self {
        Self {
            workers: 1,
            chunk_elements: 8,
            check_finite: cfg!(debug_assertions),
            partition_ranges: None,
        }
    }
}

impl ExecutionPlan {
    pub fn sequential() -> Self {
        Self::default()
    }

    pub fn with_workers(workers: usize) -> Self {
        Self { workers: workers.max(1), ..Self::default() }
    }

    /// Task boundaries as (first element, element count) pairs.
    fn task_bounds(&self, total_elements: usize) -> Vec<(usize, usize)> {
        match &self.partition_ranges {
            Some(ranges) => {
                debug_assert!(ranges.first().map_or(true, |r| r.start == 0));
                debug_assert!(ranges.last().map_or(true, |r| r.end == total_elements));
                ranges.iter().map(|r| (r.start, r.end - r.start)).collect()
            }
            None => {
                let per = self.chunk_elements.max(1);
                (0..total_elements.div_ceil(per))
                    .map(|ci| (ci * per, per.min(total_elements - ci * per)))
                    .collect()
            }
        }
    }
}

/// Diagonal lumped mass vector: `M[n] = sum over (e, a) mapping to n of
/// w_i w_j w_k det J(e, a)`. Strictly positive on a valid mesh.
pub fn lumped_mass(mesh: &HexMesh, basis: &QuadratureSet, jac: &JacobianData) -> Vec<f64> {
    let p = mesh.order();
    let nloc = (p + 1).pow(3);
    let w = basis.weights();
    let connec = mesh.connectivity();
    let mut mass = vec![0.0f64; mesh.num_nodes()];
    for e in 0..mesh.num_elements() {
        for a in 0..nloc {
            let (i, j, k) = crate::mesh::inv_linearize(p, a);
            let node = connec[e * nloc + a] as usize;
            mass[node] += w[i] * w[j] * w[k] * jac.det(e, a);
        }
    }
    mass
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_box_mesh;
    use crate::mesh::compute_jacobians;
    use approx::assert_relative_eq;

    #[test]
    fn lumped_mass_on_reference_cube() {
        // One linear element spanning [-1, 1]^3 shifted to [0, 2]^3: unit
        // weights and unit Jacobian determinant give M = 1 at each corner.
        let mesh = build_box_mesh(1, [1, 1, 1], [2.0, 2.0, 2.0], [false; 3]).unwrap();
        let basis = QuadratureSet::new(1).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let m = lumped_mass(&mesh, &basis, &jac);
        assert_eq!(m.len(), 8);
        for &v in &m {
            assert_relative_eq!(v, 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn lumped_mass_sums_to_volume() {
        for (periodic, extents) in [
            ([true; 3], [2.0 * std::f64::consts::PI, 3.0, 1.0]),
            ([false; 3], [1.5, 2.5, 0.75]),
        ] {
            let mesh = build_box_mesh(3, [3, 2, 2], extents, periodic).unwrap();
            let basis = QuadratureSet::new(3).unwrap();
            let jac = compute_jacobians(&mesh, &basis).unwrap();
            let m = lumped_mass(&mesh, &basis, &jac);
            let volume: f64 = extents.iter().product();
            assert_relative_eq!(m.iter().sum::<f64>(), volume, max_relative = 1e-12);
            assert!(m.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn shared_nodes_accumulate_once_per_element() {
        // Two equal elements periodic in x: every node sits on an element
        // face in x, so it collects exactly two single-element
        // contributions of equal size.
        let mesh = build_box_mesh(1, [2, 1, 1], [2.0, 1.0, 1.0], [true, false, false]).unwrap();
        let basis = QuadratureSet::new(1).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let m = lumped_mass(&mesh, &basis, &jac);
        // Single-element corner contribution is w^3 det J = det J here.
        let det = jac.det(0, 0);
        for &v in &m {
            assert_relative_eq!(v, 2.0 * det, max_relative = 1e-14);
        }
    }

    #[test]
    fn enums_parse_and_print() {
        for v in AccessVariant::ALL {
            assert_eq!(v.to_string().parse::<AccessVariant>().unwrap(), v);
        }
        for f in Fusion::ALL {
            assert_eq!(f.to_string().parse::<Fusion>().unwrap(), f);
        }
        for s in [ScatterMode::Atomic, ScatterMode::Deterministic] {
            assert_eq!(s.to_string().parse::<ScatterMode>().unwrap(), s);
        }
        assert!("fancy".parse::<AccessVariant>().is_err());
    }

    #[test]
    fn mask_components_cover_layout() {
        assert_eq!(EquationMask::ALL.components(), vec![0, 1, 2, 3, 4]);
        assert_eq!(EquationMask::MASS.components(), vec![0]);
        assert_eq!(EquationMask::MOMENTUM.components(), vec![1, 2, 3]);
        assert_eq!(EquationMask::ENERGY.components(), vec![4]);
        let mut all: Vec<usize> =
            EquationMask::SPLIT_PASSES.iter().flat_map(|m| m.components()).collect();
        all.sort_unstable();
        assert_eq!(all, vec![0, 1, 2, 3, 4]);
    }
}
