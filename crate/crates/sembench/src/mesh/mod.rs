//! Hexahedral spectral-element meshes.
//!
//! Meshes are generated structured (a box of `nx x ny x nz` identical
//! elements) but stored the way an unstructured solver stores them: every
//! element carries an explicit connectivity row mapping its `(p+1)^3`
//! local nodes to deduplicated global node ids, and all kernels reach
//! global data through that indirection. This keeps the memory-access
//! patterns under study honest while the geometry stays simple enough to
//! verify analytically.
//!
//! Local nodes inside an element are ordered lexicographically,
//! `a = i + (p+1) j + (p+1)^2 k` with `i` fastest along x. Element ids are
//! ordered so that the longest element axis varies slowest, which makes
//! the slab partitions of [`partition_mesh`] contiguous id ranges.

mod gather;
mod io;
mod jacobian;
mod partition;

pub use gather::{build_gather_table, GatherTable};
pub use io::{dump_mesh, load_mesh_dump, MeshDump};
pub use jacobian::{compute_jacobians, JacobianData};
pub use partition::{partition_mesh, MeshPartition, SharedNode};

use crate::{Error, Result};

/// Map a local tensor-product index triple to the linear local node index.
///
/// The layout is lexicographic with `i` fastest: `i + (p+1) j + (p+1)^2 k`.
/// Each index must lie in `0..=p`.
pub fn linearize(order: usize, i: usize, j: usize, k: usize) -> Result<usize> {
    for (axis, idx) in [('x', i), ('y', j), ('z', k)] {
        if idx > order {
            return Err(Error::IndexRange {
                axis,
                index: idx,
                order,
            });
        }
    }
    let n = order + 1;
    Ok(i + n * j + n * n * k)
}

/// Inverse of [`linearize`]: recover `(i, j, k)` from the linear index.
pub fn inv_linearize(order: usize, a: usize) -> (usize, usize, usize) {
    let n = order + 1;
    debug_assert!(a < n * n * n, "local index {a} out of range for order {order}");
    (a % n, (a / n) % n, a / (n * n))
}

/// A structured box mesh of high-order hexahedral elements with
/// unstructured-style connectivity.
#[derive(Debug, Clone)]
pub struct HexMesh {
    order: usize,
    elems: [usize; 3],
    extents: [f64; 3],
    periodic: [bool; 3],
    spacing: [f64; 3],
    /// Axis that varies slowest in the element-id ordering (the slab axis).
    slab_axis: usize,
    /// The two remaining axes, ascending; fastest first.
    cross_axes: [usize; 2],
    num_nodes: usize,
    /// Global node ids per element, `num_elems x (p+1)^3`, row-major.
    connec: Vec<u32>,
    /// Deduplicated global node coordinates.
    coords: Vec<[f64; 3]>,
    /// Per-axis count of distinct 1D node positions.
    ticks: [usize; 3],
    /// Reference-interval nodes of the order-`p` GLL rule, for geometry.
    ref_nodes: Vec<f64>,
}

impl HexMesh {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Local nodes per element, `(p+1)^3`.
    pub fn nodes_per_element(&self) -> usize {
        let n = self.order + 1;
        n * n * n
    }

    pub fn num_elements(&self) -> usize {
        self.elems.iter().product()
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn element_counts(&self) -> [usize; 3] {
        self.elems
    }

    pub fn extents(&self) -> [f64; 3] {
        self.extents
    }

    pub fn periodic(&self) -> [bool; 3] {
        self.periodic
    }

    /// Element edge lengths `extents / elems`.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    /// Axis along which slab partitions are cut.
    pub fn slab_axis(&self) -> usize {
        self.slab_axis
    }

    /// Full connectivity, `num_elements x nodes_per_element`, row-major.
    pub fn connectivity(&self) -> &[u32] {
        &self.connec
    }

    /// Connectivity row of one element.
    #[inline]
    pub fn element_nodes(&self, e: usize) -> &[u32] {
        let n = self.nodes_per_element();
        &self.connec[e * n..(e + 1) * n]
    }

    /// Deduplicated global node coordinates.
    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    /// Structured coordinates of element `e` in the id ordering.
    pub fn element_coords(&self, e: usize) -> [usize; 3] {
        let [a1, a2] = self.cross_axes;
        let s = self.slab_axis;
        let mut c = [0usize; 3];
        c[a1] = e % self.elems[a1];
        c[a2] = (e / self.elems[a1]) % self.elems[a2];
        c[s] = e / (self.elems[a1] * self.elems[a2]);
        c
    }

    /// Element id for structured element coordinates.
    pub fn element_id(&self, c: [usize; 3]) -> usize {
        let [a1, a2] = self.cross_axes;
        let s = self.slab_axis;
        c[a1] + self.elems[a1] * (c[a2] + self.elems[a2] * c[s])
    }

    /// Physical position of local node `a` of element `e`, computed from
    /// the element's own box rather than the deduplicated coordinate
    /// table. On periodic meshes this never wraps, which is what the
    /// geometry and Jacobian paths need.
    pub fn element_node_coord(&self, e: usize, a: usize) -> [f64; 3] {
        let c = self.element_coords(e);
        let (i, j, k) = inv_linearize(self.order, a);
        let local = [i, j, k];
        let mut x = [0.0; 3];
        for d in 0..3 {
            x[d] = (c[d] as f64 + 0.5 * (self.ref_nodes[local[d]] + 1.0)) * self.spacing[d];
        }
        x
    }

    /// Global node ids lying on the two boundary planes of a non-periodic
    /// axis, sorted ascending. Errors if the axis is periodic (periodic
    /// axes have no boundary).
    pub fn boundary_plane_nodes(&self, axis: usize) -> Result<Vec<u32>> {
        if axis > 2 {
            return Err(Error::Config(format!("axis {axis} out of range")));
        }
        if self.periodic[axis] {
            return Err(Error::Config(format!(
                "axis {axis} is periodic and has no boundary planes"
            )));
        }
        let mut out = Vec::new();
        let t_end = self.ticks[axis] - 1;
        for tz in 0..self.ticks[2] {
            for ty in 0..self.ticks[1] {
                for tx in 0..self.ticks[0] {
                    let t = [tx, ty, tz];
                    if t[axis] == 0 || t[axis] == t_end {
                        out.push(self.node_id_from_ticks(t));
                    }
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    fn node_id_from_ticks(&self, t: [usize; 3]) -> u32 {
        (t[0] + self.ticks[0] * (t[1] + self.ticks[1] * t[2])) as u32
    }
}

/// Build a box mesh of `elems` high-order hexahedra over `extents`, with
/// per-axis periodicity.
///
/// Shared nodes between neighboring elements (and across periodic wraps)
/// are deduplicated through exact integer lattice keys, so conforming
/// faces reference identical global ids by construction rather than by
/// floating-point merging. Fully periodic meshes have
/// `nx ny nz p^3` nodes; fully walled meshes have
/// `(nx p + 1)(ny p + 1)(nz p + 1)`.
pub fn build_box_mesh(
    order: usize,
    elems: [usize; 3],
    extents: [f64; 3],
    periodic: [bool; 3],
) -> Result<HexMesh> {
    let (ref_nodes, _) = crate::basis::gll_nodes_weights(order)?;
    for (d, &n) in elems.iter().enumerate() {
        if n == 0 {
            return Err(Error::Config(format!(
                "element count along axis {d} must be at least 1"
            )));
        }
    }
    for (d, &l) in extents.iter().enumerate() {
        if !(l > 0.0) || !l.is_finite() {
            return Err(Error::Config(format!(
                "domain extent along axis {d} must be positive and finite, got {l}"
            )));
        }
    }

    let mut ticks = [0usize; 3];
    for d in 0..3 {
        ticks[d] = if periodic[d] {
            elems[d] * order
        } else {
            elems[d] * order + 1
        };
    }
    let num_nodes = ticks[0] * ticks[1] * ticks[2];
    if num_nodes > u32::MAX as usize {
        return Err(Error::Config(format!(
            "mesh with {num_nodes} nodes exceeds the 32-bit id space"
        )));
    }

    let spacing = [
        extents[0] / elems[0] as f64,
        extents[1] / elems[1] as f64,
        extents[2] / elems[2] as f64,
    ];

    // Longest element axis becomes the slab axis; ties go to the highest
    // axis index so a cubic grid keeps plain x-fastest ordering.
    let slab_axis = (0..3).rev().max_by_key(|&d| elems[d]).unwrap();
    let cross_axes = match slab_axis {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    };

    // Distinct 1D node coordinates per axis, indexed by tick.
    let mut tick_coord: [Vec<f64>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for d in 0..3 {
        tick_coord[d] = (0..ticks[d])
            .map(|t| {
                let (ex, i) = if t == elems[d] * order {
                    (elems[d] - 1, order)
                } else {
                    (t / order, t % order)
                };
                (ex as f64 + 0.5 * (ref_nodes[i] + 1.0)) * spacing[d]
            })
            .collect();
    }

    let mut coords = vec![[0.0; 3]; num_nodes];
    let mut id = 0usize;
    for tz in 0..ticks[2] {
        for ty in 0..ticks[1] {
            for tx in 0..ticks[0] {
                coords[id] = [tick_coord[0][tx], tick_coord[1][ty], tick_coord[2][tz]];
                id += 1;
            }
        }
    }

    let mesh_shell = HexMesh {
        order,
        elems,
        extents,
        periodic,
        spacing,
        slab_axis,
        cross_axes,
        num_nodes,
        connec: Vec::new(),
        coords,
        ticks,
        ref_nodes,
    };

    let nloc = mesh_shell.nodes_per_element();
    let num_elems = mesh_shell.num_elements();
    let mut connec = vec![0u32; num_elems * nloc];
    for e in 0..num_elems {
        let c = mesh_shell.element_coords(e);
        let row = &mut connec[e * nloc..(e + 1) * nloc];
        let mut a = 0usize;
        for k in 0..=order {
            for j in 0..=order {
                for i in 0..=order {
                    let local = [i, j, k];
                    let mut t = [0usize; 3];
                    for d in 0..3 {
                        let raw = c[d] * order + local[d];
                        t[d] = if periodic[d] { raw % ticks[d] } else { raw };
                    }
                    row[a] = mesh_shell.node_id_from_ticks(t);
                    a += 1;
                }
            }
        }
    }

    Ok(HexMesh {
        connec,
        ..mesh_shell
    })
}
