//! Precomputed gather tables for the regularized access variant.
//!
//! The kernels normally reach a neighbor's data through a two-step chain:
//! encode the `(i, j, k)` tensor index, then look the result up in the
//! element's connectivity row. The regularized variant trades memory for
//! uniformity and precomputes the final global node id for every access
//! the quadrature loops will ever make, so the hot loop degenerates to a
//! linear walk over an id array.

use super::{inv_linearize, HexMesh};
use crate::Result;

/// Precomputed connectivity compositions for one mesh.
#[derive(Debug, Clone)]
pub struct GatherTable {
    order: usize,
    nodes_per_element: usize,
    /// Composition of connectivity with the local index encoding,
    /// `num_elements x (p+1)^3`. Resolves a decoded-then-re-encoded local
    /// node straight to its global id.
    node_ids: Vec<u32>,
    /// Fully unrolled contraction stencil,
    /// `num_elements x (p+1)^3 x 3 x (p+1)`: for each quadrature point and
    /// each reference axis, the global ids of the `p+1` nodes on the
    /// tensor line through that point.
    stencil: Vec<u32>,
}

impl GatherTable {
    /// Global id of local node `a` in element `e`.
    #[inline]
    pub fn node(&self, e: usize, a: usize) -> u32 {
        self.node_ids[e * self.nodes_per_element + a]
    }

    /// Flat composition table, same shape as the mesh connectivity.
    pub fn node_ids(&self) -> &[u32] {
        &self.node_ids
    }

    /// The `p+1` global ids on the axis-`d` line through local node `a`
    /// of element `e`.
    #[inline]
    pub fn stencil_line(&self, e: usize, a: usize, d: usize) -> &[u32] {
        let n = self.order + 1;
        let base = ((e * self.nodes_per_element + a) * 3 + d) * n;
        &self.stencil[base..base + n]
    }

    /// Raw stencil storage.
    pub fn stencil(&self) -> &[u32] {
        &self.stencil
    }

    /// Ratio of stencil-table entries to connectivity entries: `3 (p + 1)`.
    /// This is the memory price of fully regularized indexing.
    pub fn stencil_size_ratio(&self) -> f64 {
        self.stencil.len() as f64 / self.node_ids.len() as f64
    }
}

/// Build the gather tables for a mesh.
pub fn build_gather_table(mesh: &HexMesh) -> Result<GatherTable> {
    let p = mesh.order();
    let n = p + 1;
    let nloc = mesh.nodes_per_element();
    let num_elems = mesh.num_elements();

    let mut node_ids = vec![0u32; num_elems * nloc];
    let mut stencil = vec![0u32; num_elems * nloc * 3 * n];

    for e in 0..num_elems {
        let row = mesh.element_nodes(e);
        for a in 0..nloc {
            let (i, j, k) = inv_linearize(p, a);
            node_ids[e * nloc + a] = row[super::linearize(p, i, j, k)?];
            let base = ((e * nloc + a) * 3) * n;
            for m in 0..n {
                stencil[base + m] = row[super::linearize(p, m, j, k)?];
                stencil[base + n + m] = row[super::linearize(p, i, m, k)?];
                stencil[base + 2 * n + m] = row[super::linearize(p, i, j, m)?];
            }
        }
    }

    Ok(GatherTable {
        order: p,
        nodes_per_element: nloc,
        node_ids,
        stencil,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_box_mesh;

    #[test]
    fn composition_table_matches_connectivity() {
        let mesh = build_box_mesh(3, [2, 2, 2], [1.0; 3], [true; 3]).unwrap();
        let table = build_gather_table(&mesh).unwrap();
        assert_eq!(
            table.node_ids().len(),
            mesh.num_elements() * mesh.nodes_per_element()
        );
        for e in 0..mesh.num_elements() {
            for a in 0..mesh.nodes_per_element() {
                assert_eq!(table.node(e, a), mesh.element_nodes(e)[a]);
            }
        }
    }

    #[test]
    fn stencil_lines_walk_the_tensor_axes() {
        let p = 2;
        let mesh = build_box_mesh(p, [2, 3, 2], [1.0; 3], [true, false, true]).unwrap();
        let table = build_gather_table(&mesh).unwrap();
        for e in 0..mesh.num_elements() {
            let row = mesh.element_nodes(e);
            for a in 0..mesh.nodes_per_element() {
                let (i, j, k) = inv_linearize(p, a);
                for m in 0..=p {
                    let x = table.stencil_line(e, a, 0)[m];
                    let y = table.stencil_line(e, a, 1)[m];
                    let z = table.stencil_line(e, a, 2)[m];
                    assert_eq!(x, row[crate::mesh::linearize(p, m, j, k).unwrap()]);
                    assert_eq!(y, row[crate::mesh::linearize(p, i, m, k).unwrap()]);
                    assert_eq!(z, row[crate::mesh::linearize(p, i, j, m).unwrap()]);
                }
                // The line through a point contains the point itself.
                assert_eq!(table.stencil_line(e, a, 0)[i], table.node(e, a));
                assert_eq!(table.stencil_line(e, a, 1)[j], table.node(e, a));
                assert_eq!(table.stencil_line(e, a, 2)[k], table.node(e, a));
            }
        }
    }

    #[test]
    fn stencil_size_ratio_is_three_lines_per_point() {
        for p in [2, 3, 5] {
            let mesh = build_box_mesh(p, [2, 2, 2], [1.0; 3], [true; 3]).unwrap();
            let table = build_gather_table(&mesh).unwrap();
            assert_eq!(table.stencil_size_ratio(), (3 * (p + 1)) as f64);
        }
    }
}
