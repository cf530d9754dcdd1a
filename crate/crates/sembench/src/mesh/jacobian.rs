//! Element geometry metrics.
//!
//! For every element and every quadrature point this stores the inverse
//! Jacobian of the reference-to-physical map and its determinant. The
//! forward Jacobian `A[r][c] = d x_r / d xi_c` is contracted from the
//! element's nodal coordinates with the collocation derivative matrix, so
//! the same code covers stretched boxes and, in principle, any
//! isoparametric hexahedron; only the inverse and determinant are kept
//! because that is all the kernels consume.

use super::{inv_linearize, HexMesh};
use crate::basis::QuadratureSet;
use crate::{Error, Result};

/// Per-quadrature-point metric terms for a whole mesh.
#[derive(Debug, Clone)]
pub struct JacobianData {
    nodes_per_element: usize,
    /// Row-major 3x3 inverse Jacobians, entry `(r, c)` holding
    /// `d xi_r / d x_c` (units 1/length); `num_elements x (p+1)^3 x 9`.
    inv_jac: Vec<f64>,
    /// Jacobian determinants (units length^3); `num_elements x (p+1)^3`.
    det: Vec<f64>,
}

impl JacobianData {
    /// Inverse Jacobian at quadrature point `a` of element `e`.
    #[inline]
    pub fn inv(&self, e: usize, a: usize) -> &[f64] {
        let base = (e * self.nodes_per_element + a) * 9;
        &self.inv_jac[base..base + 9]
    }

    /// Determinant at quadrature point `a` of element `e`.
    #[inline]
    pub fn det(&self, e: usize, a: usize) -> f64 {
        self.det[e * self.nodes_per_element + a]
    }

    pub fn inv_flat(&self) -> &[f64] {
        &self.inv_jac
    }

    pub fn det_flat(&self) -> &[f64] {
        &self.det
    }
}

/// Compute inverse Jacobians and determinants at every quadrature point.
///
/// Fails with the offending element id if any determinant is not strictly
/// positive, which on these generated meshes can only mean a degenerate
/// configuration upstream.
pub fn compute_jacobians(mesh: &HexMesh, basis: &QuadratureSet) -> Result<JacobianData> {
    let p = mesh.order();
    let n = p + 1;
    let nloc = mesh.nodes_per_element();
    let num_elems = mesh.num_elements();
    let mut inv_jac = vec![0.0; num_elems * nloc * 9];
    let mut det = vec![0.0; num_elems * nloc];

    // Nodal coordinates of one element, gathered once per element.
    let mut xe = vec![[0.0f64; 3]; nloc];
    for e in 0..num_elems {
        for (a, x) in xe.iter_mut().enumerate() {
            *x = mesh.element_node_coord(e, a);
        }
        for a in 0..nloc {
            let (i, j, k) = inv_linearize(p, a);
            // Forward map A[r][c] = d x_r / d xi_c.
            let mut fwd = [[0.0f64; 3]; 3];
            for m in 0..n {
                let dx = basis.d(i, m);
                let dy = basis.d(j, m);
                let dz = basis.d(k, m);
                let nx = xe[m + n * j + n * n * k];
                let ny = xe[i + n * m + n * n * k];
                let nz = xe[i + n * j + n * n * m];
                for r in 0..3 {
                    fwd[r][0] += dx * nx[r];
                    fwd[r][1] += dy * ny[r];
                    fwd[r][2] += dz * nz[r];
                }
            }
            let d = det3(&fwd);
            if !(d > 0.0) {
                return Err(Error::InvertedElement { element: e, det: d });
            }
            let inv = invert3(&fwd, d);
            let base = (e * nloc + a) * 9;
            for r in 0..3 {
                for c in 0..3 {
                    inv_jac[base + 3 * r + c] = inv[r][c];
                }
            }
            det[e * nloc + a] = d;
        }
    }

    Ok(JacobianData {
        nodes_per_element: nloc,
        inv_jac,
        det,
    })
}

fn det3(a: &[[f64; 3]; 3]) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
        - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn invert3(a: &[[f64; 3]; 3], det: f64) -> [[f64; 3]; 3] {
    let inv_det = 1.0 / det;
    [
        [
            (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_det,
            (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_det,
            (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_det,
        ],
        [
            (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_det,
            (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_det,
            (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_det,
        ],
        [
            (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_det,
            (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_det,
            (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_det,
        ],
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::QuadratureSet;
    use crate::mesh::build_box_mesh;
    use approx::assert_relative_eq;

    #[test]
    fn box_elements_have_analytic_diagonal_metrics() {
        // Element sides hx=1, hy=2, hz=4 give det = (hx/2)(hy/2)(hz/2) = 1.
        let mesh = build_box_mesh(3, [2, 1, 1], [2.0, 2.0, 4.0], [false; 3]).unwrap();
        let basis = QuadratureSet::new(3).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        for e in 0..mesh.num_elements() {
            for a in 0..mesh.nodes_per_element() {
                assert_relative_eq!(jac.det(e, a), 1.0, max_relative = 1e-14);
                let inv = jac.inv(e, a);
                let expect = [2.0 / 1.0, 2.0 / 2.0, 2.0 / 4.0];
                for r in 0..3 {
                    for c in 0..3 {
                        if r == c {
                            assert_relative_eq!(inv[3 * r + c], expect[r], max_relative = 1e-13);
                        } else {
                            assert!(inv[3 * r + c].abs() <= 1e-13);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn determinant_is_cell_volume_over_eight() {
        let mesh = build_box_mesh(2, [3, 4, 5], [1.7, 0.9, 2.3], [true; 3]).unwrap();
        let basis = QuadratureSet::new(2).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let h = mesh.spacing();
        let expect = h[0] * h[1] * h[2] / 8.0;
        for e in 0..mesh.num_elements() {
            for a in 0..mesh.nodes_per_element() {
                assert_relative_eq!(jac.det(e, a), expect, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn stored_inverse_times_recomputed_forward_is_identity() {
        // Recompute the forward map with an independent explicit loop over
        // cardinal derivatives and multiply by the stored inverse.
        let p = 3;
        let mesh = build_box_mesh(p, [2, 2, 2], [1.0, 2.0, 4.0], [false; 3]).unwrap();
        let basis = QuadratureSet::new(p).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let n = p + 1;
        for e in 0..mesh.num_elements() {
            for a in 0..mesh.nodes_per_element() {
                let (i, j, k) = crate::mesh::inv_linearize(p, a);
                let mut fwd = [[0.0f64; 3]; 3];
                for m in 0..n {
                    for r in 0..3 {
                        fwd[r][0] +=
                            basis.d(i, m) * mesh.element_node_coord(e, m + n * j + n * n * k)[r];
                        fwd[r][1] +=
                            basis.d(j, m) * mesh.element_node_coord(e, i + n * m + n * n * k)[r];
                        fwd[r][2] +=
                            basis.d(k, m) * mesh.element_node_coord(e, i + n * j + n * n * m)[r];
                    }
                }
                let inv = jac.inv(e, a);
                for r in 0..3 {
                    for c in 0..3 {
                        // (inv * fwd)[r][c]: inv[r][q] = d xi_r / d x_q,
                        // fwd[q][c] = d x_q / d xi_c.
                        let mut s = 0.0;
                        for q in 0..3 {
                            s += inv[3 * r + q] * fwd[q][c];
                        }
                        let expect = if r == c { 1.0 } else { 0.0 };
                        assert!(
                            (s - expect).abs() <= 1e-12,
                            "identity defect at e={e} a={a} ({r},{c}): {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn quadrature_weights_times_determinants_sum_to_volume() {
        let p = 4;
        let mesh = build_box_mesh(p, [3, 2, 2], [2.0, 1.0, 3.0], [true, false, true]).unwrap();
        let basis = QuadratureSet::new(p).unwrap();
        let jac = compute_jacobians(&mesh, &basis).unwrap();
        let mut vol = 0.0;
        for e in 0..mesh.num_elements() {
            for a in 0..mesh.nodes_per_element() {
                let (i, j, k) = crate::mesh::inv_linearize(p, a);
                let w = basis.weights()[i] * basis.weights()[j] * basis.weights()[k];
                vol += w * jac.det(e, a);
            }
        }
        assert_relative_eq!(vol, 2.0 * 1.0 * 3.0, max_relative = 1e-12);
    }
}
