//! Gauss-Lobatto-Legendre quadrature and nodal interpolation machinery.
//!
//! Everything downstream (mesh metrics, mass lumping, residual kernels)
//! is built on a 1D GLL rule of order `p`: the `p+1` nodes are the roots
//! of `(1 - x^2) P'_p(x)`, the weights are `2 / (p (p+1) P_p(x_i)^2)`,
//! and the collocation derivative matrix holds the derivatives of the
//! Lagrange cardinal polynomials at the nodes. Collocating the solution at
//! the quadrature points is what makes the spectral-element mass matrix
//! diagonal, so these rules are computed once per run, in `f64`, and
//! shared by every kernel variant.

use crate::{Error, Result};

/// Lowest supported polynomial order.
pub const MIN_ORDER: usize = 1;
/// Highest supported polynomial order.
pub const MAX_ORDER: usize = 10;

/// Convergence threshold for the Newton root polish.
const NEWTON_TOL: f64 = 1e-15;
/// Iteration cap for the Newton root polish.
const NEWTON_MAX_ITERS: usize = 100;

/// One-dimensional GLL rule of order `p`: nodes, weights, and the
/// collocation derivative matrix, all on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct QuadratureSet {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Row-major `(p+1) x (p+1)`: entry `(i, j)` is the derivative of the
    /// `j`-th cardinal polynomial evaluated at node `i`.
    deriv_matrix: Vec<f64>,
}

impl QuadratureSet {
    /// Build the order-`p` rule.
    pub fn new(order: usize) -> Result<Self> {
        let (nodes, weights) = gll_nodes_weights(order)?;
        let deriv_matrix = lagrange_derivative_matrix(&nodes)?;
        Ok(Self {
            order,
            nodes,
            weights,
            deriv_matrix,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Number of nodes per direction (`p + 1`).
    pub fn num_nodes(&self) -> usize {
        self.order + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Row-major derivative matrix.
    pub fn deriv_matrix(&self) -> &[f64] {
        &self.deriv_matrix
    }

    /// Derivative of cardinal polynomial `j` at node `i`.
    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.deriv_matrix[i * (self.order + 1) + j]
    }
}

/// Evaluate the Legendre polynomial `P_n` and its derivative at `x`.
///
/// Uses the three-term recurrence for the values and the companion
/// recurrence `P'_k = P'_{k-2} + (2k - 1) P_{k-1}`, which stays finite at
/// the interval endpoints.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut p_prev = 1.0;
    let mut p = x;
    let mut d_prev = 0.0;
    let mut d = 1.0;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        let d_next = d_prev + (2.0 * kf - 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Compute the GLL nodes and weights of order `p`.
///
/// The interior nodes are the roots of `P'_p`, found by Newton iteration
/// from Chebyshev-Lobatto starting guesses `-cos(pi j / p)`. The identity
/// `((1 - x^2) P'_p)' = -p (p + 1) P_p` turns each Newton step into
///
/// ```text
/// x += (1 - x^2) P'_p(x) / (p (p + 1) P_p(x))
/// ```
///
/// Endpoints are pinned to exactly -1 and +1, and the converged interior
/// roots are symmetrized about the origin so the rule is exactly
/// point-symmetric. Weights follow as `2 / (p (p + 1) P_p(x_i)^2)`.
pub fn gll_nodes_weights(p: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&p) {
        return Err(Error::OrderRange {
            order: p,
            min: MIN_ORDER,
            max: MAX_ORDER,
        });
    }
    let n = p + 1;
    let pf = p as f64;
    let scale = pf * (pf + 1.0);

    let mut nodes = vec![0.0; n];
    nodes[0] = -1.0;
    nodes[p] = 1.0;
    for j in 1..p {
        let mut x = -(std::f64::consts::PI * j as f64 / pf).cos();
        for _ in 0..NEWTON_MAX_ITERS {
            let (pn, dpn) = legendre(p, x);
            let dx = (1.0 - x * x) * dpn / (scale * pn);
            x += dx;
            if dx.abs() <= NEWTON_TOL {
                break;
            }
        }
        nodes[j] = x;
    }

    // Enforce exact symmetry; the analytic rule is point-symmetric and the
    // tensor-product code downstream relies on mirrored nodes agreeing to
    // the last bit.
    for j in 1..n / 2 {
        let s = 0.5 * (nodes[p - j] - nodes[j]);
        nodes[j] = -s;
        nodes[p - j] = s;
    }
    if n % 2 == 1 {
        nodes[p / 2] = 0.0;
    }

    let mut weights = vec![0.0; n];
    for (w, &x) in weights.iter_mut().zip(nodes.iter()) {
        let (pn, _) = legendre(p, x);
        *w = 2.0 / (scale * pn * pn);
    }
    Ok((nodes, weights))
}

/// Build the collocation derivative matrix for an arbitrary set of
/// distinct interpolation nodes.
///
/// Entry `(i, j)` is the derivative at `nodes[i]` of the cardinal
/// polynomial that is 1 at `nodes[j]` and 0 at every other node. Off the
/// diagonal the barycentric form gives
///
/// ```text
/// D[i][j] = (lambda_j / lambda_i) / (nodes[i] - nodes[j])
/// ```
///
/// with `lambda_j = 1 / prod_{k != j} (nodes[j] - nodes[k])`; the diagonal
/// is the negated row sum, which makes each row annihilate constants
/// exactly.
pub fn lagrange_derivative_matrix(nodes: &[f64]) -> Result<Vec<f64>> {
    let n = nodes.len();
    let mut lambda = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                let diff = nodes[j] - nodes[k];
                if diff == 0.0 {
                    let (i, j) = (k.min(j), k.max(j));
                    return Err(Error::CoincidentNodes {
                        i,
                        j,
                        value: nodes[i],
                    });
                }
                lambda[j] /= diff;
            }
        }
    }

    let mut d = vec![0.0; n * n];
    for i in 0..n {
        let mut row_sum = 0.0;
        for j in 0..n {
            if i != j {
                let entry = (lambda[j] / lambda[i]) / (nodes[i] - nodes[j]);
                d[i * n + j] = entry;
                row_sum += entry;
            }
        }
        d[i * n + i] = -row_sum;
    }
    Ok(d)
}
