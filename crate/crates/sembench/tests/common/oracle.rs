//! Dense reference assembly for axis-aligned box meshes, written as an
//! independent check on the production kernels.
//!
//! Everything here is deliberately structured differently from the
//! kernel code: the cardinal derivative table is built from the direct
//! product-rule formula instead of the barycentric form, Jacobians are
//! the analytic diagonal of the box spacing instead of the numerically
//! differentiated tables, primitives are recomputed from scratch, and
//! gradients are dense O(nloc) sums over every basis function with
//! explicit Kronecker deltas rather than line-wise contractions. Only
//! the quadrature nodes and weights and the mesh connectivity are
//! shared, and both have their own independent tests.

use sembench::basis::QuadratureSet;
use sembench::mesh::{inv_linearize, HexMesh};
use sembench::state::{Conserved, FluidProperties};

pub struct DenseOracle {
    np: usize,
    nloc: usize,
    w: Vec<f64>,
    /// `dl[i * np + j]`: derivative of cardinal polynomial `j` at node `i`.
    dl: Vec<f64>,
    /// Analytic `det J` of the uniform box element, `hx hy hz / 8`.
    det: f64,
    /// Analytic diagonal inverse Jacobian, `2 / h` per axis.
    invh: [f64; 3],
}

impl DenseOracle {
    pub fn new(mesh: &HexMesh, quad: &QuadratureSet) -> Self {
        let np = mesh.order() + 1;
        let x = quad.nodes();
        assert_eq!(x.len(), np);
        let mut dl = vec![0.0f64; np * np];
        for i in 0..np {
            for j in 0..np {
                dl[i * np + j] = if i == j {
                    let mut s = 0.0;
                    for m in 0..np {
                        if m != j {
                            s += 1.0 / (x[j] - x[m]);
                        }
                    }
                    s
                } else {
                    let mut num = 1.0;
                    for m in 0..np {
                        if m != i && m != j {
                            num *= x[i] - x[m];
                        }
                    }
                    let mut den = 1.0;
                    for m in 0..np {
                        if m != j {
                            den *= x[j] - x[m];
                        }
                    }
                    num / den
                };
            }
        }
        let h = mesh.spacing();
        Self {
            np,
            nloc: np * np * np,
            w: quad.weights().to_vec(),
            dl,
            det: h[0] * h[1] * h[2] / 8.0,
            invh: [2.0 / h[0], 2.0 / h[1], 2.0 / h[2]],
        }
    }

    fn dl(&self, i: usize, j: usize) -> f64 {
        self.dl[i * self.np + j]
    }

    fn w3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.w[i] * self.w[j] * self.w[k]
    }

    /// Reference-space derivative of the local field `f` along `axis` at
    /// local point `a`, as a dense sum over every basis function.
    fn ref_deriv(&self, order: usize, f: &[f64], a: usize, axis: usize) -> f64 {
        let (ai, aj, ak) = inv_linearize(order, a);
        let mut acc = 0.0;
        for (b, &fb) in f.iter().enumerate() {
            let (bi, bj, bk) = inv_linearize(order, b);
            let factor = match axis {
                0 => {
                    if bj == aj && bk == ak {
                        self.dl(ai, bi)
                    } else {
                        0.0
                    }
                }
                1 => {
                    if bi == ai && bk == ak {
                        self.dl(aj, bj)
                    } else {
                        0.0
                    }
                }
                _ => {
                    if bi == ai && bj == aj {
                        self.dl(ak, bk)
                    } else {
                        0.0
                    }
                }
            };
            acc += factor * fb;
        }
        acc
    }

    /// Physical-space gradient of `f` at local point `a` on the box
    /// element (diagonal metric).
    pub fn phys_gradient(&self, order: usize, f: &[f64], a: usize) -> [f64; 3] {
        [
            self.invh[0] * self.ref_deriv(order, f, a, 0),
            self.invh[1] * self.ref_deriv(order, f, a, 1),
            self.invh[2] * self.ref_deriv(order, f, a, 2),
        ]
    }
}

/// Local primitive fields of one element, recomputed from the conserved
/// values with the ideal-gas closure written out inline.
pub struct LocalPrims {
    pub rho: Vec<f64>,
    pub u: [Vec<f64>; 3],
    pub p: Vec<f64>,
    pub t: Vec<f64>,
    pub e: Vec<f64>,
}

pub fn local_prims(
    mesh: &HexMesh,
    cons: &Conserved<f64>,
    props: &FluidProperties,
    e: usize,
) -> LocalPrims {
    let nloc = mesh.nodes_per_element();
    let nodes = mesh.element_nodes(e);
    let mut out = LocalPrims {
        rho: vec![0.0; nloc],
        u: [vec![0.0; nloc], vec![0.0; nloc], vec![0.0; nloc]],
        p: vec![0.0; nloc],
        t: vec![0.0; nloc],
        e: vec![0.0; nloc],
    };
    for a in 0..nloc {
        let n = nodes[a] as usize;
        let rho = cons.rho[n];
        let u = [
            cons.mom[0][n] / rho,
            cons.mom[1][n] / rho,
            cons.mom[2][n] / rho,
        ];
        let energy = cons.energy[n];
        let ke = 0.5 * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        let p = (props.gamma - 1.0) * (energy - ke);
        out.rho[a] = rho;
        for d in 0..3 {
            out.u[d][a] = u[d];
        }
        out.p[a] = p;
        out.t[a] = p / (rho * props.gas_constant);
        out.e[a] = energy;
    }
    out
}

/// Strong-form convective residual: at each collocation point the
/// divergence of the three flux families, weighted by `w det J`, summed
/// into the global arrays node by node.
pub fn convection(
    mesh: &HexMesh,
    quad: &QuadratureSet,
    cons: &Conserved<f64>,
    props: &FluidProperties,
) -> [Vec<f64>; 5] {
    let orc = DenseOracle::new(mesh, quad);
    let order = mesh.order();
    let nloc = mesh.nodes_per_element();
    let n = mesh.num_nodes();
    let mut out = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    let mut flux = [vec![0.0; nloc], vec![0.0; nloc], vec![0.0; nloc]];
    for e in 0..mesh.num_elements() {
        let pr = local_prims(mesh, cons, props, e);
        let nodes = mesh.element_nodes(e);

        // Mass: flux_c = rho u_c.
        for c in 0..3 {
            for a in 0..nloc {
                flux[c][a] = pr.rho[a] * pr.u[c][a];
            }
        }
        deposit_divergence(&orc, order, nloc, &flux, nodes, &mut out[0]);

        // Momentum d: flux_c = (rho u_d) u_c + delta_cd p.
        for d in 0..3 {
            for c in 0..3 {
                for a in 0..nloc {
                    let mut f = pr.rho[a] * pr.u[d][a] * pr.u[c][a];
                    if c == d {
                        f += pr.p[a];
                    }
                    flux[c][a] = f;
                }
            }
            deposit_divergence(&orc, order, nloc, &flux, nodes, &mut out[1 + d]);
        }

        // Energy: flux_c = (E + p) u_c.
        for c in 0..3 {
            for a in 0..nloc {
                flux[c][a] = (pr.e[a] + pr.p[a]) * pr.u[c][a];
            }
        }
        deposit_divergence(&orc, order, nloc, &flux, nodes, &mut out[4]);
    }
    out
}

fn deposit_divergence(
    orc: &DenseOracle,
    order: usize,
    nloc: usize,
    flux: &[Vec<f64>; 3],
    nodes: &[u32],
    out: &mut [f64],
) {
    for a in 0..nloc {
        let (i, j, k) = inv_linearize(order, a);
        let mut div = 0.0;
        for c in 0..3 {
            div += orc.invh[c] * orc.ref_deriv(order, &flux[c], a, c);
        }
        out[nodes[a] as usize] += orc.w3(i, j, k) * orc.det * div;
    }
}

/// Weak-form viscous and thermal residual: stress and heat flux at each
/// quadrature point, tested against the gradient of every local basis
/// function in an O(nloc^2) double loop.
pub fn diffusion(
    mesh: &HexMesh,
    quad: &QuadratureSet,
    cons: &Conserved<f64>,
    props: &FluidProperties,
) -> [Vec<f64>; 5] {
    let orc = DenseOracle::new(mesh, quad);
    let order = mesh.order();
    let nloc = mesh.nodes_per_element();
    let n = mesh.num_nodes();
    let mu = props.mu;
    let kappa = props.kappa;
    let mut out = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    for e in 0..mesh.num_elements() {
        let pr = local_prims(mesh, cons, props, e);
        let nodes = mesh.element_nodes(e);

        // Stress tensor and energy flux at every quadrature point.
        let mut tau = vec![[[0.0f64; 3]; 3]; nloc];
        let mut eflux = vec![[0.0f64; 3]; nloc];
        for a in 0..nloc {
            let gu = [
                orc.phys_gradient(order, &pr.u[0], a),
                orc.phys_gradient(order, &pr.u[1], a),
                orc.phys_gradient(order, &pr.u[2], a),
            ];
            let div_u = gu[0][0] + gu[1][1] + gu[2][2];
            for d in 0..3 {
                for c in 0..3 {
                    let mut t = mu * (gu[d][c] + gu[c][d]);
                    if d == c {
                        t -= mu * (2.0 / 3.0) * div_u;
                    }
                    tau[a][d][c] = t;
                }
            }
            let gt = orc.phys_gradient(order, &pr.t, a);
            for c in 0..3 {
                let mut work = 0.0;
                for d in 0..3 {
                    work += tau[a][d][c] * pr.u[d][a];
                }
                eflux[a][c] = work + kappa * gt[c];
            }
        }

        // Test against the gradient of every basis function.
        for b in 0..nloc {
            let (bi, bj, bk) = inv_linearize(order, b);
            let mut acc = [0.0f64; 4];
            for a in 0..nloc {
                let (ai, aj, ak) = inv_linearize(order, a);
                let gphi = [
                    if aj == bj && ak == bk { orc.invh[0] * orc.dl(ai, bi) } else { 0.0 },
                    if ai == bi && ak == bk { orc.invh[1] * orc.dl(aj, bj) } else { 0.0 },
                    if ai == bi && aj == bj { orc.invh[2] * orc.dl(ak, bk) } else { 0.0 },
                ];
                if gphi == [0.0; 3] {
                    continue;
                }
                let wd = orc.w3(ai, aj, ak) * orc.det;
                for d in 0..3 {
                    let mut dot = 0.0;
                    for c in 0..3 {
                        dot += gphi[c] * tau[a][d][c];
                    }
                    acc[d] += wd * dot;
                }
                let mut dot = 0.0;
                for c in 0..3 {
                    dot += gphi[c] * eflux[a][c];
                }
                acc[3] += wd * dot;
            }
            let node = nodes[b] as usize;
            for d in 0..3 {
                out[1 + d][node] += acc[d];
            }
            out[4][node] += acc[3];
        }
    }
    out
}

/// Diagonal mass vector assembled from the analytic box Jacobian.
pub fn mass_vector(mesh: &HexMesh, quad: &QuadratureSet) -> Vec<f64> {
    let orc = DenseOracle::new(mesh, quad);
    let order = mesh.order();
    let nloc = mesh.nodes_per_element();
    let mut m = vec![0.0f64; mesh.num_nodes()];
    for e in 0..mesh.num_elements() {
        let nodes = mesh.element_nodes(e);
        for a in 0..nloc {
            let (i, j, k) = inv_linearize(order, a);
            m[nodes[a] as usize] += orc.w3(i, j, k) * orc.det;
        }
    }
    m
}

/// Semidiscrete right-hand side `(-R_conv - R_diff)/M` plus body force
/// and its work rate, with momentum rates zeroed on `wall_nodes`.
pub fn rhs(
    mesh: &HexMesh,
    quad: &QuadratureSet,
    cons: &Conserved<f64>,
    props: &FluidProperties,
    wall_nodes: &[u32],
) -> [Vec<f64>; 5] {
    let rc = convection(mesh, quad, cons, props);
    let rd = diffusion(mesh, quad, cons, props);
    let m = mass_vector(mesh, quad);
    let n = mesh.num_nodes();
    let mut out = [
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
        vec![0.0; n],
    ];
    for c in 0..5 {
        for node in 0..n {
            out[c][node] = -(rc[c][node] + rd[c][node]) / m[node];
        }
    }
    let f = props.body_force;
    if f.iter().any(|&v| v != 0.0) || props.energy_source != 0.0 {
        for node in 0..n {
            let mut work = 0.0;
            for d in 0..3 {
                out[1 + d][node] += f[d];
                work += f[d] * cons.mom[d][node] / cons.rho[node];
            }
            out[4][node] += props.energy_source + work;
        }
    }
    for &w in wall_nodes {
        for d in 0..3 {
            out[1 + d][w as usize] = 0.0;
        }
    }
    out
}

/// One classical four-stage Runge-Kutta step of the oracle semidiscrete
/// system, advancing `y` in place.
pub fn rk4_step(
    mesh: &HexMesh,
    quad: &QuadratureSet,
    y: &mut Conserved<f64>,
    props: &FluidProperties,
    dt: f64,
    wall_nodes: &[u32],
) {
    let n = mesh.num_nodes();
    let add = |base: &Conserved<f64>, k: &[Vec<f64>; 5], a: f64| {
        let mut s = base.clone();
        for node in 0..n {
            s.rho[node] += a * k[0][node];
            for d in 0..3 {
                s.mom[d][node] += a * k[1 + d][node];
            }
            s.energy[node] += a * k[4][node];
        }
        s
    };
    let k1 = rhs(mesh, quad, y, props, wall_nodes);
    let s2 = add(y, &k1, 0.5 * dt);
    let k2 = rhs(mesh, quad, &s2, props, wall_nodes);
    let s3 = add(y, &k2, 0.5 * dt);
    let k3 = rhs(mesh, quad, &s3, props, wall_nodes);
    let s4 = add(y, &k3, dt);
    let k4 = rhs(mesh, quad, &s4, props, wall_nodes);
    for node in 0..n {
        y.rho[node] +=
            dt / 6.0 * (k1[0][node] + 2.0 * k2[0][node] + 2.0 * k3[0][node] + k4[0][node]);
        for d in 0..3 {
            let c = 1 + d;
            y.mom[d][node] +=
                dt / 6.0 * (k1[c][node] + 2.0 * k2[c][node] + 2.0 * k3[c][node] + k4[c][node]);
        }
        y.energy[node] +=
            dt / 6.0 * (k1[4][node] + 2.0 * k2[4][node] + 2.0 * k3[4][node] + k4[4][node]);
    }
}
