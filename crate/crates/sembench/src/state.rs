//! Flow state, ideal-gas closure, and case initialization.
//!
//! The solver integrates the conserved set (density, momentum, total
//! energy) and keeps the derived primitives (velocity, pressure,
//! temperature) in separate nodal arrays, refreshed once per residual
//! evaluation. Initial conditions are evaluated analytically in `f64`
//! and cast down once, so an FP32 state starts as the exact rounding of
//! the FP64 one.

use crate::mesh::HexMesh;
use crate::precision::{Precision, Scalar};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Constant material and forcing parameters of a run.
///
/// The viscous terms use a constant dynamic viscosity `mu` (Pa·s) and
/// conductivity `kappa` (W/(m·K)) in place of any nonlinear stabilization;
/// `body_force` (N/m³) and `energy_source` (W/m³) are uniform in space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluidProperties {
    /// Ratio of specific heats (dimensionless), must exceed 1.
    pub gamma: f64,
    /// Specific gas constant R (J/(kg·K)).
    pub gas_constant: f64,
    /// Dynamic viscosity (Pa·s).
    pub mu: f64,
    /// Thermal conductivity (W/(m·K)).
    pub kappa: f64,
    /// Uniform body force per volume (N/m³).
    pub body_force: [f64; 3],
    /// Uniform volumetric energy source (W/m³).
    pub energy_source: f64,
}

impl FluidProperties {
    /// Air-like defaults: `gamma` 1.4, conductivity derived from Prandtl
    /// number 0.71, no forcing.
    pub fn air(mu: f64) -> Self {
        Self::new(1.4, 287.0, mu, 0.71).expect("air constants are valid")
    }

    /// Build properties deriving `kappa` from a Prandtl number:
    /// `kappa = cp * mu / prandtl`.
    pub fn new(gamma: f64, gas_constant: f64, mu: f64, prandtl: f64) -> Result<Self> {
        if !(gamma > 1.0) {
            return Err(Error::Config(format!("gamma must exceed 1, got {gamma}")));
        }
        if !(gas_constant > 0.0) {
            return Err(Error::Config(format!(
                "gas constant must be positive, got {gas_constant}"
            )));
        }
        if !(mu >= 0.0) {
            return Err(Error::Config(format!("viscosity must be >= 0, got {mu}")));
        }
        if !(prandtl > 0.0) {
            return Err(Error::Config(format!(
                "Prandtl number must be positive, got {prandtl}"
            )));
        }
        let cp = gamma * gas_constant / (gamma - 1.0);
        Ok(Self {
            gamma,
            gas_constant,
            mu,
            kappa: cp * mu / prandtl,
            body_force: [0.0; 3],
            energy_source: 0.0,
        })
    }

    /// Specific heat at constant pressure.
    pub fn cp(&self) -> f64 {
        self.gamma * self.gas_constant / (self.gamma - 1.0)
    }

    /// Speed of sound for a given density and pressure.
    pub fn sound_speed(&self, rho: f64, p: f64) -> f64 {
        (self.gamma * p / rho).sqrt()
    }
}

/// The integrated conserved fields, stored one flat array per component.
#[derive(Debug, Clone)]
pub struct Conserved<S> {
    /// Density (kg/m³).
    pub rho: Vec<S>,
    /// Momentum density (kg/(m²·s)), one array per direction.
    pub mom: [Vec<S>; 3],
    /// Total energy density (J/m³).
    pub energy: Vec<S>,
}

impl<S: Scalar> Conserved<S> {
    pub fn zeros(num_nodes: usize) -> Self {
        Self {
            rho: vec![S::zero(); num_nodes],
            mom: [
                vec![S::zero(); num_nodes],
                vec![S::zero(); num_nodes],
                vec![S::zero(); num_nodes],
            ],
            energy: vec![S::zero(); num_nodes],
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.rho.len()
    }

    /// Copy every component of `src` into `self`.
    pub fn assign(&mut self, src: &Self) {
        self.rho.copy_from_slice(&src.rho);
        for d in 0..3 {
            self.mom[d].copy_from_slice(&src.mom[d]);
        }
        self.energy.copy_from_slice(&src.energy);
    }

    /// `self += a * x`, component-wise.
    pub fn axpy(&mut self, a: S, x: &Self) {
        let add = |dst: &mut [S], src: &[S]| {
            for (d, &s) in dst.iter_mut().zip(src.iter()) {
                *d += a * s;
            }
        };
        add(&mut self.rho, &x.rho);
        for d in 0..3 {
            add(&mut self.mom[d], &x.mom[d]);
        }
        add(&mut self.energy, &x.energy);
    }

    /// Set every component to zero.
    pub fn fill_zero(&mut self) {
        self.rho.fill(S::zero());
        for d in 0..3 {
            self.mom[d].fill(S::zero());
        }
        self.energy.fill(S::zero());
    }
}

/// Complete nodal flow state: conserved fields plus the derived
/// primitives the kernels gather.
#[derive(Debug, Clone)]
pub struct FlowState<S> {
    pub conserved: Conserved<S>,
    /// Velocity (m/s), one array per direction.
    pub vel: [Vec<S>; 3],
    /// Pressure (Pa).
    pub pressure: Vec<S>,
    /// Temperature (K).
    pub temperature: Vec<S>,
}

impl<S: Scalar> FlowState<S> {
    pub fn precision(&self) -> Precision {
        S::PRECISION
    }

    pub fn num_nodes(&self) -> usize {
        self.conserved.num_nodes()
    }

    /// Wrap a conserved set, deriving the primitive arrays. Fails on the
    /// first node violating the validity invariants.
    pub fn from_conserved(conserved: Conserved<S>, props: &FluidProperties) -> Result<Self> {
        let n = conserved.num_nodes();
        let mut state = Self {
            conserved,
            vel: [vec![S::zero(); n], vec![S::zero(); n], vec![S::zero(); n]],
            pressure: vec![S::zero(); n],
            temperature: vec![S::zero(); n],
        };
        state.update_primitives(props)?;
        Ok(state)
    }

    /// Recompute velocity, pressure, and temperature from the conserved
    /// fields, checking validity (positive density and internal energy)
    /// at every node.
    pub fn update_primitives(&mut self, props: &FluidProperties) -> Result<()> {
        let gamma_m1 = S::from_f64(props.gamma - 1.0);
        let inv_r = S::from_f64(1.0 / props.gas_constant);
        let half = S::from_f64(0.5);
        let c = &self.conserved;
        for node in 0..c.num_nodes() {
            let rho = c.rho[node];
            if !(rho > S::zero()) {
                return Err(Error::InvalidState {
                    node,
                    quantity: "density",
                    value: rho.to_f64(),
                });
            }
            let inv_rho = S::one() / rho;
            let u = [
                c.mom[0][node] * inv_rho,
                c.mom[1][node] * inv_rho,
                c.mom[2][node] * inv_rho,
            ];
            let ke = half * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
            let internal = c.energy[node] - ke;
            if !(internal > S::zero()) {
                return Err(Error::InvalidState {
                    node,
                    quantity: "internal energy",
                    value: internal.to_f64(),
                });
            }
            let p = gamma_m1 * internal;
            self.vel[0][node] = u[0];
            self.vel[1][node] = u[1];
            self.vel[2][node] = u[2];
            self.pressure[node] = p;
            self.temperature[node] = p * inv_rho * inv_r;
        }
        Ok(())
    }
}

/// Ideal-gas closure at a single node: velocity `rho u / rho`, pressure
/// `(gamma - 1)(E - rho |u|^2 / 2)`, temperature `p / (rho R)`.
pub fn primitives<S: Scalar>(
    state: &FlowState<S>,
    props: &FluidProperties,
    node: usize,
) -> Result<([S; 3], S, S)> {
    let c = &state.conserved;
    let rho = c.rho[node];
    if !(rho > S::zero()) {
        return Err(Error::InvalidState {
            node,
            quantity: "density",
            value: rho.to_f64(),
        });
    }
    let inv_rho = S::one() / rho;
    let u = [
        c.mom[0][node] * inv_rho,
        c.mom[1][node] * inv_rho,
        c.mom[2][node] * inv_rho,
    ];
    let ke = S::from_f64(0.5) * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    let internal = c.energy[node] - ke;
    if !(internal > S::zero()) {
        return Err(Error::InvalidState {
            node,
            quantity: "internal energy",
            value: internal.to_f64(),
        });
    }
    let p = S::from_f64(props.gamma - 1.0) * internal;
    let t = p * inv_rho * S::from_f64(1.0 / props.gas_constant);
    Ok((u, p, t))
}

/// Reference pressure giving a target Mach number for a velocity scale:
/// `p0 = rho0 (v / mach)^2 / gamma`.
pub fn mach_scaled_pressure(props: &FluidProperties, rho0: f64, velocity: f64, mach: f64) -> f64 {
    rho0 * (velocity / mach) * (velocity / mach) / props.gamma
}

/// Streamwise body force balancing the wall shear of the laminar
/// parabolic channel profile: `f_x = 3 mu u_bulk / delta^2`.
pub fn channel_body_force(mu: f64, u_bulk: f64, delta: f64) -> [f64; 3] {
    [3.0 * mu * u_bulk / (delta * delta), 0.0, 0.0]
}

/// Taylor-Green vortex initialization on a fully periodic box.
///
/// With per-axis wavenumbers `k_d = 2 pi / L_d`, the velocity is
/// `V0 (sin kx x cos ky y cos kz z, -cos kx x sin ky y cos kz z, 0)`,
/// pressure `p0 + rho0 V0^2 / 16 (cos 2kx x + cos 2ky y)(cos 2kz z + 2)`,
/// and density `rho0 p / p0` so the initial temperature field is uniform.
/// Total energy follows from the closure.
pub fn init_tgv<S: Scalar>(
    mesh: &HexMesh,
    props: &FluidProperties,
    v0: f64,
    rho0: f64,
    p0: f64,
) -> Result<FlowState<S>> {
    if mesh.periodic() != [true; 3] {
        return Err(Error::Config(
            "Taylor-Green initialization requires a fully periodic mesh".into(),
        ));
    }
    if !(v0 > 0.0) || !(rho0 > 0.0) || !(p0 > 0.0) {
        return Err(Error::Config(format!(
            "Taylor-Green scales must be positive (v0={v0}, rho0={rho0}, p0={p0})"
        )));
    }
    let ext = mesh.extents();
    let k = [
        2.0 * std::f64::consts::PI / ext[0],
        2.0 * std::f64::consts::PI / ext[1],
        2.0 * std::f64::consts::PI / ext[2],
    ];
    let n = mesh.num_nodes();
    let mut c = Conserved::<S>::zeros(n);
    let gamma_m1 = props.gamma - 1.0;
    for (node, x) in mesh.coords().iter().enumerate() {
        let (sx, cx) = (k[0] * x[0]).sin_cos();
        let (sy, cy) = (k[1] * x[1]).sin_cos();
        let cz = (k[2] * x[2]).cos();
        let u = [v0 * sx * cy * cz, -v0 * cx * sy * cz, 0.0];
        let p = p0
            + rho0 * v0 * v0 / 16.0
                * ((2.0 * k[0] * x[0]).cos() + (2.0 * k[1] * x[1]).cos())
                * ((2.0 * k[2] * x[2]).cos() + 2.0);
        let rho = rho0 * p / p0;
        let e = p / gamma_m1 + 0.5 * rho * (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
        c.rho[node] = S::from_f64(rho);
        for d in 0..3 {
            c.mom[d][node] = S::from_f64(rho * u[d]);
        }
        c.energy[node] = S::from_f64(e);
    }
    FlowState::from_conserved(c, props)
}

/// Laminar channel-flow initialization: parabolic streamwise profile
/// `u_x = 1.5 u_bulk (1 - ((y - delta)/delta)^2)` between walls at
/// `y = 0` and `y = 2 delta`, uniform density `rho0` and pressure `p0`.
///
/// The matching body force is [`channel_body_force`]; applying it is the
/// caller's concern since forcing lives in [`FluidProperties`].
pub fn init_channel_flow<S: Scalar>(
    mesh: &HexMesh,
    props: &FluidProperties,
    u_bulk: f64,
    rho0: f64,
    p0: f64,
) -> Result<FlowState<S>> {
    if mesh.periodic() != [true, false, true] {
        return Err(Error::Config(
            "channel flow requires periodicity in x and z with walls in y".into(),
        ));
    }
    if !(u_bulk > 0.0) || !(rho0 > 0.0) || !(p0 > 0.0) {
        return Err(Error::Config(format!(
            "channel scales must be positive (u_bulk={u_bulk}, rho0={rho0}, p0={p0})"
        )));
    }
    let delta = mesh.extents()[1] / 2.0;
    let n = mesh.num_nodes();
    let mut c = Conserved::<S>::zeros(n);
    let gamma_m1 = props.gamma - 1.0;
    for (node, x) in mesh.coords().iter().enumerate() {
        let yh = (x[1] - delta) / delta;
        let ux = 1.5 * u_bulk * (1.0 - yh * yh);
        let e = p0 / gamma_m1 + 0.5 * rho0 * ux * ux;
        c.rho[node] = S::from_f64(rho0);
        c.mom[0][node] = S::from_f64(rho0 * ux);
        c.energy[node] = S::from_f64(e);
    }
    FlowState::from_conserved(c, props)
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateDumpHeader {
    pub format: String,
    pub version: u32,
    pub precision: Precision,
    pub num_nodes: usize,
    pub fields: Vec<String>,
}

/// Write the conserved fields to `path`: one JSON header line, then each
/// field as a flat little-endian block in header order.
pub fn dump_state<S: Scalar>(state: &FlowState<S>, path: &Path) -> Result<()> {
    let header = StateDumpHeader {
        format: "sembench-state".into(),
        version: 1,
        precision: S::PRECISION,
        num_nodes: state.num_nodes(),
        fields: ["rho", "mom_x", "mom_y", "mom_z", "energy"]
            .iter()
            .map(|s| s.to_string())
            .collect(),
    };
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let c = &state.conserved;
    for field in [&c.rho, &c.mom[0], &c.mom[1], &c.mom[2], &c.energy] {
        for &v in field.iter() {
            match S::PRECISION {
                Precision::Fp64 => w.write_all(&v.to_f64().to_le_bytes())?,
                Precision::Fp32 => w.write_all(&(v.to_f64() as f32).to_le_bytes())?,
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// A state dump read back from disk, widened to `f64` regardless of the
/// precision it was written at.
#[derive(Debug, Clone)]
pub struct StateDump {
    pub header: StateDumpHeader,
    pub fields: Vec<Vec<f64>>,
}

/// Read a state dump back.
pub fn load_state_dump(path: &Path) -> Result<StateDump> {
    let mut r = BufReader::new(std::fs::File::open(path)?);
    let mut header_line = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        r.read_exact(&mut byte).map_err(|_| Error::FileFormat {
            path: path.display().to_string(),
            detail: "missing header line".into(),
        })?;
        if byte[0] == b'\n' {
            break;
        }
        header_line.push(byte[0]);
    }
    let header: StateDumpHeader = serde_json::from_slice(&header_line)?;
    if header.format != "sembench-state" || header.version != 1 {
        return Err(Error::FileFormat {
            path: path.display().to_string(),
            detail: format!("unsupported format {}/{}", header.format, header.version),
        });
    }
    let mut fields = Vec::with_capacity(header.fields.len());
    for _ in 0..header.fields.len() {
        let mut field = vec![0.0f64; header.num_nodes];
        match header.precision {
            Precision::Fp64 => {
                let mut buf = [0u8; 8];
                for v in field.iter_mut() {
                    r.read_exact(&mut buf).map_err(|_| Error::FileFormat {
                        path: path.display().to_string(),
                        detail: "truncated field block".into(),
                    })?;
                    *v = f64::from_le_bytes(buf);
                }
            }
            Precision::Fp32 => {
                let mut buf = [0u8; 4];
                for v in field.iter_mut() {
                    r.read_exact(&mut buf).map_err(|_| Error::FileFormat {
                        path: path.display().to_string(),
                        detail: "truncated field block".into(),
                    })?;
                    *v = f32::from_le_bytes(buf) as f64;
                }
            }
        }
        fields.push(field);
    }
    if r.read(&mut byte)? != 0 {
        return Err(Error::FileFormat {
            path: path.display().to_string(),
            detail: "trailing bytes after final field".into(),
        });
    }
    Ok(StateDump { header, fields })
}
