//! Classical RK4 time integration of the semidiscrete flow equations,
//! with per-phase wall-clock accounting.
//!
//! The integrator advances `M du/dt = -R_conv - R_diff + F` where `M` is
//! the lumped mass, the residuals come from [`crate::kernels`], and `F`
//! collects body force and volumetric energy source. Construction
//! (mesh, basis, gather table, Jacobians, initial state) is separated
//! from execution so reported runtimes cover only the step loop.

use std::ops::Range;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::basis::QuadratureSet;
use crate::error::{Error, Result};
use crate::kernels::{
    convection_residual, diffusion_residual, lumped_mass, scatter_accumulate, ContribBuffer,
    EquationMask, ExecutionPlan, Fusion, KernelConfig, KernelContext, ResidualSet};
use crate::mesh::{
    build_box_mesh, build_gather_table, compute_jacobians, partition_mesh, HexMesh, MeshPartition};
use crate::precision::{Precision, Scalar};
use crate::state::{
    channel_body_force, init_channel_flow, init_tgv, mach_scaled_pressure, Conserved, FlowState,
    FluidProperties};

/// Number of residual evaluations per time step (classical four-stage
/// Runge-Kutta).
pub const RK_STEPS: usize = 4;

/// Which flow problem a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Taylor-Green vortex on a fully periodic box.
    Tgv,
    /// Body-force-driven laminar channel between two walls.
    Cf,
}

impl CaseKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseKind::Tgv => "tgv",
            CaseKind::Cf => "cf",
        }
    }
}

impl std::fmt::Display for CaseKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for CaseKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tgv" => Ok(CaseKind::Tgv),
            "cf" => Ok(CaseKind::Cf),
            other => Err(Error::Config(format!(
                "unknown case {other:?} (expected tgv or cf)"
            ))),
        }
    }
}

/// Full description of one simulation run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub case: CaseKind,
    pub order: usize,
    pub elems: [usize; 3],
    /// Domain extents; `None` picks the case default (a `2 pi` cube for
    /// the vortex, a `4 x 2 x 2` half-height-one duct for the channel).
    pub extents: Option<[f64; 3]>,
    pub dt: f64,
    pub num_steps: usize,
    /// Untimed steps executed before the timers start.
    pub warmup_steps: usize,
    pub kernel: KernelConfig,
    pub partitions: usize,
    /// Worker threads; `None` defers to `SEMBENCH_WORKERS` or the
    /// machine (see [`crate::resolve_workers`]).
    pub workers: Option<usize>,
    pub chunk_elements: usize,
    pub check_finite: bool,
    /// Reserved for randomized diagnostics; the analytic initial states
    /// consume no randomness, so runs with equal configs match exactly.
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            case: CaseKind::Tgv,
            order: 3,
            elems: [4, 4, 4],
            extents: None,
            dt: 2.0e-4,
            num_steps: 20,
            warmup_steps: 1,
            kernel: KernelConfig::default(),
            partitions: 1,
            workers: None,
            chunk_elements: 8,
            check_finite: cfg!(debug_assertions),
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::Config(format!(
                "time step must be positive and finite, got {}",
                self.dt
            )));
        }
        if self.num_steps == 0 {
            return Err(Error::Config("number of steps must be at least 1".into()));
        }
        if self.partitions == 0 {
            return Err(Error::Config("partition count must be at least 1".into()));
        }
        Ok(())
    }

    pub fn domain_extents(&self) -> [f64; 3] {
        self.extents.unwrap_or(match self.case {
            CaseKind::Tgv => {
                let l = 2.0 * std::f64::consts::PI;
                [l, l, l]
            }
            CaseKind::Cf => [4.0, 2.0, 2.0],
        })
    }

    pub fn periodicity(&self) -> [bool; 3] {
        match self.case {
            CaseKind::Tgv => [true, true, true],
            CaseKind::Cf => [true, false, true],
        }
    }

    /// Gas and transport properties for the case at the default desk
    /// scales: unit reference velocity and density, Mach 0.1 against the
    /// derived background pressure, and a viscosity of `6.25e-4`
    /// matching a Reynolds number of 1600 on the unit reference length.
    pub fn fluid_properties(&self) -> Result<FluidProperties> {
        let mu = 6.25e-4;
        let mut props = FluidProperties::air(mu);
        if self.case == CaseKind::Cf {
            let delta = self.domain_extents()[1] / 2.0;
            props.body_force = channel_body_force(mu, 1.0, delta);
        }
        Ok(props)
    }
}

/// Volume-integrated invariants of a flow state: `sum M rho`,
/// `sum M E`, and the largest nodal speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub total_mass: f64,
    pub total_energy: f64,
    pub max_speed: f64,
}

/// Wall-clock accounting for one run. The phase buckets cover the work
/// inside the timed step loop; their sum never exceeds `runtime_ns`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunStats {
    pub nodes: usize,
    pub time_steps: usize,
    pub rk_steps: usize,
    pub rhs_evals: u64,
    pub runtime_ns: u64,
    pub t_convection_ns: u64,
    pub t_diffusion_ns: u64,
    pub t_scatter_ns: u64,
    pub t_update_ns: u64,
    pub initial_diagnostics: Diagnostics,
    pub final_diagnostics: Diagnostics,
}

impl RunStats {
    /// Sum of the per-phase buckets.
    pub fn component_ns(&self) -> u64 {
        self.t_convection_ns + self.t_diffusion_ns + self.t_scatter_ns + self.t_update_ns
    }
}

/// Anything RK4 can advance: assignment and `self += a x`.
///
/// Implemented for the conserved flow fields and for plain `Vec<f64>`,
/// so the integrator's order can be checked on scalar model problems
/// through exactly the code path the flow solver uses.
pub trait StateVector: Clone {
    fn assign(&mut self, src: &Self);
    fn axpy(&mut self, a: f64, x: &Self);
}

impl StateVector for Vec<f64> {
    fn assign(&mut self, src: &Self) {
        self.copy_from_slice(src);
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        for (d, s) in self.iter_mut().zip(x) {
            *d += a * s;
        }
    }
}

impl<S: Scalar> StateVector for Conserved<S> {
    fn assign(&mut self, src: &Self) {
        Conserved::assign(self, src);
    }

    fn axpy(&mut self, a: f64, x: &Self) {
        Conserved::axpy(self, S::from_f64(a), x);
    }
}

/// Scratch vectors for [`rk4_step`]: one stage state, one stage
/// derivative, one weighted accumulator.
#[derive(Debug, Clone)]
pub struct Rk4Work<V> {
    k: V,
    acc: V,
    stage: V,
}

impl<V: Clone> Rk4Work<V> {
    pub fn like(v: &V) -> Self {
        Self { k: v.clone(), acc: v.clone(), stage: v.clone() }
    }
}

/// Advance `y` by one classical four-stage Runge-Kutta step of size
/// `dt`, calling `rhs(state, out_derivative)` exactly four times.
///
/// Returns the nanoseconds spent in the stage combinations outside the
/// `rhs` calls, so a caller keeping phase timers can bill that work to
/// its update bucket.
pub fn rk4_step<V, F>(y: &mut V, dt: f64, work: &mut Rk4Work<V>, mut rhs: F) -> Result<u128>
where
    V: StateVector,
    F: FnMut(&V, &mut V) -> Result<()>,
{
    let mut outside = 0u128;
    rhs(y, &mut work.k)?;
    let t = Instant::now();
    work.acc.assign(&work.k);
    work.stage.assign(y);
    work.stage.axpy(0.5 * dt, &work.k);
    outside += t.elapsed().as_nanos();

    rhs(&work.stage, &mut work.k)?;
    let t = Instant::now();
    work.acc.axpy(2.0, &work.k);
    work.stage.assign(y);
    work.stage.axpy(0.5 * dt, &work.k);
    outside += t.elapsed().as_nanos();

    rhs(&work.stage, &mut work.k)?;
    let t = Instant::now();
    work.acc.axpy(2.0, &work.k);
    work.stage.assign(y);
    work.stage.axpy(dt, &work.k);
    outside += t.elapsed().as_nanos();

    rhs(&work.stage, &mut work.k)?;
    let t = Instant::now();
    work.acc.axpy(1.0, &work.k);
    y.axpy(dt / 6.0, &work.acc);
    outside += t.elapsed().as_nanos();
    Ok(outside)
}

#[derive(Debug, Default, Clone, Copy)]
struct PhaseTimers {
    convection_ns: u128,
    diffusion_ns: u128,
    scatter_ns: u128,
    update_ns: u128,
}

/// Everything the residual evaluation needs, borrowed disjointly from
/// the simulation so the integrator can hold the state at the same time.
struct RhsEngine<'a, S: Scalar> {
    ctx: &'a KernelContext<S>,
    props: &'a FluidProperties,
    cfg: KernelConfig,
    plan: &'a ExecutionPlan,
    scratch: &'a mut FlowState<S>,
    contrib: &'a mut ContribBuffer<S>,
    residual: &'a mut ResidualSet<S>,
    inv_mass: &'a [S],
    body_force: [S; 3],
    energy_source: S,
    has_forcing: bool,
    wall_nodes: &'a [u32],
    timers: &'a mut PhaseTimers,
    rhs_evals: &'a mut u64,
}

impl<S: Scalar> RhsEngine<'_, S> {
    /// `out = (-R_conv - R_diff + F) / M`, with wall momentum rates
    /// pinned to zero for the channel case.
    fn eval(&mut self, y: &Conserved<S>, out: &mut Conserved<S>, step: usize) -> Result<()> {
        let t = Instant::now();
        self.scratch.conserved.assign(y);
        self.scratch
            .update_primitives(self.props)
            .map_err(|e| Error::Unstable { step, detail: e.to_string() })?;
        self.residual.fill_zero();
        self.timers.update_ns += t.elapsed().as_nanos();

        let passes: &[EquationMask] = match self.cfg.fusion {
            Fusion::Unified => &[EquationMask::ALL],
            Fusion::Split => &EquationMask::SPLIT_PASSES,
        };
        for &mask in passes {
            let t = Instant::now();
            self.contrib.fill_components(mask);
            convection_residual(
                self.ctx,
                self.scratch,
                self.cfg.access,
                mask,
                self.plan,
                self.contrib,
            )?;
            self.timers.convection_ns += t.elapsed().as_nanos();

            let t = Instant::now();
            scatter_accumulate(
                self.ctx,
                self.contrib,
                self.cfg.scatter,
                mask,
                self.plan,
                self.residual,
            );
            self.timers.scatter_ns += t.elapsed().as_nanos();

            let viscous = EquationMask {
                mass: false,
                momentum: mask.momentum,
                energy: mask.energy,
            };
            if viscous.momentum || viscous.energy {
                let t = Instant::now();
                self.contrib.fill_components(viscous);
                diffusion_residual(
                    self.ctx,
                    self.scratch,
                    self.cfg.access,
                    viscous,
                    self.plan,
                    self.contrib,
                )?;
                self.timers.diffusion_ns += t.elapsed().as_nanos();

                let t = Instant::now();
                scatter_accumulate(
                    self.ctx,
                    self.contrib,
                    self.cfg.scatter,
                    viscous,
                    self.plan,
                    self.residual,
                );
                self.timers.scatter_ns += t.elapsed().as_nanos();
            }
        }

        let t = Instant::now();
        let n = self.ctx.num_nodes();
        for node in 0..n {
            let im = self.inv_mass[node];
            out.rho[node] = -self.residual.mass[node] * im;
            for d in 0..3 {
                out.mom[d][node] = -self.residual.mom[d][node] * im;
            }
            out.energy[node] = -self.residual.energy[node] * im;
        }
        if self.has_forcing {
            for node in 0..n {
                let mut work = S::zero();
                for d in 0..3 {
                    out.mom[d][node] += self.body_force[d];
                    work += self.body_force[d] * self.scratch.vel[d][node];
                }
                out.energy[node] += self.energy_source + work;
            }
        }
        for &w in self.wall_nodes {
            let w = w as usize;
            for d in 0..3 {
                out.mom[d][w] = S::zero();
            }
        }
        self.timers.update_ns += t.elapsed().as_nanos();
        *self.rhs_evals += 1;
        Ok(())
    }
}

/// A configured run: mesh, basis, kernel context, and evolving state.
///
/// [`Simulation::prepare`] does all construction; [`Simulation::execute`]
/// runs (and times) the step loop. `execute` continues from the current
/// state, so benchmark repetitions call [`Simulation::reset`] in between.
pub struct Simulation<S: Scalar> {
    config: SimConfig,
    mesh: HexMesh,
    partition: MeshPartition,
    props: FluidProperties,
    ctx: KernelContext<S>,
    lumped_f64: Vec<f64>,
    plan: ExecutionPlan,
    pool: Option<rayon::ThreadPool>,
    state: FlowState<S>,
    scratch: FlowState<S>,
    contrib: ContribBuffer<S>,
    residual: ResidualSet<S>,
    rk_work: Rk4Work<Conserved<S>>,
    wall_nodes: Vec<u32>,
    body_force: [S; 3],
    energy_source: S,
    has_forcing: bool,
    inv_mass: Vec<S>,
    timers: PhaseTimers,
    rhs_evals: u64,
}

impl<S: Scalar> Simulation<S> {
    pub fn prepare(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        if S::PRECISION != config.kernel.precision {
            return Err(Error::Config(format!(
                "scalar type is {} but the kernel config asks for {}",
                S::PRECISION,
                config.kernel.precision
            )));
        }
        let props = config.fluid_properties()?;
        let basis = QuadratureSet::new(config.order)?;
        let mesh = build_box_mesh(
            config.order,
            config.elems,
            config.domain_extents(),
            config.periodicity(),
        )?;
        let partition = partition_mesh(&mesh, config.partitions)?;
        let gather = build_gather_table(&mesh)?;
        let jac = compute_jacobians(&mesh, &basis)?;
        let lumped_f64 = lumped_mass(&mesh, &basis, &jac);
        let ctx = KernelContext::<S>::new(&mesh, &basis, &jac, &gather, &props, &lumped_f64);

        let workers = crate::resolve_workers(config.workers)?;
        let plan = ExecutionPlan {
            workers,
            chunk_elements: config.chunk_elements,
            check_finite: config.check_finite,
            partition_ranges: if config.partitions > 1 {
                Some(partition.ranges().to_vec())
            } else {
                None
            },
        };
        let pool = if workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?,
            )
        } else {
            None
        };

        let state = initial_state::<S>(config.case, &mesh, &props)?;
        let scratch = state.clone();
        let contrib = ContribBuffer::<S>::new(mesh.num_elements(), mesh.nodes_per_element());
        let residual = ResidualSet::<S>::new(lumped_f64.iter().map(|&m| S::from_f64(m)).collect());
        let rk_work = Rk4Work::like(&state.conserved);
        let wall_nodes = match config.case {
            CaseKind::Tgv => Vec::new(),
            CaseKind::Cf => mesh.boundary_plane_nodes(1)?,
        };
        let body_force = [
            S::from_f64(props.body_force[0]),
            S::from_f64(props.body_force[1]),
            S::from_f64(props.body_force[2]),
        ];
        let energy_source = S::from_f64(props.energy_source);
        let has_forcing =
            props.body_force.iter().any(|&f| f != 0.0) || props.energy_source != 0.0;
        let inv_mass = lumped_f64.iter().map(|&m| S::from_f64(1.0 / m)).collect();

        Ok(Self {
            config: config.clone(),
            mesh,
            partition,
            props,
            ctx,
            lumped_f64,
            plan,
            pool,
            state,
            scratch,
            contrib,
            residual,
            rk_work,
            wall_nodes,
            body_force,
            energy_source,
            has_forcing,
            inv_mass,
            timers: PhaseTimers::default(),
            rhs_evals: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn mesh(&self) -> &HexMesh {
        &self.mesh
    }

    pub fn partition(&self) -> &MeshPartition {
        &self.partition
    }

    pub fn state(&self) -> &FlowState<S> {
        &self.state
    }

    pub fn num_nodes(&self) -> usize {
        self.mesh.num_nodes()
    }

    /// Reinitialize the evolving state and zero all counters, leaving
    /// mesh and kernel structures in place.
    pub fn reset(&mut self) -> Result<()> {
        self.state = initial_state::<S>(self.config.case, &self.mesh, &self.props)?;
        self.timers = PhaseTimers::default();
        self.rhs_evals = 0;
        Ok(())
    }

    pub fn diagnostics(&self) -> Diagnostics {
        let mut mass = 0.0f64;
        let mut energy = 0.0f64;
        let mut max_speed = 0.0f64;
        for node in 0..self.lumped_f64.len() {
            let m = self.lumped_f64[node];
            mass += m * self.state.conserved.rho[node].to_f64();
            energy += m * self.state.conserved.energy[node].to_f64();
            let u = [
                self.state.vel[0][node].to_f64(),
                self.state.vel[1][node].to_f64(),
                self.state.vel[2][node].to_f64(),
            ];
            let speed = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
            if speed > max_speed {
                max_speed = speed;
            }
        }
        Diagnostics { total_mass: mass, total_energy: energy, max_speed }
    }

    fn advance(&mut self, step: usize) -> Result<()> {
        let dt = self.config.dt;
        let Self {
            ctx,
            props,
            config,
            plan,
            state,
            scratch,
            contrib,
            residual,
            rk_work,
            wall_nodes,
            body_force,
            energy_source,
            has_forcing,
            inv_mass,
            timers,
            rhs_evals,
            ..
        } = self;
        let mut engine = RhsEngine {
            ctx,
            props,
            cfg: config.kernel.clone(),
            plan,
            scratch,
            contrib,
            residual,
            inv_mass,
            body_force: *body_force,
            energy_source: *energy_source,
            has_forcing: *has_forcing,
            wall_nodes,
            timers,
            rhs_evals,
        };
        let outside = rk4_step(&mut state.conserved, dt, rk_work, |y, out| {
            engine.eval(y, out, step)
        })?;
        timers.update_ns += outside;

        let t = Instant::now();
        state
            .update_primitives(props)
            .map_err(|e| Error::Unstable { step, detail: e.to_string() })?;
        timers.update_ns += t.elapsed().as_nanos();
        Ok(())
    }

    fn run_loop(&mut self, warmup: usize, steps: usize) -> Result<(u128, Diagnostics)> {
        for s in 0..warmup {
            self.advance(s)?;
        }
        self.timers = PhaseTimers::default();
        self.rhs_evals = 0;
        let t0 = Instant::now();
        for s in 0..steps {
            self.advance(warmup + s)?;
        }
        let runtime = t0.elapsed().as_nanos();
        Ok((runtime, self.diagnostics()))
    }

    /// Execute `steps` timed steps after `warmup` untimed ones, timing
    /// only the step loop. Exposed with an explicit count so tests can
    /// verify that an empty loop reports a near-zero runtime;
    /// [`Simulation::execute`] applies the configured counts.
    pub fn execute_steps(&mut self, warmup: usize, steps: usize) -> Result<RunStats> {
        let initial = self.diagnostics();
        let pool = self.pool.take();
        let r = match &pool {
            Some(p) => p.install(|| self.run_loop(warmup, steps)),
            None => self.run_loop(warmup, steps),
        };
        self.pool = pool;
        let (runtime, final_diag) = r?;
        let ns = |x: u128| u64::try_from(x).unwrap_or(u64::MAX);
        Ok(RunStats {
            nodes: self.mesh.num_nodes(),
            time_steps: steps,
            rk_steps: RK_STEPS,
            rhs_evals: self.rhs_evals,
            runtime_ns: ns(runtime),
            t_convection_ns: ns(self.timers.convection_ns),
            t_diffusion_ns: ns(self.timers.diffusion_ns),
            t_scatter_ns: ns(self.timers.scatter_ns),
            t_update_ns: ns(self.timers.update_ns),
            initial_diagnostics: initial,
            final_diagnostics: final_diag,
        })
    }

    pub fn execute(&mut self) -> Result<RunStats> {
        self.execute_steps(self.config.warmup_steps, self.config.num_steps)
    }
}

fn initial_state<S: Scalar>(
    case: CaseKind,
    mesh: &HexMesh,
    props: &FluidProperties,
) -> Result<FlowState<S>> {
    let rho0 = 1.0;
    let v0 = 1.0;
    let mach = 0.1;
    let p0 = mach_scaled_pressure(props, rho0, v0, mach);
    match case {
        CaseKind::Tgv => init_tgv::<S>(mesh, props, v0, rho0, p0),
        CaseKind::Cf => init_channel_flow::<S>(mesh, props, v0, rho0, p0),
    }
}

/// Prepare and execute one run as described by `config`.
pub fn run_simulation(config: &SimConfig) -> Result<RunStats> {
    match config.kernel.precision {
        Precision::Fp64 => Simulation::<f64>::prepare(config)?.execute(),
        Precision::Fp32 => Simulation::<f32>::prepare(config)?.execute(),
    }
}

/// [`run_simulation`] plus optional mesh and final-state dumps, for the
/// command-line front end.
pub fn run_with_dumps(
    config: &SimConfig,
    mesh_path: Option<&Path>,
    state_path: Option<&Path>,
) -> Result<RunStats> {
    match config.kernel.precision {
        Precision::Fp64 => {
            let mut sim = Simulation::<f64>::prepare(config)?;
            if let Some(p) = mesh_path {
                crate::mesh::dump_mesh(sim.mesh(), p)?;
            }
            let stats = sim.execute()?;
            if let Some(p) = state_path {
                crate::state::dump_state(sim.state(), p)?;
            }
            Ok(stats)
        }
        Precision::Fp32 => {
            let mut sim = Simulation::<f32>::prepare(config)?;
            if let Some(p) = mesh_path {
                crate::mesh::dump_mesh(sim.mesh(), p)?;
            }
            let stats = sim.execute()?;
            if let Some(p) = state_path {
                crate::state::dump_state(sim.state(), p)?;
            }
            Ok(stats)
        }
    }
}

/// Element ranges of a partitioning, for callers that build plans
/// directly.
pub fn partition_element_ranges(partition: &MeshPartition) -> Vec<Range<usize>> {
    partition.ranges().to_vec()
}
