//! End-to-end drivers: the iterative coupled scheme and the one-way decoupled scheme.
//!
//! The time step is `node_spacing / speed`, so the vehicle sits on node `k` at step `k`.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::excitation::{
    generate_roughness_with, generate_traffic, RoughnessParams, RoughnessProfile, TrafficLoadMatrix,
    TrafficParams,
};
use crate::integrators::{
    DormandPrince, ForceHistory, LinearSegment, NewmarkParams, NewmarkSolver, NewmarkState, NewmarkStepper,
    RkTolerances, SampledInput, TimeSeriesResult,
};
use crate::model::{assemble_beam, BeamSystem, BridgeSpec};
use crate::scalar::Real;
use crate::vehicle::{interaction_force, states_to_result, ContactState, QuarterCarOde, QuarterCarSpec};

pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 1.5e-12;
pub const DEFAULT_MAX_ITERATIONS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimulationMode {
    #[default]
    Coupled,
    Decoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig<T = f64> {
    pub bridge: BridgeSpec<T>,
    pub vehicle: QuarterCarSpec<T>,
    pub traffic: TrafficParams<T>,
    pub roughness: RoughnessParams<T>,
    /// Compatibility tolerance on the contact displacement (m).
    pub convergence_threshold: T,
    pub max_iterations_per_step: usize,
    pub mode: SimulationMode,
    /// Re-integrate the bridge from t = 0 for every compatibility iteration.
    pub strict_paper_mode: bool,
    /// When false the vehicle never loads the bridge (not even with its weight).
    pub interaction: bool,
    pub rk_tolerances: RkTolerances<T>,
}

impl<T: Real> ScenarioConfig<T> {
    pub fn new(bridge: BridgeSpec<T>, vehicle: QuarterCarSpec<T>) -> Self {
        Self {
            bridge,
            vehicle,
            traffic: TrafficParams::default(),
            roughness: RoughnessParams::default(),
            convergence_threshold: T::lit(DEFAULT_CONVERGENCE_THRESHOLD),
            max_iterations_per_step: DEFAULT_MAX_ITERATIONS,
            mode: SimulationMode::Coupled,
            strict_paper_mode: false,
            interaction: true,
            rk_tolerances: RkTolerances::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.bridge.validate()?;
        self.vehicle.validate()?;
        if !(self.convergence_threshold > T::zero()) {
            return Err(invalid("convergence_threshold", "must be positive"));
        }
        if self.max_iterations_per_step == 0 {
            return Err(invalid("max_iterations_per_step", "must be at least 1"));
        }
        Ok(())
    }

    pub fn time_step(&self) -> T {
        self.bridge.node_spacing / self.vehicle.speed
    }
}

/// Nodal traffic forces mapped onto the free translation DOFs of a beam.
pub struct TrafficForces<'a, T> {
    pub traffic: &'a TrafficLoadMatrix<T>,
    pub system: &'a BeamSystem<T>,
}

impl<T: Real> ForceHistory<T> for TrafficForces<'_, T> {
    fn steps(&self) -> usize {
        self.traffic.steps()
    }

    fn dof_count(&self) -> usize {
        self.system.free_dof_count()
    }

    fn load_into(&self, step: usize, out: &mut [T]) {
        out.fill(T::zero());
        for &(node, f) in self.traffic.row(step) {
            if let Some(d) = self.system.translation_dof(node) {
                out[d] += f;
            }
        }
    }
}

/// A configuration with its bridge matrices and excitation built, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario<T = f64> {
    pub config: ScenarioConfig<T>,
    pub system: BeamSystem<T>,
    pub roughness: RoughnessProfile<T>,
    pub traffic: TrafficLoadMatrix<T>,
    pub time_step: T,
}

impl<T: Real> Scenario<T> {
    pub fn prepare(config: ScenarioConfig<T>) -> Result<Self> {
        config.validate()?;
        let system = assemble_beam(&config.bridge)?;
        let dt = config.time_step();
        let span = config.bridge.span;
        let spacing = span / T::from_usize_lossy(system.element_count());
        let roughness = if config.roughness.coefficient == T::zero() {
            RoughnessProfile::flat(span, spacing)?
        } else {
            generate_roughness_with(span, spacing, &config.roughness)?
        };
        let traffic = generate_traffic(
            span / config.vehicle.speed,
            dt,
            system.node_count(),
            config.traffic.n_vehicles,
            config.traffic.density,
            config.traffic.seed,
        )?;
        Self::from_parts(config, system, roughness, traffic)
    }

    /// Assembles a scenario from externally supplied excitation.
    pub fn from_parts(
        config: ScenarioConfig<T>,
        system: BeamSystem<T>,
        roughness: RoughnessProfile<T>,
        traffic: TrafficLoadMatrix<T>,
    ) -> Result<Self> {
        let nodes = system.node_count();
        if roughness.len() != nodes {
            return Err(VbiError::DimensionMismatch {
                context: "roughness samples vs bridge nodes",
                expected: nodes,
                found: roughness.len(),
            });
        }
        if traffic.steps() != nodes {
            return Err(VbiError::DimensionMismatch {
                context: "traffic rows vs transit steps",
                expected: nodes,
                found: traffic.steps(),
            });
        }
        if traffic.node_count != nodes {
            return Err(VbiError::DimensionMismatch {
                context: "traffic columns vs bridge nodes",
                expected: nodes,
                found: traffic.node_count,
            });
        }
        let time_step = config.time_step();
        Ok(Self {
            config,
            system,
            roughness,
            traffic,
            time_step,
        })
    }

    pub fn steps(&self) -> usize {
        self.system.node_count()
    }

    pub fn forces(&self) -> TrafficForces<'_, T> {
        TrafficForces {
            traffic: &self.traffic,
            system: &self.system,
        }
    }

    pub fn newmark_params(&self) -> NewmarkParams<T> {
        NewmarkParams::average_acceleration(self.time_step)
    }

    fn midspan_dof(&self) -> usize {
        self.system
            .translation_dof(self.system.midspan_node())
            .expect("midspan is an interior node")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutput<T = f64> {
    /// Columns `midspan` and `contact` (deck under the vehicle, zero at the supports).
    pub bridge_result: TimeSeriesResult<T>,
    /// Columns `sprung` and `unsprung`.
    pub vehicle_result: TimeSeriesResult<T>,
    pub contact_trace: Vec<ContactState<T>>,
    /// Bridge re-solves per step (coupled only; zero where the vehicle is on a support).
    pub iteration_counts: Vec<usize>,
    /// Seconds.
    pub wall_time: f64,
}

impl<T: Real> SimulationOutput<T> {
    pub fn midspan_displacement(&self) -> Vec<T> {
        self.bridge_result.displacement.column(0).to_vec()
    }

    pub fn sprung_displacement(&self) -> Vec<T> {
        self.vehicle_result.displacement.column(0).to_vec()
    }
}

pub const BRIDGE_LABELS: [&str; 2] = ["midspan", "contact"];

struct BridgeRecorder<T> {
    result: TimeSeriesResult<T>,
    midspan: usize,
}

impl<T: Real> BridgeRecorder<T> {
    fn new(dt: T, steps: usize, midspan: usize) -> Self {
        let labels = BRIDGE_LABELS.iter().map(|s| s.to_string()).collect();
        Self {
            result: TimeSeriesResult::zeros(dt, labels, steps),
            midspan,
        }
    }

    fn record(&mut self, step: usize, s: &NewmarkState<T>, contact: Option<usize>) {
        let pick = |v: &[T]| [v[self.midspan], contact.map_or(T::zero(), |d| v[d])];
        self.result
            .set_row(step, &pick(&s.displacement), &pick(&s.velocity), &pick(&s.acceleration));
    }
}

/// Runs the configured mode.
pub fn simulate<T: Real>(scenario: &Scenario<T>) -> Result<SimulationOutput<T>> {
    match scenario.config.mode {
        SimulationMode::Coupled => simulate_coupled(scenario),
        SimulationMode::Decoupled => simulate_decoupled(scenario),
    }
}

/// One bridge solve under traffic alone; its deck motion plus roughness drives the vehicle.
pub fn simulate_decoupled<T: Real>(scenario: &Scenario<T>) -> Result<SimulationOutput<T>> {
    let clock = Instant::now();
    let cfg = &scenario.config;
    let sys = &scenario.system;
    let steps = scenario.steps();
    let n = sys.free_dof_count();
    let dt = scenario.time_step;
    let forces = scenario.forces();

    let mut solver = NewmarkSolver::new(sys, scenario.newmark_params())?;
    let mut row = vec![T::zero(); n];
    forces.load_into(0, &mut row);
    let zeros = vec![T::zero(); n];
    let mut state = solver.initial_state(&zeros, &zeros, &row)?;
    let mut next = NewmarkState::zeros(n);
    let mut rec = BridgeRecorder::new(dt, steps, scenario.midspan_dof());

    let mut wv = vec![T::zero(); steps];
    let mut wv_rate = vec![T::zero(); steps];
    for k in 0..steps {
        if k > 0 {
            forces.load_into(k, &mut row);
            solver.step_into(&state, &row, &mut next, k)?;
            std::mem::swap(&mut state, &mut next);
        }
        let contact = sys.translation_dof(k);
        rec.record(k, &state, contact);
        let (r, rdot) = contact.map_or((T::zero(), T::zero()), |d| (state.displacement[d], state.velocity[d]));
        wv[k] = scenario.roughness.elevation[k] + r;
        wv_rate[k] = scenario.roughness.slope[k] * cfg.vehicle.speed + rdot;
    }

    let ode = QuarterCarOde::new(&cfg.vehicle)?;
    let input = SampledInput::new(dt, wv, wv_rate)?;
    let states = crate::integrators::rk_integrate(
        &ode,
        &input,
        [T::zero(); 4],
        cfg.rk_tolerances,
        crate::integrators::GridMode::StopAtGrid,
    )?;
    let contact_trace = states
        .iter()
        .enumerate()
        .map(|(k, y)| interaction_force(&cfg.vehicle, y[1], y[3], input.w[k], input.w_rate[k]))
        .collect();
    let vehicle_result = states_to_result(&ode, &input, &states);
    Ok(SimulationOutput {
        bridge_result: rec.result,
        vehicle_result,
        contact_trace,
        iteration_counts: Vec::new(),
        wall_time: clock.elapsed().as_secs_f64(),
    })
}

/// Bridge stepping that either re-solves only the current step or, in strict
/// mode, re-integrates the whole history for every trial force.
enum BridgeStepper<'a, T: Real> {
    Incremental(NewmarkStepper<'a, T, BeamSystem<T>>),
    Strict {
        solver: NewmarkSolver<'a, T, BeamSystem<T>>,
        initial: NewmarkState<T>,
        previous: NewmarkState<T>,
        current: NewmarkState<T>,
        scratch: [NewmarkState<T>; 2],
        /// Converged vehicle load per step.
        reactions: Vec<Option<(usize, T)>>,
        row: Vec<T>,
    },
}

impl<'a, T: Real> BridgeStepper<'a, T> {
    fn current(&self) -> &NewmarkState<T> {
        match self {
            Self::Incremental(s) => s.current(),
            Self::Strict { current, .. } => current,
        }
    }

    fn advance(&mut self, row: &[T], step: usize) -> Result<()> {
        match self {
            Self::Incremental(s) => s.advance(row).map(|_| ()),
            Self::Strict {
                solver,
                previous,
                current,
                ..
            } => {
                std::mem::swap(previous, current);
                solver.step_into(previous, row, current, step)
            }
        }
    }

    fn resolve(&mut self, row: &[T], step: usize, forces: &TrafficForces<'_, T>) -> Result<()> {
        match self {
            Self::Incremental(s) => s.resolve(row).map(|_| ()),
            Self::Strict {
                solver,
                initial,
                current,
                scratch,
                reactions,
                row: buf,
                ..
            } => {
                let [a, b] = scratch;
                a.clone_from(initial);
                for j in 1..step {
                    forces.load_into(j, buf);
                    if let Some((d, r)) = reactions[j] {
                        buf[d] += r;
                    }
                    solver.step_into(a, buf, b, j)?;
                    std::mem::swap(a, b);
                }
                solver.step_into(a, row, current, step)
            }
        }
    }

    fn commit(&mut self, step: usize, reaction: Option<(usize, T)>) {
        if let Self::Strict { reactions, .. } = self {
            reactions[step] = reaction;
        }
    }
}

/// Iterative coupled scheme: per step, the vehicle is integrated against the current
/// deck motion, its contact force is applied to the deck and the step is re-solved
/// until the contact displacement stops changing.
pub fn simulate_coupled<T: Real>(scenario: &Scenario<T>) -> Result<SimulationOutput<T>> {
    let clock = Instant::now();
    let cfg = &scenario.config;
    let sys = &scenario.system;
    let steps = scenario.steps();
    let n = sys.free_dof_count();
    let dt = scenario.time_step;
    let forces = scenario.forces();
    let spec = &cfg.vehicle;
    let speed = spec.speed;
    let elevation = &scenario.roughness.elevation;
    let slope = &scenario.roughness.slope;

    let solver = NewmarkSolver::new(sys, scenario.newmark_params())?;
    let mut base = vec![T::zero(); n];
    forces.load_into(0, &mut base);
    let zeros = vec![T::zero(); n];
    // The vehicle starts on a support, so step 0 carries traffic only.
    let initial = solver.initial_state(&zeros, &zeros, &base)?;
    let mut bridge = if cfg.strict_paper_mode {
        BridgeStepper::Strict {
            solver,
            previous: initial.clone(),
            current: initial.clone(),
            scratch: [initial.clone(), initial.clone()],
            initial,
            reactions: vec![None; steps],
            row: vec![T::zero(); n],
        }
    } else {
        BridgeStepper::Incremental(NewmarkStepper::new(solver, initial))
    };

    let ode = QuarterCarOde::new(spec)?;
    let dp = DormandPrince::new(cfg.rk_tolerances)?;
    let mut rec = BridgeRecorder::new(dt, steps, scenario.midspan_dof());
    let mut states = Vec::with_capacity(steps);
    let mut wv = Vec::with_capacity(steps);
    let mut wv_rate = Vec::with_capacity(steps);
    let mut contact_trace = Vec::with_capacity(steps);
    let mut iteration_counts = vec![0; steps];

    rec.record(0, bridge.current(), None);
    let y0 = [T::zero(); 4];
    states.push(y0);
    wv.push(elevation[0]);
    wv_rate.push(slope[0] * speed);
    contact_trace.push(interaction_force(spec, y0[1], y0[3], wv[0], wv_rate[0]));

    let mut y_prev = y0;
    let mut h_prev = T::zero();
    let mut row = vec![T::zero(); n];
    for k in 1..steps {
        let contact = sys.translation_dof(k);
        forces.load_into(k, &mut base);
        // Warm start with the previous step's reaction.
        let predicted = if cfg.interaction {
            contact_trace[k - 1].total_reaction
        } else {
            T::zero()
        };
        row.copy_from_slice(&base);
        if let Some(d) = contact {
            row[d] += predicted;
        }
        bridge.advance(&row, k)?;

        let mut r = contact.map_or(T::zero(), |d| bridge.current().displacement[d]);
        let mut iterations = 0;
        let (y, h, state, applied) = loop {
            let rdot = contact.map_or(T::zero(), |d| bridge.current().velocity[d]);
            let w = elevation[k] + r;
            let w_rate = slope[k] * speed + rdot;
            let seg = LinearSegment {
                t0: dt * T::from_usize_lossy(k - 1),
                t1: dt * T::from_usize_lossy(k),
                w: (wv[k - 1], w),
                w_rate: (wv_rate[k - 1], w_rate),
            };
            let (y, h) = dp.advance(&ode, &seg, seg.t0, seg.t1, y_prev, h_prev)?;
            let state = interaction_force(spec, y[1], y[3], w, w_rate);
            let Some(d) = contact else {
                break (y, h, state, None);
            };
            let reaction = if cfg.interaction { state.total_reaction } else { T::zero() };
            row.copy_from_slice(&base);
            row[d] += reaction;
            bridge.resolve(&row, k, &forces)?;
            iterations += 1;
            let r_new = bridge.current().displacement[d];
            let residual = (r - r_new).abs();
            if residual < cfg.convergence_threshold {
                break (y, h, state, Some((d, reaction)));
            }
            if iterations >= cfg.max_iterations_per_step {
                return Err(VbiError::CompatibilityNotConverged {
                    step: k,
                    iterations,
                    residual: residual.as_f64(),
                });
            }
            r = r_new;
        };
        bridge.commit(k, applied);
        iteration_counts[k] = iterations;
        rec.record(k, bridge.current(), contact);
        y_prev = y;
        h_prev = h;
        states.push(y);
        wv.push(state.wv);
        wv_rate.push(state.wv_rate);
        contact_trace.push(state);
    }

    let input = SampledInput::new(dt, wv, wv_rate)?;
    let vehicle_result = states_to_result(&ode, &input, &states);
    Ok(SimulationOutput {
        bridge_result: rec.result,
        vehicle_result,
        contact_trace,
        iteration_counts,
        wall_time: clock.elapsed().as_secs_f64(),
    })
}
