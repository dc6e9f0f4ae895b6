use serde::{Deserialize, Serialize};

use super::TimeSeriesResult;
use crate::error::{invalid, Result, VbiError};
use crate::linalg::{BandCholesky, SymBand};
use crate::model::LinearStructure;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewmarkParams<T = f64> {
    pub beta: T,
    pub gamma: T,
    pub time_step: T,
}

impl<T: Real> NewmarkParams<T> {
    /// Constant average acceleration (β = 1/4, γ = 1/2).
    pub fn average_acceleration(time_step: T) -> Self {
        Self {
            beta: T::lit(0.25),
            gamma: T::lit(0.5),
            time_step,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.time_step > T::zero()) {
            return Err(invalid("time_step", "must be positive"));
        }
        if !(self.beta > T::zero()) {
            return Err(invalid("beta", "must be positive"));
        }
        if !(self.gamma >= T::zero()) {
            return Err(invalid("gamma", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewmarkState<T = f64> {
    pub displacement: Vec<T>,
    pub velocity: Vec<T>,
    pub acceleration: Vec<T>,
}

impl<T: Real> NewmarkState<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            displacement: vec![T::zero(); n],
            velocity: vec![T::zero(); n],
            acceleration: vec![T::zero(); n],
        }
    }

    fn is_finite(&self) -> bool {
        self.displacement
            .iter()
            .chain(&self.velocity)
            .chain(&self.acceleration)
            .all(|v| v.is_finite())
    }
}

/// Newmark-β with the effective stiffness factorized once at construction.
pub struct NewmarkSolver<'a, T: Real, S: LinearStructure<T>> {
    system: &'a S,
    params: NewmarkParams<T>,
    // a0..a7 in the usual notation
    c: [T; 8],
    effective: BandCholesky<T>,
    scratch_m: Vec<T>,
    scratch_c: Vec<T>,
    tmp: Vec<T>,
}

impl<'a, T: Real, S: LinearStructure<T>> NewmarkSolver<'a, T, S> {
    pub fn new(system: &'a S, params: NewmarkParams<T>) -> Result<Self> {
        params.validate()?;
        let n = system.dof_count();
        for (name, m) in [("mass", system.mass()), ("damping", system.damping())] {
            if m.dim() != n {
                return Err(VbiError::DimensionMismatch {
                    context: name,
                    expected: n,
                    found: m.dim(),
                });
            }
        }
        let (beta, gamma, dt) = (params.beta, params.gamma, params.time_step);
        let one = T::one();
        let two = T::lit(2.0);
        let c = [
            one / (beta * dt * dt),
            gamma / (beta * dt),
            one / (beta * dt),
            one / (two * beta) - one,
            gamma / beta - one,
            dt / two * (gamma / beta - two),
            dt * (one - gamma),
            gamma * dt,
        ];
        let k_eff: SymBand<T> = system
            .stiffness()
            .linear_combination(one, system.mass(), c[0])?
            .linear_combination(one, system.damping(), c[1])?;
        let effective = k_eff.cholesky()?;
        Ok(Self {
            system,
            params,
            c,
            effective,
            scratch_m: vec![T::zero(); n],
            scratch_c: vec![T::zero(); n],
            tmp: vec![T::zero(); n],
        })
    }

    pub fn params(&self) -> &NewmarkParams<T> {
        &self.params
    }

    pub fn dof_count(&self) -> usize {
        self.system.dof_count()
    }

    /// State at t = 0 with acceleration from equilibrium `M a = f − C v − K u`.
    pub fn initial_state(&self, u0: &[T], v0: &[T], force: &[T]) -> Result<NewmarkState<T>> {
        let n = self.dof_count();
        for (ctx, len) in [("initial displacement", u0.len()), ("initial velocity", v0.len()), ("force row", force.len())] {
            if len != n {
                return Err(VbiError::DimensionMismatch {
                    context: ctx,
                    expected: n,
                    found: len,
                });
            }
        }
        let ku = self.system.stiffness().mul_vec(u0);
        let cv = self.system.damping().mul_vec(v0);
        let mut rhs: Vec<T> = (0..n).map(|i| force[i] - ku[i] - cv[i]).collect();
        if rhs.iter().any(|v| !v.is_zero()) {
            self.system.mass().cholesky()?.solve_in_place(&mut rhs);
        }
        Ok(NewmarkState {
            displacement: u0.to_vec(),
            velocity: v0.to_vec(),
            acceleration: rhs,
        })
    }

    /// Advances `prev` by one step under `force` (the load at the end of the step).
    pub fn step_into(
        &mut self,
        prev: &NewmarkState<T>,
        force: &[T],
        next: &mut NewmarkState<T>,
        step_index: usize,
    ) -> Result<()> {
        let n = self.dof_count();
        if force.len() != n {
            return Err(VbiError::DimensionMismatch {
                context: "force row",
                expected: n,
                found: force.len(),
            });
        }
        let c = &self.c;
        let (u, v, a) = (&prev.displacement, &prev.velocity, &prev.acceleration);
        for i in 0..n {
            self.scratch_m[i] = c[0] * u[i] + c[2] * v[i] + c[3] * a[i];
            self.scratch_c[i] = c[1] * u[i] + c[4] * v[i] + c[5] * a[i];
        }
        next.displacement.resize(n, T::zero());
        next.velocity.resize(n, T::zero());
        next.acceleration.resize(n, T::zero());

        self.system.mass().mul_vec_into(&self.scratch_m, &mut next.displacement);
        self.system.damping().mul_vec_into(&self.scratch_c, &mut self.tmp);
        for i in 0..n {
            next.displacement[i] += self.tmp[i] + force[i];
        }
        self.effective.solve_in_place(&mut next.displacement);
        for i in 0..n {
            let acc = c[0] * (next.displacement[i] - u[i]) - c[2] * v[i] - c[3] * a[i];
            next.acceleration[i] = acc;
            next.velocity[i] = v[i] + c[6] * a[i] + c[7] * acc;
        }
        if !next.is_finite() {
            return Err(VbiError::Diverged { step: step_index });
        }
        Ok(())
    }

    pub fn step(&mut self, prev: &NewmarkState<T>, force: &[T], step_index: usize) -> Result<NewmarkState<T>> {
        let mut next = NewmarkState::zeros(self.dof_count());
        self.step_into(prev, force, &mut next, step_index)?;
        Ok(next)
    }
}

/// Stateful wrapper that keeps the last two states, so the current step can be
/// recomputed under a modified force row without touching earlier history.
pub struct NewmarkStepper<'a, T: Real, S: LinearStructure<T>> {
    solver: NewmarkSolver<'a, T, S>,
    previous: Option<NewmarkState<T>>,
    current: NewmarkState<T>,
    step: usize,
}

impl<'a, T: Real, S: LinearStructure<T>> NewmarkStepper<'a, T, S> {
    pub fn new(solver: NewmarkSolver<'a, T, S>, initial: NewmarkState<T>) -> Self {
        Self {
            solver,
            previous: None,
            current: initial,
            step: 0,
        }
    }

    pub fn current(&self) -> &NewmarkState<T> {
        &self.current
    }

    pub fn step_index(&self) -> usize {
        self.step
    }

    pub fn solver_mut(&mut self) -> &mut NewmarkSolver<'a, T, S> {
        &mut self.solver
    }

    pub fn advance(&mut self, force: &[T]) -> Result<&NewmarkState<T>> {
        let mut next = match self.previous.take() {
            Some(buf) => buf,
            None => NewmarkState::zeros(self.solver.dof_count()),
        };
        self.solver
            .step_into(&self.current, force, &mut next, self.step + 1)?;
        self.previous = Some(std::mem::replace(&mut self.current, next));
        self.step += 1;
        Ok(&self.current)
    }

    /// Recomputes the current step from the stored previous state.
    pub fn resolve(&mut self, force: &[T]) -> Result<&NewmarkState<T>> {
        let prev = self.previous.as_ref().ok_or(VbiError::NoPriorStep)?;
        self.solver
            .step_into(prev, force, &mut self.current, self.step)?;
        Ok(&self.current)
    }

    /// Replaces the current state, used when the history is re-integrated externally.
    pub fn overwrite_current(&mut self, state: NewmarkState<T>) {
        self.current = state;
    }
}

/// Force rows in free-DOF space, one per time step.
pub trait ForceHistory<T: Real> {
    fn steps(&self) -> usize;
    fn dof_count(&self) -> usize;
    /// Writes row `step` into `out` (overwriting it).
    fn load_into(&self, step: usize, out: &mut [T]);
}

/// Explicit `steps × dofs` force history.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseForceHistory<T> {
    pub rows: Vec<Vec<T>>,
}

impl<T: Real> ForceHistory<T> for DenseForceHistory<T> {
    fn steps(&self) -> usize {
        self.rows.len()
    }
    fn dof_count(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
    fn load_into(&self, step: usize, out: &mut [T]) {
        out.copy_from_slice(&self.rows[step]);
    }
}

/// Integrates the whole load history and records the DOFs listed in `record`.
///
/// Row 0 of the history is the load at t = 0; the result has one row per load row.
pub fn newmark_solve<T: Real, S: LinearStructure<T>, F: ForceHistory<T> + ?Sized>(
    system: &S,
    load: &F,
    params: NewmarkParams<T>,
    initial: Option<(&[T], &[T])>,
    record: &[usize],
) -> Result<TimeSeriesResult<T>> {
    let n = system.dof_count();
    if load.dof_count() != n {
        return Err(VbiError::DimensionMismatch {
            context: "force history columns",
            expected: n,
            found: load.dof_count(),
        });
    }
    if let Some(&bad) = record.iter().find(|&&d| d >= n) {
        return Err(invalid("record", format!("DOF {bad} out of range ({n} DOFs)")));
    }
    let steps = load.steps();
    let labels = record.iter().map(|d| format!("dof{d}")).collect();
    let mut out = TimeSeriesResult::zeros(params.time_step, labels, steps);
    if steps == 0 {
        return Ok(out);
    }
    let mut solver = NewmarkSolver::new(system, params)?;
    let zeros = vec![T::zero(); n];
    let (u0, v0) = initial.unwrap_or((&zeros, &zeros));
    let mut force = vec![T::zero(); n];
    load.load_into(0, &mut force);
    let mut state = solver.initial_state(u0, v0, &force)?;
    let mut next = NewmarkState::zeros(n);
    let mut row = RowPicker::new(record);
    row.write(&mut out, 0, &state);
    for s in 1..steps {
        load.load_into(s, &mut force);
        solver.step_into(&state, &force, &mut next, s)?;
        std::mem::swap(&mut state, &mut next);
        row.write(&mut out, s, &state);
    }
    Ok(out)
}

struct RowPicker<'r, T> {
    dofs: &'r [usize],
    u: Vec<T>,
    v: Vec<T>,
    a: Vec<T>,
}

impl<'r, T: Real> RowPicker<'r, T> {
    fn new(dofs: &'r [usize]) -> Self {
        Self {
            dofs,
            u: vec![T::zero(); dofs.len()],
            v: vec![T::zero(); dofs.len()],
            a: vec![T::zero(); dofs.len()],
        }
    }

    fn write(&mut self, out: &mut TimeSeriesResult<T>, step: usize, s: &NewmarkState<T>) {
        for (k, &d) in self.dofs.iter().enumerate() {
            self.u[k] = s.displacement[d];
            self.v[k] = s.velocity[d];
            self.a[k] = s.acceleration[d];
        }
        out.set_row(step, &self.u, &self.v, &self.a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::StructuralMatrices;
    use approx::assert_relative_eq;

    fn sdof(m: f64, c: f64, k: f64) -> StructuralMatrices<f64> {
        let band = |v: f64| {
            let mut b = SymBand::zeros(1, 0);
            b.add(0, 0, v);
            b
        };
        StructuralMatrices {
            mass: band(m),
            damping: band(c),
            stiffness: band(k),
        }
    }

    #[test]
    fn zero_load_zero_response() {
        let sys = sdof(2.0, 0.1, 50.0);
        let load = DenseForceHistory { rows: vec![vec![0.0]; 100] };
        let r = newmark_solve(&sys, &load, NewmarkParams::average_acceleration(0.01), None, &[0]).unwrap();
        assert!(r.displacement.iter().all(|&x| x == 0.0));
        assert!(r.velocity.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn harmonic_steady_state_amplitude() {
        // Undamped SDOF driven at r = Ω/ω = 0.5, started on the particular solution.
        let (m, k) = (1.0f64, 400.0);
        let omega = (k / m).sqrt();
        let r = 0.5;
        let big_omega = r * omega;
        let period = std::f64::consts::TAU / big_omega;
        let dt = period / 200.0;
        let amp = (1.0 / k) / (1.0 - r * r);
        let steps = 200 * 10 + 1;
        let rows = (0..steps).map(|s| vec![(big_omega * dt * s as f64).sin()]).collect();
        let sys = sdof(m, 0.0, k);
        let res = newmark_solve(
            &sys,
            &DenseForceHistory { rows },
            NewmarkParams::average_acceleration(dt),
            Some((&[0.0], &[amp * big_omega])),
            &[0],
        )
        .unwrap();
        let peak = res.displacement.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
        assert_relative_eq!(peak, amp, max_relative = 1e-2);
    }

    #[test]
    fn undamped_energy_is_conserved() {
        let (m, k) = (3.0, 1200.0);
        let sys = sdof(m, 0.0, k);
        let steps = 10_001;
        let load = DenseForceHistory { rows: vec![vec![0.0]; steps] };
        let res = newmark_solve(
            &sys,
            &load,
            NewmarkParams::average_acceleration(0.003),
            Some((&[0.01], &[-0.2])),
            &[0],
        )
        .unwrap();
        let e = |s: usize| 0.5 * m * res.velocity[[s, 0]].powi(2) + 0.5 * k * res.displacement[[s, 0]].powi(2);
        let e0 = e(0);
        let drift = (0..steps).map(|s| ((e(s) - e0) / e0).abs()).fold(0.0, f64::max);
        assert!(drift < 1e-6, "drift {drift}");
    }

    #[test]
    fn resolve_with_same_force_is_bit_identical() {
        let sys = sdof(1.0, 0.2, 100.0);
        let solver = NewmarkSolver::new(&sys, NewmarkParams::average_acceleration(0.01)).unwrap();
        let init = solver.initial_state(&[0.0], &[0.0], &[0.0]).unwrap();
        let mut stepper = NewmarkStepper::new(solver, init);
        assert_eq!(stepper.resolve(&[1.0]).unwrap_err(), VbiError::NoPriorStep);
        let first = stepper.advance(&[3.0]).unwrap().clone();
        let again = stepper.resolve(&[3.0]).unwrap().clone();
        assert_eq!(first, again);
        let doubled = stepper.resolve(&[6.0]).unwrap().clone();
        assert_eq!(doubled.displacement[0], 2.0 * first.displacement[0]);
    }

    #[test]
    fn divergence_reports_step() {
        let sys = sdof(1.0, 0.0, 100.0);
        let rows = vec![vec![0.0], vec![0.0], vec![f64::NAN], vec![0.0]];
        let err = newmark_solve(&sys, &DenseForceHistory { rows }, NewmarkParams::average_acceleration(0.01), None, &[0])
            .unwrap_err();
        assert_eq!(err, VbiError::Diverged { step: 2 });
    }

    #[test]
    fn single_precision_runs() {
        let mut m = SymBand::<f32>::zeros(1, 0);
        m.add(0, 0, 1.0);
        let mut k = SymBand::<f32>::zeros(1, 0);
        k.add(0, 0, 4.0);
        let sys = StructuralMatrices { mass: m, damping: SymBand::zeros(1, 0), stiffness: k };
        let load = DenseForceHistory { rows: vec![vec![1.0f32]; 2000] };
        let r = newmark_solve(&sys, &load, NewmarkParams::average_acceleration(0.01f32), None, &[0]).unwrap();
        // Step load on an undamped oscillator oscillates between 0 and 2·F/k.
        let peak = r.displacement.iter().fold(0.0f32, |a, &x| a.max(x));
        assert!((peak - 0.5).abs() < 1e-3);
    }
}
