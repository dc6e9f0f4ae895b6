//! Closed-form two-DOF bridge/vehicle model under harmonic load.
//!
//! The bridge is a spring `k_b = βk` with lumped mass `m_b = αm`; the vehicle is
//! `k_v = k`, `m_v = m`, sitting on the bridge mass. The load `A_e sin(ω_e t)` acts on
//! the bridge and `γ = ω_e/ω_v`. Everything is undamped.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryConfig<T = f64> {
    /// Mass ratio `m_b/m_v`.
    pub alpha: T,
    /// Stiffness ratio `k_b/k_v`.
    pub beta: T,
    /// Frequency ratio `ω_e/ω_v`.
    pub gamma: T,
    /// Vehicle stiffness `k_v` (N/m).
    pub k: T,
    /// Load amplitude `A_e` (N).
    pub amplitude: T,
}

impl<T: Real> TheoryConfig<T> {
    pub fn new(alpha: T, beta: T, gamma: T) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            k: T::one(),
            amplitude: T::one(),
        }
    }

    pub fn with_gamma(self, gamma: T) -> Self {
        Self { gamma, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > T::zero()) {
            return Err(invalid("beta", "must be positive"));
        }
        if !(self.alpha > self.beta) {
            return Err(invalid(
                "alpha",
                format!("mass ratio {} must exceed stiffness ratio {}", self.alpha, self.beta),
            ));
        }
        if !(self.gamma > T::zero()) {
            return Err(invalid("gamma", "must be positive"));
        }
        if !(self.k > T::zero()) {
            return Err(invalid("k", "must be positive"));
        }
        Ok(())
    }
}

/// Approximate eigen-solution obtained with `α + β + 1 ≈ α + β`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenApprox<T> {
    /// `λ = mω²/k`
    pub eigenvalues: [T; 2],
    /// Columns are modes, rows are (bridge, vehicle).
    pub mode_shapes: [[T; 2]; 2],
}

pub fn eigen_approx<T: Real>(cfg: &TheoryConfig<T>) -> Result<EigenApprox<T>> {
    cfg.validate()?;
    let (a, b) = (cfg.alpha, cfg.beta);
    let d = b - a + T::one();
    if d == T::zero() {
        return Err(VbiError::Singular("β − α + 1 = 0 makes the first mode shape degenerate"));
    }
    Ok(EigenApprox {
        eigenvalues: [T::one(), b / a],
        mode_shapes: [[T::one() / d, (a - b) / a], [T::one(), T::one()]],
    })
}

/// Roots of `αλ² − (α+β+1)λ + β = 0`, ascending.
pub fn exact_eigenvalues<T: Real>(cfg: &TheoryConfig<T>) -> Result<[T; 2]> {
    cfg.validate()?;
    let (a, b) = (cfg.alpha, cfg.beta);
    let s = a + b + T::one();
    let disc = (s * s - T::lit(4.0) * a * b).sqrt();
    let hi = (s + disc) / (T::lit(2.0) * a);
    // Product of roots is β/α.
    let lo = b / (a * hi);
    Ok([lo, hi])
}

fn near_zero<T: Real>(x: T, scale: T) -> bool {
    x.abs() <= T::epsilon() * T::lit(8.0) * scale.abs().max(T::one())
}

/// Modal amplitudes `(amp q₁, amp q₂)` of the approximate modal solution.
pub fn modal_amplitudes<T: Real>(cfg: &TheoryConfig<T>) -> Result<[T; 2]> {
    cfg.validate()?;
    let (a, b, g2) = (cfg.alpha, cfg.beta, cfg.gamma * cfg.gamma);
    let two = T::lit(2.0);
    let p1 = g2 - T::one();
    let p2 = b - a * g2;
    if near_zero(p1, T::one()) {
        return Err(VbiError::Pole("γ = 1 (vehicle mode)"));
    }
    if near_zero(p2, b) {
        return Err(VbiError::Pole("αγ² = β (bridge mode)"));
    }
    let q1 = (b - a + T::one())
        / (p1 * (a * a - two * a * b - T::lit(4.0) * a + b * b + T::lit(3.0) * b + two) * cfg.k);
    let q2 = a * (a - b) / (p2 * (a * a - two * a * b + b * b + b) * cfg.k);
    Ok([q1 * cfg.amplitude, q2 * cfg.amplitude])
}

/// Bridge amplitude of the coupled system by modal superposition of the
/// approximate modes (absolute value).
pub fn coupled_amplitude<T: Real>(cfg: &TheoryConfig<T>) -> Result<T> {
    let (a, b, g2) = (cfg.alpha, cfg.beta, cfg.gamma * cfg.gamma);
    let two = T::lit(2.0);
    cfg.validate()?;
    let p1 = g2 - T::one();
    let p2 = b - a * g2;
    if near_zero(p1, T::one()) {
        return Err(VbiError::Pole("γ = 1 (vehicle mode)"));
    }
    if near_zero(p2, b) {
        return Err(VbiError::Pole("αγ² = β (bridge mode)"));
    }
    let t1 = T::one() / (p1 * (a * a - two * a * b - T::lit(4.0) * a + b * b + T::lit(3.0) * b + two));
    let t2 = (a - b) * (a - b) / (p2 * (a * a - two * a * b + b * b + b));
    Ok(((t1 + t2) * cfg.amplitude / cfg.k).abs())
}

/// Which closed form to use for the bridge-only amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncoupledForm {
    /// `1/(k|β − αγ²|)`, the undamped SDOF amplitude.
    #[default]
    Derived,
    /// `1/(k(β + αγ²))`, kept for comparison only.
    Printed,
}

/// Amplitude of the bridge alone under the same load.
pub fn uncoupled_amplitude<T: Real>(cfg: &TheoryConfig<T>, form: UncoupledForm) -> Result<T> {
    cfg.validate()?;
    let ag2 = cfg.alpha * cfg.gamma * cfg.gamma;
    let den = match form {
        UncoupledForm::Derived => {
            let d = cfg.beta - ag2;
            if near_zero(d, cfg.beta) {
                return Err(VbiError::Pole("αγ² = β (bridge resonance)"));
            }
            d.abs()
        }
        UncoupledForm::Printed => cfg.beta + ag2,
    };
    Ok(cfg.amplitude / (cfg.k * den))
}

/// `|X₁|` from `(K − ω²M) X = [A; 0]` for a general undamped two-mass chain:
/// a ground spring `k_b` under `m_b`, and `k_v` between `m_b` and `m_v`.
pub fn two_dof_bridge_amplitude<T: Real>(
    bridge_mass: T,
    vehicle_mass: T,
    bridge_stiffness: T,
    vehicle_stiffness: T,
    omega: T,
    amplitude: T,
) -> Result<T> {
    let w2 = omega * omega;
    let d11 = bridge_stiffness + vehicle_stiffness - w2 * bridge_mass;
    let d12 = -vehicle_stiffness;
    let d22 = vehicle_stiffness - w2 * vehicle_mass;
    let det = d11 * d22 - d12 * d12;
    let scale = (d11.abs() * d22.abs()).max(d12 * d12);
    if det == T::zero() || det.abs() <= T::epsilon() * scale {
        return Err(VbiError::Singular("excitation at a natural frequency of the two-DOF system"));
    }
    Ok((amplitude * d22 / det).abs())
}

/// Exact steady-state bridge amplitude of the coupled two-DOF system (no eigen-approximation).
pub fn exact_oracle<T: Real>(cfg: &TheoryConfig<T>) -> Result<T> {
    cfg.validate()?;
    // Take m = 1 so ω_v = √k and ω_e = γ√k.
    let omega = cfg.gamma * cfg.k.sqrt();
    two_dof_bridge_amplitude(cfg.alpha, T::one(), cfg.beta * cfg.k, cfg.k, omega, cfg.amplitude)
}

/// All closed-form quantities for one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryResult<T> {
    pub coupled_amp: T,
    pub uncoupled_amp: T,
    pub oracle_amp: T,
    pub eigenvalues: [T; 2],
    pub mode_shapes: [[T; 2]; 2],
    pub modal_amps: [T; 2],
}

pub fn analyze<T: Real>(cfg: &TheoryConfig<T>) -> Result<TheoryResult<T>> {
    let eig = eigen_approx(cfg)?;
    Ok(TheoryResult {
        coupled_amp: coupled_amplitude(cfg)?,
        uncoupled_amp: uncoupled_amplitude(cfg, UncoupledForm::Derived)?,
        oracle_amp: exact_oracle(cfg)?,
        eigenvalues: eig.eigenvalues,
        mode_shapes: eig.mode_shapes,
        modal_amps: modal_amplitudes(cfg)?,
    })
}

/// Grid for the (α, β) × loading-frequency error survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig<T = f64> {
    /// `(stiff, flexible)` end values of α.
    pub alpha_range: (T, T),
    /// `(stiff, flexible)` end values of β.
    pub beta_range: (T, T),
    pub pair_count: usize,
    /// Loading frequencies (Hz), log-spaced.
    pub frequency_range: (T, T),
    pub frequency_count: usize,
    /// Vehicle frequency used to turn Hz into γ.
    pub vehicle_frequency: T,
    pub k: T,
    pub amplitude: T,
    /// Grid points within this relative distance of a pole are flagged.
    pub pole_tolerance: T,
    pub uncoupled_form: UncoupledForm,
}

impl<T: Real> Default for SweepConfig<T> {
    fn default() -> Self {
        Self {
            alpha_range: (T::lit(50.0), T::lit(10000.0)),
            beta_range: (T::lit(500.0), T::lit(10.0)),
            pair_count: 41,
            frequency_range: (T::lit(1e-3), T::lit(1e3)),
            frequency_count: 60,
            vehicle_frequency: T::one(),
            k: T::one(),
            amplitude: T::one(),
            pole_tolerance: T::lit(1e-3),
            uncoupled_form: UncoupledForm::Derived,
        }
    }
}

impl<T: Real> SweepConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let pos = |name: &'static str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(name, format!("must be positive, got {v}")))
            }
        };
        pos("alpha_range", self.alpha_range.0)?;
        pos("alpha_range", self.alpha_range.1)?;
        pos("beta_range", self.beta_range.0)?;
        pos("beta_range", self.beta_range.1)?;
        pos("frequency_range", self.frequency_range.0)?;
        pos("frequency_range", self.frequency_range.1)?;
        pos("vehicle_frequency", self.vehicle_frequency)?;
        pos("k", self.k)?;
        pos("amplitude", self.amplitude)?;
        pos("pole_tolerance", self.pole_tolerance)?;
        if self.frequency_range.0 > self.frequency_range.1 {
            return Err(invalid("frequency_range", "min exceeds max"));
        }
        if self.pair_count < 2 {
            return Err(invalid("pair_count", "need at least 2 pairs"));
        }
        if self.frequency_count < 1 {
            return Err(invalid("frequency_count", "need at least 1 frequency"));
        }
        Ok(())
    }

    /// Position `s ∈ [0, 1]` and `(α, β)` of pair `i`, log-linear between the ends.
    pub fn pair(&self, i: usize) -> (T, T, T) {
        let s = T::from_usize_lossy(i) / T::from_usize_lossy(self.pair_count - 1);
        let lerp = |r: (T, T)| (r.0.ln() + (r.1.ln() - r.0.ln()) * s).exp();
        (s, lerp(self.alpha_range), lerp(self.beta_range))
    }

    /// Loading frequencies (Hz). Cell centres of a log grid, so the decade
    /// points (and γ = 1 for a 1 Hz vehicle) are never hit exactly.
    pub fn frequencies(&self) -> Vec<T> {
        let (lo, hi) = (self.frequency_range.0.ln(), self.frequency_range.1.ln());
        let n = T::from_usize_lossy(self.frequency_count);
        (0..self.frequency_count)
            .map(|k| (lo + (hi - lo) * (T::from_usize_lossy(k) + T::lit(0.5)) / n).exp())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow<T = f64> {
    /// Normalized stiff → flexible position.
    pub position: T,
    pub alpha: T,
    pub beta: T,
    pub gamma: T,
    /// NaN at poles.
    pub coupled: T,
    pub uncoupled: T,
    pub oracle: T,
    pub error_pct: T,
    pub pole: bool,
}

/// Relative error in percent of the bridge-only amplitude against the coupled one.
pub fn error_pct<T: Real>(coupled: T, uncoupled: T) -> T {
    (coupled - uncoupled).abs() / coupled * T::lit(100.0)
}

/// Evaluates every (pair, frequency) cell. Pairs with `α ≤ β + 1` are skipped
/// since the approximate modes are not defined there.
pub fn parametric_sweep<T: Real>(cfg: &SweepConfig<T>) -> Result<Vec<SweepRow<T>>> {
    cfg.validate()?;
    let freqs = cfg.frequencies();
    let mut rows = Vec::with_capacity(cfg.pair_count * freqs.len());
    for i in 0..cfg.pair_count {
        let (s, alpha, beta) = cfg.pair(i);
        if alpha <= beta + T::one() {
            continue;
        }
        for &f in &freqs {
            let gamma = f / cfg.vehicle_frequency;
            let tc = TheoryConfig {
                alpha,
                beta,
                gamma,
                k: cfg.k,
                amplitude: cfg.amplitude,
            };
            let g2 = gamma * gamma;
            let near_vehicle = (g2 - T::one()).abs() < cfg.pole_tolerance;
            let near_bridge = ((alpha * g2 - beta) / beta).abs() < cfg.pole_tolerance;
            let coupled = coupled_amplitude(&tc).ok();
            let uncoupled = uncoupled_amplitude(&tc, cfg.uncoupled_form).ok();
            let oracle = exact_oracle(&tc).unwrap_or_else(|_| T::nan());
            let mut row = SweepRow {
                position: s,
                alpha,
                beta,
                gamma,
                coupled: T::nan(),
                uncoupled: T::nan(),
                oracle,
                error_pct: T::nan(),
                pole: true,
            };
            if let (Some(c), Some(u)) = (coupled, uncoupled) {
                let e = error_pct(c, u);
                if !near_vehicle && !near_bridge && e.is_finite() && c.is_finite() {
                    row.coupled = c;
                    row.uncoupled = u;
                    row.error_pct = e;
                    row.pole = false;
                }
            }
            rows.push(row);
        }
    }
    Ok(rows)
}

/// Worst-case error over frequency for one (α, β) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSummary<T = f64> {
    pub position: T,
    pub alpha: T,
    pub beta: T,
    pub max_error_pct: T,
    pub gamma_at_max: T,
    pub poles: usize,
}

/// Per-pair maxima, ignoring pole cells. Rows must be grouped by pair, as produced by
/// [`parametric_sweep`].
pub fn summarize_sweep<T: Real>(rows: &[SweepRow<T>]) -> Vec<PairSummary<T>> {
    let mut out: Vec<PairSummary<T>> = Vec::new();
    for r in rows {
        let same = out
            .last()
            .is_some_and(|p| p.alpha == r.alpha && p.beta == r.beta);
        if !same {
            out.push(PairSummary {
                position: r.position,
                alpha: r.alpha,
                beta: r.beta,
                max_error_pct: T::neg_infinity(),
                gamma_at_max: T::nan(),
                poles: 0,
            });
        }
        let p = out.last_mut().expect("pushed above");
        if r.pole {
            p.poles += 1;
        } else if r.error_pct > p.max_error_pct {
            p.max_error_pct = r.error_pct;
            p.gamma_at_max = r.gamma;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn flexible_eigenvalues() {
        let cfg = TheoryConfig::new(10000.0, 10.0, 0.5);
        let e = eigen_approx(&cfg).unwrap();
        assert_eq!(e.eigenvalues[0], 1.0);
        assert_relative_eq!(e.eigenvalues[1], 1e-3, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_mode_shape_rejected() {
        let cfg = TheoryConfig::new(11.0, 10.0, 0.5);
        assert!(matches!(eigen_approx(&cfg), Err(VbiError::Singular(_))));
    }

    #[test]
    fn poles_are_signalled() {
        let cfg = TheoryConfig::new(10000.0, 10.0, 1.0);
        assert!(matches!(coupled_amplitude(&cfg), Err(VbiError::Pole(_))));
        let cfg = cfg.with_gamma(1e-3f64.sqrt());
        assert!(matches!(coupled_amplitude(&cfg), Err(VbiError::Pole(_))));
        assert!(matches!(
            uncoupled_amplitude(&cfg, UncoupledForm::Derived),
            Err(VbiError::Pole(_))
        ));
    }

    #[test]
    fn oracle_antiresonance_at_vehicle_frequency() {
        let cfg = TheoryConfig::<f64>::new(10000.0, 10.0, 1.0);
        let x = exact_oracle(&cfg).unwrap();
        assert!(x.is_finite());
        assert_eq!(x, 0.0);
    }

    #[test]
    fn sweep_skips_invalid_pairs_and_flags_nothing_on_default_grid() {
        let cfg = SweepConfig::<f64>::default();
        let rows = parametric_sweep(&cfg).unwrap();
        assert!(rows.iter().all(|r| r.alpha > r.beta + 1.0));
        assert_eq!(rows.len() % cfg.frequency_count, 0);
        let s = summarize_sweep(&rows);
        assert_eq!(s.len() * cfg.frequency_count, rows.len());
        assert_relative_eq!(s.last().unwrap().alpha, 10000.0, max_relative = 1e-12);
    }

    #[test]
    fn sweep_rejects_reversed_frequency_range() {
        let cfg = SweepConfig {
            frequency_range: (10.0, 1.0),
            ..SweepConfig::<f64>::default()
        };
        let e = parametric_sweep(&cfg).unwrap_err().to_string();
        assert!(e.contains("frequency_range"));
    }
}
