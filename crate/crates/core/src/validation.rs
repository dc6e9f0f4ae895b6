//! Built-in verification checks against closed forms and reference values.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::integrators::{newmark_solve, DenseForceHistory, NewmarkParams};
use crate::linalg::SymBand;
use crate::model::{
    assemble_beam, modal_frequencies, BridgeSpec, StructuralMatrices, REFERENCE_BRIDGES, STEEL_DENSITY,
    STEEL_ELASTIC_MODULUS,
};
use crate::theory::{coupled_amplitude, exact_oracle, TheoryConfig};
use crate::vehicle::{natural_frequencies, QuarterCarSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub expected: f64,
    pub actual: f64,
    /// Relative unless the name says otherwise.
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckResult {
    fn relative(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let passed = ((actual - expected) / expected).abs() <= tolerance;
        Self { name: name.into(), expected, actual, tolerance, passed }
    }

    fn absolute(name: impl Into<String>, expected: f64, actual: f64, tolerance: f64) -> Self {
        let passed = (actual - expected).abs() <= tolerance;
        Self { name: name.into(), expected, actual, tolerance, passed }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationOptions {
    pub elastic_modulus: f64,
    pub mass_density: f64,
    pub node_spacing: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            elastic_modulus: STEEL_ELASTIC_MODULUS,
            mass_density: STEEL_DENSITY,
            node_spacing: 0.1,
        }
    }
}

/// Fundamental frequencies of the reference bridges: 2% on the 15 m span, 5% elsewhere.
pub fn bridge_frequency_checks(opts: &ValidationOptions) -> Result<Vec<CheckResult>> {
    REFERENCE_BRIDGES
        .iter()
        .map(|r| {
            let mut spec = BridgeSpec::<f64>::reference(r.span)?.with_node_spacing(opts.node_spacing);
            spec.elastic_modulus = opts.elastic_modulus;
            spec.mass_density = opts.mass_density;
            spec.damping_ratio = 0.0;
            let f = modal_frequencies(&assemble_beam(&spec)?, 1)?[0];
            let tol = if r.span == 15.0 { 0.02 } else { 0.05 };
            Ok(CheckResult::relative(
                format!("bridge {} m f1 (Hz)", r.span),
                r.fundamental_hz,
                f,
                tol,
            ))
        })
        .collect()
}

fn sdof(m: f64, k: f64) -> StructuralMatrices<f64> {
    let one = |v: f64| {
        let mut b = SymBand::zeros(1, 0);
        b.add(0, 0, v);
        b
    };
    StructuralMatrices { mass: one(m), damping: SymBand::zeros(1, 0), stiffness: one(k) }
}

/// Undamped SDOF at frequency ratio 0.5, dt = T_load/200, started on the steady state.
pub fn newmark_harmonic_check() -> Result<CheckResult> {
    let (m, k, r): (f64, f64, f64) = (1.0, 400.0, 0.5);
    let w = r * (k / m).sqrt();
    let dt = std::f64::consts::TAU / w / 200.0;
    let amp = (1.0 / k) / (1.0 - r * r);
    let rows = (0..2001).map(|s| vec![(w * dt * s as f64).sin()]).collect();
    let res = newmark_solve(
        &sdof(m, k),
        &DenseForceHistory { rows },
        NewmarkParams::average_acceleration(dt),
        Some((&[0.0], &[amp * w])),
        &[0],
    )?;
    let peak = res.displacement.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    Ok(CheckResult::relative("Newmark SDOF steady-state amplitude (m)", amp, peak, 0.01))
}

/// Largest relative energy deviation over 10⁴ undamped free-vibration steps.
pub fn newmark_energy_check() -> Result<CheckResult> {
    let (m, k) = (3.0, 1200.0);
    let steps = 10_001;
    let res = newmark_solve(
        &sdof(m, k),
        &DenseForceHistory { rows: vec![vec![0.0]; steps] },
        NewmarkParams::average_acceleration(0.003),
        Some((&[0.01], &[-0.2])),
        &[0],
    )?;
    let e = |s: usize| 0.5 * m * res.velocity[[s, 0]].powi(2) + 0.5 * k * res.displacement[[s, 0]].powi(2);
    let drift = (0..steps).map(|s| ((e(s) - e(0)) / e(0)).abs()).fold(0.0, f64::max);
    Ok(CheckResult::absolute("Newmark energy drift (abs)", 0.0, drift, 1e-6))
}

pub fn truck_frequency_check() -> Result<CheckResult> {
    let f = natural_frequencies(&QuarterCarSpec::<f64>::truck())?[0];
    Ok(CheckResult::absolute("truck lowest frequency (Hz, abs)", 0.69, f, 0.01))
}

/// Worst relative gap between the modal closed form and the direct 2×2 solve for
/// α = 10000, β = 10 over 20 log-spaced γ in [0.01, 100] that avoid both poles.
pub fn theory_oracle_check() -> Result<CheckResult> {
    let base = TheoryConfig::new(10000.0, 10.0, 1.0);
    let mut worst = 0.0f64;
    for g in theory_gamma_grid() {
        let cfg = base.with_gamma(g);
        let o = exact_oracle(&cfg)?;
        let c = coupled_amplitude(&cfg)?;
        worst = worst.max(((c - o) / o).abs());
    }
    Ok(CheckResult::absolute("closed form vs 2x2 solve, max rel error", 0.0, worst, 0.01))
}

/// 20 log-spaced points over [0.01, 100], offset a quarter cell so none lands on γ = 1 or γ² = β/α.
pub fn theory_gamma_grid() -> Vec<f64> {
    (0..20).map(|i| 10f64.powf(-2.0 + 4.0 * (i as f64 + 0.25) / 20.0)).collect()
}

pub fn run_all(opts: &ValidationOptions) -> Result<Vec<CheckResult>> {
    let mut out = bridge_frequency_checks(opts)?;
    out.push(newmark_harmonic_check()?);
    out.push(newmark_energy_check()?);
    out.push(truck_frequency_check()?);
    out.push(theory_oracle_check()?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn denser_steel_fails_frequency_checks() {
        let opts = ValidationOptions { mass_density: STEEL_DENSITY * 1.5, node_spacing: 0.5, ..Default::default() };
        let checks = bridge_frequency_checks(&opts).unwrap();
        assert!(!checks[0].passed);
    }

    #[test]
    fn cheap_checks_pass() {
        assert!(newmark_harmonic_check().unwrap().passed);
        assert!(newmark_energy_check().unwrap().passed);
        assert!(truck_frequency_check().unwrap().passed);
        assert!(theory_oracle_check().unwrap().passed);
    }
}
