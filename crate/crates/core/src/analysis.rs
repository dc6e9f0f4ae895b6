//! Accuracy metrics between paired runs and the runtime benchmark.

use std::time::Instant;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::model::BridgeSpec;
use crate::scalar::Real;
use crate::simulators::{simulate_coupled, simulate_decoupled, Scenario, ScenarioConfig, SimulationOutput};

pub const DEFAULT_FREQUENCY_CUTOFF: f64 = 25.0;

fn check_pair<T: Real>(reference: &[T], candidate: &[T], normalization: T) -> Result<()> {
    if reference.len() != candidate.len() {
        return Err(VbiError::DimensionMismatch {
            context: "signal lengths",
            expected: reference.len(),
            found: candidate.len(),
        });
    }
    if reference.is_empty() {
        return Err(invalid("reference", "empty signal"));
    }
    if !(normalization > T::zero()) || !normalization.is_finite() {
        return Err(invalid("normalization", format!("must be positive, got {normalization}")));
    }
    Ok(())
}

/// Largest absolute value; the normalization taken from the conventional run.
pub fn max_abs<T: Real>(signal: &[T]) -> T {
    signal.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

/// Mean squared difference of the two signals after dividing both by `normalization`.
pub fn mse_time<T: Real>(reference: &[T], candidate: &[T], normalization: T) -> Result<T> {
    check_pair(reference, candidate, normalization)?;
    let sum: T = reference
        .iter()
        .zip(candidate)
        .map(|(&a, &b)| {
            let d = (a - b) / normalization;
            d * d
        })
        .sum();
    Ok(sum / T::from_usize_lossy(reference.len()))
}

/// One-sided amplitude spectrum with rectangular window: `(frequency Hz, amplitude)`.
///
/// A sinusoid of amplitude `A` on a bin shows up as `A`; the DC bin carries the mean.
pub fn amplitude_spectrum<T: Real>(signal: &[T], dt: T) -> Vec<(T, T)> {
    let n = signal.len();
    if n == 0 {
        return Vec::new();
    }
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|v| Complex::new(v.as_f64(), 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    let df = 1.0 / (n as f64 * dt.as_f64());
    (0..=n / 2)
        .map(|k| {
            let scale = if k == 0 || (n.is_multiple_of(2) && k == n / 2) { 1.0 } else { 2.0 };
            (T::lit(k as f64 * df), T::lit(scale * buf[k].norm() / n as f64))
        })
        .collect()
}

/// MSE between the amplitude spectra of the normalized signals, over bins up to `cutoff` Hz.
pub fn mse_freq<T: Real>(reference: &[T], candidate: &[T], normalization: T, dt: T, cutoff: T) -> Result<T> {
    check_pair(reference, candidate, normalization)?;
    if !(dt > T::zero()) {
        return Err(invalid("dt", "must be positive"));
    }
    let a = amplitude_spectrum(reference, dt);
    let b = amplitude_spectrum(candidate, dt);
    let mut sum = T::zero();
    let mut count = 0usize;
    for ((f, x), (_, y)) in a.into_iter().zip(b) {
        if f > cutoff {
            break;
        }
        let d = (x - y) / normalization;
        sum += d * d;
        count += 1;
    }
    Ok(sum / T::from_usize_lossy(count.max(1)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport<T = f64> {
    pub span: T,
    pub n_vehicles: usize,
    pub vehicle_preset: String,
    /// Bridge midspan displacement.
    pub mse_time: T,
    pub mse_freq: T,
    pub normalization: T,
    /// Sprung-mass displacement.
    pub vehicle_mse_time: T,
    pub vehicle_mse_freq: T,
    pub vehicle_normalization: T,
    pub median_iterations: usize,
    pub max_iterations: usize,
    pub coupled_seconds: f64,
    pub decoupled_seconds: f64,
}

/// Median of the per-step iteration counts where the vehicle was on the deck.
pub fn median_iterations(counts: &[usize]) -> usize {
    let mut v: Vec<usize> = counts.iter().copied().filter(|&c| c > 0).collect();
    if v.is_empty() {
        return 0;
    }
    v.sort_unstable();
    v[v.len() / 2]
}

/// Metrics of a decoupled run against the coupled one.
pub fn compare_outputs<T: Real>(
    coupled: &SimulationOutput<T>,
    decoupled: &SimulationOutput<T>,
    dt: T,
    cutoff: T,
) -> Result<(T, T, T, T, T, T)> {
    let rb = coupled.midspan_displacement();
    let cb = decoupled.midspan_displacement();
    let nb = max_abs(&rb);
    let rv = coupled.sprung_displacement();
    let cv = decoupled.sprung_displacement();
    let nv = max_abs(&rv);
    Ok((
        mse_time(&rb, &cb, nb)?,
        mse_freq(&rb, &cb, nb, dt, cutoff)?,
        nb,
        mse_time(&rv, &cv, nv)?,
        mse_freq(&rv, &cv, nv, dt, cutoff)?,
        nv,
    ))
}

/// Runs both schemes on one scenario and reports their disagreement.
pub fn compare_scenario<T: Real>(
    scenario: &Scenario<T>,
    vehicle_preset: &str,
    cutoff: T,
) -> Result<(ComparisonReport<T>, SimulationOutput<T>, SimulationOutput<T>)> {
    let coupled = simulate_coupled(scenario)?;
    let decoupled = simulate_decoupled(scenario)?;
    let (mt, mf, nb, vt, vf, nv) = compare_outputs(&coupled, &decoupled, scenario.time_step, cutoff)?;
    let report = ComparisonReport {
        span: scenario.config.bridge.span,
        n_vehicles: scenario.config.traffic.n_vehicles,
        vehicle_preset: vehicle_preset.to_string(),
        mse_time: mt,
        mse_freq: mf,
        normalization: nb,
        vehicle_mse_time: vt,
        vehicle_mse_freq: vf,
        vehicle_normalization: nv,
        median_iterations: median_iterations(&coupled.iteration_counts),
        max_iterations: coupled.iteration_counts.iter().copied().max().unwrap_or(0),
        coupled_seconds: coupled.wall_time,
        decoupled_seconds: decoupled.wall_time,
    };
    Ok((report, coupled, decoupled))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRecord<T = f64> {
    pub span: T,
    pub dof_count: usize,
    pub coupled_seconds: f64,
    pub decoupled_seconds: f64,
    pub speedup: f64,
    pub strict_mode: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkOutcome<T = f64> {
    pub records: Vec<BenchmarkRecord<T>>,
    /// `(span, strict_mode, error)` for coupled runs that failed.
    pub failures: Vec<(T, bool, String)>,
    /// Whether every repeated run reproduced its first response exactly.
    pub deterministic: bool,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite timings"));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn time_run<T: Real>(
    f: impl Fn(&Scenario<T>) -> Result<SimulationOutput<T>>,
    scenario: &Scenario<T>,
    repetitions: usize,
    deterministic: &mut bool,
) -> Result<f64> {
    let mut times = Vec::with_capacity(repetitions);
    let mut first: Option<SimulationOutput<T>> = None;
    for _ in 0..repetitions {
        let start = Instant::now();
        let out = f(scenario)?;
        times.push(start.elapsed().as_secs_f64());
        match &first {
            None => first = Some(out),
            Some(ref0) => {
                if ref0.bridge_result != out.bridge_result || ref0.vehicle_result != out.vehicle_result {
                    *deterministic = false;
                }
            }
        }
    }
    Ok(median(times))
}

/// Median wall times of both schemes per span. Excitation and matrices are built
/// outside the timed region; only the simulation call is measured.
///
/// Spans use the reference sections with the node spacing of `base.bridge`.
pub fn run_benchmark<T: Real>(
    base: &ScenarioConfig<T>,
    spans: &[f64],
    repetitions: usize,
    strict_modes: &[bool],
) -> Result<BenchmarkOutcome<T>> {
    if repetitions < 3 {
        return Err(invalid("repetitions", "need at least 3 for a median"));
    }
    let mut outcome = BenchmarkOutcome {
        deterministic: true,
        ..Default::default()
    };
    for &span in spans {
        let bridge = BridgeSpec::reference(span)?.with_node_spacing(base.bridge.node_spacing);
        let mut cfg = base.clone();
        cfg.bridge = BridgeSpec {
            damping_ratio: base.bridge.damping_ratio,
            elastic_modulus: base.bridge.elastic_modulus,
            mass_density: base.bridge.mass_density,
            ..bridge
        };
        let mut scenario = Scenario::prepare(cfg)?;
        let decoupled = time_run(simulate_decoupled, &scenario, repetitions, &mut outcome.deterministic)?;
        for &strict in strict_modes {
            scenario.config.strict_paper_mode = strict;
            match time_run(simulate_coupled, &scenario, repetitions, &mut outcome.deterministic) {
                Ok(coupled) => outcome.records.push(BenchmarkRecord {
                    span: T::lit(span),
                    dof_count: scenario.system.free_dof_count(),
                    coupled_seconds: coupled,
                    decoupled_seconds: decoupled,
                    speedup: coupled / decoupled,
                    strict_mode: strict,
                }),
                Err(e) => outcome.failures.push((T::lit(span), strict, e.to_string())),
            }
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_offset() {
        let a = [1.0, -2.0, 3.0];
        let b = [1.5, -1.5, 3.5];
        assert_relative_eq!(mse_time(&a, &b, 2.0).unwrap(), 0.0625, epsilon = 1e-15);
        assert_eq!(mse_time(&a, &a, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn errors() {
        assert!(mse_time(&[1.0], &[1.0, 2.0], 1.0).is_err());
        assert!(mse_time(&[1.0], &[1.0], 0.0).is_err());
    }

    #[test]
    fn spectrum_of_bin_centred_sine() {
        let n = 200;
        let dt = 0.01;
        let x: Vec<f64> = (0..n).map(|i| 0.7 * (std::f64::consts::TAU * 5.0 * i as f64 * dt).sin()).collect();
        let s = amplitude_spectrum(&x, dt);
        let (f, a) = s[10];
        assert_relative_eq!(f, 5.0, epsilon = 1e-12);
        assert_relative_eq!(a, 0.7, epsilon = 1e-12);
    }

    #[test]
    fn iteration_median_ignores_support_steps() {
        assert_eq!(median_iterations(&[0, 2, 3, 2, 9, 0]), 3);
        assert_eq!(median_iterations(&[0, 0]), 0);
    }
}
