use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::scalar::Real;

/// First-order system `y' = f(t, y, w, w')` driven by a base input.
pub trait Ode<T: Real, const N: usize> {
    fn derivative(&self, t: T, y: &[T; N], input: (T, T)) -> [T; N];
}

/// Base excitation `(w(t), w'(t))`.
pub trait BaseInput<T: Real> {
    fn sample(&self, t: T) -> (T, T);
}

/// Linear interpolation of the base input over one output interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearSegment<T> {
    pub t0: T,
    pub t1: T,
    pub w: (T, T),
    pub w_rate: (T, T),
}

impl<T: Real> BaseInput<T> for LinearSegment<T> {
    #[inline]
    fn sample(&self, t: T) -> (T, T) {
        let s = (t - self.t0) / (self.t1 - self.t0);
        (
            self.w.0 + (self.w.1 - self.w.0) * s,
            self.w_rate.0 + (self.w_rate.1 - self.w_rate.0) * s,
        )
    }
}

/// Base input given on a uniform grid starting at t = 0, linear in between.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledInput<T> {
    pub time_step: T,
    pub w: Vec<T>,
    pub w_rate: Vec<T>,
}

impl<T: Real> SampledInput<T> {
    pub fn new(time_step: T, w: Vec<T>, w_rate: Vec<T>) -> Result<Self> {
        if !(time_step > T::zero()) {
            return Err(invalid("time_step", "must be positive"));
        }
        if w.len() != w_rate.len() {
            return Err(VbiError::DimensionMismatch {
                context: "base input rate series",
                expected: w.len(),
                found: w_rate.len(),
            });
        }
        Ok(Self { time_step, w, w_rate })
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    /// The interpolant on `[t_k, t_{k+1}]`.
    pub fn segment(&self, k: usize) -> LinearSegment<T> {
        LinearSegment {
            t0: self.time_step * T::from_usize_lossy(k),
            t1: self.time_step * T::from_usize_lossy(k + 1),
            w: (self.w[k], self.w[k + 1]),
            w_rate: (self.w_rate[k], self.w_rate[k + 1]),
        }
    }
}

impl<T: Real> BaseInput<T> for SampledInput<T> {
    fn sample(&self, t: T) -> (T, T) {
        let last = self.len().saturating_sub(1);
        if last == 0 {
            return (self.w[0], self.w_rate[0]);
        }
        let k = (t / self.time_step)
            .floor()
            .to_usize()
            .unwrap_or(0)
            .min(last - 1);
        self.segment(k).sample(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RkTolerances<T = f64> {
    pub relative: T,
    pub absolute: T,
}

impl<T: Real> Default for RkTolerances<T> {
    fn default() -> Self {
        Self {
            relative: T::lit(1e-8),
            absolute: T::lit(1e-10),
        }
    }
}

/// How [`rk_integrate`] produces values on the output grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    /// Every output time is a step boundary; the input is piecewise linear per interval.
    #[default]
    StopAtGrid,
    /// Free stepping with continuous-extension output.
    Dense,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const MAX_STEPS_PER_CALL: usize = 1_000_000;

/// Dormand–Prince 5(4) with step-size control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DormandPrince<T = f64> {
    pub tolerances: RkTolerances<T>,
}

struct Step<T, const N: usize> {
    y: [T; N],
    err: T,
    k: [[T; N]; 7],
}

impl<T: Real> DormandPrince<T> {
    pub fn new(tolerances: RkTolerances<T>) -> Result<Self> {
        if !(tolerances.relative > T::zero()) || !(tolerances.absolute > T::zero()) {
            return Err(invalid("tolerances", "must be positive"));
        }
        Ok(Self { tolerances })
    }

    fn attempt<const N: usize, O: Ode<T, N>, I: BaseInput<T>>(
        &self,
        ode: &O,
        input: &I,
        t: T,
        y: &[T; N],
        k1: [T; N],
        h: T,
    ) -> Step<T, N> {
        let l = T::lit;
        let comb = |coefs: &[(f64, &[T; N])]| -> [T; N] {
            let mut out = *y;
            for i in 0..N {
                let mut s = T::zero();
                for (c, k) in coefs {
                    s += l(*c) * k[i];
                }
                out[i] += h * s;
            }
            out
        };
        let eval = |dt: f64, yy: &[T; N]| {
            let tt = t + l(dt) * h;
            ode.derivative(tt, yy, input.sample(tt))
        };
        let k2 = eval(C2, &comb(&[(A21, &k1)]));
        let k3 = eval(C3, &comb(&[(A31, &k1), (A32, &k2)]));
        let k4 = eval(C4, &comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = eval(C5, &comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = eval(
            1.0,
            &comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = comb(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t1 = t + h;
        let k7 = ode.derivative(t1, &y1, input.sample(t1));

        let mut acc = T::zero();
        for i in 0..N {
            let e = h
                * (l(E1) * k1[i] + l(E3) * k3[i] + l(E4) * k4[i] + l(E5) * k5[i] + l(E6) * k6[i]
                    + l(E7) * k7[i]);
            let sc = self.tolerances.absolute + self.tolerances.relative * y[i].abs().max(y1[i].abs());
            acc += (e / sc) * (e / sc);
        }
        let err = (acc / T::from_usize_lossy(N.max(1))).sqrt();
        Step {
            y: y1,
            err,
            k: [k1, k2, k3, k4, k5, k6, k7],
        }
    }

    fn next_factor(err: T) -> T {
        let f = if err > T::zero() {
            T::lit(0.9) * err.powf(T::lit(-0.2))
        } else {
            T::lit(5.0)
        };
        f.max(T::lit(0.2)).min(T::lit(5.0))
    }

    fn initial_step<const N: usize>(&self, y: &[T; N], f: &[T; N], span: T) -> T {
        let mut d0 = T::zero();
        let mut d1 = T::zero();
        for i in 0..N {
            let sc = self.tolerances.absolute + self.tolerances.relative * y[i].abs();
            d0 += (y[i] / sc) * (y[i] / sc);
            d1 += (f[i] / sc) * (f[i] / sc);
        }
        let h = if d0 < T::lit(1e-10) || d1 < T::lit(1e-10) {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * (d0 / d1).sqrt()
        };
        h.min(span.abs())
    }

    /// Integrates from `t0` to exactly `t1`.
    ///
    /// `h_guess ≤ 0` requests an automatic first step. Returns the state at `t1`
    /// and the step size to try next.
    pub fn advance<const N: usize, O: Ode<T, N>, I: BaseInput<T>>(
        &self,
        ode: &O,
        input: &I,
        t0: T,
        t1: T,
        y0: [T; N],
        h_guess: T,
    ) -> Result<([T; N], T)> {
        let span = t1 - t0;
        if span == T::zero() {
            return Ok((y0, h_guess));
        }
        let mut t = t0;
        let mut y = y0;
        let mut k1 = ode.derivative(t, &y, input.sample(t));
        let mut h = if h_guess > T::zero() {
            h_guess
        } else {
            self.initial_step(&y, &k1, span)
        };
        let mut suggested = h;
        let tiny = T::epsilon() * T::lit(16.0);
        for _ in 0..MAX_STEPS_PER_CALL {
            let remaining = t1 - t;
            let last = h >= remaining * (T::one() - tiny);
            let h_try = if last { remaining } else { h };
            if h_try <= tiny * t.abs().max(span.abs()) {
                return Err(VbiError::StepSizeUnderflow {
                    time: t.as_f64(),
                    step: h_try.as_f64(),
                });
            }
            let step = self.attempt(ode, input, t, &y, k1, h_try);
            if !step.err.is_finite() {
                h = h_try * T::lit(0.2);
                continue;
            }
            let factor = Self::next_factor(step.err);
            if step.err <= T::one() {
                y = step.y;
                k1 = step.k[6];
                // A clipped final step says little about the natural step size.
                suggested = if last && h_try < h { h } else { h_try * factor };
                if last {
                    return Ok((y, suggested));
                }
                t += h_try;
                h = suggested;
            } else {
                h = h_try * factor.min(T::one());
            }
        }
        Err(VbiError::StepSizeUnderflow {
            time: t.as_f64(),
            step: suggested.as_f64(),
        })
    }
}

/// Integrates over the whole sampled input and returns the state at every grid time.
pub fn rk_integrate<T: Real, const N: usize, O: Ode<T, N>>(
    ode: &O,
    input: &SampledInput<T>,
    y0: [T; N],
    tolerances: RkTolerances<T>,
    mode: GridMode,
) -> Result<Vec<[T; N]>> {
    let dp = DormandPrince::new(tolerances)?;
    let n = input.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return Ok(out);
    }
    out.push(y0);
    match mode {
        GridMode::StopAtGrid => {
            let mut y = y0;
            let mut h = T::zero();
            for k in 0..n - 1 {
                let seg = input.segment(k);
                let (y1, h1) = dp.advance(ode, &seg, seg.t0, seg.t1, y, h)?;
                y = y1;
                h = h1;
                out.push(y);
            }
        }
        GridMode::Dense => dense_integrate(&dp, ode, input, y0, &mut out)?,
    }
    Ok(out)
}

fn dense_integrate<T: Real, const N: usize, O: Ode<T, N>>(
    dp: &DormandPrince<T>,
    ode: &O,
    input: &SampledInput<T>,
    y0: [T; N],
    out: &mut Vec<[T; N]>,
) -> Result<()> {
    let n = input.len();
    let t_end = input.time_step * T::from_usize_lossy(n - 1);
    let l = T::lit;
    let mut t = T::zero();
    let mut y = y0;
    let mut k1 = ode.derivative(t, &y, input.sample(t));
    let mut h = dp.initial_step(&y, &k1, t_end);
    let mut next_out = 1;
    let tiny = T::epsilon() * l(16.0);
    let mut guard = 0usize;
    while next_out < n {
        guard += 1;
        if guard > MAX_STEPS_PER_CALL * 10 {
            return Err(VbiError::StepSizeUnderflow { time: t.as_f64(), step: h.as_f64() });
        }
        let h_try = h.min(t_end - t);
        if h_try <= tiny * t.abs().max(t_end) {
            return Err(VbiError::StepSizeUnderflow { time: t.as_f64(), step: h_try.as_f64() });
        }
        let step = dp.attempt(ode, input, t, &y, k1, h_try);
        let factor = DormandPrince::<T>::next_factor(step.err);
        if !(step.err <= T::one()) {
            h = h_try * if step.err.is_finite() { factor.min(T::one()) } else { l(0.2) };
            continue;
        }
        let k = &step.k;
        let t_new = t + h_try;
        let mut r = [[T::zero(); N]; 5];
        for i in 0..N {
            let ydiff = step.y[i] - y[i];
            let bspl = h_try * k[0][i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h_try * k[6][i] - bspl;
            r[4][i] = h_try
                * (l(D1) * k[0][i] + l(D3) * k[2][i] + l(D4) * k[3][i] + l(D5) * k[4][i]
                    + l(D6) * k[5][i]
                    + l(D7) * k[6][i]);
        }
        while next_out < n {
            let t_out = input.time_step * T::from_usize_lossy(next_out);
            if t_out > t_new && next_out + 1 < n {
                break;
            }
            if next_out + 1 == n && t_new < t_end {
                break;
            }
            let s = ((t_out - t) / h_try).min(T::one());
            let s1 = T::one() - s;
            let mut v = [T::zero(); N];
            for i in 0..N {
                v[i] = r[0][i] + s * (r[1][i] + s1 * (r[2][i] + s * (r[3][i] + s1 * r[4][i])));
            }
            out.push(v);
            next_out += 1;
        }
        t = t_new;
        y = step.y;
        k1 = k[6];
        h = h_try * factor;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// y'' = −ω² y as a first-order pair.
    struct Oscillator(f64);

    impl Ode<f64, 2> for Oscillator {
        fn derivative(&self, _t: f64, y: &[f64; 2], _w: (f64, f64)) -> [f64; 2] {
            [y[1], -self.0 * self.0 * y[0]]
        }
    }

    /// y' = w(t)
    struct Integrator;

    impl Ode<f64, 1> for Integrator {
        fn derivative(&self, _t: f64, _y: &[f64; 1], w: (f64, f64)) -> [f64; 1] {
            [w.0]
        }
    }

    #[test]
    fn oscillator_both_modes() {
        let n = 501;
        let dt = 0.01;
        let input = SampledInput::new(dt, vec![0.0; n], vec![0.0; n]).unwrap();
        for mode in [GridMode::StopAtGrid, GridMode::Dense] {
            let ys = rk_integrate(&Oscillator(3.0), &input, [1.0, 0.0], RkTolerances::default(), mode).unwrap();
            assert_eq!(ys.len(), n);
            for (k, y) in ys.iter().enumerate() {
                let t = dt * k as f64;
                assert!((y[0] - (3.0 * t).cos()).abs() < 1e-7, "{mode:?} at {t}");
            }
        }
    }

    #[test]
    fn piecewise_linear_input_is_integrated_exactly() {
        let w = vec![0.0, 1.0, -2.0, 0.5];
        let input = SampledInput::new(0.5, w.clone(), vec![0.0; 4]).unwrap();
        let ys = rk_integrate(&Integrator, &input, [0.0], RkTolerances::default(), GridMode::StopAtGrid).unwrap();
        let mut area = 0.0;
        for k in 1..4 {
            area += 0.25 * (w[k - 1] + w[k]);
            assert_relative_eq!(ys[k][0], area, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_span_is_identity() {
        let dp = DormandPrince::new(RkTolerances::default()).unwrap();
        let seg = LinearSegment { t0: 1.0, t1: 1.0, w: (0.0, 0.0), w_rate: (0.0, 0.0) };
        let (y, h) = dp.advance(&Oscillator(1.0), &seg, 1.0, 1.0, [2.0, 3.0], 0.1).unwrap();
        assert_eq!(y, [2.0, 3.0]);
        assert_eq!(h, 0.1);
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(DormandPrince::new(RkTolerances { relative: 0.0, absolute: 1e-9 }).is_err());
    }

    /// y' = y²: blows up at t = 1 for y(0) = 1.
    struct Blowup;

    impl Ode<f64, 1> for Blowup {
        fn derivative(&self, _t: f64, y: &[f64; 1], _w: (f64, f64)) -> [f64; 1] {
            [y[0] * y[0]]
        }
    }

    #[test]
    fn finite_time_blowup_reports_underflow() {
        let dp = DormandPrince::new(RkTolerances::default()).unwrap();
        let seg = LinearSegment { t0: 0.0, t1: 2.0, w: (0.0, 0.0), w_rate: (0.0, 0.0) };
        let err = dp.advance(&Blowup, &seg, 0.0, 2.0, [1.0], 0.0).unwrap_err();
        assert!(matches!(err, VbiError::StepSizeUnderflow { .. }), "{err:?}");
    }
}
