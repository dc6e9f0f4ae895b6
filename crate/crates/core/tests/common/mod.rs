//! Oracles shared by several integration test binaries.
#![allow(dead_code)]

use std::f64::consts::TAU;

use vbi_core::integrators::{rk_integrate, GridMode, RkTolerances, SampledInput};
use vbi_core::vehicle::{QuarterCarOde, QuarterCarSpec};

pub type C = (f64, f64);

fn cmul(a: C, b: C) -> C {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: C, b: C) -> C {
    let d = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / d, (a.1 * b.0 - a.0 * b.1) / d)
}

fn csub(a: C, b: C) -> C {
    (a.0 - b.0, a.1 - b.1)
}

/// Cramer's rule on the dynamic stiffness of the quarter car under unit base motion.
pub fn transfer(s: &QuarterCarSpec<f64>, w: f64) -> (C, C) {
    let a = (s.suspension_stiffness - w * w * s.sprung_mass, w * s.suspension_damping);
    let b = (-s.suspension_stiffness, -w * s.suspension_damping);
    let e = (
        s.suspension_stiffness + s.tire_stiffness - w * w * s.unsprung_mass,
        w * (s.suspension_damping + s.tire_damping),
    );
    let f = (s.tire_stiffness, w * s.tire_damping);
    let det = csub(cmul(a, e), cmul(b, b));
    let ys = cdiv(cmul((-b.0, -b.1), f), det);
    let yu = cdiv(cmul(a, f), det);
    (ys, yu)
}

pub fn abs(c: C) -> f64 {
    c.0.hypot(c.1)
}

/// Amplitude of the `omega` component over a whole number of periods.
pub fn project(y: &[f64], dt: f64, omega: f64) -> f64 {
    let n = y.len() as f64;
    let (mut s, mut c) = (0.0, 0.0);
    for (k, v) in y.iter().enumerate() {
        let t = k as f64 * dt;
        s += v * (omega * t).sin();
        c += v * (omega * t).cos();
    }
    2.0 / n * s.hypot(c)
}

/// Worst relative amplitude error of the RK vehicle response against the transfer
/// function for a harmonic base input at `f` Hz.
pub fn harmonic_error(spec: QuarterCarSpec<f64>, f: f64, mode: GridMode) -> f64 {
    let w = TAU * f;
    let amp = 0.01;
    let per_period = 400;
    let dt = 1.0 / f / per_period as f64;
    let periods = 30;
    let steps = per_period * periods + 1;
    let t = |k: usize| k as f64 * dt;
    let wv: Vec<f64> = (0..steps).map(|k| amp * (w * t(k)).sin()).collect();
    let wr: Vec<f64> = (0..steps).map(|k| amp * w * (w * t(k)).cos()).collect();
    let (ys, yu) = transfer(&spec, w);
    // Start on the steady state: y = Im(Y·A·e^{iωt}), ẏ = ω·Re(Y·A).
    let y0 = [amp * ys.1, amp * yu.1, amp * w * ys.0, amp * w * yu.0];
    let ode = QuarterCarOde::new(&spec).unwrap();
    let input = SampledInput::new(dt, wv, wr).unwrap();
    let states = rk_integrate(&ode, &input, y0, RkTolerances::default(), mode).unwrap();
    let tail = per_period * 10;
    let last: Vec<[f64; 4]> = states[states.len() - 1 - tail..states.len() - 1].to_vec();
    let sprung: Vec<f64> = last.iter().map(|y| y[0]).collect();
    let unsprung: Vec<f64> = last.iter().map(|y| y[1]).collect();
    let got_s = project(&sprung, dt, w);
    let got_u = project(&unsprung, dt, w);
    let want_s = amp * abs(ys);
    let want_u = amp * abs(yu);
    ((got_s - want_s) / want_s).abs().max(((got_u - want_u) / want_u).abs())
}
