//! Quarter-car vehicle: matrices, base-excited response and the tire contact force.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result, VbiError};
use crate::integrators::{rk_integrate, GridMode, Ode, RkTolerances, SampledInput, TimeSeriesResult};
use crate::scalar::{Real, GRAVITY};

pub const DEFAULT_SPEED: f64 = 10.0;

/// Names accepted by [`QuarterCarSpec::preset`].
pub const PRESET_NAMES: [&str; 2] = ["commercial", "truck"];

/// Two-DOF quarter car. DOF order is (sprung, unsprung).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuarterCarSpec<T = f64> {
    /// kg
    pub sprung_mass: T,
    /// kg
    pub unsprung_mass: T,
    /// N/m
    pub suspension_stiffness: T,
    /// N·s/m
    pub suspension_damping: T,
    /// N/m
    pub tire_stiffness: T,
    /// N·s/m
    pub tire_damping: T,
    /// m/s
    pub speed: T,
}

impl<T: Real> QuarterCarSpec<T> {
    /// Light commercial vehicle with soft, heavily damped suspension.
    ///
    /// With these values the lowest natural frequency is about 0.12 Hz.
    pub fn commercial() -> Self {
        Self {
            sprung_mass: T::lit(466.0),
            unsprung_mass: T::lit(69.9),
            suspension_stiffness: T::lit(290.3),
            suspension_damping: T::lit(2796.0),
            tire_stiffness: T::lit(3043.0),
            tire_damping: T::zero(),
            speed: T::lit(DEFAULT_SPEED),
        }
    }

    /// Heavy truck, lowest natural frequency about 0.69 Hz.
    pub fn truck() -> Self {
        Self {
            sprung_mass: T::lit(17300.0),
            unsprung_mass: T::lit(700.0),
            suspension_stiffness: T::lit(4.0e5),
            suspension_damping: T::lit(1.0e4),
            tire_stiffness: T::lit(1.75e6),
            tire_damping: T::zero(),
            speed: T::lit(DEFAULT_SPEED),
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "commercial" => Ok(Self::commercial()),
            "truck" => Ok(Self::truck()),
            other => Err(invalid(
                "vehicle.preset",
                format!("unknown preset `{other}` (available: {})", PRESET_NAMES.join(", ")),
            )),
        }
    }

    /// Multiplies masses, stiffnesses and dampings by `factor`; frequencies are unchanged.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            sprung_mass: self.sprung_mass * factor,
            unsprung_mass: self.unsprung_mass * factor,
            suspension_stiffness: self.suspension_stiffness * factor,
            suspension_damping: self.suspension_damping * factor,
            tire_stiffness: self.tire_stiffness * factor,
            tire_damping: self.tire_damping * factor,
            speed: self.speed,
        }
    }

    pub fn total_mass(&self) -> T {
        self.sprung_mass + self.unsprung_mass
    }

    /// Static weight `(m_s + m_u)·g`.
    pub fn weight(&self) -> T {
        self.total_mass() * T::lit(GRAVITY)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("sprung_mass", self.sprung_mass),
            ("unsprung_mass", self.unsprung_mass),
            ("suspension_stiffness", self.suspension_stiffness),
            ("tire_stiffness", self.tire_stiffness),
            ("speed", self.speed),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        for (name, v) in [
            ("suspension_damping", self.suspension_damping),
            ("tire_damping", self.tire_damping),
        ] {
            if !(v >= T::zero()) || !v.is_finite() {
                return Err(invalid(name, format!("must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

/// `M`, `C`, `K` of the quarter car, row-major 2×2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleMatrices<T> {
    pub mass: [[T; 2]; 2],
    pub damping: [[T; 2]; 2],
    pub stiffness: [[T; 2]; 2],
}

pub fn vehicle_matrices<T: Real>(spec: &QuarterCarSpec<T>) -> Result<VehicleMatrices<T>> {
    spec.validate()?;
    let z = T::zero();
    let pair = |s: T, t: T| [[s, -s], [-s, s + t]];
    Ok(VehicleMatrices {
        mass: [[spec.sprung_mass, z], [z, spec.unsprung_mass]],
        damping: pair(spec.suspension_damping, spec.tire_damping),
        stiffness: pair(spec.suspension_stiffness, spec.tire_stiffness),
    })
}

/// Undamped natural frequencies in Hz, ascending.
pub fn natural_frequencies<T: Real>(spec: &QuarterCarSpec<T>) -> Result<[T; 2]> {
    spec.validate()?;
    let (ms, mu, ks, kt) = (
        spec.sprung_mass,
        spec.unsprung_mass,
        spec.suspension_stiffness,
        spec.tire_stiffness,
    );
    // det(K − λM) = ms·mu·λ² − (ms(ks+kt) + mu·ks)·λ + ks·kt
    let a = ms * mu;
    let b = ms * (ks + kt) + mu * ks;
    let c = ks * kt;
    let disc = (b * b - T::lit(4.0) * a * c).max(T::zero()).sqrt();
    // Stable root pair.
    let hi = (b + disc) / (T::lit(2.0) * a);
    let lo = c / (a * hi);
    let to_hz = |l: T| l.sqrt() / T::TAU();
    Ok([to_hz(lo), to_hz(hi)])
}

/// Steady-state complex response `(Y_s, Y_u)` per unit harmonic base displacement at `omega` rad/s.
pub fn base_transfer<T: Real>(spec: &QuarterCarSpec<T>, omega: T) -> Result<[Complex<T>; 2]> {
    let m = vehicle_matrices(spec)?;
    let d = |i: usize, j: usize| {
        Complex::new(
            m.stiffness[i][j] - omega * omega * m.mass[i][j],
            omega * m.damping[i][j],
        )
    };
    let (a, b, c, e) = (d(0, 0), d(0, 1), d(1, 0), d(1, 1));
    let rhs = Complex::new(spec.tire_stiffness, omega * spec.tire_damping);
    let det = a * e - b * c;
    if det.norm() == T::zero() {
        return Err(VbiError::Singular("vehicle transfer matrix at this frequency"));
    }
    Ok([-b * rhs / det, a * rhs / det])
}

/// |Y_s / W|, the sprung-mass displacement transmissibility at `frequency` Hz.
pub fn transmissibility<T: Real>(spec: &QuarterCarSpec<T>, frequency: T) -> Result<T> {
    Ok(base_transfer(spec, frequency * T::TAU())?[0].norm())
}

/// First-order form; state is `[y_s, y_u, ẏ_s, ẏ_u]` about static equilibrium.
#[derive(Debug, Clone, Copy)]
pub struct QuarterCarOde<T> {
    spec: QuarterCarSpec<T>,
}

impl<T: Real> QuarterCarOde<T> {
    pub fn new(spec: &QuarterCarSpec<T>) -> Result<Self> {
        spec.validate()?;
        Ok(Self { spec: *spec })
    }

    pub fn spec(&self) -> &QuarterCarSpec<T> {
        &self.spec
    }
}

impl<T: Real> Ode<T, 4> for QuarterCarOde<T> {
    #[inline]
    fn derivative(&self, _t: T, y: &[T; 4], input: (T, T)) -> [T; 4] {
        let s = &self.spec;
        let suspension = s.suspension_stiffness * (y[0] - y[1]) + s.suspension_damping * (y[2] - y[3]);
        let tire = s.tire_stiffness * (y[1] - input.0) + s.tire_damping * (y[3] - input.1);
        [
            y[2],
            y[3],
            -suspension / s.sprung_mass,
            (suspension - tire) / s.unsprung_mass,
        ]
    }
}

pub const VEHICLE_LABELS: [&str; 2] = ["sprung", "unsprung"];

/// Packs RK states into a result with accelerations re-evaluated from the ODE.
pub fn states_to_result<T: Real>(
    ode: &QuarterCarOde<T>,
    input: &SampledInput<T>,
    states: &[[T; 4]],
) -> TimeSeriesResult<T> {
    let labels = VEHICLE_LABELS.iter().map(|s| s.to_string()).collect();
    let mut out = TimeSeriesResult::zeros(input.time_step, labels, states.len());
    for (k, y) in states.iter().enumerate() {
        let t = input.time_step * T::from_usize_lossy(k);
        let d = ode.derivative(t, y, (input.w[k], input.w_rate[k]));
        out.set_row(k, &[y[0], y[1]], &[y[2], y[3]], &[d[2], d[3]]);
    }
    out
}

/// Vehicle response to the contact input `wv`, `wv′` sampled every `dt`, from rest.
pub fn vehicle_response<T: Real>(
    spec: &QuarterCarSpec<T>,
    wv: &[T],
    wv_rate: &[T],
    dt: T,
    tolerances: RkTolerances<T>,
    mode: GridMode,
) -> Result<TimeSeriesResult<T>> {
    let ode = QuarterCarOde::new(spec)?;
    let input = SampledInput::new(dt, wv.to_vec(), wv_rate.to_vec())?;
    let states = rk_integrate(&ode, &input, [T::zero(); 4], tolerances, mode)?;
    Ok(states_to_result(&ode, &input, &states))
}

/// Tire–deck contact quantities for one step.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContactState<T = f64> {
    /// Deck displacement plus roughness under the tire (m).
    pub wv: T,
    pub wv_rate: T,
    /// Dynamic tire force after the contact-loss clamp (N, ≥ 0).
    pub tire_force: T,
    /// Force applied to the deck (N, negative is downward).
    pub total_reaction: T,
}

/// `F_t = −k_t(y_u − wv) − c_t(ẏ_u − wv′)`, clamped at zero, and `R = −(m_s+m_u)g − F_t`.
pub fn interaction_force<T: Real>(
    spec: &QuarterCarSpec<T>,
    unsprung_disp: T,
    unsprung_vel: T,
    wv: T,
    wv_rate: T,
) -> ContactState<T> {
    let raw = -spec.tire_stiffness * (unsprung_disp - wv) - spec.tire_damping * (unsprung_vel - wv_rate);
    let tire_force = if raw < T::zero() { T::zero() } else { raw };
    ContactState {
        wv,
        wv_rate,
        tire_force,
        total_reaction: -spec.weight() - tire_force,
    }
}
