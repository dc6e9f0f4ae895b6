//! Road roughness and random traffic loading.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{Real, GRAVITY};

/// Displacement PSD at the reference spatial frequency for a class-A road (m³),
/// the geometric mean of the class band.
pub const CLASS_A_COEFFICIENT: f64 = 16.0e-6;
/// Reference spatial frequency `n₀` (cycles/m).
pub const REFERENCE_SPATIAL_FREQUENCY: f64 = 0.1;
pub const DEFAULT_BAND_LOW: f64 = 0.01;
pub const DEFAULT_BAND_HIGH: f64 = 10.0;
/// Mass of one average vehicle in the traffic stream (kg).
pub const AVERAGE_VEHICLE_MASS: f64 = 2000.0;
pub const DEFAULT_TRAFFIC_DENSITY: f64 = 0.05;

const MIN_COMPONENTS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoughnessParams<T = f64> {
    /// `G_d(n₀)` in m³.
    pub coefficient: T,
    pub seed: u64,
    pub band_low: T,
    /// Upper band edge; `None` uses the smaller of 10 cycles/m and the grid Nyquist frequency.
    pub band_high: Option<T>,
}

impl<T: Real> Default for RoughnessParams<T> {
    fn default() -> Self {
        Self {
            coefficient: T::lit(CLASS_A_COEFFICIENT),
            seed: 1,
            band_low: T::lit(DEFAULT_BAND_LOW),
            band_high: None,
        }
    }
}

/// Road profile sampled on the bridge node grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessProfile<T = f64> {
    pub sample_positions: Vec<T>,
    /// m
    pub elevation: Vec<T>,
    /// m/m, analytic derivative of `elevation`
    pub slope: Vec<T>,
    pub spacing: T,
    pub coefficient: T,
    pub seed: u64,
}

impl<T: Real> RoughnessProfile<T> {
    /// A perfectly smooth road on the given grid.
    pub fn flat(length: T, spacing: T) -> Result<Self> {
        let n = grid_intervals(length, spacing)?;
        Ok(Self {
            sample_positions: (0..=n).map(|i| spacing * T::from_usize_lossy(i)).collect(),
            elevation: vec![T::zero(); n + 1],
            slope: vec![T::zero(); n + 1],
            spacing,
            coefficient: T::zero(),
            seed: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.elevation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elevation.is_empty()
    }

    pub fn rms(&self) -> T {
        let n = T::from_usize_lossy(self.len());
        (self.elevation.iter().map(|&z| z * z).sum::<T>() / n).sqrt()
    }
}

/// One-sided displacement PSD `G_d(n) = G_d(n₀)·(n/n₀)⁻²`.
pub fn displacement_psd<T: Real>(coefficient: T, spatial_frequency: T) -> T {
    let r = spatial_frequency / T::lit(REFERENCE_SPATIAL_FREQUENCY);
    coefficient / (r * r)
}

fn grid_intervals<T: Real>(length: T, spacing: T) -> Result<usize> {
    if !(spacing > T::zero()) {
        return Err(invalid("spacing", "must be positive"));
    }
    if !(length > T::zero()) {
        return Err(invalid("length", "must be positive"));
    }
    let ratio = length / spacing;
    let n = ratio.round();
    if (ratio - n).abs() > T::lit(1e-6) * n.max(T::one()) || n < T::one() {
        return Err(invalid(
            "spacing",
            format!("length {length} is not an integer multiple of {spacing}"),
        ));
    }
    Ok(n.to_usize().unwrap_or(0))
}

/// Synthesizes a class-style road profile with the default band.
pub fn generate_roughness<T: Real>(
    length: T,
    spacing: T,
    coefficient: T,
    seed: u64,
) -> Result<RoughnessProfile<T>> {
    let params = RoughnessParams {
        coefficient,
        seed,
        ..RoughnessParams::default()
    };
    generate_roughness_with(length, spacing, &params)
}

/// Sum of cosines with uniform random phases whose one-sided PSD follows
/// [`displacement_psd`] over the band. The sample mean is removed.
pub fn generate_roughness_with<T: Real>(
    length: T,
    spacing: T,
    params: &RoughnessParams<T>,
) -> Result<RoughnessProfile<T>> {
    let n = grid_intervals(length, spacing)?;
    if !(params.coefficient >= T::zero()) {
        return Err(invalid("coefficient", "must be non-negative"));
    }
    let nyquist = T::lit(0.5) / spacing;
    let lo = params.band_low;
    let hi = match params.band_high {
        Some(h) => h,
        None => T::lit(DEFAULT_BAND_HIGH).min(nyquist),
    };
    if !(lo > T::zero()) || !(hi > lo) {
        return Err(invalid("band", format!("need 0 < low < high, got [{lo}, {hi}]")));
    }
    if hi > nyquist * (T::one() + T::lit(1e-9)) {
        return Err(invalid(
            "band_high",
            format!("{hi} cycles/m exceeds the grid Nyquist frequency {nyquist}"),
        ));
    }

    let positions: Vec<T> = (0..=n).map(|i| spacing * T::from_usize_lossy(i)).collect();
    let mut elevation = vec![T::zero(); n + 1];
    let mut slope = vec![T::zero(); n + 1];

    if params.coefficient > T::zero() {
        let comps = ((hi - lo) * length).ceil().to_usize().unwrap_or(0).max(MIN_COMPONENTS);
        let dn = (hi - lo) / T::from_usize_lossy(comps);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let two = T::lit(2.0);
        for c in 0..comps {
            let freq = lo + (T::from_usize_lossy(c) + T::lit(0.5)) * dn;
            let amp = (two * displacement_psd(params.coefficient, freq) * dn).sqrt();
            let phase = T::lit(rng.random::<f64>()) * T::TAU();
            let k = T::TAU() * freq;
            for (j, &x) in positions.iter().enumerate() {
                let (s, co) = (k * x + phase).sin_cos();
                elevation[j] += amp * co;
                slope[j] -= amp * k * s;
            }
        }
        let mean = elevation.iter().copied().sum::<T>() / T::from_usize_lossy(n + 1);
        for z in &mut elevation {
            *z -= mean;
        }
    }

    Ok(RoughnessProfile {
        sample_positions: positions,
        elevation,
        slope,
        spacing,
        coefficient: params.coefficient,
        seed: params.seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrafficParams<T = f64> {
    pub n_vehicles: usize,
    /// Fraction of interior nodes loaded in each time step.
    pub density: T,
    pub seed: u64,
}

impl<T: Real> Default for TrafficParams<T> {
    fn default() -> Self {
        Self {
            n_vehicles: 0,
            density: T::lit(DEFAULT_TRAFFIC_DENSITY),
            seed: 2,
        }
    }
}

/// Sparse `steps × node_count` matrix of nodal forces (N, downward negative).
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficLoadMatrix<T = f64> {
    rows: Vec<Vec<(usize, T)>>,
    pub node_count: usize,
    pub time_step: T,
    pub vehicle_count_equivalent: usize,
    pub density: T,
    pub seed: u64,
}

impl<T: Real> TrafficLoadMatrix<T> {
    pub fn from_rows(
        rows: Vec<Vec<(usize, T)>>,
        node_count: usize,
        time_step: T,
        vehicle_count_equivalent: usize,
        density: T,
        seed: u64,
    ) -> Result<Self> {
        for row in &rows {
            if let Some(&(node, _)) = row.iter().find(|(n, _)| *n == 0 || *n + 1 >= node_count) {
                return Err(invalid("traffic", format!("load on non-interior node {node}")));
            }
        }
        Ok(Self {
            rows,
            node_count,
            time_step,
            vehicle_count_equivalent,
            density,
            seed,
        })
    }

    pub fn zeros(steps: usize, node_count: usize, time_step: T) -> Self {
        Self {
            rows: vec![Vec::new(); steps],
            node_count,
            time_step,
            vehicle_count_equivalent: 0,
            density: T::zero(),
            seed: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    /// Nonzero `(node, force)` entries of a row, sorted by node.
    pub fn row(&self, step: usize) -> &[(usize, T)] {
        &self.rows[step]
    }

    pub fn get(&self, step: usize, node: usize) -> T {
        self.rows[step]
            .iter()
            .find(|(n, _)| *n == node)
            .map_or(T::zero(), |&(_, v)| v)
    }

    pub fn row_abs_sum(&self, step: usize) -> T {
        self.rows[step].iter().map(|&(_, v)| v.abs()).sum()
    }

    pub fn nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Target absolute row sum `n·2000·g` (N).
pub fn traffic_row_total<T: Real>(n_vehicles: usize) -> T {
    T::from_usize_lossy(n_vehicles) * T::lit(AVERAGE_VEHICLE_MASS * GRAVITY)
}

/// Random sparse traffic loading. Each row loads `⌈density·(N−2)⌉` distinct
/// interior nodes with uniform weights rescaled to the exact row total.
pub fn generate_traffic<T: Real>(
    duration: T,
    time_step: T,
    node_count: usize,
    n_vehicles: usize,
    density: T,
    seed: u64,
) -> Result<TrafficLoadMatrix<T>> {
    if !(time_step > T::zero()) {
        return Err(invalid("time_step", "must be positive"));
    }
    if !(duration >= T::zero()) {
        return Err(invalid("duration", "must be non-negative"));
    }
    if !(density > T::zero() && density <= T::one()) {
        return Err(invalid("density", format!("must lie in (0, 1], got {density}")));
    }
    if node_count < 3 {
        return Err(invalid("node_count", "need at least one interior node"));
    }
    let steps = (duration / time_step).round().to_usize().unwrap_or(0) + 1;
    let interior = node_count - 2;
    let active = (density * T::from_usize_lossy(interior))
        .ceil()
        .to_usize()
        .unwrap_or(0)
        .min(interior);
    if n_vehicles > 0 && active == 0 {
        return Err(invalid("density", "no interior node would carry load"));
    }
    let mut matrix = TrafficLoadMatrix {
        rows: vec![Vec::new(); steps],
        node_count,
        time_step,
        vehicle_count_equivalent: n_vehicles,
        density,
        seed,
    };
    if n_vehicles == 0 {
        return Ok(matrix);
    }
    let total = traffic_row_total::<T>(n_vehicles);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for row in &mut matrix.rows {
        let mut nodes: Vec<usize> = index::sample(&mut rng, interior, active)
            .into_iter()
            .map(|i| i + 1)
            .collect();
        nodes.sort_unstable();
        // (0, 1] so the row weight can never vanish.
        let weights: Vec<f64> = (0..active).map(|_| 1.0 - rng.random::<f64>()).collect();
        let sum: f64 = weights.iter().sum();
        *row = nodes
            .into_iter()
            .zip(weights)
            .map(|(node, w)| (node, -total * T::lit(w / sum)))
            .collect();
    }
    Ok(matrix)
}
