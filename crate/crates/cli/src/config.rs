//! Sectioned TOML run configuration. Every field has a default, so an empty file is valid.

use serde::{Deserialize, Serialize};
use vbi_core::analysis::DEFAULT_FREQUENCY_CUTOFF;
use vbi_core::excitation::{
    RoughnessParams, TrafficParams, CLASS_A_COEFFICIENT, DEFAULT_BAND_LOW, DEFAULT_TRAFFIC_DENSITY,
};
use vbi_core::integrators::RkTolerances;
use vbi_core::model::{
    BridgeSpec, DEFAULT_DAMPING_RATIO, DEFAULT_NODE_SPACING, STEEL_DENSITY, STEEL_ELASTIC_MODULUS,
};
use vbi_core::simulators::{ScenarioConfig, DEFAULT_CONVERGENCE_THRESHOLD, DEFAULT_MAX_ITERATIONS};
use vbi_core::theory::SweepConfig;
use vbi_core::validation::ValidationOptions;
use vbi_core::vehicle::{QuarterCarSpec, DEFAULT_SPEED};
use vbi_core::VbiError;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bridge: BridgeSection,
    pub vehicle: VehicleSection,
    pub traffic: TrafficSection,
    pub roughness: RoughnessSection,
    pub simulation: SimulationSection,
    pub compare: CompareSection,
    pub benchmark: BenchmarkSection,
    pub theory: SweepConfig<f64>,
    pub validate: ValidateSection,
}

/// Material and discretization shared by every bridge; `span` is used by `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeSection {
    pub span: f64,
    pub node_spacing: f64,
    pub elastic_modulus: f64,
    pub mass_density: f64,
    pub damping_ratio: f64,
    pub damping_calibration_modes: (usize, usize),
}

impl Default for BridgeSection {
    fn default() -> Self {
        Self {
            span: 50.0,
            node_spacing: DEFAULT_NODE_SPACING,
            elastic_modulus: STEEL_ELASTIC_MODULUS,
            mass_density: STEEL_DENSITY,
            damping_ratio: DEFAULT_DAMPING_RATIO,
            damping_calibration_modes: (1, 2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleSection {
    pub preset: String,
    /// Multiplies all masses, stiffnesses and dampings of the preset.
    pub scale: f64,
    pub speed: f64,
}

impl Default for VehicleSection {
    fn default() -> Self {
        Self { preset: "truck".into(), scale: 1.0, speed: DEFAULT_SPEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficSection {
    pub n_vehicles: usize,
    pub density: f64,
    pub seed: u64,
}

impl Default for TrafficSection {
    fn default() -> Self {
        Self { n_vehicles: 10, density: DEFAULT_TRAFFIC_DENSITY, seed: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoughnessSection {
    pub coefficient: f64,
    pub seed: u64,
    pub band_low: f64,
    /// Omitted means min(10 cycles/m, grid Nyquist).
    pub band_high: Option<f64>,
}

impl Default for RoughnessSection {
    fn default() -> Self {
        Self { coefficient: CLASS_A_COEFFICIENT, seed: 1, band_low: DEFAULT_BAND_LOW, band_high: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunMode {
    Coupled,
    Decoupled,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub mode: RunMode,
    pub convergence_threshold: f64,
    pub max_iterations_per_step: usize,
    pub strict_paper_mode: bool,
    pub interaction: bool,
    pub rk_relative_tolerance: f64,
    pub rk_absolute_tolerance: f64,
    /// Upper frequency (Hz) of the spectral MSE.
    pub frequency_cutoff: f64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        let rk = RkTolerances::<f64>::default();
        Self {
            mode: RunMode::Both,
            convergence_threshold: DEFAULT_CONVERGENCE_THRESHOLD,
            max_iterations_per_step: DEFAULT_MAX_ITERATIONS,
            strict_paper_mode: false,
            interaction: true,
            rk_relative_tolerance: rk.relative,
            rk_absolute_tolerance: rk.absolute,
            frequency_cutoff: DEFAULT_FREQUENCY_CUTOFF,
        }
    }
}

/// The span × traffic × vehicle grid of the accuracy study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareSection {
    pub spans: Vec<f64>,
    pub n_vehicles: Vec<usize>,
    pub vehicles: Vec<String>,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self {
            spans: vec![15.0, 30.0, 50.0, 100.0, 200.0, 500.0],
            n_vehicles: vec![0, 10, 20, 50],
            vehicles: vec!["commercial".into(), "truck".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSection {
    pub spans: Vec<f64>,
    pub repetitions: usize,
    pub strict_modes: Vec<bool>,
    pub vehicle: String,
    pub n_vehicles: usize,
    /// Overrides `bridge.node_spacing` for the timing runs.
    pub node_spacing: f64,
}

impl Default for BenchmarkSection {
    fn default() -> Self {
        Self {
            spans: vec![15.0, 30.0, 50.0, 100.0, 200.0, 500.0],
            repetitions: 3,
            strict_modes: vec![false, true],
            vehicle: "commercial".into(),
            n_vehicles: 50,
            node_spacing: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub elastic_modulus: f64,
    pub mass_density: f64,
    pub node_spacing: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        let o = ValidationOptions::default();
        Self { elastic_modulus: o.elastic_modulus, mass_density: o.mass_density, node_spacing: o.node_spacing }
    }
}

impl ValidateSection {
    pub fn options(&self) -> ValidationOptions {
        ValidationOptions {
            elastic_modulus: self.elastic_modulus,
            mass_density: self.mass_density,
            node_spacing: self.node_spacing,
        }
    }
}

fn config_err(section: &str, e: VbiError) -> CliError {
    CliError::Config(format!("[{section}] {e}"))
}

fn positive(section: &str, field: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("[{section}] `{field}` must be positive, got {v}")))
    }
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always serializable")
    }

    pub fn seeds(&self) -> Vec<u64> {
        vec![self.roughness.seed, self.traffic.seed]
    }

    /// `--seed` drives both generators: roughness gets `seed`, traffic `seed + 1`.
    pub fn set_seed(&mut self, seed: u64) {
        self.roughness.seed = seed;
        self.traffic.seed = seed.wrapping_add(1);
    }

    pub fn vehicle(&self, preset: &str) -> Result<QuarterCarSpec<f64>, CliError> {
        let mut v = QuarterCarSpec::preset(preset).map_err(|e| config_err("vehicle", e))?;
        positive("vehicle", "scale", self.vehicle.scale)?;
        v = v.scaled(self.vehicle.scale);
        v.speed = self.vehicle.speed;
        v.validate().map_err(|e| config_err("vehicle", e))?;
        Ok(v)
    }

    pub fn bridge(&self, span: f64, node_spacing: f64) -> Result<BridgeSpec<f64>, CliError> {
        let b = self.bridge.clone();
        let spec = BridgeSpec {
            elastic_modulus: b.elastic_modulus,
            mass_density: b.mass_density,
            damping_ratio: b.damping_ratio,
            damping_calibration_modes: b.damping_calibration_modes,
            ..BridgeSpec::reference(span).map_err(|e| config_err("bridge", e))?.with_node_spacing(node_spacing)
        };
        spec.validate().map_err(|e| config_err("bridge", e))?;
        Ok(spec)
    }

    /// Full scenario for one grid cell, validated.
    pub fn scenario(
        &self,
        span: f64,
        node_spacing: f64,
        preset: &str,
        n_vehicles: usize,
    ) -> Result<ScenarioConfig<f64>, CliError> {
        let s = &self.simulation;
        let mut cfg = ScenarioConfig::new(self.bridge(span, node_spacing)?, self.vehicle(preset)?);
        positive("traffic", "density", self.traffic.density)?;
        cfg.traffic = TrafficParams { n_vehicles, density: self.traffic.density, seed: self.traffic.seed };
        positive("roughness", "band_low", self.roughness.band_low)?;
        if let Some(hi) = self.roughness.band_high {
            if hi <= self.roughness.band_low {
                return Err(CliError::Config(format!(
                    "[roughness] `band_high` ({hi}) must exceed `band_low` ({})",
                    self.roughness.band_low
                )));
            }
        }
        if !(self.roughness.coefficient >= 0.0) {
            return Err(CliError::Config("[roughness] `coefficient` must be non-negative".into()));
        }
        cfg.roughness = RoughnessParams {
            coefficient: self.roughness.coefficient,
            seed: self.roughness.seed,
            band_low: self.roughness.band_low,
            band_high: self.roughness.band_high,
        };
        cfg.convergence_threshold = s.convergence_threshold;
        cfg.max_iterations_per_step = s.max_iterations_per_step;
        cfg.strict_paper_mode = s.strict_paper_mode;
        cfg.interaction = s.interaction;
        positive("simulation", "rk_relative_tolerance", s.rk_relative_tolerance)?;
        positive("simulation", "rk_absolute_tolerance", s.rk_absolute_tolerance)?;
        positive("simulation", "frequency_cutoff", s.frequency_cutoff)?;
        cfg.rk_tolerances = RkTolerances { relative: s.rk_relative_tolerance, absolute: s.rk_absolute_tolerance };
        cfg.validate().map_err(|e| config_err("simulation", e))?;
        Ok(cfg)
    }

    pub fn check_theory(&self) -> Result<(), CliError> {
        let t = &self.theory;
        for (name, r) in [("alpha_range", t.alpha_range), ("beta_range", t.beta_range)] {
            // Ranges run stiff → flexible: α grows, β shrinks.
            let ordered = if name == "alpha_range" { r.0 <= r.1 } else { r.0 >= r.1 };
            if !ordered {
                return Err(CliError::Config(format!(
                    "[theory] `{name}` = ({}, {}) runs the wrong way; give (stiff end, flexible end)",
                    r.0, r.1
                )));
            }
        }
        t.validate().map_err(|e| config_err("theory", e))
    }

    pub fn check_compare(&self) -> Result<(), CliError> {
        let c = &self.compare;
        for (field, empty) in
            [("spans", c.spans.is_empty()), ("n_vehicles", c.n_vehicles.is_empty()), ("vehicles", c.vehicles.is_empty())]
        {
            if empty {
                return Err(CliError::Config(format!("[compare] `{field}` is empty")));
            }
        }
        for v in &c.vehicles {
            for &span in &c.spans {
                self.scenario(span, self.bridge.node_spacing, v, 0)?;
            }
        }
        Ok(())
    }

    pub fn check_benchmark(&self) -> Result<(), CliError> {
        let b = &self.benchmark;
        if b.spans.is_empty() {
            return Err(CliError::Config("[benchmark] `spans` is empty".into()));
        }
        if b.strict_modes.is_empty() {
            return Err(CliError::Config("[benchmark] `strict_modes` is empty".into()));
        }
        if b.repetitions < 3 {
            return Err(CliError::Config(format!(
                "[benchmark] `repetitions` must be at least 3, got {}",
                b.repetitions
            )));
        }
        positive("benchmark", "node_spacing", b.node_spacing)?;
        for &span in &b.spans {
            self.scenario(span, b.node_spacing, &b.vehicle, b.n_vehicles)?;
        }
        Ok(())
    }

    pub fn check_validate(&self) -> Result<(), CliError> {
        let v = &self.validate;
        positive("validate", "elastic_modulus", v.elastic_modulus)?;
        positive("validate", "mass_density", v.mass_density)?;
        positive("validate", "node_spacing", v.node_spacing)
    }
}
