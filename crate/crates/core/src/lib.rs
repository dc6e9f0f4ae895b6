//! Vehicle–bridge interaction (VBI) simulation.
//!
//! The crate provides two end-to-end drivers for a quarter-car crossing a
//! simply-supported beam bridge under random traffic:
//!
//! * [`simulators::simulate_coupled`] iterates each time step until the
//!   tire–deck displacement is compatible, re-solving the bridge each time.
//! * [`simulators::simulate_decoupled`] solves the bridge once under traffic
//!   and feeds its response, plus road roughness, to the vehicle.
//!
//! Supporting modules cover beam assembly and modal analysis ([`model`]),
//! roughness and traffic generation ([`excitation`]), Newmark-β and
//! Dormand–Prince integration ([`integrators`]), the quarter-car model
//! ([`vehicle`]), the closed-form 2-DOF analysis ([`theory`]) and accuracy /
//! runtime comparison ([`analysis`]).
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases below are the double-precision instantiations used by the CLI.

// `!(x > 0)` is how NaN gets rejected along with non-positive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod excitation;
pub mod integrators;
pub mod io;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod simulators;
pub mod theory;
pub mod validation;
pub mod vehicle;

pub use error::{Result, VbiError};
pub use scalar::{Real, GRAVITY};

pub type BoxSection64 = model::BoxSection<f64>;
pub type BridgeSpec64 = model::BridgeSpec<f64>;
pub type BeamSystem64 = model::BeamSystem<f64>;
pub type QuarterCarSpec64 = vehicle::QuarterCarSpec<f64>;
pub type RoughnessProfile64 = excitation::RoughnessProfile<f64>;
pub type TrafficLoadMatrix64 = excitation::TrafficLoadMatrix<f64>;
pub type TimeSeriesResult64 = integrators::TimeSeriesResult<f64>;
pub type ScenarioConfig64 = simulators::ScenarioConfig<f64>;
pub type SimulationOutput64 = simulators::SimulationOutput<f64>;
pub type TheoryConfig64 = theory::TheoryConfig<f64>;

pub type BridgeSpec32 = model::BridgeSpec<f32>;
pub type QuarterCarSpec32 = vehicle::QuarterCarSpec<f32>;
pub type TheoryConfig32 = theory::TheoryConfig<f32>;
