//! Behavioral simulation of superparamagnetic tunnel junction (SMTJ) delay
//! cells and the temporal-computing samplers built on them.
//!
//! The numeric core is generic over a [`Scalar`] (`f32` or `f64`). Concrete
//! `f64` aliases live at the crate root for the common case.
//!
//! Modules follow the signal chain:
//!
//! * [`device`] - current-tunable exponential switching and telegraph traces
//! * [`frontend`] - current source, hysteresis comparator, and SR latch
//! * [`timing`] - clocked counter measurement of the latched interval
//! * [`temporal`] - edge events, delay cells, inhibit gates, and races
//! * [`samplers`] - Bernoulli bits, Metropolis-Hastings, exponential clocks
//! * [`stats`] - fitting and goodness-of-fit used to verify all of the above

// Negated comparisons are how validation rejects NaN alongside bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod device;
pub mod error;
pub mod frontend;
pub mod rng;
pub mod samplers;
pub mod scalar;
pub mod stats;
pub mod temporal;
pub mod timing;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DeviceParams = device::DeviceParams<f64>;
pub type SwitchingLaw = device::SwitchingLaw<f64>;
pub type DriftModel = device::DriftModel<f64>;
pub type TelegraphTrace = device::TelegraphTrace<f64>;
pub type TransconductanceConfig = frontend::TransconductanceConfig<f64>;
pub type HysteresisConfig = frontend::HysteresisConfig<f64>;
pub type DigitalEdgeTrace = frontend::DigitalEdgeTrace<f64>;
pub type ClockConfig = timing::ClockConfig<f64>;
pub type CountResult = timing::CountResult<f64>;
pub type EdgeEvent = temporal::EdgeEvent<f64>;
pub type RaceOutcome = temporal::RaceOutcome<f64>;
pub type WeightedDie = samplers::WeightedDie<f64>;
pub type IsingProblem = samplers::ising::IsingProblem<f64>;
pub type FitReport = stats::FitReport<f64>;
pub type DriftReport = stats::DriftReport<f64>;

pub use device::MagState;
pub use samplers::ising::SpinState;
