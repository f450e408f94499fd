//! Simulation and self-optimizing control of a heaving point-absorber wave
//! energy converter.
//!
//! The crate is organized around the closed loop it simulates:
//!
//! - [`energy_model`]: steady-state response and average extracted power of
//!   the linear plant under harmonic wave and PTO force, with the analytic
//!   optimum of the PTO parameters.
//! - [`wave_field`]: ocean elevation signals — regular waves, piecewise
//!   schedules and seeded irregular spectra.
//! - [`wec_plant`]: time-domain integration of the plant, instantaneous power
//!   and noisy windowed average-power measurements.
//! - [`wave_estimator`]: constrained particle filter over the unknown wave
//!   parameters, with the multi-window cascade and the hypothetical reweight
//!   used for planning.
//! - [`dcee_controller`]: the dual exploration/exploitation controller that
//!   enumerates PTO-profile increments and scores them by expected squared
//!   shortfall plus posterior spread.
//! - [`baselines`]: Bang-Bang switching, a two-gain extremum-seeking
//!   controller and the clairvoyant analytic-optimum controller.
//! - [`config`] / [`harness`]: scenario configuration, the two-time-scale
//!   closed loop, metrics and CSV trace output.
//! - [`validate`]: self-contained verification suites comparing the
//!   closed-form model against the time-domain plant.
//!
//! All numerics are generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! harness and the file formats use `f64`.

pub mod energy_model;
pub mod error;
pub mod scalar;
// modules below are being brought up one by one
pub mod baselines;
pub mod config;
pub mod dcee_controller;
pub mod harness;
pub mod validate;
pub mod wave_estimator;
pub mod wave_field;
pub mod wec_plant;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// Concrete `f64` aliases for the main domain types.
pub type WaveParams64 = energy_model::WaveParams<f64>;
pub type PtoProfile64 = energy_model::PtoProfile<f64>;
pub type WecParams64 = energy_model::WecParams<f64>;
pub type ResponseComponents64 = energy_model::ResponseComponents<f64>;
