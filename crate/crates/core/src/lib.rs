//! Steady-state analysis and Monte Carlo simulation of adapt-then-combine
//! diffusion networks whose agents exchange one-bit messages while solving a
//! binary hypothesis test.
//!
//! The state of every agent splits into a *continuous* component, driven by
//! the agent's own observations, and a *discrete* component, driven by the
//! one-bit decisions received from its neighbors:
//!
//! * [`continuous`] inverts the log-characteristic function of the continuous
//!   component with a truncated Gil-Pelaez style series;
//! * [`discrete`] approximates the discrete component with first/second-order
//!   asymmetric Bernoulli convolution tables and convolves the per-neighbor
//!   PMFs;
//! * [`steady`] mixes the two into the steady-state CDF, or falls back to the
//!   Gaussian limit when the memory factor approaches one;
//! * [`detection`] turns a pair of steady-state CDFs into false-alarm /
//!   detection probabilities and ROC curves;
//! * [`sim`] runs the recursions themselves so every analytical result can be
//!   checked against simulation.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
#![warn(missing_debug_implementations)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod continuous;
pub mod detection;
pub mod discrete;
mod error;
pub mod math;
pub mod model;
pub mod network;
pub mod sim;
pub mod stats;
pub mod steady;

pub use error::{Error, Result};
pub use model::{ExponentialModel, GaussianModel, Hypothesis, Model, ObservationModel};
pub use network::{NetworkSpec, NodeParams, Topology};
