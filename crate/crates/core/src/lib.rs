//! Simulation of distributed asynchronous (stochastic) gradient descent with
//! unbounded delays.
//!
//! Asynchrony is represented by a [`Trace`](asynchrony::Trace): the source
//! iteration `s(n)` whose gradient is applied at global iteration `n`, plus a
//! noise seed per update. Every logical run is a pure function of its
//! configuration and trace, so any execution (including one recorded from real
//! threads) can be replayed bit for bit.
//!
//! Modules:
//!
//! * [`objectives`]: stochastic objectives, gradient oracles and the
//!   variational-coherence grid check.
//! * [`geometry`]: feasible sets, Euclidean projection, the energy function and
//!   the mean-field flow.
//! * [`asynchrony`]: step-size schedules, delay models, traces and the
//!   step/delay compatibility check.
//! * [`engine`]: lazy-projection runners driven by traces and a threaded
//!   shared-memory executor that records its own trace.
//! * [`analysis`]: ergodic averages, tail sums, successive-difference ratios and
//!   ensemble summaries.

// `!(a > b)` is used on purpose so that NaN parameters are rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod asynchrony;
pub mod engine;
mod error;
pub mod geometry;
pub mod objectives;
pub mod rng;

pub use error::{Error, Result};
