//! Exact and asymptotic privacy accounting for the shuffle model with a
//! fixed finite-output local randomizer.
//!
//! The crate is organized bottom-up:
//!
//! - [`channels`]: the local randomizer `(W0, W1)` and its score statistics.
//! - [`simplex_linalg`]: fixed-composition covariance and the Fisher constant.
//! - [`exact_dist`]: exact histogram laws, likelihood-ratio atoms, privacy and
//!   trade-off curves, divergences.
//! - [`asymptotics`]: Gaussian-DP parameters and closed-form expansions.
//! - [`bounds`]: Chernoff and Hoeffding upper bounds on the privacy curve.
//! - [`multimessage`]: unbundled m-message shuffling.
//! - [`montecarlo`]: sampling, Kolmogorov distances, rate fits, and the
//!   randomized-response frequency estimator.
//! - [`io`], [`svg`], [`cli`]: file formats and the command-line front end.
//!
//! Runnable walkthroughs live under `examples/` (`cargo run --example ...`).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bounds;
pub mod channels;
pub mod cli;
mod error;
pub mod exact_dist;
pub mod io;
pub mod montecarlo;
pub mod multimessage;
pub mod normal;
pub mod simplex_linalg;
pub mod svg;

pub use channels::{rr_channel, score_stats, Channel, ScoreStats, SupportClass};
pub use error::{Error, Result};
pub use exact_dist::{Composition, LrAtomization, PrivacyCurve, Sidedness, TradeoffCurve};
