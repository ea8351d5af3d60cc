//! Kernel bandits with stochastically delayed feedback.
//!
//! The core pieces are the GP posterior ([`posterior`]), confidence widths
//! and delay bounds ([`confidence`]), a simulated delayed-feedback
//! environment ([`environment`]) and the algorithms in [`algorithms`].
//! [`harness`] drives multi-trial experiments from a config file.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod confidence;
pub mod diagnostics;
pub mod domain;
pub mod environment;
pub mod harness;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod posterior;
pub mod rng;
pub mod synth;
pub mod trace;

pub use algorithms::{Algorithm, BanditParams, IntervalMode, RoundSchedule};
pub use confidence::{ConfidenceParams, DelayParams, Interval};
pub use domain::Domain;
pub use environment::{DelayLaw, DelayModel, DelayedEnvironment, Feedback};
pub use error::{Error, Result};
pub use kernels::{KernelFamily, KernelSpec, MaternNu};
pub use posterior::{CandidatePosterior, Predictor, VarianceTracker};
pub use trace::{RoundRecord, RunTrace, StepRecord};
