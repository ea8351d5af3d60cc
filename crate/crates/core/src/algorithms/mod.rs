//! Kernel bandit algorithms for delayed feedback.
//!
//! * [`run_bpe_delay`]: batch pure exploration with rounds padded by the
//!   delay bound `u_T(δ)`; eliminations use only feedback from the current
//!   round that arrived before the round ended.
//! * [`run_bpe`]: the same machinery with `u = 0`.
//! * [`run_gp_ucb_delayed`]: GP-UCB on whatever feedback has arrived.
//! * [`run_gp_ucb_sdf`]: GP-UCB with pending observations imputed by the
//!   known minimum of the objective. The original method's width schedule
//!   is not reproduced; it shares the width of [`run_gp_ucb_delayed`].

mod elimination;
mod schedule;
mod ucb;

use std::fmt;
use std::str::FromStr;

pub use elimination::{
    acquire_round, close_round, run_bpe, run_bpe_delay, run_elimination, EliminationRule, RoundClose,
    RoundPlan,
};
pub use schedule::{build_schedule, RoundSchedule};
pub use ucb::{run_gp_ucb_delayed, run_gp_ucb_sdf, ucb_beta, ImputedPosterior};

use crate::confidence::{ConfidenceParams, DelayParams};
use crate::environment::DelayedEnvironment;
use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::trace::RunTrace;

/// Which confidence intervals close a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IntervalMode {
    /// `μ̃ ± β̃ σ̃` with a union bound over `4R|X|`.
    #[default]
    Finite,
    /// `μ̃ ± (2/q_r + β′ (σ̃ + 2/√q_r))` with `β′` at level `δ/4R`.
    Continuous,
}

impl FromStr for IntervalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "finite" => Ok(Self::Finite),
            "continuous" => Ok(Self::Continuous),
            other => Err(invalid(format!("unknown interval mode `{other}`"))),
        }
    }
}

/// Everything an algorithm needs besides the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct BanditParams {
    pub kernel: KernelSpec,
    pub horizon: u64,
    pub confidence: ConfidenceParams,
    /// Declared delay parameters; `None` means feedback is known to be
    /// immediate and rounds are not padded.
    pub delay: Option<DelayParams>,
    pub intervals: IntervalMode,
}

impl BanditParams {
    /// Parameters matched to an environment: `σ` is the environment's noise
    /// scale, `λ = σ`, `c = 1`, and the delay declaration is taken from the
    /// environment's delay model.
    pub fn for_environment(
        env: &DelayedEnvironment,
        kernel: KernelSpec,
        horizon: u64,
        c_k: f64,
        delta: f64,
    ) -> Result<Self> {
        let domain = env.domain();
        let sigma = env.noise_sigma();
        let params = Self {
            kernel,
            horizon,
            confidence: ConfidenceParams {
                c_k,
                sigma,
                lambda: sigma,
                delta,
                domain_card: domain.len(),
                dim: domain.dim(),
                disc_c: 1.0,
                k_max: kernel.k_max(domain.points()),
            },
            delay: env.delay().params().copied(),
            intervals: IntervalMode::Finite,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.confidence.lambda = lambda;
        self
    }

    pub fn with_intervals(mut self, mode: IntervalMode) -> Self {
        self.intervals = mode;
        self
    }

    pub fn lambda(&self) -> f64 {
        self.confidence.lambda
    }

    pub fn delta(&self) -> f64 {
        self.confidence.delta
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(invalid("horizon T must be at least 1"));
        }
        self.confidence.validate()
    }
}

/// Algorithm selector; string forms are `bpe_delay`, `bpe`,
/// `gp_ucb_delayed` and `gp_ucb_sdf`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    BpeDelay,
    Bpe,
    GpUcbDelayed,
    GpUcbSdf,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Self::BpeDelay, Self::Bpe, Self::GpUcbDelayed, Self::GpUcbSdf];

    pub fn name(self) -> &'static str {
        match self {
            Self::BpeDelay => "bpe_delay",
            Self::Bpe => "bpe",
            Self::GpUcbDelayed => "gp_ucb_delayed",
            Self::GpUcbSdf => "gp_ucb_sdf",
        }
    }

    /// Runs on a fresh environment. GP-UCB-SDF imputes the environment's
    /// true minimum, which the simulator knows.
    pub fn run(self, env: &mut DelayedEnvironment, params: &BanditParams) -> Result<RunTrace> {
        match self {
            Self::BpeDelay => run_bpe_delay(env, params),
            Self::Bpe => run_bpe(env, params),
            Self::GpUcbDelayed => run_gp_ucb_delayed(env, params),
            Self::GpUcbSdf => {
                let f_min = env.stats().min;
                run_gp_ucb_sdf(env, params, f_min)
            }
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        Self::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                invalid(format!(
                    "unknown algorithm `{s}` (expected bpe_delay, bpe, gp_ucb_delayed or gp_ucb_sdf)"
                ))
            })
    }
}

/// Index of the largest score; ties go to the lowest index.
pub(crate) fn argmax(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        match best {
            Some((_, b)) if !(s > b) => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}
