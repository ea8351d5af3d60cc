//! The delayed-feedback game.
//!
//! A query issued at step `t` yields `y_t = f(X_t) + ε_t` and becomes
//! visible at step `t + τ_t`. [`DelayedEnvironment::collect`] releases every
//! pending observation whose arrival time is at most the current step, so
//! after the query at step `t` the released set is exactly
//! `X̃_t = {X_s : s + τ_s ≤ t}`.

use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal, Poisson};

use crate::confidence::DelayParams;
use crate::domain::Domain;
use crate::error::{invalid, Result};
use crate::rng;
use crate::synth::{function_stats, FunctionStats};
use crate::trace::{RunTrace, StepRecord};

/// Distribution of the integer delays.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayLaw {
    None,
    Constant(u64),
    Poisson(f64),
    /// Number of failures before the first success, mean `(1 − p)/p`.
    Geometric(f64),
}

impl DelayLaw {
    pub fn mean(&self) -> f64 {
        match *self {
            Self::None => 0.0,
            Self::Constant(c) => c as f64,
            Self::Poisson(rate) => rate,
            Self::Geometric(p) => (1.0 - p) / p,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Self::Poisson(rate) if !(rate > 0.0 && rate.is_finite()) => {
                Err(invalid(format!("poisson rate must be positive (got {rate})")))
            }
            Self::Geometric(p) if !(p > 0.0 && p < 1.0) => {
                Err(invalid(format!("geometric p must lie in (0, 1) (got {p})")))
            }
            _ => Ok(()),
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> u64 {
        match *self {
            Self::None => 0,
            Self::Constant(c) => c,
            Self::Poisson(rate) => Poisson::new(rate).expect("validated rate").sample(rng) as u64,
            Self::Geometric(p) => Geometric::new(p).expect("validated p").sample(rng),
        }
    }
}

/// A delay law with the sub-exponential parameters declared for it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayModel {
    law: DelayLaw,
    params: Option<DelayParams>,
}

impl DelayModel {
    /// Known delay-free feedback.
    pub fn none() -> Self {
        Self {
            law: DelayLaw::None,
            params: None,
        }
    }

    /// Builds a model whose declared mean is the law's analytic mean.
    ///
    /// `(ξ, b)` may be omitted only for Poisson(50), where `(9, 1)` is used.
    pub fn new(law: DelayLaw, xi_b: Option<(f64, f64)>) -> Result<Self> {
        law.validate()?;
        if law == DelayLaw::None {
            return Ok(Self::none());
        }
        let (xi, b) = match (xi_b, law) {
            (Some(v), _) => v,
            (None, DelayLaw::Poisson(50.0)) => (9.0, 1.0),
            (None, _) => {
                return Err(invalid(
                    "sub-exponential parameters xi and b must be given for this delay law",
                ))
            }
        };
        Ok(Self {
            law,
            params: Some(DelayParams::new(xi, b, law.mean())?),
        })
    }

    /// Builds a model from fully declared parameters; the declared mean has
    /// to match the law.
    pub fn with_declared(law: DelayLaw, params: DelayParams) -> Result<Self> {
        law.validate()?;
        if law == DelayLaw::None {
            return Err(invalid("a delay-free model takes no delay parameters"));
        }
        if (params.mean_delay - law.mean()).abs() > 1e-12 * law.mean().max(1.0) {
            return Err(invalid(format!(
                "declared mean delay {} does not match the law's mean {}",
                params.mean_delay,
                law.mean()
            )));
        }
        Ok(Self {
            law,
            params: Some(params),
        })
    }

    pub fn law(&self) -> DelayLaw {
        self.law
    }

    /// Declared parameters; `None` for delay-free feedback.
    pub fn params(&self) -> Option<&DelayParams> {
        self.params.as_ref()
    }

    pub fn mean(&self) -> f64 {
        self.law.mean()
    }
}

/// One observation and its timing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub issue_time: u64,
    pub arrival_time: u64,
    pub point_index: usize,
    pub value: f64,
}

/// Observations waiting for their arrival time, kept in issue order.
#[derive(Debug, Clone, Default)]
pub struct PendingFeedback {
    entries: Vec<Feedback>,
}

impl PendingFeedback {
    pub fn push(&mut self, fb: Feedback) {
        debug_assert!(fb.arrival_time >= fb.issue_time);
        self.entries.push(fb);
    }

    /// Removes and returns every entry with `arrival_time <= now`.
    pub fn release(&mut self, now: u64) -> Vec<Feedback> {
        let mut out = Vec::new();
        self.entries.retain(|fb| {
            if fb.arrival_time <= now {
                out.push(*fb);
                false
            } else {
                true
            }
        });
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Objective on a finite domain with Gaussian noise and random delays.
#[derive(Debug, Clone)]
pub struct DelayedEnvironment {
    domain: Arc<Domain>,
    truth: Arc<[f64]>,
    stats: FunctionStats,
    noise: Option<Normal<f64>>,
    noise_sigma: f64,
    delay: DelayModel,
    seed: u64,
    clock: u64,
    queue: PendingFeedback,
    steps: Vec<StepRecord>,
}

impl DelayedEnvironment {
    pub fn new(
        domain: Arc<Domain>,
        truth: Arc<[f64]>,
        noise_sigma: f64,
        delay: DelayModel,
        seed: u64,
    ) -> Result<Self> {
        if truth.len() != domain.len() {
            return Err(invalid(format!(
                "{} objective values for {} domain points",
                truth.len(),
                domain.len()
            )));
        }
        if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
            return Err(invalid(format!("noise_sigma must be non-negative (got {noise_sigma})")));
        }
        let noise = if noise_sigma > 0.0 {
            Some(Normal::new(0.0, noise_sigma).map_err(|e| invalid(e.to_string()))?)
        } else {
            None
        };
        Ok(Self {
            stats: function_stats(&truth),
            domain,
            truth,
            noise,
            noise_sigma,
            delay,
            seed,
            clock: 0,
            queue: PendingFeedback::default(),
            steps: Vec::new(),
        })
    }

    /// Issues a query at the next time step and returns its arrival time.
    pub fn query(&mut self, point_index: usize) -> Result<u64> {
        if point_index >= self.domain.len() {
            return Err(invalid(format!(
                "point index {point_index} out of range ({} points)",
                self.domain.len()
            )));
        }
        self.clock += 1;
        let t = self.clock;
        let eps = match &self.noise {
            Some(n) => n.sample(&mut rng::step_stream(self.seed, rng::NOISE_STREAM, t)),
            None => 0.0,
        };
        let tau = self
            .delay
            .law
            .sample(&mut rng::step_stream(self.seed, rng::DELAY_STREAM, t));
        let arrival = t + tau;
        let f = self.truth[point_index];
        self.queue.push(Feedback {
            issue_time: t,
            arrival_time: arrival,
            point_index,
            value: f + eps,
        });
        self.steps.push(StepRecord {
            t,
            round: 0,
            k: t,
            chosen: point_index,
            inst_regret: self.stats.max - f,
            arrival,
        });
        Ok(arrival)
    }

    /// Releases every observation that has arrived by the current step, in
    /// issue order.
    pub fn collect(&mut self) -> Vec<Feedback> {
        self.queue.release(self.clock)
    }

    /// Steps so far with their instantaneous regrets.
    pub fn regret_trace(&self) -> RunTrace {
        RunTrace {
            steps: self.steps.clone(),
            rounds: Vec::new(),
            final_candidates: None,
            optimum_index: self.stats.argmax,
        }
    }

    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn pending(&self) -> usize {
        self.queue.len()
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn shared_domain(&self) -> &Arc<Domain> {
        &self.domain
    }

    /// Objective values. Algorithms only read these for diagnostics.
    pub fn truth(&self) -> &[f64] {
        &self.truth
    }

    pub fn stats(&self) -> FunctionStats {
        self.stats
    }

    pub fn optimum_index(&self) -> usize {
        self.stats.argmax
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn delay(&self) -> &DelayModel {
        &self.delay
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}
