use log::debug;

use super::{argmax, BanditParams};
use crate::confidence::beta;
use crate::environment::{DelayedEnvironment, Feedback};
use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::posterior::CandidatePosterior;
use crate::trace::RunTrace;

/// `β(δ / (T|X|))`, shared by both UCB baselines.
pub fn ucb_beta(params: &BanditParams) -> f64 {
    let split = params.horizon as f64 * params.confidence.domain_card.max(1) as f64;
    beta(&params.confidence.with_delta(params.delta() / split))
}

fn ucb_pick(post: &CandidatePosterior, beta: f64) -> usize {
    let scores = post
        .tracked_means()
        .iter()
        .zip(post.variances())
        .map(|(m, v)| m + beta * v.sqrt());
    argmax(scores).expect("non-empty domain")
}

fn check_fresh(env: &DelayedEnvironment, params: &BanditParams) -> Result<()> {
    params.validate()?;
    if env.clock() != 0 {
        return Err(invalid("environment has already been queried"));
    }
    Ok(())
}

/// GP-UCB on the observations that have arrived so far.
pub fn run_gp_ucb_delayed(env: &mut DelayedEnvironment, params: &BanditParams) -> Result<RunTrace> {
    check_fresh(env, params)?;
    let beta = ucb_beta(params);
    debug!("gp-ucb (available data): T={} beta={beta:.4}", params.horizon);
    let mut post = CandidatePosterior::new(params.kernel, params.lambda(), &env.domain().to_vecs())?;
    for _ in 0..params.horizon {
        env.query(ucb_pick(&post, beta))?;
        for fb in env.collect() {
            post.observe(fb.point_index, fb.value)?;
        }
    }
    Ok(env.regret_trace())
}

/// Posterior over every selected point, with pending values imputed.
///
/// Selected points enter the factorization when they are chosen; their
/// value is `f_min` until the real observation replaces it.
#[derive(Debug, Clone)]
pub struct ImputedPosterior {
    post: CandidatePosterior,
    issued: Vec<u64>,
    pending: usize,
    f_min: f64,
}

impl ImputedPosterior {
    pub fn new<P: AsRef<[f64]>>(kernel: KernelSpec, lambda: f64, candidates: &[P], f_min: f64) -> Result<Self> {
        if !f_min.is_finite() {
            return Err(invalid("f_min must be finite"));
        }
        Ok(Self {
            post: CandidatePosterior::new(kernel, lambda, candidates)?,
            issued: Vec::new(),
            pending: 0,
            f_min,
        })
    }

    /// Registers the query issued at `issue_time` (strictly increasing).
    pub fn select(&mut self, issue_time: u64, index: usize) -> Result<()> {
        if self.issued.last().is_some_and(|&last| issue_time <= last) {
            return Err(invalid("issue times must increase"));
        }
        self.post.observe(index, self.f_min)?;
        self.issued.push(issue_time);
        self.pending += 1;
        Ok(())
    }

    /// Replaces the imputations of the matching queries with their
    /// observations.
    pub fn arrive(&mut self, feedback: &[Feedback]) -> Result<()> {
        let mut updates = Vec::with_capacity(feedback.len());
        for fb in feedback {
            let slot = self
                .issued
                .binary_search(&fb.issue_time)
                .map_err(|_| invalid(format!("no query was issued at step {}", fb.issue_time)))?;
            if self.post.inputs()[slot] != fb.point_index {
                return Err(invalid("feedback does not match the selected point"));
            }
            updates.push((slot, fb.value));
        }
        self.post.set_values(&updates)?;
        self.pending -= updates.len();
        Ok(())
    }

    pub fn means(&self) -> &[f64] {
        self.post.tracked_means()
    }

    pub fn variances(&self) -> &[f64] {
        self.post.variances()
    }

    /// Current values: observations where available, `f_min` elsewhere.
    pub fn values(&self) -> &[f64] {
        self.post.tracked_values()
    }

    /// Selected candidate indices in selection order.
    pub fn inputs(&self) -> &[usize] {
        self.post.inputs()
    }

    pub fn pending(&self) -> usize {
        self.pending
    }
}

/// GP-UCB with pending observations imputed by `f_min`.
pub fn run_gp_ucb_sdf(env: &mut DelayedEnvironment, params: &BanditParams, f_min: f64) -> Result<RunTrace> {
    check_fresh(env, params)?;
    let min_truth = env.stats().min;
    if f_min > min_truth {
        return Err(invalid(format!(
            "f_min = {f_min} exceeds the objective's minimum {min_truth}"
        )));
    }
    let beta = ucb_beta(params);
    debug!("gp-ucb (imputed): T={} beta={beta:.4} f_min={f_min:.4}", params.horizon);
    let mut post = ImputedPosterior::new(params.kernel, params.lambda(), &env.domain().to_vecs(), f_min)?;
    for _ in 0..params.horizon {
        let idx = ucb_pick(&post.post, beta);
        env.query(idx)?;
        post.select(env.clock(), idx)?;
        post.arrive(&env.collect())?;
    }
    Ok(env.regret_trace())
}
