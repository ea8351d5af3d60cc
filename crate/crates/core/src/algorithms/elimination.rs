use log::debug;

use super::schedule::build_schedule;
use super::{argmax, BanditParams, IntervalMode};
use crate::confidence::{beta_finite, beta_prime, interval_continuous, interval_finite, u_t, Interval};
use crate::diagnostics::{gain_from_variances, variance_sum_bound_holds};
use crate::domain::Domain;
use crate::environment::{DelayedEnvironment, Feedback};
use crate::error::{invalid, Result};
use crate::kernels::KernelSpec;
use crate::posterior::{CandidatePosterior, Predictor};
use crate::trace::{RoundRecord, RunTrace};

/// Points picked during one round by maximum-variance acquisition.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundPlan {
    /// Domain indices in query order.
    pub picks: Vec<usize>,
    /// `σ²_{k−1,r}(X_{k,r})` for each pick.
    pub pick_variances: Vec<f64>,
    /// Candidate variances (aligned with the candidate list) after the
    /// requested number of picks.
    pub snapshot: Option<Vec<f64>>,
}

/// Max-variance acquisition over `candidates` on a fresh posterior.
///
/// Picks never depend on observed values, so a whole round can be planned
/// up front. Ties go to the lowest candidate position.
pub fn acquire_round(
    kernel: KernelSpec,
    lambda: f64,
    domain: &Domain,
    candidates: &[usize],
    count: u64,
    snapshot_at: Option<u64>,
) -> Result<RoundPlan> {
    if candidates.is_empty() {
        return Err(invalid("candidate set is empty"));
    }
    let mut post = CandidatePosterior::new(kernel, lambda, &domain.select(candidates))?;
    let mut plan = RoundPlan {
        picks: Vec::with_capacity(count as usize),
        pick_variances: Vec::with_capacity(count as usize),
        snapshot: None,
    };
    for k in 0..count {
        if snapshot_at == Some(k) {
            plan.snapshot = Some(post.variances().to_vec());
        }
        let j = argmax(post.variances().iter().copied()).expect("non-empty candidates");
        plan.pick_variances.push(post.variance(j));
        post.add_candidate(j)?;
        plan.picks.push(candidates[j]);
    }
    if snapshot_at == Some(count) {
        plan.snapshot = Some(post.variances().to_vec());
    }
    Ok(plan)
}

/// How intervals are formed at round close.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EliminationRule {
    Finite { beta: f64 },
    Continuous { beta_prime: f64, q: u64 },
}

impl EliminationRule {
    pub fn for_round(params: &BanditParams, rounds: usize, q: u64) -> Self {
        match params.intervals {
            IntervalMode::Finite => Self::Finite {
                beta: beta_finite(&params.confidence, rounds),
            },
            IntervalMode::Continuous => {
                let level = params.confidence.with_delta(params.delta() / (4.0 * rounds.max(1) as f64));
                Self::Continuous {
                    beta_prime: beta_prime(&level, q as usize),
                    q,
                }
            }
        }
    }

    pub fn beta(&self) -> f64 {
        match *self {
            Self::Finite { beta } => beta,
            Self::Continuous { beta_prime, .. } => beta_prime,
        }
    }

    pub fn interval(&self, mu: f64, sd: f64) -> Result<Interval> {
        match *self {
            Self::Finite { beta } => interval_finite(mu, sd, beta),
            Self::Continuous { beta_prime, q } => interval_continuous(mu, sd, beta_prime, q),
        }
    }
}

/// Outcome of a round's elimination step.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundClose {
    pub survivors: Vec<usize>,
    /// Intervals aligned with the candidate list.
    pub intervals: Vec<Interval>,
    /// Posterior standard deviations aligned with the candidate list.
    pub sds: Vec<f64>,
    /// True when nothing arrived and elimination was skipped.
    pub skipped: bool,
}

/// Fits a predictor on this round's arrived feedback and keeps every
/// candidate whose upper bound reaches the best lower bound.
pub fn close_round(
    kernel: KernelSpec,
    lambda: f64,
    domain: &Domain,
    candidates: &[usize],
    arrived: &[Feedback],
    rule: EliminationRule,
) -> Result<RoundClose> {
    if candidates.is_empty() {
        return Err(invalid("candidate set is empty"));
    }
    let inputs: Vec<&[f64]> = arrived.iter().map(|fb| domain.point(fb.point_index)).collect();
    let values: Vec<f64> = arrived.iter().map(|fb| fb.value).collect();
    let pred = Predictor::fit(kernel, lambda, &inputs, &values)?;
    let mut intervals = Vec::with_capacity(candidates.len());
    let mut sds = Vec::with_capacity(candidates.len());
    for &c in candidates {
        let (mu, sd) = pred.predict(domain.point(c));
        intervals.push(rule.interval(mu, sd)?);
        sds.push(sd);
    }
    if arrived.is_empty() {
        return Ok(RoundClose {
            survivors: candidates.to_vec(),
            intervals,
            sds,
            skipped: true,
        });
    }
    let best_lower = intervals.iter().map(|i| i.lower).fold(f64::NEG_INFINITY, f64::max);
    let survivors = candidates
        .iter()
        .zip(&intervals)
        .filter(|(_, i)| i.upper >= best_lower)
        .map(|(&c, _)| c)
        .collect();
    Ok(RoundClose {
        survivors,
        intervals,
        sds,
        skipped: false,
    })
}

/// BPE-Delay: rounds padded by `u_T(δ)` from the declared delay parameters.
pub fn run_bpe_delay(env: &mut DelayedEnvironment, params: &BanditParams) -> Result<RunTrace> {
    let u = u_t(params.horizon, params.delta(), params.delay.as_ref());
    run_elimination(env, params, u)
}

/// Batch pure exploration without padding.
pub fn run_bpe(env: &mut DelayedEnvironment, params: &BanditParams) -> Result<RunTrace> {
    run_elimination(env, params, 0.0)
}

/// The shared round loop with an explicit padding `u`.
pub fn run_elimination(env: &mut DelayedEnvironment, params: &BanditParams, u: f64) -> Result<RunTrace> {
    params.validate()?;
    if env.clock() != 0 {
        return Err(invalid("environment has already been queried"));
    }
    let schedule = build_schedule(params.horizon, u)?;
    let rounds = schedule.rounds();
    let lambda = params.lambda();
    let domain = env.shared_domain().clone();
    let truth: Vec<f64> = env.truth().to_vec();
    let optimum = env.optimum_index();
    debug!(
        "elimination run: T={} u={u:.3} R={rounds} |X|={}",
        params.horizon,
        domain.len()
    );

    let mut candidates: Vec<usize> = (0..domain.len()).collect();
    let mut labels = Vec::with_capacity(params.horizon as usize);
    let mut records = Vec::with_capacity(rounds);
    for r in 0..rounds {
        let q = schedule.q[r];
        let len = schedule.t[r];
        let q_eff = q.min(len);
        let plan = acquire_round(params.kernel, lambda, &domain, &candidates, len, Some(q_eff))?;
        let start = env.clock() + 1;
        let mut arrived = Vec::new();
        for (k, &idx) in plan.picks.iter().enumerate() {
            env.query(idx)?;
            labels.push((r + 1, k as u64 + 1));
            arrived.extend(env.collect().into_iter().filter(|fb| fb.issue_time >= start));
        }
        arrived.sort_by_key(|fb| fb.issue_time);

        let rule = EliminationRule::for_round(params, rounds, q);
        let close = close_round(params.kernel, lambda, &domain, &candidates, &arrived, rule)?;

        let head = &plan.pick_variances[..q_eff as usize];
        let variance_sum: f64 = head.iter().sum();
        let k_max = candidates
            .iter()
            .map(|&c| params.kernel.diag(domain.point(c)))
            .fold(0.0, f64::max);
        let first_q_arrived = (start..start + q_eff).all(|s| arrived.iter().any(|fb| fb.issue_time == s));
        let variance_bound_holds = match (&plan.snapshot, first_q_arrived) {
            (Some(snap), true) => Some(
                close
                    .sds
                    .iter()
                    .zip(snap)
                    .all(|(sd, v)| sd * sd <= v + 1e-9 * v.abs().max(1.0)),
            ),
            _ => None,
        };
        let record = RoundRecord {
            round: r + 1,
            q,
            length: len,
            candidates: candidates.len(),
            survivors: close.survivors.len(),
            arrived: arrived.len(),
            beta: rule.beta(),
            max_sd: close.sds.iter().copied().fold(0.0, f64::max),
            variance_sum,
            info_gain: gain_from_variances(head, lambda),
            variance_sum_bound_holds: variance_sum_bound_holds(head, lambda, k_max),
            variance_bound_holds,
            optimum_in_candidates: candidates.contains(&optimum),
            optimum_retained: close.survivors.contains(&optimum),
            intervals_cover_truth: candidates
                .iter()
                .zip(&close.intervals)
                .all(|(&c, i)| i.contains(truth[c])),
        };
        debug!(
            "round {}: |X_r|={} arrived={} survivors={} skipped={}",
            record.round, record.candidates, record.arrived, record.survivors, close.skipped
        );
        records.push(record);
        candidates = close.survivors;
    }

    let mut trace = env.regret_trace();
    for (step, (round, k)) in trace.steps.iter_mut().zip(labels) {
        step.round = round;
        step.k = k;
    }
    trace.rounds = records;
    trace.final_candidates = Some(candidates);
    Ok(trace)
}
