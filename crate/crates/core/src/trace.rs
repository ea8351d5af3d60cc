//! Per-step and per-round records of a run.

/// One query. `round` is 0 for algorithms that do not work in rounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: u64,
    pub round: usize,
    pub k: u64,
    pub chosen: usize,
    pub inst_regret: f64,
    /// Time at which this query's feedback becomes available (may exceed the horizon).
    pub arrival: u64,
}

impl StepRecord {
    pub fn delay(&self) -> u64 {
        self.arrival - self.t
    }
}

/// Round-level bookkeeping and runtime diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: usize,
    pub q: u64,
    pub length: u64,
    /// `|X_r|` when the round started.
    pub candidates: usize,
    /// `|X_{r+1}|` after elimination.
    pub survivors: usize,
    /// Round points whose feedback arrived by the end of the round.
    pub arrived: usize,
    /// Width multiplier used at round close.
    pub beta: f64,
    /// `max σ̃` over the candidates at round close.
    pub max_sd: f64,
    /// `Σ_{k ≤ q_r} σ²_{k−1,r}(X_{k,r})`.
    pub variance_sum: f64,
    /// Realized information gain of the same points.
    pub info_gain: f64,
    /// `variance_sum ≤ c₁ · info_gain`.
    pub variance_sum_bound_holds: bool,
    /// `σ̃²_{t_r} ≤ σ²_{q_r}` on every candidate; `None` unless all of the
    /// first `q_r` feedbacks arrived in time.
    pub variance_bound_holds: Option<bool>,
    /// Whether the maximizer was in `X_r` when the round started.
    pub optimum_in_candidates: bool,
    /// Whether the maximizer survived this round's elimination.
    pub optimum_retained: bool,
    /// Whether every interval built at round close contained the truth.
    pub intervals_cover_truth: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunTrace {
    pub steps: Vec<StepRecord>,
    pub rounds: Vec<RoundRecord>,
    /// Surviving candidates at the end of an elimination run.
    pub final_candidates: Option<Vec<usize>>,
    pub optimum_index: usize,
}

impl RunTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn instantaneous_regret(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.inst_regret).collect()
    }

    /// Prefix sums of the instantaneous regret.
    pub fn cumulative_regret(&self) -> Vec<f64> {
        self.steps
            .iter()
            .scan(0.0, |acc, s| {
                *acc += s.inst_regret;
                Some(*acc)
            })
            .collect()
    }

    pub fn final_regret(&self) -> f64 {
        self.steps.iter().map(|s| s.inst_regret).sum()
    }

    pub fn optimum_retained(&self) -> bool {
        self.rounds.iter().all(|r| r.optimum_retained)
    }
}
