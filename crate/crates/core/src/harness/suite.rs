use std::sync::Arc;

use log::info;
use rayon::prelude::*;

use super::config::{ExperimentConfig, FunctionSource};
use crate::algorithms::{Algorithm, BanditParams};
use crate::domain::{make_grid, Domain};
use crate::environment::DelayedEnvironment;
use crate::error::{invalid, Error, Result};
use crate::synth::{generate_function, load_function_csv};
use crate::trace::RunTrace;

/// The objective shared by every trial and algorithm of a suite.
#[derive(Debug, Clone)]
pub struct SuiteProblem {
    pub domain: Arc<Domain>,
    pub truth: Arc<[f64]>,
    /// RKHS norm bound used for the confidence widths.
    pub c_k: f64,
}

impl SuiteProblem {
    pub fn prepare(config: &ExperimentConfig) -> Result<Self> {
        let (domain, truth, norm) = match &config.function {
            FunctionSource::Generate { options, seed } => {
                let dc = &config.domain;
                let domain = make_grid(dc.dim, dc.resolution, &dc.lower, &dc.upper)?;
                let f = generate_function(config.kernel, &domain, *options, *seed)?;
                let norm = f.rkhs_norm();
                (domain, f.values().to_vec(), Some(norm))
            }
            FunctionSource::File(path) => {
                let (domain, values) = load_function_csv(path)?;
                if domain.dim() != config.kernel.dim() {
                    return Err(Error::Config(format!(
                        "function.path: {}-dimensional points for a {}-dimensional kernel",
                        domain.dim(),
                        config.kernel.dim()
                    )));
                }
                (domain, values, None)
            }
        };
        let c_k = config
            .c_k
            .or(norm)
            .ok_or_else(|| Error::Config("confidence.c_k: required".into()))?;
        Ok(Self {
            domain: Arc::new(domain),
            truth: truth.into(),
            c_k,
        })
    }

    pub fn environment(&self, config: &ExperimentConfig, seed: u64) -> Result<DelayedEnvironment> {
        DelayedEnvironment::new(
            self.domain.clone(),
            self.truth.clone(),
            config.noise_sigma,
            config.delay,
            seed,
        )
    }

    pub fn params(&self, config: &ExperimentConfig, env: &DelayedEnvironment) -> Result<BanditParams> {
        let mut params = BanditParams::for_environment(env, config.kernel, config.horizon, self.c_k, config.delta)?
            .with_intervals(config.intervals);
        params.confidence.disc_c = config.disc_c;
        if let Some(lambda) = config.lambda {
            params = params.with_lambda(lambda);
        }
        Ok(params)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub seed: u64,
    pub trace: RunTrace,
}

/// Mean cumulative regret per step with half a sample standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub algorithm: Algorithm,
    pub trials: usize,
    pub mean: Vec<f64>,
    pub half_std: Vec<f64>,
}

impl AggregateCurve {
    pub fn final_mean(&self) -> f64 {
        self.mean.last().copied().unwrap_or(0.0)
    }
}

/// Averages the cumulative-regret curves of equally long traces.
pub fn aggregate(algorithm: Algorithm, traces: &[&RunTrace]) -> Result<AggregateCurve> {
    let n = traces.len();
    if n == 0 {
        return Err(invalid("cannot aggregate zero traces"));
    }
    let curves: Vec<Vec<f64>> = traces.iter().map(|t| t.cumulative_regret()).collect();
    let len = curves[0].len();
    if curves.iter().any(|c| c.len() != len) {
        return Err(invalid("traces differ in length"));
    }
    let mut mean = vec![0.0; len];
    let mut half_std = vec![0.0; len];
    for t in 0..len {
        let m = curves.iter().map(|c| c[t]).sum::<f64>() / n as f64;
        let var = if n > 1 {
            curves.iter().map(|c| (c[t] - m).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        mean[t] = m;
        half_std[t] = 0.5 * var.sqrt();
    }
    Ok(AggregateCurve {
        algorithm,
        trials: n,
        mean,
        half_std,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteResults {
    pub name: String,
    pub problem: SuiteProblem,
    /// Ordered by algorithm (config order), then trial.
    pub trials: Vec<TrialResult>,
    pub curves: Vec<AggregateCurve>,
}

impl SuiteResults {
    pub fn traces_for(&self, algorithm: Algorithm) -> impl Iterator<Item = &TrialResult> {
        self.trials.iter().filter(move |r| r.algorithm == algorithm)
    }

    pub fn curve(&self, algorithm: Algorithm) -> Option<&AggregateCurve> {
        self.curves.iter().find(|c| c.algorithm == algorithm)
    }

    /// Final cumulative regret of every trial of one algorithm, by trial.
    pub fn final_regrets(&self, algorithm: Algorithm) -> Vec<f64> {
        self.traces_for(algorithm).map(|r| r.trace.final_regret()).collect()
    }
}

/// Runs every (algorithm, trial) pair of the config.
///
/// One objective serves the whole suite. Trial `i` uses seed
/// `base_seed + i` for every algorithm, so noise and delays drawn at a given
/// step are shared across algorithms.
pub fn run_suite(config: &ExperimentConfig) -> Result<SuiteResults> {
    let problem = SuiteProblem::prepare(config)?;
    run_suite_on(config, problem)
}

/// [`run_suite`] on an already prepared objective.
pub fn run_suite_on(config: &ExperimentConfig, problem: SuiteProblem) -> Result<SuiteResults> {
    info!(
        "suite `{}`: {} algorithm(s) x {} trial(s), T={}, |X|={}, C_k={:.4}",
        config.name,
        config.algorithms.len(),
        config.trials,
        config.horizon,
        problem.domain.len(),
        problem.c_k
    );
    let jobs: Vec<(Algorithm, usize)> = config
        .algorithms
        .iter()
        .flat_map(|&a| (0..config.trials).map(move |i| (a, i)))
        .collect();
    let run = || -> Result<Vec<TrialResult>> {
        jobs.par_iter()
            .map(|&(algorithm, trial)| {
                let seed = config.trial_seed(trial);
                let mut env = problem.environment(config, seed)?;
                let params = problem.params(config, &env)?;
                let trace = algorithm.run(&mut env, &params)?;
                Ok(TrialResult {
                    algorithm,
                    trial,
                    seed,
                    trace,
                })
            })
            .collect()
    };
    let trials = if config.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| invalid(e.to_string()))?
            .install(run)?
    } else {
        run()?
    };
    let mut curves = Vec::new();
    for &a in &config.algorithms {
        if curves.iter().any(|c: &AggregateCurve| c.algorithm == a) {
            continue;
        }
        let traces: Vec<&RunTrace> = trials.iter().filter(|r| r.algorithm == a).map(|r| &r.trace).collect();
        curves.push(aggregate(a, &traces)?);
    }
    Ok(SuiteResults {
        name: config.name.clone(),
        problem,
        trials,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::StepRecord;

    fn trace(regrets: &[f64]) -> RunTrace {
        RunTrace {
            steps: regrets
                .iter()
                .enumerate()
                .map(|(i, &r)| StepRecord {
                    t: i as u64 + 1,
                    round: 0,
                    k: i as u64 + 1,
                    chosen: 0,
                    inst_regret: r,
                    arrival: i as u64 + 1,
                })
                .collect(),
            ..Default::default()
        }
    }

    #[test]
    fn aggregate_mean_and_half_std() {
        let a = trace(&[1.0, 1.0]);
        let b = trace(&[3.0, 0.0]);
        let c = aggregate(Algorithm::Bpe, &[&a, &b]).unwrap();
        assert_eq!(c.mean, vec![2.0, 2.5]);
        // sample std of {1, 3} is √2
        assert!((c.half_std[0] - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        assert!((c.half_std[1] - 0.5 * 0.5f64.sqrt()).abs() < 1e-15);
        let single = aggregate(Algorithm::Bpe, &[&a]).unwrap();
        assert_eq!(single.half_std, vec![0.0, 0.0]);
        assert!(aggregate(Algorithm::Bpe, &[]).is_err());
        let short = trace(&[1.0]);
        assert!(aggregate(Algorithm::Bpe, &[&a, &short]).is_err());
    }
}
