//! Experiment configuration files.
//!
//! TOML with one table per concern. Every key is optional; omitted keys
//! fall back to the 50×50 grid / SE / Poisson(50) setup.
//!
//! ```toml
//! [experiment]
//! name = "f1"
//! algorithms = ["bpe_delay", "gp_ucb_sdf"]
//! horizon = 2000
//! trials = 10
//! seed = 1
//! out = "results/f1"
//! threads = 0            # 0: one worker per core
//!
//! [kernel]
//! family = "se"          # se | matern | linear
//! # nu = 2.5             # matern smoothness: 0.5, 1.5 or 2.5
//! lengthscale = 0.8
//! output_scale = 1.0
//!
//! [domain]
//! dim = 2
//! resolution = 50        # points per axis
//! lower = -2.0           # a number or one entry per axis
//! upper = 2.0
//!
//! [function]
//! anchors = 100
//! weight_sigma = 1.0
//! rescale = true
//! # seed = 7             # defaults to experiment.seed
//! # path = "f.csv"       # load a tabulated objective instead
//!
//! [noise]
//! sigma = 0.02
//!
//! [delay]
//! law = "poisson"        # none | constant | poisson | geometric
//! rate = 50.0           # 0 without xi and b: no delay and no padding
//! xi = 9.0               # required unless the law is poisson with rate 50
//! b = 1.0
//!
//! [confidence]
//! delta = 0.05
//! # c_k = 2.0            # defaults to the generated function's RKHS norm
//! # lambda = 0.02        # defaults to noise.sigma
//! intervals = "finite"   # finite | continuous
//! disc_c = 1.0           # discretization constant for continuous intervals
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::algorithms::{Algorithm, IntervalMode};
use crate::confidence::DelayParams;
use crate::environment::{DelayLaw, DelayModel};
use crate::error::{Error, Result};
use crate::kernels::{KernelFamily, KernelSpec, MaternNu};
use crate::synth::GenerateOptions;

fn config_err(field: &str, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{field}: {msg}"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    experiment: RawExperiment,
    #[serde(default)]
    kernel: RawKernel,
    #[serde(default)]
    domain: RawDomain,
    #[serde(default)]
    function: RawFunction,
    #[serde(default)]
    noise: RawNoise,
    #[serde(default)]
    delay: RawDelay,
    #[serde(default)]
    confidence: RawConfidence,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    algorithms: Option<Vec<String>>,
    horizon: Option<i64>,
    trials: Option<i64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    threads: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKernel {
    family: Option<String>,
    nu: Option<f64>,
    lengthscale: Option<f64>,
    output_scale: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Bounds {
    Scalar(f64),
    PerAxis(Vec<f64>),
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    dim: Option<i64>,
    resolution: Option<i64>,
    lower: Option<Bounds>,
    upper: Option<Bounds>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFunction {
    anchors: Option<i64>,
    weight_sigma: Option<f64>,
    rescale: Option<bool>,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    sigma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDelay {
    law: Option<String>,
    rate: Option<f64>,
    value: Option<i64>,
    p: Option<f64>,
    xi: Option<f64>,
    b: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfidence {
    delta: Option<f64>,
    c_k: Option<f64>,
    lambda: Option<f64>,
    intervals: Option<String>,
    disc_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainConfig {
    pub dim: usize,
    pub resolution: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionSource {
    Generate { options: GenerateOptions, seed: u64 },
    File(PathBuf),
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub algorithms: Vec<Algorithm>,
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
    pub out: PathBuf,
    /// Worker threads; 0 lets the pool pick.
    pub threads: usize,
    pub kernel: KernelSpec,
    pub domain: DomainConfig,
    pub function: FunctionSource,
    pub noise_sigma: f64,
    pub delay: DelayModel,
    pub delta: f64,
    /// RKHS norm bound; `None` uses the generated function's norm.
    pub c_k: Option<f64>,
    /// Regularization; `None` uses the noise scale.
    pub lambda: Option<f64>,
    pub intervals: IntervalMode,
    pub disc_c: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::from_toml_str("").expect("defaults are valid")
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_raw(raw)
    }

    /// Reads a config file. Relative `out` and `function.path` entries are
    /// kept as written (relative to the working directory).
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let e = raw.experiment;
        let algorithms = match e.algorithms {
            None => vec![Algorithm::BpeDelay, Algorithm::GpUcbSdf],
            Some(list) if list.is_empty() => {
                return Err(config_err("experiment.algorithms", "must name at least one algorithm"))
            }
            Some(list) => list
                .iter()
                .map(|s| s.parse().map_err(|err: Error| config_err("experiment.algorithms", err)))
                .collect::<Result<Vec<_>>>()?,
        };
        let horizon = positive_int("experiment.horizon", e.horizon.unwrap_or(2000))?;
        let trials = positive_int("experiment.trials", e.trials.unwrap_or(10))? as usize;
        let threads = e.threads.unwrap_or(0);
        if threads < 0 {
            return Err(config_err("experiment.threads", "must be non-negative"));
        }
        let name = e.name.unwrap_or_else(|| "experiment".into());
        let out = e.out.unwrap_or_else(|| PathBuf::from("results").join(&name));
        let seed = e.seed.unwrap_or(0);

        let d = raw.domain;
        let dim = positive_int("domain.dim", d.dim.unwrap_or(2))? as usize;
        let resolution = positive_int("domain.resolution", d.resolution.unwrap_or(50))? as usize;
        let lower = bounds("domain.lower", d.lower.unwrap_or(Bounds::Scalar(-2.0)), dim)?;
        let upper = bounds("domain.upper", d.upper.unwrap_or(Bounds::Scalar(2.0)), dim)?;
        if lower.iter().zip(&upper).any(|(l, u)| !(l < u)) {
            return Err(config_err("domain.upper", "must exceed domain.lower on every axis"));
        }
        if resolution < 2 {
            return Err(config_err("domain.resolution", "must be at least 2"));
        }

        let k = raw.kernel;
        let mut family: KernelFamily = k
            .family
            .as_deref()
            .unwrap_or("se")
            .parse()
            .map_err(|err: Error| config_err("kernel.family", err))?;
        if let Some(nu) = k.nu {
            if !matches!(family, KernelFamily::Matern(_)) {
                return Err(config_err("kernel.nu", "only applies to the matern family"));
            }
            family = KernelFamily::Matern(MaternNu::from_value(nu).map_err(|err| config_err("kernel.nu", err))?);
        }
        let kernel = KernelSpec::new(
            family,
            k.lengthscale.unwrap_or(0.8),
            k.output_scale.unwrap_or(1.0),
            dim,
        )
        .map_err(|err| config_err("kernel", err))?;

        let f = raw.function;
        let function = match f.path {
            Some(path) => {
                if f.anchors.is_some() || f.weight_sigma.is_some() || f.rescale.is_some() || f.seed.is_some() {
                    return Err(config_err("function.path", "cannot be combined with generation settings"));
                }
                FunctionSource::File(path)
            }
            None => {
                let defaults = GenerateOptions::default();
                let anchors = positive_int("function.anchors", f.anchors.unwrap_or(defaults.anchors as i64))?;
                let weight_sigma = f.weight_sigma.unwrap_or(defaults.weight_sigma);
                if !(weight_sigma > 0.0 && weight_sigma.is_finite()) {
                    return Err(config_err("function.weight_sigma", "must be positive"));
                }
                FunctionSource::Generate {
                    options: GenerateOptions {
                        anchors: anchors as usize,
                        weight_sigma,
                        rescale: f.rescale.unwrap_or(defaults.rescale),
                    },
                    seed: f.seed.unwrap_or(seed),
                }
            }
        };

        let noise_sigma = raw.noise.sigma.unwrap_or(0.02);
        if !(noise_sigma > 0.0 && noise_sigma.is_finite()) {
            return Err(config_err("noise.sigma", "must be positive"));
        }

        let delay = delay_model(raw.delay)?;

        let c = raw.confidence;
        let delta = c.delta.unwrap_or(0.05);
        if !(delta > 0.0 && delta < 1.0) {
            return Err(config_err("confidence.delta", "must lie in (0, 1)"));
        }
        if let Some(c_k) = c.c_k {
            if !(c_k >= 0.0 && c_k.is_finite()) {
                return Err(config_err("confidence.c_k", "must be non-negative"));
            }
        } else if matches!(function, FunctionSource::File(_)) {
            return Err(config_err("confidence.c_k", "is required when the function is loaded from a file"));
        }
        if let Some(lambda) = c.lambda {
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(config_err("confidence.lambda", "must be positive"));
            }
        }
        let disc_c = c.disc_c.unwrap_or(1.0);
        if !(disc_c > 0.0 && disc_c.is_finite()) {
            return Err(config_err("confidence.disc_c", "must be positive"));
        }
        let intervals = match c.intervals {
            None => IntervalMode::Finite,
            Some(s) => s.parse().map_err(|err: Error| config_err("confidence.intervals", err))?,
        };

        Ok(Self {
            name,
            algorithms,
            horizon,
            trials,
            seed,
            out,
            threads: threads as usize,
            kernel,
            domain: DomainConfig {
                dim,
                resolution,
                lower,
                upper,
            },
            function,
            noise_sigma,
            delay,
            delta,
            c_k: c.c_k,
            lambda: c.lambda,
            intervals,
            disc_c,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        if let FunctionSource::Generate { seed: s, .. } = &mut self.function {
            if *s == self.seed {
                *s = seed;
            }
        }
        self.seed = seed;
        self
    }

    /// `base_seed + i`.
    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

fn positive_int(field: &str, v: i64) -> Result<u64> {
    if v >= 1 {
        Ok(v as u64)
    } else {
        Err(config_err(field, format!("must be at least 1 (got {v})")))
    }
}

fn bounds(field: &str, b: Bounds, dim: usize) -> Result<Vec<f64>> {
    let v = match b {
        Bounds::Scalar(x) => vec![x; dim],
        Bounds::PerAxis(v) if v.len() == dim => v,
        Bounds::PerAxis(v) => {
            return Err(config_err(field, format!("has {} entries for {dim} axes", v.len())))
        }
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(config_err(field, "must be finite"));
    }
    Ok(v)
}

fn delay_model(d: RawDelay) -> Result<DelayModel> {
    let law_name = d.law.as_deref().unwrap_or("poisson").to_ascii_lowercase();
    let law = match law_name.as_str() {
        "none" => DelayLaw::None,
        "constant" => {
            let v = d.value.ok_or_else(|| config_err("delay.value", "is required for a constant delay"))?;
            if v < 0 {
                return Err(config_err("delay.value", "must be non-negative"));
            }
            DelayLaw::Constant(v as u64)
        }
        "poisson" => {
            let rate = d.rate.unwrap_or(50.0);
            if !(rate >= 0.0 && rate.is_finite()) {
                return Err(config_err("delay.rate", "must be non-negative"));
            }
            // a zero rate is immediate feedback; declared xi and b keep the padding
            if rate == 0.0 && d.xi.is_some() {
                DelayLaw::Constant(0)
            } else if rate == 0.0 {
                DelayLaw::None
            } else {
                DelayLaw::Poisson(rate)
            }
        }
        "geometric" => DelayLaw::Geometric(d.p.ok_or_else(|| config_err("delay.p", "is required for a geometric delay"))?),
        other => {
            return Err(config_err(
                "delay.law",
                format!("unknown law `{other}` (expected none, constant, poisson or geometric)"),
            ))
        }
    };
    if law == DelayLaw::None {
        return Ok(DelayModel::none());
    }
    let xi_b = match (d.xi, d.b) {
        (Some(xi), Some(b)) => Some((xi, b)),
        (None, None) => None,
        _ => return Err(config_err("delay.xi", "xi and b must be given together")),
    };
    if let Some((xi, b)) = xi_b {
        DelayParams::new(xi, b, law.mean()).map_err(|err| config_err("delay.xi", err))?;
    }
    DelayModel::new(law, xi_b).map_err(|err| config_err("delay", err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let c = ExperimentConfig::default();
        assert_eq!(c.horizon, 2000);
        assert_eq!(c.trials, 10);
        assert_eq!(c.domain.resolution, 50);
        assert_eq!(c.delay.params().unwrap().xi, 9.0);
        assert_eq!(c.trial_seed(3), 3);
    }

    #[test]
    fn field_named_errors() {
        let msg = |s: &str| ExperimentConfig::from_toml_str(s).unwrap_err().to_string();
        assert!(msg("[experiment]\ntrials = 0").contains("experiment.trials"));
        assert!(msg("[experiment]\nhorizon = -3").contains("experiment.horizon"));
        assert!(msg("[experiment]\nalgorithms = [\"thompson\"]").contains("experiment.algorithms"));
        assert!(msg("[kernel]\nfamily = \"matern3\"").contains("kernel.family"));
        assert!(msg("[domain]\ndim = 2\nlower = [0.0]").contains("domain.lower"));
        assert!(msg("[delay]\nlaw = \"constant\"").contains("delay.value"));
        assert!(msg("[delay]\nlaw = \"geometric\"\np = 0.5").contains("delay"));
        assert!(msg("[confidence]\ndelta = 1.5").contains("confidence.delta"));
        assert!(msg("[noise]\nsigma = 0").contains("noise.sigma"));
        assert!(msg("[delay]\nrate = 25").contains("delay"));
        assert!(msg("[kernel]\nfamily = \"se\"\nnu = 1.5").contains("kernel.nu"));
        assert!(msg("[kernel]\nfamily = \"matern\"\nnu = 2.0").contains("kernel.nu"));
        assert!(msg("[bogus]\nx = 1").contains("bogus"));
    }

    #[test]
    fn matern_nu_key() {
        let c = ExperimentConfig::from_toml_str("[kernel]\nfamily = \"matern\"\nnu = 1.5").unwrap();
        assert_eq!(c.kernel.family(), KernelFamily::Matern(MaternNu::ThreeHalves));
    }

    #[test]
    fn zero_rate_is_delay_free() {
        let c = ExperimentConfig::from_toml_str("[delay]\nrate = 0").unwrap();
        assert_eq!(c.delay, DelayModel::none());
        let c = ExperimentConfig::from_toml_str("[delay]\nrate = 0\nxi = 9.0\nb = 1.0").unwrap();
        assert_eq!(c.delay.law(), DelayLaw::Constant(0));
        assert_eq!(c.delay.params().unwrap().xi, 9.0);
    }

    #[test]
    fn seed_override_moves_function_seed() {
        let c = ExperimentConfig::from_toml_str("[experiment]\nseed = 4").unwrap().with_seed(9);
        assert_eq!(c.function, FunctionSource::Generate {
            options: GenerateOptions::default(),
            seed: 9
        });
        let c = ExperimentConfig::from_toml_str("[experiment]\nseed = 4\n[function]\nseed = 2")
            .unwrap()
            .with_seed(9);
        assert!(matches!(c.function, FunctionSource::Generate { seed: 2, .. }));
    }
}
