//! Information gain, effective dimension and delay audits.

use crate::confidence::{psi, DelayParams};
use crate::error::Result;
use crate::kernels::KernelSpec;
use crate::posterior::VarianceTracker;
use crate::trace::RunTrace;

#[derive(Debug, Clone, PartialEq)]
pub struct InfoReport {
    /// `½ log det(I + K/λ²)`.
    pub realized_gain: f64,
    /// `tr(K (K + λ²I)⁻¹)`.
    pub effective_dim: f64,
    /// `½ log(1 + σ²_{k−1}(x_k)/λ²)` for each point in order; these sum to
    /// `realized_gain`.
    pub increments: Vec<f64>,
}

/// Both quantities from one Cholesky factor of `K + λ²I`.
///
/// The factor's diagonal satisfies `L_kk² = λ² + σ²_{k−1}(x_k)`, which
/// gives the increments and the log-determinant at once.
pub fn info_gain<P: AsRef<[f64]>>(kernel: KernelSpec, lambda: f64, points: &[P]) -> Result<InfoReport> {
    let tracker = VarianceTracker::with_inputs(kernel, lambda, points)?;
    let factor = tracker.factor();
    let ln_lambda = lambda.ln();
    let increments: Vec<f64> = (0..factor.len()).map(|k| factor.diag(k).ln() - ln_lambda).collect();
    let n = factor.len() as f64;
    Ok(InfoReport {
        realized_gain: increments.iter().sum(),
        effective_dim: (n - lambda * lambda * factor.inverse_trace()).max(0.0),
        increments,
    })
}

/// `½ Σ log(1 + v/λ²)` over sequential posterior variances.
pub fn gain_from_variances(variances: &[f64], lambda: f64) -> f64 {
    0.5 * variances.iter().map(|v| (v / (lambda * lambda)).ln_1p()).sum::<f64>()
}

/// `c₁ = 2 k_max / log(1 + k_max/λ²)`; with `k_max = 1` this is
/// `2 / log(1 + 1/λ²)`.
pub fn variance_sum_constant(lambda: f64, k_max: f64) -> f64 {
    2.0 * k_max / (k_max / (lambda * lambda)).ln_1p()
}

/// `Σ σ² ≤ c₁ · gain` for variances bounded by `k_max`.
pub fn variance_sum_bound_holds(variances: &[f64], lambda: f64, k_max: f64) -> bool {
    if variances.is_empty() {
        return true;
    }
    let sum: f64 = variances.iter().sum();
    let bound = variance_sum_constant(lambda, k_max) * gain_from_variances(variances, lambda);
    sum <= bound * (1.0 + 1e-9) + 1e-12
}

/// Steps whose delay exceeded `E[τ] + ψ_t(δ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayAudit {
    pub steps: usize,
    pub violations: usize,
    /// Largest `τ_t − E[τ] − ψ_t(δ)` seen; negative when every delay was
    /// inside its envelope.
    pub max_excess: f64,
}

impl DelayAudit {
    pub fn fraction(&self) -> f64 {
        if self.steps == 0 {
            0.0
        } else {
            self.violations as f64 / self.steps as f64
        }
    }

    /// Whether any step left the envelope.
    pub fn run_violated(&self) -> bool {
        self.violations > 0
    }
}

/// Compares every delay in the trace with its envelope. Delay-free runs
/// (`dp = None`) only check that all delays are zero.
pub fn audit_delays(trace: &RunTrace, dp: Option<&DelayParams>, delta: f64) -> DelayAudit {
    let mut audit = DelayAudit {
        steps: trace.steps.len(),
        violations: 0,
        max_excess: f64::NEG_INFINITY,
    };
    for step in &trace.steps {
        let tau = step.delay() as f64;
        let excess = match dp {
            Some(dp) => tau - dp.mean_delay - psi(step.t, delta, dp),
            None => tau,
        };
        if excess > 0.0 {
            audit.violations += 1;
        }
        audit.max_excess = audit.max_excess.max(excess);
    }
    audit
}
