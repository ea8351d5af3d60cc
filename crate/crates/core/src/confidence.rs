//! Confidence-width multipliers, delay deviation bounds and interval
//! construction. Everything here is a pure function of its arguments.

use crate::error::{invalid, Result};

/// Constants entering the confidence widths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfidenceParams {
    /// RKHS norm bound `C_k`.
    pub c_k: f64,
    /// Sub-Gaussian noise scale.
    pub sigma: f64,
    /// Regularizer `λ` of the posterior.
    pub lambda: f64,
    /// Failure probability in `(0, 1)`.
    pub delta: f64,
    /// `|X|` for finite domains.
    pub domain_card: usize,
    /// Input dimension.
    pub dim: usize,
    /// Discretization constant `c`.
    pub disc_c: f64,
    pub k_max: f64,
}

impl ConfidenceParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("C_k", self.c_k),
            ("sigma", self.sigma),
            ("lambda", self.lambda),
            ("disc_c", self.disc_c),
            ("k_max", self.k_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(format!("{name} must be positive (got {v})")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(invalid(format!("delta must lie in (0, 1) (got {})", self.delta)));
        }
        if self.domain_card == 0 || self.dim == 0 {
            return Err(invalid("domain_card and dim must be positive"));
        }
        Ok(())
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }
}

/// Sub-exponential delay parameters and the mean delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayParams {
    pub xi: f64,
    pub b: f64,
    pub mean_delay: f64,
}

impl DelayParams {
    pub fn new(xi: f64, b: f64, mean_delay: f64) -> Result<Self> {
        if !(xi > 0.0 && xi.is_finite()) || !(b > 0.0) {
            return Err(invalid(format!("xi and b must be positive (got {xi}, {b})")));
        }
        if !(mean_delay >= 0.0 && mean_delay.is_finite()) {
            return Err(invalid(format!("mean_delay must be non-negative (got {mean_delay})")));
        }
        Ok(Self { xi, b, mean_delay })
    }
}

fn width(c_k: f64, sigma: f64, lambda: f64, log_term: f64) -> f64 {
    c_k + sigma / lambda * (2.0 * log_term.max(0.0)).sqrt()
}

/// `β(δ) = C_k + (σ/λ) √(2 log(1/δ))`.
pub fn beta(p: &ConfidenceParams) -> f64 {
    width(p.c_k, p.sigma, p.lambda, -p.delta.ln())
}

/// `β̃(δ) = C_k + (σ/λ) √(2 log(4R|X|/δ))`, the finite-domain multiplier
/// with a union bound over rounds and points.
pub fn beta_finite(p: &ConfidenceParams, rounds: usize) -> f64 {
    let log_term = (4.0 * rounds.max(1) as f64).ln() + (p.domain_card.max(1) as f64).ln() - p.delta.ln();
    width(p.c_k, p.sigma, p.lambda, log_term)
}

/// `log C̃_k(δ')` where `C̃_k(δ') = C_k + (max{σ, k_max} √t / λ) √(2 log(2t/δ'))`.
fn log_norm_bound(p: &ConfidenceParams, t: f64, delta: f64) -> f64 {
    let scale = p.sigma.max(p.k_max) * t.sqrt() / p.lambda;
    let c = p.c_k + scale * (2.0 * (2.0 * t / delta).ln().max(0.0)).sqrt();
    c.ln()
}

/// `β′_δ(t) = β(δ / (2Γ_t))` with `Γ_t = c (C̃_k(δ/2))^d t^d`.
///
/// `Γ_t` is handled in log space. It counts the points of a discretization,
/// so `log Γ_t` is floored at 0.
pub fn beta_prime(p: &ConfidenceParams, t: usize) -> f64 {
    let t = t.max(1) as f64;
    let d = p.dim as f64;
    let log_gamma = (p.disc_c.ln() + d * log_norm_bound(p, t, p.delta / 2.0) + d * t.ln()).max(0.0);
    let log_term = 2f64.ln() + log_gamma - p.delta.ln();
    width(p.c_k, p.sigma, p.lambda, log_term)
}

/// `ψ_t(δ) = min{ √(2ξ² log(3t/2δ)), 2b log(3t/2δ) }`.
pub fn psi(t: u64, delta: f64, dp: &DelayParams) -> f64 {
    let l = (3.0 * t.max(1) as f64 / (2.0 * delta)).ln().max(0.0);
    (2.0 * dp.xi * dp.xi * l).sqrt().min(2.0 * dp.b * l)
}

/// `u_T(δ) = E[τ] + ψ_T(δ/2)`; zero when the feedback is known to be
/// undelayed (`dp = None`).
pub fn u_t(horizon: u64, delta: f64, dp: Option<&DelayParams>) -> f64 {
    match dp {
        None => 0.0,
        Some(dp) => dp.mean_delay + psi(horizon, delta / 2.0, dp),
    }
}

/// Closed interval `[lower, upper]` on `f(x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `μ ± β̃ σ`.
pub fn interval_finite(mu: f64, sd: f64, beta_t: f64) -> Result<Interval> {
    if !(sd >= 0.0) {
        return Err(invalid(format!("standard deviation must be non-negative (got {sd})")));
    }
    let half = beta_t * sd;
    Ok(Interval {
        lower: mu - half,
        upper: mu + half,
    })
}

/// `μ ± (2/q + β′ (σ + 2/√q))`, the discretization-aware interval.
pub fn interval_continuous(mu: f64, sd: f64, beta_p: f64, q: u64) -> Result<Interval> {
    if q < 1 {
        return Err(invalid("q must be at least 1"));
    }
    if !(sd >= 0.0) {
        return Err(invalid(format!("standard deviation must be non-negative (got {sd})")));
    }
    let q = q as f64;
    let half = 2.0 / q + beta_p * (sd + 2.0 / q.sqrt());
    Ok(Interval {
        lower: mu - half,
        upper: mu + half,
    })
}
