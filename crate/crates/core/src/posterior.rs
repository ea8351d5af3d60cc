//! Kernel ridge / GP posterior.
//!
//! `mean(x) = k_X(x)ᵀ (K + λ²I)⁻¹ y` and
//! `variance(x) = k(x,x) − k_X(x)ᵀ (K + λ²I)⁻¹ k_X(x)`.
//!
//! [`VarianceTracker`] needs only the chosen inputs, so it can run ahead of
//! delayed observations. [`Predictor`] adds the values that have arrived.
//! [`CandidatePosterior`] keeps `L⁻¹ k_X(x)` for every point of a fixed
//! candidate list so adding an input costs `O(n)` per candidate.

use log::debug;

use crate::error::{check_dim, invalid, Result};
use crate::kernels::KernelSpec;
use crate::linalg::{dot, CholeskyFactor};

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be positive (got {lambda})")))
    }
}

fn clamp_variance(raw: f64, prior: f64) -> f64 {
    if raw < 0.0 {
        debug!("clamping negative posterior variance {raw:e} to 0");
        0.0
    } else {
        raw.min(prior)
    }
}

/// Posterior uncertainty over a growing set of inputs; no observation
/// values are involved.
#[derive(Debug, Clone)]
pub struct VarianceTracker {
    kernel: KernelSpec,
    lambda: f64,
    inputs: Vec<Vec<f64>>,
    factor: CholeskyFactor,
}

impl VarianceTracker {
    pub fn new(kernel: KernelSpec, lambda: f64) -> Result<Self> {
        check_lambda(lambda)?;
        Ok(Self {
            kernel,
            lambda,
            inputs: Vec::new(),
            factor: CholeskyFactor::new(),
        })
    }

    /// Builds a tracker by factorizing `K + λ²I` for the given inputs.
    pub fn with_inputs<P: AsRef<[f64]>>(kernel: KernelSpec, lambda: f64, inputs: &[P]) -> Result<Self> {
        check_lambda(lambda)?;
        let mut gram = kernel.gram(inputs)?;
        for i in 0..inputs.len() {
            gram[(i, i)] += lambda * lambda;
        }
        Ok(Self {
            kernel,
            lambda,
            inputs: inputs.iter().map(|p| p.as_ref().to_vec()).collect(),
            factor: CholeskyFactor::decompose(&gram)?,
        })
    }

    /// Rank-one extension of the factorization with a new input, `O(t²)`.
    pub fn add_point(&mut self, x: &[f64]) -> Result<()> {
        check_dim(self.kernel.dim(), x.len())?;
        let cross = self.kernel.cross(&self.inputs, x)?;
        let diag = self.kernel.diag(x) + self.lambda * self.lambda;
        self.factor.push_row(&cross, diag)?;
        self.inputs.push(x.to_vec());
        Ok(())
    }

    /// `L⁻¹ k_X(x)`.
    fn project(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.kernel.dim(), "query point dimension");
        let cross: Vec<f64> = self
            .inputs
            .iter()
            .map(|p| self.kernel.eval_unchecked(p, x))
            .collect();
        self.factor.forward_solve(&cross)
    }

    /// Posterior variance, clamped to `[0, k(x,x)]`.
    pub fn variance(&self, x: &[f64]) -> f64 {
        let v = self.project(x);
        let prior = self.kernel.diag(x);
        clamp_variance(prior - dot(&v, &v), prior)
    }

    pub fn std_dev(&self, x: &[f64]) -> f64 {
        self.variance(x).sqrt()
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        &self.inputs
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn factor(&self) -> &CholeskyFactor {
        &self.factor
    }
}

/// Posterior mean and variance over inputs whose observations are known.
#[derive(Debug, Clone)]
pub struct Predictor {
    tracker: VarianceTracker,
    values: Vec<f64>,
    weights: Vec<f64>,
}

impl Predictor {
    /// Fits from scratch on `(inputs, values)`.
    pub fn fit<P: AsRef<[f64]>>(
        kernel: KernelSpec,
        lambda: f64,
        inputs: &[P],
        values: &[f64],
    ) -> Result<Self> {
        if inputs.len() != values.len() {
            return Err(invalid(format!(
                "{} inputs but {} values",
                inputs.len(),
                values.len()
            )));
        }
        let tracker = VarianceTracker::with_inputs(kernel, lambda, inputs)?;
        let weights = tracker.factor.solve(values);
        Ok(Self {
            tracker,
            values: values.to_vec(),
            weights,
        })
    }

    /// The prior: zero mean, variance `k(x,x)`.
    pub fn prior(kernel: KernelSpec, lambda: f64) -> Result<Self> {
        Self::fit::<Vec<f64>>(kernel, lambda, &[], &[])
    }

    pub fn mean(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.tracker.kernel.dim(), "query point dimension");
        self.tracker
            .inputs
            .iter()
            .zip(&self.weights)
            .map(|(p, w)| self.tracker.kernel.eval_unchecked(p, x) * w)
            .sum()
    }

    pub fn variance(&self, x: &[f64]) -> f64 {
        self.tracker.variance(x)
    }

    pub fn std_dev(&self, x: &[f64]) -> f64 {
        self.tracker.std_dev(x)
    }

    /// Mean and standard deviation sharing one kernel-vector evaluation.
    pub fn predict(&self, x: &[f64]) -> (f64, f64) {
        let cross: Vec<f64> = self
            .tracker
            .inputs
            .iter()
            .map(|p| self.tracker.kernel.eval_unchecked(p, x))
            .collect();
        let mean = dot(&cross, &self.weights);
        let v = self.tracker.factor.forward_solve(&cross);
        let prior = self.tracker.kernel.diag(x);
        (mean, clamp_variance(prior - dot(&v, &v), prior).sqrt())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn inputs(&self) -> &[Vec<f64>] {
        self.tracker.inputs()
    }

    pub fn tracker(&self) -> &VarianceTracker {
        &self.tracker
    }
}

/// Incremental posterior restricted to a fixed list of candidate points.
///
/// For each candidate `c` it stores `v_c = L⁻¹ k_X(c)`; appending an input
/// extends every `v_c` by one entry, so variances update in `O(n)` per
/// candidate and means are `v_c · (L⁻¹ y)`.
///
/// Inputs added with [`observe`](Self::observe) carry a value, and the
/// means for those values are kept current as inputs are added or values
/// replaced.
#[derive(Debug, Clone)]
pub struct CandidatePosterior {
    kernel: KernelSpec,
    lambda: f64,
    points: Vec<Vec<f64>>,
    prior: Vec<f64>,
    proj: Vec<Vec<f64>>,
    var: Vec<f64>,
    factor: CholeskyFactor,
    inputs: Vec<usize>,
    values: Vec<f64>,
    // L⁻¹ y for `values`
    white: Vec<f64>,
    mean: Vec<f64>,
}

impl CandidatePosterior {
    pub fn new<P: AsRef<[f64]>>(kernel: KernelSpec, lambda: f64, candidates: &[P]) -> Result<Self> {
        check_lambda(lambda)?;
        let mut points = Vec::with_capacity(candidates.len());
        for c in candidates {
            check_dim(kernel.dim(), c.as_ref().len())?;
            points.push(c.as_ref().to_vec());
        }
        let prior: Vec<f64> = points.iter().map(|p| kernel.diag(p)).collect();
        let mean = vec![0.0; points.len()];
        Ok(Self {
            kernel,
            lambda,
            proj: vec![Vec::new(); points.len()],
            var: prior.clone(),
            prior,
            points,
            factor: CholeskyFactor::new(),
            inputs: Vec::new(),
            values: Vec::new(),
            white: Vec::new(),
            mean,
        })
    }

    /// Adds candidate `i` as an input; its tracked value is 0.
    pub fn add_candidate(&mut self, i: usize) -> Result<()> {
        self.observe(i, 0.0)
    }

    /// Adds candidate `i` as an input with observed value `y`.
    pub fn observe(&mut self, i: usize, y: f64) -> Result<()> {
        if i >= self.points.len() {
            return Err(invalid(format!(
                "candidate {i} out of range ({} candidates)",
                self.points.len()
            )));
        }
        let solved = self.proj[i].clone();
        let diag = self.prior[i] + self.lambda * self.lambda;
        self.factor.push_solved_row(solved, diag)?;
        let n = self.factor.len() - 1;
        let pivot = self.factor.diag(n);
        let row = self.proj[i].clone();
        let w = (y - dot(&row, &self.white)) / pivot;
        let x = self.points[i].clone();
        for c in 0..self.points.len() {
            let k = self.kernel.eval_unchecked(&x, &self.points[c]);
            let v = (k - dot(&row, &self.proj[c])) / pivot;
            self.proj[c].push(v);
            self.var[c] = clamp_variance(self.var[c] - v * v, self.prior[c]);
            self.mean[c] += v * w;
        }
        self.inputs.push(i);
        self.values.push(y);
        self.white.push(w);
        Ok(())
    }

    /// Replaces the values of existing inputs, given as `(slot, value)`
    /// pairs with slots in insertion order.
    pub fn set_values(&mut self, updates: &[(usize, f64)]) -> Result<()> {
        let Some(start) = updates.iter().map(|&(s, _)| s).min() else {
            return Ok(());
        };
        if let Some(&(slot, _)) = updates.iter().find(|&&(s, _)| s >= self.values.len()) {
            return Err(invalid(format!("slot {slot} out of range ({} inputs)", self.values.len())));
        }
        for &(slot, y) in updates {
            self.values[slot] = y;
        }
        let old: Vec<f64> = self.white[start..].to_vec();
        self.factor.forward_solve_tail(&self.values, &mut self.white, start);
        let delta: Vec<f64> = self.white[start..].iter().zip(&old).map(|(a, b)| a - b).collect();
        for (m, v) in self.mean.iter_mut().zip(&self.proj) {
            *m += dot(&v[start..], &delta);
        }
        Ok(())
    }

    /// Means for the tracked values.
    pub fn tracked_means(&self) -> &[f64] {
        &self.mean
    }

    pub fn tracked_values(&self) -> &[f64] {
        &self.values
    }

    pub fn variance(&self, i: usize) -> f64 {
        self.var[i]
    }

    pub fn variances(&self) -> &[f64] {
        &self.var
    }

    /// Posterior means at every candidate for values aligned with the
    /// inputs in insertion order.
    pub fn means(&self, values: &[f64]) -> Result<Vec<f64>> {
        if values.len() != self.inputs.len() {
            return Err(invalid(format!(
                "{} inputs but {} values",
                self.inputs.len(),
                values.len()
            )));
        }
        let w = self.factor.forward_solve(values);
        Ok(self.proj.iter().map(|v| dot(v, &w)).collect())
    }

    /// Candidate indices added so far, in order.
    pub fn inputs(&self) -> &[usize] {
        &self.inputs
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn candidate_count(&self) -> usize {
        self.points.len()
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn se() -> KernelSpec {
        KernelSpec::squared_exponential(1.0, 1).unwrap()
    }

    #[test]
    fn prior_and_single_point() {
        let p = Predictor::prior(se(), 0.2).unwrap();
        assert_eq!(p.mean(&[0.3]), 0.0);
        assert_eq!(p.variance(&[0.3]), 1.0);

        let p = Predictor::fit(se(), 0.2, &[vec![0.0]], &[0.5]).unwrap();
        assert!((p.mean(&[0.0]) - 0.5 / 1.04).abs() < 1e-14);
        assert!((p.variance(&[0.0]) - (1.0 - 1.0 / 1.04)).abs() < 1e-14);
    }

    #[test]
    fn fit_validates_arguments() {
        assert!(Predictor::fit(se(), 0.0, &[vec![0.0]], &[1.0]).is_err());
        assert!(Predictor::fit(se(), -1.0, &[vec![0.0]], &[1.0]).is_err());
        assert!(Predictor::fit(se(), 0.1, &[vec![0.0]], &[1.0, 2.0]).is_err());
        assert!(VarianceTracker::new(se(), 0.0).is_err());
    }

    #[test]
    fn add_point_scalar_formula() {
        let mut t = VarianceTracker::new(se(), 0.3).unwrap();
        assert_eq!(t.variance(&[0.7]), 1.0);
        t.add_point(&[0.7]).unwrap();
        let expected = 1.0 - 1.0 / (1.0 + 0.09);
        assert!((t.variance(&[0.7]) - expected).abs() < 1e-15);
        assert!(t.add_point(&[0.7, 0.1]).is_err());
    }

    #[test]
    fn duplicate_points_shrink_monotonically() {
        let mut t = VarianceTracker::new(se(), 0.1).unwrap();
        let mut last = t.variance(&[0.2]);
        for _ in 0..3 {
            t.add_point(&[0.2]).unwrap();
            let v = t.variance(&[0.2]);
            assert!(v >= 0.0 && v <= last);
            last = v;
        }
    }

    #[test]
    fn interpolation_limit() {
        let p = Predictor::fit(se(), 1e-3, &[vec![0.0], vec![1.5]], &[0.8, -0.4]).unwrap();
        assert!((p.mean(&[0.0]) - 0.8).abs() < 1e-2);
        assert!((p.mean(&[1.5]) + 0.4).abs() < 1e-2);
    }

    #[test]
    fn candidate_posterior_matches_tracker() {
        let pts: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64 * 0.4]).collect();
        let mut cp = CandidatePosterior::new(se(), 0.2, &pts).unwrap();
        let mut t = VarianceTracker::new(se(), 0.2).unwrap();
        for &i in &[2, 5, 2, 0] {
            cp.add_candidate(i).unwrap();
            t.add_point(&pts[i]).unwrap();
        }
        for (c, p) in pts.iter().enumerate() {
            assert!((cp.variance(c) - t.variance(p)).abs() < 1e-12);
        }
        let values = [0.1, -0.3, 0.2, 0.7];
        let inputs: Vec<Vec<f64>> = cp.inputs().iter().map(|&i| pts[i].clone()).collect();
        let pred = Predictor::fit(se(), 0.2, &inputs, &values).unwrap();
        for (m, p) in cp.means(&values).unwrap().iter().zip(&pts) {
            assert!((m - pred.mean(p)).abs() < 1e-12);
        }
        assert!(cp.add_candidate(6).is_err());
        assert!(cp.means(&[1.0]).is_err());
    }

    #[test]
    fn tracked_means_follow_observations_and_updates() {
        let pts: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 * 0.3]).collect();
        let mut cp = CandidatePosterior::new(se(), 0.15, &pts).unwrap();
        for (i, y) in [(1, 0.4), (4, -0.2), (1, 0.5), (6, 0.9)] {
            cp.observe(i, y).unwrap();
        }
        let check = |cp: &CandidatePosterior| {
            let direct = cp.means(cp.tracked_values()).unwrap();
            for (a, b) in cp.tracked_means().iter().zip(&direct) {
                assert!((a - b).abs() < 1e-12);
            }
        };
        check(&cp);
        cp.set_values(&[(1, -1.0), (3, 0.0)]).unwrap();
        assert_eq!(cp.tracked_values(), &[0.4, -1.0, 0.5, 0.0]);
        check(&cp);
        assert!(cp.set_values(&[(4, 1.0)]).is_err());
        cp.set_values(&[]).unwrap();
    }
}
