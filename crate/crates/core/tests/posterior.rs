use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use bpe_delay::diagnostics::{gain_from_variances, info_gain, variance_sum_bound_holds};
use bpe_delay::kernels::KernelSpec;
use bpe_delay::posterior::{CandidatePosterior, Predictor, VarianceTracker};

fn kernel_strategy(dim: usize) -> impl Strategy<Value = KernelSpec> {
    (0usize..5, 0.2f64..2.0).prop_map(move |(f, l)| {
        match f {
            0 => KernelSpec::squared_exponential(l, dim),
            1 => KernelSpec::matern(0.5, l, dim),
            2 => KernelSpec::matern(1.5, l, dim),
            3 => KernelSpec::matern(2.5, l, dim),
            _ => KernelSpec::linear(dim),
        }
        .unwrap()
    })
}

fn points(n: std::ops::Range<usize>, dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, dim), n)
}

fn gram(k: &KernelSpec, pts: &[Vec<f64>]) -> DMatrix<f64> {
    DMatrix::from_fn(pts.len(), pts.len(), |i, j| k.eval(&pts[i], &pts[j]).unwrap())
}

#[test]
fn matern_closed_forms() {
    let l = 0.7;
    for r in [0.0, 0.1, 0.5, 1.3, 4.0] {
        let x = [0.0, 0.0];
        let y = [r * 0.6, r * 0.8];
        let s = r / l;
        let half = KernelSpec::matern(0.5, l, 2).unwrap().eval(&x, &y).unwrap();
        let three = KernelSpec::matern(1.5, l, 2).unwrap().eval(&x, &y).unwrap();
        let five = KernelSpec::matern(2.5, l, 2).unwrap().eval(&x, &y).unwrap();
        let se = KernelSpec::squared_exponential(l, 2).unwrap().eval(&x, &y).unwrap();
        let a = 3f64.sqrt() * s;
        let b = 5f64.sqrt() * s;
        assert!((half - (-s).exp()).abs() < 1e-14);
        assert!((three - (1.0 + a) * (-a).exp()).abs() < 1e-14);
        assert!((five - (1.0 + b + b * b / 3.0) * (-b).exp()).abs() < 1e-14);
        assert!((se - (-0.5 * s * s).exp()).abs() < 1e-14);
    }
}

#[test]
fn output_scale_multiplies() {
    let k = KernelSpec::matern(1.5, 0.5, 1).unwrap();
    let k3 = k.with_output_scale(3.0).unwrap();
    let (x, y) = ([0.2], [0.9]);
    assert!((k3.eval(&x, &y).unwrap() - 3.0 * k.eval(&x, &y).unwrap()).abs() < 1e-15);
    assert_eq!(k3.diag(&x), 3.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_symmetric_psd(k in kernel_strategy(2), pts in points(1..25, 2)) {
        let g = gram(&k, &pts);
        prop_assert!((&g - g.transpose()).abs().max() < 1e-15);
        let eig = g.clone().symmetric_eigen();
        let scale = g.diagonal().max().max(1.0);
        prop_assert!(eig.eigenvalues.min() > -1e-9 * scale);
        // library gram agrees with pointwise evaluation
        let lib = k.gram(&pts).unwrap();
        for i in 0..pts.len() {
            for j in 0..=i {
                prop_assert_eq!(lib.row(i)[j], g[(i, j)]);
            }
        }
    }

    #[test]
    fn predictor_matches_dense_solve(
        k in kernel_strategy(2),
        pts in points(1..30, 2),
        lambda in 0.05f64..1.0,
        x in prop::collection::vec(-2.0f64..2.0, 2),
        seed in any::<u64>(),
    ) {
        let n = pts.len();
        let y: Vec<f64> = (0..n).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 / 500.0) - 1.0).collect();
        let a = gram(&k, &pts) + DMatrix::identity(n, n) * (lambda * lambda);
        let kx = DVector::from_iterator(n, pts.iter().map(|p| k.eval(p, &x).unwrap()));
        let lu = a.lu();
        let mu = kx.dot(&lu.solve(&DVector::from_column_slice(&y)).unwrap());
        let var = (k.diag(&x) - kx.dot(&lu.solve(&kx).unwrap())).max(0.0);
        let p = Predictor::fit(k, lambda, &pts, &y).unwrap();
        let (m, s) = p.predict(&x);
        prop_assert!((m - mu).abs() < 1e-8);
        prop_assert!((s - var.sqrt()).abs() < 1e-7);
    }

    #[test]
    fn variance_bounded_and_shrinking(
        k in kernel_strategy(1),
        pts in points(1..30, 1),
        lambda in 0.01f64..1.0,
        x in -2.0f64..2.0,
    ) {
        let mut t = VarianceTracker::new(k, lambda).unwrap();
        let mut prev = t.variance(&[x]);
        prop_assert!((prev - k.diag(&[x])).abs() < 1e-12);
        for p in &pts {
            t.add_point(p).unwrap();
            let v = t.variance(&[x]);
            prop_assert!(v >= 0.0);
            prop_assert!(v <= prev + 1e-10);
            prev = v;
        }
    }

    #[test]
    fn variance_ignores_values(
        k in kernel_strategy(2),
        pts in points(1..20, 2),
        lambda in 0.05f64..1.0,
        shift in -5.0f64..5.0,
    ) {
        let y0 = vec![0.0; pts.len()];
        let y1: Vec<f64> = (0..pts.len()).map(|i| shift * i as f64).collect();
        let a = Predictor::fit(k, lambda, &pts, &y0).unwrap();
        let b = Predictor::fit(k, lambda, &pts, &y1).unwrap();
        for p in &pts {
            prop_assert_eq!(a.variance(p), b.variance(p));
        }
    }

    #[test]
    fn candidate_posterior_tracks_predictor(
        k in kernel_strategy(2),
        cands in points(2..25, 2),
        lambda in 0.05f64..1.0,
        picks in prop::collection::vec(any::<prop::sample::Index>(), 1..20),
    ) {
        let mut cp = CandidatePosterior::new(k, lambda, &cands).unwrap();
        let mut inputs = Vec::new();
        let mut ys = Vec::new();
        for (s, ix) in picks.iter().enumerate() {
            let i = ix.index(cands.len());
            let y = (s as f64 * 0.37).sin();
            cp.observe(i, y).unwrap();
            inputs.push(cands[i].clone());
            ys.push(y);
        }
        let p = Predictor::fit(k, lambda, &inputs, &ys).unwrap();
        for (c, x) in cands.iter().enumerate() {
            prop_assert!((cp.variance(c) - p.variance(x)).abs() < 1e-9);
            prop_assert!((cp.tracked_means()[c] - p.mean(x)).abs() < 1e-8);
        }
        // rewriting all values reproduces a fresh fit
        let new_ys: Vec<f64> = ys.iter().map(|y| 2.0 * y + 1.0).collect();
        let updates: Vec<(usize, f64)> = new_ys.iter().copied().enumerate().collect();
        cp.set_values(&updates).unwrap();
        let p = Predictor::fit(k, lambda, &inputs, &new_ys).unwrap();
        for (c, x) in cands.iter().enumerate() {
            prop_assert!((cp.tracked_means()[c] - p.mean(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn information_gain_identities(
        k in kernel_strategy(2),
        pts in points(1..30, 2),
        lambda in 0.05f64..1.0,
    ) {
        let n = pts.len();
        let r = info_gain(k, lambda, &pts).unwrap();
        let m = DMatrix::identity(n, n) + gram(&k, &pts) / (lambda * lambda);
        let oracle = 0.5 * m.clone().cholesky().unwrap().l().diagonal().map(|d| d.ln()).sum() * 2.0;
        prop_assert!((r.realized_gain - oracle).abs() < 1e-8 * oracle.max(1.0));
        prop_assert!(r.increments.iter().all(|&g| g >= 0.0));
        prop_assert!((r.increments.iter().sum::<f64>() - r.realized_gain).abs() < 1e-9 * r.realized_gain.max(1.0));
        // effective dimension: tr(K (K + λ²I)^{-1}) ≤ n and ≤ 2·gain
        prop_assert!(r.effective_dim <= n as f64 + 1e-9);
        prop_assert!(r.effective_dim >= -1e-9);
        prop_assert!(r.effective_dim <= 2.0 * r.realized_gain + 1e-8);

        // the same gain from the sequential variances
        let mut t = VarianceTracker::new(k, lambda).unwrap();
        let mut vars = Vec::new();
        for p in &pts {
            vars.push(t.variance(p));
            t.add_point(p).unwrap();
        }
        prop_assert!((gain_from_variances(&vars, lambda) - r.realized_gain).abs() < 1e-8 * r.realized_gain.max(1.0));
        let k_max = pts.iter().map(|p| k.diag(p)).fold(0.0, f64::max);
        prop_assert!(variance_sum_bound_holds(&vars, lambda, k_max));
    }

    #[test]
    fn gain_grows_with_points(k in kernel_strategy(1), pts in points(2..20, 1), lambda in 0.05f64..1.0) {
        let mut prev = 0.0;
        for m in 1..=pts.len() {
            let g = info_gain(k, lambda, &pts[..m]).unwrap().realized_gain;
            prop_assert!(g >= prev - 1e-12);
            prev = g;
        }
    }
}

mod cholesky {
    use super::*;
    use bpe_delay::linalg::{CholeskyFactor, Matrix};

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn append_equals_batch(k in kernel_strategy(2), pts in points(1..30, 2), lambda in 0.05f64..1.0) {
            let n = pts.len();
            let a = Matrix::from_fn(n, n, |i, j| {
                k.eval(&pts[i], &pts[j]).unwrap() + if i == j { lambda * lambda } else { 0.0 }
            });
            let batch = CholeskyFactor::decompose(&a).unwrap();
            let mut inc = CholeskyFactor::new();
            for i in 0..n {
                inc.push_row(&a.row(i)[..i], a.row(i)[i]).unwrap();
            }
            let r = inc.reconstruct();
            for i in 0..n {
                for j in 0..n {
                    prop_assert!((r.row(i)[j] - a.row(i)[j]).abs() < 1e-10);
                }
                prop_assert!((inc.diag(i) - batch.diag(i)).abs() < 1e-10);
            }
            let dense = DMatrix::from_fn(n, n, |i, j| a.row(i)[j]);
            let b: Vec<f64> = (0..n).map(|i| (i as f64).cos()).collect();
            let x = inc.solve(&b);
            let oracle = dense.clone().lu().solve(&DVector::from_column_slice(&b)).unwrap();
            for i in 0..n {
                prop_assert!((x[i] - oracle[i]).abs() < 1e-7 * oracle.amax().max(1.0));
            }
            prop_assert!((inc.log_det() - dense.clone().determinant().ln()).abs() < 1e-8 * n as f64);
            let inv_trace = dense.try_inverse().unwrap().trace();
            prop_assert!((inc.inverse_trace() - inv_trace).abs() < 1e-7 * inv_trace.max(1.0));
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = Matrix::from_fn(2, 2, |i, j| if i == j { 1.0 } else { 2.0 });
        assert!(CholeskyFactor::decompose(&a).is_err());
    }
}
