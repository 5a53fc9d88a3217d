//! Accuracy and convergence diagnostics for estimated precision matrices.
//!
//! Two kinds of summaries live here. Matrix accuracy is measured by the
//! normalized mean squared error
//!
//! ```text
//!   nmse(K, K_ref) = ‖K − K_ref‖²_F / ‖K_ref‖²_F,
//! ```
//!
//! with the Frobenius norm taken over all p² entries, so off-diagonal
//! deviations count twice, matching the symmetry of the matrices. The second
//! argument is the reference that normalizes the error.
//!
//! Chain mixing is summarized from a scalar trace x₀, …, x_{n−1} by the
//! global-mean autocorrelation estimator
//!
//! ```text
//!   R_h = Σ_{t=h}^{n−1} (x_t − x̄)(x_{t−h} − x̄) / Σ_t (x_t − x̄)²,
//! ```
//!
//! which satisfies R₀ = 1 and |R_h| ≤ 1, and by the batch-means standard
//! error of x̄: the series is split into B equal batches (clipping the
//! earliest observations if B does not divide n) and the spread of the batch
//! means estimates the Monte-Carlo error of the overall mean.

use crate::error::{Error, Result};
use crate::matrix::SymMatrix;

/// Default batch count for [`batch_standard_error`].
pub const DEFAULT_BATCHES: usize = 20;

/// Normalized mean squared error of `k` against the reference `k_ref`.
pub fn nmse(k: &SymMatrix, k_ref: &SymMatrix) -> Result<f64> {
    if k.dim() != k_ref.dim() {
        return Err(Error::DimensionMismatch { expected: k_ref.dim(), got: k.dim() });
    }
    let denom = k_ref.frob_norm();
    if denom <= crate::TOL_ZERO {
        return Err(Error::ZeroReference);
    }
    Ok(k.frob_dist_sq(k_ref) / (denom * denom))
}

/// Autocorrelation estimates R₀, …, R_max_lag of a scalar series.
///
/// Requires `max_lag < series.len()`; a constant series has no defined
/// autocorrelation and is reported as [`Error::ConstantSeries`].
pub fn autocorrelation(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if n < 2 || max_lag >= n {
        return Err(Error::InvalidConfig(format!(
            "autocorrelation to lag {max_lag} needs a series longer than the lag, got {n} points"
        )));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = series.iter().map(|&x| x - mean).collect();
    let c0: f64 = centered.iter().map(|&x| x * x).sum();
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::ConstantSeries);
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for h in 0..=max_lag {
        let num: f64 = (h..n).map(|t| centered[t] * centered[t - h]).sum();
        acf.push(num / c0);
    }
    Ok(acf)
}

/// Batch-means standard error of the series mean.
///
/// Splits the series into `n_batches` consecutive batches of equal size,
/// discarding the earliest observations when the length is not divisible,
/// and returns sd(batch means)/√B. Needs at least two batches with at least
/// one observation each.
pub fn batch_standard_error(series: &[f64], n_batches: usize) -> Result<f64> {
    let n = series.len();
    if n_batches < 2 || n < n_batches {
        return Err(Error::BadBatchCount { batches: n_batches, len: n });
    }
    let size = n / n_batches;
    let start = n - n_batches * size;
    let means: Vec<f64> = (0..n_batches)
        .map(|b| {
            let lo = start + b * size;
            series[lo..lo + size].iter().sum::<f64>() / size as f64
        })
        .collect();
    let grand = means.iter().sum::<f64>() / n_batches as f64;
    let var = means.iter().map(|&m| (m - grand) * (m - grand)).sum::<f64>()
        / (n_batches as f64 - 1.0);
    Ok((var / n_batches as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn nmse_has_known_values() {
        let i2 = SymMatrix::identity(2);
        assert_abs_diff_eq!(nmse(&i2, &i2).unwrap(), 0.0);
        let mut two = SymMatrix::identity(2);
        two.scale(2.0);
        assert_abs_diff_eq!(nmse(&two, &i2).unwrap(), 1.0, epsilon = 1e-15);
        // The reference is the second argument, so the error is relative to
        // its norm and the function is not symmetric.
        assert_abs_diff_eq!(nmse(&i2, &two).unwrap(), 0.25, epsilon = 1e-15);
        // Off-diagonal deviations count twice.
        let mut k = SymMatrix::identity(2);
        k.set(0, 1, 0.5);
        assert_abs_diff_eq!(nmse(&k, &i2).unwrap(), 0.25, epsilon = 1e-15);
    }

    #[test]
    fn nmse_of_the_triangle_sampler_table_is_small() {
        // Published sampler output against the exact mean for the triangle
        // model; a healthy chain is this close after 5000 iterations.
        let exact = SymMatrix::from_rows(&[
            vec![1.8108, -0.0073, -0.5517],
            vec![-0.0073, 1.4472, -0.5517],
            vec![-0.5517, -0.5517, 1.2413],
        ])
        .unwrap();
        let sampled = SymMatrix::from_rows(&[
            vec![1.8097, -0.0075, -0.5514],
            vec![-0.0075, 1.4485, -0.5514],
            vec![-0.5514, -0.5514, 1.2442],
        ])
        .unwrap();
        let e = nmse(&sampled, &exact).unwrap();
        assert!(e > 0.0 && e < 1e-4, "nmse {e:.3e}");
    }

    #[test]
    fn nmse_rejects_zero_reference_and_dimension_mismatch() {
        let z = SymMatrix::zeros(2);
        let i2 = SymMatrix::identity(2);
        assert!(matches!(nmse(&i2, &z), Err(Error::ZeroReference)));
        let i3 = SymMatrix::identity(3);
        assert!(matches!(nmse(&i3, &i2), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn autocorrelation_of_simple_series() {
        // An alternating series is perfectly negatively correlated at lag 1.
        let alt: Vec<f64> = (0..1000).map(|t| if t % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let acf = autocorrelation(&alt, 2).unwrap();
        assert_abs_diff_eq!(acf[0], 1.0);
        assert!(acf[1] < -0.99, "lag-1 {}", acf[1]);
        assert!(acf[2] > 0.99, "lag-2 {}", acf[2]);
        // Independent draws decorrelate.
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        let iid: Vec<f64> = (0..10_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let acf = autocorrelation(&iid, 5).unwrap();
        for (h, &r) in acf.iter().enumerate().skip(1) {
            assert!(r.abs() < 0.05, "lag-{h} correlation {r} too large for iid input");
        }
    }

    #[test]
    fn autocorrelation_is_shift_invariant() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..500).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let shifted: Vec<f64> = x.iter().map(|&v| v + 42.0).collect();
        let a = autocorrelation(&x, 10).unwrap();
        let b = autocorrelation(&shifted, 10).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert_abs_diff_eq!(u, v, epsilon = 1e-9);
        }
    }

    #[test]
    fn autocorrelation_rejects_constant_and_short_series() {
        let c = vec![1.5; 100];
        assert!(matches!(autocorrelation(&c, 5), Err(Error::ConstantSeries)));
        let x = vec![1.0, 2.0, 3.0];
        assert!(matches!(autocorrelation(&x, 3), Err(Error::InvalidConfig(_))));
        assert!(matches!(autocorrelation(&[], 0), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn batch_standard_error_tracks_the_clt_rate() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x: Vec<f64> = (0..20_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let se = batch_standard_error(&x, DEFAULT_BATCHES).unwrap();
        // For iid standard normals the truth is 1/√n ≈ 0.00707, and the
        // batch estimate has roughly 30% relative spread at 20 batches.
        assert!((0.004..0.011).contains(&se), "se {se}");
        // Quadrupling the sample roughly halves the error.
        let x4: Vec<f64> = (0..80_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let se4 = batch_standard_error(&x4, DEFAULT_BATCHES).unwrap();
        assert!(se4 < se, "se {se4} did not shrink from {se}");
    }

    #[test]
    fn batch_standard_error_is_shift_invariant() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let x: Vec<f64> = (0..5_000).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let shifted: Vec<f64> = x.iter().map(|&v| v + 1000.0).collect();
        let a = batch_standard_error(&x, DEFAULT_BATCHES).unwrap();
        let b = batch_standard_error(&shifted, DEFAULT_BATCHES).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-9 * a.abs());
    }

    #[test]
    fn batch_standard_error_handles_remainders_and_bad_counts() {
        let x: Vec<f64> = (0..103).map(|t| t as f64).collect();
        assert!(batch_standard_error(&x, 20).unwrap() > 0.0);
        assert!(matches!(
            batch_standard_error(&x, 1),
            Err(Error::BadBatchCount { batches: 1, len: 103 })
        ));
        assert!(matches!(
            batch_standard_error(&x[..5], 20),
            Err(Error::BadBatchCount { batches: 20, len: 5 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        /// Autocorrelations never exceed one in magnitude.
        #[test]
        fn autocorrelation_is_bounded(xs in prop::collection::vec(-100.0f64..100.0, 10..200)) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-9));
            let max_lag = (xs.len() - 1).min(40);
            let acf = autocorrelation(&xs, max_lag).unwrap();
            prop_assert!((acf[0] - 1.0).abs() < 1e-12);
            for &r in &acf {
                prop_assert!(r.abs() <= 1.0 + 1e-12);
            }
        }

        /// Scaling both matrices leaves the relative error unchanged.
        #[test]
        fn nmse_is_scale_invariant(t in 0.01f64..100.0, d in 1.0f64..5.0, o in -0.9f64..0.9) {
            let mut k_ref = SymMatrix::identity(2);
            k_ref.set(0, 0, d);
            k_ref.set(0, 1, o);
            let mut k = k_ref.clone();
            k.set(1, 1, 1.5);
            let base = nmse(&k, &k_ref).unwrap();
            let mut ks = k.clone();
            ks.scale(t);
            let mut rs = k_ref.clone();
            rs.scale(t);
            let moved = nmse(&ks, &rs).unwrap();
            prop_assert!((moved - base).abs() <= 1e-9 * base.max(1.0));
        }
    }
}
