//! Special functions used by the closed-form normalizing constants.
//!
//! Provides log-gamma (Lanczos), the modified Bessel function K_λ via
//! half-integer closed forms and the integral representation
//! K_λ(z) = ∫₀^∞ cosh(λt)·e^{−z·cosh t} dt (DLMF 10.32.9), the Gauss
//! hypergeometric series ₂F₁ with its derivative, elementary symmetric
//! polynomials, and an adaptive Gauss–Kronrod integrator shared with the
//! quadrature route for tree normalizing constants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Convergence controls for series and quadrature evaluation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SeriesControl {
    /// Relative tolerance for truncation.
    pub rel_tol: f64,
    /// Hard cap on the number of series terms.
    pub max_terms: usize,
}

impl Default for SeriesControl {
    fn default() -> Self {
        SeriesControl { rel_tol: 1e-14, max_terms: 100_000 }
    }
}

/// Natural log of the gamma function for `x > 0`.
///
/// Lanczos approximation with g = 7, nine coefficients; relative accuracy is
/// about 1e-14 over the positive axis. Arguments in (0, 0.5) go through the
/// reflection formula. Nonpositive arguments return NaN.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEFFS: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if !(x > 0.0) {
        return f64::NAN;
    }
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// log(2·cosh(x)) without overflow.
#[inline]
pub fn ln_two_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p()
}

/// log(cosh(x)) without overflow.
#[inline]
fn ln_cosh(x: f64) -> f64 {
    ln_two_cosh(x) - std::f64::consts::LN_2
}

// Gauss–Kronrod 7–15 nodes and weights on [-1, 1] (positive half).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_2,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7–15 panel: returns (K15 value, |K15 − G7| error).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let fc = f(mid);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let x = half * XGK[k];
        let f1 = f(mid - x);
        let f2 = f(mid + x);
        kron += WGK[k] * (f1 + f2);
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    kron *= half;
    gauss *= half;
    (kron, (kron - gauss).abs())
}

/// Globally adaptive Gauss–Kronrod integration of `f` over `[a, b]`.
///
/// Splits the interval with the largest error estimate until the summed
/// error drops below `max(abs_tol, rel_tol·|integral|)`. Returns the value
/// and the final error estimate. Fails when the budget of panels is spent
/// or the integrand produces non-finite values.
pub fn integrate<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<(f64, f64)> {
    const MAX_PANELS: usize = 4000;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::QuadratureFailure(format!("bad interval [{a}, {b}]")));
    }
    // (error, a, b, value), max-heap by error via sorted insert position.
    let (v0, e0) = gk15(f, a, b);
    if !v0.is_finite() {
        return Err(Error::QuadratureFailure("integrand not finite".into()));
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = vec![(e0, a, b, v0)];
    let mut total_v = v0;
    let mut total_e = e0;
    while total_e > abs_tol.max(rel_tol * total_v.abs()) {
        if panels.len() >= MAX_PANELS {
            return Err(Error::QuadratureFailure(format!(
                "tolerance not reached after {MAX_PANELS} panels (err {total_e:.3e})"
            )));
        }
        // Worst panel.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .0.partial_cmp(&y.1 .0).expect("finite errors"))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let (err, pa, pb, val) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            // Interval at machine resolution; keep its estimate.
            panels.push((0.0, pa, pb, val));
            total_e -= err;
            continue;
        }
        let (v1, e1) = gk15(f, pa, mid);
        let (v2, e2) = gk15(f, mid, pb);
        if !(v1.is_finite() && v2.is_finite()) {
            return Err(Error::QuadratureFailure("integrand not finite".into()));
        }
        total_v += v1 + v2 - val;
        total_e += e1 + e2 - err;
        panels.push((e1, pa, mid, v1));
        panels.push((e2, mid, pb, v2));
    }
    Ok((total_v, total_e))
}

/// Modified Bessel function of the second kind K_λ(z) for z > 0.
///
/// Half-integer orders 1/2, 3/2, 5/2 use the closed forms
///
/// ```text
///   K_{1/2}(z) = √(π/2z)·e^{−z},
///   K_{3/2}(z) = √(π/2z)·e^{−z}·(1 + 1/z),
///   K_{5/2}(z) = √(π/2z)·e^{−z}·(1 + 3/z + 3/z²);
/// ```
///
/// other orders use the integral representation with adaptive quadrature.
/// The order may be any finite real (K_{−λ} = K_λ).
pub fn bessel_k(order: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if !order.is_finite() {
        return Err(Error::UnsupportedOrder(order));
    }
    if !(z > 0.0) || !z.is_finite() {
        return Err(Error::QuadratureFailure(format!("bessel_k requires z > 0, got {z}")));
    }
    let lam = order.abs();
    let half_orders = [0.5, 1.5, 2.5];
    for &h in &half_orders {
        if (lam - h).abs() < 1e-12 {
            return Ok(bessel_k_half(h, z));
        }
    }
    bessel_k_integral(lam, z, ctrl)
}

/// Closed-form K for orders 1/2, 3/2, 5/2. Panics on other orders.
pub fn bessel_k_half(order: f64, z: f64) -> f64 {
    let pref = (std::f64::consts::FRAC_PI_2 / z).sqrt() * (-z).exp();
    if (order - 0.5).abs() < 1e-12 {
        pref
    } else if (order - 1.5).abs() < 1e-12 {
        pref * (1.0 + 1.0 / z)
    } else if (order - 2.5).abs() < 1e-12 {
        pref * (1.0 + 3.0 / z + 3.0 / (z * z))
    } else {
        panic!("bessel_k_half supports orders 1/2, 3/2, 5/2; got {order}")
    }
}

/// K_λ(z) by the integral representation; exposed so tests can cross-check
/// the closed forms against quadrature.
pub fn bessel_k_integral(lam: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    // Truncate where the integrand falls 10^-20 below its t = 0 level e^{-z}:
    // z(cosh T − 1) − λT ≥ 46.
    let mut t_max: f64 = 1.0;
    while z * (t_max.cosh() - 1.0) - lam * t_max < 46.0 {
        t_max *= 1.5;
        if t_max > 750.0 {
            break;
        }
    }
    // Work relative to the t = 0 level to keep the integrand well scaled.
    let f = |t: f64| (ln_cosh(lam * t) - z * (t.cosh() - 1.0)).exp();
    let rel = ctrl.rel_tol.max(1e-13);
    let (val, _err) = integrate(&f, 0.0, t_max, rel, 1e-300)?;
    Ok(val * (-z).exp())
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for |z| < 1 by power series
///
/// ```text
///   Σ_{n≥0} (a)ₙ(b)ₙ / (c)ₙ · zⁿ/n!
/// ```
///
/// Truncates when two consecutive terms fall below `rel_tol` times the
/// partial sum. Fails for |z| ≥ 1 (series diverges) and for c a nonpositive
/// integer (pole).
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    if c <= 0.0 && (c - c.round()).abs() < 1e-12 {
        return Err(Error::UnsupportedOrder(c));
    }
    if z.abs() >= 1.0 {
        return Err(Error::SeriesDiverged(z));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut prev_small = false;
    for n in 0..ctrl.max_terms {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        let small = term.abs() <= ctrl.rel_tol * sum.abs().max(f64::MIN_POSITIVE);
        if small && prev_small {
            return Ok(sum);
        }
        prev_small = small;
        if term == 0.0 {
            // Terminating series (a or b a nonpositive integer).
            return Ok(sum);
        }
    }
    Err(Error::TermCapExceeded(ctrl.max_terms))
}

/// Derivative d/dz ₂F₁(a, b; c; z) = (ab/c)·₂F₁(a+1, b+1; c+1; z).
pub fn gauss_2f1_prime(a: f64, b: f64, c: f64, z: f64, ctrl: &SeriesControl) -> Result<f64> {
    Ok(a * b / c * gauss_2f1(a + 1.0, b + 1.0, c + 1.0, z, ctrl)?)
}

/// Elementary symmetric polynomials σ_0, …, σ_n of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut e = vec![0.0f64; n + 1];
    e[0] = 1.0;
    for (i, &x) in values.iter().enumerate() {
        for k in (1..=(i + 1)).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(2.0), 0.0, epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(5.0), 24.0f64.ln(), max_relative = 1e-13);
        // Γ(1/2) = √π.
        assert_relative_eq!(
            ln_gamma(0.5),
            0.5 * std::f64::consts::PI.ln(),
            max_relative = 1e-13
        );
        // Γ(3.5) = (5/2)(3/2)(1/2)√π.
        let g35 = (15.0 / 8.0) * std::f64::consts::PI.sqrt();
        assert_relative_eq!(ln_gamma(3.5), g35.ln(), max_relative = 1e-13);
    }

    #[test]
    fn ln_gamma_recurrence() {
        for &x in &[0.1, 0.3, 0.7, 1.3, 2.9, 7.5, 25.0, 100.5] {
            assert_relative_eq!(
                ln_gamma(x + 1.0) - ln_gamma(x),
                x.ln(),
                max_relative = 1e-11,
                epsilon = 1e-11
            );
        }
    }

    #[test]
    fn integrate_polynomial_and_gaussian() {
        // ∫₀¹ x³ dx = 1/4 (exact for GK15).
        let (v, _) = integrate(&|x: f64| x * x * x, 0.0, 1.0, 1e-13, 1e-300).unwrap();
        assert_relative_eq!(v, 0.25, max_relative = 1e-14);
        // ∫_{-8}^{8} e^{-x²/2} dx ≈ √(2π).
        let (v, _) = integrate(&|x: f64| (-0.5 * x * x).exp(), -8.0, 8.0, 1e-12, 1e-300).unwrap();
        assert_relative_eq!(v, (2.0 * std::f64::consts::PI).sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn bessel_closed_forms_match_quadrature() {
        let ctrl = SeriesControl::default();
        for &lam in &[0.5, 1.5, 2.5] {
            for &z in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0] {
                let closed = bessel_k_half(lam, z);
                let quad = bessel_k_integral(lam, z, &ctrl).unwrap();
                assert_relative_eq!(closed, quad, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn bessel_reference_values() {
        // Abramowitz & Stegun, Table 9.8.
        let ctrl = SeriesControl::default();
        let k0 = bessel_k(0.0, 1.0, &ctrl).unwrap();
        assert_relative_eq!(k0, 0.421_024_438_240_708, max_relative = 1e-9);
        let k1 = bessel_k(1.0, 1.0, &ctrl).unwrap();
        assert_relative_eq!(k1, 0.601_907_230_197_235, max_relative = 1e-9);
    }

    #[test]
    fn bessel_recurrence() {
        // K_{λ+1}(z) = K_{λ−1}(z) + (2λ/z)·K_λ(z), all via quadrature.
        let ctrl = SeriesControl::default();
        for &z in &[0.5, 1.0, 3.0, 8.0] {
            let k0 = bessel_k_integral(0.0, z, &ctrl).unwrap();
            let k1 = bessel_k_integral(1.0, z, &ctrl).unwrap();
            let k2 = bessel_k_integral(2.0, z, &ctrl).unwrap();
            assert_relative_eq!(k2, k0 + 2.0 / z * k1, max_relative = 1e-9);
        }
    }

    #[test]
    fn bessel_small_argument_asymptotics() {
        // K_λ(z) ~ ½Γ(λ)(2/z)^λ as z → 0 for λ > 0.
        let ctrl = SeriesControl::default();
        let lam = 1.0;
        let z = 1e-4;
        let k = bessel_k_integral(lam, z, &ctrl).unwrap();
        let asym = 0.5 * ln_gamma(lam).exp() * (2.0 / z).powf(lam);
        assert_relative_eq!(k, asym, max_relative = 1e-3);
    }

    #[test]
    fn bessel_even_in_order_and_errors() {
        let ctrl = SeriesControl::default();
        let a = bessel_k(-1.5, 2.0, &ctrl).unwrap();
        let b = bessel_k(1.5, 2.0, &ctrl).unwrap();
        assert_eq!(a, b);
        assert!(matches!(bessel_k(f64::NAN, 1.0, &ctrl), Err(Error::UnsupportedOrder(_))));
        assert!(matches!(bessel_k(1.0, 0.0, &ctrl), Err(Error::QuadratureFailure(_))));
        assert!(matches!(bessel_k(1.0, -2.0, &ctrl), Err(Error::QuadratureFailure(_))));
    }

    #[test]
    fn gauss_2f1_known_values() {
        let ctrl = SeriesControl::default();
        // ₂F₁(1, 1; 2; z) = −ln(1−z)/z; at z = 0.5 this is 2·ln 2.
        let v = gauss_2f1(1.0, 1.0, 2.0, 0.5, &ctrl).unwrap();
        assert_relative_eq!(v, 2.0 * std::f64::consts::LN_2, max_relative = 1e-12);
        assert_relative_eq!(v, 1.386_294_4, max_relative = 1e-6);
        // ₂F₁(a, b; b; z) = (1−z)^{−a}.
        let v = gauss_2f1(0.7, 2.3, 2.3, -0.4, &ctrl).unwrap();
        assert_relative_eq!(v, 1.4f64.powf(-0.7), max_relative = 1e-12);
        // Terminating series: a = −2 gives a quadratic in z.
        let v = gauss_2f1(-2.0, 3.0, 1.5, 0.9, &ctrl).unwrap();
        let z: f64 = 0.9;
        let direct = 1.0 + (-2.0) * 3.0 / 1.5 * z + (-2.0 * -1.0) * (3.0 * 4.0) / (1.5 * 2.5) * z * z / 2.0;
        assert_relative_eq!(v, direct, max_relative = 1e-12);
    }

    #[test]
    fn gauss_2f1_domain_errors() {
        let ctrl = SeriesControl::default();
        assert!(matches!(gauss_2f1(1.0, 1.0, 2.0, 1.0, &ctrl), Err(Error::SeriesDiverged(_))));
        assert!(matches!(gauss_2f1(1.0, 1.0, -3.0, 0.5, &ctrl), Err(Error::UnsupportedOrder(_))));
        let tight = SeriesControl { rel_tol: 1e-14, max_terms: 3 };
        assert!(matches!(
            gauss_2f1(0.9, 1.1, 1.3, 0.99, &tight),
            Err(Error::TermCapExceeded(3))
        ));
    }

    #[test]
    fn gauss_2f1_derivative_matches_finite_difference() {
        let ctrl = SeriesControl::default();
        let (a, b, c, z) = (0.8, 1.7, 2.4, 0.3);
        let h = 1e-6;
        let fd = (gauss_2f1(a, b, c, z + h, &ctrl).unwrap()
            - gauss_2f1(a, b, c, z - h, &ctrl).unwrap())
            / (2.0 * h);
        let rule = gauss_2f1_prime(a, b, c, z, &ctrl).unwrap();
        assert_relative_eq!(rule, fd, max_relative = 1e-8);
    }

    #[test]
    fn elementary_symmetric_matches_bruteforce() {
        let xs = [2.0, -1.0, 0.5, 3.0];
        let e = elementary_symmetric(&xs);
        assert_eq!(e.len(), 5);
        assert_relative_eq!(e[0], 1.0);
        assert_relative_eq!(e[1], xs.iter().sum::<f64>(), max_relative = 1e-14);
        // σ_2 = Σ_{i<j} x_i x_j.
        let mut s2 = 0.0;
        for i in 0..4 {
            for j in (i + 1)..4 {
                s2 += xs[i] * xs[j];
            }
        }
        assert_relative_eq!(e[2], s2, max_relative = 1e-14);
        assert_relative_eq!(e[4], xs.iter().product::<f64>(), max_relative = 1e-14);
    }
}
