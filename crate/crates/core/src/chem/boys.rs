use std::f64::consts::PI;

use crate::{Error, Result};

/// Above this argument the asymptotic form plus upward recursion is used;
/// the neglected erfc term is below 1e-16 there.
const ASYMPTOTIC_THRESHOLD: f64 = 35.0;

/// Boys function `F_m(x) = ∫₀¹ t^{2m} exp(−x t²) dt`.
///
/// Small arguments use the convergent series
/// `F_m(x) = e^{−x} Σ_k (2x)^k / ((2m+1)(2m+3)…(2m+2k+1))`;
/// large arguments use `F_0(x) = ½√(π/x)` followed by the (stable for large
/// `x`) upward recursion `F_{m+1} = ((2m+1) F_m − e^{−x}) / (2x)`.
pub fn boys_function(m: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("Boys function argument must be non-negative, got {x}")));
    }
    if x < ASYMPTOTIC_THRESHOLD {
        Ok(series(m, x))
    } else {
        let ex = (-x).exp();
        let mut f = 0.5 * (PI / x).sqrt();
        for k in 0..m {
            f = ((2 * k + 1) as f64 * f - ex) / (2.0 * x);
        }
        Ok(f)
    }
}

fn series(m: u32, x: f64) -> f64 {
    let mut denom = (2 * m + 1) as f64;
    let mut term = 1.0 / denom;
    let mut sum = term;
    for _ in 0..500 {
        denom += 2.0;
        term *= 2.0 * x / denom;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    (-x).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Adaptive Simpson quadrature of the defining integral.
    fn quadrature(m: u32, x: f64) -> f64 {
        let f = |t: f64| t.powi(2 * m as i32) * (-x * t * t).exp();
        fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * eps {
                return left + right + (left + right - whole) / 15.0;
            }
            simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)
                + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(0.0), f(0.5), f(1.0));
        let whole = (fa + 4.0 * fm + fb) / 6.0;
        simpson(&f, 0.0, 1.0, fa, fm, fb, whole, 1e-15, 40)
    }

    #[test]
    fn closed_form_values() {
        assert!((boys_function(0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((boys_function(1, 0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        for m in 0..5 {
            assert!((boys_function(m, 0.0).unwrap() - 1.0 / (2 * m + 1) as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn f0_at_one_matches_quadrature() {
        let oracle = quadrature(0, 1.0);
        // frozen from the quadrature oracle
        assert!((oracle - 0.746_824_132_812_427).abs() < 1e-13);
        assert!((boys_function(0, 1.0).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature_across_range() {
        for m in 0..=4 {
            for &x in &[1e-6, 0.1, 0.7, 2.5, 10.0, 20.0, 34.9, 35.0, 36.0, 60.0, 120.0] {
                let q = quadrature(m, x);
                let b = boys_function(m, x).unwrap();
                assert!((q - b).abs() < 1e-12, "m={m} x={x}: {b} vs {q}");
            }
        }
    }

    #[test]
    fn negative_argument_is_domain_error() {
        assert!(matches!(boys_function(0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(boys_function(0, f64::NAN), Err(Error::Domain(_))));
    }
}
