//! Special functions: overflow-safe combinatorics, complex Hermite
//! polynomials, and the Gauss hypergeometric series.

use num_complex::Complex64;
use statrs::function::gamma as sgamma;

use crate::error::{domain, Error, Result};

/// Below this the factorial and binomial helpers use exact integer arithmetic.
const EXACT_FACTORIAL_MAX: usize = 20;
const EXACT_BINOMIAL_MAX: u64 = 60;

/// Upper bound on terms summed by [`gauss_2f1`] before giving up.
pub const MAX_SERIES_TERMS: usize = 1_000_000;

/// Above this argument the hypergeometric series is replaced by the
/// `z -> 1 - z` connection formula when it applies.
const SERIES_Z_MAX: f64 = 0.75;

/// `n!` as `u64`, exact for `n <= 20`.
fn factorial_u64(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// `n!` in floating point. Exact for `n <= 22`, overflows to infinity
/// above 170.
pub fn factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        factorial_u64(n) as f64
    } else {
        ln_factorial(n).exp()
    }
}

/// `ln n!`.
pub fn ln_factorial(n: usize) -> f64 {
    if n <= EXACT_FACTORIAL_MAX {
        (factorial_u64(n) as f64).ln()
    } else {
        sgamma::ln_gamma(n as f64 + 1.0)
    }
}

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    sgamma::ln_gamma(x)
}

/// `Γ(x)` for real `x`, including negative non-integers.
pub fn gamma(x: f64) -> f64 {
    sgamma::gamma(x)
}

/// `1/Γ(x)`, which is zero at the poles `x = 0, -1, -2, ...`.
pub fn recip_gamma(x: f64) -> f64 {
    if x <= 0.0 && x.fract() == 0.0 {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= EXACT_BINOMIAL_MAX {
        let k = k.min(n - k);
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        c as f64
    } else {
        ln_binomial(n, k).exp()
    }
}

/// `ln C(n, k)` for `k <= n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n as usize) - ln_factorial(k as usize) - ln_factorial((n - k) as usize)
}

/// `ln Σ exp(xᵢ)` without overflow. Returns `-∞` for an empty input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Physicists' Hermite polynomial `H_n(z)` by the three-term recurrence
/// `H_{k+1} = 2z H_k − 2k H_{k−1}`.
pub fn hermite(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = 2.0 * z;
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `H_n(z) / sqrt(2ⁿ n!)`, computed by the rescaled recurrence so that large
/// degrees do not overflow.
pub fn hermite_normalized(n: usize, z: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = z * std::f64::consts::SQRT_2;
    for k in 1..n {
        let kf = k as f64;
        let next = z * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x.fract() == 0.0
}

/// Gauss hypergeometric function `₂F₁(a, b; c; z)` for real `0 <= z < 1`.
///
/// The power series is summed with the term-ratio recurrence. For
/// `z > 0.75` and non-integer `c − a − b` the `z → 1 − z` connection
/// formula is used instead; with integer `c − a − b` the (slower) series is
/// kept, which still converges for `z < 1`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return domain(format!("2F1 argument z = {z} outside [0, 1)"));
    }
    if is_nonpositive_integer(c) {
        return domain(format!("2F1 parameter c = {c} is a non-positive integer"));
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let terminating = is_nonpositive_integer(a) || is_nonpositive_integer(b);
    let s = c - a - b;
    if terminating || z <= SERIES_Z_MAX || s.fract() == 0.0 {
        return hyp2f1_series(a, b, c, z);
    }

    let w = 1.0 - z;
    let gc = gamma(c);
    let first = gc * gamma(s) * recip_gamma(c - a) * recip_gamma(c - b);
    let second = gc * gamma(-s) * recip_gamma(a) * recip_gamma(b);
    let mut total = 0.0;
    if first != 0.0 {
        total += first * hyp2f1_series(a, b, 1.0 - s, w)?;
    }
    if second != 0.0 {
        total += second * w.powf(s) * hyp2f1_series(c - a, c - b, 1.0 + s, w)?;
    }
    Ok(total)
}

/// Direct power series. Stops once the remaining geometric-tail bound falls
/// below 1e-16 of the running sum.
fn hyp2f1_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut sum = 1.0;
    let mut term = 1.0;
    for k in 0..MAX_SERIES_TERMS {
        let kf = k as f64;
        let ratio = (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        term *= ratio;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        // once the ratio settles below one the tail is bounded by term/(1-ratio)
        if ratio.abs() < 1.0 && (term / (1.0 - ratio.abs())).abs() <= 1e-16 * sum.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Nonconvergence {
        terms: MAX_SERIES_TERMS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Explicit sum `n! Σ_m (−1)^m (2z)^{n−2m} / (m! (n−2m)!)`.
    fn hermite_explicit(n: usize, z: Complex64) -> Complex64 {
        (0..=n / 2)
            .map(|m| {
                let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                sign * factorial(n) / (factorial(m) * factorial(n - 2 * m)) * (2.0 * z).powi((n - 2 * m) as i32)
            })
            .sum()
    }

    #[test]
    fn hermite_low_orders() {
        let z = c(0.3, -1.1);
        assert_eq!(hermite(0, z), c(1.0, 0.0));
        assert_eq!(hermite(1, z), 2.0 * z);
        assert_eq!(hermite(2, c(3.0, 0.0)), c(34.0, 0.0));
    }

    #[test]
    fn hermite_matches_explicit_sum() {
        let z = c(1.3, 0.4);
        let rec = hermite(5, z);
        let exp = hermite_explicit(5, z);
        assert!((rec - exp).norm() / exp.norm() < 1e-12, "{rec} vs {exp}");
        for n in 0..25 {
            let z = c(-0.7, 0.9);
            let rec = hermite(n, z);
            let exp = hermite_explicit(n, z);
            assert!((rec - exp).norm() <= 1e-11 * exp.norm().max(1.0), "n={n}");
        }
    }

    #[test]
    fn hermite_normalized_consistent() {
        for n in 0..40 {
            let z = c(0.8, 0.25);
            let scaled = hermite(n, z) / (2f64.powi(n as i32) * factorial(n)).sqrt();
            let norm = hermite_normalized(n, z);
            assert!((scaled - norm).norm() <= 1e-12 * scaled.norm().max(1.0), "n={n}");
        }
    }

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), 1.0);
        assert_eq!(factorial(20), 2432902008176640000.0);
        assert!((factorial(25) / 1.5511210043330986e25 - 1.0).abs() < 1e-13);
        assert_eq!(binomial(5, 3), 10.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial(60, 30), 118264581564861424.0);
        // log route above the exact threshold agrees with Pascal's rule
        let lhs = binomial(80, 33);
        let rhs = binomial(79, 32) + binomial(79, 33);
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
        assert!(ln_factorial(200).is_finite());
    }

    #[test]
    fn recip_gamma_poles() {
        assert_eq!(recip_gamma(0.0), 0.0);
        assert_eq!(recip_gamma(-3.0), 0.0);
        assert!((recip_gamma(-0.5) - 1.0 / (-2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_large() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }

    /// Plain term-by-term summation, independent of the tail-bound logic.
    fn brute_series(a: f64, b: f64, c: f64, z: f64, terms: usize) -> f64 {
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 0..terms {
            sum += term;
            let kf = k as f64;
            term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        }
        sum
    }

    #[test]
    fn gauss_2f1_identities() {
        assert_eq!(gauss_2f1(0.3, 2.0, 1.5, 0.0).unwrap(), 1.0);
        let v = gauss_2f1(1.0, 0.5, 1.0, 0.49).unwrap();
        assert!((v - 1.0 / 0.51f64.sqrt()).abs() < 1e-13);
        assert!((v - 1.400280).abs() < 1e-6);
        let v = gauss_2f1(2.0, 0.5, 1.0, 0.49).unwrap();
        let b = brute_series(2.0, 0.5, 1.0, 0.49, 5000);
        assert!((v - b).abs() / b < 1e-12);
    }

    #[test]
    fn gauss_2f1_connection_formula_region() {
        // F(1, 3/2; 1; z) = (1 − z)^{−3/2}; c − a − b = −3/2 is non-integer
        for &z in &[0.76, 0.9, 0.97, 0.995] {
            let v = gauss_2f1(1.0, 1.5, 1.0, z).unwrap();
            let exact = (1.0 - z).powf(-1.5);
            assert!((v / exact - 1.0).abs() < 1e-12, "z={z}: {v} vs {exact}");
        }
        for &(a, b, c, z) in &[(2.5, 3.0, 1.0, 0.9), (0.7, 1.9, 2.3, 0.85), (3.0, 0.5, 1.0, 0.8)] {
            let v = gauss_2f1(a, b, c, z).unwrap();
            let d = brute_series(a, b, c, z, 200_000);
            assert!((v / d - 1.0).abs() < 1e-11, "({a},{b},{c},{z}): {v} vs {d}");
        }
    }

    #[test]
    fn gauss_2f1_integer_excess_uses_series() {
        // c − a − b = −1: F(1, 1; 1; z) = 1/(1 − z)
        let v = gauss_2f1(1.0, 1.0, 1.0, 0.95).unwrap();
        assert!((v - 20.0).abs() < 1e-10);
    }

    #[test]
    fn gauss_2f1_terminating_and_errors() {
        // F(−2, b; c; z) = 1 − 2bz/c + b(b+1)z²/(c(c+1))
        let (b, c, z) = (0.5, 1.0, 0.9);
        let exact = 1.0 - 2.0 * b * z / c + b * (b + 1.0) * z * z / (c * (c + 1.0));
        assert!((gauss_2f1(-2.0, b, c, z).unwrap() - exact).abs() < 1e-15);
        assert!(matches!(gauss_2f1(1.0, 1.0, -2.0, 0.3), Err(Error::Domain(_))));
        assert!(matches!(gauss_2f1(1.0, 1.0, 1.0, 1.0), Err(Error::Domain(_))));
    }
}
