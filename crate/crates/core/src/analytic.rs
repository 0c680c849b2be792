//! Closed forms for photon-added and photon-subtracted squeezed vacuum.
//!
//! With `κ′ = T²κ` the attenuated squeezed vacuum is again a squeezed
//! vacuum, so both conditional states have Fock coefficients, norms,
//! probabilities and phase-space functions in closed form. Everything here
//! is formula evaluation; [`crate::phasespace`] and [`crate::beamsplitter`]
//! provide the independent numerical routes used to check it.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;

use crate::beamsplitter::BeamSplitterParams;
use crate::error::{domain, Result};
use crate::fock::{FockVector, SqueezeParam, TruncatedState};
use crate::special::{binomial, factorial, gauss_2f1, hermite, ln_factorial};

/// Below this `|κ′|` the state is replaced by its `κ′ → 0` limit, a Fock
/// state, because the printed Wigner form has a removable singularity.
pub const KAPPA_PRIME_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatKind {
    Added,
    Subtracted,
}

/// A photon-added (`count = n₀`) or photon-subtracted (`count = m`)
/// squeezed vacuum with effective parameter `κ′`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CatParams {
    pub kappa_prime: Complex64,
    pub count: usize,
    pub kind: CatKind,
}

impl CatParams {
    pub fn new(kappa_prime: Complex64, count: usize, kind: CatKind) -> Result<Self> {
        if !kappa_prime.is_finite() || kappa_prime.norm() >= 1.0 {
            return domain(format!("|κ′| = {} must be < 1", kappa_prime.norm()));
        }
        Ok(Self {
            kappa_prime,
            count,
            kind,
        })
    }

    pub fn added(kappa_prime: Complex64, n0: usize) -> Result<Self> {
        Self::new(kappa_prime, n0, CatKind::Added)
    }

    pub fn subtracted(kappa_prime: Complex64, m: usize) -> Result<Self> {
        Self::new(kappa_prime, m, CatKind::Subtracted)
    }

    /// Parameters produced by a squeezed vacuum `κ` on a splitter with
    /// transmittance `T`.
    pub fn from_setup(kappa: SqueezeParam, bs: &BeamSplitterParams, count: usize, kind: CatKind) -> Result<Self> {
        Self::new(kappa.attenuated(bs.t()).kappa(), count, kind)
    }

    pub fn abs(&self) -> f64 {
        self.kappa_prime.norm()
    }

    /// `λ = (1 − κ′)/(1 + κ′)`.
    pub fn lambda(&self) -> Complex64 {
        (1.0 - self.kappa_prime) / (1.0 + self.kappa_prime)
    }

    /// `Δ = 1 + |κ′|² + 2|κ′| cos(2φ − φ_κ′)`.
    pub fn delta(&self, phi: f64) -> f64 {
        let a = self.abs();
        1.0 + a * a + 2.0 * a * (2.0 * phi - self.kappa_prime.arg()).cos()
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        match self.kind {
            CatKind::Added => coeff_added(n, self.count, self.kappa_prime),
            CatKind::Subtracted => coeff_subtracted(n, self.count, self.kappa_prime),
        }
    }

    pub fn norm(&self) -> Result<f64> {
        match self.kind {
            CatKind::Added => norm_added(self.count, self.abs()),
            CatKind::Subtracted => norm_subtracted(self.count, self.abs()),
        }
    }

    /// Fock level of the `κ′ → 0` limit state.
    fn limit_level(&self) -> usize {
        match self.kind {
            CatKind::Added => self.count,
            CatKind::Subtracted => self.count % 2,
        }
    }

    fn degenerate(&self) -> bool {
        self.abs() < KAPPA_PRIME_FLOOR
    }
}

/// A point of phase space in the vacuum-variance-½ convention.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

impl PhasePoint {
    pub fn new(x: f64, p: f64) -> Self {
        Self { x, p }
    }

    /// Coherent amplitude `α = (x + ip)/√2` whose `|α⟩` is centred at
    /// `(x, p)`.
    pub fn alpha(&self) -> Complex64 {
        Complex64::new(self.x, self.p) / SQRT_2
    }
}

/// `(κ′/2)^k` times a real log-magnitude prefactor, or zero when `κ′ = 0`
/// and `k > 0`.
fn kappa_power(ln_pref: f64, k: usize, kappa_prime: Complex64) -> Complex64 {
    if k == 0 {
        return Complex64::new(ln_pref.exp(), 0.0);
    }
    let a = kappa_prime.norm();
    if a == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    Complex64::from_polar(
        (ln_pref + k as f64 * (0.5 * a).ln()).exp(),
        k as f64 * kappa_prime.arg(),
    )
}

/// `c_{n,n₀,0} = √(n!) / Γ((n−n₀)/2 + 1) · (κ′/2)^{(n−n₀)/2}` for `n − n₀`
/// even and nonnegative, zero otherwise.
pub fn coeff_added(n: usize, n0: usize, kappa_prime: Complex64) -> Complex64 {
    if n < n0 || (n - n0) % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let k = (n - n0) / 2;
    kappa_power(0.5 * ln_factorial(n) - ln_factorial(k), k, kappa_prime)
}

/// `c_{n,0,m} = (n+m)! / (Γ((n+m)/2 + 1) √(n!)) · (κ′/2)^{(n+m)/2}` for
/// `n + m` even, zero otherwise.
pub fn coeff_subtracted(n: usize, m: usize, kappa_prime: Complex64) -> Complex64 {
    if (n + m) % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let k = (n + m) / 2;
    kappa_power(
        ln_factorial(n + m) - ln_factorial(k) - 0.5 * ln_factorial(n),
        k,
        kappa_prime,
    )
}

fn check_abs(a: f64) -> Result<()> {
    if !(0.0..1.0).contains(&a) {
        return domain(format!("|κ′| = {a} must lie in [0, 1)"));
    }
    Ok(())
}

/// `𝒩_{n₀,0} = n₀! F((n₀+1)/2, (n₀+2)/2; 1; |κ′|²)`.
pub fn norm_added(n0: usize, kappa_prime_abs: f64) -> Result<f64> {
    check_abs(kappa_prime_abs)?;
    let n = n0 as f64;
    Ok(factorial(n0) * gauss_2f1(0.5 * (n + 1.0), 0.5 * (n + 2.0), 1.0, kappa_prime_abs.powi(2))?)
}

/// `𝒩_{0,m} = |κ′|^{2m} (1−|κ′|²)^{−m−½} Σ_k (m!)² (2|κ′|)^{−2k} / ((m−2k)! (k!)²)`,
/// summed in log space. At `κ′ = 0` it is `1` for `m = 0` and `0` otherwise.
pub fn norm_subtracted(m: usize, kappa_prime_abs: f64) -> Result<f64> {
    check_abs(kappa_prime_abs)?;
    let a = kappa_prime_abs;
    if a == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let outer = -(m as f64 + 0.5) * (1.0 - a * a).ln();
    let sum: f64 = (0..=m / 2)
        .map(|k| {
            (2.0 * ln_factorial(m) - ln_factorial(m - 2 * k) - 2.0 * ln_factorial(k) + (2 * m - 2 * k) as f64 * a.ln()
                - 2.0 * k as f64 * 2f64.ln()
                + outer)
                .exp()
        })
        .sum();
    Ok(sum)
}

/// Normalized Fock vector of the cat state, truncated once the discarded
/// probability falls below `tail_tol`.
pub fn cat_state(params: &CatParams, tail_tol: f64) -> Result<TruncatedState> {
    let norm = params.norm()?;
    if norm == 0.0 {
        return Err(crate::Error::ZeroNorm);
    }
    // Nonzero weights sit on one parity. Past the first few levels the ratio
    // r = w_{n+2}/w_n decreases monotonically towards |κ′|², so once r < 1
    // the discarded mass is at most w_n r/(1−r).
    let weight = |n: usize| params.coeff(n).norm_sqr() / norm;
    let mut n = params.limit_level();
    loop {
        let (w, next) = (weight(n), weight(n + 2));
        if w == 0.0 || (next < w && w * next / (w - next) < 0.1 * tail_tol) {
            break;
        }
        n += 2;
    }
    let amps: Vec<Complex64> = (0..=n + 1).map(|k| params.coeff(k) / norm.sqrt()).collect();
    let state = FockVector::new(amps);
    let captured = state.norm_sqr();
    Ok(TruncatedState {
        state,
        tail_mass: (1.0 - captured).max(0.0),
    })
}

/// Success probability of the photon-added state, `Σ_{n₁}` over the
/// squeezed-vacuum diagonal in closed form:
/// `P(n₀) = |R|^{2n₀} √(1−|κ|²) 𝒩_{n₀,0}/n₀!`.
pub fn prob_added(n0: usize, kappa: SqueezeParam, bs: &BeamSplitterParams) -> Result<f64> {
    let kp = kappa.attenuated(bs.t()).abs();
    let r_pow = if n0 == 0 { 1.0 } else { bs.r_sq().powi(n0 as i32) };
    Ok(r_pow * (1.0 - kappa.abs().powi(2)).sqrt() * norm_added(n0, kp)? / factorial(n0))
}

/// Success probability of the photon-subtracted state:
/// `P(m) = |R|^{2m} √(1−|κ|²) (1−|κ′|²)^{−m−½}
///   Σ_k m! |κ|^{2m−2k} |T|^{2(m−2k)} / (4^k (m−2k)! (k!)²)`.
pub fn prob_subtracted(m: usize, kappa: SqueezeParam, bs: &BeamSplitterParams) -> Result<f64> {
    let ka = kappa.abs();
    let kp = kappa.attenuated(bs.t()).abs();
    check_abs(kp)?;
    let (t2, r2) = (bs.t_sq(), bs.r_sq());
    let pow = |b: f64, e: usize| if e == 0 { 1.0 } else { b.powi(e as i32) };
    let sum: f64 = (0..=m / 2)
        .map(|k| {
            let ln = ln_factorial(m) - ln_factorial(m - 2 * k) - 2.0 * ln_factorial(k) - k as f64 * 4f64.ln();
            ln.exp() * pow(ka, 2 * m - 2 * k) * pow(t2, m - 2 * k)
        })
        .sum();
    Ok(pow(r2, m) * (1.0 - ka * ka).sqrt() * (1.0 - kp * kp).powf(-(m as f64) - 0.5) * sum)
}

/// Oscillator eigenfunction `⟨x|n⟩` via the normalized Hermite recurrence.
fn fock_wavefunction(n: usize, x: f64) -> f64 {
    PI.powf(-0.25) * (-0.5 * x * x).exp() * crate::special::hermite_normalized(n, Complex64::new(x, 0.0)).re
}

/// Laguerre polynomial `L_n(t)`.
fn laguerre(n: usize, t: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - t);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 - t) * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Homodyne distribution `p(x, φ)` of the rotated quadrature
/// `x̂ cosφ + p̂ sinφ`.
pub fn quad_dist(params: &CatParams, x: f64, phi: f64) -> Result<f64> {
    quad_dist_branch(params, x, phi, 1.0)
}

/// `branch = −1` evaluates the Hermite argument on the other square-root
/// branch; the result must not change.
fn quad_dist_branch(params: &CatParams, x: f64, phi: f64, branch: f64) -> Result<f64> {
    if params.degenerate() {
        return Ok(fock_wavefunction(params.limit_level(), x).powi(2));
    }
    let delta = params.delta(phi);
    if delta <= 0.0 {
        return domain("Δ must be positive");
    }
    let (a, kp) = (params.abs(), params.kappa_prime);
    let c = params.count;
    let rot = Complex64::from_polar(1.0, 2.0 * phi);
    let (inner, pref) = match params.kind {
        CatKind::Added => (1.0 + kp.conj() * rot, 1.0),
        CatKind::Subtracted => (-kp.conj() * rot - a * a, a.powi(c as i32)),
    };
    let z = branch * (inner / delta).sqrt() * x;
    let gauss = (-(1.0 - a * a) / delta * x * x).exp();
    let norm = params.norm()?;
    Ok(pref / (norm * (PI * delta.powi(c as i32 + 1)).sqrt() * 2f64.powi(c as i32)) * gauss * hermite(c, z).norm_sqr())
}

/// Wigner function `W(x, p)`, normalized to `∫∫ W dx dp = 1`.
pub fn wigner(params: &CatParams, x: f64, p: f64) -> Result<f64> {
    wigner_branch(params, x, p, 1.0)
}

fn wigner_branch(params: &CatParams, x: f64, p: f64, branch: f64) -> Result<f64> {
    if params.degenerate() {
        let n = params.limit_level();
        let r2 = x * x + p * p;
        let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
        return Ok(sign / PI * (-r2).exp() * laguerre(n, 2.0 * r2));
    }
    let (a, kp) = (params.abs(), params.kappa_prime);
    let c = params.count;
    let lam = params.lambda();
    let s = 2.0 * lam.re; // λ + λ*
    if s <= 0.0 {
        return domain("Re λ must be positive");
    }
    let u = Complex64::new(x, 0.0) + Complex64::new(0.0, p) / lam;
    let norm = params.norm()?;
    let ln_pref = -(PI * norm).ln() - c as f64 * 2f64.ln() - (2 * c + 1) as f64 * (1.0 + kp).norm().ln()
        + (c as f64 + 0.5) * (2.0 / s).ln()
        - 2.0 * lam.norm_sqr() / s * u.norm_sqr();
    let i = Complex64::new(0.0, 1.0);
    let arg = match params.kind {
        CatKind::Added => 2.0 * lam * lam * (1.0 + lam.conj()) / ((1.0 - lam) * s),
        CatKind::Subtracted => 2.0 * lam * lam * (1.0 - lam.conj()) / ((1.0 + lam) * s),
    };
    let z = branch * i * arg.sqrt() * u;
    let mut sum = 0.0;
    for k in 0..=c {
        // |κ′|^c (−2/|κ′|)^k = (−2)^k |κ′|^{c−k} for the added state,
        // |κ′|^c (−2|κ′|)^k for the subtracted one
        let weight = match params.kind {
            CatKind::Added => (-2.0f64).powi(k as i32) * a.powi((c - k) as i32),
            CatKind::Subtracted => (-2.0 * a).powi(k as i32) * a.powi(c as i32),
        };
        sum += binomial(c as u64, k as u64).powi(2) * factorial(k) * weight * hermite(c - k, z).norm_sqr();
    }
    Ok(ln_pref.exp() * sum)
}

/// Husimi function `Q(x, p) = ⟨α|ρ|α⟩ / (2π)` with `α = (x + ip)/√2`, so
/// that `∫∫ Q dx dp = 1`.
pub fn husimi(params: &CatParams, x: f64, p: f64) -> Result<f64> {
    let alpha = PhasePoint::new(x, p).alpha();
    let r2 = alpha.norm_sqr();
    if params.degenerate() {
        let n = params.limit_level();
        let ln = n as f64 * r2.ln() - r2 - ln_factorial(n);
        return Ok(if r2 == 0.0 && n > 0 { 0.0 } else { ln.exp() } / (2.0 * PI));
    }
    let (a, kp) = (params.abs(), params.kappa_prime);
    let c = params.count;
    let norm = params.norm()?;
    let squeeze = (kp.conj() * alpha * alpha).re; // ½(κ′*α² + κ′α*²)
    let base = (squeeze - r2).exp() / (2.0 * PI * norm);
    Ok(match params.kind {
        CatKind::Added => base * r2.powi(c as i32),
        CatKind::Subtracted => {
            let z = (-0.5 * kp.conj()).sqrt() * alpha;
            base * a.powi(c as i32) / 2f64.powi(c as i32) * hermite(c, z).norm_sqr()
        }
    })
}
