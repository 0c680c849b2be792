//! Truncated Fock-space states.
//!
//! A [`FockVector`] stores complex amplitudes `c_0 … c_{n_max}` of a single
//! mode. Ladder operations return *unnormalized* vectors: the squared norm
//! of a conditioned state is the probability of the conditioning event, so
//! callers decide when to normalize.

mod density;
mod twomode;

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{domain, Error, Result};

pub use density::DensityMatrix;
pub use twomode::{pair_index, triangle_dim, TwoModeDensity, TwoModeState};

/// Tolerance used when checking that a vector is normalized.
pub const NORM_TOL: f64 = 1e-12;

/// Default bound on the squeezed-vacuum probability mass discarded by
/// truncation.
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Extra Fock levels kept above the squeezed-vacuum cut-off, on top of the
/// largest ladder count, so that ladder actions never clip.
pub const LADDER_HEADROOM: usize = 8;

/// Amplitudes with magnitude below this are treated as zero when clipping
/// is reported.
const CLIP_WARN: f64 = 1e-12;

/// A pure single-mode state in the truncated basis `|0⟩ … |n_max⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Vec<Complex64>,
}

impl FockVector {
    /// Wraps raw amplitudes. Panics on an empty vector (there is no
    /// truncation with fewer than one level).
    pub fn new(amps: Vec<Complex64>) -> Self {
        assert!(!amps.is_empty(), "a Fock vector needs at least the |0⟩ level");
        Self { amps }
    }

    pub fn from_real(amps: &[f64]) -> Self {
        Self::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn zeros(n_max: usize) -> Self {
        Self::new(vec![Complex64::new(0.0, 0.0); n_max + 1])
    }

    pub fn n_max(&self) -> usize {
        self.amps.len() - 1
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// Amplitude of `|n⟩`, zero beyond the truncation.
    pub fn amplitude(&self, n: usize) -> Complex64 {
        self.amps.get(n).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOL
    }

    /// Copy with a different truncation: zero-padded or cut.
    pub fn resized(&self, n_max: usize) -> Self {
        let mut amps = self.amps.clone();
        amps.resize(n_max + 1, Complex64::new(0.0, 0.0));
        Self { amps }
    }

    /// `Σ_{n > n_cut} |c_n|²`.
    pub fn tail_mass(&self, n_cut: usize) -> f64 {
        self.amps.iter().skip(n_cut + 1).map(|c| c.norm_sqr()).sum()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::new(self.amps.iter().map(|c| c * factor).collect())
    }

    /// Fixes the global phase: the lowest-index amplitude whose magnitude
    /// exceeds 1e-12 of the largest becomes real and positive.
    pub fn canonical_phase(&self) -> Self {
        let max = self.amps.iter().map(|c| c.norm()).fold(0.0, f64::max);
        match self.amps.iter().find(|c| c.norm() > 1e-12 * max) {
            Some(lead) if max > 0.0 => self.scaled(lead.conj() / lead.norm()),
            _ => self.clone(),
        }
    }

    /// CSV with header `n,re,im`, one row per level, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,re,im\n");
        for (n, c) in self.amps.iter().enumerate() {
            writeln!(out, "{n},{:.16e},{:.16e}", c.re, c.im).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut amps = Vec::new();
        for (line_no, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parse = |s: &str| f64::from_str(s).map_err(|e| Error::Domain(format!("line {}: {e}", line_no + 1)));
            if cols.len() != 3 {
                return domain(format!("line {}: expected n,re,im", line_no + 1));
            }
            let n: usize = cols[0]
                .parse()
                .map_err(|e| Error::Domain(format!("line {}: {e}", line_no + 1)))?;
            if n != amps.len() {
                return domain(format!("line {}: levels must be listed in order", line_no + 1));
            }
            amps.push(Complex64::new(parse(cols[1])?, parse(cols[2])?));
        }
        if amps.is_empty() {
            return domain("empty Fock vector CSV");
        }
        Ok(Self::new(amps))
    }
}

/// Squeezing parameter `κ` of the squeezed vacuum, `|κ| < 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SqueezeParam(Complex64);

impl SqueezeParam {
    pub fn new(kappa: Complex64) -> Result<Self> {
        if !kappa.is_finite() || kappa.norm() >= 1.0 {
            return domain(format!("squeeze parameter |κ| = {} must be < 1", kappa.norm()));
        }
        Ok(Self(kappa))
    }

    pub fn from_polar(magnitude: f64, phase: f64) -> Result<Self> {
        if magnitude < 0.0 {
            return domain("squeeze magnitude must be nonnegative");
        }
        Self::new(Complex64::from_polar(magnitude, phase))
    }

    /// Convenience converter from a squeeze-operator argument `s e^{iφ}`
    /// using the convention `κ = tanh(s) e^{iφ}`.
    pub fn from_squeeze(s: f64, phase: f64) -> Result<Self> {
        Self::from_polar(s.tanh(), phase)
    }

    pub fn kappa(&self) -> Complex64 {
        self.0
    }

    pub fn abs(&self) -> f64 {
        self.0.norm()
    }

    /// `κ′ = T² κ`, the parameter of the attenuated squeezed vacuum.
    pub fn attenuated(&self, transmittance: Complex64) -> Self {
        Self(transmittance * transmittance * self.0)
    }
}

/// A state together with the probability mass its truncation discarded.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedState {
    pub state: FockVector,
    pub tail_mass: f64,
}

/// The Fock state `|n⟩`.
pub fn make_fock(n: usize, n_max: usize) -> Result<FockVector> {
    if n > n_max {
        return Err(Error::Truncation { n, n_max });
    }
    let mut v = FockVector::zeros(n_max);
    v.amps[n] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Probability weights `|c_{2k}|²` of the squeezed vacuum, generated by the
/// ratio `(2k+1)/(2k+2) |κ|²` between consecutive even levels.
fn squeezed_weights(kappa_abs: f64) -> impl Iterator<Item = f64> {
    let k2 = kappa_abs * kappa_abs;
    let first = (1.0 - k2).sqrt();
    (0u64..).scan(first, move |w, k| {
        let cur = *w;
        let kf = k as f64;
        *w *= (2.0 * kf + 1.0) / (2.0 * kf + 2.0) * k2;
        Some(cur)
    })
}

/// Squeezed-vacuum probability mass above level `n_max`.
pub fn squeezed_vacuum_tail(kappa: SqueezeParam, n_max: usize) -> f64 {
    if kappa.abs() == 0.0 {
        return 0.0;
    }
    let mut tail = 0.0;
    for (k, w) in squeezed_weights(kappa.abs()).enumerate() {
        if 2 * k <= n_max {
            continue;
        }
        tail += w;
        if w <= 1e-30 * tail || w == 0.0 {
            break;
        }
    }
    tail
}

/// Smallest even truncation whose squeezed-vacuum tail is below `tail_tol`.
pub fn squeezed_vacuum_cutoff(kappa: SqueezeParam, tail_tol: f64) -> usize {
    let weights: Vec<f64> = squeezed_weights(kappa.abs()).take_while(|&w| w > 1e-60).collect();
    // suffix sums from the small end keep the tail accurate far below 1e-16
    let mut tail = 0.0;
    let mut cut = weights.len().saturating_sub(1);
    for k in (0..weights.len()).rev() {
        if tail >= tail_tol {
            break;
        }
        cut = k;
        tail += weights[k];
    }
    2 * cut
}

/// Default truncation for a scenario: the squeezed-vacuum cut-off at
/// [`DEFAULT_TAIL_TOL`] plus `max(n₀, m₂) + 8` levels of ladder headroom.
pub fn auto_n_max(kappa: SqueezeParam, n0: usize, m2: usize) -> usize {
    squeezed_vacuum_cutoff(kappa, DEFAULT_TAIL_TOL) + n0.max(m2) + LADDER_HEADROOM
}

/// Squeezed vacuum `(1−|κ|²)^{1/4} Σ_k √((2k)!)/(2^k k!) κ^k |2k⟩`
/// truncated at `n_max`. Odd amplitudes are exactly zero.
pub fn make_squeezed_vacuum(kappa: SqueezeParam, n_max: usize) -> TruncatedState {
    let kap = kappa.kappa();
    let mut v = FockVector::zeros(n_max);
    let mut c = Complex64::new((1.0 - kap.norm_sqr()).powf(0.25), 0.0);
    let mut n = 0;
    while n <= n_max {
        v.amps[n] = c;
        let k = (n / 2) as f64;
        c *= kap * ((2.0 * k + 1.0) / (2.0 * k + 2.0)).sqrt();
        n += 2;
    }
    TruncatedState {
        tail_mass: squeezed_vacuum_tail(kappa, n_max),
        state: v,
    }
}

/// Coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩` truncated at `n_max`.
pub fn make_coherent(alpha: Complex64, n_max: usize) -> TruncatedState {
    let mut v = FockVector::zeros(n_max);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        v.amps[n] = c;
        c *= alpha / ((n + 1) as f64).sqrt();
    }
    let tail = (1.0 - v.norm_sqr()).max(0.0);
    TruncatedState {
        state: v,
        tail_mass: tail,
    }
}

/// `(â†)^times ψ` at fixed truncation, unnormalized. Amplitudes pushed above
/// `n_max` are lost; a warning is logged when they are not negligible.
pub fn apply_creation(psi: &FockVector, times: usize) -> FockVector {
    let n_max = psi.n_max();
    let mut out = FockVector::zeros(n_max);
    let mut clipped = 0.0;
    for (n, &c) in psi.amps.iter().enumerate() {
        let factor = ladder_factor(n + times, n);
        if n + times <= n_max {
            out.amps[n + times] = c * factor;
        } else {
            clipped += (c * factor).norm_sqr();
        }
    }
    if clipped.sqrt() > CLIP_WARN {
        log::warn!("creation clipped amplitude mass {clipped:e} at n_max = {n_max}");
    }
    out
}

/// `â^times ψ`, unnormalized; may be the zero vector.
pub fn apply_annihilation(psi: &FockVector, times: usize) -> FockVector {
    let mut out = FockVector::zeros(psi.n_max());
    for (n, &c) in psi.amps.iter().enumerate().skip(times) {
        out.amps[n - times] = c * ladder_factor(n, n - times);
    }
    out
}

/// `√(hi!/lo!)` for `hi >= lo`.
fn ladder_factor(hi: usize, lo: usize) -> f64 {
    ((lo + 1)..=hi).map(|k| (k as f64).sqrt()).product()
}

/// `T^{n̂} ψ`: multiplies `c_n` by `Tⁿ`.
pub fn apply_attenuation(psi: &FockVector, transmittance: Complex64) -> FockVector {
    let mut power = Complex64::new(1.0, 0.0);
    let amps = psi
        .amps
        .iter()
        .map(|c| {
            let out = c * power;
            power *= transmittance;
            out
        })
        .collect();
    FockVector::new(amps)
}

pub fn normalize(psi: &FockVector) -> Result<FockVector> {
    let norm = psi.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    Ok(psi.scaled(Complex64::new(1.0 / norm, 0.0)))
}

/// `⟨a|b⟩`; vectors of different truncation are compared on the common
/// levels.
pub fn inner_product(a: &FockVector, b: &FockVector) -> Complex64 {
    a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum()
}

/// `|⟨a|b⟩|² / (‖a‖² ‖b‖²)`, which is `|⟨a|b⟩|²` for normalized inputs.
pub fn fidelity(a: &FockVector, b: &FockVector) -> f64 {
    inner_product(a, b).norm_sqr() / (a.norm_sqr() * b.norm_sqr())
}

pub fn photon_number_distribution(psi: &FockVector) -> Vec<f64> {
    let total = psi.norm_sqr();
    psi.amps.iter().map(|c| c.norm_sqr() / total).collect()
}

pub fn mean_photon_number(psi: &FockVector) -> f64 {
    photon_number_distribution(psi)
        .iter()
        .enumerate()
        .map(|(n, p)| n as f64 * p)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn assert_vec_close(a: &FockVector, b: &FockVector, tol: f64) {
        assert_eq!(a.n_max(), b.n_max());
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            assert!((x - y).norm() <= tol, "{x} vs {y}");
        }
    }

    #[test]
    fn fock_constructor() {
        assert_eq!(
            make_fock(0, 4).unwrap(),
            FockVector::from_real(&[1.0, 0.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(make_fock(3, 3).unwrap(), FockVector::from_real(&[0.0, 0.0, 0.0, 1.0]));
        assert_eq!(make_fock(5, 3), Err(Error::Truncation { n: 5, n_max: 3 }));
    }

    #[test]
    fn squeezed_vacuum_values() {
        let vac = make_squeezed_vacuum(SqueezeParam::new(c(0.0, 0.0)).unwrap(), 6);
        assert_eq!(vac.state, make_fock(0, 6).unwrap());
        assert_eq!(vac.tail_mass, 0.0);

        let sv = make_squeezed_vacuum(SqueezeParam::new(c(0.5, 0.0)).unwrap(), 2).state;
        // direct evaluation of the k = 0, 1 terms
        let c0 = 0.75f64.powf(0.25);
        let c2 = c0 * 2f64.sqrt() / 2.0 * 0.5;
        assert!((sv.amplitude(0).re - c0).abs() < 1e-15);
        assert!((sv.amplitude(2).re - c2).abs() < 1e-15);
        assert!((c0 - 0.930605).abs() < 1e-6 && (c2 - 0.329018).abs() < 1e-6);
    }

    #[test]
    fn squeezed_vacuum_tail_closure() {
        let kappa = SqueezeParam::from_polar(0.9, 0.4).unwrap();
        // at n_max = 60 the missing mass is 3.18e-4; 1e-8 needs n_max = 156
        let sv = make_squeezed_vacuum(kappa, 60);
        assert!((sv.tail_mass - 3.179418545e-4).abs() < 1e-12);
        assert!(make_squeezed_vacuum(kappa, 156).state.norm_sqr() >= 1.0 - 1e-8);
        assert!(make_squeezed_vacuum(kappa, 154).state.norm_sqr() < 1.0 - 1e-8);
        assert_eq!(squeezed_vacuum_cutoff(kappa, 1e-8), 156);
        // reported tail equals the independently summed missing mass
        let big = make_squeezed_vacuum(kappa, 600).state;
        assert!((big.tail_mass(60) - sv.tail_mass).abs() < 1e-14);
        assert!((sv.state.norm_sqr() + sv.tail_mass - 1.0).abs() < 1e-13);
    }

    #[test]
    fn squeezed_vacuum_parity() {
        let sv = make_squeezed_vacuum(SqueezeParam::from_polar(0.7, 2.0).unwrap(), 41).state;
        for n in (1..=41).step_by(2) {
            assert_eq!(sv.amplitude(n), c(0.0, 0.0));
        }
    }

    #[test]
    fn auto_truncation_rule() {
        let kappa = SqueezeParam::from_polar(0.77, 0.0).unwrap();
        let cut = squeezed_vacuum_cutoff(kappa, 1e-10);
        assert_eq!(cut % 2, 0);
        assert!(squeezed_vacuum_tail(kappa, cut) < 1e-10);
        assert!(squeezed_vacuum_tail(kappa, cut - 2) >= 1e-10);
        assert_eq!(auto_n_max(kappa, 3, 1), cut + 3 + LADDER_HEADROOM);
    }

    #[test]
    fn mean_photon_number_squeezed() {
        let sv = make_squeezed_vacuum(SqueezeParam::new(c(0.5, 0.0)).unwrap(), 60).state;
        let brute: f64 = sv
            .amplitudes()
            .iter()
            .enumerate()
            .map(|(n, a)| n as f64 * a.norm_sqr())
            .sum();
        assert!((brute - 1.0 / 3.0).abs() < 1e-12);
        assert!((mean_photon_number(&sv) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn ladder_examples() {
        let vac = make_fock(0, 4).unwrap();
        assert_eq!(apply_creation(&vac, 1), make_fock(1, 4).unwrap());
        assert_vec_close(
            &apply_creation(&vac, 2),
            &make_fock(2, 4).unwrap().scaled(c(2f64.sqrt(), 0.0)),
            1e-15,
        );
        let s = 0.5f64.sqrt();
        let plus = FockVector::from_real(&[s, s, 0.0, 0.0]);
        assert_vec_close(
            &apply_creation(&plus, 1),
            &FockVector::from_real(&[0.0, s, 1.0, 0.0]),
            1e-15,
        );

        assert_eq!(
            apply_annihilation(&make_fock(1, 3).unwrap(), 1),
            make_fock(0, 3).unwrap()
        );
        assert_eq!(apply_annihilation(&vac, 1).norm_sqr(), 0.0);
        assert_vec_close(
            &apply_annihilation(&make_fock(2, 3).unwrap(), 2),
            &make_fock(0, 3).unwrap().scaled(c(2f64.sqrt(), 0.0)),
            1e-15,
        );
        assert_eq!(normalize(&apply_annihilation(&vac, 1)), Err(Error::ZeroNorm));
    }

    #[test]
    fn attenuation_examples() {
        let psi = FockVector::new(vec![c(0.3, 0.1), c(-0.2, 0.5), c(0.7, 0.0)]);
        assert_eq!(apply_attenuation(&psi, c(1.0, 0.0)), psi);
        let zero = apply_attenuation(&psi, c(0.0, 0.0));
        assert_eq!(zero, FockVector::new(vec![c(0.3, 0.1), c(0.0, 0.0), c(0.0, 0.0)]));
    }

    #[test]
    fn attenuation_maps_squeeze_parameter() {
        let kappa = SqueezeParam::from_polar(0.8, 0.3).unwrap();
        let t = Complex64::from_polar(0.9f64.sqrt(), 0.2);
        let n_max = 120;
        let att = apply_attenuation(&make_squeezed_vacuum(kappa, n_max).state, t);
        let kp = kappa.attenuated(t);
        let target = make_squeezed_vacuum(kp, n_max).state;
        // coefficient ratio is the constant prefactor (1−|κ|²)^{1/4}/(1−|κ′|²)^{1/4}
        let pref = (1.0 - kappa.abs().powi(2)).powf(0.25) / (1.0 - kp.abs().powi(2)).powf(0.25);
        for n in (0..40).step_by(2) {
            let ratio = att.amplitude(n) / target.amplitude(n);
            assert!((ratio - pref).norm() < 1e-12, "n={n}: {ratio}");
        }
        let a = normalize(&att).unwrap();
        let b = normalize(&target).unwrap();
        assert_vec_close(&a, &b, 1e-10);
    }

    #[test]
    fn normalize_and_fidelity() {
        let v = make_fock(0, 2).unwrap().scaled(c(2.0, 0.0));
        assert_eq!(normalize(&v).unwrap(), make_fock(0, 2).unwrap());
        assert_eq!(fidelity(&make_fock(1, 3).unwrap(), &make_fock(0, 3).unwrap()), 0.0);
        let psi = FockVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]);
        assert!((fidelity(&psi, &psi.scaled(c(0.0, 1.0))) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn canonical_phase_rule() {
        let psi = FockVector::new(vec![c(0.0, 0.0), c(0.0, -0.6), c(0.8, 0.0)]);
        let can = psi.canonical_phase();
        assert!((can.amplitude(1) - c(0.6, 0.0)).norm() < 1e-15);
        assert!((can.amplitude(2) - c(0.0, 0.8)).norm() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let psi = FockVector::new(vec![c(0.1, -0.2), c(1.0 / 3.0, 0.0), c(-2e-17, 5.0)]);
        let back = FockVector::from_csv(&psi.to_csv()).unwrap();
        assert_eq!(back, psi);
        assert!(psi.to_csv().starts_with("n,re,im\n0,"));
    }

    #[test]
    fn coherent_state_norm() {
        let st = make_coherent(c(1.2, -0.5), 40);
        assert!((st.state.norm_sqr() + st.tail_mass - 1.0).abs() < 1e-14);
        assert!((mean_photon_number(&st.state) - 1.69).abs() < 1e-10);
    }

    #[test]
    fn squeeze_param_domain() {
        assert!(SqueezeParam::new(c(1.0, 0.0)).is_err());
        assert!(SqueezeParam::new(c(0.6, 0.8)).is_err());
        assert!(SqueezeParam::from_squeeze(3.0, 0.0).unwrap().abs() < 1.0);
    }

    fn random_state(max_level: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..=max_level)
    }

    proptest! {
        #[test]
        fn ladder_consistency(raw in random_state(12)) {
            // leave headroom so the creation step never clips
            let mut amps: Vec<Complex64> = raw.iter().map(|&(r, i)| c(r, i)).collect();
            amps.resize(raw.len() + 2, c(0.0, 0.0));
            let psi = FockVector::new(amps);
            let lhs = apply_annihilation(&apply_creation(&psi, 1), 1);
            for (n, (&x, &y)) in lhs.amplitudes().iter().zip(psi.amplitudes()).enumerate() {
                prop_assert!((x - y * (n as f64 + 1.0)).norm() < 1e-12);
            }
        }
    }
}
