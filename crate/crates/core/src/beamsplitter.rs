//! Lossless beam splitter and conditional photon counting.
//!
//! The splitter is `V̂ = e^{−i(φ_T−φ_R)L̂₃} e^{−2iθL̂₂} e^{−i(φ_T+φ_R)L̂₃}`
//! with `ρ_out = V̂† ρ_in V̂`. The Schrödinger-picture map `Û = V̂†` acts on
//! creation operators as
//!
//! ```text
//! â₁† → T â₁† − R* â₂†,     â₂† → R â₁† + T* â₂†,
//! ```
//!
//! with `T = cosθ e^{iφ_T}` and `R = sinθ e^{iφ_R}`. Photon number is
//! conserved, so `Û` is block diagonal in `N = n₁ + n₂`; blocks are built by
//! applying the mapped creation operators one photon at a time.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::fock::{
    apply_annihilation, apply_attenuation, apply_creation, make_fock, normalize, pair_index, DensityMatrix, FockVector,
    TwoModeDensity, TwoModeState,
};
use crate::special::{ln_binomial, ln_factorial};

/// Outcomes with probability below this are reported as improbable instead
/// of being normalized.
pub const IMPROBABLE_FLOOR: f64 = 1e-14;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BeamSplitterParams {
    pub theta: f64,
    pub phi_t: f64,
    pub phi_r: f64,
}

impl BeamSplitterParams {
    pub fn new(theta: f64, phi_t: f64, phi_r: f64) -> Result<Self> {
        if !(theta.is_finite() && phi_t.is_finite() && phi_r.is_finite()) {
            return domain("beam splitter angles must be finite");
        }
        Ok(Self { theta, phi_t, phi_r })
    }

    /// From the power transmittance `|T|²` and the two phases.
    pub fn from_transmittance(t_sq: f64, phi_t: f64, phi_r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&t_sq) {
            return domain(format!("|T|² = {t_sq} must lie in [0, 1]"));
        }
        Self::new(t_sq.sqrt().acos(), phi_t, phi_r)
    }

    /// `T = cosθ e^{iφ_T}`.
    pub fn t(&self) -> Complex64 {
        Complex64::from_polar(self.theta.cos(), self.phi_t)
    }

    /// `R = sinθ e^{iφ_R}`.
    pub fn r(&self) -> Complex64 {
        Complex64::from_polar(self.theta.sin(), self.phi_r)
    }

    pub fn t_sq(&self) -> f64 {
        self.theta.cos().powi(2)
    }

    pub fn r_sq(&self) -> f64 {
        self.theta.sin().powi(2)
    }
}

/// Reference-mode photons `n₀` sent in and counts `m₂` recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub n0: usize,
    pub m2: usize,
}

/// Normalized mode-1 state after conditioning, with the probability of the
/// conditioning event.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalResult<S> {
    pub state: S,
    pub probability: f64,
    pub outcome: Outcome,
}

/// Blocks of the state map `Û = V̂†` for `N = 0..=n_total_max`. Entry
/// `(k, n₁)` of block `N` is `⟨k, N−k|Û|n₁, N−n₁⟩`.
///
/// With `B₁ = T â₁† − R* â₂†` and `B₂ = R â₁† + T* â₂†` both
/// `B₁ Û|n₁−1, n₂⟩ = √n₁ Û|n₁, n₂⟩` and `B₂ Û|n₁, n₂−1⟩ = √n₂ Û|n₁, n₂⟩`
/// hold. Each column is built from the `√n₁`, `√n₂` weighted sum of both,
/// divided by `N`: that update does not amplify rounding errors, whereas
/// either identity alone blows up exponentially in `N`.
pub fn state_map_blocks(n_total_max: usize, params: &BeamSplitterParams) -> Vec<DMatrix<Complex64>> {
    let (t, r) = (params.t(), params.r());
    let mut blocks: Vec<DMatrix<Complex64>> = Vec::with_capacity(n_total_max + 1);
    blocks.push(DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0)));
    for n in 1..=n_total_max {
        let prev = &blocks[n - 1];
        let mut cur = DMatrix::zeros(n + 1, n + 1);
        let raise = |cur: &mut DMatrix<Complex64>, col: usize, src: usize, a1: Complex64, a2: Complex64, w: f64| {
            for k in 0..n {
                let amp = prev[(k, src)] * w;
                // â₁† |k, n−1−k⟩ and â₂† |k, n−1−k⟩
                cur[(k + 1, col)] += a1 * amp * ((k + 1) as f64).sqrt();
                cur[(k, col)] += a2 * amp * ((n - k) as f64).sqrt();
            }
        };
        for n1 in 0..=n {
            let n2 = n - n1;
            if n1 > 0 {
                raise(&mut cur, n1, n1 - 1, t, -r.conj(), (n1 as f64).sqrt() / n as f64);
            }
            if n2 > 0 {
                raise(&mut cur, n1, n1, r, t.conj(), (n2 as f64).sqrt() / n as f64);
            }
        }
        blocks.push(cur);
    }
    blocks
}

/// The `(n_total+1)²` block `⟨n₁′, N−n₁′|V̂|n₁, N−n₁⟩` of the beam-splitter
/// operator itself.
pub fn bs_unitary_block(n_total: usize, params: &BeamSplitterParams) -> DMatrix<Complex64> {
    state_map_blocks(n_total, params)
        .pop()
        .expect("at least one block")
        .adjoint()
}

/// `⟨k, N−k|Û|n₁, n₂⟩` from the binomial expansion of the mapped creation
/// operators, with log-space magnitudes and explicit phases. Independent of
/// [`state_map_blocks`] and used to cross-check it.
pub fn bs_matrix_element(k: usize, n1: usize, n2: usize, params: &BeamSplitterParams) -> Complex64 {
    let n = n1 + n2;
    if k > n {
        return ZERO;
    }
    let (ct, st) = (params.theta.cos().abs(), params.theta.sin().abs());
    // signs of cosθ / sinθ are folded into the phases
    let pt = params.phi_t
        + if params.theta.cos() < 0.0 {
            std::f64::consts::PI
        } else {
            0.0
        };
    let pr = params.phi_r
        + if params.theta.sin() < 0.0 {
            std::f64::consts::PI
        } else {
            0.0
        };
    let ln_norm = 0.5 * (ln_factorial(k) + ln_factorial(n - k) - ln_factorial(n1) - ln_factorial(n2));
    let mut sum = ZERO;
    for j in k.saturating_sub(n2)..=k.min(n1) {
        let i = k - j;
        let mag = [ln_pow(ct, j), ln_pow(st, n1 - j), ln_pow(st, i), ln_pow(ct, n2 - i)];
        if mag.iter().any(Option::is_none) {
            continue;
        }
        let ln_mag: f64 = mag.iter().flatten().sum::<f64>()
            + ln_binomial(n1 as u64, j as u64)
            + ln_binomial(n2 as u64, i as u64)
            + ln_norm;
        // T^j (−R*)^{n1−j} R^i (T*)^{n2−i}
        let phase =
            j as f64 * pt + (n1 - j) as f64 * (std::f64::consts::PI - pr) + i as f64 * pr - (n2 - i) as f64 * pt;
        sum += Complex64::from_polar(ln_mag.exp(), phase);
    }
    sum
}

/// `Û |ψ⟩` for a pure two-mode state.
pub fn apply_beam_splitter_pure(psi: &TwoModeState, params: &BeamSplitterParams) -> TwoModeState {
    let top = psi.n_total_max();
    let blocks = state_map_blocks(top, params);
    let mut out = TwoModeState::zeros(top);
    for (n, u) in blocks.iter().enumerate() {
        let input = nalgebra::DVector::from_column_slice(psi.block(n));
        out.block_mut(n).copy_from_slice((u * input).as_slice());
    }
    out
}

/// `ρ_out = V̂† ρ_in V̂`, applied block by block in total photon number.
pub fn apply_beam_splitter(rho: &TwoModeDensity, params: &BeamSplitterParams) -> TwoModeDensity {
    let top = rho.n_total_max();
    let blocks = state_map_blocks(top, params);
    let src = rho.entries();
    let mut out = DMatrix::zeros(src.nrows(), src.ncols());
    for (n, un) in blocks.iter().enumerate() {
        let rs = pair_index(0, n);
        for (m, um) in blocks.iter().enumerate() {
            let cs = pair_index(0, m);
            let sub = src.view((rs, cs), (n + 1, m + 1));
            out.view_mut((rs, cs), (n + 1, m + 1))
                .copy_from(&(un * sub * um.adjoint()));
        }
    }
    TwoModeDensity::from_parts(top, out)
}

fn check_probability(probability: f64) -> Result<()> {
    if probability < IMPROBABLE_FLOOR || !probability.is_finite() {
        return Err(Error::ImprobableOutcome { probability });
    }
    Ok(())
}

/// Counts `m₂` photons in output 2 of a two-mode output density.
/// `outcome.n0` is informational and copied through.
pub fn condition_on_count(rho_out: &TwoModeDensity, m2: usize, n0: usize) -> Result<ConditionalResult<DensityMatrix>> {
    // the triangle holds every populated level, so higher counts never occur
    if m2 > rho_out.n_total_max() {
        return Err(Error::ImprobableOutcome { probability: 0.0 });
    }
    let block = rho_out.project_mode2(m2);
    let probability = block.trace();
    check_probability(probability)?;
    Ok(ConditionalResult {
        state: block.normalized()?,
        probability,
        outcome: Outcome { n0, m2 },
    })
}

/// Pure-state version of [`condition_on_count`]; the global phase is fixed
/// by [`FockVector::canonical_phase`].
pub fn condition_pure_on_count(psi_out: &TwoModeState, m2: usize, n0: usize) -> Result<ConditionalResult<FockVector>> {
    // the triangle holds every populated level, so higher counts never occur
    if m2 > psi_out.n_total_max() {
        return Err(Error::ImprobableOutcome { probability: 0.0 });
    }
    let v = psi_out.project_mode2(m2);
    let probability = v.norm_sqr();
    check_probability(probability)?;
    Ok(ConditionalResult {
        state: normalize(&v)?.canonical_phase(),
        probability,
        outcome: Outcome { n0, m2 },
    })
}

/// Full pipeline for a pure signal: `|Φ⟩ ⊗ |n₀⟩` through the splitter, then
/// `m₂` counts in output 2.
pub fn conditioned_pipeline(
    phi: &FockVector,
    outcome: Outcome,
    params: &BeamSplitterParams,
) -> Result<ConditionalResult<FockVector>> {
    let reference = make_fock(outcome.n0, outcome.n0)?;
    let out = apply_beam_splitter_pure(&TwoModeState::product(phi, &reference), params);
    condition_pure_on_count(&out, outcome.m2, outcome.n0)
}

/// Full pipeline for a mixed signal `ρ_in1 ⊗ |n₀⟩⟨n₀|`.
pub fn conditioned_pipeline_density(
    rho1: &DensityMatrix,
    outcome: Outcome,
    params: &BeamSplitterParams,
) -> Result<ConditionalResult<DensityMatrix>> {
    let reference = DensityMatrix::from_pure(&make_fock(outcome.n0, outcome.n0)?);
    let rho_out = apply_beam_splitter(&TwoModeDensity::product(rho1, &reference), params);
    condition_on_count(&rho_out, outcome.m2, outcome.n0)
}

/// `x^e` with `0⁰ = 1`, in log space for the magnitudes met here.
fn ln_pow(base: f64, e: usize) -> Option<f64> {
    if e == 0 {
        Some(0.0)
    } else if base == 0.0 {
        None
    } else {
        Some(e as f64 * base.ln())
    }
}

/// `P(n₀) = |R|^{2n₀} Σ_{n₁} |T|^{2n₁} C(n₁+n₀, n₀) ⟨n₁|ρ|n₁⟩` for the
/// diagonal `diag` of the signal state.
pub fn prob_added_from_diagonal(diag: &[f64], n0: usize, params: &BeamSplitterParams) -> f64 {
    let Some(lr) = ln_pow(params.r_sq(), n0) else {
        return 0.0;
    };
    diag.iter()
        .enumerate()
        .filter_map(|(n1, &p)| {
            let lt = ln_pow(params.t_sq(), n1)?;
            Some(p * (lr + lt + ln_binomial((n1 + n0) as u64, n0 as u64)).exp())
        })
        .sum()
}

/// `P(m) = |R|^{2m} Σ_{n₁} |T|^{2n₁} C(n₁+m, m) ⟨n₁+m|ρ|n₁+m⟩`.
pub fn prob_subtracted_from_diagonal(diag: &[f64], m: usize, params: &BeamSplitterParams) -> f64 {
    let Some(lr) = ln_pow(params.r_sq(), m) else {
        return 0.0;
    };
    diag.iter()
        .enumerate()
        .skip(m)
        .filter_map(|(n, &p)| {
            let n1 = n - m;
            let lt = ln_pow(params.t_sq(), n1)?;
            Some(p * (lr + lt + ln_binomial(n as u64, m as u64)).exp())
        })
        .sum()
}

/// Photon-added state `(â†)^{n₀} T^{n̂} |Φ⟩` (normalized, canonical phase)
/// and the probability of zero counts with `n₀` reference photons.
/// `n₀ = 0` is accepted and gives the attenuated input.
pub fn photon_added_state(
    phi: &FockVector,
    n0: usize,
    params: &BeamSplitterParams,
) -> Result<ConditionalResult<FockVector>> {
    let attenuated = apply_attenuation(&phi.resized(phi.n_max() + n0), params.t());
    let raw = apply_creation(&attenuated, n0);
    let diag: Vec<f64> = phi.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    let probability = prob_added_from_diagonal(&diag, n0, params);
    check_probability(probability)?;
    Ok(ConditionalResult {
        state: normalize(&raw)?.canonical_phase(),
        probability,
        outcome: Outcome { n0, m2: 0 },
    })
}

/// Photon-subtracted state `â^m T^{n̂} |Φ⟩` (normalized, canonical phase)
/// and the probability of `m` counts with a vacuum reference. The vector is
/// formed as `T^{n̂} â^m |Φ⟩`, which differs only by the factor `T^m` and
/// stays defined at `T = 0`. `m = 0` is accepted.
pub fn photon_subtracted_state(
    phi: &FockVector,
    m: usize,
    params: &BeamSplitterParams,
) -> Result<ConditionalResult<FockVector>> {
    let raw = apply_attenuation(&apply_annihilation(phi, m), params.t());
    let diag: Vec<f64> = phi.amplitudes().iter().map(|c| c.norm_sqr()).collect();
    let probability = prob_subtracted_from_diagonal(&diag, m, params);
    check_probability(probability)?;
    let top = phi.n_max().saturating_sub(m);
    Ok(ConditionalResult {
        state: normalize(&raw.resized(top))?.canonical_phase(),
        probability,
        outcome: Outcome { n0: 0, m2: m },
    })
}

/// The general event probability `P(n₀, m₂)` as the closed triple sum over
/// `n₁, j, k` with `ν = n₀ − m₂`, `μ = max(0, ν)`. Negative powers of `|T|`
/// appear in individual terms, so `|T| = 0` is rejected.
pub fn event_probability(rho1: &DensityMatrix, n0: usize, m2: usize, params: &BeamSplitterParams) -> Result<f64> {
    let (t2, r2) = (params.t_sq(), params.r_sq());
    // individual terms carry |T|^{-2m₂}
    if t2 < 1e-24 {
        return domain("the closed event-probability sum needs |T| > 0");
    }
    let nu = n0 as i64 - m2 as i64;
    let mu = nu.max(0);
    let diag = rho1.diagonal();
    let top = (n0 as i64 - nu) as u64; // n₀ − ν = m₂
    let mut total = 0.0;
    for (n1, &p) in diag.iter().enumerate() {
        let n1i = n1 as i64;
        if n1i < mu - nu || p == 0.0 {
            continue;
        }
        let base = ln_factorial(n0) + ln_factorial(n1) - ln_factorial((n1i + nu) as usize) - ln_factorial(m2)
            + (n1i + nu - n0 as i64) as f64 * t2.ln();
        let mut acc = 0.0;
        for j in mu..=n0 as i64 {
            for k in mu..=n0 as i64 {
                let e = (j + k - nu) as usize;
                let Some(lr) = ln_pow(r2, e) else { continue };
                let ln_mag = base
                    + lr
                    + ln_binomial(top, (j - nu) as u64)
                    + ln_binomial(top, (k - nu) as u64)
                    + ln_binomial((n1i + j) as u64, j as u64)
                    + ln_binomial((n1i + k) as u64, k as u64);
                let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * ln_mag.exp();
            }
        }
        total += p * acc;
    }
    Ok(total)
}
