//! Realistic counting and preparation.
//!
//! A photon-subtracted state heralded by `k` coincidences of an `N`-channel
//! chopping detector with efficiency `η` is a Bayes mixture of
//! `|Ψ_{0,m}⟩`; a photon-added state made with a binomial Fock-state source
//! is the `p̃_{n₀}`-weighted mixture of `|Ψ_{n₀,0}⟩`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{self, cat_state, prob_added, prob_subtracted, CatKind, CatParams};
use crate::beamsplitter::BeamSplitterParams;
use crate::error::{domain, Error, Result};
use crate::fock::{DensityMatrix, FockVector, SqueezeParam};
use crate::phasespace;
use crate::special::binomial;

/// Largest photon number for which the chopping sum is done in exact
/// integer arithmetic.
const EXACT_CHOP_MAX: usize = 20;

/// Priors are extended until this much probability is covered.
pub const PRIOR_COVERAGE: f64 = 1.0 - 1e-10;

/// Evidence below this is treated as an impossible event.
pub const EVIDENCE_FLOOR: f64 = 1e-300;

/// Posterior components lighter than this are dropped from mixtures.
pub const PRUNE_WEIGHT: f64 = 1e-15;

/// Truncation tolerance for mixture components.
const COMPONENT_TAIL: f64 = 1e-24;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChoppingDetector {
    pub n_channels: usize,
    pub efficiency: f64,
}

impl ChoppingDetector {
    pub fn new(n_channels: usize, efficiency: f64) -> Result<Self> {
        if n_channels == 0 {
            return domain("a chopping detector needs at least one channel");
        }
        if !(efficiency > 0.0 && efficiency <= 1.0) {
            return domain(format!("efficiency {efficiency} must lie in (0, 1]"));
        }
        Ok(Self { n_channels, efficiency })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BinomialSource {
    pub n_trials: usize,
    pub p: f64,
}

impl BinomialSource {
    pub fn new(n_trials: usize, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("binomial p = {p} must lie in (0, 1)"));
        }
        Ok(Self { n_trials, p })
    }
}

/// `P̃_N(k|m)` for `m = 0..=m_max`, rows `k = 0..=N`, columns `m`.
///
/// Columns up to `m = 20` come from the exact alternating sum in `i128`;
/// beyond that the occupancy recurrence
/// `P(k|m+1) = P(k|m) k/N + P(k−1|m) (N−k+1)/N` (all terms positive) takes
/// over from the last exact column.
pub fn chop_matrix(n_channels: usize, m_max: usize) -> DMatrix<f64> {
    let nc = n_channels;
    let mut out = DMatrix::zeros(nc + 1, m_max + 1);
    for m in 0..=m_max.min(EXACT_CHOP_MAX) {
        for k in 0..=nc.min(m) {
            out[(k, m)] = chop_exact(nc, k, m);
        }
    }
    let nf = nc as f64;
    for m in EXACT_CHOP_MAX..m_max {
        for k in 0..=nc {
            let stay = out[(k, m)] * k as f64 / nf;
            let grow = if k > 0 {
                out[(k - 1, m)] * (nf - k as f64 + 1.0) / nf
            } else {
                0.0
            };
            out[(k, m + 1)] = stay + grow;
        }
    }
    out
}

/// `N^{−m} C(N,k) Σ_l (−1)^l C(k,l) (k−l)^m` with the inner sum exact.
fn chop_exact(n_channels: usize, k: usize, m: usize) -> f64 {
    if k > m {
        return 0.0;
    }
    let mut sum: i128 = 0;
    let mut c: i128 = 1; // C(k, l)
    for l in 0..=k {
        let term = c * ((k - l) as i128).pow(m as u32);
        sum += if l % 2 == 0 { term } else { -term };
        c = c * (k - l) as i128 / (l + 1) as i128;
    }
    binomial(n_channels as u64, k as u64) * sum as f64 / (n_channels as f64).powi(m as i32)
}

/// Probability that `m` photons spread uniformly over `N` channels light
/// exactly `k` of them.
pub fn chop_prob(det: &ChoppingDetector, k: usize, m: usize) -> Result<f64> {
    if k > det.n_channels {
        return domain(format!("k = {k} exceeds the {} channels", det.n_channels));
    }
    if m <= EXACT_CHOP_MAX {
        return Ok(chop_exact(det.n_channels, k, m));
    }
    Ok(chop_matrix(det.n_channels, m)[(k, m)])
}

/// Binomial thinning `M_{l,m}(η) = C(m,l) η^l (1−η)^{m−l}`, zero for `l > m`.
pub fn loss_matrix(eta: f64, l: usize, m: usize) -> f64 {
    if l > m {
        return 0.0;
    }
    binomial(m as u64, l as u64) * eta.powi(l as i32) * (1.0 - eta).powi((m - l) as i32)
}

/// Response `P̃_{N,η}(k|m)` for `k = 0..=N` (rows) and `m = 0..=m_max`.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseMatrix {
    pub detector: ChoppingDetector,
    pub values: DMatrix<f64>,
}

impl ResponseMatrix {
    pub fn new(det: &ChoppingDetector, m_max: usize) -> Self {
        let chop = chop_matrix(det.n_channels, m_max);
        let mut values = DMatrix::zeros(det.n_channels + 1, m_max + 1);
        for m in 0..=m_max {
            for l in 0..=m {
                let thin = loss_matrix(det.efficiency, l, m);
                if thin == 0.0 {
                    continue;
                }
                for k in 0..=det.n_channels.min(l) {
                    values[(k, m)] += chop[(k, l)] * thin;
                }
            }
        }
        Self { detector: *det, values }
    }

    pub fn get(&self, k: usize, m: usize) -> f64 {
        self.values[(k, m)]
    }

    pub fn m_max(&self) -> usize {
        self.values.ncols() - 1
    }

    /// Header `k,m=0,m=1,…`, then one row per `k`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k");
        for m in 0..self.values.ncols() {
            write!(out, ",m={m}").unwrap();
        }
        out.push('\n');
        for k in 0..self.values.nrows() {
            write!(out, "{k}").unwrap();
            for m in 0..self.values.ncols() {
                write!(out, ",{:.16e}", self.values[(k, m)]).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// `P̃_{N,η}(k|m) = Σ_l P̃_N(k|l) M_{l,m}(η)`.
pub fn detector_response(det: &ChoppingDetector, k: usize, m: usize) -> Result<f64> {
    if k > det.n_channels {
        return domain(format!("k = {k} exceeds the {} channels", det.n_channels));
    }
    Ok(ResponseMatrix::new(det, m).get(k, m))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Posterior {
    /// `P_{N,η}(m|k)` for `m = 0..prior.len()`.
    pub weights: Vec<f64>,
    /// `P̃_{N,η}(k) = Σ_m P̃_{N,η}(k|m) P(m)` over the supplied prior.
    pub evidence: f64,
}

/// Bayes update of a photon-number prior after `k` coincidences.
pub fn posterior(det: &ChoppingDetector, k: usize, prior: &[f64]) -> Result<Posterior> {
    if k > det.n_channels {
        return domain(format!("k = {k} exceeds the {} channels", det.n_channels));
    }
    if prior.is_empty() {
        return domain("empty prior");
    }
    let resp = ResponseMatrix::new(det, prior.len() - 1);
    let joint: Vec<f64> = prior.iter().enumerate().map(|(m, p)| resp.get(k, m) * p).collect();
    let evidence: f64 = joint.iter().sum();
    if evidence < EVIDENCE_FLOOR || evidence.is_nan() {
        return Err(Error::ImpossibleEvent { evidence });
    }
    Ok(Posterior {
        weights: joint.iter().map(|j| j / evidence).collect(),
        evidence,
    })
}

/// Prior `P(m)` of the subtraction count for a squeezed vacuum, extended
/// until the cumulative probability reaches [`PRIOR_COVERAGE`].
pub fn subtraction_prior(kappa: SqueezeParam, bs: &BeamSplitterParams) -> Result<Vec<f64>> {
    let mut prior = Vec::new();
    let mut total = 0.0;
    while total < PRIOR_COVERAGE {
        let p = prob_subtracted(prior.len(), kappa, bs)?;
        prior.push(p);
        total += p;
        if prior.len() > 100_000 {
            return Err(Error::Nonconvergence { terms: prior.len() });
        }
    }
    Ok(prior)
}

/// `C(N,n₀) p^{n₀} (1−p)^{N−n₀}`, zero for `n₀ > N`.
pub fn binomial_pmf(src: &BinomialSource, n0: usize) -> f64 {
    loss_matrix(src.p, n0, src.n_trials)
}

/// Statistical mixture of photon-added or photon-subtracted cat states.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedConditional {
    pub kind: CatKind,
    pub kappa_prime: Complex64,
    /// Count (`m` or `n₀`) of each component.
    pub counts: Vec<usize>,
    pub weights: Vec<f64>,
    pub components: Vec<FockVector>,
    /// Heralding probability: the evidence `P̃_{N,η}(k)` or the source
    /// average `Σ p̃_{n₀} P(n₀)`.
    pub detect_probability: f64,
    /// Weight of the component with count zero (no photon added or
    /// subtracted).
    pub trivial_weight: f64,
    /// Weight removed by pruning before renormalization.
    pub discarded_weight: f64,
}

impl MixedConditional {
    fn build(kind: CatKind, kappa_prime: Complex64, raw: Vec<(usize, f64)>, detect_probability: f64) -> Result<Self> {
        let trivial_weight: f64 = raw.iter().filter(|(c, _)| *c == 0).map(|(_, w)| w).sum();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        let kept: Vec<(usize, f64)> = raw.into_iter().filter(|(_, w)| *w >= PRUNE_WEIGHT).collect();
        let kept_total: f64 = kept.iter().map(|(_, w)| w).sum();
        let mut counts = Vec::with_capacity(kept.len());
        let mut weights = Vec::with_capacity(kept.len());
        let mut components = Vec::with_capacity(kept.len());
        for (count, w) in kept {
            let params = CatParams::new(kappa_prime, count, kind)?;
            counts.push(count);
            weights.push(w / kept_total);
            components.push(cat_state(&params, COMPONENT_TAIL)?.state);
        }
        Ok(Self {
            kind,
            kappa_prime,
            counts,
            weights,
            components,
            detect_probability,
            trivial_weight: trivial_weight / total,
            discarded_weight: (total - kept_total) / total,
        })
    }

    fn params(&self, i: usize) -> CatParams {
        CatParams {
            kappa_prime: self.kappa_prime,
            count: self.counts[i],
            kind: self.kind,
        }
    }

    fn weighted<F>(&self, f: F) -> Result<f64>
    where
        F: Fn(&CatParams) -> Result<f64>,
    {
        let mut total = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            total += w * f(&self.params(i))?;
        }
        Ok(total)
    }

    /// Mixed homodyne distribution from the closed forms.
    pub fn quad_dist(&self, x: f64, phi: f64) -> Result<f64> {
        self.weighted(|p| analytic::quad_dist(p, x, phi))
    }

    pub fn wigner(&self, x: f64, p: f64) -> Result<f64> {
        self.weighted(|c| analytic::wigner(c, x, p))
    }

    pub fn husimi(&self, x: f64, p: f64) -> Result<f64> {
        self.weighted(|c| analytic::husimi(c, x, p))
    }

    /// Mixed homodyne distribution from the Fock components.
    pub fn quad_dist_numeric(&self, x: f64, phi: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * phasespace::quad_dist_pure(c, x, phi))
            .sum()
    }

    pub fn wigner_numeric(&self, x: f64, p: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * phasespace::wigner_pure(c, x, p))
            .sum()
    }

    pub fn husimi_numeric(&self, x: f64, p: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * phasespace::husimi_pure(c, x, p))
            .sum()
    }

    pub fn density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::mixture(&self.weights, &self.components)
    }

    /// `⟨ψ|ρ|ψ⟩` for a normalized pure state.
    pub fn fidelity_with(&self, psi: &FockVector) -> f64 {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(w, c)| w * crate::fock::inner_product(psi, c).norm_sqr())
            .sum()
    }
}

/// Photon-subtracted squeezed vacuum heralded by `k` coincidences.
pub fn mixed_subtracted(
    det: &ChoppingDetector,
    k: usize,
    kappa: SqueezeParam,
    bs: &BeamSplitterParams,
) -> Result<MixedConditional> {
    let prior = subtraction_prior(kappa, bs)?;
    let post = posterior(det, k, &prior)?;
    let raw = post.weights.into_iter().enumerate().collect();
    MixedConditional::build(
        CatKind::Subtracted,
        kappa.attenuated(bs.t()).kappa(),
        raw,
        post.evidence,
    )
}

/// Photon-added squeezed vacuum with a binomial Fock-state source: weights
/// `p̃_{n₀}` for every `n₀ = 0..=N` (including `n₀ = 0`), heralding
/// probability `Σ p̃_{n₀} P(n₀)`.
pub fn mixed_added(src: &BinomialSource, kappa: SqueezeParam, bs: &BeamSplitterParams) -> Result<MixedConditional> {
    let mut raw = Vec::with_capacity(src.n_trials + 1);
    let mut average = 0.0;
    for n0 in 0..=src.n_trials {
        let w = binomial_pmf(src, n0);
        average += w * prob_added(n0, kappa, bs)?;
        raw.push((n0, w));
    }
    MixedConditional::build(CatKind::Added, kappa.attenuated(bs.t()).kappa(), raw, average)
}
