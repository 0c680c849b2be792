//! Formula-free phase-space transforms of truncated states.
//!
//! Quadrature distributions use oscillator eigenfunctions, the Wigner
//! function uses Laguerre-function matrix elements of the displaced parity,
//! and the Husimi function uses coherent-state overlaps. None of these
//! touch the closed forms in [`crate::analytic`].
//!
//! Conventions: `x̂ = (â + â†)/√2`, vacuum variance ½, the rotated
//! quadrature at phase `φ` has eigenfunctions `e^{−inφ}⟨x|n⟩`, and
//! `|α⟩` with `α = (x + ip)/√2` is centred at `(x, p)`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::fock::{DensityMatrix, FockVector};
use crate::special::ln_factorial;

/// Axes of a rectangular sampling mesh. Points include both end points.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GridAxes {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

impl GridAxes {
    pub fn new(x: (f64, f64), n_x: usize, p: (f64, f64), n_p: usize) -> Result<Self> {
        let axes = Self {
            x_min: x.0,
            x_max: x.1,
            n_x,
            p_min: p.0,
            p_max: p.1,
            n_p,
        };
        axes.validate()?;
        Ok(axes)
    }

    /// `[−half, half]²` with `n` points per axis.
    pub fn square(half: f64, n: usize) -> Result<Self> {
        Self::new((-half, half), n, (-half, half), n)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.x_min, self.x_max, self.p_min, self.p_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.p_max <= self.p_min {
            return domain("grid axes must be finite and increasing");
        }
        if self.n_x < 2 || self.n_p < 2 {
            return domain("grid needs at least two points per axis");
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_x - 1) as f64
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }
}

/// Sampled surface; `values[i * n_p + j]` belongs to `(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid2D {
    pub axes: GridAxes,
    pub values: Vec<f64>,
}

impl Grid2D {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axes.n_p + j]
    }

    /// Plain Riemann sum `Σ f dx dp`.
    pub fn riemann_sum(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.axes.dx() * self.axes.dp()
    }

    /// Two-dimensional trapezoidal rule.
    pub fn trapezoid(&self) -> f64 {
        let (nx, np) = (self.axes.n_x, self.axes.n_p);
        let mut total = 0.0;
        for i in 0..nx {
            let wi = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            for j in 0..np {
                let wj = if j == 0 || j == np - 1 { 0.5 } else { 1.0 };
                total += wi * wj * self.get(i, j);
            }
        }
        total * self.axes.dx() * self.axes.dp()
    }

    pub fn max_abs_diff(&self, other: &Grid2D) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First line: axis metadata as `key=value` pairs; then `n_x` rows of
    /// `n_p` comma-separated values.
    pub fn to_csv(&self) -> String {
        let a = &self.axes;
        let mut out = format!(
            "x_min={:.16e},x_max={:.16e},n_x={},p_min={:.16e},p_max={:.16e},n_p={}\n",
            a.x_min, a.x_max, a.n_x, a.p_min, a.p_max, a.n_p
        );
        for row in self.values.chunks(a.n_p) {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", line.join(",")).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Domain("empty grid CSV".into()))?;
        let mut fields = std::collections::HashMap::new();
        for kv in header.split(',') {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Domain(format!("bad grid header field {kv:?}")))?;
            fields.insert(k.trim(), v.trim());
        }
        let num = |k: &str| -> Result<f64> {
            fields
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Domain(format!("grid header lacks {k}")))
        };
        let count = |k: &str| -> Result<usize> {
            fields
                .get(k)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Domain(format!("grid header lacks {k}")))
        };
        let axes = GridAxes::new(
            (num("x_min")?, num("x_max")?),
            count("n_x")?,
            (num("p_min")?, num("p_max")?),
            count("n_p")?,
        )?;
        let mut values = Vec::with_capacity(axes.n_x * axes.n_p);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse().map_err(|e| Error::Domain(format!("grid value: {e}"))))
                .collect::<Result<_>>()?;
            if row.len() != axes.n_p {
                return domain("grid row length does not match n_p");
            }
            values.extend(row);
        }
        if values.len() != axes.n_x * axes.n_p {
            return domain("grid row count does not match n_x");
        }
        Ok(Self { axes, values })
    }
}

/// Evaluates `f(x_i, p_j)` over the mesh, rows in parallel.
pub fn eval_grid<F>(axes: &GridAxes, f: F) -> Grid2D
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let values = (0..axes.n_x)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = axes.x(i);
            (0..axes.n_p).map(move |j| (x, axes.p(j)))
        })
        .map(|(x, p)| f(x, p))
        .collect();
    Grid2D { axes: *axes, values }
}

/// Fallible variant of [`eval_grid`]; the first error wins.
pub fn try_eval_grid<F>(axes: &GridAxes, f: F) -> Result<Grid2D>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let values = (0..axes.n_x)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = axes.x(i);
            (0..axes.n_p).map(move |j| (x, axes.p(j)))
        })
        .map(|(x, p)| f(x, p))
        .collect::<Result<Vec<f64>>>()?;
    Ok(Grid2D { axes: *axes, values })
}

/// `⟨x|n⟩` for `n = 0..=n_max` by the normalized three-term recurrence
/// `ψ_k = √(2/k) x ψ_{k−1} − √((k−1)/k) ψ_{k−2}`.
pub fn oscillator_functions(n_max: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_max + 1];
    out[0] = PI.powf(-0.25) * (-0.5 * x * x).exp();
    if n_max >= 1 {
        out[1] = std::f64::consts::SQRT_2 * x * out[0];
    }
    for k in 2..=n_max {
        let kf = k as f64;
        out[k] = (2.0 / kf).sqrt() * x * out[k - 1] - ((kf - 1.0) / kf).sqrt() * out[k - 2];
    }
    out
}

/// Rotated eigenfunctions `e^{−inφ}⟨x|n⟩`.
fn rotated_functions(n_max: usize, x: f64, phi: f64) -> Vec<Complex64> {
    oscillator_functions(n_max, x)
        .into_iter()
        .enumerate()
        .map(|(n, f)| Complex64::from_polar(f, -(n as f64) * phi))
        .collect()
}

/// `p(x, φ) = Σ_{n,n′} ρ_{nn′} e^{−i(n−n′)φ} ⟨x|n⟩⟨x|n′⟩`.
pub fn quad_dist_numeric(rho: &DensityMatrix, x: f64, phi: f64) -> f64 {
    let v = rotated_functions(rho.n_max(), x, phi);
    let mut total = Complex64::new(0.0, 0.0);
    for (n, vn) in v.iter().enumerate() {
        let row: Complex64 = v.iter().enumerate().map(|(k, vk)| rho.get(n, k) * vk.conj()).sum();
        total += vn * row;
    }
    total.re
}

/// Pure-state shortcut `|Σ_n c_n e^{−inφ}⟨x|n⟩|²`.
pub fn quad_dist_pure(psi: &FockVector, x: f64, phi: f64) -> f64 {
    let v = rotated_functions(psi.n_max(), x, phi);
    psi.amplitudes()
        .iter()
        .zip(&v)
        .map(|(c, f)| c * f)
        .sum::<Complex64>()
        .norm_sqr()
}

/// Normalized associated Laguerre functions
/// `ψ_n^{(k)}(t) = √(n!/(n+k)!) t^{k/2} e^{−t/2} L_n^{(k)}(t)` for
/// `n + k <= n_top`, indexed `[k][n]`.
fn laguerre_functions(n_top: usize, t: f64) -> Vec<Vec<f64>> {
    (0..=n_top)
        .map(|k| {
            let len = n_top - k + 1;
            let mut ps = vec![0.0; len];
            let kf = k as f64;
            ps[0] = if t > 0.0 {
                (0.5 * kf * t.ln() - 0.5 * t - 0.5 * ln_factorial(k)).exp()
            } else if k == 0 {
                1.0
            } else {
                0.0
            };
            if len > 1 {
                ps[1] = (kf + 1.0 - t) * ps[0] / (kf + 1.0).sqrt();
            }
            for n in 1..len.saturating_sub(1) {
                let nf = n as f64;
                ps[n + 1] = ((2.0 * nf + kf + 1.0 - t) * ps[n] - (nf * (nf + kf)).sqrt() * ps[n - 1])
                    / ((nf + 1.0) * (nf + kf + 1.0)).sqrt();
            }
            ps
        })
        .collect()
}

/// Wigner function from matrix elements `ρ(m, n)` on levels `0..=n_max`:
/// `W = (1/π) Σ_{k,n} (2 − δ_{k0}) Re[e^{−ikθ} ρ_{n+k,n}] (−1)ⁿ ψ_n^{(k)}(2r²)`.
fn wigner_from<F>(n_max: usize, rho: F, x: f64, p: f64) -> f64
where
    F: Fn(usize, usize) -> Complex64,
{
    let t = 2.0 * (x * x + p * p);
    let theta = p.atan2(x);
    let table = laguerre_functions(n_max, t);
    let mut total = 0.0;
    for (k, ps) in table.iter().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (n, &f) in ps.iter().enumerate() {
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += rho(n + k, n) * (sign * f);
        }
        let term = (acc * Complex64::from_polar(1.0, -(k as f64) * theta)).re;
        total += if k == 0 { term } else { 2.0 * term };
    }
    total / PI
}

pub fn wigner_numeric(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    wigner_from(rho.n_max(), |m, n| rho.get(m, n), x, p)
}

pub fn wigner_pure(psi: &FockVector, x: f64, p: f64) -> f64 {
    let c = psi.amplitudes();
    wigner_from(psi.n_max(), |m, n| c[m] * c[n].conj(), x, p)
}

/// `⟨n|α⟩` for `n = 0..=n_max`.
fn coherent_overlaps(n_max: usize, alpha: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..=n_max {
        out.push(cur);
        cur *= alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// `Q(x, p) = ⟨α|ρ|α⟩ / (2π)` with `α = (x + ip)/√2`.
pub fn husimi_numeric(rho: &DensityMatrix, x: f64, p: f64) -> f64 {
    let v = coherent_overlaps(rho.n_max(), Complex64::new(x, p) / std::f64::consts::SQRT_2);
    let mut total = Complex64::new(0.0, 0.0);
    for (n, vn) in v.iter().enumerate() {
        let row: Complex64 = v.iter().enumerate().map(|(k, vk)| rho.get(n, k) * vk).sum();
        total += vn.conj() * row;
    }
    total.re / (2.0 * PI)
}

pub fn husimi_pure(psi: &FockVector, x: f64, p: f64) -> f64 {
    let v = coherent_overlaps(psi.n_max(), Complex64::new(x, p) / std::f64::consts::SQRT_2);
    psi.amplitudes()
        .iter()
        .zip(&v)
        .map(|(c, a)| a.conj() * c)
        .sum::<Complex64>()
        .norm_sqr()
        / (2.0 * PI)
}
