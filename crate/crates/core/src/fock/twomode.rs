//! Two-mode states on the photon-number triangle `n₁ + n₂ ≤ n_total_max`.
//!
//! A lossless beam splitter conserves `n₁ + n₂`, so storing complete
//! total-number blocks makes the unitary exact for any truncation.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{DensityMatrix, FockVector};

/// Flat index of `|n₁, n₂⟩`: blocks of equal total `N` are contiguous and
/// ordered by `n₁` within a block.
pub fn pair_index(n1: usize, n2: usize) -> usize {
    let n = n1 + n2;
    n * (n + 1) / 2 + n1
}

/// Number of basis states with `n₁ + n₂ ≤ n_total_max`.
pub fn triangle_dim(n_total_max: usize) -> usize {
    (n_total_max + 1) * (n_total_max + 2) / 2
}

/// Pure two-mode state.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeState {
    n_total_max: usize,
    amps: Vec<Complex64>,
}

impl TwoModeState {
    pub fn zeros(n_total_max: usize) -> Self {
        Self {
            n_total_max,
            amps: vec![Complex64::new(0.0, 0.0); triangle_dim(n_total_max)],
        }
    }

    /// `|a⟩ ⊗ |b⟩`, exact because the triangle reaches
    /// `a.n_max() + b.n_max()`.
    pub fn product(a: &FockVector, b: &FockVector) -> Self {
        let mut out = Self::zeros(a.n_max() + b.n_max());
        for (n1, &ca) in a.amplitudes().iter().enumerate() {
            for (n2, &cb) in b.amplitudes().iter().enumerate() {
                out.amps[pair_index(n1, n2)] = ca * cb;
            }
        }
        out
    }

    pub fn n_total_max(&self) -> usize {
        self.n_total_max
    }

    pub fn get(&self, n1: usize, n2: usize) -> Complex64 {
        if n1 + n2 > self.n_total_max {
            return Complex64::new(0.0, 0.0);
        }
        self.amps[pair_index(n1, n2)]
    }

    pub fn set(&mut self, n1: usize, n2: usize, value: Complex64) {
        self.amps[pair_index(n1, n2)] = value;
    }

    /// Amplitudes of the block with total photon number `n`, indexed by `n₁`.
    pub fn block(&self, n: usize) -> &[Complex64] {
        let start = pair_index(0, n);
        &self.amps[start..start + n + 1]
    }

    pub fn block_mut(&mut self, n: usize) -> &mut [Complex64] {
        let start = pair_index(0, n);
        &mut self.amps[start..start + n + 1]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Unnormalized mode-1 vector `⟨m₂|_2 |ψ⟩`, of length
    /// `n_total_max − m₂ + 1`.
    pub fn project_mode2(&self, m2: usize) -> FockVector {
        let top = self.n_total_max.saturating_sub(m2);
        let amps = (0..=top).map(|n1| self.get(n1, m2)).collect();
        FockVector::new(amps)
    }
}

/// Two-mode density operator stored densely over the triangle basis.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeDensity {
    n_total_max: usize,
    entries: DMatrix<Complex64>,
}

impl TwoModeDensity {
    pub fn from_pure(psi: &TwoModeState) -> Self {
        let v = nalgebra::DVector::from_column_slice(&psi.amps);
        Self {
            n_total_max: psi.n_total_max,
            entries: &v * v.adjoint(),
        }
    }

    /// `ρ₁ ⊗ ρ₂` on the triangle reaching `n_max(ρ₁) + n_max(ρ₂)`.
    pub fn product(rho1: &DensityMatrix, rho2: &DensityMatrix) -> Self {
        let (m1, m2) = (rho1.n_max(), rho2.n_max());
        let n_total_max = m1 + m2;
        let mut entries = DMatrix::zeros(triangle_dim(n_total_max), triangle_dim(n_total_max));
        for a1 in 0..=m1 {
            for a2 in 0..=m2 {
                let row = pair_index(a1, a2);
                for b1 in 0..=m1 {
                    let r1 = rho1.get(a1, b1);
                    if r1 == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    for b2 in 0..=m2 {
                        entries[(row, pair_index(b1, b2))] = r1 * rho2.get(a2, b2);
                    }
                }
            }
        }
        Self { n_total_max, entries }
    }

    pub(crate) fn from_parts(n_total_max: usize, entries: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(entries.nrows(), triangle_dim(n_total_max));
        Self { n_total_max, entries }
    }

    pub fn n_total_max(&self) -> usize {
        self.n_total_max
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// `⟨n₁, n₂|ρ|n₁′, n₂′⟩`.
    pub fn get(&self, bra: (usize, usize), ket: (usize, usize)) -> Complex64 {
        if bra.0 + bra.1 > self.n_total_max || ket.0 + ket.1 > self.n_total_max {
            return Complex64::new(0.0, 0.0);
        }
        self.entries[(pair_index(bra.0, bra.1), pair_index(ket.0, ket.1))]
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    /// Unnormalized mode-1 operator `⟨m₂|ρ|m₂⟩`.
    pub fn project_mode2(&self, m2: usize) -> DensityMatrix {
        let top = self.n_total_max.saturating_sub(m2);
        let block = DMatrix::from_fn(top + 1, top + 1, |a, b| self.get((a, m2), (b, m2)));
        DensityMatrix::new(block).expect("square block")
    }

    /// Partial trace over mode 2.
    pub fn reduced_mode1(&self) -> DensityMatrix {
        let top = self.n_total_max;
        let mut block = DMatrix::zeros(top + 1, top + 1);
        for m2 in 0..=top {
            for a in 0..=top - m2 {
                for b in 0..=top - m2 {
                    block[(a, b)] += self.get((a, m2), (b, m2));
                }
            }
        }
        DensityMatrix::new(block).expect("square block")
    }
}
