use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::FockVector;
use crate::error::{domain, Result};

/// Density operator of one mode on the truncated basis `|0⟩ … |n_max⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() || entries.nrows() == 0 {
            return domain("density matrix must be square and non-empty");
        }
        Ok(Self { entries })
    }

    /// `|ψ⟩⟨ψ|` with whatever norm `ψ` carries.
    pub fn from_pure(psi: &FockVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        Self {
            entries: &v * v.adjoint(),
        }
    }

    /// Diagonal (Fock-mixture) state `Σ pₙ |n⟩⟨n|`.
    pub fn from_diagonal(probs: &[f64]) -> Self {
        let d = nalgebra::DVector::from_iterator(probs.len(), probs.iter().map(|&p| Complex64::new(p, 0.0)));
        Self {
            entries: DMatrix::from_diagonal(&d),
        }
    }

    /// `Σ wᵢ |ψᵢ⟩⟨ψᵢ|`, embedded at the largest truncation among the states.
    pub fn mixture(weights: &[f64], states: &[FockVector]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return domain("mixture needs one weight per state");
        }
        let n_max = states.iter().map(FockVector::n_max).max().unwrap_or(0);
        let mut acc = DMatrix::zeros(n_max + 1, n_max + 1);
        for (w, s) in weights.iter().zip(states) {
            acc += Self::from_pure(&s.resized(n_max)).entries * Complex64::new(*w, 0.0);
        }
        Ok(Self { entries: acc })
    }

    pub fn n_max(&self) -> usize {
        self.entries.nrows() - 1
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|c| c.re).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.entries.diagonal().iter().map(|c| c.re).collect()
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(crate::Error::ZeroNorm);
        }
        Ok(Self {
            entries: &self.entries / Complex64::new(tr, 0.0),
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.entries - self.entries.adjoint()).iter().all(|c| c.norm() <= tol)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(herm).eigenvalues.min()
    }

    /// Checks hermiticity (1e-12), unit trace (1e-10) and positivity
    /// (eigenvalues ≥ −1e-10).
    pub fn is_valid_state(&self) -> bool {
        self.is_hermitian(1e-12) && (self.trace() - 1.0).abs() <= 1e-10 && self.min_eigenvalue() >= -1e-10
    }

    /// `⟨ψ|ρ|ψ⟩`, the fidelity with a normalized pure state.
    pub fn fidelity_with_pure(&self, psi: &FockVector) -> f64 {
        let v = nalgebra::DVector::from_column_slice(psi.resized(self.n_max()).amplitudes());
        (v.adjoint() * &self.entries * &v)[(0, 0)].re
    }

    /// `Tr(ρσ)` on the common truncation.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        let n = self.n_max().min(other.n_max()) + 1;
        let a = self.entries.view((0, 0), (n, n));
        let b = other.entries.view((0, 0), (n, n));
        (a * b).trace().re
    }

    pub fn mean_photon_number(&self) -> f64 {
        self.diagonal()
            .iter()
            .enumerate()
            .map(|(n, p)| n as f64 * p)
            .sum::<f64>()
            / self.trace()
    }
}
