//! Heralded photon-added and photon-subtracted states behind a lossless
//! beam splitter.
//!
//! A signal mode is mixed with a reference mode prepared in a Fock state.
//! Counting `m₂` photons in one output port projects the other port onto a
//! new state: with `n₀` reference photons and a zero count the result is the
//! photon-added state `(â†)^{n₀} T^{n̂} |Φ⟩`, with a vacuum reference and `m`
//! counts it is the photon-subtracted state `â^m T^{n̂} |Φ⟩`.
//!
//! The crate is organised in layers:
//!
//! - [`fock`]: truncated single- and two-mode Fock-space states.
//! - [`beamsplitter`]: the exact two-mode unitary and conditioning, the
//!   numerical engine for arbitrary inputs.
//! - [`analytic`]: closed forms for photon-added and photon-subtracted
//!   squeezed vacuum (coefficients, probabilities, phase-space functions).
//! - [`phasespace`]: formula-free quadrature, Wigner and Husimi transforms of
//!   arbitrary density matrices, used as the independent check on
//!   [`analytic`].
//! - [`detection`]: multichannel photon chopping with losses, Bayes mixing,
//!   and binomial Fock-state preparation.
//! - [`cli`]: the scenario-driven `catgen` front end.

pub mod analytic;
pub mod beamsplitter;
pub mod cli;
pub mod detection;
pub mod error;
pub mod fock;
pub mod phasespace;
pub mod special;

pub use error::{Error, Result};
pub use num_complex::Complex64;
