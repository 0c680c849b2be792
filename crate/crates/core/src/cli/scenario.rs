//! Scenario files: TOML with dotted keys, one table per concern.
//!
//! ```toml
//! schema_version = 1
//! input.kind = "squeezed_vacuum"
//! input.kappa_abs = 0.7777777777777778
//! input.kappa_phase = 3.141592653589793
//! beam_splitter.t_sq = 0.9
//! operation.kind = "subtract"
//! operation.count = 4
//! detector.kind = "chopping"
//! detector.n_channels = 20
//! detector.efficiency = 0.95
//! ```
//!
//! Phases are in radians. Omitted tables take their defaults: ideal
//! detector, pure reference source, an 81×81 grid over `[−4, 4]²`.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::analytic::CatKind;
use crate::beamsplitter::{BeamSplitterParams, Outcome};
use crate::detection::{BinomialSource, ChoppingDetector};
use crate::error::Result;
use crate::fock::{self, FockVector, SqueezeParam, LADDER_HEADROOM};
use crate::phasespace::GridAxes;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub input: Input,
    pub beam_splitter: BeamSplitterSpec,
    pub operation: Operation,
    #[serde(default)]
    pub detector: Detector,
    #[serde(default)]
    pub source: Source,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Input {
    SqueezedVacuum {
        kappa_abs: f64,
        #[serde(default)]
        kappa_phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
    },
    Fock {
        n: usize,
    },
    /// Coherent amplitude expanded in the Fock basis.
    Coherent {
        alpha_abs: f64,
        #[serde(default)]
        alpha_phase: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n_max: Option<usize>,
    },
    /// Explicit amplitudes, normalized on load; `im` may be omitted.
    Amplitudes {
        re: Vec<f64>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        im: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSplitterSpec {
    pub t_sq: f64,
    #[serde(default)]
    pub phi_t: f64,
    #[serde(default)]
    pub phi_r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperationKind {
    Add,
    Subtract,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Operation {
    pub kind: OperationKind,
    /// `n₀` reference photons for `add`; `m` counts (or coincidences `k`
    /// with a chopping detector) for `subtract`.
    pub count: usize,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Detector {
    #[default]
    Ideal,
    Chopping {
        n_channels: usize,
        efficiency: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Source {
    #[default]
    Pure,
    Binomial {
        n_trials: usize,
        p: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n_x: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
    /// Phase samples over `[0, π]` for the quadrature surface.
    pub n_phi: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            x_min: -4.0,
            x_max: 4.0,
            n_x: 81,
            p_min: -4.0,
            p_max: 4.0,
            n_p: 81,
            n_phi: 33,
        }
    }
}

impl GridSpec {
    pub fn phase_space(&self) -> Result<GridAxes> {
        GridAxes::new((self.x_min, self.x_max), self.n_x, (self.p_min, self.p_max), self.n_p)
    }

    /// `x` along the first axis, `φ ∈ [0, π]` along the second.
    pub fn quadrature(&self) -> Result<GridAxes> {
        GridAxes::new(
            (self.x_min, self.x_max),
            self.n_x,
            (0.0, std::f64::consts::PI),
            self.n_phi,
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Fock-space tail mass dropped when truncating input and output states.
    pub tail_tol: f64,
    /// Default for `--tolerance` in `compare`.
    pub tolerance: f64,
    /// Largest count tabulated by `probability`.
    pub max_count: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            tail_tol: 1e-20,
            tolerance: 1e-6,
            max_count: 10,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl Scenario {
    pub fn parse(text: &str) -> std::result::Result<Self, CliError> {
        let scenario: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        scenario.check_structure()?;
        Ok(scenario)
    }

    pub fn load(path: &Path) -> std::result::Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Combinations that make no sense regardless of parameter values.
    fn check_structure(&self) -> std::result::Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mixed = !matches!(self.detector, Detector::Ideal) || !matches!(self.source, Source::Pure);
        if matches!(self.detector, Detector::Chopping { .. }) && self.operation.kind != OperationKind::Subtract {
            return Err(CliError::Config(
                "a chopping detector requires operation.kind = \"subtract\"".into(),
            ));
        }
        if matches!(self.source, Source::Binomial { .. }) && self.operation.kind != OperationKind::Add {
            return Err(CliError::Config(
                "a binomial source requires operation.kind = \"add\"".into(),
            ));
        }
        if let Source::Binomial { n_trials, .. } = self.source {
            if n_trials != self.operation.count {
                return Err(CliError::Config(
                    "operation.count must equal source.n_trials for a binomial source".into(),
                ));
            }
        }
        if mixed && !self.is_squeezed_vacuum() {
            return Err(CliError::Config(
                "mixtures are available for squeezed-vacuum input only".into(),
            ));
        }
        if let Input::Amplitudes { re, im } = &self.input {
            if re.is_empty() || (!im.is_empty() && im.len() != re.len()) {
                return Err(CliError::Config(
                    "input.re must be non-empty and input.im empty or of equal length".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn is_squeezed_vacuum(&self) -> bool {
        matches!(self.input, Input::SqueezedVacuum { .. })
    }

    pub fn is_mixed(&self) -> bool {
        !matches!(self.detector, Detector::Ideal) || !matches!(self.source, Source::Pure)
    }

    pub fn beam_splitter(&self) -> Result<BeamSplitterParams> {
        let b = self.beam_splitter;
        BeamSplitterParams::from_transmittance(b.t_sq, b.phi_t, b.phi_r)
    }

    pub fn kappa(&self) -> Option<Result<SqueezeParam>> {
        match self.input {
            Input::SqueezedVacuum {
                kappa_abs, kappa_phase, ..
            } => Some(SqueezeParam::from_polar(kappa_abs, kappa_phase)),
            _ => None,
        }
    }

    pub fn cat_kind(&self) -> CatKind {
        match self.operation.kind {
            OperationKind::Add => CatKind::Added,
            OperationKind::Subtract => CatKind::Subtracted,
        }
    }

    pub fn outcome(&self) -> Outcome {
        match self.operation.kind {
            OperationKind::Add => Outcome {
                n0: self.operation.count,
                m2: 0,
            },
            OperationKind::Subtract => Outcome {
                n0: 0,
                m2: self.operation.count,
            },
        }
    }

    pub fn chopping(&self) -> Option<Result<ChoppingDetector>> {
        match self.detector {
            Detector::Chopping { n_channels, efficiency } => Some(ChoppingDetector::new(n_channels, efficiency)),
            Detector::Ideal => None,
        }
    }

    pub fn binomial(&self) -> Option<Result<BinomialSource>> {
        match self.source {
            Source::Binomial { n_trials, p } => Some(BinomialSource::new(n_trials, p)),
            Source::Pure => None,
        }
    }

    /// The signal-mode input state, truncated so that at most
    /// `numerics.tail_tol` of its norm is dropped, with headroom for the
    /// ladder operators of the configured operation.
    pub fn input_state(&self) -> Result<FockVector> {
        let tol = self.numerics.tail_tol;
        let headroom = self.operation.count.max(self.numerics.max_count) + LADDER_HEADROOM;
        match &self.input {
            Input::SqueezedVacuum {
                kappa_abs,
                kappa_phase,
                n_max,
            } => {
                let kappa = SqueezeParam::from_polar(*kappa_abs, *kappa_phase)?;
                let n = n_max.unwrap_or_else(|| fock::squeezed_vacuum_cutoff(kappa, tol) + headroom);
                Ok(fock::make_squeezed_vacuum(kappa, n).state)
            }
            Input::Fock { n } => fock::make_fock(*n, *n),
            Input::Coherent {
                alpha_abs,
                alpha_phase,
                n_max,
            } => {
                let alpha = Complex64::from_polar(*alpha_abs, *alpha_phase);
                if let Some(n) = n_max {
                    return Ok(fock::make_coherent(alpha, *n).state);
                }
                // Poisson tail: grow until the dropped mass is below tol
                let mut n = (alpha.norm_sqr().ceil() as usize).max(8);
                loop {
                    let trunc = fock::make_coherent(alpha, n);
                    if trunc.tail_mass <= tol.max(1e-15) {
                        return Ok(fock::make_coherent(alpha, n + headroom).state);
                    }
                    n += 8;
                }
            }
            Input::Amplitudes { re, im } => {
                let amps = re
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| Complex64::new(r, im.get(i).copied().unwrap_or(0.0)))
                    .collect();
                fock::normalize(&FockVector::new(amps))
            }
        }
    }
}
