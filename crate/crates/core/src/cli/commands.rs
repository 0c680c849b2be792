use std::fmt::Write as _;

use serde_json::{json, Map, Value};

use super::scenario::Scenario;
use super::{CliError, Command, Mode};
use crate::analytic::{self, cat_state, prob_added, prob_subtracted, CatKind, CatParams};
use crate::beamsplitter::{
    apply_beam_splitter_pure, conditioned_pipeline, event_probability, photon_added_state, photon_subtracted_state,
    prob_added_from_diagonal, prob_subtracted_from_diagonal, BeamSplitterParams, IMPROBABLE_FLOOR,
};
use crate::detection::{
    binomial_pmf, mixed_added, mixed_subtracted, posterior, subtraction_prior, MixedConditional, ResponseMatrix,
};
use crate::error::Error;
use crate::fock::{self, DensityMatrix, FockVector, TwoModeState};
use crate::phasespace::{self, eval_grid, try_eval_grid, Grid2D};

/// Files to write and the JSON sections of `summary.json`.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub files: Vec<(String, String)>,
    pub probabilities: Map<String, Value>,
    pub deviations: Map<String, Value>,
    /// Exit code and message when the command ran but its check failed.
    pub failure: Option<(i32, String)>,
}

enum Conditioned {
    Pure {
        state: FockVector,
        probability: f64,
        params: Option<CatParams>,
    },
    Mixed(MixedConditional),
}

pub(super) fn execute(command: Command, s: &Scenario, mode: Mode, tolerance: f64) -> Result<Report, CliError> {
    match command {
        Command::Generate => generate(s, mode),
        Command::Probability => probability(s),
        Command::Grid => grid(s, mode),
        Command::Detector => detector(s),
        Command::Compare => compare(s, tolerance),
    }
}

fn conditioned(s: &Scenario, mode: Mode) -> Result<Conditioned, CliError> {
    let bs = s.beam_splitter()?;
    let count = s.operation.count;
    if let Some(det) = s.chopping() {
        let kappa = s.kappa().expect("checked on load")?;
        return Ok(Conditioned::Mixed(mixed_subtracted(&det?, count, kappa, &bs)?));
    }
    if let Some(src) = s.binomial() {
        let kappa = s.kappa().expect("checked on load")?;
        return Ok(Conditioned::Mixed(mixed_added(&src?, kappa, &bs)?));
    }
    let params = match s.kappa() {
        Some(kappa) => Some(CatParams::from_setup(kappa?, &bs, count, s.cat_kind())?),
        None => None,
    };
    match mode {
        Mode::Analytic => {
            let params = params.expect("analytic mode needs squeezed vacuum");
            let kappa = s.kappa().expect("squeezed vacuum")?;
            let probability = match s.cat_kind() {
                CatKind::Added => prob_added(count, kappa, &bs)?,
                CatKind::Subtracted => prob_subtracted(count, kappa, &bs)?,
            };
            if probability < IMPROBABLE_FLOOR {
                return Err(Error::ImprobableOutcome { probability }.into());
            }
            let state = cat_state(&params, s.numerics.tail_tol)?.state;
            Ok(Conditioned::Pure {
                state,
                probability,
                params: Some(params),
            })
        }
        Mode::Numeric => {
            let res = conditioned_pipeline(&s.input_state()?, s.outcome(), &bs)?;
            Ok(Conditioned::Pure {
                state: res.state,
                probability: res.probability,
                params,
            })
        }
    }
}

fn generate(s: &Scenario, mode: Mode) -> Result<Report, CliError> {
    let mut report = Report::default();
    match conditioned(s, mode)? {
        Conditioned::Pure { state, probability, .. } => {
            report
                .probabilities
                .insert("conditioning_event".into(), json!(probability));
            report
                .probabilities
                .insert("norm_deviation".into(), json!((state.norm_sqr() - 1.0).abs()));
            report.files.push(("state.csv".into(), state.to_csv()));
        }
        Conditioned::Mixed(mixed) => {
            insert_mixture_summary(&mut report, &mixed);
            let mut weights = String::from("count,weight\n");
            for (c, w) in mixed.counts.iter().zip(&mixed.weights) {
                writeln!(weights, "{c},{w:.16e}").unwrap();
            }
            report.files.push(("weights.csv".into(), weights));
            for (c, state) in mixed.counts.iter().zip(&mixed.components) {
                report.files.push((format!("component_{c}.csv"), state.to_csv()));
            }
        }
    }
    Ok(report)
}

fn insert_mixture_summary(report: &mut Report, mixed: &MixedConditional) {
    report
        .probabilities
        .insert("detect_probability".into(), json!(mixed.detect_probability));
    report
        .probabilities
        .insert("trivial_weight".into(), json!(mixed.trivial_weight));
    report
        .probabilities
        .insert("discarded_weight".into(), json!(mixed.discarded_weight));
}

/// `P(n₀ reference photons, m₂ counts)` by the full pure-state pipeline,
/// without the improbable-outcome cut.
fn pipeline_probability(phi: &FockVector, n0: usize, m2: usize, bs: &BeamSplitterParams) -> Result<f64, CliError> {
    let reference = fock::make_fock(n0, n0)?;
    let out = apply_beam_splitter_pure(&TwoModeState::product(phi, &reference), bs);
    Ok(out.project_mode2(m2).norm_sqr())
}

fn probability(s: &Scenario) -> Result<Report, CliError> {
    let bs = s.beam_splitter()?;
    let phi = s.input_state()?;
    let rho = DensityMatrix::from_pure(&phi);
    let kappa = s.kappa().transpose()?;
    let mut report = Report::default();
    let mut csv = String::from("count,closed_form,general,pipeline\n");
    let (mut closed_col, mut general_col, mut pipeline_col) = (Vec::new(), Vec::new(), Vec::new());
    // subtraction shares one beam-splitter output across all counts
    let sub_out = match s.cat_kind() {
        CatKind::Subtracted => Some(apply_beam_splitter_pure(
            &TwoModeState::product(&phi, &fock::make_fock(0, 0)?),
            &bs,
        )),
        CatKind::Added => None,
    };
    for c in 0..=s.numerics.max_count {
        let (n0, m2) = match s.cat_kind() {
            CatKind::Added => (c, 0),
            CatKind::Subtracted => (0, c),
        };
        let closed = match kappa {
            Some(k) => Some(match s.cat_kind() {
                CatKind::Added => prob_added(c, k, &bs)?,
                CatKind::Subtracted => prob_subtracted(c, k, &bs)?,
            }),
            None => None,
        };
        // the closed triple sum is undefined at |T| = 0
        let general = event_probability(&rho, n0, m2, &bs).ok();
        let pipeline = match &sub_out {
            Some(out) => out.project_mode2(m2).norm_sqr(),
            None => pipeline_probability(&phi, n0, m2, &bs)?,
        };
        writeln!(csv, "{c},{},{},{pipeline:.16e}", fmt_opt(closed), fmt_opt(general)).unwrap();
        closed_col.push(closed);
        general_col.push(general);
        pipeline_col.push(pipeline);
    }
    report.probabilities.insert("closed_form".into(), json!(closed_col));
    report.probabilities.insert("general".into(), json!(general_col));
    report.probabilities.insert("pipeline".into(), json!(pipeline_col));
    if s.is_mixed() {
        if let Conditioned::Mixed(mixed) = conditioned(s, Mode::Analytic)? {
            insert_mixture_summary(&mut report, &mixed);
        }
    }
    report.files.push(("probability.csv".into(), csv));
    Ok(report)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

struct Surfaces {
    wigner: Grid2D,
    husimi: Grid2D,
    quadrature: Grid2D,
}

fn surfaces(s: &Scenario, c: &Conditioned, mode: Mode) -> Result<Surfaces, CliError> {
    let ps = s.grid.phase_space()?;
    let qa = s.grid.quadrature()?;
    let out = match (c, mode) {
        (Conditioned::Pure { params: Some(p), .. }, Mode::Analytic) => Surfaces {
            wigner: try_eval_grid(&ps, |x, q| analytic::wigner(p, x, q))?,
            husimi: try_eval_grid(&ps, |x, q| analytic::husimi(p, x, q))?,
            quadrature: try_eval_grid(&qa, |x, phi| analytic::quad_dist(p, x, phi))?,
        },
        (Conditioned::Pure { state, .. }, _) => numeric_surfaces(s, &[1.0], std::slice::from_ref(state))?,
        (Conditioned::Mixed(m), Mode::Analytic) => Surfaces {
            wigner: try_eval_grid(&ps, |x, q| m.wigner(x, q))?,
            husimi: try_eval_grid(&ps, |x, q| m.husimi(x, q))?,
            quadrature: try_eval_grid(&qa, |x, phi| m.quad_dist(x, phi))?,
        },
        (Conditioned::Mixed(m), Mode::Numeric) => numeric_surfaces(s, &m.weights, &m.components)?,
    };
    Ok(out)
}

fn numeric_surfaces(s: &Scenario, weights: &[f64], states: &[FockVector]) -> Result<Surfaces, CliError> {
    let ps = s.grid.phase_space()?;
    let qa = s.grid.quadrature()?;
    // transform cost grows as n_max², so drop levels that carry nothing
    let trimmed: Vec<FockVector> = states.iter().map(trim_tail).collect();
    if let [state] = trimmed.as_slice() {
        return Ok(Surfaces {
            wigner: eval_grid(&ps, |x, q| phasespace::wigner_pure(state, x, q)),
            husimi: eval_grid(&ps, |x, q| phasespace::husimi_pure(state, x, q)),
            quadrature: eval_grid(&qa, |x, phi| phasespace::quad_dist_pure(state, x, phi)),
        });
    }
    let rho = DensityMatrix::mixture(weights, &trimmed)?;
    Ok(Surfaces {
        wigner: eval_grid(&ps, |x, q| phasespace::wigner_numeric(&rho, x, q)),
        husimi: eval_grid(&ps, |x, q| phasespace::husimi_numeric(&rho, x, q)),
        quadrature: eval_grid(&qa, |x, phi| phasespace::quad_dist_numeric(&rho, x, phi)),
    })
}

/// Shortest prefix leaving at most `1e-30` of the norm behind.
fn trim_tail(psi: &FockVector) -> FockVector {
    let mut tail = 0.0;
    let mut cut = psi.n_max();
    for (n, c) in psi.amplitudes().iter().enumerate().rev() {
        tail += c.norm_sqr();
        if tail > 1e-30 {
            cut = n;
            break;
        }
    }
    psi.resized(cut)
}

fn grid(s: &Scenario, mode: Mode) -> Result<Report, CliError> {
    let c = conditioned(s, mode)?;
    let surf = surfaces(s, &c, mode)?;
    let mut report = Report::default();
    match &c {
        Conditioned::Pure { probability, .. } => {
            report
                .probabilities
                .insert("conditioning_event".into(), json!(probability));
        }
        Conditioned::Mixed(m) => insert_mixture_summary(&mut report, m),
    }
    let d = &mut report.deviations;
    d.insert("wigner_riemann_sum".into(), json!(surf.wigner.riemann_sum()));
    d.insert("husimi_riemann_sum".into(), json!(surf.husimi.riemann_sum()));
    d.insert("wigner_min".into(), json!(surf.wigner.min()));
    report.files.push(("wigner.csv".into(), surf.wigner.to_csv()));
    report.files.push(("husimi.csv".into(), surf.husimi.to_csv()));
    report.files.push(("quadrature.csv".into(), surf.quadrature.to_csv()));
    Ok(report)
}

fn detector(s: &Scenario) -> Result<Report, CliError> {
    let det = s
        .chopping()
        .ok_or_else(|| CliError::Config("the detector command needs detector.kind = \"chopping\"".into()))??;
    let bs = s.beam_splitter()?;
    let kappa = s.kappa().expect("checked on load")?;
    let prior = subtraction_prior(kappa, &bs)?;
    let k = s.operation.count;
    let post = posterior(&det, k, &prior)?;
    let resp = ResponseMatrix::new(&det, prior.len() - 1);
    let mut csv = String::from("m,prior,response,posterior\n");
    for (m, (p, w)) in prior.iter().zip(&post.weights).enumerate() {
        writeln!(csv, "{m},{p:.16e},{:.16e},{w:.16e}", resp.get(k, m)).unwrap();
    }
    let mut report = Report::default();
    report.probabilities.insert("evidence".into(), json!(post.evidence));
    report
        .probabilities
        .insert("prior_mass".into(), json!(prior.iter().sum::<f64>()));
    report.files.push(("response.csv".into(), resp.to_csv()));
    report.files.push(("posterior.csv".into(), csv));
    Ok(report)
}

fn compare(s: &Scenario, tolerance: f64) -> Result<Report, CliError> {
    if !s.is_squeezed_vacuum() {
        return Err(CliError::Config("compare needs squeezed-vacuum input".into()));
    }
    let bs = s.beam_splitter()?;
    let analytic = conditioned(s, Mode::Analytic)?;
    let mut deviations: Vec<(&str, f64)> = Vec::new();
    let a = surfaces(s, &analytic, Mode::Analytic)?;
    let n = match &analytic {
        Conditioned::Pure { state, probability, .. } => {
            let Conditioned::Pure {
                state: num_state,
                probability: num_prob,
                ..
            } = conditioned(s, Mode::Numeric)?
            else {
                unreachable!("pure scenario")
            };
            deviations.push(("state_infidelity", 1.0 - fock::fidelity(state, &num_state)));
            deviations.push(("probability_rel", (probability - num_prob).abs() / num_prob));
            numeric_surfaces(s, &[1.0], &[num_state])?
        }
        Conditioned::Mixed(mixed) => {
            // components and probabilities rebuilt from the input state
            let phi = s.input_state()?;
            let diag = fock::photon_number_distribution(&phi);
            let mut components = Vec::with_capacity(mixed.counts.len());
            for &c in &mixed.counts {
                let res = match mixed.kind {
                    CatKind::Added => photon_added_state(&phi, c, &bs)?,
                    CatKind::Subtracted => photon_subtracted_state(&phi, c, &bs)?,
                };
                components.push(res.state);
            }
            let numeric_detect = if let Some(det) = s.chopping() {
                let det = det?;
                let prior: Vec<f64> = (0..subtraction_prior(s.kappa().expect("sv")?, &bs)?.len())
                    .map(|m| prob_subtracted_from_diagonal(&diag, m, &bs))
                    .collect();
                posterior(&det, s.operation.count, &prior)?.evidence
            } else {
                let src = s.binomial().expect("mixed scenario")?;
                (0..=src.n_trials)
                    .map(|n0| binomial_pmf(&src, n0) * prob_added_from_diagonal(&diag, n0, &bs))
                    .sum()
            };
            deviations.push((
                "probability_rel",
                (mixed.detect_probability - numeric_detect).abs() / numeric_detect,
            ));
            numeric_surfaces(s, &mixed.weights, &components)?
        }
    };
    deviations.push(("wigner_sup", a.wigner.max_abs_diff(&n.wigner)));
    deviations.push(("husimi_sup", a.husimi.max_abs_diff(&n.husimi)));
    deviations.push(("quadrature_sup", a.quadrature.max_abs_diff(&n.quadrature)));

    let mut report = Report::default();
    let mut csv = String::from("quantity,deviation\n");
    for (name, dev) in &deviations {
        writeln!(csv, "{name},{dev:.16e}").unwrap();
        report.deviations.insert((*name).into(), json!(dev));
    }
    report.deviations.insert("tolerance".into(), json!(tolerance));
    report.files.push(("compare.csv".into(), csv));
    let worst = deviations.iter().copied().fold(
        ("none", 0.0f64),
        |acc, d| if d.1 > acc.1 || d.1.is_nan() { d } else { acc },
    );
    if worst.1 > tolerance || worst.1.is_nan() {
        let e = CliError::Tolerance {
            quantity: worst.0.into(),
            deviation: worst.1,
            tolerance,
        };
        report.failure = Some((e.exit_code(), e.to_string()));
    }
    Ok(report)
}
