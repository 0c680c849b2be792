use catgen::analytic::{self, cat_state, CatKind, CatParams};
use catgen::beamsplitter::{
    apply_beam_splitter_pure, bs_unitary_block, event_probability, prob_subtracted_from_diagonal, BeamSplitterParams,
};
use catgen::cli::scenario::{BeamSplitterSpec, Detector, Input, Operation, OperationKind, Source};
use catgen::cli::Scenario;
use catgen::detection::{posterior, ChoppingDetector, ResponseMatrix};
use catgen::fock::{
    apply_attenuation, fidelity, make_squeezed_vacuum, DensityMatrix, FockVector, SqueezeParam, TwoModeState,
};
use catgen::phasespace::{husimi_pure, wigner_pure};
use catgen::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn state(max_level: usize) -> impl Strategy<Value = FockVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..=max_level + 1).prop_filter_map("zero vector", |raw| {
        let v = FockVector::new(raw.into_iter().map(|(r, i)| Complex64::new(r, i)).collect());
        let n = v.norm();
        (n > 1e-3).then(|| v.scaled(Complex64::new(1.0 / n, 0.0)))
    })
}

fn splitter() -> impl Strategy<Value = BeamSplitterParams> {
    (0.05f64..0.95, -PI..PI, -PI..PI).prop_map(|(t, a, b)| BeamSplitterParams::from_transmittance(t, a, b).unwrap())
}

fn squeeze(max: f64) -> impl Strategy<Value = SqueezeParam> {
    (0.0..max, -PI..PI).prop_map(|(r, phi)| SqueezeParam::from_polar(r, phi).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocks_are_unitary(bs in splitter(), n in 0usize..25) {
        let u = bs_unitary_block(n, &bs);
        let err = (&u * u.adjoint() - nalgebra::DMatrix::identity(n + 1, n + 1)).norm();
        prop_assert!(err < 1e-11, "{err:e}");
    }

    #[test]
    fn beam_splitter_preserves_norm(a in state(8), b in state(4), bs in splitter()) {
        let out = apply_beam_splitter_pure(&TwoModeState::product(&a, &b), &bs);
        prop_assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn outcomes_are_complete(psi in state(5), n0 in 0usize..4, t in 0.3f64..0.95, phases in (-PI..PI, -PI..PI)) {
        let bs = BeamSplitterParams::from_transmittance(t, phases.0, phases.1).unwrap();
        let rho = DensityMatrix::from_pure(&psi);
        let top = psi.n_max() + n0;
        let total: f64 = (0..=top).map(|m| event_probability(&rho, n0, m, &bs).unwrap()).sum();
        // the alternating sum for count m₂ cancels terms of size |T|^(-2m₂)
        let scale = t.powi(-(top as i32));
        prop_assert!((total - 1.0).abs() < 1e-13 * scale.max(10.0), "{total}");
    }

    #[test]
    fn subtraction_probability_ignores_phases(
        diag in prop::collection::vec(0.0f64..1.0, 1..10),
        t in 0.05f64..0.95, phases in (-PI..PI, -PI..PI), m in 0usize..6,
    ) {
        let plain = BeamSplitterParams::from_transmittance(t, 0.0, 0.0).unwrap();
        let rotated = BeamSplitterParams::from_transmittance(t, phases.0, phases.1).unwrap();
        let a = prob_subtracted_from_diagonal(&diag, m, &plain);
        let b = prob_subtracted_from_diagonal(&diag, m, &rotated);
        prop_assert!((a - b).abs() <= 1e-14 * a.max(1e-300));
    }

    #[test]
    fn attenuation_maps_squeezed_vacuum(kappa in squeeze(0.8), t in 0.05f64..1.0, phi in -PI..PI) {
        let n_max = 160;
        let tt = Complex64::from_polar(t.sqrt(), phi);
        let attenuated = apply_attenuation(&make_squeezed_vacuum(kappa, n_max).state, tt);
        let direct = make_squeezed_vacuum(kappa.attenuated(tt), n_max).state;
        prop_assert!((fidelity(&attenuated, &direct) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chopping_response_is_stochastic(n in 1usize..=32, m_max in 0usize..=40, eta in 0.0f64..=1.0) {
        let r = ResponseMatrix::new(&ChoppingDetector::new(n, eta).unwrap(), m_max);
        for m in 0..=m_max {
            let col: f64 = (0..=n).map(|k| r.get(k, m)).sum();
            prop_assert!((col - 1.0).abs() < 1e-12);
            prop_assert!((0..=n).all(|k| r.get(k, m) >= -1e-15));
        }
    }

    #[test]
    fn posterior_is_bayes(
        prior in prop::collection::vec(0.001f64..1.0, 1..25), n in 2usize..20, eta in 0.3f64..=1.0, k in 0usize..4,
    ) {
        let total: f64 = prior.iter().sum();
        let prior: Vec<f64> = prior.iter().map(|p| p / total).collect();
        let det = ChoppingDetector::new(n, eta).unwrap();
        let r = ResponseMatrix::new(&det, prior.len() - 1);
        let evidence: f64 = prior.iter().enumerate().map(|(m, p)| p * r.get(k.min(n), m)).sum();
        match posterior(&det, k.min(n), &prior) {
            Ok(post) => {
                prop_assert!((post.evidence - evidence).abs() <= 1e-13);
                prop_assert!((post.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                for (m, w) in post.weights.iter().enumerate() {
                    prop_assert!((w * evidence - prior[m] * r.get(k.min(n), m)).abs() < 1e-13);
                }
            }
            Err(_) => prop_assert!(evidence < 1e-300),
        }
    }

    #[test]
    fn phase_space_bounds(psi in state(10), x in -5.0f64..5.0, p in -5.0f64..5.0) {
        prop_assert!(husimi_pure(&psi, x, p) >= 0.0);
        prop_assert!(husimi_pure(&psi, x, p) <= 1.0 / (2.0 * PI) + 1e-12);
        prop_assert!(wigner_pure(&psi, x, p).abs() <= 1.0 / PI + 1e-12);
    }

    #[test]
    fn closed_forms_match_fock_expansion(
        r in 0.05f64..0.8, phase in -PI..PI, count in 0usize..5, added in any::<bool>(),
        x in -4.0f64..4.0, p in -4.0f64..4.0, phi in 0.0..PI,
    ) {
        let kind = if added { CatKind::Added } else { CatKind::Subtracted };
        let params = CatParams::new(Complex64::from_polar(r, phase), count, kind).unwrap();
        let psi = cat_state(&params, 1e-24).unwrap().state;
        let w = analytic::wigner(&params, x, p).unwrap();
        prop_assert!((w - wigner_pure(&psi, x, p)).abs() < 1e-10);
        let q = analytic::husimi(&params, x, p).unwrap();
        prop_assert!((q - husimi_pure(&psi, x, p)).abs() < 1e-10);
        let d = analytic::quad_dist(&params, x, phi).unwrap();
        prop_assert!((d - catgen::phasespace::quad_dist_pure(&psi, x, phi)).abs() < 1e-10);
    }

    #[test]
    fn scenario_round_trips(
        kappa_abs in 0.0f64..0.95, kappa_phase in -PI..PI, bs in (0.01f64..0.99, -PI..PI, -PI..PI),
        count in 0usize..8, add in any::<bool>(), mixed in any::<bool>(), n in 1usize..40, eta in 0.0f64..=1.0,
        p in 0.01f64..0.99,
    ) {
        let mut s = Scenario::parse(&std::fs::read_to_string(
            concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/fig1.cfg"),
        ).unwrap()).unwrap();
        s.input = Input::SqueezedVacuum { kappa_abs, kappa_phase, n_max: None };
        s.beam_splitter = BeamSplitterSpec { t_sq: bs.0, phi_t: bs.1, phi_r: bs.2 };
        let kind = if add { OperationKind::Add } else { OperationKind::Subtract };
        s.operation = Operation { kind, count };
        s.detector = if mixed && !add { Detector::Chopping { n_channels: n, efficiency: eta } } else { Detector::Ideal };
        s.source = if mixed && add { Source::Binomial { n_trials: count, p } } else { Source::Pure };
        let back = Scenario::parse(&s.to_toml()).unwrap();
        prop_assert_eq!(back, s);
    }
}
