use gammaodds::comparison::{compare, parse_models, ModelId};
use gammaodds::data::{load_csv, parse_csv, write_csv};
use gammaodds::fit::{mle_fit, FitOptions};
use gammaodds::gof::{gof_report, EdfVariant};
use gammaodds::{wheaton, Dataset, Error, OEGammaDist, OeGammaModel};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn fits_are_deterministic() {
    let data = wheaton().values;
    let a = mle_fit(&OeGammaModel, &data, &FitOptions::default()).unwrap();
    let b = mle_fit(&OeGammaModel, &data, &FitOptions::default()).unwrap();
    assert_eq!(a.theta_hat, b.theta_hat);
    assert_eq!(a.std_errors, b.std_errors);
    assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());
}

#[test]
fn fit_recovers_simulated_parameters() {
    let truth = OEGammaDist::new(1.5, 0.8, 0.4).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let data = truth.sample(4000, &mut rng);
    let fit = mle_fit(&OeGammaModel, &data, &FitOptions::default()).unwrap();
    assert!(fit.converged);
    for (i, t) in [1.5, 0.8, 0.4].iter().enumerate() {
        let z = (fit.theta_hat[i] - t) / fit.std_errors[i];
        assert!(z.abs() < 4.0, "param {i}: {} (se {})", fit.theta_hat[i], fit.std_errors[i]);
    }
}

#[test]
fn gof_is_invariant_under_permutation() {
    let data = wheaton().values;
    let fit = mle_fit(&OeGammaModel, &data, &FitOptions::default()).unwrap();
    let base = gof_report(&OeGammaModel, &data, &fit.theta_hat, fit.loglik, EdfVariant::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let mut shuffled = data.clone();
        shuffled.shuffle(&mut rng);
        let g = gof_report(&OeGammaModel, &shuffled, &fit.theta_hat, fit.loglik, EdfVariant::default()).unwrap();
        assert_eq!(g, base);
    }
}

#[test]
fn unmodified_statistics_differ_from_normalized() {
    let data = wheaton().values;
    let fit = mle_fit(&OeGammaModel, &data, &FitOptions::default()).unwrap();
    let cb = gof_report(&OeGammaModel, &data, &fit.theta_hat, fit.loglik, EdfVariant::ChenBalakrishnan).unwrap();
    let raw = gof_report(&OeGammaModel, &data, &fit.theta_hat, fit.loglik, EdfVariant::Unmodified).unwrap();
    assert_eq!(cb.aic, raw.aic);
    assert_ne!(cb.a_squared, raw.a_squared);
}

#[test]
fn comparison_sorts_by_aic() {
    let ids = parse_models("m6,M1,oe-gamma").unwrap();
    assert_eq!(ids, vec![ModelId::M6, ModelId::M1, ModelId::M2]);
    let rows = compare(&ids, &wheaton().values, &FitOptions::default(), EdfVariant::default());
    let order: Vec<ModelId> = rows.iter().map(|r| r.model).collect();
    assert_eq!(order, vec![ModelId::M2, ModelId::M6, ModelId::M1]);
}

#[test]
fn comparison_reports_tiny_samples_as_failures() {
    let rows = compare(&[ModelId::M2], &[3.0], &FitOptions::default(), EdfVariant::default());
    assert!(rows[0].failed());
}

#[test]
fn invalid_data_is_rejected() {
    let err = mle_fit(&OeGammaModel, &[1.0, -2.0, 3.0], &FitOptions::default()).unwrap_err();
    assert!(matches!(err, Error::DataDomain { index: 1, .. }), "{err:?}");
    assert!(mle_fit(&OeGammaModel, &[], &FitOptions::default()).is_err());
}

#[test]
fn csv_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wheaton.csv");
    write_csv(&wheaton(), std::fs::File::create(&path).unwrap()).unwrap();
    let back = load_csv(&path, None).unwrap();
    assert_eq!(back, wheaton());
}

proptest! {
    #[test]
    fn csv_round_trip_is_exact(values in prop::collection::vec(prop::num::f64::POSITIVE | prop::num::f64::NEGATIVE, 1..40)) {
        let d = Dataset::new("v", values).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice(), "v", Some("v")).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn csv_parser_never_panics(text in ".{0,200}") {
        let _ = parse_csv(text.as_bytes(), "x", None);
        let _ = parse_csv(text.as_bytes(), "x", Some("1"));
    }
}
