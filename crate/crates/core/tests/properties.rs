use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spillover_core::estimator::{spillover_estimate, PairDataset, PairRow};
use spillover_core::graph::{d_separated, enumerate_paths};
use spillover_core::moments::{
    implied_covariance_matrix, implied_covariance_treks, population_partial_regression,
    random_draw, ImpliedMoments,
};
use spillover_core::stats::student_t_quantile;
use spillover_core::{build_model, ModelSpec, PathModel, Preset, StructuralParams, VariableKind};
use statrs::distribution::{Continuous, ContinuousCDF, StudentsT};

/// Forward-only DAG on `A..F`: `edges[k]` is `Some(c)` for the k-th pair (i < j).
fn dag(n: usize, edges: &[Option<f64>], noise: &[f64]) -> PathModel {
    let names = ["A", "B", "C", "D", "E", "F"];
    let mut spec = ModelSpec::new();
    for i in 0..n {
        spec = spec.variable(names[i], VariableKind::Outcome, noise[i]);
    }
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if let Some(c) = edges[k] {
                spec = spec.edge(names[i], names[j], c, None);
            }
            k += 1;
        }
    }
    build_model(spec).unwrap()
}

fn dag_strategy() -> impl Strategy<Value = PathModel> {
    (2usize..=6).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        (
            Just(n),
            prop::collection::vec(prop::option::of(-1.5f64..1.5), pairs),
            prop::collection::vec(0.2f64..2.0, n),
        )
            .prop_map(|(n, edges, noise)| dag(n, &edges, &noise))
    })
}

/// Σ_xy − Σ_xS Σ_SS⁻¹ Σ_Sy.
fn partial_covariance(m: &ImpliedMoments, x: &str, y: &str, given: &[&str]) -> f64 {
    let cov = |a: &str, b: &str| m.covariance(a, b).unwrap();
    if given.is_empty() {
        return cov(x, y);
    }
    let k = given.len();
    let s = DMatrix::from_fn(k, k, |i, j| cov(given[i], given[j]));
    let sx = DVector::from_fn(k, |i, _| cov(given[i], x));
    let sy = DVector::from_fn(k, |i, _| cov(given[i], y));
    cov(x, y) - (sx.transpose() * s.try_inverse().unwrap() * sy)[(0, 0)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn trek_and_matrix_routes_agree(model in dag_strategy()) {
        let a = implied_covariance_matrix(&model).unwrap();
        let b = implied_covariance_treks(&model).unwrap();
        prop_assert_eq!(a.variable_order(), b.variable_order());
        prop_assert!(a.max_abs_difference(&b) <= 1e-12, "diff {}", a.max_abs_difference(&b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn separation_implies_zero_partial_covariance(
        model in dag_strategy(),
        picks in prop::collection::vec(0usize..6, 4),
    ) {
        let names: Vec<String> = model.variables().iter().map(|v| v.name.clone()).collect();
        let n = names.len();
        let x = &names[picks[0] % n];
        let y = &names[picks[1] % n];
        prop_assume!(x != y);
        let mut given: Vec<&str> = Vec::new();
        for &p in &picks[2..] {
            let g = names[p % n].as_str();
            if g != x && g != y && !given.contains(&g) {
                given.push(g);
            }
        }
        let moments = implied_covariance_matrix(&model).unwrap();
        if d_separated(&model, x, y, &given).unwrap() {
            let pc = partial_covariance(&moments, x, y, &given);
            prop_assert!(pc.abs() < 1e-10, "{x} ⟂ {y} | {given:?} but partial covariance {pc}");
        }
    }

    #[test]
    fn sign_flips_never_change_path_status(
        model in dag_strategy(),
        flips in prop::collection::vec(any::<bool>(), 15),
    ) {
        let mut k = 0;
        let flipped = model.map_coefficients(|e| {
            k += 1;
            if flips[(k - 1) % flips.len()] { -e.coefficient } else { e.coefficient }
        });
        let names: Vec<&str> = model.variables().iter().map(|v| v.name.as_str()).collect();
        let (x, y) = (names[0], names[names.len() - 1]);
        let given: Vec<&str> = names[1..names.len() - 1].iter().step_by(2).copied().collect();
        let before = enumerate_paths(&model, x, y, &given).unwrap();
        let after = enumerate_paths(&flipped, x, y, &given).unwrap();
        prop_assert_eq!(before.len(), after.len());
        for (a, b) in before.iter().zip(&after) {
            prop_assert_eq!(&a.nodes, &b.nodes);
            prop_assert_eq!(a.status, b.status);
        }
    }
}

#[test]
fn presets_agree_across_moment_routes() {
    for preset in Preset::ALL {
        for i in 0..20 {
            let (_, model) = random_draw(preset, 5, i);
            let a = implied_covariance_matrix(&model).unwrap();
            let b = implied_covariance_treks(&model).unwrap();
            assert!(a.max_abs_difference(&b) <= 1e-12, "{preset} draw {i}");
        }
    }
}

#[test]
fn gain_score_cancels_the_family_confounder() {
    // In one-sided models D = (θ−δ)T1 + δT2 + e2 − e1 + (mediated terms), so the
    // population residual of D on (T1, T2) is uncorrelated with U.
    for preset in [Preset::Fig1A, Preset::Fig1B, Preset::Fig1C] {
        for i in 0..50 {
            let (_, model) = random_draw(preset, 8, i);
            let m = implied_covariance_matrix(&model).unwrap();
            let r = population_partial_regression(&model).unwrap();
            let cov = |a: &str, b: &str| m.covariance(a, b).unwrap();
            let resid_u = cov("D", "U") - r.b1 * cov("T1", "U") - r.b2 * cov("T2", "U");
            assert!(resid_u.abs() < 1e-10, "{preset} draw {i}: {resid_u}");
        }
    }
}

#[test]
fn coefficients_ignore_a_common_noise_scale() {
    for preset in Preset::ALL {
        let (_, model) = random_draw(preset, 12, 0);
        let scaled = model.map_noise_variances(|v| 3.7 * v.noise_variance);
        let a = population_partial_regression(&model).unwrap();
        let b = population_partial_regression(&scaled).unwrap();
        assert!((a.b1 - b.b1).abs() < 1e-10 && (a.b2 - b.b2).abs() < 1e-10, "{preset}");
    }
}

fn pairs(rows: &[(f64, f64, f64, f64)]) -> PairDataset {
    PairDataset::new(
        Vec::new(),
        rows.iter()
            .enumerate()
            .map(|(i, &(t1, t2, y1, y2))| PairRow::new(format!("f{i}"), t1, t2, y1, y2))
            .collect(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn common_outcome_shift_leaves_the_estimate_unchanged(
        rows in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -5.0f64..5.0, -5.0f64..5.0), 8..40),
        shift in -10.0f64..10.0,
    ) {
        let base = spillover_estimate(&pairs(&rows), false, 0.95).unwrap();
        let moved: Vec<_> = rows.iter().map(|&(a, b, y1, y2)| (a, b, y1 + shift, y2 + shift)).collect();
        let other = spillover_estimate(&pairs(&moved), false, 0.95).unwrap();
        prop_assert!((base.sc() - other.sc()).abs() < 1e-8);
        prop_assert!((base.se() - other.se()).abs() < 1e-8);
        prop_assert!((base.spillover.estimate - (base.b1.estimate + base.b2.estimate)).abs() < 1e-12);
        prop_assert!(base.spillover.ci_low <= base.sc() && base.sc() <= base.spillover.ci_high);
    }

    #[test]
    fn adding_a_multiple_of_an_exposure_to_d_moves_only_that_slope(
        rows in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0, -5.0f64..5.0, -5.0f64..5.0), 8..40),
        c in -3.0f64..3.0,
    ) {
        let base = spillover_estimate(&pairs(&rows), false, 0.95).unwrap();
        let moved: Vec<_> = rows.iter().map(|&(a, b, y1, y2)| (a, b, y1, y2 + c * a)).collect();
        let other = spillover_estimate(&pairs(&moved), false, 0.95).unwrap();
        prop_assert!((other.b1.estimate - base.b1.estimate - c).abs() < 1e-8);
        prop_assert!((other.b2.estimate - base.b2.estimate).abs() < 1e-8);
        prop_assert!((other.se() - base.se()).abs() < 1e-8);
    }
}

#[test]
fn t_quantiles_match_statrs() {
    // statrs' own inverse is only good to ~1e-8 at large df, so the check goes
    // through its CDF: the implied quantile error is |F(q) - p| / f(q).
    for df in [1.0, 2.0, 3.0, 7.5, 30.0, 120.0, 4997.0, 20_007.0] {
        let reference = StudentsT::new(0.0, 1.0, df).unwrap();
        for p in [0.005, 0.025, 0.05, 0.3, 0.5, 0.9, 0.975, 0.995] {
            let q = student_t_quantile(p, df).unwrap();
            let error = (reference.cdf(q) - p).abs() / reference.pdf(q);
            assert!(error < 1e-9, "df {df} p {p}: quantile {q} off by {error}");
        }
    }
}

#[test]
fn t_quantiles_match_reference_values() {
    // (p, df, quantile) solved to 40 digits with mpmath.
    let table = [
        (0.005, 1.0, -63.656741162871580995),
        (0.025, 1.0, -12.706204736174704646),
        (0.05, 1.0, -6.313751514675043099),
        (0.3, 1.0, -0.7265425280053608859),
        (0.5, 1.0, 0.0),
        (0.9, 1.0, 3.0776835371752534026),
        (0.975, 1.0, 12.706204736174704646),
        (0.995, 1.0, 63.656741162871580995),
        (0.005, 2.0, -9.9248432009182931147),
        (0.025, 2.0, -4.3026527297494638523),
        (0.05, 2.0, -2.919985580353725687),
        (0.3, 2.0, -0.61721339984836764104),
        (0.5, 2.0, 0.0),
        (0.9, 2.0, 1.8856180831641267317),
        (0.975, 2.0, 4.3026527297494638523),
        (0.995, 2.0, 9.9248432009182931147),
        (0.005, 3.0, -5.8409093097333572607),
        (0.025, 3.0, -3.1824463052837095927),
        (0.05, 3.0, -2.3533634348018238777),
        (0.3, 3.0, -0.58438972743981866911),
        (0.5, 3.0, 0.0),
        (0.9, 3.0, 1.6377443536962101055),
        (0.975, 3.0, 3.1824463052837095927),
        (0.995, 3.0, 5.8409093097333572607),
        (0.005, 7.5, -3.4214226881240443807),
        (0.025, 7.5, -2.3330396268649746116),
        (0.05, 7.5, -1.8757474792112885192),
        (0.3, 7.5, -0.54741287758126120174),
        (0.5, 7.5, 0.0),
        (0.9, 7.5, 1.4052118464159529237),
        (0.975, 7.5, 2.3330396268649746116),
        (0.995, 7.5, 3.4214226881240443807),
        (0.005, 30.0, -2.7499956535672253324),
        (0.025, 30.0, -2.04227245630123831),
        (0.05, 30.0, -1.6972608865939578486),
        (0.3, 30.0, -0.53001900390650447734),
        (0.5, 30.0, 0.0),
        (0.9, 30.0, 1.3104150253913955782),
        (0.975, 30.0, 2.04227245630123831),
        (0.995, 30.0, 2.7499956535672253324),
        (0.005, 120.0, -2.6174211451068660084),
        (0.025, 120.0, -1.9799304050824408467),
        (0.05, 120.0, -1.6576508993552356492),
        (0.3, 120.0, -0.52579639060710537133),
        (0.5, 120.0, 0.0),
        (0.9, 120.0, 1.2886462336563779069),
        (0.975, 120.0, 1.9799304050824408467),
        (0.995, 120.0, 2.6174211451068660084),
        (0.005, 4997.0, -2.5768135573208225863),
        (0.025, 4997.0, -1.9604388366856004443),
        (0.05, 4997.0, -1.645158620627291756),
        (0.3, 4997.0, -0.52443396490491131127),
        (0.5, 4997.0, 0.0),
        (0.9, 4997.0, 1.2817210070143123089),
        (0.975, 4997.0, 1.9604388366856004443),
        (0.995, 4997.0, 2.5768135573208225863),
        (0.005, 20007.0, -2.5760750669923210367),
        (0.025, 20007.0, -1.9600825636529766256),
        (0.05, 20007.0, -1.6449297923003672966),
        (0.3, 20007.0, -0.52440886749632615601),
        (0.5, 20007.0, 0.0),
        (0.9, 20007.0, 1.2815938813991670092),
        (0.975, 20007.0, 1.9600825636529766256),
        (0.995, 20007.0, 2.5760750669923210367),
    ];
    for (p, df, expected) in table {
        let q = student_t_quantile(p, df).unwrap();
        assert!(
            (q - expected).abs() < 1e-10 * expected.abs().max(1.0),
            "p {p} df {df}: {q} vs {expected}"
        );
    }
}

// Linear-exposure outcome-spillover models, checked against SC estimated on
// a single 10^7-pair sample drawn by an independent NumPy implementation.
#[test]
fn linear_outcome_spillover_matches_large_sample_values() {
    for (preset, sc, b1b2) in [
        (Preset::Fig3A, 0.55696, Some((-0.35092, 0.90788))),
        (Preset::Fig3B, 0.90705, None),
        (Preset::Fig3C, -0.05722, None),
    ] {
        let model = preset.model(&StructuralParams::figure4(preset));
        let r = population_partial_regression(&model).unwrap();
        assert!((r.sc - sc).abs() < 3e-3, "{preset}: {} vs {sc}", r.sc);
        if let Some((b1, b2)) = b1b2 {
            assert!((r.b1 - b1).abs() < 3e-3 && (r.b2 - b2).abs() < 3e-3);
        }
    }
}
