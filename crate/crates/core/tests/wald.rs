use adjwald_core::datasets::{clotting_design, synthetic};
use adjwald_core::glm::*;
use adjwald_core::numkit::linalg::inverse_spd;
use adjwald_core::numkit::{solve_spd, RngStream};
use adjwald_core::wald::*;
use adjwald_core::*;
use proptest::prelude::*;

fn logistic_fixture(n: usize, seed: u64) -> GlmSpec {
    let mut rng = RngStream::new(seed, 0);
    let x = synthetic::design(n, 3, false, &mut rng);
    let y = synthetic::response(Family::BinomialLogit, &x, &[0.4, -0.9, 0.6], 1.0, &mut rng).unwrap();
    GlmSpec::new(Family::BinomialLogit, x, y).unwrap()
}

fn clotting() -> GlmAdapter {
    let (x, y) = clotting_design();
    GlmAdapter::new(GlmSpec::new(Family::GammaLog, x, y).unwrap(), GlmOptions::default()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

#[test]
fn kappa_is_root_of_inverse_diagonal() {
    let adapter = GlmAdapter::new(logistic_fixture(20, 5), GlmOptions::default()).unwrap();
    let theta = adapter.estimate().to_vec();
    let info = adapter.info(&theta).unwrap();
    let inv = solve_spd(&info, &Matrix::identity(3, 3)).unwrap();
    for j in 0..3 {
        assert!(rel(kappa(&adapter, &theta, j).unwrap(), inv[(j, j)].sqrt()) < 1e-12);
    }
    assert!(kappa(&adapter, &theta, 3).is_err());
}

#[test]
fn numeric_kappa_gradient_matches_analytic() {
    let adapter = GlmAdapter::new(logistic_fixture(20, 5), GlmOptions::default()).unwrap();
    let theta = adapter.estimate().to_vec();
    let inv = inverse_spd(&adapter.info(&theta).unwrap()).unwrap();
    let derivs = adapter.info_derivatives(&theta).unwrap().unwrap();
    let numeric = kappa_derivatives_numeric(&adapter, &theta, &[0, 1, 2]).unwrap();
    for k in numeric {
        let analytic = kappa_derivatives_analytic(&inv, &derivs, k.index).unwrap();
        assert!(k.numeric && !analytic.numeric);
        for u in 0..3 {
            let scale = analytic.gradient.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            assert!(
                (k.gradient[u] - analytic.gradient[u]).abs() <= 1e-6 * scale,
                "j={} u={u}",
                k.index
            );
        }
    }
}

#[test]
fn numeric_kappa_hessian_matches_analytic_on_clotting() {
    let adapter = clotting();
    let theta = adapter.estimate().to_vec();
    let inv = inverse_spd(&adapter.info(&theta).unwrap()).unwrap();
    let derivs = adapter.info_derivatives(&theta).unwrap().unwrap();
    let all: Vec<usize> = (0..5).collect();
    for k in kappa_derivatives_numeric(&adapter, &theta, &all).unwrap() {
        let analytic = kappa_derivatives_analytic(&inv, &derivs, k.index).unwrap();
        let scale = analytic.hessian.iter().fold(0.0f64, |m, h| m.max(h.abs()));
        for (a, n) in analytic.hessian.iter().zip(k.hessian.iter()) {
            assert!((a - n).abs() <= 1e-5 * scale, "j={}: {a} vs {n}", k.index);
        }
    }
}

#[test]
fn transform_gradient_at_the_null() {
    let adapter = clotting();
    let theta = adapter.estimate().to_vec();
    for j in 0..5 {
        let k = kappa(&adapter, &theta, j).unwrap();
        let (g, _) = wald_transform_derivatives(&adapter, &theta, j, theta[j]).unwrap();
        for (u, gu) in g.iter().enumerate() {
            let expect = if u == j { 1.0 / k } else { 0.0 };
            assert!((gu - expect).abs() < 1e-12 * (1.0 + expect.abs()), "j={j} u={u}");
        }
    }
}

#[test]
fn transform_derivatives_match_differences_of_transform() {
    let adapter = GlmAdapter::new(logistic_fixture(60, 8), GlmOptions::default()).unwrap();
    let theta = adapter.estimate().to_vec();
    let (j, psi0) = (1, -0.5);
    let transform = |t: &[f64]| (t[j] - psi0) / kappa(&adapter, t, j).unwrap();
    let (g, h) = wald_transform_derivatives(&adapter, &theta, j, psi0).unwrap();
    let ng = adjwald_core::numkit::num_gradient(transform, &theta, &Default::default()).unwrap();
    let nh = adjwald_core::numkit::num_hessian(transform, &theta, &adjwald_core::numkit::DiffSpec::HESSIAN).unwrap();
    for u in 0..3 {
        assert!(rel(ng[u], g[u]) < 1e-6);
        for v in 0..3 {
            assert!(
                rel(nh[(u, v)], h[(u, v)]) < 1e-5,
                "({u},{v}) {} vs {}",
                nh[(u, v)],
                h[(u, v)]
            );
        }
    }
}

#[test]
fn analytic_and_numeric_paths_agree_on_logistic() {
    for kind in [EstimatorKind::Ml, EstimatorKind::Rb] {
        let opts = GlmOptions::default().with_kind(kind);
        let analytic = GlmAdapter::new(logistic_fixture(50, 21), opts).unwrap();
        let numeric = analytic
            .with_options(opts.with_derivatives(DerivativePath::Numeric))
            .unwrap();
        let psi0 = [0.1, -0.2, 0.3];
        let a = location_adjusted_wald(&analytic, &psi0).unwrap();
        let n = location_adjusted_wald(&numeric, &psi0).unwrap();
        for (ra, rn) in a.rows.iter().zip(&n.rows) {
            let (ra, rn) = (ra.as_ref().unwrap(), rn.as_ref().unwrap());
            assert!(!ra.numeric_derivatives && rn.numeric_derivatives);
            assert_eq!(ra.t, rn.t);
            assert!((ra.bias_b - rn.bias_b).abs() <= 1e-5 * (1.0 + ra.bias_b.abs()));
        }
    }
}

#[test]
fn report_rows_satisfy_identity() {
    let adapter = clotting();
    let report = location_adjusted_wald(&adapter, &zero_nulls(&adapter)).unwrap();
    assert_eq!(report.kind, EstimatorKind::Ml);
    for row in report.rows {
        let row = row.unwrap();
        assert_eq!(row.t_star, row.t - row.bias_b);
        assert!(row.se > 0.0);
        assert_eq!(row.t, wald_statistic(&adapter, row.index, 0.0).unwrap());
    }
    let at_estimate = location_adjusted_wald(&adapter, adapter.estimate()).unwrap();
    assert!(at_estimate.rows.iter().all(|r| r.as_ref().unwrap().t == 0.0));
}

#[test]
fn wrong_null_length_is_rejected() {
    let adapter = clotting();
    assert!(matches!(
        location_adjusted_wald(&adapter, &[0.0; 4]),
        Err(Error::DimensionMismatch(_))
    ));
    assert!(location_adjusted_wald_for(&adapter, &[0.0; 5], &[7]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn subsets_match_full_run(mask in 1u8..32, numeric in any::<bool>()) {
        let mut adapter = clotting();
        if numeric {
            adapter = adapter.with_options(GlmOptions::default().with_derivatives(DerivativePath::Numeric)).unwrap();
        }
        let psi0 = [5.0, -0.5, -0.5, 0.0, 0.02];
        let full = location_adjusted_wald(&adapter, &psi0).unwrap();
        let subset: Vec<usize> = (0..5).filter(|j| mask & (1 << j) != 0).collect();
        let part = location_adjusted_wald_for(&adapter, &psi0, &subset).unwrap();
        for (row, &j) in part.rows.iter().zip(&subset) {
            let (a, b) = (row.as_ref().unwrap(), full.rows[j].as_ref().unwrap());
            prop_assert_eq!(a, b);
        }
    }
}
