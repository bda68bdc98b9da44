use extremal_core::cmev::{classify_dependence, fit_ht, DependenceLabel};
use extremal_core::gpd::GpdOptions;
use extremal_core::margins::{fit_panel_margins, transform_panel, Scale};
use extremal_core::simulate::{sim_gauss_copula_panel, CopulaMargin};
use extremal_core::ReturnPanel;
use proptest::prelude::*;

fn returns() -> ReturnPanel {
    let corr = vec![vec![1.0, 0.6, 0.3], vec![0.6, 1.0, 0.2], vec![0.3, 0.2, 1.0]];
    sim_gauss_copula_panel(&["A", "B", "C"], &corr, 4_000, 11, CopulaMargin::StudentT4).unwrap()
}

fn laplace(panel: &ReturnPanel) -> ReturnPanel {
    let margins = fit_panel_margins(panel, &[0.9; 3], Scale::Laplace, &GpdOptions::default()).unwrap();
    transform_panel(panel, &margins, Scale::Laplace).unwrap()
}

#[test]
fn affine_maps_leave_the_fit_unchanged() {
    let raw = returns();
    let mut shifted = raw.clone();
    for c in shifted.columns.iter_mut() {
        for v in c.iter_mut() {
            *v = 3.5 * *v + 0.02;
        }
    }
    let a = fit_ht(&laplace(&raw), "A", 0.7).unwrap();
    let b = fit_ht(&laplace(&shifted), "A", 0.7).unwrap();
    for (s, t) in a.targets.iter().zip(&b.targets) {
        assert!((s.a - t.a).abs() < 1e-6, "{} vs {}", s.a, t.a);
        assert!((s.b - t.b).abs() < 1e-6, "{} vs {}", s.b, t.b);
    }
}

#[test]
fn every_fit_respects_the_parameter_box() {
    let lap = laplace(&returns());
    for q in [0.7, 0.8, 0.9] {
        for m in ["A", "B", "C"] {
            let fit = fit_ht(&lap, m, q).unwrap();
            assert_eq!(fit.targets.len(), 2);
            for t in &fit.targets {
                assert!(t.a.abs() <= 1.0 && t.b < 1.0 && t.sigma > 0.0);
                assert_eq!(t.residuals.len(), fit.n_cond_exceed());
            }
        }
    }
}

proptest! {
    #[test]
    fn label_sign_follows_a(a in -1.0f64..=1.0) {
        match classify_dependence(a).unwrap() {
            DependenceLabel::Independence => prop_assert_eq!(a, 0.0),
            DependenceLabel::Directed { positive, .. } => prop_assert_eq!(positive, a > 0.0),
        }
    }

    #[test]
    fn labels_reject_outside_box(a in 1.0f64..10.0) {
        prop_assume!(a > 1.0);
        prop_assert!(classify_dependence(a).is_err());
        prop_assert!(classify_dependence(-a).is_err());
    }
}
