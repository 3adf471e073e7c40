use arhlab::reginv::{reg_inverse, RegScheme};
use arhlab::{eigendecompose, inner_product, tensor_product, Curve, Curve32, Grid, Grid32, GridRef, OperatorMatrix, SpaceKind};
use proptest::prelude::*;

fn grid() -> GridRef<f64> {
    Grid::uniform(33).unwrap()
}

fn curve() -> impl Strategy<Value = Curve<f64>> {
    prop::collection::vec(-10.0f64..10.0, 33).prop_map(|v| Curve::new(grid(), v).unwrap())
}

fn psd_operator() -> impl Strategy<Value = OperatorMatrix<f64>> {
    prop::collection::vec((0.0f64..3.0, prop::collection::vec(-1.0f64..1.0, 33)), 1..6).prop_map(|terms| {
        let g = grid();
        let mut op = OperatorMatrix::zeros(&g);
        for (c, v) in terms {
            let u = Curve::new(g.clone(), v).unwrap();
            op = &op + &tensor_product(&u, &u).unwrap().scale(c);
        }
        op
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn inner_product_symmetric_and_nonnegative(u in curve(), v in curve()) {
        for space in [SpaceKind::L2, SpaceKind::Sobolev21] {
            prop_assert_eq!(inner_product(&u, &v, space).unwrap(), inner_product(&v, &u, space).unwrap());
            prop_assert!(inner_product(&u, &u, space).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn tensor_hs_norm_is_product_of_norms(u in curve(), v in curve()) {
        let t = tensor_product(&u, &v).unwrap();
        let want = u.norm() * v.norm();
        prop_assert!((t.hs_norm() - want).abs() <= 1e-8 * want.max(1.0));
    }

    #[test]
    fn tensor_action(u in curve(), v in curve(), x in curve()) {
        let got = tensor_product(&u, &v).unwrap().apply(&x);
        let want = u.scale(inner_product(&v, &x, SpaceKind::L2).unwrap());
        let scale = want.norm().max(1.0);
        for (a, b) in got.values().iter().zip(want.values()) {
            prop_assert!((a - b).abs() <= 1e-10 * scale);
        }
    }

    #[test]
    fn truncated_reconstruction_bound(op in psd_operator(), k in 1usize..6) {
        let full = eigendecompose(&op, 33).unwrap();
        let part = full.truncated(k.min(full.len()));
        let resid = (&op - &part.reconstruct()).hs_norm();
        let dropped: f64 = full.eigenvalues()[part.len()..].iter().map(|l| l * l).sum::<f64>().sqrt();
        prop_assert!(resid <= dropped + 1e-8 * full.leading().max(1.0));
        let tr: f64 = full.eigenvalues().iter().sum();
        prop_assert!((op.trace() - tr).abs() <= 1e-8 * tr.max(1.0));
    }

    #[test]
    fn penalized_inverse_is_bounded_by_one_over_alpha(op in psd_operator(), alpha in 1e-3f64..1.0) {
        let eig = eigendecompose(&op, 33).unwrap();
        let inv = reg_inverse(&eig, RegScheme::Penalized { alpha }).unwrap();
        prop_assert!(inv.operator.operator_norm() <= (1.0 / alpha) * (1.0 + 1e-9));
        let t = reg_inverse(&eig, RegScheme::Tikhonov { alpha }).unwrap();
        prop_assert!(t.analytic_norm() <= 0.5 / alpha.sqrt() * (1.0 + 1e-12));
    }
}

#[test]
fn single_precision_pipeline() {
    let g = Grid32::uniform(21).unwrap();
    let u = Curve32::from_fn(&g, |t| (3.0 * t).sin());
    let v = Curve32::from_fn(&g, |t| 1.0 - t);
    let t = tensor_product(&u, &v).unwrap();
    assert!((t.hs_norm() - u.norm() * v.norm()).abs() < 1e-5);
    let cov = &tensor_product(&u, &u).unwrap() + &tensor_product(&v, &v).unwrap().scale(0.5);
    let eig = eigendecompose(&cov, 21).unwrap();
    assert!((eig.eigenvalues().iter().sum::<f32>() - cov.trace()).abs() < 1e-4 * cov.trace());
    let inv = reg_inverse(&eig, RegScheme::SpectralCutoff { k: 2 }).unwrap();
    let back = inv.operator.compose(&cov).unwrap().apply(&u);
    assert!((&back - &u).norm() < 1e-3 * u.norm());
}
