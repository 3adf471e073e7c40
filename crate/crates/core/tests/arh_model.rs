//! Estimator, predictor, CV and companion checks on simulated processes with known operators.

use arhlab::arh::{
    companion_embed, companion_extract, cross_validate, estimate_rho, estimate_rho_with, operator_block, predict,
    predictor_clt_experiment, residuals, CltOptions, EstimateOptions,
};
use arhlab::moments::empirical_cov;
use arhlab::reginv::RegScheme;
use arhlab::sim::{simulate_arh1, simulate_arh_p, simulate_ou_segments, ArhSpec, NoiseSpec};
use arhlab::{tensor_product, Curve, Grid, GridRef, OperatorMatrix};

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn diag_spec(g: &GridRef<f64>, coefs: &[f64], seed: u64) -> ArhSpec<f64> {
    let noise = NoiseSpec::default_on(g, seed).unwrap();
    let terms: Vec<_> = coefs.iter().zip(&noise.eigenfunctions).map(|(&c, e)| (c, e, e)).collect();
    let rho = OperatorMatrix::from_rank_one_sum(g, &terms).unwrap();
    ArhSpec::new(rho, noise)
}

#[test]
fn diagonal_coefficients_recovered() {
    let g = Grid::uniform(31).unwrap();
    let (mut d1, mut d2) = (Vec::new(), Vec::new());
    for seed in 0..20 {
        let spec = diag_spec(&g, &[0.5, 0.3], seed);
        let xs = simulate_arh1(&spec, 4000).unwrap().sample;
        let est = estimate_rho(&xs, RegScheme::SpectralCutoff { k: 4 }).unwrap();
        let e = &spec.noise.eigenfunctions;
        d1.push(e[0].dot(&est.rho_hat.apply(&e[0])));
        d2.push(e[1].dot(&est.rho_hat.apply(&e[1])));
    }
    let (m1, m2) = (median(d1), median(d2));
    assert!((m1 - 0.5).abs() <= 0.1, "{m1}");
    assert!((m2 - 0.3).abs() <= 0.1, "{m2}");
}

#[test]
fn null_operator_estimate_stays_at_noise_floor() {
    // with rho = 0 and cutoff k, E||rho_hat||_HS^2 ~ tr(Gamma) sum_{j<=k} 1/lambda_j / n
    let g = Grid::uniform(31).unwrap();
    let n = 4000;
    let k = 3;
    let mut norms = Vec::new();
    let mut floors = Vec::new();
    for seed in 0..20 {
        let spec = diag_spec(&g, &[], seed);
        let xs = simulate_arh1(&spec, n).unwrap().sample;
        let est = estimate_rho(&xs, RegScheme::SpectralCutoff { k }).unwrap();
        norms.push(est.rho_hat.hs_norm());
        let lam = est.eigens.eigenvalues();
        let inv: f64 = lam[..k].iter().map(|l| 1.0 / l).sum();
        floors.push((est.moments.cov.trace() * inv / n as f64).sqrt());
    }
    let (m, f) = (median(norms), median(floors));
    assert!(m <= 1.5 * f, "median ||rho_hat|| {m} vs floor {f}");
}

#[test]
fn ou_prediction_tracks_endpoint_decay() {
    let g = Grid::uniform(51).unwrap();
    let mut rel = Vec::new();
    for seed in 0..20 {
        let p = simulate_ou_segments(1.0, 2001, &g, seed).unwrap();
        let xs = &p.sample[..2000];
        let est = estimate_rho(xs, RegScheme::Penalized { alpha: 1e-3 }).unwrap();
        let last = &xs[1999];
        let end = *last.values().last().unwrap();
        let signal = Curve::from_fn(&g, |t: f64| (-t).exp() * end);
        rel.push((&predict(&est, last).unwrap() - &signal).norm() / signal.norm());
    }
    let m = median(rel);
    assert!(m <= 0.25, "{m}");
}

#[test]
fn cv_finds_the_rank_of_a_rank_two_model() {
    let g = Grid::uniform(21).unwrap();
    let cands: Vec<_> = (1..=6).map(|k| RegScheme::SpectralCutoff { k }).collect();
    let mut hits = 0;
    for seed in 0..20 {
        let xs = simulate_arh1(&diag_spec(&g, &[0.9, 0.8], seed), 400).unwrap().sample;
        let r = cross_validate(&xs, &cands, 0.75, true).unwrap();
        if matches!(r.selected, RegScheme::SpectralCutoff { k: 2 | 3 }) {
            hits += 1;
        }
    }
    assert!(hits >= 14, "{hits}/20");
}

#[test]
fn cv_prefers_small_cutoff_on_rank_one_data() {
    let g = Grid::uniform(15).unwrap();
    let xs = simulate_arh1(&diag_spec(&g, &[0.7], 8), 200).unwrap().sample;
    let cands = [RegScheme::SpectralCutoff { k: 1 }, RegScheme::SpectralCutoff { k: 15 }];
    let r = cross_validate(&xs, &cands, 0.75, true).unwrap();
    assert_eq!(r.selected, RegScheme::SpectralCutoff { k: 1 });
    assert!(r.loss[0] < r.loss[1]);
    let single = cross_validate(&xs, &cands[1..], 0.75, true).unwrap();
    assert_eq!(single.selected_index, 0);
}

#[test]
fn residual_covariance_matches_noise() {
    let g = Grid::uniform(31).unwrap();
    let spec = diag_spec(&g, &[0.6, 0.4, 0.2], 5);
    let xs = simulate_arh1(&spec, 4000).unwrap().sample;
    let est = estimate_rho(&xs, RegScheme::SpectralCutoff { k: 5 }).unwrap();
    let res = residuals(&est, &xs).unwrap();
    assert_eq!(res.len(), xs.len() - 1);
    let cov = empirical_cov(&res.residuals, 0, true).unwrap();
    let gamma = spec.noise.covariance();
    let rel = (&cov - &gamma).hs_norm() / gamma.hs_norm();
    assert!(rel <= 0.2, "{rel}");
}

#[test]
fn exact_recursion_leaves_no_residual() {
    let g = Grid::uniform(21).unwrap();
    let spec = diag_spec(&g, &[0.8, -0.5], 0);
    let mut xs = vec![&spec.noise.eigenfunctions[0] + &spec.noise.eigenfunctions[1]];
    for _ in 0..20 {
        xs.push(spec.rho.apply(xs.last().unwrap()));
    }
    let est = arhlab::arh::ArhEstimate::from_operator(spec.rho.clone(), Curve::zeros(&g), RegScheme::SpectralCutoff { k: 2 }).unwrap();
    assert!(residuals(&est, &xs).unwrap().residuals.iter().all(|r| r.norm() < 1e-12));
}

#[test]
fn companion_identity_block_of_order_two_fit() {
    let g = Grid::<f64>::uniform(21).unwrap();
    let noise = NoiseSpec::default_on(&g, 2).unwrap();
    let e = noise.eigenfunctions.clone();
    let r1 = OperatorMatrix::from_rank_one_sum(&g, &[(0.5, &e[0], &e[0]), (0.3, &e[1], &e[1])]).unwrap();
    let r2 = tensor_product(&e[0], &e[0]).unwrap().scale(0.3);
    let xs = simulate_arh_p(&[r1, r2], &noise, 4000, 200).unwrap().sample;
    let ys = companion_embed(&xs, 2).unwrap();
    let k = 6;
    let est = estimate_rho_with(&ys, RegScheme::SpectralCutoff { k }, EstimateOptions::default()).unwrap();
    let lower = operator_block(&est.rho_hat, 1, 0).unwrap();
    let target = operator_block(&est.projector(k), 0, 0).unwrap();
    let rel = (&lower - &target).hs_norm() / target.hs_norm();
    assert!(rel <= 0.3, "{rel}");
    let blocks = companion_extract(&est.rho_hat).unwrap();
    assert_eq!(blocks.len(), 2);
    let lead = e[0].dot(&blocks[0].apply(&e[0]));
    assert!((lead - 0.5).abs() < 0.15, "{lead}");
}

#[test]
fn predictor_clt_null_operator_scores() {
    let g = Grid::uniform(21).unwrap();
    let spec = diag_spec(&g, &[], 0);
    let opts = CltOptions { cutoff: Some(1), ..CltOptions::default() };
    let out = predictor_clt_experiment(&spec, 2000, 300, opts, 4).unwrap();
    let s = &out.summary;
    assert!((s.e1_variance / s.gamma1 - 1.0).abs() <= 0.2, "{} vs {}", s.e1_variance, s.gamma1);
}
