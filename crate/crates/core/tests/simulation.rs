use qdp_core::asymptotics::EpsPower;
use qdp_core::poly::RealPoly;
use qdp_core::poset::{Power, PowerSet};
use qdp_core::rational::{exp, rat};
use qdp_core::simulate::{
    em_ensemble, em_integrate_with_increments, replica_rng, ssa_ensemble, ssa_simulate, Domain, Jump, ModelTemplate, Record,
    SdeModel, SsaOptions,
};
use qdp_core::validate::{convergence_trend, ks_critical, ks_statistic, moments, Check, PipelineConfig, Thresholds};
use rand::Rng;
use rand_distr::StandardNormal;

fn ou() -> SdeModel {
    SdeModel { drift: RealPoly::from_coeffs(&[0.0, -1.0]), diffusion: RealPoly::from_coeffs(&[2.0]), domain: Domain::whole_line() }
}

fn finals(paths: &[qdp_core::simulate::SamplePath]) -> Vec<f64> {
    paths.iter().map(|p| p.final_value()).collect()
}

#[test]
fn logistic_mean_follows_the_ode() {
    let m = ModelTemplate::logistic().instantiate(400, 0.0).unwrap();
    let opts = SsaOptions { record: Record::Grid(1.0), ..Default::default() };
    let paths = ssa_ensemble(&m, 0.05, 1.0, 17, 10_000, &opts).unwrap();
    let mo = moments(&finals(&paths));
    // x' = −x², x(0) = 0.05.
    let ode = 0.05 / 1.05;
    assert!((mo.mean - ode).abs() <= 3.0 * mo.se_mean, "mean {} vs {ode} (se {})", mo.mean, mo.se_mean);
}

#[test]
fn constant_rate_waiting_times_are_exponential() {
    let (n, r) = (10u64, 0.5);
    let rate = PowerSet::new([(Power::new(0, 0), rat(1, 2))]).unwrap();
    let jumps = vec![Jump { delta: 1, rate }];
    let m = qdp_core::simulate::DdmcModel::new(jumps, n, 0.0).unwrap();
    let p = ssa_simulate(&m, 0.0, 2_200.0, 5, 0, &SsaOptions::default()).unwrap();
    let waits: Vec<f64> = p.times.windows(2).take(10_000).map(|w| w[1] - w[0]).collect();
    assert_eq!(waits.len(), 10_000);
    let rate = n as f64 * r;
    let mut w = waits.clone();
    w.sort_by(f64::total_cmp);
    let len = w.len() as f64;
    let d = w.iter().enumerate().fold(0.0f64, |d, (i, &t)| {
        let cdf = 1.0 - (-rate * t).exp();
        d.max((cdf - i as f64 / len).abs()).max(((i + 1) as f64 / len - cdf).abs())
    });
    assert!(d < 1.628 / len.sqrt(), "one-sample KS {d}");
}

#[test]
fn ou_variance_is_one() {
    let (paths, clamps) = em_ensemble(&ou(), 0.0, 5.0, 1e-2, 3, 100_000, 500).unwrap();
    assert_eq!(clamps, 0);
    let mo = moments(&finals(&paths));
    assert!((mo.var - 1.0).abs() < 0.02, "variance {}", mo.var);
    assert!((mo.var - 1.0).abs() <= 3.0 * mo.se_var + 0.01, "variance {} se {}", mo.var, mo.se_var);
}

#[test]
fn em_error_shrinks_with_dt_on_shared_noise() {
    let fine_dt: f64 = 1e-3 / 8.0;
    let mut e_coarse = Vec::new();
    let mut e_half = Vec::new();
    for seed in 0..100u64 {
        let mut rng = replica_rng(99, seed);
        let fine: Vec<f64> = (0..8000).map(|_| fine_dt.sqrt() * rng.sample::<f64, _>(StandardNormal)).collect();
        let coarsen = |k: usize| -> Vec<f64> { fine.chunks(k).map(|c| c.iter().sum()).collect() };
        let end = |dw: &[f64], dt: f64| em_integrate_with_increments(&ou(), 1.0, dt, dw, usize::MAX).unwrap().path.final_value();
        let reference = end(&fine, fine_dt);
        e_coarse.push((end(&coarsen(8), 8.0 * fine_dt) - reference).abs());
        e_half.push((end(&coarsen(4), 4.0 * fine_dt) - reference).abs());
    }
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    };
    assert!(median(&mut e_half) < median(&mut e_coarse));
}

#[test]
fn independent_ou_draws_pass_ks_at_one_percent() {
    let crit = ks_critical(10_000, 10_000);
    assert!((crit - 0.0231).abs() < 1e-3);
    let below = (0..100u64)
        .filter(|&trial| {
            let (a, _) = em_ensemble(&ou(), 0.0, 1.0, 1e-2, 2 * trial, 10_000, 100).unwrap();
            let (b, _) = em_ensemble(&ou(), 0.0, 1.0, 1e-2, 2 * trial + 1, 10_000, 100).unwrap();
            ks_statistic(&finals(&a), &finals(&b)) < crit
        })
        .count();
    assert!(below >= 95, "{below} of 100 below the critical value");
}

#[test]
fn trivial_pipeline_matches_at_every_eps() {
    let cfg = PipelineConfig {
        model: ModelTemplate::logistic(),
        lambda: None,
        a: EpsPower::pure(exp(-1, 1)),
        b: EpsPower::pure(exp(-1, 1)),
        center: None,
        y0: 0.0,
        replicas: 200,
        seed: 4,
        check: Check::Marginal {
            t_ref: 1.0,
            dt: 1e-2,
            em_replicas: 200,
            sde: Some(SdeModel { drift: RealPoly::zero(), diffusion: RealPoly::zero(), domain: Domain::half_line_absorbing() }),
        },
        thresholds: Thresholds::default(),
    };
    let trend = convergence_trend(&cfg, &[0.1, 0.05]).unwrap();
    for row in &trend.rows {
        assert!(row.ks < ks_critical(200, 200));
    }
    assert!(trend.non_increasing);
    assert!(trend.to_csv().starts_with("eps,ks,band_lo,band_hi\n"));
}
