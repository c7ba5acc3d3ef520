//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Criterion 6 cannot pass at the stated parameters: with the exact rates
//! at λ = 0.2 the linear-noise variance is G(λ)/(2|F'(λ)|) = 0.48/0.4 = 1.2,
//! outside 10% of the λ → 0 value 1. It runs unchanged and is listed in
//! `EXPECTED_FAIL`; any other failure makes the target exit nonzero.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use qdp_core::analysis::{check_strong_stochasticity, CharacteristicPair, LambdaEnd, Stochasticity};
use qdp_core::asymptotics::EpsPower;
use qdp_core::bifurcation::{canonical_pair, scale_profile, Kind, ScaleMonomial};
use qdp_core::poset::{envelope, pivot_structure, Power, PowerSet};
use qdp_core::rational::{exp, rat, Exponent};
use qdp_core::simulate::ModelTemplate;
use qdp_core::validate::{convergence_trend, run_pipeline, Check, PipelineConfig, Thresholds};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EXPECTED_FAIL: &[u32] = &[6];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Q = Ratio<i64>;

/// Envelope and pivot slopes by exhaustive minimization over every pairwise
/// crossing slope and the points between them.
fn brute_force(points: &[(i64, i64)]) -> (BTreeSet<(i64, i64)>, Vec<Q>) {
    let s = |p: (i64, i64), m: Q| m * p.0 + p.1;
    let mut cands: BTreeSet<Q> = BTreeSet::new();
    for &p in points {
        for &q in points {
            if p.0 != q.0 {
                let m = Q::new(q.1 - p.1, p.0 - q.0);
                if m > Q::from(0) {
                    cands.insert(m);
                }
            }
        }
    }
    let cands: Vec<Q> = cands.into_iter().collect();
    let mut probes = cands.clone();
    match (cands.first(), cands.last()) {
        (Some(&lo), Some(&hi)) => {
            probes.push(lo / 2);
            probes.push(hi + 1);
            probes.extend(cands.windows(2).map(|w| (w[0] + w[1]) / 2));
        }
        _ => probes.push(Q::from(1)),
    }
    let argmin = |m: Q| -> Vec<(i64, i64)> {
        let best = points.iter().map(|&p| s(p, m)).min().unwrap();
        points.iter().copied().filter(|&p| s(p, m) == best).collect()
    };
    let env = probes.iter().flat_map(|&m| argmin(m)).collect();
    let slopes = cands.into_iter().filter(|&m| argmin(m).len() >= 2).collect();
    (env, slopes)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let k = rng.gen_range(1..=10);
        let pts: BTreeSet<(i64, i64)> = (0..k).map(|_| (rng.gen_range(0..=6), rng.gen_range(0..=6))).collect();
        let pts: Vec<(i64, i64)> = pts.into_iter().collect();
        let set = PowerSet::from_powers(&pts.iter().map(|&(x, l)| (x as u32, l as u32)).collect::<Vec<_>>());
        let (env, slopes) = brute_force(&pts);
        let got_env: BTreeSet<(i64, i64)> = envelope(&set).powers().map(|p| (i64::from(p.x), i64::from(p.lam))).collect();
        let got_slopes = pivot_structure(&set).unwrap().slopes;
        if got_env != env || got_slopes != slopes {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("{mismatches} mismatches in 1000 random sets"))
}

fn criterion_2() -> Outcome {
    let set = |pts: &[(u32, u32)]| PowerSet::from_powers(pts);
    let fig = set(&[(4, 0), (2, 1), (1, 2), (2, 2), (3, 3), (1, 3), (0, 4)]);
    let fig_ok = pivot_structure(&fig).unwrap().slopes == vec![exp(1, 2), exp(1, 1), exp(2, 1)];
    let ce = envelope(&set(&[(3, 0), (2, 2), (0, 3)]));
    let ce_ok = !ce.contains(&Power::new(2, 2)) && ce.len() == 2;
    let a = PowerSet::from_ints(&[(4, 0, 1), (1, 2, 1)]);
    let ma_ok = pivot_structure(&a).unwrap().slopes == vec![exp(2, 3)];
    let mut ex_ok = true;
    for k in 1..=3i64 {
        let g = PowerSet::from_ints(&[(k as u32, 0, 1), (0, k as u32, 1)]);
        let cp = CharacteristicPair::new(a.clone(), g).unwrap();
        ex_ok &= cp.delta == vec![(4 - k, 0), (1 - k, 2), (1, 2 - k)];
        ex_ok &= cp.upright() == (k == 1);
    }
    outcome(fig_ok && ce_ok && ma_ok && ex_ok, format!("figure slopes {fig_ok}, counterexample {ce_ok}, M(A) {ma_ok}, δ/upright {ex_ok}"))
}

fn criterion_3() -> Outcome {
    let mut failures = Vec::new();
    for (kind, j1, j2) in [(Kind::SaddleNode, 2i64, 0i64), (Kind::Transcritical, 2, 1), (Kind::Pitchfork, 3, 1)] {
        let (cp, br) = canonical_pair(kind).unwrap();
        let prof = scale_profile(&cp, &br).unwrap();
        let w = 1 + j1 - j2;
        let first = &prof.pieces[0];
        let last = prof.pieces.last().unwrap();
        let beyond_b = if j2 == 1 { ScaleMonomial::new(exp(0, 1), exp(-1, 1)) } else { ScaleMonomial::new(exp(2, 1), exp(-2, 1)) };
        let nu = prof.nu_star;
        let checks = [
            first.phi == Some(ScaleMonomial::new(Exponent::new(2, w), exp(0, 1))),
            first.b == Some(ScaleMonomial::new(Exponent::new(-2 * (j1 - 1), w), exp(0, 1))),
            nu == Exponent::new(2 * (j1 - j2), w),
            prof.pieces.len() == 2 && last.lam_from == LambdaEnd::Eps(nu),
            last.phi == Some(ScaleMonomial::new(exp(2, 1), exp(-1, 1))),
            last.b == Some(beyond_b),
            prof.phi_star.at(nu) == last.phi.unwrap().at(nu),
            prof.b_star.at(nu) == last.b.unwrap().at(nu),
        ];
        if let Some(k) = checks.iter().position(|c| !c) {
            failures.push(format!("{kind:?} check {k}"));
        }
    }
    outcome(failures.is_empty(), if failures.is_empty() { "all three catalog profiles exact".into() } else { failures.join(", ") })
}

fn criterion_4() -> Outcome {
    let f = PowerSet::from_ints(&[(0, 2, 1), (2, 0, 1)]);
    let g = PowerSet::from_ints(&[(0, 2, 1), (1, 1, -2), (2, 0, 1)]);
    let ss = check_strong_stochasticity(&f, &g).unwrap();
    let pass = ss.verdict == Stochasticity::NecessaryOnly && ss.env_minus_piv_b == vec![Power::new(1, 1)];
    let diff: Vec<String> = ss.env_minus_piv_b.iter().map(|p| p.to_string()).collect();
    outcome(pass, format!("verdict {:?}, env(B)∖piv(B) = {{{}}}", ss.verdict, diff.join(", ")))
}

fn dd_scale_config() -> PipelineConfig {
    PipelineConfig {
        model: ModelTemplate::logistic(),
        lambda: None,
        a: EpsPower::pure(exp(-1, 1)),
        b: EpsPower::pure(exp(-1, 1)),
        center: None,
        y0: 1.0,
        replicas: 10_000,
        seed: 20_240_601,
        check: Check::Marginal { t_ref: 1.0, dt: 1e-3, em_replicas: 10_000, sde: None },
        thresholds: Thresholds { ks_max: Some(0.08), ..Thresholds::default() },
    }
}

fn criterion_5() -> Outcome {
    let trend = convergence_trend(&dd_scale_config(), &[0.1, 0.05]).unwrap();
    let sde = trend.runs[0].sde.as_ref().unwrap();
    let limit_ok = sde.drift == "-x^2" && sde.diffusion == "2x";
    let (k1, k2) = (trend.rows[0].ks, trend.rows[1].ks);
    let pass = limit_ok && k2 < 0.08 && k2 < k1;
    outcome(pass, format!("limit dY = {} dt + √({}) dB; KS(0.1) = {k1:.4}, KS(0.05) = {k2:.4}", sde.drift, sde.diffusion))
}

fn criterion_6() -> Outcome {
    let lam = EpsPower::new(rat(1, 5), exp(0, 1)).unwrap();
    let cfg = PipelineConfig {
        lambda: Some(lam.clone()),
        b: EpsPower::new(rat(5, 1), exp(0, 1)).unwrap(),
        center: Some(lam),
        y0: 0.0,
        replicas: 200,
        check: Check::StationaryVariance { t_lo: 20.0, t_hi: 40.0, sample_dt: 0.1, target: 1.0, rel_tol: 0.1 },
        ..dd_scale_config()
    };
    let run = run_pipeline(&cfg, 0.02).unwrap();
    let v = run.stationary_variance.unwrap();
    outcome(run.pass, format!("variance over t ∈ [20, 40] = {v:.4} (target 1 ± 10%; linear noise at λ = 0.2 gives 1.2)"))
}

fn criterion_7() -> Outcome {
    let cfg = PipelineConfig {
        lambda: Some(EpsPower::pure(exp(2, 1))),
        a: EpsPower::pure(exp(-4, 3)),
        b: EpsPower::pure(exp(-2, 3)),
        ..dd_scale_config()
    };
    let run = run_pipeline(&cfg, 0.05).unwrap();
    let sde = run.sde.as_ref().unwrap();
    let ks = run.comparison.as_ref().unwrap().ks_at_times[0].ks;
    let pass = sde.drift == "0" && sde.diffusion == "2x" && ks < 0.08;
    outcome(pass, format!("limit dY = {} dt + √({}) dB from Y0 = {:.4}; KS = {ks:.4}", sde.drift, sde.diffusion, run.y0))
}

fn criterion_8() -> Outcome {
    let cfg = dd_scale_config();
    let run = || serde_json::to_string(&convergence_trend(&cfg, &[0.1, 0.05]).unwrap()).unwrap();
    let first = run();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let second = single.install(run);
    outcome(first == second, format!("{} report bytes, identical across 1 and default threads: {}", first.len(), first == second))
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        (1, "envelope oracle equivalence", criterion_1),
        (2, "combinatorics fixtures", criterion_2),
        (3, "canonical scale formulas", criterion_3),
        (4, "strong-stochasticity counterexample", criterion_4),
        (5, "dd-scale Monte Carlo", criterion_5),
        (6, "OU fluctuations around the branch", criterion_6),
        (7, "pure-diffusive range", criterion_7),
        (8, "determinism", criterion_8),
    ];
    let mut unexpected = 0;
    for (id, name, run) in criterion_list(&criteria) {
        let t = Instant::now();
        let o = run();
        let secs = t.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        let note = match (o.pass, EXPECTED_FAIL.contains(&id)) {
            (false, true) => " [known unattainable]",
            (true, true) => " [expected to fail, passed]",
            _ => "",
        };
        println!("criterion {id} {tag}{note}: {name}: {} ({secs:.2} s)", o.detail);
        if !o.pass && !EXPECTED_FAIL.contains(&id) {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn criterion_list(c: &[Criterion]) -> impl Iterator<Item = Criterion> + '_ {
    let only: Option<u32> = std::env::var("QDP_CRITERION").ok().and_then(|s| s.parse().ok());
    c.iter().copied().filter(move |(id, _, _)| only.is_none_or(|o| o == *id))
}
