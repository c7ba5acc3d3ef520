//! Ensemble comparisons: time-`t` marginals of a rescaled chain against an
//! Euler–Maruyama ensemble of the predicted limit.
//!
//! Thresholds here are engineering choices; the theory fixes limits, not
//! rates of convergence.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{classify_parametrized, CharacteristicPair, LimitClassification};
use crate::asymptotics::EpsPower;
use crate::error::{Error, Result};
use crate::simulate::{
    self, em_ensemble, rescale, ssa_ensemble, Boundary, Domain, ModelTemplate, Record, SamplePath, SdeModel, SsaOptions,
    Terminal,
};

pub const MIN_REPLICAS: usize = 100;
/// Asymptotic two-sample KS coefficient at level 0.01.
pub const KS_COEFF_1PCT: f64 = 1.628;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
/// Grid times rescaled back by `b` may land one ulp past the requested time.
const TIME_SLACK: f64 = 1e-12;

pub fn ks_critical(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    KS_COEFF_1PCT * ((n + m) / (n * m)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleMeta {
    pub eps: Option<f64>,
    pub n: Option<u64>,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub center: f64,
    pub seed: u64,
    /// Rescaled horizon every replica was run to (or stopped before).
    pub horizon: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub replicas: Vec<SamplePath>,
    pub meta: EnsembleMeta,
}

impl Ensemble {
    pub fn new(replicas: Vec<SamplePath>, meta: EnsembleMeta) -> Result<Self> {
        if replicas.len() < 2 {
            return Err(Error::TooFewReplicas { need: 2, got: replicas.len() });
        }
        Ok(Ensemble { replicas, meta })
    }

    fn check_horizon(&self, t: f64) -> Result<()> {
        if t < 0.0 || t > self.meta.horizon * (1.0 + TIME_SLACK) {
            return Err(Error::Horizon { t, horizon: self.meta.horizon });
        }
        Ok(())
    }

    /// Values at `t`; stopped replicas contribute their terminal value.
    pub fn marginal(&self, t: f64) -> Result<Vec<f64>> {
        self.check_horizon(t)?;
        let tt = t * (1.0 + TIME_SLACK);
        Ok(self.replicas.iter().map(|p| p.value_at(tt)).collect())
    }

    /// Fraction of replicas absorbed or stopped by time `t`.
    pub fn absorbed_fraction(&self, t: f64) -> f64 {
        let tt = t * (1.0 + TIME_SLACK);
        let hit = self
            .replicas
            .iter()
            .filter(|p| match p.terminal {
                Terminal::TimeLimit => false,
                Terminal::Absorbed => *p.times.last().expect("nonempty") <= tt,
                Terminal::Exited => p.end_time <= tt,
            })
            .count();
        hit as f64 / self.replicas.len() as f64
    }

    pub fn len(&self) -> usize {
        self.replicas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.replicas.is_empty()
    }
}

/// Two-sample KS statistic; tied values step both CDFs together.
pub fn ks_statistic(x: &[f64], y: &[f64]) -> f64 {
    let mut xs = x.to_vec();
    let mut ys = y.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = if xs[i] <= ys[j] { xs[i] } else { ys[j] };
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

fn require_replicas(e: &Ensemble) -> Result<()> {
    if e.len() < MIN_REPLICAS {
        return Err(Error::TooFewReplicas { need: MIN_REPLICAS, got: e.len() });
    }
    Ok(())
}

pub fn marginal_ks(e1: &Ensemble, e2: &Ensemble, t: f64) -> Result<f64> {
    require_replicas(e1)?;
    require_replicas(e2)?;
    Ok(ks_statistic(&e1.marginal(t)?, &e2.marginal(t)?))
}

/// Mean, variance and their jackknife standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub var: f64,
    pub se_mean: f64,
    pub se_var: f64,
}

pub fn moments(xs: &[f64]) -> Moments {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let dev: Vec<f64> = xs.iter().map(|x| x - mean).collect();
    let s2: f64 = dev.iter().map(|d| d * d).sum();
    let var = s2 / (n - 1.0);
    // Leave-one-out means are `mean − d_i/(n−1)`, whose jackknife SE is `s/√n`.
    let se_mean = (var / n).sqrt();
    let loo: Vec<f64> = dev.iter().map(|d| (s2 - d * d * n / (n - 1.0)) / (n - 2.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / n;
    let se_var = ((n - 1.0) / n * loo.iter().map(|v| (v - loo_mean).powi(2)).sum::<f64>()).sqrt();
    Moments { mean, var, se_mean, se_var }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Fixed KS bound; `None` uses the 1% asymptotic critical value.
    pub ks_max: Option<f64>,
    /// Mean differences must stay within `z` combined standard errors.
    pub z: f64,
    /// Allowed band for `var₁/var₂`.
    pub var_ratio: (f64, f64),
    /// Absorbed fractions may differ by at most this many standard errors.
    pub absorbed_z: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { ks_max: None, z: 3.0, var_ratio: (0.8, 1.25), absorbed_z: 3.0 }
    }
}

impl Thresholds {
    pub fn ks_bound(&self, n: usize, m: usize) -> f64 {
        self.ks_max.unwrap_or_else(|| ks_critical(n, m))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentRow {
    pub time: f64,
    pub first: Moments,
    pub second: Moments,
    pub combined_se: f64,
    /// `None` when either variance is zero (degenerate comparator).
    pub var_ratio: Option<f64>,
    pub absorbed: (f64, f64),
    pub absorbed_se: f64,
    pub mean_ok: bool,
    pub var_ok: bool,
    pub absorbed_ok: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsRow {
    pub time: f64,
    pub ks: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub ks_at_times: Vec<KsRow>,
    pub moment_table: Vec<MomentRow>,
    pub thresholds: Thresholds,
    pub pass: bool,
}

fn within(diff: f64, se: f64, z: f64) -> bool {
    if se == 0.0 {
        diff == 0.0
    } else {
        diff.abs() <= z * se
    }
}

pub fn moment_row(e1: &Ensemble, e2: &Ensemble, t: f64, th: &Thresholds) -> Result<MomentRow> {
    require_replicas(e1)?;
    require_replicas(e2)?;
    let (m1, m2) = (moments(&e1.marginal(t)?), moments(&e2.marginal(t)?));
    let combined_se = m1.se_mean.hypot(m2.se_mean);
    let mean_ok = within(m1.mean - m2.mean, combined_se, th.z);
    let var_ratio = (m1.var > 0.0 && m2.var > 0.0).then(|| m1.var / m2.var);
    let var_ok = var_ratio.is_none_or(|r| r >= th.var_ratio.0 && r <= th.var_ratio.1);
    let (p1, p2) = (e1.absorbed_fraction(t), e2.absorbed_fraction(t));
    let (n1, n2) = (e1.len() as f64, e2.len() as f64);
    let pooled = (p1 * n1 + p2 * n2) / (n1 + n2);
    let absorbed_se = (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    let absorbed_ok = within(p1 - p2, absorbed_se, th.absorbed_z);
    Ok(MomentRow { time: t, first: m1, second: m2, combined_se, var_ratio, absorbed: (p1, p2), absorbed_se, mean_ok, var_ok, absorbed_ok })
}

pub fn moment_compare(e1: &Ensemble, e2: &Ensemble, times: &[f64], th: &Thresholds) -> Result<ComparisonReport> {
    let moment_table = times.iter().map(|&t| moment_row(e1, e2, t, th)).collect::<Result<Vec<_>>>()?;
    let pass = moment_table.iter().all(|r| r.mean_ok && r.var_ok && r.absorbed_ok);
    Ok(ComparisonReport { ks_at_times: Vec::new(), moment_table, thresholds: th.clone(), pass })
}

/// KS at every time plus the moment table.
pub fn compare(e1: &Ensemble, e2: &Ensemble, times: &[f64], th: &Thresholds) -> Result<ComparisonReport> {
    let mut rep = moment_compare(e1, e2, times, th)?;
    let bound = th.ks_bound(e1.len(), e2.len());
    for &t in times {
        let ks = marginal_ks(e1, e2, t)?;
        rep.ks_at_times.push(KsRow { time: t, ks, bound, pass: ks <= bound });
    }
    rep.pass &= rep.ks_at_times.iter().all(|r| r.pass);
    Ok(rep)
}

/// Variance of all samples pooled over replicas and grid times in `[t_lo, t_hi]`.
pub fn stationary_variance(e: &Ensemble, t_lo: f64, t_hi: f64) -> Result<f64> {
    e.check_horizon(t_hi)?;
    let lo = t_lo * (1.0 - TIME_SLACK);
    let hi = t_hi * (1.0 + TIME_SLACK);
    let xs: Vec<f64> = e
        .replicas
        .iter()
        .flat_map(|p| p.times.iter().zip(&p.values).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, v)| *v))
        .collect();
    if xs.len() < 2 {
        return Err(Error::Invalid(format!("no samples in [{t_lo}, {t_hi}]")));
    }
    Ok(moments(&xs).var)
}

/// 2.5% and 97.5% quantiles of the KS statistic over bootstrap resamples of both samples.
pub fn bootstrap_band(x: &[f64], y: &[f64], seed: u64, stream: u64) -> (f64, f64) {
    let mut rng = simulate::replica_rng(seed, stream);
    let mut stats: Vec<f64> = (0..BOOTSTRAP_RESAMPLES)
        .map(|_| {
            let rx: Vec<f64> = (0..x.len()).map(|_| x[rng.gen_range(0..x.len())]).collect();
            let ry: Vec<f64> = (0..y.len()).map(|_| y[rng.gen_range(0..y.len())]).collect();
            ks_statistic(&rx, &ry)
        })
        .collect();
    stats.sort_by(f64::total_cmp);
    let q = |p: f64| stats[((p * (stats.len() - 1) as f64).round()) as usize];
    (q(0.025), q(0.975))
}

/// What a pipeline measures after rescaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Check {
    /// Time-`t_ref` marginal against an EM ensemble of the limit SDE.
    Marginal {
        t_ref: f64,
        dt: f64,
        em_replicas: usize,
        /// Limit SDE; derived from the characteristics when absent.
        #[serde(default)]
        sde: Option<SdeModel>,
    },
    /// Pooled variance over `[t_lo, t_hi]` against `target`.
    StationaryVariance { t_lo: f64, t_hi: f64, sample_dt: f64, target: f64, rel_tol: f64 },
}

/// One chain-vs-limit experiment, parametrized by ε with `N = round(ε⁻²)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub model: ModelTemplate,
    /// `None` is `λ ≡ 0`.
    #[serde(default)]
    pub lambda: Option<EpsPower>,
    pub a: EpsPower,
    pub b: EpsPower,
    /// Rescaling center `x⋆`; zero when absent.
    #[serde(default)]
    pub center: Option<EpsPower>,
    /// Target rescaled start; the chain starts at the nearest lattice point.
    pub y0: f64,
    pub replicas: usize,
    pub seed: u64,
    pub check: Check,
    #[serde(default)]
    pub thresholds: Thresholds,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub eps: f64,
    #[serde(rename = "N")]
    pub n: u64,
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub center: f64,
    pub x0: f64,
    pub y0: f64,
    pub chain_horizon: f64,
    pub sde: Option<SdeSummary>,
    pub clamp_events: u64,
    pub comparison: Option<ComparisonReport>,
    pub stationary_variance: Option<f64>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SdeSummary {
    pub drift: String,
    pub diffusion: String,
    pub domain: Domain,
    pub derived: bool,
}

/// Per-ε marginal samples kept for the trend bootstrap.
struct Marginals {
    chain: Vec<f64>,
    limit: Vec<f64>,
}

pub fn system_size(eps: f64) -> Result<u64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Invalid(format!("ε = {eps} must lie in (0, 1)")));
    }
    Ok((eps * eps).recip().round() as u64)
}

fn eval_opt(p: &Option<EpsPower>, eps: f64) -> f64 {
    p.as_ref().map_or(0.0, |p| p.eval(eps))
}

/// The limit predicted for the configured scales.
pub fn derive_limit(cfg: &PipelineConfig) -> Result<LimitClassification> {
    let rc = simulate::characteristics_from_rates(&cfg.model.jumps)?;
    let cp = CharacteristicPair::new(rc.f, rc.g)?;
    classify_parametrized(&cp, &cfg.a, &cfg.b, cfg.lambda.as_ref())
}

fn run_one(cfg: &PipelineConfig, eps: f64, keep: &mut Option<Marginals>) -> Result<RunReport> {
    let n = system_size(eps)?;
    let lambda = eval_opt(&cfg.lambda, eps);
    let (a, b, center) = (cfg.a.eval(eps), cfg.b.eval(eps), eval_opt(&cfg.center, eps));
    let model = cfg.model.instantiate(n, lambda)?;
    let count = ((center + cfg.y0 / a) * n as f64).round().max(0.0);
    let x0 = count / n as f64;
    let y0 = a * (x0 - center);
    let meta = |horizon: f64, n: Option<u64>| EnsembleMeta { eps: Some(eps), n, lambda, a, b, center, seed: cfg.seed, horizon };
    match &cfg.check {
        Check::Marginal { t_ref, dt, em_replicas, sde } => {
            let chain_horizon = b * t_ref;
            let opts = SsaOptions { record: Record::Grid(chain_horizon), ..Default::default() };
            let chain = ssa_ensemble(&model, x0, chain_horizon, cfg.seed, cfg.replicas, &opts)?;
            let chain = chain.iter().map(|p| rescale(p, a, b, center)).collect();
            let chain = Ensemble::new(chain, meta(*t_ref, Some(n)))?;
            let (sde, derived) = match sde {
                Some(s) => (s.clone(), false),
                None => {
                    let lim = derive_limit(cfg)?;
                    let domain = Domain { lo: -a * center, hi: f64::INFINITY, policy: Boundary::Absorb };
                    (SdeModel { drift: lim.drift, diffusion: lim.diffusion, domain }, true)
                }
            };
            let steps = simulate::em_step_count(*t_ref, *dt).max(1);
            // A distinct seed keeps limit draws independent of the chain draws.
            let em_seed = cfg.seed ^ 0x9E37_79B9_7F4A_7C15;
            let (limit, clamp_events) = em_ensemble(&sde, y0, *t_ref, *dt, em_seed, *em_replicas, steps)?;
            let limit = Ensemble::new(limit, EnsembleMeta { n: None, a: 1.0, b: 1.0, center: 0.0, seed: em_seed, ..meta(*t_ref, None) })?;
            let comparison = compare(&chain, &limit, &[*t_ref], &cfg.thresholds)?;
            *keep = Some(Marginals { chain: chain.marginal(*t_ref)?, limit: limit.marginal(*t_ref)? });
            let summary = SdeSummary { drift: sde.drift.to_string(), diffusion: sde.diffusion.to_string(), domain: sde.domain, derived };
            Ok(RunReport {
                eps, n, lambda, a, b, center, x0, y0, chain_horizon,
                sde: Some(summary),
                clamp_events,
                pass: comparison.pass,
                comparison: Some(comparison),
                stationary_variance: None,
            })
        }
        Check::StationaryVariance { t_lo, t_hi, sample_dt, target, rel_tol } => {
            let chain_horizon = b * t_hi;
            let opts = SsaOptions { record: Record::Grid(b * sample_dt), ..Default::default() };
            let chain = ssa_ensemble(&model, x0, chain_horizon, cfg.seed, cfg.replicas, &opts)?;
            let chain = chain.iter().map(|p| rescale(p, a, b, center)).collect();
            let chain = Ensemble::new(chain, meta(*t_hi, Some(n)))?;
            let v = stationary_variance(&chain, *t_lo, *t_hi)?;
            Ok(RunReport {
                eps, n, lambda, a, b, center, x0, y0, chain_horizon,
                sde: None,
                clamp_events: 0,
                comparison: None,
                stationary_variance: Some(v),
                pass: (v - target).abs() <= rel_tol * target.abs(),
            })
        }
    }
}

pub fn run_pipeline(cfg: &PipelineConfig, eps: f64) -> Result<RunReport> {
    run_one(cfg, eps, &mut None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendRow {
    pub eps: f64,
    pub ks: f64,
    pub band_lo: f64,
    pub band_hi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrendReport {
    pub rows: Vec<TrendRow>,
    pub runs: Vec<RunReport>,
    /// Each KS stays below the previous one's upper bootstrap quantile.
    pub non_increasing: bool,
}

impl TrendReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("eps,ks,band_lo,band_hi\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{},{}\n", r.eps, r.ks, r.band_lo, r.band_hi));
        }
        s
    }
}

pub fn convergence_trend(cfg: &PipelineConfig, eps_grid: &[f64]) -> Result<TrendReport> {
    if eps_grid.len() < 2 {
        return Err(Error::Invalid("convergence trend needs at least two ε values".into()));
    }
    if eps_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Invalid("ε grid must be strictly decreasing".into()));
    }
    if !matches!(cfg.check, Check::Marginal { .. }) {
        return Err(Error::Invalid("convergence trend needs a marginal check".into()));
    }
    let mut rows = Vec::new();
    let mut runs = Vec::new();
    for (k, &eps) in eps_grid.iter().enumerate() {
        let mut keep = None;
        let run = run_one(cfg, eps, &mut keep)?;
        let m = keep.expect("marginal check keeps samples");
        let ks = run.comparison.as_ref().expect("marginal check").ks_at_times[0].ks;
        let (band_lo, band_hi) = bootstrap_band(&m.chain, &m.limit, cfg.seed, k as u64);
        rows.push(TrendRow { eps, ks, band_lo, band_hi });
        runs.push(run);
    }
    let non_increasing = rows.windows(2).all(|w| w[1].ks <= w[0].band_hi);
    Ok(TrendReport { rows, runs, non_increasing })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::RealPoly;

    fn meta(horizon: f64) -> EnsembleMeta {
        EnsembleMeta { eps: None, n: None, lambda: 0.0, a: 1.0, b: 1.0, center: 0.0, seed: 0, horizon }
    }

    fn ensemble_of(values: &[f64]) -> Ensemble {
        let reps = values.iter().map(|&v| SamplePath::constant(v, 1.0, Terminal::TimeLimit)).collect();
        Ensemble::new(reps, meta(1.0)).unwrap()
    }

    #[test]
    fn ks_basic_values() {
        assert_eq!(ks_statistic(&[1.0, 2.0], &[1.0, 2.0]), 0.0);
        assert_eq!(ks_statistic(&[0.0, 0.0], &[1.0, 1.0]), 1.0);
        assert_eq!(ks_statistic(&[0.0, 1.0], &[0.0, 0.0]), 0.5);
        assert_eq!(ks_statistic(&[1.0, 2.0, 3.0], &[2.5]), 2.0 / 3.0);
        assert!((ks_critical(10_000, 10_000) - 0.02302).abs() < 1e-4);
    }

    #[test]
    fn ensemble_rules() {
        let e = ensemble_of(&(0..150).map(f64::from).collect::<Vec<_>>());
        let mut shuffled = e.clone();
        shuffled.replicas.reverse();
        assert_eq!(marginal_ks(&e, &shuffled, 0.5).unwrap(), 0.0);
        assert!(matches!(marginal_ks(&e, &e, 2.0), Err(Error::Horizon { .. })));
        let small = ensemble_of(&[1.0, 2.0, 3.0]);
        assert!(matches!(marginal_ks(&small, &e, 0.5), Err(Error::TooFewReplicas { .. })));
        assert!(Ensemble::new(vec![], meta(1.0)).is_err());
    }

    #[test]
    fn jackknife_matches_closed_forms() {
        let xs = [1.0, 4.0, 2.0, 8.0, 5.0, 7.0];
        let m = moments(&xs);
        let n = xs.len();
        // Brute-force leave-one-out jackknife.
        let loo = |f: &dyn Fn(&[f64]) -> f64| -> f64 {
            let vals: Vec<f64> = (0..n).map(|i| {
                let v: Vec<f64> = xs.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, x)| *x).collect();
                f(&v)
            }).collect();
            let mu = vals.iter().sum::<f64>() / n as f64;
            ((n as f64 - 1.0) / n as f64 * vals.iter().map(|v| (v - mu).powi(2)).sum::<f64>()).sqrt()
        };
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let var = |v: &[f64]| { let mu = mean(v); v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() as f64 - 1.0) };
        assert!((m.mean - 4.5).abs() < 1e-12);
        assert!((m.var - var(&xs)).abs() < 1e-12);
        assert!((m.se_mean - loo(&mean)).abs() < 1e-12);
        assert!((m.se_var - loo(&var)).abs() < 1e-12);
    }

    #[test]
    fn identical_and_degenerate_comparisons() {
        let e = ensemble_of(&(0..200).map(|k| (k as f64 * 0.37).sin()).collect::<Vec<_>>());
        let r = compare(&e, &e, &[1.0], &Thresholds::default()).unwrap();
        assert!(r.pass);
        assert_eq!(r.ks_at_times[0].ks, 0.0);
        assert_eq!(r.moment_table[0].first.mean - r.moment_table[0].second.mean, 0.0);
        let ode = ensemble_of(&[0.0; 100]);
        let row = moment_row(&e, &ode, 1.0, &Thresholds::default()).unwrap();
        assert_eq!(row.second.var, 0.0);
        assert_eq!(row.var_ratio, None);
    }

    #[test]
    fn absorbed_mismatch_fails() {
        let alive: Vec<SamplePath> = (0..200).map(|_| SamplePath::constant(1.0, 1.0, Terminal::TimeLimit)).collect();
        let mut dead = alive.clone();
        for p in dead.iter_mut().take(40) {
            p.terminal = Terminal::Absorbed;
        }
        let (e1, e2) = (Ensemble::new(alive, meta(1.0)).unwrap(), Ensemble::new(dead, meta(1.0)).unwrap());
        assert!(!moment_row(&e1, &e2, 1.0, &Thresholds::default()).unwrap().absorbed_ok);
    }

    #[test]
    fn stationary_variance_pools_window() {
        let reps = vec![
            SamplePath { times: vec![0.0, 1.0, 2.0], values: vec![9.0, 1.0, -1.0], end_time: 2.0, terminal: Terminal::TimeLimit },
            SamplePath { times: vec![0.0, 1.0, 2.0], values: vec![9.0, 1.0, -1.0], end_time: 2.0, terminal: Terminal::TimeLimit },
        ];
        let e = Ensemble::new(reps, meta(2.0)).unwrap();
        assert!((stationary_variance(&e, 1.0, 2.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn trend_needs_two_eps() {
        let cfg = PipelineConfig {
            model: ModelTemplate::logistic(),
            lambda: None,
            a: EpsPower::pure(crate::rational::exp(-1, 1)),
            b: EpsPower::pure(crate::rational::exp(-1, 1)),
            center: None,
            y0: 1.0,
            replicas: 100,
            seed: 1,
            check: Check::Marginal { t_ref: 1.0, dt: 1e-2, em_replicas: 100, sde: None },
            thresholds: Thresholds::default(),
        };
        assert!(convergence_trend(&cfg, &[0.1]).is_err());
        assert!(convergence_trend(&cfg, &[0.05, 0.1]).is_err());
        let lim = derive_limit(&cfg).unwrap();
        assert_eq!(lim.drift, RealPoly::from_terms([(2, -1.0)]));
        assert_eq!(lim.diffusion, RealPoly::from_terms([(1, 2.0)]));
    }
}
