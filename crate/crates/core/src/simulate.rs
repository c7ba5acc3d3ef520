//! Density-dependent Markov chains, path rescaling and Euler–Maruyama.
//!
//! A chain with system size `N` jumps `X → X + Δ` at rate `N·q_Δ(X/N, λ)`.
//! Paths are stored on the density scale `x = X/N`. Every replica draws from
//! its own ChaCha8 stream: the generator is seeded with the run seed and
//! the stream id is the replica index, so replica `k` is the same whichever
//! thread runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::RealPoly;
use crate::poset::{Power, PowerSet};
use crate::rational::{self, Rational};

/// Identifier written into reports next to every seed.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng(seed_from_u64(seed), stream = replica index)";

pub const DEFAULT_MAX_STEPS: u64 = 100_000_000;

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    pub delta: i64,
    /// `q_Δ(x, λ)`.
    pub rate: PowerSet,
}

/// Jumps with λ left symbolic, as read from a model file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelTemplate {
    pub jumps: Vec<Jump>,
}

impl ModelTemplate {
    /// Birth at `(1+λ)x`, death at `x + x²`.
    pub fn logistic() -> Self {
        ModelTemplate {
            jumps: vec![
                Jump { delta: 1, rate: PowerSet::from_ints(&[(1, 0, 1), (1, 1, 1)]) },
                Jump { delta: -1, rate: PowerSet::from_ints(&[(1, 0, 1), (2, 0, 1)]) },
            ],
        }
    }

    pub fn instantiate(&self, n: u64, lambda: f64) -> Result<DdmcModel> {
        DdmcModel::new(self.jumps.clone(), n, lambda)
    }
}

/// `F = Σ Δ·q_Δ` and `G = Σ Δ²·q_Δ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateCharacteristics {
    #[serde(rename = "F")]
    pub f: PowerSet,
    #[serde(rename = "G")]
    pub g: PowerSet,
}

pub fn characteristics_from_rates(jumps: &[Jump]) -> Result<RateCharacteristics> {
    let weighted = |pow: u32| {
        PowerSet::from_sum(jumps.iter().flat_map(|j| {
            let w = rational::rat_int(j.delta.pow(pow));
            j.rate.iter().map(move |(p, c)| (*p, c * &w))
        }))
    };
    let f = weighted(1)?;
    let g = weighted(2)?;
    if f.is_empty() && g.is_empty() {
        return Err(Error::Degenerate);
    }
    Ok(RateCharacteristics { f, g })
}

/// `Σ c_k x^k` with λ already substituted.
#[derive(Clone, Debug)]
struct CompiledRate {
    terms: Vec<(i32, f64)>,
}

impl CompiledRate {
    fn new(rate: &PowerSet, lambda: f64) -> Self {
        let mut terms: Vec<(i32, f64)> = Vec::new();
        for (p, c) in rate.iter() {
            let v = rational::to_f64(c) * lambda.powi(p.lam as i32);
            match terms.iter_mut().find(|(k, _)| *k == p.x as i32) {
                Some(t) => t.1 += v,
                None => terms.push((p.x as i32, v)),
            }
        }
        CompiledRate { terms }
    }

    fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|(k, c)| c * x.powi(*k)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct DdmcModel {
    pub jumps: Vec<Jump>,
    pub n: u64,
    pub lambda: f64,
    compiled: Vec<(i64, CompiledRate)>,
}

impl DdmcModel {
    /// Checks rate non-negativity on `x ∈ [0, 2]`.
    pub fn new(jumps: Vec<Jump>, n: u64, lambda: f64) -> Result<Self> {
        if jumps.is_empty() {
            return Err(Error::Invalid("model needs at least one jump".into()));
        }
        if n == 0 {
            return Err(Error::Invalid("system size N must be positive".into()));
        }
        if let Some(j) = jumps.iter().find(|j| j.delta == 0) {
            return Err(Error::Invalid(format!("jump size 0 with rate {}", j.rate)));
        }
        let compiled: Vec<(i64, CompiledRate)> =
            jumps.iter().map(|j| (j.delta, CompiledRate::new(&j.rate, lambda))).collect();
        for k in 0..=200 {
            let x = 2.0 * k as f64 / 200.0;
            for (delta, r) in &compiled {
                let rate = r.eval(x);
                if rate < -1e-12 {
                    return Err(Error::NegativeRate { delta: *delta, x, rate });
                }
            }
        }
        Ok(DdmcModel { jumps, n, lambda, compiled })
    }

    pub fn characteristics(&self) -> Result<RateCharacteristics> {
        characteristics_from_rates(&self.jumps)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    TimeLimit,
    Absorbed,
    Exited,
}

/// Piecewise-constant (càdlàg) path.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SamplePath {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Horizon up to which the path is defined; absorbed paths stay put until it.
    pub end_time: f64,
    pub terminal: Terminal,
}

impl SamplePath {
    pub fn constant(value: f64, end_time: f64, terminal: Terminal) -> Self {
        SamplePath { times: vec![0.0], values: vec![value], end_time, terminal }
    }

    /// Value at the last recorded time `≤ t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&s| s <= t);
        self.values[k.saturating_sub(1)]
    }

    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("nonempty path")
    }

    fn push(&mut self, t: f64, v: f64) {
        match self.times.last() {
            Some(&last) if last >= t => *self.values.last_mut().expect("nonempty") = v,
            _ => {
                self.times.push(t);
                self.values.push(v);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Record {
    AllJumps,
    /// Values at `0, dt, 2dt, …`.
    Grid(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsaOptions {
    pub max_steps: u64,
    pub record: Record,
    /// Stop with [`Terminal::Exited`] once `x` exceeds this.
    pub x_max: Option<f64>,
}

impl Default for SsaOptions {
    fn default() -> Self {
        SsaOptions { max_steps: DEFAULT_MAX_STEPS, record: Record::AllJumps, x_max: None }
    }
}

fn initial_count(x0: f64, n: u64) -> Result<i64> {
    let xn = x0 * n as f64;
    let k = xn.round();
    if (xn - k).abs() > 1e-9 * xn.abs().max(1.0) || k < 0.0 {
        return Err(Error::Invalid(format!("x0·N = {xn} is not a non-negative integer")));
    }
    Ok(k as i64)
}

/// Direct-method exact simulation on `[0, t_end]`.
pub fn ssa_simulate(model: &DdmcModel, x0: f64, t_end: f64, seed: u64, replica: u64, opts: &SsaOptions) -> Result<SamplePath> {
    let mut count = initial_count(x0, model.n)?;
    let nf = model.n as f64;
    let mut rng = replica_rng(seed, replica);
    let mut path = SamplePath::constant(x0, t_end, Terminal::TimeLimit);
    let mut next_grid = 1usize;
    let mut rates = vec![0.0; model.compiled.len()];
    let mut t = 0.0;
    let mut steps = 0u64;
    let record_until = |path: &mut SamplePath, next_grid: &mut usize, until: f64, value: f64| {
        if let Record::Grid(dt) = opts.record {
            while (*next_grid as f64) * dt <= until {
                path.push(*next_grid as f64 * dt, value);
                *next_grid += 1;
            }
        }
    };
    loop {
        let x = count as f64 / nf;
        let mut total = 0.0;
        for (k, (delta, r)) in model.compiled.iter().enumerate() {
            let rate = nf * r.eval(x);
            if rate < -1e-12 * nf {
                return Err(Error::NegativeRate { delta: *delta, x, rate });
            }
            rates[k] = rate.max(0.0);
            total += rates[k];
        }
        if total <= 0.0 {
            record_until(&mut path, &mut next_grid, t_end, x);
            path.terminal = Terminal::Absorbed;
            return Ok(path);
        }
        let wait: f64 = rng.sample::<f64, _>(Exp1) / total;
        if t + wait > t_end {
            record_until(&mut path, &mut next_grid, t_end, x);
            return Ok(path);
        }
        t += wait;
        record_until(&mut path, &mut next_grid, t, x);
        let mut u = rng.gen::<f64>() * total;
        let mut pick = rates.len() - 1;
        for (k, r) in rates.iter().enumerate() {
            if u < *r {
                pick = k;
                break;
            }
            u -= r;
        }
        count += model.compiled[pick].0;
        let xn = count as f64 / nf;
        if opts.record == Record::AllJumps {
            path.push(t, xn);
        }
        steps += 1;
        if let Some(xm) = opts.x_max {
            if xn > xm {
                if let Record::Grid(_) = opts.record {
                    path.push(t, xn);
                }
                path.end_time = t;
                path.terminal = Terminal::Exited;
                return Ok(path);
            }
        }
        if steps >= opts.max_steps {
            return Err(Error::StateCap(opts.max_steps));
        }
    }
}

/// `Y(t) = a·(x(b·t) − center)`; times are divided by `b`.
pub fn rescale(path: &SamplePath, a: f64, b: f64, center: f64) -> SamplePath {
    SamplePath {
        times: path.times.iter().map(|t| t / b).collect(),
        values: path.values.iter().map(|v| a * (v - center)).collect(),
        end_time: path.end_time / b,
        terminal: path.terminal,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Boundary {
    /// Pin at the boundary value for the rest of the horizon.
    Absorb,
    /// End the path at the exit time.
    Stop,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
    pub policy: Boundary,
}

impl Domain {
    pub fn whole_line() -> Self {
        Domain { lo: f64::NEG_INFINITY, hi: f64::INFINITY, policy: Boundary::Stop }
    }

    pub fn half_line_absorbing() -> Self {
        Domain { lo: 0.0, hi: f64::INFINITY, policy: Boundary::Absorb }
    }
}

/// `dY = F̃(Y) dt + √G̃(Y) dB` on a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SdeModel {
    pub drift: RealPoly,
    pub diffusion: RealPoly,
    pub domain: Domain,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmPath {
    pub path: SamplePath,
    /// Steps where `G̃(Y) < 0` was clamped to 0.
    pub clamp_events: u64,
}

/// Euler–Maruyama driven by explicit Brownian increments `dw` (each
/// `N(0, dt)`); records every `stride`-th step and the last one.
pub fn em_integrate_with_increments(sde: &SdeModel, y0: f64, dt: f64, dw: &[f64], stride: usize) -> Result<EmPath> {
    let d = &sde.domain;
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::Invalid(format!("dt must be positive, got {dt}")));
    }
    if !(y0 >= d.lo && y0 <= d.hi) {
        return Err(Error::Domain(format!("y0 = {y0} outside [{}, {}]", d.lo, d.hi)));
    }
    let stride = stride.max(1);
    let steps = dw.len();
    let t_end = steps as f64 * dt;
    let mut path = SamplePath::constant(y0, t_end, Terminal::TimeLimit);
    let mut y = y0;
    let mut clamps = 0u64;
    for (k, w) in dw.iter().enumerate() {
        let g = sde.diffusion.eval(y);
        if g < 0.0 {
            clamps += 1;
        }
        y += sde.drift.eval(y) * dt + g.max(0.0).sqrt() * w;
        let t = (k + 1) as f64 * dt;
        if y < d.lo || y > d.hi {
            y = y.clamp(d.lo, d.hi);
            path.push(t, y);
            match d.policy {
                Boundary::Absorb => path.terminal = Terminal::Absorbed,
                Boundary::Stop => {
                    path.end_time = t;
                    path.terminal = Terminal::Exited;
                }
            }
            return Ok(EmPath { path, clamp_events: clamps });
        }
        if (k + 1) % stride == 0 || k + 1 == steps {
            path.push(t, y);
        }
    }
    Ok(EmPath { path, clamp_events: clamps })
}

pub fn em_step_count(t_end: f64, dt: f64) -> usize {
    (t_end / dt).round() as usize
}

/// Euler–Maruyama on `[0, t_end]` with Gaussian increments from the replica's stream.
pub fn em_integrate(sde: &SdeModel, y0: f64, t_end: f64, dt: f64, seed: u64, replica: u64, stride: usize) -> Result<EmPath> {
    let mut rng = replica_rng(seed, replica);
    let sq = dt.sqrt();
    let dw: Vec<f64> = (0..em_step_count(t_end, dt)).map(|_| sq * rng.sample::<f64, _>(StandardNormal)).collect();
    em_integrate_with_increments(sde, y0, dt, &dw, stride)
}

/// Maps `f(k)` over `0..n` in replica order, in parallel when enabled.
pub fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Sync + Send) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

pub fn ssa_ensemble(model: &DdmcModel, x0: f64, t_end: f64, seed: u64, replicas: usize, opts: &SsaOptions) -> Result<Vec<SamplePath>> {
    par_map(replicas, |k| ssa_simulate(model, x0, t_end, seed, k as u64, opts)).into_iter().collect()
}

/// Paths plus the total clamp count.
pub fn em_ensemble(sde: &SdeModel, y0: f64, t_end: f64, dt: f64, seed: u64, replicas: usize, stride: usize) -> Result<(Vec<SamplePath>, u64)> {
    let runs: Vec<EmPath> = par_map(replicas, |k| em_integrate(sde, y0, t_end, dt, seed, k as u64, stride))
        .into_iter()
        .collect::<Result<_>>()?;
    let clamps = runs.iter().map(|r| r.clamp_events).sum();
    Ok((runs.into_iter().map(|r| r.path).collect(), clamps))
}

/// Coefficients of `q(x, λ)` at fixed λ, for display.
pub fn rate_at(rate: &PowerSet, lambda: &Rational) -> PowerSet {
    PowerSet::from_sum(
        rate.iter().map(|(p, c)| (Power::new(p.x, 0), c * rational::int_pow(lambda, i64::from(p.lam)))),
    )
    .expect("powers within cap")
}
