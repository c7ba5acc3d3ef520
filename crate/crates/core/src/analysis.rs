//! Drift/diffusion characteristic pairs and their limit scales.
//!
//! For `F = Σ c_α x^{α₁}λ^{α₂}` and `G = Σ d_β x^{β₁}λ^{β₂}` with envelopes
//! `A`, `B` and joined slope set `M = M(A) ∪ M(B)`, every sector
//! `λ^{m_{i+1}} ≤ x ≤ λ^{m_i}` has a single drift pivot `α(i)` and diffusion
//! pivot `β(i)`. Their difference `δ(i)` drives everything below: the
//! drift–diffusion ratio `r = x^{1+δ₁}λ^{δ₂}`, the curve `r = ε²`, and the
//! range (pure diffusive, dd scale, deterministic) of a rescaling.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::asymptotics::{self, EpsPower, RegionIndex};
use crate::error::{Error, Result};
use crate::poly::{Poly, RealPoly};
use crate::poset::{self, Power, PowerSet, Slope};
use crate::rational::{self, Exponent, Rational};

/// `(δ₁, δ₂) = α(i) − β(i)`.
pub type Delta = (i64, i64);

#[derive(Clone, Debug, PartialEq)]
pub struct CharacteristicPair {
    pub f: PowerSet,
    pub g: PowerSet,
    /// `env(F)`.
    pub a: PowerSet,
    /// `env(G)`.
    pub b: PowerSet,
    /// `M(A) ∪ M(B)`, ascending.
    pub slopes: Vec<Slope>,
    pub alpha: Vec<Power>,
    pub beta: Vec<Power>,
    pub delta: Vec<Delta>,
}

impl CharacteristicPair {
    /// Fails on an empty `F` or `G`, or when `G` is negative somewhere on the
    /// log grid `[1e-6, 1e-1]²`.
    pub fn new(f: PowerSet, g: PowerSet) -> Result<Self> {
        if f.is_empty() || g.is_empty() {
            return Err(Error::EmptySet);
        }
        if let Some((x, lam)) = negative_diffusion_point(&g) {
            return Err(Error::NegativeDiffusion { x, lam });
        }
        let a = poset::envelope(&f);
        let b = poset::envelope(&g);
        let mut slopes = poset::pivot_slopes(&a)?;
        slopes.extend(poset::pivot_slopes(&b)?);
        slopes.sort();
        slopes.dedup();
        let alpha = poset::interval_pivots(&a, &slopes)?;
        let beta = poset::interval_pivots(&b, &slopes)?;
        let delta = alpha
            .iter()
            .zip(&beta)
            .map(|(p, q)| (i64::from(p.x) - i64::from(q.x), i64::from(p.lam) - i64::from(q.lam)))
            .collect();
        Ok(CharacteristicPair { f, g, a, b, slopes, alpha, beta, delta })
    }

    /// Number of sectors minus one.
    pub fn n(&self) -> usize {
        self.slopes.len()
    }

    pub fn upright(&self) -> bool {
        self.alpha.iter().zip(&self.beta).all(|(p, q)| p.x >= q.x)
    }

    /// `m_i + s(A, m_i) − s(B, m_i)` for `i = 1..=n`.
    fn crossing_weight(&self, i: usize) -> Exponent {
        let m = self.slopes[i - 1];
        m + poset::support_value(&self.a, m).expect("nonempty") - poset::support_value(&self.b, m).expect("nonempty")
    }
}

/// `(F, G)` for the process on another quadrant. Flipping `x` negates the
/// drift as a whole as well as the odd-`x` terms.
pub fn reflect_quadrant(f: &PowerSet, g: &PowerSet, flip_x: bool, flip_lam: bool) -> (PowerSet, PowerSet) {
    let sign = |p: &Power| {
        let mut s = 1i64;
        if flip_x && p.x % 2 == 1 {
            s = -s;
        }
        if flip_lam && p.lam % 2 == 1 {
            s = -s;
        }
        s
    };
    let drift_sign = if flip_x { -1 } else { 1 };
    let f2 = f.map_coeffs(|p, c| c * rational::rat_int(sign(p) * drift_sign));
    let g2 = g.map_coeffs(|p, c| c * rational::rat_int(sign(p)));
    (f2, g2)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp()).collect()
}

/// First grid point where `G < 0` beyond rounding.
pub fn negative_diffusion_point(g: &PowerSet) -> Option<(f64, f64)> {
    let grid = log_grid(1e-6, 1e-1, 26);
    for &x in &grid {
        for &lam in &grid {
            let val = g.eval(x, lam);
            let mag: f64 = g
                .iter()
                .map(|(p, c)| rational::to_f64(c).abs() * x.powi(p.x as i32) * lam.powi(p.lam as i32))
                .sum();
            if val < -1e-9 * mag {
                return Some((x, lam));
            }
        }
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Stochasticity {
    Holds,
    NecessaryOnly,
    Fails,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrongStochasticity {
    pub verdict: Stochasticity,
    /// Pivots of `A` outside `S(B)`.
    pub failing_pivots: Vec<Power>,
    /// `env(B) ∖ piv(B)`.
    pub env_minus_piv_b: Vec<Power>,
    pub diffusion_nonnegative: bool,
}

/// `piv(A) ⊂ S(B)` is necessary for `F = O(G)`; together with
/// `piv(B) = env(B)` and `G ≥ 0` it is sufficient.
pub fn check_strong_stochasticity(f: &PowerSet, g: &PowerSet) -> Result<StrongStochasticity> {
    if f.is_empty() || g.is_empty() {
        return Err(Error::EmptySet);
    }
    let piv_a = poset::pivot_structure(f)?.pivots;
    let mut failing = Vec::new();
    for p in &piv_a {
        if !poset::contains_in_s(g, p)? {
            failing.push(*p);
        }
    }
    let piv_b = poset::pivot_structure(g)?.pivots;
    let env_minus_piv_b: Vec<Power> = poset::envelope(g).powers().filter(|p| !piv_b.contains(p)).collect();
    let diffusion_nonnegative = negative_diffusion_point(g).is_none();
    let verdict = if !failing.is_empty() {
        Stochasticity::Fails
    } else if env_minus_piv_b.is_empty() && diffusion_nonnegative {
        Stochasticity::Holds
    } else {
        Stochasticity::NecessaryOnly
    };
    Ok(StrongStochasticity { verdict, failing_pivots: failing, env_minus_piv_b, diffusion_nonnegative })
}

/// Index `i` of the sector `λ^{m_{i+1}} ≤ x ≤ λ^{m_i}` holding `(x, λ)`.
pub fn sector_of(slopes: &[Slope], x: f64, lam: f64) -> usize {
    slopes.iter().filter(|&&m| x <= lam.powf(rational::exp_to_f64(m))).count()
}

/// `r(x, λ) = x^{1+δ₁(i)} λ^{δ₂(i)}` on sector `i`.
pub fn dd_ratio(cp: &CharacteristicPair, x: f64, lam: f64) -> Result<f64> {
    let inside = |v: f64| v > 0.0 && v <= 1.0;
    if !inside(x) || !inside(lam) {
        return Err(Error::Domain(format!("(x, λ) = ({x}, {lam}) outside (0,1]²")));
    }
    let (d1, d2) = cp.delta[sector_of(&cp.slopes, x, lam)];
    Ok(x.powi((1 + d1) as i32) * lam.powi(d2 as i32))
}

/// A λ-endpoint of a dd-curve piece.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LambdaEnd {
    Zero,
    /// `λ = ε^ν`.
    Eps(Exponent),
    One,
}

impl LambdaEnd {
    pub fn value(&self, eps: f64) -> f64 {
        match self {
            LambdaEnd::Zero => 0.0,
            LambdaEnd::One => 1.0,
            LambdaEnd::Eps(nu) => eps.powf(rational::exp_to_f64(*nu)),
        }
    }
}

impl fmt::Display for LambdaEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaEnd::Zero => write!(f, "0"),
            LambdaEnd::One => write!(f, "1"),
            LambdaEnd::Eps(nu) => write!(f, "ε^{nu}"),
        }
    }
}

impl Serialize for LambdaEnd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `x = ε^{eps_exp}·λ^{lam_exp}`, or the vertical segment `λ = ε^{nu}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PieceShape {
    Graph {
        #[serde(serialize_with = "rational::ser_exponent")]
        eps_exp: Exponent,
        #[serde(serialize_with = "rational::ser_exponent")]
        lam_exp: Exponent,
    },
    Vertical {
        #[serde(serialize_with = "rational::ser_exponent")]
        nu: Exponent,
    },
}

/// How λ moves along the arc as `x` decreases.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Direction {
    Increasing,
    /// The arc folds back in λ.
    Decreasing,
    Vertical,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DdPiece {
    pub index: usize,
    pub lam_from: LambdaEnd,
    pub lam_to: LambdaEnd,
    pub delta: Delta,
    pub shape: PieceShape,
    pub direction: Direction,
}

impl DdPiece {
    /// `x` on the piece at `λ`; `None` on vertical pieces.
    pub fn x_at(&self, eps: f64, lam: f64) -> Option<f64> {
        match self.shape {
            PieceShape::Graph { eps_exp, lam_exp } => {
                Some(eps.powf(rational::exp_to_f64(eps_exp)) * lam.powf(rational::exp_to_f64(lam_exp)))
            }
            PieceShape::Vertical { .. } => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DdCurve {
    pub pieces: Vec<DdPiece>,
    /// `ν_i` for `i = 1..=n`; `λ_i(ε) = ε^{ν_i}`.
    #[serde(serialize_with = "poset::ser_slopes")]
    pub breakpoints: Vec<Exponent>,
    pub upright: bool,
}

impl DdCurve {
    /// Pieces along which λ runs backwards, as `(index, λ-range)`.
    pub fn fold_intervals(&self) -> Vec<(usize, LambdaEnd, LambdaEnd)> {
        self.pieces
            .iter()
            .filter(|p| p.direction == Direction::Decreasing)
            .map(|p| (p.index, p.lam_to, p.lam_from))
            .collect()
    }

    /// `(λ, x, piece)` rows, `per_piece` log-spaced points on each piece.
    /// The first piece starts at `λ = lam_floor` instead of 0.
    pub fn sample(&self, eps: f64, per_piece: usize, lam_floor: f64) -> Vec<(f64, f64, usize)> {
        let per_piece = per_piece.max(2);
        let mut rows = Vec::new();
        for piece in &self.pieces {
            let lo = match piece.lam_from {
                LambdaEnd::Zero => lam_floor.min(0.5 * piece.lam_to.value(eps)),
                e => e.value(eps),
            };
            let hi = piece.lam_to.value(eps);
            match piece.shape {
                PieceShape::Graph { .. } => {
                    for lam in log_grid(lo, hi, per_piece) {
                        rows.push((lam, piece.x_at(eps, lam).expect("graph"), piece.index));
                    }
                }
                PieceShape::Vertical { nu } => {
                    let lam = eps.powf(rational::exp_to_f64(nu));
                    let x_hi = self.x_at_start(piece.index, eps);
                    let x_lo = self.x_at_start(piece.index + 1, eps);
                    for x in log_grid(x_hi, x_lo, per_piece) {
                        rows.push((lam, x, piece.index));
                    }
                }
            }
        }
        rows
    }

    /// `x` where piece `i` begins (the end of piece `i−1`).
    fn x_at_start(&self, i: usize, eps: f64) -> f64 {
        let neighbour = if i < self.pieces.len() { i } else { self.pieces.len() - 1 };
        let probe = |p: &DdPiece, end: LambdaEnd| p.x_at(eps, end.value(eps));
        if i < self.pieces.len() {
            if let Some(x) = probe(&self.pieces[i], self.pieces[i].lam_from) {
                return x;
            }
        }
        if i > 0 {
            if let Some(x) = probe(&self.pieces[i - 1], self.pieces[i - 1].lam_to) {
                return x;
            }
        }
        probe(&self.pieces[neighbour], self.pieces[neighbour].lam_to).unwrap_or(eps)
    }
}

/// The level set `r(x, λ) = ε²` as a chain of monomial pieces.
pub fn dd_curve(cp: &CharacteristicPair) -> Result<DdCurve> {
    let ss = check_strong_stochasticity(&cp.f, &cp.g)?;
    if let Some(p) = ss.failing_pivots.first() {
        return Err(Error::NotStronglyStochastic(*p));
    }
    if !cp.a.powers().any(|p| p.lam == 0) {
        return Err(Error::Hypothesis("drift has no pure-x term (α₁, 0)".into()));
    }
    let n = cp.n();
    let breakpoints: Vec<Exponent> = (1..=n).map(|i| Exponent::from(2) / cp.crossing_weight(i)).collect();
    let end = |k: usize| match k {
        0 => LambdaEnd::Zero,
        k if k == n + 1 => LambdaEnd::One,
        k => LambdaEnd::Eps(breakpoints[k - 1]),
    };
    let pieces = cp
        .delta
        .iter()
        .enumerate()
        .map(|(i, &(d1, d2))| {
            let w = 1 + d1;
            let (shape, direction) = if w == 0 {
                (PieceShape::Vertical { nu: Exponent::new(2, d2) }, Direction::Vertical)
            } else {
                let shape = PieceShape::Graph { eps_exp: Exponent::new(2, w), lam_exp: Exponent::new(-d2, w) };
                (shape, if w > 0 { Direction::Increasing } else { Direction::Decreasing })
            };
            DdPiece { index: i, lam_from: end(i), lam_to: end(i + 1), delta: (d1, d2), shape, direction }
        })
        .collect();
    Ok(DdCurve { pieces, breakpoints, upright: cp.upright() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LimitRange {
    PureDiffusive,
    DdScale,
    Deterministic,
}

/// Limit `dY = F̃ dt + √G̃ dB` of `Y = a(x(b·t) − x⋆)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitClassification {
    pub range: LimitRange,
    pub region: Option<RegionIndex>,
    pub drift: RealPoly,
    pub diffusion: RealPoly,
    /// Exact `(F̃, G̃)` when every coefficient is rational.
    pub exact: Option<(Poly, Poly)>,
    pub time_scale: EpsPower,
}

impl Serialize for LimitClassification {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("LimitClassification", 7)?;
        st.serialize_field("range", &self.range)?;
        st.serialize_field("region", &self.region)?;
        let (fs, gs) = match &self.exact {
            Some((f, g)) => (f.to_string(), g.to_string()),
            None => (self.drift.to_string(), self.diffusion.to_string()),
        };
        st.serialize_field("F_limit", &fs)?;
        st.serialize_field("G_limit", &gs)?;
        st.serialize_field("F_limit_terms", self.drift.terms())?;
        st.serialize_field("G_limit_terms", self.diffusion.terms())?;
        st.serialize_field("time_scale", &self.time_scale)?;
        st.end()
    }
}

fn range_from(r_exp: Exponent) -> LimitRange {
    use std::cmp::Ordering::*;
    match r_exp.cmp(&Exponent::from(2)) {
        Greater => LimitRange::PureDiffusive,
        Equal => LimitRange::DdScale,
        Less => LimitRange::Deterministic,
    }
}

/// Checks `b` against the visible scale of `range`; `e_f`, `e_g` are the
/// ε-exponents of the rescaled drift and diffusion prefactors.
fn validate_time_scale(range: LimitRange, b: &EpsPower, e_f: Exponent, e_g: Exponent) -> Result<()> {
    let ok = match range {
        LimitRange::PureDiffusive => e_g.is_zero(),
        LimitRange::DdScale | LimitRange::Deterministic => e_f.is_zero(),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongTimeScale { got: b.exp, drift: b.exp - e_f, diffusion: b.exp - e_g })
    }
}

fn require_large(a: &EpsPower) -> Result<Exponent> {
    if a.exp >= Exponent::zero() {
        return Err(Error::UnstableScale(format!("a = {a} does not tend to ∞")));
    }
    Ok(-a.exp)
}

/// Isotropic case: `F(x⋆+x) ∼ Q(x)`, `G(x⋆+x) ∼ V(x)` with `Q`, `V`
/// homogeneous of degrees `alpha`, `beta`.
pub fn classify_isotropic(alpha: u32, beta: u32, a: &EpsPower, b: &EpsPower, q: &Poly, v: &Poly) -> Result<LimitClassification> {
    let w = 1 + i64::from(alpha) - i64::from(beta);
    if w <= 0 {
        return Err(Error::Sign(format!("1 + α − β = {w} ≤ 0: diffusion cannot dominate as a → ∞")));
    }
    let p = require_large(a)?;
    let range = range_from(p * w);
    // h = a^{1−α} b and ℓ = ε² a^{2−β} b.
    let one_minus_alpha = 1 - i64::from(alpha);
    let two_minus_beta = 2 - i64::from(beta);
    let e_f = a.exp * one_minus_alpha + b.exp;
    let e_g = Exponent::from(2) + a.exp * two_minus_beta + b.exp;
    validate_time_scale(range, b, e_f, e_g)?;
    let h = rational::int_pow(&a.coeff, one_minus_alpha) * &b.coeff;
    let l = rational::int_pow(&a.coeff, two_minus_beta) * &b.coeff;
    let f = if e_f.is_zero() { q.scale(&h) } else { Poly::zero() };
    let g = if e_g.is_zero() { v.scale(&l) } else { Poly::zero() };
    Ok(LimitClassification { range, region: None, drift: f.to_real(), diffusion: g.to_real(), exact: Some((f, g)), time_scale: b.clone() })
}

/// General case around `x = 0`: `1/a` and `λ` are ε-powers (`lam = None`
/// is `λ ≡ 0`).
pub fn classify_parametrized(cp: &CharacteristicPair, a: &EpsPower, b: &EpsPower, lam: Option<&EpsPower>) -> Result<LimitClassification> {
    let p = require_large(a)?;
    let ss = check_strong_stochasticity(&cp.f, &cp.g)?;
    if let Some(piv) = ss.failing_pivots.first() {
        return Err(Error::NotStronglyStochastic(*piv));
    }
    let inv_a = a.recip();
    let region = asymptotics::classify_region(&inv_a, lam, &cp.slopes)?;
    let q = lam.map(|l| l.exp).unwrap_or_else(Exponent::zero);
    let i = region.sector();
    if lam.is_none() && (cp.alpha[0].lam != 0 || cp.beta[0].lam != 0) {
        return Err(Error::Hypothesis("λ ≡ 0 needs pure-x leading terms in both F and G".into()));
    }
    let (d1, d2) = cp.delta[i];
    let r_exp = p * (1 + d1) + q * d2;
    let range = range_from(r_exp);

    let dom_f = asymptotics::dominant_terms(&cp.a, &region, &cp.slopes)?;
    let dom_g = asymptotics::dominant_terms(&cp.b, &region, &cp.slopes)?;
    let al = dom_f.powers().next().expect("nonempty");
    let be = dom_g.powers().next().expect("nonempty");
    // a·b·F(x/a, λ) and ε²a²b·G(x/a, λ), prefactor exponents per term.
    let e_f = b.exp + p * (i64::from(al.x) - 1) + q * i64::from(al.lam);
    let e_g = Exponent::from(2) + b.exp + p * (i64::from(be.x) - 2) + q * i64::from(be.lam);
    validate_time_scale(range, b, e_f, e_g)?;

    let lam_coeff = lam.map(|l| l.coeff.clone()).unwrap_or_else(Rational::one);
    let term = |c: &Rational, pw: &Power, shift: i64| -> Rational {
        c * rational::int_pow(&inv_a.coeff, i64::from(pw.x) - shift) * &b.coeff * rational::int_pow(&lam_coeff, i64::from(pw.lam))
    };
    let f = if e_f.is_zero() { Poly::from_terms(dom_f.iter().map(|(pw, c)| (pw.x, term(c, pw, 1)))) } else { Poly::zero() };
    let g = if e_g.is_zero() { Poly::from_terms(dom_g.iter().map(|(pw, c)| (pw.x, term(c, pw, 2)))) } else { Poly::zero() };
    Ok(LimitClassification { range, region: Some(region), drift: f.to_real(), diffusion: g.to_real(), exact: Some((f, g)), time_scale: b.clone() })
}

/// The branch `x⋆(λ) ∼ z⋆·λ^{m⋆}` of zeros of `F`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BranchData {
    /// 1-based position of `m⋆` in the joined slope set.
    pub index: usize,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub m_star: Slope,
    pub z_star: f64,
    #[serde(serialize_with = "ser_opt_rational")]
    pub z_star_exact: Option<Rational>,
    #[serde(rename = "dFdz")]
    pub dfdz: f64,
    #[serde(rename = "G_star")]
    pub g_star: f64,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub gamma_star: Exponent,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub nu_star: Exponent,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub s_a: Exponent,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub s_b: Exponent,
}

fn ser_opt_rational<S: serde::Serializer>(q: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match q {
        Some(q) => s.serialize_some(&q.to_string()),
        None => s.serialize_none(),
    }
}

pub const Z_MAX: f64 = 100.0;

/// Smallest simple positive root of `P` in `(0, z_max]`, exact when rational.
pub fn smallest_positive_simple_root(p: &Poly, z_max: f64) -> Option<(f64, Option<Rational>)> {
    let rational_roots = positive_rational_roots(p);
    let pr = p.to_real();
    let dpr = pr.derivative();
    let dp = p.derivative();
    let grid = log_grid(1e-6, z_max, 20_001);
    let mut numeric = None;
    for w in grid.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let (flo, fhi) = (pr.eval(lo), pr.eval(hi));
        if flo == 0.0 {
            if dpr.eval(lo).abs() > 1e-9 {
                numeric = Some(lo);
                break;
            }
            continue;
        }
        if flo.signum() != fhi.signum() && fhi != 0.0 {
            let root = bisect(&pr, lo, hi);
            if dpr.eval(root).abs() > 1e-9 {
                numeric = Some(root);
                break;
            }
        }
    }
    let exact = rational_roots
        .into_iter()
        .filter(|r| !dp.eval(r).is_zero())
        .find(|r| numeric.is_none_or(|z| (rational::to_f64(r) - z).abs() <= 1e-9 * z.max(1.0)));
    match (numeric, exact) {
        (_, Some(r)) => Some((rational::to_f64(&r), Some(r))),
        (Some(z), None) => Some((z, None)),
        (None, None) => None,
    }
}

fn bisect(p: &RealPoly, mut lo: f64, mut hi: f64) -> f64 {
    let flo = p.eval(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = p.eval(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Positive rational roots, ascending, via the rational-root theorem; empty
/// when the integer coefficients are too large to factor by trial division.
fn positive_rational_roots(p: &Poly) -> Vec<Rational> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let Some(low) = p.terms().next().map(|(k, _)| k) else {
        return Vec::new();
    };
    let lcm = p.terms().fold(BigInt::one(), |l, (_, c)| l.lcm(c.denom()));
    let ints: Vec<(u32, BigInt)> = p.terms().map(|(k, c)| (k - low, (c * Rational::from_integer(lcm.clone())).to_integer())).collect();
    let a0 = ints.first().map(|(_, c)| c.abs()).unwrap_or_default();
    let an = ints.last().map(|(_, c)| c.abs()).unwrap_or_default();
    let (Some(a0), Some(an)) = (a0.to_u64(), an.to_u64()) else {
        return Vec::new();
    };
    if a0 > 1_000_000_000_000 || an > 1_000_000_000_000 {
        return Vec::new();
    }
    let mut roots = Vec::new();
    for num in divisors(a0) {
        for den in divisors(an) {
            let r = rational::rat(num as i64, den as i64);
            if p.eval(&r).is_zero() {
                roots.push(r);
            }
        }
    }
    roots.sort();
    roots.dedup();
    roots
}

fn divisors(n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out
}

/// Branch data at `m⋆ = slopes[i_star − 1]`.
pub fn equilibrium_branch(cp: &CharacteristicPair, i_star: usize) -> Result<BranchData> {
    if i_star == 0 || i_star > cp.n() {
        return Err(Error::BranchIndex { index: i_star, n: cp.n() });
    }
    let m = cp.slopes[i_star - 1];
    let level = poset::active_set(&cp.a, m)?;
    let poly = Poly::from_terms(level.iter().map(|(p, c)| (p.x, c.clone())));
    let (z, z_exact) = smallest_positive_simple_root(&poly, Z_MAX).ok_or(Error::NoPositiveSimpleRoot(m))?;
    let dfdz = match &z_exact {
        Some(q) => rational::to_f64(&poly.derivative().eval(q)),
        None => poly.to_real().derivative().eval(z),
    };
    let g_level = poset::active_set(&cp.b, m)?;
    let g_star: f64 = g_level.iter().map(|(p, c)| rational::to_f64(c) * z.powi(p.x as i32)).sum();
    if g_star <= 1e-12 {
        return Err(Error::ZeroDiffusionAtBranch);
    }
    let s_a = poset::support_value(&cp.a, m)?;
    let s_b = poset::support_value(&cp.b, m)?;
    Ok(BranchData {
        index: i_star,
        m_star: m,
        z_star: z,
        z_star_exact: z_exact,
        dfdz,
        g_star,
        gamma_star: (m + s_b - s_a) / 2,
        nu_star: Exponent::from(2) / (m + s_a - s_b),
        s_a,
        s_b,
    })
}

/// First slope index whose level polynomial has a simple positive root.
pub fn find_branch(cp: &CharacteristicPair) -> Option<BranchData> {
    (1..=cp.n()).find_map(|i| equilibrium_branch(cp, i).ok())
}

/// Fluctuations around `x⋆(λ)` on the scale `1/a ≪ x⋆(λ)`: an OU-type
/// limit with `F̃ = h·∂_zF⋆·x` and `G̃ = ℓ·G⋆`.
pub fn classify_branch(cp: &CharacteristicPair, br: &BranchData, a: &EpsPower, b: &EpsPower, lam: &EpsPower) -> Result<LimitClassification> {
    let p = require_large(a)?;
    let q = lam.exp;
    if q <= Exponent::zero() {
        return Err(Error::UnstableScale(format!("λ = {lam} does not tend to 0")));
    }
    if p <= br.m_star * q {
        return Err(Error::BranchValidity(format!(
            "1/a = ε^{p} is not ≪ x⋆(λ) = ε^{}",
            br.m_star * q
        )));
    }
    if !cp.slopes.contains(&br.m_star) {
        return Err(Error::Invalid("branch does not belong to this pair".into()));
    }
    use std::cmp::Ordering::*;
    let range = match p.cmp(&(Exponent::one() + q * br.gamma_star)) {
        Greater => LimitRange::PureDiffusive,
        Equal => LimitRange::DdScale,
        Less => LimitRange::Deterministic,
    };
    let e_f = b.exp + q * (br.s_a - br.m_star);
    let e_g = Exponent::from(2) - p * 2 + b.exp + q * br.s_b;
    validate_time_scale(range, b, e_f, e_g)?;
    let inv_a = a.recip();
    let h_exact = rational::rational_pow(&lam.coeff, br.s_a - br.m_star).map(|c| c * &b.coeff);
    let l_exact = rational::rational_pow(&lam.coeff, br.s_b).map(|c| c * &b.coeff * rational::int_pow(&inv_a.coeff, -2));
    let h = rational::to_f64(&b.coeff) * rational::pow_f64(&lam.coeff, br.s_a - br.m_star);
    let l = rational::to_f64(&b.coeff) * rational::pow_f64(&lam.coeff, br.s_b) / rational::to_f64(&inv_a.coeff).powi(2);
    let drift = if e_f.is_zero() { RealPoly::from_terms([(1, h * br.dfdz)]) } else { RealPoly::zero() };
    let diffusion = if e_g.is_zero() { RealPoly::from_terms([(0, l * br.g_star)]) } else { RealPoly::zero() };
    // Exact only when z⋆ and both prefactors are rational.
    let exact = match (&br.z_star_exact, h_exact, l_exact) {
        (Some(z), Some(h), Some(l)) => {
            let level = poset::active_set(&cp.a, br.m_star)?;
            let poly = Poly::from_terms(level.iter().map(|(pw, c)| (pw.x, c.clone())));
            let dfdz = poly.derivative().eval(z);
            let g_level = poset::active_set(&cp.b, br.m_star)?;
            let g_star = g_level.iter().fold(Rational::zero(), |acc, (pw, c)| acc + c * rational::int_pow(z, i64::from(pw.x)));
            let f = if e_f.is_zero() { Poly::monomial(1, h * dfdz) } else { Poly::zero() };
            let g = if e_g.is_zero() { Poly::monomial(0, l * g_star) } else { Poly::zero() };
            Some((f, g))
        }
        _ => None,
    };
    Ok(LimitClassification { range, region: None, drift, diffusion, exact, time_scale: b.clone() })
}
