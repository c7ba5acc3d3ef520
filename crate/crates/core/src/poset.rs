//! Finite subsets of ℕ² with rational coefficients, ordered componentwise.
//!
//! For a slope `m > 0` the support value of a power is `s(α, m) = m·α₁ + α₂`.
//! The active set `A(m)` collects the powers of `A` minimising it; the
//! envelope is the union of all active sets, and the pivot slopes are the
//! finitely many `m` where more than one power is active. Everything here is
//! exact: slopes are ratios of small integers.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Exponent, Rational};

pub const DEFAULT_MAX_POWER: u32 = 32;

/// Slopes are positive finite rationals; 0 and ∞ appear only as the implicit
/// outer ends `m₀`, `m_{n+1}` of a sorted slope list.
pub type Slope = Exponent;

/// An exponent pair: `x` is the power of the state, `lam` the power of λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Power {
    pub x: u32,
    pub lam: u32,
}

impl Power {
    pub const fn new(x: u32, lam: u32) -> Self {
        Power { x, lam }
    }

    /// Componentwise `self ≤ other`.
    pub fn le(&self, other: &Power) -> bool {
        self.x <= other.x && self.lam <= other.lam
    }

    pub fn comparable(&self, other: &Power) -> bool {
        self.le(other) || other.le(self)
    }

    /// `s(α, m) = m·α₁ + α₂`.
    pub fn support(&self, m: Slope) -> Exponent {
        m * i64::from(self.x) + i64::from(self.lam)
    }
}

impl fmt::Display for Power {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.lam)
    }
}

impl Serialize for Power {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.x, self.lam].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Power {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [x, lam] = <[u32; 2]>::deserialize(d)?;
        Ok(Power { x, lam })
    }
}

/// Bivariate polynomial `Σ c_α x^{α₁} λ^{α₂}` with nonzero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PowerSet {
    terms: BTreeMap<Power, Rational>,
}

impl PowerSet {
    pub fn empty() -> Self {
        PowerSet::default()
    }

    /// Rejects zero coefficients, duplicates and powers above [`DEFAULT_MAX_POWER`].
    pub fn new(terms: impl IntoIterator<Item = (Power, Rational)>) -> Result<Self> {
        Self::with_cap(terms, DEFAULT_MAX_POWER)
    }

    pub fn with_cap(terms: impl IntoIterator<Item = (Power, Rational)>, cap: u32) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (p, c) in terms {
            check_cap(p, cap)?;
            if c.is_zero() {
                return Err(Error::ZeroCoefficient(p));
            }
            if map.insert(p, c).is_some() {
                return Err(Error::DuplicatePower(p));
            }
        }
        Ok(PowerSet { terms: map })
    }

    /// Sums repeated powers and drops terms that cancel.
    pub fn from_sum(terms: impl IntoIterator<Item = (Power, Rational)>) -> Result<Self> {
        let mut map: BTreeMap<Power, Rational> = BTreeMap::new();
        for (p, c) in terms {
            check_cap(p, DEFAULT_MAX_POWER)?;
            *map.entry(p).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Ok(PowerSet { terms: map })
    }

    /// Literal constructor for `(x, λ, integer coefficient)` triples.
    ///
    /// # Panics
    /// On a zero coefficient, a duplicate power or a power above the cap.
    pub fn from_ints(terms: &[(u32, u32, i64)]) -> Self {
        Self::new(terms.iter().map(|&(x, l, c)| (Power::new(x, l), rational::rat_int(c))))
            .expect("valid power set literal")
    }

    /// Unit coefficients on the given powers (duplicates collapse).
    ///
    /// # Panics
    /// On a power above the cap.
    pub fn from_powers(powers: &[(u32, u32)]) -> Self {
        let mut map = BTreeMap::new();
        for &(x, l) in powers {
            let p = Power::new(x, l);
            check_cap(p, DEFAULT_MAX_POWER).expect("power within cap");
            map.insert(p, rational::rat_int(1));
        }
        PowerSet { terms: map }
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn contains(&self, p: &Power) -> bool {
        self.terms.contains_key(p)
    }

    pub fn coeff(&self, p: &Power) -> Option<&Rational> {
        self.terms.get(p)
    }

    pub fn powers(&self) -> impl Iterator<Item = Power> + '_ {
        self.terms.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Power, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn restrict(&self, keep: impl Fn(&Power) -> bool) -> PowerSet {
        PowerSet {
            terms: self
                .terms
                .iter()
                .filter(|(p, _)| keep(p))
                .map(|(p, c)| (*p, c.clone()))
                .collect(),
        }
    }

    pub fn map_coeffs(&self, f: impl Fn(&Power, &Rational) -> Rational) -> PowerSet {
        PowerSet {
            terms: self
                .terms
                .iter()
                .map(|(p, c)| (*p, f(p, c)))
                .filter(|(_, c)| !c.is_zero())
                .collect(),
        }
    }

    pub fn eval(&self, x: f64, lam: f64) -> f64 {
        self.terms
            .iter()
            .map(|(p, c)| rational::to_f64(c) * x.powi(p.x as i32) * lam.powi(p.lam as i32))
            .sum()
    }

    pub fn max_power(&self) -> u32 {
        self.terms.keys().map(|p| p.x.max(p.lam)).max().unwrap_or(0)
    }

    pub fn has_negative_coeff(&self) -> bool {
        self.terms.values().any(|c| c.is_negative())
    }
}

impl fmt::Display for PowerSet {
    /// Polynomial notation in `x` and `λ`, e.g. `-x^2 + λx`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // Ascending λ power, then descending x power.
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by_key(|(p, _)| (p.lam, std::cmp::Reverse(p.x)));
        for (k, (p, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (k, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let one = mag == rational::rat_int(1);
            let monomial = monomial_str(p);
            if monomial.is_empty() {
                write!(f, "{mag}")?;
            } else if one {
                write!(f, "{monomial}")?;
            } else {
                write!(f, "{mag}{monomial}")?;
            }
        }
        Ok(())
    }
}

fn monomial_str(p: &Power) -> String {
    let var = |name: &str, e: u32| match e {
        0 => String::new(),
        1 => name.to_string(),
        _ => format!("{name}^{e}"),
    };
    format!("{}{}", var("λ", p.lam), var("x", p.x))
}

fn check_cap(p: Power, cap: u32) -> Result<()> {
    if p.x > cap || p.lam > cap {
        Err(Error::PowerTooLarge { power: p, cap })
    } else {
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TermRecord {
    power: Power,
    #[serde(serialize_with = "rational::ser_rational", deserialize_with = "rational::de_rational")]
    coeff: Rational,
}

impl Serialize for PowerSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let recs: Vec<TermRecord> = self
            .terms
            .iter()
            .map(|(p, c)| TermRecord { power: *p, coeff: c.clone() })
            .collect();
        recs.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PowerSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let recs = Vec::<TermRecord>::deserialize(d)?;
        PowerSet::new(recs.into_iter().map(|r| (r.power, r.coeff))).map_err(serde::de::Error::custom)
    }
}

/// The componentwise-minimal powers; pairwise incomparable.
pub fn minimal_elements(a: &PowerSet) -> PowerSet {
    let powers: Vec<Power> = a.powers().collect();
    a.restrict(|p| !powers.iter().any(|q| q != p && q.le(p)))
}

fn require_nonempty(a: &PowerSet) -> Result<()> {
    if a.is_empty() {
        Err(Error::EmptySet)
    } else {
        Ok(())
    }
}

fn require_slope(m: Slope) -> Result<()> {
    if m <= Slope::zero() {
        Err(Error::BadSlope(m))
    } else {
        Ok(())
    }
}

/// `s(A, m) = min_{α∈A} s(α, m)`.
pub fn support_value(a: &PowerSet, m: Slope) -> Result<Exponent> {
    require_nonempty(a)?;
    require_slope(m)?;
    Ok(a.powers().map(|p| p.support(m)).min().expect("nonempty"))
}

/// `A(m)`, with coefficients.
pub fn active_set(a: &PowerSet, m: Slope) -> Result<PowerSet> {
    let s = support_value(a, m)?;
    Ok(a.restrict(|p| p.support(m) == s))
}

/// Slopes `m(α, α') = (α₂' − α₂) / (α₁ − α₁')` over incomparable pairs of
/// `min(A)`, sorted and deduplicated. `M(A)` is a subset.
pub fn candidate_slopes(a: &PowerSet) -> Vec<Slope> {
    let mins: Vec<Power> = minimal_elements(a).powers().collect();
    let mut out = Vec::new();
    for (i, p) in mins.iter().enumerate() {
        for q in &mins[i + 1..] {
            if let Some(m) = crossing_slope(p, q) {
                out.push(m);
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Slope at which two incomparable powers have equal support value.
pub fn crossing_slope(p: &Power, q: &Power) -> Option<Slope> {
    if p.comparable(q) {
        return None;
    }
    let num = i64::from(q.lam) - i64::from(p.lam);
    let den = i64::from(p.x) - i64::from(q.x);
    Some(Slope::new(num, den))
}

/// One rational strictly inside each of the `n + 1` open intervals cut out
/// of `(0, ∞)` by a sorted slope list.
pub fn interior_points(slopes: &[Slope]) -> Vec<Slope> {
    if slopes.is_empty() {
        return vec![Slope::from(1)];
    }
    let mut pts = Vec::with_capacity(slopes.len() + 1);
    pts.push(slopes[0] / 2);
    for w in slopes.windows(2) {
        pts.push((w[0] + w[1]) / 2);
    }
    pts.push(slopes[slopes.len() - 1] + 1);
    pts
}

/// Pivot slopes `m₁ < … < m_n` and pivots `α(0), …, α(n)`; `pivots[i]` is
/// the unique element of `A(m)` for `m ∈ (m_i, m_{i+1})`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PivotStructure {
    #[serde(serialize_with = "ser_slopes")]
    pub slopes: Vec<Slope>,
    pub pivots: Vec<Power>,
}

pub(crate) fn ser_slopes<S: serde::Serializer>(v: &[Slope], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|m| m.to_string()))
}

pub fn pivot_slopes(a: &PowerSet) -> Result<Vec<Slope>> {
    require_nonempty(a)?;
    let mut out = Vec::new();
    for m in candidate_slopes(a) {
        if active_set(a, m)?.len() >= 2 {
            out.push(m);
        }
    }
    Ok(out)
}

pub fn pivot_structure(a: &PowerSet) -> Result<PivotStructure> {
    let slopes = pivot_slopes(a)?;
    let pivots = interval_pivots(a, &slopes)?;
    Ok(PivotStructure { slopes, pivots })
}

/// The unique active power on each open interval of a sorted slope list.
/// Fails when the list misses a pivot slope of `A` that lands on a sample point.
pub fn interval_pivots(a: &PowerSet, slopes: &[Slope]) -> Result<Vec<Power>> {
    require_nonempty(a)?;
    let own = pivot_slopes(a)?;
    if let Some(m) = own.iter().find(|m| !slopes.contains(m)) {
        return Err(Error::SlopeSetTooSmall(*m));
    }
    interior_points(slopes)
        .into_iter()
        .map(|t| {
            let act = active_set(a, t)?;
            debug_assert_eq!(act.len(), 1);
            let p = act.powers().next().expect("nonempty");
            Ok(p)
        })
        .collect()
}

/// `env(A) = ⋃_{m>0} A(m)`; empty for empty input.
pub fn envelope(a: &PowerSet) -> PowerSet {
    if a.is_empty() {
        return PowerSet::empty();
    }
    let st = pivot_structure(a).expect("nonempty");
    let mut keep: Vec<Power> = st.pivots.clone();
    for &m in &st.slopes {
        keep.extend(active_set(a, m).expect("nonempty").powers());
    }
    a.restrict(|p| keep.contains(p))
}

/// Whether `s(p, m) ≥ s(B, m)` for every `m ∈ (0, ∞)`.
///
/// `d(m) = s(p,m) − s(B,m)` is convex and piecewise linear with kinks at the
/// pivot slopes of `B`, so it suffices to check the kinks, the limit at
/// `m → 0⁺`, and the slope of the last piece.
pub fn contains_in_s(b: &PowerSet, p: &Power) -> Result<bool> {
    let st = pivot_structure(b)?;
    let d = |m: Slope| p.support(m) - support_value(b, m).expect("nonempty");
    if st.slopes.iter().any(|&m| d(m) < Exponent::zero()) {
        return Ok(false);
    }
    let first = st.pivots[0];
    let last = st.pivots[st.pivots.len() - 1];
    let at_zero = i64::from(p.lam) - i64::from(first.lam);
    if at_zero < 0 {
        return Ok(false);
    }
    let tail_slope = i64::from(p.x) - i64::from(last.x);
    Ok(tail_slope >= 0)
}
