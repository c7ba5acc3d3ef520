//! Pure ε-power sequences `c·ε^q`, the subpartition of `(x, λ) → (0, 0)`
//! induced by a sorted slope set, and the dominant terms of a bivariate
//! polynomial on each region.
//!
//! With `M = {m₁ < … < m_n}` region `R_0` is `x ≫ λ^{m₁}`, odd region
//! `R_{2i−1}` is the ray `x ∼ z·λ^{m_i}`, even region `R_{2i}` the open
//! sector between consecutive rays, and `R_{2n}` is `x ≪ λ^{m_n}`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Poly, RealPoly};
use crate::poset::{self, Power, PowerSet, Slope};
use crate::rational::{self, Exponent, Rational};

/// The sequence `ε ↦ coeff·ε^exp`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpsPower {
    #[serde(serialize_with = "rational::ser_rational", deserialize_with = "rational::de_rational")]
    pub coeff: Rational,
    #[serde(serialize_with = "rational::ser_exponent", deserialize_with = "rational::de_exponent")]
    pub exp: Exponent,
}

impl EpsPower {
    pub fn new(coeff: Rational, exp: Exponent) -> Result<Self> {
        if !coeff.is_positive() {
            return Err(Error::Invalid(format!("ε-power coefficient must be positive, got {coeff}")));
        }
        Ok(EpsPower { coeff, exp })
    }

    /// `ε^exp` with unit coefficient.
    pub fn pure(exp: Exponent) -> Self {
        EpsPower { coeff: rational::rat_int(1), exp }
    }

    pub fn recip(&self) -> Self {
        EpsPower { coeff: self.coeff.recip(), exp: -self.exp }
    }

    pub fn mul(&self, other: &EpsPower) -> Self {
        EpsPower { coeff: &self.coeff * &other.coeff, exp: self.exp + other.exp }
    }

    pub fn eval(&self, eps: f64) -> f64 {
        rational::to_f64(&self.coeff) * eps.powf(rational::exp_to_f64(self.exp))
    }
}

impl fmt::Display for EpsPower {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeff != rational::rat_int(1) {
            write!(f, "{}·", self.coeff)?;
        }
        write!(f, "ε^{}", self.exp)
    }
}

/// Asymptotic comparison as ε → 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Order {
    MuchLess,
    /// Carries the exact limit ratio.
    Comparable(Rational),
    MuchGreater,
}

pub fn compare(s1: &EpsPower, s2: &EpsPower) -> Order {
    use std::cmp::Ordering::*;
    match s1.exp.cmp(&s2.exp) {
        Greater => Order::MuchLess,
        Equal => Order::Comparable(&s1.coeff / &s2.coeff),
        Less => Order::MuchGreater,
    }
}

/// The constant `z` of an odd region; exact when `c/c'^{m}` is rational.
#[derive(Clone, Debug, PartialEq)]
pub enum ZConst {
    Exact(Rational),
    Approx(f64),
}

impl ZConst {
    pub fn value(&self) -> f64 {
        match self {
            ZConst::Exact(q) => rational::to_f64(q),
            ZConst::Approx(v) => *v,
        }
    }

    pub fn exact(&self) -> Option<&Rational> {
        match self {
            ZConst::Exact(q) => Some(q),
            ZConst::Approx(_) => None,
        }
    }
}

impl fmt::Display for ZConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZConst::Exact(q) => write!(f, "{q}"),
            ZConst::Approx(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionIndex {
    pub index: usize,
    /// Present exactly on odd regions.
    pub z: Option<ZConst>,
}

impl RegionIndex {
    pub fn even(i: usize) -> Self {
        RegionIndex { index: 2 * i, z: None }
    }

    pub fn is_ray(&self) -> bool {
        self.index % 2 == 1
    }

    /// `i` such that the region lies in the closed sector
    /// `λ^{m_{i+1}} ≤ x ≤ λ^{m_i}`; for the ray `R_{2i−1}` both adjacent
    /// sectors apply and the upper one (`i`) is returned.
    pub fn sector(&self) -> usize {
        self.index.div_ceil(2)
    }
}

impl Serialize for RegionIndex {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("RegionIndex", 2)?;
        st.serialize_field("region", &self.index)?;
        st.serialize_field("z", &self.z.as_ref().map(|z| z.to_string()))?;
        st.end()
    }
}

/// Locates `(x, λ)` in the subpartition induced by sorted `slopes`. `lam`
/// of `None` is the unparametrised axis `λ ≡ 0`, classified as `R_0`.
pub fn classify_region(x: &EpsPower, lam: Option<&EpsPower>, slopes: &[Slope]) -> Result<RegionIndex> {
    if x.exp <= Exponent::zero() {
        return Err(Error::UnstableScale(format!("x = {x} does not tend to 0")));
    }
    let Some(lam) = lam else {
        return Ok(RegionIndex { index: 0, z: None });
    };
    if lam.exp <= Exponent::zero() {
        return Err(Error::UnstableScale(format!("λ = {lam} does not tend to 0")));
    }
    let ratio = x.exp / lam.exp;
    for (k, &m) in slopes.iter().enumerate() {
        if ratio < m {
            return Ok(RegionIndex { index: 2 * k, z: None });
        }
        if ratio == m {
            let z = match rational::rational_pow(&lam.coeff, m) {
                Some(c) => ZConst::Exact(&x.coeff / c),
                None => ZConst::Approx(rational::to_f64(&x.coeff) / rational::pow_f64(&lam.coeff, m)),
            };
            return Ok(RegionIndex { index: 2 * k + 1, z: Some(z) });
        }
    }
    Ok(RegionIndex { index: 2 * slopes.len(), z: None })
}

/// Restriction of `f` to `env(powers of f)`.
pub fn reduce_to_envelope(f: &PowerSet) -> Result<PowerSet> {
    if f.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(poset::envelope(f))
}

fn check_region(region: &RegionIndex, slopes: &[Slope]) -> Result<()> {
    if region.index > 2 * slopes.len() {
        return Err(Error::BadRegion { region: region.index, n: slopes.len() });
    }
    Ok(())
}

/// Terms of `f` that dominate on `region`: the pivot `α(i)` on `R_{2i}`,
/// the whole active set `A(m_i)` on `R_{2i−1}`.
pub fn dominant_terms(f: &PowerSet, region: &RegionIndex, slopes: &[Slope]) -> Result<PowerSet> {
    check_region(region, slopes)?;
    let pivots = poset::interval_pivots(f, slopes)?;
    if region.is_ray() {
        poset::active_set(f, slopes[region.index / 2])
    } else {
        let p = pivots[region.index / 2];
        Ok(f.restrict(|q| *q == p))
    }
}

/// `c·x^{x_exp}·λ^{lam_exp}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Monomial {
    #[serde(serialize_with = "rational::ser_rational")]
    pub coeff: Rational,
    pub x_exp: u32,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub lam_exp: Exponent,
}

impl Monomial {
    pub fn eval(&self, x: f64, lam: f64) -> f64 {
        rational::to_f64(&self.coeff) * x.powi(self.x_exp as i32) * lam.powf(rational::exp_to_f64(self.lam_exp))
    }
}

/// `f(u·x, λ) ∼ v(x, λ)·w(u)` on a region.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFunctions {
    pub v: Monomial,
    pub w: RealPoly,
    /// `w` with exact coefficients, when the region constant is rational.
    pub w_exact: Option<Poly>,
}

pub fn scale_functions(f: &PowerSet, region: &RegionIndex, slopes: &[Slope]) -> Result<ScaleFunctions> {
    let dom = dominant_terms(f, region, slopes)?;
    if region.is_ray() {
        let m = slopes[region.index / 2];
        let s = poset::support_value(f, m)?;
        let z = region
            .z
            .as_ref()
            .ok_or_else(|| Error::Invalid(format!("odd region {} needs its constant z", region.index)))?;
        let w_exact = z.exact().map(|z| {
            Poly::from_terms(dom.iter().map(|(p, c)| (p.x, c * rational::int_pow(z, i64::from(p.x)))))
        });
        let zv = z.value();
        let w = RealPoly::from_terms(
            dom.iter().map(|(p, c)| (p.x, rational::to_f64(c) * zv.powi(p.x as i32))),
        );
        let v = Monomial { coeff: rational::rat_int(1), x_exp: 0, lam_exp: s };
        Ok(ScaleFunctions { v, w, w_exact })
    } else {
        let (p, c): (&Power, &Rational) = dom.iter().next().expect("singleton");
        let v = Monomial { coeff: c.clone(), x_exp: p.x, lam_exp: Exponent::from(i64::from(p.lam)) };
        let w_exact = Poly::monomial(p.x, rational::rat_int(1));
        Ok(ScaleFunctions { v, w: w_exact.to_real(), w_exact: Some(w_exact) })
    }
}
