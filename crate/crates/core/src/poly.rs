//! Univariate polynomials: exact ones for limit coefficients, float ones for
//! integration.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};

/// Sparse `Σ c_k u^k` over the rationals, zero terms removed.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    terms: BTreeMap<u32, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, Rational)>) -> Self {
        let mut map: BTreeMap<u32, Rational> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert_with(Rational::zero) += c;
        }
        map.retain(|_, c| !c.is_zero());
        Poly { terms: map }
    }

    pub fn monomial(k: u32, c: Rational) -> Self {
        Self::from_terms([(k, c)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rational)> + '_ {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn coeff(&self, k: u32) -> Rational {
        self.terms.get(&k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().next_back().copied()
    }

    pub fn eval(&self, u: &Rational) -> Rational {
        self.terms
            .iter()
            .map(|(k, c)| c * rational::int_pow(u, i64::from(*k)))
            .fold(Rational::zero(), |a, b| a + b)
    }

    pub fn derivative(&self) -> Poly {
        Poly::from_terms(
            self.terms
                .iter()
                .filter(|(k, _)| **k > 0)
                .map(|(k, c)| (k - 1, c * rational::rat_int(i64::from(*k)))),
        )
    }

    pub fn scale(&self, s: &Rational) -> Poly {
        Poly::from_terms(self.terms.iter().map(|(k, c)| (*k, c * s)))
    }

    pub fn to_real(&self) -> RealPoly {
        RealPoly::from_terms(self.terms.iter().map(|(k, c)| (*k, rational::to_f64(c))))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(u32, String, bool)> = self
            .terms
            .iter()
            .map(|(k, c)| (*k, c.abs().to_string(), c.is_negative()))
            .collect();
        write_terms(f, &terms)
    }
}

/// Sparse `Σ c_k y^k` over `f64`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RealPoly {
    terms: Vec<(u32, f64)>,
}

impl RealPoly {
    pub fn zero() -> Self {
        RealPoly::default()
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (u32, f64)>) -> Self {
        let mut map: BTreeMap<u32, f64> = BTreeMap::new();
        for (k, c) in terms {
            *map.entry(k).or_insert(0.0) += c;
        }
        RealPoly { terms: map.into_iter().filter(|(_, c)| *c != 0.0).collect() }
    }

    /// Dense coefficients, lowest degree first.
    pub fn from_coeffs(coeffs: &[f64]) -> Self {
        Self::from_terms(coeffs.iter().enumerate().map(|(k, c)| (k as u32, *c)))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(u32, f64)] {
        &self.terms
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.terms.iter().map(|(k, c)| c * y.powi(*k as i32)).sum()
    }

    pub fn derivative(&self) -> RealPoly {
        RealPoly::from_terms(
            self.terms.iter().filter(|(k, _)| *k > 0).map(|(k, c)| (k - 1, c * f64::from(*k))),
        )
    }

    pub fn scale(&self, s: f64) -> RealPoly {
        RealPoly::from_terms(self.terms.iter().map(|(k, c)| (*k, c * s)))
    }
}

impl fmt::Display for RealPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<(u32, String, bool)> = self
            .terms
            .iter()
            .map(|(k, c)| (*k, format!("{}", c.abs()), *c < 0.0))
            .collect();
        write_terms(f, &terms)
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[(u32, String, bool)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    for (i, (k, mag, neg)) in terms.iter().rev().enumerate() {
        match (i, neg) {
            (0, true) => write!(f, "-")?,
            (0, false) => {}
            (_, true) => write!(f, " - ")?,
            (_, false) => write!(f, " + ")?,
        }
        let var = match k {
            0 => String::new(),
            1 => "x".to_string(),
            _ => format!("x^{k}"),
        };
        if var.is_empty() {
            write!(f, "{mag}")?;
        } else if mag == "1" {
            write!(f, "{var}")?;
        } else {
            write!(f, "{mag}{var}")?;
        }
    }
    Ok(())
}
