//! The saddle-node / transcritical / pitchfork catalog and the space/time
//! scale profile across the critical window `λ ≤ λ⋆(ε) = ε^{ν⋆}`.

use std::fmt;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::analysis::{self, BranchData, CharacteristicPair, DdCurve, Direction, LambdaEnd, PieceShape};
use crate::error::{Error, Result};
use crate::poset::{self, Power, PowerSet};
use crate::rational::{self, Exponent};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kind {
    SaddleNode,
    Transcritical,
    Pitchfork,
    None,
}

/// A catalogued drift envelope `{(j1, 0), (j2, 1)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BifurcationKind {
    pub kind: Kind,
    pub j1: u32,
    pub j2: u32,
    /// Signs of `c_{(j1,0)}` and `c_{(j2,1)}`; reported, never restricted.
    pub signs: Option<(i8, i8)>,
}

impl BifurcationKind {
    pub fn none() -> Self {
        BifurcationKind { kind: Kind::None, j1: 0, j2: 0, signs: None }
    }
}

impl fmt::Display for BifurcationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::SaddleNode => write!(f, "saddle-node"),
            Kind::Transcritical => write!(f, "transcritical"),
            Kind::Pitchfork => write!(f, "pitchfork"),
            Kind::None => write!(f, "none"),
        }
    }
}

const CATALOG: [(Kind, u32, u32); 3] = [(Kind::SaddleNode, 2, 0), (Kind::Transcritical, 2, 1), (Kind::Pitchfork, 3, 1)];

/// Matches `env(F)` exactly against the catalog.
pub fn detect_bifurcation(f: &PowerSet) -> BifurcationKind {
    let env = poset::envelope(f);
    if env.len() != 2 {
        return BifurcationKind::none();
    }
    for (kind, j1, j2) in CATALOG {
        let (p1, p2) = (Power::new(j1, 0), Power::new(j2, 1));
        if let (Some(c1), Some(c2)) = (env.coeff(&p1), env.coeff(&p2)) {
            let sign = |c: &rational::Rational| if c.is_negative() { -1 } else { 1 };
            return BifurcationKind { kind, j1, j2, signs: Some((sign(c1), sign(c2))) };
        }
    }
    BifurcationKind::none()
}

/// `B = {(j2, 0)}` with unit coefficient.
pub fn canonical_noise(kind: &BifurcationKind) -> Result<PowerSet> {
    if kind.kind == Kind::None {
        return Err(Error::NotABifurcation);
    }
    Ok(PowerSet::from_ints(&[(kind.j2, 0, 1)]))
}

/// `ε^{eps}·λ^{lam}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ScaleMonomial {
    #[serde(serialize_with = "rational::ser_exponent")]
    pub eps: Exponent,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub lam: Exponent,
}

impl ScaleMonomial {
    pub fn new(eps: Exponent, lam: Exponent) -> Self {
        ScaleMonomial { eps, lam }
    }

    /// ε-exponent on the curve `λ = ε^ν`.
    pub fn at(&self, nu: Exponent) -> Exponent {
        self.eps + self.lam * nu
    }

    pub fn eval(&self, eps: f64, lam: f64) -> f64 {
        eps.powf(rational::exp_to_f64(self.eps)) * lam.powf(rational::exp_to_f64(self.lam))
    }
}

impl fmt::Display for ScaleMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let part = |name: &str, e: Exponent| match e {
            e if e.is_zero() => String::new(),
            e if e == Exponent::from(1) => name.to_string(),
            e => format!("{name}^{e}"),
        };
        let s = format!("{}{}", part("ε", self.eps), part("λ", self.lam));
        write!(f, "{}", if s.is_empty() { "1".to_string() } else { s })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Shape {
    Inc,
    Dec,
    Const,
    Vertical,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimeRegime {
    /// `b ≫ 1` across the piece.
    Slow,
    /// `b ↓ 1` as `λ ↑ 1`.
    FastToOne,
    /// `b ≲ 1` once `λ ≳ ε^{threshold}`.
    IrrelevantBeyond {
        #[serde(serialize_with = "rational::ser_exponent")]
        threshold: Exponent,
    },
    /// `b ≲ 1` across the piece.
    Fast,
    /// Undefined on vertical pieces.
    Undefined,
}

impl TimeRegime {
    pub fn tag(&self) -> &'static str {
        match self {
            TimeRegime::Slow => "SLOW",
            TimeRegime::FastToOne => "FAST_TO_ONE",
            TimeRegime::IrrelevantBeyond { .. } => "IRRELEVANT_BEYOND",
            TimeRegime::Fast => "FAST",
            TimeRegime::Undefined => "UNDEFINED",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfilePiece {
    pub index: usize,
    pub lam_from: LambdaEnd,
    pub lam_to: LambdaEnd,
    /// dd half-width around 0; `None` on vertical pieces.
    pub phi: Option<ScaleMonomial>,
    /// dd time scale around 0.
    pub b: Option<ScaleMonomial>,
    pub shape: Shape,
    pub time_regime: TimeRegime,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleProfile {
    pub pieces: Vec<ProfilePiece>,
    /// dd half-width around the branch, on `[λ⋆, 1]`.
    pub phi_star: ScaleMonomial,
    /// dd time scale around the branch, on `[λ⋆, 1]`.
    pub b_star: ScaleMonomial,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub nu_star: Exponent,
    /// dd-curve breakpoints followed by `λ⋆`.
    pub lambda_breaks: Vec<LambdaEnd>,
    pub z_star: f64,
    #[serde(serialize_with = "rational::ser_exponent")]
    pub m_star: Exponent,
}

impl ScaleProfile {
    pub fn lambda_star(&self, eps: f64) -> f64 {
        LambdaEnd::Eps(self.nu_star).value(eps)
    }

    pub fn piece_at(&self, eps: f64, lam: f64) -> Option<&ProfilePiece> {
        self.pieces.iter().find(|p| {
            let (a, b) = (p.lam_from.value(eps), p.lam_to.value(eps));
            lam >= a.min(b) && lam <= a.max(b)
        })
    }

    /// Equilibrium `x⋆(λ) ≈ z⋆·λ^{m⋆}`.
    pub fn x_star(&self, lam: f64) -> f64 {
        self.z_star * lam.powf(rational::exp_to_f64(self.m_star))
    }
}

/// ε-exponent of `b` at a piece end; infinite at `λ = 0` unless `b` is flat in λ.
fn end_exponent(b: &ScaleMonomial, end: LambdaEnd) -> EndExp {
    match end {
        LambdaEnd::One => EndExp::Finite(b.eps),
        LambdaEnd::Eps(nu) => EndExp::Finite(b.at(nu)),
        LambdaEnd::Zero if b.lam.is_zero() => EndExp::Finite(b.eps),
        LambdaEnd::Zero if b.lam.is_negative() => EndExp::NegInf,
        LambdaEnd::Zero => EndExp::PosInf,
    }
}

#[derive(Clone, Copy, PartialEq)]
enum EndExp {
    NegInf,
    Finite(Exponent),
    PosInf,
}

impl EndExp {
    fn negative(self) -> bool {
        match self {
            EndExp::NegInf => true,
            EndExp::Finite(e) => e.is_negative(),
            EndExp::PosInf => false,
        }
    }
}

fn time_regime(b: &ScaleMonomial, from: LambdaEnd, to: LambdaEnd) -> TimeRegime {
    let (l, r) = (end_exponent(b, from), end_exponent(b, to));
    if l.negative() && r.negative() {
        return TimeRegime::Slow;
    }
    if to == LambdaEnd::One && r == EndExp::Finite(Exponent::zero()) {
        return TimeRegime::FastToOne;
    }
    if !b.lam.is_zero() && (l.negative() || r.negative()) {
        return TimeRegime::IrrelevantBeyond { threshold: -b.eps / b.lam };
    }
    TimeRegime::Fast
}

/// Space and time scales around `x = 0` (from the dd curve) and around the
/// branch `x⋆(λ)`.
pub fn scale_profile(cp: &CharacteristicPair, br: &BranchData) -> Result<ScaleProfile> {
    let curve: DdCurve = analysis::dd_curve(cp)?;
    let pieces = curve
        .pieces
        .iter()
        .map(|piece| {
            let al = cp.alpha[piece.index];
            match piece.shape {
                PieceShape::Vertical { .. } => ProfilePiece {
                    index: piece.index,
                    lam_from: piece.lam_from,
                    lam_to: piece.lam_to,
                    phi: None,
                    b: None,
                    shape: Shape::Vertical,
                    time_regime: TimeRegime::Undefined,
                    warning: Some("vertical dd piece: φ is not a function of λ here".into()),
                },
                PieceShape::Graph { eps_exp, lam_exp } => {
                    let phi = ScaleMonomial::new(eps_exp, lam_exp);
                    // b = φ^{1−α₁(i)} λ^{−α₂(i)}.
                    let k = 1 - i64::from(al.x);
                    let b = ScaleMonomial::new(eps_exp * k, lam_exp * k - i64::from(al.lam));
                    let shape = match lam_exp {
                        e if e.is_positive() => Shape::Inc,
                        e if e.is_zero() => Shape::Const,
                        _ => Shape::Dec,
                    };
                    let warning = (piece.direction == Direction::Decreasing)
                        .then(|| "folded dd piece: the curve runs backwards in λ".to_string());
                    ProfilePiece {
                        index: piece.index,
                        lam_from: piece.lam_from,
                        lam_to: piece.lam_to,
                        phi: Some(phi),
                        b: Some(b),
                        shape,
                        time_regime: time_regime(&b, piece.lam_from, piece.lam_to),
                        warning,
                    }
                }
            }
        })
        .collect();
    let phi_star = ScaleMonomial::new(Exponent::from(1), br.gamma_star);
    let b_star = ScaleMonomial::new(Exponent::zero(), br.m_star - br.s_a);
    let mut lambda_breaks: Vec<LambdaEnd> = curve.breakpoints.iter().map(|nu| LambdaEnd::Eps(*nu)).collect();
    lambda_breaks.push(LambdaEnd::Eps(br.nu_star));
    Ok(ScaleProfile { pieces, phi_star, b_star, nu_star: br.nu_star, lambda_breaks, z_star: br.z_star, m_star: br.m_star })
}

/// The canonical pair `(A, {(j2,0)})` with `c_{(j1,0)} = −1`, `c_{(j2,1)} = 1`
/// and its branch.
pub fn canonical_pair(kind: Kind) -> Result<(CharacteristicPair, BranchData)> {
    let (_, j1, j2) = CATALOG.iter().copied().find(|c| c.0 == kind).ok_or(Error::NotABifurcation)?;
    let f = PowerSet::from_ints(&[(j1, 0, -1), (j2, 1, 1)]);
    let bk = detect_bifurcation(&f);
    let cp = CharacteristicPair::new(f, canonical_noise(&bk)?)?;
    let br = analysis::equilibrium_branch(&cp, 1)?;
    Ok((cp, br))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::exp;

    #[test]
    fn detection_examples() {
        let k = detect_bifurcation(&PowerSet::from_ints(&[(2, 0, -1), (1, 1, 1)]));
        assert_eq!((k.kind, k.j1, k.j2, k.signs), (Kind::Transcritical, 2, 1, Some((-1, 1))));
        let k = detect_bifurcation(&PowerSet::from_ints(&[(3, 0, -1), (1, 1, 1)]));
        assert_eq!((k.kind, k.j1, k.j2), (Kind::Pitchfork, 3, 1));
        assert_eq!(detect_bifurcation(&PowerSet::from_ints(&[(2, 0, -1), (0, 2, 1)])).kind, Kind::None);
        let k = detect_bifurcation(&PowerSet::from_ints(&[(2, 0, 1), (0, 1, 1)]));
        assert_eq!((k.kind, k.signs), (Kind::SaddleNode, Some((1, 1))));
    }

    #[test]
    fn detection_reduces_to_the_envelope_first() {
        let f = PowerSet::from_ints(&[(2, 0, -1), (1, 1, 1), (3, 0, 3), (1, 3, 7), (2, 2, 1)]);
        assert_eq!(detect_bifurcation(&f).kind, Kind::Transcritical);
        // A pure-λ term lies on the envelope and breaks the match.
        let f = PowerSet::from_ints(&[(2, 0, -1), (1, 1, 1), (0, 5, 3)]);
        assert_eq!(detect_bifurcation(&f).kind, Kind::None);
    }

    #[test]
    fn canonical_noise_examples() {
        let b = |k: Kind| {
            let (_, j1, j2) = CATALOG.iter().copied().find(|c| c.0 == k).unwrap();
            canonical_noise(&BifurcationKind { kind: k, j1, j2, signs: None }).unwrap()
        };
        assert_eq!(b(Kind::Transcritical), PowerSet::from_ints(&[(1, 0, 1)]));
        assert_eq!(b(Kind::SaddleNode), PowerSet::from_ints(&[(0, 0, 1)]));
        assert_eq!(b(Kind::Pitchfork), PowerSet::from_ints(&[(1, 0, 1)]));
        assert_eq!(canonical_noise(&BifurcationKind::none()), Err(Error::NotABifurcation));
    }

    #[test]
    fn transcritical_profile() {
        let (cp, br) = canonical_pair(Kind::Transcritical).unwrap();
        let p = scale_profile(&cp, &br).unwrap();
        assert_eq!(p.nu_star, exp(1, 1));
        assert_eq!(p.pieces[0].phi, Some(ScaleMonomial::new(exp(1, 1), exp(0, 1))));
        assert_eq!(p.pieces[1].phi, Some(ScaleMonomial::new(exp(2, 1), exp(-1, 1))));
        assert_eq!(p.pieces[0].b, Some(ScaleMonomial::new(exp(-1, 1), exp(0, 1))));
        assert_eq!(p.pieces[1].b, Some(ScaleMonomial::new(exp(0, 1), exp(-1, 1))));
        assert_eq!(p.phi_star, ScaleMonomial::new(exp(1, 1), exp(0, 1)));
        assert_eq!(p.b_star, ScaleMonomial::new(exp(0, 1), exp(-1, 1)));
        assert_eq!(p.pieces[0].time_regime, TimeRegime::Slow);
        assert_eq!(p.pieces[1].time_regime, TimeRegime::FastToOne);
        assert_eq!((p.pieces[0].shape, p.pieces[1].shape), (Shape::Const, Shape::Dec));
    }

    #[test]
    fn saddle_node_profile() {
        let (cp, br) = canonical_pair(Kind::SaddleNode).unwrap();
        let p = scale_profile(&cp, &br).unwrap();
        assert_eq!(p.nu_star, exp(4, 3));
        assert_eq!(p.pieces[0].phi, Some(ScaleMonomial::new(exp(2, 3), exp(0, 1))));
        assert_eq!(p.pieces[0].b, Some(ScaleMonomial::new(exp(-2, 3), exp(0, 1))));
        assert_eq!(p.pieces[1].phi, Some(ScaleMonomial::new(exp(2, 1), exp(-1, 1))));
        assert_eq!(p.pieces[1].b, Some(ScaleMonomial::new(exp(2, 1), exp(-2, 1))));
        assert_eq!(p.pieces[1].time_regime, TimeRegime::IrrelevantBeyond { threshold: exp(1, 1) });
    }

    #[test]
    fn pitchfork_profile() {
        let (cp, br) = canonical_pair(Kind::Pitchfork).unwrap();
        let p = scale_profile(&cp, &br).unwrap();
        assert_eq!(p.pieces[0].phi, Some(ScaleMonomial::new(exp(2, 3), exp(0, 1))));
        assert_eq!(p.pieces[0].b, Some(ScaleMonomial::new(exp(-4, 3), exp(0, 1))));
        assert_eq!(p.phi_star, ScaleMonomial::new(exp(1, 1), exp(-1, 4)));
        assert_eq!(p.b_star, ScaleMonomial::new(exp(0, 1), exp(-1, 1)));
        assert_eq!(p.lambda_breaks, vec![LambdaEnd::Eps(exp(4, 3)), LambdaEnd::Eps(exp(4, 3))]);
    }

    #[test]
    fn folded_and_vertical_pieces_carry_warnings() {
        for (k, shape) in [(2, Shape::Vertical), (3, Shape::Inc)] {
            let f = PowerSet::from_ints(&[(4, 0, -1), (1, 2, 1)]);
            let g = PowerSet::from_ints(&[(k, 0, 1), (0, k, 1)]);
            let cp = CharacteristicPair::new(f, g).unwrap();
            let br = analysis::equilibrium_branch(&cp, 1).unwrap();
            let p = scale_profile(&cp, &br).unwrap();
            assert_eq!(p.pieces[1].shape, shape);
            assert!(p.pieces[1].warning.is_some());
        }
    }

    #[test]
    fn scale_monomial_display() {
        assert_eq!(ScaleMonomial::new(exp(2, 1), exp(-1, 1)).to_string(), "ε^2λ^-1");
        assert_eq!(ScaleMonomial::new(exp(0, 1), exp(0, 1)).to_string(), "1");
        assert_eq!(ScaleMonomial::new(exp(1, 1), exp(-1, 4)).to_string(), "ελ^-1/4");
    }
}
