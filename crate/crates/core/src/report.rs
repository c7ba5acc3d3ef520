//! Analysis report assembly and the CSV/SVG diagram exports.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::analysis::{self, BranchData, CharacteristicPair, DdCurve, DdPiece, LambdaEnd, LimitClassification, StrongStochasticity, Stochasticity};
use crate::asymptotics::EpsPower;
use crate::bifurcation::{self, BifurcationKind, Kind, ScaleProfile};
use crate::error::Error;
use crate::poset::{Power, PowerSet};
use crate::rational;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const GAMMA_NOTE: &str = "γ⋆ = (m⋆ + s(B,m⋆) − s(A,m⋆))/2 is used. The variant without the factor 1/2 breaks the crossing identity φ⋆(λ⋆) ≍ φ(λ⋆) at λ⋆ = ε^{ν⋆}.";
const PITCHFORK_NOTE: &str = "For the pitchfork, b⋆ = λ^{m⋆ − s(A,m⋆)} = λ^{-1}. The closed form λ^{−((j1−1)/(j1−j2)+j2)} = λ^{-2} disagrees with b(λ) = 1/λ on the far dd piece and is not used.";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorReport {
    pub kind: &'static str,
    pub message: String,
}

impl From<&Error> for ErrorReport {
    fn from(e: &Error) -> Self {
        ErrorReport { kind: e.kind(), message: e.to_string() }
    }
}

/// Scales `a → ∞`, `b` and optional `λ` for a limit classification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scales {
    pub a: EpsPower,
    pub b: EpsPower,
    #[serde(default)]
    pub lambda: Option<EpsPower>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pivots {
    #[serde(rename = "A")]
    pub a: Vec<Power>,
    #[serde(rename = "B")]
    pub b: Vec<Power>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoldInterval {
    pub piece: usize,
    pub lam_lo: LambdaEnd,
    pub lam_hi: LambdaEnd,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DdCurveReport {
    pub pieces: Vec<DdPiece>,
    pub upright: bool,
    #[serde(serialize_with = "crate::poset::ser_slopes")]
    pub breakpoints: Vec<rational::Exponent>,
    pub fold_intervals: Vec<FoldInterval>,
}

impl From<&DdCurve> for DdCurveReport {
    fn from(c: &DdCurve) -> Self {
        let fold_intervals = c.fold_intervals().into_iter().map(|(piece, lam_lo, lam_hi)| FoldInterval { piece, lam_lo, lam_hi }).collect();
        DdCurveReport { pieces: c.pieces.clone(), upright: c.upright, breakpoints: c.breakpoints.clone(), fold_intervals }
    }
}

/// Everything derivable from `(F, G)`; failed stages leave `None` and add to `errors`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub version: &'static str,
    #[serde(rename = "F")]
    pub f: String,
    #[serde(rename = "G")]
    pub g: String,
    pub strong_stochasticity: Option<StrongStochasticity>,
    #[serde(rename = "M", serialize_with = "crate::poset::ser_slopes")]
    pub m: Vec<rational::Exponent>,
    pub pivots: Option<Pivots>,
    pub delta: Vec<[i64; 2]>,
    pub dd_curve: Option<DdCurveReport>,
    pub branch: Option<BranchData>,
    pub bifurcation: BifurcationKind,
    pub scale_profile: Option<ScaleProfile>,
    pub classification: Option<LimitClassification>,
    pub errata_notes: Vec<String>,
    pub notes: Vec<String>,
    pub errors: Vec<ErrorReport>,
}

impl AnalysisReport {
    pub fn ok(&self) -> bool {
        self.errors.is_empty()
    }
}

/// Runs every analysis stage that its inputs allow.
pub fn analyze(f: &PowerSet, g: &PowerSet, scales: Option<&Scales>) -> (AnalysisReport, Option<CharacteristicPair>, Option<DdCurve>) {
    let mut rep = AnalysisReport {
        version: VERSION,
        f: f.to_string(),
        g: g.to_string(),
        strong_stochasticity: None,
        m: Vec::new(),
        pivots: None,
        delta: Vec::new(),
        dd_curve: None,
        branch: None,
        bifurcation: bifurcation::detect_bifurcation(f),
        scale_profile: None,
        classification: None,
        errata_notes: vec![GAMMA_NOTE.to_string()],
        notes: Vec::new(),
        errors: Vec::new(),
    };
    if rep.bifurcation.kind == Kind::Pitchfork {
        rep.errata_notes.push(PITCHFORK_NOTE.to_string());
    }
    match analysis::check_strong_stochasticity(f, g) {
        Ok(ss) => {
            if ss.verdict == Stochasticity::Fails {
                let p = ss.failing_pivots[0];
                rep.errors.push((&Error::NotStronglyStochastic(p)).into());
            }
            rep.strong_stochasticity = Some(ss);
        }
        Err(e) => rep.errors.push((&e).into()),
    }
    let cp = match CharacteristicPair::new(f.clone(), g.clone()) {
        Ok(cp) => cp,
        Err(e) => {
            rep.errors.push((&e).into());
            return (rep, None, None);
        }
    };
    rep.m = cp.slopes.clone();
    rep.pivots = Some(Pivots { a: cp.alpha.clone(), b: cp.beta.clone() });
    rep.delta = cp.delta.iter().map(|&(a, b)| [a, b]).collect();
    let curve = match analysis::dd_curve(&cp) {
        Ok(c) => {
            rep.dd_curve = Some((&c).into());
            Some(c)
        }
        Err(e) => {
            if !rep.errors.iter().any(|r| r.kind == e.kind()) {
                rep.errors.push((&e).into());
            }
            None
        }
    };
    rep.branch = analysis::find_branch(&cp);
    match (&rep.branch, &curve) {
        (None, _) => rep.notes.push("no slope carries a simple positive root: no equilibrium branch".into()),
        (Some(br), Some(_)) => match bifurcation::scale_profile(&cp, br) {
            Ok(p) => rep.scale_profile = Some(p),
            Err(e) => rep.errors.push((&e).into()),
        },
        (Some(_), None) => {}
    }
    if let Some(s) = scales {
        match analysis::classify_parametrized(&cp, &s.a, &s.b, s.lambda.as_ref()) {
            Ok(c) => rep.classification = Some(c),
            Err(e) => rep.errors.push((&e).into()),
        }
    }
    if rep.ok() && curve.as_ref().is_some_and(|c| !c.upright) {
        rep.notes.push("dd curve is not upright: φ(λ) is undefined on the fold intervals".into());
    }
    (rep, Some(cp), curve)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (lo.ln(), hi.ln());
    (0..n).map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// CSV `lambda,x,piece_index` along the dd curve at `eps`.
pub fn dd_curve_csv(curve: &DdCurve, eps: f64, per_piece: usize, lam_floor: f64) -> String {
    let mut s = String::from("lambda,x,piece_index\n");
    for (lam, x, k) in curve.sample(eps, per_piece, lam_floor) {
        let _ = writeln!(s, "{lam},{x},{k}");
    }
    s
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramRow {
    pub lambda: f64,
    pub phi: Option<f64>,
    pub b: Option<f64>,
    pub phi_star_lo: Option<f64>,
    pub phi_star_hi: Option<f64>,
    pub b_star: Option<f64>,
    pub regime: &'static str,
}

/// Scale profile on a log λ grid over `[lam_floor, 1]`. Columns around
/// the branch are empty below `λ⋆`.
pub fn diagram_rows(profile: &ScaleProfile, eps: f64, n: usize, lam_floor: f64) -> Vec<DiagramRow> {
    let lam_star = profile.lambda_star(eps);
    log_grid(lam_floor, 1.0, n)
        .into_iter()
        .map(|lam| {
            let piece = profile.piece_at(eps, lam);
            let phi = piece.and_then(|p| p.phi).map(|m| m.eval(eps, lam));
            let b = piece.and_then(|p| p.b).map(|m| m.eval(eps, lam));
            let beyond = lam >= lam_star;
            let xs = profile.x_star(lam);
            let w = profile.phi_star.eval(eps, lam);
            DiagramRow {
                lambda: lam,
                phi,
                b,
                phi_star_lo: beyond.then_some(xs - w),
                phi_star_hi: beyond.then_some(xs + w),
                b_star: beyond.then(|| profile.b_star.eval(eps, lam)),
                regime: piece.map_or("", |p| p.time_regime.tag()),
            }
        })
        .collect()
}

pub fn diagram_csv(rows: &[DiagramRow]) -> String {
    let cell = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    let mut s = String::from("lambda,phi,b,phi_star_lo,phi_star_hi,b_star,regime\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{}",
            r.lambda,
            cell(r.phi),
            cell(r.b),
            cell(r.phi_star_lo),
            cell(r.phi_star_hi),
            cell(r.b_star),
            r.regime
        );
    }
    s
}

/// Log-λ by linear-x plot: equilibria, the dd band `±φ` around 0 and
/// `x⋆ ± φ⋆` around the branch.
pub fn diagram_svg(rows: &[DiagramRow], profile: &ScaleProfile, eps: f64) -> String {
    let (w, h, pad) = (720.0, 420.0, 40.0);
    let (l0, l1) = (rows[0].lambda.ln(), rows[rows.len() - 1].lambda.ln());
    let x_max = rows.iter().map(|r| profile.x_star(r.lambda)).fold(0.0f64, f64::max).max(1e-12) * 1.3;
    let px = |lam: f64| pad + (lam.ln() - l0) / (l1 - l0) * (w - 2.0 * pad);
    let py = |x: f64| h / 2.0 - x / x_max * (h / 2.0 - pad);
    let line = |pts: Vec<(f64, f64)>, color: &str| -> String {
        if pts.len() < 2 {
            return String::new();
        }
        let d: Vec<String> = pts.iter().map(|(a, b)| format!("{:.2},{:.2}", px(*a), py(*b))).collect();
        format!("<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n", d.join(" "))
    };
    let clip = |v: f64| v.clamp(-1.2 * x_max, 1.2 * x_max);
    let mut s = format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n");
    let _ = writeln!(s, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    let _ = writeln!(s, "<text x=\"{pad}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">ε = {eps}, log λ from {:.1e} to 1</text>", rows[0].lambda);
    s += &line(rows.iter().map(|r| (r.lambda, 0.0)).collect(), "black");
    s += &line(rows.iter().map(|r| (r.lambda, profile.x_star(r.lambda))).collect(), "black");
    for sign in [1.0, -1.0] {
        s += &line(rows.iter().filter_map(|r| r.phi.map(|p| (r.lambda, clip(sign * p)))).collect(), "steelblue");
    }
    s += &line(rows.iter().filter_map(|r| r.phi_star_lo.map(|v| (r.lambda, clip(v)))).collect(), "steelblue");
    s += &line(rows.iter().filter_map(|r| r.phi_star_hi.map(|v| (r.lambda, clip(v)))).collect(), "steelblue");
    let ls = profile.lambda_star(eps);
    let _ = writeln!(s, "<line x1=\"{0:.2}\" x2=\"{0:.2}\" y1=\"{pad}\" y2=\"{1}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>", px(ls), h - pad);
    s += "</svg>\n";
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logistic_report() {
        let f = PowerSet::from_ints(&[(1, 1, 1), (2, 0, -1)]);
        let g = PowerSet::from_ints(&[(1, 0, 2), (1, 1, 1), (2, 0, 1)]);
        let (rep, _, _) = analyze(&f, &g, None);
        assert!(rep.ok());
        assert_eq!(rep.bifurcation.kind, Kind::Transcritical);
        assert!(rep.dd_curve.as_ref().unwrap().upright);
        assert_eq!(rep.f, "-x^2 + λx");
        let v = serde_json::to_value(&rep).unwrap();
        for key in ["strong_stochasticity", "M", "pivots", "delta", "dd_curve", "branch", "classification", "errata_notes"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["M"], serde_json::json!(["1"]));
    }

    #[test]
    fn failing_stochasticity_is_an_error() {
        let (rep, _, _) = analyze(&PowerSet::from_ints(&[(0, 1, 1)]), &PowerSet::from_ints(&[(2, 0, 1)]), None);
        assert!(!rep.ok());
        assert_eq!(rep.errors[0].kind, "not_strongly_stochastic");
        assert_eq!(rep.strong_stochasticity.unwrap().verdict, Stochasticity::Fails);
    }

    #[test]
    fn folded_report_lists_interval() {
        let f = PowerSet::from_ints(&[(4, 0, 1), (1, 2, 1)]);
        let g = PowerSet::from_ints(&[(3, 0, 1), (0, 3, 1)]);
        let (rep, _, curve) = analyze(&f, &g, None);
        let dd = rep.dd_curve.unwrap();
        assert!(!dd.upright);
        assert_eq!(dd.fold_intervals.len(), 1);
        assert_eq!(dd.fold_intervals[0].piece, 1);
        let csv = dd_curve_csv(&curve.unwrap(), 0.04, 4, 1e-8);
        assert!(csv.lines().skip(1).any(|l| l.ends_with(",1")));
    }

    #[test]
    fn diagram_for_transcritical() {
        let (cp, br) = bifurcation::canonical_pair(Kind::Transcritical).unwrap();
        let prof = bifurcation::scale_profile(&cp, &br).unwrap();
        let rows = diagram_rows(&prof, 0.04, 50, 1e-4);
        let csv = diagram_csv(&rows);
        assert!(csv.starts_with("lambda,phi,b,phi_star_lo,phi_star_hi,b_star,regime\n"));
        // φ = ε below λ⋆ = ε, ε²/λ above; b⋆ = 1/λ.
        for r in &rows {
            let want = if r.lambda <= 0.04 { 0.04 } else { 0.0016 / r.lambda };
            assert!((r.phi.unwrap() - want).abs() < 1e-12 * want.max(1.0));
            if let Some(bs) = r.b_star {
                assert!((bs - 1.0 / r.lambda).abs() < 1e-9 / r.lambda);
            }
        }
        assert!(diagram_svg(&rows, &prof, 0.04).contains("<polyline"));
    }
}
