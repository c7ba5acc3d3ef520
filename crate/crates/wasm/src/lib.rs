//! Browser bindings: analysis report, dd curve and scale diagram for a
//! characteristic pair given as `{"F": [...], "G": [...]}`.
//!
//! The plain functions take and return JSON strings so they can be tested
//! natively; the `wasm_bindgen` wrappers only convert errors.

use qdp_core::report::{self, Scales};
use qdp_core::PowerSet;
use serde::Deserialize;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Pair {
    #[serde(rename = "F")]
    f: PowerSet,
    #[serde(rename = "G")]
    g: PowerSet,
    #[serde(default)]
    scales: Option<Scales>,
}

fn parse(input: &str) -> Result<Pair, String> {
    serde_json::from_str(input).map_err(|e| format!("bad input: {e}"))
}

fn check_eps(eps: f64) -> Result<(), String> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(format!("ε = {eps} is outside (0, 1)"))
    }
}

/// The full analysis report. Analysis failures are reported inside the
/// JSON under `errors`, not as an `Err`.
pub fn analyze_json(input: &str) -> Result<String, String> {
    let p = parse(input)?;
    let (rep, _, _) = report::analyze(&p.f, &p.g, p.scales.as_ref());
    serde_json::to_string(&rep).map_err(|e| e.to_string())
}

/// `[[λ, x, piece], ...]` along the dd curve, with λ down to `ε³`.
pub fn dd_curve_json(input: &str, eps: f64, points: usize) -> Result<String, String> {
    check_eps(eps)?;
    let p = parse(input)?;
    let (rep, _, curve) = report::analyze(&p.f, &p.g, None);
    let curve = curve.ok_or_else(|| rep.errors.first().map_or("no dd curve".into(), |e| e.message.clone()))?;
    let per_piece = (points / curve.pieces.len().max(1)).max(2);
    let rows: Vec<Value> = curve.sample(eps, per_piece, eps.powi(3)).into_iter().map(|(l, x, k)| json!([l, x, k])).collect();
    Ok(json!({ "upright": curve.upright, "rows": rows }).to_string())
}

/// Scale-profile rows on a log λ grid, plus `λ⋆(ε)` and the bifurcation kind.
pub fn diagram_json(input: &str, eps: f64, points: usize) -> Result<String, String> {
    check_eps(eps)?;
    let p = parse(input)?;
    let (rep, _, _) = report::analyze(&p.f, &p.g, None);
    let profile = rep.scale_profile.as_ref().ok_or("no equilibrium branch, so no scale profile")?;
    let rows: Vec<Value> = report::diagram_rows(profile, eps, points.max(2), eps.powi(3))
        .into_iter()
        .map(|r| {
            json!({
                "lambda": r.lambda, "phi": r.phi, "b": r.b,
                "phi_star_lo": r.phi_star_lo, "phi_star_hi": r.phi_star_hi,
                "b_star": r.b_star, "regime": r.regime,
            })
        })
        .collect();
    Ok(json!({ "lambda_star": profile.lambda_star(eps), "bifurcation": rep.bifurcation, "rows": rows }).to_string())
}

#[wasm_bindgen]
pub fn analyze(input: &str) -> Result<String, JsError> {
    analyze_json(input).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn dd_curve(input: &str, eps: f64, points: usize) -> Result<String, JsError> {
    dd_curve_json(input, eps, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn diagram(input: &str, eps: f64, points: usize) -> Result<String, JsError> {
    diagram_json(input, eps, points).map_err(|e| JsError::new(&e))
}
