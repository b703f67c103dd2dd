//! wasm-bindgen entry points for the static page in `www/`.
//!
//! Every function returns a JSON string; errors come back as `{"error": "..."}`
//! so the page never has to catch exceptions.

use dsp_core::assembly::{assemble_mfe, assemble_mhfe, condense_mhfe, mfe_to_dsp, manufactured_rhs, DspSystem, MaterialProps, StructuredMesh};
use dsp_core::krylov::{gmres, minres, KrylovOptions};
use dsp_core::linalg::EigenRange;
use dsp_core::precond::{BlockDiagonal, BlockTriangular};
use dsp_core::schur::{build_inner_operators, InnerKind, PrecondSpec, SchurRecipe};
use dsp_core::spectral::{
    compute_indicators, diagonal_bounds, full_spectrum, provenance, triangular_complex_disc, triangular_real_bounds,
    verify_bounds, BoundReport, IndicatorSet, SpectrumMode, SpectrumOptions,
};
use dsp_core::tolerances::{GMRES_TOL, MINRES_TOL};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest system for the spectrum view; dense eigensolves grow as N³.
pub const MAX_SPECTRUM_N: usize = 700;
/// Largest system for the solver view.
pub const MAX_SOLVE_N: usize = 20_000;

fn finish(r: Result<Value, String>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

fn range(v: &Value, key: &str) -> Result<EigenRange, String> {
    let pair = v.get(key).and_then(Value::as_array).ok_or_else(|| format!("missing interval `{key}`"))?;
    let num = |i: usize| pair.get(i).and_then(Value::as_f64).ok_or_else(|| format!("interval `{key}` needs two numbers"));
    let (lo, hi) = (num(0)?, num(1)?);
    if !(lo <= hi) {
        return Err(format!("interval `{key}` has min > max"));
    }
    Ok(EigenRange::new(lo, hi))
}

fn bounds_json(g: &IndicatorSet) -> Value {
    let t = triangular_real_bounds(g);
    let d = diagonal_bounds(g);
    json!({
        "triangular": { "lo": t.lo, "hi": t.hi, "window": [t.window.0, t.window.1] },
        "disc_radius": triangular_complex_disc(g).radius(),
        "diagonal": { "minus": [d.minus.0, d.minus.1], "plus": [d.plus.0, d.plus.1] },
    })
}

fn indicators_json(g: &IndicatorSet) -> Value {
    let mut m = serde_json::Map::new();
    for (name, r) in g.ranges() {
        m.insert(name.to_lowercase(), json!([r.min, r.max]));
    }
    Value::Object(m)
}

/// Bounds from indicator intervals given as
/// `{"a":[min,max],"s":..,"x":..,"d":..,"e":..,"r":..,"k":..}`.
#[wasm_bindgen]
pub fn bounds_from_indicators(indicators: &str) -> String {
    finish((|| {
        let v: Value = serde_json::from_str(indicators).map_err(|e| e.to_string())?;
        let g = IndicatorSet {
            a: range(&v, "a")?,
            s: range(&v, "s")?,
            x: range(&v, "x")?,
            d: range(&v, "d")?,
            e: range(&v, "e")?,
            r: range(&v, "r")?,
            k: range(&v, "k")?,
        };
        g.validate().map_err(|e| e.to_string())?;
        Ok(bounds_json(&g))
    })())
}

fn system(discretization: &str, cells: usize, cap: usize) -> Result<DspSystem, String> {
    let props = MaterialProps::default();
    let (dim, mhfe) = match discretization {
        "mfe2d" => (2, false),
        "mhfe2d" => (2, true),
        "mhfe3d" => (3, true),
        other => return Err(format!("unknown discretization `{other}`")),
    };
    let mesh = StructuredMesh::new(dim, cells).map_err(|e| e.to_string())?;
    let sys = if mhfe {
        condense_mhfe(&assemble_mhfe(&mesh, &props).map_err(|e| e.to_string())?, &props)
    } else {
        mfe_to_dsp(&assemble_mfe(&mesh, &props).map_err(|e| e.to_string())?, &props)
    }
    .map_err(|e| e.to_string())?;
    if sys.dim() > cap {
        return Err(format!("N = {} exceeds the demo limit {cap}; use a coarser mesh", sys.dim()));
    }
    Ok(sys)
}

fn recipe(name: &str, omega: f64) -> Result<SchurRecipe, String> {
    let r = match name {
        "s1" => SchurRecipe::s1(),
        "s2" => SchurRecipe::s2(),
        "s2-physical" => SchurRecipe::s2_physical(),
        other => return Err(format!("unknown recipe `{other}`")),
    };
    Ok(SchurRecipe { omega, ..r })
}

/// Indicators, bounds, both preconditioned spectra and the containment
/// verdicts for a small mesh.
#[wasm_bindgen]
pub fn spectrum_demo(discretization: &str, cells: u32, recipe_name: &str, omega: f64) -> String {
    finish((|| {
        let sys = system(discretization, cells as usize, MAX_SPECTRUM_N)?;
        let spec = PrecondSpec::new(InnerKind::Ic0, recipe(recipe_name, omega)?);
        let ops = build_inner_operators(&sys, &spec).map_err(|e| e.to_string())?;
        let g = compute_indicators(&sys, &ops).map_err(|e| e.to_string())?;
        let report = BoundReport::new(g, provenance(&sys, &ops));
        let mut spectra = serde_json::Map::new();
        for mode in [SpectrumMode::Triangular, SpectrumMode::Diagonal] {
            let sp = full_spectrum(&sys, &ops, mode, &SpectrumOptions::default()).map_err(|e| e.to_string())?;
            let v = verify_bounds(&sp, &report).map_err(|e| e.to_string())?;
            let checks: Vec<Value> = v
                .checks
                .iter()
                .map(|c| json!({ "name": c.name, "ran": c.ran, "passed": c.passed, "checked": c.checked, "exempt": c.exempt }))
                .collect();
            spectra.insert(
                mode.to_string(),
                json!({
                    "re": sp.values.iter().map(|z| z.re).collect::<Vec<_>>(),
                    "im": sp.values.iter().map(|z| z.im).collect::<Vec<_>>(),
                    "checks": checks,
                }),
            );
        }
        Ok(json!({
            "n": sys.n(), "m": sys.m(), "p": sys.p(), "N": sys.dim(),
            "provenance": report.provenance,
            "indicators": indicators_json(&g),
            "bounds": bounds_json(&g),
            "spectra": spectra,
        }))
    })())
}

/// Relative residual histories of GMRES with the block triangular and
/// MINRES with the block diagonal preconditioner.
#[wasm_bindgen]
pub fn convergence_demo(discretization: &str, cells: u32, recipe_name: &str, omega: f64) -> String {
    finish((|| {
        let sys = system(discretization, cells as usize, MAX_SOLVE_N)?;
        let spec = PrecondSpec::new(InnerKind::Ic0, recipe(recipe_name, omega)?);
        let ops = build_inner_operators(&sys, &spec).map_err(|e| e.to_string())?;
        let (b, x_true) = manufactured_rhs(&sys, 42).map_err(|e| e.to_string())?;
        let maxit = 4 * sys.dim();
        let tri = BlockTriangular::new(&sys, ops.clone()).map_err(|e| e.to_string())?;
        let g = gmres(&sys, &b, &tri, &KrylovOptions { tol: GMRES_TOL, maxit }).map_err(|e| e.to_string())?;
        let diag = BlockDiagonal::new(&sys, ops).map_err(|e| e.to_string())?;
        let m = minres(&sys, &b, &diag, &KrylovOptions { tol: MINRES_TOL, maxit }).map_err(|e| e.to_string())?;
        let err = |x: &[f64]| {
            let d: f64 = x.iter().zip(&x_true).map(|(a, b)| (a - b) * (a - b)).sum();
            (d / x_true.iter().map(|v| v * v).sum::<f64>()).sqrt()
        };
        let rel = |h: &[f64]| h.iter().map(|v| v / h[0]).collect::<Vec<_>>();
        Ok(json!({
            "N": sys.dim(),
            "gmres": { "history": rel(&g.history), "iterations": g.iterations, "converged": g.converged, "rel_err": err(&g.x) },
            "minres": { "history": rel(&m.history), "iterations": m.iterations, "converged": m.converged, "rel_err": err(&m.x) },
        }))
    })())
}
