//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Every export returns a JSON string; the plain Rust functions underneath
//! are what the native tests exercise.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::sync::Arc;

use schroflow::angular::constant_a_spectrum;
use schroflow::flow::{decay_fit, dyadic_times, evolve_mode_closed_form, weighted_sup_closed_form, Window};
use schroflow::oscillator::{build_table, make_mode, ModeIndex, SpectralRow, SpectralTable};
use schroflow::quad::RadialQuadrature;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Demo sizes stay small enough to redraw on every slider move.
const MAX_K: usize = 64;
const MAX_POINTS: usize = 2000;

#[derive(Debug, Serialize)]
pub struct Spectrum {
    pub classification: &'static str,
    pub hardy_ok: bool,
    pub rows: Vec<SpectralRow>,
}

#[derive(Debug, Serialize)]
pub struct Profile {
    pub r: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub modulus: Vec<f64>,
    pub gamma: f64,
}

#[derive(Debug, Serialize)]
pub struct DecayCurve {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub slope: f64,
    pub theory: f64,
}

fn table(dim: usize, a: f64, k_max: usize) -> Result<SpectralTable, String> {
    if !(1..=MAX_K).contains(&k_max) {
        return Err(format!("k_max must be in 1..={MAX_K}"));
    }
    let e = Arc::new(constant_a_spectrum(dim, a, k_max).map_err(|e| e.to_string())?);
    build_table(&e, dim, k_max).map_err(|e| e.to_string())
}

/// Spectral table for constant `a` on `S^{N-1}`.
pub fn spectrum(dim: usize, a: f64, k_max: usize) -> Result<Spectrum, String> {
    let t = table(dim, a, k_max)?;
    Ok(Spectrum {
        classification: t.decay_class().as_str(),
        hardy_ok: t.hardy_ok(),
        rows: t.rows().to_vec(),
    })
}

/// `e^{-itH} Ṽ_{n,1}` on `points` radii in `(0, r_max]`.
pub fn profile(dim: usize, a: f64, n: usize, t: f64, r_max: f64, points: usize) -> Result<Profile, String> {
    if !(2..=MAX_POINTS).contains(&points) || !(r_max > 0.0) {
        return Err(format!("need 2..={MAX_POINTS} points and r_max > 0"));
    }
    let tab = table(dim, a, 1)?;
    tab.require_hardy().map_err(|e| e.to_string())?;
    let m = make_mode(ModeIndex::new(n, 1), &tab, &RadialQuadrature::default()).map_err(|e| e.to_string())?;
    let mut out = Profile {
        r: Vec::with_capacity(points),
        re: Vec::with_capacity(points),
        im: Vec::with_capacity(points),
        modulus: Vec::with_capacity(points),
        gamma: m.gamma,
    };
    for i in 1..=points {
        let r = r_max * i as f64 / points as f64;
        let u = evolve_mode_closed_form(&m, r, t).map_err(|e| e.to_string())?;
        out.r.push(r);
        out.re.push(u.re);
        out.im.push(u.im);
        out.modulus.push(u.norm());
    }
    Ok(out)
}

/// Weighted sup norm of the first mode at `t = 2^lo..2^hi`, with its fit.
pub fn decay(dim: usize, a: f64, weight: f64, lo: i32, hi: i32) -> Result<DecayCurve, String> {
    if !(hi - lo >= 3 && hi - lo <= 40) {
        return Err("need between 4 and 41 dyadic times".into());
    }
    let tab = table(dim, a, 1)?;
    tab.require_hardy().map_err(|e| e.to_string())?;
    let m = make_mode(ModeIndex::new(0, 1), &tab, &RadialQuadrature::default()).map_err(|e| e.to_string())?;
    let window = Window::new(0.0, 8.0).map_err(|e| e.to_string())?;
    let samples = dyadic_times(lo, hi)
        .into_iter()
        .map(|t| {
            Ok((
                t,
                weighted_sup_closed_form(&m, &tab, t, weight, window, 100).map_err(|e| e.to_string())?,
            ))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let rep = decay_fit(&samples, weight).map_err(|e| e.to_string())?;
    Ok(DecayCurve {
        times: rep.times,
        norms: rep.norms,
        slope: rep.fitted_slope,
        theory: -0.5 * dim as f64 + m.alpha,
    })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsValue> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string()))
        .map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = spectrum)]
pub fn spectrum_js(dim: usize, a: f64, k_max: usize) -> Result<String, JsValue> {
    to_js(spectrum(dim, a, k_max))
}

#[wasm_bindgen(js_name = profile)]
pub fn profile_js(dim: usize, a: f64, n: usize, t: f64, r_max: f64, points: usize) -> Result<String, JsValue> {
    to_js(profile(dim, a, n, t, r_max, points))
}

#[wasm_bindgen(js_name = decay)]
pub fn decay_js(dim: usize, a: f64, weight: f64, lo: i32, hi: i32) -> Result<String, JsValue> {
    to_js(decay(dim, a, weight, lo, hi))
}
