//! Weighted sup norms on radial windows and log-log power-law fits.

use serde::{Deserialize, Serialize};

use super::{evolve_mode_closed_form, evolve_mode_weighted, SeparatedState};
use crate::error::{Error, Result};
use crate::oscillator::{NormalizedMode, SpectralTable};
use crate::quad::RadialGrid;

/// Closed radial window `[r_lo, r_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub r_lo: f64,
    pub r_hi: f64,
}

impl Window {
    pub fn new(r_lo: f64, r_hi: f64) -> Result<Self> {
        let w = Window { r_lo, r_hi };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_lo >= 0.0) || !(self.r_hi > self.r_lo) || !self.r_hi.is_finite() {
            return Err(Error::domain(format!(
                "empty or invalid window [{}, {}]",
                self.r_lo, self.r_hi
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupNorm {
    /// `(j, sup r^w |f_j| max|ψ_j|)`.
    pub per_mode: Vec<(usize, f64)>,
    /// Triangle-inequality bound: the sum of the per-mode values.
    pub combined: f64,
}

fn check_weight(w: f64, alpha: f64, window: &Window) -> Result<()> {
    if window.r_lo == 0.0 && w < alpha {
        return Err(Error::domain(format!(
            "weight {w} below alpha = {alpha} is unbounded at the origin; use r_lo > 0"
        )));
    }
    Ok(())
}

/// Grid sup norm `sup_{r ∈ window} r^w |f_j(r)| · max_θ |ψ_j(θ)|` of a state.
pub fn weighted_sup_norm(state: &SeparatedState, table: &SpectralTable, w: f64, window: Window) -> Result<SupNorm> {
    window.validate()?;
    let radii = state.grid().radii();
    if !radii.iter().any(|&r| window.contains(r)) {
        return Err(Error::domain(format!(
            "window [{}, {}] contains no grid point",
            window.r_lo, window.r_hi
        )));
    }
    let mut per_mode = Vec::new();
    for (j, prof) in state.profiles() {
        let row = table.row(j)?;
        check_weight(w, row.alpha, &window)?;
        let ang = table.eigensystem().sup_abs(j - 1)?;
        let sup = radii
            .iter()
            .zip(prof)
            .filter(|(&r, _)| window.contains(r))
            .map(|(&r, f)| r.powf(w) * f.norm())
            .fold(0.0f64, f64::max);
        per_mode.push((j, sup * ang));
    }
    let combined = per_mode.iter().map(|p| p.1).sum();
    Ok(SupNorm { per_mode, combined })
}

/// Sup of `r^w |e^{-itH} Ṽ_{n,j}|` over a window, sampled at `samples`
/// log-spaced and `samples` equispaced radii (plus `r = 0` when the window
/// starts there), times `max_θ |ψ_j|`.
pub fn weighted_sup_closed_form(
    mode: &NormalizedMode,
    table: &SpectralTable,
    t: f64,
    w: f64,
    window: Window,
    samples: usize,
) -> Result<f64> {
    window.validate()?;
    check_weight(w, mode.alpha, &window)?;
    if samples < 2 {
        return Err(Error::domain("need at least two samples per window"));
    }
    let ang = table.eigensystem().sup_abs(mode.index.j - 1)?;
    let log_lo = if window.r_lo > 0.0 {
        window.r_lo
    } else {
        window.r_hi * 1e-6
    };
    let mut radii = RadialGrid::log_spaced(log_lo, window.r_hi, samples)?.radii().to_vec();
    radii.extend(RadialGrid::uniform(log_lo, window.r_hi, samples)?.radii());
    let mut sup = 0.0f64;
    if window.r_lo == 0.0 {
        let at_zero = if w == mode.alpha {
            evolve_mode_weighted(mode, 0.0, t)?.norm()
        } else {
            0.0
        };
        sup = sup.max(at_zero);
    }
    for r in radii {
        let v = if w == mode.alpha {
            evolve_mode_weighted(mode, r, t)?.norm()
        } else {
            r.powf(w) * evolve_mode_closed_form(mode, r, t)?.norm()
        };
        sup = sup.max(v);
    }
    Ok(sup * ang)
}

/// Least-squares line through `(log t, log norm)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
    pub weight_exponent: f64,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub r_squared: f64,
}

pub fn decay_fit(samples: &[(f64, f64)], weight_exponent: f64) -> Result<DecayReport> {
    if samples.len() < 4 {
        return Err(Error::domain(format!(
            "decay fit needs >= 4 samples, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|p| !(p[1].0 > p[0].0)) || !(samples[0].0 > 0.0) {
        return Err(Error::domain(
            "sample abscissae must be positive and strictly increasing",
        ));
    }
    if let Some(bad) = samples.iter().find(|s| !(s.1 > 0.0) || !s.1.is_finite()) {
        return Err(Error::domain(format!("non-positive norm {} at t = {}", bad.1, bad.0)));
    }
    let n = samples.len() as f64;
    let xs: Vec<f64> = samples.iter().map(|s| s.0.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|s| s.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).min(1.0)
    };
    Ok(DecayReport {
        times: samples.iter().map(|s| s.0).collect(),
        norms: samples.iter().map(|s| s.1).collect(),
        weight_exponent,
        fitted_slope: slope,
        fitted_intercept: intercept,
        r_squared,
    })
}

/// `2^lo, ..., 2^hi`.
pub fn dyadic_times(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 2f64.powi(e)).collect()
}
