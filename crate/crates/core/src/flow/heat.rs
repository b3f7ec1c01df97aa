//! Self-similar solutions `v = t^{-N/2+α_k} r^{-α_k} e^{-r^2/4t} ψ_k` of
//! `v_t - Δv + a v/|x|^2 = 0`.

use num_complex::Complex64;
use serde::Serialize;

use crate::angular::constant_a_spectrum;
use crate::error::{Error, Result};
use crate::oscillator::{alpha_beta, half_dim_shift, SpectralTable};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelfSimilarHeat {
    pub dim: usize,
    /// Angular eigenvalue `μ_k`.
    pub mu: f64,
    pub alpha: f64,
}

impl SelfSimilarHeat {
    pub fn from_table(table: &SpectralTable, k: usize) -> Result<Self> {
        table.require_hardy()?;
        let row = table.row(k)?;
        Ok(SelfSimilarHeat {
            dim: table.dim(),
            mu: row.mu,
            alpha: row.alpha,
        })
    }

    /// Constant `a` on `S^{N-1}`, `N >= 3`.
    pub fn from_constant(dim: usize, a: f64, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Bounds("modes are numbered from 1".into()));
        }
        let eig = constant_a_spectrum(dim, a, k)?;
        let mu1 = eig.eigenvalues()[0];
        let c = half_dim_shift(dim);
        if !(mu1 > -(c * c)) {
            return Err(Error::domain(format!("Hardy condition violated: mu_1 = {mu1}")));
        }
        let mu = eig.eigenvalues()[k - 1];
        Ok(SelfSimilarHeat {
            dim,
            mu,
            alpha: alpha_beta(dim, mu).0,
        })
    }

    /// `r^{α} v = t^{-N/2+α} e^{-r^2/4t}`, defined for `r >= 0`.
    pub fn weighted(&self, r: f64, t: f64) -> Result<f64> {
        if !(t > 0.0) {
            return Err(Error::domain(format!(
                "self-similar heat solution needs t > 0, got {t}"
            )));
        }
        if !(r >= 0.0) {
            return Err(Error::domain(format!("radius must be >= 0, got {r}")));
        }
        Ok(t.powf(-0.5 * self.dim as f64 + self.alpha) * (-r * r / (4.0 * t)).exp())
    }

    /// Radial factor `t^{-N/2+α} r^{-α} e^{-r^2/4t}` for `r > 0`.
    pub fn value(&self, r: f64, t: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::domain(format!("radius must be > 0, got {r}")));
        }
        Ok(r.powf(-self.alpha) * self.weighted(r, t)?)
    }

    /// `t^{-N/2+α}`, the exponent of the weighted profile at fixed `r/√t`.
    pub fn time_exponent(&self) -> f64 {
        -0.5 * self.dim as f64 + self.alpha
    }
}

/// `v(r, t) ψ_k` for constant `a`, with `ψ_k(θ)` passed as `angular_value`.
pub fn heat_self_similar(dim: usize, a: f64, k: usize, r: f64, t: f64, angular_value: Complex64) -> Result<Complex64> {
    Ok(angular_value * SelfSimilarHeat::from_constant(dim, a, k)?.value(r, t)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeatResidual {
    pub max_residual: f64,
    pub max_value: f64,
    pub relative: f64,
}

/// Centered-difference residual of `v_t - v_rr - (N-1)/r v_r + μ/r^2 v` on a
/// tensor grid of `[r_lo, r_hi] × [t_lo, t_hi]`.
pub fn heat_residual(
    sol: &SelfSimilarHeat,
    r_window: (f64, f64),
    t_window: (f64, f64),
    dr: f64,
    dt: f64,
) -> Result<HeatResidual> {
    let (r_lo, r_hi) = r_window;
    let (t_lo, t_hi) = t_window;
    if !(r_lo - dr > 0.0) || !(r_hi > r_lo) || !(t_lo - dt > 0.0) || !(t_hi >= t_lo) || !(dr > 0.0) || !(dt > 0.0) {
        return Err(Error::domain("residual window must stay inside r > 0, t > 0"));
    }
    let nr = ((r_hi - r_lo) / dr).round() as usize;
    let nt = 10usize;
    let nd = sol.dim as f64 - 1.0;
    let mut max_residual = 0.0f64;
    let mut max_value = 0.0f64;
    for it in 0..=nt {
        let t = t_lo + (t_hi - t_lo) * it as f64 / nt as f64;
        for ir in 0..=nr {
            let r = r_lo + dr * ir as f64;
            let v = sol.value(r, t)?;
            let vt = (sol.value(r, t + dt)? - sol.value(r, t - dt)?) / (2.0 * dt);
            let vp = sol.value(r + dr, t)?;
            let vm = sol.value(r - dr, t)?;
            let vrr = (vp - 2.0 * v + vm) / (dr * dr);
            let vr = (vp - vm) / (2.0 * dr);
            let res = vt - vrr - nd / r * vr + sol.mu / (r * r) * v;
            max_residual = max_residual.max(res.abs());
            max_value = max_value.max(v.abs());
        }
    }
    Ok(HeatResidual {
        max_residual,
        max_value,
        relative: max_residual / max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_case_is_the_heat_profile() {
        let h = SelfSimilarHeat::from_constant(3, 0.0, 1).unwrap();
        for (r, t) in [(0.5f64, 1.0f64), (2.0, 0.3), (4.0, 7.0)] {
            let expect = t.powf(-1.5) * (-r * r / (4.0 * t)).exp();
            assert!((h.value(r, t).unwrap() - expect).abs() < 1e-15 * expect.max(1e-300));
        }
    }

    #[test]
    fn self_similar_scaling() {
        let h = SelfSimilarHeat::from_constant(3, -0.1875, 1).unwrap();
        assert_eq!(h.alpha, 0.25);
        assert_eq!(h.time_exponent(), -1.25);
        let xi = 0.8;
        let ratio = h.weighted(xi * 2.0, 4.0).unwrap() / h.weighted(xi, 1.0).unwrap();
        assert!((ratio - 4f64.powf(-1.25)).abs() < 1e-15);
    }

    #[test]
    fn residual_is_small() {
        for k in [1, 3] {
            let h = SelfSimilarHeat::from_constant(3, -0.1875, k).unwrap();
            let res = heat_residual(&h, (0.5, 5.0), (1.0, 2.0), 1.0 / 200.0, 1e-4).unwrap();
            assert!(res.relative < 1e-4, "k={k}: {res:?}");
        }
        // the wrong μ leaves an O(1) residual
        let mut wrong = SelfSimilarHeat::from_constant(3, -0.1875, 1).unwrap();
        wrong.mu += 0.5;
        assert!(
            heat_residual(&wrong, (0.5, 5.0), (1.0, 2.0), 1.0 / 200.0, 1e-4)
                .unwrap()
                .relative
                > 1e-2
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(heat_self_similar(3, -0.1875, 1, 1.0, 0.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(heat_self_similar(3, -0.3, 1, 1.0, 1.0, Complex64::new(1.0, 0.0)).is_err());
        assert!(heat_self_similar(3, -0.1875, 1, 1.0, 1.0, Complex64::new(1.0, 0.0)).is_ok());
    }
}
