//! The kernel `K_k(x, y) = Σ_{j>=k} i^{-β_j} j_{-α_j}(|x||y|) ψ_j(x̂) conj(ψ_j(ŷ))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::i_pow_neg;
use crate::angular::{harmonic_multiplicity, AngularBasis, Direction};
use crate::error::{Error, Result};
use crate::oscillator::SpectralTable;
use crate::specfun::{j_scaled, j_scaled_weighted, legendre_p};
use statrs::function::gamma::gamma;

/// A truncated kernel whose last-block magnitude exceeds this is flagged.
pub const TAIL_WARNING: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelPath {
    ModeSum,
    /// `N = 3`, constant `a`: `Σ_m Y_l^m conj(Y_l^m) = (2l+1)/(4π) P_l(x̂·ŷ)`.
    LegendreCollapsed,
}

#[derive(Debug, Clone)]
pub struct KernelSpec {
    table: SpectralTable,
    k_start: usize,
    k_trunc: usize,
    path: KernelPath,
    /// Degrees `l` summed by the collapsed path.
    degrees: Vec<usize>,
    /// Bound on `Σ |ψ|^2` over the last included block.
    tail_weight: f64,
}

/// Kernel value with truncation diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    /// Magnitude bound of the last included degree block (or mode).
    pub tail: f64,
    pub warning: Option<String>,
}

impl KernelSpec {
    /// `k_start` and `k_trunc` are 1-based and inclusive.
    pub fn new(table: &SpectralTable, k_start: usize, k_trunc: usize, path: KernelPath) -> Result<Self> {
        if k_start == 0 || k_start > k_trunc || k_trunc > table.k_max() {
            return Err(Error::Bounds(format!(
                "need 1 <= k_start ({k_start}) <= K_trunc ({k_trunc}) <= K_max ({})",
                table.k_max()
            )));
        }
        table.require_hardy()?;
        let basis = table.eigensystem().basis();
        let mut degrees = Vec::new();
        let tail_weight = match (path, basis) {
            (KernelPath::LegendreCollapsed, AngularBasis::AnalyticConstant { dim: 3, labels }) => {
                let (l0, m0) = labels[k_start - 1];
                let (l1, m1) = labels[k_trunc - 1];
                if m0 != -(l0 as i64) || m1 != l1 as i64 {
                    return Err(Error::validation(format!(
                        "collapsed kernel needs whole degree blocks; modes {k_start}..={k_trunc} split a block"
                    )));
                }
                degrees.extend(l0..=l1);
                (2 * l1 + 1) as f64 / (4.0 * PI)
            }
            (KernelPath::LegendreCollapsed, _) => {
                return Err(Error::validation(
                    "the collapsed kernel path needs N = 3 with constant a (analytic harmonics)",
                ))
            }
            (KernelPath::ModeSum, AngularBasis::AnalyticConstant { dim: 3, labels }) => {
                let l = labels[k_trunc - 1].0;
                (2 * l + 1) as f64 / (4.0 * PI)
            }
            (KernelPath::ModeSum, AngularBasis::AnalyticConstant { dim, labels }) => {
                // addition theorem: Σ_m |Y_lm|^2 = dim H_l / |S^{N-1}|
                let l = labels[k_trunc - 1].0;
                let n = *dim as f64;
                let area = 2.0 * PI.powf(0.5 * n) / gamma(0.5 * n);
                harmonic_multiplicity(*dim, l) as f64 / area
            }
            (KernelPath::ModeSum, AngularBasis::CircleFourier { .. }) => {
                let c = table.eigensystem().coefficients(k_trunc - 1);
                let s: f64 = c.iter().map(|z| z.norm()).sum();
                s * s / (2.0 * PI)
            }
            (KernelPath::ModeSum, AngularBasis::SphereHarmonic { l_max }) => {
                let c = table.eigensystem().coefficients(k_trunc - 1);
                let s: f64 = c.iter().map(|z| z.norm_sqr()).sum();
                s * ((l_max + 1) * (l_max + 1)) as f64 / (4.0 * PI)
            }
        };
        Ok(KernelSpec {
            table: table.clone(),
            k_start,
            k_trunc,
            path,
            degrees,
            tail_weight,
        })
    }

    pub fn table(&self) -> &SpectralTable {
        &self.table
    }

    pub fn k_start(&self) -> usize {
        self.k_start
    }

    pub fn k_trunc(&self) -> usize {
        self.k_trunc
    }

    pub fn path(&self) -> KernelPath {
        self.path
    }

    /// `ρ^{α_{k_start}} |K_k|`, the quantity bounded uniformly for the tail kernel.
    pub fn weighted_modulus(&self, value: Complex64, rho: f64) -> f64 {
        let alpha = self.table.rows()[self.k_start - 1].alpha;
        rho.powf(alpha) * value.norm()
    }
}

/// `j_{-α}(ρ)`, including the `ρ = 0` limit (zero for `α < 0`).
fn radial_factor(dim: usize, alpha: f64, rho: f64) -> Result<f64> {
    if rho > 0.0 {
        return j_scaled(dim, alpha, rho);
    }
    if alpha < 0.0 {
        Ok(0.0)
    } else if alpha == 0.0 {
        j_scaled_weighted(dim, alpha, 0.0)
    } else {
        Err(Error::domain(format!(
            "j_(-alpha) is singular at 0 for alpha = {alpha} > 0"
        )))
    }
}

pub fn kernel_eval(spec: &KernelSpec, x_dir: Direction, y_dir: Direction, rho: f64) -> Result<KernelValue> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::domain(format!("kernel needs rho >= 0, got {rho}")));
    }
    let dim = spec.table.dim();
    let rows = spec.table.rows();
    let mut value = Complex64::new(0.0, 0.0);
    let last_radial;
    match spec.path {
        KernelPath::LegendreCollapsed => {
            let x = x_dir.unit_vector();
            let y = y_dir.unit_vector();
            if x.len() != 3 || y.len() != 3 {
                return Err(Error::validation("collapsed kernel needs directions on S^2"));
            }
            let cos_g = (x[0] * y[0] + x[1] * y[1] + x[2] * y[2]).clamp(-1.0, 1.0);
            let mut k = spec.k_start - 1;
            let mut radial = 0.0;
            for &l in &spec.degrees {
                let row = rows[k];
                radial = radial_factor(dim, row.alpha, rho)?;
                let ang = (2 * l + 1) as f64 / (4.0 * PI) * legendre_p(l, cos_g)?;
                value += i_pow_neg(row.beta) * (radial * ang);
                k += 2 * l + 1;
            }
            last_radial = radial;
        }
        KernelPath::ModeSum => {
            let eig = spec.table.eigensystem();
            let mut cached: Option<(f64, f64)> = None;
            let mut radial = 0.0;
            for (k, &row) in rows.iter().enumerate().take(spec.k_trunc).skip(spec.k_start - 1) {
                radial = match cached {
                    Some((a, v)) if a == row.alpha => v,
                    _ => {
                        let v = radial_factor(dim, row.alpha, rho)?;
                        cached = Some((row.alpha, v));
                        v
                    }
                };
                if radial == 0.0 {
                    continue;
                }
                let psi_x = eig.eval_mode(k, x_dir)?;
                let psi_y = eig.eval_mode(k, y_dir)?;
                value += i_pow_neg(row.beta) * radial * psi_x * psi_y.conj();
            }
            last_radial = radial;
        }
    }
    let tail = last_radial.abs() * spec.tail_weight;
    let warning = (tail > TAIL_WARNING).then(|| {
        format!(
            "kernel truncated at K = {} with last-block magnitude {tail:.3e}",
            spec.k_trunc
        )
    });
    Ok(KernelValue { value, tail, warning })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{constant_a_through_degree, solve_circle, AngularProblem, FourierSeries};
    use crate::oscillator::build_table;
    use std::sync::Arc;

    fn free_table(l_max: usize) -> SpectralTable {
        let e = Arc::new(constant_a_through_degree(3, 0.0, l_max).unwrap());
        build_table(&e, 3, e.len()).unwrap()
    }

    fn dir(theta: f64, phi: f64) -> Direction {
        Direction::Sphere { theta, phi }
    }

    #[test]
    fn origin_value() {
        let t = free_table(4);
        let spec = KernelSpec::new(&t, 1, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let k = kernel_eval(&spec, dir(0.3, 0.1), dir(2.0, 1.0), 0.0).unwrap();
        let expect = i_pow_neg(0.5) * ((2.0 / PI).sqrt() / (4.0 * PI));
        assert!((k.value - expect).norm() < 1e-15);
    }

    #[test]
    fn paths_agree() {
        let t = free_table(12);
        let a = KernelSpec::new(&t, 1, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let b = KernelSpec::new(&t, 1, t.k_max(), KernelPath::ModeSum).unwrap();
        for (x, y, rho) in [(dir(0.3, 0.1), dir(2.0, 1.0), 0.7), (dir(1.1, 2.5), dir(0.2, 4.0), 3.2)] {
            let ka = kernel_eval(&a, x, y, rho).unwrap().value;
            let kb = kernel_eval(&b, x, y, rho).unwrap().value;
            assert!((ka - kb).norm() < 1e-13, "{ka} vs {kb}");
        }
    }

    #[test]
    fn plane_wave_with_branch_phase() {
        // (2π)^{3/2} K = e^{-iπ/4} e^{-iX·Y}
        let t = free_table(40);
        let spec = KernelSpec::new(&t, 1, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let x = dir(0.4, 0.0);
        let y = dir(1.3, 2.1);
        let xv = x.unit_vector();
        let yv = y.unit_vector();
        let cos_g: f64 = xv.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let rho = 4.0;
        let k = kernel_eval(&spec, x, y, rho).unwrap();
        let expect = Complex64::from_polar(1.0, -PI / 4.0 - rho * cos_g);
        assert!(((2.0 * PI).powf(1.5) * k.value - expect).norm() < 1e-10);
        assert!(k.warning.is_none());
    }

    #[test]
    fn tail_kernel_drops_leading_modes() {
        let t = free_table(6);
        let full = KernelSpec::new(&t, 1, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let tail = KernelSpec::new(&t, 2, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let first = KernelSpec::new(&t, 1, 1, KernelPath::ModeSum).unwrap();
        let (x, y) = (dir(0.5, 0.5), dir(2.5, 1.5));
        let kf = kernel_eval(&full, x, y, 1.7).unwrap().value;
        let kt = kernel_eval(&tail, x, y, 1.7).unwrap().value;
        let k1 = kernel_eval(&first, x, y, 1.7).unwrap().value;
        assert!((kf - kt - k1).norm() < 1e-15);
    }

    #[test]
    fn spec_validation() {
        let t = free_table(3);
        assert!(matches!(
            KernelSpec::new(&t, 0, 3, KernelPath::ModeSum),
            Err(Error::Bounds(_))
        ));
        assert!(matches!(
            KernelSpec::new(&t, 3, 2, KernelPath::ModeSum),
            Err(Error::Bounds(_))
        ));
        assert!(KernelSpec::new(&t, 1, 3, KernelPath::LegendreCollapsed).is_err());
        assert!(KernelSpec::new(&t, 3, 4, KernelPath::LegendreCollapsed).is_err());
        assert!(KernelSpec::new(&t, 2, 4, KernelPath::LegendreCollapsed).is_ok());
    }

    #[test]
    fn truncation_warning_fires_for_large_rho() {
        let t = free_table(10);
        let spec = KernelSpec::new(&t, 1, t.k_max(), KernelPath::LegendreCollapsed).unwrap();
        let k = kernel_eval(&spec, dir(0.1, 0.0), dir(0.2, 0.0), 20.0).unwrap();
        assert!(k.warning.is_some());
        assert!(kernel_eval(&spec, dir(0.1, 0.0), dir(0.2, 0.0), -1.0).is_err());
    }

    #[test]
    fn circle_mode_sum_runs() {
        let p = AngularProblem::circle(FourierSeries::constant(0.0), FourierSeries::constant(0.3), 8);
        let e = Arc::new(solve_circle(&p, 1e-11).unwrap());
        let t = build_table(&e, 2, 9).unwrap();
        let spec = KernelSpec::new(&t, 1, 9, KernelPath::ModeSum).unwrap();
        let k = kernel_eval(&spec, Direction::Circle(0.2), Direction::Circle(1.0), 0.8).unwrap();
        assert!(k.value.norm().is_finite());
        assert!(KernelSpec::new(&t, 1, 9, KernelPath::LegendreCollapsed).is_err());
    }
}
