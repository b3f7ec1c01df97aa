//! Radial form of the representation formula, mode by mode:
//! `u_j(r,t) = e^{ir^2/4t} / (i (2t)^{N/2}) i^{-β_j} ∫ j_{-α_j}(rρ/2t) e^{iρ^2/4t} f_j(ρ) ρ^{N-1} dρ`.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{i_pow_neg, KernelSpec, SeparatedState};
use crate::error::{Error, Result};
use crate::quad::RadialGrid;
use crate::specfun::ScaledBessel;

/// Required samples per local oscillation period at the effective edge.
pub const MIN_POINTS_PER_PERIOD: f64 = 8.0;

/// Profiles below this fraction of their peak (with the `r^{(N-1)/2}` weight)
/// are treated as the end of the effective support.
const SUPPORT_CUTOFF: f64 = 1e-14;

/// Propagates `state` to time `t > 0` and samples the result on `out_grid`.
///
/// Modes `j < spec.k_start` are dropped (the `K_k` refinement); modes
/// above the truncation are rejected.
pub fn propagate_representation(
    state: &SeparatedState,
    t: f64,
    spec: &KernelSpec,
    out_grid: &RadialGrid,
) -> Result<SeparatedState> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("representation formula needs t > 0, got {t}")));
    }
    let table = spec.table();
    let dim = state.dim();
    if table.dim() != dim {
        return Err(Error::validation(format!(
            "state in N = {dim}, kernel in N = {}",
            table.dim()
        )));
    }
    let grid = state.grid();
    let rho = grid.radii();
    let half_weight = 0.5 * (dim as f64 - 1.0);
    let r_out_max = out_grid.r_max();
    let prefactor_mag = 1.0 / (2.0 * t).powf(0.5 * dim as f64);

    let mut out = SeparatedState::new(dim, out_grid.clone());
    for (j, f) in state.profiles() {
        if j < spec.k_start() {
            continue;
        }
        if j > spec.k_trunc() {
            return Err(Error::Bounds(format!(
                "state carries mode {j} beyond the kernel truncation {}",
                spec.k_trunc()
            )));
        }
        let row = table.row(j)?;
        let bessel = ScaledBessel::new(dim, row.alpha)?;

        let mags: Vec<f64> = f
            .iter()
            .zip(rho)
            .map(|(v, &r)| v.norm() * r.powf(half_weight))
            .collect();
        let peak = mags.iter().copied().fold(0.0f64, f64::max);
        let mut profile = vec![Complex64::new(0.0, 0.0); out_grid.len()];
        if peak > 0.0 {
            let edge = mags.iter().rposition(|&m| m > SUPPORT_CUTOFF * peak).unwrap_or(0);
            check_resolution(rho, edge, t, r_out_max)?;

            let g: Vec<(f64, Complex64)> = rho
                .iter()
                .zip(grid.weights())
                .zip(f)
                .zip(&mags)
                .filter(|(_, &m)| m > 0.0)
                .map(|(((&p, &w), &v), _)| {
                    (
                        p,
                        v * Complex64::from_polar(w * p.powi(dim as i32 - 1), p * p / (4.0 * t)),
                    )
                })
                .collect();
            let lead = i_pow_neg(row.beta) * Complex64::new(0.0, -prefactor_mag);
            for (slot, &r) in profile.iter_mut().zip(out_grid.radii()) {
                let mut acc = Complex64::new(0.0, 0.0);
                for &(p, gi) in &g {
                    acc += gi * bessel.value(r * p / (2.0 * t))?;
                }
                *slot = lead * Complex64::from_polar(1.0, r * r / (4.0 * t)) * acc;
            }
        }
        out.insert(j, profile)?;
    }
    Ok(out)
}

/// Local phase frequency of `e^{iρ^2/4t} j(rρ/2t)` is at most `(ρ + r)/(2t)`.
fn check_resolution(rho: &[f64], edge: usize, t: f64, r_out_max: f64) -> Result<()> {
    let lo = edge.saturating_sub(4);
    let hi = (edge + 4).min(rho.len() - 1);
    if hi == lo {
        return Err(Error::Accuracy("radial grid has a single point".into()));
    }
    let spacing = (rho[hi] - rho[lo]) / (hi - lo) as f64;
    let omega = (rho[edge] + r_out_max) / (2.0 * t);
    let period = 2.0 * PI / omega;
    let per_period = period / spacing;
    if per_period < MIN_POINTS_PER_PERIOD {
        return Err(Error::Accuracy(format!(
            "{per_period:.2} points per phase period at rho = {:.2} (t = {t}); need {MIN_POINTS_PER_PERIOD}",
            rho[edge]
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{constant_a_spectrum, constant_a_through_degree};
    use crate::flow::{evolve_mode_state, free_gaussian, KernelPath};
    use crate::oscillator::{build_table, make_mode, ModeIndex, SpectralTable};
    use crate::quad::RadialQuadrature;
    use std::sync::Arc;

    fn table(a: f64, count: usize) -> SpectralTable {
        let e = Arc::new(constant_a_spectrum(3, a, count).unwrap());
        build_table(&e, 3, e.len()).unwrap()
    }

    fn fine() -> RadialGrid {
        RadialQuadrature {
            panels: 160,
            ..RadialQuadrature::default()
        }
        .grid()
        .unwrap()
    }

    #[test]
    fn free_gaussian_fresnel_oracle() {
        let t = table(0.0, 1);
        let spec = KernelSpec::new(&t, 1, 1, KernelPath::ModeSum).unwrap();
        let grid = RadialQuadrature::default().grid().unwrap();
        let state = SeparatedState::from_fn(3, grid, 1, |r| Complex64::new((-r * r / 4.0).exp(), 0.0));
        let out_grid = RadialGrid::uniform(0.1, 8.0, 80).unwrap();
        let u = propagate_representation(&state, 1.0, &spec, &out_grid).unwrap();
        for (&r, &v) in out_grid.radii().iter().zip(u.profile(1).unwrap()) {
            let exact = free_gaussian(3, r, 1.0);
            assert!((v - exact).norm() < 1e-6, "r={r}: {v} vs {exact}");
        }
    }

    #[test]
    fn matches_closed_form_for_singular_mode() {
        let t = table(-0.1875, 1);
        let spec = KernelSpec::new(&t, 1, 1, KernelPath::ModeSum).unwrap();
        let m = make_mode(ModeIndex::new(0, 1), &t, &RadialQuadrature::default()).unwrap();
        let grid = fine();
        let state = m.to_state(&grid);
        let out_grid = RadialGrid::uniform(0.1, 8.0, 120).unwrap();
        for time in [0.5, 1.0, 2.0] {
            let u = propagate_representation(&state, time, &spec, &out_grid).unwrap();
            let exact = evolve_mode_state(&m, &out_grid, time).unwrap();
            let err = u.relative_l2_error(&exact, 0.1, 8.0).unwrap();
            assert!(err < 1e-3, "t={time}: {err}");
        }
    }

    #[test]
    fn zero_profile_gives_zero() {
        let t = table(0.0, 1);
        let spec = KernelSpec::new(&t, 1, 1, KernelPath::ModeSum).unwrap();
        let grid = RadialGrid::uniform(0.1, 5.0, 50).unwrap();
        let state = SeparatedState::from_fn(3, grid.clone(), 1, |_| Complex64::new(0.0, 0.0));
        let u = propagate_representation(&state, 1.0, &spec, &grid).unwrap();
        assert!(u.profile(1).unwrap().iter().all(|v| *v == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let t = table(0.0, 1);
        let spec = KernelSpec::new(&t, 1, 1, KernelPath::ModeSum).unwrap();
        let grid = RadialGrid::uniform(0.05, 12.0, 60).unwrap();
        let state = SeparatedState::from_fn(3, grid, 1, |r| Complex64::new((-r * r / 4.0).exp(), 0.0));
        let out = RadialGrid::uniform(0.1, 8.0, 10).unwrap();
        let err = propagate_representation(&state, 0.25, &spec, &out).unwrap_err();
        assert!(matches!(err, Error::Accuracy(_)));
        assert!(propagate_representation(&state, 0.0, &spec, &out).is_err());
    }

    #[test]
    fn tail_start_drops_modes() {
        let e = Arc::new(constant_a_through_degree(3, 2.0, 2).unwrap());
        let t = build_table(&e, 3, e.len()).unwrap();
        let spec = KernelSpec::new(&t, 2, t.k_max(), KernelPath::ModeSum).unwrap();
        let grid = RadialQuadrature::default().grid().unwrap();
        let q = RadialQuadrature::default();
        let mut state = make_mode(ModeIndex::new(0, 1), &t, &q).unwrap().to_state(&grid);
        let m3 = make_mode(ModeIndex::new(0, 3), &t, &q).unwrap();
        state.insert(3, m3.sample(&grid)).unwrap();
        let out_grid = RadialGrid::uniform(0.1, 6.0, 40).unwrap();
        let u = propagate_representation(&state, 1.0, &spec, &out_grid).unwrap();
        assert_eq!(u.modes().collect::<Vec<_>>(), vec![3]);
        let exact = evolve_mode_state(&m3, &out_grid, 1.0).unwrap();
        assert!(u.relative_l2_error(&exact, 0.1, 6.0).unwrap() < 1e-3);
    }
}
