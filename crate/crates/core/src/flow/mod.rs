//! Propagation routes and decay experiments.
//!
//! Separated states `u(rθ) = Σ_j f_j(r) ψ_j(θ)`, the closed-form evolution of
//! oscillator modes, the pseudoconformal change of variables, the Bessel
//! kernel and its radial propagator, self-similar heat solutions, weighted sup
//! norms and log-log decay fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oscillator::NormalizedMode;
use crate::quad::RadialGrid;

mod decay;
mod heat;
mod kernel;
mod represent;

pub use decay::{decay_fit, dyadic_times, weighted_sup_closed_form, weighted_sup_norm, DecayReport, SupNorm, Window};
pub use heat::{heat_residual, heat_self_similar, HeatResidual, SelfSimilarHeat};
pub use kernel::{kernel_eval, KernelPath, KernelSpec, KernelValue, TAIL_WARNING};
pub use represent::{propagate_representation, MIN_POINTS_PER_PERIOD};

/// Radial profiles `f_j` on a shared grid, keyed by the 1-based angular mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparatedState {
    dim: usize,
    grid: RadialGrid,
    profiles: BTreeMap<usize, Vec<Complex64>>,
}

impl SeparatedState {
    pub fn new(dim: usize, grid: RadialGrid) -> Self {
        SeparatedState {
            dim,
            grid,
            profiles: BTreeMap::new(),
        }
    }

    pub fn single(dim: usize, grid: RadialGrid, j: usize, profile: Vec<Complex64>) -> Self {
        let mut s = SeparatedState::new(dim, grid);
        s.insert(j, profile).expect("profile length matches its own grid");
        s
    }

    /// Samples `f(r)` on the grid as mode `j`.
    pub fn from_fn(dim: usize, grid: RadialGrid, j: usize, f: impl Fn(f64) -> Complex64) -> Self {
        let profile = grid.radii().iter().map(|&r| f(r)).collect();
        SeparatedState::single(dim, grid, j, profile)
    }

    pub fn insert(&mut self, j: usize, profile: Vec<Complex64>) -> Result<()> {
        if j == 0 {
            return Err(Error::validation("angular modes are numbered from 1"));
        }
        if profile.len() != self.grid.len() {
            return Err(Error::validation(format!(
                "profile has {} samples, grid has {}",
                profile.len(),
                self.grid.len()
            )));
        }
        self.profiles.insert(j, profile);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn profile(&self, j: usize) -> Option<&[Complex64]> {
        self.profiles.get(&j).map(Vec::as_slice)
    }

    pub fn modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.profiles.keys().copied()
    }

    pub fn profiles(&self) -> impl Iterator<Item = (usize, &[Complex64])> {
        self.profiles.iter().map(|(&j, p)| (j, p.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    /// `(Σ_j ∫ |f_j|^2 r^{N-1} dr)^{1/2}` by the grid's quadrature.
    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_on(0.0, f64::INFINITY)
    }

    /// L² norm restricted to the shell `r_lo <= r <= r_hi`.
    pub fn l2_norm_on(&self, r_lo: f64, r_hi: f64) -> f64 {
        let p = self.dim as f64 - 1.0;
        let mut acc = 0.0;
        for prof in self.profiles.values() {
            for ((&r, &w), f) in self.grid.radii().iter().zip(self.grid.weights()).zip(prof) {
                if r >= r_lo && r <= r_hi {
                    acc += w * f.norm_sqr() * r.powf(p);
                }
            }
        }
        acc.sqrt()
    }

    /// Drops every mode `j < k`, i.e. the structural projection onto `𝒰_k`.
    pub fn from_mode(&self, k: usize) -> SeparatedState {
        SeparatedState {
            dim: self.dim,
            grid: self.grid.clone(),
            profiles: self.profiles.range(k..).map(|(&j, p)| (j, p.clone())).collect(),
        }
    }

    /// Relative L² distance on a shell; both states must share grid and modes.
    pub fn relative_l2_error(&self, reference: &SeparatedState, r_lo: f64, r_hi: f64) -> Result<f64> {
        if self.grid != reference.grid || self.dim != reference.dim {
            return Err(Error::validation("states live on different grids"));
        }
        let mut diff = SeparatedState::new(self.dim, self.grid.clone());
        for (j, r) in &reference.profiles {
            let mine = self.profiles.get(j);
            let d = match mine {
                Some(m) => m.iter().zip(r).map(|(a, b)| a - b).collect(),
                None => r.iter().map(|b| -b).collect(),
            };
            diff.profiles.insert(*j, d);
        }
        for (j, m) in &self.profiles {
            diff.profiles.entry(*j).or_insert_with(|| m.clone());
        }
        let denom = reference.l2_norm_on(r_lo, r_hi);
        if denom == 0.0 {
            return Err(Error::domain("reference state vanishes on the comparison shell"));
        }
        Ok(diff.l2_norm_on(r_lo, r_hi) / denom)
    }
}

/// Direction of the pseudoconformal change of variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pseudoconformal {
    /// `u ↦ φ(x) = (1+t^2)^{N/4} u(√(1+t^2) x) e^{-it|x|^2/4}`.
    Forward,
    /// `φ ↦ u`.
    Backward,
}

/// Applies the pseudoconformal map at time `t`.
///
/// The output lives on the input grid rescaled by `1/√(1+t²)` (forward) or
/// `√(1+t²)` (backward), so every output sample is exact and no interpolation
/// or extrapolation takes place.
pub fn pseudoconformal(state: &SeparatedState, t: f64, direction: Pseudoconformal) -> Result<SeparatedState> {
    if !t.is_finite() {
        return Err(Error::domain("pseudoconformal time must be finite"));
    }
    let s = (1.0 + t * t).sqrt();
    let half_dim = 0.5 * state.dim as f64;
    let (grid, amp) = match direction {
        Pseudoconformal::Forward => (state.grid.scaled(1.0 / s), s.powf(half_dim)),
        Pseudoconformal::Backward => (state.grid.scaled(s), s.powf(-half_dim)),
    };
    let mut out = SeparatedState::new(state.dim, grid);
    for (&j, prof) in &state.profiles {
        let mapped = prof
            .iter()
            .zip(state.grid.radii())
            .map(|(&f, &r)| {
                let phase = match direction {
                    Pseudoconformal::Forward => -t * r * r / (4.0 * s * s),
                    Pseudoconformal::Backward => t * r * r / 4.0,
                };
                f * Complex64::from_polar(amp, phase)
            })
            .collect();
        out.profiles.insert(j, mapped);
    }
    Ok(out)
}

/// Radial part of `e^{-itH} Ṽ_{n,j}` at `r > 0`:
/// `(1+t^2)^{-N/4+α/2} r^{-α} e^{-r^2/(4(1+t^2))} e^{i r^2 t/(4(1+t^2))} e^{-iγ arctan t} P(r^2/(2(1+t^2))) / ‖V‖`.
pub fn evolve_mode_closed_form(mode: &NormalizedMode, r: f64, t: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("closed-form evolution needs r > 0, got {r}")));
    }
    Ok(r.powf(-mode.alpha) * evolve_mode_weighted(mode, r, t)?)
}

/// `r^{α_j}` times [`evolve_mode_closed_form`]; finite at `r = 0`.
pub fn evolve_mode_weighted(mode: &NormalizedMode, r: f64, t: f64) -> Result<Complex64> {
    if !(r >= 0.0) || !t.is_finite() {
        return Err(Error::domain(format!(
            "closed-form evolution needs r >= 0 and finite t, got ({r}, {t})"
        )));
    }
    let s2 = 1.0 + t * t;
    let amp = s2.powf(-0.25 * mode.dim as f64 + 0.5 * mode.alpha)
        * (-r * r / (4.0 * s2)).exp()
        * mode.poly.eval(r * r / (2.0 * s2))
        / mode.norm;
    let phase = r * r * t / (4.0 * s2) - mode.gamma * t.atan();
    Ok(Complex64::from_polar(amp, phase))
}

/// The evolved mode sampled on a grid as a one-mode state.
pub fn evolve_mode_state(mode: &NormalizedMode, grid: &RadialGrid, t: f64) -> Result<SeparatedState> {
    let profile = grid
        .radii()
        .iter()
        .map(|&r| evolve_mode_closed_form(mode, r, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(SeparatedState::single(mode.dim, grid.clone(), mode.index.j, profile))
}

/// Free evolution of the Gaussian `e^{-|x|^2/4}` in `R^N`:
/// `(1+it)^{-N/2} e^{-r^2/(4(1+it))}`.
pub fn free_gaussian(dim: usize, r: f64, t: f64) -> Complex64 {
    let z = Complex64::new(1.0, t);
    z.powf(-0.5 * dim as f64) * (-r * r / (4.0 * z)).exp()
}

/// `i^{-β} = e^{-iπβ/2}`.
pub fn i_pow_neg(beta: f64) -> Complex64 {
    Complex64::from_polar(1.0, -0.5 * PI * beta)
}
