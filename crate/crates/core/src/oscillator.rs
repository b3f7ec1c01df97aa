//! Spectral bookkeeping for the singular harmonic oscillator `T = H + |x|^2/4`:
//! the indices `α_k`, `β_k`, the levels `γ_{n,j} = 2n - α_j + N/2`, the Hardy
//! classification, and the normalised eigenfunctions
//! `Ṽ_{n,j} = |x|^{-α_j} e^{-|x|^2/4} P_{j,n}(|x|^2/2) ψ_j / ‖V_{n,j}‖`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angular::AngularEigensystem;
use crate::error::{Error, Result};
use crate::flow::SeparatedState;
use crate::quad::{RadialGrid, RadialQuadrature};
use crate::specfun::PolySpec;

/// Tolerance used when matching oscillator levels.
pub const LEVEL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    /// `μ_1 >= 0`.
    ClassicalCandidate,
    /// `-((N-2)/2)^2 < μ_1 < 0`: the first mode is singular at the origin.
    LossOfDecay,
    /// Hardy condition violated.
    Invalid,
}

impl DecayClass {
    pub fn as_str(self) -> &'static str {
        match self {
            DecayClass::ClassicalCandidate => "classical_candidate",
            DecayClass::LossOfDecay => "loss_of_decay",
            DecayClass::Invalid => "invalid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralRow {
    /// 1-based mode number.
    pub k: usize,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Per-mode indices derived from the angular spectrum.
#[derive(Debug, Clone)]
pub struct SpectralTable {
    dim: usize,
    rows: Vec<SpectralRow>,
    hardy_ok: bool,
    decay_class: DecayClass,
    eigensystem: Arc<AngularEigensystem>,
}

/// `(N-2)/2`.
pub fn half_dim_shift(dim: usize) -> f64 {
    0.5 * (dim as f64 - 2.0)
}

/// `(α, β)` for an angular eigenvalue; `NaN` when the radicand is negative.
pub fn alpha_beta(dim: usize, mu: f64) -> (f64, f64) {
    let c = half_dim_shift(dim);
    let radicand = c * c + mu;
    let beta = if radicand >= 0.0 { radicand.sqrt() } else { f64::NAN };
    (c - beta, beta)
}

pub fn build_table(eigensystem: &Arc<AngularEigensystem>, dim: usize, k_max: usize) -> Result<SpectralTable> {
    if eigensystem.dim() != dim {
        return Err(Error::validation(format!(
            "eigensystem lives on S^{} but N = {dim}",
            eigensystem.dim() - 1
        )));
    }
    if k_max == 0 || k_max > eigensystem.len() {
        return Err(Error::Bounds(format!(
            "K_max = {k_max} but the eigensystem has {} modes",
            eigensystem.len()
        )));
    }
    let rows: Vec<SpectralRow> = eigensystem.eigenvalues()[..k_max]
        .iter()
        .enumerate()
        .map(|(i, &mu)| {
            let (alpha, beta) = alpha_beta(dim, mu);
            SpectralRow {
                k: i + 1,
                mu,
                alpha,
                beta,
            }
        })
        .collect();
    let c = half_dim_shift(dim);
    let mu1 = rows[0].mu;
    let hardy_ok = mu1 > -(c * c);
    let decay_class = if !hardy_ok {
        DecayClass::Invalid
    } else if mu1 < 0.0 {
        DecayClass::LossOfDecay
    } else {
        DecayClass::ClassicalCandidate
    };
    Ok(SpectralTable {
        dim,
        rows,
        hardy_ok,
        decay_class,
        eigensystem: Arc::clone(eigensystem),
    })
}

impl SpectralTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rows(&self) -> &[SpectralRow] {
        &self.rows
    }

    pub fn k_max(&self) -> usize {
        self.rows.len()
    }

    pub fn hardy_ok(&self) -> bool {
        self.hardy_ok
    }

    pub fn decay_class(&self) -> DecayClass {
        self.decay_class
    }

    pub fn eigensystem(&self) -> &Arc<AngularEigensystem> {
        &self.eigensystem
    }

    /// Row of mode `j` (1-based).
    pub fn row(&self, j: usize) -> Result<&SpectralRow> {
        if j == 0 || j > self.rows.len() {
            return Err(Error::Bounds(format!("mode j = {j} outside 1..={}", self.rows.len())));
        }
        Ok(&self.rows[j - 1])
    }

    pub fn require_hardy(&self) -> Result<()> {
        if self.hardy_ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "Hardy condition violated: mu_1 = {} <= -((N-2)/2)^2 = {}",
                self.rows[0].mu,
                -half_dim_shift(self.dim).powi(2)
            )))
        }
    }

    /// `k,mu,alpha,beta` rows with a header line, full round-trip precision.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mu,alpha,beta\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{:?},{:?},{:?}", r.k, r.mu, r.alpha, r.beta);
        }
        out
    }
}

/// Radial quantum number `n` and 1-based angular mode `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModeIndex {
    pub n: usize,
    pub j: usize,
}

impl ModeIndex {
    pub fn new(n: usize, j: usize) -> Self {
        ModeIndex { n, j }
    }
}

/// `γ_{n,j} = 2n - α_j + N/2`.
pub fn gamma_of(index: ModeIndex, table: &SpectralTable) -> Result<f64> {
    let row = table.row(index.j)?;
    Ok(2.0 * index.n as f64 - row.alpha + 0.5 * table.dim as f64)
}

/// All `(n, j)` with `j <= K_max`, `n <= n_cap` and `γ_{n,j} = gamma`.
pub fn level_multiplicity(gamma: f64, table: &SpectralTable, n_cap: usize) -> Vec<ModeIndex> {
    let mut out = Vec::new();
    for row in &table.rows {
        for n in 0..=n_cap {
            let g = 2.0 * n as f64 - row.alpha + 0.5 * table.dim as f64;
            if (g - gamma).abs() <= LEVEL_TOL {
                out.push(ModeIndex::new(n, row.k));
            }
        }
    }
    out
}

/// The first `count` oscillator modes ordered by `(γ, j, n)`.
pub fn modes_by_level(table: &SpectralTable, count: usize) -> Result<Vec<ModeIndex>> {
    table.require_hardy()?;
    let mut all = Vec::new();
    for row in &table.rows {
        for n in 0..=count {
            all.push((
                2.0 * n as f64 - row.alpha + 0.5 * table.dim as f64,
                ModeIndex::new(n, row.k),
            ));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.j.cmp(&b.1.j)).then(a.1.n.cmp(&b.1.n)));
    if all.len() < count {
        return Err(Error::Bounds(format!("only {} modes available", all.len())));
    }
    Ok(all.into_iter().take(count).map(|(_, m)| m).collect())
}

/// A normalised oscillator eigenfunction.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedMode {
    pub index: ModeIndex,
    pub dim: usize,
    pub gamma: f64,
    pub alpha: f64,
    /// `‖V_{n,j}‖_{L^2(R^N)}`.
    pub norm: f64,
    pub poly: PolySpec,
}

pub fn make_mode(index: ModeIndex, table: &SpectralTable, quad: &RadialQuadrature) -> Result<NormalizedMode> {
    table.require_hardy()?;
    let row = table.row(index.j)?;
    let dim = table.dim;
    let alpha = row.alpha;
    let poly = PolySpec::new(index.n, 0.5 * dim as f64 - alpha)?;
    let grid = quad.grid()?;
    let exponent = dim as f64 - 1.0 - 2.0 * alpha;
    let norm_sq = grid.integrate(|r| {
        let p = poly.eval(0.5 * r * r);
        r.powf(exponent) * (-0.5 * r * r).exp() * p * p
    });
    Ok(NormalizedMode {
        index,
        dim,
        gamma: gamma_of(index, table)?,
        alpha,
        norm: norm_sq.sqrt(),
        poly,
    })
}

impl NormalizedMode {
    /// `r^{α} × radial part`, i.e. `e^{-r^2/4} P(r^2/2) / ‖V‖`; finite at `r = 0`.
    pub fn weighted_radial(&self, r: f64) -> f64 {
        (-0.25 * r * r).exp() * self.poly.eval(0.5 * r * r) / self.norm
    }

    /// `r^{-α} e^{-r^2/4} P(r^2/2) / ‖V‖` for `r > 0`.
    pub fn radial(&self, r: f64) -> f64 {
        r.powf(-self.alpha) * self.weighted_radial(r)
    }

    /// Radial profile sampled on a grid.
    pub fn sample(&self, grid: &RadialGrid) -> Vec<Complex64> {
        grid.radii()
            .iter()
            .map(|&r| Complex64::new(self.radial(r), 0.0))
            .collect()
    }

    /// `Ṽ_{n,j}` as a one-mode separated state.
    pub fn to_state(&self, grid: &RadialGrid) -> SeparatedState {
        SeparatedState::single(self.dim, grid.clone(), self.index.j, self.sample(grid))
    }

    /// Radius beyond which the mode is below `1e-12` of its peak.
    pub fn effective_support(&self) -> f64 {
        let samples = 4000;
        let r_top = 60.0 + 4.0 * (self.index.n as f64).sqrt();
        let vals: Vec<(f64, f64)> = (1..=samples)
            .map(|i| {
                let r = r_top * i as f64 / samples as f64;
                (r, (r.powf(0.5 * (self.dim as f64 - 1.0)) * self.radial(r)).abs())
            })
            .collect();
        let peak = vals.iter().map(|v| v.1).fold(0.0f64, f64::max);
        vals.iter()
            .rev()
            .find(|v| v.1 > 1e-12 * peak)
            .map(|v| v.0)
            .unwrap_or(r_top)
    }
}

/// `Ṽ_{n,j}(r θ) = radial(r) ψ_j(θ)` with `ψ_j(θ)` supplied as `angular_value`.
pub fn eval_mode(mode: &NormalizedMode, r: f64, angular_value: Complex64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("eigenfunction evaluation needs r > 0, got {r}")));
    }
    Ok(angular_value * mode.radial(r))
}

/// `r^{α_j} Ṽ_{n,j}`, defined for `r >= 0`.
pub fn eval_mode_weighted(mode: &NormalizedMode, r: f64, angular_value: Complex64) -> Result<Complex64> {
    if !(r >= 0.0) {
        return Err(Error::domain(format!("weighted evaluation needs r >= 0, got {r}")));
    }
    Ok(angular_value * mode.weighted_radial(r))
}

/// Projection coefficient with an optional resolution warning.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub value: Complex64,
    pub warning: Option<String>,
}

/// `c = ∫ u conj(Ṽ_{n,j}) dx`, reduced by angular orthogonality to a radial
/// quadrature of `f_j(r) radial(r) r^{N-1}` over the state's grid.
pub fn project(state: &SeparatedState, mode: &NormalizedMode) -> Result<Projection> {
    if state.dim() != mode.dim {
        return Err(Error::validation(format!(
            "state in N = {} projected on a mode in N = {}",
            state.dim(),
            mode.dim
        )));
    }
    let Some(profile) = state.profile(mode.index.j) else {
        return Ok(Projection {
            value: Complex64::new(0.0, 0.0),
            warning: None,
        });
    };
    let grid = state.grid();
    let power = mode.dim as f64 - 1.0;
    let value: Complex64 = grid
        .radii()
        .iter()
        .zip(grid.weights())
        .zip(profile)
        .map(|((&r, &w), &f)| f * (w * mode.radial(r) * r.powf(power)))
        .sum();
    let support = mode.effective_support();
    let covered = support.min(grid.r_max());
    let points = grid.radii().iter().filter(|&&r| r <= support).count();
    let warning = if (points as f64) < 16.0 * covered {
        Some(format!(
            "grid has {points} points over the mode support (0, {support:.2}], fewer than 16 per unit radius"
        ))
    } else if grid.r_max() < support {
        Some(format!(
            "grid ends at {:.2} inside the mode support {support:.2}",
            grid.r_max()
        ))
    } else {
        None
    };
    Ok(Projection { value, warning })
}
