//! Run configuration. Every block rejects unknown keys; defaults are filled
//! in before hashing so the provenance header records what actually ran.

use std::sync::Arc;

use schroflow::angular::{
    constant_a_spectrum, constant_a_through_degree, solve_circle, solve_sphere, AngularEigensystem, AngularProblem,
    FourierSeries, ScalarCoeff, SphereFn, DEFAULT_TOL,
};
use schroflow::flow::Window;
use schroflow::oscillator::{build_table, ModeIndex, SpectralTable};
use schroflow::quad::RadialQuadrature;
use schroflow::radialfd::{CompareParams, FdParams, HeatScheme};
use schroflow::specfun::legendre_p;
use schroflow::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default = "empty_object")]
    pub experiment: Value,
    #[serde(default)]
    pub output: OutputBlock,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

/// A coefficient on the sphere or circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant(f64),
    /// `[q, re, im]` triples of `f̂_q`; `N = 2` only.
    Fourier(Vec<(i64, f64, f64)>),
    /// Axisymmetric `Σ c_l P_l(cos θ)`; `N = 3` only, solved by Galerkin.
    Legendre(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub dim: usize,
    pub a: Coefficient,
    #[serde(default)]
    pub magnetic: Option<Coefficient>,
    /// Rows of the spectral table.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Galerkin truncation: `K` on the circle, `L_max` on the sphere.
    #[serde(default = "default_truncation")]
    pub truncation: usize,
}

fn default_k_max() -> usize {
    16
}

fn default_truncation() -> usize {
    32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default = "default_out")]
    pub dir: String,
}

fn default_out() -> String {
    "out".into()
}

impl Default for OutputBlock {
    fn default() -> Self {
        OutputBlock { dir: default_out() }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl Problem {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.dim < 2 {
            return Err(bad(format!("dim must be >= 2, got {}", self.dim)));
        }
        if self.k_max == 0 {
            return Err(bad("k_max must be >= 1"));
        }
        if self.magnetic.is_some() && self.dim != 2 {
            return Err(bad("magnetic potentials are only supported for dim = 2"));
        }
        match (&self.a, self.dim) {
            (Coefficient::Fourier(_), d) if d != 2 => Err(bad("fourier coefficients need dim = 2")),
            (Coefficient::Legendre(_), d) if d != 3 => Err(bad("legendre coefficients need dim = 3")),
            (Coefficient::Legendre(c), _) if c.is_empty() => Err(bad("legendre coefficient list is empty")),
            _ => Ok(()),
        }
    }

    /// Constant `a` with no magnetic field, the case with analytic harmonics.
    pub fn constant_a(&self) -> Option<f64> {
        match (&self.a, &self.magnetic, self.dim) {
            (Coefficient::Constant(a), None, d) if d >= 3 => Some(*a),
            _ => None,
        }
    }

    fn eigensystem(&self, count: usize) -> Result<AngularEigensystem, CliError> {
        if let Some(a) = self.constant_a() {
            return Ok(constant_a_spectrum(self.dim, a, count)?);
        }
        match self.dim {
            2 => {
                let a = fourier(&self.a)?;
                let mag = match &self.magnetic {
                    Some(m) => fourier(m)?,
                    None => FourierSeries::zero(),
                };
                let p = AngularProblem::circle(a, mag, self.truncation);
                Ok(solve_circle(&p, DEFAULT_TOL)?)
            }
            3 => {
                let scalar = match &self.a {
                    Coefficient::Legendre(c) => {
                        let c = c.clone();
                        ScalarCoeff::Sphere(SphereFn::new(move |theta, _| {
                            let x = theta.cos();
                            c.iter()
                                .enumerate()
                                .map(|(l, cl)| cl * legendre_p(l, x).unwrap_or(0.0))
                                .sum()
                        }))
                    }
                    _ => return Err(bad("unsupported coefficient for dim = 3")),
                };
                Ok(solve_sphere(
                    &AngularProblem::sphere(scalar, self.truncation),
                    DEFAULT_TOL,
                )?)
            }
            _ => Err(bad("dim >= 4 supports constant a only")),
        }
    }

    pub fn table(&self) -> Result<SpectralTable, CliError> {
        self.validate()?;
        let e = Arc::new(self.eigensystem(self.k_max)?);
        if e.len() < self.k_max {
            return Err(bad(format!(
                "k_max = {} exceeds the {} computed modes",
                self.k_max,
                e.len()
            )));
        }
        Ok(build_table(&e, self.dim, self.k_max)?)
    }

    /// Table covering all degrees `l <= l_max`, for the collapsed kernel.
    pub fn table_through_degree(&self, l_max: usize) -> Result<SpectralTable, CliError> {
        self.validate()?;
        let a = self
            .constant_a()
            .ok_or_else(|| bad("a degree cutoff needs constant a in dim >= 3"))?;
        let e = Arc::new(constant_a_through_degree(self.dim, a, l_max)?);
        Ok(build_table(&e, self.dim, e.len())?)
    }
}

fn fourier(c: &Coefficient) -> Result<FourierSeries, CliError> {
    match c {
        Coefficient::Constant(v) => Ok(FourierSeries::constant(*v)),
        Coefficient::Fourier(t) => Ok(FourierSeries::from_coefficients(
            t.iter().map(|&(q, re, im)| (q, Complex64::new(re, im))),
        )?),
        Coefficient::Legendre(_) => Err(bad("legendre coefficients need dim = 3")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSel {
    pub n: usize,
    pub j: usize,
}

impl From<ModeSel> for ModeIndex {
    fn from(m: ModeSel) -> Self {
        ModeIndex::new(m.n, m.j)
    }
}

impl Default for ModeSel {
    fn default() -> Self {
        ModeSel { n: 0, j: 1 }
    }
}

/// Either an explicit list or `2^lo ..= 2^hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Times {
    List(Vec<f64>),
    Dyadic(i32, i32),
}

impl Times {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Times::List(v) => v.clone(),
            Times::Dyadic(lo, hi) => schroflow::flow::dyadic_times(*lo, *hi),
        }
    }
}

/// `points` radii `r_lo + (i + 1/2)(r_hi - r_lo)/points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Sweep {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        if self.points == 0 || !(self.hi > self.lo) || !(self.lo >= 0.0) {
            return Err(bad(format!("empty or invalid sweep {self:?}")));
        }
        let h = (self.hi - self.lo) / self.points as f64;
        Ok((0..self.points).map(|i| self.lo + (i as f64 + 0.5) * h).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteSel {
    Closed,
    Kernel,
    Fd,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Datum {
    /// The normalised oscillator mode `Ṽ_{n,j}`.
    Mode,
    /// `e^{-r^2/4}` in angular mode `j`.
    Gaussian,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveExp {
    #[serde(default = "default_route")]
    pub route: RouteSel,
    #[serde(default = "default_datum")]
    pub datum: Datum,
    #[serde(default)]
    pub mode: ModeSel,
    #[serde(default = "default_evolve_times")]
    pub times: Times,
    #[serde(default = "default_radii")]
    pub radii: Sweep,
    #[serde(default)]
    pub fd: FdParams,
    #[serde(default = "default_kernel_quad")]
    pub kernel_quad: RadialQuadrature,
}

fn default_route() -> RouteSel {
    RouteSel::Closed
}

fn default_datum() -> Datum {
    Datum::Mode
}

fn default_evolve_times() -> Times {
    Times::List(vec![1.0])
}

fn default_radii() -> Sweep {
    Sweep {
        lo: 0.1,
        hi: 8.0,
        points: 80,
    }
}

fn default_kernel_quad() -> RadialQuadrature {
    CompareParams::default().kernel_quad
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Synthetic {
    pub exponent: f64,
    #[serde(default = "one")]
    pub scale: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayExp {
    #[serde(default)]
    pub mode: ModeSel,
    /// Defaults to `α_j`, which makes the sup finite at the origin.
    #[serde(default)]
    pub weight: Option<f64>,
    #[serde(default = "default_decay_window")]
    pub window: Window,
    #[serde(default = "default_decay_times")]
    pub times: Times,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Fit `scale · t^exponent` instead of an evolution.
    #[serde(default)]
    pub synthetic: Option<Synthetic>,
}

fn default_decay_window() -> Window {
    Window { r_lo: 0.0, r_hi: 8.0 }
}

fn default_decay_times() -> Times {
    Times::Dyadic(0, 10)
}

fn default_samples() -> usize {
    200
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathSel {
    ModeSum,
    LegendreCollapsed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelExp {
    #[serde(default = "one_usize")]
    pub k_start: usize,
    /// Degree cutoff (constant `a`, `N >= 3`); otherwise the table's `k_max` is used.
    #[serde(default)]
    pub l_max: Option<usize>,
    #[serde(default = "default_path")]
    pub path: PathSel,
    pub rho: Sweep,
    /// Angles between `x̂` and `ŷ`, radians.
    #[serde(default = "default_angles")]
    pub angles: Vec<f64>,
}

fn one_usize() -> usize {
    1
}

fn default_path() -> PathSel {
    PathSel::ModeSum
}

fn default_angles() -> Vec<f64> {
    vec![0.0, 0.5 * std::f64::consts::PI, std::f64::consts::PI]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatFd {
    #[serde(default = "default_heat_cells")]
    pub cells: usize,
    #[serde(default = "default_heat_r_max")]
    pub r_max: f64,
    #[serde(default = "default_heat_dt")]
    pub dt: f64,
    #[serde(default = "default_heat_scheme")]
    pub scheme: HeatScheme,
    #[serde(default = "one")]
    pub t0: f64,
    #[serde(default = "two")]
    pub t1: f64,
}

fn default_heat_cells() -> usize {
    6000
}

fn default_heat_r_max() -> f64 {
    30.0
}

fn default_heat_dt() -> f64 {
    1e-3
}

fn default_heat_scheme() -> HeatScheme {
    HeatScheme::CrankNicolson
}

fn two() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatExp {
    #[serde(default = "one_usize")]
    pub k: usize,
    #[serde(default = "default_r_window")]
    pub r_window: (f64, f64),
    #[serde(default = "default_t_window")]
    pub t_window: (f64, f64),
    #[serde(default = "default_dr")]
    pub dr: f64,
    #[serde(default = "default_dt_res")]
    pub dt: f64,
    /// Fixed `r/√t` of the exponent fit.
    #[serde(default = "default_xi")]
    pub xi: f64,
    #[serde(default = "default_decay_times")]
    pub fit_times: Times,
    /// Profile written to heat.csv.
    #[serde(default = "default_radii")]
    pub radii: Sweep,
    #[serde(default = "default_heat_times")]
    pub times: Times,
    #[serde(default)]
    pub fd: Option<HeatFd>,
}

fn default_r_window() -> (f64, f64) {
    (0.5, 5.0)
}

fn default_t_window() -> (f64, f64) {
    (1.0, 2.0)
}

fn default_dr() -> f64 {
    1.0 / 200.0
}

fn default_dt_res() -> f64 {
    1e-4
}

fn default_xi() -> f64 {
    0.7
}

fn default_heat_times() -> Times {
    Times::List(vec![1.0, 2.0])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareExp {
    #[serde(default)]
    pub mode: ModeSel,
    #[serde(default)]
    pub params: CompareParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumExp {}

/// Parses the experiment block for one command, filling defaults.
pub fn experiment<T: serde::de::DeserializeOwned + Serialize>(v: &Value) -> Result<T, CliError> {
    serde_json::from_value(v.clone()).map_err(|e| bad(format!("experiment block: {e}")))
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_rejected() {
        assert!(parse(r#"{"problem": {"dim": 3, "a": {"constant": 0}}, "extra": 1}"#).is_err());
        assert!(parse(r#"{"problem": {"dim": 3, "a": {"constant": 0}, "typo": 1}}"#).is_err());
        let c = parse(r#"{"problem": {"dim": 3, "a": {"constant": 0}}, "experiment": {"bogus": 2}}"#).unwrap();
        assert!(experiment::<DecayExp>(&c.experiment).is_err());
    }

    #[test]
    fn defaults_fill_in() {
        let c = parse(r#"{"problem": {"dim": 3, "a": {"constant": -0.1875}}}"#).unwrap();
        assert_eq!(c.problem.k_max, 16);
        assert_eq!(c.output.dir, "out");
        let d: DecayExp = experiment(&c.experiment).unwrap();
        assert_eq!(d.times.values().len(), 11);
        assert_eq!(d.mode, ModeSel { n: 0, j: 1 });
    }

    #[test]
    fn problem_shapes() {
        let c = parse(r#"{"problem": {"dim": 3, "a": {"constant": 0}, "magnetic": {"constant": 0.3}}}"#).unwrap();
        assert!(c.problem.table().is_err());
        let c = parse(r#"{"problem": {"dim": 2, "a": {"constant": 0}, "magnetic": {"constant": 0.3}, "k_max": 3}}"#)
            .unwrap();
        let t = c.problem.table().unwrap();
        assert!((t.rows()[0].mu - 0.09).abs() < 1e-10);
        let c = parse(r#"{"problem": {"dim": 3, "a": {"legendre": [0.5]}, "truncation": 3, "k_max": 4}}"#).unwrap();
        let t = c.problem.table().unwrap();
        assert!((t.rows()[0].mu - 0.5).abs() < 1e-9 && (t.rows()[1].mu - 2.5).abs() < 1e-9);
    }

    #[test]
    fn partial_nested_blocks() {
        let v = serde_json::json!({"params": {"t": 2.0, "fd": {"cells": 1000}}});
        let c: CompareExp = experiment(&v).unwrap();
        assert_eq!(c.params.t, 2.0);
        assert_eq!(c.params.fd.cells, 1000);
        assert_eq!(c.params.fd.dt, FdParams::default().dt);
        assert!(experiment::<CompareExp>(&serde_json::json!({"params": {"fd": {"cels": 1}}})).is_err());
    }

    #[test]
    fn sweep_rejects_empty() {
        assert!(Sweep {
            lo: 0.0,
            hi: 1.0,
            points: 0
        }
        .values()
        .is_err());
        assert_eq!(
            Sweep {
                lo: 0.0,
                hi: 1.0,
                points: 2
            }
            .values()
            .unwrap(),
            vec![0.25, 0.75]
        );
    }
}
