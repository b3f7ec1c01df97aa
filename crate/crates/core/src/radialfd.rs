//! Radial finite differences per angular mode, in the variable
//! `w = r^{(N-1)/2} u` where the radial operator becomes
//! `A w = -w'' + (c/r^2) w`, `c = μ + (N-1)(N-3)/4`.
//!
//! Cell-centred grid `r_i = (i + 1/2) h`, `i < M`, `R = M h`; `1/r^2` is never
//! evaluated at the origin. The outer face `r = R` is Dirichlet (odd ghost).

use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{evolve_mode_closed_form, propagate_representation, KernelPath, KernelSpec, SeparatedState, Window};
use crate::oscillator::{make_mode, ModeIndex, SpectralTable};
use crate::quad::{RadialGrid, RadialQuadrature};

/// Treatment of the cell touching `r = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerBoundary {
    /// Second differences in `w` with an odd ghost `w_{-1} = -w_0` and the
    /// potential `c/r_i^2` sampled at the cell centre.
    OddGhost,
    /// Finite volumes for `-(r^{N-1} u')' / r^{N-1} + μ u / r^2`: the flux
    /// `r^{N-1} u'` vanishes on the face `r = 0`. Symmetrised with
    /// `w_i = (V_i/h)^{1/2} u_i`, `V_i` the shell volume of cell `i`.
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSchema {
    pub dim: usize,
    /// Angular eigenvalue `μ_k`.
    pub mu: f64,
    /// Effective inverse-square strength `c_k`.
    pub c: f64,
    pub h: f64,
    pub m: usize,
    pub dt: f64,
    pub inner: InnerBoundary,
}

impl RadialSchema {
    /// Schema for angular eigenvalue `mu` on `(0, r_max]` with `m` cells.
    pub fn new(dim: usize, mu: f64, r_max: f64, m: usize, dt: f64) -> Result<Self> {
        let n = dim as f64;
        let s = RadialSchema {
            dim,
            mu,
            c: mu + (n - 1.0) * (n - 3.0) / 4.0,
            h: r_max / m as f64,
            m,
            dt,
            inner: InnerBoundary::OddGhost,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_inner(mut self, inner: InnerBoundary) -> Self {
        self.inner = inner;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 || self.m < 2 || !(self.h > 0.0) || !(self.dt > 0.0) || !self.h.is_finite() {
            return Err(Error::Config(format!("invalid radial schema {self:?}")));
        }
        if !(self.c > -0.25) {
            return Err(Error::domain(format!(
                "c = {} <= -1/4: the mode violates the Hardy condition",
                self.c
            )));
        }
        Ok(())
    }

    pub fn r_max(&self) -> f64 {
        self.h * self.m as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.h
    }

    pub fn grid(&self) -> RadialGrid {
        RadialGrid::cell_centered(self.h, self.m).expect("validated schema")
    }

    /// `w_i / u_i`.
    pub fn scale(&self, i: usize) -> f64 {
        let n = self.dim as f64;
        match self.inner {
            InnerBoundary::OddGhost => self.radius(i).powf(0.5 * (n - 1.0)),
            InnerBoundary::ZeroFlux => {
                let lo = i as f64 * self.h;
                let hi = lo + self.h;
                ((hi.powf(n) - lo.powf(n)) / (n * self.h)).sqrt()
            }
        }
    }

    /// Diagonal and off-diagonal (`(i, i+1)` entries) of the symmetric
    /// operator `A`.
    pub fn operator(&self) -> (Vec<f64>, Vec<f64>) {
        let ih2 = 1.0 / (self.h * self.h);
        let m = self.m;
        match self.inner {
            InnerBoundary::OddGhost => {
                let diag = (0..m)
                    .map(|i| {
                        let r = self.radius(i);
                        let ghost = if i == 0 || i == m - 1 { ih2 } else { 0.0 };
                        2.0 * ih2 + ghost + self.c / (r * r)
                    })
                    .collect();
                (diag, vec![-ih2; m - 1])
            }
            InnerBoundary::ZeroFlux => {
                let n = self.dim as f64;
                let area = |f: usize| (f as f64 * self.h).powf(n - 1.0);
                let scale: Vec<f64> = (0..m).map(|i| self.scale(i)).collect();
                let diag = (0..m)
                    .map(|i| {
                        // outer face: odd ghost, i.e. twice the one-sided flux
                        let right = if i == m - 1 { 2.0 * area(m) } else { area(i + 1) };
                        let s = (area(i) + right) * ih2 + self.mu * self.radius(i).powf(n - 3.0);
                        s / (scale[i] * scale[i])
                    })
                    .collect();
                let off = (0..m - 1)
                    .map(|i| -area(i + 1) * ih2 / (scale[i] * scale[i + 1]))
                    .collect();
                (diag, off)
            }
        }
    }

    /// `A w`.
    pub fn apply<T>(&self, w: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let (d, o) = self.operator();
        apply_tridiagonal(&d, &o, w)
    }

    /// `w = s_i f_i` on the cell centres, `s_i ≈ r_i^{(N-1)/2}`.
    pub fn substitute(&self, f: &[Complex64]) -> Vec<Complex64> {
        f.iter().enumerate().map(|(i, &v)| v * self.scale(i)).collect()
    }

    /// Inverse of [`RadialSchema::substitute`].
    pub fn unsubstitute(&self, w: &[Complex64]) -> Vec<Complex64> {
        w.iter().enumerate().map(|(i, &v)| v / self.scale(i)).collect()
    }

    /// `(Σ h |w_i|^2)^{1/2}`, the discrete L² norm of `u`.
    pub fn discrete_norm<T: Copy + Into<Complex64>>(&self, w: &[T]) -> f64 {
        (self.h * w.iter().map(|&v| v.into().norm_sqr()).sum::<f64>()).sqrt()
    }
}

fn apply_tridiagonal<T>(d: &[f64], o: &[f64], w: &[T]) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let m = d.len();
    (0..m)
        .map(|i| {
            let mut v = w[i] * d[i];
            if i > 0 {
                v = v + w[i - 1] * o[i - 1];
            }
            if i + 1 < m {
                v = v + w[i + 1] * o[i];
            }
            v
        })
        .collect()
}

/// LU factors of a constant symmetric tridiagonal matrix, stored for
/// repeated Thomas solves.
#[derive(Debug, Clone)]
struct Tridiagonal<T> {
    off: Vec<T>,
    /// Modified super-diagonal `c'_i`.
    upper: Vec<T>,
    /// Pivots `d_i - o_{i-1} c'_{i-1}`.
    pivot: Vec<T>,
}

trait Field:
    Copy
    + std::ops::Mul<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Div<Output = Self>
    + std::ops::Add<Output = Self>
{
    fn magnitude(self) -> f64;
}

impl Field for f64 {
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Field for Complex64 {
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

impl<T: Field> Tridiagonal<T> {
    fn factor(diag: &[T], off: &[T]) -> Result<Self> {
        let m = diag.len();
        let mut upper = Vec::with_capacity(m);
        let mut pivot = Vec::with_capacity(m);
        for i in 0..m {
            let p = if i == 0 {
                diag[0]
            } else {
                diag[i] - off[i - 1] * upper[i - 1]
            };
            if !(p.magnitude() > 1e-300) || !p.magnitude().is_finite() {
                return Err(Error::numeric(format!("tridiagonal pivot {i} vanished"), p.magnitude()));
            }
            pivot.push(p);
            if i + 1 < m {
                upper.push(off[i] / p);
            }
        }
        Ok(Tridiagonal {
            off: off.to_vec(),
            upper,
            pivot,
        })
    }

    fn solve(&self, rhs: &mut [T]) {
        let m = rhs.len();
        rhs[0] = rhs[0] / self.pivot[0];
        for i in 1..m {
            rhs[i] = (rhs[i] - self.off[i - 1] * rhs[i - 1]) / self.pivot[i];
        }
        for i in (0..m - 1).rev() {
            rhs[i] = rhs[i] - self.upper[i] * rhs[i + 1];
        }
    }
}

/// Crank–Nicolson stepper for `i w_t = A w`.
#[derive(Debug, Clone)]
pub struct SchrodingerStepper {
    schema: RadialSchema,
    diag: Vec<f64>,
    off: Vec<f64>,
    lu: Tridiagonal<Complex64>,
}

impl SchrodingerStepper {
    pub fn new(schema: RadialSchema) -> Result<Self> {
        schema.validate()?;
        let tau = Complex64::new(0.0, 0.5 * schema.dt);
        let (diag, off) = schema.operator();
        let ld: Vec<Complex64> = diag.iter().map(|&d| 1.0 + tau * d).collect();
        let lo: Vec<Complex64> = off.iter().map(|&o| tau * o).collect();
        let lu = Tridiagonal::factor(&ld, &lo)?;
        Ok(SchrodingerStepper { schema, diag, off, lu })
    }

    pub fn schema(&self) -> &RadialSchema {
        &self.schema
    }

    /// `(I + i dt/2 A) w⁺ = (I - i dt/2 A) w`, in place.
    pub fn step(&self, w: &mut [Complex64]) -> Result<()> {
        if w.len() != self.schema.m {
            return Err(Error::validation(format!(
                "profile has {} cells, schema {}",
                w.len(),
                self.schema.m
            )));
        }
        let aw = apply_tridiagonal(&self.diag, &self.off, w);
        let tau = Complex64::new(0.0, 0.5 * self.schema.dt);
        for (v, a) in w.iter_mut().zip(aw) {
            *v -= tau * a;
        }
        self.lu.solve(w);
        Ok(())
    }

    /// Advances `n` steps.
    pub fn advance(&self, w: &mut [Complex64], n: usize) -> Result<()> {
        for _ in 0..n {
            self.step(w)?;
        }
        Ok(())
    }
}

/// One Crank–Nicolson step of the Schrödinger flow.
pub fn cn_step_schrodinger(schema: &RadialSchema, w: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut out = w.to_vec();
    SchrodingerStepper::new(*schema)?.step(&mut out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatScheme {
    BackwardEuler,
    CrankNicolson,
}

/// Implicit stepper for `w_t = -A w`.
#[derive(Debug, Clone)]
pub struct HeatStepper {
    schema: RadialSchema,
    theta: f64,
    diag: Vec<f64>,
    off: Vec<f64>,
    lu: Tridiagonal<f64>,
}

impl HeatStepper {
    pub fn new(schema: RadialSchema, scheme: HeatScheme) -> Result<Self> {
        schema.validate()?;
        let theta = match scheme {
            HeatScheme::BackwardEuler => 1.0,
            HeatScheme::CrankNicolson => 0.5,
        };
        let k = theta * schema.dt;
        let (diag, off) = schema.operator();
        let ld: Vec<f64> = diag.iter().map(|&d| 1.0 + k * d).collect();
        let lo: Vec<f64> = off.iter().map(|&o| k * o).collect();
        let lu = Tridiagonal::factor(&ld, &lo)?;
        Ok(HeatStepper {
            schema,
            theta,
            diag,
            off,
            lu,
        })
    }

    pub fn step(&self, w: &mut [f64]) -> Result<()> {
        if w.len() != self.schema.m {
            return Err(Error::validation(format!(
                "profile has {} cells, schema {}",
                w.len(),
                self.schema.m
            )));
        }
        if self.theta < 1.0 {
            let aw = apply_tridiagonal(&self.diag, &self.off, w);
            let k = (1.0 - self.theta) * self.schema.dt;
            for (v, a) in w.iter_mut().zip(aw) {
                *v -= k * a;
            }
        }
        self.lu.solve(w);
        Ok(())
    }

    pub fn advance(&self, w: &mut [f64], n: usize) -> Result<()> {
        for _ in 0..n {
            self.step(w)?;
        }
        Ok(())
    }
}

/// One implicit step of the heat flow.
pub fn implicit_step_heat(schema: &RadialSchema, w: &[f64], scheme: HeatScheme) -> Result<Vec<f64>> {
    let mut out = w.to_vec();
    HeatStepper::new(*schema, scheme)?.step(&mut out)?;
    Ok(out)
}

/// Number of steps of size `dt` reaching `span`; the span must be a whole
/// multiple of `dt`.
pub fn step_count(span: f64, dt: f64) -> Result<usize> {
    if !(span >= 0.0) || !(dt > 0.0) {
        return Err(Error::domain(format!("need span >= 0 and dt > 0, got ({span}, {dt})")));
    }
    let n = (span / dt).round();
    if (n * dt - span).abs() > 1e-9 * span.max(1.0) {
        return Err(Error::Config(format!(
            "time span {span} is not a multiple of dt = {dt}"
        )));
    }
    Ok(n as usize)
}

/// Finite-difference parameters of the third route.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FdParams {
    pub r_max: f64,
    pub cells: usize,
    pub dt: f64,
}

impl Default for FdParams {
    fn default() -> Self {
        FdParams {
            r_max: 30.0,
            cells: 48_000,
            dt: 1e-3,
        }
    }
}

/// Parameters of [`compare_routes`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompareParams {
    pub t: f64,
    pub window: Window,
    pub fd: FdParams,
    /// Input grid of the representation-formula route.
    pub kernel_quad: RadialQuadrature,
    /// Every `stride`-th FD cell inside the window is a comparison point.
    pub stride: usize,
}

impl Default for CompareParams {
    fn default() -> Self {
        CompareParams {
            t: 1.0,
            window: Window { r_lo: 0.1, r_hi: 8.0 },
            fd: FdParams::default(),
            kernel_quad: RadialQuadrature {
                panels: 160,
                ..RadialQuadrature::default()
            },
            stride: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Closed,
    Kernel,
    Fd,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub route: Route,
    pub values: Option<Vec<Complex64>>,
    pub failure: Option<String>,
    pub runtime: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairError {
    pub a: Route,
    pub b: Route,
    pub l2_rel: Option<f64>,
    pub sup_rel: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RouteReport {
    pub mode: ModeIndex,
    pub t: f64,
    pub radii: Vec<f64>,
    pub outcomes: Vec<RouteOutcome>,
    pub pairs: Vec<PairError>,
}

impl RouteReport {
    pub fn max_l2_rel(&self) -> Option<f64> {
        self.pairs
            .iter()
            .try_fold(0.0f64, |acc, p| p.l2_rel.map(|e| acc.max(e)))
    }

    pub fn outcome(&self, route: Route) -> &RouteOutcome {
        self.outcomes
            .iter()
            .find(|o| o.route == route)
            .expect("all routes are reported")
    }
}

/// The three tables must describe the same problem.
pub struct RouteTables<'a> {
    pub closed: &'a SpectralTable,
    pub kernel: &'a SpectralTable,
    pub fd: &'a SpectralTable,
}

fn same_problem(a: &SpectralTable, b: &SpectralTable) -> bool {
    a.dim() == b.dim() && a.rows() == b.rows()
}

/// Propagates `Ṽ_{mode}` to time `params.t` along the closed-form,
/// representation-formula and Crank–Nicolson routes and tabulates the
/// pairwise relative errors on the comparison window.
pub fn compare_routes(mode: ModeIndex, tables: RouteTables<'_>, params: &CompareParams) -> Result<RouteReport> {
    if !same_problem(tables.closed, tables.kernel) || !same_problem(tables.closed, tables.fd) {
        return Err(Error::validation(
            "the three routes were given different problems (N, a, A)",
        ));
    }
    params.window.validate()?;
    if !(params.t > 0.0) || params.stride == 0 {
        return Err(Error::Config("compare needs t > 0 and stride >= 1".into()));
    }
    let table = tables.closed;
    let quad = RadialQuadrature::default();
    let normalized = make_mode(mode, table, &quad)?;
    let row = *table.row(mode.j)?;
    let schema = RadialSchema::new(table.dim(), row.mu, params.fd.r_max, params.fd.cells, params.fd.dt)?;
    let cells: Vec<usize> = (0..schema.m)
        .filter(|&i| params.window.contains(schema.radius(i)))
        .step_by(params.stride)
        .collect();
    if cells.len() < 2 {
        return Err(Error::Config("comparison window holds fewer than two FD cells".into()));
    }
    let radii: Vec<f64> = cells.iter().map(|&i| schema.radius(i)).collect();
    let out_grid = RadialGrid::new(radii.clone(), vec![schema.h * params.stride as f64; radii.len()])?;

    let timed = |route: Route, f: &dyn Fn() -> Result<Vec<Complex64>>| {
        let start = Instant::now();
        let res = f();
        let runtime = start.elapsed();
        match res {
            Ok(v) => RouteOutcome {
                route,
                values: Some(v),
                failure: None,
                runtime,
            },
            Err(e) => RouteOutcome {
                route,
                values: None,
                failure: Some(e.to_string()),
                runtime,
            },
        }
    };

    let closed = timed(Route::Closed, &|| {
        radii
            .iter()
            .map(|&r| evolve_mode_closed_form(&normalized, r, params.t))
            .collect()
    });
    let kernel = timed(Route::Kernel, &|| {
        let spec = KernelSpec::new(tables.kernel, 1, tables.kernel.k_max().max(mode.j), KernelPath::ModeSum)?;
        let state = normalized.to_state(&params.kernel_quad.grid()?);
        let out = propagate_representation(&state, params.t, &spec, &out_grid)?;
        Ok(out.profile(mode.j).map(<[_]>::to_vec).unwrap_or_default())
    });
    let fd = timed(Route::Fd, &|| {
        let fd_row = tables.fd.row(mode.j)?;
        let schema = RadialSchema::new(
            tables.fd.dim(),
            fd_row.mu,
            params.fd.r_max,
            params.fd.cells,
            params.fd.dt,
        )?;
        let f0: Vec<Complex64> = (0..schema.m)
            .map(|i| Complex64::new(normalized.radial(schema.radius(i)), 0.0))
            .collect();
        let mut w = schema.substitute(&f0);
        SchrodingerStepper::new(schema)?.advance(&mut w, step_count(params.t, schema.dt)?)?;
        let u = schema.unsubstitute(&w);
        Ok(cells.iter().map(|&i| u[i]).collect())
    });

    let weights: Vec<f64> = radii.iter().map(|r| r.powi(table.dim() as i32 - 1)).collect();
    let outcomes = vec![closed, kernel, fd];
    let mut pairs = Vec::new();
    for (ia, ib) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let (a, b) = (&outcomes[ia], &outcomes[ib]);
        let (l2_rel, sup_rel) = match (&a.values, &b.values) {
            (Some(va), Some(vb)) => {
                let num: f64 = va
                    .iter()
                    .zip(vb)
                    .zip(&weights)
                    .map(|((x, y), w)| w * (x - y).norm_sqr())
                    .sum();
                let den: f64 = vb.iter().zip(&weights).map(|(y, w)| w * y.norm_sqr()).sum();
                let sup_num = va.iter().zip(vb).map(|(x, y)| (x - y).norm()).fold(0.0f64, f64::max);
                let sup_den = vb.iter().map(|y| y.norm()).fold(0.0f64, f64::max);
                (Some((num / den).sqrt()), Some(sup_num / sup_den))
            }
            _ => (None, None),
        };
        pairs.push(PairError {
            a: a.route,
            b: b.route,
            l2_rel,
            sup_rel,
        });
    }
    Ok(RouteReport {
        mode,
        t: params.t,
        radii,
        outcomes,
        pairs,
    })
}

/// Comparison of the heat stepper against the self-similar solution on the
/// FD grid: the relative L² error on the window at `t1`.
pub fn heat_fd_vs_self_similar(
    schema: &RadialSchema,
    alpha: f64,
    t0: f64,
    t1: f64,
    scheme: HeatScheme,
    window: Window,
) -> Result<f64> {
    let n = schema.dim as f64;
    let v = |r: f64, t: f64| t.powf(-0.5 * n + alpha) * r.powf(-alpha) * (-r * r / (4.0 * t)).exp();
    let mut w: Vec<f64> = (0..schema.m)
        .map(|i| {
            let r = schema.radius(i);
            schema.scale(i) * v(r, t0)
        })
        .collect();
    HeatStepper::new(*schema, scheme)?.advance(&mut w, step_count(t1 - t0, schema.dt)?)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (i, wi) in w.iter().enumerate() {
        let r = schema.radius(i);
        if window.contains(r) {
            let exact = schema.scale(i) * v(r, t1);
            num += (wi - exact).powi(2);
            den += exact * exact;
        }
    }
    Ok((num / den).sqrt())
}

/// Solution samples as a separated state on the FD grid.
pub fn fd_state(schema: &RadialSchema, j: usize, w: &[Complex64]) -> SeparatedState {
    SeparatedState::single(schema.dim, schema.grid(), j, schema.unsubstitute(w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::constant_a_spectrum;
    use crate::oscillator::build_table;
    use std::sync::Arc;

    fn table(a: f64) -> SpectralTable {
        let e = Arc::new(constant_a_spectrum(3, a, 1).unwrap());
        build_table(&e, 3, 1).unwrap()
    }

    fn mode_error(a: f64, r_max: f64, m: usize, dt: f64, t: f64, inner: InnerBoundary) -> f64 {
        mode_error_on(a, r_max, m, dt, t, 0.0, r_max, inner)
    }

    #[allow(clippy::too_many_arguments)]
    fn mode_error_on(a: f64, r_max: f64, m: usize, dt: f64, t: f64, lo: f64, hi: f64, inner: InnerBoundary) -> f64 {
        let tab = table(a);
        let mode = make_mode(ModeIndex::new(0, 1), &tab, &RadialQuadrature::default()).unwrap();
        let schema = RadialSchema::new(3, tab.rows()[0].mu, r_max, m, dt)
            .unwrap()
            .with_inner(inner);
        let f0: Vec<Complex64> = (0..m)
            .map(|i| Complex64::new(mode.radial(schema.radius(i)), 0.0))
            .collect();
        let mut w = schema.substitute(&f0);
        SchrodingerStepper::new(schema)
            .unwrap()
            .advance(&mut w, step_count(t, dt).unwrap())
            .unwrap();
        let u = fd_state(&schema, 1, &w);
        let exact = crate::flow::evolve_mode_state(&mode, &schema.grid(), t).unwrap();
        u.relative_l2_error(&exact, lo, hi).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let s = RadialSchema::new(3, -0.1875, 10.0, 100, 1e-2).unwrap();
        let z = vec![Complex64::new(0.0, 0.0); 100];
        assert_eq!(cn_step_schrodinger(&s, &z).unwrap(), z);
        let zr = vec![0.0; 100];
        assert_eq!(implicit_step_heat(&s, &zr, HeatScheme::BackwardEuler).unwrap(), zr);
    }

    #[test]
    fn cn_conserves_the_discrete_norm() {
        let s = RadialSchema::new(3, -0.1875, 20.0, 800, 1e-3).unwrap();
        let mut w: Vec<Complex64> = (0..s.m)
            .map(|i| {
                let r = s.radius(i);
                Complex64::new(r * (-r * r / 2.0).exp(), 0.3 * r * r * (-r * r).exp())
            })
            .collect();
        let stepper = SchrodingerStepper::new(s).unwrap();
        let n0 = s.discrete_norm(&w);
        let mut prev = n0;
        for _ in 0..1000 {
            stepper.step(&mut w).unwrap();
            let n = s.discrete_norm(&w);
            assert!((n - prev).abs() <= 1e-12 * prev);
            prev = n;
        }
        assert!((prev - n0).abs() <= 1e-9 * n0);
    }

    #[test]
    fn singular_mode_matches_closed_form() {
        let err = mode_error_on(-0.1875, 30.0, 48_000, 1e-3, 1.0, 0.1, 8.0, InnerBoundary::OddGhost);
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn singular_mode_converges_like_h_to_two_beta() {
        // w ~ r^{1/2+β} at the origin limits the rate to h^{2β}, here h^{1/2}
        let e: Vec<f64> = [3_000, 6_000, 12_000]
            .iter()
            .map(|&m| mode_error_on(-0.1875, 30.0, m, 1e-3, 1.0, 0.1, 8.0, InnerBoundary::OddGhost))
            .collect();
        for pair in e.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((1.3..1.55).contains(&ratio), "{e:?}");
        }
        let fv = mode_error_on(-0.1875, 30.0, 12_000, 1e-3, 1.0, 0.1, 8.0, InnerBoundary::ZeroFlux);
        assert!(fv > e[2] && fv < 5e-3, "{fv}");
    }

    #[test]
    fn second_order_convergence_free_mode() {
        for inner in [InnerBoundary::OddGhost, InnerBoundary::ZeroFlux] {
            let coarse = mode_error(0.0, 20.0, 400, 0.02, 1.0, inner);
            let fine = mode_error(0.0, 20.0, 800, 0.01, 1.0, inner);
            let ratio = coarse / fine;
            assert!((3.4..=4.6).contains(&ratio), "{inner:?}: {coarse} {fine} {ratio}");
        }
    }

    #[test]
    fn near_origin_values_stay_bounded_under_refinement() {
        let tab = table(-0.1875);
        let alpha = tab.rows()[0].alpha;
        let mode = make_mode(ModeIndex::new(0, 1), &tab, &RadialQuadrature::default()).unwrap();
        let weighted_max = |m: usize| {
            let s = RadialSchema::new(3, tab.rows()[0].mu, 20.0, m, 1e-2).unwrap();
            let f0: Vec<Complex64> = (0..m).map(|i| Complex64::new(mode.radial(s.radius(i)), 0.0)).collect();
            let mut w = s.substitute(&f0);
            SchrodingerStepper::new(s).unwrap().advance(&mut w, 50).unwrap();
            let u = s.unsubstitute(&w);
            (0..m)
                .filter(|&i| s.radius(i) < 0.2)
                .map(|i| s.radius(i).powf(alpha) * u[i].norm())
                .fold(0.0f64, f64::max)
        };
        let a = weighted_max(1000);
        let b = weighted_max(2000);
        assert!(a.is_finite() && b.is_finite());
        assert!((b / a - 1.0).abs() < 0.05, "{a} {b}");
    }

    #[test]
    fn heat_stepper_tracks_self_similar_solution() {
        let s = RadialSchema::new(3, -0.1875, 30.0, 6000, 1e-3).unwrap();
        let err = heat_fd_vs_self_similar(
            &s,
            0.25,
            1.0,
            2.0,
            HeatScheme::CrankNicolson,
            Window { r_lo: 0.0, r_hi: 30.0 },
        )
        .unwrap();
        assert!(err < 1e-3, "{err}");
    }

    #[test]
    fn backward_euler_keeps_positivity_and_dissipates() {
        let s = RadialSchema::new(3, -0.1875, 10.0, 400, 1e-2).unwrap();
        let mut w: Vec<f64> = (0..s.m)
            .map(|i| {
                let r = s.radius(i);
                r.powf(0.75) * (-r * r).exp()
            })
            .collect();
        let stepper = HeatStepper::new(s, HeatScheme::BackwardEuler).unwrap();
        let mut prev = s.discrete_norm(&w);
        for _ in 0..200 {
            stepper.step(&mut w).unwrap();
            assert!(w.iter().all(|&v| v > 0.0));
            let n = s.discrete_norm(&w);
            assert!(n <= prev);
            prev = n;
        }
    }

    #[test]
    fn schema_validation() {
        assert!(RadialSchema::new(3, -0.25, 10.0, 100, 1e-3).is_err());
        assert!(RadialSchema::new(3, 0.0, 10.0, 100, 0.0).is_err());
        assert!(step_count(1.0, 0.3).is_err());
        assert_eq!(step_count(1.0, 1e-3).unwrap(), 1000);
    }

    #[test]
    fn compare_rejects_mismatched_problems() {
        let a = table(-0.1875);
        let b = table(0.0);
        let err = compare_routes(
            ModeIndex::new(0, 1),
            RouteTables {
                closed: &a,
                kernel: &b,
                fd: &a,
            },
            &CompareParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }
}
