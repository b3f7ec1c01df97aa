//! The angular hamiltonian `L = (-i∇_S + A)^2 + a(θ)` on the unit sphere
//! `S^{N-1}`: Fourier–Galerkin assembly on the circle, spherical-harmonic
//! Galerkin assembly on `S^2`, the closed-form spectrum for constant `a`, and
//! a cyclic Jacobi eigensolver for the resulting Hermitian matrices.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre;
use crate::specfun::{real_sph_harm, sph_harm};

/// Default eigensolver tolerance.
pub const DEFAULT_TOL: f64 = 1e-11;
/// Maximum number of cyclic Jacobi sweeps.
pub const MAX_SWEEPS: usize = 30;

const SYMMETRY_TOL: f64 = 1e-12;

/// Fourier series of a real function on the circle,
/// `f(θ) = Σ_q f̂_q e^{iqθ}` with `f̂_q = (1/2π) ∫ f e^{-iqθ} dθ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FourierSeries {
    coeffs: BTreeMap<i64, Complex64>,
}

impl FourierSeries {
    pub fn zero() -> Self {
        FourierSeries::default()
    }

    pub fn constant(c: f64) -> Self {
        let mut coeffs = BTreeMap::new();
        if c != 0.0 {
            coeffs.insert(0, Complex64::new(c, 0.0));
        }
        FourierSeries { coeffs }
    }

    /// Builds the series from `(q, f̂_q)` pairs. Missing partners `f̂_{-q}`
    /// are filled in by conjugation; supplied pairs must satisfy
    /// `f̂_{-q} = conj(f̂_q)` to within `1e-12`.
    pub fn from_coefficients(pairs: impl IntoIterator<Item = (i64, Complex64)>) -> Result<Self> {
        let mut given: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (q, c) in pairs {
            if !(c.re.is_finite() && c.im.is_finite()) {
                return Err(Error::validation(format!("non-finite Fourier coefficient at q = {q}")));
            }
            if given.insert(q, c).is_some() {
                return Err(Error::validation(format!("duplicate Fourier coefficient q = {q}")));
            }
        }
        let mut coeffs = given.clone();
        for (&q, &c) in &given {
            match given.get(&-q) {
                Some(&partner) => {
                    if (partner - c.conj()).norm() > SYMMETRY_TOL {
                        return Err(Error::validation(format!(
                            "coefficients at q = ±{q} violate conjugate symmetry: {c} vs {partner}"
                        )));
                    }
                }
                None => {
                    coeffs.insert(-q, c.conj());
                }
            }
        }
        if let Some(c0) = coeffs.get(&0) {
            if c0.im.abs() > SYMMETRY_TOL {
                return Err(Error::validation("mean coefficient must be real"));
            }
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Ok(FourierSeries { coeffs })
    }

    /// Direct DFT of `M` uniform samples `f(2πj/M)`; keeps `|q| <= (M-1)/2`.
    pub fn from_samples(samples: &[f64]) -> Result<Self> {
        let m = samples.len();
        if m == 0 {
            return Err(Error::validation("no samples supplied"));
        }
        let qmax = ((m - 1) / 2) as i64;
        let mut coeffs = BTreeMap::new();
        for q in -qmax..=qmax {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &f) in samples.iter().enumerate() {
                let theta = 2.0 * PI * j as f64 / m as f64;
                acc += f * Complex64::from_polar(1.0, -(q as f64) * theta);
            }
            let c = acc / m as f64;
            if c.norm() > 1e-15 {
                coeffs.insert(q, c);
            }
        }
        // exact conjugate symmetry
        let keys: Vec<i64> = coeffs.keys().copied().filter(|&q| q > 0).collect();
        for q in keys {
            let c = coeffs[&q];
            coeffs.insert(-q, c.conj());
        }
        if let Some(c0) = coeffs.get_mut(&0) {
            c0.im = 0.0;
        }
        Ok(FourierSeries { coeffs })
    }

    pub fn coeff(&self, q: i64) -> Complex64 {
        self.coeffs.get(&q).copied().unwrap_or_default()
    }

    pub fn max_degree(&self) -> i64 {
        self.coeffs.keys().map(|q| q.abs()).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&q, &c)| (c * Complex64::from_polar(1.0, q as f64 * theta)).re)
            .sum()
    }

    /// Fourier series of the pointwise product.
    pub fn product(&self, other: &FourierSeries) -> FourierSeries {
        let mut coeffs: BTreeMap<i64, Complex64> = BTreeMap::new();
        for (&p, &a) in &self.coeffs {
            for (&q, &b) in &other.coeffs {
                *coeffs.entry(p + q).or_default() += a * b;
            }
        }
        coeffs.retain(|_, c| c.norm() > 0.0);
        FourierSeries { coeffs }
    }

    pub fn add(&self, other: &FourierSeries) -> FourierSeries {
        let mut coeffs = self.coeffs.clone();
        for (&q, &c) in &other.coeffs {
            *coeffs.entry(q).or_default() += c;
        }
        FourierSeries { coeffs }
    }
}

/// Real scalar function on `S^2`, evaluated at (colatitude, longitude).
#[derive(Clone)]
pub struct SphereFn(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>);

impl SphereFn {
    pub fn new(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        SphereFn(Arc::new(f))
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        (self.0)(theta, phi)
    }
}

impl fmt::Debug for SphereFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SphereFn(..)")
    }
}

/// The electric coefficient `a(θ)`.
#[derive(Debug, Clone)]
pub enum ScalarCoeff {
    Constant(f64),
    Circle(FourierSeries),
    Sphere(SphereFn),
}

#[derive(Debug, Clone)]
pub struct AngularProblem {
    pub dim: usize,
    pub scalar: ScalarCoeff,
    /// Tangential magnetic potential `α(θ)` on the circle (`N = 2` only).
    pub magnetic: Option<FourierSeries>,
    /// `K` (modes `|m| <= K`) on the circle, `L_max` on the sphere.
    pub truncation: usize,
}

impl AngularProblem {
    pub fn circle(a: FourierSeries, magnetic: FourierSeries, k_max: usize) -> Self {
        AngularProblem {
            dim: 2,
            scalar: ScalarCoeff::Circle(a),
            magnetic: Some(magnetic),
            truncation: k_max,
        }
    }

    pub fn sphere(scalar: ScalarCoeff, l_max: usize) -> Self {
        AngularProblem {
            dim: 3,
            scalar,
            magnetic: None,
            truncation: l_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::validation(format!("dimension must be >= 2, got {}", self.dim)));
        }
        if self.dim >= 3 && self.magnetic.is_some() {
            return Err(Error::validation(
                "magnetic potentials are supported on the circle only",
            ));
        }
        match (&self.scalar, self.dim) {
            (ScalarCoeff::Circle(_), d) if d != 2 => {
                Err(Error::validation("circle Fourier coefficients require N = 2"))
            }
            (ScalarCoeff::Sphere(_), d) if d != 3 => {
                Err(Error::validation("sphere coefficient callbacks require N = 3"))
            }
            (ScalarCoeff::Constant(c), _) if !c.is_finite() => {
                Err(Error::validation("constant coefficient must be finite"))
            }
            _ => Ok(()),
        }
    }
}

/// Dense Hermitian matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                Complex64::new(values[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    /// `max |M - M^*|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in i..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }
}

/// Basis in which eigenvector coefficients are expressed.
#[derive(Debug, Clone, PartialEq)]
pub enum AngularBasis {
    /// `e^{imθ}/√(2π)`, index `i ↔ m = i - K`.
    CircleFourier { k_max: usize },
    /// Real spherical harmonics, index `i = l^2 + l + m`.
    SphereHarmonic { l_max: usize },
    /// Degree-`l` harmonics for constant `a`, one label `(l, m)` per mode; for
    /// `N = 3` the mode is the complex harmonic `Y_l^m`.
    AnalyticConstant { dim: usize, labels: Vec<(usize, i64)> },
}

impl AngularBasis {
    pub fn tag(&self) -> &'static str {
        match self {
            AngularBasis::CircleFourier { .. } => "circle_fourier",
            AngularBasis::SphereHarmonic { .. } => "sphere_harmonic",
            AngularBasis::AnalyticConstant { .. } => "analytic_constant",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AngularBasis::CircleFourier { k_max } => 2 * k_max + 1,
            AngularBasis::SphereHarmonic { l_max } => (l_max + 1) * (l_max + 1),
            AngularBasis::AnalyticConstant { labels, .. } => labels.len(),
        }
    }

    pub fn sphere_dim(&self) -> usize {
        match self {
            AngularBasis::CircleFourier { .. } => 2,
            AngularBasis::SphereHarmonic { .. } => 3,
            AngularBasis::AnalyticConstant { dim, .. } => *dim,
        }
    }
}

/// A point of `S^{N-1}` for `N = 2` (angle) or `N = 3` (colatitude, longitude).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Direction {
    Circle(f64),
    Sphere { theta: f64, phi: f64 },
}

impl Direction {
    /// Unit vector of the direction (two or three components).
    pub fn unit_vector(&self) -> Vec<f64> {
        match *self {
            Direction::Circle(t) => vec![t.cos(), t.sin()],
            Direction::Sphere { theta, phi } => {
                vec![theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
            }
        }
    }
}

/// Eigenvalues `μ_1 <= μ_2 <= ...` (repeated by multiplicity) and normalised
/// eigenvectors of `L` in a declared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularEigensystem {
    basis: AngularBasis,
    eigenvalues: Vec<f64>,
    /// Column coefficient vectors; empty for the analytic basis, whose modes
    /// are the basis functions themselves.
    eigenvectors: Vec<Vec<Complex64>>,
    residual_bound: f64,
}

impl AngularEigensystem {
    pub fn basis(&self) -> &AngularBasis {
        &self.basis
    }

    pub fn basis_tag(&self) -> &'static str {
        self.basis.tag()
    }

    pub fn dim(&self) -> usize {
        self.basis.sphere_dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn residual_bound(&self) -> f64 {
        self.residual_bound
    }

    /// Coefficients of mode `k` (0-based) in the basis.
    pub fn coefficients(&self, k: usize) -> Vec<Complex64> {
        match &self.basis {
            AngularBasis::AnalyticConstant { labels, .. } => {
                let mut v = vec![Complex64::new(0.0, 0.0); labels.len()];
                v[k] = Complex64::new(1.0, 0.0);
                v
            }
            _ => self.eigenvectors[k].clone(),
        }
    }

    /// Spherical-harmonic degree of mode `k` in the analytic basis.
    pub fn degree(&self, k: usize) -> Option<usize> {
        match &self.basis {
            AngularBasis::AnalyticConstant { labels, .. } => labels.get(k).map(|l| l.0),
            _ => None,
        }
    }

    /// `ψ_k(direction)` for mode `k` (0-based).
    pub fn eval_mode(&self, k: usize, dir: Direction) -> Result<Complex64> {
        if k >= self.len() {
            return Err(Error::Bounds(format!("mode {k} of {}", self.len())));
        }
        match (&self.basis, dir) {
            (AngularBasis::CircleFourier { k_max }, Direction::Circle(theta)) => {
                let kk = *k_max as i64;
                let norm = 1.0 / (2.0 * PI).sqrt();
                Ok(self.eigenvectors[k]
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| c * Complex64::from_polar(norm, (i as i64 - kk) as f64 * theta))
                    .sum())
            }
            (AngularBasis::SphereHarmonic { l_max }, Direction::Sphere { theta, phi }) => {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..=*l_max {
                    for m in -(l as i64)..=(l as i64) {
                        let idx = sphere_index(l, m);
                        let c = self.eigenvectors[k][idx];
                        if c != Complex64::new(0.0, 0.0) {
                            acc += c * real_sph_harm(l, m, theta, phi);
                        }
                    }
                }
                Ok(acc)
            }
            (AngularBasis::AnalyticConstant { dim: 3, labels }, Direction::Sphere { theta, phi }) => {
                let (l, m) = labels[k];
                sph_harm(l, m, theta, phi)
            }
            (AngularBasis::AnalyticConstant { dim, .. }, _) if *dim != 3 => Err(Error::validation(format!(
                "pointwise evaluation of analytic harmonics is implemented for N = 3, not N = {dim}"
            ))),
            _ => Err(Error::validation("direction does not match the eigensystem's sphere")),
        }
    }

    /// `max_θ |ψ_k(θ)|`, estimated on a fine angular sample.
    pub fn sup_abs(&self, k: usize) -> Result<f64> {
        match &self.basis {
            AngularBasis::CircleFourier { k_max } => {
                let samples = 64 * (2 * k_max + 1);
                (0..samples)
                    .map(|i| self.eval_mode(k, Direction::Circle(2.0 * PI * i as f64 / samples as f64)))
                    .try_fold(0.0f64, |acc, v| Ok(acc.max(v?.norm())))
            }
            AngularBasis::AnalyticConstant { dim: 3, labels } => {
                // |Y_l^m| does not depend on the longitude
                let (l, _) = labels[k];
                let samples = 64 * (l + 2);
                (0..=samples)
                    .map(|i| {
                        self.eval_mode(
                            k,
                            Direction::Sphere {
                                theta: PI * i as f64 / samples as f64,
                                phi: 0.0,
                            },
                        )
                    })
                    .try_fold(0.0f64, |acc, v| Ok(acc.max(v?.norm())))
            }
            AngularBasis::SphereHarmonic { l_max } => {
                let nt = 32 * (l_max + 2);
                let np = 2 * nt;
                let mut best = 0.0f64;
                for i in 0..=nt {
                    for j in 0..np {
                        let dir = Direction::Sphere {
                            theta: PI * i as f64 / nt as f64,
                            phi: 2.0 * PI * j as f64 / np as f64,
                        };
                        best = best.max(self.eval_mode(k, dir)?.norm());
                    }
                }
                Ok(best)
            }
            AngularBasis::AnalyticConstant { dim, .. } => Err(Error::validation(format!(
                "sup of analytic harmonics is implemented for N = 3, not N = {dim}"
            ))),
        }
    }
}

/// Index of the real harmonic `(l, m)` in the sphere basis.
pub fn sphere_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Galerkin matrix of `L` on the circle in the Fourier basis `|m| <= K`:
/// `M_{mn} = m n δ_{mn} + (m+n) α̂_{m-n} + ĝ_{m-n}` with `g = α^2 + a`.
pub fn assemble_circle(problem: &AngularProblem) -> Result<HermitianMatrix> {
    problem.validate()?;
    if problem.dim != 2 {
        return Err(Error::validation("assemble_circle needs N = 2"));
    }
    let a = match &problem.scalar {
        ScalarCoeff::Constant(c) => FourierSeries::constant(*c),
        ScalarCoeff::Circle(s) => s.clone(),
        ScalarCoeff::Sphere(_) => unreachable!("rejected by validate"),
    };
    let alpha = problem.magnetic.clone().unwrap_or_default();
    let g = alpha.product(&alpha).add(&a);
    let k = problem.truncation as i64;
    let n = 2 * problem.truncation + 1;
    Ok(HermitianMatrix::from_fn(n, |i, j| {
        let m = i as i64 - k;
        let nn = j as i64 - k;
        let mut v = g.coeff(m - nn) + (m + nn) as f64 * alpha.coeff(m - nn);
        if i == j {
            v += (m * nn) as f64;
        }
        v
    }))
}

/// Colatitude (Gauss–Legendre in `cos θ`) and longitude (trapezoid) node
/// counts for sphere assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereQuadrature {
    pub n_theta: usize,
    pub n_phi: usize,
}

impl SphereQuadrature {
    /// The minimal admissible rule for degree `l_max`.
    pub fn minimal(l_max: usize) -> Self {
        SphereQuadrature {
            n_theta: 2 * l_max + 2,
            n_phi: 4 * l_max + 4,
        }
    }
}

/// Galerkin matrix of `-Δ_{S^2} + a` in real spherical harmonics `l <= L_max`.
pub fn assemble_sphere(problem: &AngularProblem) -> Result<HermitianMatrix> {
    assemble_sphere_with(problem, SphereQuadrature::minimal(problem.truncation))
}

pub fn assemble_sphere_with(problem: &AngularProblem, quad: SphereQuadrature) -> Result<HermitianMatrix> {
    problem.validate()?;
    if problem.dim != 3 {
        return Err(Error::validation("assemble_sphere needs N = 3"));
    }
    let l_max = problem.truncation;
    let floor = SphereQuadrature::minimal(l_max);
    if quad.n_theta < floor.n_theta || quad.n_phi < floor.n_phi {
        return Err(Error::Config(format!(
            "sphere quadrature {}x{} below the floor {}x{} for L_max = {l_max}",
            quad.n_theta, quad.n_phi, floor.n_theta, floor.n_phi
        )));
    }
    let nb = (l_max + 1) * (l_max + 1);
    let mut diag = vec![0.0; nb];
    for l in 0..=l_max {
        for m in -(l as i64)..=(l as i64) {
            diag[sphere_index(l, m)] = (l * (l + 1)) as f64;
        }
    }
    let mut matrix = HermitianMatrix::diagonal(&diag);
    match &problem.scalar {
        ScalarCoeff::Constant(c) => {
            for (i, d) in diag.iter().enumerate() {
                matrix.set(i, i, Complex64::new(d + c, 0.0));
            }
        }
        ScalarCoeff::Sphere(f) => {
            let (xs, wx) = gauss_legendre(quad.n_theta);
            let dphi = 2.0 * PI / quad.n_phi as f64;
            let mut values = Vec::with_capacity(xs.len() * quad.n_phi);
            let mut weights = Vec::with_capacity(values.capacity());
            let mut basis_vals: Vec<Vec<f64>> = vec![Vec::with_capacity(values.capacity()); nb];
            for (&x, &w) in xs.iter().zip(&wx) {
                let theta = x.clamp(-1.0, 1.0).acos();
                for jp in 0..quad.n_phi {
                    let phi = dphi * jp as f64;
                    values.push(f.eval(theta, phi));
                    weights.push(w * dphi);
                    for l in 0..=l_max {
                        for m in -(l as i64)..=(l as i64) {
                            basis_vals[sphere_index(l, m)].push(real_sph_harm(l, m, theta, phi));
                        }
                    }
                }
            }
            let wa: Vec<f64> = values.iter().zip(&weights).map(|(v, w)| v * w).collect();
            for i in 0..nb {
                for j in i..nb {
                    let v: f64 = (0..wa.len()).map(|q| wa[q] * basis_vals[i][q] * basis_vals[j][q]).sum();
                    let mij = matrix.get(i, j) + v;
                    matrix.set(i, j, mij);
                    if i != j {
                        matrix.set(j, i, mij);
                    }
                }
            }
        }
        ScalarCoeff::Circle(_) => unreachable!("rejected by validate"),
    }
    Ok(matrix)
}

/// Full eigendecomposition of a Hermitian matrix by cyclic complex Jacobi.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// `vectors[k]` is the k-th eigenvector.
    pub vectors: Vec<Vec<Complex64>>,
    /// `max_k ‖M v_k - μ_k v_k‖ / ‖M‖_F`.
    pub residual: f64,
    /// `max |V^* V - I|`.
    pub orthogonality: f64,
}

pub fn jacobi_hermitian(matrix: &HermitianMatrix, tol: f64) -> Result<HermitianEigen> {
    let n = matrix.dim();
    let defect = matrix.hermiticity_defect();
    if defect > SYMMETRY_TOL * matrix.frobenius_norm().max(1.0) {
        return Err(Error::validation(format!(
            "matrix is not Hermitian (defect {defect:e})"
        )));
    }
    let norm = matrix.frobenius_norm();
    let zero = Complex64::new(0.0, 0.0);
    let mut a = matrix.clone();
    for i in 0..n {
        let d = a.get(i, i).re;
        a.set(i, i, Complex64::new(d, 0.0));
    }
    let mut v = HermitianMatrix::from_fn(n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { zero });
    let off_target = 1e-3 * tol * norm.max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a.get(i, j).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= off_target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let b = apq.norm();
                if b <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                let theta = (aqq - app) / (2.0 * b);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let e = Complex64::from_polar(1.0, -apq.arg());
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * e * akq);
                    a.set(k, q, s * akp + c * e * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * e.conj() * aqk);
                    a.set(q, k, s * apk + c * e.conj() * aqk);
                }
                a.set(p, q, zero);
                a.set(q, p, zero);
                let dp = a.get(p, p).re;
                let dq = a.get(q, q).re;
                a.set(p, p, Complex64::new(dp, 0.0));
                a.set(q, q, Complex64::new(dq, 0.0));
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * e * vkq);
                    v.set(k, q, s * vkp + c * e * vkq);
                }
            }
        }
    }

    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    let vectors: Vec<Vec<Complex64>> = (0..n).map(|k| (0..n).map(|i| v.get(i, k)).collect()).collect();
    let scale = norm.max(f64::MIN_POSITIVE);
    let residual = values
        .iter()
        .zip(&vectors)
        .map(|(&mu, vec)| {
            let mv = matrix.mul_vec(vec);
            mv.iter()
                .zip(vec)
                .map(|(x, y)| (x - y * mu).norm_sqr())
                .sum::<f64>()
                .sqrt()
                / scale
        })
        .fold(0.0f64, f64::max);
    if residual > tol {
        return Err(Error::numeric(
            format!("Jacobi eigensolver did not reach tol {tol:e} within {MAX_SWEEPS} sweeps"),
            residual,
        ));
    }
    let orthogonality = gram_defect(&vectors);
    Ok(HermitianEigen {
        values,
        vectors,
        residual,
        orthogonality,
    })
}

fn gram_defect(vectors: &[Vec<Complex64>]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i) {
            let dot: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).norm());
        }
    }
    worst
}

fn dominant_index(v: &[Complex64]) -> usize {
    let max = v.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    v.iter().position(|c| c.norm() >= max * (1.0 - 1e-9)).unwrap_or(0)
}

/// Eigendecomposition packaged as an [`AngularEigensystem`]: eigenvalues
/// ascending, clusters of equal eigenvalues ordered by the basis index of each
/// vector's dominant coefficient, and each vector's first non-negligible
/// coefficient made real and positive.
pub fn eigensolve(matrix: &HermitianMatrix, basis: AngularBasis, tol: f64) -> Result<AngularEigensystem> {
    if basis.dim() != matrix.dim() {
        return Err(Error::validation(format!(
            "basis of size {} does not match matrix of size {}",
            basis.dim(),
            matrix.dim()
        )));
    }
    let eig = jacobi_hermitian(matrix, tol)?;
    let mut pairs: Vec<(f64, Vec<Complex64>)> = eig.values.into_iter().zip(eig.vectors).collect();
    for (_, v) in pairs.iter_mut() {
        let max = v.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
        if let Some(first) = v.iter().find(|c| c.norm() > 1e-8 * max).copied() {
            let phase = first.conj() / first.norm();
            for c in v.iter_mut() {
                *c *= phase;
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = matrix.frobenius_norm().max(1.0);
    let cluster_tol = 1e3 * tol * scale;
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[end].0 - pairs[end - 1].0 <= cluster_tol {
            end += 1;
        }
        pairs[start..end].sort_by_key(|(_, v)| dominant_index(v));
        start = end;
    }
    let (values, vectors): (Vec<f64>, Vec<Vec<Complex64>>) = pairs.into_iter().unzip();
    let residual_bound = eig.residual.max(eig.orthogonality).max(tol);
    Ok(AngularEigensystem {
        basis,
        eigenvalues: values,
        eigenvectors: vectors,
        residual_bound,
    })
}

/// Assemble and diagonalise a circle problem.
pub fn solve_circle(problem: &AngularProblem, tol: f64) -> Result<AngularEigensystem> {
    let m = assemble_circle(problem)?;
    eigensolve(
        &m,
        AngularBasis::CircleFourier {
            k_max: problem.truncation,
        },
        tol,
    )
}

/// Assemble and diagonalise a sphere problem.
pub fn solve_sphere(problem: &AngularProblem, tol: f64) -> Result<AngularEigensystem> {
    let m = assemble_sphere(problem)?;
    eigensolve(
        &m,
        AngularBasis::SphereHarmonic {
            l_max: problem.truncation,
        },
        tol,
    )
}

/// Dimension of the space of degree-`l` spherical harmonics on `S^{N-1}`.
pub fn harmonic_multiplicity(dim: usize, l: usize) -> usize {
    if dim == 2 {
        return if l == 0 { 1 } else { 2 };
    }
    binomial(l + dim - 1, dim - 1) - if l >= 2 { binomial(l + dim - 3, dim - 1) } else { 0 }
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Closed-form spectrum for constant `a` and `A ≡ 0` on `S^{N-1}`, `N >= 3`:
/// `μ = l(l+N-2) + a` with harmonic multiplicity, whole degrees only, at least
/// `count` modes.
pub fn constant_a_spectrum(dim: usize, a: f64, count: usize) -> Result<AngularEigensystem> {
    if dim < 3 {
        return Err(Error::validation("the analytic constant-a branch needs N >= 3"));
    }
    if count == 0 {
        return Err(Error::validation("count must be >= 1"));
    }
    if !a.is_finite() {
        return Err(Error::validation("a must be finite"));
    }
    let mut eigenvalues = Vec::new();
    let mut labels = Vec::new();
    let mut l = 0usize;
    while eigenvalues.len() < count {
        let mu = (l * (l + dim - 2)) as f64 + a;
        let mult = harmonic_multiplicity(dim, l);
        for i in 0..mult {
            eigenvalues.push(mu);
            let label = if dim == 3 { i as i64 - l as i64 } else { i as i64 };
            labels.push((l, label));
        }
        l += 1;
    }
    Ok(AngularEigensystem {
        basis: AngularBasis::AnalyticConstant { dim, labels },
        eigenvalues,
        eigenvectors: Vec::new(),
        residual_bound: 0.0,
    })
}

/// Analytic system covering all degrees `l <= l_max`.
pub fn constant_a_through_degree(dim: usize, a: f64, l_max: usize) -> Result<AngularEigensystem> {
    let count: usize = (0..=l_max).map(|l| harmonic_multiplicity(dim, l)).sum();
    constant_a_spectrum(dim, a, count)
}
