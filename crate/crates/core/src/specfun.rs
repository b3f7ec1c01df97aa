//! Special functions: Gamma, Pochhammer symbols, real-order Bessel functions of
//! the first kind, the dimension-scaled Bessel function `j`, the confluent
//! polynomials attached to the oscillator eigenfunctions, Legendre
//! polynomials and spherical harmonics.

use std::f64::consts::PI;

use num_complex::Complex64;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

/// Radius at and below which `J_nu` is summed from its power series.
pub const SERIES_SWITCHOVER: f64 = 12.0;

const SERIES_MAX_TERMS: usize = 200;
const SERIES_REL_STOP: f64 = 1e-17;

/// Gamma function. Poles at the non-positive integers are domain errors.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("gamma of non-finite argument {x}")));
    }
    if x <= 0.0 && x.fract() == 0.0 {
        return Err(Error::domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma(x))
}

/// Rising factorial `(s)_i = s (s+1) ... (s+i-1)`, with `(s)_0 = 1`.
pub fn pochhammer(s: f64, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (s + j as f64))
}

/// Non-negative real Bessel order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::domain(format!(
                "Bessel order must be finite and non-negative, got {nu}"
            )));
        }
        Ok(BesselOrder(nu))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Bessel function of the first kind `J_nu(r)` for `nu >= 0`, `r >= 0`.
///
/// Power series for `r <= SERIES_SWITCHOVER`, Steed's continued-fraction
/// method beyond it.
pub fn bessel_j(nu: BesselOrder, r: f64) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::domain(format!("J_nu needs finite r >= 0, got {r}")));
    }
    if r <= SERIES_SWITCHOVER {
        Ok(bessel_j_series(nu.0, r))
    } else {
        bessel_j_steed(nu.0, r)
    }
}

/// Power series `(r/2)^nu sum_k (-1)^k (r/2)^{2k} / (k! Gamma(k+nu+1))`.
pub fn bessel_j_series(nu: f64, r: f64) -> f64 {
    if r == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let half = 0.5 * r;
    let lead = (nu * half.ln() - ln_gamma(nu + 1.0)).exp();
    lead * reduced_series(nu, half * half)
}

/// `sum_k (-q)^k Gamma(nu+1) / (k! Gamma(k+nu+1))`, the series of
/// `Gamma(nu+1) (r/2)^{-nu} J_nu(r)` with `q = r^2/4`.
fn reduced_series(nu: f64, q: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + nu + 1.0));
        sum += term;
        if term.abs() < SERIES_REL_STOP * sum.abs() {
            break;
        }
    }
    sum
}

/// `J_nu(r)` by Steed's method: CF1 for `J'/J` at `nu`, downward recurrence to
/// `|mu| <= 1/2`, complex CF2 for `(J'+iY')/(J+iY)` at `mu`, Wronskian
/// normalisation. Valid for `r >= 2`.
pub fn bessel_j_steed(nu: f64, r: f64) -> Result<f64> {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-290;
    const MAXIT: usize = 100_000;

    if r < 2.0 {
        return Err(Error::domain(format!(
            "continued-fraction Bessel evaluation needs r >= 2, got {r}"
        )));
    }
    let nl = (nu + 0.5).floor() as usize;
    let mu = nu - nl as f64;
    let xi = 1.0 / r;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    // CF1
    let mut sign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    let mut converged = false;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            sign = -sign;
        }
        if (del - 1.0).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numeric("Bessel CF1 did not converge", h));
    }

    let mut jl = sign * FPMIN;
    let mut jpl = h * jl;
    let jl_top = jl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let jtemp = fact * jl + jpl;
        fact -= xi;
        jpl = fact * jtemp - jl;
        jl = jtemp;
    }
    if jl == 0.0 {
        jl = EPS;
    }
    let f = jpl / jl;

    // CF2
    let mut a = 0.25 - mu * mu;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * r;
    let mut bi = 2.0;
    let fct = a * xi / (p * p + q * q);
    let mut cr = br + q * fct;
    let mut ci = bi + p * fct;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    converged = false;
    for i in 2..MAXIT {
        a += 2.0 * (i as f64 - 1.0);
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        let fct = a / (cr * cr + ci * ci);
        cr = br + cr * fct;
        ci = bi - ci * fct;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::numeric("Bessel CF2 did not converge", dlr - 1.0));
    }
    let gam = (p - f) / q;
    let jmu = (w / ((p - f) * gam + q)).sqrt().copysign(jl);
    Ok(jl_top * (jmu / jl))
}

fn scaled_order(dim: usize, alpha: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::domain(format!("dimension must be >= 2, got {dim}")));
    }
    let order = -alpha + 0.5 * (dim as f64 - 2.0);
    if !(order >= 0.0) {
        return Err(Error::domain(format!(
            "scaled Bessel order {order} is negative (alpha = {alpha}, N = {dim})"
        )));
    }
    Ok(order)
}

/// `j_{-alpha}(r) = r^{-(N-2)/2} J_{-alpha+(N-2)/2}(r)` for `r > 0`.
pub fn j_scaled(dim: usize, alpha: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain(format!("j_scaled needs r > 0, got {r}")));
    }
    Ok(r.powf(-alpha) * j_scaled_weighted(dim, alpha, r)?)
}

/// `r^alpha j_{-alpha}(r) = r^{-nu} J_nu(r)` with `nu = -alpha + (N-2)/2`;
/// continuous on `r >= 0` with value `1 / (2^nu Gamma(nu+1))` at the origin.
pub fn j_scaled_weighted(dim: usize, alpha: f64, r: f64) -> Result<f64> {
    let nu = scaled_order(dim, alpha)?;
    if !(r >= 0.0) {
        return Err(Error::domain(format!("j_scaled needs r >= 0, got {r}")));
    }
    if r <= SERIES_SWITCHOVER {
        let lead = 1.0 / (2f64.powf(nu) * gamma(nu + 1.0));
        Ok(lead * reduced_series(nu, 0.25 * r * r))
    } else {
        Ok(bessel_j_steed(nu, r)? * r.powf(-nu))
    }
}

/// `j_{-alpha}` with the series prefactor computed once, for repeated
/// evaluation at many radii.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBessel {
    alpha: f64,
    nu: f64,
    lead: f64,
}

impl ScaledBessel {
    pub fn new(dim: usize, alpha: f64) -> Result<Self> {
        let nu = scaled_order(dim, alpha)?;
        Ok(ScaledBessel {
            alpha,
            nu,
            lead: 1.0 / (2f64.powf(nu) * gamma(nu + 1.0)),
        })
    }

    pub fn order(&self) -> f64 {
        self.nu
    }

    /// Same as [`j_scaled_weighted`]; `r >= 0` is the caller's responsibility.
    pub fn weighted(&self, r: f64) -> Result<f64> {
        if r <= SERIES_SWITCHOVER {
            Ok(self.lead * reduced_series(self.nu, 0.25 * r * r))
        } else {
            Ok(bessel_j_steed(self.nu, r)? * r.powf(-self.nu))
        }
    }

    /// Same as [`j_scaled`] for `r > 0`.
    pub fn value(&self, r: f64) -> Result<f64> {
        Ok(r.powf(-self.alpha) * self.weighted(r)?)
    }
}

/// Degree-`n` polynomial `P(t) = sum_i (-n)_i / (b)_i t^i / i!`.
///
/// This is `1F1(-n; b; t)`, i.e. `n! / (b)_n L_n^{(b-1)}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySpec {
    degree: usize,
    b: f64,
    coeffs: Vec<f64>,
}

impl PolySpec {
    pub fn new(degree: usize, b: f64) -> Result<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::domain(format!("polynomial parameter b must be > 0, got {b}")));
        }
        let mut coeffs = Vec::with_capacity(degree + 1);
        let mut c = 1.0;
        coeffs.push(c);
        let n = degree as f64;
        for i in 0..degree {
            let fi = i as f64;
            c *= (-n + fi) / ((b + fi) * (fi + 1.0));
            coeffs.push(c);
        }
        Ok(PolySpec { degree, b, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Three-term recurrence `(b+k) M_{k+1} = (2k+b-t) M_k - k M_{k-1}` for
    /// `M_k = 1F1(-k; b; t)`. Horner on the coefficients loses ~1e-10 by
    /// `t = 20` to cancellation; the recurrence stays near 1e-14.
    pub fn eval(&self, t: f64) -> f64 {
        let b = self.b;
        let (mut prev, mut cur) = (1.0, 1.0 - t / b);
        if self.degree == 0 {
            return prev;
        }
        for k in 1..self.degree {
            let k = k as f64;
            let next = ((2.0 * k + b - t) * cur - k * prev) / (b + k);
            prev = cur;
            cur = next;
        }
        cur
    }

    /// Horner evaluation on the coefficients.
    pub fn eval_horner(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }
}

/// Evaluates `P` for degree `n` and parameter `b` at `t >= 0`.
pub fn eval_p(spec: &PolySpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("polynomial argument must be >= 0, got {t}")));
    }
    Ok(spec.eval(t))
}

/// Legendre polynomial `P_l(x)` by upward recurrence.
pub fn legendre_p(l: usize, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::domain(format!("Legendre argument must lie in [-1,1], got {x}")));
    }
    Ok(legendre_unchecked(l, x))
}

pub(crate) fn legendre_unchecked(l: usize, x: f64) -> f64 {
    let mut p_prev = 1.0;
    if l == 0 {
        return p_prev;
    }
    let mut p = x;
    for k in 1..l {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    p
}

/// Fully normalised associated Legendre function `Pbar_l^m(cos theta)` with the
/// Condon–Shortley phase, `m >= 0`, such that
/// `Y_lm(theta, phi) = Pbar_l^m(cos theta) e^{i m phi}`.
pub fn assoc_legendre_normalized(l: usize, m: usize, x: f64) -> f64 {
    if m > l {
        return 0.0;
    }
    let sin_t = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for k in 1..=m {
        let kf = k as f64;
        pmm *= -((2.0 * kf + 1.0) / (2.0 * kf)).sqrt() * sin_t;
    }
    if l == m {
        return pmm;
    }
    let mf = m as f64;
    let mut p_prev = pmm;
    let mut p = x * (2.0 * mf + 3.0).sqrt() * pmm;
    for ll in (m + 2)..=l {
        let lf = ll as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lm1 = lf - 1.0;
        let bcoef = ((lm1 * lm1 - mf * mf) / (4.0 * lm1 * lm1 - 1.0)).sqrt();
        let next = a * (x * p - bcoef * p_prev);
        p_prev = p;
        p = next;
    }
    p
}

/// Orthonormal complex spherical harmonic `Y_l^m(theta, phi)` (Condon–Shortley
/// phase); `theta` is the colatitude and `phi` the longitude.
pub fn sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> Result<Complex64> {
    if m.unsigned_abs() as usize > l {
        return Err(Error::domain(format!("|m| = {} exceeds l = {l}", m.abs())));
    }
    let am = m.unsigned_abs() as usize;
    let p = assoc_legendre_normalized(l, am, theta.cos());
    let y = Complex64::from_polar(p, am as f64 * phi);
    if m >= 0 {
        Ok(y)
    } else if am.is_multiple_of(2) {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

/// Orthonormal real spherical harmonic: `Pbar_l^0` for `m = 0`,
/// `sqrt(2) Pbar_l^m cos(m phi)` for `m > 0`, `sqrt(2) Pbar_l^|m| sin(|m| phi)`
/// for `m < 0`.
pub fn real_sph_harm(l: usize, m: i64, theta: f64, phi: f64) -> f64 {
    let am = m.unsigned_abs() as usize;
    let p = assoc_legendre_normalized(l, am, theta.cos());
    match m {
        0 => p,
        m if m > 0 => std::f64::consts::SQRT_2 * p * (am as f64 * phi).cos(),
        _ => std::f64::consts::SQRT_2 * p * (am as f64 * phi).sin(),
    }
}
