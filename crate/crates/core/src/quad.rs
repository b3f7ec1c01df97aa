//! Quadrature rules and radial grids.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (z * p1 - p0) / (z * z - 1.0);
    (p1, dp)
}

/// Composite Gauss–Legendre rule on `(0, r_max]`.
///
/// The first panel is replaced by `grading` geometrically shrinking panels
/// (ratio 1/2) towards the origin so that integrands behaving like `r^p` with
/// `p > -1` are integrated to near machine precision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialQuadrature {
    pub r_max: f64,
    pub panels: usize,
    pub nodes: usize,
    pub grading: usize,
}

impl Default for RadialQuadrature {
    fn default() -> Self {
        RadialQuadrature {
            r_max: 30.0,
            panels: 64,
            nodes: 8,
            grading: 24,
        }
    }
}

impl RadialQuadrature {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max > 0.0) || self.panels == 0 || self.nodes == 0 {
            return Err(Error::Config(format!("invalid radial quadrature {self:?}")));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<RadialGrid> {
        self.validate()?;
        let (gx, gw) = gauss_legendre(self.nodes);
        let h = self.r_max / self.panels as f64;
        let mut edges = Vec::with_capacity(self.panels + self.grading + 1);
        edges.push(0.0);
        for g in (1..=self.grading).rev() {
            edges.push(h * 0.5f64.powi(g as i32));
        }
        for p in 1..=self.panels {
            edges.push(h * p as f64);
        }
        let mut r = Vec::with_capacity((edges.len() - 1) * self.nodes);
        let mut w = Vec::with_capacity(r.capacity());
        for pair in edges.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let half = 0.5 * (b - a);
            let mid = 0.5 * (a + b);
            for (x, wt) in gx.iter().zip(&gw) {
                r.push(mid + half * x);
                w.push(half * wt);
            }
        }
        RadialGrid::new(r, w)
    }
}

/// Strictly increasing positive radii with quadrature weights for `∫ dr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    r: Vec<f64>,
    w: Vec<f64>,
}

impl RadialGrid {
    pub fn new(r: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        if r.is_empty() || r.len() != w.len() {
            return Err(Error::validation(
                "radial grid needs matching non-empty nodes and weights",
            ));
        }
        if !(r[0] > 0.0) || r.windows(2).any(|p| !(p[1] > p[0])) {
            return Err(Error::validation(
                "radial grid must be strictly increasing and positive",
            ));
        }
        Ok(RadialGrid { r, w })
    }

    /// `m` equispaced points from `r_lo > 0` to `r_hi` with trapezoid weights.
    pub fn uniform(r_lo: f64, r_hi: f64, m: usize) -> Result<Self> {
        if m < 2 || !(r_lo > 0.0) || !(r_hi > r_lo) {
            return Err(Error::validation(format!(
                "uniform grid needs 0 < r_lo < r_hi and m >= 2 (got {r_lo}, {r_hi}, {m})"
            )));
        }
        let h = (r_hi - r_lo) / (m - 1) as f64;
        let r = (0..m).map(|i| r_lo + h * i as f64).collect();
        let mut w = vec![h; m];
        w[0] = 0.5 * h;
        w[m - 1] = 0.5 * h;
        RadialGrid::new(r, w)
    }

    /// Cell-centred points `(i + 1/2) h`, midpoint weights.
    pub fn cell_centered(h: f64, m: usize) -> Result<Self> {
        if !(h > 0.0) || m == 0 {
            return Err(Error::validation("cell-centred grid needs h > 0 and m >= 1"));
        }
        RadialGrid::new((0..m).map(|i| (i as f64 + 0.5) * h).collect(), vec![h; m])
    }

    /// `m` log-spaced sample points from `r_lo` to `r_hi` (inclusive). The
    /// weights are those of the trapezoid rule on the non-uniform points.
    pub fn log_spaced(r_lo: f64, r_hi: f64, m: usize) -> Result<Self> {
        if m < 2 || !(r_lo > 0.0) || !(r_hi > r_lo) {
            return Err(Error::validation("log grid needs 0 < r_lo < r_hi and m >= 2"));
        }
        let (a, b) = (r_lo.ln(), r_hi.ln());
        let mut r: Vec<f64> = (0..m)
            .map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp())
            .collect();
        r[0] = r_lo;
        r[m - 1] = r_hi;
        let w = trapezoid_weights(&r);
        RadialGrid::new(r, w)
    }

    pub fn radii(&self) -> &[f64] {
        &self.r
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn len(&self) -> usize {
        self.r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().expect("non-empty grid")
    }

    /// The grid with every radius and weight multiplied by `s > 0`.
    pub fn scaled(&self, s: f64) -> RadialGrid {
        RadialGrid {
            r: self.r.iter().map(|r| r * s).collect(),
            w: self.w.iter().map(|w| w * s).collect(),
        }
    }

    /// `Σ_i w_i f(r_i)` in a fixed sequential order.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.r.iter().zip(&self.w).map(|(&r, &w)| w * f(r)).sum()
    }
}

fn trapezoid_weights(r: &[f64]) -> Vec<f64> {
    let m = r.len();
    let mut w = vec![0.0; m];
    for i in 0..m - 1 {
        let h = r[i + 1] - r[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 17, 40] {
            let (x, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}: {q} vs {exact}");
            }
            assert!(x.windows(2).all(|p| p[1] > p[0]));
        }
    }

    #[test]
    fn graded_radial_rule_handles_fractional_powers() {
        let grid = RadialQuadrature::default().grid().unwrap();
        // ∫_0^∞ r^{1.5} e^{-r^2/2} dr = 2^{0.25} Γ(1.25)
        let q = grid.integrate(|r| r.powf(1.5) * (-0.5 * r * r).exp());
        let exact = 2f64.powf(0.25) * statrs::function::gamma::gamma(1.25);
        assert_relative_eq!(q, exact, max_relative = 1e-13);
        let q = grid.integrate(|r| r.powf(0.25) * (-0.5 * r * r).exp());
        let exact = 2f64.powf(-0.375) * statrs::function::gamma::gamma(0.625);
        assert_relative_eq!(q, exact, max_relative = 1e-11);
    }

    #[test]
    fn grid_constructors_validate() {
        assert!(RadialGrid::new(vec![0.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RadialGrid::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(RadialGrid::uniform(0.0, 1.0, 10).is_err());
        let g = RadialGrid::log_spaced(1e-4, 1e-1, 7).unwrap();
        assert_eq!(g.radii()[0], 1e-4);
        assert_eq!(g.r_max(), 1e-1);
        let g = RadialGrid::uniform(1.0, 2.0, 11).unwrap();
        assert_relative_eq!(g.integrate(|r| r), 1.5, max_relative = 1e-14);
    }
}
