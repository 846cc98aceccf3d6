//! Exterior Dirichlet problem for an inclusion, solved through its
//! exterior Riemann map.
//!
//! Boundary data `F` are sampled at `gamma(theta_j) = T^{-1}(e^{i theta_j})`,
//! `theta_j = 2 pi j / M`. In mapped coordinates `zeta = T(X)` the bounded
//! harmonic extension is
//!
//! ```text
//! Psi = Psi0 + Re sum_{k>=1} g_k zeta^{-k},   g_k = -c_{k+1} / k,
//! ```
//!
//! where `Psi0` is the circle mean of `F` and `c_k` are the coefficients of
//! the derivative series.

use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;

use crate::conformal::{dft_negative_frequencies, ExteriorMap};
use crate::error::{Error, Result};
use crate::spectral::{self, horner};

/// Default sample count on every boundary.
pub const DEFAULT_SAMPLES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryId {
    Outer,
    Inclusion(usize),
}

/// Real periodic function sampled at `M` uniform mapped angles, with its
/// Fourier coefficients `k = 0..=M/2`.
#[derive(Debug, Clone)]
pub struct BoundaryFunction {
    samples: Vec<f64>,
    fourier: Vec<Complex64>,
    boundary: BoundaryId,
    sup_norm: f64,
}

impl BoundaryFunction {
    /// `samples.len()` must be a power of two and at least 32.
    pub fn from_samples(samples: Vec<f64>, boundary: BoundaryId) -> Result<Self> {
        let m = samples.len();
        if m < 32 || !m.is_power_of_two() {
            return Err(Error::invalid(format!("sample count must be a power of two >= 32, got {m}")));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::invalid("boundary samples must be finite"));
        }
        let fourier = spectral::real_coefficients(&samples);
        let sup_norm = samples.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        Ok(BoundaryFunction {
            samples,
            fourier,
            boundary,
            sup_norm,
        })
    }

    /// Samples `f(theta_j)`.
    pub fn from_fn(m: usize, boundary: BoundaryId, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_samples((0..m).map(|j| f(spectral::angle(j, m))).collect(), boundary)
    }

    pub fn zeros(m: usize, boundary: BoundaryId) -> Result<Self> {
        Self::from_samples(vec![0.0; m], boundary)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `f_k = (1/M) sum_j F_j e^{-i k theta_j}`, `k = 0..=M/2`.
    pub fn fourier(&self) -> &[Complex64] {
        &self.fourier
    }

    pub fn boundary(&self) -> BoundaryId {
        self.boundary
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn angle(&self, j: usize) -> f64 {
        spectral::angle(j, self.samples.len())
    }

    /// Trapezoid-rule mean over the circle.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Largest Fourier modulus strictly above degree `M/4`.
    pub fn high_frequency_content(&self) -> f64 {
        let m = self.samples.len();
        self.fourier[m / 4 + 1..]
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// One-sided holomorphic coefficients `h_k` with
    /// `F(theta) = Re sum_{k=0}^{M/2} h_k e^{i k theta}` exactly at the samples.
    pub(crate) fn analytic_coefficients(&self) -> Vec<Complex64> {
        let m = self.samples.len();
        self.fourier
            .iter()
            .enumerate()
            .map(|(k, &c)| if k == 0 || k == m / 2 { c } else { c * 2.0 })
            .collect()
    }

    /// `a F + b G` on the same boundary and grid.
    pub fn combine(a: f64, f: &Self, b: f64, g: &Self) -> Result<Self> {
        if f.len() != g.len() {
            return Err(Error::invalid("boundary functions sampled on different grids"));
        }
        Self::from_samples(
            f.samples.iter().zip(&g.samples).map(|(x, y)| a * x + b * y).collect(),
            f.boundary,
        )
    }

    /// `theta,value` rows for debugging.
    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "theta,value")?;
        for (j, v) in self.samples.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e}", self.angle(j), v)?;
        }
        Ok(())
    }
}

/// Bounded harmonic function outside an inclusion matching given boundary data.
#[derive(Debug, Clone)]
pub struct HarmonicExteriorField {
    psi0: f64,
    /// Derivative-series coefficients `c_k`, stored from `k = 2`.
    tail: Vec<Complex64>,
    /// `g_k = -c_{k+1}/k` for `k >= 1`, stored from `k = 1`.
    mapped: Vec<Complex64>,
    map: Arc<ExteriorMap>,
    sup_norm: f64,
    resolution_warning: Option<f64>,
}

/// Circle mean of `F o T^{-1}` by the trapezoid rule.
pub fn psi0_of(_map: &ExteriorMap, f: &BoundaryFunction) -> f64 {
    f.mean()
}

/// Harmonic extension of `f` to the exterior of the inclusion of `map`.
pub fn solve_exterior(map: Arc<ExteriorMap>, f: &BoundaryFunction) -> HarmonicExteriorField {
    let psi0 = psi0_of(&map, f);
    // on |zeta| = 1, Re sum_k h_k zeta^k = Re sum_k conj(h_k) zeta^{-k}
    let mapped: Vec<Complex64> = f.analytic_coefficients().iter().skip(1).map(|h| h.conj()).collect();
    let tail = mapped
        .iter()
        .enumerate()
        .map(|(i, g)| -*g * (i + 1) as f64)
        .collect();
    let high = f.high_frequency_content();
    let resolution_warning = (high > 1e-6 * f.sup_norm()).then(|| {
        log::warn!(
            "boundary data under-resolved: Fourier content {high:.2e} above degree {}",
            f.len() / 4
        );
        high
    });
    HarmonicExteriorField {
        psi0,
        tail,
        mapped,
        map,
        sup_norm: f.sup_norm(),
        resolution_warning,
    }
}

impl HarmonicExteriorField {
    /// A field identically equal to zero.
    pub fn zero(map: Arc<ExteriorMap>) -> Self {
        HarmonicExteriorField {
            psi0: 0.0,
            tail: Vec::new(),
            mapped: Vec::new(),
            map,
            sup_norm: 0.0,
            resolution_warning: None,
        }
    }

    pub fn psi0(&self) -> f64 {
        self.psi0
    }

    /// Derivative-series coefficients `c_k` for `k = 2, 3, ...`.
    pub fn tail(&self) -> &[Complex64] {
        &self.tail
    }

    pub fn map(&self) -> &Arc<ExteriorMap> {
        &self.map
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    /// Truncation order `n` of the tail.
    pub fn order(&self) -> usize {
        self.mapped.len()
    }

    /// Set when the boundary data carried Fourier content above degree `M/4`.
    pub fn resolution_warning(&self) -> Option<f64> {
        self.resolution_warning
    }

    fn mapped_tail(&self, zeta: Complex64) -> Complex64 {
        if self.mapped.is_empty() {
            return Complex64::new(0.0, 0.0);
        }
        let u = zeta.inv();
        horner(&self.mapped, u) * u
    }

    /// Value at mapped coordinate `zeta`, `|zeta| >= 1`.
    pub fn evaluate_mapped(&self, zeta: Complex64) -> f64 {
        self.psi0 + self.mapped_tail(zeta).re
    }

    /// Value of `Psi - Psi0` at mapped coordinate `zeta`.
    pub fn tail_mapped(&self, zeta: Complex64) -> f64 {
        self.mapped_tail(zeta).re
    }

    /// `Psi(X)` for `X` exterior to the inclusion.
    pub fn evaluate(&self, x: Complex64) -> Result<f64> {
        Ok(self.evaluate_mapped(self.map.forward(x)?))
    }

    /// Holomorphic completion `Psi0 + sum_k g_k T(X)^{-k}` whose real part is `Psi`.
    pub fn holomorphic(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.mapped_tail(self.map.forward(x)?) + self.psi0)
    }

    /// `sup |X|^n |R_n(X)|` over 256 points of the circle `|X| = radius`,
    /// where `R_n` is the complex physical Laurent tail of `Psi` from index
    /// `n` on. Its modulus bounds the real tail and, unlike it, cannot grow
    /// with the radius.
    pub fn tail_sup(&self, n: usize, radius: f64) -> Result<f64> {
        if n < 1 {
            return Err(Error::invalid("tail index must be at least 1"));
        }
        if radius <= self.map.validity_radius() {
            return Err(Error::invalid(format!(
                "radius {radius} is inside the validity radius {}",
                self.map.validity_radius()
            )));
        }
        const M: usize = 256;
        let values = (0..M)
            .map(|j| self.holomorphic(Complex64::from_polar(radius, spectral::angle(j, M))))
            .collect::<Result<Vec<_>>>()?;
        // coefficient of e^{-ik theta} is e_k radius^{-k}
        let spectrum = dft_negative_frequencies(&values);
        let sup = (0..M)
            .map(|j| {
                let theta = spectral::angle(j, M);
                let tail: Complex64 = (n..M / 2)
                    .map(|k| spectrum[k] * Complex64::from_polar(1.0, -(k as f64) * theta))
                    .sum();
                tail.norm()
            })
            .fold(0.0, f64::max);
        Ok(sup * radius.powi(n as i32))
    }

    /// Discrete `(1/2 pi i) oint Psi_hat(z)/z dz` on `|z| = 2 R`.
    pub fn contour_mean_check(&self) -> Result<Complex64> {
        const M: usize = 256;
        let r = 2.0 * self.map.validity_radius();
        let sum = (0..M)
            .map(|j| self.holomorphic(Complex64::from_polar(r, spectral::angle(j, M))))
            .sum::<Result<Complex64>>()?;
        Ok(sum / M as f64)
    }
}

/// `Psi(X)` for a field built by [`solve_exterior`].
pub fn evaluate_exterior(field: &HarmonicExteriorField, x: Complex64) -> Result<f64> {
    field.evaluate(x)
}

/// Samples `F(gamma(theta_j))` for a function of the physical boundary point.
pub fn sample_on_inclusion(
    map: &ExteriorMap,
    m: usize,
    boundary: BoundaryId,
    f: impl Fn(Complex64) -> f64,
) -> Result<BoundaryFunction> {
    BoundaryFunction::from_fn(m, boundary, |theta| f(map.boundary_point(theta)))
}
