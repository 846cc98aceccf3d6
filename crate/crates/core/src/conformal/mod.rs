//! Exterior Riemann maps of inclusion shapes and the interior map of the
//! outer domain, both held as truncated Laurent / Taylor series.
//!
//! Points of the plane are identified with complex numbers throughout.
//! An [`ExteriorMap`] sends the complement of a closed inclusion onto the
//! complement of the closed unit disk with `T(z) ~ beta z` at infinity and
//! `beta > 0`. The inverse map `w -> c_{-1} w + c_0 + sum_k c_k w^{-k}` is
//! the primary representation; the forward map is evaluated either in
//! closed form (disk, ellipse) or by Newton iteration on the inverse series.

mod fit;
mod interior;
mod shape;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, horner, horner_derivative};

pub use fit::{SampledFit, FIT_TOLERANCE};
pub use interior::{InteriorKind, InteriorMap};
pub use shape::{winding_number, ShapeSpec};

/// Default truncation order of fitted and closed-form series.
pub const DEFAULT_ORDER: usize = 32;

/// Points with `|T(z)| < 1 - BOUNDARY_SLACK` are treated as interior.
pub(crate) const BOUNDARY_SLACK: f64 = 1e-9;

const SAMPLE_COUNT: usize = 512;
const SEED_RADII: [f64; 7] = [1.0, 1.05, 1.15, 1.3, 1.6, 2.2, 3.5];
const SEED_ANGLES: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64, c: f64 },
    Series,
}

/// Truncated Laurent representation of an exterior Riemann map and its inverse.
#[derive(Debug, Clone)]
pub struct ExteriorMap {
    kind: MapKind,
    beta: f64,
    /// Forward tail `beta_k`, `k = 0..=K`: `T(z) = beta z + sum_k beta_k z^{-k}`.
    coeffs: Vec<Complex64>,
    /// Inverse coefficients `[c_{-1}, c_0, c_1, ..., c_K]`.
    inv_coeffs: Vec<Complex64>,
    truncation_order: usize,
    validity_radius: f64,
    max_boundary_modulus: f64,
    deviation_bound: f64,
    fit_residual: f64,
    seeds: Vec<(Complex64, Complex64)>,
}

/// Build the exterior map of `shape` truncated at `order`.
pub fn build_exterior_map(shape: &ShapeSpec, order: usize) -> Result<ExteriorMap> {
    if order < 1 {
        return Err(Error::invalid("truncation order must be at least 1"));
    }
    shape.validate()?;
    match shape {
        ShapeSpec::Disk { radius } => Ok(ExteriorMap::disk(*radius)),
        ShapeSpec::Ellipse { a, b, c } => Ok(ExteriorMap::ellipse(*a, *b, *c, order)),
        ShapeSpec::Laurent(inv) => {
            let mut inv = inv.clone();
            inv.resize(inv.len().max(order + 2), Complex64::new(0.0, 0.0));
            ExteriorMap::from_inverse_series(inv, 0.0)
        }
        ShapeSpec::Samples(points) => {
            let fitted = fit::fit_sampled_shape(points, order)?;
            ExteriorMap::from_inverse_series(fitted.inv_coeffs, fitted.residual)
        }
    }
}

impl ExteriorMap {
    /// Map of the disk of the given radius centred at the origin: `T(z) = z / r`.
    pub fn disk(radius: f64) -> Self {
        let mut map = ExteriorMap {
            kind: MapKind::Disk { radius },
            beta: 1.0 / radius,
            coeffs: vec![Complex64::new(0.0, 0.0)],
            inv_coeffs: vec![Complex64::new(radius, 0.0), Complex64::new(0.0, 0.0)],
            truncation_order: 0,
            validity_radius: 1.5 * radius,
            max_boundary_modulus: radius,
            deviation_bound: 0.0,
            fit_residual: 0.0,
            seeds: Vec::new(),
        };
        map.finish();
        map
    }

    /// Map of the ellipse `a^2 x^2 + b^2 y^2 < c^2`.
    pub fn ellipse(a: f64, b: f64, c: f64, order: usize) -> Self {
        let s = 1.0 / a + 1.0 / b;
        let d = 1.0 / (b * b) - 1.0 / (a * a);
        let lead = c * s / 2.0;
        let inv_coeffs = vec![
            Complex64::new(lead, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(c * (1.0 / a - 1.0 / b) / 2.0, 0.0),
        ];
        // sqrt(z^2/c^2 + d) = (z/c) sum_n binom(1/2, n) (d c^2)^n z^{-2n}
        let mut coeffs = vec![Complex64::new(0.0, 0.0); order + 1];
        let mut binom = 1.0;
        let mut power = 1.0;
        for n in 1.. {
            binom *= (0.5 - (n as f64 - 1.0)) / n as f64;
            power *= d * c * c;
            let k = 2 * n - 1;
            if k > order {
                break;
            }
            coeffs[k] = Complex64::new(binom * power / (c * s), 0.0);
        }
        let max_mod = (c / a).max(c / b);
        let mut map = ExteriorMap {
            kind: MapKind::Ellipse { a, b, c },
            beta: 2.0 / (c * s),
            coeffs,
            inv_coeffs,
            truncation_order: order,
            validity_radius: 1.5 * max_mod,
            max_boundary_modulus: max_mod,
            deviation_bound: 0.0,
            fit_residual: 0.0,
            seeds: Vec::new(),
        };
        map.finish();
        map
    }

    /// Map given by its inverse Laurent coefficients `[c_{-1}, c_0, c_1, ...]`.
    ///
    /// The boundary curve `w -> inverse(e^{i theta})` must be simple, positively
    /// oriented and wind once around the origin.
    pub fn from_inverse_series(mut inv_coeffs: Vec<Complex64>, fit_residual: f64) -> Result<Self> {
        if inv_coeffs.len() < 2 {
            inv_coeffs.resize(2, Complex64::new(0.0, 0.0));
        }
        let lead = inv_coeffs[0];
        if lead.re <= 0.0 || lead.im.abs() > 1e-12 * lead.re {
            return Err(Error::Shape(format!(
                "leading inverse coefficient must be real and positive, got {lead}"
            )));
        }
        inv_coeffs[0] = Complex64::new(lead.re, 0.0);
        let order = inv_coeffs.len() - 2;
        let mut map = ExteriorMap {
            kind: MapKind::Series,
            beta: 1.0 / lead.re,
            coeffs: Vec::new(),
            inv_coeffs,
            truncation_order: order,
            validity_radius: 0.0,
            max_boundary_modulus: 0.0,
            deviation_bound: 0.0,
            fit_residual,
            seeds: Vec::new(),
        };
        let boundary: Vec<Complex64> = (0..SAMPLE_COUNT)
            .map(|j| map.boundary_point(spectral::angle(j, SAMPLE_COUNT)))
            .collect();
        shape::check_simple_curve(&boundary)?;
        if winding_number(&boundary, Complex64::new(0.0, 0.0)) != 1 {
            return Err(Error::Shape("the origin must lie inside the inclusion".into()));
        }
        let min_speed = (0..SAMPLE_COUNT)
            .map(|j| map.inverse_derivative(Complex64::from_polar(1.0, spectral::angle(j, SAMPLE_COUNT))).norm())
            .fold(f64::INFINITY, f64::min);
        if min_speed <= 1e-10 * lead.re {
            return Err(Error::Shape("boundary parametrization is not regular".into()));
        }
        map.max_boundary_modulus = boundary.iter().map(|z| z.norm()).fold(0.0, f64::max);
        map.validity_radius = 1.5 * map.max_boundary_modulus;
        map.build_seeds();
        map.coeffs = map.forward_coefficients_by_sampling(order.max(DEFAULT_ORDER));
        map.finish();
        Ok(map)
    }

    fn finish(&mut self) {
        if self.seeds.is_empty() {
            self.build_seeds();
        }
        let r = 2.0 * self.validity_radius;
        self.deviation_bound = (0..SAMPLE_COUNT)
            .map(|j| {
                let z = Complex64::from_polar(r, spectral::angle(j, SAMPLE_COUNT));
                (self.forward_unchecked(z) - z * self.beta).norm()
            })
            .fold(0.0, f64::max);
    }

    fn build_seeds(&mut self) {
        self.seeds = SEED_RADII
            .iter()
            .flat_map(|&rho| {
                (0..SEED_ANGLES).map(move |j| Complex64::from_polar(rho, spectral::angle(j, SEED_ANGLES)))
            })
            .map(|w| (w, self.inverse_unchecked(w)))
            .collect();
    }

    fn forward_coefficients_by_sampling(&self, order: usize) -> Vec<Complex64> {
        let m = (4 * order).next_power_of_two().max(256);
        let r = 2.0 * self.validity_radius;
        let values: Vec<Complex64> = (0..m)
            .map(|j| {
                let z = Complex64::from_polar(r, spectral::angle(j, m));
                self.forward_unchecked(z) - z * self.beta
            })
            .collect();
        // coefficient of e^{-i k theta} is beta_k r^{-k}
        let spectrum = dft_negative_frequencies(&values);
        (0..=order).map(|k| spectrum[k] * r.powi(k as i32)).collect()
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    /// Transfinite-diameter coefficient `beta` of `T(z) ~ beta z`.
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn inv_coeffs(&self) -> &[Complex64] {
        &self.inv_coeffs
    }

    pub fn truncation_order(&self) -> usize {
        self.truncation_order
    }

    pub fn validity_radius(&self) -> f64 {
        self.validity_radius
    }

    pub fn max_boundary_modulus(&self) -> f64 {
        self.max_boundary_modulus
    }

    /// Recorded sup of `|T(z) - beta z|` on the circle of radius `2 R`.
    pub fn deviation_bound(&self) -> f64 {
        self.deviation_bound
    }

    /// Residual of the boundary least-squares fit (zero for closed forms).
    pub fn fit_residual(&self) -> f64 {
        self.fit_residual
    }

    /// Point of the inclusion boundary with mapped angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.inverse_unchecked(Complex64::from_polar(1.0, theta))
    }

    /// Forward map `T(z)`. Fails for `z` inside the inclusion.
    pub fn forward(&self, z: Complex64) -> Result<Complex64> {
        let w = match self.kind {
            MapKind::Series => self
                .newton_forward(z)
                .ok_or_else(|| Error::domain(format!("{z} is not exterior to the inclusion")))?,
            _ => self.forward_unchecked(z),
        };
        if w.norm() < 1.0 - BOUNDARY_SLACK {
            return Err(Error::domain(format!("{z} lies inside the inclusion")));
        }
        Ok(w)
    }

    /// Inverse map for `|w| >= 1`.
    pub fn inverse(&self, w: Complex64) -> Result<Complex64> {
        if w.norm() < 1.0 - 1e-12 {
            return Err(Error::domain(format!("|w| = {} < 1", w.norm())));
        }
        Ok(self.inverse_unchecked(w))
    }

    /// Inverse series evaluated without the `|w| >= 1` check.
    pub fn inverse_unchecked(&self, w: Complex64) -> Complex64 {
        let head = self.inv_coeffs[0] * w + self.inv_coeffs[1];
        if self.inv_coeffs.len() <= 2 {
            return head;
        }
        let u = w.inv();
        head + horner(&self.inv_coeffs[2..], u) * u
    }

    /// `dz/dw` of the inverse series.
    pub fn inverse_derivative(&self, w: Complex64) -> Complex64 {
        if self.inv_coeffs.len() <= 2 {
            return self.inv_coeffs[0];
        }
        let u = w.inv();
        // d/dw [u P(u)] = -u^2 (P(u) + u P'(u))
        let tail = &self.inv_coeffs[2..];
        self.inv_coeffs[0] - u * u * (horner(tail, u) + u * horner_derivative(tail, u))
    }

    /// Complex derivative `T'(z)`.
    pub fn forward_derivative(&self, z: Complex64) -> Result<Complex64> {
        let w = self.forward(z)?;
        Ok(self.inverse_derivative(w).inv())
    }

    /// Truncated forward Laurent series; accurate for `|z| > validity_radius`.
    pub fn forward_series(&self, z: Complex64) -> Complex64 {
        let u = z.inv();
        z * self.beta + horner(&self.coeffs, u)
    }

    fn forward_unchecked(&self, z: Complex64) -> Complex64 {
        match self.kind {
            MapKind::Disk { radius } => z / radius,
            MapKind::Ellipse { a, b, c } => {
                let s = 1.0 / a + 1.0 / b;
                let root = (z * z / (c * c) + (1.0 / (b * b) - 1.0 / (a * a))).sqrt();
                let p = (z / c + root) / s;
                let m = (z / c - root) / s;
                if p.norm() >= m.norm() {
                    p
                } else {
                    m
                }
            }
            MapKind::Series => self.newton_forward(z).unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    fn initial_guess(&self, z: Complex64) -> Complex64 {
        if z.norm() > 2.0 * self.validity_radius && !self.coeffs.is_empty() {
            return self.forward_series(z);
        }
        if z.norm() > 2.0 * self.validity_radius || self.seeds.is_empty() {
            return (z - self.inv_coeffs[1]) * self.beta;
        }
        self.seeds
            .iter()
            .min_by(|a, b| (a.1 - z).norm_sqr().total_cmp(&(b.1 - z).norm_sqr()))
            .map(|s| s.0)
            .unwrap()
    }

    fn newton_forward(&self, z: Complex64) -> Option<Complex64> {
        let scale = z.norm().max(self.max_boundary_modulus).max(1e-300);
        let tol = 4.0 * f64::EPSILON * scale;
        let mut w = self.initial_guess(z);
        let mut g = self.inverse_unchecked(w) - z;
        for _ in 0..80 {
            if g.norm() <= tol {
                return Some(w);
            }
            let step = g / self.inverse_derivative(w);
            let mut t = 1.0;
            loop {
                let candidate = w - step * t;
                if candidate.norm() > 0.05 {
                    let gc = self.inverse_unchecked(candidate) - z;
                    if gc.norm() < g.norm() {
                        w = candidate;
                        g = gc;
                        break;
                    }
                }
                t *= 0.5;
                if t < 1e-6 {
                    return (g.norm() <= 1e3 * tol).then_some(w);
                }
            }
        }
        (g.norm() <= 1e3 * tol).then_some(w)
    }

    /// Rescaled map `T_eps(x) = eps T((x - center) / eps)` of the inclusion
    /// `center + eps * omega`.
    pub fn rescaled(&self, center: Complex64, eps: f64) -> RescaledMap<'_> {
        RescaledMap { map: self, center, eps }
    }
}

/// `T_eps(x) = eps T((x - x_eps) / eps)`, sending the exterior of
/// `x_eps + eps omega` onto the exterior of the disk of radius `eps`.
#[derive(Debug, Clone, Copy)]
pub struct RescaledMap<'a> {
    map: &'a ExteriorMap,
    center: Complex64,
    eps: f64,
}

impl RescaledMap<'_> {
    pub fn eval(&self, x: Complex64) -> Result<Complex64> {
        Ok(self.map.forward((x - self.center) / self.eps)? * self.eps)
    }

    /// Point of `boundary(omega_eps)` with mapped angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.center + self.map.boundary_point(theta) * self.eps
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// `(1/M) sum_j v_j e^{+i k theta_j}` for `k = 0..M`, i.e. the coefficients of
/// `e^{-i k theta}` in the samples.
pub(crate) fn dft_negative_frequencies(values: &[Complex64]) -> Vec<Complex64> {
    let conj: Vec<Complex64> = values.iter().map(|v| v.conj()).collect();
    spectral::dft(&conj).into_iter().map(|c| c.conj()).collect()
}

/// Uniform samples `exp(i 2 pi j / m)` of the unit circle.
pub fn unit_circle(m: usize) -> impl Iterator<Item = Complex64> {
    (0..m).map(move |j| Complex64::from_polar(1.0, TAU * j as f64 / m as f64))
}
