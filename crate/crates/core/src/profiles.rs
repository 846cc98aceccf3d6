//! Per-inclusion lifting profiles.
//!
//! For an inclusion `x_eps + eps omega` the profile holds
//! `ell(x) = ln |T_eps(x)|`, the interior extension `w = G[ln beta |. - x_eps|]`
//! and the scale `h = 1 / (w(x_eps) - ln eps)`. The corrector
//! `ell - w` is harmonic in the perforated domain, equals `ln eps - w` on the
//! inclusion and is `O(eps)` on the outer boundary.

use std::sync::Arc;

use num_complex::Complex64;

use crate::conformal::{ExteriorMap, InteriorMap};
use crate::error::{Error, Result};
use crate::harmonic_ext::{BoundaryFunction, BoundaryId, DEFAULT_SAMPLES};
use crate::harmonic_int::{solve_interior, HarmonicInteriorField};
use crate::spectral;

#[derive(Debug, Clone)]
pub struct Profile {
    inclusion_index: usize,
    map: Arc<ExteriorMap>,
    w: HarmonicInteriorField,
    center: Complex64,
    beta: f64,
    eps: f64,
    w_center: f64,
    h_eps: f64,
    outer_bound: f64,
}

/// Builds the profile of the inclusion `center + eps * omega` inside the
/// domain of `domain`, sampling boundaries at `DEFAULT_SAMPLES` points.
pub fn build_profile(
    domain: Arc<InteriorMap>,
    shape_map: Arc<ExteriorMap>,
    center: Complex64,
    eps: f64,
) -> Result<Profile> {
    build_profile_indexed(domain, shape_map, center, eps, 0)
}

pub fn build_profile_indexed(
    domain: Arc<InteriorMap>,
    shape_map: Arc<ExteriorMap>,
    center: Complex64,
    eps: f64,
    inclusion_index: usize,
) -> Result<Profile> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let m = DEFAULT_SAMPLES;
    let scaled = shape_map.rescaled(center, eps);
    let inside = (0..m).all(|j| domain.contains(scaled.boundary_point(spectral::angle(j, m))));
    if !inside || !domain.contains(center) {
        return Err(Error::Geometry(format!(
            "inclusion {inclusion_index} at {center} with eps = {eps} is not strictly inside the domain"
        )));
    }
    let beta = shape_map.beta();
    let data = BoundaryFunction::from_fn(m, BoundaryId::Outer, |theta| {
        (beta * (domain.boundary_point(theta) - center).norm()).ln()
    })?;
    let w = solve_interior(domain.clone(), &data);
    let w_center = w.evaluate(center)?;
    let gap = w_center - eps.ln();
    if gap <= 0.0 {
        return Err(Error::ScaleDegeneracy(eps));
    }
    let mut profile = Profile {
        inclusion_index,
        map: shape_map,
        w,
        center,
        beta,
        eps,
        w_center,
        h_eps: 1.0 / gap,
        outer_bound: 0.0,
    };
    let mut sup = 0.0f64;
    for j in 0..m {
        let y = domain.boundary_point(spectral::angle(j, m));
        sup = sup.max((profile.ell(y)? - data.samples()[j]).abs());
    }
    profile.outer_bound = sup / eps;
    log::debug!("profile {inclusion_index}: eps = {eps:e}, w(x_eps) = {w_center:.6}, M = {:.4}", profile.outer_bound);
    Ok(profile)
}

impl Profile {
    pub fn inclusion_index(&self) -> usize {
        self.inclusion_index
    }

    pub fn map(&self) -> &Arc<ExteriorMap> {
        &self.map
    }

    pub fn w(&self) -> &HarmonicInteriorField {
        &self.w
    }

    pub fn center(&self) -> Complex64 {
        self.center
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// `w(x_eps)`.
    pub fn w_center(&self) -> f64 {
        self.w_center
    }

    /// `1 / (w(x_eps) - ln eps)`.
    pub fn h_eps(&self) -> f64 {
        self.h_eps
    }

    /// Measured `sup_{outer boundary} |ell - ln beta |. - x_eps|| / eps`.
    pub fn outer_bound(&self) -> f64 {
        self.outer_bound
    }

    /// `ln |T_eps(x)| = ln eps + ln |T((x - x_eps)/eps)|`.
    pub fn ell(&self, x: Complex64) -> Result<f64> {
        let w = self.map.forward((x - self.center) / self.eps)?;
        Ok(self.eps.ln() + w.norm().ln())
    }

    /// Point of the inclusion boundary with mapped angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.center + self.map.boundary_point(theta) * self.eps
    }

    /// `ell(x) - w(x)` for `x` in the closure of the perforated domain.
    pub fn corrector(&self, x: Complex64) -> Result<f64> {
        Ok(self.ell(x)? - self.w.evaluate_on_closure(x)?)
    }
}

/// `ell_eps(x) - w(x)`.
pub fn evaluate_corrector(p: &Profile, x: Complex64) -> Result<f64> {
    p.corrector(x)
}
