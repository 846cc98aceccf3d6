//! Dense reference solver for the perforated Dirichlet problem by the method
//! of fundamental solutions.
//!
//! The harmonic part `v = u - u_p` is a sum of logarithmic kernels
//! `(q / 2 pi) ln |x - s|` with sources on a ring outside the outer domain and
//! on a small closed curve inside every inclusion (plus one source at each
//! inclusion center), and a constant. Charges solve the collocation system in
//! the least-squares sense with a truncated SVD.

use std::f64::consts::TAU;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::conformal::winding_number;
use crate::error::{Error, Result};
use crate::expansion::{Expansion, Forcing, Scene};
use crate::linalg::truncated_lstsq;

/// Relative singular-value cutoff of the collocation solve.
pub const SVD_CUTOFF: f64 = 1e-12;
/// Solutions whose boundary residual exceeds this fraction of the data sup
/// are refused.
pub const REJECT_RATIO: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceOptions {
    pub outer_sources: usize,
    pub inner_sources: usize,
    /// Outer sources sit on the outer boundary scaled by this factor about the
    /// domain center.
    pub outer_radius: f64,
    /// Inner sources sit at `x_eps + eps * T^{-1}(inner_radius e^{i theta})`.
    pub inner_radius: f64,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            outer_sources: 128,
            inner_sources: 96,
            outer_radius: 1.4,
            inner_radius: 0.65,
        }
    }
}

impl ReferenceOptions {
    /// Same placement with twice the sources (and collocation nodes).
    pub fn refined(&self) -> Self {
        ReferenceOptions {
            outer_sources: 2 * self.outer_sources,
            inner_sources: 2 * self.inner_sources,
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    pub source_points: Vec<Complex64>,
    /// Charges `q` of the kernels `(q / 2 pi) ln |x - s|`.
    pub charges: Vec<f64>,
    pub constant_term: f64,
    /// Sup of the boundary mismatch over collocation and midpoint nodes.
    pub boundary_residual: f64,
    /// Sup of the harmonic-part data `g - u_p`.
    pub data_sup: f64,
    forcing: Forcing,
}

impl ReferenceSolution {
    pub fn evaluate(&self, x: Complex64) -> f64 {
        let v: f64 = self
            .source_points
            .iter()
            .zip(&self.charges)
            .map(|(s, q)| q * (x - s).norm().ln())
            .sum::<f64>()
            / TAU;
        self.forcing.particular(x) + v + self.constant_term
    }

    /// Sum of the charges inside inclusion `i`, which hold `inner + 1`
    /// consecutive slots after the outer ring.
    pub fn inclusion_charge(&self, i: usize, outer: usize, inner: usize) -> f64 {
        let start = outer + i * (inner + 1);
        self.charges[start..start + inner + 1].iter().sum()
    }
}

/// `u_p(x) + sum_j q_j ln |x - s_j| / 2 pi + c`.
pub fn evaluate_reference(sol: &ReferenceSolution, x: Complex64) -> f64 {
    sol.evaluate(x)
}

/// Reference solution of `-Lap u = f` with `u = 0` on every boundary.
pub fn solve_reference(scene: &Scene) -> Result<ReferenceSolution> {
    solve_reference_with_data(scene, &|_| 0.0, &|_, _| 0.0, ReferenceOptions::default())
}

/// Reference solution with Dirichlet data `outer(x)` on the outer boundary
/// and `inner(i, x)` on inclusion `i`.
pub fn solve_reference_with_data(
    scene: &Scene,
    outer: &dyn Fn(Complex64) -> f64,
    inner: &dyn Fn(usize, Complex64) -> f64,
    opts: ReferenceOptions,
) -> Result<ReferenceSolution> {
    let eps = scene.eps;
    if eps < 1e-4 {
        return Err(Error::invalid(format!("reference solver needs eps >= 1e-4, got {eps}")));
    }
    let domain = &scene.domain;
    let center = domain.center();
    let no = opts.outer_sources;
    let ni = opts.inner_sources;

    // nodes: 2 per source; even ones are collocated, odd ones only checked
    let mut nodes: Vec<(Complex64, f64)> = Vec::new();
    let mut sources = Vec::new();
    for j in 0..2 * no {
        let y = domain.boundary_point(TAU * j as f64 / (2 * no) as f64);
        nodes.push((y, outer(y)));
        if j % 2 == 0 {
            sources.push(center + (y - center) * opts.outer_radius);
        }
    }
    for (i, inc) in scene.inclusions.iter().enumerate() {
        let c = inc.center(eps);
        let boundary: Vec<Complex64> = (0..2 * ni)
            .map(|j| c + inc.map.boundary_point(TAU * j as f64 / (2 * ni) as f64) * eps)
            .collect();
        let ring: Vec<Complex64> = (0..ni)
            .map(|j| c + inc.map.inverse_unchecked(Complex64::from_polar(opts.inner_radius, TAU * j as f64 / ni as f64)) * eps)
            .collect();
        if ring.iter().any(|&s| winding_number(&boundary, s) != 1) {
            return Err(Error::Geometry(format!("inner sources of inclusion {i} leave the inclusion")));
        }
        sources.extend(ring);
        sources.push(c);
        for y in boundary {
            nodes.push((y, inner(i, y)));
        }
    }

    let forcing = &scene.forcing;
    let rhs: Vec<f64> = nodes.iter().map(|(y, g)| g - forcing.particular(*y)).collect();
    let data_sup = rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    let colloc: Vec<usize> = (0..nodes.len()).filter(|k| k % 2 == 0).collect();
    let n = sources.len();
    let a = DMatrix::from_fn(colloc.len(), n + 1, |r, k| {
        if k == n {
            1.0
        } else {
            (nodes[colloc[r]].0 - sources[k]).norm().ln() / TAU
        }
    });
    let b = DVector::from_iterator(colloc.len(), colloc.iter().map(|&k| rhs[k]));
    let ls = truncated_lstsq(&a, &b, SVD_CUTOFF);
    let x = ls.solution;
    log::trace!("reference: rank {} of {}, singular values {:.2e}..{:.2e}", ls.rank, n + 1, ls.sv_min, ls.sv_max);

    let mut sol = ReferenceSolution {
        source_points: sources,
        charges: x.rows(0, n).iter().copied().collect(),
        constant_term: x[n],
        boundary_residual: 0.0,
        data_sup,
        forcing: forcing.clone(),
    };
    sol.boundary_residual = nodes
        .iter()
        .map(|(y, g)| (sol.evaluate(*y) - g).abs())
        .fold(0.0, f64::max);
    let limit = REJECT_RATIO * data_sup.max(f64::MIN_POSITIVE);
    log::debug!(
        "reference: {} sources, residual {:.3e} (data sup {:.3e})",
        n,
        sol.boundary_residual,
        data_sup
    );
    if sol.boundary_residual > limit && sol.boundary_residual > 1e-14 {
        return Err(Error::ReferenceRejected {
            residual: sol.boundary_residual,
            limit,
        });
    }
    Ok(sol)
}

/// Probe grid for remainder measurements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub points_per_axis: usize,
    /// Excluded collar around each inclusion boundary, in units of `eps`.
    pub collar: f64,
    /// Points closer than this to an inclusion center are excluded.
    pub exclusion_radius: f64,
    /// Points closer than this to a point source of the forcing are excluded.
    pub source_radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            points_per_axis: 41,
            collar: 2.0,
            exclusion_radius: 0.0,
            source_radius: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderNorm {
    pub sup: f64,
    pub rms: f64,
    pub count: usize,
}

/// Grid points of the perforated domain kept by `grid`.
pub fn grid_points(e: &Expansion, forcing: &Forcing, grid: GridSpec) -> Vec<Complex64> {
    let domain = e.profiles().first().map(|p| p.w().domain().clone());
    let domain = match domain {
        Some(d) => d,
        None => return Vec::new(),
    };
    let boundary: Vec<Complex64> = (0..256).map(|j| domain.boundary_point(TAU * j as f64 / 256.0)).collect();
    let (mut lo, mut hi) = (boundary[0], boundary[0]);
    for b in &boundary {
        lo = Complex64::new(lo.re.min(b.re), lo.im.min(b.im));
        hi = Complex64::new(hi.re.max(b.re), hi.im.max(b.im));
    }
    let eps = e.eps();
    let inclusion_samples: Vec<Vec<Complex64>> = e
        .profiles()
        .iter()
        .map(|p| (0..128).map(|j| p.boundary_point(TAU * j as f64 / 128.0)).collect())
        .collect();
    let m = grid.points_per_axis.max(2);
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..m {
            let x = Complex64::new(
                lo.re + (hi.re - lo.re) * i as f64 / (m - 1) as f64,
                lo.im + (hi.im - lo.im) * j as f64 / (m - 1) as f64,
            );
            if !domain.contains(x) {
                continue;
            }
            let near_inclusion = e.profiles().iter().zip(&inclusion_samples).any(|(p, samples)| {
                (x - p.center()).norm() < grid.exclusion_radius
                    || winding_number(samples, x) != 0
                    || samples.iter().any(|s| (x - s).norm() < grid.collar * eps)
            });
            let near_source = forcing.sources().iter().any(|(s, _)| (x - s).norm() < grid.source_radius);
            if !near_inclusion && !near_source {
                out.push(x);
            }
        }
    }
    out
}

/// Sup and RMS of `u_ref - expansion` over the grid.
pub fn remainder_norm(sol: &ReferenceSolution, e: &Expansion, grid: GridSpec) -> Result<RemainderNorm> {
    remainder_norm_order(sol, e, e.order(), grid)
}

/// As [`remainder_norm`] with the expansion truncated to `order` iterations.
pub fn remainder_norm_order(sol: &ReferenceSolution, e: &Expansion, order: usize, grid: GridSpec) -> Result<RemainderNorm> {
    let points = grid_points(e, &sol.forcing, grid);
    let mut sup = 0.0f64;
    let mut sq = 0.0;
    for &x in &points {
        let d = sol.evaluate(x) - e.evaluate_order(x, order)?;
        sup = sup.max(d.abs());
        sq += d * d;
    }
    let count = points.len();
    let rms = if count > 0 { (sq / count as f64).sqrt() } else { 0.0 };
    Ok(RemainderNorm { sup, rms, count })
}

/// Writes `x,y,u_ref,u_exp,diff` rows for the grid.
pub fn write_probe_csv(
    out: &mut dyn Write,
    sol: &ReferenceSolution,
    e: &Expansion,
    grid: GridSpec,
) -> Result<()> {
    writeln!(out, "x,y,u_ref,u_exp,diff")?;
    for x in grid_points(e, &sol.forcing, grid) {
        let r = sol.evaluate(x);
        let v = e.evaluate(x)?;
        writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", x.re, x.im, r, v, r - v)?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`. `None` with fewer than two
/// usable points.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// `max / min - 1` of positive values.
pub fn variation(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{InteriorMap, ShapeSpec, DEFAULT_ORDER};
    use crate::expansion::{expand_single, Inclusion};
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scene(inclusions: Vec<Inclusion>, forcing: Forcing, eps: f64) -> Scene {
        Scene::new(Arc::new(InteriorMap::unit_disk()), inclusions, forcing, eps).unwrap()
    }

    fn disk_at(x: Complex64) -> Inclusion {
        Inclusion::fixed(ShapeSpec::unit_disk(), DEFAULT_ORDER, x).unwrap()
    }

    #[test]
    fn annulus_capacity_solution() {
        let eps = 0.05;
        let s = scene(vec![disk_at(c(0.0, 0.0))], Forcing::Zero, eps);
        let sol = solve_reference_with_data(&s, &|_| 0.0, &|_, _| 1.0, ReferenceOptions::default()).unwrap();
        for k in 0..40 {
            let r = eps + (1.0 - eps) * k as f64 / 39.0;
            for t in [0.0, 1.0, 2.5] {
                let x = Complex64::from_polar(r, t);
                assert!((sol.evaluate(x) - r.ln() / eps.ln()).abs() < 1e-8);
            }
        }
        let q = sol.inclusion_charge(0, 128, 96);
        assert!((q - TAU / eps.ln()).abs() < 1e-8);
    }

    #[test]
    fn constant_forcing_without_inclusion_effect() {
        // a tiny inclusion with matching data leaves 1 - |x|^2 unchanged
        let s = scene(vec![disk_at(c(0.5, 0.0))], Forcing::Constant(4.0), 0.01);
        let sol = solve_reference_with_data(&s, &|_| 0.0, &|_, x| 1.0 - x.norm_sqr(), ReferenceOptions::default()).unwrap();
        for x in [c(0.0, 0.0), c(-0.5, 0.3), c(0.2, -0.7)] {
            assert!((sol.evaluate(x) - (1.0 - x.norm_sqr())).abs() < 1e-8);
        }
    }

    #[test]
    fn refinement_is_stable() {
        let eps = 0.05;
        let s = scene(
            vec![disk_at(c(0.3, 0.0)), disk_at(c(-0.3, 0.0))],
            Forcing::PointSources(vec![(c(0.0, 0.5), 1.0)]),
            eps,
        );
        let coarse = solve_reference(&s).unwrap();
        let opts = ReferenceOptions::default().refined();
        let fine = solve_reference_with_data(&s, &|_| 0.0, &|_, _| 0.0, opts).unwrap();
        for k in 0..20 {
            let x = Complex64::from_polar(0.15 + 0.04 * k as f64, 0.7 * k as f64);
            assert!((coarse.evaluate(x) - fine.evaluate(x)).abs() <= 1e-7, "{x}");
        }
    }

    #[test]
    fn total_charge_tracks_capacity_law() {
        let mut gaps = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let s = scene(vec![disk_at(c(0.2, 0.1))], Forcing::Zero, eps);
            let sol = solve_reference_with_data(&s, &|_| 0.0, &|_, _| 1.0, ReferenceOptions::default()).unwrap();
            let q = sol.inclusion_charge(0, 128, 96);
            gaps.push((q * eps.ln() / TAU - 1.0).abs());
        }
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn ellipse_reference_is_accepted() {
        let inc = Inclusion::fixed(ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 4.0 / 3.0 }, DEFAULT_ORDER, c(0.3, 0.0)).unwrap();
        let s = scene(vec![inc], Forcing::PointSources(vec![(c(-0.5, 0.0), 1.0)]), 0.05);
        let sol = solve_reference(&s).unwrap();
        assert!(sol.boundary_residual <= 1e-7 * sol.data_sup);
    }

    #[test]
    fn injected_expansion_gives_zero_remainder() {
        let eps = 0.05;
        let s = scene(vec![disk_at(c(0.0, 0.0))], Forcing::Zero, eps);
        let e = expand_single(&s, 1).unwrap();
        let sol = solve_reference(&s).unwrap();
        let norm = remainder_norm(&sol, &e, GridSpec::default()).unwrap();
        assert!(norm.count > 100);
        assert!(norm.sup < 1e-12);
    }

    #[test]
    fn slope_and_variation() {
        let xs = [0.1, 0.05, 0.025];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_log_slope(&xs, &ys).unwrap() - 2.0).abs() < 1e-12);
        assert!(log_log_slope(&[1.0], &[1.0]).is_none());
        assert!((variation(&[1.0, 1.2, 1.1]) - 0.2).abs() < 1e-15);
    }
}
