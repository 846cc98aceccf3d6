//! Seeded invariant suite behind `perforated validate`.
//!
//! Every check draws its inputs from the seed, compares the library against
//! a closed form or an algebraic identity and passes when the measured error
//! is at most `tolerance * scale`. A tiny `scale` is the negative control.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conformal::{build_exterior_map, InteriorMap, ShapeSpec, DEFAULT_ORDER};
use crate::error::Result;
use crate::expansion::{
    assemble_interaction_matrix, clustered_leading_inverse, det_alpha_beta, expand_single, m_alpha_beta,
    solve_coefficients, three_scale_inverse, Forcing, Inclusion, Scene,
};
use crate::harmonic_ext::{solve_exterior, BoundaryFunction, BoundaryId, DEFAULT_SAMPLES};
use crate::harmonic_int::solve_interior;
use crate::profiles::build_profile;
use crate::reference::solve_reference;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    /// Measured error, or the failure message of the stage that broke.
    pub measured: std::result::Result<f64, String>,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub seed: u64,
    pub scale: f64,
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            match &c.measured {
                Ok(v) => writeln!(f, "{verdict}  {:<34} {v:.3e} (tol {:.1e})", c.name, c.tolerance)?,
                Err(e) => writeln!(f, "{verdict}  {:<34} error: {e}", c.name)?,
            }
        }
        let n = self.checks.iter().filter(|c| c.passed).count();
        write!(f, "seed {}: {n}/{} checks passed", self.seed, self.checks.len())
    }
}

type CheckFn = fn(&mut ChaCha8Rng) -> Result<f64>;

const CHECKS: &[(&str, f64, CheckFn)] = &[
    ("conformal.ellipse_boundary", 1e-12, ellipse_boundary),
    ("conformal.ellipse_round_trip", 1e-10, ellipse_round_trip),
    ("conformal.laurent_round_trip", 1e-8, laurent_round_trip),
    ("harmonic_ext.boundary_trace", 1e-10, exterior_trace),
    ("harmonic_ext.psi0_is_mean", 1e-12, exterior_psi0),
    ("harmonic_int.poisson_series", 1e-10, interior_series),
    ("harmonic_int.maximum_principle", 1e-12, interior_maximum),
    ("profiles.disk_closed_form", 1e-10, profile_closed_form),
    ("expansion.two_by_two_inverse", 1e-12, two_by_two),
    ("expansion.clustered_inverse", 1e-12, clustered_inverse),
    ("expansion.three_scale_inverse", 1e-12, three_scale),
    ("expansion.annulus_closed_form", 1e-8, annulus_expansion),
    ("reference.annulus_closed_form", 1e-8, annulus_reference),
];

/// Runs the suite with inputs drawn from `seed`; tolerances are multiplied by `scale`.
pub fn run_validate(seed: u64, scale: f64) -> ValidationReport {
    let checks = CHECKS
        .iter()
        .enumerate()
        .map(|(i, &(name, tol, check))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            let measured = check(&mut rng).map_err(|e| e.to_string());
            let tolerance = tol * scale;
            let passed = matches!(measured, Ok(v) if v <= tolerance);
            Check {
                name,
                measured,
                tolerance,
                passed,
            }
        })
        .collect();
    ValidationReport { seed, scale, checks }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_ellipse(rng: &mut ChaCha8Rng) -> ShapeSpec {
    ShapeSpec::Ellipse {
        a: rng.gen_range(0.5..2.0),
        b: rng.gen_range(0.5..2.0),
        c: 1.0,
    }
}

/// Trigonometric polynomial `a_0 + sum_k a_k cos k t + b_k sin k t` with random coefficients.
struct Trig {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl Trig {
    fn random(rng: &mut ChaCha8Rng, modes: usize) -> Self {
        let a = (0..=modes).map(|k| rng.gen_range(-1.0..1.0) / (1 + k) as f64).collect();
        let b = (0..=modes).map(|k| if k == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) / (1 + k) as f64 }).collect();
        Trig { a, b }
    }

    /// Value of the harmonic extension `sum_k rho^k (...)` at `rho e^{it}`.
    fn extension(&self, rho: f64, t: f64) -> f64 {
        (0..self.a.len())
            .map(|k| rho.powi(k as i32) * (self.a[k] * (k as f64 * t).cos() + self.b[k] * (k as f64 * t).sin()))
            .sum()
    }

    fn boundary(&self, boundary: BoundaryId) -> Result<BoundaryFunction> {
        BoundaryFunction::from_fn(DEFAULT_SAMPLES, boundary, |t| self.extension(1.0, t))
    }
}

fn ellipse_boundary(rng: &mut ChaCha8Rng) -> Result<f64> {
    let shape = random_ellipse(rng);
    let ShapeSpec::Ellipse { a, b, c: cc } = shape else { unreachable!() };
    let map = build_exterior_map(&shape, DEFAULT_ORDER)?;
    let mut err = 0.0f64;
    for _ in 0..64 {
        let z = map.boundary_point(rng.gen_range(0.0..TAU));
        err = err.max((((a * z.re).powi(2) + (b * z.im).powi(2)).sqrt() / cc - 1.0).abs());
    }
    Ok(err)
}

fn ellipse_round_trip(rng: &mut ChaCha8Rng) -> Result<f64> {
    let map = build_exterior_map(&random_ellipse(rng), DEFAULT_ORDER)?;
    let mut err = 0.0f64;
    for _ in 0..64 {
        let w = Complex64::from_polar(rng.gen_range(1.05..3.0), rng.gen_range(0.0..TAU));
        err = err.max((map.forward(map.inverse(w)?)? - w).norm());
    }
    Ok(err)
}

fn laurent_round_trip(rng: &mut ChaCha8Rng) -> Result<f64> {
    let mut small = || Complex64::from_polar(rng.gen_range(0.0..0.12), rng.gen_range(0.0..TAU));
    let (c1, c2) = (small(), small());
    let map = build_exterior_map(&ShapeSpec::Laurent(vec![c(1.0, 0.0), c(0.0, 0.0), c1, c2]), DEFAULT_ORDER)?;
    let mut err = 0.0f64;
    for _ in 0..64 {
        let w = Complex64::from_polar(rng.gen_range(1.2..3.0), rng.gen_range(0.0..TAU));
        err = err.max((map.forward(map.inverse(w)?)? - w).norm());
    }
    Ok(err)
}

fn exterior_trace(rng: &mut ChaCha8Rng) -> Result<f64> {
    let map = Arc::new(build_exterior_map(&random_ellipse(rng), DEFAULT_ORDER)?);
    let data = Trig::random(rng, 8);
    let field = solve_exterior(map, &data.boundary(BoundaryId::Inclusion(0))?);
    let mut err = 0.0f64;
    for _ in 0..64 {
        let t = rng.gen_range(0.0..TAU);
        // exterior extension of the same data: rho^{-k} on |zeta| = 1/rho
        let rho = rng.gen_range(0.3..1.0);
        let zeta = Complex64::from_polar(1.0 / rho, t);
        err = err.max((field.evaluate_mapped(zeta) - data.extension(rho, t)).abs());
    }
    Ok(err)
}

fn exterior_psi0(rng: &mut ChaCha8Rng) -> Result<f64> {
    let map = Arc::new(build_exterior_map(&random_ellipse(rng), DEFAULT_ORDER)?);
    let data = Trig::random(rng, 8);
    let field = solve_exterior(map, &data.boundary(BoundaryId::Inclusion(0))?);
    Ok((field.psi0() - data.a[0]).abs())
}

fn interior_series(rng: &mut ChaCha8Rng) -> Result<f64> {
    let data = Trig::random(rng, 8);
    let field = solve_interior(Arc::new(InteriorMap::unit_disk()), &data.boundary(BoundaryId::Outer)?);
    let mut err = 0.0f64;
    for _ in 0..64 {
        let (rho, t) = (rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU));
        err = err.max((field.evaluate(Complex64::from_polar(rho, t))? - data.extension(rho, t)).abs());
    }
    Ok(err)
}

fn interior_maximum(rng: &mut ChaCha8Rng) -> Result<f64> {
    let data = Trig::random(rng, 12);
    let phi = data.boundary(BoundaryId::Outer)?;
    let field = solve_interior(Arc::new(InteriorMap::unit_disk()), &phi);
    let mut excess = 0.0f64;
    for _ in 0..256 {
        let x = Complex64::from_polar(rng.gen_range(0.0..0.999), rng.gen_range(0.0..TAU));
        excess = excess.max(field.evaluate(x)?.abs() - phi.sup_norm());
    }
    Ok(excess.max(0.0))
}

/// `w = G[ln(|y - c| / r)] = ln|1 - conj(c) x| - ln r` in the unit disk.
fn profile_closed_form(rng: &mut ChaCha8Rng) -> Result<f64> {
    let r = rng.gen_range(0.5..2.0);
    let center = Complex64::from_polar(rng.gen_range(0.0..0.5), rng.gen_range(0.0..TAU));
    let map = Arc::new(build_exterior_map(&ShapeSpec::Disk { radius: r }, DEFAULT_ORDER)?);
    let p = build_profile(Arc::new(InteriorMap::unit_disk()), map, center, 0.05)?;
    let mut err = 0.0f64;
    for _ in 0..64 {
        let x = Complex64::from_polar(rng.gen_range(0.0..0.99), rng.gen_range(0.0..TAU));
        let exact = (1.0 - center.conj() * x).norm().ln() - r.ln();
        err = err.max((p.w().evaluate(x)? - exact).abs());
    }
    Ok(err)
}

fn two_disk_scene(rng: &mut ChaCha8Rng) -> Result<Scene> {
    let t = rng.gen_range(0.0..TAU);
    let d = rng.gen_range(0.3..0.5);
    let disk = |r: f64| ShapeSpec::Disk { radius: r };
    let inclusions = vec![
        Inclusion::fixed(disk(rng.gen_range(0.5..1.5)), DEFAULT_ORDER, Complex64::from_polar(d, t))?,
        Inclusion::fixed(disk(rng.gen_range(0.5..1.5)), DEFAULT_ORDER, Complex64::from_polar(-d, t))?,
    ];
    let forcing = Forcing::PointSources(vec![(Complex64::from_polar(0.5, t + PI / 2.0), 1.0)]);
    Scene::new(Arc::new(InteriorMap::unit_disk()), inclusions, forcing, rng.gen_range(0.01..0.05))
}

fn two_by_two(rng: &mut ChaCha8Rng) -> Result<f64> {
    let scene = two_disk_scene(rng)?;
    let mut m = assemble_interaction_matrix(&scene)?;
    let explicit = m.explicit_inverse_2x2().expect("2x2 system") * m.rhs();
    let a = solve_coefficients(&mut m)?;
    Ok((explicit - &a).amax() / a.amax())
}

fn clustered_inverse(rng: &mut ChaCha8Rng) -> Result<f64> {
    let n = rng.gen_range(2..6);
    let l = rng.gen_range(0.0..0.9);
    let lead = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else { l });
    Ok((clustered_leading_inverse(n, l) * lead - DMatrix::identity(n, n)).amax())
}

fn three_scale(rng: &mut ChaCha8Rng) -> Result<f64> {
    let alpha = rng.gen_range(0.05..0.95);
    let beta = rng.gen_range(0.01..=alpha);
    let m = m_alpha_beta(alpha, beta);
    let inv_err = (three_scale_inverse(alpha, beta)? * m - Matrix3::identity()).amax();
    Ok(inv_err.max((det_alpha_beta(alpha, beta) - m.determinant()).abs()))
}

/// `u = 1 - r^2 - (1 - eps^2) ln r / ln eps` on the annulus with `f = 4`.
fn annulus_exact(eps: f64, x: Complex64) -> f64 {
    let r = x.norm();
    1.0 - r * r - (1.0 - eps * eps) * r.ln() / eps.ln()
}

fn annulus(rng: &mut ChaCha8Rng) -> Result<Scene> {
    let inc = Inclusion::fixed(ShapeSpec::unit_disk(), DEFAULT_ORDER, c(0.0, 0.0))?;
    Scene::new(Arc::new(InteriorMap::unit_disk()), vec![inc], Forcing::Constant(4.0), rng.gen_range(0.01..0.1))
}

fn annulus_points(rng: &mut ChaCha8Rng, eps: f64) -> Vec<Complex64> {
    (0..64)
        .map(|_| Complex64::from_polar(rng.gen_range(1.5 * eps..0.99), rng.gen_range(0.0..TAU)))
        .collect()
}

fn annulus_expansion(rng: &mut ChaCha8Rng) -> Result<f64> {
    let scene = annulus(rng)?;
    let e = expand_single(&scene, 1)?;
    let mut err = 0.0f64;
    for x in annulus_points(rng, scene.eps) {
        err = err.max((e.evaluate(x)? - annulus_exact(scene.eps, x)).abs());
    }
    Ok(err)
}

fn annulus_reference(rng: &mut ChaCha8Rng) -> Result<f64> {
    let scene = annulus(rng)?;
    let sol = solve_reference(&scene)?;
    let mut err = 0.0f64;
    for x in annulus_points(rng, scene.eps) {
        err = err.max((sol.evaluate(x) - annulus_exact(scene.eps, x)).abs());
    }
    Ok(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_zero_passes_and_is_deterministic() {
        let a = run_validate(0, 1.0);
        assert!(a.passed(), "{a}");
        assert_eq!(a, run_validate(0, 1.0));
    }

    #[test]
    fn corrupted_tolerance_fails() {
        assert!(!run_validate(0, 1e-30).passed());
    }
}
