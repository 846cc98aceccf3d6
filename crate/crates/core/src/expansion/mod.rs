//! Asymptotic expansion of the perforated Dirichlet problem.
//!
//! One inclusion: the correction `u_eps - u_0` is built iteratively. Each
//! iteration takes boundary data `(phi, F)` on the outer boundary and on the
//! inclusion and returns
//!
//! ```text
//! G[phi] + (Psi - Psi0) + (G[phi](x_eps) - Psi0) / (w(x_eps) - ln eps) * (ell - w)
//! ```
//!
//! together with the residual traces divided by `eps`, which become the data
//! of the next iteration. Iteration `k` is scaled by `eps^k`; an expansion of
//! order `n` holds `n` iterations on top of `u_0`.
//!
//! Several inclusions: first order only, with corrector amplitudes `a` from
//! the interaction system `M a = Psi0`.

mod matrix;
mod scene;

use std::sync::Arc;

use num_complex::Complex64;

use crate::conformal::InteriorMap;
use crate::error::{Error, Result};
use crate::harmonic_ext::{solve_exterior, BoundaryFunction, BoundaryId, HarmonicExteriorField, DEFAULT_SAMPLES};
use crate::harmonic_int::{solve_interior, HarmonicInteriorField, CLOSURE_SLACK};
use crate::profiles::{build_profile_indexed, Profile};
use crate::spectral;

pub use matrix::{
    assemble_from_profiles, asymptotic_inverse, clustered_leading_inverse, det_alpha_beta, m0, m0_spectral_inverse,
    m_alpha_beta, mixed_leading_inverse, printed_p, solve_coefficients, three_scale_eigenbasis, three_scale_inverse,
    AsymptoticInverse, InteractionMatrix, Regime, MAX_CONDITION,
};
pub use scene::{u0_of, BackgroundSolution, Forcing, Inclusion, Scene};

/// Smallest accepted `w(x_eps) - ln eps` in an iteration.
pub const MIN_SCALE_GAP: f64 = 0.1;

/// One evaluable order of the expansion.
#[derive(Debug, Clone)]
pub struct Term {
    /// `eps^k`.
    pub scale: f64,
    pub interior: HarmonicInteriorField,
    /// `Psi_i`, evaluated without its constant `Psi0_i`.
    pub exterior: Vec<HarmonicExteriorField>,
    /// Weights of the correctors `ell_i - w_i`.
    pub weights: Vec<f64>,
}

/// Result of a single iteration.
#[derive(Debug, Clone)]
pub struct Iteration {
    pub interior: HarmonicInteriorField,
    pub exterior: HarmonicExteriorField,
    pub psi0: f64,
    pub weight: f64,
    /// Residual trace on the outer boundary, divided by `eps`.
    pub next_phi: BoundaryFunction,
    /// Residual trace on the inclusion, divided by `eps`.
    pub next_f: BoundaryFunction,
    /// `sup |r| / (|F| + |phi|)`.
    pub constant: f64,
}

/// Sup of `target - expansion` on each boundary component.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub outer: f64,
    pub inclusions: Vec<f64>,
}

impl ResidualReport {
    pub fn max(&self) -> f64 {
        self.inclusions.iter().fold(self.outer, |a, &b| a.max(b))
    }

    pub fn inner_max(&self) -> f64 {
        self.inclusions.iter().fold(0.0, |a: f64, &b| a.max(b))
    }
}

/// Per-iteration bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStats {
    pub psi0: f64,
    pub weight: f64,
    pub input_sup: f64,
    pub residual_sup: f64,
    pub constant: f64,
}

#[derive(Debug, Clone)]
pub struct Expansion {
    eps: f64,
    domain: Arc<InteriorMap>,
    profiles: Vec<Profile>,
    background: BackgroundSolution,
    terms: Vec<Term>,
    stats: Vec<IterationStats>,
    matrix: Option<InteractionMatrix>,
    outer_target: BoundaryFunction,
    inner_targets: Vec<BoundaryFunction>,
}

/// One iteration for boundary data `phi` on the outer boundary and `f` on the
/// inclusion of `profile`.
pub fn one_iteration(profile: &Profile, phi: &BoundaryFunction, f: &BoundaryFunction) -> Result<Iteration> {
    let eps = profile.eps();
    let gap = profile.w_center() - eps.ln();
    if gap.abs() <= MIN_SCALE_GAP {
        return Err(Error::ScaleDegeneracy(eps));
    }
    let domain = profile.w().domain().clone();
    let interior = solve_interior(domain.clone(), phi);
    let exterior = solve_exterior(profile.map().clone(), f);
    let psi0 = exterior.psi0();
    let weight = (interior.evaluate(profile.center())? - psi0) / gap;

    let m_out = phi.len();
    let mut outer = Vec::with_capacity(m_out);
    for j in 0..m_out {
        let y = domain.boundary_point(phi.angle(j));
        let zeta = profile.map().forward((y - profile.center()) / eps)?;
        let w = profile.w().evaluate_on_closure(y)?;
        let ell = eps.ln() + zeta.norm().ln();
        let v = interior.evaluate_on_closure(y)? + exterior.tail_mapped(zeta) + weight * (ell - w);
        outer.push((phi.samples()[j] - v) / eps);
    }
    let m_in = f.len();
    let mut inner = Vec::with_capacity(m_in);
    for j in 0..m_in {
        let theta = f.angle(j);
        let x = profile.boundary_point(theta);
        let w = profile.w().evaluate(x)?;
        let v = interior.evaluate(x)? + exterior.tail_mapped(Complex64::from_polar(1.0, theta)) + weight * (eps.ln() - w);
        inner.push((f.samples()[j] - v) / eps);
    }
    let next_phi = BoundaryFunction::from_samples(outer, BoundaryId::Outer)?;
    let next_f = BoundaryFunction::from_samples(inner, f.boundary())?;
    let input = f.sup_norm() + phi.sup_norm();
    let residual = next_phi.sup_norm().max(next_f.sup_norm());
    let constant = if input > 0.0 { residual / input } else { 0.0 };
    Ok(Iteration {
        interior,
        exterior,
        psi0,
        weight,
        next_phi,
        next_f,
        constant,
    })
}

fn single_profile(scene: &Scene) -> Result<Profile> {
    if scene.inclusions.len() != 1 {
        return Err(Error::invalid(format!(
            "single-inclusion expansion needs exactly one inclusion, got {}",
            scene.inclusions.len()
        )));
    }
    let inc = &scene.inclusions[0];
    build_profile_indexed(scene.domain.clone(), inc.map.clone(), inc.center(scene.eps), scene.eps, 0)
}

fn trace_on_inclusion(profile: &Profile, m: usize, f: impl Fn(Complex64) -> Result<f64>) -> Result<BoundaryFunction> {
    let samples = (0..m)
        .map(|j| f(profile.boundary_point(spectral::angle(j, m))))
        .collect::<Result<Vec<_>>>()?;
    BoundaryFunction::from_samples(samples, BoundaryId::Inclusion(profile.inclusion_index()))
}

/// Expansion of `u_eps` for a single inclusion with `order` iterations.
pub fn expand_single(scene: &Scene, order: usize) -> Result<Expansion> {
    let profile = single_profile(scene)?;
    let background = u0_of(scene)?;
    let phi = BoundaryFunction::zeros(DEFAULT_SAMPLES, BoundaryId::Outer)?;
    let f = trace_on_inclusion(&profile, DEFAULT_SAMPLES, |x| Ok(-background.evaluate(x)?))?;
    expand_with_profile(scene, profile, background, phi, f, order)
}

/// Expansion of the harmonic function with boundary values `phi` on the
/// outer boundary and `f` on the inclusion (plus the forcing of the scene).
pub fn expand_single_with_data(scene: &Scene, phi: BoundaryFunction, f: BoundaryFunction, order: usize) -> Result<Expansion> {
    let profile = single_profile(scene)?;
    let background = u0_of(scene)?;
    let u0_trace = trace_on_inclusion(&profile, f.len(), |x| background.evaluate(x))?;
    let f = BoundaryFunction::combine(1.0, &f, -1.0, &u0_trace)?;
    expand_with_profile(scene, profile, background, phi, f, order)
}

fn expand_with_profile(
    scene: &Scene,
    profile: Profile,
    background: BackgroundSolution,
    phi0: BoundaryFunction,
    f0: BoundaryFunction,
    order: usize,
) -> Result<Expansion> {
    let eps = scene.eps;
    let outer_target = phi0.clone();
    let u0_trace = trace_on_inclusion(&profile, f0.len(), |x| background.evaluate(x))?;
    let inner_target = BoundaryFunction::combine(1.0, &f0, 1.0, &u0_trace)?;
    let mut terms = Vec::with_capacity(order);
    let mut stats = Vec::with_capacity(order);
    let (mut phi, mut f) = (phi0, f0);
    let mut scale = 1.0;
    for k in 0..order {
        let it = one_iteration(&profile, &phi, &f)?;
        log::debug!(
            "iteration {k}: psi0 = {:.6e}, weight = {:.6e}, C = {:.4}",
            it.psi0,
            it.weight,
            it.constant
        );
        stats.push(IterationStats {
            psi0: it.psi0,
            weight: it.weight,
            input_sup: f.sup_norm() + phi.sup_norm(),
            residual_sup: it.next_phi.sup_norm().max(it.next_f.sup_norm()),
            constant: it.constant,
        });
        terms.push(Term {
            scale,
            interior: it.interior,
            exterior: vec![it.exterior],
            weights: vec![it.weight],
        });
        phi = it.next_phi;
        f = it.next_f;
        scale *= eps;
    }
    Ok(Expansion {
        eps,
        domain: scene.domain.clone(),
        profiles: vec![profile],
        background,
        terms,
        stats,
        matrix: None,
        outer_target,
        inner_targets: vec![inner_target],
    })
}

/// Builds the profiles of every inclusion and the interaction system with
/// right-hand side `Psi0_i` of `F_i = -u_0` on each inclusion.
pub fn assemble_interaction_matrix(scene: &Scene) -> Result<InteractionMatrix> {
    Ok(multi_parts(scene)?.3)
}

type MultiParts = (Vec<Profile>, BackgroundSolution, Vec<HarmonicExteriorField>, InteractionMatrix);

fn multi_parts(scene: &Scene) -> Result<MultiParts> {
    if scene.inclusions.is_empty() {
        return Err(Error::invalid("scene has no inclusions"));
    }
    let profiles = scene
        .inclusions
        .iter()
        .enumerate()
        .map(|(i, inc)| build_profile_indexed(scene.domain.clone(), inc.map.clone(), inc.center(scene.eps), scene.eps, i))
        .collect::<Result<Vec<_>>>()?;
    let background = u0_of(scene)?;
    let fields = profiles
        .iter()
        .map(|p| {
            let f = trace_on_inclusion(p, DEFAULT_SAMPLES, |x| Ok(-background.evaluate(x)?))?;
            Ok(solve_exterior(p.map().clone(), &f))
        })
        .collect::<Result<Vec<_>>>()?;
    let rhs: Vec<f64> = fields.iter().map(|f| f.psi0()).collect();
    let matrix = assemble_from_profiles(&profiles, &rhs, scene.pairwise_exponents())?;
    Ok((profiles, background, fields, matrix))
}

/// First-order expansion for several inclusions. A single inclusion is
/// delegated to [`expand_single`] with one iteration.
pub fn expand_multi(scene: &Scene) -> Result<Expansion> {
    if scene.inclusions.len() == 1 {
        return expand_single(scene, 1);
    }
    let (profiles, background, fields, mut matrix) = multi_parts(scene)?;
    let a = solve_coefficients(&mut matrix)?;
    let outer_target = BoundaryFunction::zeros(DEFAULT_SAMPLES, BoundaryId::Outer)?;
    let inner_targets = profiles
        .iter()
        .map(|p| BoundaryFunction::zeros(DEFAULT_SAMPLES, BoundaryId::Inclusion(p.inclusion_index())))
        .collect::<Result<Vec<_>>>()?;
    let term = Term {
        scale: 1.0,
        interior: HarmonicInteriorField::zero(scene.domain.clone()),
        exterior: fields,
        weights: a.iter().cloned().collect(),
    };
    let stats = vec![IterationStats {
        psi0: matrix.rhs().amax(),
        weight: a.amax(),
        input_sup: 0.0,
        residual_sup: 0.0,
        constant: 0.0,
    }];
    Ok(Expansion {
        eps: scene.eps,
        domain: scene.domain.clone(),
        profiles,
        background,
        terms: vec![term],
        stats,
        matrix: Some(matrix),
        outer_target,
        inner_targets,
    })
}

/// Sum of all stored terms at `x`.
pub fn evaluate_expansion(e: &Expansion, x: Complex64) -> Result<f64> {
    e.evaluate(x)
}

/// Sup of `target - expansion` on 256 samples of each boundary component.
pub fn boundary_residual(e: &Expansion) -> Result<ResidualReport> {
    e.boundary_residual(e.order())
}

impl Expansion {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Number of iterations held.
    pub fn order(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn profiles(&self) -> &[Profile] {
        &self.profiles
    }

    pub fn background(&self) -> &BackgroundSolution {
        &self.background
    }

    pub fn stats(&self) -> &[IterationStats] {
        &self.stats
    }

    pub fn matrix(&self) -> Option<&InteractionMatrix> {
        self.matrix.as_ref()
    }

    /// `Psi0` of every iteration and inclusion.
    pub fn psi0s(&self) -> Vec<Vec<f64>> {
        self.terms.iter().map(|t| t.exterior.iter().map(|f| f.psi0()).collect()).collect()
    }

    /// Corrector amplitudes of the first iteration (`a_i` for several inclusions).
    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.first().map(|t| t.weights.clone()).unwrap_or_default()
    }

    /// Estimate of the one-iteration constant `C` in
    /// `sup |r| <= C (|F| + |phi|)`: the largest ratio over the iterations
    /// performed. Zero for multi-inclusion expansions.
    pub fn residual_constant(&self) -> f64 {
        self.stats.iter().map(|s| s.constant).fold(0.0, f64::max)
    }

    /// `h_eps` per inclusion.
    pub fn h_eps(&self) -> Vec<f64> {
        self.profiles.iter().map(|p| p.h_eps()).collect()
    }

    pub fn evaluate(&self, x: Complex64) -> Result<f64> {
        self.evaluate_order(x, self.order())
    }

    /// Value of the expansion truncated to its first `order` iterations.
    pub fn evaluate_order(&self, x: Complex64, order: usize) -> Result<f64> {
        let zeta0 = self.domain.forward(x);
        if zeta0.norm() >= 1.0 + CLOSURE_SLACK {
            return Err(Error::domain(format!("{x} is outside the outer domain")));
        }
        let mut cache = Vec::with_capacity(self.profiles.len());
        for p in &self.profiles {
            let zeta = p.map().forward((x - p.center()) / self.eps)?;
            let corrector = self.eps.ln() + zeta.norm().ln() - p.w().evaluate_mapped(zeta0);
            cache.push((zeta, corrector));
        }
        let mut total = self.background.evaluate(x)?;
        for term in self.terms.iter().take(order) {
            let mut v = term.interior.evaluate_mapped(zeta0);
            for (i, (zeta, corrector)) in cache.iter().enumerate() {
                v += term.exterior[i].tail_mapped(*zeta) + term.weights[i] * corrector;
            }
            total += term.scale * v;
        }
        Ok(total)
    }

    /// Boundary residual of the expansion truncated to `order` iterations.
    pub fn boundary_residual(&self, order: usize) -> Result<ResidualReport> {
        let m = self.outer_target.len();
        let mut outer = 0.0f64;
        for j in 0..m {
            let y = self.domain.boundary_point(spectral::angle(j, m));
            outer = outer.max((self.outer_target.samples()[j] - self.evaluate_order(y, order)?).abs());
        }
        let mut inclusions = Vec::with_capacity(self.profiles.len());
        for (p, target) in self.profiles.iter().zip(&self.inner_targets) {
            let m = target.len();
            let mut sup = 0.0f64;
            for j in 0..m {
                let x = p.boundary_point(spectral::angle(j, m));
                sup = sup.max((target.samples()[j] - self.evaluate_order(x, order)?).abs());
            }
            inclusions.push(sup);
        }
        Ok(ResidualReport { outer, inclusions })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{ExteriorMap, ShapeSpec};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn disk() -> Arc<InteriorMap> {
        Arc::new(InteriorMap::unit_disk())
    }

    fn scene(shape: ShapeSpec, center: Complex64, forcing: Forcing, eps: f64) -> Scene {
        Scene::new(disk(), vec![Inclusion::fixed(shape, 32, center).unwrap()], forcing, eps).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_expansion() {
        let s = scene(ShapeSpec::unit_disk(), c(0.0, 0.0), Forcing::Zero, 0.1);
        let e = expand_single(&s, 2).unwrap();
        assert_eq!(e.evaluate(c(0.5, 0.2)).unwrap(), 0.0);
        assert_eq!(boundary_residual(&e).unwrap().max(), 0.0);
        let e0 = expand_single(&s, 0).unwrap();
        assert_eq!(e0.order(), 0);
    }

    #[test]
    fn annulus_capacity_data_is_exact_after_one_iteration() {
        let eps = 0.05;
        let s = scene(ShapeSpec::unit_disk(), c(0.0, 0.0), Forcing::Zero, eps);
        let phi = BoundaryFunction::zeros(256, BoundaryId::Outer).unwrap();
        let f = BoundaryFunction::from_fn(256, BoundaryId::Inclusion(0), |_| 1.0).unwrap();
        let e = expand_single_with_data(&s, phi, f, 1).unwrap();
        assert!((e.coefficients()[0] - 1.0 / eps.ln()).abs() < 1e-14);
        for r in [0.06, 0.2, 0.5, 0.9] {
            let x = Complex64::from_polar(r, 0.3);
            assert!((e.evaluate(x).unwrap() - r.ln() / eps.ln()).abs() < 1e-12);
        }
        assert!(boundary_residual(&e).unwrap().max() < 1e-12);
    }

    #[test]
    fn iteration_residual_closes_the_boundary_identity() {
        let s = scene(
            ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 2.0 },
            c(0.3, 0.0),
            Forcing::PointSources(vec![(c(-0.5, 0.0), 1.0)]),
            0.05,
        );
        let e = expand_single(&s, 3).unwrap();
        let mut prev = f64::INFINITY;
        for n in 0..=3 {
            let r = e.boundary_residual(n).unwrap().max();
            if n > 0 {
                // eps^n times the recorded residual sup of the last iteration
                let recorded = 0.05f64.powi(n as i32) * e.stats()[n - 1].residual_sup;
                assert!((r - recorded).abs() <= 1e-9 + 1e-6 * recorded, "{n}: {r} vs {recorded}");
            }
            assert!(r < prev);
            prev = r;
        }
    }

    #[test]
    fn single_and_multi_paths_agree_for_one_inclusion() {
        let s = scene(
            ShapeSpec::unit_disk(),
            c(0.3, 0.0),
            Forcing::PointSources(vec![(c(-0.5, 0.0), 1.0)]),
            0.05,
        );
        let single = expand_single(&s, 1).unwrap();
        let (profiles, _, fields, mut m) = multi_parts(&s).unwrap();
        let a = solve_coefficients(&mut m).unwrap();
        assert_eq!(profiles.len(), 1);
        assert!((a[0] - fields[0].psi0() / (0.05f64.ln() - profiles[0].w_center())).abs() < 1e-15);
        assert!((a[0] - single.coefficients()[0]).abs() < 1e-14);
        let multi = expand_multi(&s).unwrap();
        let x = c(-0.2, 0.4);
        assert!((multi.evaluate(x).unwrap() - single.evaluate(x).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn far_forcing_weight_tends_to_u0() {
        // weight -> u0(x_eps)/(w(x_eps) - ln eps) with a relative gap O(eps ln eps)
        let s0 = scene(
            ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 2.0 },
            c(0.3, 0.0),
            Forcing::PointSources(vec![(c(-0.5, 0.0), 1.0)]),
            0.1,
        );
        let mut ratios = Vec::new();
        for eps in [0.1, 0.05, 0.025, 0.0125] {
            let s = s0.at_eps(eps).unwrap();
            let e = expand_single(&s, 1).unwrap();
            let u0 = e.background().evaluate(c(0.3, 0.0)).unwrap();
            let target = u0 * e.h_eps()[0];
            ratios.push(((e.coefficients()[0] - target) / target).abs() / (eps * eps.ln().abs()));
        }
        assert!(ratios.iter().all(|r| *r < 2.0 * ratios[0] + 1e-12), "{ratios:?}");
    }

    #[test]
    fn symmetric_pair_has_equal_coefficients() {
        let inc = |x: f64| Inclusion::fixed(ShapeSpec::unit_disk(), 8, c(x, 0.0)).unwrap();
        let s = Scene::new(
            disk(),
            vec![inc(-0.5), inc(0.5)],
            Forcing::PointSources(vec![(c(0.0, 0.3), 1.0)]),
            0.05,
        )
        .unwrap();
        let e = expand_multi(&s).unwrap();
        let a = e.coefficients();
        assert!((a[0] - a[1]).abs() < 1e-12);
        for x in [c(0.2, 0.1), c(-0.7, -0.3), c(0.1, 0.6)] {
            let mirror = c(-x.re, x.im);
            assert!((e.evaluate(x).unwrap() - e.evaluate(mirror).unwrap()).abs() < 1e-10);
        }
        let m = e.matrix().unwrap();
        let hand = 0.05f64.ln() - (1.0 - 0.25f64).ln();
        assert!((m.entries()[(0, 0)] - hand).abs() < 1e-12);
        // off-diagonal: ln|x1 - x2| - G[ln|. - x2|](x1) with ln|y - p| = ln|1 - conj(p) y| on the circle
        let off = 1f64.ln() - (1.0 + 0.25f64).ln();
        assert!((m.entries()[(0, 1)] - off).abs() < 1e-12);
    }

    #[test]
    fn multi_residual_scales_with_eps() {
        let shape = ShapeSpec::Ellipse { a: 1.0, b: 2.0, c: 2.0 };
        let map = Arc::new(ExteriorMap::ellipse(1.0, 2.0, 2.0, 32));
        let inc = |x: f64| Inclusion::with_map(shape.clone(), map.clone(), c(x, 0.0), c(0.0, 0.0), 0.0).unwrap();
        let s = Scene::new(
            disk(),
            vec![inc(-0.5), inc(0.5)],
            Forcing::PointSources(vec![(c(0.0, -0.4), 2.0 * PI)]),
            0.1,
        )
        .unwrap();
        let mut res = Vec::new();
        for eps in [0.1, 0.05, 0.025] {
            let e = expand_multi(&s.at_eps(eps).unwrap()).unwrap();
            let a = e.coefficients().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            res.push(boundary_residual(&e).unwrap().max() / (eps * (1.0 + a)));
        }
        assert!(res.iter().all(|r| *r <= 1.5 * res[0]), "{res:?}");
    }
}
