use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::conformal::{build_exterior_map, ExteriorMap, InteriorMap, ShapeSpec};
use crate::error::{Error, Result};
use crate::harmonic_ext::{BoundaryFunction, BoundaryId, DEFAULT_SAMPLES};
use crate::harmonic_int::{solve_interior, HarmonicInteriorField};
use crate::spectral;

use super::matrix::Regime;

/// Right-hand side `f` of `-Lap u = f`, restricted to forcings with a
/// closed-form particular solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Forcing {
    Zero,
    /// `f = f0`, particular solution `-f0 |x|^2 / 4`.
    Constant(f64),
    /// Point charges `(s_j, q_j)`, particular solution `sum_j q_j ln|x - s_j| / 2 pi`.
    PointSources(Vec<(Complex64, f64)>),
}

impl Forcing {
    /// Particular solution `u_p` with `-Lap u_p = f`.
    pub fn particular(&self, x: Complex64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Constant(f0) => -f0 * x.norm_sqr() / 4.0,
            Forcing::PointSources(sources) => sources
                .iter()
                .map(|(s, q)| q * (x - s).norm().ln() / (2.0 * PI))
                .sum(),
        }
    }

    pub fn sources(&self) -> &[(Complex64, f64)] {
        match self {
            Forcing::PointSources(s) => s,
            _ => &[],
        }
    }
}

/// `u_0 = u_p + G[-u_p]`, the solution without inclusions.
#[derive(Debug, Clone)]
pub struct BackgroundSolution {
    forcing: Forcing,
    lift: HarmonicInteriorField,
}

impl BackgroundSolution {
    pub fn new(domain: Arc<InteriorMap>, forcing: &Forcing) -> Result<Self> {
        let lift = match forcing {
            Forcing::Zero => HarmonicInteriorField::zero(domain),
            _ => {
                let data = BoundaryFunction::from_fn(DEFAULT_SAMPLES, BoundaryId::Outer, |t| {
                    -forcing.particular(domain.boundary_point(t))
                })?;
                solve_interior(domain, &data)
            }
        };
        Ok(BackgroundSolution {
            forcing: forcing.clone(),
            lift,
        })
    }

    pub fn evaluate(&self, x: Complex64) -> Result<f64> {
        if matches!(self.forcing, Forcing::Zero) {
            return Ok(0.0);
        }
        Ok(self.forcing.particular(x) + self.lift.evaluate_on_closure(x)?)
    }
}

/// Evaluable `u_0` of a scene.
pub fn u0_of(scene: &Scene) -> Result<BackgroundSolution> {
    BackgroundSolution::new(scene.domain.clone(), &scene.forcing)
}

#[derive(Debug, Clone)]
pub struct Inclusion {
    pub shape: ShapeSpec,
    pub map: Arc<ExteriorMap>,
    /// `x_0`.
    pub base_center: Complex64,
    /// `u`.
    pub offset: Complex64,
    /// `alpha` in `x_eps = x_0 + eps^alpha u`.
    pub exponent: f64,
}

impl Inclusion {
    pub fn new(shape: ShapeSpec, order: usize, base_center: Complex64, offset: Complex64, exponent: f64) -> Result<Self> {
        let map = Arc::new(build_exterior_map(&shape, order)?);
        Self::with_map(shape, map, base_center, offset, exponent)
    }

    pub fn with_map(
        shape: ShapeSpec,
        map: Arc<ExteriorMap>,
        base_center: Complex64,
        offset: Complex64,
        exponent: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&exponent) {
            return Err(Error::invalid(format!("exponent must lie in [0, 1), got {exponent}")));
        }
        Ok(Inclusion {
            shape,
            map,
            base_center,
            offset,
            exponent,
        })
    }

    /// Fixed-centre inclusion.
    pub fn fixed(shape: ShapeSpec, order: usize, center: Complex64) -> Result<Self> {
        Self::new(shape, order, center, Complex64::new(0.0, 0.0), 0.0)
    }

    /// `x_eps = x_0 + eps^alpha u`.
    pub fn center(&self, eps: f64) -> Complex64 {
        self.base_center + self.offset * eps.powf(self.exponent)
    }

    pub(crate) fn boundary(&self, eps: f64, m: usize) -> Vec<Complex64> {
        let c = self.center(eps);
        (0..m).map(|j| c + self.map.boundary_point(spectral::angle(j, m)) * eps).collect()
    }

    fn contains(&self, eps: f64, x: Complex64) -> bool {
        self.map
            .forward((x - self.center(eps)) / eps)
            .map_or(true, |w| w.norm() <= 1.0)
    }
}

/// Perforated domain, forcing and the working `eps`.
#[derive(Debug, Clone)]
pub struct Scene {
    pub domain: Arc<InteriorMap>,
    pub inclusions: Vec<Inclusion>,
    pub forcing: Forcing,
    pub eps: f64,
}

const GEOMETRY_SAMPLES: usize = 128;

impl Scene {
    pub fn new(domain: Arc<InteriorMap>, inclusions: Vec<Inclusion>, forcing: Forcing, eps: f64) -> Result<Self> {
        let scene = Scene {
            domain,
            inclusions,
            forcing,
            eps,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Same geometry at another `eps`, validated.
    pub fn at_eps(&self, eps: f64) -> Result<Self> {
        Scene::new(self.domain.clone(), self.inclusions.clone(), self.forcing.clone(), eps)
    }

    pub fn centers(&self) -> Vec<Complex64> {
        self.inclusions.iter().map(|i| i.center(self.eps)).collect()
    }

    /// Checks positivity of `eps`, containment, disjointness and the
    /// placement of point sources.
    pub fn validate(&self) -> Result<()> {
        let eps = self.eps;
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
        }
        let centers = self.centers();
        let boundaries: Vec<Vec<Complex64>> = self.inclusions.iter().map(|i| i.boundary(eps, GEOMETRY_SAMPLES)).collect();
        for (i, b) in boundaries.iter().enumerate() {
            if !b.iter().all(|&p| self.domain.contains(p)) {
                return Err(Error::Geometry(format!("inclusion {i} is not strictly inside the domain at eps = {eps}")));
            }
        }
        for i in 0..centers.len() {
            for j in (i + 1)..centers.len() {
                if (centers[i] - centers[j]).norm() == 0.0 {
                    return Err(Error::Geometry(format!("inclusions {i} and {j} share a centre at eps = {eps}")));
                }
                let overlap = boundaries[i].iter().any(|&p| self.inclusions[j].contains(eps, p))
                    || boundaries[j].iter().any(|&p| self.inclusions[i].contains(eps, p));
                if overlap {
                    return Err(Error::Geometry(format!("inclusions {i} and {j} overlap at eps = {eps}")));
                }
            }
        }
        for (s, _) in self.forcing.sources() {
            if !self.domain.contains(*s) {
                log::debug!("point source {s} lies outside the domain");
            }
            for (i, b) in boundaries.iter().enumerate() {
                let dist = b.iter().map(|p| (p - s).norm()).fold(f64::INFINITY, f64::min);
                if self.inclusions[i].contains(eps, *s) || dist < 2.0 * eps {
                    return Err(Error::Geometry(format!(
                        "point source {s} is within 2 eps of inclusion {i} at eps = {eps}"
                    )));
                }
            }
        }
        let ratio = self.separation_ratio();
        if ratio < 10.0 {
            log::warn!("inclusions are only {ratio:.2} eps apart at eps = {eps}");
        }
        Ok(())
    }

    /// `min_{i != j} |x_i - x_j| / eps` (infinite for a single inclusion).
    pub fn separation_ratio(&self) -> f64 {
        let c = self.centers();
        let mut best = f64::INFINITY;
        for i in 0..c.len() {
            for j in (i + 1)..c.len() {
                best = best.min((c[i] - c[j]).norm());
            }
        }
        best / self.eps
    }

    /// `e_ij`: zero for inclusions with different base centres, otherwise
    /// the smaller of the two exponents; unit diagonal.
    pub fn pairwise_exponents(&self) -> DMatrix<f64> {
        let n = self.inclusions.len();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                1.0
            } else {
                let (a, b) = (&self.inclusions[i], &self.inclusions[j]);
                if (a.base_center - b.base_center).norm() > 1e-12 {
                    0.0
                } else {
                    a.exponent.min(b.exponent)
                }
            }
        })
    }

    pub fn regime(&self) -> Regime {
        Regime::classify(&self.pairwise_exponents())
    }
}
