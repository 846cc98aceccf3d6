//! Interior harmonic extension `G[phi]` on the outer domain, computed by the
//! Fourier-Poisson series in mapped coordinates `zeta = T0(x)`.

use std::sync::Arc;

use nalgebra::Vector2;
use num_complex::Complex64;

use crate::conformal::InteriorMap;
use crate::error::{Error, Result};
use crate::harmonic_ext::BoundaryFunction;
use crate::spectral::{horner, horner_derivative};

/// Points with `|T0(x)|` up to `1 + CLOSURE_SLACK` count as on the boundary.
pub(crate) const CLOSURE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct HarmonicInteriorField {
    /// `h_0 = phi_0`, `h_k = 2 phi_k`: `field = Re sum_k h_k zeta^k`.
    coeffs: Vec<Complex64>,
    fourier: Vec<Complex64>,
    domain: Arc<InteriorMap>,
    sup_norm: f64,
}

/// Harmonic function in the outer domain with boundary values `phi`, sampled
/// at `T0^{-1}(e^{i theta_j})`.
pub fn solve_interior(domain: Arc<InteriorMap>, phi: &BoundaryFunction) -> HarmonicInteriorField {
    HarmonicInteriorField {
        coeffs: phi.analytic_coefficients(),
        fourier: phi.fourier().to_vec(),
        domain,
        sup_norm: phi.sup_norm(),
    }
}

/// Value at a point strictly inside the outer domain.
pub fn evaluate_interior(field: &HarmonicInteriorField, x: Complex64) -> Result<f64> {
    field.evaluate(x)
}

/// Gradient at a point strictly inside the outer domain.
pub fn evaluate_gradient(field: &HarmonicInteriorField, x: Complex64) -> Result<Vector2<f64>> {
    field.gradient(x)
}

impl HarmonicInteriorField {
    pub fn zero(domain: Arc<InteriorMap>) -> Self {
        HarmonicInteriorField {
            coeffs: vec![Complex64::new(0.0, 0.0)],
            fourier: vec![Complex64::new(0.0, 0.0)],
            domain,
            sup_norm: 0.0,
        }
    }

    pub fn fourier(&self) -> &[Complex64] {
        &self.fourier
    }

    pub fn domain(&self) -> &Arc<InteriorMap> {
        &self.domain
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    fn mapped(&self, x: Complex64, slack: f64) -> Result<Complex64> {
        let zeta = self.domain.forward(x);
        if zeta.norm() >= 1.0 + slack {
            return Err(Error::domain(format!("{x} is outside the outer domain")));
        }
        Ok(zeta)
    }

    /// Value at mapped coordinate `zeta`, `|zeta| <= 1`.
    pub fn evaluate_mapped(&self, zeta: Complex64) -> f64 {
        horner(&self.coeffs, zeta).re
    }

    pub fn evaluate(&self, x: Complex64) -> Result<f64> {
        Ok(self.evaluate_mapped(self.mapped(x, 0.0)?))
    }

    /// Like [`evaluate`](Self::evaluate) but accepts points of the boundary.
    pub fn evaluate_on_closure(&self, x: Complex64) -> Result<f64> {
        Ok(self.evaluate_mapped(self.mapped(x, CLOSURE_SLACK)?))
    }

    pub fn gradient(&self, x: Complex64) -> Result<Vector2<f64>> {
        let zeta = self.mapped(x, 0.0)?;
        let d = horner_derivative(&self.coeffs, zeta) * self.domain.derivative(x);
        Ok(Vector2::new(d.re, -d.im))
    }
}
