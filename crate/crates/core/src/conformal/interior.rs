use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{self, horner, horner_derivative, series_mul};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InteriorKind {
    IdentityDisk,
    Series,
}

/// Biholomorphism `T0` from the outer domain onto the unit disk.
///
/// `coeffs` are the Taylor coefficients of `T0` in powers of `x - center`,
/// where `center = T0^{-1}(0)`; `inv_coeffs` are the Taylor coefficients of
/// `T0^{-1}` in powers of `zeta` (so `inv_coeffs[0] == center`).
#[derive(Debug, Clone)]
pub struct InteriorMap {
    kind: InteriorKind,
    coeffs: Vec<Complex64>,
    inv_coeffs: Vec<Complex64>,
}

const CHECK_SAMPLES: usize = 128;

impl InteriorMap {
    pub fn unit_disk() -> Self {
        InteriorMap {
            kind: InteriorKind::IdentityDisk,
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            inv_coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// User-supplied forward and inverse Taylor series. The pair must map the
    /// boundary onto the unit circle to `1e-8` at 128 samples.
    pub fn from_series(coeffs: Vec<Complex64>, inv_coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() < 2 || inv_coeffs.len() < 2 {
            return Err(Error::invalid("interior map series need at least two coefficients"));
        }
        let map = InteriorMap {
            kind: InteriorKind::Series,
            coeffs,
            inv_coeffs,
        };
        map.check()?;
        Ok(map)
    }

    /// Builds the forward series by reverting the inverse series
    /// `x = sum_k b_k zeta^k` to `order` terms.
    pub fn from_inverse_series(inv_coeffs: Vec<Complex64>, order: usize) -> Result<Self> {
        if inv_coeffs.len() < 2 || inv_coeffs[1].norm() == 0.0 {
            return Err(Error::invalid("inverse interior series needs a non-zero linear term"));
        }
        let len = order + 1;
        let b1 = inv_coeffs[1];
        // zeta(y) with y = x - b0 solves sum_{k>=1} b_k zeta^k = y
        let mut zeta = vec![Complex64::new(0.0, 0.0); len];
        if len > 1 {
            zeta[1] = b1.inv();
        }
        for _ in 0..len {
            // B(zeta) - y, composed by Horner in the power-series ring
            let mut composed = vec![Complex64::new(0.0, 0.0); len];
            for &b in inv_coeffs.iter().skip(1).rev() {
                composed[0] += b;
                composed = series_mul(&composed, &zeta, len);
            }
            if len > 1 {
                composed[1] -= Complex64::new(1.0, 0.0);
            }
            let done = composed.iter().all(|c| c.norm() < 1e-300);
            for k in 0..len {
                zeta[k] -= composed[k] / b1;
            }
            if done {
                break;
            }
        }
        Self::from_series(zeta, inv_coeffs)
    }

    fn check(&self) -> Result<()> {
        for w in super::unit_circle(CHECK_SAMPLES) {
            let x = self.inverse(w);
            let z = self.forward(x);
            if (z.norm() - 1.0).abs() > 1e-8 || (z - w).norm() > 1e-8 {
                return Err(Error::invalid(format!(
                    "interior map does not send the boundary onto the unit circle (|T0| = {})",
                    z.norm()
                )));
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> InteriorKind {
        self.kind
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn inv_coeffs(&self) -> &[Complex64] {
        &self.inv_coeffs
    }

    /// `T0^{-1}(0)`.
    pub fn center(&self) -> Complex64 {
        self.inv_coeffs[0]
    }

    pub fn forward(&self, x: Complex64) -> Complex64 {
        match self.kind {
            InteriorKind::IdentityDisk => x,
            InteriorKind::Series => horner(&self.coeffs, x - self.center()),
        }
    }

    pub fn derivative(&self, x: Complex64) -> Complex64 {
        match self.kind {
            InteriorKind::IdentityDisk => Complex64::new(1.0, 0.0),
            InteriorKind::Series => horner_derivative(&self.coeffs, x - self.center()),
        }
    }

    pub fn inverse(&self, zeta: Complex64) -> Complex64 {
        match self.kind {
            InteriorKind::IdentityDisk => zeta,
            InteriorKind::Series => horner(&self.inv_coeffs, zeta),
        }
    }

    /// Point of the outer boundary with mapped angle `theta`.
    pub fn boundary_point(&self, theta: f64) -> Complex64 {
        self.inverse(Complex64::from_polar(1.0, theta))
    }

    /// Strict interior test `|T0(x)| < 1`.
    pub fn contains(&self, x: Complex64) -> bool {
        self.forward(x).norm() < 1.0
    }

    /// Diameter estimated from 256 boundary samples.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Complex64> = (0..256).map(|j| self.boundary_point(spectral::angle(j, 256))).collect();
        pts.iter()
            .flat_map(|a| pts.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max)
    }
}

impl Default for InteriorMap {
    fn default() -> Self {
        Self::unit_disk()
    }
}
