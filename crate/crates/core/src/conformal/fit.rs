//! Exterior maps of sampled shapes.
//!
//! The boundary samples are interpolated by a periodic cubic spline and
//! resampled uniformly in arc length. A charge-simulation solve of
//! `ln|T| = 0` on the boundary gives the boundary correspondence
//! `theta_j = arg T(z_j)`, and the inverse Laurent series is then fitted to
//! the resampled points by least squares over `theta_j`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::shape::winding_number;
use crate::error::{Error, Result};

/// Largest accepted boundary mismatch of the fitted inverse series.
pub const FIT_TOLERANCE: f64 = 1e-6;

const SOURCE_SCALES: [f64; 5] = [0.5, 0.6, 0.7, 0.8, 0.9];

/// Outcome of fitting a sampled boundary.
#[derive(Debug, Clone)]
pub struct SampledFit {
    pub inv_coeffs: Vec<Complex64>,
    pub residual: f64,
    /// `beta` of the charge-simulation map, before the series fit.
    pub charge_beta: f64,
}

pub(crate) fn fit_sampled_shape(points: &[Complex64], order: usize) -> Result<SampledFit> {
    let spline = PeriodicSpline::new(points);
    let count = (8 * order).max(256);
    let nodes = spline.resample_uniform(2 * count);
    let colloc: Vec<Complex64> = nodes.iter().step_by(2).copied().collect();
    let mids: Vec<Complex64> = nodes.iter().skip(1).step_by(2).copied().collect();

    let charge = SOURCE_SCALES
        .iter()
        .filter_map(|&q| ChargeMap::solve(&colloc, &mids, q))
        .min_by(|a, b| a.check_residual.total_cmp(&b.check_residual))
        .ok_or_else(|| Error::Shape("no admissible charge placement inside the sampled shape".into()))?;
    log::debug!(
        "charge simulation: scale {}, |T|-1 residual {:.2e}",
        charge.scale,
        charge.check_residual
    );

    let angles = unwrap_angles(colloc.iter().map(|&z| charge.eval(z).arg()));
    let ncoef = order + 2;
    let basis = |theta: f64, m: usize| Complex64::from_polar(1.0, -(m as f64 - 1.0) * theta);
    let a = DMatrix::from_fn(colloc.len(), ncoef, |j, m| basis(angles[j], m));
    let b = DVector::from_iterator(colloc.len(), colloc.iter().copied());
    let svd = a.clone().svd(true, true);
    let x = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::Shape(format!("inverse-series least squares failed: {e}")))?;
    let inv_coeffs: Vec<Complex64> = x.iter().copied().collect();

    let eval = |theta: f64| -> Complex64 { (0..ncoef).map(|m| inv_coeffs[m] * basis(theta, m)).sum() };
    let mut residual = colloc
        .iter()
        .zip(&angles)
        .map(|(z, &t)| (eval(t) - z).norm())
        .fold(0.0, f64::max);
    for z in &mids {
        let t = charge.eval(*z).arg();
        residual = residual.max((eval(t) - z).norm());
    }
    if residual > FIT_TOLERANCE {
        return Err(Error::FitResidual {
            residual,
            tolerance: FIT_TOLERANCE,
        });
    }
    Ok(SampledFit {
        inv_coeffs,
        residual,
        charge_beta: charge.gamma.exp(),
    })
}

fn unwrap_angles(raw: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for a in raw {
        match out.last() {
            None => out.push(a),
            Some(&prev) => {
                let mut d = a - prev.rem_euclid(std::f64::consts::TAU);
                d = (d + std::f64::consts::PI).rem_euclid(std::f64::consts::TAU) - std::f64::consts::PI;
                out.push(prev + d);
            }
        }
    }
    out
}

/// `T(z) = z exp(gamma + sum_k q_k Log(1 - s_k / z))`, real `gamma` and `q_k`.
struct ChargeMap {
    gamma: f64,
    charges: Vec<f64>,
    sources: Vec<Complex64>,
    scale: f64,
    check_residual: f64,
}

impl ChargeMap {
    fn solve(colloc: &[Complex64], check: &[Complex64], scale: f64) -> Option<Self> {
        let sources: Vec<Complex64> = colloc.iter().step_by(2).map(|z| z * scale).collect();
        if sources.iter().any(|&s| winding_number(colloc, s) != 1) {
            return None;
        }
        let n = colloc.len();
        let a = DMatrix::from_fn(n, sources.len() + 1, |j, k| {
            if k == 0 {
                1.0
            } else {
                (Complex64::new(1.0, 0.0) - sources[k - 1] / colloc[j]).norm().ln()
            }
        });
        let b = DVector::from_iterator(n, colloc.iter().map(|z| -z.norm().ln()));
        let x = a.svd(true, true).solve(&b, 1e-14).ok()?;
        let mut map = ChargeMap {
            gamma: x[0],
            charges: x.iter().skip(1).copied().collect(),
            sources,
            scale,
            check_residual: 0.0,
        };
        map.check_residual = check
            .iter()
            .chain(colloc)
            .map(|&z| map.eval(z).norm().ln().abs())
            .fold(0.0, f64::max);
        map.check_residual.is_finite().then_some(map)
    }

    fn eval(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let log: Complex64 = self
            .charges
            .iter()
            .zip(&self.sources)
            .map(|(&q, &s)| (one - s / z).ln() * q)
            .sum();
        z * (log + self.gamma).exp()
    }
}

/// Periodic cubic spline through closed-curve samples, chord-length parameter.
struct PeriodicSpline {
    knots: Vec<f64>,
    points: Vec<Complex64>,
    second: Vec<Complex64>,
    period: f64,
}

impl PeriodicSpline {
    fn new(points: &[Complex64]) -> Self {
        let n = points.len();
        let h: Vec<f64> = (0..n).map(|i| (points[(i + 1) % n] - points[i]).norm()).collect();
        let mut knots = vec![0.0; n];
        for i in 1..n {
            knots[i] = knots[i - 1] + h[i - 1];
        }
        let period = knots[n - 1] + h[n - 1];
        let sub: Vec<f64> = (0..n).map(|i| h[(i + n - 1) % n]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * (h[(i + n - 1) % n] + h[i])).collect();
        let sup: Vec<f64> = h.clone();
        let rhs: Vec<Complex64> = (0..n)
            .map(|i| {
                let next = (points[(i + 1) % n] - points[i]) / h[i];
                let prev = (points[i] - points[(i + n - 1) % n]) / h[(i + n - 1) % n];
                (next - prev) * 6.0
            })
            .collect();
        let second = solve_cyclic(&sub, &diag, &sup, &rhs);
        PeriodicSpline {
            knots,
            points: points.to_vec(),
            second,
            period,
        }
    }

    fn segment(&self, i: usize) -> (f64, Complex64, Complex64, Complex64, Complex64) {
        let n = self.points.len();
        let h = if i + 1 < n {
            self.knots[i + 1] - self.knots[i]
        } else {
            self.period - self.knots[i]
        };
        (h, self.points[i], self.points[(i + 1) % n], self.second[i], self.second[(i + 1) % n])
    }

    fn eval_local(&self, i: usize, s: f64) -> Complex64 {
        let (h, p0, p1, m0, m1) = self.segment(i);
        let u = h - s;
        m0 * (u * u * u / (6.0 * h)) + m1 * (s * s * s / (6.0 * h)) + (p0 / h - m0 * (h / 6.0)) * u
            + (p1 / h - m1 * (h / 6.0)) * s
    }

    fn deriv_local(&self, i: usize, s: f64) -> Complex64 {
        let (h, p0, p1, m0, m1) = self.segment(i);
        let u = h - s;
        -m0 * (u * u / (2.0 * h)) + m1 * (s * s / (2.0 * h)) - (p0 / h - m0 * (h / 6.0)) + (p1 / h - m1 * (h / 6.0))
    }

    fn segment_length(&self, i: usize, upto: f64) -> f64 {
        // 8-point Gauss-Legendre on [0, upto]
        const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
        const W: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
        let half = upto / 2.0;
        X.iter()
            .zip(W)
            .map(|(&x, w)| {
                w * (self.deriv_local(i, half * (1.0 + x)).norm() + self.deriv_local(i, half * (1.0 - x)).norm())
            })
            .sum::<f64>()
            * half
    }

    /// `count` points equally spaced in arc length, starting at the first sample.
    fn resample_uniform(&self, count: usize) -> Vec<Complex64> {
        let n = self.points.len();
        let lengths: Vec<f64> = (0..n).map(|i| self.segment_length(i, self.segment(i).0)).collect();
        let mut cumulative = vec![0.0; n + 1];
        for i in 0..n {
            cumulative[i + 1] = cumulative[i] + lengths[i];
        }
        let total = cumulative[n];
        let mut seg = 0;
        (0..count)
            .map(|j| {
                let target = total * j as f64 / count as f64;
                while seg + 1 < n && cumulative[seg + 1] <= target {
                    seg += 1;
                }
                let want = target - cumulative[seg];
                let h = self.segment(seg).0;
                let (mut lo, mut hi) = (0.0, h);
                let mut s = h * want / lengths[seg].max(f64::MIN_POSITIVE);
                for _ in 0..60 {
                    let f = self.segment_length(seg, s) - want;
                    if f.abs() < 1e-15 * total {
                        break;
                    }
                    if f > 0.0 {
                        hi = s;
                    } else {
                        lo = s;
                    }
                    let newton = s - f / self.deriv_local(seg, s).norm();
                    s = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
                }
                self.eval_local(seg, s)
            })
            .collect()
    }
}

/// Solves the cyclic tridiagonal system
/// `sub[i] x[i-1] + diag[i] x[i] + sup[i] x[i+1] = rhs[i]` (indices mod n).
fn solve_cyclic(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[Complex64]) -> Vec<Complex64> {
    let n = diag.len();
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            diag[i]
        } else if j == (i + n - 1) % n {
            sub[i]
        } else if j == (i + 1) % n {
            sup[i]
        } else {
            0.0
        }
    });
    let lu = a.lu();
    let re = lu
        .solve(&DVector::from_iterator(n, rhs.iter().map(|z| z.re)))
        .expect("spline system is diagonally dominant");
    let im = lu
        .solve(&DVector::from_iterator(n, rhs.iter().map(|z| z.im)))
        .expect("spline system is diagonally dominant");
    re.iter().zip(im.iter()).map(|(&r, &i)| Complex64::new(r, i)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn ellipse_samples(n: usize, semi_x: f64, semi_y: f64) -> Vec<Complex64> {
        (0..n)
            .map(|j| {
                let t = TAU * j as f64 / n as f64 + 0.1;
                Complex64::new(semi_x * t.cos(), semi_y * t.sin())
            })
            .collect()
    }

    #[test]
    fn spline_resampling_stays_on_circle() {
        let pts: Vec<Complex64> = (0..200).map(|j| Complex64::from_polar(1.0, TAU * j as f64 / 200.0)).collect();
        let spline = PeriodicSpline::new(&pts);
        let out = spline.resample_uniform(300);
        for z in &out {
            assert!((z.norm() - 1.0).abs() < 1e-7);
        }
        let gaps: Vec<f64> = (0..300).map(|i| (out[(i + 1) % 300] - out[i]).norm()).collect();
        let (lo, hi) = gaps.iter().fold((f64::MAX, 0.0f64), |(l, h), &g| (l.min(g), h.max(g)));
        assert!(hi / lo - 1.0 < 1e-6);
    }

    #[test]
    fn sampled_ellipse_recovers_closed_form() {
        let pts = ellipse_samples(400, 2.0, 1.0);
        let fit = fit_sampled_shape(&pts, 24).unwrap();
        // a=1, b=2, c=2: c_{-1} = 1.5, c_1 = 0.5
        assert!((fit.inv_coeffs[0] - Complex64::new(1.5, 0.0)).norm() < 1e-6, "{:?}", fit.inv_coeffs[0]);
        assert!((fit.inv_coeffs[2] - Complex64::new(0.5, 0.0)).norm() < 1e-6);
        assert!((fit.charge_beta - 1.0 / 1.5).abs() < 1e-7);
        assert!(fit.residual < FIT_TOLERANCE);
    }

    #[test]
    fn rough_shape_reports_residual() {
        // square with sharp corners cannot be matched by a short series
        let mut pts = Vec::new();
        for side in 0..4 {
            for j in 0..20 {
                let t = -1.0 + 2.0 * j as f64 / 20.0;
                let p = match side {
                    0 => Complex64::new(1.0, t),
                    1 => Complex64::new(-t, 1.0),
                    2 => Complex64::new(-1.0, -t),
                    _ => Complex64::new(t, -1.0),
                };
                pts.push(p);
            }
        }
        match fit_sampled_shape(&pts, 8) {
            Err(Error::FitResidual { residual, .. }) => assert!(residual > FIT_TOLERANCE),
            other => panic!("expected a fit residual error, got {other:?}"),
        }
    }
}
