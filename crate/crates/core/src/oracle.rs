//! Small method-of-fundamental-solutions solvers used as independent test
//! oracles. Deliberately separate from `reference`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub struct Mfs {
    sources: Vec<Complex64>,
    charges: Vec<f64>,
    constant: f64,
}

fn lstsq(a: DMatrix<f64>, b: DVector<f64>) -> DVector<f64> {
    let svd = a.svd(true, true);
    let cutoff = 1e-14 * svd.singular_values.max();
    svd.solve(&b, cutoff).expect("svd solve")
}

fn scaled(points: &[Complex64], center: Complex64, ratio: f64, stride: usize) -> Vec<Complex64> {
    points.iter().step_by(stride).map(|p| center + (p - center) * ratio).collect()
}

impl Mfs {
    /// Harmonic inside the curve `boundary`, sources on the curve scaled by
    /// `ratio > 1` about its centroid.
    pub fn interior(boundary: &[Complex64], values: &[f64], ratio: f64) -> Self {
        let centroid = boundary.iter().sum::<Complex64>() / boundary.len() as f64;
        let sources = scaled(boundary, centroid, ratio, 2);
        Self::fit(boundary, values, sources, false)
    }

    /// Bounded harmonic outside the curve, sources on the curve scaled by
    /// `ratio < 1` about `center`, total charge forced to zero.
    pub fn exterior(boundary: &[Complex64], values: &[f64], center: Complex64, ratio: f64) -> Self {
        let sources = scaled(boundary, center, ratio, 2);
        Self::fit(boundary, values, sources, true)
    }

    fn fit(boundary: &[Complex64], values: &[f64], sources: Vec<Complex64>, neutral: bool) -> Self {
        let n = sources.len();
        let rows = boundary.len() + usize::from(neutral);
        let mut a = DMatrix::zeros(rows, n + 1);
        let mut b = DVector::zeros(rows);
        for (i, x) in boundary.iter().enumerate() {
            for (j, s) in sources.iter().enumerate() {
                a[(i, j)] = (x - s).norm().ln();
            }
            a[(i, n)] = 1.0;
            b[i] = values[i];
        }
        if neutral {
            for j in 0..n {
                a[(rows - 1, j)] = 1e3;
            }
        }
        let sol = lstsq(a, b);
        Mfs {
            sources,
            charges: sol.rows(0, n).iter().cloned().collect(),
            constant: sol[n],
        }
    }

    pub fn eval(&self, x: Complex64) -> f64 {
        self.constant
            + self
                .sources
                .iter()
                .zip(&self.charges)
                .map(|(s, q)| q * (x - s).norm().ln())
                .sum::<f64>()
    }
}

/// Logarithmic capacity of a closed curve: unit total charge on sources
/// inside, potential `V` constant on the curve, capacity `exp(V)`.
pub fn capacity(boundary: &[Complex64], center: Complex64, ratio: f64) -> f64 {
    let sources = scaled(boundary, center, ratio, 2);
    let n = sources.len();
    let rows = boundary.len() + 1;
    let mut a = DMatrix::zeros(rows, n + 1);
    let mut b = DVector::zeros(rows);
    for (i, x) in boundary.iter().enumerate() {
        for (j, s) in sources.iter().enumerate() {
            a[(i, j)] = (x - s).norm().ln();
        }
        a[(i, n)] = -1.0;
    }
    // heavily weighted so least squares enforces unit total charge
    for j in 0..n {
        a[(rows - 1, j)] = 1e4;
    }
    b[rows - 1] = 1e4;
    lstsq(a, b)[n].exp()
}

#[test]
fn capacity_of_disk() {
    let b: Vec<Complex64> = (0..128)
        .map(|j| Complex64::from_polar(0.7, std::f64::consts::TAU * j as f64 / 128.0))
        .collect();
    assert!((capacity(&b, Complex64::new(0.0, 0.0), 0.6) - 0.7).abs() < 1e-10);
}
