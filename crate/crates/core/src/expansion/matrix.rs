//! Interaction system `M a = Psi0` between inclusions and the closed-form
//! leading inverses of `M` in the distance regimes.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::profiles::Profile;

/// Largest accepted condition number of `M`.
pub const MAX_CONDITION: f64 = 1e12;

const TIE: f64 = 1e-12;

/// Distance regime, read off the pairwise exponents `e_ij`
/// (`|x_i - x_j| ~ eps^{e_ij}`).
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// All pairs at distance `O(1)`.
    Separated,
    /// All pairs at distance `eps^l`.
    Clustered { l: f64 },
    /// One pair at distance `eps^alpha`, every other pair `O(1)`; `N >= 3`.
    Mixed { pair: (usize, usize), alpha: f64 },
    /// Three inclusions: `pair` at distance `eps^alpha`, the third at
    /// distance `eps^beta` from both, `0 < beta < alpha < 1`.
    ThreeScale { alpha: f64, beta: f64, pair: (usize, usize) },
    General,
}

impl Regime {
    pub fn classify(e: &DMatrix<f64>) -> Regime {
        let n = e.nrows();
        let pairs: Vec<((usize, usize), f64)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| ((i, j), e[(i, j)]))
            .collect();
        if pairs.iter().all(|(_, v)| v.abs() < TIE) {
            return Regime::Separated;
        }
        let first = pairs[0].1;
        if first > TIE && pairs.iter().all(|(_, v)| (v - first).abs() < TIE) {
            return Regime::Clustered { l: first };
        }
        let close: Vec<_> = pairs.iter().filter(|(_, v)| *v > TIE).collect();
        if n >= 3 && close.len() == 1 {
            return Regime::Mixed {
                pair: close[0].0,
                alpha: close[0].1,
            };
        }
        if n == 3 {
            let (top, alpha) = pairs.iter().cloned().fold(((0, 0), f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let rest: Vec<f64> = pairs.iter().filter(|(p, _)| *p != top).map(|(_, v)| *v).collect();
            if (rest[0] - rest[1]).abs() < TIE && rest[0] > TIE && rest[0] < alpha && alpha < 1.0 {
                return Regime::ThreeScale {
                    alpha,
                    beta: rest[0],
                    pair: top,
                };
            }
        }
        Regime::General
    }
}

#[derive(Debug, Clone)]
pub struct InteractionMatrix {
    entries: DMatrix<f64>,
    rhs: DVector<f64>,
    solution: Option<DVector<f64>>,
    regime: Regime,
    exponents: DMatrix<f64>,
    eps: f64,
    condition: f64,
}

/// Assembles `M` from the profiles of all inclusions at the same `eps`:
/// `M_ii = ln eps - w_i(x_i)`, `M_ij = ln(beta_j |x_i - x_j|) - w_j(x_i)`.
pub fn assemble_from_profiles(profiles: &[Profile], rhs: &[f64], exponents: DMatrix<f64>) -> Result<InteractionMatrix> {
    let n = profiles.len();
    if n == 0 || rhs.len() != n || exponents.nrows() != n {
        return Err(Error::invalid("interaction system needs one profile, rhs entry and exponent row per inclusion"));
    }
    let eps = profiles[0].eps();
    let centers: Vec<Complex64> = profiles.iter().map(|p| p.center()).collect();
    let mut entries = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = if i == j {
                eps.ln() - profiles[i].w_center()
            } else {
                (profiles[j].beta() * (centers[i] - centers[j]).norm()).ln() - profiles[j].w().evaluate(centers[i])?
            };
        }
    }
    Ok(InteractionMatrix::new(entries, DVector::from_column_slice(rhs), exponents, eps))
}

impl InteractionMatrix {
    pub fn new(entries: DMatrix<f64>, rhs: DVector<f64>, exponents: DMatrix<f64>, eps: f64) -> Self {
        let sv = entries.clone().singular_values();
        let condition = sv.max() / sv.min();
        InteractionMatrix {
            regime: Regime::classify(&exponents),
            entries,
            rhs,
            solution: None,
            exponents,
            eps,
            condition,
        }
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.rhs
    }

    pub fn solution(&self) -> Option<&DVector<f64>> {
        self.solution.as_ref()
    }

    pub fn regime(&self) -> &Regime {
        &self.regime
    }

    pub fn exponents(&self) -> &DMatrix<f64> {
        &self.exponents
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn len(&self) -> usize {
        self.entries.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `det M` for `N = 2`:
    /// `(ln eps - w_1(x_1))(ln eps - w_2(x_2)) - M_12 M_21`.
    pub fn delta(&self) -> Option<f64> {
        let m = &self.entries;
        (self.len() == 2).then(|| m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)])
    }

    /// Explicit `2 x 2` inverse `(1/delta) [[M_22, -M_12], [-M_21, M_11]]`.
    pub fn explicit_inverse_2x2(&self) -> Option<DMatrix<f64>> {
        let d = self.delta()?;
        let m = &self.entries;
        Some(DMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]]) / d)
    }

    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        self.entries
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::DegenerateConfiguration("interaction matrix is singular".into()))
    }
}

/// Solves `M a = Psi0` by LU with partial pivoting.
pub fn solve_coefficients(m: &mut InteractionMatrix) -> Result<DVector<f64>> {
    if !(m.condition <= MAX_CONDITION) {
        return Err(Error::DegenerateConfiguration(format!(
            "interaction matrix condition number {:.3e} exceeds {MAX_CONDITION:e}",
            m.condition
        )));
    }
    let a = m
        .entries
        .clone()
        .lu()
        .solve(&m.rhs)
        .ok_or_else(|| Error::DegenerateConfiguration("interaction matrix is singular".into()))?;
    let residual = (&m.entries * &a - &m.rhs).amax();
    if residual > 1e-10 * m.rhs.amax().max(f64::MIN_POSITIVE) {
        return Err(Error::DegenerateConfiguration(format!("linear solve residual {residual:.3e}")));
    }
    m.solution = Some(a.clone());
    Ok(a)
}

/// Closed-form leading inverse of `M` and its measured deviation.
#[derive(Debug, Clone)]
pub struct AsymptoticInverse {
    pub regime: Regime,
    pub analytic: DMatrix<f64>,
    /// `max_ij |M^{-1} - analytic| * ln^2 eps`.
    pub deviation: f64,
}

pub fn asymptotic_inverse(m: &InteractionMatrix) -> Result<AsymptoticInverse> {
    let n = m.len();
    let l = m.eps.ln();
    let analytic = match &m.regime {
        Regime::Separated => DMatrix::identity(n, n) / l,
        Regime::Clustered { l: ratio } => clustered_leading_inverse(n, *ratio) / l,
        Regime::Mixed { pair, alpha } => mixed_leading_inverse(n, *pair, *alpha) / l,
        Regime::ThreeScale { alpha, beta, pair } => {
            let (p, q) = *pair;
            let r = 3 - p - q;
            let inv = three_scale_inverse(*alpha, *beta)?;
            let order = [p, q, r];
            DMatrix::from_fn(3, 3, |i, j| {
                let a = order.iter().position(|&k| k == i).unwrap();
                let b = order.iter().position(|&k| k == j).unwrap();
                inv[(a, b)]
            }) / l
        }
        Regime::General => {
            m.exponents
                .clone()
                .try_inverse()
                .ok_or_else(|| Error::DegenerateConfiguration("exponent matrix is singular".into()))?
                / l
        }
    };
    let exact = m.inverse()?;
    let deviation = (exact - &analytic).amax() * l * l;
    Ok(AsymptoticInverse {
        regime: m.regime.clone(),
        analytic,
        deviation,
    })
}

/// `(1/(1-l)) I + (1/N) [1/(1 + (N-1) l) - 1/(1-l)] H_N`.
pub fn clustered_leading_inverse(n: usize, l: f64) -> DMatrix<f64> {
    let nf = n as f64;
    let diag = 1.0 / (1.0 - l);
    let off = (1.0 / (1.0 + (nf - 1.0) * l) - diag) / nf;
    DMatrix::from_fn(n, n, |i, j| if i == j { diag + off } else { off })
}

/// Identity except the `pair` block `(1/(1-alpha^2)) [[1, -alpha], [-alpha, 1]]`.
pub fn mixed_leading_inverse(n: usize, pair: (usize, usize), alpha: f64) -> DMatrix<f64> {
    let mut inv = DMatrix::identity(n, n);
    let s = 1.0 / (1.0 - alpha * alpha);
    let (p, q) = pair;
    inv[(p, p)] = s;
    inv[(q, q)] = s;
    inv[(p, q)] = -alpha * s;
    inv[(q, p)] = -alpha * s;
    inv
}

/// `M0 = (ln eps - ln eta) I + ln eta H_N`.
pub fn m0(n: usize, eps: f64, eta: f64) -> DMatrix<f64> {
    DMatrix::identity(n, n) * (eps.ln() - eta.ln()) + DMatrix::from_element(n, n, eta.ln())
}

/// `M0^{-1}` from the spectral decomposition of the rank-one `H_N`.
pub fn m0_spectral_inverse(n: usize, eps: f64, eta: f64) -> DMatrix<f64> {
    let nf = n as f64;
    let a = 1.0 / (eps.ln() - eta.ln());
    let b = 1.0 / (eps.ln() + (nf - 1.0) * eta.ln());
    DMatrix::identity(n, n) * a + DMatrix::from_element(n, n, (b - a) / nf)
}

/// `M_{alpha,beta} = [[1, a, b], [a, 1, b], [b, b, 1]]`.
pub fn m_alpha_beta(alpha: f64, beta: f64) -> Matrix3<f64> {
    Matrix3::new(1.0, alpha, beta, alpha, 1.0, beta, beta, beta, 1.0)
}

/// `(alpha - 1)(2 beta^2 - alpha - 1)`.
pub fn det_alpha_beta(alpha: f64, beta: f64) -> f64 {
    (alpha - 1.0) * (2.0 * beta * beta - alpha - 1.0)
}

fn check_three_scale(alpha: f64, beta: f64) -> Result<()> {
    if !(0.0 < beta && beta <= alpha && alpha < 1.0) {
        return Err(Error::invalid(format!(
            "three-scale parameters need 0 < beta <= alpha < 1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    Ok(())
}

/// Orthogonal eigenbasis of `M_{alpha,beta}` and the inverse eigenvalues
/// `2/(alpha + 2 + s)`, `2/(alpha + 2 - s)`, `1/(1 - alpha)`,
/// `s = sqrt(alpha^2 + 8 beta^2)`.
///
/// `(1,-1,0)/sqrt 2` is always an eigenvector; the other two lie in the span
/// of `(1,1,0)/sqrt 2` and `(0,0,1)`, where the matrix acts as
/// `[[1 + alpha, sqrt2 beta], [sqrt2 beta, 1]]`. For `alpha = beta` this
/// reduces to `(1/sqrt 6) [[sqrt2, 1, sqrt3], [sqrt2, 1, -sqrt3], [sqrt2, -2, 0]]`.
pub fn three_scale_eigenbasis(alpha: f64, beta: f64) -> Result<(Matrix3<f64>, Vector3<f64>)> {
    check_three_scale(alpha, beta)?;
    let s = (alpha * alpha + 8.0 * beta * beta).sqrt();
    let inv = Vector3::new(2.0 / (alpha + 2.0 + s), 2.0 / (alpha + 2.0 - s), 1.0 / (1.0 - alpha));
    let r2 = std::f64::consts::SQRT_2;
    let column = |lambda: f64| {
        let (u, v) = (r2 * beta, lambda - 1.0 - alpha);
        let norm = u.hypot(v);
        Vector3::new(u / norm / r2, u / norm / r2, v / norm)
    };
    let p = Matrix3::from_columns(&[
        column((2.0 + alpha + s) / 2.0),
        column((2.0 + alpha - s) / 2.0),
        Vector3::new(1.0 / r2, -1.0 / r2, 0.0),
    ]);
    Ok((p, inv))
}

/// The eigenbasis matrix `P` as printed for the three-scale case; it
/// diagonalizes `M_{alpha,beta}` only when `alpha = beta`.
pub fn printed_p() -> Matrix3<f64> {
    let (r2, r3) = (2f64.sqrt(), 3f64.sqrt());
    Matrix3::new(r2, r3, 1.0, r2, -r3, 1.0, r2, 0.0, -2.0) / 6f64.sqrt()
}

/// `M_{alpha,beta}^{-1} = P diag(...) P^T`.
pub fn three_scale_inverse(alpha: f64, beta: f64) -> Result<Matrix3<f64>> {
    let (p, inv) = three_scale_eigenbasis(alpha, beta)?;
    Ok(p * Matrix3::from_diagonal(&inv) * p.transpose())
}

/// Eigenvalues of the `2 x 2` block, for diagnostics.
#[cfg(test)]
pub(crate) fn block_eigenvalues(alpha: f64, beta: f64) -> (f64, f64) {
    use nalgebra::{Matrix2, SymmetricEigen};
    let r2 = std::f64::consts::SQRT_2;
    let e = SymmetricEigen::new(Matrix2::new(1.0 + alpha, r2 * beta, r2 * beta, 1.0));
    (e.eigenvalues[0].max(e.eigenvalues[1]), e.eigenvalues[0].min(e.eigenvalues[1]))
}
