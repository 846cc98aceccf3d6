//! Truncated-SVD least squares. Uses faer, whose SVD stays accurate on the
//! badly scaled logarithmic-kernel matrices of the reference solver.

use faer::linalg::solvers::ThinSvd;
use faer::Mat;
use nalgebra::{DMatrix, DVector};

pub(crate) struct LeastSquares {
    pub solution: DVector<f64>,
    pub sv_max: f64,
    pub sv_min: f64,
    pub rank: usize,
}

/// Minimum-norm solution of `a x ~ b` keeping singular values above
/// `rel_cutoff * sigma_max`.
pub(crate) fn truncated_lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rel_cutoff: f64) -> LeastSquares {
    let mat = Mat::<f64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let svd = ThinSvd::new(mat.as_ref());
    let (u, s, v) = (svd.u(), svd.s_diagonal(), svd.v());
    let k = s.nrows();
    let sv_max = (0..k).map(|i| s.read(i)).fold(0.0, f64::max);
    let sv_min = (0..k).map(|i| s.read(i)).fold(f64::INFINITY, f64::min);
    let cutoff = rel_cutoff * sv_max;
    let mut x = DVector::zeros(a.ncols());
    let mut rank = 0;
    for c in 0..k {
        let sigma = s.read(c);
        if sigma <= cutoff {
            continue;
        }
        rank += 1;
        let coef = (0..a.nrows()).map(|i| u.read(i, c) * b[i]).sum::<f64>() / sigma;
        for r in 0..a.ncols() {
            x[r] += coef * v.read(r, c);
        }
    }
    LeastSquares {
        solution: x,
        sv_max,
        sv_min,
        rank,
    }
}
