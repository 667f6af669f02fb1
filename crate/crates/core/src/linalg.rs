use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result};

/// Relative size of a triangular pivot below which the design is treated as
/// rank deficient.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coef: Vec<f64>,
    pub sse: f64,
}

/// Ordinary least squares through a Householder QR of the `n × k` design.
///
/// `column(j, i)` yields row `i` of regressor `j`.
pub(crate) fn least_squares(
    n: usize,
    k: usize,
    y: &[f64],
    column: impl Fn(usize, usize) -> f64,
) -> Result<LeastSquares> {
    if n < k {
        return Err(Error::DegenerateDesign("fewer observations than linear parameters"));
    }
    let design = DMatrix::from_fn(n, k, |i, j| column(j, i));
    if design.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateDesign("non-finite regressor"));
    }
    let norms: Vec<f64> = (0..k).map(|j| design.column(j).norm()).collect();
    let qr = design.clone().qr();
    let r = qr.r();
    for j in 0..k {
        if norms[j] == 0.0 || r[(j, j)].abs() <= RANK_TOL * norms[j] {
            return Err(Error::DegenerateDesign("rank-deficient regressors"));
        }
    }
    let mut qty = DVector::from_column_slice(y);
    qr.q_tr_mul(&mut qty);
    let head = qty.rows(0, k).into_owned();
    let coef = r
        .solve_upper_triangular(&head)
        .ok_or(Error::DegenerateDesign("singular triangular factor"))?;
    let fitted = &design * &coef;
    let sse = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(LeastSquares {
        coef: coef.iter().copied().collect(),
        sse,
    })
}
