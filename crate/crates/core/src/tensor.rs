//! Closed-form small-matrix helpers for 2D and 3D.
//!
//! nalgebra's determinant and inverse are not available for a generic
//! `SMatrix<f64, D, D>` without dimension-arithmetic bounds, so the two
//! supported sizes are written out directly.

use crate::{Matrix, Vector};

pub fn determinant<const D: usize>(m: &Matrix<D>) -> f64 {
    match D {
        1 => m[(0, 0)],
        2 => m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)],
        3 => {
            m[(0, 0)] * (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)])
                - m[(0, 1)] * (m[(1, 0)] * m[(2, 2)] - m[(1, 2)] * m[(2, 0)])
                + m[(0, 2)] * (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)])
        }
        _ => unreachable!("only 1, 2 and 3 dimensions are supported"),
    }
}

/// Inverse via the adjugate. Returns `None` when the determinant is exactly
/// zero or not finite; callers decide what "too small" means.
pub fn inverse<const D: usize>(m: &Matrix<D>) -> Option<Matrix<D>> {
    let det = determinant(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv_det = 1.0 / det;
    let mut out = Matrix::<D>::zeros();
    match D {
        1 => out[(0, 0)] = inv_det,
        2 => {
            out[(0, 0)] = m[(1, 1)] * inv_det;
            out[(0, 1)] = -m[(0, 1)] * inv_det;
            out[(1, 0)] = -m[(1, 0)] * inv_det;
            out[(1, 1)] = m[(0, 0)] * inv_det;
        }
        3 => {
            out[(0, 0)] = (m[(1, 1)] * m[(2, 2)] - m[(1, 2)] * m[(2, 1)]) * inv_det;
            out[(0, 1)] = (m[(0, 2)] * m[(2, 1)] - m[(0, 1)] * m[(2, 2)]) * inv_det;
            out[(0, 2)] = (m[(0, 1)] * m[(1, 2)] - m[(0, 2)] * m[(1, 1)]) * inv_det;
            out[(1, 0)] = (m[(1, 2)] * m[(2, 0)] - m[(1, 0)] * m[(2, 2)]) * inv_det;
            out[(1, 1)] = (m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]) * inv_det;
            out[(1, 2)] = (m[(0, 2)] * m[(1, 0)] - m[(0, 0)] * m[(1, 2)]) * inv_det;
            out[(2, 0)] = (m[(1, 0)] * m[(2, 1)] - m[(1, 1)] * m[(2, 0)]) * inv_det;
            out[(2, 1)] = (m[(0, 1)] * m[(2, 0)] - m[(0, 0)] * m[(2, 1)]) * inv_det;
            out[(2, 2)] = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]) * inv_det;
        }
        _ => unreachable!("only 1, 2 and 3 dimensions are supported"),
    }
    Some(out)
}

/// Trace-free part `m - tr(m)/D * I`.
pub fn deviator<const D: usize>(m: &Matrix<D>) -> Matrix<D> {
    let mean = m.trace() / D as f64;
    let mut out = *m;
    for k in 0..D {
        out[(k, k)] -= mean;
    }
    out
}

pub fn outer<const D: usize>(a: &Vector<D>, b: &Vector<D>) -> Matrix<D> {
    a * b.transpose()
}

/// `(m + m^T) / 2`.
pub fn symmetrize<const D: usize>(m: &Matrix<D>) -> Matrix<D> {
    (m + m.transpose()) * 0.5
}
