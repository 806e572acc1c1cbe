//! Anisotropic Holzapfel-Ogden passive response and active fiber stress.

use nalgebra::{Matrix3, Vector3};

use super::{jacobian, StressDecomposition};
use crate::{Matrix, Result, SimError};

#[derive(Clone, Debug, PartialEq)]
pub struct HolzapfelOgdenParams {
    pub rho0: f64,
    /// Lame parameter multiplying `ln J`.
    pub lambda: f64,
    pub a: f64,
    pub b: f64,
    pub a_f: f64,
    pub b_f: f64,
    pub a_s: f64,
    pub b_s: f64,
    pub a_fs: f64,
    pub b_fs: f64,
    pub fiber: Vector3<f64>,
    pub sheet: Vector3<f64>,
}

impl HolzapfelOgdenParams {
    /// Isotropic parameter set (all fiber terms zero) from a bulk modulus,
    /// with `lambda = K - 2a/3`.
    pub fn isotropic(rho0: f64, bulk_modulus: f64, a: f64, b: f64) -> Self {
        Self {
            rho0,
            lambda: bulk_modulus - 2.0 * a / 3.0,
            a,
            b,
            a_f: 0.0,
            b_f: 0.0,
            a_s: 0.0,
            b_s: 0.0,
            a_fs: 0.0,
            b_fs: 0.0,
            fiber: Vector3::x(),
            sheet: Vector3::y(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let coefficients = [self.a, self.b, self.a_f, self.b_f, self.a_s, self.b_s, self.a_fs, self.b_fs];
        if coefficients.iter().any(|&v| !(v >= 0.0)) || !(self.rho0 > 0.0) {
            return Err(SimError::InvalidInput("muscle coefficients must be non-negative".into()));
        }
        for dir in [&self.fiber, &self.sheet] {
            if (dir.norm() - 1.0).abs() > 1e-12 {
                return Err(SimError::InvalidInput("fiber and sheet directions must be unit vectors".into()));
            }
        }
        Ok(())
    }

    /// Stiffness estimate for the time step at deformation `f`:
    /// `lambda + c (2/3 + 2 b s^2)` with `c = a exp[b (I1 - 3)]` and `s` the
    /// largest eigenvalue of `b = F F^T`, plus the fiber, sheet and cross
    /// tangents. At `F = I` this is `lambda + 2a/3 + 2ab + 4 a_f + 4 a_s + 2 a_fs`.
    pub fn current_modulus(&self, f: &Matrix3<f64>) -> f64 {
        let b = f * f.transpose();
        let largest = b.symmetric_eigenvalues().max();
        let c = self.a * (self.b * (b.trace() - 3.0)).exp();
        let ff = f * self.fiber;
        let fs = f * self.sheet;
        let family = |a: f64, exponent: f64, invariant: f64| {
            let e = invariant - 1.0;
            let g = a * (exponent * e * e).exp();
            4.0 * g * (1.0 + 2.0 * exponent * e * e) * invariant * invariant + 2.0 * g * e.abs() * invariant
        };
        let i_fs = ff.dot(&fs);
        let g_fs = self.a_fs * (self.b_fs * i_fs * i_fs).exp();
        let lengths = ff.norm() * fs.norm();
        self.lambda
            + c * (2.0 / 3.0 + 2.0 * self.b * largest * largest)
            + family(self.a_f, self.b_f, ff.norm_squared())
            + family(self.a_s, self.b_s, fs.norm_squared())
            + 2.0 * g_fs * (1.0 + 2.0 * self.b_fs * i_fs * i_fs) * lengths * lengths
            + g_fs * i_fs.abs() * lengths
    }

    /// [`Self::current_modulus`] in the reference state.
    pub fn effective_bulk_modulus(&self) -> f64 {
        self.current_modulus(&Matrix3::identity())
    }

    pub fn sound_speed(&self) -> f64 {
        (self.effective_bulk_modulus() / self.rho0).sqrt()
    }
}

fn as_3d<const D: usize>(m: &Matrix<D>) -> Result<Matrix3<f64>> {
    if D != 3 {
        return Err(SimError::InvalidInput("muscle model requires three dimensions".into()));
    }
    Ok(Matrix3::from_fn(|r, c| m[(r, c)]))
}

fn from_3d<const D: usize>(m: &Matrix3<f64>) -> Matrix<D> {
    Matrix::<D>::from_fn(|r, c| m[(r, c)])
}

/// Holzapfel-Ogden Kirchhoff stress with shear coefficient
/// `c = a exp[b (I1 - 3)]` acting on `b = F F^T`; `damping` joins the
/// remainder.
pub fn holzapfel_ogden_stress<const D: usize>(
    f: &Matrix<D>,
    params: &HolzapfelOgdenParams,
    damping: &Matrix<D>,
) -> Result<StressDecomposition<D>> {
    let j = jacobian(f)?;
    let f3 = as_3d(f)?;
    let b = f3 * f3.transpose();
    let i1 = b.trace();
    let ff = f3 * params.fiber;
    let fs = f3 * params.sheet;
    let i_ff = ff.norm_squared();
    let i_ss = fs.norm_squared();
    let i_fs = ff.dot(&fs);

    let mut remaining = Matrix3::identity() * (params.lambda * j.ln() - params.a);
    remaining += ff * ff.transpose()
        * (2.0 * params.a_f * (i_ff - 1.0) * (params.b_f * (i_ff - 1.0).powi(2)).exp());
    remaining += fs * fs.transpose()
        * (2.0 * params.a_s * (i_ss - 1.0) * (params.b_s * (i_ss - 1.0).powi(2)).exp());
    let cross = ff * fs.transpose();
    remaining += (cross + cross.transpose()) * (params.a_fs * i_fs * (params.b_fs * i_fs * i_fs).exp());

    Ok(StressDecomposition {
        shear_coefficient: params.a * (params.b * (i1 - 3.0)).exp(),
        elastic_left_cauchy_green: from_3d(&b),
        remaining: from_3d::<D>(&remaining) + damping,
    })
}

/// Active contraction `Ta F (f0 x f0) F^T` with `Ta = -0.5 Vm`.
pub fn active_stress<const D: usize>(f: &Matrix<D>, potential: f64, params: &HolzapfelOgdenParams) -> Matrix<D> {
    let f3 = Matrix3::from_fn(|r, c| if r < D && c < D { f[(r, c)] } else { 0.0 });
    let ff = f3 * params.fiber;
    from_3d(&(ff * ff.transpose() * (-0.5 * potential)))
}
