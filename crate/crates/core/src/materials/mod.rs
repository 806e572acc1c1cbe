//! Constitutive models.
//!
//! Every model returns its Kirchhoff stress split as `tau = c * b_e + tau_r`,
//! where `c * b_e` carries the shear response that the hourglass-corrected
//! force assembly acts on and `tau_r` holds everything else (volumetric part,
//! fiber terms, active stress, damping).

mod muscle;
mod plastic;

pub use muscle::{active_stress, holzapfel_ogden_stress, HolzapfelOgdenParams};
pub use plastic::{
    herschel_bulkley_return_map, plastic_return_map, return_mapping, yield_function, Hardening,
    PlasticParams, ReturnMapping,
};

use crate::tensor::{determinant, deviator};
use crate::{Matrix, Result, SimError};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ElasticParams {
    pub rho0: f64,
    pub bulk_modulus: f64,
    pub shear_modulus: f64,
}

impl ElasticParams {
    pub fn new(rho0: f64, bulk_modulus: f64, shear_modulus: f64) -> Result<Self> {
        if !(rho0 > 0.0 && bulk_modulus > 0.0 && shear_modulus > 0.0) {
            return Err(SimError::InvalidInput(format!(
                "density and moduli must be positive (rho0 = {rho0}, K = {bulk_modulus}, G = {shear_modulus})"
            )));
        }
        Ok(Self {
            rho0,
            bulk_modulus,
            shear_modulus,
        })
    }

    /// From Young's modulus and Poisson's ratio, using the 3D relations in
    /// any dimension.
    pub fn from_youngs(rho0: f64, youngs: f64, poisson: f64) -> Result<Self> {
        if !(poisson > -1.0 && poisson < 0.5) {
            return Err(SimError::InvalidInput(format!(
                "Poisson's ratio must lie in (-1, 0.5), got {poisson}"
            )));
        }
        Self::new(
            rho0,
            youngs / (3.0 * (1.0 - 2.0 * poisson)),
            youngs / (2.0 * (1.0 + poisson)),
        )
    }

    pub fn sound_speed(&self) -> f64 {
        (self.bulk_modulus / self.rho0).sqrt()
    }
}

/// Internal plastic variables: inverse plastic right Cauchy-Green tensor
/// and the accumulated hardening variable.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticState<const D: usize> {
    pub plastic_inverse: Matrix<D>,
    pub hardening: f64,
}

impl<const D: usize> Default for PlasticState<D> {
    fn default() -> Self {
        Self {
            plastic_inverse: Matrix::identity(),
            hardening: 0.0,
        }
    }
}

/// `tau = shear_coefficient * elastic_left_cauchy_green + remaining`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StressDecomposition<const D: usize> {
    pub shear_coefficient: f64,
    pub elastic_left_cauchy_green: Matrix<D>,
    pub remaining: Matrix<D>,
}

impl<const D: usize> StressDecomposition<D> {
    pub fn kirchhoff(&self) -> Matrix<D> {
        self.elastic_left_cauchy_green * self.shear_coefficient + self.remaining
    }

    pub fn with_extra(mut self, extra: &Matrix<D>) -> Self {
        self.remaining += extra;
        self
    }
}

/// `det F`, or an inverted-element error (particle and time are filled in by
/// the caller).
pub(crate) fn jacobian<const D: usize>(f: &Matrix<D>) -> Result<f64> {
    let det = determinant(f);
    if det > 0.0 && det.is_finite() {
        Ok(det)
    } else {
        Err(SimError::InvertedElement {
            particle: 0,
            time: 0.0,
            det,
        })
    }
}

/// Neo-Hookean split built from a (possibly elastic-part) left Cauchy-Green
/// tensor `b` and the total volume ratio `J`.
pub(crate) fn neo_hookean_split<const D: usize>(
    b: Matrix<D>,
    j: f64,
    params: &ElasticParams,
) -> StressDecomposition<D> {
    let c = determinant(&b).powf(-1.0 / D as f64) * params.shear_modulus;
    let pressure_like = 0.5 * params.bulk_modulus * (j * j - 1.0) - c * b.trace() / D as f64;
    StressDecomposition {
        shear_coefficient: c,
        elastic_left_cauchy_green: b,
        remaining: Matrix::identity() * pressure_like,
    }
}

/// Compressible neo-Hookean stress
/// `tau = K/2 (J^2 - 1) I + G dev(J^{-2/d} F F^T)`, plus `damping` in the
/// remainder.
pub fn neo_hookean_stress<const D: usize>(
    f: &Matrix<D>,
    params: &ElasticParams,
    damping: &Matrix<D>,
) -> Result<StressDecomposition<D>> {
    let j = jacobian(f)?;
    Ok(neo_hookean_split(f * f.transpose(), j, params).with_extra(damping))
}

/// Strain energy density of the neo-Hookean model,
/// `K/2 [(J^2 - 1)/2 - ln J] + G/2 (tr(J^{-2/d} b) - d)`.
pub fn neo_hookean_energy<const D: usize>(f: &Matrix<D>, params: &ElasticParams) -> f64 {
    let j = determinant(f);
    let b = f * f.transpose();
    let d = D as f64;
    0.5 * params.bulk_modulus * (0.5 * (j * j - 1.0) - j.ln())
        + 0.5 * params.shear_modulus * (j.powf(-2.0 / d) * b.trace() - d)
}

/// Kelvin-Voigt damping `scale * (chi / 2) * (Fdot F^T + F Fdot^T)`.
pub fn damping_stress<const D: usize>(
    f: &Matrix<D>,
    f_rate: &Matrix<D>,
    viscosity_factor: f64,
    scale: f64,
) -> Matrix<D> {
    let product = f_rate * f.transpose();
    (product + product.transpose()) * (0.5 * scale * viscosity_factor)
}

/// Artificial viscosity factor `chi = rho c h / 2`.
pub fn viscosity_factor(rho: f64, sound_speed: f64, smoothing_length: f64) -> f64 {
    0.5 * rho * sound_speed * smoothing_length
}

/// Von Mises equivalent of a stress tensor, `sqrt(3/2) |dev(s)|`.
pub fn von_mises<const D: usize>(stress: &Matrix<D>) -> f64 {
    (1.5f64).sqrt() * deviator(stress).norm()
}

#[derive(Clone, Debug, PartialEq)]
pub enum MaterialModel {
    NeoHookean(ElasticParams),
    Plastic(PlasticParams),
    HolzapfelOgden(HolzapfelOgdenParams),
}

impl MaterialModel {
    pub fn reference_density(&self) -> f64 {
        match self {
            MaterialModel::NeoHookean(p) => p.rho0,
            MaterialModel::Plastic(p) => p.elastic.rho0,
            MaterialModel::HolzapfelOgden(p) => p.rho0,
        }
    }

    /// Small-strain bulk sound speed.
    pub fn sound_speed(&self) -> f64 {
        match self {
            MaterialModel::NeoHookean(p) => p.sound_speed(),
            MaterialModel::Plastic(p) => p.elastic.sound_speed(),
            MaterialModel::HolzapfelOgden(p) => p.sound_speed(),
        }
    }

    /// Wave speed at deformation `f` for the time step. Only the muscle
    /// model stiffens with strain; the others return [`Self::sound_speed`].
    pub fn wave_speed<const D: usize>(&self, f: &Matrix<D>) -> f64 {
        match self {
            MaterialModel::HolzapfelOgden(p) if D == 3 => {
                let f3 = nalgebra::Matrix3::from_fn(|r, c| f[(r, c)]);
                (p.current_modulus(&f3) / p.rho0).sqrt()
            }
            _ => self.sound_speed(),
        }
    }

    pub fn stiffens_with_strain(&self) -> bool {
        matches!(self, MaterialModel::HolzapfelOgden(_))
    }

    pub fn is_rate_dependent(&self) -> bool {
        matches!(
            self,
            MaterialModel::Plastic(PlasticParams {
                hardening: Hardening::HerschelBulkley { .. },
                ..
            })
        )
    }

    /// Stress split and updated internal state, excluding damping.
    ///
    /// `dt` only matters for rate-dependent plasticity and `potential` only
    /// for active muscle.
    pub fn evaluate<const D: usize>(
        &self,
        f: &Matrix<D>,
        state: &PlasticState<D>,
        dt: f64,
        potential: f64,
    ) -> Result<(StressDecomposition<D>, PlasticState<D>)> {
        match self {
            MaterialModel::NeoHookean(p) => Ok((neo_hookean_stress(f, p, &Matrix::zeros())?, *state)),
            MaterialModel::Plastic(p) if self.is_rate_dependent() => {
                herschel_bulkley_return_map(f, state, p, dt)
            }
            MaterialModel::Plastic(p) => plastic_return_map(f, state, p),
            MaterialModel::HolzapfelOgden(p) => {
                let mut split = holzapfel_ogden_stress(f, p, &Matrix::zeros())?;
                if potential != 0.0 {
                    split.remaining += active_stress(f, potential, p);
                }
                Ok((split, *state))
            }
        }
    }
}

#[cfg(test)]
pub(crate) mod test_support {
    use crate::tensor::determinant;
    use crate::Matrix;

    /// `(dW/dF) F^T` by central differences on each entry of `F`.
    pub fn kirchhoff_from_energy<const D: usize>(
        f: &Matrix<D>,
        energy: impl Fn(&Matrix<D>) -> f64,
        step: f64,
    ) -> Matrix<D> {
        let mut dwdf = Matrix::<D>::zeros();
        for r in 0..D {
            for c in 0..D {
                let mut plus = *f;
                let mut minus = *f;
                plus[(r, c)] += step;
                minus[(r, c)] -= step;
                dwdf[(r, c)] = (energy(&plus) - energy(&minus)) / (2.0 * step);
            }
        }
        dwdf * f.transpose()
    }

    /// Deformation gradient near identity with a positive determinant.
    pub fn perturbed<const D: usize>(entries: &[f64]) -> Matrix<D> {
        let mut f = Matrix::<D>::identity();
        for r in 0..D {
            for c in 0..D {
                f[(r, c)] += entries[r * D + c];
            }
        }
        assert!(determinant(&f) > 0.0);
        f
    }

    pub fn relative_error<const D: usize>(a: &Matrix<D>, b: &Matrix<D>) -> f64 {
        (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use nalgebra::{Matrix2, Matrix3};
    use proptest::prelude::*;

    fn steel() -> ElasticParams {
        ElasticParams::from_youngs(7800.0, 200e9, 0.3).unwrap()
    }

    #[test]
    fn conversion_from_youngs() {
        let p = ElasticParams::from_youngs(1000.0, 2.0e6, 0.3975).unwrap();
        assert!((p.bulk_modulus - 2.0e6 / (3.0 * (1.0 - 0.795))).abs() < 1e-6);
        assert!((p.shear_modulus - 2.0e6 / 2.795).abs() < 1e-6);
        assert!(ElasticParams::from_youngs(1.0, 1.0, 0.5).is_err());
        assert!(ElasticParams::new(1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn reference_state_is_stress_free() {
        let p = steel();
        let split = neo_hookean_stress(&Matrix2::identity(), &p, &Matrix2::zeros()).unwrap();
        assert_eq!(split.shear_coefficient, p.shear_modulus);
        assert_eq!(split.elastic_left_cauchy_green, Matrix2::identity());
        assert_eq!(split.remaining, -Matrix2::identity() * p.shear_modulus);
        assert!(split.kirchhoff().norm() < 1e-6 * p.shear_modulus);
    }

    #[test]
    fn small_strain_limit() {
        let p = steel();
        let eps = 1e-6;
        let f = Matrix3::from_diagonal(&nalgebra::Vector3::new(1.0 + eps, 1.0, 1.0));
        let tau = neo_hookean_stress(&f, &p, &Matrix3::zeros()).unwrap().kirchhoff();
        let lame = p.bulk_modulus - 2.0 * p.shear_modulus / 3.0;
        let strain = Matrix3::from_diagonal(&nalgebra::Vector3::new(eps, 0.0, 0.0));
        let linear = Matrix3::identity() * (lame * eps) + strain * (2.0 * p.shear_modulus);
        assert!(relative_error(&tau, &linear) < 1e-3);
    }

    #[test]
    fn inverted_deformation_rejected() {
        let f = Matrix2::new(-1.0, 0.0, 0.0, 1.0);
        assert!(matches!(
            neo_hookean_stress(&f, &steel(), &Matrix2::zeros()),
            Err(SimError::InvertedElement { .. })
        ));
    }

    #[test]
    fn damping_scaling() {
        let f = Matrix3::new(1.1, 0.2, 0.0, -0.1, 0.9, 0.05, 0.0, 0.3, 1.0);
        let rate = Matrix3::new(0.5, -1.0, 2.0, 0.3, 0.1, -0.4, 1.0, 0.0, 0.2);
        assert_eq!(damping_stress(&f, &Matrix3::zeros(), 3.0, 1.0), Matrix3::zeros());
        let full = damping_stress(&f, &rate, 3.0, 1.0);
        let reduced = damping_stress(&f, &rate, 3.0, 0.125);
        assert_eq!(reduced, full * 0.125);
        assert_eq!(full, full.transpose());
        assert_eq!(viscosity_factor(2.0, 3.0, 4.0), 12.0);
    }

    #[test]
    fn evaluate_dispatch() {
        let model = MaterialModel::NeoHookean(steel());
        let f = Matrix2::new(1.01, 0.02, 0.0, 0.99);
        let (split, state) = model.evaluate(&f, &PlasticState::default(), 1e-6, 0.0).unwrap();
        assert_eq!(state, PlasticState::default());
        assert_eq!(split, neo_hookean_stress(&f, &steel(), &Matrix2::zeros()).unwrap());
        assert_eq!(model.reference_density(), 7800.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn stress_is_energy_derivative_3d(entries in proptest::array::uniform9(-0.3f64..0.3)) {
            let f = perturbed::<3>(&entries);
            let p = ElasticParams::new(1.0, 3.0, 1.0).unwrap();
            let tau = neo_hookean_stress(&f, &p, &Matrix3::zeros()).unwrap().kirchhoff();
            let fd = kirchhoff_from_energy(&f, |g| neo_hookean_energy(g, &p), 1e-6);
            prop_assert!((tau - fd).norm() < 1e-5 * tau.norm().max(1.0));
        }

        #[test]
        fn stress_is_energy_derivative_2d(entries in proptest::array::uniform4(-0.3f64..0.3)) {
            let f = perturbed::<2>(&entries);
            let p = ElasticParams::new(1.0, 5.0, 2.0).unwrap();
            let tau = neo_hookean_stress(&f, &p, &Matrix2::zeros()).unwrap().kirchhoff();
            let fd = kirchhoff_from_energy(&f, |g| neo_hookean_energy(g, &p), 1e-6);
            prop_assert!((tau - fd).norm() < 1e-5 * tau.norm().max(1.0));
        }

        #[test]
        fn decomposition_reconstructs_full_stress(entries in proptest::array::uniform9(-0.4f64..0.4)) {
            let f = perturbed::<3>(&entries);
            let p = ElasticParams::new(1.0, 7.0, 1.5).unwrap();
            let split = neo_hookean_stress(&f, &p, &Matrix3::zeros()).unwrap();
            let j = determinant(&f);
            let bbar = f * f.transpose() * j.powf(-2.0 / 3.0);
            let direct = Matrix3::identity() * (0.5 * p.bulk_modulus * (j * j - 1.0))
                + deviator(&bbar) * p.shear_modulus;
            prop_assert!(relative_error(&split.kirchhoff(), &direct) < 1e-10);
        }

        #[test]
        fn deviator_trace_free(entries in proptest::array::uniform9(-1.0f64..1.0)) {
            let a = Matrix3::from_row_slice(&entries);
            let spd = a * a.transpose() + Matrix3::identity();
            let bbar = spd * determinant(&spd).powf(-1.0 / 3.0);
            prop_assert!(deviator(&bbar).trace().abs() <= 1e-12);
        }
    }
}
