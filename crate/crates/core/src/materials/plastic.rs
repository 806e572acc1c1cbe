//! Finite-strain J2 plasticity by radial return on the isochoric elastic
//! left Cauchy-Green tensor.

use super::{jacobian, neo_hookean_split, ElasticParams, PlasticState, StressDecomposition};
use crate::tensor::{determinant, deviator, inverse, symmetrize};
use crate::{Matrix, Result, SimError};

const SQRT_2_3: f64 = 0.816_496_580_927_726;

/// Relative tolerance of the nonlinear consistency solve.
const NEWTON_TOLERANCE: f64 = 1e-10;
const NEWTON_MAX_ITERATIONS: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Hardening {
    Perfect,
    /// Flow stress `yield + modulus * xi`.
    Linear { modulus: f64 },
    /// Flow stress
    /// `yield + linear_modulus * xi + (saturation - yield)(1 - exp(-exponent * xi))`.
    Saturation {
        saturation_stress: f64,
        exponent: f64,
        linear_modulus: f64,
    },
    /// Rate-dependent flow driven by the overstress above a fixed yield
    /// stress, `d(increment)/dt = (overstress / viscosity)^(1/power)`.
    HerschelBulkley { viscosity: f64, power: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlasticParams {
    pub elastic: ElasticParams,
    pub yield_stress: f64,
    pub hardening: Hardening,
}

impl PlasticParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(SimError::InvalidInput(format!("plastic parameter {what} out of range")));
        if !(self.yield_stress >= 0.0) {
            return bad("yield stress");
        }
        match self.hardening {
            Hardening::Perfect => {}
            Hardening::Linear { modulus } if !(modulus >= 0.0) => return bad("hardening modulus"),
            Hardening::Saturation {
                saturation_stress,
                exponent,
                linear_modulus,
            } if !(saturation_stress >= self.yield_stress && exponent >= 0.0 && linear_modulus >= 0.0) => {
                return bad("saturation law")
            }
            Hardening::HerschelBulkley { viscosity, power } if !(viscosity > 0.0 && power > 0.0) => {
                return bad("viscosity or power")
            }
            _ => {}
        }
        Ok(())
    }

    /// Current flow stress for hardening variable `xi`.
    pub fn flow_stress(&self, xi: f64) -> f64 {
        match self.hardening {
            Hardening::Perfect | Hardening::HerschelBulkley { .. } => self.yield_stress,
            Hardening::Linear { modulus } => self.yield_stress + modulus * xi,
            Hardening::Saturation {
                saturation_stress,
                exponent,
                linear_modulus,
            } => {
                self.yield_stress
                    + linear_modulus * xi
                    + (saturation_stress - self.yield_stress) * (1.0 - (-exponent * xi).exp())
            }
        }
    }

    fn flow_slope(&self, xi: f64) -> f64 {
        match self.hardening {
            Hardening::Perfect | Hardening::HerschelBulkley { .. } => 0.0,
            Hardening::Linear { modulus } => modulus,
            Hardening::Saturation {
                saturation_stress,
                exponent,
                linear_modulus,
            } => linear_modulus + (saturation_stress - self.yield_stress) * exponent * (-exponent * xi).exp(),
        }
    }
}

/// `|tau_dev| - sqrt(2/3) * flow_stress(xi)`.
pub fn yield_function<const D: usize>(deviatoric_stress: &Matrix<D>, xi: f64, params: &PlasticParams) -> f64 {
    deviatoric_stress.norm() - SQRT_2_3 * params.flow_stress(xi)
}

/// Full outcome of one return-mapping call.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReturnMapping<const D: usize> {
    pub decomposition: StressDecomposition<D>,
    pub state: PlasticState<D>,
    /// Deviatoric stress after the return, `G dev(bbar_e)` on the elastic
    /// branch.
    pub deviatoric_stress: Matrix<D>,
    /// Plastic multiplier; the hardening variable grows by `sqrt(2/3)` times
    /// this.
    pub increment: f64,
}

/// Plastic multiplier for rate-independent hardening, solving
/// `overstress(increment) = 0` where the deviatoric norm shrinks by
/// `2 G~ increment`.
fn rate_independent_increment(
    norm: f64,
    trial_yield: f64,
    xi: f64,
    g_tilde: f64,
    params: &PlasticParams,
) -> Result<f64> {
    match params.hardening {
        Hardening::Perfect => Ok(0.5 * trial_yield / g_tilde),
        Hardening::Linear { modulus } => Ok(0.5 * trial_yield / (g_tilde + modulus / 3.0)),
        Hardening::Saturation { .. } => {
            let tolerance = NEWTON_TOLERANCE * params.yield_stress.max(f64::MIN_POSITIVE);
            let mut increment = 0.0;
            for _ in 0..NEWTON_MAX_ITERATIONS {
                let xi_new = xi + SQRT_2_3 * increment;
                let residual = norm - 2.0 * g_tilde * increment - SQRT_2_3 * params.flow_stress(xi_new);
                if residual.abs() <= tolerance {
                    return Ok(increment);
                }
                let slope = -2.0 * g_tilde - 2.0 / 3.0 * params.flow_slope(xi_new);
                increment -= residual / slope;
            }
            Err(SimError::Divergence {
                particle: 0,
                time: 0.0,
                reason: "hardening consistency solve did not converge".into(),
            })
        }
        Hardening::HerschelBulkley { .. } => unreachable!("rate-dependent flow handled separately"),
    }
}

/// Exact integration over `dt` of `d(increment)/ds = (y / viscosity)^(1/power)`
/// with overstress `y = overstress - 2 G~ increment`; flow stops once `y`
/// reaches zero.
pub(crate) fn viscous_increment(overstress: f64, g_tilde: f64, viscosity: f64, power: f64, dt: f64) -> f64 {
    let rate = 2.0 * g_tilde * viscosity.powf(-1.0 / power);
    let remaining = if (power - 1.0).abs() < 1e-12 {
        overstress * (-2.0 * g_tilde * dt / viscosity).exp()
    } else {
        let m = (power - 1.0) / power;
        let base = overstress.powf(m) - m * rate * dt;
        if base <= 0.0 {
            0.0
        } else {
            base.powf(1.0 / m)
        }
    };
    (overstress - remaining.clamp(0.0, overstress)) / (2.0 * g_tilde)
}

/// Radial return for every hardening law. `dt` is used by the rate-dependent
/// law only.
pub fn return_mapping<const D: usize>(
    f: &Matrix<D>,
    state: &PlasticState<D>,
    params: &PlasticParams,
    dt: f64,
) -> Result<ReturnMapping<D>> {
    let j = jacobian(f)?;
    let d = D as f64;
    let be_trial = f * state.plastic_inverse * f.transpose();
    let det_be = determinant(&be_trial);
    if !(det_be > 0.0) {
        return Err(SimError::InvertedElement {
            particle: 0,
            time: 0.0,
            det: det_be,
        });
    }
    let iso = det_be.powf(-1.0 / d);
    let bbar = be_trial * iso;
    let g = params.elastic.shear_modulus;
    let trial = deviator(&bbar) * g;
    let norm = trial.norm();
    let trial_yield = norm - SQRT_2_3 * params.flow_stress(state.hardening);

    if trial_yield <= 0.0 {
        return Ok(ReturnMapping {
            decomposition: neo_hookean_split(be_trial, j, &params.elastic),
            state: *state,
            deviatoric_stress: trial,
            increment: 0.0,
        });
    }
    assert!(norm > 0.0, "positive overstress with zero deviatoric stress");

    let mean = bbar.trace() / d;
    let g_tilde = mean * g;
    let increment = match params.hardening {
        Hardening::HerschelBulkley { viscosity, power } => {
            if !(dt >= 0.0) {
                return Err(SimError::InvalidInput("rate-dependent plasticity needs dt >= 0".into()));
            }
            viscous_increment(trial_yield, g_tilde, viscosity, power, dt)
        }
        _ => rate_independent_increment(norm, trial_yield, state.hardening, g_tilde, params)?,
    };

    let returned = trial * (1.0 - 2.0 * g_tilde * increment / norm);
    let bbar_new = returned / g + Matrix::<D>::identity() * mean;
    let be_new = bbar_new / iso;
    let f_inv = inverse(f).expect("positive determinant");
    let plastic_inverse = symmetrize(&(f_inv * be_new * f_inv.transpose()));

    Ok(ReturnMapping {
        decomposition: neo_hookean_split(be_new, j, &params.elastic),
        state: PlasticState {
            plastic_inverse,
            hardening: state.hardening + SQRT_2_3 * increment,
        },
        deviatoric_stress: returned,
        increment,
    })
}

/// Rate-independent return mapping (perfect, linear or saturation
/// hardening).
pub fn plastic_return_map<const D: usize>(
    f: &Matrix<D>,
    state: &PlasticState<D>,
    params: &PlasticParams,
) -> Result<(StressDecomposition<D>, PlasticState<D>)> {
    if matches!(params.hardening, Hardening::HerschelBulkley { .. }) {
        return Err(SimError::InvalidInput("viscoplastic flow needs a time step".into()));
    }
    let out = return_mapping(f, state, params, 0.0)?;
    Ok((out.decomposition, out.state))
}

/// Herschel-Bulkley viscoplastic return over a step of length `dt`.
pub fn herschel_bulkley_return_map<const D: usize>(
    f: &Matrix<D>,
    state: &PlasticState<D>,
    params: &PlasticParams,
    dt: f64,
) -> Result<(StressDecomposition<D>, PlasticState<D>)> {
    if !matches!(params.hardening, Hardening::HerschelBulkley { .. }) {
        return Err(SimError::InvalidInput("parameters are not viscoplastic".into()));
    }
    let out = return_mapping(f, state, params, dt)?;
    Ok((out.decomposition, out.state))
}
