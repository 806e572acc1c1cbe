//! Bond sums: accelerations, deformation-gradient rate and the time step.

use rayon::prelude::*;

use crate::materials::StressDecomposition;
use crate::neighbors::{BondList, NeighborBond};
use crate::particles::ParticleSet;
use crate::tensor::{inverse, outer};
use crate::{Matrix, Result, SimError, Vector};

use super::HourglassParams;

/// `e_hat = (F_i^-1 + F_j^-1)/2 * r_ij / r0_ij - e0_ij`: the mismatch between
/// the initial bond direction and the one traced back from the current bond.
pub fn discrepancy<const D: usize>(
    f_i: &Matrix<D>,
    f_j: &Matrix<D>,
    r_ij: &Vector<D>,
    r0_ij: f64,
    e0_ij: &Vector<D>,
) -> Result<Vector<D>> {
    let singular = || SimError::InvalidInput("singular deformation gradient in bond discrepancy".into());
    let inv_i = inverse(f_i).ok_or_else(singular)?;
    let inv_j = inverse(f_j).ok_or_else(singular)?;
    Ok(discrepancy_from_inverses(&inv_i, &inv_j, r_ij, r0_ij, e0_ij))
}

#[inline]
pub(crate) fn discrepancy_from_inverses<const D: usize>(
    inv_i: &Matrix<D>,
    inv_j: &Matrix<D>,
    r_ij: &Vector<D>,
    r0_ij: f64,
    e0_ij: &Vector<D>,
) -> Vector<D> {
    (inv_i + inv_j) * (r_ij * (0.5 / r0_ij)) - e0_ij
}

/// `phi = alpha * d * (W0_ij / W(0)) * min(max(|e_hat| - low, 0), span)`;
/// zero when the correction is disabled.
#[inline]
pub fn hourglass_coefficient(
    w0_ij: f64,
    w_at_zero: f64,
    e_hat_norm: f64,
    params: &HourglassParams,
    dimension: usize,
) -> f64 {
    if !params.enabled {
        return 0.0;
    }
    let limiter = (e_hat_norm - params.limiter_low).max(0.0).min(params.limiter_span);
    if limiter == 0.0 {
        return 0.0;
    }
    params.alpha * dimension as f64 * (w0_ij / w_at_zero) * limiter
}

/// Per-particle tensors shared by every bond of the particle.
#[derive(Clone, Copy, Debug)]
pub(crate) struct BondTerms<const D: usize> {
    pub deformation_inverse: Matrix<D>,
    /// `c b_e F^-T B0`.
    pub shear: Matrix<D>,
    /// `tau_r F^-T B0^T`.
    pub remaining: Matrix<D>,
}

pub(crate) fn bond_terms<const D: usize>(
    set: &ParticleSet<D>,
    decompositions: &[StressDecomposition<D>],
) -> Result<Vec<BondTerms<D>>> {
    (0..set.len())
        .into_par_iter()
        .map(|i| {
            let f_inv = inverse(&set.deformation[i]).ok_or(SimError::InvertedElement {
                particle: i,
                time: f64::NAN,
                det: 0.0,
            })?;
            let f_inv_t = f_inv.transpose();
            let split = &decompositions[i];
            let b0 = set.correction[i];
            Ok(BondTerms {
                deformation_inverse: f_inv,
                shear: split.elastic_left_cauchy_green * f_inv_t * b0 * split.shear_coefficient,
                remaining: split.remaining * f_inv_t * b0.transpose(),
            })
        })
        .collect()
}

/// Hourglass-corrected shear part of the acceleration.
pub fn shear_acceleration<const D: usize>(
    set: &ParticleSet<D>,
    bonds: &BondList<D>,
    decompositions: &[StressDecomposition<D>],
    hourglass: &HourglassParams,
    kernel_peak: f64,
) -> Result<Vec<Vector<D>>> {
    shear_acceleration_with_coefficient(set, bonds, decompositions, |bond, e_hat_norm| {
        hourglass_coefficient(bond.w0, kernel_peak, e_hat_norm, hourglass, D)
    })
}

/// Shear acceleration with a caller-supplied bond coefficient
/// `phi(bond, |e_hat|)`.
pub fn shear_acceleration_with_coefficient<const D: usize>(
    set: &ParticleSet<D>,
    bonds: &BondList<D>,
    decompositions: &[StressDecomposition<D>],
    coefficient: impl Fn(&NeighborBond<D>, f64) -> f64 + Sync,
) -> Result<Vec<Vector<D>>> {
    let terms = bond_terms(set, decompositions)?;
    Ok((0..set.len())
        .into_par_iter()
        .map(|i| {
            let ti = &terms[i];
            let mut acc = Vector::<D>::zeros();
            for b in bonds.of(i) {
                let tj = &terms[b.j];
                let e_hat = discrepancy_from_inverses(
                    &ti.deformation_inverse,
                    &tj.deformation_inverse,
                    &(set.pos[i] - set.pos[b.j]),
                    b.r0,
                    &b.e0,
                );
                let phi = coefficient(b, e_hat.norm());
                let direction = if phi != 0.0 { b.e0 + e_hat * phi } else { b.e0 };
                acc += (ti.shear + tj.shear) * direction * (b.dwdr0 * b.volume_j);
            }
            acc / set.rho0[i]
        })
        .collect())
}

/// Acceleration from the remaining stress `tau_r`.
pub fn remaining_acceleration<const D: usize>(
    set: &ParticleSet<D>,
    bonds: &BondList<D>,
    decompositions: &[StressDecomposition<D>],
) -> Result<Vec<Vector<D>>> {
    let terms = bond_terms(set, decompositions)?;
    Ok((0..set.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = Vector::<D>::zeros();
            for b in bonds.of(i) {
                acc += (terms[i].remaining + terms[b.j].remaining) * b.e0 * (b.dwdr0 * b.volume_j);
            }
            acc / set.rho0[i]
        })
        .collect())
}

/// Shear plus remaining acceleration in a single pass over the bonds.
pub(crate) fn total_acceleration<const D: usize>(
    set: &ParticleSet<D>,
    bonds: &BondList<D>,
    terms: &[BondTerms<D>],
    hourglass: &HourglassParams,
    kernel_peak: f64,
    out: &mut [Vector<D>],
) {
    out.par_iter_mut().enumerate().for_each(|(i, slot)| {
        let ti = &terms[i];
        let pi = set.pos[i];
        let mut acc = Vector::<D>::zeros();
        for b in bonds.of(i) {
            let tj = &terms[b.j];
            let mut direction = b.e0;
            if hourglass.enabled {
                let e_hat = discrepancy_from_inverses(
                    &ti.deformation_inverse,
                    &tj.deformation_inverse,
                    &(pi - set.pos[b.j]),
                    b.r0,
                    &b.e0,
                );
                let phi = hourglass_coefficient(b.w0, kernel_peak, e_hat.norm(), hourglass, D);
                if phi != 0.0 {
                    direction += e_hat * phi;
                }
            }
            acc += ((ti.shear + tj.shear) * direction + (ti.remaining + tj.remaining) * b.e0)
                * (b.dwdr0 * b.volume_j);
        }
        *slot = acc / set.rho0[i];
    });
}

/// `Fdot_i = [sum_j V_j (v_j - v_i) (x) grad W_ij] B0_i`.
pub fn deformation_rate<const D: usize>(set: &ParticleSet<D>, bonds: &BondList<D>) -> Vec<Matrix<D>> {
    let mut out = vec![Matrix::<D>::zeros(); set.len()];
    deformation_rate_into(set, bonds, &mut out);
    out
}

pub(crate) fn deformation_rate_into<const D: usize>(
    set: &ParticleSet<D>,
    bonds: &BondList<D>,
    out: &mut [Matrix<D>],
) {
    out.par_iter_mut().enumerate().for_each(|(i, slot)| {
        let vi = set.vel[i];
        let mut sum = Matrix::<D>::zeros();
        for b in bonds.of(i) {
            sum += outer(&(set.vel[b.j] - vi), &b.e0) * (b.dwdr0 * b.volume_j);
        }
        *slot = sum * set.correction[i];
    });
}

/// `cfl * min_i min(h / (c_i + |v_i|), sqrt(h / |a_i|))`; the acceleration
/// candidate only for free particles with non-zero acceleration.
pub fn compute_timestep<const D: usize>(
    set: &ParticleSet<D>,
    sound_speeds: &[f64],
    smoothing_length: f64,
    cfl: f64,
) -> Result<f64> {
    let candidates: Vec<(usize, f64)> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let speed = set.vel[i].norm();
            let mut dt = smoothing_length / (sound_speeds[i] + speed);
            if set.constraint[i].is_free() {
                let acc = set.acc[i].norm();
                if acc > 0.0 || !acc.is_finite() {
                    dt = dt.min((smoothing_length / acc).sqrt());
                }
                if !acc.is_finite() {
                    dt = f64::NAN;
                }
            }
            if !speed.is_finite() {
                dt = f64::NAN;
            }
            (i, dt)
        })
        .collect();
    let mut best = f64::INFINITY;
    for (i, dt) in candidates {
        if !dt.is_finite() {
            return Err(SimError::Divergence {
                particle: i,
                time: f64::NAN,
                reason: "non-finite velocity or acceleration".into(),
            });
        }
        best = best.min(dt);
    }
    Ok(cfl * best)
}
