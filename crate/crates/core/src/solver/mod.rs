//! Force assembly and position-based Verlet integration.

mod assembly;

pub use assembly::{
    compute_timestep, deformation_rate, discrepancy, hourglass_coefficient, remaining_acceleration,
    shear_acceleration, shear_acceleration_with_coefficient,
};

use rayon::prelude::*;

use crate::kernel::KernelModel;
use crate::materials::{damping_stress, viscosity_factor, MaterialModel, StressDecomposition};
use crate::neighbors::{build_neighborhoods, compute_correction_matrices, BondList};
use crate::particles::{Constraint, ParticleSet};
use crate::tensor::determinant;
use crate::{Matrix, Result, SimError, Vector};

use assembly::{bond_terms, deformation_rate_into, total_acceleration};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HourglassParams {
    pub alpha: f64,
    pub limiter_low: f64,
    pub limiter_span: f64,
    pub enabled: bool,
}

impl Default for HourglassParams {
    fn default() -> Self {
        Self {
            alpha: 8.0,
            limiter_low: 0.05,
            limiter_span: 1.0,
            enabled: true,
        }
    }
}

impl HourglassParams {
    pub fn disabled() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepControls {
    pub cfl: f64,
    pub damping_scale: f64,
    pub end_time: f64,
    pub output_interval: f64,
}

impl Default for StepControls {
    fn default() -> Self {
        Self {
            cfl: 0.6,
            damping_scale: 1.0,
            end_time: 1.0,
            output_interval: 0.01,
        }
    }
}

impl StepControls {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SimError::InvalidInput(format!("CFL number must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.damping_scale >= 0.0 && self.end_time >= 0.0 && self.output_interval > 0.0) {
            return Err(SimError::InvalidInput("invalid step controls".into()));
        }
        Ok(())
    }
}

/// Rigid frictionless plane `x[axis] >= level` for free particle centres.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wall {
    pub axis: usize,
    pub level: f64,
}

/// Speed limit for the divergence guard, as a multiple of the larger of the
/// initial peak speed and the peak sound speed.
pub const DIVERGENCE_FACTOR: f64 = 100.0;

pub struct Simulation<const D: usize> {
    pub particles: ParticleSet<D>,
    pub materials: Vec<MaterialModel>,
    pub hourglass: HourglassParams,
    pub controls: StepControls,
    pub wall: Option<Wall>,
    /// Uniform body acceleration added to free particles.
    pub body_acceleration: Option<Vector<D>>,
    kernel: KernelModel,
    bonds: BondList<D>,
    sound_speed: Vec<f64>,
    viscosity: Vec<f64>,
    decompositions: Vec<StressDecomposition<D>>,
    speed_limit: f64,
    time: f64,
    steps: u64,
}

impl<const D: usize> Simulation<D> {
    /// Builds neighborhoods and correction matrices and evaluates the initial
    /// deformation rate from the initial velocities.
    pub fn new(
        mut particles: ParticleSet<D>,
        materials: Vec<MaterialModel>,
        hourglass: HourglassParams,
        controls: StepControls,
    ) -> Result<Self> {
        controls.validate()?;
        if particles.is_empty() {
            return Err(SimError::EmptyGeometry);
        }
        if let Some(&m) = particles.material.iter().find(|&&m| m >= materials.len()) {
            return Err(SimError::InvalidInput(format!("particle refers to missing material {m}")));
        }
        let kernel = KernelModel::new(particles.dp, D)?;
        let bonds = build_neighborhoods(&particles, &kernel)?;
        compute_correction_matrices(&mut particles, &bonds)?;

        let h = kernel.smoothing_length();
        let sound_speed: Vec<f64> = particles.material.iter().map(|&m| materials[m].sound_speed()).collect();
        let viscosity = (0..particles.len())
            .map(|i| viscosity_factor(particles.rho0[i], sound_speed[i], h))
            .collect();
        let peak_speed = particles.vel.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let peak_sound = sound_speed.iter().copied().fold(0.0, f64::max);
        let speed_limit = DIVERGENCE_FACTOR * peak_speed.max(peak_sound);

        let mut sim = Self {
            decompositions: vec![
                StressDecomposition {
                    shear_coefficient: 0.0,
                    elastic_left_cauchy_green: Matrix::identity(),
                    remaining: Matrix::zeros(),
                };
                particles.len()
            ],
            particles,
            materials,
            hourglass,
            controls,
            wall: None,
            body_acceleration: None,
            kernel,
            bonds,
            sound_speed,
            viscosity,
            speed_limit,
            time: 0.0,
            steps: 0,
        };
        let mut rate = std::mem::take(&mut sim.particles.deformation_rate);
        deformation_rate_into(&sim.particles, &sim.bonds, &mut rate);
        sim.particles.deformation_rate = rate;
        Ok(sim)
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn kernel(&self) -> &KernelModel {
        &self.kernel
    }

    pub fn bonds(&self) -> &BondList<D> {
        &self.bonds
    }

    pub fn decompositions(&self) -> &[StressDecomposition<D>] {
        &self.decompositions
    }

    pub fn total_momentum(&self) -> Vector<D> {
        (0..self.particles.len()).fold(Vector::zeros(), |acc, i| acc + self.particles.vel[i] * self.particles.mass(i))
    }

    pub fn kinetic_energy(&self) -> f64 {
        (0..self.particles.len())
            .map(|i| 0.5 * self.particles.mass(i) * self.particles.vel[i].norm_squared())
            .sum()
    }

    /// Time step for the next step, from the current velocities and the
    /// previous step's accelerations.
    pub fn next_timestep(&self) -> Result<f64> {
        compute_timestep(
            &self.particles,
            &self.sound_speed,
            self.kernel.smoothing_length(),
            self.controls.cfl,
        )
        .map_err(|e| self.stamp(e))
    }

    fn stamp(&self, err: SimError) -> SimError {
        match err {
            SimError::InvertedElement { particle, det, .. } => SimError::InvertedElement {
                particle,
                time: self.time,
                det,
            },
            SimError::Divergence { particle, reason, .. } => SimError::Divergence {
                particle,
                time: self.time,
                reason,
            },
            other => other,
        }
    }

    /// Advances one step with the CFL time step.
    pub fn step(&mut self) -> Result<f64> {
        let dt = self.next_timestep()?;
        self.step_with(dt)?;
        Ok(dt)
    }

    /// Advances one step of length `dt`.
    pub fn step_with(&mut self, dt: f64) -> Result<()> {
        let t_start = self.time;
        self.half_kick(dt, t_start);
        self.check_jacobians(t_start + 0.5 * dt)?;
        self.evaluate_stress(dt).map_err(|e| self.stamp_at(e, t_start + 0.5 * dt))?;
        self.assemble_accelerations().map_err(|e| self.stamp_at(e, t_start + 0.5 * dt))?;
        self.update_velocities(dt, t_start + dt);

        let mut rate = std::mem::take(&mut self.particles.deformation_rate);
        deformation_rate_into(&self.particles, &self.bonds, &mut rate);
        self.particles.deformation_rate = rate;

        self.half_kick(dt, t_start + dt);
        self.time = t_start + dt;
        self.steps += 1;
        self.check_jacobians(self.time)?;
        self.check_speeds()
    }

    fn stamp_at(&self, err: SimError, time: f64) -> SimError {
        match self.stamp(err) {
            SimError::InvertedElement { particle, det, .. } => SimError::InvertedElement { particle, time, det },
            SimError::Divergence { particle, reason, .. } => SimError::Divergence { particle, time, reason },
            other => other,
        }
    }

    /// `F += dt/2 Fdot`, `rho = rho0 / J` and positions advanced by half a
    /// step with the current velocities.
    fn half_kick(&mut self, dt: f64, t_velocity: f64) {
        let half = 0.5 * dt;
        let wall = self.wall;
        let p = &mut self.particles;
        let rates = &p.deformation_rate;
        p.deformation
            .par_iter_mut()
            .zip(p.rho.par_iter_mut())
            .enumerate()
            .for_each(|(i, (f, rho))| {
                *f += rates[i] * half;
                *rho = p.rho0[i] / determinant(f);
            });
        let constraint = &p.constraint;
        let vel = &mut p.vel;
        p.pos
            .par_iter_mut()
            .zip(vel.par_iter_mut())
            .enumerate()
            .for_each(|(i, (x, v))| match constraint[i] {
                Constraint::Free => {
                    *x += *v * half;
                    if let Some(w) = wall {
                        if x[w.axis] < w.level {
                            x[w.axis] = w.level;
                            if v[w.axis] < 0.0 {
                                v[w.axis] = 0.0;
                            }
                        }
                    }
                }
                Constraint::Prescribed(ramp) => *x += ramp.velocity(t_velocity) * half,
                Constraint::Clamped => {}
            });
    }

    /// Lowest-index particle with a non-positive (or non-finite) `det F`.
    fn check_jacobians(&self, time: f64) -> Result<()> {
        for (i, f) in self.particles.deformation.iter().enumerate() {
            let det = determinant(f);
            if !(det > 0.0 && det.is_finite()) {
                return Err(SimError::InvertedElement { particle: i, time, det });
            }
        }
        Ok(())
    }

    fn evaluate_stress(&mut self, dt: f64) -> Result<()> {
        let p = &mut self.particles;
        let materials = &self.materials;
        let viscosity = &self.viscosity;
        let scale = self.controls.damping_scale;
        let (deformation, rates, potential, material) = (&p.deformation, &p.deformation_rate, &p.potential, &p.material);
        let results: Vec<Result<()>> = self
            .decompositions
            .par_iter_mut()
            .zip(p.plastic.par_iter_mut())
            .zip(p.stress.par_iter_mut())
            .enumerate()
            .map(|(i, ((split, state), stress))| {
                let f = &deformation[i];
                let (mut out, new_state) = materials[material[i]]
                    .evaluate(f, state, dt, potential[i])
                    .map_err(|e| relabel(e, i))?;
                if scale > 0.0 {
                    out.remaining += damping_stress(f, &rates[i], viscosity[i], scale);
                }
                *split = out;
                *state = new_state;
                *stress = out.kirchhoff();
                Ok(())
            })
            .collect();
        results.into_iter().collect::<Result<()>>()?;
        if self.materials.iter().any(MaterialModel::stiffens_with_strain) {
            let p = &self.particles;
            let materials = &self.materials;
            self.sound_speed
                .par_iter_mut()
                .enumerate()
                .for_each(|(i, c)| *c = materials[p.material[i]].wave_speed(&p.deformation[i]));
        }
        Ok(())
    }

    fn assemble_accelerations(&mut self) -> Result<()> {
        let terms = bond_terms(&self.particles, &self.decompositions)?;
        let mut acc = std::mem::take(&mut self.particles.acc);
        total_acceleration(
            &self.particles,
            &self.bonds,
            &terms,
            &self.hourglass,
            self.kernel.peak(),
            &mut acc,
        );
        self.particles.acc = acc;
        Ok(())
    }

    fn update_velocities(&mut self, dt: f64, t_end: f64) {
        let body = self.body_acceleration;
        let wall = self.wall;
        let p = &mut self.particles;
        let (acc, pos, constraint) = (&p.acc, &p.pos, &p.constraint);
        p.vel.par_iter_mut().enumerate().for_each(|(i, v)| match constraint[i] {
            Constraint::Free => {
                *v += (acc[i] + body.unwrap_or_else(Vector::zeros)) * dt;
                if let Some(w) = wall {
                    if pos[i][w.axis] <= w.level && v[w.axis] < 0.0 {
                        v[w.axis] = 0.0;
                    }
                }
            }
            Constraint::Prescribed(ramp) => *v = ramp.velocity(t_end),
            Constraint::Clamped => *v = Vector::zeros(),
        });
    }

    fn check_speeds(&self) -> Result<()> {
        for (i, v) in self.particles.vel.iter().enumerate() {
            let speed = v.norm();
            if !speed.is_finite() || speed > self.speed_limit {
                return Err(SimError::Divergence {
                    particle: i,
                    time: self.time,
                    reason: format!("speed {speed:e} exceeds limit {:e}", self.speed_limit),
                });
            }
        }
        Ok(())
    }
}

fn relabel(err: SimError, particle: usize) -> SimError {
    match err {
        SimError::InvertedElement { det, time, .. } => SimError::InvertedElement { particle, time, det },
        SimError::Divergence { time, reason, .. } => SimError::Divergence { particle, time, reason },
        other => other,
    }
}
