//! Total-Lagrangian smoothed particle hydrodynamics for solid dynamics.
//!
//! All operators are evaluated in the reference configuration: neighborhoods,
//! kernel gradients and first-order correction matrices are built once at
//! `t = 0`. Shear forces are assembled with a bond-wise correction driven by
//! the mismatch between each initial bond direction and the direction
//! predicted by tracing the current bond back through the deformation
//! gradients of its two particles; this suppresses hourglass (zero-energy)
//! modes without tuning per material.
//!
//! The crate is organised bottom-up:
//!
//! * [`kernel`] – Wendland smoothing kernel.
//! * [`particles`] – particle storage, lattice generation, constraints.
//! * [`neighbors`] – reference-configuration bonds and correction matrices.
//! * [`materials`] – constitutive laws and plastic return mapping.
//! * [`solver`] – force assembly, time step control and integration.
//! * [`cases`] – benchmark scenarios, probes and reference values.
//! * [`io`] – run configuration, snapshots and probe output.

pub mod cases;
pub mod error;
pub mod io;
pub mod kernel;
pub mod materials;
pub mod neighbors;
pub mod particles;
pub mod solver;
pub mod tensor;

pub use error::{Result, SimError};
pub use kernel::KernelModel;
pub use materials::{MaterialModel, PlasticState, StressDecomposition};
pub use neighbors::{BondList, NeighborBond};
pub use particles::{Constraint, LatticeSpec, ParticleSet};
pub use solver::{HourglassParams, Simulation, StepControls};

/// Vector in `D` dimensions.
pub type Vector<const D: usize> = nalgebra::SVector<f64, D>;
/// Square `D x D` matrix.
pub type Matrix<const D: usize> = nalgebra::SMatrix<f64, D, D>;
