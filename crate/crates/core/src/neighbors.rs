//! Reference-configuration neighborhoods and first-order correction matrices.
//!
//! Bonds are found once with a uniform cell grid of width equal to the
//! kernel cutoff and never rebuilt.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::kernel::KernelModel;
use crate::particles::ParticleSet;
use crate::tensor::{determinant, inverse, outer, symmetrize};
use crate::{Matrix, Result, SimError, Vector};

/// Pair data frozen at `t = 0`, seen from particle `i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NeighborBond<const D: usize> {
    pub j: usize,
    /// Initial distance `|r0_i - r0_j|`.
    pub r0: f64,
    /// Initial unit vector from `j` towards `i`.
    pub e0: Vector<D>,
    /// Kernel value at `r0`.
    pub w0: f64,
    /// Kernel radial derivative at `r0`.
    pub dwdr0: f64,
    /// Initial volume of `j`.
    pub volume_j: f64,
}

impl<const D: usize> NeighborBond<D> {
    /// `grad_i W_ij` in the reference configuration.
    pub fn gradient(&self) -> Vector<D> {
        self.e0 * self.dwdr0
    }
}

/// Compressed per-particle bond lists, each sorted by neighbor index.
#[derive(Clone, Debug, Default)]
pub struct BondList<const D: usize> {
    offsets: Vec<usize>,
    bonds: Vec<NeighborBond<D>>,
}

impl<const D: usize> BondList<D> {
    pub fn of(&self, i: usize) -> &[NeighborBond<D>] {
        &self.bonds[self.offsets[i]..self.offsets[i + 1]]
    }

    pub fn particle_count(&self) -> usize {
        self.offsets.len().saturating_sub(1)
    }

    pub fn total(&self) -> usize {
        self.bonds.len()
    }
}

fn cell_of<const D: usize>(p: &Vector<D>, origin: &Vector<D>, width: f64) -> [i64; D] {
    let mut c = [0i64; D];
    for k in 0..D {
        c[k] = ((p[k] - origin[k]) / width).floor() as i64;
    }
    c
}

/// All `3^D` cell offsets in `{-1, 0, 1}^D`.
fn stencil<const D: usize>() -> Vec<[i64; D]> {
    let mut out = vec![[0i64; D]];
    for k in 0..D {
        out = out
            .into_iter()
            .flat_map(|base| {
                (-1..=1).map(move |s| {
                    let mut c = base;
                    c[k] = s;
                    c
                })
            })
            .collect();
    }
    out
}

/// Bonds between every pair with `0 < |r0_j - r0_i| < cutoff`.
pub fn build_neighborhoods<const D: usize>(
    set: &ParticleSet<D>,
    kernel: &KernelModel,
) -> Result<BondList<D>> {
    let n = set.len();
    let width = kernel.cutoff();
    let origin = set
        .r0
        .iter()
        .fold(Vector::<D>::repeat(f64::INFINITY), |acc, p| acc.inf(p));

    let mut cells: HashMap<[i64; D], Vec<usize>> = HashMap::new();
    for (i, p) in set.r0.iter().enumerate() {
        cells.entry(cell_of(p, &origin, width)).or_default().push(i);
    }
    let offsets_stencil = stencil::<D>();

    let per_particle: Vec<Result<Vec<NeighborBond<D>>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = set.r0[i];
            let home = cell_of(&pi, &origin, width);
            let mut found = Vec::new();
            for shift in &offsets_stencil {
                let mut key = home;
                for k in 0..D {
                    key[k] += shift[k];
                }
                let Some(members) = cells.get(&key) else { continue };
                for &j in members {
                    if j == i {
                        continue;
                    }
                    let delta = pi - set.r0[j];
                    let r = delta.norm();
                    if r == 0.0 {
                        return Err(SimError::DuplicatePosition {
                            first: i.min(j),
                            second: i.max(j),
                        });
                    }
                    if r < width {
                        found.push(NeighborBond {
                            j,
                            r0: r,
                            e0: delta / r,
                            w0: kernel.value(r),
                            dwdr0: kernel.radial_derivative(r),
                            volume_j: set.volume0[j],
                        });
                    }
                }
            }
            found.sort_unstable_by_key(|b| b.j);
            Ok(found)
        })
        .collect();

    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut bonds = Vec::new();
    for list in per_particle {
        bonds.extend(list?);
        offsets.push(bonds.len());
    }
    Ok(BondList { offsets, bonds })
}

/// Threshold on `|det M| / (tr M / D)^D` below which the correction moment
/// matrix is treated as singular.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;

/// `sum_j V_j (r0_j - r0_i) (x) grad_i W_ij` for particle `i`.
///
/// Every term is a multiple of `e0 (x) e0`, so the sum is symmetric in exact
/// arithmetic; it is symmetrized to keep that property bitwise.
pub fn moment_matrix<const D: usize>(set: &ParticleSet<D>, bonds: &BondList<D>, i: usize) -> Matrix<D> {
    let sum = bonds.of(i).iter().fold(Matrix::zeros(), |acc, b| {
        acc + outer(&(set.r0[b.j] - set.r0[i]), &b.gradient()) * b.volume_j
    });
    symmetrize(&sum)
}

/// Stores `B0_i = M_i^{-1}` on every particle.
pub fn compute_correction_matrices<const D: usize>(
    set: &mut ParticleSet<D>,
    bonds: &BondList<D>,
) -> Result<()> {
    let corrections: Vec<Result<Matrix<D>>> = (0..set.len())
        .into_par_iter()
        .map(|i| {
            let m = moment_matrix(set, bonds, i);
            let det = determinant(&m);
            let scale = (m.trace() / D as f64).powi(D as i32);
            if !(scale > 0.0) || det.abs() < SINGULARITY_THRESHOLD * scale {
                return Err(SimError::SingularCorrection { particle: i, det });
            }
            inverse(&m).ok_or(SimError::SingularCorrection { particle: i, det })
        })
        .collect();
    for (i, b) in corrections.into_iter().enumerate() {
        set.correction[i] = b?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::particles::{generate_lattice, ConstrainedLayers, Constraint, LatticeSpec, Shape, Side};
    use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
    use proptest::prelude::*;

    fn square(n: usize, dp: f64) -> (ParticleSet<2>, KernelModel) {
        let spec = LatticeSpec {
            shape: Shape::Box {
                lower: Vector2::zeros(),
                lengths: Vector2::repeat(n as f64 * dp),
            },
            dp,
            rho0: 1.0,
            constrained: vec![],
            taper: None,
        };
        (generate_lattice(&spec).unwrap(), KernelModel::new(dp, 2).unwrap())
    }

    fn cube(n: usize, dp: f64) -> (ParticleSet<3>, KernelModel) {
        let spec = LatticeSpec {
            shape: Shape::Box {
                lower: Vector3::zeros(),
                lengths: Vector3::repeat(n as f64 * dp),
            },
            dp,
            rho0: 1.0,
            constrained: vec![ConstrainedLayers {
                axis: 2,
                side: Side::Lower,
                layers: 2,
                constraint: Constraint::Clamped,
            }],
            taper: None,
        };
        (generate_lattice(&spec).unwrap(), KernelModel::new(dp, 3).unwrap())
    }

    /// Lattice offsets with `0 < |offset| < 2.3`, counted by enumeration.
    fn enumerate_offsets(dim: usize) -> usize {
        let range = -3i64..=3;
        let mut count = 0;
        for a in range.clone() {
            for b in range.clone() {
                let cs: Vec<i64> = if dim == 3 { range.clone().collect() } else { vec![0] };
                for c in cs {
                    let n2 = (a * a + b * b + c * c) as f64;
                    if n2 > 0.0 && n2.sqrt() < 2.3 {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    #[test]
    fn interior_neighbor_count() {
        let (set, kernel) = square(12, 0.01);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        let centre = set.nearest(&Vector2::new(0.065, 0.065)).unwrap();
        assert_eq!(enumerate_offsets(2), 20);
        assert_eq!(bonds.of(centre).len(), 20);
        let corner = set.nearest(&Vector2::zeros()).unwrap();
        assert!(bonds.of(corner).len() < 20);

        let (set3, kernel3) = cube(8, 0.1);
        let bonds3 = build_neighborhoods(&set3, &kernel3).unwrap();
        let centre3 = set3.nearest(&Vector3::new(0.45, 0.45, 0.45)).unwrap();
        assert_eq!(bonds3.of(centre3).len(), enumerate_offsets(3));
    }

    #[test]
    fn pair_at_cutoff_is_not_bonded() {
        let dp = 1.0;
        let kernel = KernelModel::new(dp, 2).unwrap();
        let mut set = ParticleSet::<2>::with_capacity(dp, 2);
        set.push(Vector2::zeros(), 1.0, 1.0, Constraint::Free, 0);
        set.push(Vector2::new(2.3 * dp, 0.0), 1.0, 1.0, Constraint::Free, 0);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        assert_eq!(bonds.total(), 0);
    }

    #[test]
    fn duplicate_positions_rejected() {
        let kernel = KernelModel::new(1.0, 2).unwrap();
        let mut set = ParticleSet::<2>::with_capacity(1.0, 2);
        set.push(Vector2::zeros(), 1.0, 1.0, Constraint::Free, 0);
        set.push(Vector2::zeros(), 1.0, 1.0, Constraint::Free, 0);
        assert!(matches!(
            build_neighborhoods(&set, &kernel),
            Err(SimError::DuplicatePosition { first: 0, second: 1 })
        ));
    }

    #[test]
    fn bonds_are_symmetric_and_sorted() {
        let (set, kernel) = square(6, 0.5);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        for i in 0..set.len() {
            let list = bonds.of(i);
            assert!(list.windows(2).all(|w| w[0].j < w[1].j));
            for b in list {
                assert!(b.r0 > 0.0 && b.r0 < kernel.cutoff());
                assert!((b.e0.norm() - 1.0).abs() < 1e-12);
                let back = bonds.of(b.j).iter().find(|c| c.j == i).expect("mirror bond");
                assert_eq!(back.r0, b.r0);
                assert_eq!(back.e0, -b.e0);
                assert_eq!(back.gradient(), -b.gradient());
            }
        }
    }

    #[test]
    fn correction_inverts_moment() {
        let (mut set, kernel) = square(10, 0.1);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        compute_correction_matrices(&mut set, &bonds).unwrap();
        for i in 0..set.len() {
            let product = set.correction[i] * moment_matrix(&set, &bonds, i);
            assert!((product - Matrix2::identity()).abs().max() < 1e-12);
        }
        let centre = set.nearest(&Vector2::new(0.5, 0.5)).unwrap();
        let b = set.correction[centre];
        assert_eq!(b, b.transpose());
        // Independent lattice sum over integer offsets, written against the
        // kernel formula directly (unit spacing, h = 1.15).
        let h = 1.15;
        let norm = 7.0 / (4.0 * std::f64::consts::PI * h * h);
        let mut diagonal = 0.0;
        for a in -3i32..=3 {
            for c in -3i32..=3 {
                let r = ((a * a + c * c) as f64).sqrt();
                if r > 0.0 && r < 2.3 {
                    let q = r / h;
                    let dwdr = -5.0 * q * (1.0 - 0.5 * q).powi(3) * norm / h;
                    diagonal += -(a * a) as f64 / r * dwdr;
                }
            }
        }
        let expected = 1.0 / diagonal;
        assert!((expected - 1.033_152_36).abs() < 1e-8);
        assert!((b[(0, 0)] - expected).abs() < 1e-12 && (b[(1, 1)] - expected).abs() < 1e-12, "{b}");
        assert!(b[(0, 1)].abs() < 1e-12);
        let corner = set.nearest(&Vector2::zeros()).unwrap();
        assert!((set.correction[corner] - Matrix2::identity()).abs().max() > 0.02);
    }

    #[test]
    fn interior_correction_near_identity_3d() {
        let (mut set, kernel) = cube(8, 0.1);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        compute_correction_matrices(&mut set, &bonds).unwrap();
        let centre = set.nearest(&Vector3::new(0.45, 0.45, 0.45)).unwrap();
        assert!((set.correction[centre] - Matrix3::identity()).abs().max() < 0.02);
    }

    #[test]
    fn isolated_particle_is_singular() {
        let kernel = KernelModel::new(1.0, 2).unwrap();
        let mut set = ParticleSet::<2>::with_capacity(1.0, 3);
        set.push(Vector2::zeros(), 1.0, 1.0, Constraint::Free, 0);
        set.push(Vector2::new(1.0, 0.0), 1.0, 1.0, Constraint::Free, 0);
        set.push(Vector2::new(50.0, 0.0), 1.0, 1.0, Constraint::Free, 0);
        let bonds = build_neighborhoods(&set, &kernel).unwrap();
        // A two-particle chain is rank deficient as well.
        let err = compute_correction_matrices(&mut set, &bonds).unwrap_err();
        assert!(matches!(err, SimError::SingularCorrection { particle: 0, .. }));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn affine_gradient_is_exact(entries in proptest::array::uniform6(-2.0f64..2.0)) {
            let a = Matrix2::new(entries[0], entries[1], entries[2], entries[3]);
            let shift = Vector2::new(entries[4], entries[5]);
            let (mut set, kernel) = square(7, 0.2);
            let bonds = build_neighborhoods(&set, &kernel).unwrap();
            compute_correction_matrices(&mut set, &bonds).unwrap();
            let field: Vec<Vector2<f64>> = set.r0.iter().map(|p| a * p + shift).collect();
            for i in 0..set.len() {
                let grad = bonds.of(i).iter().fold(Matrix2::zeros(), |acc, b| {
                    acc + outer(&(field[b.j] - field[i]), &b.gradient()) * b.volume_j
                }) * set.correction[i];
                prop_assert!((grad - a).abs().max() < 1e-10, "particle {}: {}", i, grad - a);
            }
        }

        #[test]
        fn affine_gradient_is_exact_3d(entries in proptest::array::uniform9(-1.0f64..1.0)) {
            let a = Matrix3::from_row_slice(&entries);
            let (mut set, kernel) = cube(4, 0.25);
            let bonds = build_neighborhoods(&set, &kernel).unwrap();
            compute_correction_matrices(&mut set, &bonds).unwrap();
            for i in 0..set.len() {
                let grad = bonds.of(i).iter().fold(Matrix3::zeros(), |acc, b| {
                    acc + outer(&(a * (set.r0[b.j] - set.r0[i])), &b.gradient()) * b.volume_j
                }) * set.correction[i];
                prop_assert!((grad - a).abs().max() < 1e-10);
            }
        }
    }
}
