//! Particle storage, lattice generation and constraint bookkeeping.

use crate::materials::PlasticState;
use crate::{Matrix, Result, SimError, Vector};

/// How a particle's kinematics are updated by the integrator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Constraint<const D: usize> {
    Free,
    /// Position and velocity never change.
    Clamped,
    /// Velocity is imposed; position integrates the imposed velocity.
    Prescribed(VelocityRamp<D>),
}

impl<const D: usize> Constraint<D> {
    pub fn is_free(&self) -> bool {
        matches!(self, Constraint::Free)
    }
}

/// Velocity growing linearly from zero to `final_velocity` over `duration`,
/// then held.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VelocityRamp<const D: usize> {
    pub final_velocity: Vector<D>,
    pub duration: f64,
}

impl<const D: usize> VelocityRamp<D> {
    pub fn velocity(&self, t: f64) -> Vector<D> {
        if self.duration <= 0.0 {
            return self.final_velocity;
        }
        self.final_velocity * (t / self.duration).clamp(0.0, 1.0)
    }

    /// Displacement accumulated at time `t`.
    pub fn displacement(&self, t: f64) -> Vector<D> {
        if self.duration <= 0.0 {
            return self.final_velocity * t;
        }
        let ramp = t.min(self.duration);
        let held = (t - self.duration).max(0.0);
        self.final_velocity * (0.5 * ramp * ramp / self.duration + held)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape<const D: usize> {
    /// Axis-aligned box with corner `lower`.
    Box {
        lower: Vector<D>,
        lengths: Vector<D>,
    },
    /// Circular cylinder whose axis runs along `axis` through `center`,
    /// starting at `center[axis]` and extending by `length`.
    Cylinder {
        center: Vector<D>,
        radius: f64,
        length: f64,
        axis: usize,
    },
}

impl<const D: usize> Shape<D> {
    /// Lower corner and extent of the bounding box.
    fn bounds(&self) -> (Vector<D>, Vector<D>) {
        match *self {
            Shape::Box { lower, lengths } => (lower, lengths),
            Shape::Cylinder {
                center,
                radius,
                length,
                axis,
            } => {
                let mut lower = center.add_scalar(-radius);
                let mut lengths = Vector::<D>::repeat(2.0 * radius);
                lower[axis] = center[axis];
                lengths[axis] = length;
                (lower, lengths)
            }
        }
    }

    /// Cross-section test ignoring the coordinate along `skip_axis`.
    fn contains_transverse(&self, p: &Vector<D>, skip_axis: usize) -> bool {
        match *self {
            Shape::Box { lower, lengths } => (0..D)
                .filter(|&k| k != skip_axis)
                .all(|k| p[k] >= lower[k] && p[k] <= lower[k] + lengths[k]),
            Shape::Cylinder {
                center,
                radius,
                axis,
                length,
            } => {
                let radial = radial_distance(p, &center, axis);
                let along_ok =
                    skip_axis == axis || (p[axis] >= center[axis] && p[axis] <= center[axis] + length);
                radial <= radius * (1.0 + 1e-12) && along_ok
            }
        }
    }
}

/// Distance from `p` to the line through `center` along `axis`.
pub fn radial_distance<const D: usize>(p: &Vector<D>, center: &Vector<D>, axis: usize) -> f64 {
    (0..D)
        .filter(|&k| k != axis)
        .map(|k| (p[k] - center[k]).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Extra lattice layers beyond one face of the shape, carrying a constraint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstrainedLayers<const D: usize> {
    pub axis: usize,
    pub side: Side,
    pub layers: usize,
    pub constraint: Constraint<D>,
}

/// Smooth reduction of the extent along `scaled_axis`: the scale factor is
/// `1 - depth * (1 - |x - center| / half_span)` along `along_axis`, clamped
/// to 1 outside the span. Coordinates are scaled about `pivot`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Taper {
    pub along_axis: usize,
    pub scaled_axis: usize,
    pub center: f64,
    pub half_span: f64,
    pub pivot: f64,
    pub depth: f64,
}

impl Taper {
    pub fn factor(&self, along: f64) -> f64 {
        let distance = ((along - self.center).abs() / self.half_span).min(1.0);
        1.0 - self.depth * (1.0 - distance)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LatticeSpec<const D: usize> {
    pub shape: Shape<D>,
    pub dp: f64,
    pub rho0: f64,
    pub constrained: Vec<ConstrainedLayers<D>>,
    pub taper: Option<Taper>,
}

/// Tag of the particles belonging to the core shape; constrained layers get
/// `1 + index` into [`LatticeSpec::constrained`].
pub const BODY_REGION: usize = 0;

/// Number of lattice centres `(i + 1/2) dp` that fit in `[0, length]`.
fn lattice_count(length: f64, dp: f64) -> usize {
    let ratio = length / dp;
    if ratio < 0.5 - 1e-9 {
        0
    } else {
        ((ratio - 0.5 + 1e-9).floor() as usize) + 1
    }
}

/// Structure-of-arrays particle container.
#[derive(Clone, Debug)]
pub struct ParticleSet<const D: usize> {
    pub dp: f64,
    pub r0: Vec<Vector<D>>,
    pub pos: Vec<Vector<D>>,
    pub vel: Vec<Vector<D>>,
    pub acc: Vec<Vector<D>>,
    pub deformation: Vec<Matrix<D>>,
    pub deformation_rate: Vec<Matrix<D>>,
    pub rho0: Vec<f64>,
    pub rho: Vec<f64>,
    pub volume0: Vec<f64>,
    pub correction: Vec<Matrix<D>>,
    pub constraint: Vec<Constraint<D>>,
    pub region: Vec<usize>,
    pub material: Vec<usize>,
    pub plastic: Vec<PlasticState<D>>,
    /// Imposed transmembrane potential driving active stress (mV).
    pub potential: Vec<f64>,
    /// Kirchhoff stress from the latest constitutive evaluation.
    pub stress: Vec<Matrix<D>>,
}

impl<const D: usize> ParticleSet<D> {
    pub fn with_capacity(dp: f64, n: usize) -> Self {
        Self {
            dp,
            r0: Vec::with_capacity(n),
            pos: Vec::with_capacity(n),
            vel: Vec::with_capacity(n),
            acc: Vec::with_capacity(n),
            deformation: Vec::with_capacity(n),
            deformation_rate: Vec::with_capacity(n),
            rho0: Vec::with_capacity(n),
            rho: Vec::with_capacity(n),
            volume0: Vec::with_capacity(n),
            correction: Vec::with_capacity(n),
            constraint: Vec::with_capacity(n),
            region: Vec::with_capacity(n),
            material: Vec::with_capacity(n),
            plastic: Vec::with_capacity(n),
            potential: Vec::with_capacity(n),
            stress: Vec::with_capacity(n),
        }
    }

    /// Appends a particle at rest in its reference state.
    pub fn push(&mut self, r0: Vector<D>, volume0: f64, rho0: f64, constraint: Constraint<D>, region: usize) {
        self.r0.push(r0);
        self.pos.push(r0);
        self.vel.push(Vector::zeros());
        self.acc.push(Vector::zeros());
        self.deformation.push(Matrix::identity());
        self.deformation_rate.push(Matrix::zeros());
        self.rho0.push(rho0);
        self.rho.push(rho0);
        self.volume0.push(volume0);
        self.correction.push(Matrix::identity());
        self.constraint.push(constraint);
        self.region.push(region);
        self.material.push(0);
        self.plastic.push(PlasticState::default());
        self.potential.push(0.0);
        self.stress.push(Matrix::zeros());
    }

    pub fn len(&self) -> usize {
        self.r0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r0.is_empty()
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.rho0[i] * self.volume0[i]
    }

    pub fn count_region(&self, region: usize) -> usize {
        self.region.iter().filter(|&&r| r == region).count()
    }

    /// Assigns velocities from `field(r0)` to free particles. Clamped
    /// particles stay at rest and prescribed ones follow their own profile.
    pub fn apply_initial_velocity(&mut self, field: impl Fn(&Vector<D>) -> Vector<D>) {
        for i in 0..self.len() {
            self.vel[i] = match self.constraint[i] {
                Constraint::Free => field(&self.r0[i]),
                Constraint::Clamped => Vector::zeros(),
                Constraint::Prescribed(ramp) => ramp.velocity(0.0),
            };
        }
    }

    /// Index of the particle whose reference position is closest to
    /// `target`; ties go to the lowest index.
    pub fn nearest(&self, target: &Vector<D>) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.r0.iter().enumerate() {
            let d2 = (p - target).norm_squared();
            if best.map_or(true, |(_, b)| d2 < b) {
                best = Some((i, d2));
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Fills `spec.shape` (and its constrained layers) with a Cartesian lattice
/// of spacing `dp`, centres offset by `dp/2` from the shape's lower corner.
pub fn generate_lattice<const D: usize>(spec: &LatticeSpec<D>) -> Result<ParticleSet<D>> {
    let dp = spec.dp;
    if !(dp > 0.0 && dp.is_finite()) {
        return Err(SimError::InvalidInput(format!("lattice spacing must be positive, got {dp}")));
    }
    if !(spec.rho0 > 0.0) {
        return Err(SimError::InvalidInput("reference density must be positive".into()));
    }
    for (a, first) in spec.constrained.iter().enumerate() {
        if first.axis >= D {
            return Err(SimError::InvalidInput(format!("constraint axis {} out of range", first.axis)));
        }
        for second in &spec.constrained[a + 1..] {
            if first.axis == second.axis && first.side == second.side {
                return Err(SimError::InvalidInput(
                    "constrained layer regions overlap".into(),
                ));
            }
        }
    }

    let (lower, lengths) = spec.shape.bounds();
    let mut begin = [0i64; D];
    let mut end = [0i64; D];
    for k in 0..D {
        let n = lattice_count(lengths[k], dp) as i64;
        if n == 0 {
            return Err(SimError::EmptyGeometry);
        }
        begin[k] = 0;
        end[k] = n;
    }
    let core_end = end;
    for layer in &spec.constrained {
        match layer.side {
            Side::Lower => begin[layer.axis] = -(layer.layers as i64),
            Side::Upper => end[layer.axis] = core_end[layer.axis] + layer.layers as i64,
        }
    }

    let volume = dp.powi(D as i32);
    let total: usize = (0..D).map(|k| (end[k] - begin[k]) as usize).product();
    let mut set = ParticleSet::with_capacity(dp, total);
    let mut index = begin;
    'outer: loop {
        let mut p = Vector::<D>::zeros();
        for k in 0..D {
            p[k] = lower[k] + (index[k] as f64 + 0.5) * dp;
        }
        // Which region does this lattice node fall in?
        let outside: Vec<usize> = (0..D)
            .filter(|&k| index[k] < 0 || index[k] >= core_end[k])
            .collect();
        let placement = match outside.as_slice() {
            [] => spec
                .shape
                .contains_transverse(&p, usize::MAX)
                .then_some((Constraint::Free, BODY_REGION)),
            [axis] => {
                let side = if index[*axis] < 0 { Side::Lower } else { Side::Upper };
                spec.constrained
                    .iter()
                    .position(|c| c.axis == *axis && c.side == side)
                    .filter(|_| spec.shape.contains_transverse(&p, *axis))
                    .map(|slot| (spec.constrained[slot].constraint, slot + 1))
            }
            _ => None,
        };
        if let Some((constraint, region)) = placement {
            let mut volume0 = volume;
            if let Some(taper) = &spec.taper {
                let s = taper.factor(p[taper.along_axis]);
                p[taper.scaled_axis] = taper.pivot + (p[taper.scaled_axis] - taper.pivot) * s;
                volume0 *= s;
            }
            set.push(p, volume0, spec.rho0, constraint, region);
        }

        for k in 0..D {
            index[k] += 1;
            if index[k] < end[k] {
                continue 'outer;
            }
            index[k] = begin[k];
        }
        break;
    }

    if set.count_region(BODY_REGION) == 0 {
        return Err(SimError::EmptyGeometry);
    }
    Ok(set)
}

/// Closed-form initial velocity fields used by the benchmark cases.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum VelocityField<const D: usize> {
    Zero,
    Uniform(Vector<D>),
    /// First cantilever bending mode: `v[transverse] = amplitude * f(x) / f(L)`
    /// with `x` measured from the clamped root along `along`.
    CantileverMode {
        amplitude: f64,
        wavenumber: f64,
        length: f64,
        root: f64,
        along: usize,
        transverse: usize,
    },
    /// Rigid rotation about the line through `axis_point` along `axis`, with
    /// angular speed `peak * sin(pi * s / (2 length))`, `s` the reference
    /// coordinate along the axis measured from `axis_point`.
    SinusoidalTwist {
        peak: f64,
        length: f64,
        axis: usize,
        axis_point: Vector<D>,
    },
}

/// Cantilever mode shape `f(x)` for wavenumber `k` and length `l`.
pub fn cantilever_mode_shape(k: f64, l: f64, x: f64) -> f64 {
    let kl = k * l;
    let kx = k * x;
    (kl.sin() + kl.sinh()) * (kx.cos() - kx.cosh()) - (kl.cos() + kl.cosh()) * (kx.sin() - kx.sinh())
}

impl<const D: usize> VelocityField<D> {
    pub fn evaluate(&self, r0: &Vector<D>) -> Vector<D> {
        match *self {
            VelocityField::Zero => Vector::zeros(),
            VelocityField::Uniform(v) => v,
            VelocityField::CantileverMode {
                amplitude,
                wavenumber,
                length,
                root,
                along,
                transverse,
            } => {
                let x = r0[along] - root;
                let mut v = Vector::zeros();
                if x > 0.0 {
                    v[transverse] = amplitude * cantilever_mode_shape(wavenumber, length, x)
                        / cantilever_mode_shape(wavenumber, length, length);
                }
                v
            }
            VelocityField::SinusoidalTwist {
                peak,
                length,
                axis,
                axis_point,
            } => {
                assert_eq!(D, 3, "twisting velocity field needs three dimensions");
                let s = r0[axis] - axis_point[axis];
                let rate = peak * (std::f64::consts::PI * s / (2.0 * length)).sin();
                let mut omega = [0.0; 3];
                omega[axis] = rate;
                let mut arm = [0.0; 3];
                for k in 0..3 {
                    arm[k] = if k == axis { 0.0 } else { r0[k] - axis_point[k] };
                }
                let cross = [
                    omega[1] * arm[2] - omega[2] * arm[1],
                    omega[2] * arm[0] - omega[0] * arm[2],
                    omega[0] * arm[1] - omega[1] * arm[0],
                ];
                let mut v = Vector::zeros();
                for k in 0..3 {
                    v[k] = cross[k];
                }
                v
            }
        }
    }
}
