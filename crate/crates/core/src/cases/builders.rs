use std::f64::consts::PI;

use nalgebra::Vector3;

use crate::materials::{ElasticParams, Hardening, HolzapfelOgdenParams, MaterialModel, PlasticParams};
use crate::particles::{
    Constraint, ConstrainedLayers, LatticeSpec, Shape, Side, Taper, VelocityField, VelocityRamp, BODY_REGION,
};
use crate::solver::{HourglassParams, StepControls, Wall};
use crate::{Result, Vector};

use super::{
    CaseDefinition, CaseSetup, Measure, MeasureSpec, ParamReader, Parameters, PotentialField, ProbeKind, ProbeSpec,
    Provenance, Reference, Scenario, Selection, StopRule,
};

/// `k L` of the first cantilever bending mode.
pub const PLATE_ROOT_WAVENUMBER: f64 = 1.875;

const CLAMP_LAYERS: usize = 4;

/// Thin-plate period `2 pi / omega` with
/// `omega^2 = E H^2 k^4 / (12 rho (1 - nu^2))`.
pub fn plate_theoretical_period(youngs: f64, density: f64, poisson: f64, length: f64, thickness: f64) -> f64 {
    let k = PLATE_ROOT_WAVENUMBER / length;
    let omega2 = youngs * thickness.powi(2) * k.powi(4) / (12.0 * density * (1.0 - poisson * poisson));
    2.0 * PI / omega2.sqrt()
}

/// Plane-strain limit load per unit depth of a perfectly plastic von Mises
/// section of height `height`: `2 / sqrt(3) * yield * height`.
pub fn plane_strain_limit_load(yield_stress: f64, height: f64) -> f64 {
    2.0 / 3f64.sqrt() * yield_stress * height
}

fn clamp_layers<const D: usize>(axis: usize) -> ConstrainedLayers<D> {
    ConstrainedLayers {
        axis,
        side: Side::Lower,
        layers: CLAMP_LAYERS,
        constraint: Constraint::Clamped,
    }
}

fn controls(cfl: f64, damping_scale: f64, end_time: f64) -> StepControls {
    StepControls {
        cfl,
        damping_scale,
        end_time,
        output_interval: end_time / 100.0,
    }
}

fn measure(quantity: &'static str, unit: &'static str, measure: Measure) -> MeasureSpec {
    MeasureSpec { quantity, unit, measure }
}

/// Published periods for the coarse-resolution plate table entries,
/// keyed by `(vf, poisson, thickness)`.
fn plate_literature_period(vf: f64, poisson: f64, thickness: f64) -> Option<f64> {
    let same = |a: f64, b: f64| (a - b).abs() < 1e-9;
    if same(vf, 0.1) && same(poisson, 0.4) && same(thickness, 0.01) {
        Some(0.50796)
    } else {
        None
    }
}

pub(super) fn oscillating_plate(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let vf = p.number("vf", 0.05)?;
    let poisson = p.number_in("poisson", 0.4, -1.0, 0.5)?;
    let length = p.positive("length", 0.2)?;
    let thickness = p.positive("thickness", 0.02)?;
    let resolution = p.count("resolution", 10, 2)?;
    let youngs = p.positive("youngs", 2e6)?;
    let density = p.positive("density", 1000.0)?;
    let periods = p.positive("periods", 2.5)?;
    p.finish()?;

    let elastic = ElasticParams::from_youngs(density, youngs, poisson)?;
    let dp = thickness / resolution as f64;
    let period = plate_theoretical_period(youngs, density, poisson, length, thickness);
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<2>::zeros(),
            lengths: Vector::<2>::new(length, thickness),
        },
        dp,
        rho0: density,
        constrained: vec![clamp_layers(0)],
        taper: None,
    };
    let velocity = VelocityField::CantileverMode {
        amplitude: vf * elastic.sound_speed(),
        wavenumber: PLATE_ROOT_WAVENUMBER / length,
        length,
        root: 0.0,
        along: 0,
        transverse: 1,
    };
    let mut references = vec![Reference::relative(
        "period",
        period,
        0.10,
        Provenance::Analytic,
        "thin-plate theory",
    )];
    if resolution == 40 {
        if let Some(published) = plate_literature_period(vf, poisson, thickness) {
            references.push(Reference::relative(
                "period",
                published,
                0.02,
                Provenance::Literature,
                "published value at the same resolution",
            ));
        }
    }
    Ok(CaseDefinition {
        name: "oscillating_plate",
        scenario: Scenario::Planar(CaseSetup {
            lattice,
            material: MaterialModel::NeoHookean(elastic),
            velocity,
            wall: None,
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(0.6, 1.0, periods * period),
        probes: vec![
            ProbeSpec {
                name: "tip_y",
                kind: ProbeKind::Position {
                    target: vec![length, 0.5 * thickness],
                    axis: 1,
                },
            },
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
        ],
        probe_interval: period / 400.0,
        measures: vec![measure("period", "s", Measure::Period { probe: 0 })],
        references,
        stop: StopRule::EndTime,
    })
}

/// Holzapfel-Ogden parameters for the column cases: isotropic modulus
/// `a = E / (2 (1 + nu))`, `b = 1`, fiber stiffness `anisotropy * a` with a
/// linear fiber exponent limit.
fn column_muscle(density: f64, youngs: f64, poisson: f64, anisotropy: f64, fiber: Vector3<f64>) -> MaterialModel {
    let a = youngs / (2.0 * (1.0 + poisson));
    let bulk = youngs / (3.0 * (1.0 - 2.0 * poisson));
    let mut params = HolzapfelOgdenParams::isotropic(density, bulk, a, 1.0);
    params.a_f = anisotropy * a;
    params.fiber = fiber;
    params.sheet = if fiber.x.abs() < 0.5 { Vector3::x() } else { Vector3::y() };
    MaterialModel::HolzapfelOgden(params)
}

const COLUMN_DENSITY: f64 = 1100.0;
const COLUMN_YOUNGS: f64 = 17e6;
const COLUMN_LENGTH: f64 = 6.0;
const COLUMN_WIDTH: f64 = 1.0;

pub(super) fn bending_column(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let speed = p.number("speed", 10.0)?;
    let material = p.choice("material", "neo_hookean", &["neo_hookean", "holzapfel_ogden"])?;
    let anisotropy = p.number_in("anisotropy", 0.0, -1e-12, f64::INFINITY)?;
    let resolution = p.count("resolution", 6, 2)?;
    let end_time = p.positive("end_time", 1.0)?;
    p.finish()?;

    let poisson = 0.45;
    let model = if material == "neo_hookean" {
        MaterialModel::NeoHookean(ElasticParams::from_youngs(COLUMN_DENSITY, COLUMN_YOUNGS, poisson)?)
    } else {
        column_muscle(COLUMN_DENSITY, COLUMN_YOUNGS, poisson, anisotropy, Vector3::z())
    };
    let half = 0.5 * COLUMN_WIDTH;
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<3>::new(-half, -half, 0.0),
            lengths: Vector::<3>::new(COLUMN_WIDTH, COLUMN_WIDTH, COLUMN_LENGTH),
        },
        dp: COLUMN_WIDTH / resolution as f64,
        rho0: COLUMN_DENSITY,
        constrained: vec![clamp_layers(2)],
        taper: None,
    };
    let direction = Vector::<3>::new(3f64.sqrt() / 2.0, 0.5, 0.0);
    let corner = vec![half, half, COLUMN_LENGTH];
    Ok(CaseDefinition {
        name: "bending_column",
        scenario: Scenario::Spatial(CaseSetup {
            lattice,
            material: model,
            velocity: VelocityField::Uniform(direction * speed),
            wall: None,
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(0.6, 1.0, end_time),
        probes: vec![
            ProbeSpec {
                name: "corner_x",
                kind: ProbeKind::Position {
                    target: corner.clone(),
                    axis: 0,
                },
            },
            ProbeSpec {
                name: "corner_z",
                kind: ProbeKind::Position { target: corner, axis: 2 },
            },
            ProbeSpec {
                name: "min_bond_distance",
                kind: ProbeKind::MinBondDistance,
            },
        ],
        probe_interval: end_time / 500.0,
        measures: vec![
            measure("min_corner_z", "m", Measure::Minimum { probe: 1 }),
            measure("min_bond_distance", "dp", Measure::Minimum { probe: 2 }),
        ],
        references: Vec::new(),
        stop: StopRule::EndTime,
    })
}

pub(super) fn twisting_column(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let omega = p.number("omega", 105.0)?;
    let poisson = p.number_in("poisson", 0.499, -1.0, 0.5)?;
    let anisotropy = p.number_in("anisotropy", 0.0, -1e-12, f64::INFINITY)?;
    let resolution = p.count("resolution", 10, 2)?;
    let end_time = p.positive("end_time", 0.5)?;
    p.finish()?;

    let shear = COLUMN_YOUNGS / (2.0 * (1.0 + 0.45));
    let youngs = 2.0 * shear * (1.0 + poisson);
    let model = column_muscle(COLUMN_DENSITY, youngs, poisson, anisotropy, Vector3::y());
    let half = 0.5 * COLUMN_WIDTH;
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<3>::new(-half, 0.0, -half),
            lengths: Vector::<3>::new(COLUMN_WIDTH, COLUMN_LENGTH, COLUMN_WIDTH),
        },
        dp: COLUMN_WIDTH / resolution as f64,
        rho0: COLUMN_DENSITY,
        constrained: vec![clamp_layers(1)],
        taper: None,
    };
    Ok(CaseDefinition {
        name: "twisting_column",
        scenario: Scenario::Spatial(CaseSetup {
            lattice,
            material: model,
            velocity: VelocityField::SinusoidalTwist {
                peak: omega,
                length: COLUMN_LENGTH,
                axis: 1,
                axis_point: Vector::<3>::zeros(),
            },
            wall: None,
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(0.6, 1.0, end_time),
        probes: vec![
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
            ProbeSpec {
                name: "min_bond_distance",
                kind: ProbeKind::MinBondDistance,
            },
            ProbeSpec {
                name: "top_corner_x",
                kind: ProbeKind::Position {
                    target: vec![half, COLUMN_LENGTH, half],
                    axis: 0,
                },
            },
        ],
        probe_interval: end_time / 500.0,
        measures: vec![measure("min_bond_distance", "dp", Measure::Minimum { probe: 1 })],
        references: Vec::new(),
        stop: StopRule::EndTime,
    })
}

/// Published top displacements by particle spacing.
const MUSCLE_REFERENCE: [(f64, f64); 3] = [(0.1, 0.4988), (0.05, 0.5248), (0.025, 0.5355)];

pub(super) fn muscle_contraction(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let dp = p.number_in("dp", 0.1, 0.0, 0.5)?;
    let potential = p.number("potential", 30.0)?;
    let anisotropic = p.flag("anisotropic", false)?;
    let bulk_modulus = p.positive("bulk_modulus", 450.0)?;
    let ramp_time = p.number_in("ramp_time", 1.0, -1e-12, f64::INFINITY)?;
    let end_time = p.positive("end_time", 40.0)?;
    p.finish()?;

    let density = 1.0;
    let mut muscle = HolzapfelOgdenParams::isotropic(density, bulk_modulus, 0.059, 8.023);
    if anisotropic {
        muscle.a_f = 18.472;
        muscle.b_f = 16.026;
        muscle.a_s = 2.841;
        muscle.b_s = 11.12;
        muscle.a_fs = 0.216;
        muscle.b_fs = 11.436;
    }
    muscle.fiber = Vector3::z();
    muscle.sheet = Vector3::x();
    muscle.validate()?;

    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<3>::zeros(),
            lengths: Vector::<3>::repeat(1.0),
        },
        dp,
        rho0: density,
        constrained: vec![clamp_layers(2)],
        taper: None,
    };
    let shear_wave_time = 1.0 / (muscle.a / density).sqrt();
    let mut references = Vec::new();
    if !anisotropic && potential == 30.0 {
        if let Some(&(_, value)) = MUSCLE_REFERENCE.iter().find(|(s, _)| (s - dp).abs() < 1e-9) {
            references.push(Reference::relative(
                "top_displacement",
                value,
                0.03,
                Provenance::Literature,
                "published value at the same spacing",
            ));
        }
    }
    Ok(CaseDefinition {
        name: "muscle_contraction",
        scenario: Scenario::Spatial(CaseSetup {
            lattice,
            material: MaterialModel::HolzapfelOgden(muscle),
            velocity: VelocityField::Zero,
            wall: None,
            potential: Some(PotentialField {
                axis: 2,
                gradient: potential,
                ramp_time,
            }),
        }),
        hourglass: HourglassParams::default(),
        controls: controls(0.6, 1.0, end_time),
        probes: vec![
            ProbeSpec {
                name: "top_displacement",
                kind: ProbeKind::FaceDisplacement {
                    axis: 2,
                    at: 1.0 - 0.5 * dp,
                    offset: 0.5 * dp,
                },
            },
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
        ],
        probe_interval: 0.01,
        measures: vec![measure("top_displacement", "", Measure::Final { probe: 0 })],
        references,
        stop: StopRule::SteadyState {
            min_time: ramp_time,
            window: 0.1 * shear_wave_time,
            ratio: 1e-6,
        },
    })
}

fn copper() -> Result<PlasticParams> {
    let params = PlasticParams {
        elastic: ElasticParams::from_youngs(8930.0, 117e9, 0.35)?,
        yield_stress: 0.4e9,
        hardening: Hardening::Linear { modulus: 0.1e9 },
    };
    params.validate()?;
    Ok(params)
}

const TAYLOR_CFL: f64 = 0.1;
const TAYLOR_DAMPING: f64 = 0.125;
const COPPER_LENGTH: f64 = 0.03;
const COPPER_WIDTH: f64 = 0.006;

pub(super) fn taylor_bar_planar(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let speed = p.positive("speed", 227.0)?;
    let resolution = p.count("resolution", 8, 2)?;
    let end_time = p.positive("end_time", 8e-5)?;
    p.finish()?;

    let dp = COPPER_WIDTH / resolution as f64;
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<2>::new(-0.5 * COPPER_WIDTH, 0.0),
            lengths: Vector::<2>::new(COPPER_WIDTH, COPPER_LENGTH),
        },
        dp,
        rho0: 8930.0,
        constrained: Vec::new(),
        taper: None,
    };
    Ok(CaseDefinition {
        name: "taylor_bar_planar",
        scenario: Scenario::Planar(CaseSetup {
            lattice,
            material: MaterialModel::Plastic(copper()?),
            velocity: VelocityField::Uniform(Vector::<2>::new(0.0, -speed)),
            wall: Some(Wall {
                axis: 1,
                level: 0.5 * dp,
            }),
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(TAYLOR_CFL, TAYLOR_DAMPING, end_time),
        probes: vec![
            ProbeSpec {
                name: "length",
                kind: ProbeKind::Extent {
                    axis: 1,
                    nominal: COPPER_LENGTH,
                },
            },
            ProbeSpec {
                name: "width",
                kind: ProbeKind::Extent {
                    axis: 0,
                    nominal: COPPER_WIDTH,
                },
            },
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
        ],
        probe_interval: end_time / 400.0,
        measures: vec![
            measure("final_length", "m", Measure::Final { probe: 0 }),
            measure("final_width", "m", Measure::Final { probe: 1 }),
        ],
        references: Vec::new(),
        stop: StopRule::EndTime,
    })
}

pub(super) fn taylor_bar_square(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let speed = p.positive("speed", 227.0)?;
    let resolution = p.count("resolution", 8, 2)?;
    let end_time = p.positive("end_time", 8e-5)?;
    p.finish()?;

    let dp = COPPER_WIDTH / resolution as f64;
    let half = 0.5 * COPPER_WIDTH;
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<3>::new(-half, -half, 0.0),
            lengths: Vector::<3>::new(COPPER_WIDTH, COPPER_WIDTH, COPPER_LENGTH),
        },
        dp,
        rho0: 8930.0,
        constrained: Vec::new(),
        taper: None,
    };
    let mut references = Vec::new();
    if (speed - 227.0).abs() < 1e-9 {
        references.push(Reference::relative(
            "corner_x",
            6.953e-3,
            0.05,
            Provenance::Literature,
            "published value at the finest resolution (20 particles across)",
        ));
    }
    Ok(CaseDefinition {
        name: "taylor_bar_square",
        scenario: Scenario::Spatial(CaseSetup {
            lattice,
            material: MaterialModel::Plastic(copper()?),
            velocity: VelocityField::Uniform(Vector::<3>::new(0.0, 0.0, -speed)),
            wall: Some(Wall {
                axis: 2,
                level: 0.5 * dp,
            }),
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(TAYLOR_CFL, TAYLOR_DAMPING, end_time),
        probes: vec![
            ProbeSpec {
                name: "corner_x",
                kind: ProbeKind::Position {
                    target: vec![half, half, 0.0],
                    axis: 0,
                },
            },
            ProbeSpec {
                name: "length",
                kind: ProbeKind::Extent {
                    axis: 2,
                    nominal: COPPER_LENGTH,
                },
            },
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
        ],
        probe_interval: end_time / 400.0,
        measures: vec![
            measure("corner_x", "m", Measure::Final { probe: 0 }),
            measure("final_length", "m", Measure::Final { probe: 1 }),
        ],
        references,
        stop: StopRule::EndTime,
    })
}

/// Published final length and radius (cm) of the round bar by particles
/// per radius.
const ROUND_BAR_REFERENCE: [(usize, f64, f64); 3] = [(8, 1.4908, 0.9075), (12, 1.4631, 0.9323), (16, 1.4546, 0.9616)];

pub(super) fn taylor_bar_round(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let speed = p.positive("speed", 373.0)?;
    let resolution = p.count("resolution", 8, 2)?;
    let end_time = p.positive("end_time", 1e-4)?;
    p.finish()?;

    let radius = 0.391e-2;
    let length = 2.346e-2;
    let dp = radius / resolution as f64;
    let aluminium = PlasticParams {
        elastic: ElasticParams::from_youngs(2700.0, 78.2e9, 0.3)?,
        yield_stress: 0.29e9,
        hardening: Hardening::Perfect,
    };
    let lattice = LatticeSpec {
        shape: Shape::Cylinder {
            center: Vector::<3>::zeros(),
            radius,
            length,
            axis: 2,
        },
        dp,
        rho0: 2700.0,
        constrained: Vec::new(),
        taper: None,
    };
    let mut references = Vec::new();
    if (speed - 373.0).abs() < 1e-9 {
        if let Some(&(_, l, r)) = ROUND_BAR_REFERENCE.iter().find(|e| e.0 == resolution) {
            let note = "published value at the same resolution";
            references.push(Reference::relative("final_length", l * 1e-2, 0.03, Provenance::Literature, note));
            references.push(Reference::relative("final_radius", r * 1e-2, 0.05, Provenance::Literature, note));
        }
    }
    Ok(CaseDefinition {
        name: "taylor_bar_round",
        scenario: Scenario::Spatial(CaseSetup {
            lattice,
            material: MaterialModel::Plastic(aluminium),
            velocity: VelocityField::Uniform(Vector::<3>::new(0.0, 0.0, -speed)),
            wall: Some(Wall {
                axis: 2,
                level: 0.5 * dp,
            }),
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(TAYLOR_CFL, TAYLOR_DAMPING, end_time),
        probes: vec![
            ProbeSpec {
                name: "length",
                kind: ProbeKind::Extent { axis: 2, nominal: length },
            },
            ProbeSpec {
                name: "radius",
                kind: ProbeKind::RadialExtent {
                    axis: 2,
                    center: vec![0.0; 3],
                    nominal: radius,
                },
            },
            ProbeSpec {
                name: "kinetic_energy",
                kind: ProbeKind::KineticEnergy,
            },
        ],
        probe_interval: end_time / 400.0,
        measures: vec![
            measure("final_length", "m", Measure::Final { probe: 0 }),
            measure("final_radius", "m", Measure::Final { probe: 1 }),
        ],
        references,
        stop: StopRule::EndTime,
    })
}

pub(super) const NECKING_LENGTH: f64 = 53.334e-3;
pub(super) const NECKING_HEIGHT: f64 = 12.826e-3;
pub(super) const NECKING_YIELD: f64 = 450e6;
const NECKING_CENTRE_SCALE: f64 = 0.982;

pub(super) fn necking_bar(params: &Parameters) -> Result<CaseDefinition> {
    let mut p = ParamReader::new(params);
    let resolution = p.count("resolution", 20, 4)?;
    let stretch = p.positive("stretch", 8e-3)?;
    let load_time = p.positive("load_time", 8e-3)?;
    let ramp_time = p.number_in("ramp_time", 5e-4, -1e-12, load_time)?;
    let density = p.positive("density", 7800.0)?;
    p.finish()?;

    let steel = PlasticParams {
        elastic: ElasticParams::new(density, 164.21e9, 80.1938e9)?,
        yield_stress: NECKING_YIELD,
        hardening: Hardening::Saturation {
            saturation_stress: 715e6,
            exponent: 16.93,
            linear_modulus: 129.24e6,
        },
    };
    steel.validate()?;
    let dp = NECKING_HEIGHT / resolution as f64;
    // Each grip moves by half the stretch; the ramp is part of the load time.
    let grip_speed = 0.5 * stretch / (load_time - 0.5 * ramp_time);
    let grip = |side: Side, sign: f64| ConstrainedLayers {
        axis: 0,
        side,
        layers: CLAMP_LAYERS,
        constraint: Constraint::Prescribed(VelocityRamp {
            final_velocity: Vector::<2>::new(sign * grip_speed, 0.0),
            duration: ramp_time,
        }),
    };
    let lattice = LatticeSpec {
        shape: Shape::Box {
            lower: Vector::<2>::zeros(),
            lengths: Vector::<2>::new(NECKING_LENGTH, NECKING_HEIGHT),
        },
        dp,
        rho0: density,
        constrained: vec![grip(Side::Lower, -1.0), grip(Side::Upper, 1.0)],
        taper: Some(Taper {
            along_axis: 0,
            scaled_axis: 1,
            center: 0.5 * NECKING_LENGTH,
            half_span: 0.5 * NECKING_LENGTH,
            pivot: 0.5 * NECKING_HEIGHT,
            depth: 1.0 - NECKING_CENTRE_SCALE,
        }),
    };
    let centre_height = NECKING_CENTRE_SCALE * NECKING_HEIGHT;
    let limit = plane_strain_limit_load(NECKING_YIELD, centre_height);
    let (left, right) = (BODY_REGION + 1, BODY_REGION + 2);
    Ok(CaseDefinition {
        name: "necking_bar",
        scenario: Scenario::Planar(CaseSetup {
            lattice,
            material: MaterialModel::Plastic(steel),
            velocity: VelocityField::Zero,
            wall: None,
            potential: None,
        }),
        hourglass: HourglassParams::default(),
        controls: controls(0.6, 1.0, load_time),
        probes: vec![
            ProbeSpec {
                name: "reaction_force",
                kind: ProbeKind::ReactionForce { region: right, axis: 0 },
            },
            ProbeSpec {
                name: "right_grip_x",
                kind: ProbeKind::MeanDisplacement {
                    selection: Selection::Region(right),
                    axis: 0,
                },
            },
            ProbeSpec {
                name: "left_grip_x",
                kind: ProbeKind::MeanDisplacement {
                    selection: Selection::Region(left),
                    axis: 0,
                },
            },
            ProbeSpec {
                name: "centre_height",
                kind: ProbeKind::SectionHeight {
                    along: 0,
                    at: 0.5 * NECKING_LENGTH,
                    axis: 1,
                    nominal: centre_height,
                },
            },
        ],
        probe_interval: load_time / 1000.0,
        measures: vec![
            measure("peak_reaction_force", "N/m", Measure::Maximum { probe: 0 }),
            measure("imposed_displacement", "m", Measure::FinalDifference { probe: 1, minus: 2 }),
            measure("final_centre_height", "m", Measure::Final { probe: 3 }),
        ],
        references: vec![Reference {
            quantity: "peak_reaction_force",
            value: limit,
            lower: limit,
            upper: 1.5 * limit,
            provenance: Provenance::Analytic,
            note: "plane-strain limit load of the reduced centre section, up to 1.5x for hardening".into(),
        }],
        stop: StopRule::EndTime,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{build_case, ParamValue, CASES};
    use crate::particles::generate_lattice;
    use crate::SimError;

    fn with(pairs: &[(&str, ParamValue)]) -> Parameters {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    #[test]
    fn plate_theory_periods() {
        let thick = plate_theoretical_period(2e6, 1000.0, 0.4, 0.2, 0.02);
        assert!((thick - 0.25376).abs() < 5e-5, "{thick}");
        let thin = plate_theoretical_period(2e6, 1000.0, 0.4, 0.2, 0.01);
        assert!((thin - 0.50752).abs() < 5e-5, "{thin}");
        for (nu, expected) in [(0.22, 0.27009), (0.30, 0.26412)] {
            let t = plate_theoretical_period(2e6, 1000.0, nu, 0.2, 0.02);
            assert!((t - expected).abs() < 5e-5, "{nu}: {t}");
        }
    }

    #[test]
    fn plate_period_scales_inversely_with_thickness() {
        // omega ~ H, so halving the thickness doubles the period exactly.
        let a = plate_theoretical_period(3e6, 900.0, 0.3, 0.5, 0.04);
        let b = plate_theoretical_period(3e6, 900.0, 0.3, 0.5, 0.02);
        assert!((b / a - 2.0).abs() < 1e-12);
    }

    #[test]
    fn every_case_builds_with_defaults() {
        for case in CASES {
            let def = case.build(&Parameters::new()).unwrap_or_else(|e| panic!("{}: {e}", case.name));
            assert_eq!(def.name, case.name);
            assert!(def.controls.end_time > 0.0 && def.probe_interval > 0.0);
            for m in &def.measures {
                let probe = match m.measure {
                    Measure::Period { probe }
                    | Measure::Final { probe }
                    | Measure::Minimum { probe }
                    | Measure::Maximum { probe }
                    | Measure::FinalDifference { probe, .. } => probe,
                };
                assert!(probe < def.probes.len(), "{}: {}", case.name, m.quantity);
            }
        }
    }

    #[test]
    fn plate_geometry_and_velocity() {
        let def = build_case(
            "oscillating_plate",
            &with(&[("resolution", ParamValue::Number(4.0))]),
        )
        .unwrap();
        let Scenario::Planar(setup) = def.scenario else { panic!("plate is planar") };
        let set = generate_lattice(&setup.lattice).unwrap();
        // 40 x 4 body particles plus 4 clamp columns.
        assert_eq!(set.count_region(BODY_REGION), 160);
        assert_eq!(set.count_region(1), 16);
        let amplitude = 0.05 * setup.material.sound_speed();
        let VelocityField::CantileverMode { length, wavenumber, .. } = setup.velocity else { panic!() };
        let tip = setup.velocity.evaluate(&Vector::<2>::new(length, 0.0));
        assert!((tip.y - amplitude).abs() < 1e-12 * amplitude);
        assert!((wavenumber * length - PLATE_ROOT_WAVENUMBER).abs() < 1e-15);
    }

    #[test]
    fn literature_plate_reference_only_at_matching_resolution() {
        let params = |res: f64| {
            with(&[
                ("vf", ParamValue::Number(0.1)),
                ("thickness", ParamValue::Number(0.01)),
                ("resolution", ParamValue::Number(res)),
            ])
        };
        let fine = build_case("oscillating_plate", &params(40.0)).unwrap();
        assert!(fine.references.iter().any(|r| r.provenance == Provenance::Literature && r.value == 0.50796));
        let coarse = build_case("oscillating_plate", &params(20.0)).unwrap();
        assert!(coarse.references.iter().all(|r| r.provenance == Provenance::Analytic));
    }

    #[test]
    fn unknown_and_mistyped_parameters_are_rejected() {
        let err = build_case("oscillating_plate", &with(&[("nu", ParamValue::Number(0.3))])).unwrap_err();
        assert!(matches!(err, SimError::Parameter { ref key, .. } if key == "nu"));
        let err = build_case("muscle_contraction", &with(&[("anisotropic", ParamValue::Number(1.0))])).unwrap_err();
        assert!(matches!(err, SimError::Parameter { ref key, .. } if key == "anisotropic"));
        let err = build_case("oscillating_plate", &with(&[("poisson", ParamValue::Number(0.5))])).unwrap_err();
        assert!(matches!(err, SimError::Parameter { ref key, .. } if key == "poisson"));
        let err = build_case("bending_column", &with(&[("resolution", ParamValue::Number(4.5))])).unwrap_err();
        assert!(matches!(err, SimError::Parameter { ref key, .. } if key == "resolution"));
        assert!(build_case("no_such_case", &Parameters::new()).is_err());
    }

    #[test]
    fn necking_geometry() {
        let def = build_case("necking_bar", &Parameters::new()).unwrap();
        let Scenario::Planar(setup) = &def.scenario else { panic!() };
        let set = generate_lattice(&setup.lattice).unwrap();
        let dp = NECKING_HEIGHT / 20.0;
        assert_eq!(set.count_region(1), 4 * 20);
        assert_eq!(set.count_region(2), 4 * 20);
        // Centre column is thinner than the end columns by the taper depth.
        let span = |x: f64| {
            let ys: Vec<f64> = (0..set.len())
                .filter(|&i| (set.r0[i].x - x).abs() < 0.5 * dp)
                .map(|i| set.r0[i].y)
                .collect();
            ys.iter().cloned().fold(f64::MIN, f64::max) - ys.iter().cloned().fold(f64::MAX, f64::min)
        };
        let end = span(0.5 * dp);
        let centre_x = set.r0[set.nearest(&Vector::<2>::new(0.5 * NECKING_LENGTH, 0.0)).unwrap()].x;
        assert!(span(centre_x) < end);
        // Grips move apart by the full stretch over the load time.
        let Some(ConstrainedLayers {
            constraint: Constraint::Prescribed(ramp),
            ..
        }) = setup.lattice.constrained.get(1)
        else {
            panic!()
        };
        let total = 2.0 * ramp.displacement(def.controls.end_time).x;
        assert!((total - 8e-3).abs() < 1e-15, "{total}");
        let limit = def.references[0].value;
        let expected = 2.0 / 3f64.sqrt() * 450e6 * 0.982 * NECKING_HEIGHT;
        assert!((limit - expected).abs() < 1e-9 * expected);
    }

    #[test]
    fn round_bar_references_follow_resolution() {
        let def = build_case("taylor_bar_round", &Parameters::new()).unwrap();
        let length = def.references.iter().find(|r| r.quantity == "final_length").unwrap();
        assert!((length.value - 1.4908e-2).abs() < 1e-12);
        assert!((length.upper / length.value - 1.03).abs() < 1e-12);
        let coarse = build_case("taylor_bar_round", &with(&[("resolution", ParamValue::Number(5.0))])).unwrap();
        assert!(coarse.references.is_empty());
    }

    #[test]
    fn muscle_potential_ramp() {
        let field = PotentialField {
            axis: 2,
            gradient: 30.0,
            ramp_time: 2.0,
        };
        assert_eq!(field.evaluate(1.0, 4.0), 30.0);
        assert_eq!(field.evaluate(0.5, 1.0), 7.5);
        assert_eq!(field.evaluate(-0.1, 4.0), 0.0);
    }

    #[test]
    fn twisting_column_velocity_is_rigid_rotation_per_slice() {
        let def = build_case("twisting_column", &Parameters::new()).unwrap();
        let Scenario::Spatial(setup) = &def.scenario else { panic!() };
        // At the free end the angular speed is the peak value.
        let v = setup.velocity.evaluate(&Vector::<3>::new(0.5, 6.0, 0.0));
        assert!((v.norm() - 105.0 * 0.5).abs() < 1e-9);
        assert!(v.y.abs() < 1e-12);
    }
}
