//! Benchmark scenarios: geometry, materials, probes, reference values and a
//! run driver that turns probe histories into measurements.

mod builders;
mod driver;
mod signal;

use std::collections::BTreeMap;

use crate::materials::MaterialModel;
use crate::particles::{LatticeSpec, VelocityField};
use crate::solver::{HourglassParams, StepControls, Wall};
use crate::{Result, SimError};

pub use builders::{
    plane_strain_limit_load, plate_theoretical_period, PLATE_ROOT_WAVENUMBER,
};
pub use driver::{check, run_case, Frame, Measurement, ProbeSeries, RunOptions, RunOutcome, StopReason, Verdict};
pub use signal::extract_period;

#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Number(f64),
    Flag(bool),
    Text(String),
}

/// Case parameters by name; unknown names are rejected by the builders.
pub type Parameters = BTreeMap<String, ParamValue>;

/// Reads parameters with defaults and records which keys were consumed.
pub(crate) struct ParamReader<'a> {
    map: &'a Parameters,
    used: Vec<&'static str>,
}

impl<'a> ParamReader<'a> {
    pub(crate) fn new(map: &'a Parameters) -> Self {
        Self { map, used: Vec::new() }
    }

    fn error(key: &str, message: impl Into<String>) -> SimError {
        SimError::Parameter {
            key: key.to_string(),
            message: message.into(),
        }
    }

    pub(crate) fn number(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.used.push(key);
        match self.map.get(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(*v),
            Some(_) => Err(Self::error(key, "expected a finite number")),
        }
    }

    /// Number that must lie in `(low, high)`.
    pub(crate) fn number_in(&mut self, key: &'static str, default: f64, low: f64, high: f64) -> Result<f64> {
        let v = self.number(key, default)?;
        if v > low && v < high {
            Ok(v)
        } else {
            Err(Self::error(key, format!("must lie in ({low}, {high}), got {v}")))
        }
    }

    pub(crate) fn positive(&mut self, key: &'static str, default: f64) -> Result<f64> {
        self.number_in(key, default, 0.0, f64::INFINITY)
    }

    pub(crate) fn count(&mut self, key: &'static str, default: usize, min: usize) -> Result<usize> {
        let v = self.number(key, default as f64)?;
        if v.fract() != 0.0 || v < min as f64 || v > 1e6 {
            return Err(Self::error(key, format!("expected an integer of at least {min}, got {v}")));
        }
        Ok(v as usize)
    }

    pub(crate) fn flag(&mut self, key: &'static str, default: bool) -> Result<bool> {
        self.used.push(key);
        match self.map.get(key) {
            None => Ok(default),
            Some(ParamValue::Flag(v)) => Ok(*v),
            Some(_) => Err(Self::error(key, "expected true or false")),
        }
    }

    pub(crate) fn choice(&mut self, key: &'static str, default: &'static str, options: &[&str]) -> Result<String> {
        self.used.push(key);
        let value = match self.map.get(key) {
            None => default.to_string(),
            Some(ParamValue::Text(v)) => v.clone(),
            Some(_) => return Err(Self::error(key, "expected a string")),
        };
        if options.contains(&value.as_str()) {
            Ok(value)
        } else {
            Err(Self::error(key, format!("expected one of {}", options.join(", "))))
        }
    }

    /// Rejects keys that no builder call asked for.
    pub(crate) fn finish(self) -> Result<()> {
        match self.map.keys().find(|k| !self.used.contains(&k.as_str())) {
            Some(key) => Err(Self::error(key, "unknown parameter for this case")),
            None => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// Published simulation or experiment.
    Literature,
    /// Closed-form estimate.
    Analytic,
    /// Exact by construction.
    Exact,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::Literature => "literature",
            Provenance::Analytic => "analytic",
            Provenance::Exact => "exact",
        })
    }
}

/// Acceptance band for one measured quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub quantity: &'static str,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub provenance: Provenance,
    pub note: String,
}

impl Reference {
    pub fn relative(quantity: &'static str, value: f64, tolerance: f64, provenance: Provenance, note: &str) -> Self {
        let band = (value * tolerance).abs();
        Self {
            quantity,
            value,
            lower: value - band,
            upper: value + band,
            provenance,
            note: note.to_string(),
        }
    }

    pub fn contains(&self, measured: f64) -> bool {
        measured >= self.lower && measured <= self.upper
    }
}

/// Particles selected by a probe.
#[derive(Clone, Debug, PartialEq)]
pub enum Selection {
    Region(usize),
    /// Particles whose reference coordinate along `axis` is within `dp/2`
    /// of `at`.
    Layer { axis: usize, at: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProbeKind {
    /// Current coordinate of the particle nearest to `target` in the
    /// reference configuration.
    Position { target: Vec<f64>, axis: usize },
    MeanDisplacement { selection: Selection, axis: usize },
    /// Mean displacement along `axis` of the material face at reference
    /// coordinate `at + offset`, extrapolated from the layer at `at` with
    /// each particle's deformation gradient.
    FaceDisplacement { axis: usize, at: f64, offset: f64 },
    /// Force exerted on the grip region by the body, sign flipped:
    /// `-sum m a` along `axis`.
    ReactionForce { region: usize, axis: usize },
    /// Span of the body along `axis`, offset so the initial value reads
    /// `nominal`.
    Extent { axis: usize, nominal: f64 },
    /// Largest distance from the line through `center` along `axis`, offset
    /// so the initial value reads `nominal`.
    RadialExtent { axis: usize, center: Vec<f64>, nominal: f64 },
    /// Span along `axis` of the section at reference coordinate `at` along
    /// `along`, offset so the initial value reads `nominal`.
    SectionHeight { along: usize, at: f64, axis: usize, nominal: f64 },
    /// Smallest current distance between initially bonded particles, in
    /// units of `dp`.
    MinBondDistance,
    KineticEnergy,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeSpec {
    pub name: &'static str,
    pub kind: ProbeKind,
}

/// How a measurement is derived from the probe histories.
#[derive(Clone, Debug, PartialEq)]
pub enum Measure {
    Period { probe: usize },
    Final { probe: usize },
    Minimum { probe: usize },
    Maximum { probe: usize },
    /// `final(probe) - final(minus)`.
    FinalDifference { probe: usize, minus: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub quantity: &'static str,
    pub unit: &'static str,
    pub measure: Measure,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StopRule {
    EndTime,
    /// Stop once `t >= min_time` and the kinetic energy has stayed below
    /// `ratio` times its running peak for `window` seconds.
    SteadyState { min_time: f64, window: f64, ratio: f64 },
}

/// Potential `gradient * max(r0[axis], 0)`, scaled by `min(t / ramp, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialField {
    pub axis: usize,
    pub gradient: f64,
    pub ramp_time: f64,
}

impl PotentialField {
    pub fn evaluate(&self, reference: f64, t: f64) -> f64 {
        let ramp = if self.ramp_time > 0.0 { (t / self.ramp_time).min(1.0) } else { 1.0 };
        self.gradient * reference.max(0.0) * ramp
    }
}

/// Everything needed to start a run in `D` dimensions.
#[derive(Clone, Debug)]
pub struct CaseSetup<const D: usize> {
    pub lattice: LatticeSpec<D>,
    pub material: MaterialModel,
    pub velocity: VelocityField<D>,
    pub wall: Option<Wall>,
    pub potential: Option<PotentialField>,
}

#[derive(Clone, Debug)]
pub enum Scenario {
    Planar(CaseSetup<2>),
    Spatial(CaseSetup<3>),
}

impl Scenario {
    pub fn dimension(&self) -> usize {
        match self {
            Scenario::Planar(_) => 2,
            Scenario::Spatial(_) => 3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct CaseDefinition {
    pub name: &'static str,
    pub scenario: Scenario,
    pub hourglass: HourglassParams,
    pub controls: StepControls,
    pub probes: Vec<ProbeSpec>,
    pub probe_interval: f64,
    pub measures: Vec<MeasureSpec>,
    pub references: Vec<Reference>,
    pub stop: StopRule,
}

pub struct CaseInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their defaults, for listings.
    pub parameters: &'static [(&'static str, &'static str)],
    build: fn(&Parameters) -> Result<CaseDefinition>,
}

impl CaseInfo {
    pub fn build(&self, params: &Parameters) -> Result<CaseDefinition> {
        (self.build)(params)
    }
}

pub static CASES: &[CaseInfo] = &[
    CaseInfo {
        name: "oscillating_plate",
        summary: "2D cantilever plate released with its first bending mode",
        parameters: &[
            ("vf", "0.05"),
            ("poisson", "0.4"),
            ("length", "0.2"),
            ("thickness", "0.02"),
            ("resolution", "10"),
            ("youngs", "2e6"),
            ("density", "1000"),
            ("periods", "2.5"),
        ],
        build: builders::oscillating_plate,
    },
    CaseInfo {
        name: "bending_column",
        summary: "3D clamped column with a uniform initial velocity",
        parameters: &[
            ("speed", "10"),
            ("material", "neo_hookean"),
            ("anisotropy", "0"),
            ("resolution", "6"),
            ("end_time", "1.0"),
        ],
        build: builders::bending_column,
    },
    CaseInfo {
        name: "twisting_column",
        summary: "3D clamped column released with a sinusoidal twist",
        parameters: &[
            ("omega", "105"),
            ("poisson", "0.499"),
            ("anisotropy", "0"),
            ("resolution", "10"),
            ("end_time", "0.5"),
        ],
        build: builders::twisting_column,
    },
    CaseInfo {
        name: "muscle_contraction",
        summary: "unit cube of passive-active muscle driven by a potential gradient",
        parameters: &[
            ("dp", "0.1"),
            ("potential", "30"),
            ("anisotropic", "false"),
            ("bulk_modulus", "450"),
            ("ramp_time", "1.0"),
            ("end_time", "40"),
        ],
        build: builders::muscle_contraction,
    },
    CaseInfo {
        name: "taylor_bar_planar",
        summary: "2D copper bar impacting a rigid wall",
        parameters: &[("speed", "227"), ("resolution", "8"), ("end_time", "8e-5")],
        build: builders::taylor_bar_planar,
    },
    CaseInfo {
        name: "taylor_bar_square",
        summary: "3D square copper bar impacting a rigid wall",
        parameters: &[("speed", "227"), ("resolution", "8"), ("end_time", "8e-5")],
        build: builders::taylor_bar_square,
    },
    CaseInfo {
        name: "taylor_bar_round",
        summary: "3D round aluminium bar impacting a rigid wall",
        parameters: &[("speed", "373"), ("resolution", "8"), ("end_time", "1e-4")],
        build: builders::taylor_bar_round,
    },
    CaseInfo {
        name: "necking_bar",
        summary: "2D plane-strain steel bar stretched until it necks",
        parameters: &[
            ("resolution", "20"),
            ("stretch", "0.008"),
            ("load_time", "0.008"),
            ("ramp_time", "0.0005"),
            ("density", "7800"),
        ],
        build: builders::necking_bar,
    },
];

pub fn find_case(name: &str) -> Result<&'static CaseInfo> {
    CASES.iter().find(|c| c.name == name).ok_or_else(|| {
        let known: Vec<&str> = CASES.iter().map(|c| c.name).collect();
        SimError::InvalidInput(format!("unknown case `{name}` (known: {})", known.join(", ")))
    })
}

/// Builds a named case from its parameters.
pub fn build_case(name: &str, params: &Parameters) -> Result<CaseDefinition> {
    find_case(name)?.build(params)
}
