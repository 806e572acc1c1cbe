//! Runs a case to completion while sampling probes.

use crate::particles::{generate_lattice, radial_distance, ParticleSet, BODY_REGION};
use crate::solver::Simulation;
use crate::{Result, SimError, Vector};

use super::{
    extract_period, CaseDefinition, CaseSetup, Measure, ProbeKind, ProbeSpec, Reference, Scenario, Selection,
    StopRule,
};

/// Particle state handed to snapshot observers.
pub enum Frame<'a> {
    Planar { time: f64, particles: &'a ParticleSet<2> },
    Spatial { time: f64, particles: &'a ParticleSet<3> },
}

impl Frame<'_> {
    pub fn time(&self) -> f64 {
        match self {
            Frame::Planar { time, .. } | Frame::Spatial { time, .. } => *time,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the case's probe cadence; zero samples every step.
    pub probe_interval: Option<f64>,
    /// Snapshot cadence; `None` disables snapshots.
    pub snapshot_interval: Option<f64>,
    /// Overrides the case's end time.
    pub end_time: Option<f64>,
}

/// Probe histories: one row per sample time.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProbeSeries {
    pub names: Vec<&'static str>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl ProbeSeries {
    pub fn column(&self, probe: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[probe]).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| *n == name)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub quantity: &'static str,
    pub unit: &'static str,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    EndTime,
    SteadyState,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub series: ProbeSeries,
    pub measurements: Vec<Measurement>,
    pub steps: u64,
    pub final_time: f64,
    pub stop_reason: StopReason,
}

impl RunOutcome {
    pub fn measurement(&self, quantity: &str) -> Option<f64> {
        self.measurements.iter().find(|m| m.quantity == quantity).map(|m| m.value)
    }
}

/// First cadence point after `t` on the grid `due + k * interval`; a
/// non-positive interval means every step.
fn following(due: f64, interval: f64, t: f64) -> f64 {
    if !(interval > 0.0) {
        return t;
    }
    let mut next = due;
    while next <= t {
        next += interval;
    }
    next
}

/// Runs `case`, calling `observer` at t = 0, at every snapshot time and at
/// the end when snapshots are enabled.
pub fn run_case(
    case: &CaseDefinition,
    options: &RunOptions,
    observer: &mut dyn FnMut(&Frame) -> Result<()>,
) -> Result<RunOutcome> {
    match &case.scenario {
        Scenario::Planar(setup) => run_setup(case, setup, options, observer, |time, particles| Frame::Planar {
            time,
            particles,
        }),
        Scenario::Spatial(setup) => run_setup(case, setup, options, observer, |time, particles| Frame::Spatial {
            time,
            particles,
        }),
    }
}

/// Raw probe values plus the offsets that make offset probes start at their
/// nominal value.
struct Sampler<const D: usize> {
    probes: Vec<ProbeSpec>,
    offsets: Vec<f64>,
    /// Particle index per `Position` probe.
    tracked: Vec<Option<usize>>,
}

fn to_vector<const D: usize>(coords: &[f64]) -> Result<Vector<D>> {
    if coords.len() != D {
        return Err(SimError::InvalidInput(format!(
            "probe point has {} coordinates in a {D}-dimensional case",
            coords.len()
        )));
    }
    Ok(Vector::<D>::from_column_slice(coords))
}

fn selected<const D: usize>(set: &ParticleSet<D>, selection: &Selection, i: usize) -> bool {
    match *selection {
        Selection::Region(r) => set.region[i] == r,
        Selection::Layer { axis, at } => (set.r0[i][axis] - at).abs() <= 0.5 * set.dp * (1.0 + 1e-9),
    }
}

impl<const D: usize> Sampler<D> {
    fn new(probes: &[ProbeSpec], sim: &Simulation<D>) -> Result<Self> {
        let set = &sim.particles;
        let mut tracked = Vec::new();
        for probe in probes {
            tracked.push(match &probe.kind {
                ProbeKind::Position { target, axis } => {
                    if *axis >= D {
                        return Err(SimError::InvalidInput(format!("probe {} axis out of range", probe.name)));
                    }
                    set.nearest(&to_vector::<D>(target)?)
                }
                _ => None,
            });
        }
        let mut sampler = Self {
            probes: probes.to_vec(),
            offsets: vec![0.0; probes.len()],
            tracked,
        };
        for (k, probe) in probes.iter().enumerate() {
            let nominal = match probe.kind {
                ProbeKind::Extent { nominal, .. }
                | ProbeKind::RadialExtent { nominal, .. }
                | ProbeKind::SectionHeight { nominal, .. } => nominal,
                _ => continue,
            };
            let raw = sampler.raw(k, sim)?;
            sampler.offsets[k] = nominal - raw;
        }
        Ok(sampler)
    }

    fn raw(&self, k: usize, sim: &Simulation<D>) -> Result<f64> {
        let set = &sim.particles;
        let empty = || SimError::InvalidInput(format!("probe {} selects no particles", self.probes[k].name));
        let span = |values: &mut dyn Iterator<Item = f64>| -> Option<f64> {
            let (mut low, mut high) = (f64::INFINITY, f64::NEG_INFINITY);
            for v in values {
                low = low.min(v);
                high = high.max(v);
            }
            (high >= low).then_some(high - low)
        };
        Ok(match &self.probes[k].kind {
            ProbeKind::Position { axis, .. } => set.pos[self.tracked[k].ok_or_else(empty)?][*axis],
            ProbeKind::MeanDisplacement { selection, axis } => {
                let (mut sum, mut n) = (0.0, 0usize);
                for i in (0..set.len()).filter(|&i| selected(set, selection, i)) {
                    sum += set.pos[i][*axis] - set.r0[i][*axis];
                    n += 1;
                }
                if n == 0 {
                    return Err(empty());
                }
                sum / n as f64
            }
            ProbeKind::FaceDisplacement { axis, at, offset } => {
                let layer = Selection::Layer { axis: *axis, at: *at };
                let (mut sum, mut n) = (0.0, 0usize);
                for i in (0..set.len()).filter(|&i| selected(set, &layer, i)) {
                    let stretch = set.deformation[i][(*axis, *axis)] - 1.0;
                    sum += set.pos[i][*axis] - set.r0[i][*axis] + offset * stretch;
                    n += 1;
                }
                if n == 0 {
                    return Err(empty());
                }
                sum / n as f64
            }
            ProbeKind::ReactionForce { region, axis } => -(0..set.len())
                .filter(|&i| set.region[i] == *region)
                .map(|i| set.mass(i) * set.acc[i][*axis])
                .sum::<f64>(),
            ProbeKind::Extent { axis, .. } => span(
                &mut (0..set.len()).filter(|&i| set.region[i] == BODY_REGION).map(|i| set.pos[i][*axis]),
            )
            .ok_or_else(empty)?,
            ProbeKind::RadialExtent { axis, center, .. } => {
                let c = to_vector::<D>(center)?;
                (0..set.len())
                    .filter(|&i| set.region[i] == BODY_REGION)
                    .map(|i| radial_distance(&set.pos[i], &c, *axis))
                    .fold(f64::NAN, f64::max)
            }
            ProbeKind::SectionHeight { along, at, axis, .. } => {
                let layer = Selection::Layer { axis: *along, at: *at };
                span(&mut (0..set.len()).filter(|&i| selected(set, &layer, i)).map(|i| set.pos[i][*axis]))
                    .ok_or_else(empty)?
            }
            ProbeKind::MinBondDistance => {
                let bonds = sim.bonds();
                let mut smallest = f64::INFINITY;
                for i in 0..set.len() {
                    for b in bonds.of(i) {
                        smallest = smallest.min((set.pos[i] - set.pos[b.j]).norm_squared());
                    }
                }
                smallest.sqrt() / set.dp
            }
            ProbeKind::KineticEnergy => sim.kinetic_energy(),
        })
    }

    fn sample(&self, sim: &Simulation<D>) -> Result<Vec<f64>> {
        (0..self.probes.len()).map(|k| Ok(self.raw(k, sim)? + self.offsets[k])).collect()
    }
}

fn run_setup<const D: usize>(
    case: &CaseDefinition,
    setup: &CaseSetup<D>,
    options: &RunOptions,
    observer: &mut dyn FnMut(&Frame) -> Result<()>,
    frame: for<'a> fn(f64, &'a ParticleSet<D>) -> Frame<'a>,
) -> Result<RunOutcome> {
    let mut particles = generate_lattice(&setup.lattice)?;
    let velocity = setup.velocity;
    particles.apply_initial_velocity(|r0| velocity.evaluate(r0));
    let mut controls = case.controls;
    if let Some(end) = options.end_time {
        controls.end_time = end;
    }
    let mut sim = Simulation::new(particles, vec![setup.material.clone()], case.hourglass, controls)?;
    sim.wall = setup.wall;

    let sampler = Sampler::new(&case.probes, &sim)?;
    let probe_interval = options.probe_interval.unwrap_or(case.probe_interval);
    let end_time = controls.end_time;
    let mut series = ProbeSeries {
        names: case.probes.iter().map(|p| p.name).collect(),
        ..Default::default()
    };
    let record = |series: &mut ProbeSeries, sim: &Simulation<D>| -> Result<()> {
        series.times.push(sim.time());
        series.values.push(sampler.sample(sim)?);
        Ok(())
    };

    record(&mut series, &sim)?;
    let mut next_probe = probe_interval;
    let mut next_snapshot = options.snapshot_interval;
    let mut last_snapshot = None;
    if next_snapshot.is_some() {
        observer(&frame(0.0, &sim.particles))?;
        last_snapshot = Some(0.0);
    }

    let mut peak_energy = sim.kinetic_energy();
    let mut quiet_since: Option<f64> = None;
    let mut stop_reason = StopReason::EndTime;
    while sim.time() < end_time * (1.0 - 1e-12) {
        if let Some(field) = setup.potential {
            let t = sim.time();
            let p = &mut sim.particles;
            for i in 0..p.len() {
                p.potential[i] = field.evaluate(p.r0[i][field.axis], t);
            }
        }
        let dt = sim.next_timestep()?;
        sim.step_with(dt.min(end_time - sim.time()))?;
        let t = sim.time();

        if t >= next_probe * (1.0 - 1e-12) {
            record(&mut series, &sim)?;
            next_probe = following(next_probe, probe_interval, t);
        }
        if let Some(at) = next_snapshot {
            if t >= at * (1.0 - 1e-12) {
                observer(&frame(t, &sim.particles))?;
                last_snapshot = Some(t);
                next_snapshot = Some(following(at, options.snapshot_interval.unwrap_or(f64::INFINITY), t));
            }
        }
        if let StopRule::SteadyState { min_time, window, ratio } = case.stop {
            let energy = sim.kinetic_energy();
            peak_energy = peak_energy.max(energy);
            if energy < ratio * peak_energy {
                let since = *quiet_since.get_or_insert(t);
                if t >= min_time && t - since >= window {
                    stop_reason = StopReason::SteadyState;
                    break;
                }
            } else {
                quiet_since = None;
            }
        }
    }
    if series.times.last() != Some(&sim.time()) {
        record(&mut series, &sim)?;
    }
    if options.snapshot_interval.is_some() && last_snapshot != Some(sim.time()) {
        observer(&frame(sim.time(), &sim.particles))?;
    }

    let measurements = case
        .measures
        .iter()
        .map(|spec| {
            let column = |probe: usize| series.column(probe);
            let value = match spec.measure {
                Measure::Period { probe } => extract_period(&series.times, &column(probe)).unwrap_or(f64::NAN),
                Measure::Final { probe } => *column(probe).last().unwrap_or(&f64::NAN),
                Measure::Minimum { probe } => column(probe).into_iter().fold(f64::INFINITY, f64::min),
                Measure::Maximum { probe } => column(probe).into_iter().fold(f64::NEG_INFINITY, f64::max),
                Measure::FinalDifference { probe, minus } => {
                    column(probe).last().unwrap_or(&f64::NAN) - column(minus).last().unwrap_or(&f64::NAN)
                }
            };
            Ok(super::Measurement {
                quantity: spec.quantity,
                unit: spec.unit,
                value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RunOutcome {
        series,
        measurements,
        steps: sim.steps(),
        final_time: sim.time(),
        stop_reason,
    })
}

#[derive(Clone, Debug)]
pub struct Verdict {
    pub reference: Reference,
    pub measured: Option<f64>,
    pub pass: bool,
}

/// Compares measurements with every reference of the case. A reference
/// whose quantity was not measured fails.
pub fn check(case: &CaseDefinition, outcome: &RunOutcome) -> Vec<Verdict> {
    case.references
        .iter()
        .map(|reference| {
            let measured = outcome.measurement(reference.quantity);
            Verdict {
                reference: reference.clone(),
                measured,
                pass: measured.is_some_and(|m| reference.contains(m)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{build_case, ParamValue, Parameters};

    fn params(pairs: &[(&str, f64)]) -> Parameters {
        pairs.iter().map(|(k, v)| (k.to_string(), ParamValue::Number(*v))).collect()
    }

    #[test]
    fn probes_start_at_nominal_values() {
        let case = build_case("taylor_bar_round", &params(&[("resolution", 3.0), ("end_time", 1e-7)])).unwrap();
        let outcome = run_case(&case, &RunOptions::default(), &mut |_| Ok(())).unwrap();
        let first = &outcome.series.values[0];
        assert!((first[0] - 2.346e-2).abs() < 1e-15);
        assert!((first[1] - 0.391e-2).abs() < 1e-15);
        assert!(outcome.final_time >= 1e-7 * (1.0 - 1e-12));
        assert_eq!(outcome.series.times.len(), outcome.series.values.len());
    }

    #[test]
    fn end_time_is_hit_exactly_and_observer_sees_first_and_last_frames() {
        let case = build_case("oscillating_plate", &params(&[("resolution", 3.0), ("periods", 0.01)])).unwrap();
        let mut times = Vec::new();
        let options = RunOptions {
            snapshot_interval: Some(case.controls.end_time / 4.0),
            ..Default::default()
        };
        let outcome = run_case(&case, &options, &mut |f| {
            times.push(f.time());
            Ok(())
        })
        .unwrap();
        assert_eq!(outcome.final_time, case.controls.end_time);
        assert_eq!(times[0], 0.0);
        assert_eq!(*times.last().unwrap(), case.controls.end_time);
        assert!(times.len() >= 5, "{times:?}");
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn zero_intervals_sample_every_step() {
        let case = build_case("oscillating_plate", &params(&[("resolution", 3.0), ("periods", 0.01)])).unwrap();
        let options = RunOptions {
            probe_interval: Some(0.0),
            snapshot_interval: Some(0.0),
            ..Default::default()
        };
        let mut frames = 0u64;
        let outcome = run_case(&case, &options, &mut |_| {
            frames += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(outcome.series.times.len() as u64, outcome.steps + 1);
        assert_eq!(frames, outcome.steps + 1);
    }

    #[test]
    fn necking_grips_follow_the_ramp() {
        let case = build_case("necking_bar", &params(&[("resolution", 4.0), ("load_time", 2e-4), ("ramp_time", 1e-4)]))
            .unwrap();
        let outcome = run_case(&case, &RunOptions::default(), &mut |_| Ok(())).unwrap();
        let imposed = outcome.measurement("imposed_displacement").unwrap();
        assert!((imposed - 8e-3).abs() < 1e-7, "{imposed}");
    }

    #[test]
    fn check_reports_missing_measurements_as_failures() {
        let case = build_case("taylor_bar_round", &Parameters::new()).unwrap();
        let outcome = RunOutcome {
            series: ProbeSeries::default(),
            measurements: vec![super::Measurement {
                quantity: "final_length",
                unit: "m",
                value: 1.49e-2,
            }],
            steps: 0,
            final_time: 0.0,
            stop_reason: StopReason::EndTime,
        };
        let verdicts = check(&case, &outcome);
        assert_eq!(verdicts.len(), 2);
        assert!(verdicts[0].pass);
        assert!(!verdicts[1].pass && verdicts[1].measured.is_none());
    }

    #[test]
    fn bad_probe_point_is_rejected() {
        let mut case = build_case("oscillating_plate", &params(&[("resolution", 3.0)])).unwrap();
        case.probes[0].kind = ProbeKind::Position {
            target: vec![0.0; 3],
            axis: 0,
        };
        assert!(run_case(&case, &RunOptions::default(), &mut |_| Ok(())).is_err());
    }
}
