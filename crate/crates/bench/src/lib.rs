//! Shared fixtures for the benchmarks.

use tlsph_core::cases::{build_case, ParamValue, Parameters, Scenario};
use tlsph_core::particles::generate_lattice;
use tlsph_core::{Result, Simulation};

/// Case parameters from `(name, number)` pairs.
pub fn numbers(pairs: &[(&str, f64)]) -> Parameters {
    pairs.iter().map(|(k, v)| (k.to_string(), ParamValue::Number(*v))).collect()
}

/// Ready-to-step simulation of the oscillating plate at `resolution`
/// particles through the thickness.
pub fn plate(resolution: usize) -> Result<Simulation<2>> {
    let case = build_case("oscillating_plate", &numbers(&[("resolution", resolution as f64)]))?;
    let Scenario::Planar(setup) = case.scenario else {
        unreachable!("the plate is planar")
    };
    let mut particles = generate_lattice(&setup.lattice)?;
    particles.apply_initial_velocity(|r0| setup.velocity.evaluate(r0));
    Simulation::new(particles, vec![setup.material], case.hourglass, case.controls)
}

/// Ready-to-step simulation of the round Taylor bar at `resolution`
/// particles per radius.
pub fn taylor_bar(resolution: usize) -> Result<Simulation<3>> {
    let case = build_case("taylor_bar_round", &numbers(&[("resolution", resolution as f64)]))?;
    let Scenario::Spatial(setup) = case.scenario else {
        unreachable!("the round bar is spatial")
    };
    let mut particles = generate_lattice(&setup.lattice)?;
    particles.apply_initial_velocity(|r0| setup.velocity.evaluate(r0));
    let mut sim = Simulation::new(particles, vec![setup.material], case.hourglass, case.controls)?;
    sim.wall = setup.wall;
    Ok(sim)
}
