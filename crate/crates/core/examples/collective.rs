//! Collective dipole of N emitters: a single emitter reproduces the linear
//! model, and the saturation stays low along a trajectory.
//!
//! cargo run --release --example collective

use quasiwalk::dynamics::{rhs_collective, rhs_linear, DynState, Model};
use quasiwalk::ensemble::single_trajectory;
use quasiwalk::integrate::IntegrationPlan;
use quasiwalk::params::SystemParams;

fn main() -> quasiwalk::Result<()> {
    let params = SystemParams::baseline();
    let probe = DynState::at_rest(0.7).with_momentum(0.01);
    let a = rhs_collective(&probe, &params, 1)?;
    let b = rhs_linear(&probe, &params);
    println!("N = 1 matches linear: {}", a == b);

    let plan = IntegrationPlan::new(0.01, 1000.0, 100)?;
    for n in [1u32, 10, 100] {
        let traj = single_trajectory(&params, Model::Collective(n), 0.1, 0.0, &plan)?;
        let peak = traj.samples.iter().map(|s| s.beta.norm_sqr()).fold(0.0, f64::max);
        println!("N = {n:3}: max |β|²/N = {:.3e}", peak / f64::from(n));
    }
    Ok(())
}
