//! Single trajectory at the baseline parameters, discretized into a walk.
//!
//! cargo run --release --example trajectory

use quasiwalk::dynamics::Model;
use quasiwalk::ensemble::single_trajectory;
use quasiwalk::integrate::IntegrationPlan;
use quasiwalk::params::SystemParams;
use quasiwalk::walk::{discretize, SiteRounding};

fn main() -> quasiwalk::Result<()> {
    let params = SystemParams::baseline();
    let period = params.jump_period()?;
    let plan = IntegrationPlan::new(0.01, 100.0 * period, 10)?;
    let traj = single_trajectory(&params, Model::Full, 3.5e-3, 0.0, &plan)?;
    let walk = discretize(&traj, period, SiteRounding::HalfInteger)?;

    println!("jump period T = {period:.3}, {} samples", traj.len());
    println!("distinct sites visited: {}", walk.distinct_sites());
    let nonzero = walk.jumps().iter().filter(|j| **j != 0.0).count();
    println!("non-zero jumps: {nonzero} of {}", walk.sites.len());
    let max_excess = traj
        .samples
        .iter()
        .filter_map(|s| s.bloch_excess())
        .fold(0.0, f64::max);
    println!("largest Bloch-ball excess: {max_excess:.2e}");
    let head: Vec<String> = walk.sites.iter().take(20).map(|s| format!("{s}")).collect();
    println!("first sites: {}", head.join(" "));
    Ok(())
}
