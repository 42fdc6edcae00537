//! Ensemble of walks at three jump periods: variance slope, correlations and
//! mixing of the two starting halves.
//!
//! cargo run --release --example ensemble_walk [n_traj] [n_steps]

use quasiwalk::ensemble::{ensemble_run, EnsembleSpec};
use quasiwalk::params::SystemParams;
use quasiwalk::walk::mixing_report;

fn main() -> quasiwalk::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("integer argument"));
    let n_traj = args.next().unwrap_or(40);
    let n_steps = args.next().unwrap_or(40);

    for period in [200.0, 250.0, 300.0] {
        let params = SystemParams::baseline().with_jump_period(period);
        let mut spec = EnsembleSpec::new(params, n_traj, n_steps);
        spec.dt = 0.05;
        spec.master_seed = 7;
        let out = ensemble_run(&spec, 0)?;
        let s = &out.stats;
        let c: Vec<String> = s.correlation.values.iter().take(6).map(|v| format!("{v:+.3}")).collect();
        println!(
            "T = {period}: slope {:.3} ± {:.3}, final std {:.2}, C(0..5) = [{}]",
            s.diffusion.slope,
            s.diffusion.slope_stderr,
            s.histogram.std_dev,
            c.join(", ")
        );
        if let Ok(m) = mixing_report(&out.final_sites()) {
            println!("    overlap of left/right starters: {:.2}", m.overlap);
        }
    }
    Ok(())
}
