//! The walk statistics applied to an ideal random walk of ±1/2 jumps.
//!
//! cargo run --example synthetic_walk

use rand::Rng;

use quasiwalk::ensemble::member_rng;
use quasiwalk::walk::{ensemble_stats, DiscreteWalk};

fn main() -> quasiwalk::Result<()> {
    let mut rng = member_rng(1, 0);
    let walks: Vec<DiscreteWalk> = (0..2000)
        .map(|_| {
            let mut x = 0.5;
            let sites = (0..100)
                .map(|_| {
                    x += if rng.gen::<bool>() { 0.5 } else { -0.5 };
                    x
                })
                .collect();
            DiscreteWalk { period: 1.0, origin: 0.5, sites }
        })
        .collect();
    let s = ensemble_stats(&walks, 10)?;
    println!("slope {:.4} ± {:.4} (ideal 0.25)", s.diffusion.slope, s.diffusion.slope_stderr);
    let c: Vec<String> = s.correlation.values.iter().map(|v| format!("{v:+.3}")).collect();
    println!("C(τ) = [{}]", c.join(", "));
    Ok(())
}
