//! Thermal initial conditions in a low-field-seeking lattice.
//!
//! cargo run --example thermal_init

use std::f64::consts::TAU;

use quasiwalk::ensemble::{member_rng, thermal_init_sampler, ThermalWidths};
use quasiwalk::params::SystemParams;

fn main() -> quasiwalk::Result<()> {
    let mut params = SystemParams::baseline();
    // Positive U0 so that the thermal state sits at the lattice minima.
    params.delta_a = 1.5;
    params.delta_c = 1.5;
    // A strong coupling gives a deep lattice and a narrow position spread.
    params.g = 2.0;
    let widths = ThermalWidths::new(&params)?;
    println!("δx0 = {:.4} rad, δp0 = {:.4}", widths.delta_x0, widths.delta_p0);

    let mut rng = member_rng(3, 0);
    let n = 20_000;
    let draws: Vec<(f64, f64)> = (0..n)
        .map(|_| thermal_init_sampler(&params, &mut rng))
        .collect::<Result<_, _>>()?;
    let std = |v: &dyn Fn(&(f64, f64)) -> f64| {
        (draws.iter().map(|d| v(d).powi(2)).sum::<f64>() / n as f64).sqrt()
    };
    println!("sampled std: q·2π = {:.4}, p = {:.4}", std(&|d| d.0 * TAU), std(&|d| d.1));
    Ok(())
}
