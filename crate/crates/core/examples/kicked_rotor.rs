//! Frequency-comb drive: the per-period impulse of the continuous equations
//! approaches the standard-map kick, and the map's diffusion scan.
//!
//! cargo run --release --example kicked_rotor

use std::f64::consts::TAU;

use quasiwalk::comb::{chaos_scan, comb_impulse, jacobian_determinant, CombParams, KickedMap, KickedState};
use quasiwalk::params::SystemParams;

fn main() -> quasiwalk::Result<()> {
    let mut params = SystemParams::baseline();
    params.delta_a = -200.0;
    params.g = 1.0;
    params.omega_r = 0.01;
    let theta0 = 1.0;
    for n_f in [4, 16, 64] {
        let comb = CombParams { n_f, delta: TAU / 100.0, eta_t: 0.05 };
        let map = KickedMap::from_comb(&params, &comb);
        let (impulse, theta_kick) = comb_impulse(&params, &comb, theta0, 0.002)?;
        let predicted = -map.kick * theta_kick.sin();
        println!(
            "N_f = {n_f:3}: impulse {impulse:.6e}, map kick {predicted:.6e}, K_eff = {:.3}",
            map.k_eff()
        );
    }

    let det = jacobian_determinant(&KickedMap::standard(3.0), KickedState::new(0.4, 1.3));
    println!("Jacobian determinant: {det:.15}");

    let ks = [0.1, 0.5, 1.0, 2.0, 5.0, 10.0];
    for row in chaos_scan(&ks, 400, 400, 11, 0)? {
        println!(
            "K = {:5.1}: D/(K²/2) = {:.3} ({})",
            row.k_eff,
            row.growth_rate / (0.5 * row.k_eff * row.k_eff),
            row.regime.label()
        );
    }
    Ok(())
}
