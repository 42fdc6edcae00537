//! Force decomposition, trap frequencies and regime classification.
//!
//! cargo run --example force_profile

use std::f64::consts::PI;

use quasiwalk::forces::{
    eliminated_force, force_breakdown, jump_threshold_estimate, regime_check, trap_spectrum,
    DoubleWellPump,
};
use quasiwalk::params::SystemParams;

fn main() -> quasiwalk::Result<()> {
    let params = SystemParams::baseline();
    let period = params.jump_period()?;
    println!("regime: {}", regime_check(&params).label());
    println!("jump threshold |p| ~ {:.3e}", jump_threshold_estimate(&params));

    println!("{:>8} {:>8} {:>12} {:>12} {:>12} {:>12}", "theta", "t/T", "F_L", "F_T", "F_LT", "total");
    for t_frac in [0.0, 0.5, 1.0] {
        for theta in [0.25 * PI, 0.5 * PI, 0.75 * PI] {
            let t = t_frac * period;
            let f = force_breakdown(theta, t, &params);
            let direct = eliminated_force(theta, t, &params)?;
            assert!((f.total - direct).abs() <= 1e-12 * direct.abs().max(1e-300));
            println!(
                "{theta:8.4} {t_frac:8.2} {:12.4e} {:12.4e} {:12.4e} {:12.4e}",
                f.f_l, f.f_t, f.f_lt, f.total
            );
        }
    }

    let spec = trap_spectrum(&params, DoubleWellPump::Raw);
    let show = |name: &str, w: quasiwalk::forces::SignedSquare| match w.frequency() {
        Some(f) => println!("{name}: {f:.4e}"),
        None => println!("{name}: anti-trapping (ω² = {:.3e})", w.0),
    };
    show("omega_tr,LT", spec.omega_tr_lt);
    show("omega_tr,L", spec.omega_tr_l);
    show("omega_bar,+", spec.omega_bar_plus);
    show("omega_bar,-", spec.omega_bar_minus);
    Ok(())
}
