//! Damped particle under white and colored noise: Monte Carlo variance
//! against the closed form and the correlation-kernel quadrature.
//!
//! cargo run --release --example langevin_kernels

use quasiwalk::langevin::{
    langevin_run, variance_analytic, variance_double_integral, KernelKind, LangevinParams,
};

fn main() -> quasiwalk::Result<()> {
    let mut white = LangevinParams::calibrated(KernelKind::Delta, 0.0);
    white.n_realizations = 1000;
    let curve = langevin_run(&white, 0)?;
    println!("delta kernel, {} realizations", white.n_realizations);
    for k in (0..curve.times.len()).step_by(8) {
        let t = curve.times[k];
        println!(
            "  t = {t:5.1}: MC {:.4} ± {:.4}, closed form {:.4}",
            curve.variance[k],
            curve.stderr[k],
            variance_analytic(1.0, white.kernel.d, t)
        );
    }

    println!("long-time slopes relative to 2d/λ² = 0.25:");
    for kind in [KernelKind::GaussianCosine, KernelKind::ExponentialCosine] {
        for omega in [0.5, 1.0, 1.5, 2.0] {
            let p = LangevinParams::calibrated(kind, omega);
            let (t1, t2) = (30.0, 40.0);
            let slope = (variance_double_integral(&p.kernel, 1.0, t2)?
                - variance_double_integral(&p.kernel, 1.0, t1)?)
                / (t2 - t1);
            println!("  {:<19} Ω = {omega}: {:.3}", kind.label(), slope / 0.25);
        }
    }
    Ok(())
}
