//! Frequency-comb transverse driving and its kicked-rotor limit.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng;

use crate::dynamics::{mode_df, DynState};
use crate::ensemble::{member_rng, par_indexed};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::walk::linear_fit;

/// Comb of `2·n_f + 1` transverse pump teeth spaced by `delta`, each of
/// amplitude `eta_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombParams {
    pub n_f: u32,
    pub delta: f64,
    pub eta_t: f64,
}

impl CombParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return Err(Error::InvalidParam("comb spacing must be > 0".into()));
        }
        Ok(())
    }

    /// Kick period 2π/δ.
    pub fn period(&self) -> f64 {
        TAU / self.delta
    }
}

/// η_T·Σ_{n=−N}^{N} e^{inδt}, evaluated as a Dirichlet kernel.
pub fn comb_drive(t: f64, comb: &CombParams) -> f64 {
    let x = comb.delta * t;
    let teeth = 2.0 * f64::from(comb.n_f) + 1.0;
    let half = (0.5 * x).sin();
    let value = if half.abs() > 1e-6 {
        (0.5 * teeth * x).sin() / half
    } else {
        // Near the peaks the ratio loses precision; sum the cosines.
        1.0 + 2.0 * (1..=comb.n_f).map(|n| (f64::from(n) * x).cos()).sum::<f64>()
    };
    comb.eta_t * value
}

/// Exact periodic steady state of dβ/dt = iΔa β + comb_drive(t).
pub fn comb_steady_beta(t: f64, delta_a: f64, comb: &CombParams) -> Complex64 {
    let n = i64::from(comb.n_f);
    (-n..=n)
        .map(|k| {
            let w = k as f64 * comb.delta;
            let phase = Complex64::new(0.0, w * t).exp();
            -Complex64::i() * phase * (comb.eta_t / (w - delta_a))
        })
        .sum()
}

/// Comb-driven dipole without decay or cavity back-action, field held at
/// α = ηL. Only `theta`, `p` and `beta` evolve.
pub fn rhs_comb(state: &DynState, params: &SystemParams, comb: &CombParams) -> DynState {
    let d_beta = Complex64::new(0.0, params.delta_a) * state.beta + comb_drive(state.t, comb);
    let alpha = Complex64::new(params.eta_l, 0.0);
    DynState {
        theta: 2.0 * params.omega_r * state.p,
        p: -2.0 * params.g * mode_df(state.theta) * (alpha.conj() * state.beta).im,
        alpha: Complex64::new(0.0, 0.0),
        beta: d_beta,
        beta_z: None,
        t: 1.0,
    }
}

/// Phase-space point of the kicked rotor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedState {
    pub x: f64,
    pub p: f64,
    pub n: u64,
}

impl KickedState {
    pub fn new(x: f64, p: f64) -> Self {
        KickedState { x, p, n: 0 }
    }

    /// Phase wrapped to [0, 2π).
    pub fn wrapped_x(&self) -> f64 {
        self.x.rem_euclid(TAU)
    }
}

/// Kick-then-drift map p′ = p − K sin x, x′ = x + drift·p′.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedMap {
    pub kick: f64,
    pub drift: f64,
}

impl KickedMap {
    /// Standard-map normalization: unit drift, K_eff as the kick.
    pub fn standard(k_eff: f64) -> Self {
        KickedMap {
            kick: k_eff,
            drift: 1.0,
        }
    }

    /// Map generated by the comb in the Dirac limit. The force
    /// 2 sinθ ηL η̄T Σe^{inδt} integrates to a kick −K sin x with
    /// K = −2 ηL η̄T T_δ, and the drift over one period is 2ωr T_δ.
    pub fn from_comb(params: &SystemParams, comb: &CombParams) -> Self {
        let period = comb.period();
        let eta_t_bar = params.g * comb.eta_t / params.delta_a;
        KickedMap {
            kick: -2.0 * params.eta_l * eta_t_bar * period,
            drift: 2.0 * params.omega_r * period,
        }
    }

    /// Kick strength in standard-map units, drift·kick.
    pub fn k_eff(&self) -> f64 {
        self.kick * self.drift
    }

    pub fn step(&self, s: KickedState) -> KickedState {
        standard_map_step(s, self.kick, self.drift)
    }
}

pub fn standard_map_step(state: KickedState, kick: f64, drift: f64) -> KickedState {
    let p = state.p - kick * state.x.sin();
    KickedState {
        x: state.x + drift * p,
        p,
        n: state.n + 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KickRegime {
    Bounded,
    Diffusive,
}

impl KickRegime {
    pub fn label(self) -> &'static str {
        match self {
            KickRegime::Bounded => "bounded",
            KickRegime::Diffusive => "diffusive",
        }
    }
}

/// Growth rates below this fraction of K²/2 count as bounded.
pub const BOUNDED_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanRow {
    pub k_eff: f64,
    /// Least-squares slope of ⟨(p_n − p_0)²⟩ against n.
    pub growth_rate: f64,
    pub regime: KickRegime,
}

/// Ensemble ⟨(p_n − p_0)²⟩ for n = 0..=n_steps under the standard map,
/// starting from uniformly random (x, p) ∈ [0, 2π)².
pub fn momentum_spread(k_eff: f64, n_steps: usize, ensemble_size: usize, seed: u64) -> Vec<f64> {
    let map = KickedMap::standard(k_eff);
    let mut acc = vec![0.0; n_steps + 1];
    let mut rng = member_rng(seed, k_eff.to_bits());
    for _ in 0..ensemble_size {
        let p0 = rng.gen_range(0.0..TAU);
        let mut s = KickedState::new(rng.gen_range(0.0..TAU), p0);
        for a in acc.iter_mut().skip(1) {
            s = map.step(s);
            *a += (s.p - p0).powi(2);
        }
    }
    acc.iter().map(|a| a / ensemble_size as f64).collect()
}

/// Fits the momentum-variance growth rate for each K_eff and labels the
/// regime. Rows come back in input order.
pub fn chaos_scan(
    k_values: &[f64],
    n_steps: usize,
    ensemble_size: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<ScanRow>> {
    if n_steps < 2 || ensemble_size == 0 {
        return Err(Error::InvalidParam(
            "chaos scan needs >= 2 steps and a non-empty ensemble".into(),
        ));
    }
    par_indexed(k_values.len(), workers, |i| {
        let k = k_values[i];
        let spread = momentum_spread(k, n_steps, ensemble_size, seed);
        let n: Vec<f64> = (0..=n_steps).map(|v| v as f64).collect();
        let fit = linear_fit(&n, &spread)?;
        let quasilinear = 0.5 * k * k;
        let regime = if quasilinear == 0.0 || fit.slope < BOUNDED_FRACTION * quasilinear {
            KickRegime::Bounded
        } else {
            KickRegime::Diffusive
        };
        Ok(ScanRow {
            k_eff: k,
            growth_rate: fit.slope,
            regime,
        })
    })
}

/// Momentum change accumulated by the comb-driven equations over one kick
/// period centred on t = 0, starting from the dipole's periodic steady state.
/// Returns the impulse and the phase at the kick.
pub fn comb_impulse(
    params: &SystemParams,
    comb: &CombParams,
    theta0: f64,
    dt: f64,
) -> Result<(f64, f64)> {
    comb.validate()?;
    let period = comb.period();
    let t0 = -0.5 * period;
    let mut state = DynState {
        theta: theta0,
        p: 0.0,
        alpha: Complex64::new(params.eta_l, 0.0),
        beta: comb_steady_beta(t0, params.delta_a, comb),
        beta_z: None,
        t: t0,
    };
    let n = (period / dt).round() as usize;
    let h = period / n as f64;
    let rhs = |s: &DynState| rhs_comb(s, params, comb);
    let mut theta_at_kick = theta0;
    for i in 1..=n {
        state = crate::integrate::rk4_step(&rhs, &state, h)?;
        state.t = t0 + i as f64 * h;
        if i == n / 2 {
            theta_at_kick = state.theta;
        }
    }
    Ok((state.p, theta_at_kick))
}

/// Jacobian determinant of one map step, by complex-step differentiation
/// (no subtractive cancellation, so accurate to rounding).
pub fn jacobian_determinant(map: &KickedMap, s: KickedState) -> f64 {
    let h = 1e-20;
    let step = |x: Complex64, p: Complex64| {
        let p1 = p - x.sin() * map.kick;
        (x + p1 * map.drift, p1)
    };
    let (x, p) = (Complex64::new(s.x, 0.0), Complex64::new(s.p, 0.0));
    let ih = Complex64::new(0.0, h);
    let (ax, ap) = step(x + ih, p);
    let (bx, bp) = step(x, p + ih);
    (ax.im / h) * (bp.im / h) - (bx.im / h) * (ap.im / h)
}
