//! Adiabatic elimination of dipole and field, and the resulting closed-form
//! optical forces.
//!
//! Forces are in units of ħkκ, matching dp/dt with p in ħk and t in 1/κ.

use num_complex::Complex64;

use crate::dynamics::{mode_df, mode_f, DynState};
use crate::error::{Error, Result};
use crate::integrate::OdeState;
use crate::params::SystemParams;

#[inline]
fn beat(params: &SystemParams, t: f64) -> Complex64 {
    let (s, c) = (params.delta_t * t).sin_cos();
    Complex64::new(c, s)
}

/// Position dependent cavity detuning Δ(θ) = Δc − U0 f²(θ).
#[inline]
pub fn shifted_detuning(theta: f64, params: &SystemParams) -> f64 {
    let f = mode_f(theta);
    params.delta_c - params.u0() * f * f
}

/// Steady-state dipole for a given field, returned as g·β.
pub fn eliminated_dipole(
    alpha: Complex64,
    theta: f64,
    t: f64,
    params: &SystemParams,
) -> Result<Complex64> {
    if params.delta_a == 0.0 {
        return Err(Error::SingularDetuning);
    }
    let i = Complex64::i();
    Ok(i * alpha * (params.u0() * mode_f(theta)) + i * beat(params, t) * params.eta_t_bar())
}

/// Cavity field with both dipole and field adiabatically eliminated.
pub fn steady_alpha(theta: f64, t: f64, params: &SystemParams) -> Complex64 {
    let f = mode_f(theta);
    let num = params.eta_l - Complex64::i() * beat(params, t) * (params.eta_t_bar() * f);
    num / Complex64::new(params.kappa, -shifted_detuning(theta, params))
}

/// Closed-form intracavity photon number |α_ss|².
pub fn photon_number(theta: f64, t: f64, params: &SystemParams) -> f64 {
    let f = mode_f(theta);
    let (eta_l, eta_b) = (params.eta_l, params.eta_t_bar());
    let delta = shifted_detuning(theta, params);
    (eta_l * eta_l + eta_b * eta_b * f * f + 2.0 * eta_l * eta_b * f * (params.delta_t * t).sin())
        / (params.kappa * params.kappa + delta * delta)
}

/// The three contributions to the adiabatic optical force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceBreakdown {
    /// Longitudinal pump alone (cos² lattice).
    pub f_l: f64,
    /// Transverse pump scattered into the cavity, time independent.
    pub f_t: f64,
    /// Interference of the two pumps, oscillating at δT.
    pub f_lt: f64,
    pub total: f64,
}

pub fn force_breakdown(theta: f64, t: f64, params: &SystemParams) -> ForceBreakdown {
    let f = mode_f(theta);
    let fp = mode_df(theta);
    let u0 = params.u0();
    let eta_b = params.eta_t_bar();
    let delta = params.delta_c - u0 * f * f;
    let denom = params.kappa * params.kappa + delta * delta;
    let (s, c) = (params.delta_t * t).sin_cos();

    let f_l = -2.0 * fp * f * params.eta_l * params.eta_l * u0 / denom;
    let f_t = -2.0 * fp * f * eta_b * eta_b * params.delta_c / denom;
    let f_lt = -2.0 * fp * eta_b * params.eta_l
        * (params.kappa * c + (params.delta_c + u0 * f * f) * s)
        / denom;
    let total = f_l + f_t + f_lt;
    debug_assert_eq!(total, f_l + f_t + f_lt);
    ForceBreakdown {
        f_l,
        f_t,
        f_lt,
        total,
    }
}

/// Force with the field and dipole eliminated, −2f′ Im{α*·gβ}.
pub fn eliminated_force(theta: f64, t: f64, params: &SystemParams) -> Result<f64> {
    let alpha = steady_alpha(theta, t, params);
    let g_beta = eliminated_dipole(alpha, theta, t, params)?;
    Ok(-2.0 * mode_df(theta) * (alpha.conj() * g_beta).im)
}

/// Interference force alone with the lattice shift U0 f² neglected:
/// 2 sinθ · η̄T ηL cos(δT t − φΔ) / √(κ² + Δc²).
pub fn force_interference_approx(theta: f64, t: f64, params: &SystemParams) -> f64 {
    let norm = params.kappa.hypot(params.delta_c);
    2.0 * theta.sin() * params.eta_t_bar() * params.eta_l
        * (params.delta_t * t - params.phi_delta()).cos()
        / norm
}

/// Which pump value enters the double-well frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DoubleWellPump {
    /// Bare transverse amplitude ηT.
    #[default]
    Raw,
    /// Effective amplitude η̄T = gηT/Δa.
    Effective,
}

/// A squared frequency that may be negative (anti-trapping).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedSquare(pub f64);

impl SignedSquare {
    /// Frequency, present only when the squared value is non-negative.
    pub fn frequency(self) -> Option<f64> {
        (self.0 >= 0.0).then(|| self.0.sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpectrum {
    pub omega_tr_lt: SignedSquare,
    pub omega_tr_l: SignedSquare,
    pub omega_bar_plus: SignedSquare,
    pub omega_bar_minus: SignedSquare,
}

/// Small-oscillation frequencies of the interference lattice, the
/// longitudinal lattice and the double-well structure.
pub fn trap_spectrum(params: &SystemParams, pump: DoubleWellPump) -> TrapSpectrum {
    let d0 = params.kappa * params.kappa + params.delta_c * params.delta_c;
    let wr = params.omega_r;
    let u0 = params.u0();
    let eta_l = params.eta_l;
    let eta_dw = match pump {
        DoubleWellPump::Raw => params.eta_t,
        DoubleWellPump::Effective => params.eta_t_bar(),
    };
    TrapSpectrum {
        omega_tr_lt: SignedSquare(4.0 * wr * params.kappa * params.eta_t_bar() * eta_l / d0),
        omega_tr_l: SignedSquare(8.0 * wr * u0 * eta_l * eta_l / d0),
        omega_bar_plus: SignedSquare(8.0 * wr * eta_l * (u0 * eta_l + eta_dw) / d0),
        omega_bar_minus: SignedSquare(8.0 * wr * eta_l * (u0 * eta_l - eta_dw) / d0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    InterferenceTrapping,
    LongitudinalTrapping,
    Unclassified,
}

impl Regime {
    pub fn label(self) -> &'static str {
        match self {
            Regime::InterferenceTrapping => "interference-trapping",
            Regime::LongitudinalTrapping => "longitudinal-trapping",
            Regime::Unclassified => "unclassified",
        }
    }
}

/// Largest |F_L| over position, with U0 f² neglected in the denominator.
pub fn max_longitudinal_force(params: &SystemParams) -> f64 {
    let d0 = params.kappa * params.kappa + params.delta_c * params.delta_c;
    params.eta_l * params.eta_l * params.u0().abs() / d0
}

/// Largest |F_LT| over position and time, with U0 f² neglected.
pub fn max_interference_force(params: &SystemParams) -> f64 {
    let d0 = params.kappa * params.kappa + params.delta_c * params.delta_c;
    2.0 * (params.eta_t_bar() * params.eta_l).abs() * d0.sqrt() / d0
}

/// Factor separating "much greater" from "comparable".
pub const SEPARATION: f64 = 10.0;

pub fn regime_check(params: &SystemParams) -> Regime {
    let (g, eta_l, eta_t) = (params.g, params.eta_l, params.eta_t);
    let strong_transverse = eta_t > SEPARATION * g * eta_l;
    let upper = if g * params.delta_c == 0.0 {
        f64::INFINITY
    } else {
        (eta_l * params.delta_a / (g * params.delta_c)).abs() / SEPARATION
    };
    let small_shift = (params.u0() * params.delta_c).abs() < 1.0 / SEPARATION;
    if strong_transverse && eta_t < upper && small_shift {
        Regime::InterferenceTrapping
    } else if max_longitudinal_force(params) > max_interference_force(params) {
        Regime::LongitudinalTrapping
    } else {
        Regime::Unclassified
    }
}

/// Transverse pump at which the longitudinal and interference force maxima
/// balance: ηL g / (2√(κ² + Δc²)).
pub fn jump_threshold_estimate(params: &SystemParams) -> f64 {
    params.eta_l * params.g / (2.0 * params.kappa.hypot(params.delta_c))
}

/// Particle-only state driven by the adiabatic force.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionState {
    pub theta: f64,
    pub p: f64,
    pub t: f64,
}

impl OdeState for MotionState {
    fn time(&self) -> f64 {
        self.t
    }
    fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
    fn axpy(&self, h: f64, d: &Self) -> Self {
        MotionState {
            theta: self.theta + h * d.theta,
            p: self.p + h * d.p,
            t: self.t + h,
        }
    }
    fn weighted_sum(k: [&Self; 4], w: [f64; 4]) -> Self {
        MotionState {
            theta: w[0] * k[0].theta + w[1] * k[1].theta + w[2] * k[2].theta + w[3] * k[3].theta,
            p: w[0] * k[0].p + w[1] * k[1].p + w[2] * k[2].p + w[3] * k[3].p,
            t: 0.0,
        }
    }
    fn is_finite(&self) -> bool {
        self.theta.is_finite() && self.p.is_finite()
    }
}

impl From<&DynState> for MotionState {
    fn from(s: &DynState) -> Self {
        MotionState {
            theta: s.theta,
            p: s.p,
            t: s.t,
        }
    }
}

/// Motion-only equations with the closed-form adiabatic force.
pub fn rhs_adiabatic(state: &MotionState, params: &SystemParams) -> MotionState {
    MotionState {
        theta: 2.0 * params.omega_r * state.p,
        p: force_breakdown(state.theta, state.t, params).total,
        t: 1.0,
    }
}

/// Tabulated force decomposition on a (θ, t) grid, row-major in t.
pub fn force_grid(
    thetas: &[f64],
    times: &[f64],
    params: &SystemParams,
) -> Vec<(f64, f64, ForceBreakdown)> {
    times
        .iter()
        .flat_map(|&t| thetas.iter().map(move |&th| (th, t, force_breakdown(th, t, params))))
        .collect()
}
