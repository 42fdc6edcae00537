//! Semiclassical equations of motion for the particle, the cavity field and
//! the atomic dipole.
//!
//! Position is carried as the mode phase `theta = k x`; the site coordinate
//! used by the walk analysis is `theta / 2π`, so trapping sites sit on
//! multiples of one half.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrate::OdeState;
use crate::params::SystemParams;

/// Cavity mode function cos(θ).
#[inline]
pub fn mode_f(theta: f64) -> f64 {
    theta.cos()
}

/// Derivative of the mode function, −sin(θ).
#[inline]
pub fn mode_df(theta: f64) -> f64 {
    -theta.sin()
}

/// Instantaneous state of particle, field and dipole.
///
/// The same type doubles as its own time derivative: in a derivative every
/// field holds the rate of change of the corresponding state field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynState {
    pub theta: f64,
    pub p: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
    /// Inversion ⟨σᶻ⟩, carried only by the full model.
    pub beta_z: Option<f64>,
    pub t: f64,
}

impl DynState {
    /// Particle at rest at phase `theta` with empty cavity and the atom in
    /// its ground state (linearized models: no inversion carried).
    pub fn at_rest(theta: f64) -> Self {
        DynState {
            theta,
            p: 0.0,
            alpha: Complex64::new(0.0, 0.0),
            beta: Complex64::new(0.0, 0.0),
            beta_z: None,
            t: 0.0,
        }
    }

    pub fn with_momentum(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    /// Adds the inversion variable pinned to the ground state.
    pub fn with_inversion(mut self) -> Self {
        self.beta_z = Some(-1.0);
        self
    }

    /// Site coordinate in units of the wavelength.
    pub fn site_coordinate(&self) -> f64 {
        self.theta / TAU
    }

    /// Excess of |β|² over the Bloch-ball bound (1−βz²)/4, or of |βz| over 1.
    /// Zero for physical states; `None` when no inversion is carried.
    pub fn bloch_excess(&self) -> Option<f64> {
        self.beta_z.map(|bz| {
            let radial = self.beta.norm_sqr() - (1.0 - bz * bz) / 4.0;
            radial.max(bz.abs() - 1.0).max(0.0)
        })
    }

    /// Saturation of a collective dipole of `n_emitters`, |β_N|²/N; the
    /// bosonic treatment needs this well below 1.
    pub fn collective_saturation(&self, n_emitters: u32) -> f64 {
        self.beta.norm_sqr() / f64::from(n_emitters.max(1))
    }
}

impl OdeState for DynState {
    fn time(&self) -> f64 {
        self.t
    }

    fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    #[inline]
    fn axpy(&self, h: f64, d: &Self) -> Self {
        DynState {
            theta: self.theta + h * d.theta,
            p: self.p + h * d.p,
            alpha: self.alpha + d.alpha * h,
            beta: self.beta + d.beta * h,
            beta_z: match (self.beta_z, d.beta_z) {
                (Some(z), Some(dz)) => Some(z + h * dz),
                (z, _) => z,
            },
            t: self.t + h,
        }
    }

    #[inline]
    fn weighted_sum(k: [&Self; 4], w: [f64; 4]) -> Self {
        let comb = |f: &dyn Fn(&Self) -> f64| -> f64 {
            w[0] * f(k[0]) + w[1] * f(k[1]) + w[2] * f(k[2]) + w[3] * f(k[3])
        };
        let ccomb = |f: &dyn Fn(&Self) -> Complex64| -> Complex64 {
            f(k[0]) * w[0] + f(k[1]) * w[1] + f(k[2]) * w[2] + f(k[3]) * w[3]
        };
        DynState {
            theta: comb(&|s| s.theta),
            p: comb(&|s| s.p),
            alpha: ccomb(&|s| s.alpha),
            beta: ccomb(&|s| s.beta),
            beta_z: k[0]
                .beta_z
                .map(|_| comb(&|s| s.beta_z.unwrap_or(0.0))),
            t: comb(&|s| s.t),
        }
    }

    fn is_finite(&self) -> bool {
        self.theta.is_finite()
            && self.p.is_finite()
            && self.alpha.is_finite()
            && self.beta.is_finite()
            && self.beta_z.map_or(true, f64::is_finite)
    }
}

/// Which set of equations drives the dipole.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// Nonlinear equations including the inversion.
    Full,
    /// Low-saturation equations with σᶻ → −1.
    Linear,
    /// Bosonic collective dipole of `n` emitters.
    Collective(u32),
}

impl Model {
    pub fn validate(&self) -> Result<()> {
        match self {
            Model::Collective(0) => Err(Error::InvalidParam(
                "collective model needs at least one emitter".into(),
            )),
            _ => Ok(()),
        }
    }

    /// Initial state for this model: particle at (θ, p), fields at zero.
    pub fn initial_state(&self, theta: f64, p: f64) -> DynState {
        let s = DynState::at_rest(theta).with_momentum(p);
        match self {
            Model::Full => s.with_inversion(),
            _ => s,
        }
    }

    /// Right-hand side for this model. Collective with `n = 0` is rejected
    /// by [`Model::validate`]; here it panics.
    #[inline]
    pub fn rhs(&self, state: &DynState, params: &SystemParams) -> DynState {
        match *self {
            Model::Full => rhs_full(state, params),
            Model::Linear => rhs_linear(state, params),
            Model::Collective(n) => {
                rhs_collective(state, params, n).expect("collective model with zero emitters")
            }
        }
    }
}

#[inline]
fn drive_phase(params: &SystemParams, t: f64) -> Complex64 {
    let (s, c) = (params.delta_t * t).sin_cos();
    Complex64::new(c, s)
}

#[inline]
fn motion(state: &DynState, params: &SystemParams, f_prime: f64) -> (f64, f64) {
    let d_theta = 2.0 * params.omega_r * state.p;
    let d_p = -2.0 * params.g * f_prime * (state.alpha.conj() * state.beta).im;
    (d_theta, d_p)
}

#[inline]
fn cavity(state: &DynState, params: &SystemParams, f: f64) -> Complex64 {
    Complex64::new(-params.kappa, params.delta_c) * state.alpha - state.beta * (params.g * f)
        + params.eta_l
}

/// Full nonlinear equations including the inversion. A state without an
/// inversion is treated as sitting in the ground state (βz = −1).
pub fn rhs_full(state: &DynState, params: &SystemParams) -> DynState {
    let bz = state.beta_z.unwrap_or(-1.0);
    let (s, c) = state.theta.sin_cos();
    let (f, f_prime) = (c, -s);
    let drive = drive_phase(params, state.t);
    let d_alpha = cavity(state, params, f);
    let d_beta = Complex64::new(-params.gamma, params.delta_a) * state.beta
        - state.alpha * (params.g * f * bz)
        - drive * (params.eta_t * bz);
    // Signs follow from the Jaynes-Cummings and pump couplings; they keep
    // |β|² + βz²/4 constant in the absence of damping.
    let d_bz = -2.0 * params.gamma * (bz + 1.0)
        + 4.0 * params.g * f * (state.beta.conj() * state.alpha).re
        + 4.0 * params.eta_t * (state.beta.conj() * drive).re;
    let (d_theta, d_p) = motion(state, params, f_prime);
    DynState {
        theta: d_theta,
        p: d_p,
        alpha: d_alpha,
        beta: d_beta,
        beta_z: state.beta_z.map(|_| d_bz),
        t: 1.0,
    }
}

/// Linearized equations (σᶻ → −1).
#[inline]
pub fn rhs_linear(state: &DynState, params: &SystemParams) -> DynState {
    let (s, c) = state.theta.sin_cos();
    let (f, f_prime) = (c, -s);
    let drive = drive_phase(params, state.t);
    let d_alpha = cavity(state, params, f);
    let d_beta = Complex64::new(-params.gamma, params.delta_a) * state.beta
        + state.alpha * (params.g * f)
        + drive * params.eta_t;
    let (d_theta, d_p) = motion(state, params, f_prime);
    DynState {
        theta: d_theta,
        p: d_p,
        alpha: d_alpha,
        beta: d_beta,
        beta_z: None,
        t: 1.0,
    }
}

/// Collective bosonic dipole of `n_emitters` emitters; `beta` holds ⟨S⁻⟩.
/// The caller supplies the recoil frequency of the heavier particle.
pub fn rhs_collective(
    state: &DynState,
    params: &SystemParams,
    n_emitters: u32,
) -> Result<DynState> {
    if n_emitters == 0 {
        return Err(Error::InvalidParam(
            "collective model needs at least one emitter".into(),
        ));
    }
    let n = f64::from(n_emitters);
    let (s, c) = state.theta.sin_cos();
    let (f, f_prime) = (c, -s);
    let drive = drive_phase(params, state.t);
    let d_alpha = cavity(state, params, f);
    let d_beta = Complex64::new(-params.gamma, params.delta_a) * state.beta
        + state.alpha * (params.g * n * f)
        + drive * (n * params.eta_t);
    let (d_theta, d_p) = motion(state, params, f_prime);
    Ok(DynState {
        theta: d_theta,
        p: d_p,
        alpha: d_alpha,
        beta: d_beta,
        beta_z: None,
        t: 1.0,
    })
}
