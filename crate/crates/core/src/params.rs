use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the driven atom-cavity system.
///
/// All rates, detunings and pump amplitudes are expressed in units of the
/// cavity decay rate, which is therefore normally 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    pub kappa: f64,
    pub gamma: f64,
    pub delta_a: f64,
    pub delta_c: f64,
    pub delta_t: f64,
    pub eta_l: f64,
    pub eta_t: f64,
    pub g: f64,
    pub omega_r: f64,
}

impl SystemParams {
    /// Baseline set used for the single-trajectory walk: Δa = Δc = −1.5,
    /// ηL = γ = 1, g = 0.01, ωr = 0.1, δT = π/100, ηT = 0.55.
    pub fn baseline() -> Self {
        SystemParams {
            kappa: 1.0,
            gamma: 1.0,
            delta_a: -1.5,
            delta_c: -1.5,
            delta_t: PI / 100.0,
            eta_l: 1.0,
            eta_t: 0.55,
            g: 1e-2,
            omega_r: 0.1,
        }
    }

    /// Same parameters with the beat detuning chosen so the jump period is `period`.
    pub fn with_jump_period(mut self, period: f64) -> Self {
        self.delta_t = PI / period;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("delta_a", self.delta_a),
            ("delta_c", self.delta_c),
            ("delta_t", self.delta_t),
            ("eta_l", self.eta_l),
            ("eta_t", self.eta_t),
            ("g", self.g),
            ("omega_r", self.omega_r),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParam(format!("{name} is not finite")));
        }
        if self.kappa <= 0.0 {
            return Err(Error::InvalidParam("kappa must be > 0".into()));
        }
        if self.omega_r <= 0.0 {
            return Err(Error::InvalidParam("omega_r must be > 0".into()));
        }
        for (name, v) in [
            ("gamma", self.gamma),
            ("g", self.g),
            ("eta_l", self.eta_l),
            ("eta_t", self.eta_t),
        ] {
            if v < 0.0 {
                return Err(Error::InvalidParam(format!("{name} must be >= 0")));
            }
        }
        Ok(())
    }

    /// Dispersive light shift per photon, g²/Δa.
    pub fn u0(&self) -> f64 {
        self.g * self.g / self.delta_a
    }

    /// Effective transverse pump seen by the cavity, g·ηT/Δa.
    pub fn eta_t_bar(&self) -> f64 {
        self.g * self.eta_t / self.delta_a
    }

    /// Phase lag of the interference force, arctan(Δc/κ).
    pub fn phi_delta(&self) -> f64 {
        (self.delta_c / self.kappa).atan()
    }

    /// Jump period π/δT. Fails when the beat detuning vanishes.
    pub fn jump_period(&self) -> Result<f64> {
        if self.delta_t == 0.0 {
            return Err(Error::InvalidParam(
                "delta_t must be non-zero to define a jump period".into(),
            ));
        }
        let d = self.delta_t.abs();
        let t = PI / d;
        // A beat set as π/T for a whole-number T reports exactly T.
        let whole = t.round();
        if whole > 0.0 && PI / whole == d {
            return Ok(whole);
        }
        Ok(t)
    }

    /// Largest characteristic rate, used to bound the step size.
    pub fn fastest_rate(&self) -> f64 {
        [1.0, self.kappa, self.gamma, self.delta_a.abs(), self.delta_c.abs()]
            .into_iter()
            .fold(0.0, f64::max)
    }
}
