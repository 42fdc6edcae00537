//! Fixed-step classical Runge–Kutta integration with uniform output stride.

use crate::error::{Error, Result};

/// A state that can be advanced by the integrator.
///
/// Derivatives are represented by the same type; the time field of a
/// derivative is ignored.
pub trait OdeState: Copy {
    fn time(&self) -> f64;
    fn with_time(self, t: f64) -> Self;
    /// `self + h * d`, with time advanced by `h`.
    fn axpy(&self, h: f64, d: &Self) -> Self;
    /// `Σ w_i k_i` over derivative components.
    fn weighted_sum(k: [&Self; 4], w: [f64; 4]) -> Self;
    fn is_finite(&self) -> bool;
}

/// Step size, horizon and output stride of a fixed-step integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationPlan {
    pub dt: f64,
    pub t_end: f64,
    pub sample_stride: usize,
}

impl Default for IntegrationPlan {
    fn default() -> Self {
        IntegrationPlan {
            dt: 0.01,
            t_end: 100.0,
            sample_stride: 1,
        }
    }
}

impl IntegrationPlan {
    pub fn new(dt: f64, t_end: f64, sample_stride: usize) -> Result<Self> {
        let plan = IntegrationPlan {
            dt,
            t_end,
            sample_stride,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParam("dt must be > 0".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParam("t_end must be > 0".into()));
        }
        if self.sample_stride == 0 {
            return Err(Error::InvalidParam("sample_stride must be >= 1".into()));
        }
        Ok(())
    }

    /// Total number of steps; a horizon within 1e-9 steps of a multiple of
    /// `dt` counts as that multiple.
    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }

    pub fn n_samples(&self) -> usize {
        self.n_steps() / self.sample_stride + 1
    }

    /// Spacing of stored samples.
    pub fn output_interval(&self) -> f64 {
        self.dt * self.sample_stride as f64
    }
}

/// One classical fourth-order Runge–Kutta step. The new state's time is
/// `state.time() + dt`.
#[inline]
pub fn rk4_step<S, F>(rhs: &F, state: &S, dt: f64) -> Result<S>
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    let half = 0.5 * dt;
    let k1 = rhs(state);
    let k2 = rhs(&state.axpy(half, &k1));
    let k3 = rhs(&state.axpy(half, &k2));
    let k4 = rhs(&state.axpy(dt, &k3));
    let incr = S::weighted_sum([&k1, &k2, &k3, &k4], [1.0, 2.0, 2.0, 1.0]);
    if !incr.is_finite() {
        return Err(Error::Diverged { t: state.time() });
    }
    let t = state.time() + dt;
    Ok(state.axpy(dt / 6.0, &incr).with_time(t))
}

/// Time-ordered samples of a state at a fixed stride.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub stride: f64,
    pub samples: Vec<S>,
}

impl<S: OdeState> Trajectory<S> {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&S> {
        self.samples.last()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time() - a.time(),
            _ => 0.0,
        }
    }
}

/// Integrates `state0` over the plan and keeps every `sample_stride`-th state.
///
/// Times are computed as `t0 + i·dt` from the step counter, so the sampling
/// grid is exactly uniform.
pub fn integrate<S, F>(rhs: F, state0: S, plan: &IntegrationPlan) -> Result<Trajectory<S>>
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    plan.validate()?;
    let n_steps = plan.n_steps();
    let mut samples = Vec::with_capacity(plan.n_samples());
    samples.push(state0);
    let t0 = state0.time();
    let mut state = state0;
    for i in 1..=n_steps {
        state = rk4_step(&rhs, &state, plan.dt)?.with_time(t0 + i as f64 * plan.dt);
        if i % plan.sample_stride == 0 {
            samples.push(state);
        }
    }
    Ok(Trajectory {
        stride: plan.output_interval(),
        samples,
    })
}

/// Integrates without storing intermediate samples; returns the final state.
pub fn integrate_final<S, F>(rhs: F, state0: S, plan: &IntegrationPlan) -> Result<S>
where
    S: OdeState,
    F: Fn(&S) -> S,
{
    plan.validate()?;
    let t0 = state0.time();
    let mut state = state0;
    for i in 1..=plan.n_steps() {
        state = rk4_step(&rhs, &state, plan.dt)?.with_time(t0 + i as f64 * plan.dt);
    }
    Ok(state)
}
