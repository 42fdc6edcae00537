//! Parallel trajectory ensembles with per-member seeded streams and an
//! ordered reduction, so results do not depend on the worker count.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::dynamics::{DynState, Model};
use crate::error::{Error, Result};
use crate::integrate::{rk4_step, IntegrationPlan, Trajectory};
use crate::params::SystemParams;
use crate::walk::{ensemble_stats, DiscreteWalk, EnsembleStats, SiteRounding, WindowAverager};

/// Bloch-ball violation above which a trajectory is flagged.
pub const BLOCH_TOLERANCE: f64 = 1e-6;

/// Stream seed of ensemble member `index` (SplitMix64 finalizer over the pair).
pub fn member_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn member_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(member_seed(master_seed, index))
}

/// Gaussian widths of a cavity-cooled thermal state, in (phase, momentum).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalWidths {
    pub delta_x0: f64,
    pub delta_p0: f64,
}

impl ThermalWidths {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let depth = params.u0() * params.eta_l * params.eta_l;
        if !(depth > 0.0) {
            return Err(Error::InvalidRegime(format!(
                "thermal position width needs U0·ηL² > 0, got {depth:e}"
            )));
        }
        Ok(ThermalWidths {
            delta_x0: 1.0 / (2.0 * depth).sqrt(),
            delta_p0: 1.0 / (2.0 * params.omega_r).sqrt(),
        })
    }
}

/// Draws `(q₀, p₀)` from the thermal state; q₀ in site units (θ/2π).
pub fn thermal_init_sampler<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Result<(f64, f64)> {
    let w = ThermalWidths::new(params)?;
    let qd = Normal::new(0.0, w.delta_x0 / TAU).expect("finite width");
    let pd = Normal::new(0.0, w.delta_p0).expect("finite width");
    Ok((qd.sample(rng), pd.sample(rng)))
}

/// How initial conditions are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialConditions {
    /// Uniform in `[−q, q] × [−p, p]`, q in site units.
    Box { q_half_width: f64, p_half_width: f64 },
    Thermal,
    /// Every member starts at the same point.
    Fixed { q0: f64, p0: f64 },
}

impl InitialConditions {
    pub fn sample<R: Rng + ?Sized>(&self, params: &SystemParams, rng: &mut R) -> Result<(f64, f64)> {
        match *self {
            InitialConditions::Box {
                q_half_width,
                p_half_width,
            } => {
                let q = if q_half_width > 0.0 {
                    rng.gen_range(-q_half_width..=q_half_width)
                } else {
                    0.0
                };
                let p = if p_half_width > 0.0 {
                    rng.gen_range(-p_half_width..=p_half_width)
                } else {
                    0.0
                };
                Ok((q, p))
            }
            InitialConditions::Thermal => thermal_init_sampler(params, rng),
            InitialConditions::Fixed { q0, p0 } => Ok((q0, p0)),
        }
    }
}

/// Everything needed to run an ensemble of walks.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    pub params: SystemParams,
    pub model: Model,
    pub init: InitialConditions,
    pub n_traj: usize,
    /// Number of jump periods integrated per member.
    pub n_steps: usize,
    pub dt: f64,
    pub master_seed: u64,
    pub tau_max: usize,
    pub rounding: SiteRounding,
}

impl EnsembleSpec {
    pub fn new(params: SystemParams, n_traj: usize, n_steps: usize) -> Self {
        EnsembleSpec {
            params,
            model: Model::Linear,
            init: InitialConditions::Box {
                q_half_width: 0.1,
                p_half_width: 0.1,
            },
            n_traj,
            n_steps,
            dt: 0.01,
            master_seed: 0,
            tau_max: 10,
            rounding: SiteRounding::HalfInteger,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.model.validate()?;
        if self.n_traj == 0 {
            return Err(Error::InvalidParam("n_traj must be >= 1".into()));
        }
        if self.n_steps < 2 {
            return Err(Error::InvalidParam("n_steps must be >= 2".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParam("dt must be > 0".into()));
        }
        let period = self.params.jump_period()?;
        if period / self.dt < crate::walk::MIN_WINDOW_SAMPLES as f64 {
            return Err(Error::InvalidParam(format!(
                "dt = {} leaves fewer than {} samples per jump period {period}",
                self.dt,
                crate::walk::MIN_WINDOW_SAMPLES
            )));
        }
        if self.tau_max + 1 > self.n_steps / 2 {
            return Err(Error::InvalidParam(format!(
                "tau_max = {} too large for {} jumps",
                self.tau_max,
                self.n_steps - 1
            )));
        }
        Ok(())
    }
}

/// Outcome of one ensemble member.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberResult {
    pub index: usize,
    pub seed: u64,
    pub q0: f64,
    pub p0: f64,
    pub walk: DiscreteWalk,
    /// Largest Bloch-ball violation seen (full model only).
    pub max_bloch_excess: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleOutput {
    pub stats: EnsembleStats,
    pub members: Vec<MemberResult>,
}

impl EnsembleOutput {
    /// Members whose inversion left the Bloch ball by more than the tolerance.
    pub fn bloch_warnings(&self) -> usize {
        self.members
            .iter()
            .filter(|m| m.max_bloch_excess.is_some_and(|e| e > BLOCH_TOLERANCE))
            .count()
    }

    /// `(q₀, final site)` pairs for [`crate::walk::mixing_report`].
    pub fn final_sites(&self) -> Vec<(f64, f64)> {
        self.members
            .iter()
            .map(|m| (m.q0, m.walk.sites.last().copied().unwrap_or(m.walk.origin)))
            .collect()
    }
}

/// Integrates one member over `n_steps` jump periods, discretizing on the fly.
pub fn run_walk(
    params: &SystemParams,
    model: Model,
    q0: f64,
    p0: f64,
    n_steps: usize,
    dt: f64,
    rounding: SiteRounding,
) -> Result<(DiscreteWalk, Option<f64>)> {
    let period = params.jump_period()?;
    let mut avg = WindowAverager::new(period, rounding)?;
    let mut state = model.initial_state(q0 * TAU, p0);
    let mut bloch = state.bloch_excess();
    avg.push(state.t, state.site_coordinate())?;
    let rhs = |s: &DynState| model.rhs(s, params);
    let mut i = 0usize;
    while avg.completed() < n_steps {
        i += 1;
        state = rk4_step(&rhs, &state, dt)?;
        state.t = i as f64 * dt;
        if let (Some(b), Some(e)) = (bloch.as_mut(), state.bloch_excess()) {
            *b = b.max(e);
        }
        avg.push(state.t, state.site_coordinate())?;
    }
    let mut walk = avg.finish();
    walk.sites.truncate(n_steps);
    Ok((walk, bloch))
}

fn run_member(spec: &EnsembleSpec, index: usize) -> Result<MemberResult> {
    let seed = member_seed(spec.master_seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let wrap = |e: Error| Error::Member {
        index,
        seed,
        source: Box::new(e),
    };
    let (q0, p0) = spec.init.sample(&spec.params, &mut rng).map_err(wrap)?;
    let (walk, max_bloch_excess) = run_walk(
        &spec.params,
        spec.model,
        q0,
        p0,
        spec.n_steps,
        spec.dt,
        spec.rounding,
    )
    .map_err(wrap)?;
    Ok(MemberResult {
        index,
        seed,
        q0,
        p0,
        walk,
        max_bloch_excess,
    })
}

/// Runs `f(i)` for `i in 0..n` on a pool of `workers` threads (0 = all
/// available) and returns results in index order.
pub fn par_indexed<T, F>(n: usize, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParam(format!("worker pool: {e}")))?;
    pool.install(|| (0..n).into_par_iter().map(&f).collect())
}

/// Simulates the ensemble and aggregates its walk statistics.
pub fn ensemble_run(spec: &EnsembleSpec, workers: usize) -> Result<EnsembleOutput> {
    spec.validate()?;
    let members = par_indexed(spec.n_traj, workers, |i| run_member(spec, i))?;
    let walks: Vec<DiscreteWalk> = members.iter().map(|m| m.walk.clone()).collect();
    let stats = ensemble_stats(&walks, spec.tau_max)?;
    Ok(EnsembleOutput { stats, members })
}

/// Stores a single trajectory (for plotting) and its discretization.
pub fn single_trajectory(
    params: &SystemParams,
    model: Model,
    q0: f64,
    p0: f64,
    plan: &IntegrationPlan,
) -> Result<Trajectory<DynState>> {
    params.validate()?;
    model.validate()?;
    let state0 = model.initial_state(q0 * TAU, p0);
    crate::integrate::integrate(|s: &DynState| model.rhs(s, params), state0, plan)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_differ_per_member_and_master() {
        let a: Vec<u64> = (0..100).map(|i| member_seed(1, i)).collect();
        let mut s = a.clone();
        s.sort_unstable();
        s.dedup();
        assert_eq!(s.len(), 100);
        assert_ne!(member_seed(1, 0), member_seed(2, 0));
        assert_eq!(member_seed(42, 7), member_seed(42, 7));
    }

    #[test]
    fn thermal_widths() {
        let mut p = SystemParams::baseline();
        p.omega_r = 0.5;
        p.delta_a = 1.0;
        p.g = 50f64.sqrt(); // U0·ηL² = 50
        p.eta_l = 1.0;
        let w = ThermalWidths::new(&p).unwrap();
        assert!((w.delta_p0 - 1.0).abs() < 1e-15);
        assert!((w.delta_x0 - 0.1).abs() < 1e-14);
    }

    #[test]
    fn thermal_rejects_high_field_seekers() {
        let p = SystemParams::baseline();
        let mut rng = member_rng(0, 0);
        assert!(matches!(
            thermal_init_sampler(&p, &mut rng),
            Err(Error::InvalidRegime(_))
        ));
    }

    #[test]
    fn box_sampling_stays_inside() {
        let p = SystemParams::baseline();
        let init = InitialConditions::Box {
            q_half_width: 0.1,
            p_half_width: 0.2,
        };
        let mut rng = member_rng(5, 0);
        for _ in 0..1000 {
            let (q, pp) = init.sample(&p, &mut rng).unwrap();
            assert!(q.abs() <= 0.1 && pp.abs() <= 0.2);
        }
    }

    #[test]
    fn validation() {
        let p = SystemParams::baseline();
        assert!(EnsembleSpec::new(p, 0, 10).validate().is_err());
        let mut s = EnsembleSpec::new(p, 1, 10);
        s.dt = 20.0;
        assert!(s.validate().is_err());
        let mut z = p;
        z.delta_t = 0.0;
        assert!(EnsembleSpec::new(z, 1, 10).validate().is_err());
        let mut s = EnsembleSpec::new(p, 1, 10);
        s.tau_max = 3;
        assert!(s.validate().is_ok());
    }

    #[test]
    fn undriven_particle_stays_put() {
        let mut p = SystemParams::baseline().with_jump_period(20.0);
        p.eta_t = 0.0;
        let mut spec = EnsembleSpec::new(p, 3, 10);
        spec.init = InitialConditions::Fixed { q0: 0.0, p0: 0.0 };
        spec.dt = 0.05;
        spec.tau_max = 2;
        let out = ensemble_run(&spec, 1).unwrap();
        assert!(out.stats.variance.iter().all(|&v| v == 0.0));
        assert_eq!(out.stats.degenerate_walks, 3);
    }
}
