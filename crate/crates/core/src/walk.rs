//! Discrete lattice walks extracted from continuous trajectories, and the
//! statistics used to judge how random they are.

use crate::dynamics::DynState;
use crate::error::{Error, Result};
use crate::integrate::Trajectory;

/// Minimum number of samples a discretization window must contain.
pub const MIN_WINDOW_SAMPLES: usize = 10;

/// How a windowed mean position is mapped to a lattice site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SiteRounding {
    /// Nearest multiple of 1/2 (the trapping lattice).
    #[default]
    HalfInteger,
    /// Nearest integer, for comparison.
    Integer,
}

impl SiteRounding {
    /// Ties round away from zero.
    pub fn apply(self, q: f64) -> f64 {
        match self {
            SiteRounding::HalfInteger => (2.0 * q).round() / 2.0,
            SiteRounding::Integer => q.round(),
        }
    }
}

/// Site sequence of one trajectory sampled once per jump period.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteWalk {
    pub period: f64,
    /// Site of the initial position.
    pub origin: f64,
    /// `sites[n-1]` is the site over window `[(n-1)T, nT]`.
    pub sites: Vec<f64>,
}

impl DiscreteWalk {
    pub fn jumps(&self) -> Vec<f64> {
        self.sites.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Displacements `x_n − origin` for n = 1..N.
    pub fn displacements(&self) -> impl Iterator<Item = f64> + '_ {
        self.sites.iter().map(move |x| x - self.origin)
    }

    pub fn distinct_sites(&self) -> usize {
        let mut s: Vec<i64> = self.sites.iter().map(|x| (2.0 * x).round() as i64).collect();
        s.sort_unstable();
        s.dedup();
        s.len()
    }
}

/// Streaming trapezoidal window averager.
///
/// Samples `(t, q)` are pushed in time order; every time a window boundary
/// `t_n = t_0 + nT` is crossed, the mean over the finished window is closed
/// using linear interpolation at the boundary.
#[derive(Debug, Clone)]
pub struct WindowAverager {
    period: f64,
    rounding: SiteRounding,
    t0: f64,
    prev: Option<(f64, f64)>,
    integral: f64,
    window_samples: usize,
    origin: Option<f64>,
    sites: Vec<f64>,
}

impl WindowAverager {
    pub fn new(period: f64, rounding: SiteRounding) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParam("jump period must be > 0".into()));
        }
        Ok(WindowAverager {
            period,
            rounding,
            t0: 0.0,
            prev: None,
            integral: 0.0,
            window_samples: 0,
            origin: None,
            sites: Vec::new(),
        })
    }

    fn boundary(&self) -> f64 {
        self.t0 + (self.sites.len() + 1) as f64 * self.period
    }

    pub fn push(&mut self, t: f64, q: f64) -> Result<()> {
        let Some((tp, qp)) = self.prev else {
            self.t0 = t;
            self.origin = Some(self.rounding.apply(q));
            self.prev = Some((t, q));
            self.window_samples = 1;
            return Ok(());
        };
        let (mut ta, mut qa) = (tp, qp);
        // Tolerance so that a sample landing on the boundary up to rounding
        // closes the window rather than leaving a sliver.
        let eps = 1e-9 * self.period;
        loop {
            let tb = self.boundary();
            if t < tb - eps {
                break;
            }
            let qb = if (t - tb).abs() <= eps {
                q
            } else {
                qa + (q - qa) * (tb - ta) / (t - ta)
            };
            self.integral += 0.5 * (qa + qb) * (tb - ta);
            if (t - tb).abs() <= eps {
                self.window_samples += 1;
            }
            let n = self.sites.len();
            if self.window_samples < MIN_WINDOW_SAMPLES {
                return Err(Error::UndersampledWindow {
                    window: n + 1,
                    samples: self.window_samples,
                    min: MIN_WINDOW_SAMPLES,
                });
            }
            self.sites.push(self.rounding.apply(self.integral / self.period));
            self.integral = 0.0;
            self.window_samples = usize::from((t - tb).abs() <= eps);
            ta = tb;
            qa = qb;
        }
        self.integral += 0.5 * (qa + q) * (t - ta);
        if t > ta {
            self.window_samples += 1;
        }
        self.prev = Some((t, q));
        Ok(())
    }

    pub fn completed(&self) -> usize {
        self.sites.len()
    }

    /// Completed windows only; a partial trailing window is dropped.
    pub fn finish(self) -> DiscreteWalk {
        DiscreteWalk {
            period: self.period,
            origin: self.origin.unwrap_or(0.0),
            sites: self.sites,
        }
    }
}

/// Discretizes a stored trajectory into one site per jump period.
pub fn discretize(
    traj: &Trajectory<DynState>,
    period: f64,
    rounding: SiteRounding,
) -> Result<DiscreteWalk> {
    let duration = traj.duration();
    if duration < 2.0 * period * (1.0 - 1e-12) {
        return Err(Error::TrajectoryTooShort {
            duration,
            required: 2.0 * period,
        });
    }
    let mut avg = WindowAverager::new(period, rounding)?;
    for s in &traj.samples {
        avg.push(s.t, s.site_coordinate())?;
    }
    Ok(avg.finish())
}

/// Normalized autocorrelation of a sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSeries {
    pub values: Vec<f64>,
    pub normalized: bool,
}

impl CorrelationSeries {
    pub fn tau_max(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    /// Minimum over lags `lo..=hi` (clamped to the available range).
    pub fn min_over(&self, lo: usize, hi: usize) -> f64 {
        self.values
            .iter()
            .skip(lo)
            .take(hi + 1 - lo)
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Unnormalized autocovariance `(1/(N−1)) Σ_{n<N} (x_{n+τ}−m)(x_n−m)`.
///
/// Every lag sums over the same `N = len − tau_max` leading terms, and `m`
/// is the mean of the whole sequence.
pub fn autocovariance(seq: &[f64], tau_max: usize) -> Result<Vec<f64>> {
    let len = seq.len();
    if len < 2 || tau_max > len / 2 {
        return Err(Error::SequenceTooShort { len, tau_max });
    }
    let n = len - tau_max;
    let mean = seq.iter().sum::<f64>() / len as f64;
    let centered: Vec<f64> = seq.iter().map(|x| x - mean).collect();
    let norm = (n.max(2) - 1) as f64;
    Ok((0..=tau_max)
        .map(|tau| {
            centered[tau..tau + n]
                .iter()
                .zip(&centered[..n])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / norm
        })
        .collect())
}

/// Jump autocorrelation normalized so that C(0) = 1.
pub fn autocorrelation(jumps: &[f64], tau_max: usize) -> Result<CorrelationSeries> {
    let raw = autocovariance(jumps, tau_max)?;
    let c0 = raw[0];
    if c0 <= 0.0 {
        return Err(Error::DegenerateSequence);
    }
    let mut values: Vec<f64> = raw.iter().map(|c| c / c0).collect();
    values[0] = 1.0;
    Ok(CorrelationSeries {
        values,
        normalized: true,
    })
}

/// Least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope (zero when fewer than three points).
    pub slope_stderr: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return Err(Error::SequenceTooShort { len: n, tau_max: 0 });
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateSequence);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_stderr = if n > 2 {
        let rss: f64 = x
            .iter()
            .zip(y)
            .map(|(a, b)| (b - intercept - slope * a).powi(2))
            .sum();
        (rss / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
    })
}

/// One bin per lattice site (width 1/2).
#[derive(Debug, Clone, PartialEq)]
pub struct SiteHistogram {
    pub bins: Vec<(f64, u64)>,
    pub mean: f64,
    /// Sample standard deviation of the underlying values.
    pub std_dev: f64,
}

impl SiteHistogram {
    pub fn from_sites(sites: &[f64]) -> Self {
        let mut keys: Vec<i64> = sites.iter().map(|x| (2.0 * x).round() as i64).collect();
        keys.sort_unstable();
        let mut bins: Vec<(f64, u64)> = Vec::new();
        for k in keys {
            let site = k as f64 / 2.0;
            match bins.last_mut() {
                Some((s, c)) if *s == site => *c += 1,
                _ => bins.push((site, 1)),
            }
        }
        let n = sites.len() as f64;
        let mean = if sites.is_empty() {
            0.0
        } else {
            sites.iter().sum::<f64>() / n
        };
        let std_dev = if sites.len() > 1 {
            (sites.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        SiteHistogram {
            bins,
            mean,
            std_dev,
        }
    }

    pub fn total(&self) -> u64 {
        self.bins.iter().map(|(_, c)| c).sum()
    }
}

/// Aggregated statistics of an ensemble of walks.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    /// `variance[n-1]` is the ensemble variance of `x_n − x_origin`.
    pub variance: Vec<f64>,
    pub histogram: SiteHistogram,
    pub diffusion: LinearFit,
    /// Per-walk normalized correlations averaged with equal weight.
    pub correlation: CorrelationSeries,
    /// Walks whose jump sequence was constant and so carry no correlation.
    pub degenerate_walks: usize,
    pub n_walks: usize,
}

/// Aggregates walks of equal length. Walk order matters only through
/// floating-point summation order, which is fixed by the slice order.
pub fn ensemble_stats(walks: &[DiscreteWalk], tau_max: usize) -> Result<EnsembleStats> {
    let Some(first) = walks.first() else {
        return Err(Error::EmptySubpopulation("ensemble"));
    };
    let n_sites = first.sites.len();
    if n_sites < 2 || walks.iter().any(|w| w.sites.len() != n_sites) {
        return Err(Error::InvalidParam(
            "walks must share a common length of at least two sites".into(),
        ));
    }
    let m = walks.len() as f64;
    let mut sum = vec![0.0; n_sites];
    let mut sum_sq = vec![0.0; n_sites];
    for w in walks {
        for (i, d) in w.displacements().enumerate() {
            sum[i] += d;
            sum_sq[i] += d * d;
        }
    }
    let variance: Vec<f64> = sum
        .iter()
        .zip(&sum_sq)
        .map(|(s, s2)| (s2 / m - (s / m).powi(2)).max(0.0))
        .collect();

    let finals: Vec<f64> = walks.iter().map(|w| w.sites[n_sites - 1] - w.origin).collect();
    let histogram = SiteHistogram::from_sites(&finals);

    let ns: Vec<f64> = (1..=n_sites).map(|n| n as f64).collect();
    let diffusion = linear_fit(&ns, &variance)?;

    let mut acc = vec![0.0; tau_max + 1];
    let mut used = 0usize;
    let mut degenerate = 0usize;
    for w in walks {
        match autocorrelation(&w.jumps(), tau_max) {
            Ok(c) => {
                used += 1;
                for (a, v) in acc.iter_mut().zip(&c.values) {
                    *a += v;
                }
            }
            Err(Error::DegenerateSequence) => degenerate += 1,
            Err(e) => return Err(e),
        }
    }
    let correlation = CorrelationSeries {
        values: if used > 0 {
            acc.iter().map(|a| a / used as f64).collect()
        } else {
            vec![f64::NAN; tau_max + 1]
        },
        normalized: true,
    };

    Ok(EnsembleStats {
        variance,
        histogram,
        diffusion,
        correlation,
        degenerate_walks: degenerate,
        n_walks: walks.len(),
    })
}

/// Overlap between the final-site distributions of walks started left and
/// right of the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingReport {
    pub n_negative: usize,
    pub n_positive: usize,
    /// Mean final site of the positive-start group minus the negative one.
    pub mean_difference: f64,
    /// Σ_site min(p₊, p₋) over normalized histograms; 1 for identical
    /// distributions, 0 for disjoint ones.
    pub overlap: f64,
}

/// Partitions `(initial q, final site)` pairs by the sign of q and compares
/// the two final-site distributions. Starts exactly at zero are ignored.
pub fn mixing_report(members: &[(f64, f64)]) -> Result<MixingReport> {
    let neg: Vec<f64> = members.iter().filter(|m| m.0 < 0.0).map(|m| m.1).collect();
    let pos: Vec<f64> = members.iter().filter(|m| m.0 > 0.0).map(|m| m.1).collect();
    if neg.is_empty() {
        return Err(Error::EmptySubpopulation("negative initial positions"));
    }
    if pos.is_empty() {
        return Err(Error::EmptySubpopulation("positive initial positions"));
    }
    let hn = SiteHistogram::from_sites(&neg);
    let hp = SiteHistogram::from_sites(&pos);
    let (nn, np) = (neg.len() as f64, pos.len() as f64);
    let overlap = hp
        .bins
        .iter()
        .map(|(site, cp)| {
            let cn = hn
                .bins
                .iter()
                .find(|(s, _)| s == site)
                .map_or(0, |(_, c)| *c);
            (*cp as f64 / np).min(cn as f64 / nn)
        })
        .sum();
    Ok(MixingReport {
        n_negative: neg.len(),
        n_positive: pos.len(),
        mean_difference: hp.mean - hn.mean,
        overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrate::Trajectory;
    use std::f64::consts::TAU;

    fn constant_traj(q: f64, t_end: f64, dt: f64) -> Trajectory<DynState> {
        let n = (t_end / dt).round() as usize;
        Trajectory {
            stride: dt,
            samples: (0..=n)
                .map(|i| DynState {
                    t: i as f64 * dt,
                    ..DynState::at_rest(q * TAU)
                })
                .collect(),
        }
    }

    #[test]
    fn constant_at_origin() {
        let w = discretize(&constant_traj(0.0, 1000.0, 1.0), 100.0, SiteRounding::HalfInteger)
            .unwrap();
        assert_eq!(w.sites.len(), 10);
        assert!(w.sites.iter().all(|&x| x == 0.0));
        assert!(w.jumps().iter().all(|&j| j == 0.0));
    }

    #[test]
    fn rounds_to_nearest_half_site() {
        let w = discretize(&constant_traj(0.26, 500.0, 1.0), 100.0, SiteRounding::HalfInteger)
            .unwrap();
        assert!(w.sites.iter().all(|&x| x == 0.5));
        let w = discretize(&constant_traj(0.26, 500.0, 1.0), 100.0, SiteRounding::Integer).unwrap();
        assert!(w.sites.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn ties_round_away_from_zero() {
        assert_eq!(SiteRounding::HalfInteger.apply(0.25), 0.5);
        assert_eq!(SiteRounding::HalfInteger.apply(-0.25), -0.5);
        assert_eq!(SiteRounding::Integer.apply(-0.5), -1.0);
    }

    #[test]
    fn windowed_mean_uses_trapezoid() {
        // q ramps linearly from 0 to 2 over two windows; window means 0.5 and 1.5.
        let traj = Trajectory {
            stride: 0.5,
            samples: (0..=40)
                .map(|i| {
                    let t = i as f64 * 0.5;
                    DynState {
                        t,
                        ..DynState::at_rest(TAU * t / 10.0)
                    }
                })
                .collect(),
        };
        let w = discretize(&traj, 10.0, SiteRounding::Integer).unwrap();
        // 0.5 → 1 and 1.5 → 2 under ties-away-from-zero.
        assert_eq!(w.sites, vec![1.0, 2.0]);
    }

    #[test]
    fn boundary_between_samples_is_interpolated() {
        // Period not commensurate with the sampling; a step in q at t = 7
        // must be split between windows by interpolation only locally.
        let mut avg = WindowAverager::new(7.3, SiteRounding::HalfInteger).unwrap();
        for i in 0..=300 {
            let t = i as f64 * 0.1;
            avg.push(t, if t < 7.3 { 0.0 } else { 1.0 }).unwrap();
        }
        let w = avg.finish();
        assert_eq!(w.sites.len(), 4);
        assert_eq!(w.sites[0], 0.0);
        assert_eq!(&w.sites[1..], &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn undersampled_window() {
        let r = discretize(&constant_traj(0.0, 100.0, 5.0), 20.0, SiteRounding::HalfInteger);
        assert!(matches!(r, Err(Error::UndersampledWindow { .. })));
    }

    #[test]
    fn too_short_trajectory() {
        let r = discretize(&constant_traj(0.0, 150.0, 1.0), 100.0, SiteRounding::HalfInteger);
        assert!(matches!(r, Err(Error::TrajectoryTooShort { .. })));
    }

    #[test]
    fn alternating_jumps() {
        let jumps: Vec<f64> = (0..100).map(|i| if i % 2 == 0 { 0.5 } else { -0.5 }).collect();
        let c = autocorrelation(&jumps, 10).unwrap();
        assert_eq!(c.values[0], 1.0);
        assert_eq!(c.values[1], -1.0);
        assert_eq!(c.values[2], 1.0);
    }

    #[test]
    fn constant_jumps_are_degenerate() {
        assert!(matches!(
            autocorrelation(&[0.5; 20], 3),
            Err(Error::DegenerateSequence)
        ));
        assert!(autocorrelation(&[0.5], 0).is_err());
        assert!(autocorrelation(&[0.5, -0.5, 0.5], 2).is_err());
    }

    #[test]
    fn fit_exact_line() {
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.25 * v + 1.0).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope - 0.25).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-13);
    }

    #[test]
    fn histogram_counts_and_width() {
        let h = SiteHistogram::from_sites(&[0.0, 0.5, 0.5, -1.0]);
        assert_eq!(h.bins, vec![(-1.0, 1), (0.0, 1), (0.5, 2)]);
        assert_eq!(h.total(), 4);
        assert!(h.mean.abs() < 1e-15);
        assert!((h.std_dev - (1.5f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mixing_of_identical_and_disjoint() {
        let same = [(-0.1, 2.0), (0.1, 2.0), (-0.05, 2.0), (0.02, 2.0)];
        let r = mixing_report(&same).unwrap();
        assert_eq!(r.overlap, 1.0);
        assert_eq!(r.mean_difference, 0.0);
        let disjoint = [(-0.1, -3.0), (0.1, 3.0)];
        let r = mixing_report(&disjoint).unwrap();
        assert_eq!(r.overlap, 0.0);
        assert_eq!(r.mean_difference, 6.0);
        assert!(mixing_report(&[(0.1, 0.0)]).is_err());
    }
}
