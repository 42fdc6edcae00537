//! Damped particle driven by Gaussian noise with a prescribed force
//! correlation, and the variance of its displacement.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::ensemble::{member_rng, member_seed, par_indexed};
use crate::error::{Error, Result};
use crate::walk::linear_fit;

/// Relative tolerance of the variance quadrature.
pub const QUADRATURE_RTOL: f64 = 1e-6;
/// Allowed negative spectral mass, relative to the largest eigenvalue.
pub const SPECTRAL_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelKind {
    Delta,
    GaussianCosine,
    ExponentialCosine,
}

impl KernelKind {
    pub fn label(self) -> &'static str {
        match self {
            KernelKind::Delta => "delta",
            KernelKind::GaussianCosine => "gaussian-cosine",
            KernelKind::ExponentialCosine => "exponential-cosine",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "delta" => Some(KernelKind::Delta),
            "gaussian-cosine" => Some(KernelKind::GaussianCosine),
            "exponential-cosine" => Some(KernelKind::ExponentialCosine),
            _ => None,
        }
    }
}

/// Force correlation ⟨ξ(t′)ξ(t″)⟩ = 2d·K(t′−t″).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseKernel {
    pub kind: KernelKind,
    pub d: f64,
    pub sigma: f64,
    pub omega: f64,
}

impl NoiseKernel {
    pub fn delta(d: f64) -> Self {
        NoiseKernel {
            kind: KernelKind::Delta,
            d,
            sigma: 0.0,
            omega: 0.0,
        }
    }

    pub fn gaussian_cosine(d: f64, sigma: f64, omega: f64) -> Self {
        NoiseKernel {
            kind: KernelKind::GaussianCosine,
            d,
            sigma,
            omega,
        }
    }

    pub fn exponential_cosine(d: f64, sigma: f64, omega: f64) -> Self {
        NoiseKernel {
            kind: KernelKind::ExponentialCosine,
            d,
            sigma,
            omega,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(Error::InvalidKernel("d must be > 0".into()));
        }
        if self.kind != KernelKind::Delta && !(self.sigma > 0.0) {
            return Err(Error::InvalidKernel("sigma must be > 0".into()));
        }
        if !(self.omega >= 0.0) {
            return Err(Error::InvalidKernel("Omega must be >= 0".into()));
        }
        Ok(())
    }

    /// Shape K(τ) of a smooth kernel; zero away from τ = 0 for delta.
    pub fn shape(&self, tau: f64) -> f64 {
        let envelope = match self.kind {
            KernelKind::Delta => return if tau == 0.0 { f64::INFINITY } else { 0.0 },
            KernelKind::GaussianCosine => (-tau * tau / (2.0 * self.sigma * self.sigma)).exp(),
            KernelKind::ExponentialCosine => (-tau.abs() / self.sigma).exp(),
        };
        envelope * (self.omega * tau).cos()
    }

    /// Covariance 2d·K(τ).
    pub fn covariance(&self, tau: f64) -> f64 {
        2.0 * self.d * self.shape(tau)
    }

    /// ∫K(τ)dτ over the real line: the long-time slope in units of 2d/λ².
    pub fn integrated_shape(&self) -> f64 {
        let (s, w) = (self.sigma, self.omega);
        match self.kind {
            KernelKind::Delta => 1.0,
            KernelKind::GaussianCosine => s * (2.0 * PI).sqrt() * (-w * w * s * s / 2.0).exp(),
            KernelKind::ExponentialCosine => 2.0 * s / (1.0 + w * w * s * s),
        }
    }

    /// Lag beyond which the envelope is below 1e-17.
    pub fn support(&self) -> f64 {
        match self.kind {
            KernelKind::Delta => 0.0,
            KernelKind::GaussianCosine => 9.0 * self.sigma,
            KernelKind::ExponentialCosine => 40.0 * self.sigma,
        }
    }
}

/// Stationary Gaussian series with covariance 2d·K(kΔt) at lag k.
///
/// Smooth kernels use circulant embedding: the covariance is wrapped onto a
/// circle of length ≥ 2n, its non-negative spectral root filters complex
/// white noise, and the real part is kept. The delta kernel yields i.i.d.
/// samples of variance 2d/Δt.
pub fn synthesize_noise<R: Rng + ?Sized>(
    kernel: &NoiseKernel,
    dt: f64,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    kernel.validate()?;
    if n_samples == 0 {
        return Ok(Vec::new());
    }
    if kernel.kind == KernelKind::Delta {
        let sd = (2.0 * kernel.d / dt).sqrt();
        return Ok((0..n_samples)
            .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
            .collect());
    }
    let spectrum = circulant_spectrum(kernel, dt, n_samples)?;
    let m = spectrum.len();
    let mut buf: Vec<Complex<f64>> = spectrum
        .iter()
        .map(|&lam| {
            let a = (lam / m as f64).sqrt();
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex::new(a * re, a * im)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    Ok(buf.iter().take(n_samples).map(|z| z.re).collect())
}

/// Eigenvalues of the circulant covariance embedding, negatives clamped.
pub fn circulant_spectrum(kernel: &NoiseKernel, dt: f64, n_samples: usize) -> Result<Vec<f64>> {
    let min_half = (kernel.support() / dt).ceil() as usize + 1;
    let m = (2 * n_samples.max(min_half)).next_power_of_two();
    let half = m / 2;
    let mut row: Vec<Complex<f64>> = (0..m)
        .map(|k| {
            let lag = if k <= half { k } else { m - k };
            Complex::new(kernel.covariance(lag as f64 * dt), 0.0)
        })
        .collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut row);
    let max = row.iter().map(|z| z.re).fold(f64::MIN, f64::max);
    let min = row.iter().map(|z| z.re).fold(f64::MAX, f64::min);
    if min < -SPECTRAL_TOLERANCE * max {
        return Err(Error::InvalidKernel(format!(
            "negative spectral density {min:e} (max {max:e})"
        )));
    }
    Ok(row.iter().map(|z| z.re.max(0.0)).collect())
}

/// Settings of the Langevin Monte Carlo benchmark.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LangevinParams {
    pub lambda_damp: f64,
    pub kernel: NoiseKernel,
    pub dt: f64,
    pub t_end: f64,
    pub n_realizations: usize,
    pub master_seed: u64,
    /// Integration steps between recorded variance points.
    pub sample_stride: usize,
}

impl LangevinParams {
    /// λ = 1 and d = 1/8, so the white-noise slope 2d/λ² is 1/4.
    pub fn calibrated(kernel_kind: KernelKind, omega: f64) -> Self {
        let d = 0.125;
        let kernel = match kernel_kind {
            KernelKind::Delta => NoiseKernel::delta(d),
            KernelKind::GaussianCosine => NoiseKernel::gaussian_cosine(d, 0.5, omega),
            KernelKind::ExponentialCosine => NoiseKernel::exponential_cosine(d, 0.5, omega),
        };
        LangevinParams {
            lambda_damp: 1.0,
            kernel,
            dt: 0.01,
            t_end: 40.0,
            n_realizations: 2000,
            master_seed: 0,
            sample_stride: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.lambda_damp > 0.0) {
            return Err(Error::InvalidParam("lambda_damp must be > 0".into()));
        }
        if !(self.dt > 0.0 && self.t_end > 0.0) {
            return Err(Error::InvalidParam("dt and t_end must be > 0".into()));
        }
        if self.kernel.kind != KernelKind::Delta && self.dt > self.kernel.sigma / 10.0 {
            return Err(Error::InvalidParam(format!(
                "dt = {} exceeds sigma/10 = {}",
                self.dt,
                self.kernel.sigma / 10.0
            )));
        }
        if self.n_realizations < 2 || self.sample_stride == 0 {
            return Err(Error::InvalidParam(
                "need >= 2 realizations and a positive stride".into(),
            ));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt + 1e-9).floor() as usize
    }
}

/// Monte Carlo mean squared displacement and its standard error.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCurve {
    pub times: Vec<f64>,
    pub variance: Vec<f64>,
    pub stderr: Vec<f64>,
}

impl VarianceCurve {
    /// Slope of a straight-line fit over `t ≥ from_time`.
    pub fn slope_after(&self, from_time: f64) -> Result<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&self.variance)
            .filter(|(t, _)| **t >= from_time)
            .map(|(t, v)| (*t, *v))
            .unzip();
        Ok(linear_fit(&x, &y)?.slope)
    }
}

/// Squared displacements of one realization at the recorded times.
fn langevin_realization(params: &LangevinParams, index: usize) -> Result<Vec<f64>> {
    let mut rng = member_rng(params.master_seed, index as u64);
    let n = params.n_steps();
    let noise = synthesize_noise(&params.kernel, params.dt, n, &mut rng).map_err(|e| {
        Error::Member {
            index,
            seed: member_seed(params.master_seed, index as u64),
            source: Box::new(e),
        }
    })?;
    Ok(propagate(&noise, params.lambda_damp, params.dt, params.sample_stride))
}

/// Squared displacement from rest every `stride` steps under the force
/// series `noise`, each value held constant over its step.
pub fn propagate(noise: &[f64], lambda: f64, dt: f64, stride: usize) -> Vec<f64> {
    let decay = (-lambda * dt).exp();
    let v_gain = (1.0 - decay) / lambda;
    let x_gain = (dt - v_gain) / lambda;
    let (mut v, mut x) = (0.0f64, 0.0f64);
    let mut out = Vec::with_capacity(noise.len() / stride + 1);
    out.push(0.0);
    for (i, xi) in noise.iter().enumerate() {
        // Exact solution over the step with the force held constant.
        x += v * v_gain + xi * x_gain;
        v = v * decay + xi * v_gain;
        if (i + 1) % stride == 0 {
            out.push(x * x);
        }
    }
    out
}

/// Integrates `dv/dt = −λv + ξ`, `dx/dt = v` from rest for every
/// realization and averages (x(t) − x(0))².
pub fn langevin_run(params: &LangevinParams, workers: usize) -> Result<VarianceCurve> {
    params.validate()?;
    let runs = par_indexed(params.n_realizations, workers, |i| langevin_realization(params, i))?;
    let n_points = runs[0].len();
    let m = runs.len() as f64;
    let mut variance = vec![0.0; n_points];
    let mut second = vec![0.0; n_points];
    for r in &runs {
        for (k, sq) in r.iter().enumerate() {
            variance[k] += sq;
            second[k] += sq * sq;
        }
    }
    let stderr = variance
        .iter_mut()
        .zip(&second)
        .map(|(s, s2)| {
            let mean = *s / m;
            *s = mean;
            ((s2 / m - mean * mean).max(0.0) * m / (m - 1.0) / m).sqrt()
        })
        .collect();
    let times = (0..n_points)
        .map(|k| (k * params.sample_stride) as f64 * params.dt)
        .collect();
    Ok(VarianceCurve {
        times,
        variance,
        stderr,
    })
}

/// Displacement variance for delta-correlated forcing:
/// (2d/λ²)(t − (2/λ)(1 − e^{−λt}) + (1/2λ)(1 − e^{−2λt})).
pub fn variance_analytic(lambda_damp: f64, d: f64, t: f64) -> f64 {
    let l = lambda_damp;
    2.0 * d / (l * l)
        * (t - 2.0 / l * (-(l * t)).exp_m1().abs() + 1.0 / (2.0 * l) * (-(2.0 * l * t)).exp_m1().abs())
}

/// Response weight φ as a function of the time u = t − t′ left to run.
fn response(lambda: f64, u: f64) -> f64 {
    -(-lambda * u).exp_m1() / lambda
}

/// Overlap ∫φ(s)φ(s+τ)ds of the response weight with itself, for lag
/// 0 ≤ τ ≤ t.
pub fn response_overlap(lambda: f64, t: f64, tau: f64) -> f64 {
    let l = lambda;
    let len = t - tau;
    let a = len;
    let b = ((-l * tau).exp() - (-l * t).exp()) / l;
    let c = -(-l * len).exp_m1() / l;
    let e = ((-l * tau).exp() - (-l * (2.0 * t - tau)).exp()) / (2.0 * l);
    (a - b - c + e) / (l * l)
}

fn integrate_checked<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, scale: f64) -> Result<(f64, f64)> {
    let out = quadrature::double_exponential::integrate(f, a, b, 1e-3 * QUADRATURE_RTOL * scale);
    Ok((out.integral, out.error_estimate))
}

/// Displacement variance ∫∫φ(t′)φ(t″)⟨ξ(t′)ξ(t″)⟩ over [0, t]², evaluated
/// as a lag integral against the response overlap.
pub fn variance_double_integral(kernel: &NoiseKernel, lambda_damp: f64, t: f64) -> Result<f64> {
    kernel.validate()?;
    if !(lambda_damp > 0.0) {
        return Err(Error::InvalidParam("lambda_damp must be > 0".into()));
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    let scale = 2.0 * kernel.d * response_overlap(lambda_damp, t, 0.0).max(f64::MIN_POSITIVE);
    let (value, err) = if kernel.kind == KernelKind::Delta {
        // The delta collapses the lag integral onto ∫φ².
        integrate_checked(
            |u| 2.0 * kernel.d * response(lambda_damp, u).powi(2),
            0.0,
            t,
            scale,
        )?
    } else {
        // Split the lag axis into pieces a fraction of a width long so the
        // oscillation and decay are resolved; the tail past the support is
        // negligible.
        let upper = t.min(kernel.support());
        let piece = (kernel.sigma / 2.0).min(if kernel.omega > 0.0 { PI / kernel.omega } else { f64::INFINITY });
        let n_pieces = ((upper / piece).ceil() as usize).max(1);
        let h = upper / n_pieces as f64;
        let mut total = 0.0;
        let mut err = 0.0;
        for k in 0..n_pieces {
            let (v, e) = integrate_checked(
                |tau| 2.0 * kernel.covariance(tau) * response_overlap(lambda_damp, t, tau),
                k as f64 * h,
                (k + 1) as f64 * h,
                scale,
            )?;
            total += v;
            err += e;
        }
        (total, err)
    };
    if err > QUADRATURE_RTOL * value.abs().max(1e-300) {
        return Err(Error::Quadrature {
            estimate: err,
            tolerance: QUADRATURE_RTOL * value.abs(),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn analytic_variance_limits() {
        assert_eq!(variance_analytic(1.0, 1.0, 0.0), 0.0);
        // Long-time slope 2d/λ².
        let (a, b) = (variance_analytic(2.0, 0.3, 100.0), variance_analytic(2.0, 0.3, 101.0));
        assert!((b - a - 2.0 * 0.3 / 4.0).abs() < 1e-12);
        let slope = variance_analytic(1.0, 0.125, 201.0) - variance_analytic(1.0, 0.125, 200.0);
        assert!((slope - 0.25).abs() < 1e-12);
    }

    #[test]
    fn overlap_matches_direct_quadrature() {
        let (l, t) = (0.7, 3.0);
        for tau in [0.0, 0.4, 1.7, 2.9] {
            // Midpoint rule on a fine grid as an independent estimate.
            let n = 200_000;
            let h = (t - tau) / n as f64;
            let direct: f64 = (0..n)
                .map(|i| {
                    let u = tau + (i as f64 + 0.5) * h;
                    response(l, u) * response(l, u - tau) * h
                })
                .sum();
            let closed = response_overlap(l, t, tau);
            assert!((direct - closed).abs() < 1e-9 * closed.abs().max(1e-12), "{tau}: {direct} vs {closed}");
        }
    }

    #[test]
    fn delta_quadrature_matches_closed_form() {
        for t in [0.01, 0.5, 3.0, 40.0] {
            let q = variance_double_integral(&NoiseKernel::delta(0.125), 1.0, t).unwrap();
            let a = variance_analytic(1.0, 0.125, t);
            assert!((q - a).abs() <= 1e-6 * a, "t = {t}: {q} vs {a}");
        }
    }

    #[test]
    fn small_time_vanishes_faster_than_cubic() {
        let smooth = NoiseKernel::gaussian_cosine(0.125, 0.5, 2.0);
        let a = variance_double_integral(&smooth, 1.0, 1e-2).unwrap();
        let b = variance_double_integral(&smooth, 1.0, 2e-2).unwrap();
        // Smooth kernels give t⁴, white noise t³.
        assert!((b / a - 16.0).abs() < 0.2, "ratio {}", b / a);
        let white = NoiseKernel::delta(0.125);
        let a = variance_double_integral(&white, 1.0, 1e-2).unwrap();
        let b = variance_double_integral(&white, 1.0, 2e-2).unwrap();
        assert!((b / a - 8.0).abs() < 0.2, "ratio {}", b / a);
    }

    #[test]
    fn delta_noise_is_white() {
        let k = NoiseKernel::delta(0.5);
        let n = 100_000;
        let mut rng = member_rng(1, 0);
        let xs = synthesize_noise(&k, 0.01, n, &mut rng).unwrap();
        let var = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / 100.0 - 1.0).abs() < 0.02);
        let lag1 = xs.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        assert!(lag1.abs() / var < 3.0 / (n as f64).sqrt());
    }

    #[test]
    fn zero_frequency_gaussian_is_pure_gaussian() {
        let k = NoiseKernel::gaussian_cosine(1.0, 0.5, 0.0);
        for tau in [0.0, 0.3, 1.0] {
            assert_eq!(k.shape(tau), (-tau * tau / 0.5).exp());
        }
    }

    #[test]
    fn kernels_are_even() {
        for k in [
            NoiseKernel::gaussian_cosine(1.0, 0.5, 1.5),
            NoiseKernel::exponential_cosine(1.0, 0.5, 1.5),
        ] {
            for tau in [0.1, 0.7, 2.3] {
                assert_eq!(k.shape(tau), k.shape(-tau));
            }
        }
    }

    #[test]
    fn spectra_are_non_negative() {
        for k in [
            NoiseKernel::gaussian_cosine(0.125, 0.5, 2.0),
            NoiseKernel::exponential_cosine(0.125, 0.5, 2.0),
        ] {
            let s = circulant_spectrum(&k, 0.01, 1000).unwrap();
            assert!(s.iter().all(|&x| x >= 0.0));
        }
    }

    #[test]
    fn rejects_bad_kernels() {
        assert!(NoiseKernel::delta(0.0).validate().is_err());
        assert!(NoiseKernel::gaussian_cosine(1.0, 0.0, 1.0).validate().is_err());
        assert!(NoiseKernel::exponential_cosine(1.0, 1.0, -1.0).validate().is_err());
        let mut p = LangevinParams::calibrated(KernelKind::GaussianCosine, 1.0);
        p.dt = 0.1;
        assert!(p.validate().is_err());
    }

    #[test]
    fn no_forcing_no_spread() {
        let out = propagate(&vec![0.0; 1000], 1.0, 0.01, 10);
        assert_eq!(out.len(), 101);
        assert!(out.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn constant_force_matches_exact_solution() {
        // dv/dt = −λv + F from rest: x(t) = (F/λ)(t − (1 − e^{−λt})/λ).
        let (lam, f, dt) = (0.8, 0.3, 0.05);
        let out = propagate(&vec![f; 200], lam, dt, 200);
        let t = 10.0;
        let x = f / lam * (t - (1.0 - (-lam * t).exp()) / lam);
        assert!((out[1] - x * x).abs() < 1e-12);
    }
}
