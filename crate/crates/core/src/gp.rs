//! Scalar-input Gaussian-process regression with a Matérn-5/2 covariance.
//!
//! Targets are standardized to zero mean and unit variance, the prior mean is
//! zero and the signal variance is one on that scale. The length scale is
//! picked from a fixed logarithmic grid by log marginal likelihood.

use alloc::vec::Vec;

use crate::linalg::{dot, Cholesky};
use crate::{Error, Result};

pub const LENGTH_SCALE_CANDIDATES: usize = 25;
pub const MIN_JITTER: f64 = 1e-10;
pub const MAX_JITTER: f64 = 1e-4;
const MIN_RANGE: f64 = 1e-3;
const SQRT5: f64 = 2.236_067_977_499_79;

/// `σ²(1 + √5 r/ℓ + 5r²/(3ℓ²)) exp(−√5 r/ℓ)`.
pub fn matern52(r: f64, length_scale: f64, signal_variance: f64) -> f64 {
    let s = SQRT5 * r / length_scale;
    signal_variance * (1.0 + s + s * s / 3.0) * libm::exp(-s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpPrediction {
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct GpSurrogate {
    inputs: Vec<f64>,
    targets: Vec<f64>,
    target_mean: f64,
    target_std: f64,
    length_scale: f64,
    signal_variance: f64,
    jitter: f64,
    factor: Cholesky,
    alpha: Vec<f64>,
    log_marginal_likelihood: f64,
}

struct Candidate {
    length_scale: f64,
    jitter: f64,
    factor: Cholesky,
    alpha: Vec<f64>,
    lml: f64,
}

fn covariance(inputs: &[f64], length_scale: f64, signal_variance: f64, jitter: f64) -> Vec<f64> {
    let n = inputs.len();
    let mut k = alloc::vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = matern52(
                libm::fabs(inputs[i] - inputs[j]),
                length_scale,
                signal_variance,
            );
            k[i * n + j] = v;
            k[j * n + i] = v;
        }
        k[i * n + i] += jitter;
    }
    k
}

fn condition(
    inputs: &[f64],
    y: &[f64],
    length_scale: f64,
    signal_variance: f64,
) -> Option<Candidate> {
    let n = inputs.len();
    let mut jitter = MIN_JITTER * signal_variance;
    while jitter <= MAX_JITTER * signal_variance * (1.0 + 1e-9) {
        let k = covariance(inputs, length_scale, signal_variance, jitter);
        if let Ok(factor) = Cholesky::factor(k, n) {
            let alpha = factor.solve(y);
            let lml = -0.5 * dot(y, &alpha)
                - 0.5 * factor.log_det()
                - 0.5 * n as f64 * libm::log(2.0 * core::f64::consts::PI);
            return Some(Candidate {
                length_scale,
                jitter,
                factor,
                alpha,
                lml,
            });
        }
        jitter *= 10.0;
    }
    None
}

impl GpSurrogate {
    /// Conditions the process on `(inputs, targets)`.
    pub fn fit(inputs: &[f64], targets: &[f64]) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: targets.len(),
            });
        }
        if inputs.is_empty() {
            return Err(Error::invalid(
                "gaussian process needs at least one observation",
            ));
        }
        if inputs.iter().chain(targets).any(|v| !v.is_finite()) {
            return Err(Error::invalid(
                "gaussian process observations must be finite",
            ));
        }
        let n = targets.len() as f64;
        let target_mean = targets.iter().sum::<f64>() / n;
        let var = targets
            .iter()
            .map(|t| (t - target_mean) * (t - target_mean))
            .sum::<f64>()
            / n;
        let target_std = if var > 0.0 { libm::sqrt(var) } else { 1.0 };
        let y: Vec<f64> = targets
            .iter()
            .map(|t| (t - target_mean) / target_std)
            .collect();

        let lo = inputs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = inputs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let range = (hi - lo).max(MIN_RANGE);
        let signal_variance = 1.0;

        let (l_min, l_max) = (1e-2 * range, 10.0 * range);
        let step = libm::log(l_max / l_min) / (LENGTH_SCALE_CANDIDATES - 1) as f64;
        let mut best: Option<Candidate> = None;
        for k in 0..LENGTH_SCALE_CANDIDATES {
            let ell = l_min * libm::exp(step * k as f64);
            if let Some(c) = condition(inputs, &y, ell, signal_variance) {
                if best.as_ref().is_none_or(|b| c.lml > b.lml) {
                    best = Some(c);
                }
            }
        }
        let best = best.ok_or(Error::SurrogateFit)?;
        Ok(GpSurrogate {
            inputs: inputs.to_vec(),
            targets: y,
            target_mean,
            target_std,
            length_scale: best.length_scale,
            signal_variance,
            jitter: best.jitter,
            factor: best.factor,
            alpha: best.alpha,
            log_marginal_likelihood: best.lml,
        })
    }

    pub fn inputs(&self) -> &[f64] {
        &self.inputs
    }

    /// Standardized targets.
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn length_scale(&self) -> f64 {
        self.length_scale
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn target_mean(&self) -> f64 {
        self.target_mean
    }

    pub fn target_std(&self) -> f64 {
        self.target_std
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Prior standard deviation on the original target scale.
    pub fn prior_std(&self) -> f64 {
        libm::sqrt(self.signal_variance) * self.target_std
    }

    /// Posterior mean and standard deviation at `x`, on the original target scale.
    pub fn predict(&self, x: f64) -> GpPrediction {
        let mut kstar: Vec<f64> = self
            .inputs
            .iter()
            .map(|xi| matern52(libm::fabs(x - xi), self.length_scale, self.signal_variance))
            .collect();
        let mean_std = dot(&kstar, &self.alpha);
        self.factor.solve_lower_in_place(&mut kstar);
        let var = (self.signal_variance - dot(&kstar, &kstar)).max(0.0);
        GpPrediction {
            mean: self.target_mean + self.target_std * mean_std,
            std: self.target_std * libm::sqrt(var),
        }
    }
}
