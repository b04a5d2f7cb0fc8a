//! Bayesian optimization of a scalar black-box objective over `(lo, hi]`
//! with a Gaussian-process surrogate and the Expected Improvement acquisition.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::gp::{GpPrediction, GpSurrogate};
use crate::{Error, Result};

const INITIAL_STREAM: u64 = 0;
const ACQUISITION_STREAM: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoConfig {
    /// Open lower end of the search interval.
    pub lo: f64,
    /// Closed upper end of the search interval.
    pub hi: f64,
    pub nstart: usize,
    pub niter: usize,
    /// Improvement margin ξ ≥ 0; larger values favour exploration.
    pub xi: f64,
    pub acquisition_candidates: usize,
    pub seed: u64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            lo: 0.0,
            hi: 20.0,
            nstart: 5,
            niter: 25,
            xi: 0.01,
            acquisition_candidates: 2000,
            seed: 0,
        }
    }
}

impl BoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lo >= 0.0 && self.hi > self.lo && self.hi.is_finite()) {
            return Err(Error::invalid("search interval must satisfy 0 <= lo < hi"));
        }
        if self.nstart == 0 {
            return Err(Error::invalid("nstart must be at least 1"));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return Err(Error::invalid("xi must be nonnegative"));
        }
        if self.acquisition_candidates == 0 {
            return Err(Error::invalid("acquisition_candidates must be at least 1"));
        }
        Ok(())
    }

    /// A uniform draw from `(lo, hi]`.
    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen();
        self.hi - u * (self.hi - self.lo)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoResult {
    pub best_epsilon: f64,
    pub best_objective: f64,
    /// `(ε, g(ε))` in evaluation order; failed evaluations carry `−∞`.
    pub history: Vec<(f64, f64)>,
}

impl BoResult {
    /// Running maximum of the objective after each evaluation.
    pub fn incumbent_trace(&self) -> Vec<f64> {
        let mut best = f64::NEG_INFINITY;
        self.history
            .iter()
            .map(|&(_, g)| {
                if g > best {
                    best = g;
                }
                best
            })
            .collect()
    }
}

fn std_normal_pdf(z: f64) -> f64 {
    libm::exp(-0.5 * z * z) / libm::sqrt(2.0 * core::f64::consts::PI)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / core::f64::consts::SQRT_2)
}

/// `(μ − best − ξ) Φ(Z) + σ φ(Z)` with `Z = (μ − best − ξ)/σ`; zero when `σ = 0`.
pub fn expected_improvement(pred: GpPrediction, best_so_far: f64, xi: f64) -> f64 {
    if !(pred.std > 0.0) {
        return 0.0;
    }
    let improvement = pred.mean - best_so_far - xi;
    let z = improvement / pred.std;
    let ei = improvement * std_normal_cdf(z) + pred.std * std_normal_pdf(z);
    if ei > 0.0 {
        ei
    } else {
        0.0
    }
}

/// Draws `acquisition_candidates` uniform points and returns the one with the
/// largest Expected Improvement; ties go to the earliest draw.
pub fn propose_next<R: Rng>(
    surrogate: &GpSurrogate,
    best_so_far: f64,
    config: &BoConfig,
    rng: &mut R,
) -> f64 {
    let mut best_x = f64::NAN;
    let mut best_ei = f64::NEG_INFINITY;
    for _ in 0..config.acquisition_candidates {
        let x = config.draw(rng);
        let ei = expected_improvement(surrogate.predict(x), best_so_far, config.xi);
        if ei > best_ei {
            best_ei = ei;
            best_x = x;
        }
    }
    best_x
}

/// Maximizes `objective` over `(lo, hi]`: `nstart` uniform evaluations, then
/// `niter` rounds of surrogate fit, EI proposal and evaluation.
///
/// An evaluation that errors or returns a non-finite value is recorded as
/// `−∞` and kept out of the surrogate. When no finite observation exists yet,
/// or the surrogate cannot be fitted, the next point is a uniform draw.
pub fn optimize<F>(mut objective: F, config: &BoConfig) -> Result<BoResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    config.validate()?;
    let mut initial_rng = ChaCha8Rng::seed_from_u64(config.seed);
    initial_rng.set_stream(INITIAL_STREAM);
    let mut acquisition_rng = ChaCha8Rng::seed_from_u64(config.seed);
    acquisition_rng.set_stream(ACQUISITION_STREAM);

    let mut history: Vec<(f64, f64)> = Vec::with_capacity(config.nstart + config.niter);
    let mut eval = |eps: f64, history: &mut Vec<(f64, f64)>| {
        let g = match objective(eps) {
            Ok(g) if g.is_finite() => g,
            _ => f64::NEG_INFINITY,
        };
        history.push((eps, g));
    };

    for _ in 0..config.nstart {
        let eps = config.draw(&mut initial_rng);
        eval(eps, &mut history);
    }

    for _ in 0..config.niter {
        let (xs, gs): (Vec<f64>, Vec<f64>) = history
            .iter()
            .filter(|(_, g)| g.is_finite())
            .copied()
            .unzip();
        let next = if xs.is_empty() {
            config.draw(&mut acquisition_rng)
        } else {
            let best = gs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            match GpSurrogate::fit(&xs, &gs) {
                Ok(gp) => propose_next(&gp, best, config, &mut acquisition_rng),
                Err(_) => config.draw(&mut acquisition_rng),
            }
        };
        eval(next, &mut history);
    }

    let (best_epsilon, best_objective) = history
        .iter()
        .copied()
        .filter(|(_, g)| g.is_finite())
        .fold(None, |acc: Option<(f64, f64)>, (x, g)| match acc {
            Some((_, bg)) if bg >= g => acc,
            _ => Some((x, g)),
        })
        .ok_or(Error::OptimizationFailed)?;
    Ok(BoResult {
        best_epsilon,
        best_objective,
        history,
    })
}
