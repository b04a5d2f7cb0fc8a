//! End-to-end tuning runs: choose ε on the data, refit on all of it, and
//! score the final model on a held-out test set.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rbftune_core::bo::{self, BoConfig};
use rbftune_core::data::{self, ceil_count, sample_indices, DataSet, PointSet, SplitSpec};
use rbftune_core::kernels::KernelFamily;
use rbftune_core::loocv;
use rbftune_core::rbf::{self, FitKind};
use serde::{Deserialize, Serialize};

use crate::{derive_seed, Error, Result};

const BO_STREAM: u64 = 1;
const CENTER_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Rippa-rule leave-one-out error minimized over an equally spaced grid.
    Loocv,
    /// The same error minimized by a bounded univariate optimizer.
    LoocvStar,
    /// Bayesian optimization of the negative validation MAE.
    Bo,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Loocv, Method::LoocvStar, Method::Bo];

    pub fn token(self) -> &'static str {
        match self {
            Method::Loocv => "loocv",
            Method::LoocvStar => "loocv-star",
            Method::Bo => "bo",
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "loocv" => Ok(Method::Loocv),
            "loocv-star" | "loocv*" | "loocv_star" => Ok(Method::LoocvStar),
            "bo" => Ok(Method::Bo),
            other => Err(format!(
                "unknown method `{other}` (expected loocv, loocv-star or bo)"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Knobs shared by the three tuners; each method reads only its own.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuneParams {
    /// Upper end of the search interval `(0, eps_max]`.
    pub eps_max: f64,
    pub grid_size: usize,
    /// First probe of the optimizer; the interval midpoint when `None`.
    pub start: Option<f64>,
    pub nstart: usize,
    pub niter: usize,
    pub xi: f64,
    pub acquisition_candidates: usize,
    pub train_fraction: f64,
}

impl Default for TuneParams {
    fn default() -> Self {
        let bo = BoConfig::default();
        TuneParams {
            eps_max: 20.0,
            grid_size: 500,
            start: None,
            nstart: bo.nstart,
            niter: bo.niter,
            xi: bo.xi,
            acquisition_candidates: bo.acquisition_candidates,
            train_fraction: SplitSpec::default().train_fraction,
        }
    }
}

impl TuneParams {
    pub fn bo_config(&self, seed: u64) -> BoConfig {
        BoConfig {
            lo: 0.0,
            hi: self.eps_max,
            nstart: self.nstart,
            niter: self.niter,
            xi: self.xi,
            acquisition_candidates: self.acquisition_candidates,
            seed,
        }
    }

    fn start(&self) -> f64 {
        self.start.unwrap_or(0.5 * self.eps_max)
    }
}

/// One tuning run: data `(X, F)`, centers `X̃ ⊆ X`, and a disjoint test set.
#[derive(Debug, Clone)]
pub struct TuneRequest {
    pub method: Method,
    pub family: KernelFamily,
    pub data: DataSet,
    pub centers: PointSet,
    pub test: DataSet,
    pub params: TuneParams,
    pub seed: u64,
    /// Also report the test error relative to the largest test value.
    pub report_rmae: bool,
}

impl TuneRequest {
    /// An interpolation request (every data location is a center) with
    /// default parameters.
    pub fn interpolation(
        method: Method,
        family: KernelFamily,
        data: DataSet,
        test: DataSet,
    ) -> Self {
        let centers = data.locations().clone();
        TuneRequest {
            method,
            family,
            data,
            centers,
            test,
            params: TuneParams::default(),
            seed: 0,
            report_rmae: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.data.require_distinct()?;
        let dim = self.data.locations().dim();
        if self.centers.dim() != dim || self.test.locations().dim() != dim {
            return Err(Error::Config(
                "data, centers and test set must share one dimension".into(),
            ));
        }
        if self.centers.is_empty() {
            return Err(Error::Config("at least one center is required".into()));
        }
        if self.centers.len() > self.data.len()
            || self.data.locations().locate(&self.centers).contains(&None)
            || !self.centers.duplicates().is_empty()
        {
            return Err(Error::Config(
                "centers must be distinct data locations".into(),
            ));
        }
        if self.test.is_empty() {
            return Err(Error::Config("the test set is empty".into()));
        }
        if !self.test.locations().disjoint_from(self.data.locations()) {
            return Err(Error::Config(
                "test locations must be disjoint from the data locations".into(),
            ));
        }
        let p = &self.params;
        if !(p.eps_max > 0.0 && p.eps_max.is_finite()) {
            return Err(Error::Config("eps_max must be positive and finite".into()));
        }
        Ok(())
    }

    fn is_interpolation(&self) -> bool {
        rbf::fit_kind(&self.data, &self.centers) == FitKind::Interpolation
    }
}

/// One probed shape parameter; `value` is `Er(ε)` for the leave-one-out
/// methods and `g(ε) = −MAE_val` for Bayesian optimization, `None` when the
/// evaluation failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub epsilon: f64,
    pub value: Option<f64>,
}

impl TracePoint {
    fn new(epsilon: f64, value: f64) -> Self {
        TracePoint {
            epsilon,
            value: value.is_finite().then_some(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneReport {
    #[serde(with = "crate::token")]
    pub method: Method,
    #[serde(with = "crate::token")]
    pub kernel: KernelFamily,
    pub n: usize,
    pub centers: usize,
    pub center_fraction: f64,
    pub xi: Option<f64>,
    pub seed: u64,
    pub epsilon_star: f64,
    /// `Er(ε*)` or `g(ε*)`, matching the trace.
    pub objective_star: f64,
    pub mae_test: f64,
    pub rmae_test: Option<f64>,
    /// Wall-clock seconds spent choosing ε (data generation, the final refit
    /// and test scoring excluded).
    pub elapsed: f64,
    pub evaluations: usize,
    pub trace: Vec<TracePoint>,
}

/// Dispatches on the request's method.
pub fn run(req: &TuneRequest) -> Result<TuneReport> {
    match req.method {
        Method::Bo => run_bo_pipeline(req),
        Method::Loocv | Method::LoocvStar => run_loocv_pipeline(req),
    }
}

/// Splits `(X, X̃, F)` 80/20, maximizes `g(ε) = −MAE` of the training fit on
/// the validation part, then refits on the complete data with `ε*`.
pub fn run_bo_pipeline(req: &TuneRequest) -> Result<TuneReport> {
    if req.method != Method::Bo {
        return Err(Error::Config(format!(
            "{} request sent to the BO pipeline",
            req.method
        )));
    }
    req.validate()?;
    let family = req.family;
    let settings = SplitSpec {
        train_fraction: req.params.train_fraction,
        seed: req.seed,
    };
    let config = req.params.bo_config(derive_seed(req.seed, BO_STREAM));

    let clock = Instant::now();
    let parts = data::split(&req.data, &req.centers, settings)?;
    let objective = |eps: f64| -> rbftune_core::Result<f64> {
        let model = rbf::fit(
            family.with_epsilon(eps)?,
            &parts.train,
            &parts.train_centers,
        )?;
        let pred = model.evaluate(parts.val.locations())?;
        Ok(-rbf::mae(&pred, parts.val.values())?)
    };
    let result = bo::optimize(objective, &config)?;
    let elapsed = clock.elapsed().as_secs_f64();

    let trace = result
        .history
        .iter()
        .map(|&(e, g)| TracePoint::new(e, g))
        .collect();
    finish(
        req,
        result.best_epsilon,
        result.best_objective,
        elapsed,
        trace,
        Some(req.params.xi),
    )
}

/// Grid or optimizer search of the Rippa leave-one-out error on the whole
/// data set, followed by the interpolation refit.
pub fn run_loocv_pipeline(req: &TuneRequest) -> Result<TuneReport> {
    if req.method == Method::Bo {
        return Err(Error::Config(
            "bo request sent to the LOOCV pipeline".into(),
        ));
    }
    req.validate()?;
    if !req.is_interpolation() {
        return Err(rbftune_core::Error::Unsupported(format!(
            "Rippa inapplicable: {} centers for {} data locations; leave-one-out \
             tuning needs the interpolation case (use --method bo for approximation)",
            req.centers.len(),
            req.data.len()
        ))
        .into());
    }
    let p = &req.params;
    let clock = Instant::now();
    let result = match req.method {
        Method::Loocv => loocv::grid_search(req.family, &req.data, p.eps_max, p.grid_size)?,
        _ => loocv::optimizer_search(req.family, &req.data, p.eps_max, p.start())?,
    };
    let elapsed = clock.elapsed().as_secs_f64();

    let trace = result
        .trace
        .iter()
        .map(|&(e, v)| TracePoint::new(e, v))
        .collect();
    finish(
        req,
        result.best_epsilon,
        result.best_error,
        elapsed,
        trace,
        None,
    )
}

fn finish(
    req: &TuneRequest,
    epsilon_star: f64,
    objective_star: f64,
    elapsed: f64,
    trace: Vec<TracePoint>,
    xi: Option<f64>,
) -> Result<TuneReport> {
    let model = rbf::fit(
        req.family.with_epsilon(epsilon_star)?,
        &req.data,
        &req.centers,
    )?;
    let pred = model.evaluate(req.test.locations())?;
    let mae_test = rbf::mae(&pred, req.test.values())?;
    let rmae_test = if req.report_rmae {
        Some(rbf::rmae(&pred, req.test.values())?)
    } else {
        None
    };
    Ok(TuneReport {
        method: req.method,
        kernel: req.family,
        n: req.data.len(),
        centers: req.centers.len(),
        center_fraction: req.centers.len() as f64 / req.data.len() as f64,
        xi,
        seed: req.seed,
        epsilon_star,
        objective_star,
        mae_test,
        rmae_test,
        elapsed,
        evaluations: trace.len(),
        trace,
    })
}

/// `⌈fraction · n⌉` data locations drawn without replacement with the given
/// seed; the full location set (in data order) when that is all of them.
///
/// Subsets for different fractions under one seed are nested.
pub fn select_centers(data: &DataSet, fraction: f64, seed: u64) -> Result<PointSet> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Config(format!(
            "center fraction {fraction} is outside (0, 1]"
        )));
    }
    let n = data.len();
    let m = ceil_count(fraction, n).clamp(1, n);
    if m == n {
        return Ok(data.locations().clone());
    }
    let idx = sample_indices(n, m, derive_seed(seed, CENTER_STREAM))?;
    Ok(data.locations().select(&idx))
}

/// Runs the BO pipeline once per center fraction.
pub fn center_sweep(
    data: &DataSet,
    test: &DataSet,
    fractions: &[f64],
    family: KernelFamily,
    params: TuneParams,
    seed: u64,
) -> Result<Vec<TuneReport>> {
    fractions
        .iter()
        .map(|&fraction| {
            let req = TuneRequest {
                method: Method::Bo,
                family,
                data: data.clone(),
                centers: select_centers(data, fraction, seed)?,
                test: test.clone(),
                params,
                seed,
                report_rmae: false,
            };
            run_bo_pipeline(&req)
        })
        .collect()
}
