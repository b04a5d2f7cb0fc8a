//! Measured-data workflow: a seeded train/test subsample of a scattered data
//! file, tuned with LOOCV and BO for the finitely smooth kernels.

use rbftune_core::data::{sample_indices, DataSet, PointSet};
use rbftune_core::kernels::KernelFamily;

use crate::pipeline::{self, Method, TuneParams, TuneReport, TuneRequest};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RealConfig {
    pub train_size: usize,
    pub test_size: usize,
    pub kernels: Vec<KernelFamily>,
    pub methods: Vec<Method>,
    pub params: TuneParams,
    pub seed: u64,
    /// Map each coordinate affinely onto `[0, 1]` before tuning.
    pub rescale: bool,
}

impl Default for RealConfig {
    fn default() -> Self {
        RealConfig {
            train_size: 1000,
            test_size: 500,
            kernels: vec![KernelFamily::Matern2, KernelFamily::Wendland2],
            methods: vec![Method::Loocv, Method::Bo],
            params: TuneParams::default(),
            seed: 0,
            rescale: true,
        }
    }
}

/// Per-coordinate min/max scaling onto the unit box; constant coordinates map to 0.
pub fn rescale_unit_box(points: &PointSet) -> PointSet {
    let dim = points.dim();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points.iter() {
        for k in 0..dim {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let coords = points
        .iter()
        .flat_map(|p| {
            (0..dim).map(|k| {
                let w = hi[k] - lo[k];
                if w > 0.0 {
                    (p[k] - lo[k]) / w
                } else {
                    0.0
                }
            })
        })
        .collect::<Vec<_>>();
    PointSet::new(dim, coords).expect("rescaling preserves the shape")
}

/// Draws `train_size + test_size` distinct rows, splits them, and runs every
/// (kernel, method) pair in order.
pub fn run_real(data: &DataSet, config: &RealConfig) -> Result<Vec<TuneReport>> {
    let need = config.train_size + config.test_size;
    if config.train_size < 2 || config.test_size == 0 {
        return Err(Error::Config(
            "train size must be ≥ 2 and test size ≥ 1".into(),
        ));
    }
    if data.len() < need {
        return Err(Error::Config(format!(
            "need at least {need} rows ({} train + {} test), found {}",
            config.train_size,
            config.test_size,
            data.len()
        )));
    }
    let data = if config.rescale {
        DataSet::new(rescale_unit_box(data.locations()), data.values().to_vec())?
    } else {
        data.clone()
    };
    let idx = sample_indices(data.len(), need, config.seed)?;
    let train = data.select(&idx[..config.train_size]);
    let test = data.select(&idx[config.train_size..]);

    let mut reports = Vec::new();
    for &family in &config.kernels {
        for &method in &config.methods {
            let mut req = TuneRequest::interpolation(method, family, train.clone(), test.clone());
            req.params = config.params;
            req.seed = config.seed;
            req.report_rmae = true;
            reports.push(pipeline::run(&req)?);
        }
    }
    Ok(reports)
}
