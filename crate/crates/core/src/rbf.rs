//! Kernel interpolants and least-squares approximants.

use alloc::format;
use alloc::vec::Vec;

use crate::data::{DataSet, PointSet};
use crate::kernels::{assemble, assemble_symmetric, RbfKernel};
use crate::linalg::{self, Cholesky};
use crate::{Error, Result};

/// Relative jitter added to the diagonal when the plain factorization fails.
pub const RETRY_JITTER: f64 = 1e-12;

/// Relative `|R_kk|` threshold below which a collocation matrix is rank deficient.
pub const RANK_TOL: f64 = 1e-12;

/// `P(x) = Σ_k c_k κ_ε(x, x̃_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel {
    kernel: RbfKernel,
    centers: PointSet,
    coefficients: Vec<f64>,
}

/// Which linear system produced a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    Interpolation,
    LeastSquares,
}

impl RbfModel {
    pub fn new(kernel: RbfKernel, centers: PointSet, coefficients: Vec<f64>) -> Result<Self> {
        if centers.len() != coefficients.len() {
            return Err(Error::LengthMismatch {
                left: centers.len(),
                right: coefficients.len(),
            });
        }
        Ok(RbfModel {
            kernel,
            centers,
            coefficients,
        })
    }

    pub fn kernel(&self) -> &RbfKernel {
        &self.kernel
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// Evaluates the model at every query point.
    pub fn evaluate(&self, queries: &PointSet) -> Result<Vec<f64>> {
        if queries.dim() != self.centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.centers.dim(),
                found: queries.dim(),
            });
        }
        if queries.is_empty() {
            return Ok(Vec::new());
        }
        let k = assemble(&self.kernel, queries, &self.centers)?;
        Ok(k.mul_vec(&self.coefficients))
    }

    pub fn evaluate_at(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.centers.dim(),
                found: x.len(),
            });
        }
        Ok(self
            .centers
            .iter()
            .zip(&self.coefficients)
            .map(|(z, c)| c * self.kernel.value_unchecked(x, z))
            .sum())
    }
}

/// Factors the square kernel matrix on `points`, retrying once with a
/// diagonal jitter of `RETRY_JITTER · trace / n`.
pub fn factor_kernel_matrix(kernel: &RbfKernel, points: &PointSet) -> Result<Cholesky> {
    let n = points.len();
    if n == 0 {
        return Err(Error::invalid("no points to factor"));
    }
    let k = assemble_symmetric(kernel, points).into_entries();
    match Cholesky::factor(k.clone(), n) {
        Ok(ch) => Ok(ch),
        Err(_) => {
            let mut k = k;
            let trace: f64 = (0..n).map(|i| k[i * n + i]).sum();
            let jitter = RETRY_JITTER * trace / n as f64;
            for i in 0..n {
                k[i * n + i] += jitter;
            }
            Cholesky::factor(k, n).map_err(|_| Error::Conditioning {
                epsilon: kernel.epsilon(),
            })
        }
    }
}

/// Solves the square interpolation system `K c = f` on the data locations.
pub fn interpolate(kernel: RbfKernel, data: &DataSet) -> Result<RbfModel> {
    if data.is_empty() {
        return Err(Error::invalid("cannot interpolate an empty data set"));
    }
    let ch = factor_kernel_matrix(&kernel, data.locations())?;
    let coefficients = ch.solve(data.values());
    RbfModel::new(kernel, data.locations().clone(), coefficients)
}

/// Least-squares fit of `K̃ c̃ ≈ f` with `K̃_ik = κ(x_i, x̃_k)`.
pub fn approximate(kernel: RbfKernel, data: &DataSet, centers: &PointSet) -> Result<RbfModel> {
    if centers.is_empty() || data.is_empty() {
        return Err(Error::invalid("least squares needs data and centers"));
    }
    if centers.len() > data.len() {
        return Err(Error::RankDeficient {
            epsilon: kernel.epsilon(),
            column: data.len(),
        });
    }
    let k = assemble(&kernel, data.locations(), centers)?;
    let coefficients =
        linalg::least_squares(k.entries(), k.rows(), k.cols(), data.values(), RANK_TOL).map_err(
            |e| Error::RankDeficient {
                epsilon: kernel.epsilon(),
                column: e.column,
            },
        )?;
    RbfModel::new(kernel, centers.clone(), coefficients)
}

/// Which system [`fit`] will solve for these centers.
pub fn fit_kind(data: &DataSet, centers: &PointSet) -> FitKind {
    if data.locations().same_set(centers) {
        FitKind::Interpolation
    } else {
        FitKind::LeastSquares
    }
}

/// Interpolates when the centers coincide with the data locations (as sets),
/// otherwise solves the least-squares problem on the given centers.
pub fn fit(kernel: RbfKernel, data: &DataSet, centers: &PointSet) -> Result<RbfModel> {
    if centers.dim() != data.locations().dim() {
        return Err(Error::DimensionMismatch {
            expected: data.locations().dim(),
            found: centers.dim(),
        });
    }
    match fit_kind(data, centers) {
        FitKind::Interpolation => interpolate(kernel, data),
        FitKind::LeastSquares => approximate(kernel, data, centers),
    }
}

fn check_pair(predictions: &[f64], truth: &[f64]) -> Result<()> {
    if predictions.len() != truth.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: truth.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("error metrics need at least one value"));
    }
    Ok(())
}

/// Maximum absolute error `max_i |p_i − t_i|`.
pub fn mae(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    check_pair(predictions, truth)?;
    Ok(predictions
        .iter()
        .zip(truth)
        .map(|(p, t)| libm::fabs(p - t))
        .fold(0.0, |m, e| if e > m || e.is_nan() { e } else { m }))
}

/// [`mae`] divided by the largest absolute true value.
pub fn rmae(predictions: &[f64], truth: &[f64]) -> Result<f64> {
    let err = mae(predictions, truth)?;
    let scale = truth.iter().fold(0.0f64, |m, t| m.max(libm::fabs(*t)));
    if scale == 0.0 {
        return Err(Error::Division(format!(
            "relative error of an all-zero truth vector ({} values)",
            truth.len()
        )));
    }
    Ok(err / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{halton_points, random_points, sample_indices, TestFunction};
    use crate::kernels::KernelFamily;

    fn kernel(family: KernelFamily, eps: f64) -> RbfKernel {
        RbfKernel::new(family, eps).unwrap()
    }

    #[test]
    fn single_node_system() {
        let locs = PointSet::from_rows(2, &[[0.2, 0.9]]).unwrap();
        let data = DataSet::new(locs.clone(), vec![3.5]).unwrap();
        for fam in KernelFamily::ALL {
            let m = fit(kernel(fam, 1.3), &data, &locs).unwrap();
            assert_eq!(m.coefficients(), &[3.5]);
        }
    }

    #[test]
    fn single_center_evaluation() {
        let c = PointSet::from_rows(2, &[[0.4, 0.4]]).unwrap();
        let m = RbfModel::new(kernel(KernelFamily::Matern2, 3.0), c.clone(), vec![2.0]).unwrap();
        assert_eq!(m.evaluate(&c).unwrap(), vec![2.0]);
    }

    #[test]
    fn wendland_vanishes_outside_support() {
        let c = PointSet::from_rows(2, &[[0.0, 0.0], [0.1, 0.0]]).unwrap();
        let m = RbfModel::new(kernel(KernelFamily::Wendland2, 4.0), c, vec![1.0, -3.0]).unwrap();
        let far = PointSet::from_rows(2, &[[0.9, 0.9]]).unwrap();
        assert_eq!(m.evaluate(&far).unwrap(), vec![0.0]);
    }

    #[test]
    fn interpolation_reproduces_nodes() {
        let locs = random_points(5, 2, 42).unwrap();
        let data = TestFunction::F1.sample(locs.clone()).unwrap();
        let m = fit(kernel(KernelFamily::Gaussian, 2.0), &data, &locs).unwrap();
        let back = m.evaluate(&locs).unwrap();
        for (b, f) in back.iter().zip(data.values()) {
            assert!((b - f).abs() <= 1e-8 * f.abs());
        }
    }

    #[test]
    fn square_least_squares_matches_interpolation() {
        let locs = halton_points(12, 2).unwrap();
        let data = TestFunction::F2.sample(locs.clone()).unwrap();
        let k = kernel(KernelFamily::Matern2, 3.0);
        let a = interpolate(k, &data).unwrap();
        let b = approximate(k, &data, &locs).unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((x - y).abs() <= 1e-8 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn center_subset_uses_least_squares() {
        let locs = halton_points(40, 2).unwrap();
        let data = TestFunction::F1.sample(locs.clone()).unwrap();
        let centers = locs.select(&sample_indices(40, 10, 1).unwrap());
        assert_eq!(fit_kind(&data, &centers), FitKind::LeastSquares);
        assert_eq!(fit_kind(&data, &locs), FitKind::Interpolation);
        let m = fit(kernel(KernelFamily::Gaussian, 3.0), &data, &centers).unwrap();
        assert_eq!(m.coefficients().len(), 10);
    }

    #[test]
    fn permuted_centers_still_interpolate() {
        let locs = halton_points(8, 2).unwrap();
        let data = TestFunction::F1.sample(locs.clone()).unwrap();
        let perm = locs.select(&[7, 6, 5, 4, 3, 2, 1, 0]);
        let m = fit(kernel(KernelFamily::Wendland2, 1.5), &data, &perm).unwrap();
        let back = m.evaluate(&locs).unwrap();
        for (b, f) in back.iter().zip(data.values()) {
            assert!((b - f).abs() <= 1e-8);
        }
    }

    #[test]
    fn near_singular_gaussian_survives_with_jitter() {
        let locs = halton_points(60, 2).unwrap();
        let k = kernel(KernelFamily::Gaussian, 1e-3);
        let plain = assemble(&k, &locs, &locs).unwrap().into_entries();
        assert!(Cholesky::factor(plain, 60).is_err());
        let data = TestFunction::F1.sample(locs.clone()).unwrap();
        let m = fit(k, &data, &locs).unwrap();
        assert!(m.coefficients().iter().all(|c| c.is_finite()));
        let centers = locs.select(&(0..30).collect::<Vec<_>>());
        assert!(matches!(
            fit(k, &data, &centers),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn metrics() {
        assert_eq!(mae(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(mae(&[0.0, 5.0], &[1.0, 3.0]).unwrap(), 2.0);
        assert!(mae(&[1.0], &[1.0, 2.0]).is_err());
        assert!(mae(&[], &[]).is_err());
        assert_eq!(rmae(&[0.0], &[2.0]).unwrap(), 1.0);
        assert_eq!(rmae(&[4.0, 2.0], &[4.0, 2.0]).unwrap(), 0.0);
        assert!(matches!(rmae(&[1.0], &[0.0]), Err(Error::Division(_))));
    }
}
