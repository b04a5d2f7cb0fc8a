//! Radial kernels `κ_ε(x, z) = φ(ε‖x − z‖₂)` and dense kernel matrices.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::PointSet;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KernelFamily {
    /// Gaussian, `exp(-(εr)²)`.
    Gaussian,
    /// Matérn C², `exp(-εr)(εr + 1)`.
    Matern2,
    /// Wendland C², `max(1 - εr, 0)⁴ (4εr + 1)`.
    Wendland2,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [
        KernelFamily::Gaussian,
        KernelFamily::Matern2,
        KernelFamily::Wendland2,
    ];

    /// The radial profile evaluated at the scaled distance `s = εr ≥ 0`.
    #[inline]
    pub fn profile(self, s: f64) -> f64 {
        match self {
            KernelFamily::Gaussian => libm::exp(-s * s),
            KernelFamily::Matern2 => libm::exp(-s) * (s + 1.0),
            KernelFamily::Wendland2 => {
                let t = 1.0 - s;
                if t <= 0.0 {
                    0.0
                } else {
                    let t2 = t * t;
                    t2 * t2 * (4.0 * s + 1.0)
                }
            }
        }
    }

    pub fn token(self) -> &'static str {
        match self {
            KernelFamily::Gaussian => "ga",
            KernelFamily::Matern2 => "m2",
            KernelFamily::Wendland2 => "w2",
        }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Result<RbfKernel> {
        RbfKernel::new(self, epsilon)
    }
}

impl core::str::FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ga" => Ok(KernelFamily::Gaussian),
            "m2" => Ok(KernelFamily::Matern2),
            "w2" => Ok(KernelFamily::Wendland2),
            other => Err(Error::invalid(format!("unknown kernel `{other}`"))),
        }
    }
}

impl core::fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.token())
    }
}

/// A kernel family together with a positive shape parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RbfKernel {
    family: KernelFamily,
    epsilon: f64,
}

impl RbfKernel {
    pub fn new(family: KernelFamily, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "shape parameter must be positive and finite, got {epsilon}"
            )));
        }
        Ok(RbfKernel { family, epsilon })
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `φ(εr)` for a distance `r ≥ 0`.
    pub fn phi(&self, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::Domain(format!("negative radius {r}")));
        }
        Ok(self.family.profile(self.epsilon * r))
    }

    pub fn value(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: z.len(),
            });
        }
        Ok(self.value_unchecked(x, z))
    }

    #[inline]
    pub(crate) fn value_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        self.family
            .profile(self.epsilon * libm::sqrt(squared_distance(x, z)))
    }
}

#[inline]
pub(crate) fn squared_distance(x: &[f64], z: &[f64]) -> f64 {
    x.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Dense row-major kernel matrix `(K)_{ik} = κ_ε(row_i, col_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl KernelMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.entries[i * self.cols + k]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<f64> {
        self.entries
    }

    /// `K · c`.
    pub fn mul_vec(&self, c: &[f64]) -> Vec<f64> {
        assert_eq!(c.len(), self.cols);
        (0..self.rows)
            .map(|i| crate::linalg::dot(self.row(i), c))
            .collect()
    }

    pub fn transpose(&self) -> KernelMatrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for k in 0..self.cols {
                entries[k * self.rows + i] = self.entries[i * self.cols + k];
            }
        }
        KernelMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }
}

/// Assembles the `rows × cols` kernel matrix. When both point sets are the
/// same, only the lower triangle is evaluated and mirrored.
pub fn assemble(kernel: &RbfKernel, rows: &PointSet, cols: &PointSet) -> Result<KernelMatrix> {
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::invalid("kernel matrix needs nonempty point sets"));
    }
    if rows.dim() != cols.dim() {
        return Err(Error::DimensionMismatch {
            expected: rows.dim(),
            found: cols.dim(),
        });
    }
    if core::ptr::eq(rows, cols) || rows == cols {
        return Ok(assemble_symmetric(kernel, rows));
    }
    let (n, m) = (rows.len(), cols.len());
    let mut entries = Vec::with_capacity(n * m);
    for x in rows.iter() {
        entries.extend(cols.iter().map(|z| kernel.value_unchecked(x, z)));
    }
    Ok(KernelMatrix {
        rows: n,
        cols: m,
        entries,
    })
}

pub(crate) fn assemble_symmetric(kernel: &RbfKernel, points: &PointSet) -> KernelMatrix {
    let n = points.len();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        let x = points.point(i);
        for k in 0..i {
            let v = kernel.value_unchecked(x, points.point(k));
            entries[i * n + k] = v;
            entries[k * n + i] = v;
        }
        entries[i * n + i] = kernel.family.profile(0.0);
    }
    KernelMatrix {
        rows: n,
        cols: n,
        entries,
    }
}
