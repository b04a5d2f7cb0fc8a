//! Scattered node sets, the two benchmark functions, and train/validation
//! partitioning.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// An ordered list of points in ℝᵈ, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from a flat row-major coordinate buffer.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not split into points of dimension {dim}",
                coords.len()
            )));
        }
        Ok(PointSet { dim, coords })
    }

    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for row in rows {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            coords.extend_from_slice(row);
        }
        PointSet::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The points at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> PointSet {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet {
            dim: self.dim,
            coords,
        }
    }

    /// Pairs `(first, later)` of indices whose coordinates are bitwise equal.
    pub fn duplicates(&self) -> Vec<(usize, usize)> {
        let mut seen: BTreeMap<Vec<u64>, usize> = BTreeMap::new();
        let mut dups = Vec::new();
        for (i, p) in self.iter().enumerate() {
            match seen.entry(point_key(p)) {
                alloc::collections::btree_map::Entry::Occupied(e) => dups.push((*e.get(), i)),
                alloc::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(i);
                }
            }
        }
        dups
    }

    /// For each point of `subset`, its index in `self`, or `None` if absent.
    pub fn locate(&self, subset: &PointSet) -> Vec<Option<usize>> {
        let index = self.index_map();
        subset
            .iter()
            .map(|p| index.get(&point_key(p)).copied())
            .collect()
    }

    /// True when both sets hold the same points regardless of order.
    pub fn same_set(&self, other: &PointSet) -> bool {
        if self.dim != other.dim || self.len() != other.len() {
            return false;
        }
        let mut a: Vec<Vec<u64>> = self.iter().map(point_key).collect();
        let mut b: Vec<Vec<u64>> = other.iter().map(point_key).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
    }

    /// True when no point of `other` coincides with a point of `self`.
    pub fn disjoint_from(&self, other: &PointSet) -> bool {
        let index = self.index_map();
        other.iter().all(|p| !index.contains_key(&point_key(p)))
    }

    fn index_map(&self) -> BTreeMap<Vec<u64>, usize> {
        let mut index = BTreeMap::new();
        for (i, p) in self.iter().enumerate() {
            index.entry(point_key(p)).or_insert(i);
        }
        index
    }
}

// +0.0 and -0.0 are the same location.
fn point_key(p: &[f64]) -> Vec<u64> {
    p.iter().map(|&x| (x + 0.0).to_bits()).collect()
}

/// Locations paired with measured values.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSet {
    locations: PointSet,
    values: Vec<f64>,
}

impl DataSet {
    pub fn new(locations: PointSet, values: Vec<f64>) -> Result<Self> {
        if locations.len() != values.len() {
            return Err(Error::LengthMismatch {
                left: locations.len(),
                right: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("value {i} is not finite")));
        }
        Ok(DataSet { locations, values })
    }

    pub fn locations(&self) -> &PointSet {
        &self.locations
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn select(&self, indices: &[usize]) -> DataSet {
        DataSet {
            locations: self.locations.select(indices),
            values: indices.iter().map(|&i| self.values[i]).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> DataSet {
        DataSet {
            locations: self.locations.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    /// Errors when two locations coincide; interpolation needs distinct nodes.
    pub fn require_distinct(&self) -> Result<()> {
        let dups = self.locations.duplicates();
        if dups.is_empty() {
            Ok(())
        } else {
            Err(Error::DuplicateLocations(dups))
        }
    }
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
    101, 103, 107, 109, 113, 127, 131,
];

fn nth_prime(k: usize) -> u64 {
    if let Some(&p) = PRIMES.get(k) {
        return p;
    }
    let mut found = PRIMES.len();
    let mut candidate = PRIMES[PRIMES.len() - 1];
    loop {
        candidate += 2;
        let is_prime = (3..)
            .step_by(2)
            .take_while(|d| d * d <= candidate)
            .all(|d| !candidate.is_multiple_of(d));
        if is_prime {
            if found == k {
                return candidate;
            }
            found += 1;
        }
    }
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv_base = 1.0 / base as f64;
    let mut scale = inv_base;
    let mut result = 0.0;
    while index > 0 {
        result += (index % base) as f64 * scale;
        index /= base;
        scale *= inv_base;
    }
    result
}

/// The Halton points with indices `1..=n`, coordinate `k` in the `k`-th prime base.
pub fn halton_points(n: usize, dim: usize) -> Result<PointSet> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid("halton_points needs n >= 1 and dim >= 1"));
    }
    let bases: Vec<u64> = (0..dim).map(nth_prime).collect();
    let mut coords = Vec::with_capacity(n * dim);
    for i in 1..=n as u64 {
        coords.extend(bases.iter().map(|&b| radical_inverse(i, b)));
    }
    PointSet::new(dim, coords)
}

/// `n` independent uniform points in the unit cube.
pub fn random_points(n: usize, dim: usize, seed: u64) -> Result<PointSet> {
    if n == 0 || dim == 0 {
        return Err(Error::invalid("random_points needs n >= 1 and dim >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coords = (0..n * dim).map(|_| rng.gen::<f64>()).collect();
    PointSet::new(dim, coords)
}

/// The two bivariate benchmark functions on `[0,1]²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// Franke-type four-exponential surface (second term centred at 9x₁ = 2).
    F1,
    /// A spherical cap, `sqrt(64 - 81 |x - c|²) / 9 - 1/2`.
    F2,
}

impl TestFunction {
    pub fn eval(self, x: &[f64]) -> Result<f64> {
        if x.len() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: x.len(),
            });
        }
        let (x1, x2) = (x[0], x[1]);
        if !(0.0..=1.0).contains(&x1) || !(0.0..=1.0).contains(&x2) {
            return Err(Error::Domain(format!("({x1}, {x2}) is outside [0,1]^2")));
        }
        Ok(match self {
            TestFunction::F1 => franke(x1, x2),
            TestFunction::F2 => {
                let radicand = 64.0 - 81.0 * ((x1 - 0.5) * (x1 - 0.5) + (x2 - 0.5) * (x2 - 0.5));
                libm::sqrt(radicand) / 9.0 - 0.5
            }
        })
    }

    /// Samples the function at every location.
    pub fn sample(self, locations: PointSet) -> Result<DataSet> {
        let values = locations
            .iter()
            .map(|p| self.eval(p))
            .collect::<Result<Vec<_>>>()?;
        DataSet::new(locations, values)
    }

    pub fn token(self) -> &'static str {
        match self {
            TestFunction::F1 => "f1",
            TestFunction::F2 => "f2",
        }
    }
}

impl core::str::FromStr for TestFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "f1" => Ok(TestFunction::F1),
            "f2" => Ok(TestFunction::F2),
            other => Err(Error::invalid(format!("unknown test function `{other}`"))),
        }
    }
}

impl core::fmt::Display for TestFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.token())
    }
}

fn franke(x1: f64, x2: f64) -> f64 {
    let a = 9.0 * x1;
    let b = 9.0 * x2;
    0.75 * libm::exp(-(a - 2.0) * (a - 2.0) / 4.0 - (b - 2.0) * (b - 2.0) / 4.0)
        + 0.75 * libm::exp(-(a - 2.0) * (a - 2.0) / 49.0 - (b + 1.0) / 10.0)
        + 0.5 * libm::exp(-(a - 7.0) * (a - 7.0) / 4.0 - (b - 3.0) * (b - 3.0) / 4.0)
        - 0.2 * libm::exp(-(a - 4.0) * (a - 4.0) - (b - 7.0) * (b - 7.0))
}

/// `floor(fraction * n)`, snapping products within round-off of an integer.
pub fn floor_count(fraction: f64, n: usize) -> usize {
    let t = fraction * n as f64;
    let r = libm::round(t);
    if libm::fabs(t - r) <= 1e-9 * (1.0 + t) {
        r as usize
    } else {
        libm::floor(t) as usize
    }
}

/// `ceil(fraction * n)`, snapping products within round-off of an integer.
pub fn ceil_count(fraction: f64, n: usize) -> usize {
    let t = fraction * n as f64;
    let r = libm::round(t);
    if libm::fabs(t - r) <= 1e-9 * (1.0 + t) {
        r as usize
    } else {
        libm::ceil(t) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: DataSet,
    pub val: DataSet,
    pub train_centers: PointSet,
}

/// Shuffled train/validation partition of `ds` with centers split alongside.
///
/// Centers and non-center locations are shuffled separately so that both
/// `|train| = floor(f·n)` and `|train_centers| = floor(f·m)` hold; a center
/// lands in `train_centers` exactly when its location lands in `train`.
pub fn split(ds: &DataSet, centers: &PointSet, settings: SplitSpec) -> Result<Split> {
    let n = ds.len();
    if !(settings.train_fraction > 0.0 && settings.train_fraction < 1.0) {
        return Err(Error::invalid("train fraction must lie in (0, 1)"));
    }
    if centers.dim() != ds.locations().dim() {
        return Err(Error::DimensionMismatch {
            expected: ds.locations().dim(),
            found: centers.dim(),
        });
    }
    let n_train = floor_count(settings.train_fraction, n);
    if n_train == 0 || n_train == n {
        return Err(Error::invalid(format!(
            "cannot split {n} points with train fraction {}",
            settings.train_fraction
        )));
    }

    let positions = ds.locations().locate(centers);
    let mut is_center = alloc::vec![false; n];
    let mut center_idx = Vec::with_capacity(positions.len());
    for (k, pos) in positions.into_iter().enumerate() {
        let i = pos.ok_or_else(|| {
            Error::Configuration(format!("center {k} is not one of the data locations"))
        })?;
        if is_center[i] {
            return Err(Error::Configuration(format!("center {k} is repeated")));
        }
        is_center[i] = true;
        center_idx.push(i);
    }
    let mut other_idx: Vec<usize> = (0..n).filter(|&i| !is_center[i]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    center_idx.shuffle(&mut rng);
    other_idx.shuffle(&mut rng);

    let m = center_idx.len();
    let m_train = floor_count(settings.train_fraction, m);
    let o_train = n_train.saturating_sub(m_train).min(other_idx.len());
    let m_train = n_train - o_train;

    let mut train_idx: Vec<usize> = center_idx[..m_train].to_vec();
    train_idx.extend_from_slice(&other_idx[..o_train]);
    let mut val_idx: Vec<usize> = center_idx[m_train..].to_vec();
    val_idx.extend_from_slice(&other_idx[o_train..]);
    train_idx.shuffle(&mut rng);
    val_idx.shuffle(&mut rng);

    let mut in_train = alloc::vec![false; n];
    for &i in &train_idx {
        in_train[i] = true;
    }
    // Preserve the caller's center order.
    let mut center_in_train: Vec<usize> = Vec::with_capacity(m_train);
    for (k, pos) in ds.locations().locate(centers).into_iter().enumerate() {
        if let Some(i) = pos {
            if in_train[i] {
                center_in_train.push(k);
            }
        }
    }

    Ok(Split {
        train: ds.select(&train_idx),
        val: ds.select(&val_idx),
        train_centers: centers.select(&center_in_train),
    })
}

/// A seeded uniform subset of `k` distinct indices out of `0..n`, in shuffled order.
pub fn sample_indices(n: usize, k: usize, seed: u64) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::invalid(format!("cannot draw {k} of {n} indices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    idx.truncate(k);
    Ok(idx)
}
