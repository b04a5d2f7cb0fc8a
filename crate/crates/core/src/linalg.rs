//! Dense factorizations used by the fitters: a row-major Cholesky factor for
//! symmetric positive definite systems and a Householder QR for
//! overdetermined least squares.

use alloc::vec;
use alloc::vec::Vec;

/// Unrolled dot product; the four accumulators let the compiler vectorize.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for c in 0..chunks {
        let i = 4 * c;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for i in 4 * chunks..n {
        s += a[i] * b[i];
    }
    s
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `out[r][c] = Σ_k a[r][k] · b[c][k]` over four rows of each operand.
///
/// Every loaded element feeds four multiply-adds, which is what keeps the
/// factorizations below from being bound by cache bandwidth.
#[inline(always)]
fn tile4x4(a: [&[f64]; 4], b: [&[f64]; 4]) -> [[f64; 4]; 4] {
    let len = a[0].len();
    let (a0, a1, a2, a3) = (&a[0][..len], &a[1][..len], &a[2][..len], &a[3][..len]);
    let (b0, b1, b2, b3) = (&b[0][..len], &b[1][..len], &b[2][..len], &b[3][..len]);
    let mut acc = [[0.0f64; 4]; 4];
    for k in 0..len {
        let bv = [b0[k], b1[k], b2[k], b3[k]];
        let av = [a0[k], a1[k], a2[k], a3[k]];
        for r in 0..4 {
            for c in 0..4 {
                acc[r][c] += av[r] * bv[c];
            }
        }
    }
    acc
}

/// The factorization hit a nonpositive pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub pivot: usize,
}

/// Lower-triangular `L` with `A = L Lᵀ`, stored row-major in a full `n × n`
/// buffer (the strict upper triangle is zero).
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors the symmetric matrix `a` (row-major, only the lower triangle is
    /// read), reusing its storage.
    ///
    /// Left-looking, four rows at a time: each 4×4 block of `L` left of the
    /// diagonal starts from a [`tile4x4`] product over the finished columns.
    pub fn factor(mut a: Vec<f64>, n: usize) -> Result<Self, NotPositiveDefinite> {
        assert_eq!(a.len(), n * n);
        for i0 in (0..n).step_by(4) {
            let ib = (n - i0).min(4);
            let (done, cur) = a.split_at_mut(i0 * n);
            let cur = &mut cur[..ib * n];

            for j0 in (0..i0).step_by(4) {
                let tile = if ib == 4 {
                    tile4x4(
                        [
                            &cur[..j0],
                            &cur[n..n + j0],
                            &cur[2 * n..2 * n + j0],
                            &cur[3 * n..3 * n + j0],
                        ],
                        [
                            &done[j0 * n..j0 * n + j0],
                            &done[(j0 + 1) * n..(j0 + 1) * n + j0],
                            &done[(j0 + 2) * n..(j0 + 2) * n + j0],
                            &done[(j0 + 3) * n..(j0 + 3) * n + j0],
                        ],
                    )
                } else {
                    let mut t = [[0.0; 4]; 4];
                    for (r, tr) in t.iter_mut().enumerate().take(ib) {
                        for (c, tc) in tr.iter_mut().enumerate() {
                            let j = j0 + c;
                            *tc = dot(&cur[r * n..r * n + j0], &done[j * n..j * n + j0]);
                        }
                    }
                    t
                };
                for c in 0..4 {
                    let j = j0 + c;
                    let row_j = &done[j * n..j * n + j + 1];
                    for (r, tr) in tile.iter().enumerate().take(ib) {
                        let row_i = &mut cur[r * n..(r + 1) * n];
                        let s = row_i[j] - tr[c] - dot(&row_i[j0..j], &row_j[j0..j]);
                        row_i[j] = s / row_j[j];
                    }
                }
            }

            for r in 0..ib {
                let i = i0 + r;
                let (above, rest) = cur.split_at_mut(r * n);
                let row_i = &mut rest[..n];
                for j in i0..i {
                    let row_j = &above[(j - i0) * n..(j - i0) * n + j + 1];
                    let s = row_i[j] - dot(&row_i[..j], &row_j[..j]);
                    row_i[j] = s / row_j[j];
                }
                let d = row_i[i] - dot(&row_i[..i], &row_i[..i]);
                if !(d > 0.0) || !d.is_finite() {
                    return Err(NotPositiveDefinite { pivot: i });
                }
                row_i[i] = libm::sqrt(d);
                for x in &mut row_i[i + 1..] {
                    *x = 0.0;
                }
            }
        }
        Ok(Cholesky { n, l: a })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..i * self.n + i + 1]
    }

    /// Solves `L y = b` in place.
    pub fn solve_lower_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        for i in 0..n {
            let row = &self.l[i * n..i * n + i];
            b[i] = (b[i] - dot(row, &b[..i])) / self.l[i * n + i];
        }
    }

    /// Solves `Lᵀ x = y` in place.
    pub fn solve_upper_in_place(&self, y: &mut [f64]) {
        let n = self.n;
        for i in (0..n).rev() {
            y[i] /= self.l[i * n + i];
            let yi = y[i];
            let row = &self.l[i * n..i * n + i];
            axpy(-yi, row, &mut y[..i]);
        }
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_lower_in_place(&mut x);
        self.solve_upper_in_place(&mut x);
        x
    }

    /// The diagonal of `A⁻¹`, i.e. the squared column norms of `L⁻¹`.
    ///
    /// Columns of `L⁻¹` are produced four at a time by forward substitution
    /// and discarded once their norms are accumulated, so the extra storage is
    /// `4n` and the work is `n³/6` multiply-adds.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let l = &self.l;
        let mut diag = vec![0.0; n];
        let mut v = vec![0.0; 4 * n];
        for c0 in (0..n).step_by(4) {
            let cb = (n - c0).min(4);
            v.iter_mut().for_each(|x| *x = 0.0);
            for i0 in (c0..n).step_by(4) {
                let ib = (n - i0).min(4);
                let tile = if ib == 4 && cb == 4 {
                    let rows = |r: usize| &l[(i0 + r) * n + c0..(i0 + r) * n + i0];
                    let cols = |c: usize| &v[c * n + c0..c * n + i0];
                    tile4x4(
                        [rows(0), rows(1), rows(2), rows(3)],
                        [cols(0), cols(1), cols(2), cols(3)],
                    )
                } else {
                    let mut t = [[0.0; 4]; 4];
                    for (r, tr) in t.iter_mut().enumerate().take(ib) {
                        for (c, tc) in tr.iter_mut().enumerate().take(cb) {
                            *tc = dot(
                                &l[(i0 + r) * n + c0..(i0 + r) * n + i0],
                                &v[c * n + c0..c * n + i0],
                            );
                        }
                    }
                    t
                };
                for (r, tr) in tile.iter().enumerate().take(ib) {
                    let i = i0 + r;
                    let row = &l[i * n..i * n + i + 1];
                    for (c, tc) in tr.iter().enumerate().take(cb) {
                        let col = &mut v[c * n..(c + 1) * n];
                        let delta = if i == c0 + c { 1.0 } else { 0.0 };
                        let s = delta - tc - dot(&row[i0..i], &col[i0..i]);
                        col[i] = s / row[i];
                    }
                }
            }
            for c in 0..cb {
                let col = &v[c * n + c0..(c + 1) * n];
                diag[c0 + c] = dot(col, col);
            }
        }
        diag
    }

    pub fn log_det(&self) -> f64 {
        (0..self.n)
            .map(|i| libm::log(self.l[i * self.n + i]))
            .sum::<f64>()
            * 2.0
    }
}

/// A column whose Householder pivot fell below the relative threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDeficient {
    pub column: usize,
}

/// Minimizes `‖A x − b‖₂` for a full-column-rank `rows × cols` matrix `a`
/// (row-major, `rows ≥ cols`) by Householder QR.
///
/// A column is declared dependent when its `|R_kk|` drops below
/// `rel_tol · max_k |R_kk|`.
pub fn least_squares(
    a: &[f64],
    rows: usize,
    cols: usize,
    b: &[f64],
    rel_tol: f64,
) -> Result<Vec<f64>, RankDeficient> {
    assert_eq!(a.len(), rows * cols);
    assert_eq!(b.len(), rows);
    if cols > rows {
        return Err(RankDeficient { column: rows });
    }
    // column-major copy so that reflections touch contiguous memory
    let mut q = vec![0.0; rows * cols];
    for i in 0..rows {
        for k in 0..cols {
            q[k * rows + i] = a[i * cols + k];
        }
    }
    let mut rhs = b.to_vec();
    let mut rdiag = vec![0.0; cols];

    for k in 0..cols {
        let (left, right) = q.split_at_mut((k + 1) * rows);
        let v = &mut left[k * rows + k..];
        let norm = libm::sqrt(dot(v, v));
        if norm == 0.0 {
            rdiag[k] = 0.0;
            continue;
        }
        let alpha = if v[0] > 0.0 { -norm } else { norm };
        v[0] -= alpha;
        let vnorm2 = dot(v, v);
        rdiag[k] = alpha;
        let scale = 2.0 / vnorm2;
        for j in 0..cols - k - 1 {
            let col = &mut right[j * rows + k..(j + 1) * rows];
            let t = scale * dot(v, col);
            axpy(-t, v, col);
        }
        let t = scale * dot(v, &rhs[k..]);
        axpy(-t, v, &mut rhs[k..]);
    }

    let max_r = rdiag.iter().fold(0.0f64, |m, r| m.max(libm::fabs(*r)));
    for (k, r) in rdiag.iter().enumerate() {
        if !(libm::fabs(*r) > rel_tol * max_r) {
            return Err(RankDeficient { column: k });
        }
    }

    // back substitution with R stored above the diagonal of q
    let mut x = rhs[..cols].to_vec();
    for k in (0..cols).rev() {
        x[k] /= rdiag[k];
        let xk = x[k];
        for i in 0..k {
            x[i] -= q[k * rows + i] * xk;
        }
    }
    Ok(x)
}
