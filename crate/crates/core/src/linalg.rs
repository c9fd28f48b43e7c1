//! Dense and sparse complex linear algebra used throughout the crate.
//!
//! Dense work goes through `nalgebra`. Environment operators are stored in
//! a small CSR type since the encodings have only O(N) nonzeros.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Compressed sparse row matrix over complex numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
    ) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        t.sort_by_key(|a| (a.0, a.1));
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<C64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, col, v) in t {
            assert!(r < nrows && col < ncols, "triplet ({r}, {col}) out of bounds");
            if last == Some((r, col)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(col);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, col));
            }
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        let mut m = SparseMatrix {
            nrows,
            ncols,
            indptr,
            indices,
            values,
        };
        m.prune(0.0);
        m
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            nrows,
            ncols,
            indptr: vec![0; nrows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![ONE; n])
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_triplets(n, n, diag.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    pub fn from_dense(m: &CMatrix, tol: f64) -> Self {
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for col in 0..m.ncols() {
                let v = m[(r, col)];
                if v.norm() > tol {
                    t.push((r, col, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), m.ncols(), t)
    }

    /// Drops entries with modulus `<= tol`.
    pub fn prune(&mut self, tol: f64) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k].norm() > tol {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.indptr[r]..self.indptr[r + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn get(&self, r: usize, col: usize) -> C64 {
        self.row(r)
            .find(|&(j, _)| j == col)
            .map(|(_, v)| v)
            .unwrap_or(ZERO)
    }

    /// `y = A x`
    pub fn matvec(&self, x: &[C64], y: &mut [C64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yr = acc;
        }
    }

    pub fn mul_vec(&self, x: &CVector) -> CVector {
        let mut y = CVector::zeros(self.nrows);
        self.matvec(x.as_slice(), y.as_mut_slice());
        y
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(
            self.ncols,
            self.nrows,
            self.triplets().map(|(r, col, v)| (col, r, v.conj())),
        )
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out.prune(0.0);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        Self::from_triplets(
            self.nrows,
            self.ncols,
            self.triplets().chain(other.triplets()),
        )
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut t = Vec::with_capacity(self.nnz() * other.nnz());
        for (r1, c1, v1) in self.triplets() {
            for (r2, c2, v2) in other.triplets() {
                t.push((r1 * other.nrows + r2, c1 * other.ncols + c2, v1 * v2));
            }
        }
        Self::from_triplets(self.nrows * other.nrows, self.ncols * other.ncols, t)
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.nrows, self.ncols);
        for (r, col, v) in self.triplets() {
            m[(r, col)] += v;
        }
        m
    }

    /// Maximum absolute column sum; an upper bound on the spectral norm of
    /// a Hermitian matrix.
    pub fn norm_1(&self) -> f64 {
        let mut cols = vec![0.0; self.ncols];
        for (_, col, v) in self.triplets() {
            cols[col] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if self.nrows != self.ncols {
            return f64::INFINITY;
        }
        let adj = self.adjoint();
        let diff = self.add(&adj.scale(c(-1.0)));
        diff.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Diagonal entries if the matrix has no off-diagonal nonzeros.
    pub fn as_diagonal(&self) -> Option<Vec<C64>> {
        if self.nrows != self.ncols {
            return None;
        }
        let mut d = vec![ZERO; self.nrows];
        for (r, col, v) in self.triplets() {
            if r != col {
                return None;
            }
            d[r] = v;
        }
        Some(d)
    }
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * c(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (j, &i) in order.iter().enumerate() {
        vectors.set_column(j, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

/// Largest singular value.
pub fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    (m - m.adjoint()).iter().fold(0.0, |a, v| a.max(v.norm()))
}

/// Operator norm of a sparse matrix. Small matrices go through a dense
/// SVD, larger ones through power iteration on `A†A`.
pub fn sparse_op_norm(m: &SparseMatrix) -> f64 {
    if m.nrows() <= 256 && m.ncols() <= 256 {
        return op_norm(&m.to_dense());
    }
    let adj = m.adjoint();
    let n = m.ncols();
    // deterministic, generic start vector
    let mut x: Vec<C64> = (0..n)
        .map(|i| C64::new(1.0 + (i as f64 * 0.618).sin() * 0.5, (i as f64 * 1.7).cos() * 0.3))
        .collect();
    let mut y = vec![ZERO; m.nrows()];
    let mut z = vec![ZERO; n];
    let mut est = 0.0;
    for _ in 0..500 {
        let nx = norm_sqr(&x).sqrt();
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        m.matvec(&x, &mut y);
        adj.matvec(&y, &mut z);
        let next = norm_sqr(&y).sqrt();
        std::mem::swap(&mut x, &mut z);
        if (next - est).abs() <= 1e-14 * next {
            return next;
        }
        est = next;
    }
    est
}

/// `exp(-i H t)` for dense Hermitian `H`, via eigendecomposition.
pub fn unitary_propagator(h: &CMatrix, t: f64) -> CMatrix {
    let (vals, vecs) = eigh(h);
    let phases = CMatrix::from_diagonal(&CVector::from_iterator(
        vals.len(),
        vals.iter().map(|&e| C64::from_polar(1.0, -e * t)),
    ));
    &vecs * phases * vecs.adjoint()
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Computes `exp(-i t A) v` by a truncated Taylor series with substeps,
/// where `apply` evaluates `A x` and `norm_bound` bounds `‖A‖`.
///
/// `A` need not be Hermitian; non-Hermitian generators such as
/// `H - iΓΠ` decay as expected.
pub fn taylor_expmv<F>(apply: F, norm_bound: f64, t: f64, v: &mut [C64])
where
    F: Fn(&[C64], &mut [C64]),
{
    if t == 0.0 || v.is_empty() {
        return;
    }
    let scaled = norm_bound * t.abs();
    let substeps = scaled.ceil().max(1.0) as usize;
    let h = t / substeps as f64;
    let n = v.len();
    let mut term = vec![ZERO; n];
    let mut next = vec![ZERO; n];
    let factor = C64::new(0.0, -h);
    for _ in 0..substeps {
        term.copy_from_slice(v);
        let vnorm = norm_sqr(v).sqrt().max(f64::MIN_POSITIVE);
        for k in 1..=60 {
            apply(&term, &mut next);
            let s = factor / k as f64;
            let mut tnorm = 0.0;
            for i in 0..n {
                term[i] = next[i] * s;
                v[i] += term[i];
                tnorm += term[i].norm_sqr();
            }
            if tnorm.sqrt() <= 1e-17 * vnorm {
                break;
            }
        }
    }
}

/// Applies `exp(-i H t)` for a Hermitian sparse `H`; diagonal matrices
/// take an exact phase path.
pub fn expm_hermitian_apply(h: &SparseMatrix, norm_bound: f64, t: f64, v: &mut [C64]) {
    if let Some(d) = h.as_diagonal() {
        for (x, e) in v.iter_mut().zip(d) {
            *x *= C64::from_polar(1.0, -e.re * t);
        }
        return;
    }
    taylor_expmv(|x, y| h.matvec(x, y), norm_bound, t, v);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triplets_sum_duplicates_and_drop_zeros() {
        let m = SparseMatrix::from_triplets(
            2,
            2,
            vec![(0, 1, c(1.0)), (0, 1, c(2.0)), (1, 0, c(1.0)), (1, 0, c(-1.0))],
        );
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), c(3.0));
    }

    #[test]
    fn eigh_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(6, &mut rng);
        let (vals, vecs) = eigh(&h);
        let d = CMatrix::from_diagonal(&CVector::from_iterator(6, vals.iter().map(|&x| c(x))));
        let back = &vecs * d * vecs.adjoint();
        assert!((back - &h).norm() < 1e-12);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn taylor_matches_dense_propagator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let h = random_hermitian(8, &mut rng) * c(3.0);
        let sparse = SparseMatrix::from_dense(&h, 0.0);
        let mut v: Vec<C64> = (0..8).map(|i| c(i as f64 + 1.0)).collect();
        let n = norm_sqr(&v).sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        let want = unitary_propagator(&h, 1.7) * CVector::from_column_slice(&v);
        expm_hermitian_apply(&sparse, sparse.norm_1(), 1.7, &mut v);
        let err = (CVector::from_column_slice(&v) - want).norm();
        assert!(err < 1e-12, "err = {err}");
    }

    #[test]
    fn diagonal_path_is_exact_phase() {
        let h = SparseMatrix::from_diagonal(&[c(0.5), c(-2.0)]);
        let mut v = vec![c(1.0), c(1.0)];
        expm_hermitian_apply(&h, 2.0, 3.0, &mut v);
        assert!((v[0] - C64::from_polar(1.0, -1.5)).norm() < 1e-15);
        assert!((v[1] - C64::from_polar(1.0, 6.0)).norm() < 1e-15);
    }

    #[test]
    fn kron_matches_dense() {
        let a = SparseMatrix::from_triplets(2, 2, vec![(0, 1, c(1.0)), (1, 0, c(2.0))]);
        let b = SparseMatrix::from_diagonal(&[c(1.0), I]);
        let dense = kron(&a.to_dense(), &b.to_dense());
        assert!((a.kron(&b).to_dense() - dense).norm() < 1e-15);
    }
}
