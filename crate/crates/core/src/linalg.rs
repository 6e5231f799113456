//! Dense and sparse complex linear algebra underneath the physics layers.
//!
//! Operators are stored in compressed sparse row form for cheap application
//! to states; matrix functions (eigendecomposition, exponential, square
//! root) go through dense LAPACK routines.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CVec = Array1<C64>;
pub type CMat = Array2<C64>;

/// Compressed sparse row complex matrix (square).
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed,
    /// exact zeros dropped.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, C64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut data: Vec<C64> = Vec::with_capacity(triplets.len());
        let mut row = 0usize;
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            while row < r {
                indptr[row + 1] = indices.len();
                row += 1;
            }
            if indices.len() > indptr[row] && *indices.last().unwrap() == c {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
            }
        }
        while row < dim {
            indptr[row + 1] = indices.len();
            row += 1;
        }
        let mut out = Self { dim, indptr, indices, data };
        out.prune();
        out
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k];
                if v.norm_sqr() > 0.0 {
                    indices.push(self.indices[k]);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, indptr: vec![0; dim + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        let triplets = (0..dim).map(|i| (i, i, C64::new(1.0, 0.0))).collect();
        Self::from_triplets(dim, triplets)
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.data[k]))
        })
    }

    /// y = A x
    pub fn apply(&self, x: &CVec) -> CVec {
        debug_assert_eq!(x.len(), self.dim);
        let mut y = CVec::zeros(self.dim);
        let xs = x.as_slice().expect("contiguous");
        let ys = y.as_slice_mut().expect("contiguous");
        for r in 0..self.dim {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * xs[self.indices[k]];
            }
            ys[r] = acc;
        }
        y
    }

    /// C = A B with B dense.
    pub fn mul_dense(&self, b: &CMat) -> CMat {
        debug_assert_eq!(b.nrows(), self.dim);
        let ncols = b.ncols();
        let mut c = CMat::zeros((self.dim, ncols));
        for r in 0..self.dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k];
                let j = self.indices[k];
                let brow = b.row(j);
                let mut crow = c.row_mut(r);
                for t in 0..ncols {
                    crow[t] += v * brow[t];
                }
            }
        }
        c
    }

    /// C = B A with B dense.
    pub fn mul_dense_left(&self, b: &CMat) -> CMat {
        debug_assert_eq!(b.ncols(), self.dim);
        let nrows = b.nrows();
        let mut c = CMat::zeros((nrows, self.dim));
        for j in 0..self.dim {
            for k in self.indptr[j]..self.indptr[j + 1] {
                let v = self.data[k];
                let col = self.indices[k];
                for r in 0..nrows {
                    c[(r, col)] += b[(r, j)] * v;
                }
            }
        }
        c
    }

    /// C = A B, both sparse (row-by-row accumulation).
    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let dim = self.dim;
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        let mut acc: Vec<C64> = vec![C64::new(0.0, 0.0); dim];
        let mut touched: Vec<usize> = Vec::new();
        for r in 0..dim {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let va = self.data[k];
                let j = self.indices[k];
                for kk in other.indptr[j]..other.indptr[j + 1] {
                    let c = other.indices[kk];
                    if acc[c].norm_sqr() == 0.0 {
                        touched.push(c);
                    }
                    acc[c] += va * other.data[kk];
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                if acc[c].norm_sqr() > 0.0 {
                    indices.push(c);
                    data.push(acc[c]);
                }
                acc[c] = C64::new(0.0, 0.0);
            }
            touched.clear();
            indptr[r + 1] = indices.len();
        }
        Self { dim, indptr, indices, data }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut triplets: Vec<(usize, usize, C64)> =
            Vec::with_capacity(self.nnz() + other.nnz());
        triplets.extend(self.iter());
        triplets.extend(other.iter());
        Self::from_triplets(self.dim, triplets)
    }

    pub fn scale(&self, factor: C64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= factor;
        }
        out.prune();
        out
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.dim, triplets)
    }

    pub fn to_dense(&self) -> CMat {
        let mut m = CMat::zeros((self.dim, self.dim));
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    pub fn from_dense(m: &CMat, drop_tol: f64) -> Self {
        debug_assert_eq!(m.nrows(), m.ncols());
        let mut triplets = Vec::new();
        for ((r, c), &v) in m.indexed_iter() {
            if v.norm() > drop_tol {
                triplets.push((r, c, v));
            }
        }
        Self::from_triplets(m.nrows(), triplets)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max_ij |A_ij - conj(A_ji)|
    pub fn hermiticity_error(&self) -> f64 {
        let dag = self.dagger();
        self.add(&dag.scale(C64::new(-1.0, 0.0))).max_abs()
    }
}

/// max_ij |A_ij - conj(A_ji)| for a dense matrix.
pub fn hermiticity_error_dense(a: &CMat) -> f64 {
    let n = a.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (a[(i, j)] - a[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn max_abs_dense(a: &CMat) -> f64 {
    a.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// Dense complex matrix product.
///
/// The BLAS zgemm behind `ndarray::dot` needs more stack than the 2 MiB
/// test-thread default; this ikj-ordered loop uses O(1) stack and
/// parallelizes over rows.
pub fn matmul(a: &CMat, b: &CMat) -> CMat {
    use rayon::prelude::*;
    let (m, ka) = a.dim();
    let (kb, n) = b.dim();
    assert_eq!(ka, kb, "matmul dimension mismatch");
    let mut c = CMat::zeros((m, n));
    let b_std = b.as_standard_layout();
    let bs = b_std.as_slice().expect("contiguous");
    let a_std = a.as_standard_layout();
    let as_ = a_std.as_slice().expect("contiguous");
    c.as_slice_mut()
        .expect("contiguous")
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, crow)| {
            for k in 0..ka {
                let aik = as_[i * ka + k];
                if aik.norm_sqr() == 0.0 {
                    continue;
                }
                let brow = &bs[k * n..(k + 1) * n];
                for (cv, bv) in crow.iter_mut().zip(brow.iter()) {
                    *cv += aik * *bv;
                }
            }
        });
    c
}

/// Kronecker product of dense complex matrices.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = CMat::zeros((ra * rb, ca * cb));
    for ((i, j), &av) in a.indexed_iter() {
        if av.norm_sqr() == 0.0 {
            continue;
        }
        for ((k, l), &bv) in b.indexed_iter() {
            out[(i * rb + k, j * cb + l)] = av * bv;
        }
    }
    out
}

/// Eigendecomposition of a Hermitian matrix; eigenvalues ascending,
/// eigenvectors as columns (A = V diag(vals) V^dag).
pub fn eigh(a: &CMat) -> Result<(Array1<f64>, CMat)> {
    let (vals, vecs) = a
        .eigh(UPLO::Lower)
        .map_err(|_| Error::NotHermitian(hermiticity_error_dense(a)))?;
    // lax hands back the conjugate of the column-eigenvector matrix for
    // complex input; undo that so A = V L V^dag holds
    Ok((vals, vecs.mapv(|z| z.conj())))
}

fn one_norm(a: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|v| v.norm()).sum();
        if s > best {
            best = s;
        }
    }
    best
}

/// Dense matrix exponential by scaling and squaring with a Pade(13)
/// approximant.
pub fn expm(a: &CMat) -> CMat {
    // Pade 13 coefficients
    const B: [f64; 14] = [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ];
    let n = a.nrows();
    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let s = if norm > theta13 {
        (norm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a = a.mapv(|v| v * scale);

    let a2 = matmul(&a, &a);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a2, &a4);
    let eye = CMat::eye(n);

    let b = |i: usize| C64::new(B[i], 0.0);
    // u = A (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6.mapv(|v| v * b(13)) + a4.mapv(|v| v * b(11)) + a2.mapv(|v| v * b(9));
    let w2 = matmul(&a6, &w1)
        + a6.mapv(|v| v * b(7))
        + a4.mapv(|v| v * b(5))
        + a2.mapv(|v| v * b(3))
        + eye.mapv(|v| v * b(1));
    let u = matmul(&a, &w2);
    // v = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6.mapv(|v| v * b(12)) + a4.mapv(|v| v * b(10)) + a2.mapv(|v| v * b(8));
    let v = matmul(&a6, &z1)
        + a6.mapv(|v| v * b(6))
        + a4.mapv(|v| v * b(4))
        + a2.mapv(|v| v * b(2))
        + eye.mapv(|v| v * b(0));

    // solve (v - u) r = (v + u)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut r = lu_solve_matrix(&lhs, &rhs);
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

/// Solve A X = B by LU with partial pivoting (O(1) stack; the LAPACK route
/// overflows small test-thread stacks).
fn lu_solve_matrix(a: &CMat, b: &CMat) -> CMat {
    let n = a.nrows();
    assert_eq!(a.ncols(), n);
    assert_eq!(b.nrows(), n);
    let mut lu = a.as_standard_layout().to_owned();
    let lus = lu.as_slice_mut().expect("contiguous");
    let mut perm: Vec<usize> = (0..n).collect();

    for col in 0..n {
        let mut pivot = col;
        let mut best = lus[col * n + col].norm_sqr();
        for row in col + 1..n {
            let mag = lus[row * n + col].norm_sqr();
            if mag > best {
                best = mag;
                pivot = row;
            }
        }
        assert!(best > 0.0, "singular matrix in Pade solve");
        if pivot != col {
            perm.swap(pivot, col);
            for k in 0..n {
                lus.swap(pivot * n + k, col * n + k);
            }
        }
        let diag = lus[col * n + col];
        for row in col + 1..n {
            let factor = lus[row * n + col] / diag;
            lus[row * n + col] = factor;
            if factor.norm_sqr() == 0.0 {
                continue;
            }
            for k in col + 1..n {
                let v = lus[col * n + k];
                lus[row * n + k] -= factor * v;
            }
        }
    }

    let mut x = CMat::zeros((n, b.ncols()));
    for j in 0..b.ncols() {
        let mut y: Vec<C64> = (0..n).map(|i| b[(perm[i], j)]).collect();
        // forward substitution (unit lower triangle)
        for i in 0..n {
            for k in 0..i {
                let l = lus[i * n + k];
                y[i] = y[i] - l * y[k];
            }
        }
        // back substitution
        for i in (0..n).rev() {
            for k in i + 1..n {
                let u = lus[i * n + k];
                y[i] = y[i] - u * y[k];
            }
            y[i] /= lus[i * n + i];
        }
        for i in 0..n {
            x[(i, j)] = y[i];
        }
    }
    x
}

/// Apply exp(-i H dt) to `v` for Hermitian `H` given as a matvec closure,
/// by Lanczos iteration with full reorthogonalization.
///
/// `tol` bounds the a-posteriori residual estimate; exceeding `max_dim`
/// Krylov vectors without convergence is a `ConvergenceFailure`.
pub fn expm_action_hermitian<F>(
    apply: F,
    v: &CVec,
    dt: f64,
    tol: f64,
    max_dim: usize,
) -> Result<CVec>
where
    F: Fn(&CVec) -> CVec,
{
    let dim = v.len();
    let beta0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if beta0 == 0.0 {
        return Ok(v.clone());
    }
    let max_dim = max_dim.min(dim);
    let mut basis: Vec<CVec> = vec![v.mapv(|z| z / beta0)];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();

    let mut last_res = f64::INFINITY;
    for m in 1..=max_dim {
        let mut w = apply(&basis[m - 1]);
        let alpha = basis[m - 1]
            .iter()
            .zip(w.iter())
            .map(|(b, wv)| (b.conj() * wv).re)
            .sum::<f64>();
        alphas.push(alpha);
        // full reorthogonalization: small dims, robustness over speed
        for b in &basis {
            let overlap: C64 = b.iter().zip(w.iter()).map(|(bi, wi)| bi.conj() * wi).sum();
            w.iter_mut().zip(b.iter()).for_each(|(wi, bi)| *wi -= overlap * bi);
        }
        for b in &basis {
            let overlap: C64 = b.iter().zip(w.iter()).map(|(bi, wi)| bi.conj() * wi).sum();
            w.iter_mut().zip(b.iter()).for_each(|(wi, bi)| *wi -= overlap * bi);
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

        // small exponential exp(-i dt T_m) e1 via dense Hermitian eigh
        let mut t = CMat::zeros((m, m));
        for i in 0..m {
            t[(i, i)] = C64::new(alphas[i], 0.0);
            if i + 1 < m {
                t[(i, i + 1)] = C64::new(betas[i], 0.0);
                t[(i + 1, i)] = C64::new(betas[i], 0.0);
            }
        }
        let (tv, tw) = eigh(&t)?;
        let phase: Vec<C64> = tv.iter().map(|&ev| (-C64::i() * ev * dt).exp()).collect();
        let mut small = vec![C64::new(0.0, 0.0); m];
        for (j, p) in phase.iter().enumerate() {
            let overlap = tw[(0, j)].conj();
            for i in 0..m {
                small[i] += tw[(i, j)] * p * overlap;
            }
        }
        let residual = beta * small[m - 1].norm() * dt.abs().max(1.0);
        last_res = residual;

        let happy = beta < 1e-14;
        if residual < tol || happy || m == max_dim {
            if residual < tol || happy {
                let mut out = CVec::zeros(dim);
                for (i, b) in basis.iter().enumerate() {
                    let c = small[i] * beta0;
                    out.iter_mut().zip(b.iter()).for_each(|(o, bi)| *o += c * bi);
                }
                return Ok(out);
            }
            break;
        }
        betas.push(beta);
        basis.push(w.mapv(|z| z / beta));
    }
    Err(Error::ConvergenceFailure { residual: last_res, iterations: max_dim })
}

/// Smallest eigenvalue of a Hermitian operator by Lanczos iteration with
/// full reorthogonalization, started from a fixed deterministic vector.
pub fn lanczos_smallest_eigenvalue<F>(apply: F, dim: usize, iters: usize) -> Result<f64>
where
    F: Fn(&CVec) -> CVec,
{
    let mut v0 = CVec::zeros(dim);
    // deterministic pseudo-random start with support everywhere
    let mut s = 0x9e3779b97f4a7c15u64;
    for i in 0..dim {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let re = ((s >> 33) as f64) / (1u64 << 31) as f64 - 1.0;
        v0[i] = C64::new(re + 0.01, 0.0);
    }
    let norm = v0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v0.mapv_inplace(|z| z / norm);

    let iters = iters.min(dim);
    let mut basis: Vec<CVec> = vec![v0];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    for m in 1..=iters {
        let mut w = apply(&basis[m - 1]);
        let alpha = basis[m - 1]
            .iter()
            .zip(w.iter())
            .map(|(b, wv)| (b.conj() * wv).re)
            .sum::<f64>();
        alphas.push(alpha);
        for b in &basis {
            let overlap: C64 = b.iter().zip(w.iter()).map(|(bi, wi)| bi.conj() * wi).sum();
            w.iter_mut().zip(b.iter()).for_each(|(wi, bi)| *wi -= overlap * bi);
        }
        let beta = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if beta < 1e-14 || m == iters {
            break;
        }
        betas.push(beta);
        basis.push(w.mapv(|z| z / beta));
    }
    let m = alphas.len();
    let mut t = CMat::zeros((m, m));
    for i in 0..m {
        t[(i, i)] = C64::new(alphas[i], 0.0);
        if i + 1 < m && i < betas.len() {
            t[(i, i + 1)] = C64::new(betas[i], 0.0);
            t[(i + 1, i)] = C64::new(betas[i], 0.0);
        }
    }
    let (vals, _) = eigh(&t)?;
    Ok(vals[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> CMat {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64) / (1u64 << 31) as f64 - 1.0
        };
        let mut m = CMat::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(next(), next());
            }
        }
        let dag = m.t().mapv(|z| z.conj());
        (&m + &dag).mapv(|z| z * 0.5)
    }

    #[test]
    fn csr_roundtrip_and_products_match_dense() {
        let a = random_hermitian(17, 3);
        let b = random_hermitian(17, 7);
        let sa = CsrMatrix::from_dense(&a, 0.0);
        let sb = CsrMatrix::from_dense(&b, 0.0);
        assert!(max_abs_dense(&(&sa.to_dense() - &a)) < 1e-15);
        let prod = sa.matmul(&sb).to_dense();
        let dense_prod = matmul(&a, &b);
        assert!(max_abs_dense(&(&prod - &dense_prod)) < 1e-12);
        // sparse x dense and dense x sparse
        assert!(max_abs_dense(&(&sa.mul_dense(&b) - &dense_prod)) < 1e-12);
        assert!(max_abs_dense(&(&sb.mul_dense_left(&a) - &dense_prod)) < 1e-12);
        // dagger
        let dag = sa.dagger().to_dense();
        assert!(max_abs_dense(&(&dag - &a.t().mapv(|z| z.conj()))) < 1e-15);
    }

    #[test]
    fn csr_sums_duplicate_triplets() {
        let t = vec![
            (0, 1, C64::new(1.0, 0.0)),
            (0, 1, C64::new(2.0, 0.5)),
            (2, 0, C64::new(-1.0, 0.0)),
        ];
        let m = CsrMatrix::from_triplets(3, t).to_dense();
        assert!((m[(0, 1)] - C64::new(3.0, 0.5)).norm() < 1e-15);
        assert!((m[(2, 0)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eigh_returns_column_eigenvectors() {
        let h = random_hermitian(9, 21);
        let (vals, vecs) = eigh(&h).unwrap();
        let mut lam = CMat::zeros((9, 9));
        for i in 0..9 {
            lam[(i, i)] = C64::new(vals[i], 0.0);
        }
        let recon = matmul(&matmul(&vecs, &lam), &vecs.t().mapv(|z| z.conj()).to_owned());
        assert!(max_abs_dense(&(&recon - &h)) < 1e-13);
        for j in 0..9 {
            assert!(vals[j] >= vals[0]);
        }
    }

    #[test]
    fn expm_of_zero_is_identity() {
        let z = CMat::zeros((6, 6));
        let e = expm(&z);
        assert!(max_abs_dense(&(&e - &CMat::eye(6))) < 1e-14);
    }

    #[test]
    fn expm_matches_eigendecomposition_route() {
        // dual route: Pade scaling-squaring vs U exp(-i dt L) U^dag
        let h = random_hermitian(24, 11);
        let dt = 0.7;
        let a = h.mapv(|z| z * C64::new(0.0, -dt));
        let via_pade = expm(&a);
        let (vals, vecs) = eigh(&h).unwrap();
        let mut diag = CMat::zeros((24, 24));
        for (i, &v) in vals.iter().enumerate() {
            diag[(i, i)] = (-C64::i() * v * dt).exp();
        }
        let via_eigh = matmul(&matmul(&vecs, &diag), &vecs.t().mapv(|z| z.conj()).to_owned());
        assert!(max_abs_dense(&(&via_pade - &via_eigh)) < 1e-12);
    }

    #[test]
    fn expm_handles_large_norm_by_squaring() {
        let h = random_hermitian(12, 5);
        let dt = 40.0;
        let a = h.mapv(|z| z * C64::new(0.0, -dt));
        let e = expm(&a);
        // unitary check
        let prod = matmul(&e, &e.t().mapv(|z| z.conj()).to_owned());
        assert!(max_abs_dense(&(&prod - &CMat::eye(12))) < 1e-10);
    }

    #[test]
    fn lanczos_expm_matches_dense() {
        let h = random_hermitian(64, 13);
        let mut v = CVec::zeros(64);
        v[0] = C64::new(0.6, 0.0);
        v[5] = C64::new(0.0, 0.8);
        let dt = 1.3;
        let krylov = expm_action_hermitian(|x| h.dot(x), &v, dt, 1e-12, 64).unwrap();
        let dense = expm(&h.mapv(|z| z * C64::new(0.0, -dt))).dot(&v);
        let diff: f64 = krylov
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-10, "krylov vs dense diff {diff}");
    }

    #[test]
    fn lanczos_ground_state_matches_eigh() {
        let h = random_hermitian(40, 17);
        let (vals, _) = eigh(&h).unwrap();
        let ground = lanczos_smallest_eigenvalue(|x| h.dot(x), 40, 40).unwrap();
        assert!((ground - vals[0]).abs() < 1e-9);
    }
}
