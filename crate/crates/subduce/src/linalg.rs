//! Dense and sparse linear algebra helpers shared by the solver and oracles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Orthonormal basis for the column span of `m`, dropping directions whose
/// singular value falls below `rank_cutoff * max(sigma_max, 1)`.
pub fn orthonormal_columns(m: &DMatrix<f64>, rank_cutoff: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return m.clone();
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let smax = svd.singular_values.max();
    let tol = rank_cutoff * smax.max(1.0);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] > tol)
        .collect();
    u.select_columns(&kept)
}

/// Orthonormal basis of the right nullspace of `m` (kernel of m as a map on
/// column vectors). Rank decisions are relative: a direction is null when its
/// singular value is at most `rank_cutoff * max(sigma_max, 1)`.
pub fn nullspace(m: &DMatrix<f64>, rank_cutoff: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Pad wide matrices to square so the full right factor is available.
    let work = if m.nrows() < cols {
        let mut padded = DMatrix::zeros(cols, cols);
        padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        padded
    } else {
        m.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max();
    let tol = rank_cutoff * smax.max(1.0);
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| svd.singular_values[k] <= tol)
        .collect();
    v_t.transpose().select_columns(&kept)
}

/// Cosines of the principal angles between the spans of two orthonormal
/// column bases, descending.
pub fn principal_cosines(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<f64> {
    let m = a.transpose() * b;
    let mut s: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s.iter().map(|&c| c.clamp(0.0, 1.0)).collect()
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    /// Builds from per-row (column, value) lists.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Csr {
        let nnz = rows.iter().map(|r| r.len()).sum();
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        let mut col = Vec::with_capacity(nnz);
        let mut val = Vec::with_capacity(nnz);
        row_ptr.push(0);
        for row in rows {
            let mut sorted = row.clone();
            sorted.sort_by_key(|&(c, _)| c);
            for (c, v) in sorted {
                debug_assert!(c < ncols);
                col.push(c);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        Csr {
            nrows: rows.len(),
            ncols,
            row_ptr,
            col,
            val,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    /// y = self * x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.ncols);
        debug_assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.val[k] * x[self.col[k]];
            }
            y[r] = acc;
        }
    }

    /// y = self^T * x.
    pub fn mul_vec_transpose(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.nrows);
        debug_assert_eq!(y.len(), self.ncols);
        y.fill(0.0);
        for r in 0..self.nrows {
            let xr = x[r];
            if xr == 0.0 {
                continue;
            }
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col[k]] += self.val[k] * xr;
            }
        }
    }

    /// Dense copy, for small systems and tests.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col[k])] = self.val[k];
            }
        }
        m
    }

    /// Maximum absolute entry of self * x.
    pub fn residual_inf(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; self.nrows];
        self.mul_vec(x, &mut y);
        y.iter().fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

/// Applies the normal operator x -> M^T (M x) of a CSR matrix to each column.
pub fn normal_apply(m: &Csr, x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(x.nrows(), x.ncols());
    let mut tmp = vec![0.0; m.nrows()];
    let mut col_in = vec![0.0; x.nrows()];
    let mut col_out = vec![0.0; x.nrows()];
    for j in 0..x.ncols() {
        for i in 0..x.nrows() {
            col_in[i] = x[(i, j)];
        }
        m.mul_vec(&col_in, &mut tmp);
        m.mul_vec_transpose(&tmp, &mut col_out);
        for i in 0..x.nrows() {
            out[(i, j)] = col_out[i];
        }
    }
    out
}

/// Estimate of the largest eigenvalue of a symmetric PSD operator by
/// power iteration with a fixed seed.
pub fn estimate_largest<F>(n: usize, apply: F, iters: usize, seed: u64) -> f64
where
    F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = DMatrix::from_fn(n, 1, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    let norm = v.column(0).norm();
    v /= norm;
    let mut lambda = 0.0;
    for _ in 0..iters {
        let w = apply(&v);
        lambda = v.column(0).dot(&w.column(0));
        let norm = w.column(0).norm();
        if norm == 0.0 {
            return 0.0;
        }
        v = w / norm;
    }
    lambda.max(0.0)
}

/// Result of a LOBPCG run for the smallest eigenpairs.
pub struct SmallestEigs {
    /// Ritz values, ascending.
    pub values: DVector<f64>,
    /// Corresponding orthonormal Ritz vectors (columns).
    pub vectors: DMatrix<f64>,
    /// Residual norms ||A x - theta x|| per pair.
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Rayleigh-Ritz step: returns (ascending values, rotated basis columns).
fn rayleigh_ritz<F>(apply: &F, s: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>, DMatrix<f64>)
where
    F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let a_s = apply(s);
    let mut h = s.transpose() * &a_s;
    // Symmetrize against floating-point drift.
    h = (&h + h.transpose()) * 0.5;
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(order.len(), order.iter().map(|&i| eig.eigenvalues[i]));
    let c = eig.eigenvectors.select_columns(&order);
    (values, s * &c, a_s * &c)
}

/// Block LOBPCG for the `k` smallest eigenpairs of a symmetric PSD operator.
///
/// Plain variant with full re-orthonormalization of the [X, W, P] subspace
/// each iteration; stable at the block sizes used here. Deterministic for a
/// fixed seed.
pub fn lobpcg_smallest<F>(
    n: usize,
    k: usize,
    apply: F,
    max_iter: usize,
    res_tol: f64,
    seed: u64,
) -> SmallestEigs
where
    F: Fn(&DMatrix<f64>) -> DMatrix<f64>,
{
    let k = k.min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x0 = DMatrix::from_fn(n, k, |_, _| rng.gen::<f64>() * 2.0 - 1.0);
    let mut x = orthonormal_columns(&x0, 1e-12);
    let mut p: Option<DMatrix<f64>> = None;
    let mut values = DVector::zeros(k);
    let mut residuals = vec![f64::INFINITY; k];
    let mut iterations = 0;

    for it in 0..max_iter {
        iterations = it + 1;
        let (vals, xr, axr) = rayleigh_ritz(&apply, &x);
        let kk = vals.len().min(k);
        let x_new = xr.columns(0, kk).into_owned();
        let ax_new = axr.columns(0, kk).into_owned();
        values = vals.rows(0, kk).into_owned();
        // Residual block R = A X - X diag(theta).
        let mut r = ax_new.clone();
        for j in 0..kk {
            let xj = x_new.column(j) * values[j];
            r.set_column(j, &(ax_new.column(j) - xj));
        }
        residuals = (0..kk).map(|j| r.column(j).norm()).collect();
        x = x_new;
        if residuals.iter().all(|&rn| rn <= res_tol) {
            break;
        }
        // Expand the search space with residuals and previous directions.
        let mut cols = x.ncols() + r.ncols() + p.as_ref().map_or(0, |p| p.ncols());
        let mut s = DMatrix::zeros(n, cols);
        s.columns_mut(0, x.ncols()).copy_from(&x);
        s.columns_mut(x.ncols(), r.ncols()).copy_from(&r);
        if let Some(pm) = &p {
            s.columns_mut(x.ncols() + r.ncols(), pm.ncols()).copy_from(pm);
        }
        let s = orthonormal_columns(&s, 1e-10);
        cols = s.ncols();
        if cols == 0 {
            break;
        }
        let (_, sx, _) = rayleigh_ritz(&apply, &s);
        let take = cols.min(k);
        let x_next = sx.columns(0, take).into_owned();
        // Conjugate directions: the part of the new block orthogonal to X.
        let proj = &x * (x.transpose() * &x_next);
        let p_next = orthonormal_columns(&(&x_next - proj), 1e-10);
        p = if p_next.ncols() > 0 { Some(p_next) } else { None };
        x = x_next;
    }

    SmallestEigs {
        values,
        vectors: x,
        residuals,
        iterations,
    }
}
