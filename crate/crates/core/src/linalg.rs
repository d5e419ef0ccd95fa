//! Small dense linear algebra helpers and an extremal-eigenpair solver.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng;
use crate::Matrix;

/// A symmetric linear operator that can be applied to a vector.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl SymmetricOperator for Matrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        for v in y.iter_mut() {
            *v = 0.0;
        }
        // column-major: accumulate column by column
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = &self.as_slice()[j * n..(j + 1) * n];
            for (yi, &a) in y.iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let ca = a.chunks_exact(4);
    let cb = b.chunks_exact(4);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        acc[0] += x[0] * y[0];
        acc[1] += x[1] * y[1];
        acc[2] += x[2] * y[2];
        acc[3] += x[3] * y[3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for (x, y) in ra.iter().zip(rb) {
        s += x * y;
    }
    s
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Flips each column so that its largest-magnitude entry is positive
/// (first such entry on ties).
pub fn normalize_signs(vectors: &mut Matrix) {
    for mut col in vectors.column_iter_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, v) in col.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best = i;
            }
        }
        if best_abs > 0.0 && col[best] < 0.0 {
            col.neg_mut();
        }
    }
}

/// Full symmetric eigendecomposition, eigenvalues in descending order.
pub fn sym_eigen_desc(m: Matrix) -> (Vec<f64>, Matrix) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Leading eigenpairs at both ends of the spectrum.
#[derive(Debug, Clone)]
pub struct ExtremalPairs {
    /// Largest eigenvalues, descending.
    pub top: Vec<f64>,
    pub top_vectors: Matrix,
    /// Smallest (most negative) eigenvalues, ascending.
    pub bottom: Vec<f64>,
    pub bottom_vectors: Matrix,
}

fn split_extremal(
    values: &[f64],
    vectors: &Matrix,
    n_top: usize,
    n_bottom: usize,
) -> ExtremalPairs {
    let n = vectors.nrows();
    let m = values.len();
    let top = values[..n_top].to_vec();
    let bottom: Vec<f64> = (0..n_bottom).map(|i| values[m - 1 - i]).collect();
    let top_vectors = Matrix::from_fn(n, n_top, |r, c| vectors[(r, c)]);
    let bottom_vectors = Matrix::from_fn(n, n_bottom, |r, c| vectors[(r, m - 1 - c)]);
    ExtremalPairs {
        top,
        top_vectors,
        bottom,
        bottom_vectors,
    }
}

/// Extremal eigenpairs from a dense eigendecomposition.
pub fn extremal_dense(m: &Matrix, n_top: usize, n_bottom: usize) -> ExtremalPairs {
    let (values, vectors) = sym_eigen_desc(m.clone());
    split_extremal(&values, &vectors, n_top, n_bottom)
}

const LANCZOS_TOL: f64 = 1e-11;

/// Lanczos iteration with full reorthogonalization for the `n_top` largest
/// and `n_bottom` smallest eigenpairs of a symmetric operator.
///
/// The start vector comes from a fixed stream so results are reproducible.
/// Exactly repeated eigenvalues may be resolved only once; callers with
/// small, highly structured inputs should use [`extremal_dense`].
pub fn lanczos_extremal<A: SymmetricOperator + ?Sized>(
    op: &A,
    n_top: usize,
    n_bottom: usize,
) -> Result<ExtremalPairs> {
    let n = op.dim();
    let want = n_top + n_bottom;
    if want == 0 || want > n {
        return Err(Error::InvalidParameter(alloc::format!(
            "cannot extract {want} eigenpairs from an operator of dimension {n}"
        )));
    }
    let mut rng = rng::stream(0x5eed, rng::LANCZOS);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        for _ in 0..2 {
            for q in basis {
                let c = dot(q, &v);
                axpy(-c, q, &mut v);
            }
        }
        let nv = norm(&v);
        if nv < 1e-8 {
            None
        } else {
            v.iter_mut().for_each(|x| *x /= nv);
            Some(v)
        }
    };

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut scale = 0.0f64;
    let mut q = random_unit(&basis).expect("nonzero dimension");
    let mut w = vec![0.0; n];
    let mut last_check = 0usize;
    let min_dim = (2 * want + 8).min(n);

    loop {
        op.apply(&q, &mut w);
        let a = dot(&q, &w);
        axpy(-a, &q, &mut w);
        if let (Some(prev), Some(&b_prev)) = (basis.last(), betas.last()) {
            axpy(-b_prev, prev, &mut w);
        }
        basis.push(q);
        alphas.push(a);
        for _ in 0..2 {
            for qi in &basis {
                let c = dot(qi, &w);
                axpy(-c, qi, &mut w);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs() + b);
        let m = basis.len();

        let exhausted;
        if m == n {
            betas.push(0.0);
            exhausted = true;
            q = Vec::new();
        } else if b <= 1e-12 * scale.max(1e-300) {
            // invariant subspace found: continue from a fresh orthogonal direction
            betas.push(0.0);
            match random_unit(&basis) {
                Some(v) => {
                    q = v;
                    exhausted = false;
                }
                None => {
                    exhausted = true;
                    q = Vec::new();
                }
            }
        } else {
            let mut next = w.clone();
            next.iter_mut().for_each(|x| *x /= b);
            q = next;
            betas.push(b);
            exhausted = false;
        }

        let due = m >= min_dim && (m - last_check >= (m / 10).max(4) || exhausted);
        if !(due || exhausted) {
            continue;
        }
        last_check = m;
        let t = Matrix::from_fn(m, m, |i, j| {
            if i == j {
                alphas[i]
            } else if i + 1 == j {
                betas[i]
            } else if j + 1 == i {
                betas[j]
            } else {
                0.0
            }
        });
        let (theta, s) = sym_eigen_desc(t);
        if m < want {
            if exhausted {
                return Err(Error::EigenNonConvergence(m));
            }
            continue;
        }
        let theta_scale = theta
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()))
            .max(1e-300);
        let tail = betas[m - 1];
        let wanted: Vec<usize> = (0..n_top).chain((0..n_bottom).map(|i| m - 1 - i)).collect();
        let converged = wanted
            .iter()
            .all(|&i| (tail * s[(m - 1, i)]).abs() <= LANCZOS_TOL * theta_scale);
        if converged || exhausted {
            if !converged {
                return Err(Error::EigenNonConvergence(m));
            }
            let mut vectors = Matrix::zeros(n, m);
            for (c, &i) in wanted.iter().enumerate() {
                let mut col = vec![0.0; n];
                for (j, qj) in basis.iter().enumerate() {
                    axpy(s[(j, i)], qj, &mut col);
                }
                let nc = norm(&col);
                for r in 0..n {
                    vectors[(r, c)] = col[r] / nc;
                }
            }
            let top = (0..n_top).map(|i| theta[i]).collect();
            let bottom = (0..n_bottom).map(|i| theta[m - 1 - i]).collect();
            let top_vectors = vectors.columns(0, n_top).into_owned();
            let bottom_vectors = vectors.columns(n_top, n_bottom).into_owned();
            return Ok(ExtremalPairs {
                top,
                top_vectors,
                bottom,
                bottom_vectors,
            });
        }
    }
}

/// Moore-Penrose pseudoinverse with singular values below
/// `rel_cutoff * sigma_max` treated as zero. Returns the pseudoinverse and
/// the numerical rank.
pub fn pinv(m: &Matrix, rel_cutoff: f64) -> (Matrix, usize) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (Matrix::zeros(c, r), 0);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cutoff = rel_cutoff * smax;
    let mut out = Matrix::zeros(c, r);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            let vk = vt.row(k).transpose();
            let uk = u.column(k);
            out += (vk * uk.transpose()) / s;
        }
    }
    (out, rank)
}

/// Singular values in descending order.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    let mut s: Vec<f64> = m
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    s
}

/// The orthogonal polar factor `U V^T` of `m = U S V^T` (square `m`).
pub fn polar_orthogonal(m: &Matrix) -> Matrix {
    let svd = m.clone().svd(true, true);
    svd.u.expect("u requested") * svd.v_t.expect("v_t requested")
}

/// Orthogonal `O` minimizing `||a O - b||_F`.
pub fn procrustes_rotation(a: &Matrix, b: &Matrix) -> Matrix {
    polar_orthogonal(&(a.transpose() * b))
}

/// Largest row Euclidean norm.
pub fn two_to_inf(m: &Matrix) -> f64 {
    m.row_iter().map(|r| r.norm()).fold(0.0, f64::max)
}

/// Rows of `m` indexed by `rows`, in order.
pub fn select_rows(m: &Matrix, rows: &[usize]) -> Matrix {
    Matrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

pub fn signature_diag(d_plus: usize, d_minus: usize) -> DVector<f64> {
    DVector::from_fn(d_plus + d_minus, |i, _| if i < d_plus { 1.0 } else { -1.0 })
}

/// Whether a symmetric matrix is positive definite with condition number
/// at most `max_condition`.
pub fn well_conditioned_spd(m: &Matrix, max_condition: f64) -> bool {
    let vals = m.clone().symmetric_eigenvalues();
    let lmax = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lmin = vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    lmin > 0.0 && lmax.is_finite() && lmax / lmin <= max_condition
}
