//! Adjacency spectral embedding and embedding-dimension selection.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::{Graph, Signature};
use crate::linalg::{self, ExtremalPairs, SymmetricOperator};
use crate::Matrix;

/// Below this size the dense eigensolver is used by [`EigenSolver::Auto`].
pub const DENSE_LIMIT: usize = 160;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EigenSolver {
    /// Dense for small inputs, Lanczos otherwise (dense on Lanczos failure).
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Estimated latent positions `Xhat = Uhat |Lambda|^{1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub xhat: Matrix,
    /// `d_plus` largest positive eigenvalues (descending), then `d_minus`
    /// most negative ones (by decreasing magnitude).
    pub eigvals: Vec<f64>,
    pub signature: Signature,
    pub uhat: Matrix,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.xhat.nrows()
    }

    pub fn dim(&self) -> usize {
        self.xhat.ncols()
    }
}

/// Embeds a graph using the `d_plus` largest and `d_minus` most negative
/// eigenpairs of its adjacency matrix.
pub fn embed(g: &Graph, signature: Signature) -> Result<Embedding> {
    embed_with(g, signature, EigenSolver::Auto)
}

pub fn embed_with(g: &Graph, signature: Signature, solver: EigenSolver) -> Result<Embedding> {
    check_request(g.n(), signature)?;
    let use_dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
        EigenSolver::Auto => g.n() <= DENSE_LIMIT,
    };
    let pairs = if use_dense {
        linalg::extremal_dense(&g.to_matrix(), signature.d_plus, signature.d_minus)
    } else {
        match linalg::lanczos_extremal(g, signature.d_plus, signature.d_minus) {
            Ok(p) => p,
            Err(Error::EigenNonConvergence(_)) if solver == EigenSolver::Auto => {
                log::warn!("Lanczos did not converge; falling back to dense eigensolver");
                linalg::extremal_dense(&g.to_matrix(), signature.d_plus, signature.d_minus)
            }
            Err(e) => return Err(e),
        }
    };
    assemble(pairs, signature)
}

/// Embeds an arbitrary symmetric real matrix (for instance a probability
/// matrix) with the dense solver.
pub fn embed_matrix(m: &Matrix, signature: Signature) -> Result<Embedding> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{}, expected square",
            m.nrows(),
            m.ncols()
        )));
    }
    check_request(m.nrows(), signature)?;
    assemble(
        linalg::extremal_dense(m, signature.d_plus, signature.d_minus),
        signature,
    )
}

/// Embeds with an arbitrary symmetric operator using Lanczos.
pub fn embed_operator<A: SymmetricOperator + ?Sized>(
    op: &A,
    signature: Signature,
) -> Result<Embedding> {
    check_request(op.dim(), signature)?;
    assemble(
        linalg::lanczos_extremal(op, signature.d_plus, signature.d_minus)?,
        signature,
    )
}

fn check_request(n: usize, signature: Signature) -> Result<()> {
    let d = signature.dim();
    if d == 0 || d > n {
        return Err(Error::InvalidParameter(format!(
            "embedding dimension {d} must lie in [1, {n}]"
        )));
    }
    Ok(())
}

fn assemble(pairs: ExtremalPairs, signature: Signature) -> Result<Embedding> {
    let available_positive = pairs.top.iter().filter(|&&v| v > 0.0).count();
    let available_negative = pairs.bottom.iter().filter(|&&v| v < 0.0).count();
    if available_positive < signature.d_plus || available_negative < signature.d_minus {
        return Err(Error::InsufficientEigenvalues {
            requested_positive: signature.d_plus,
            requested_negative: signature.d_minus,
            available_positive,
            available_negative,
        });
    }
    let n = pairs.top_vectors.nrows();
    let d = signature.dim();
    let mut uhat = Matrix::zeros(n, d);
    uhat.columns_mut(0, signature.d_plus)
        .copy_from(&pairs.top_vectors);
    uhat.columns_mut(signature.d_plus, signature.d_minus)
        .copy_from(&pairs.bottom_vectors);
    linalg::normalize_signs(&mut uhat);
    let eigvals: Vec<f64> = pairs
        .top
        .iter()
        .chain(pairs.bottom.iter())
        .copied()
        .collect();
    let mut xhat = uhat.clone();
    for (c, &l) in eigvals.iter().enumerate() {
        let s = libm::sqrt(l.abs());
        xhat.column_mut(c).scale_mut(s);
    }
    Ok(Embedding {
        xhat,
        eigvals,
        signature,
        uhat,
    })
}

/// All eigenvalues of the adjacency matrix sorted by decreasing magnitude.
pub fn scree(g: &Graph) -> Vec<f64> {
    scree_matrix(&g.to_matrix())
}

pub fn scree_matrix(m: &Matrix) -> Vec<f64> {
    let mut v: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| {
        b.abs()
            .partial_cmp(&a.abs())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    v
}

/// Signature matching the sign pattern of the leading `d` eigenvalues in a
/// magnitude-sorted scree.
pub fn signature_from_scree(scree: &[f64], d: usize) -> Signature {
    let d_plus = scree.iter().take(d).filter(|&&v| v >= 0.0).count();
    Signature::new(d_plus, d.min(scree.len()) - d_plus)
}

/// Profile log-likelihood of splitting sorted magnitudes after `q` entries,
/// two Gaussian groups with a shared variance.
pub fn profile_log_likelihood(mags: &[f64], q: usize) -> f64 {
    let p = mags.len();
    let (a, b) = mags.split_at(q);
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let ss = |s: &[f64], m: f64| s.iter().map(|x| (x - m) * (x - m)).sum::<f64>();
    let (m1, m2) = (mean(a), mean(b));
    let denom = if p > 2 { (p - 2) as f64 } else { 1.0 };
    let var = (ss(a, m1) + ss(b, m2)) / denom;
    if var <= 0.0 {
        return if m1 != m2 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
    }
    let two_pi = 2.0 * core::f64::consts::PI;
    let resid = ss(a, m1) + ss(b, m2);
    -0.5 * p as f64 * libm::log(two_pi * var) - resid / (2.0 * var)
}

/// Elbow of a scree plot by the Zhu-Ghodsi profile likelihood.
///
/// `values` are sorted by decreasing magnitude (signs are ignored). The
/// returned split `q` lies in `[1, max_d]`; ties go to the smallest `q`, and
/// an input with no spread returns 1.
pub fn select_dimension(values: &[f64], max_d: usize) -> usize {
    let mags: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    let p = mags.len();
    if p < 2 || max_d <= 1 {
        return 1;
    }
    let hi = mags.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lo = mags.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if hi - lo <= 1e-12 * hi.abs().max(1e-300) {
        return 1;
    }
    let mut best = 1;
    let mut best_ll = f64::NEG_INFINITY;
    for q in 1..=max_d.min(p - 1) {
        let ll = profile_log_likelihood(&mags, q);
        if ll > best_ll {
            best_ll = ll;
            best = q;
        }
    }
    best
}
