//! Shift estimation, per-vertex chi-square tests and Benjamini-Hochberg
//! selection of the unshifted set.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::align::{align_on_seeds, AlignmentMap};
use crate::embed::{embed, Embedding};
use crate::error::{Error, Result};
use crate::graph::{Graph, ShiftScenario, Signature};
use crate::linalg;
use crate::special::chi2_sf;
use crate::Matrix;

/// Floor applied to `P(1 - P)` before building covariances.
pub const XI_FLOOR: f64 = 1e-10;
/// Largest condition number accepted when inverting a covariance.
pub const MAX_CONDITION: f64 = 1e12;
const GRAM_CUTOFF: f64 = 1e-12;

/// Latent signatures of the two networks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelDims {
    pub sig1: Signature,
    pub sig2: Signature,
}

impl ModelDims {
    /// Both networks are RDPGs of dimension `d`.
    pub const fn same(d: usize) -> Self {
        Self::signed(Signature::rdpg(d))
    }

    /// Both networks share a (possibly indefinite) signature.
    pub const fn signed(sig: Signature) -> Self {
        Self {
            sig1: sig,
            sig2: sig,
        }
    }

    /// RDPGs of different dimensions `d1 <= d2`.
    pub const fn ranks(d1: usize, d2: usize) -> Self {
        Self {
            sig1: Signature::rdpg(d1),
            sig2: Signature::rdpg(d2),
        }
    }

    /// Chi-square degrees of freedom of the per-vertex statistic.
    pub const fn dof(&self) -> usize {
        self.sig2.dim()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShiftReport {
    /// Estimated shifts, one row per vertex.
    pub yhat: Matrix,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    /// Sorted estimated unshifted set.
    pub unshifted: Vec<usize>,
    pub alignment: AlignmentMap,
    pub dof: usize,
}

impl ShiftReport {
    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn shifted(&self) -> Vec<usize> {
        crate::graph::complement(self.n(), &self.unshifted)
    }

    pub fn is_unshifted(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for &k in &self.unshifted {
            mask[k] = true;
        }
        mask
    }
}

/// `Yhat = X2 - X1 W`.
pub fn estimate_shifts(e1: &Embedding, e2: &Embedding, map: &AlignmentMap) -> Result<Matrix> {
    shifts_from(&e1.xhat, &e2.xhat, &map.w)
}

fn shifts_from(x1: &Matrix, x2: &Matrix, w: &Matrix) -> Result<Matrix> {
    if x1.nrows() != x2.nrows() || x1.ncols() != w.nrows() || x2.ncols() != w.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "X1 {}x{}, X2 {}x{}, W {}x{}",
            x1.nrows(),
            x1.ncols(),
            x2.nrows(),
            x2.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    Ok(x2 - x1 * w)
}

fn clip01(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

fn signed_inner(x: &Matrix, sig: Signature, s: usize, t: usize) -> f64 {
    let mut p = 0.0;
    for c in 0..x.ncols() {
        let term = x[(s, c)] * x[(t, c)];
        p += if c < sig.d_plus { term } else { -term };
    }
    p
}

/// `Phat = Xhat I_{d+,d-} Xhat^T` clipped to `[0, 1]`.
pub fn estimate_probability(e: &Embedding) -> Matrix {
    let n = e.n();
    Matrix::from_fn(n, n, |s, t| {
        clip01(signed_inner(&e.xhat, e.signature, s, t))
    })
}

/// Row `k` of `Phat (1 - Phat)`, floored at `floor`.
pub fn xi_row(e: &Embedding, k: usize, floor: f64) -> Vec<f64> {
    (0..e.n())
        .map(|l| {
            let p = clip01(signed_inner(&e.xhat, e.signature, k, l));
            (p * (1.0 - p)).max(floor)
        })
        .collect()
}

/// `(X^T X)^{-1}`, rejecting near-singular Gram matrices.
pub fn gram_inverse(x: &Matrix) -> Result<Matrix> {
    let gram = x.transpose() * x;
    let (vals, vecs) = linalg::sym_eigen_desc(gram);
    let hi = vals.first().copied().unwrap_or(0.0);
    let lo = vals.last().copied().unwrap_or(0.0);
    if !(hi > 0.0) || lo < GRAM_CUTOFF * hi {
        return Err(Error::SingularEmbedding(format!(
            "Gram eigenvalues span [{lo:e}, {hi:e}]"
        )));
    }
    let inv_diag = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| 1.0 / v),
    ));
    Ok(&vecs * inv_diag * vecs.transpose())
}

/// `X^T diag(xi) X`.
fn weighted_gram(x: &Matrix, xi: &[f64]) -> Matrix {
    let d = x.ncols();
    let n = x.nrows();
    let mut m = Matrix::zeros(d, d);
    for a in 0..d {
        let ca = x.column(a);
        for b in a..d {
            let cb = x.column(b);
            let mut acc = 0.0;
            for l in 0..n {
                acc += ca[l] * xi[l] * cb[l];
            }
            m[(a, b)] = acc;
            m[(b, a)] = acc;
        }
    }
    m
}

/// `I (X^T X)^{-1} X^T Xi X (X^T X)^{-1} I` for one vertex, given the
/// Gram inverse and the variance row.
pub fn covariance_block(x: &Matrix, gram_inv: &Matrix, sig: Signature, xi: &[f64]) -> Matrix {
    let inner = gram_inv * weighted_gram(x, xi) * gram_inv;
    sandwich(inner, sig)
}

fn sandwich(mut m: Matrix, sig: Signature) -> Matrix {
    if sig.d_minus == 0 {
        return m;
    }
    let s = sig.diag();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            m[(i, j)] *= s[i] * s[j];
        }
    }
    m
}

fn combine(g1: &Matrix, g2: &Matrix, w: &Matrix) -> Matrix {
    let g = g2 + w.transpose() * g1 * w;
    (&g + g.transpose()) * 0.5
}

/// Plug-in covariance of `yhat_k`.
pub fn gamma_hat(e1: &Embedding, e2: &Embedding, map: &AlignmentMap, k: usize) -> Result<Matrix> {
    let g1 = covariance_block(
        &e1.xhat,
        &gram_inverse(&e1.xhat)?,
        e1.signature,
        &xi_row(e1, k, XI_FLOOR),
    );
    let g2 = covariance_block(
        &e2.xhat,
        &gram_inverse(&e2.xhat)?,
        e2.signature,
        &xi_row(e2, k, XI_FLOOR),
    );
    Ok(combine(&g1, &g2, &map.w))
}

/// Limiting covariance of `yhat_k` evaluated at the true latent positions.
pub fn gamma_true(scenario: &ShiftScenario, k: usize) -> Result<Matrix> {
    let block = |m: &crate::graph::LatentModel| -> Result<Matrix> {
        let xi: Vec<f64> = (0..m.n())
            .map(|l| {
                let p = m.probability(k, l);
                p * (1.0 - p)
            })
            .collect();
        Ok(covariance_block(
            &m.x,
            &gram_inverse(&m.x)?,
            m.signature,
            &xi,
        ))
    };
    Ok(combine(
        &block(&scenario.model1)?,
        &block(&scenario.model2)?,
        &scenario.w_true,
    ))
}

/// `y^T G^{-1} y`, or NaN when `G` is not safely invertible.
pub fn quadratic_form(y: &[f64], gamma: &Matrix) -> f64 {
    if !linalg::well_conditioned_spd(gamma, MAX_CONDITION) {
        return f64::NAN;
    }
    match gamma.clone().cholesky() {
        Some(ch) => {
            let mut v = nalgebra::DVector::from_column_slice(y);
            ch.l_dirty().solve_lower_triangular_mut(&mut v);
            v.norm_squared()
        }
        None => f64::NAN,
    }
}

/// Statistics `T_k` and chi-square p-values; vertices whose covariance
/// cannot be inverted get NaN in both.
pub fn test_statistics(yhat: &Matrix, gammas: &[Matrix], dof: usize) -> (Vec<f64>, Vec<f64>) {
    let mut t = Vec::with_capacity(yhat.nrows());
    let mut p = Vec::with_capacity(yhat.nrows());
    let mut failed = 0usize;
    for (k, g) in gammas.iter().enumerate() {
        let y: Vec<f64> = yhat.row(k).iter().copied().collect();
        let tk = quadratic_form(&y, g);
        if tk.is_nan() {
            failed += 1;
            p.push(f64::NAN);
        } else {
            p.push(chi2_sf(tk, dof));
        }
        t.push(tk);
    }
    if failed > 0 {
        log::warn!("{failed} vertices have non-invertible covariance and are treated as shifted");
    }
    (t, p)
}

/// Benjamini-Hochberg step-up selection. Returns the sorted set of
/// vertices that are not rejected. Ties in `p` are ordered by vertex index;
/// NaN p-values are always rejected and do not count toward the number of
/// tests.
pub fn benjamini_hochberg(p: &[f64], alpha: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..p.len()).filter(|&k| !p[k].is_nan()).collect();
    let m = order.len();
    order.sort_by(|&a, &b| {
        p[a].partial_cmp(&p[b])
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mut j_star = 0;
    for (j, &k) in order.iter().enumerate() {
        if p[k] <= (j + 1) as f64 * alpha / m as f64 {
            j_star = j + 1;
        }
    }
    let mut keep: Vec<usize> = order[j_star..].to_vec();
    keep.sort_unstable();
    keep
}

/// Two embeddings with the seed-independent per-vertex covariance blocks
/// cached, so that many seed sets can be scored cheaply.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub e1: Embedding,
    pub e2: Embedding,
    blocks1: Vec<Matrix>,
    blocks2: Vec<Matrix>,
}

impl Comparison {
    pub fn new(e1: Embedding, e2: Embedding) -> Result<Self> {
        if e1.n() != e2.n() {
            return Err(Error::DimensionMismatch(format!(
                "embeddings have {} and {} vertices",
                e1.n(),
                e2.n()
            )));
        }
        let blocks1 = vertex_blocks(&e1)?;
        let blocks2 = vertex_blocks(&e2)?;
        Ok(Self {
            e1,
            e2,
            blocks1,
            blocks2,
        })
    }

    pub fn n(&self) -> usize {
        self.e1.n()
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            sig1: self.e1.signature,
            sig2: self.e2.signature,
        }
    }

    pub fn align(&self, seeds: &[usize]) -> Result<AlignmentMap> {
        align_on_seeds(
            &self.e1.xhat,
            &self.e2.xhat,
            self.e1.signature,
            self.e2.signature,
            seeds,
        )
    }

    /// Covariance of `yhat_k` under alignment `w`.
    pub fn gamma(&self, k: usize, w: &Matrix) -> Matrix {
        combine(&self.blocks1[k], &self.blocks2[k], w)
    }

    /// Steps 2-5 of the seeded procedure with the given seed set.
    pub fn run(&self, seeds: &[usize], alpha: f64) -> Result<ShiftReport> {
        check_alpha(alpha)?;
        let alignment = self.align(seeds)?;
        self.report_for(alignment, alpha)
    }

    pub fn report_for(&self, alignment: AlignmentMap, alpha: f64) -> Result<ShiftReport> {
        let yhat = shifts_from(&self.e1.xhat, &self.e2.xhat, &alignment.w)?;
        let gammas: Vec<Matrix> = (0..self.n()).map(|k| self.gamma(k, &alignment.w)).collect();
        let dof = self.e2.dim();
        let (t, p) = test_statistics(&yhat, &gammas, dof);
        let unshifted = benjamini_hochberg(&p, alpha);
        Ok(ShiftReport {
            yhat,
            t,
            p,
            unshifted,
            alignment,
            dof,
        })
    }
}

fn vertex_blocks(e: &Embedding) -> Result<Vec<Matrix>> {
    let gi = gram_inverse(&e.xhat)?;
    let build = |k: usize| covariance_block(&e.xhat, &gi, e.signature, &xi_row(e, k, XI_FLOOR));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        Ok((0..e.n()).into_par_iter().map(build).collect())
    }
    #[cfg(not(feature = "parallel"))]
    {
        Ok((0..e.n()).map(build).collect())
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "level {alpha} must lie in (0, 1)"
        )));
    }
    Ok(())
}

/// Embeds both graphs, aligns on `seeds`, tests every vertex and returns
/// the Benjamini-Hochberg unshifted set at level `alpha`.
pub fn run_seeded(
    g1: &Graph,
    g2: &Graph,
    dims: ModelDims,
    seeds: &[usize],
    alpha: f64,
) -> Result<ShiftReport> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch(format!(
            "graphs have {} and {} vertices",
            g1.n(),
            g2.n()
        )));
    }
    check_alpha(alpha)?;
    if seeds.len() < dims.sig1.dim().max(dims.sig2.dim()) {
        return Err(Error::DegenerateSeeds(format!(
            "{} seeds for dimensions {} and {}",
            seeds.len(),
            dims.sig1.dim(),
            dims.sig2.dim()
        )));
    }
    let cmp = Comparison::new(embed(g1, dims.sig1)?, embed(g2, dims.sig2)?)?;
    cmp.run(seeds, alpha)
}
