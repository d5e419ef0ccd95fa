//! Graphs, latent position models, samplers and planted-shift scenarios.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::linalg::{self, SymmetricOperator};
use crate::rng::{self, StreamRng};
use crate::Matrix;

const PROB_TOL: f64 = 1e-9;

/// Symmetric, hollow, unweighted adjacency matrix stored densely as bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<u8>,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            adj: vec![0; n * n],
        }
    }

    /// Builds a graph from undirected edges. Duplicate edges are ignored;
    /// self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut g = Self::empty(n);
        for (s, t) in edges {
            if s >= n || t >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({s}, {t}) out of range for {n} vertices"
                )));
            }
            if s == t {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {s}")));
            }
            g.adj[s * n + t] = 1;
            g.adj[t * n + s] = 1;
        }
        Ok(g)
    }

    /// Validates a dense 0/1 symmetric matrix with zero diagonal.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::InvalidGraph(format!(
                "adjacency is {}x{}",
                n,
                m.ncols()
            )));
        }
        let mut g = Self::empty(n);
        for s in 0..n {
            for t in 0..n {
                let v = m[(s, t)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({s}, {t}) = {v} is not 0/1"
                    )));
                }
                if v != m[(t, s)] {
                    return Err(Error::InvalidGraph(format!("asymmetric at ({s}, {t})")));
                }
                if s == t && v != 0.0 {
                    return Err(Error::InvalidGraph(format!("self-loop at vertex {s}")));
                }
                g.adj[s * n + t] = v as u8;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, s: usize, t: usize) -> bool {
        self.adj[s * self.n + t] != 0
    }

    pub fn row(&self, s: usize) -> &[u8] {
        &self.adj[s * self.n..(s + 1) * self.n]
    }

    pub fn degree(&self, s: usize) -> usize {
        self.row(s).iter().filter(|&&a| a != 0).count()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().filter(|&&a| a != 0).count() / 2
    }

    /// Edges `(s, t)` with `s < t`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for s in 0..self.n {
            for t in (s + 1)..self.n {
                if self.has_edge(s, t) {
                    out.push((s, t));
                }
            }
        }
        out
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |s, t| f64::from(self.adj[s * self.n + t]))
    }
}

impl SymmetricOperator for Graph {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (s, ys) in y.iter_mut().enumerate() {
            let row = self.row(s);
            let mut acc = [0.0f64; 4];
            let rc = row.chunks_exact(4);
            let xc = x.chunks_exact(4);
            let tail: f64 = rc
                .remainder()
                .iter()
                .zip(xc.remainder())
                .map(|(&a, &v)| f64::from(a) * v)
                .sum();
            for (a, v) in rc.zip(xc) {
                acc[0] += f64::from(a[0]) * v[0];
                acc[1] += f64::from(a[1]) * v[1];
                acc[2] += f64::from(a[2]) * v[2];
                acc[3] += f64::from(a[3]) * v[3];
            }
            *ys = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
        }
    }
}

/// Counts of positive and negative directions of the latent inner product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Signature {
    pub d_plus: usize,
    pub d_minus: usize,
}

impl Signature {
    pub const fn new(d_plus: usize, d_minus: usize) -> Self {
        Self { d_plus, d_minus }
    }

    /// Positive definite signature of a plain RDPG.
    pub const fn rdpg(d: usize) -> Self {
        Self::new(d, 0)
    }

    pub const fn dim(&self) -> usize {
        self.d_plus + self.d_minus
    }

    pub const fn is_definite(&self) -> bool {
        self.d_minus == 0
    }

    /// Diagonal entries of I_{d+,d-}.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.dim())
            .map(|i| if i < self.d_plus { 1.0 } else { -1.0 })
            .collect()
    }
}

/// Latent positions with the inner-product signature that maps them to edge
/// probabilities `P = X I_{d+,d-} X^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentModel {
    pub x: Matrix,
    pub signature: Signature,
}

impl LatentModel {
    pub fn new(x: Matrix, signature: Signature) -> Result<Self> {
        if x.ncols() != signature.dim() {
            return Err(Error::DimensionMismatch(format!(
                "latent matrix has {} columns but signature has dimension {}",
                x.ncols(),
                signature.dim()
            )));
        }
        let model = Self { x, signature };
        model.check_probabilities()?;
        Ok(model)
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// `x_s^T I_{d+,d-} x_t`.
    pub fn probability(&self, s: usize, t: usize) -> f64 {
        let d = self.dim();
        let mut p = 0.0;
        for c in 0..d {
            let term = self.x[(s, c)] * self.x[(t, c)];
            p += if c < self.signature.d_plus {
                term
            } else {
                -term
            };
        }
        p
    }

    pub fn probabilities(&self) -> Matrix {
        let s = Matrix::from_diagonal(&nalgebra::DVector::from_vec(self.signature.diag()));
        &self.x * s * self.x.transpose()
    }

    fn check_probabilities(&self) -> Result<()> {
        let n = self.n();
        for s in 0..n {
            for t in s..n {
                let p = self.probability(s, t);
                if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) || p.is_nan() {
                    return Err(Error::ProbabilityOutOfRange {
                        row: s,
                        col: t,
                        value: p,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Samples a graph with independent Bernoulli(P[s][t]) edges for `s < t`.
pub fn sample_graph(model: &LatentModel, rng_seed: u64) -> Result<Graph> {
    let n = model.n();
    let mut rng = StreamRng::seed_from_u64(rng_seed);
    let mut g = Graph::empty(n);
    for s in 0..n {
        for t in (s + 1)..n {
            let p = model.probability(s, t);
            if !(-PROB_TOL..=1.0 + PROB_TOL).contains(&p) || p.is_nan() {
                return Err(Error::ProbabilityOutOfRange {
                    row: s,
                    col: t,
                    value: p,
                });
            }
            if rng.random::<f64>() < p {
                g.adj[s * n + t] = 1;
                g.adj[t * n + s] = 1;
            }
        }
    }
    Ok(g)
}

/// Latent positions with entries `sqrt(U) / sqrt(d)`, `U ~ Uniform(0, 1]`.
pub fn make_rdpg_latents(n: usize, d: usize, rng_seed: u64) -> Result<LatentModel> {
    if d == 0 || n < d {
        return Err(Error::InvalidParameter(format!(
            "need n >= d >= 1, got n = {n}, d = {d}"
        )));
    }
    let mut rng = rng::stream(rng_seed, rng::LATENTS);
    let x = rdpg_rows(&mut rng, n, d);
    Ok(LatentModel {
        x,
        signature: Signature::rdpg(d),
    })
}

fn rdpg_rows(rng: &mut StreamRng, n: usize, d: usize) -> Matrix {
    let scale = 1.0 / libm::sqrt(d as f64);
    // row-major draw order so that a prefix of rows does not depend on n
    let mut x = Matrix::zeros(n, d);
    for r in 0..n {
        for c in 0..d {
            let u = 1.0 - rng.random::<f64>();
            x[(r, c)] = libm::sqrt(u) * scale;
        }
    }
    x
}

/// Two latent models on the same vertices with planted shifts and the
/// ground truth needed to score estimates.
#[derive(Debug, Clone)]
pub struct ShiftScenario {
    pub model1: LatentModel,
    pub model2: LatentModel,
    /// Sorted indices of unshifted vertices.
    pub unshifted: Vec<usize>,
    /// `X2 = X1 w_true + y_true` with `y_true` zero on `unshifted`.
    pub w_true: Matrix,
    pub y_true: Matrix,
    /// Block memberships in each network, for block-model scenarios.
    pub blocks: Option<(Vec<usize>, Vec<usize>)>,
}

impl ShiftScenario {
    pub fn n(&self) -> usize {
        self.model1.n()
    }

    pub fn shifted(&self) -> Vec<usize> {
        complement(self.n(), &self.unshifted)
    }

    pub fn is_unshifted(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n()];
        for &k in &self.unshifted {
            mask[k] = true;
        }
        mask
    }
}

/// Sorted complement of `set` in `0..n`.
pub fn complement(n: usize, set: &[usize]) -> Vec<usize> {
    let mut mask = vec![false; n];
    for &k in set {
        mask[k] = true;
    }
    (0..n).filter(|&k| !mask[k]).collect()
}

fn shifted_count(n: usize, shift_fraction: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&shift_fraction) {
        return Err(Error::InvalidParameter(format!(
            "shift fraction {shift_fraction} outside [0, 1]"
        )));
    }
    let m = libm::ceil(shift_fraction * n as f64 - 1e-9).max(0.0) as usize;
    Ok(m.min(n))
}

/// Planted-shift RDPG pair: all latent rows drawn as in [`make_rdpg_latents`];
/// the last `ceil(shift_fraction * n)` vertices get independently redrawn rows
/// in the second network.
pub fn make_rdpg_scenario(
    n: usize,
    d: usize,
    shift_fraction: f64,
    rng_seed: u64,
) -> Result<ShiftScenario> {
    let m = shifted_count(n, shift_fraction)?;
    let model1 = make_rdpg_latents(n, d, rng_seed)?;
    let mut rng = rng::stream(rng_seed, rng::LATENTS ^ 0x2);
    let fresh = rdpg_rows(&mut rng, m, d);
    let mut x2 = model1.x.clone();
    for i in 0..m {
        for c in 0..d {
            x2[(n - m + i, c)] = fresh[(i, c)];
        }
    }
    let y_true = &x2 - &model1.x;
    let model2 = LatentModel::new(x2, Signature::rdpg(d))?;
    Ok(ShiftScenario {
        model1,
        model2,
        unshifted: (0..n - m).collect(),
        w_true: Matrix::identity(d, d),
        y_true,
        blocks: None,
    })
}

/// Block probability matrix of the reference three-block assortative model.
pub fn sbm_reference_blocks() -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.7, 0.1, 0.1, 0.1, 0.65, 0.1, 0.1, 0.1, 0.6])
}

/// Three-block matrix with one negative eigenvalue (signature (2, 1)).
pub fn grdpg_reference_blocks() -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.7, 0.1, 0.1, 0.1, 0.3, 0.8, 0.1, 0.8, 0.5])
}

/// Block latent factors: rows `L` with `L I_{d+,d-} L^T = B`.
///
/// Columns are ordered positive eigenvalues (descending) then negative
/// eigenvalues (most negative first).
pub fn block_factors(b: &Matrix) -> Result<(Matrix, Signature)> {
    let k = b.nrows();
    if k == 0 || b.ncols() != k {
        return Err(Error::InvalidParameter(format!(
            "block matrix must be square and nonempty, got {}x{}",
            b.nrows(),
            b.ncols()
        )));
    }
    for i in 0..k {
        for j in 0..k {
            let v = b[(i, j)];
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            if (v - b[(j, i)]).abs() > 1e-12 {
                return Err(Error::InvalidParameter(format!(
                    "block matrix asymmetric at ({i}, {j})"
                )));
            }
        }
    }
    let (vals, mut vecs) = linalg::sym_eigen_desc(b.clone());
    linalg::normalize_signs(&mut vecs);
    if let Some(small) = vals.iter().find(|v| v.abs() < 1e-9) {
        return Err(Error::RankDeficientBlocks(small.abs()));
    }
    let pos: Vec<usize> = (0..k).filter(|&i| vals[i] > 0.0).collect();
    let neg: Vec<usize> = (0..k).rev().filter(|&i| vals[i] < 0.0).collect();
    let order: Vec<usize> = pos.iter().chain(neg.iter()).copied().collect();
    let l = Matrix::from_fn(k, k, |r, c| {
        vecs[(r, order[c])] * libm::sqrt(vals[order[c]].abs())
    });
    Ok((l, Signature::new(pos.len(), neg.len())))
}

fn rows_from_blocks(l: &Matrix, z: &[usize]) -> Matrix {
    Matrix::from_fn(z.len(), l.ncols(), |s, c| l[(z[s], c)])
}

fn reassign(rng: &mut StreamRng, from: usize, blocks: usize) -> usize {
    let pick = rng.random_range(0..blocks - 1);
    if pick >= from {
        pick + 1
    } else {
        pick
    }
}

/// Planted-shift block model pair. Network-1 memberships are uniform over
/// the blocks; the last `ceil(shift_fraction * n)` vertices move to one of
/// the other blocks, uniformly, in network 2.
pub fn make_sbm_scenario(
    n: usize,
    b: &Matrix,
    shift_fraction: f64,
    rng_seed: u64,
) -> Result<ShiftScenario> {
    let (l, signature) = block_factors(b)?;
    let k = b.nrows();
    let m = shifted_count(n, shift_fraction)?;
    if m > 0 && k < 2 {
        return Err(Error::InvalidParameter(
            "shifts need at least two blocks".into(),
        ));
    }
    let mut rng = rng::stream(rng_seed, rng::ASSIGNMENTS);
    let z1: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let z2: Vec<usize> = z1
        .iter()
        .enumerate()
        .map(|(s, &z)| {
            if s >= n - m {
                reassign(&mut rng, z, k)
            } else {
                z
            }
        })
        .collect();
    let x1 = rows_from_blocks(&l, &z1);
    let x2 = rows_from_blocks(&l, &z2);
    let y_true = &x2 - &x1;
    let d = signature.dim();
    Ok(ShiftScenario {
        model1: LatentModel::new(x1, signature)?,
        model2: LatentModel::new(x2, signature)?,
        unshifted: (0..n - m).collect(),
        w_true: Matrix::identity(d, d),
        y_true,
        blocks: Some((z1, z2)),
    })
}

fn used_blocks(z: &[usize], k: usize) -> Vec<usize> {
    let mut seen = vec![false; k];
    for &b in z {
        seen[b] = true;
    }
    (0..k).filter(|&b| seen[b]).collect()
}

fn restricted_factors(b: &Matrix, used: &[usize]) -> Result<(Matrix, Signature, Vec<usize>)> {
    let sub = Matrix::from_fn(used.len(), used.len(), |i, j| b[(used[i], used[j])]);
    let (l, sig) = block_factors(&sub)?;
    let mut index = vec![usize::MAX; b.nrows()];
    for (pos, &blk) in used.iter().enumerate() {
        index[blk] = pos;
    }
    Ok((l, sig, index))
}

/// Block model pair whose ranks differ: network 1 only uses the first
/// `k - 1` blocks, and the last `ceil(shift_fraction * n)` vertices move to
/// one of the other `k - 1` blocks of all `k` in network 2. Each network's
/// latent dimension is the number of blocks it actually uses.
pub fn make_rank_mismatch_scenario(
    n: usize,
    b: &Matrix,
    shift_fraction: f64,
    rng_seed: u64,
) -> Result<ShiftScenario> {
    block_factors(b)?;
    let k = b.nrows();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "rank mismatch needs at least two blocks".into(),
        ));
    }
    let m = shifted_count(n, shift_fraction)?;
    let mut rng = rng::stream(rng_seed, rng::ASSIGNMENTS);
    let z1: Vec<usize> = (0..n).map(|_| rng.random_range(0..k - 1)).collect();
    let z2: Vec<usize> = z1
        .iter()
        .enumerate()
        .map(|(s, &z)| {
            if s >= n - m {
                reassign(&mut rng, z, k)
            } else {
                z
            }
        })
        .collect();
    let (l1, sig1, idx1) = restricted_factors(b, &used_blocks(&z1, k))?;
    let (l2, sig2, idx2) = restricted_factors(b, &used_blocks(&z2, k))?;
    let x1 = Matrix::from_fn(n, l1.ncols(), |s, c| l1[(idx1[z1[s]], c)]);
    let x2 = Matrix::from_fn(n, l2.ncols(), |s, c| l2[(idx2[z2[s]], c)]);
    let unshifted: Vec<usize> = (0..n - m).collect();
    let x1u = linalg::select_rows(&x1, &unshifted);
    let x2u = linalg::select_rows(&x2, &unshifted);
    let (p, _) = linalg::pinv(&x1u, 1e-12);
    let w_true = p * x2u;
    let y_true = &x2 - &x1 * &w_true;
    Ok(ShiftScenario {
        model1: LatentModel::new(x1, sig1)?,
        model2: LatentModel::new(x2, sig2)?,
        unshifted,
        w_true,
        y_true,
        blocks: Some((z1, z2)),
    })
}
