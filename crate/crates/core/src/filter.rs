//! Pairwise probability-difference statistics and the seed-candidate
//! feasibility filter.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::graph::{LatentModel, ShiftScenario};
use crate::rng;
use crate::shift::gram_inverse;
use crate::special::normal_upper_quantile;
use crate::Matrix;

/// Floor applied to the pair variances before standardizing.
pub const UPSILON_FLOOR: f64 = 1e-12;

/// Orthonormal basis `Q = X (X^T X)^{-1/2}` of the column space of `X`, so
/// that `Q Q^T = X (X^T X)^{-1} X^T`.
pub fn orthonormal_basis(x: &Matrix) -> Result<Matrix> {
    let gi = gram_inverse(x)?;
    let (vals, vecs) = crate::linalg::sym_eigen_desc(gi);
    let root = Matrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|v| libm::sqrt(v.max(0.0))),
    ));
    Ok(x * (&vecs * root * vecs.transpose()))
}

/// Per-network ingredients of the pair variance.
#[derive(Debug, Clone)]
struct Side {
    /// Packed `vec(q q^T)` rows, off-diagonal entries scaled by `sqrt(2)` so
    /// that `v_j . v_l = (q_j . q_l)^2`.
    v: Matrix,
    /// Diagonal of the projection `Q Q^T`.
    pi_diag: Vec<f64>,
    /// Edge probabilities.
    p: Matrix,
}

impl Side {
    fn new(x: &Matrix, p: Matrix) -> Result<Self> {
        let q = orthonormal_basis(x)?;
        let (n, d) = q.shape();
        let packed = d * (d + 1) / 2;
        let mut v = Matrix::zeros(n, packed);
        let r2 = core::f64::consts::SQRT_2;
        for l in 0..n {
            let mut c = 0;
            for a in 0..d {
                for b in a..d {
                    let w = if a == b { 1.0 } else { r2 };
                    v[(l, c)] = w * q[(l, a)] * q[(l, b)];
                    c += 1;
                }
            }
        }
        let pi_diag = (0..n).map(|l| q.row(l).norm_squared()).collect();
        Ok(Self { v, pi_diag, p })
    }

    fn xi(&self, k: usize, l: usize) -> f64 {
        let p = self.p[(k, l)];
        p * (1.0 - p)
    }

    fn xi_matrix(&self) -> Matrix {
        self.p.map(|p| p * (1.0 - p))
    }

    /// `sum_j xi(k, j) v_j`.
    fn h_row(&self, k: usize) -> Vec<f64> {
        let (n, c) = self.v.shape();
        let mut h = vec![0.0; c];
        for j in 0..n {
            let x = self.xi(k, j);
            for (a, hv) in h.iter_mut().enumerate() {
                *hv += x * self.v[(j, a)];
            }
        }
        h
    }

    fn dot_v(&self, l: usize, h: &[f64]) -> f64 {
        h.iter()
            .enumerate()
            .map(|(a, hv)| hv * self.v[(l, a)])
            .sum()
    }
}

/// Factorized form of the pair variances for two networks.
#[derive(Debug, Clone)]
pub struct UpsilonFactors {
    s1: Side,
    s2: Side,
}

impl UpsilonFactors {
    /// Estimated factors from two embeddings (clipped plug-in probabilities).
    pub fn from_embeddings(e1: &Embedding, e2: &Embedding) -> Result<Self> {
        check_same_n(e1.n(), e2.n())?;
        Ok(Self {
            s1: Side::new(&e1.xhat, crate::shift::estimate_probability(e1))?,
            s2: Side::new(&e2.xhat, crate::shift::estimate_probability(e2))?,
        })
    }

    /// Factors evaluated at the true latent positions.
    pub fn from_models(m1: &LatentModel, m2: &LatentModel) -> Result<Self> {
        check_same_n(m1.n(), m2.n())?;
        Ok(Self {
            s1: Side::new(&m1.x, m1.probabilities())?,
            s2: Side::new(&m2.x, m2.probabilities())?,
        })
    }

    pub fn n(&self) -> usize {
        self.s1.p.nrows()
    }

    /// `Psi^(k)_{l,l}` for all `k` (rows) and `l` (columns).
    pub fn psi_table(&self) -> Matrix {
        let h1 = self.s1.xi_matrix() * &self.s1.v;
        let h2 = self.s2.xi_matrix() * &self.s2.v;
        h1 * self.s1.v.transpose() + h2 * self.s2.v.transpose()
    }

    /// `Psi^(k)_{l,l}` for one pair.
    pub fn psi(&self, k: usize, l: usize) -> f64 {
        self.s1.dot_v(l, &self.s1.h_row(k)) + self.s2.dot_v(l, &self.s2.h_row(k))
    }

    fn cross(&self, k: usize, l: usize) -> f64 {
        2.0 * self.s1.pi_diag[k] * self.s1.pi_diag[l] * self.s1.xi(k, l)
            + 2.0 * self.s2.pi_diag[k] * self.s2.pi_diag[l] * self.s2.xi(k, l)
    }

    /// Unfloored pair variance for one pair.
    pub fn entry(&self, k: usize, l: usize) -> f64 {
        if k == l {
            4.0 * self.psi(k, k)
        } else {
            self.psi(k, l) + self.psi(l, k) + self.cross(k, l)
        }
    }

    /// Unfloored pair variance table.
    pub fn table(&self) -> Matrix {
        let psi = self.psi_table();
        let n = self.n();
        Matrix::from_fn(n, n, |k, l| {
            if k == l {
                4.0 * psi[(k, k)]
            } else {
                psi[(k, l)] + psi[(l, k)] + self.cross(k, l)
            }
        })
    }

    /// Difference of the two probability matrices.
    pub fn delta(&self) -> Matrix {
        &self.s1.p - &self.s2.p
    }

    pub fn delta_entry(&self, k: usize, l: usize) -> f64 {
        self.s1.p[(k, l)] - self.s2.p[(k, l)]
    }

    /// Standardized difference for one pair.
    pub fn ttilde_entry(&self, k: usize, l: usize) -> f64 {
        self.delta_entry(k, l) / libm::sqrt(self.entry(k, l).max(UPSILON_FLOOR))
    }
}

fn check_same_n(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch(format!(
            "networks have {a} and {b} vertices"
        )));
    }
    Ok(())
}

/// Estimated pair variances, before flooring.
pub fn upsilon_hat(e1: &Embedding, e2: &Embedding) -> Result<Matrix> {
    Ok(UpsilonFactors::from_embeddings(e1, e2)?.table())
}

/// Pair variances at the true latent positions.
pub fn upsilon_true(scenario: &ShiftScenario) -> Result<Matrix> {
    Ok(UpsilonFactors::from_models(&scenario.model1, &scenario.model2)?.table())
}

/// Pair statistics and the derived feasibility mask.
#[derive(Debug, Clone)]
pub struct FilterStats {
    pub delta: Matrix,
    /// Floored pair variances.
    pub upsilon: Matrix,
    pub ttilde: Matrix,
    pub threshold: f64,
    feasible: Vec<bool>,
}

/// Pair statistics without a threshold (the threshold is `+inf`).
pub fn ttilde(e1: &Embedding, e2: &Embedding) -> Result<FilterStats> {
    let f = UpsilonFactors::from_embeddings(e1, e2)?;
    let delta = f.delta();
    let upsilon = f.table().map(|v| v.max(UPSILON_FLOOR));
    let ttilde = delta.zip_map(&upsilon, |d, u| d / libm::sqrt(u));
    Ok(FilterStats::from_parts(
        delta,
        upsilon,
        ttilde,
        f64::INFINITY,
    ))
}

impl FilterStats {
    /// Pair statistics with the Bonferroni threshold for seed size
    /// `seed_size` at level `alpha_tilde`.
    pub fn new(e1: &Embedding, e2: &Embedding, seed_size: usize, alpha_tilde: f64) -> Result<Self> {
        let threshold = bonferroni_threshold(seed_size, alpha_tilde)?;
        Ok(ttilde(e1, e2)?.with_threshold(threshold))
    }

    pub fn from_parts(delta: Matrix, upsilon: Matrix, ttilde: Matrix, threshold: f64) -> Self {
        let feasible = ttilde.iter().map(|t| t.abs() <= threshold).collect();
        Self {
            delta,
            upsilon,
            ttilde,
            threshold,
            feasible,
        }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Self::from_parts(self.delta, self.upsilon, self.ttilde, threshold)
    }

    pub fn n(&self) -> usize {
        self.ttilde.nrows()
    }

    pub fn is_feasible(&self, k: usize, l: usize) -> bool {
        // column-major, symmetric
        self.feasible[l * self.n() + k]
    }
}

/// Upper `alpha_B / 2` standard normal quantile with
/// `alpha_B = alpha_tilde / (L (L + 1) / 2)`.
pub fn bonferroni_threshold(seed_size: usize, alpha_tilde: f64) -> Result<f64> {
    if seed_size == 0 {
        return Err(Error::InvalidParameter(
            "seed size must be at least 1".into(),
        ));
    }
    if !(alpha_tilde > 0.0 && alpha_tilde < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "filter level {alpha_tilde} must lie in (0, 1)"
        )));
    }
    let pairs = (seed_size * (seed_size + 1) / 2) as f64;
    Ok(normal_upper_quantile(alpha_tilde / pairs / 2.0))
}

/// Whether every entry of the `S x S` block (diagonal included) is within
/// the threshold.
pub fn candidate_passes(stats: &FilterStats, set: &[usize]) -> bool {
    set.iter()
        .all(|&k| set.iter().all(|&l| stats.is_feasible(k, l)))
}

/// Outcome of feasible-candidate sampling.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateDraw {
    /// Distinct candidate sets, each sorted.
    pub sets: Vec<Vec<usize>>,
    /// Attempts that hit a dead end or produced a duplicate.
    pub restarts: usize,
}

/// Grows up to `count` distinct feasible sets of size `seed_size` inside the
/// feasibility mask. Gives up after `max_restarts` failed attempts
/// (default `50 * count`).
pub fn sample_feasible_candidates(
    stats: &FilterStats,
    seed_size: usize,
    count: usize,
    rng_seed: u64,
    max_restarts: Option<usize>,
) -> Result<CandidateDraw> {
    if seed_size == 0 || count == 0 {
        return Err(Error::InvalidParameter(
            "seed size and candidate count must be positive".into(),
        ));
    }
    let n = stats.n();
    let budget = max_restarts.unwrap_or(50 * count);
    let starts: Vec<usize> = (0..n).filter(|&v| stats.is_feasible(v, v)).collect();
    if starts.is_empty() || seed_size > n {
        log::warn!("no feasible starting vertex; no candidates drawn");
        return Ok(CandidateDraw {
            sets: Vec::new(),
            restarts: 0,
        });
    }
    let mut rng = rng::stream(rng_seed, rng::CANDIDATES);
    let mut seen = BTreeSet::new();
    let mut sets = Vec::new();
    let mut restarts = 0;
    while sets.len() < count && restarts < budget {
        let first = starts[rng.random_range(0..starts.len())];
        let mut current = vec![first];
        let mut pool: Vec<usize> = starts
            .iter()
            .copied()
            .filter(|&v| v != first && stats.is_feasible(first, v))
            .collect();
        while current.len() < seed_size && !pool.is_empty() {
            let v = pool[rng.random_range(0..pool.len())];
            current.push(v);
            pool.retain(|&u| u != v && stats.is_feasible(u, v));
        }
        if current.len() < seed_size {
            restarts += 1;
            continue;
        }
        current.sort_unstable();
        if seen.insert(current.clone()) {
            sets.push(current);
        } else {
            restarts += 1;
        }
    }
    if sets.len() < count {
        log::warn!(
            "drew {} of {count} feasible candidates before exhausting {budget} restarts",
            sets.len()
        );
    }
    Ok(CandidateDraw { sets, restarts })
}
