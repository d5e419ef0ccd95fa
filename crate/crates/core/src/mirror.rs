//! Mirrors of dynamic networks: pairwise shift-based distances between
//! snapshots, classical multidimensional scaling and the 1-D iso-mirror.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::embed::{embed, Embedding};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg;
use crate::rng;
use crate::seedfree::{run_seedfree_on, SeedFreeConfig};
use crate::shift::{Comparison, ShiftReport};
use crate::Matrix;

const SYMMETRY_TOL: f64 = 1e-12;

/// Seed-free comparisons of every unordered pair of snapshots.
#[derive(Debug, Clone)]
pub struct PairwiseComparisons {
    /// Number of snapshots.
    pub t: usize,
    pub n: usize,
    /// Reports for pairs `(i, j)` with `i < j`, in row-major order.
    pub reports: Vec<((usize, usize), ShiftReport)>,
}

impl PairwiseComparisons {
    /// Runs the seed-free procedure on every pair. The candidate stream of
    /// pair `(i, j)` is derived from `config.rng_seed` and the pair indices.
    pub fn run(graphs: &[Graph], config: &SeedFreeConfig) -> Result<Self> {
        let t = graphs.len();
        let n = graphs.first().map_or(0, Graph::n);
        if let Some(bad) = graphs.iter().position(|g| g.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "snapshot {bad} has {} vertices, expected {n}",
                graphs[bad].n()
            )));
        }
        if config.dims.sig1 != config.dims.sig2 {
            return Err(Error::InvalidParameter(
                "mirrors need one shared signature for all snapshots".into(),
            ));
        }
        let embeddings: Vec<Embedding> = graphs
            .iter()
            .map(|g| embed(g, config.dims.sig1))
            .collect::<Result<_>>()?;
        let pairs: Vec<(usize, usize)> = (0..t)
            .flat_map(|i| ((i + 1)..t).map(move |j| (i, j)))
            .collect();
        let compare = |&(i, j): &(usize, usize)| -> Result<((usize, usize), ShiftReport)> {
            let mut cfg = config.clone();
            cfg.rng_seed = rng::pair_seed(config.rng_seed, i, j);
            Comparison::new(embeddings[i].clone(), embeddings[j].clone())
                .and_then(|cmp| run_seedfree_on(&cmp, &cfg))
                .map(|(report, _)| ((i, j), report))
                .map_err(|e| Error::PairFailed {
                    i,
                    j,
                    source: Box::new(e),
                })
        };
        #[cfg(feature = "parallel")]
        let reports: Vec<_> = {
            use rayon::prelude::*;
            pairs.par_iter().map(compare).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let reports: Vec<_> = pairs.iter().map(compare).collect::<Result<_>>()?;
        Ok(Self { t, n, reports })
    }

    /// `D_ij` = fraction of vertices estimated as shifted between `i` and `j`.
    pub fn network_distances(&self) -> Matrix {
        self.fill(|r| r.shifted().len() as f64 / self.n as f64)
    }

    /// `D_ij` = norm of vertex `k`'s estimated shift if it is flagged as
    /// shifted between `i` and `j`, else 0.
    pub fn vertex_distances(&self, k: usize) -> Result<Matrix> {
        if k >= self.n {
            return Err(Error::InvalidParameter(format!(
                "vertex {k} out of range for {} vertices",
                self.n
            )));
        }
        Ok(self.fill(|r| {
            if r.unshifted.binary_search(&k).is_ok() {
                0.0
            } else {
                r.yhat.row(k).norm()
            }
        }))
    }

    fn fill(&self, f: impl Fn(&ShiftReport) -> f64) -> Matrix {
        let mut d = Matrix::zeros(self.t, self.t);
        for ((i, j), r) in &self.reports {
            let v = f(r);
            d[(*i, *j)] = v;
            d[(*j, *i)] = v;
        }
        d
    }
}

pub fn network_distance_matrix(graphs: &[Graph], config: &SeedFreeConfig) -> Result<Matrix> {
    Ok(PairwiseComparisons::run(graphs, config)?.network_distances())
}

pub fn vertex_distance_matrix(
    graphs: &[Graph],
    k: usize,
    config: &SeedFreeConfig,
) -> Result<Matrix> {
    PairwiseComparisons::run(graphs, config)?.vertex_distances(k)
}

/// Classical multidimensional scaling into `r` dimensions. Negative
/// eigenvalues of the doubly centered matrix are truncated to zero.
pub fn cmds(d: &Matrix, r: usize) -> Result<Matrix> {
    let t = d.nrows();
    if d.ncols() != t {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix is {}x{}",
            t,
            d.ncols()
        )));
    }
    if r > t {
        return Err(Error::InvalidParameter(format!(
            "cannot scale {t} points into {r} dimensions"
        )));
    }
    for i in 0..t {
        if d[(i, i)].abs() > SYMMETRY_TOL {
            return Err(Error::InvalidParameter(format!("nonzero diagonal at {i}")));
        }
        for j in 0..t {
            if d[(i, j)] < 0.0
                || (d[(i, j)] - d[(j, i)]).abs() > SYMMETRY_TOL * d[(i, j)].abs().max(1.0)
            {
                return Err(Error::InvalidParameter(format!(
                    "distance matrix must be symmetric and nonnegative (entry {i}, {j})"
                )));
            }
        }
    }
    if t == 0 {
        return Ok(Matrix::zeros(0, r));
    }
    let sq = d.map(|v| v * v);
    let row_means: Vec<f64> = (0..t).map(|i| sq.row(i).sum() / t as f64).collect();
    let grand = row_means.iter().sum::<f64>() / t as f64;
    let b = Matrix::from_fn(t, t, |i, j| {
        -0.5 * (sq[(i, j)] - row_means[i] - row_means[j] + grand)
    });
    let (vals, mut vecs) = linalg::sym_eigen_desc(b);
    let mut lead = vecs.columns(0, r).into_owned();
    linalg::normalize_signs(&mut lead);
    vecs = lead;
    for c in 0..r {
        let s = libm::sqrt(vals[c].max(0.0));
        vecs.column_mut(c).scale_mut(s);
    }
    Ok(vecs)
}

/// Cumulative arc length along the time-ordered chain of points.
pub fn iso_mirror(points: &Matrix) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.nrows());
    let mut acc = 0.0;
    for s in 0..points.nrows() {
        if s > 0 {
            acc += (points.row(s) - points.row(s - 1)).norm();
        }
        out.push(acc);
    }
    out
}

/// Distances, CMDS coordinates and iso-mirror of a sequence of snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct MirrorCurve {
    pub d: Matrix,
    pub points: Matrix,
    pub iso: Vec<f64>,
    pub labels: Vec<String>,
}

impl MirrorCurve {
    pub fn from_distances(d: Matrix, r: usize, labels: Vec<String>) -> Result<Self> {
        if labels.len() != d.nrows() {
            return Err(Error::DimensionMismatch(format!(
                "{} labels for {} snapshots",
                labels.len(),
                d.nrows()
            )));
        }
        let points = cmds(&d, r)?;
        let iso = iso_mirror(&points);
        Ok(Self {
            d,
            points,
            iso,
            labels,
        })
    }
}
