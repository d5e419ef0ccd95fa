//! Seed-set alignment of two embeddings.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Signature;
use crate::linalg::{self, pinv, select_rows};
use crate::Matrix;

/// Relative singular-value cutoff for pseudoinverses.
pub const PINV_CUTOFF: f64 = 1e-12;
const PROCRUSTES_DEGENERACY: f64 = 1e-10;
const CONDITION_WARNING: f64 = 1e8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlignmentKind {
    /// Orthogonal Procrustes solution, reflections allowed.
    Orthogonal,
    /// Average of the two least-squares relaxations of the indefinite
    /// orthogonal Procrustes problem.
    IndefiniteAvg,
    /// Least-squares map between embeddings of different dimension.
    Rectangular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlignmentMap {
    /// `d1 x d2` map with `X2 ~ X1 w` on the seeds.
    pub w: Matrix,
    pub kind: AlignmentKind,
    pub seeds: Vec<usize>,
    /// Condition number of the network-1 seed block.
    pub condition: f64,
}

fn condition_number(m: &Matrix) -> f64 {
    let s = linalg::singular_values(m);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    }
}

fn check_shapes(x1: &Matrix, x2: &Matrix, need: usize) -> Result<()> {
    if x1.nrows() != x2.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "seed blocks have {} and {} rows",
            x1.nrows(),
            x2.nrows()
        )));
    }
    if x1.nrows() < need {
        return Err(Error::DegenerateSeeds(format!(
            "{} seeds cannot determine a map of dimension {need}",
            x1.nrows()
        )));
    }
    Ok(())
}

fn full_column_rank(m: &Matrix, what: &str) -> Result<()> {
    let (_, rank) = pinv(m, PINV_CUTOFF);
    if rank < m.ncols() {
        return Err(Error::DegenerateSeeds(format!(
            "{what} seed block has rank {rank} < {}",
            m.ncols()
        )));
    }
    Ok(())
}

/// Orthogonal `W` minimizing `||x1_s W - x2_s||_F`.
pub fn procrustes(x1_s: &Matrix, x2_s: &Matrix) -> Result<AlignmentMap> {
    if x1_s.ncols() != x2_s.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "Procrustes needs equal dimensions, got {} and {}",
            x1_s.ncols(),
            x2_s.ncols()
        )));
    }
    check_shapes(x1_s, x2_s, x1_s.ncols())?;
    let cross = x1_s.transpose() * x2_s;
    let s = linalg::singular_values(&cross);
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    if !(hi > 0.0) || lo < PROCRUSTES_DEGENERACY * hi {
        return Err(Error::DegenerateSeeds(format!(
            "cross-product singular values span [{lo:e}, {hi:e}]"
        )));
    }
    Ok(AlignmentMap {
        w: linalg::polar_orthogonal(&cross),
        kind: AlignmentKind::Orthogonal,
        seeds: Vec::new(),
        condition: condition_number(x1_s),
    })
}

/// Least-squares relaxations `W_L = x1_s^+ x2_s` and
/// `W_R = ((x2_s I)^+ x1_s I)^T`, averaged.
pub fn indefinite_align(
    x1_s: &Matrix,
    x2_s: &Matrix,
    signature: Signature,
) -> Result<AlignmentMap> {
    let d = signature.dim();
    if x1_s.ncols() != d || x2_s.ncols() != d {
        return Err(Error::DimensionMismatch(format!(
            "seed blocks have {} and {} columns, signature dimension is {d}",
            x1_s.ncols(),
            x2_s.ncols()
        )));
    }
    check_shapes(x1_s, x2_s, d)?;
    full_column_rank(x1_s, "network-1")?;
    full_column_rank(x2_s, "network-2")?;
    let (w_l, w_r) = indefinite_relaxations(x1_s, x2_s, signature);
    let w = (&w_l + &w_r) * 0.5;
    let disagreement = (&w_l - &w_r).norm() / w.norm().max(1e-300);
    let condition = condition_number(x1_s);
    if condition > CONDITION_WARNING || disagreement > 0.5 {
        log::warn!(
            "ill-conditioned indefinite alignment: condition {condition:e}, relaxations differ by {disagreement:.3}"
        );
    }
    Ok(AlignmentMap {
        w,
        kind: AlignmentKind::IndefiniteAvg,
        seeds: Vec::new(),
        condition,
    })
}

/// The two least-squares relaxations used by [`indefinite_align`].
pub fn indefinite_relaxations(
    x1_s: &Matrix,
    x2_s: &Matrix,
    signature: Signature,
) -> (Matrix, Matrix) {
    let s = Matrix::from_diagonal(&linalg::signature_diag(signature.d_plus, signature.d_minus));
    let w_l = pinv(x1_s, PINV_CUTOFF).0 * x2_s;
    let w_r = (pinv(&(x2_s * &s), PINV_CUTOFF).0 * (x1_s * &s)).transpose();
    (w_l, w_r)
}

/// `W = x1_s^+ x2_s` for `d1 <= d2`.
pub fn rectangular_align(x1_s: &Matrix, x2_s: &Matrix) -> Result<AlignmentMap> {
    let (d1, d2) = (x1_s.ncols(), x2_s.ncols());
    if d1 > d2 {
        return Err(Error::DimensionMismatch(format!(
            "rectangular alignment needs d1 <= d2, got {d1} > {d2}"
        )));
    }
    check_shapes(x1_s, x2_s, d2)?;
    full_column_rank(x1_s, "network-1")?;
    Ok(AlignmentMap {
        w: pinv(x1_s, PINV_CUTOFF).0 * x2_s,
        kind: AlignmentKind::Rectangular,
        seeds: Vec::new(),
        condition: condition_number(x1_s),
    })
}

/// Picks the alignment variant from the two signatures and solves it on the
/// seed rows of full embeddings.
pub fn align_on_seeds(
    x1: &Matrix,
    x2: &Matrix,
    sig1: Signature,
    sig2: Signature,
    seeds: &[usize],
) -> Result<AlignmentMap> {
    let n = x1.nrows();
    if x2.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "embeddings have {} and {} rows",
            n,
            x2.nrows()
        )));
    }
    if let Some(&bad) = seeds.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidParameter(format!(
            "seed {bad} out of range for {n} vertices"
        )));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("seed set has duplicates".into()));
    }
    let x1_s = select_rows(x1, seeds);
    let x2_s = select_rows(x2, seeds);
    let mut map = if sig1 == sig2 && sig1.is_definite() {
        procrustes(&x1_s, &x2_s)?
    } else if sig1 == sig2 {
        indefinite_align(&x1_s, &x2_s, sig1)?
    } else if sig1.is_definite() && sig2.is_definite() {
        rectangular_align(&x1_s, &x2_s)?
    } else {
        return Err(Error::InvalidParameter(format!(
            "unsupported signature pair {sig1:?} / {sig2:?}"
        )));
    };
    map.seeds = seeds.to_vec();
    Ok(map)
}
