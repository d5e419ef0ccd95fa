//! Shift detection without known seeds: random seed candidates are screened
//! with the pair filter, scored by how many vertices they align, and the
//! best one is expanded to its estimated unshifted set.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::index;

use crate::embed::embed;
use crate::error::{Error, Result};
use crate::filter::{candidate_passes, sample_feasible_candidates, FilterStats};
use crate::graph::Graph;
use crate::rng;
use crate::shift::{check_alpha, Comparison, ModelDims, ShiftReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMode {
    /// Uniformly random seed-size subsets, screened afterwards.
    #[default]
    UniformRandom,
    /// Sets grown directly inside the feasibility mask.
    FeasibleDirect,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedFreeConfig {
    pub dims: ModelDims,
    pub seed_size: usize,
    pub candidates: usize,
    pub alpha: f64,
    pub alpha_tilde: f64,
    pub rng_seed: u64,
    pub sampling: SamplingMode,
}

impl SeedFreeConfig {
    /// Defaults: seed size equal to the larger dimension, 1000 candidates,
    /// `alpha = 0.05`, `alpha_tilde = 0.3`, uniform sampling.
    pub fn new(dims: ModelDims) -> Self {
        Self {
            dims,
            seed_size: dims.sig1.dim().max(dims.sig2.dim()),
            candidates: 1000,
            alpha: 0.05,
            alpha_tilde: 0.3,
            rng_seed: 0,
            sampling: SamplingMode::UniformRandom,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        let need = self.dims.sig1.dim().max(self.dims.sig2.dim()).max(1);
        if self.seed_size < need || self.seed_size > n {
            return Err(Error::InvalidParameter(format!(
                "seed size {} must lie in [{need}, {n}]",
                self.seed_size
            )));
        }
        if self.candidates == 0 {
            return Err(Error::InvalidParameter(
                "candidate count must be positive".into(),
            ));
        }
        check_alpha(self.alpha)?;
        check_alpha(self.alpha_tilde)
    }
}

/// One scored seed candidate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateOutcome {
    pub seeds: Vec<usize>,
    pub passed_filter: bool,
    /// Size of the estimated unshifted set, 0 if filtered out or if
    /// alignment on this set failed.
    pub h: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SeedFreeTrace {
    pub candidates: Vec<CandidateOutcome>,
    pub chosen: Option<usize>,
    pub expanded_seeds: Vec<usize>,
    /// True when the final run used the chosen candidate itself because the
    /// expanded set was unusable.
    pub fell_back: bool,
}

/// Candidate budget `ceil(ln(1 - q) / ln(1 - p^d))`, at least 1.
pub fn required_candidates(p: f64, d: usize, q: f64) -> Result<usize> {
    if !(p > 0.0 && p <= 1.0) || !(q > 0.0 && q < 1.0) || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "need 0 < p <= 1, 0 < q < 1, d >= 1; got p = {p}, q = {q}, d = {d}"
        )));
    }
    let hit = libm::pow(p, d as f64);
    if hit >= 1.0 {
        return Ok(1);
    }
    let m = libm::ceil(libm::log1p(-q) / libm::log1p(-hit));
    Ok((m as usize).max(1))
}

/// Distinct uniformly random `size`-subsets of `0..n`, each sorted.
pub fn uniform_candidates(n: usize, size: usize, count: usize, rng_seed: u64) -> Vec<Vec<usize>> {
    let mut rng = rng::stream(rng_seed, rng::CANDIDATES);
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let budget = 50 * count;
    let mut misses = 0;
    while out.len() < count && misses < budget {
        let mut s = index::sample(&mut rng, n, size).into_vec();
        s.sort_unstable();
        if seen.insert(s.clone()) {
            out.push(s);
        } else {
            misses += 1;
        }
    }
    if out.len() < count {
        log::warn!(
            "only {} distinct candidates of size {size} among {n} vertices",
            out.len()
        );
    }
    out
}

/// Embeds both graphs and runs the seed-free procedure.
pub fn run_seedfree(
    g1: &Graph,
    g2: &Graph,
    config: &SeedFreeConfig,
) -> Result<(ShiftReport, SeedFreeTrace)> {
    if g1.n() != g2.n() {
        return Err(Error::DimensionMismatch(format!(
            "graphs have {} and {} vertices",
            g1.n(),
            g2.n()
        )));
    }
    config.validate(g1.n())?;
    let cmp = Comparison::new(embed(g1, config.dims.sig1)?, embed(g2, config.dims.sig2)?)?;
    run_seedfree_on(&cmp, config)
}

/// Seed-free procedure on already embedded networks.
pub fn run_seedfree_on(
    cmp: &Comparison,
    config: &SeedFreeConfig,
) -> Result<(ShiftReport, SeedFreeTrace)> {
    let n = cmp.n();
    config.validate(n)?;
    let stats = FilterStats::new(&cmp.e1, &cmp.e2, config.seed_size, config.alpha_tilde)?;
    let sets = match config.sampling {
        SamplingMode::UniformRandom => {
            uniform_candidates(n, config.seed_size, config.candidates, config.rng_seed)
        }
        SamplingMode::FeasibleDirect => {
            sample_feasible_candidates(
                &stats,
                config.seed_size,
                config.candidates,
                config.rng_seed,
                None,
            )?
            .sets
        }
    };
    let score = |seeds: Vec<usize>| -> CandidateOutcome {
        let passed_filter = candidate_passes(&stats, &seeds);
        let h = if passed_filter {
            match cmp.run(&seeds, config.alpha) {
                Ok(r) => r.unshifted.len(),
                Err(e) => {
                    log::debug!("candidate {seeds:?} could not be scored: {e}");
                    0
                }
            }
        } else {
            0
        };
        CandidateOutcome {
            seeds,
            passed_filter,
            h,
        }
    };
    #[cfg(feature = "parallel")]
    let candidates: Vec<CandidateOutcome> = {
        use rayon::prelude::*;
        sets.into_par_iter().map(score).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let candidates: Vec<CandidateOutcome> = sets.into_iter().map(score).collect();

    let mut chosen: Option<usize> = None;
    for (m, c) in candidates.iter().enumerate() {
        if c.passed_filter && chosen.map_or(true, |b| c.h > candidates[b].h) {
            chosen = Some(m);
        }
    }
    let mut trace = SeedFreeTrace {
        candidates,
        chosen,
        expanded_seeds: Vec::new(),
        fell_back: false,
    };
    let Some(m_star) = chosen else {
        return Err(Error::NoViableCandidate(alloc::boxed::Box::new(trace)));
    };
    let best = trace.candidates[m_star].seeds.clone();
    let first = cmp.run(&best, config.alpha)?;
    let need = cmp.e1.dim().max(cmp.e2.dim());
    trace.expanded_seeds = first.unshifted.clone();
    let report = if trace.expanded_seeds.len() >= need {
        match cmp.run(&trace.expanded_seeds, config.alpha) {
            Ok(r) => r,
            Err(e) => {
                log::warn!("expanded seed set unusable ({e}); keeping the chosen candidate");
                trace.fell_back = true;
                first
            }
        }
    } else {
        log::warn!(
            "expanded seed set has {} vertices, fewer than {need}; keeping the chosen candidate",
            trace.expanded_seeds.len()
        );
        trace.fell_back = true;
        first
    };
    Ok((report, trace))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn candidate_budget() {
        assert_eq!(required_candidates(0.25, 3, 0.99).unwrap(), 293);
        assert_eq!(required_candidates(0.5, 1, 0.99).unwrap(), 7);
        assert_eq!(required_candidates(1.0, 3, 0.99).unwrap(), 1);
        assert_eq!(required_candidates(0.999_999, 1, 0.5).unwrap(), 1);
        assert!(required_candidates(0.0, 3, 0.99).is_err());
    }

    #[test]
    fn uniform_candidates_are_distinct() {
        let c = uniform_candidates(5, 2, 10, 3);
        assert_eq!(c.len(), 10);
        let c = uniform_candidates(5, 2, 20, 3);
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn config_validation() {
        let mut c = SeedFreeConfig::new(ModelDims::same(3));
        assert!(c.validate(10).is_ok());
        c.seed_size = 2;
        assert!(c.validate(10).is_err());
        c.seed_size = 3;
        c.alpha = 1.0;
        assert!(c.validate(10).is_err());
    }
}
