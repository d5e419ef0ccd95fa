//! Vertex-wise shift detection between two networks on a shared vertex set.
//!
//! Given adjacency matrices of two (generalized) random dot product graphs,
//! the crate estimates which vertices kept their latent positions up to a
//! common transformation, estimates the shifts of the others, and builds
//! mirror curves that summarize how a dynamic network evolves.
//!
//! The pipeline is:
//!
//! 1. [`embed`](embed::embed) each adjacency matrix (adjacency spectral embedding),
//! 2. align the two embeddings on a seed set ([`align`]),
//! 3. estimate shifts and per-vertex covariances, test each vertex with a
//!    chi-square statistic and select the unshifted set with
//!    Benjamini-Hochberg ([`shift`]),
//! 4. when no seeds are known, screen random seed candidates with the
//!    pairwise probability-difference filter ([`filter`]) and keep the one
//!    that aligns the most vertices ([`seedfree`]).
//!
//! The crate is `no_std` (it needs `alloc`). The `parallel` feature turns on
//! rayon for candidate scoring and pairwise mirror comparisons; results do
//! not depend on scheduling.
//!
//! ```
//! use netshift_core::graph::{make_sbm_scenario, sample_graph, sbm_reference_blocks};
//! use netshift_core::shift::{run_seeded, ModelDims};
//!
//! let scenario = make_sbm_scenario(120, &sbm_reference_blocks(), 0.5, 11).unwrap();
//! let g1 = sample_graph(&scenario.model1, 1).unwrap();
//! let g2 = sample_graph(&scenario.model2, 2).unwrap();
//! let report = run_seeded(&g1, &g2, ModelDims::same(3), &[0, 1, 2, 3, 4, 5], 0.05).unwrap();
//! assert_eq!(report.t.len(), 120);
//! ```
#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod align;
pub mod embed;
pub mod error;
pub mod filter;
pub mod graph;
pub mod linalg;
pub mod mirror;
pub mod rng;
pub mod seedfree;
pub mod shift;
pub mod special;

pub use error::{Error, Result};
pub use graph::{Graph, LatentModel, ShiftScenario, Signature};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
