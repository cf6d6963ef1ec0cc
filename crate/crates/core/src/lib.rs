//! Core algorithms behind `divscope`: a geometric view of amplicon read
//! diversity.
//!
//! The pipeline turns a set of marker reads into a point cloud:
//!
//! 1. [`seqio`] ingests and subsamples reads,
//! 2. [`align`] scores every pair with Smith-Waterman local alignment and
//!    [`distmat`] fills the full distance matrix in parallel,
//! 3. [`mds`] double-centers the squared distances into a Gram matrix and
//!    embeds it with the randomized eigensolver from [`rsvd`],
//! 4. [`assign`] labels reads against an annotated reference set using a
//!    homology gap, and [`density`] bins the embedding for plotting.
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. With `std`, the distance fill, the dense matrix products and the
//! binning step run on scoped worker threads; results are bit-identical for
//! any thread count.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod align;
pub mod assign;
pub mod density;
pub mod distmat;
pub mod linalg;
pub mod mds;
mod par;
pub mod rng;
pub mod rsvd;
pub mod seqio;

pub use align::{distance, sw_align, AlignError, AlignmentResult, ScoringScheme};
pub use assign::{classify, gap_threshold, AssignError, AssignmentResult, ReferenceDb, Status};
pub use density::{hexbin, log_counts, parallel_coords, HexBinGrid, ParallelCoordsTable};
pub use distmat::{pairwise_cross, pairwise_self, DistError, DistanceMatrix};
pub use linalg::Matrix;
pub use mds::{embed, gram_from_distances, reconstruction_error, Embedding, GramMatrix, MdsError};
pub use rsvd::{eigs_sym, randomized_range, stable_rank, SolverError, SolverOptions, Spectrum};
pub use seqio::{parse_fasta, subsample, write_fasta, Read, ReadSet, SeqError};
