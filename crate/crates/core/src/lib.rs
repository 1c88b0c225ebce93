//! Representation-similarity toolkit.
//!
//! Computes the RV coefficient, the modified RV coefficient (RV2), and
//! linear CKA between sets of neural-network layer activations, assembles
//! pairwise layer-similarity matrices, reads and writes activation data in
//! the RSAM binary format, and regenerates freeze-training / random-feature
//! experiments at desk scale with a built-in feedforward simulator.

pub mod error;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod numfmt;
pub mod similarity;
pub mod simnet;
pub mod sum;

pub use error::{Error, Result};
pub use matrix::{
    center_columns, decimate, decimate_frames, global_average_pool, ActivationSet,
    ActivationTensor, DataMatrix,
};
pub use metrics::{cross_gram_stats, linear_cka, rv, rv2, CrossStats, Metric, StatsPath};
pub use similarity::{pairwise_similarity, PairwiseOutcome, SimilarityMatrix};
