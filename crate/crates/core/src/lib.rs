//! Tree-likeness analysis for embeddings and distance matrices.
//!
//! Three views of how close a finite metric space is to a tree:
//!
//! * [`hyperbolicity`]: Gromov delta from the four-point condition, sampled or exact.
//! * [`ultrametricity`]: how far triangles are from having their two longest sides equal.
//! * [`neighbor_joining`]: statistics of the neighbor-joining Q-matrix.
//!
//! Distances come from [`distances`] (Euclidean or Poincare ball) after the optional
//! [`preprocess`] steps, or are loaded directly through [`io`]. [`synthetic`] generates
//! spaces of known geometry and [`cluster`] scores k-means partitions.

pub mod cli;
pub mod cluster;
pub mod distances;
pub mod error;
pub mod hyperbolicity;
pub mod io;
pub mod neighbor_joining;
pub mod preprocess;
pub mod report;
mod rng;
pub mod stats;
pub mod synthetic;
pub mod types;
pub mod ultrametricity;

pub use distances::{build_distance_matrix, euclidean_distance, poincare_distance, MetricKind};
pub use error::{Error, ErrorKind, Result};
pub use hyperbolicity::{exact_delta, sample_delta, DeltaFormula, DeltaStats, Mode};
pub use neighbor_joining::{argmin_q_pair, nj_scores, q_matrix, NjStats};
pub use types::{validate_distance_matrix, DistanceMatrix, EmbeddingSet, MetricTag, Seed, Violation, ViolationKind};
pub use ultrametricity::{exact_ultrametricity, is_ultrametric, sample_ultrametricity, UltraStats};
