//! Resistance-perturbation distances between weighted graphs.
//!
//! Exact effective resistances, the RP-p distances built on them, a sketched
//! approximation of RP-2, single-edge perturbation analysis, baseline
//! distances, random graph models and a dynamic-network driver.
//!
//! Numerical code is generic over [`Scalar`]; the aliases below fix `f64`.

pub mod baselines;
pub mod dynet;
pub mod error;
pub mod fast;
pub mod graph;
pub mod io;
pub mod oracles;
pub mod perturbation;
pub mod randgraph;
pub mod resistance;
pub mod rp;
pub mod scalar;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Edge, GraphSnapshot, LaplacianView};
pub use io::{load_edgelist, load_manifest, save_edgelist, DynamicSequence, VertexUniverse};
pub use resistance::{
    commute_time, pseudo_inverse, renormalized_resistance, resistance_matrix, PseudoInverse,
    RenormalizedResistanceMatrix, ResistanceMatrix,
};
pub use rp::{kirchhoff_difference, laplacian_from_resistance, rp_distance, rp_distance_renormalized, RpOrder};
pub use scalar::{ClosedFormScalar, Scalar};

/// Double-precision graph, the default everywhere.
pub type Graph = GraphSnapshot<f64>;
/// Single-precision graph.
pub type Graph32 = GraphSnapshot<f32>;
/// Exact rational type for the closed-form oracles.
pub type Rational = num_rational::Ratio<i128>;
pub type Resistance = ResistanceMatrix<f64>;
pub type Embedding = fast::ResistanceEmbedding<f64>;
pub type Spectrum = spectral::SpectralDecomposition<f64>;
