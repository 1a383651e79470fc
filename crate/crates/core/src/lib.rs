pub mod clique;
pub mod error;
pub mod linalg;

pub use error::{GbsError, Result};
pub mod matfuncs;
pub mod points;
pub mod fock;
pub mod gaussian;
pub mod graph;
pub mod io;
pub mod sampler;
pub mod similarity;
pub mod subgraph;
pub mod svg;
pub mod vibronic;
