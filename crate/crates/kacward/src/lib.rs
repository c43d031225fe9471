//! Exact Ising computations on planar graphs and the torus through
//! Kac-Ward matrices, Pfaffians and their combinatorial expansions.

pub mod cli;
pub mod double;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod ising;
pub mod kacward;
pub mod linalg;
pub mod oracle;
pub mod surface;

pub use error::{Error, Result};
pub use graph::{CutKind, CutSet, Graph, Surface};
pub use linalg::{CMatrix, SkewMatrix, C64};
