//! Spectral and economic analytics for weighted directed transaction
//! networks: Google-matrix construction, PageRank/CheiRank, invariant
//! subspace decomposition, normal- and high-precision Arnoldi spectra,
//! and Lorenz/Gini wealth statistics.

pub mod arnoldi;
pub mod cli;
pub mod error;
pub mod gmatrix;
pub mod ingest;
pub mod linalg;
pub mod netgen;
pub mod period;
pub mod ranks;
pub mod subspaces;
pub mod precision;

pub mod wealth;

pub use error::{Error, Result};
