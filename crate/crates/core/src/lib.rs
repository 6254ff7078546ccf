//! Numerical laboratory for higher-rank lattice Anderson models.
//!
//! The crate builds finite-volume Hamiltonians `H = H0 + V` on cubes of the
//! lattice `Z^d`, where the random potential acts through block projections of
//! uniform rank `r^d`. On top of the dense spectral machinery it provides
//! Monte Carlo estimators for eigenvalue-counting and level-spacing
//! statistics, a constructive degeneracy-splitting search with verifiable
//! certificates, and local eigenvalue statistics with Poisson goodness-of-fit
//! tests.

pub mod error;
pub mod estimators;
pub mod lattice;
pub mod les;
pub mod operator;
pub mod randomness;
pub mod report;
pub mod spectral;
pub mod splitting;
pub mod stats;

pub use error::Error;
pub use lattice::LatticeGeometry;
pub use operator::{BoundaryCondition, Configuration, OperatorMatrix};
pub use spectral::{IntervalSet, Spectrum};
