//! Braid group representations from the Kohno (KZ) flat connection and from
//! the A-type quantum R-matrix, together with numerical certificates for the
//! algebraic identities they satisfy and for the classical loop-group Poisson
//! algebra.

pub mod error;
pub mod linalg;
pub mod lie_core;
pub mod kz_connection;
pub mod ode;
pub mod holonomy;
pub mod rmatrix;
pub mod equivalence;
pub mod loopspace;
pub mod checks;
pub mod cli;

pub use error::{Error, Result};
