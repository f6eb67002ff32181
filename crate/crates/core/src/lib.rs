//! Semidefinite relaxations of the complex cut polytope CUT(n,m).
//!
//! CUT(n,m) is the convex hull of the rank-one matrices xx* where every entry
//! of x is an m-th root of unity. The crate builds the complex elliptope
//! relaxation and its cut-strengthened and lifted refinements, solves them
//! through a conic interior-point backend, and audits everything against
//! exact brute-force oracles at small scale.

pub mod conic;
pub mod cuts;
pub mod experiments;
pub mod extremal;
pub mod lift;
pub mod linalg;
pub mod oracle;
pub mod relax;
pub mod scalar;

mod error;

pub use error::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Concrete double-precision aliases; the numeric core is generic over the
/// scalar, everything above it works in f64.
pub type Complexd = num_complex::Complex<f64>;
pub type CMatrixd = linalg::CMatrix<f64>;
pub type RMatrixd = linalg::RMatrix<f64>;
pub type HermitianMatrixd = linalg::HermitianMatrix<f64>;
pub type PhaseVectord = linalg::PhaseVector<f64>;
pub type RootSetd = linalg::RootSet<f64>;
