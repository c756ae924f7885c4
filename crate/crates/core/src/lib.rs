//! Finite-dimensional machinery for the Kalman–Yakubovich–Popov inequality
//! of passive discrete time-invariant systems.
//!
//! The crate covers contraction parametrization, Kreĭn shorted operators,
//! Möbius representations of Schur-class functions, the equivalent forms of
//! the KYP inequality and the Riccati equation, and the monotone iteration
//! that converges to the minimal solution.

pub mod contraction;
pub mod error;
pub mod fixtures;
pub mod kyp;
pub mod moebius;
pub mod numerics;
pub mod random;
pub mod shorted;
pub mod solver;
pub mod system;

pub use contraction::{BlockContraction, Blocks, ContractionParams, ShortedDefects};
pub use error::{KypError, Result};
pub use kyp::{KypCandidate, KypReport, UniquenessReport};
pub use moebius::MoebiusPair;
pub use numerics::{CMatrix, Tolerances};
pub use shorted::{ShortedResult, ShortedRoute, Subspace};
pub use solver::IterationTrace;
pub use system::{Classification, SystemRealization};
