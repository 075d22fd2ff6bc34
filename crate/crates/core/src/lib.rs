//! Pure-state informationally complete (PS-I-complete) measurements.
//!
//! The crate builds the POVM families used for pure-state tomography, predicts
//! their outcome probabilities, inverts exact or estimated probabilities back
//! to a state in closed form, and provides numerical certificates:
//!
//! * [`constructions`]: the 2D-element POVM with a throw-away element, the
//!   rank-one 3D-2 element POVM, qubit tetrahedral/trine measurements, the
//!   complementary-bases POVM and its 2D-1 element amalgamation, and the
//!   `G^{-1/2}` renormalization of an arbitrary positive element set.
//! * [`reconstruction`]: closed-form inversions for the two PS-I-complete
//!   families, reporting measure-zero failure sets instead of garbage.
//! * [`analysis`]: frame rank over Hermitian operator space, Monte Carlo
//!   certification, and a multi-start search for ambiguity witnesses.
//! * [`tomo`]: finite-shot multinomial simulation and efficiency sweeps.
//!
//! Everything is built on a small dense complex kernel in [`linalg`] whose
//! single numerical primitive is a Jacobi Hermitian eigendecomposition.

pub mod analysis;
pub mod cli;
pub mod constructions;
mod error;
pub mod json;
pub mod linalg;
pub mod quantum;
pub mod reconstruction;
pub mod seeds;
pub mod tomo;

pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, EigenDecomposition, HermitianOperator};
pub use quantum::{BlochVector, OutcomeDistribution, Povm, PureState};

pub use num_complex::Complex64;
