//! Enumeration and certification of Dziobek central configurations: `n`
//! bodies spanning affine dimension `n - 2` under the homogeneous potential
//! `U_a = sum m_i m_j r_ij^(2a+2) / (2a+2)` (logarithmic at `a = -1`).
//!
//! The solver works in gauge-fixed coordinates; certification checks the
//! shape-space structure (kernel vector, rank-one factorization, Veronese
//! quadrics) after the fact.

// `!(x <= tol)` rejects NaN as well; keep those comparisons as written.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod certify;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod model;
pub mod solver;

pub use algebra::{bound, Bound, Rank1Fit};
pub use certify::{certify, certify_shape, classify, enumerate_classes, ShapeCertificate};
pub use error::{Error, Result};
pub use experiment::{generic_sweep, known_solutions, SweepReport, TrialRecord};
pub use model::{
    validate_masses, validate_masses_formal, CCClass, Certificate, Configuration, DistanceMatrix,
    DziobekVector, MassVector, PairShape, PotentialParam, ShapeMatrix, Tolerances, Verdict,
};
pub use solver::{multistart_solve, newton_solve, CandidateSolution, SolveOptions};
