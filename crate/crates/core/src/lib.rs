//! Bounded solutions on the whole integer axis for linear difference equations
//! `x_{n+1} = A_n x_n + h_n` whose homogeneous part has exponential dichotomies
//! on `ℤ₊` and `ℤ₋`.
//!
//! The pipeline: split the constant tails into stable/unstable parts
//! ([`dichotomy`]), form `D = P − (I − Q)` and its Moore–Penrose inverse
//! ([`genpinv`]), then decide solvability and evaluate the generalized Green's
//! operator ([`green`]). [`oracle`] is an independent brute-force solver used to
//! cross-check the construction.

pub mod cli;
pub mod dichotomy;
pub mod error;
pub mod genpinv;
pub mod green;
pub mod instances;
pub mod linsys;
pub mod mat;
pub mod oracle;
pub mod par;

pub use dichotomy::{Axis, DichotomyCertificate, VerificationReport};
pub use error::{Error, Result};
pub use genpinv::{Classification, GeneralizedInverse};
pub use green::{BoundedSolutionFamily, GreenContext, SolvabilityReport, Tolerances};
pub use linsys::{ForcingSequence, OperatorSequence, StateSequence};
pub use par::Exec;
