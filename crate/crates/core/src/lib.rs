//! Hyperbolic simplex volumes, scissors-congruence Dehn invariants, framed
//! period matrices of simplex motives and special values of Dedekind zeta
//! functions.
//!
//! Exact data lives over Q or a real quadratic field ([`qfield`]); geometry
//! is done in the Klein model ([`hypmodel`], [`simplex`]); volumes come from
//! the Bloch-Wigner dilogarithm or quasi-Monte Carlo integration
//! ([`volume`]).

pub mod coxeter;
pub mod error;
pub mod exec;
pub mod hypmodel;
pub mod lfunc;
pub mod linalg;
pub mod periods;
pub mod qfield;
pub mod qmc;
pub mod scissors;
pub mod simplex;
pub mod tiling;
pub mod volume;

pub use error::{Error, Result};
pub use exec::Execution;
