//! A numerical laboratory for left-invertible multiplication operators.
//!
//! Functions live in weighted coefficient spaces on the disc (Hardy, Bergman,
//! Dirichlet or custom weights) with values in `C^d`. Multiplication by `z`
//! and its canonical left inverse `L` (the backward shift) act exactly on
//! truncated Taylor coefficients, and every truncation carries a certified
//! tail bound. On top of that model the crate provides:
//!
//! - [`resolvent`]: `(I - lambda L)^{-1}`, the decomposition
//!   `f = (M_z - lambda) g + h` with `h` in the kernel of `L`, and analytic
//!   continuation through the kernel component `c_lambda(f)`;
//! - [`subspaces`]: finite `L`-invariant subspaces, their restriction
//!   matrices, membership and point-spectrum predicates;
//! - [`spectra`]: smallest-singular-value indicators, grid scans and
//!   spectral-radius estimates;
//! - [`checks`]: verifiers producing reproducible [`checks::CheckReport`]s;
//! - [`cli`]: the batch front end behind the `shiftlab` binary.

pub mod checks;
pub mod cli;
pub mod coeffspace;
pub mod error;
pub mod linalg;
pub mod probes;
pub mod resolvent;
pub mod spectra;
pub mod subspaces;

pub use coeffspace::{
    make_custom_space, make_space, CoeffFunction, Evaluation, SpaceModel, WeightKind,
    WeightSequence,
};
pub use error::{Error, Result};
