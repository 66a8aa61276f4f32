//! Bound states near the threshold of potentials with a repulsive long-range
//! tail: a radial eigenvalue solver, Green's-function kernels, envelope
//! bounds and the experiments built on them. Units: ħ = 1, m = 1/2, so the
//! radial equation reads `-u'' + [ℓ(ℓ+1)/r² + λW] u = E u`.

// NaN must fail these guards, so `!(x > 0.0)` is the intended form.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod envelope;
pub mod error;
pub mod experiments;
pub mod greens;
pub mod grid;
pub(crate) mod ode;
pub mod potential;
pub mod quadrature;
pub mod radial;

pub use error::{Error, Result};
pub use experiments::{Classification, FalloffFit, FalloffModel, SweepRow, Verdict};
pub use grid::{ExteriorTail, GridSpec, RadialFunction, RadialGrid};
pub use potential::{Core, RadialPotential, TailSpec};
pub use radial::{BoundStateResult, CurveRow, SolverConfig};
