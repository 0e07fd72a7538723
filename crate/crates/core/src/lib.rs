//! Musielak-Orlicz convex-analysis toolkit and monotone parabolic solver.
//!
//! The crate has three layers:
//! - convex analysis on modular functions: the N-function catalog, numerical
//!   Legendre conjugates, convex envelopes, structural checks (Delta_2,
//!   log-Hoelder regularity, the cube-covering balance condition) and the
//!   Delta_2 minorant construction ([`nfunction`]);
//! - modulars, Luxemburg norms and modular-convergence diagnostics over
//!   discrete fields ([`modular`]), together with truncations, cutoffs and
//!   smoothing operators ([`mollify`]);
//! - an implicit-Euler solver for `du/dt - div A(x, grad u) = f` with zero
//!   Dirichlet data driven by monotone vector fields ([`operators`],
//!   [`solver`]) and the residual/bound bookkeeping that certifies each run
//!   ([`diagnostics`]).

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod modular;
pub mod mollify;
pub mod nfunction;
pub mod operators;
pub mod report;
pub mod scalar;
pub mod solver;

pub use error::{OrliczError, Result};
pub use grid::{CellField, Domain, GridFunction, SpaceGrid, SpatialField, TimeGrid};
pub use nfunction::{Catalog, CubeCovering, NFunction, SampleSpec, SpatialProfile};
pub use operators::{OperatorRule, RegularizedField, Regularizer, VectorField};
pub use report::{DiagnosticsReport, Table, Verdict};
pub use scalar::ScalarNFunction;
pub use solver::{ProblemSpec, SolveReport, StaircaseReport};
