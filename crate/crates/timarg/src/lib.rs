//! Exact tools for translation-invariant (TI) measures on the two-dimensional
//! integer lattice.
//!
//! The crate is organised around a single pipeline:
//!
//! * [`exactlp`] — an exact rational linear programming kernel.  Every verdict
//!   (optimal, infeasible, unbounded) ships a certificate that can be replayed
//!   independently of the solver.
//! * [`lattice`] — finite lattice regions, distributions over pattern
//!   configurations, marginalisation, and exact torus symmetrisation of
//!   periodic patterns.
//! * [`hierarchy`] — the LTI (local translation invariance) relaxation
//!   hierarchy: strip and square feasibility programs for marginal
//!   specifications, and lower/upper bounds for TI energy minimisation.
//! * [`polytope`] — exact polyhedral computation: the double description
//!   method, Fourier–Motzkin elimination, projections of LTI feasible sets,
//!   and symmetry quotients of vertex sets.
//! * [`exactsets`] — closed-form answers for small cases: the two-outcome
//!   nearest-neighbour and next-nearest-neighbour marginal problems, the
//!   three-outcome nearest-neighbour problem, and reflection-symmetric
//!   specifications, all backed by frozen exact vertex libraries.
//! * [`tiling`] — Wang tilings as energy problems, plus an exact
//!   piecewise-affine dynamical construction of an aperiodic tile family with
//!   its alphabet generator, sturmian row tilings, and density witnesses.
//!
//! All computation is exact big-rational arithmetic; the only floating point
//! in the crate is the final numeric evaluation of density curves in
//! [`tiling`], and it is quarantined there.

pub mod error;
pub mod exactlp;
pub mod exactsets;
pub mod hierarchy;
pub mod lattice;
pub mod polytope;
pub mod rat;
pub mod tiling;

pub use error::Error;
pub use rat::Rat;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
