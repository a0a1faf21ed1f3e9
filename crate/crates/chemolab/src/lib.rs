//! Numerical laboratory for chemotaxis systems with generalized logistic sources.
//!
//! The library simulates the density/signal system
//!
//! ```text
//! u_t = div( (u+1)^(m1-1) grad u ) - chi div( u (u+1)^(m2-1) grad v ) + B(u)
//! tau v_t = Laplace v - v + K u^l,        tau in {0, 1}
//! ```
//!
//! on an interval or a box with zero-flux boundaries, where the reaction `B`
//! is one of two damping families:
//!
//! * nonlocal damping: `B(u) = a u^alpha - b u^beta - c INT_Omega u^delta`
//! * gradient damping: `B(u) = a u^alpha - b u^alpha INT_Omega u^beta - c |grad u|^delta`
//!
//! Besides simulation, the crate evaluates sharp boundedness criteria for
//! these systems in exact rational arithmetic, so limit cases such as
//! `delta = 4/3` are decided without float drift.
//!
//! Modules:
//! * [`model`]: parameter records, admissibility checks, source evaluation.
//! * [`regimes`]: boundedness criteria, exponent bookkeeping, mass bounds.
//! * [`grid`]: cell-centered finite-volume geometry and spatial operators.
//! * [`solver`]: positivity-preserving time stepping, monitors, run records.
//! * [`harness`]: config files, run orchestration, sweeps, convergence studies.

pub mod grid;
pub mod harness;
pub mod model;
pub mod rational;
pub mod regimes;
pub mod solver;
