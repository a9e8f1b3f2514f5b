//! Hermeneutically-aware ad allocation.
//!
//! A platform decides, per user, whether to show a focal ad. Each user carries
//! a click probability `p` and an uptake probability `rho` (the chance they
//! make sense of the ad). The platform maximizes economic utility minus a
//! weighted hermeneutical-injustice cost, optionally subject to group-fairness
//! equality constraints between two protected groups.
//!
//! Modules:
//!
//! * [`model`]: domain types, utility, cost, and the three fairness gaps.
//! * [`solver`]: closed-form threshold rule, bounded simplex for the
//!   constrained fractional problem, and an exhaustive binary oracle.
//! * [`population`]: seeded synthetic populations (Beta uptake, power-law clicks).
//! * [`scenario`]: built-in parameter sweeps, replicated runs and aggregation.
//! * [`stats`]: Wilson intervals, Pearson χ² independence tests, Cramér's V.

pub mod error;
pub mod model;
pub mod population;
pub mod scenario;
pub mod solver;
pub mod special;
pub mod stats;

pub use error::{Error, Result};
pub use model::{
    Allocation, AllocationMode, ConstraintSet, GapKind, Group, ModelParams, Population,
    UserRecord,
};
pub use solver::{SolveMode, SolveRequest, SolveResult, SolveStatus};
