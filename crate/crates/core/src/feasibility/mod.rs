//! Exact feasibility kernel: simplex, difference constraints, assignment and
//! the positive-solution alternative.

pub mod assignment;
pub mod difference;
pub mod lp;
pub mod motzkin;

pub use assignment::{max_weight_assignment, max_weight_exhaustive, max_weight_hungarian};
pub use difference::{difference_constraints_solve, DifferenceConstraintGraph, DifferenceSolution};
pub use lp::{
    lp_feasible, maximize, minimize, FarkasCertificate, FeasibilityVerdict, LinearSystem, LpOutcome, Relation,
};
pub use motzkin::{positive_solution_exists, PositiveSolution};
