//! Seating optimisation as pairwise cost function network problems.
//!
//! A [`SeatingProblem`] (tables, guests, restraints and pairwise
//! constraints) is compiled into a [`CfnProblem`] whose nodes are the free
//! guests and whose choices are seats. The CFN can then be solved exactly,
//! by annealed Monte Carlo, by hill-flattening Monte Carlo, or by encoding it
//! as a QUBO and sampling.

pub mod cfn;
pub mod chart;
pub mod constraint;
pub mod io;
pub mod model;
pub mod qubo;
pub mod report;
pub mod solvers;

pub use cfn::{Assignment, CfnBuilder, CfnError, CfnProblem, PairBlock, SolutionRecord};
pub use constraint::{compile_cfn, CompileError, ConstraintKind, ConstraintSpec, NodeChoiceMap};
pub use io::{builtin_problem, parse_problem, serialize_problem, Builtin, ParseError};
pub use model::{ModelError, SeatingProblem, Table};
