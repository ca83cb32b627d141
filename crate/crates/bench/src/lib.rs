//! Shared fixtures for the criterion benchmarks.

use seatopt::{builtin_problem, compile_cfn, Builtin, CfnProblem};

pub fn compiled(which: Builtin) -> CfnProblem {
    compile_cfn(&builtin_problem(which))
        .expect("built-in problems compile")
        .0
}
