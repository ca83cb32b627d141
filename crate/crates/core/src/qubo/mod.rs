//! QUBO reductions of CFN problems and a classical sampler to solve them.
//!
//! Three encodings are provided: one-hot (`D_i` bits per node), domain-wall
//! (`D_i - 1` bits) and approximate binary (`ceil(log2 D_i)` bits, with
//! costs fit by least squares). Samplers sit behind [`QuboSampler`] so that
//! other backends can be plugged in without touching the encoders.

mod encode;
mod fit;
mod problem;
mod sampler;
mod solve;

use thiserror::Error;

pub use encode::{
    bits_per_node, decode_bits, default_constraint_strength, encode, encode_approx_binary,
    encode_assignment, encode_domain_wall, encode_one_hot, qubit_count, Decoded, Encoding,
    EncodingMap,
};
pub use problem::{bits_to_string, qubo_energy, QuboProblem};
pub use sampler::{
    sample_qubo, AnnealingSampler, BitSample, ExhaustiveSampler, QuboSampler, DEFAULT_SWEEPS,
};
pub use solve::{solve_via_qubo, solve_via_qubo_with, QuboSolveOptions, QuboSolveOutcome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("constraint strength must be positive and finite, got {0}")]
    BadStrength(f64),
    #[error("expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("{bits} bits is too many for exhaustive sampling (limit {limit})")]
    TooManyBits { bits: usize, limit: usize },
    #[error("at least one shot is required")]
    NoShots,
}
