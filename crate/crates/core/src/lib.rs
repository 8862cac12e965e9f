//! Certified peak computation for real sequences.
//!
//! Given a sequence `u` and an envelope `(h, beta)` with `u_k <= h_k(beta_k^k)`,
//! the solvers in [`peak`] return `sup_k u_k` together with a maximizer after
//! evaluating finitely many terms. [`algebra`] builds and combines envelopes,
//! [`sequences`] packages worked examples and [`linsys`] handles squared
//! spectral norms of matrix powers through Lyapunov certificates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod envelope;
pub mod error;
pub mod linsys;
pub mod peak;
pub mod sequences;
pub mod source;

pub use algebra::{
    affine_fn, env_max, env_min, invert_numeric, nonconstant_decreasing_family,
    optimal_affine_certificate, promote_to_decreasing, Affine, AffineParams, NumericFn,
};
pub use envelope::{
    validate, ConstantEnvelope, Envelope, EnvelopeClass, EnvelopeFn, FamilyEnvelope, Violation,
};
pub use error::{PeakError, Result};
pub use peak::{
    brute_force_peak, eval_f, prefix_index_sets, solve, solve_traced, stopping_index,
    truncation_from, BruteForcePeak, PeakSolution, PrefixIndexSets, SolverConfig, TieRule,
    TraceStep, UpperBound,
};
pub use source::{FnSource, TermSource};
