//! Ready-made sequences with certified envelopes.

pub mod factorial;
pub mod fibonacci;
pub mod logistic;
pub mod syracuse;

pub use factorial::{
    factorial_solve, factorial_solve_with, FactorialChoice, FactorialConstantEnvelope,
    FactorialRatio, FactorialSequenceEnvelope,
};
pub use fibonacci::{fibonacci_solve, fibonacci_solve_with, FibonacciFn, FibonacciRatio};
pub use logistic::{logistic_solve, logistic_solve_with, Logistic, LogisticEnvelope};
pub use syracuse::{
    collatz_envelope_check, syracuse_excursion, syracuse_step, CollatzCheck, Excursion,
    SyracuseSource,
};
