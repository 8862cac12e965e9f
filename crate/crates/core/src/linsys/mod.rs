//! Squared spectral norms of matrix powers.

pub mod lyapunov;
pub mod matrix;
pub mod table;

pub use lyapunov::{
    a_lambda, a_lambda_beta, a_lambda_norm_sq, default_q, envelope_from_certificate, is_lyapunov,
    op_norm_sq, p_q, q_threshold, spectral_norm_sq_power, ALambdaNormSource, LyapunovCertificate,
    PowerNormSource,
};
pub use matrix::{cholesky, sym_eig_bounds, sym_eigenvalues, Matrix};
pub use table::{format_sig, table_row, table_run, to_csv, TablePath, TableRow, BENCHMARK_LAMBDAS};
