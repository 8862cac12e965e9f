//! Peak of `||A_lambda^k||_2^2` for a list of `lambda` values.

use serde::{Deserialize, Serialize};

use super::lyapunov::{
    a_lambda, a_lambda_beta, default_q, envelope_from_certificate, p_q, q_threshold,
    ALambdaNormSource, PowerNormSource,
};
use crate::algebra::Affine;
use crate::envelope::{ConstantEnvelope, Envelope};
use crate::error::{PeakError, Result};
use crate::peak::{functional_at, solve, PeakSolution, SolverConfig, TieRule};
use crate::source::TermSource;

/// The benchmark `lambda` values.
pub const BENCHMARK_LAMBDAS: [f64; 8] = [0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999, 0.99995];

pub const CSV_HEADER: &str = "lambda,k_s,max_norm_sq,f_floor";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TablePath {
    /// Matrix powers, Cholesky whitening and Jacobi eigenvalues.
    #[default]
    Generic,
    /// Closed forms for `||A_lambda^k||_2^2` and `||A_lambda||_{P_q}^2`.
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub lambda: f64,
    /// Greatest maximizer.
    pub k_s: u64,
    pub max_norm_sq: f64,
    /// `floor(F(k_s))`.
    pub f_floor: u64,
}

fn row_from<S: TermSource, E: Envelope>(lambda: f64, source: &S, env: &E) -> Result<TableRow> {
    let config = SolverConfig::default().with_tie(TieRule::MaxArgmax);
    let PeakSolution {
        sup_value,
        argmax_max,
        ..
    } = solve(source, env, &config)?;
    let f_floor = functional_at(argmax_max, sup_value, env)?
        .truncation()
        .ok_or_else(|| {
            PeakError::InvalidParameter(format!("functional infinite at the peak for lambda={lambda}"))
        })?;
    Ok(TableRow {
        lambda,
        k_s: argmax_max,
        max_norm_sq: sup_value,
        f_floor,
    })
}

/// One row: solve with the greatest-maximizer rule, report the peak and the
/// floored functional at the greatest maximizer.
pub fn table_row(lambda: f64, d: usize, q: Option<f64>, path: TablePath) -> Result<TableRow> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(PeakError::InvalidParameter(format!(
            "lambda must lie in (0, 1), got {lambda}"
        )));
    }
    let p = p_q(lambda, d, q)?;
    match path {
        TablePath::Generic => {
            let a = a_lambda(lambda, d)?;
            let env = envelope_from_certificate(&a, &p)?;
            row_from(lambda, &PowerNormSource { a }, &env)
        }
        TablePath::ClosedForm => {
            let q = q.unwrap_or_else(|| default_q(lambda));
            debug_assert!(q > q_threshold(lambda));
            let env = ConstantEnvelope::new(Affine::new(q.max(1.0) / q.min(1.0), 0.0)?, a_lambda_beta(lambda, q))?;
            row_from(lambda, &ALambdaNormSource { lambda }, &env)
        }
    }
}

pub fn table_run(lambdas: &[f64], d: usize, q: Option<f64>, path: TablePath) -> Result<Vec<TableRow>> {
    lambdas.iter().map(|&l| table_row(l, d, q, path)).collect()
}

/// `printf("%g")`-style formatting with `sig` significant digits.
pub fn format_sig(v: f64, sig: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{v:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn to_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_sig(row.lambda, 6),
            row.k_s,
            format_sig(row.max_norm_sq, 6),
            row.f_floor
        ));
    }
    out
}
