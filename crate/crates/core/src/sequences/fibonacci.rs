//! Ratios `w_n = u_{n+1} / u_n` of a Fibonacci-type sequence
//! `u_{n+2} = u_{n+1} + u_n` started from nonnegative integers `u_0, u_1`.
//!
//! When `u_1 > u_0 * phi` the ratios alternate around `phi`: odd ones below,
//! even ones (from 2) above, and the even ones decrease. A single function
//! `h` with `h(0) = phi`, paired with `beta = phi^-2`, interpolates the even
//! ratios exactly.

use crate::envelope::{clamp_to_range, ConstantEnvelope, Envelope, EnvelopeFn};
use crate::error::{PeakError, Result};
use crate::peak::{eval_f, solve_traced, PeakSolution, SolverConfig, TraceStep, UpperBound};
use crate::source::TermSource;

const PHI: f64 = 1.618_033_988_749_895;

/// `u_1 > u_0 * phi`, decided in exact integer arithmetic.
fn above_golden(u0: u64, u1: u64) -> bool {
    let lhs = 2 * u1 as i128 - u0 as i128;
    lhs > 0 && (lhs as u128).pow(2) > 5 * (u0 as u128).pow(2)
}

/// `w_n`, with `w_0 = 0` when `u_0 = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibonacciRatio {
    pub u0: u64,
    pub u1: u64,
    /// Ratios computed from exact integer terms, up to the last pair that fits.
    exact: Vec<f64>,
}

impl FibonacciRatio {
    pub fn new(u0: u64, u1: u64) -> Result<Self> {
        if !above_golden(u0, u1) {
            return Err(PeakError::PreconditionViolated(format!(
                "need u1 > u0 * phi, got u0={u0}, u1={u1}"
            )));
        }
        let mut exact = Vec::new();
        let (mut prev, mut next) = (u0 as u128, u1 as u128);
        loop {
            exact.push(if prev == 0 { 0.0 } else { next as f64 / prev as f64 });
            match prev.checked_add(next) {
                Some(sum) => (prev, next) = (next, sum),
                None => break,
            }
        }
        Ok(Self { u0, u1, exact })
    }

    /// The envelope function `h` for this starting pair.
    pub fn envelope_fn(&self) -> FibonacciFn {
        let (u0, u1) = (self.u0 as f64, self.u1 as f64);
        let norm = 1.0 + PHI * PHI;
        let a = (u0 + u1 * PHI) / norm;
        let b = (u0 * PHI - u1) * PHI / norm;
        FibonacciFn {
            a,
            b,
            c: -b * (1.0 + PHI.powi(-2)),
        }
    }

    pub fn envelope(&self) -> ConstantEnvelope<FibonacciFn> {
        ConstantEnvelope {
            func: self.envelope_fn(),
            beta: PHI.powi(-2),
        }
    }
}

impl TermSource for FibonacciRatio {
    fn term(&self, n: u64) -> f64 {
        let last = self.exact.len() as u64 - 1;
        if n <= last {
            return self.exact[n as usize];
        }
        (last..n).fold(self.exact[last as usize], |w, _| 1.0 + 1.0 / w)
    }

    fn describe(&self) -> String {
        format!("Fibonacci ratios from ({}, {})", self.u0, self.u1)
    }
}

/// `h(x) = phi (1 + c / (a/x + b))`, `h(0) = phi`, with `a > 0`, `b < 0`,
/// `c = -b (1 + phi^-2) > 0` and `a + b = u_0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FibonacciFn {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl EnvelopeFn for FibonacciFn {
    fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return PHI;
        }
        let denom = self.a / x + self.b;
        if denom <= 0.0 {
            return f64::INFINITY;
        }
        PHI * (1.0 + self.c / denom)
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        let y = clamp_to_range(y, PHI, self.hi())?;
        if y <= PHI {
            return Ok(0.0);
        }
        let x = self.a / (self.c / (y / PHI - 1.0) - self.b);
        Ok(x.clamp(0.0, 1.0))
    }

    fn lo(&self) -> f64 {
        PHI
    }
}

pub fn fibonacci_solve(u0: u64, u1: u64) -> Result<PeakSolution> {
    fibonacci_solve_with(u0, u1, &SolverConfig::default()).map(|(s, _)| s)
}

/// For `u_0 > 0` the first ratio equals `h(1)`, which bounds every later
/// ratio strictly, so index 0 is the unique maximizer. The equality is checked
/// to `1e-12` before it is relied on; otherwise the generic solver runs.
pub fn fibonacci_solve_with(
    u0: u64,
    u1: u64,
    config: &SolverConfig,
) -> Result<(PeakSolution, Vec<TraceStep>)> {
    let source = FibonacciRatio::new(u0, u1)?;
    let env = source.envelope();
    if u0 > 0 {
        let first = source.term(0);
        let top = env.ceiling(0);
        if (first - top).abs() <= 1e-12 * first {
            let functional = eval_f(0, &source, &env).unwrap_or(UpperBound::Finite(0.0));
            let trace = if config.trace {
                vec![TraceStep {
                    k: 0,
                    term: first,
                    functional: Some(functional),
                    running_k: Some(0),
                }]
            } else {
                Vec::new()
            };
            let solution = PeakSolution {
                sup_value: first,
                argmax_min: 0,
                argmax_max: 0,
                tie: config.tie,
                truncation_index: 0,
                terms_evaluated: 1,
            };
            return Ok((solution, trace));
        }
    }
    solve_traced(&source, &env, config)
}
