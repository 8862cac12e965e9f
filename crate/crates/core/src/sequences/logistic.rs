//! Logistic map `y_{n+1} = r y_n (1 - y_n)` with `0 < r < 1`.
//!
//! From `1/y_{n+1} >= 1/(r y_n) + 1/r` one gets
//! `y_n <= y_0 / (r^-n + n y_0) = h_n(r^n)` with `h_n(t) = y_0 t / (1 + n y_0 t)`.

use crate::envelope::{clamp_to_range, Envelope, EnvelopeClass};
use crate::error::{PeakError, Result};
use crate::peak::{brute_force_peak, eval_f, PeakSolution, SolverConfig, TraceStep};
use crate::source::TermSource;

/// Prefix length of the brute-force cross-check run by [`logistic_solve`].
pub const CROSS_CHECK_PREFIX: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Logistic {
    pub r: f64,
    pub y0: f64,
}

impl Logistic {
    pub fn new(r: f64, y0: f64) -> Result<Self> {
        if (1.0..=4.0).contains(&r) {
            return Err(PeakError::UnsupportedParameter(format!(
                "r = {r}: no useful envelope is available for r in [1, 4]"
            )));
        }
        if !(r > 0.0 && r < 1.0) {
            return Err(PeakError::PreconditionViolated(format!(
                "r must lie in (0, 1), got {r}"
            )));
        }
        if !(y0 > 0.0 && y0 < 1.0) {
            return Err(PeakError::PreconditionViolated(format!(
                "y0 must lie in (0, 1), got {y0}"
            )));
        }
        Ok(Self { r, y0 })
    }

    pub fn envelope(&self) -> LogisticEnvelope {
        LogisticEnvelope {
            y0: self.y0,
            beta: self.r,
        }
    }
}

impl TermSource for Logistic {
    fn term(&self, n: u64) -> f64 {
        (0..n).fold(self.y0, |y, _| self.r * y * (1.0 - y))
    }

    fn describe(&self) -> String {
        format!("logistic map r={} y0={}", self.r, self.y0)
    }
}

/// `h_n(t) = y_0 t / (1 + n y_0 t)`, `beta = r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticEnvelope {
    pub y0: f64,
    pub beta: f64,
}

impl Envelope for LogisticEnvelope {
    fn eval(&self, n: u64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        self.y0 * t / (1.0 + n as f64 * self.y0 * t)
    }

    fn inverse(&self, n: u64, y: f64) -> Result<f64> {
        let y = clamp_to_range(y, 0.0, self.ceiling(n))?;
        if y <= 0.0 {
            return Ok(0.0);
        }
        Ok((y / (self.y0 * (1.0 - n as f64 * y))).clamp(0.0, 1.0))
    }

    fn beta(&self, _n: u64) -> f64 {
        self.beta
    }

    fn class(&self) -> EnvelopeClass {
        EnvelopeClass::Decreasing
    }

    fn floor(&self, _n: u64) -> f64 {
        0.0
    }
}

pub fn logistic_solve(r: f64, y0: f64) -> Result<PeakSolution> {
    logistic_solve_with(r, y0, &SolverConfig::default()).map(|(s, _)| s)
}

/// `y_0 = h_0(1)` bounds every later term strictly, so index 0 is the unique
/// maximizer. The answer is confirmed against a brute-force scan.
pub fn logistic_solve_with(
    r: f64,
    y0: f64,
    config: &SolverConfig,
) -> Result<(PeakSolution, Vec<TraceStep>)> {
    let source = Logistic::new(r, y0)?;
    let env = source.envelope();
    let functional = eval_f(0, &source, &env)?;

    let brute = brute_force_peak(&source, CROSS_CHECK_PREFIX);
    if brute.max != y0 || brute.argmax_min != 0 || brute.argmax_max != 0 {
        return Err(PeakError::CrossCheckFailed(format!(
            "prefix maximum {} at {} differs from y0 = {y0} at 0",
            brute.max, brute.argmax_min
        )));
    }

    let trace = if config.trace {
        vec![TraceStep {
            k: 0,
            term: y0,
            functional: Some(functional),
            running_k: Some(0),
        }]
    } else {
        Vec::new()
    };
    let solution = PeakSolution {
        sup_value: y0,
        argmax_min: 0,
        argmax_max: 0,
        tie: config.tie,
        truncation_index: 0,
        terms_evaluated: 1,
    };
    Ok((solution, trace))
}
