//! `x_n = a^n / n!`.
//!
//! With `beta = a/(a+1)` and `s_n = (a+1)^n / n!`, every term is exactly
//! `s_n * beta^n`, so `h_n(t) = s_n t` is an equality envelope. It decreases
//! from `n = a`. The constant envelope `g(t) = (a+1)^a t` trades tightness
//! for a single function.

use crate::envelope::{check_beta, clamp_to_range, Envelope, EnvelopeClass};
use crate::error::{PeakError, Result};
use crate::peak::{solve_traced, PeakSolution, SolverConfig, TraceStep};
use crate::source::TermSource;

fn ratio_product(num: f64, n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * (num / i as f64))
}

fn check_a(a: u64) -> Result<()> {
    if a == 0 {
        return Err(PeakError::PreconditionViolated(
            "factorial ratio needs a >= 1".into(),
        ));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FactorialRatio {
    pub a: u64,
}

impl FactorialRatio {
    pub fn new(a: u64) -> Result<Self> {
        check_a(a)?;
        Ok(Self { a })
    }

    pub fn beta(&self) -> f64 {
        self.a as f64 / (self.a + 1) as f64
    }
}

impl TermSource for FactorialRatio {
    fn term(&self, n: u64) -> f64 {
        ratio_product(self.a as f64, n)
    }

    fn describe(&self) -> String {
        format!("{}^n / n!", self.a)
    }
}

/// `h_n(t) = t (a+1)^n / n!` with `beta = a/(a+1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialSequenceEnvelope {
    a: u64,
    beta: f64,
}

impl FactorialSequenceEnvelope {
    pub fn new(a: u64) -> Result<Self> {
        check_a(a)?;
        Self::with_beta(a, a as f64 / (a + 1) as f64)
    }

    /// Same family with a caller-chosen ratio, for tightness experiments.
    pub fn with_beta(a: u64, beta: f64) -> Result<Self> {
        check_a(a)?;
        check_beta(beta)?;
        Ok(Self { a, beta })
    }

    pub fn slope(&self, n: u64) -> f64 {
        ratio_product((self.a + 1) as f64, n)
    }
}

impl Envelope for FactorialSequenceEnvelope {
    fn eval(&self, n: u64, t: f64) -> f64 {
        self.slope(n) * t
    }

    fn inverse(&self, n: u64, y: f64) -> Result<f64> {
        let s = self.slope(n);
        let y = clamp_to_range(y, 0.0, s)?;
        Ok(if y == 0.0 { 0.0 } else { (y / s).min(1.0) })
    }

    fn beta(&self, _n: u64) -> f64 {
        self.beta
    }

    fn class(&self) -> EnvelopeClass {
        EnvelopeClass::EventuallyDecreasing { m: self.a }.normalized()
    }

    fn floor(&self, _n: u64) -> f64 {
        0.0
    }
}

/// `g(t) = t (a+1)^a` with `beta = a/(a+1)` at every index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorialConstantEnvelope {
    slope: f64,
    beta: f64,
}

impl FactorialConstantEnvelope {
    pub fn new(a: u64) -> Result<Self> {
        check_a(a)?;
        Ok(Self {
            slope: ((a + 1) as f64).powi(a as i32),
            beta: a as f64 / (a + 1) as f64,
        })
    }

    pub fn slope(&self) -> f64 {
        self.slope
    }
}

impl Envelope for FactorialConstantEnvelope {
    fn eval(&self, _n: u64, t: f64) -> f64 {
        self.slope * t
    }

    fn inverse(&self, _n: u64, y: f64) -> Result<f64> {
        let y = clamp_to_range(y, 0.0, self.slope)?;
        Ok((y / self.slope).min(1.0))
    }

    fn beta(&self, _n: u64) -> f64 {
        self.beta
    }

    fn class(&self) -> EnvelopeClass {
        EnvelopeClass::Constant
    }

    fn floor(&self, _n: u64) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FactorialChoice {
    #[default]
    Sequence,
    Constant,
}

pub fn factorial_solve(a: u64) -> Result<PeakSolution> {
    factorial_solve_with(a, FactorialChoice::Sequence, &SolverConfig::default()).map(|(s, _)| s)
}

pub fn factorial_solve_with(
    a: u64,
    choice: FactorialChoice,
    config: &SolverConfig,
) -> Result<(PeakSolution, Vec<TraceStep>)> {
    let source = FactorialRatio::new(a)?;
    match choice {
        FactorialChoice::Sequence => solve_traced(&source, &FactorialSequenceEnvelope::new(a)?, config),
        FactorialChoice::Constant => solve_traced(&source, &FactorialConstantEnvelope::new(a)?, config),
    }
}
