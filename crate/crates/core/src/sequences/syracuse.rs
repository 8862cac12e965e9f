//! Accelerated Syracuse iteration: `y -> y/2` for even `y`, `y -> (3y+1)/2`
//! for odd `y`. Once a trajectory hits 1 it cycles through `1, 2, 1, ...`.

use serde::{Deserialize, Serialize};

use crate::envelope::{beta_pow, check_beta};
use crate::error::{PeakError, Result};
use crate::source::TermSource;

/// One step, or `None` if `3y + 1` leaves the 128-bit range.
pub fn syracuse_step(y: u128) -> Option<u128> {
    if y.is_multiple_of(2) {
        Some(y / 2)
    } else {
        y.checked_mul(3)?.checked_add(1).map(|v| v / 2)
    }
}

fn check_start(n0: u128) -> Result<()> {
    if n0 == 0 {
        return Err(PeakError::PreconditionViolated(
            "starting value must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Trajectory from `n0` as a [`TermSource`]. Terms that overflow are `NaN`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyracuseSource {
    pub n0: u128,
}

impl SyracuseSource {
    pub fn new(n0: u128) -> Result<Self> {
        check_start(n0)?;
        Ok(Self { n0 })
    }
}

impl TermSource for SyracuseSource {
    fn term(&self, k: u64) -> f64 {
        let mut y = self.n0;
        for i in 0..k {
            if y == 1 || y == 2 {
                let odd_remaining = (k - i) % 2 == 1;
                return if odd_remaining == (y == 1) { 2.0 } else { 1.0 };
            }
            match syracuse_step(y) {
                Some(next) => y = next,
                None => return f64::NAN,
            }
        }
        y as f64
    }

    fn describe(&self) -> String {
        format!("Syracuse trajectory from {}", self.n0)
    }
}

/// Largest value of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Excursion {
    pub max: u128,
    pub argmax_min: u64,
    pub reached_cycle: bool,
    /// Index at which 1 was reached, or the number of steps taken.
    pub steps: u64,
}

/// Iterate from `n0` until 1 is reached or `max_steps` steps were taken.
///
/// The term following the first 1, which is 2, is part of the excursion.
pub fn syracuse_excursion(n0: u128, max_steps: u64) -> Result<Excursion> {
    check_start(n0)?;
    let mut y = n0;
    let mut k = 0u64;
    let mut best = (n0, 0u64);
    loop {
        if y == 1 {
            if best.0 < 2 {
                best = (2, k + 1);
            }
            return Ok(Excursion {
                max: best.0,
                argmax_min: best.1,
                reached_cycle: true,
                steps: k,
            });
        }
        if k == max_steps {
            return Ok(Excursion {
                max: best.0,
                argmax_min: best.1,
                reached_cycle: false,
                steps: k,
            });
        }
        y = syracuse_step(y).ok_or(PeakError::Overflow { step: k + 1 })?;
        k += 1;
        if y > best.0 {
            best = (y, k);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "k", rename_all = "snake_case")]
pub enum CollatzCheck {
    /// No violation up to the horizon. Says nothing about later indices.
    Consistent,
    ViolatedAt(u64),
}

/// First `n <= horizon` with `y_n > a b^n + c`, if any.
pub fn collatz_envelope_check(n0: u128, a: f64, b: f64, c: f64, horizon: u64) -> Result<CollatzCheck> {
    check_start(n0)?;
    if !(a >= 0.0 && a.is_finite()) {
        return Err(PeakError::PreconditionViolated(format!(
            "scale a must be nonnegative, got {a}"
        )));
    }
    check_beta(b).map_err(|e| PeakError::PreconditionViolated(e.to_string()))?;
    if !(c > 4.0 && c <= 5.0) {
        return Err(PeakError::PreconditionViolated(format!(
            "offset c must lie in (4, 5], got {c}"
        )));
    }
    let mut y = n0;
    for n in 0..=horizon {
        if y as f64 > a * beta_pow(b, n) + c {
            return Ok(CollatzCheck::ViolatedAt(n));
        }
        if n < horizon {
            y = syracuse_step(y).ok_or(PeakError::Overflow { step: n + 1 })?;
        }
    }
    Ok(CollatzCheck::Consistent)
}
