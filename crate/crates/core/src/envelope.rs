//! Upper-bound envelopes.
//!
//! An envelope is a pair `(h, beta)`: a family of strictly increasing
//! continuous functions `h_k` on `[0, 1]` together with ratios
//! `beta_k in (0, 1)`, such that every term of the analyzed sequence obeys
//! `u_k <= h_k(beta_k^k)`. The [`EnvelopeClass`] records from which index the
//! family is pointwise decreasing (and possibly constant); the solvers rely on
//! that metadata to know when a truncation index is certified.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{PeakError, Result};
use crate::source::TermSource;

/// Relative slack used when comparing a term against its certified bound.
pub const BOUND_RTOL: f64 = 1e-12;

/// A strictly increasing continuous function on `[0, 1]` with an inverse on
/// `[eval(0), eval(1)]`.
pub trait EnvelopeFn: Send + Sync {
    fn eval(&self, x: f64) -> f64;

    /// Inverse on `[lo(), hi()]`. Values outside the range by more than a
    /// `1e-12` relative slack are rejected with [`PeakError::OutOfRange`].
    fn inverse(&self, y: f64) -> Result<f64>;

    fn lo(&self) -> f64 {
        self.eval(0.0)
    }

    fn hi(&self) -> f64 {
        self.eval(1.0)
    }
}

impl<F: EnvelopeFn + ?Sized> EnvelopeFn for Arc<F> {
    fn eval(&self, x: f64) -> f64 {
        (**self).eval(x)
    }
    fn inverse(&self, y: f64) -> Result<f64> {
        (**self).inverse(y)
    }
    fn lo(&self) -> f64 {
        (**self).lo()
    }
    fn hi(&self) -> f64 {
        (**self).hi()
    }
}

/// Monotonicity class of an envelope.
///
/// `Constant` is `EventuallyConstant { m: 0, c: 0 }` and `Decreasing` is
/// `EventuallyDecreasing { m: 0 }`; [`EnvelopeClass::normalized`] maps the
/// general variants back to the short forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EnvelopeClass {
    Constant,
    Decreasing,
    EventuallyDecreasing { m: u64 },
    EventuallyConstant { m: u64, c: u64 },
}

impl EnvelopeClass {
    /// Smallest index from which `h` and `beta` are decreasing.
    pub fn decreasing_from(self) -> u64 {
        match self {
            EnvelopeClass::Constant | EnvelopeClass::Decreasing => 0,
            EnvelopeClass::EventuallyDecreasing { m } => m,
            EnvelopeClass::EventuallyConstant { m, .. } => m,
        }
    }

    /// Smallest index from which the pair is constant, if it ever is.
    pub fn constant_from(self) -> Option<u64> {
        match self {
            EnvelopeClass::Constant => Some(0),
            EnvelopeClass::EventuallyConstant { c, .. } => Some(c),
            _ => None,
        }
    }

    pub fn normalized(self) -> Self {
        match self {
            EnvelopeClass::EventuallyDecreasing { m: 0 } => EnvelopeClass::Decreasing,
            EnvelopeClass::EventuallyConstant { m: 0, c: 0 } => EnvelopeClass::Constant,
            other => other,
        }
    }

    pub(crate) fn from_parts(m: u64, c: Option<u64>) -> Self {
        match c {
            Some(c) => EnvelopeClass::EventuallyConstant { m, c: c.max(m) },
            None => EnvelopeClass::EventuallyDecreasing { m },
        }
        .normalized()
    }
}

/// An indexed family `(h_k, beta_k)` with its monotonicity class.
pub trait Envelope: Send + Sync {
    /// `h_k(x)`.
    fn eval(&self, k: u64, x: f64) -> f64;

    /// `h_k^{-1}(y)` on `[h_k(0), h_k(1)]`.
    fn inverse(&self, k: u64, y: f64) -> Result<f64>;

    fn beta(&self, k: u64) -> f64;

    fn class(&self) -> EnvelopeClass;

    /// `h_k(0)`; terms strictly above it are useful.
    fn floor(&self, k: u64) -> f64 {
        self.eval(k, 0.0)
    }

    /// `h_k(1)`.
    fn ceiling(&self, k: u64) -> f64 {
        self.eval(k, 1.0)
    }

    /// The certified bound `h_k(beta_k^k)`.
    fn bound(&self, k: u64) -> f64 {
        self.eval(k, beta_pow(self.beta(k), k))
    }
}

impl<E: Envelope + ?Sized> Envelope for Arc<E> {
    fn eval(&self, k: u64, x: f64) -> f64 {
        (**self).eval(k, x)
    }
    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        (**self).inverse(k, y)
    }
    fn beta(&self, k: u64) -> f64 {
        (**self).beta(k)
    }
    fn class(&self) -> EnvelopeClass {
        (**self).class()
    }
    fn floor(&self, k: u64) -> f64 {
        (**self).floor(k)
    }
    fn ceiling(&self, k: u64) -> f64 {
        (**self).ceiling(k)
    }
    fn bound(&self, k: u64) -> f64 {
        (**self).bound(k)
    }
}

impl<E: Envelope + ?Sized> Envelope for &E {
    fn eval(&self, k: u64, x: f64) -> f64 {
        (**self).eval(k, x)
    }
    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        (**self).inverse(k, y)
    }
    fn beta(&self, k: u64) -> f64 {
        (**self).beta(k)
    }
    fn class(&self) -> EnvelopeClass {
        (**self).class()
    }
    fn floor(&self, k: u64) -> f64 {
        (**self).floor(k)
    }
    fn ceiling(&self, k: u64) -> f64 {
        (**self).ceiling(k)
    }
    fn bound(&self, k: u64) -> f64 {
        (**self).bound(k)
    }
}

/// `beta^j` for a 64-bit exponent.
pub fn beta_pow(beta: f64, j: u64) -> f64 {
    if j <= i32::MAX as u64 {
        beta.powi(j as i32)
    } else {
        beta.powf(j as f64)
    }
}

/// A constant pair `(g, gamma)` used at every index.
#[derive(Debug, Clone)]
pub struct ConstantEnvelope<F> {
    pub func: F,
    pub beta: f64,
}

impl<F: EnvelopeFn> ConstantEnvelope<F> {
    pub fn new(func: F, beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(Self { func, beta })
    }
}

impl<F: EnvelopeFn> Envelope for ConstantEnvelope<F> {
    fn eval(&self, _k: u64, x: f64) -> f64 {
        self.func.eval(x)
    }
    fn inverse(&self, _k: u64, y: f64) -> Result<f64> {
        self.func.inverse(y)
    }
    fn beta(&self, _k: u64) -> f64 {
        self.beta
    }
    fn class(&self) -> EnvelopeClass {
        EnvelopeClass::Constant
    }
}

/// An envelope assembled from index-dependent closures.
pub struct FamilyEnvelope<H, B> {
    family: H,
    beta: B,
    class: EnvelopeClass,
}

impl<H, B, F> FamilyEnvelope<H, B>
where
    H: Fn(u64) -> F + Send + Sync,
    B: Fn(u64) -> f64 + Send + Sync,
    F: EnvelopeFn,
{
    pub fn new(family: H, beta: B, class: EnvelopeClass) -> Self {
        Self {
            family,
            beta,
            class: class.normalized(),
        }
    }
}

impl<H, B, F> Envelope for FamilyEnvelope<H, B>
where
    H: Fn(u64) -> F + Send + Sync,
    B: Fn(u64) -> f64 + Send + Sync,
    F: EnvelopeFn,
{
    fn eval(&self, k: u64, x: f64) -> f64 {
        (self.family)(k).eval(x)
    }
    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        (self.family)(k).inverse(y)
    }
    fn beta(&self, k: u64) -> f64 {
        (self.beta)(k)
    }
    fn class(&self) -> EnvelopeClass {
        self.class
    }
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(PeakError::InvalidParameter(format!(
            "beta must lie in (0, 1), got {beta}"
        )))
    }
}

/// Reject `y` outside `[lo, hi]` beyond the relative slack, otherwise clamp.
pub(crate) fn clamp_to_range(y: f64, lo: f64, hi: f64) -> Result<f64> {
    let slack = BOUND_RTOL * y.abs().max(1.0);
    if y.is_nan() || y < lo - slack || y > hi + slack {
        return Err(PeakError::OutOfRange { y, lo, hi });
    }
    Ok(y.clamp(lo, hi))
}

/// One failed check found by [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `u_k > h_k(beta_k^k)` beyond the relative slack.
    Bound { k: u64, term: f64, bound: f64 },
    /// `beta_k` outside `(0, 1)`.
    Ratio { k: u64, beta: f64 },
    /// `h_k` not strictly increasing on the sample grid.
    NotIncreasing { k: u64 },
    /// `h_k^{-1}(h_k(x))` differs from `x` by more than `1e-10` on the grid.
    BadInverse { k: u64 },
    /// `h_{k+1} > h_k` or `beta_{k+1} > beta_k` past the decreasing-from index.
    NotDecreasing { k: u64 },
    /// `(h_k, beta_k)` differs from `(h_c, beta_c)` past the constant-from index.
    NotConstant { k: u64 },
}

impl Violation {
    pub fn index(&self) -> u64 {
        match *self {
            Violation::Bound { k, .. }
            | Violation::Ratio { k, .. }
            | Violation::NotIncreasing { k }
            | Violation::BadInverse { k }
            | Violation::NotDecreasing { k }
            | Violation::NotConstant { k } => k,
        }
    }
}

const GRID: usize = 32;
const INVERSE_TOL: f64 = 1e-10;

/// Finite-horizon check of the envelope inequality and the class metadata on
/// `0..=horizon`. Violations are returned sorted by index.
pub fn validate<S, E>(source: &S, env: &E, horizon: u64) -> Vec<Violation>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    let class = env.class();
    let m = class.decreasing_from();
    let c = class.constant_from();
    let grid: Vec<f64> = (0..=GRID).map(|i| i as f64 / GRID as f64).collect();
    let mut out = Vec::new();

    for k in 0..=horizon {
        let beta = env.beta(k);
        if !(beta > 0.0 && beta < 1.0) {
            out.push(Violation::Ratio { k, beta });
            continue;
        }
        let term = source.term(k);
        let bound = env.bound(k);
        if term > bound + BOUND_RTOL * term.abs().max(1.0) {
            out.push(Violation::Bound { k, term, bound });
        }
        let values: Vec<f64> = grid.iter().map(|&x| env.eval(k, x)).collect();
        if values.windows(2).any(|w| !(w[0] < w[1])) {
            out.push(Violation::NotIncreasing { k });
        }
        let roundtrip_fails = grid.iter().zip(&values).any(|(&x, &y)| {
            y.is_finite()
                && env
                    .inverse(k, y)
                    .map_or(true, |back| (back - x).abs() > INVERSE_TOL)
        });
        if roundtrip_fails {
            out.push(Violation::BadInverse { k });
        }
        if k >= m && k < horizon {
            let next_beta = env.beta(k + 1);
            let grows = grid.iter().zip(&values).any(|(&x, &hk)| {
                env.eval(k + 1, x) > hk + BOUND_RTOL * hk.abs().max(1.0)
            });
            if grows || next_beta > beta {
                out.push(Violation::NotDecreasing { k });
            }
        }
        if let Some(c) = c {
            if k > c {
                let same = env.beta(c) == beta
                    && grid
                        .iter()
                        .zip(&values)
                        .all(|(&x, &hk)| env.eval(c, x) == hk);
                if !same {
                    out.push(Violation::NotConstant { k });
                }
            }
        }
    }
    out
}
