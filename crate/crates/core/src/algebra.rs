//! Building and combining envelopes.

use serde::{Deserialize, Serialize};

use crate::envelope::{
    beta_pow, check_beta, clamp_to_range, ConstantEnvelope, Envelope, EnvelopeClass, EnvelopeFn,
    BOUND_RTOL,
};
use crate::error::{PeakError, Result};
use crate::source::TermSource;

/// Default bracket width for [`invert_numeric`].
pub const INVERT_TOL: f64 = 1e-14;

const MAX_BISECTIONS: usize = 200;

/// `x -> slope * x + offset` with `slope > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub slope: f64,
    pub offset: f64,
}

impl Affine {
    pub fn new(slope: f64, offset: f64) -> Result<Self> {
        if !(slope > 0.0 && slope.is_finite()) || !offset.is_finite() {
            return Err(PeakError::InvalidParameter(format!(
                "affine function needs a finite positive slope and finite offset, got ({slope}, {offset})"
            )));
        }
        Ok(Self { slope, offset })
    }
}

impl EnvelopeFn for Affine {
    fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.offset
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        let y = clamp_to_range(y, self.lo(), self.hi())?;
        Ok(((y - self.offset) / self.slope).clamp(0.0, 1.0))
    }

    fn lo(&self) -> f64 {
        self.offset
    }

    fn hi(&self) -> f64 {
        self.slope + self.offset
    }
}

pub fn affine_fn(a: f64, c: f64) -> Result<Affine> {
    Affine::new(a, c)
}

/// Solve `f(x) = y` on `[0, 1]` by bisection for strictly increasing `f`.
pub fn invert_numeric<F: Fn(f64) -> f64 + ?Sized>(f: &F, y: f64, tol: f64) -> Result<f64> {
    let (lo, hi) = (f(0.0), f(1.0));
    let y = clamp_to_range(y, lo, hi)?;
    if y <= lo {
        return Ok(0.0);
    }
    if y >= hi {
        return Ok(1.0);
    }
    let (mut a, mut b) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTIONS {
        if b - a <= tol {
            break;
        }
        let mid = 0.5 * (a + b);
        if f(mid) < y {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// An [`EnvelopeFn`] given only by its forward map; inverted by bisection.
#[derive(Clone)]
pub struct NumericFn<F> {
    f: F,
    tol: f64,
}

impl<F: Fn(f64) -> f64 + Send + Sync> NumericFn<F> {
    pub fn new(f: F) -> Self {
        Self { f, tol: INVERT_TOL }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}

impl<F: Fn(f64) -> f64 + Send + Sync> EnvelopeFn for NumericFn<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn inverse(&self, y: f64) -> Result<f64> {
        invert_numeric(&self.f, y, self.tol)
    }
}

/// Inverse of `min_i f_i`: the largest `f_i^{-1}(y)` over members with
/// `f_i(0) <= y`, counting members that never reach `y` as `1`.
fn lower_inverse(
    n: usize,
    lo: impl Fn(usize) -> f64,
    hi: impl Fn(usize) -> f64,
    inverse: impl Fn(usize, f64) -> Result<f64>,
    y: f64,
) -> Result<f64> {
    let range_lo = (0..n).map(&lo).fold(f64::INFINITY, f64::min);
    let range_hi = (0..n).map(&hi).fold(f64::INFINITY, f64::min);
    let y = clamp_to_range(y, range_lo, range_hi)?;
    let mut best: Option<f64> = None;
    for i in 0..n {
        if lo(i) > y {
            continue;
        }
        let x = if y >= hi(i) { 1.0 } else { inverse(i, y)? };
        best = Some(best.map_or(x, |b| b.max(x)));
    }
    best.ok_or(PeakError::OutOfRange {
        y,
        lo: range_lo,
        hi: range_hi,
    })
}

/// Inverse of `max_i f_i`: the smallest `f_i^{-1}(y)` over members with
/// `y <= f_i(1)`, counting members already above `y` at `0` as `0`.
fn upper_inverse(
    n: usize,
    lo: impl Fn(usize) -> f64,
    hi: impl Fn(usize) -> f64,
    inverse: impl Fn(usize, f64) -> Result<f64>,
    y: f64,
) -> Result<f64> {
    let range_lo = (0..n).map(&lo).fold(f64::NEG_INFINITY, f64::max);
    let range_hi = (0..n).map(&hi).fold(f64::NEG_INFINITY, f64::max);
    let y = clamp_to_range(y, range_lo, range_hi)?;
    let mut best: Option<f64> = None;
    for i in 0..n {
        if y > hi(i) {
            continue;
        }
        let x = if y <= lo(i) { 0.0 } else { inverse(i, y)? };
        best = Some(best.map_or(x, |b| b.min(x)));
    }
    best.ok_or(PeakError::OutOfRange {
        y,
        lo: range_lo,
        hi: range_hi,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Extremum {
    Min,
    Max,
}

/// Pointwise minimum or maximum of a finite family of envelopes, with the
/// largest ratio of the family at every index.
#[derive(Debug, Clone)]
pub struct Pointwise<E> {
    members: Vec<E>,
    which: Extremum,
    class: EnvelopeClass,
}

impl<E> Pointwise<E> {
    pub fn members(&self) -> &[E] {
        &self.members
    }
}

fn combine<E: Envelope>(members: Vec<E>, which: Extremum) -> Result<Pointwise<E>> {
    if members.is_empty() {
        return Err(PeakError::EmptyFamily);
    }
    let classes: Vec<EnvelopeClass> = members.iter().map(|e| e.class()).collect();
    let m = classes.iter().map(|c| c.decreasing_from()).max().unwrap_or(0);
    let c = classes
        .iter()
        .map(|c| c.constant_from())
        .try_fold(0, |acc, c| c.map(|c| acc.max(c)));
    Ok(Pointwise {
        members,
        which,
        class: EnvelopeClass::from_parts(m, c),
    })
}

/// Pointwise minimum of the family. When the members share their ratios the
/// functional never exceeds its value under any member.
pub fn env_min<E: Envelope>(envs: Vec<E>) -> Result<Pointwise<E>> {
    combine(envs, Extremum::Min)
}

/// Pointwise maximum of the family.
pub fn env_max<E: Envelope>(envs: Vec<E>) -> Result<Pointwise<E>> {
    combine(envs, Extremum::Max)
}

impl<E: Envelope> Envelope for Pointwise<E> {
    fn eval(&self, k: u64, x: f64) -> f64 {
        let values = self.members.iter().map(|e| e.eval(k, x));
        match self.which {
            Extremum::Min => values.fold(f64::INFINITY, f64::min),
            Extremum::Max => values.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        let n = self.members.len();
        let lo = |i: usize| self.members[i].floor(k);
        let hi = |i: usize| self.members[i].ceiling(k);
        let inv = |i: usize, y: f64| self.members[i].inverse(k, y);
        match self.which {
            Extremum::Min => lower_inverse(n, lo, hi, inv, y),
            Extremum::Max => upper_inverse(n, lo, hi, inv, y),
        }
    }

    fn beta(&self, k: u64) -> f64 {
        self.members
            .iter()
            .map(|e| e.beta(k))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn class(&self) -> EnvelopeClass {
        self.class
    }
}

/// An eventually decreasing envelope made decreasing from index 0 by replacing
/// `h_0..h_m` with their pointwise maximum and `beta_0..beta_m` with theirs.
#[derive(Debug, Clone)]
pub struct Promoted<E> {
    inner: E,
    m: u64,
    prefix_beta: f64,
    class: EnvelopeClass,
}

pub fn promote_to_decreasing<E: Envelope>(env: E) -> Promoted<E> {
    let class = env.class();
    let m = class.decreasing_from();
    let prefix_beta = (0..=m).map(|k| env.beta(k)).fold(f64::NEG_INFINITY, f64::max);
    let promoted_class = match class.constant_from() {
        _ if m == 0 => class,
        Some(c) => EnvelopeClass::EventuallyConstant {
            m: 0,
            c: c.max(m + 1),
        },
        None => EnvelopeClass::Decreasing,
    };
    Promoted {
        inner: env,
        m,
        prefix_beta,
        class: promoted_class,
    }
}

impl<E> Promoted<E> {
    pub fn into_inner(self) -> E {
        self.inner
    }
}

impl<E: Envelope> Envelope for Promoted<E> {
    fn eval(&self, k: u64, x: f64) -> f64 {
        if k > self.m {
            return self.inner.eval(k, x);
        }
        (0..=self.m)
            .map(|i| self.inner.eval(i, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        if k > self.m {
            return self.inner.inverse(k, y);
        }
        let n = self.m as usize + 1;
        upper_inverse(
            n,
            |i| self.inner.floor(i as u64),
            |i| self.inner.ceiling(i as u64),
            |i, y| self.inner.inverse(i as u64, y),
            y,
        )
    }

    fn beta(&self, k: u64) -> f64 {
        if k > self.m {
            self.inner.beta(k)
        } else {
            self.prefix_beta
        }
    }

    fn class(&self) -> EnvelopeClass {
        self.class
    }
}

/// Parameters of an affine bound `u_k <= a * b^k + c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// Largest secant slope from the greatest maximizer to the later terms up
    /// to the horizon. Negative.
    pub gamma: f64,
}

impl AffineParams {
    /// The constant envelope `(t -> a t + c, b)`.
    pub fn envelope(&self) -> Result<ConstantEnvelope<Affine>> {
        ConstantEnvelope::new(Affine::new(self.a, self.c)?, self.b)
    }
}

/// The affine bound that is tight at the greatest maximizer `k_s`.
///
/// The caller certifies that `k_s` is the greatest maximizer, that `c` lies
/// strictly between the limit superior and the supremum, and that
/// `u_k <= c` for every `k >= horizon`. The bound is checked directly on
/// `0..=horizon`.
pub fn optimal_affine_certificate<S: TermSource + ?Sized>(
    source: &S,
    k_s: u64,
    c: f64,
    horizon: u64,
) -> Result<AffineParams> {
    let peak = source.term(k_s);
    if !(c < peak) {
        return Err(PeakError::InvalidBracket(format!(
            "offset {c} must be below the peak value {peak}"
        )));
    }
    if horizon <= k_s {
        return Err(PeakError::InvalidBracket(format!(
            "horizon {horizon} must exceed the maximizer {k_s}"
        )));
    }
    let gamma = (k_s + 1..=horizon)
        .map(|k| (peak - source.term(k)) / (k_s as f64 - k as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    if !(gamma < 0.0) {
        return Err(PeakError::InvalidBracket(format!(
            "a term after {k_s} reaches the peak value {peak}"
        )));
    }
    let gap = peak - c;
    let b = (gamma / gap).exp();
    let a = gap * (-(k_s as f64) * gamma / gap).exp();
    let params = AffineParams { a, b, c, gamma };
    check_beta(b).map_err(|e| PeakError::InvalidBracket(e.to_string()))?;

    for k in 0..=horizon {
        let u = source.term(k);
        let bound = a * beta_pow(b, k) + c;
        if u > bound + BOUND_RTOL * u.abs().max(1.0) {
            return Err(PeakError::InvalidBracket(format!(
                "term {u} at k={k} exceeds the affine bound {bound}"
            )));
        }
    }
    Ok(params)
}

/// Decreasing envelope built from an affine certificate whose members are not
/// all equal: `h_k(x) = (a + 1/(k+1)) x + min(c + 1/(k+1), (peak + c)/2)` with
/// `beta_k = min(b + 1/(k+1), (b + 1)/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonconstantFamily {
    params: AffineParams,
    peak: f64,
}

impl NonconstantFamily {
    pub fn member(&self, k: u64) -> Affine {
        let inv = 1.0 / (k as f64 + 1.0);
        let offset = (self.params.c + inv).min(0.5 * (self.peak + self.params.c));
        Affine {
            slope: self.params.a + inv,
            offset,
        }
    }
}

pub fn nonconstant_decreasing_family(params: AffineParams, peak: f64) -> Result<NonconstantFamily> {
    if !(peak > params.c) {
        return Err(PeakError::InvalidBracket(format!(
            "peak value {peak} must exceed the offset {}",
            params.c
        )));
    }
    Affine::new(params.a, params.c)?;
    check_beta(params.b)?;
    Ok(NonconstantFamily { params, peak })
}

impl Envelope for NonconstantFamily {
    fn eval(&self, k: u64, x: f64) -> f64 {
        self.member(k).eval(x)
    }

    fn inverse(&self, k: u64, y: f64) -> Result<f64> {
        self.member(k).inverse(y)
    }

    fn beta(&self, k: u64) -> f64 {
        let b = self.params.b;
        (b + 1.0 / (k as f64 + 1.0)).min(0.5 * (b + 1.0))
    }

    fn class(&self) -> EnvelopeClass {
        EnvelopeClass::Decreasing
    }
}
