//! The upper-bound functional and the truncation solvers.
//!
//! For an index `k` with `u_k > h_k(0)` the functional is
//! `F(k) = ln(h_k^{-1}(u_k)) / ln(beta_k)`. Once `k` is past the index from
//! which the envelope decreases, `floor(F(k))` bounds the greatest maximizer of
//! the sequence, so the supremum is attained within `u_0..=u_floor(F(k))`.
//! [`solve`] scans the sequence, tightening that truncation index as it goes,
//! and stops as soon as the scan passes it.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::envelope::{beta_pow, Envelope, BOUND_RTOL};
use crate::error::{PeakError, Result};
use crate::source::TermSource;

/// Added to `F` before flooring. Only ever enlarges the truncation index.
pub const FLOOR_GUARD: f64 = 1e-9;

/// Default cap on how far past the decreasing-from index the solver looks for
/// a useful term before giving up.
pub const DEFAULT_SCAN_LIMIT: u64 = 10_000_000;

/// Value of the upper-bound functional: a nonnegative real or `+inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UpperBound {
    Finite(f64),
    Infinite,
}

impl UpperBound {
    pub fn finite(self) -> Option<f64> {
        match self {
            UpperBound::Finite(v) => Some(v),
            UpperBound::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, UpperBound::Finite(_))
    }

    /// `floor(F + FLOOR_GUARD)`, or `None` for `+inf`.
    pub fn truncation(self) -> Option<u64> {
        self.finite().map(|v| (v + FLOOR_GUARD).floor() as u64)
    }
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UpperBound::Finite(v) => write!(f, "{v}"),
            UpperBound::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for UpperBound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            UpperBound::Finite(v) => serializer.serialize_f64(*v),
            UpperBound::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for UpperBound {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Num(v) => Ok(UpperBound::Finite(v)),
            Repr::Text(s) if s == "inf" => Ok(UpperBound::Infinite),
            Repr::Text(s) => Err(serde::de::Error::custom(format!(
                "expected a number or \"inf\", got {s:?}"
            ))),
        }
    }
}

/// Which maximizer to report when several indices attain the supremum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    MinArgmax,
    MaxArgmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverConfig {
    pub tie: TieRule,
    pub scan_limit: u64,
    pub trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tie: TieRule::MinArgmax,
            scan_limit: DEFAULT_SCAN_LIMIT,
            trace: false,
        }
    }
}

impl SolverConfig {
    pub fn with_tie(mut self, tie: TieRule) -> Self {
        self.tie = tie;
        self
    }

    pub fn with_scan_limit(mut self, scan_limit: u64) -> Self {
        self.scan_limit = scan_limit;
        self
    }

    pub fn with_trace(mut self, trace: bool) -> Self {
        self.trace = trace;
        self
    }
}

/// Result of a solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeakSolution {
    pub sup_value: f64,
    /// First index attaining `sup_value`.
    pub argmax_min: u64,
    /// Last index attaining `sup_value`; this is the greatest maximizer of the
    /// whole sequence because nothing past the truncation index can tie.
    pub argmax_max: u64,
    pub tie: TieRule,
    /// Final truncation index `K`.
    pub truncation_index: u64,
    pub terms_evaluated: u64,
}

impl PeakSolution {
    /// The maximizer selected by the tie rule.
    pub fn argmax(&self) -> u64 {
        match self.tie {
            TieRule::MinArgmax => self.argmax_min,
            TieRule::MaxArgmax => self.argmax_max,
        }
    }
}

/// One solver iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub k: u64,
    pub term: f64,
    /// `None` when the functional was not evaluated at `k`.
    pub functional: Option<UpperBound>,
    pub running_k: Option<u64>,
}

/// `F(k)` for the term `u_k` of `source`.
pub fn eval_f<S, E>(k: u64, source: &S, env: &E) -> Result<UpperBound>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    functional_at(k, checked_term(source, k)?, env)
}

/// `floor(F(k) + 1e-9)`, or `None` when `F(k)` is infinite.
pub fn truncation_from<S, E>(k: u64, source: &S, env: &E) -> Result<Option<u64>>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    Ok(eval_f(k, source, env)?.truncation())
}

/// Smallest `j <= limit` with `h_k(beta_k^j) < u_k`, found by direct search.
///
/// Uses only forward evaluations of `h_k`, so it serves as an independent
/// check of `floor(F(k)) + 1`. Values within a `1e-12` relative slack of
/// `u_k` count as equal.
pub fn stopping_index<S, E>(k: u64, source: &S, env: &E, limit: u64) -> Option<u64>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    let term = source.term(k);
    let beta = env.beta(k);
    let slack = BOUND_RTOL * term.abs();
    (0..=limit).find(|&j| env.eval(k, beta_pow(beta, j)) < term - slack)
}

pub(crate) fn checked_term<S: TermSource + ?Sized>(source: &S, k: u64) -> Result<f64> {
    let term = source.term(k);
    if term.is_finite() {
        Ok(term)
    } else {
        Err(PeakError::NonFiniteTerm { k })
    }
}

pub(crate) fn functional_at<E: Envelope + ?Sized>(k: u64, term: f64, env: &E) -> Result<UpperBound> {
    if !(term > env.floor(k)) {
        return Ok(UpperBound::Infinite);
    }
    let beta = env.beta(k);
    let bound = env.eval(k, beta_pow(beta, k));
    if term > bound + BOUND_RTOL * term.abs().max(1.0) {
        return Err(PeakError::EnvelopeViolation { k, term, bound });
    }
    let x = env.inverse(k, term.min(bound))?.min(1.0);
    if !(x > 0.0) {
        return Ok(UpperBound::Infinite);
    }
    // Clamped below by k, which u_k <= h_k(beta_k^k) guarantees.
    Ok(UpperBound::Finite((x.ln() / beta.ln()).max(k as f64)))
}

/// Compute the supremum and a maximizer of `source` using `env`.
///
/// The loop follows the envelope class:
/// * below the decreasing-from index `m` terms are only compared;
/// * from `m` on, every useful index tightens `K = min(K, floor(F(k)))`;
/// * once the pair is constant, `F` depends on `u_k` alone, so it is only
///   re-evaluated when a useful term beats every earlier useful term of the
///   constant stretch.
///
/// The scan stops at `k = K + 1`.
pub fn solve<S, E>(source: &S, env: &E, config: &SolverConfig) -> Result<PeakSolution>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    run(source, env, config, None)
}

/// [`solve`] that also records one [`TraceStep`] per evaluated term.
pub fn solve_traced<S, E>(
    source: &S,
    env: &E,
    config: &SolverConfig,
) -> Result<(PeakSolution, Vec<TraceStep>)>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    let mut trace = Vec::new();
    let solution = run(source, env, config, Some(&mut trace))?;
    Ok((solution, trace))
}

fn run<S, E>(
    source: &S,
    env: &E,
    config: &SolverConfig,
    mut trace: Option<&mut Vec<TraceStep>>,
) -> Result<PeakSolution>
where
    S: TermSource + ?Sized,
    E: Envelope + ?Sized,
{
    let class = env.class();
    let m = class.decreasing_from();
    let c = class.constant_from();

    let mut k: u64 = 0;
    let mut bound_k: Option<u64> = None;
    let mut vmax = f64::NEG_INFINITY;
    let mut first = 0;
    let mut last = 0;
    let mut best_constant = f64::NEG_INFINITY;

    loop {
        match bound_k {
            Some(kk) if k > kk => break,
            None if k > m && k - m > config.scan_limit => {
                return Err(PeakError::NoUsefulIndex {
                    from: m,
                    scan_limit: config.scan_limit,
                })
            }
            _ => {}
        }

        let term = checked_term(source, k)?;
        if term > vmax {
            vmax = term;
            first = k;
            last = k;
        } else if term == vmax {
            last = k;
        }

        let mut functional = None;
        if k >= m && term > env.floor(k) {
            let refresh = match c {
                Some(c) if k >= c => {
                    let better = term > best_constant || bound_k.is_none();
                    best_constant = best_constant.max(term);
                    better
                }
                _ => true,
            };
            if refresh {
                let value = functional_at(k, term, env)?;
                if let Some(t) = value.truncation() {
                    bound_k = Some(bound_k.map_or(t, |kk| kk.min(t)));
                }
                functional = Some(value);
            }
        }

        if let Some(steps) = trace.as_deref_mut() {
            steps.push(TraceStep {
                k,
                term,
                functional,
                running_k: bound_k,
            });
        }
        k += 1;
    }

    let truncation_index = bound_k.expect("loop only exits once K is set");
    Ok(PeakSolution {
        sup_value: vmax,
        argmax_min: first,
        argmax_max: last,
        tie: config.tie,
        truncation_index,
        terms_evaluated: k,
    })
}

/// Exhaustive maximum over `u_0..=u_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BruteForcePeak {
    pub max: f64,
    pub argmax_min: u64,
    pub argmax_max: u64,
}

pub fn brute_force_peak<S: TermSource + ?Sized>(source: &S, n: u64) -> BruteForcePeak {
    let mut best = BruteForcePeak {
        max: source.term(0),
        argmax_min: 0,
        argmax_max: 0,
    };
    for k in 1..=n {
        let v = source.term(k);
        if v > best.max {
            best = BruteForcePeak {
                max: v,
                argmax_min: k,
                argmax_max: k,
            };
        } else if v == best.max {
            best.argmax_max = k;
        }
    }
    best
}

/// Index sets of a finite prefix, with the tail supremum replaced by a
/// caller-certified bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixIndexSets {
    /// `{k <= n : max_{j<=k} u_j >= sup_{j>k} u_j}`
    pub delta: Vec<u64>,
    /// `{k <= n : max_{j<=k} u_j > sup_{j>k} u_j}`
    pub delta_strict: Vec<u64>,
    /// Smallest maximizer, `min delta`.
    pub k_min: Option<u64>,
    /// Greatest maximizer, `min delta_strict`.
    pub k_max: Option<u64>,
}

/// Requires `sup_{j>n} u_j <= tail_bound`.
pub fn prefix_index_sets<S: TermSource + ?Sized>(
    source: &S,
    n: u64,
    tail_bound: f64,
) -> Result<PrefixIndexSets> {
    let values: Vec<f64> = (0..=n).map(|k| source.term(k)).collect();
    let len = values.len();

    let mut after = vec![tail_bound; len];
    for i in (0..len - 1).rev() {
        after[i] = after[i + 1].max(values[i + 1]);
    }

    let mut delta = Vec::new();
    let mut delta_strict = Vec::new();
    let mut running = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        running = running.max(v);
        if running >= after[i] {
            delta.push(i as u64);
        }
        if running > after[i] {
            delta_strict.push(i as u64);
        }
    }

    if delta.is_empty() && delta_strict.is_empty() {
        return Err(PeakError::InvalidTailBound { tail_bound });
    }
    Ok(PrefixIndexSets {
        k_min: delta.first().copied(),
        k_max: delta_strict.first().copied(),
        delta,
        delta_strict,
    })
}
