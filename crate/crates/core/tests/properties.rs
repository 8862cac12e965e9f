use std::sync::Arc;

use peakseq::algebra::{invert_numeric, NumericFn, INVERT_TOL};
use peakseq::linsys::{
    a_lambda, a_lambda_beta, a_lambda_norm_sq, default_q, op_norm_sq, p_q, spectral_norm_sq_power,
    sym_eig_bounds, ALambdaNormSource, Matrix,
};
use peakseq::sequences::{
    FactorialConstantEnvelope, FactorialRatio, FactorialSequenceEnvelope, FibonacciRatio, Logistic,
};
use peakseq::*;
use proptest::prelude::*;

const PHI: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone)]
enum Case {
    Factorial { a: u64 },
    FactorialConstant { a: u64 },
    FactorialPromoted { a: u64 },
    Fibonacci { u0: u64, u1: u64 },
    Logistic { r: f64, y0: f64 },
    Linsys { lambda: f64 },
}

type Built = (Arc<dyn TermSource>, Arc<dyn Envelope>);

fn build(case: &Case) -> Built {
    match *case {
        Case::Factorial { a } => (
            Arc::new(FactorialRatio::new(a).unwrap()),
            Arc::new(FactorialSequenceEnvelope::new(a).unwrap()),
        ),
        Case::FactorialConstant { a } => (
            Arc::new(FactorialRatio::new(a).unwrap()),
            Arc::new(FactorialConstantEnvelope::new(a).unwrap()),
        ),
        Case::FactorialPromoted { a } => (
            Arc::new(FactorialRatio::new(a).unwrap()),
            Arc::new(promote_to_decreasing(FactorialSequenceEnvelope::new(a).unwrap())),
        ),
        Case::Fibonacci { u0, u1 } => {
            let src = FibonacciRatio::new(u0, u1).unwrap();
            let env = src.envelope();
            (Arc::new(src), Arc::new(env))
        }
        Case::Logistic { r, y0 } => {
            let src = Logistic::new(r, y0).unwrap();
            let env = src.envelope();
            (Arc::new(src), Arc::new(env))
        }
        Case::Linsys { lambda } => {
            let q = default_q(lambda);
            let env = ConstantEnvelope::new(affine_fn(q, 0.0).unwrap(), a_lambda_beta(lambda, q))
                .unwrap();
            (Arc::new(ALambdaNormSource { lambda }), Arc::new(env))
        }
    }
}

fn golden_successor(u0: u64) -> u64 {
    (u0 as f64 * PHI).floor() as u64 + 1
}

fn any_case() -> impl Strategy<Value = Case> {
    prop_oneof![
        (1u64..=20).prop_map(|a| Case::Factorial { a }),
        (1u64..=12).prop_map(|a| Case::FactorialConstant { a }),
        (1u64..=20).prop_map(|a| Case::FactorialPromoted { a }),
        (0u64..500, 0u64..500).prop_map(|(u0, extra)| Case::Fibonacci {
            u0,
            u1: golden_successor(u0) + extra,
        }),
        (0.05f64..0.95, 0.05f64..0.95).prop_map(|(r, y0)| Case::Logistic { r, y0 }),
        (0.1f64..0.95).prop_map(|lambda| Case::Linsys { lambda }),
    ]
}

fn useful(src: &dyn TermSource, env: &dyn Envelope, k: u64) -> bool {
    src.term(k) > env.floor(k)
}

/// The gap `u_k - h_k(0)` is resolvable in double precision.
fn well_conditioned(src: &dyn TermSource, env: &dyn Envelope, k: u64) -> bool {
    let u = src.term(k);
    u - env.floor(k) > 1e-6 * u.abs().max(1.0)
}

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(256)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn functional_lower_bound_and_floor_identity(case in any_case(), k in 0u64..40) {
        let (src, env) = build(&case);
        prop_assume!(well_conditioned(&*src, &*env, k));
        let u = src.term(k);
        let beta = env.beta(k);
        let raw = env.inverse(k, u.min(env.bound(k))).unwrap().ln() / beta.ln();
        prop_assert!(raw >= k as f64 - 1e-9, "F={} < k={}", raw, k);
        let f = eval_f(k, &*src, &*env).unwrap().finite().unwrap();
        prop_assert!((f - raw.max(k as f64)).abs() <= 1e-12 * f.max(1.0));
        let t = truncation_from(k, &*src, &*env).unwrap().unwrap();
        prop_assert_eq!(stopping_index(k, &*src, &*env, t + 5), Some(t + 1));
    }

    #[test]
    fn strict_dominance_past_truncation(case in any_case(), k in 0u64..40) {
        let (src, env) = build(&case);
        prop_assume!(k >= env.class().decreasing_from() && well_conditioned(&*src, &*env, k));
        let t = truncation_from(k, &*src, &*env).unwrap().unwrap();
        let uk = src.term(k);
        for j in t + 1..=t + 50 {
            prop_assert!(src.term(j) < uk, "u_{} = {} >= u_{} = {}", j, src.term(j), k, uk);
        }
    }

    #[test]
    fn truncation_bounds_greatest_maximizer(case in any_case()) {
        let (src, env) = build(&case);
        let sol = solve(&*src, &*env, &SolverConfig::default()).unwrap();
        let m = env.class().decreasing_from();
        let n = (2 * sol.truncation_index + 10).max(m);
        let tail = env.bound(n + 1).max(0.0);
        prop_assume!(tail < sol.sup_value);
        let sets = prefix_index_sets(&*src, n, tail).unwrap();
        let k_s = sets.k_max.unwrap();
        for j in m..=n {
            if let Some(t) = truncation_from(j, &*src, &*env).unwrap() {
                prop_assert!(t >= k_s, "truncation {} at j={} below greatest maximizer {}", t, j, k_s);
            }
        }
    }

    #[test]
    fn functional_monotone_along_dominated_indices(case in any_case()) {
        let (src, env) = build(&case);
        let m = env.class().decreasing_from();
        let scanned: Vec<(u64, f64, f64)> = (m..m + 40)
            .filter(|&k| well_conditioned(&*src, &*env, k))
            .map(|k| (k, src.term(k), eval_f(k, &*src, &*env).unwrap().finite().unwrap()))
            .collect();
        for (i, &(j, uj, fj)) in scanned.iter().enumerate() {
            for &(k, uk, fk) in &scanned[i..] {
                if uj <= uk {
                    prop_assert!(fk <= fj + 1e-9, "F({})={} > F({})={}", k, fk, j, fj);
                }
            }
        }
    }

    #[test]
    fn solver_agrees_with_brute_force(case in any_case()) {
        let (src, env) = build(&case);
        let sol = solve(&*src, &*env, &SolverConfig::default()).unwrap();
        let brute = brute_force_peak(&*src, 2 * sol.truncation_index + 10);
        prop_assert!((sol.sup_value - brute.max).abs() <= 1e-12 * brute.max.abs());
        prop_assert_eq!(sol.argmax_min, brute.argmax_min);
        prop_assert_eq!(sol.sup_value, src.term(sol.argmax_min));
        prop_assert!(sol.argmax_min <= sol.truncation_index);
        let max_rule = solve(&*src, &*env, &SolverConfig::default().with_tie(TieRule::MaxArgmax)).unwrap();
        prop_assert_eq!(max_rule.argmax(), brute.argmax_max);
    }

    #[test]
    fn constant_envelope_minimum_at_greatest_maximizer(case in any_case()) {
        let (src, env) = build(&case);
        prop_assume!(env.class().constant_from() == Some(0));
        let sol = solve(&*src, &*env, &SolverConfig::default().with_tie(TieRule::MaxArgmax)).unwrap();
        let k_s = sol.argmax_max;
        let at_peak = eval_f(k_s, &*src, &*env).unwrap().finite().unwrap();
        for k in 0..=2 * sol.truncation_index + 10 {
            if let Some(f) = eval_f(k, &*src, &*env).unwrap().finite() {
                prop_assert!(f >= at_peak - 1e-9, "F({})={} below F(K^s={})={}", k, f, k_s, at_peak);
            }
        }
    }

    #[test]
    fn prefix_sets_structure(case in any_case()) {
        let (src, env) = build(&case);
        let sol = solve(&*src, &*env, &SolverConfig::default()).unwrap();
        let n = 2 * sol.truncation_index + 10;
        let tail = env.bound(n + 1).max(0.0);
        prop_assume!(tail < sol.sup_value && n + 1 >= env.class().decreasing_from());
        let sets = prefix_index_sets(&*src, n, tail).unwrap();
        let brute = brute_force_peak(&*src, n);
        prop_assert_eq!(sets.k_min, Some(brute.argmax_min));
        prop_assert_eq!(sets.k_max, Some(brute.argmax_max));
        prop_assert!(sets.delta_strict.iter().all(|k| sets.delta.contains(k)));
        let first = sets.delta[0];
        prop_assert_eq!(sets.delta.clone(), (first..=n).collect::<Vec<_>>());
    }

    #[test]
    fn env_min_never_increases_functional(a in 1u64..=12, k in 0u64..30) {
        let src = FactorialRatio::new(a).unwrap();
        let seq = FactorialSequenceEnvelope::new(a).unwrap();
        let cst = FactorialConstantEnvelope::new(a).unwrap();
        let members: Vec<Arc<dyn Envelope>> = vec![Arc::new(seq), Arc::new(cst)];
        let combined = env_min(members).unwrap();
        prop_assume!(useful(&src, &combined, k));
        let f_min = eval_f(k, &src, &combined).unwrap().finite().unwrap();
        for member in [eval_f(k, &src, &seq), eval_f(k, &src, &cst)] {
            if let Some(f) = member.unwrap().finite() {
                prop_assert!(f_min <= f + 1e-9);
            }
        }
    }

    #[test]
    fn smaller_beta_never_increases_functional(a in 2u64..=12, k in 0u64..30) {
        let src = FactorialRatio::new(a).unwrap();
        let env = FactorialConstantEnvelope::new(a).unwrap();
        let shrunk = ConstantEnvelope::new(
            affine_fn(env.slope(), 0.0).unwrap(),
            env.beta(0) * 0.99,
        ).unwrap();
        prop_assume!(validate(&src, &shrunk, 200).is_empty());
        prop_assume!(useful(&src, &env, k));
        let f = eval_f(k, &src, &env).unwrap().finite().unwrap();
        let g = eval_f(k, &src, &shrunk).unwrap().finite().unwrap();
        prop_assert!(g <= f + 1e-9);
    }

    #[test]
    fn certificate_is_tight_at_greatest_maximizer(case in any_case(), frac in 0.05f64..0.95) {
        let (src, env) = build(&case);
        let sol = solve(&*src, &*env, &SolverConfig::default().with_tie(TieRule::MaxArgmax)).unwrap();
        let k_s = sol.argmax_max;
        let limsup = match case {
            Case::Fibonacci { .. } => PHI,
            _ => 0.0,
        };
        let c = limsup + frac * (sol.sup_value - limsup);
        prop_assume!(c > limsup && c < sol.sup_value);
        let horizon = (k_s + 1..k_s + 100_000).find(|&k| env.bound(k) <= c);
        prop_assume!(horizon.is_some());
        let params = optimal_affine_certificate(&*src, k_s, c, horizon.unwrap()).unwrap();
        let cert = params.envelope().unwrap();
        let f = eval_f(k_s, &*src, &cert).unwrap().finite().unwrap();
        prop_assert!((f - k_s as f64).abs() <= 1e-6, "F={} at K^s={}", f, k_s);
        let peak_bound = params.a * params.b.powi(k_s as i32) + params.c;
        prop_assert!((peak_bound - sol.sup_value).abs() <= 1e-10 * sol.sup_value);
        let family = nonconstant_decreasing_family(params, sol.sup_value).unwrap();
        prop_assert!(validate(&*src, &family, horizon.unwrap() + 20).is_empty());
        prop_assert!(useful(&*src, &family, k_s));
    }

    #[test]
    fn env_min_inverse_matches_bisection(
        s1 in 0.1f64..5.0, o1 in -1.0f64..1.0,
        s2 in 0.1f64..5.0, o2 in -1.0f64..1.0,
        t in 0.0f64..=1.0,
    ) {
        let e1 = ConstantEnvelope::new(affine_fn(s1, o1).unwrap(), 0.5).unwrap();
        let e2 = ConstantEnvelope::new(affine_fn(s2, o2).unwrap(), 0.5).unwrap();
        let lower = env_min(vec![e1.clone(), e2.clone()]).unwrap();
        let upper = env_max(vec![e1, e2]).unwrap();
        for env in [&lower, &upper] {
            let y = env.floor(0) + t * (env.ceiling(0) - env.floor(0));
            let oracle = invert_numeric(&|x| env.eval(0, x), y, INVERT_TOL).unwrap();
            let x = env.inverse(0, y).unwrap();
            prop_assert!((x - oracle).abs() <= 1e-10, "x={} oracle={}", x, oracle);
        }
    }

    #[test]
    fn envelope_functions_roundtrip(case in any_case(), k in 0u64..30) {
        let (_, env) = build(&case);
        for i in 0..100 {
            let x = i as f64 / 99.0;
            let y = env.eval(k, x);
            if y.is_finite() {
                let back = env.inverse(k, y).unwrap();
                prop_assert!((back - x).abs() <= 1e-10, "k={} x={} back={}", k, x, back);
            }
        }
        let cubic = NumericFn::new(|x: f64| x * x * x + x);
        for i in 0..100 {
            let x = i as f64 / 99.0;
            prop_assert!((cubic.inverse(cubic.eval(x)).unwrap() - x).abs() <= 1e-10);
        }
    }

    #[test]
    fn bundled_envelopes_validate(case in any_case()) {
        let (src, env) = build(&case);
        prop_assert_eq!(validate(&*src, &*env, 120), vec![]);
    }

    #[test]
    fn jacobi_matches_two_by_two_formula(a in -10.0f64..10.0, b in -10.0f64..10.0, d in -10.0f64..10.0) {
        let m = Matrix::from_rows(&[vec![a, b], vec![b, d]]).unwrap();
        let (lo, hi) = sym_eig_bounds(&m).unwrap();
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        let scale = m.frobenius().max(1.0);
        prop_assert!((lo - (mean - radius)).abs() <= 1e-12 * scale);
        prop_assert!((hi - (mean + radius)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn p_norm_is_submultiplicative(
        entries in proptest::collection::vec(-1.0f64..1.0, 4),
        j in 1u64..=10,
        k in 1u64..=10,
    ) {
        let raw = Matrix::new(2, entries).unwrap();
        let scale = 0.9 / raw.frobenius().max(1e-3);
        let a = raw.scale(scale);
        let p = Matrix::identity(2);
        let norm = |m: &Matrix| op_norm_sq(m, &p).unwrap().sqrt();
        let lhs = norm(&a.pow(j + k));
        let rhs = norm(&a.pow(j)) * norm(&a.pow(k));
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn a_lambda_closed_forms(lambda in 0.1f64..0.95, k in 0u64..=50) {
        let a = a_lambda(lambda, 2).unwrap();
        let exact = a_lambda_norm_sq(lambda, k);
        prop_assert!((spectral_norm_sq_power(&a, k) - exact).abs() <= 1e-9 * exact);
        let q = default_q(lambda);
        let beta = op_norm_sq(&a, &p_q(lambda, 2, None).unwrap()).unwrap();
        prop_assert!((beta - a_lambda_beta(lambda, q)).abs() <= 1e-10);
    }
}
