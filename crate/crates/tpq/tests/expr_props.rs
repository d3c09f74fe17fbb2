//! Property tests for the symbolic scalar kernel: canonical-form
//! idempotence, ring axioms at the canonical level, commuting partials, and
//! agreement between the exact zero test and the randomized rational probe.

mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use tpq::chart::ChartSignature;
use tpq::expr::{numeric_probe, parse_expr, Expr};

fn chart() -> Arc<ChartSignature> {
    ChartSignature::new(&["x1", "x2", "t"])
        .unwrap()
        .opaque("f", &["x1", "x2"], true)
        .unwrap()
        .shared()
}

/// Strategy producing syntactically valid expression texts over the chart.
fn expr_text() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        Just("t".to_string()),
        Just("f".to_string()),
        Just("D[f,x1]".to_string()),
        Just("D[f,x1,x2]".to_string()),
        Just("i".to_string()),
        Just("pi".to_string()),
        Just("exp(t)".to_string()),
        Just("exp(-t)".to_string()),
        Just("exp(1/2*f)".to_string()),
        (-4i64..=4).prop_map(|n| n.to_string()),
    ];
    leaf.prop_recursive(3, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) * ({b})")),
            (inner.clone(), 1u32..=2).prop_map(|(a, k)| format!("({a})^{k}")),
            inner,
        ]
    })
}

fn parse(s: &str, sig: &Arc<ChartSignature>) -> Expr {
    parse_expr(s, sig).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn canonical_form_idempotent(src in expr_text()) {
        let sig = chart();
        let e = parse(&src, &sig);
        let printed = e.to_string();
        let back = parse(&printed, &sig);
        prop_assert_eq!(&e, &back);
        // printing again is byte-stable
        prop_assert_eq!(printed, back.to_string());
    }

    #[test]
    fn addition_associative(a in expr_text(), b in expr_text(), c in expr_text()) {
        let sig = chart();
        let (a, b, c) = (parse(&a, &sig), parse(&b, &sig), parse(&c, &sig));
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
    }

    #[test]
    fn multiplication_distributes(a in expr_text(), b in expr_text(), c in expr_text()) {
        let sig = chart();
        let (a, b, c) = (parse(&a, &sig), parse(&b, &sig), parse(&c, &sig));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
    }

    #[test]
    fn multiplication_commutative_associative(a in expr_text(), b in expr_text(), c in expr_text()) {
        let sig = chart();
        let (a, b, c) = (parse(&a, &sig), parse(&b, &sig), parse(&c, &sig));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn partials_commute(src in expr_text()) {
        let sig = chart();
        let e = parse(&src, &sig);
        let d12 = e.differentiate("x1").unwrap().differentiate("x2").unwrap();
        let d21 = e.differentiate("x2").unwrap().differentiate("x1").unwrap();
        prop_assert_eq!(d12, d21);
    }

    #[test]
    fn product_rule(a in expr_text(), b in expr_text()) {
        let sig = chart();
        let (a, b) = (parse(&a, &sig), parse(&b, &sig));
        let lhs = (&a * &b).differentiate("x1").unwrap();
        let rhs = &(&a.differentiate("x1").unwrap() * &b)
            + &(&a * &b.differentiate("x1").unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn conjugation_is_an_involution(src in expr_text()) {
        let sig = chart();
        let e = parse(&src, &sig);
        prop_assert_eq!(e.conjugate().unwrap().conjugate().unwrap(), e);
    }
}

#[test]
fn probe_agrees_with_is_zero_on_1000_expressions() {
    // Constructed identities evaluate to zero; generic random expressions
    // are nonzero and the probe must say so.
    let sig = chart();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut zero_cases = 0usize;
    let mut nonzero_cases = 0usize;
    for trial in 0..1000u64 {
        let a = common::random_polynomial(&sig, &mut rng, 2);
        let b = common::random_polynomial(&sig, &mut rng, 2);
        let e = if trial % 2 == 0 {
            // (a+b)^2 - a^2 - 2ab - b^2 == 0
            let sum = &a + &b;
            let sq = &sum * &sum;
            &(&(&sq - &(&a * &a)) - &(&(&a * &b) + &(&a * &b))) - &(&b * &b)
        } else {
            // a generic product + 1; nonzero unless a and b conspire
            &(&a * &b) + &Expr::one(&sig)
        };
        let exact = e.is_zero();
        let probed = numeric_probe(&e, trial);
        if exact {
            zero_cases += 1;
            assert!(probed, "probe disagreed on an exact zero (trial {trial})");
        } else {
            nonzero_cases += 1;
            assert!(
                !probed,
                "probe claimed zero on the nonzero expression {e} (trial {trial})"
            );
        }
    }
    assert!(zero_cases >= 400 && nonzero_cases >= 400);
}

#[test]
fn probe_handles_exponential_identities() {
    let sig = chart();
    let t = Expr::coord(&sig, "t").unwrap();
    let f = Expr::symbol(&sig, "f").unwrap();
    let et = Expr::exp(&t).unwrap();
    let emt = Expr::exp(&-&t).unwrap();
    let ef = Expr::exp(&f.scale(&common::rational(1, 2))).unwrap();
    // e^t e^-t e^{f/2} e^{f/2} - e^f == 0
    let e = &(&(&(&et * &emt) * &ef) * &ef) - &Expr::exp(&f).unwrap();
    assert!(e.is_zero());
    for seed in 0..50 {
        assert!(numeric_probe(&e, seed));
    }
    // e^t + e^{f/2} is nonzero
    let nz = &et + &ef;
    for seed in 0..50 {
        assert!(!numeric_probe(&nz, seed));
    }
}
