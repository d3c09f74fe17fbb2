//! Shared test utilities: seeded random generators over charts and
//! independent oracles for the bracket operations.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use tpq::chart::ChartSignature;
use tpq::expr::Expr;
use tpq::gauss::GaussRat;
use tpq::geom::{increasing_tuples, schouten_bracket, Form, MultiVector};

/// Random polynomial of degree <= `max_deg` with small integer coefficients.
pub fn random_polynomial(sig: &Arc<ChartSignature>, rng: &mut ChaCha8Rng, max_deg: usize) -> Expr {
    let dim = sig.dim();
    let mut e = Expr::int(sig, rng.gen_range(-3i64..=3));
    let terms = rng.gen_range(1..=3usize);
    for _ in 0..terms {
        let c = rng.gen_range(-3i64..=3);
        if c == 0 {
            continue;
        }
        let mut term = Expr::int(sig, c);
        let deg = rng.gen_range(1..=max_deg.max(1));
        for _ in 0..deg {
            let i = rng.gen_range(0..dim);
            term = &term * &Expr::coord_by_index(sig, i);
        }
        e = &e + &term;
    }
    e
}

pub fn random_form(
    sig: &Arc<ChartSignature>,
    grade: usize,
    rng: &mut ChaCha8Rng,
    max_deg: usize,
) -> Form {
    let mut comps = Vec::new();
    for t in increasing_tuples(sig.dim(), grade) {
        if rng.gen_bool(0.5) {
            comps.push((t, random_polynomial(sig, rng, max_deg)));
        }
    }
    Form::from_components(sig, grade, comps).unwrap()
}

pub fn random_multivector(
    sig: &Arc<ChartSignature>,
    grade: usize,
    rng: &mut ChaCha8Rng,
    max_deg: usize,
) -> MultiVector {
    let mut comps = Vec::new();
    for t in increasing_tuples(sig.dim(), grade) {
        if rng.gen_bool(0.5) {
            comps.push((t, random_polynomial(sig, rng, max_deg)));
        }
    }
    MultiVector::from_components(sig, grade, comps).unwrap()
}

/// Independent Schouten-bracket oracle, built by direct recursion on the
/// defining rules rather than the closed summation formula:
///
///   - `[X, Y]` is the Lie bracket of vector fields;
///   - `[P, f] = (-1)^(p-1) i_{df} P` and `[f, Q] = -i_{df} Q`;
///   - `[P, Y ^ R] = [P, Y] ^ R + (-1)^(p-1) Y ^ [P, R]` peels the second
///     argument one factor at a time.
pub fn schouten_oracle(p: &MultiVector, q: &MultiVector) -> MultiVector {
    let sig = p.signature().clone();
    let pg = p.grade();
    let qg = q.grade();
    if pg + qg == 0 {
        return MultiVector::zero(&sig, 0);
    }
    let mut acc = MultiVector::zero(&sig, pg + qg - 1);
    for (ia, ca) in p.components() {
        for (ib, cb) in q.components() {
            let term = bracket_terms(&sig, ca, ia, cb, ib);
            acc = acc.add(&term).unwrap();
        }
    }
    acc
}

fn interior_by_differential(sig: &Arc<ChartSignature>, g: &Expr, coeff: &Expr, idx: &[usize]) -> MultiVector {
    // i_{dg} (coeff * e_idx): sum over positions with alternating signs.
    let grade = idx.len();
    let mut acc = MultiVector::zero(sig, grade.saturating_sub(1));
    for (pos, &i) in idx.iter().enumerate() {
        let dgi = g.differentiate_index(i);
        if dgi.is_zero() {
            continue;
        }
        let rest: Vec<usize> = idx
            .iter()
            .enumerate()
            .filter(|(s, _)| *s != pos)
            .map(|(_, &v)| v)
            .collect();
        let mut c = coeff * &dgi;
        if pos % 2 == 1 {
            c = -c;
        }
        let term = MultiVector::from_components(sig, grade - 1, vec![(rest, c)]).unwrap();
        acc = acc.add(&term).unwrap();
    }
    acc
}

fn wedge_basis(sig: &Arc<ChartSignature>, m: &MultiVector, idx: &[usize]) -> MultiVector {
    let basis = MultiVector::from_components(sig, idx.len(), vec![(idx.to_vec(), Expr::one(sig))])
        .unwrap();
    m.wedge(&basis).unwrap()
}

fn bracket_terms(
    sig: &Arc<ChartSignature>,
    ca: &Expr,
    ia: &[usize],
    cb: &Expr,
    ib: &[usize],
) -> MultiVector {
    let pg = ia.len();
    let qg = ib.len();
    if pg == 0 && qg == 0 {
        return MultiVector::zero(sig, 0);
    }
    if qg == 0 {
        // [P, f] = (-1)^(p-1) i_{df} P
        let v = interior_by_differential(sig, cb, ca, ia);
        return if (pg + 1) % 2 == 0 { v } else { v.neg() };
    }
    if pg == 0 {
        // [f, Q] = -i_{df} Q
        return interior_by_differential(sig, ca, cb, ib).neg();
    }
    if pg == 1 && qg == 1 {
        // Lie bracket of a e_i and b e_j.
        let (i, j) = (ia[0], ib[0]);
        let t1 = MultiVector::from_components(
            sig,
            1,
            vec![(vec![j], ca * &cb.differentiate_index(i))],
        )
        .unwrap();
        let t2 = MultiVector::from_components(
            sig,
            1,
            vec![(vec![i], cb * &ca.differentiate_index(j))],
        )
        .unwrap();
        return t1.sub(&t2).unwrap();
    }
    if qg >= 2 {
        // Peel the first factor of the second argument:
        // [P, e_j ^ R] = [P, e_j] ^ R + (-1)^(p-1) e_j ^ [P, R].
        let j = ib[0];
        let rest = &ib[1..];
        // [a e_I, e_j] = -a_{,j} e_I
        let da = ca.differentiate_index(j);
        let mut acc = MultiVector::zero(sig, pg + qg - 1);
        if !da.is_zero() {
            let head = MultiVector::from_components(sig, pg, vec![(ia.to_vec(), -da)]).unwrap();
            let mut with_rest = head;
            if !rest.is_empty() {
                with_rest = wedge_basis(sig, &with_rest, rest);
            }
            acc = acc.add(&with_rest.scale(cb)).unwrap();
        }
        let inner = bracket_terms(sig, ca, ia, cb, rest);
        let ej =
            MultiVector::from_components(sig, 1, vec![(vec![j], Expr::one(sig))]).unwrap();
        let mut tail = ej.wedge(&inner).unwrap();
        if pg % 2 == 0 {
            // (-1)^(p-1) = -1 for even p
            tail = tail.neg();
        }
        return acc.add(&tail).unwrap();
    }
    // pg >= 2, qg == 1: flip with graded antisymmetry,
    // [P,Q] = -(-1)^((p-1)(q-1)) [Q,P]; (q-1) = 0 so the sign is -1.
    bracket_terms(sig, cb, ib, ca, ia).neg()
}

/// Convenience wrapper: assert equality of the implementation and the
/// oracle on a random pair.
pub fn assert_schouten_matches_oracle(p: &MultiVector, q: &MultiVector) {
    let fast = schouten_bracket(p, q).unwrap();
    let slow = schouten_oracle(p, q);
    assert_eq!(fast, slow, "schouten bracket disagrees with the oracle");
}

/// Small chart catalogue for the property suites.
pub fn chart_rn(dim: usize) -> Arc<ChartSignature> {
    let names: Vec<String> = (1..=dim).map(|k| format!("x{k}")).collect();
    ChartSignature::new(&names).unwrap().shared()
}

pub fn rational(n: i64, d: i64) -> GaussRat {
    GaussRat::from_ratio(n, d)
}
