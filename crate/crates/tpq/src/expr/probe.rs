//! Randomized rational evaluation, the cross-check for the exact zero test.
//!
//! Coordinates, jet atoms and `pi` all receive independent nonzero rational
//! values: a jet is a free indeterminate, so no differential relation ties it
//! to its parent symbol here. Exponentials are handled by evaluating their
//! (rational-linear) arguments at the sample point and collecting terms by
//! the resulting rational exponent; exponentials of distinct rationals are
//! linearly independent over Q, so the whole expression vanishes at the point
//! iff every collected coefficient does. A nonzero expression evaluates to
//! zero only when the sample point lies on its vanishing locus, which has
//! probability ~0 over a large sample space.

use super::{Atom, ExpBase, Expr};
use crate::gauss::GaussRat;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

fn random_nonzero_rational(rng: &mut ChaCha8Rng) -> BigRational {
    loop {
        let num = rng.gen_range(-1000i64..=1000);
        if num == 0 {
            continue;
        }
        let den = rng.gen_range(1i64..=40);
        return BigRational::new(BigInt::from(num), BigInt::from(den));
    }
}

fn pow_rational(base: &BigRational, k: i64) -> BigRational {
    let p = base.pow(k.unsigned_abs() as u32 as i32);
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

/// Returns true when the expression evaluates to zero at a pseudo-random
/// rational point derived from `seed`. Agrees with [`Expr::is_zero`] on zero
/// inputs always, and on nonzero inputs with overwhelming probability.
pub fn numeric_probe(e: &Expr, seed: u64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sig = e.signature().clone();

    // One independent value per coordinate, per distinct jet atom, and pi.
    let mut coord_vals = Vec::with_capacity(sig.dim());
    for _ in 0..sig.dim() {
        coord_vals.push(random_nonzero_rational(&mut rng));
    }
    let pi_val = random_nonzero_rational(&mut rng);
    let mut jet_vals: BTreeMap<(usize, Vec<usize>), BigRational> = BTreeMap::new();
    let mut symbol_vals: Vec<Option<BigRational>> = vec![None; sig.symbols().len()];
    for (key, _) in e.terms() {
        for atom in key.powers.keys() {
            if let Atom::Jet(s, idx) = atom {
                jet_vals
                    .entry((*s, idx.clone()))
                    .or_insert_with(|| random_nonzero_rational(&mut rng));
                if idx.is_empty() {
                    let v = jet_vals.get(&(*s, Vec::new())).unwrap().clone();
                    symbol_vals[*s] = Some(v);
                }
            }
        }
        for (base, _) in key.exp.entries() {
            if let ExpBase::Symbol(s) = base {
                if symbol_vals[*s].is_none() {
                    let v = random_nonzero_rational(&mut rng);
                    jet_vals.insert((*s, Vec::new()), v.clone());
                    symbol_vals[*s] = Some(v);
                }
            }
        }
    }

    // Collect the value of the polynomial part per evaluated exponent.
    let mut buckets: BTreeMap<BigRational, GaussRat> = BTreeMap::new();
    for (key, coeff) in e.terms() {
        let mut val = coeff.clone();
        for (atom, k) in &key.powers {
            let base = match atom {
                Atom::Coord(c) => coord_vals[*c].clone(),
                Atom::Pi => pi_val.clone(),
                Atom::Jet(s, idx) => jet_vals.get(&(*s, idx.clone())).unwrap().clone(),
            };
            val *= &GaussRat::from_rational(pow_rational(&base, *k));
        }
        let mut exponent = BigRational::zero();
        for (base, q) in key.exp.entries() {
            let b = match base {
                ExpBase::Coord(c) => coord_vals[*c].clone(),
                ExpBase::Symbol(s) => symbol_vals[*s].clone().unwrap(),
            };
            exponent += q * b;
        }
        let entry = buckets.entry(exponent).or_insert_with(GaussRat::zero);
        *entry += &val;
    }
    buckets.values().all(|v| v.is_zero())
}
