//! Exact symbolic scalar kernel.
//!
//! An [`Expr`] is a canonical sum of terms. Every term is a Gaussian-rational
//! coefficient times a product of atoms with integer exponents and at most one
//! exponential factor. Atoms are coordinates, jets of opaque functions
//! (formal partial derivatives, with sorted index multisets since partials
//! commute), and the transcendental constant `pi`. Exponential arguments are
//! rational-linear combinations of coordinates and opaque function symbols;
//! products of exponentials merge by adding arguments, so the canonical form
//! is unique and equality is set equality on terms. The empty sum is the one
//! and only representation of zero.

mod parse;
mod probe;

pub use parse::{parse_expr, ParseError};
pub use probe::numeric_probe;

use crate::chart::{ChartError, ChartSignature};
use crate::gauss::GaussRat;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("division by a non-monomial expression")]
    NonMonomialDivisor,
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative power of a non-monomial expression")]
    NonMonomialPower,
    #[error("exponential argument must be a rational-linear combination of coordinates and opaque symbols")]
    BadExponentialArgument,
    #[error("conjugation of the non-real opaque symbol `{0}` is unsupported")]
    ConjugateNonReal(String),
    #[error("expressions built over different charts")]
    SignatureMismatch,
}

/// Base of one summand of an exponential argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExpBase {
    Coord(usize),
    /// Degree-0 opaque symbol (the bare function, no derivatives).
    Symbol(usize),
}

/// Normalized rational-linear combination used as an exponential argument.
/// Sorted by base, no zero coefficients; empty means argument 0, i.e. no
/// exponential factor at all.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct ExpArg(Vec<(ExpBase, BigRational)>);

impl ExpArg {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[(ExpBase, BigRational)] {
        &self.0
    }

    fn from_map(map: BTreeMap<ExpBase, BigRational>) -> Self {
        ExpArg(map.into_iter().filter(|(_, q)| !q.is_zero()).collect())
    }

    fn add(&self, other: &ExpArg) -> ExpArg {
        let mut map: BTreeMap<ExpBase, BigRational> = self.0.iter().cloned().collect();
        for (b, q) in &other.0 {
            *map.entry(b.clone()).or_insert_with(BigRational::zero) += q;
        }
        ExpArg::from_map(map)
    }

    fn scale(&self, k: &BigRational) -> ExpArg {
        if k.is_zero() {
            return ExpArg::default();
        }
        ExpArg(self.0.iter().map(|(b, q)| (b.clone(), q * k)).collect())
    }

    /// Coefficient of the given coordinate plus jet contributions:
    /// d/dx_c of the argument, as (rational part, symbol jets).
    fn differentiate(&self, sig: &ChartSignature, coord: usize) -> (BigRational, Vec<(usize, BigRational)>) {
        let mut rat = BigRational::zero();
        let mut jets = Vec::new();
        for (b, q) in &self.0 {
            match b {
                ExpBase::Coord(c) if *c == coord => rat += q,
                ExpBase::Coord(_) => {}
                ExpBase::Symbol(s) => {
                    if sig.symbol_depends_on(*s, coord) {
                        jets.push((*s, q.clone()));
                    }
                }
            }
        }
        (rat, jets)
    }

    fn conjugate(&self, sig: &ChartSignature) -> Result<ExpArg, ExprError> {
        let mut map = BTreeMap::new();
        for (b, q) in &self.0 {
            let nb = match b {
                ExpBase::Coord(c) => ExpBase::Coord(sig.conjugate_coord(*c)),
                ExpBase::Symbol(s) => {
                    if !sig.symbol(*s).real {
                        return Err(ExprError::ConjugateNonReal(sig.symbol(*s).name.clone()));
                    }
                    ExpBase::Symbol(*s)
                }
            };
            *map.entry(nb).or_insert_with(BigRational::zero) += q;
        }
        Ok(ExpArg::from_map(map))
    }
}

/// Multiplicative atom of a term.
///
/// Ordering (coordinates by declaration order, then jets, then `pi`) fixes the
/// canonical form and keeps printed output byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Coord(usize),
    /// Jet of an opaque symbol: symbol id plus sorted multiset of coordinate
    /// indices (empty = the bare function).
    Jet(usize, Vec<usize>),
    Pi,
}

/// The factor structure of a term: atom powers plus the exponential argument.
/// Two terms combine iff their keys are equal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct TermKey {
    pub powers: BTreeMap<Atom, i64>,
    pub exp: ExpArg,
}

impl TermKey {
    fn one() -> Self {
        TermKey::default()
    }

    fn is_one(&self) -> bool {
        self.powers.is_empty() && self.exp.is_empty()
    }

    fn mul(&self, other: &TermKey) -> TermKey {
        let mut powers = self.powers.clone();
        for (a, k) in &other.powers {
            let e = powers.entry(a.clone()).or_insert(0);
            *e += k;
            if *e == 0 {
                powers.remove(a);
            }
        }
        TermKey {
            powers,
            exp: self.exp.add(&other.exp),
        }
    }

    fn invert(&self) -> TermKey {
        TermKey {
            powers: self.powers.iter().map(|(a, k)| (a.clone(), -k)).collect(),
            exp: self.exp.scale(&-BigRational::one()),
        }
    }
}

/// Canonical exact symbolic scalar over a chart. Immutable; all operations
/// are pure, so values can be shared freely between threads.
#[derive(Clone, PartialEq, Eq)]
pub struct Expr {
    sig: Arc<ChartSignature>,
    terms: BTreeMap<TermKey, GaussRat>,
}

impl Expr {
    pub fn signature(&self) -> &Arc<ChartSignature> {
        &self.sig
    }

    pub fn zero(sig: &Arc<ChartSignature>) -> Expr {
        Expr {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(sig: &Arc<ChartSignature>, c: GaussRat) -> Expr {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(TermKey::one(), c);
        }
        Expr {
            sig: sig.clone(),
            terms,
        }
    }

    pub fn one(sig: &Arc<ChartSignature>) -> Expr {
        Expr::constant(sig, GaussRat::one())
    }

    pub fn int(sig: &Arc<ChartSignature>, n: i64) -> Expr {
        Expr::constant(sig, GaussRat::from_int(n))
    }

    pub fn rational(sig: &Arc<ChartSignature>, num: i64, den: i64) -> Expr {
        Expr::constant(sig, GaussRat::from_ratio(num, den))
    }

    pub fn imaginary_unit(sig: &Arc<ChartSignature>) -> Expr {
        Expr::constant(sig, GaussRat::i())
    }

    pub fn pi(sig: &Arc<ChartSignature>) -> Expr {
        Expr::from_atom(sig, Atom::Pi)
    }

    /// 2*pi*i, the recurring prequantization factor.
    pub fn two_pi_i(sig: &Arc<ChartSignature>) -> Expr {
        Expr::pi(sig) * Expr::constant(sig, &GaussRat::i() * &GaussRat::from_int(2))
    }

    pub fn coord(sig: &Arc<ChartSignature>, name: &str) -> Result<Expr, ExprError> {
        let i = sig.coord_index(name)?;
        Ok(Expr::from_atom(sig, Atom::Coord(i)))
    }

    pub fn coord_by_index(sig: &Arc<ChartSignature>, i: usize) -> Expr {
        assert!(i < sig.dim());
        Expr::from_atom(sig, Atom::Coord(i))
    }

    /// The bare opaque symbol as an expression.
    pub fn symbol(sig: &Arc<ChartSignature>, name: &str) -> Result<Expr, ExprError> {
        let s = sig.symbol_index(name)?;
        Ok(Expr::from_atom(sig, Atom::Jet(s, Vec::new())))
    }

    /// A jet of an opaque symbol: the formal partial derivative along the
    /// named coordinates. Zero when the symbol does not depend on one of them.
    pub fn jet<S: AsRef<str>>(
        sig: &Arc<ChartSignature>,
        name: &str,
        coords: &[S],
    ) -> Result<Expr, ExprError> {
        let s = sig.symbol_index(name)?;
        let mut idx = Vec::with_capacity(coords.len());
        for c in coords {
            let ci = sig.coord_index(c.as_ref())?;
            if !sig.symbol_depends_on(s, ci) {
                return Ok(Expr::zero(sig));
            }
            idx.push(ci);
        }
        idx.sort_unstable();
        Ok(Expr::from_atom(sig, Atom::Jet(s, idx)))
    }

    fn from_atom(sig: &Arc<ChartSignature>, atom: Atom) -> Expr {
        let mut powers = BTreeMap::new();
        powers.insert(atom, 1);
        let key = TermKey {
            powers,
            exp: ExpArg::default(),
        };
        let mut terms = BTreeMap::new();
        terms.insert(key, GaussRat::one());
        Expr {
            sig: sig.clone(),
            terms,
        }
    }

    /// Exponential of a rational-linear combination of coordinates and bare
    /// opaque symbols. `exp(0)` is the scalar 1.
    pub fn exp(arg: &Expr) -> Result<Expr, ExprError> {
        let mut map: BTreeMap<ExpBase, BigRational> = BTreeMap::new();
        for (key, coeff) in &arg.terms {
            if !coeff.is_real() {
                return Err(ExprError::BadExponentialArgument);
            }
            if !key.exp.is_empty() || key.powers.len() != 1 {
                return Err(ExprError::BadExponentialArgument);
            }
            let (atom, k) = key.powers.iter().next().unwrap();
            if *k != 1 {
                return Err(ExprError::BadExponentialArgument);
            }
            let base = match atom {
                Atom::Coord(c) => ExpBase::Coord(*c),
                Atom::Jet(s, idx) if idx.is_empty() => ExpBase::Symbol(*s),
                _ => return Err(ExprError::BadExponentialArgument),
            };
            *map.entry(base).or_insert_with(BigRational::zero) += &coeff.re;
        }
        let exp = ExpArg::from_map(map);
        if exp.is_empty() {
            return Ok(Expr::one(&arg.sig));
        }
        let key = TermKey {
            powers: BTreeMap::new(),
            exp,
        };
        let mut terms = BTreeMap::new();
        terms.insert(key, GaussRat::one());
        Ok(Expr {
            sig: arg.sig.clone(),
            terms,
        })
    }

    fn insert_term(terms: &mut BTreeMap<TermKey, GaussRat>, key: TermKey, coeff: GaussRat) {
        if coeff.is_zero() {
            return;
        }
        match terms.get_mut(&key) {
            Some(c) => {
                *c += &coeff;
                if c.is_zero() {
                    terms.remove(&key);
                }
            }
            None => {
                terms.insert(key, coeff);
            }
        }
    }

    /// Exact zero test. Canonical form makes this a structural check: terms
    /// with equal factor structure were already merged, and monomials in
    /// distinct atoms (and exponentials of distinct normalized arguments) are
    /// linearly independent, so nothing else can cancel.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(k, c)| k.is_one() && c.is_one())
                .unwrap_or(false)
    }

    /// The constant value when the expression is a plain constant.
    pub fn as_constant(&self) -> Option<GaussRat> {
        if self.terms.is_empty() {
            return Some(GaussRat::zero());
        }
        if self.terms.len() == 1 {
            let (k, c) = self.terms.iter().next().unwrap();
            if k.is_one() {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &GaussRat)> {
        self.terms.iter()
    }

    fn assert_same_sig(&self, other: &Expr) {
        assert!(
            self.sig == other.sig,
            "expressions built over different charts"
        );
    }

    pub fn scale(&self, c: &GaussRat) -> Expr {
        if c.is_zero() {
            return Expr::zero(&self.sig);
        }
        Expr {
            sig: self.sig.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v * c))
                .collect(),
        }
    }

    /// Integer power. Negative powers require a monomial (single-term) base.
    pub fn pow(&self, k: i64) -> Result<Expr, ExprError> {
        if k == 0 {
            return Ok(Expr::one(&self.sig));
        }
        let base = if k < 0 {
            self.monomial_inverse()?
        } else {
            self.clone()
        };
        let mut out = Expr::one(&self.sig);
        for _ in 0..k.unsigned_abs() {
            out = &out * &base;
        }
        Ok(out)
    }

    fn monomial_inverse(&self) -> Result<Expr, ExprError> {
        if self.terms.is_empty() {
            return Err(ExprError::DivisionByZero);
        }
        if self.terms.len() != 1 {
            return Err(ExprError::NonMonomialDivisor);
        }
        let (key, coeff) = self.terms.iter().next().unwrap();
        let mut terms = BTreeMap::new();
        terms.insert(key.invert(), coeff.inv());
        Ok(Expr {
            sig: self.sig.clone(),
            terms,
        })
    }

    /// Division; the divisor must be a single term.
    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr, ExprError> {
        self.assert_same_sig(rhs);
        Ok(self * &rhs.monomial_inverse()?)
    }

    /// Partial derivative along a declared coordinate.
    pub fn differentiate(&self, coord: &str) -> Result<Expr, ExprError> {
        let c = self.sig.coord_index(coord)?;
        Ok(self.differentiate_index(c))
    }

    pub fn differentiate_index(&self, coord: usize) -> Expr {
        assert!(coord < self.sig.dim());
        let sig = &self.sig;
        let mut out = BTreeMap::new();
        for (key, coeff) in &self.terms {
            // Product rule over the atom powers.
            for (atom, k) in &key.powers {
                let datom: Option<Atom> = match atom {
                    Atom::Coord(c) => {
                        if *c == coord {
                            None // derivative is 1
                        } else {
                            continue;
                        }
                    }
                    Atom::Jet(s, idx) => {
                        if sig.symbol_depends_on(*s, coord) {
                            let mut nidx = idx.clone();
                            nidx.push(coord);
                            nidx.sort_unstable();
                            Some(Atom::Jet(*s, nidx))
                        } else {
                            continue;
                        }
                    }
                    Atom::Pi => continue,
                };
                // coeff * k * atom^(k-1) * datom * (other factors) * exp
                let mut powers = key.powers.clone();
                let e = powers.get_mut(atom).unwrap();
                *e -= 1;
                if *e == 0 {
                    powers.remove(atom);
                }
                if let Some(d) = datom {
                    *powers.entry(d).or_insert(0) += 1;
                }
                let nk = TermKey {
                    powers,
                    exp: key.exp.clone(),
                };
                let c = coeff * &GaussRat::from_int(*k);
                Self::insert_term(&mut out, nk, c);
            }
            // Derivative of the exponential factor: (dL/dx) * exp(L).
            if !key.exp.is_empty() {
                let (rat, jets) = key.exp.differentiate(sig, coord);
                if !rat.is_zero() {
                    let c = coeff * &GaussRat::from_rational(rat);
                    Self::insert_term(&mut out, key.clone(), c);
                }
                for (s, q) in jets {
                    let mut powers = key.powers.clone();
                    *powers.entry(Atom::Jet(s, vec![coord])).or_insert(0) += 1;
                    let nk = TermKey {
                        powers,
                        exp: key.exp.clone(),
                    };
                    let c = coeff * &GaussRat::from_rational(q);
                    Self::insert_term(&mut out, nk, c);
                }
            }
        }
        Expr {
            sig: sig.clone(),
            terms: out,
        }
    }

    /// Complex conjugation: i -> -i, coordinates through the chart involution,
    /// jets of real symbols through the induced index map.
    pub fn conjugate(&self) -> Result<Expr, ExprError> {
        let sig = &self.sig;
        let mut out = BTreeMap::new();
        for (key, coeff) in &self.terms {
            let mut powers = BTreeMap::new();
            for (atom, k) in &key.powers {
                let natom = match atom {
                    Atom::Coord(c) => Atom::Coord(sig.conjugate_coord(*c)),
                    Atom::Jet(s, idx) => {
                        if !sig.symbol(*s).real {
                            return Err(ExprError::ConjugateNonReal(sig.symbol(*s).name.clone()));
                        }
                        let mut nidx: Vec<usize> =
                            idx.iter().map(|c| sig.conjugate_coord(*c)).collect();
                        nidx.sort_unstable();
                        Atom::Jet(*s, nidx)
                    }
                    Atom::Pi => Atom::Pi,
                };
                *powers.entry(natom).or_insert(0) += k;
            }
            let nk = TermKey {
                powers,
                exp: key.exp.conjugate(sig)?,
            };
            Self::insert_term(&mut out, nk, coeff.conj());
        }
        Ok(Expr {
            sig: sig.clone(),
            terms: out,
        })
    }

    /// Substitutes an expression for a bare opaque symbol. Fails when the
    /// symbol occurs with derivatives or inside an exponential, or with a
    /// negative power while the replacement is not a monomial.
    pub fn substitute_symbol(&self, name: &str, value: &Expr) -> Result<Expr, ExprError> {
        self.assert_same_sig(value);
        let s = self.sig.symbol_index(name)?;
        let mut out = Expr::zero(&self.sig);
        for (key, coeff) in &self.terms {
            let mut rest = TermKey {
                powers: BTreeMap::new(),
                exp: key.exp.clone(),
            };
            let mut power = 0i64;
            for (atom, k) in &key.powers {
                match atom {
                    Atom::Jet(s2, idx) if *s2 == s => {
                        if !idx.is_empty() {
                            return Err(ExprError::NonMonomialPower);
                        }
                        power = *k;
                    }
                    _ => {
                        rest.powers.insert(atom.clone(), *k);
                    }
                }
            }
            for (b, _) in key.exp.entries() {
                if matches!(b, ExpBase::Symbol(s2) if *s2 == s) {
                    return Err(ExprError::NonMonomialPower);
                }
            }
            let mut term = Expr {
                sig: self.sig.clone(),
                terms: {
                    let mut m = BTreeMap::new();
                    m.insert(rest, coeff.clone());
                    m
                },
            };
            if power != 0 {
                term = &term * &value.pow(power)?;
            }
            out = &out + &term;
        }
        Ok(out)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.assert_same_sig(rhs);
        let mut terms = self.terms.clone();
        for (k, c) in &rhs.terms {
            Expr::insert_term(&mut terms, k.clone(), c.clone());
        }
        Expr {
            sig: self.sig.clone(),
            terms,
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        &self + &rhs
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        &self - &rhs
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            sig: self.sig.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), -c)).collect(),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.assert_same_sig(rhs);
        let mut terms = BTreeMap::new();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &rhs.terms {
                Expr::insert_term(&mut terms, ka.mul(kb), ca * cb);
            }
        }
        Expr {
            sig: self.sig.clone(),
            terms,
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        &self * &rhs
    }
}

fn fmt_exp_arg(arg: &ExpArg, sig: &ChartSignature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let mut first = true;
    for (b, q) in arg.entries() {
        let neg = q.is_negative();
        if first {
            if neg {
                write!(f, "-")?;
            }
            first = false;
        } else if neg {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        let mag = q.abs();
        if !mag.is_one() {
            if mag.is_integer() {
                write!(f, "{}*", mag.numer())?;
            } else {
                write!(f, "{}/{}*", mag.numer(), mag.denom())?;
            }
        }
        match b {
            ExpBase::Coord(c) => write!(f, "{}", sig.coord_name(*c))?,
            ExpBase::Symbol(s) => write!(f, "{}", sig.symbol(*s).name)?,
        }
    }
    Ok(())
}

fn fmt_atom(atom: &Atom, sig: &ChartSignature, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match atom {
        Atom::Coord(c) => write!(f, "{}", sig.coord_name(*c)),
        Atom::Pi => write!(f, "pi"),
        Atom::Jet(s, idx) => {
            if idx.is_empty() {
                write!(f, "{}", sig.symbol(*s).name)
            } else {
                write!(f, "D[{}", sig.symbol(*s).name)?;
                for c in idx {
                    write!(f, ",{}", sig.coord_name(*c))?;
                }
                write!(f, "]")
            }
        }
    }
}

impl fmt::Display for Expr {
    /// Canonical text form; parses back to the same expression.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let one = GaussRat::one();
        let minus_one = -&one;
        for (n, (key, coeff)) in self.terms.iter().enumerate() {
            let neg = coeff.print_negative();
            let mag = if neg { -coeff } else { coeff.clone() };
            if n == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            // `mag` can still be a mixed complex like (1-2*i) whose negation
            // was chosen by the real part; it prints parenthesized either way.
            let _ = &minus_one;
            let mut wrote_factor = false;
            if key.is_one() || !mag.is_one() {
                write!(f, "{}", mag)?;
                wrote_factor = true;
            }
            for (atom, k) in &key.powers {
                if wrote_factor {
                    write!(f, "*")?;
                }
                fmt_atom(atom, &self.sig, f)?;
                if *k != 1 {
                    write!(f, "^{}", k)?;
                }
                wrote_factor = true;
            }
            if !key.exp.is_empty() {
                if wrote_factor {
                    write!(f, "*")?;
                }
                write!(f, "exp(")?;
                fmt_exp_arg(&key.exp, &self.sig, f)?;
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
