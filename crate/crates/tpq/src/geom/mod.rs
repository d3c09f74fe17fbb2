//! Exterior and multivector calculus on a coordinate chart.
//!
//! Grade-k antisymmetric tensors are stored sparsely: a map from strictly
//! increasing index tuples to coefficients, with absent tuples meaning zero.
//! Evaluation against grade-1 objects uses the determinant convention,
//! `(X1^...^Xk)(a1,...,ak) = det <a_i, X_j>`, with no 1/k! factors.

mod schouten;

pub use schouten::schouten_bracket;

use crate::chart::ChartSignature;
use crate::expr::{Expr, ExprError};
use crate::gauss::GaussRat;
use crate::linalg::{solve, Mat, SolveOutcome};
use num_traits::Zero;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("chart mismatch between operands")]
    ChartMismatch,
    #[error("expected grade {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },
    #[error("index {0} out of range for chart of dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("indices must be strictly increasing")]
    NotStrictlyIncreasing,
    #[error("wrong number of arguments: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("the 2-form is not constant-coefficient")]
    NonConstantForm,
    #[error("the 2-form is degenerate on its support")]
    DegenerateForm,
    #[error("twisted Poisson residuals are nonzero: {0}")]
    StructureCheck(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Shared sparse storage for antisymmetric tensors of either variance.
#[derive(Clone, PartialEq)]
pub(crate) struct Skew {
    pub(crate) sig: Arc<ChartSignature>,
    pub(crate) grade: usize,
    pub(crate) comps: BTreeMap<Vec<usize>, Expr>,
}

/// Sorts an index tuple, returning the permutation sign, or `None` when an
/// index repeats.
pub(crate) fn sort_indices(idx: &[usize]) -> Option<(Vec<usize>, i64)> {
    let mut v: Vec<usize> = idx.to_vec();
    let mut sign = 1i64;
    // insertion sort, counting transpositions
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some((v, sign))
}

impl Skew {
    fn zero(sig: &Arc<ChartSignature>, grade: usize) -> Self {
        Skew {
            sig: sig.clone(),
            grade,
            comps: BTreeMap::new(),
        }
    }

    fn insert(&mut self, idx: Vec<usize>, e: Expr) {
        if e.is_zero() {
            return;
        }
        debug_assert!(idx.len() == self.grade);
        debug_assert!(idx.windows(2).all(|w| w[0] < w[1]));
        match self.comps.get_mut(&idx) {
            Some(v) => {
                let s = &*v + &e;
                if s.is_zero() {
                    self.comps.remove(&idx);
                } else {
                    *v = s;
                }
            }
            None => {
                self.comps.insert(idx, e);
            }
        }
    }

    fn add_signed(&mut self, idx: &[usize], e: Expr) {
        if e.is_zero() {
            return;
        }
        if let Some((sorted, sign)) = sort_indices(idx) {
            let e = if sign < 0 { -e } else { e };
            self.insert(sorted, e);
        }
    }

    fn checked_tuple(&self, idx: &[usize]) -> Result<Vec<usize>, GeomError> {
        if idx.len() != self.grade {
            return Err(GeomError::GradeMismatch {
                expected: self.grade,
                got: idx.len(),
            });
        }
        for &i in idx {
            if i >= self.sig.dim() {
                return Err(GeomError::IndexOutOfRange(i, self.sig.dim()));
            }
        }
        if !idx.windows(2).all(|w| w[0] < w[1]) {
            return Err(GeomError::NotStrictlyIncreasing);
        }
        Ok(idx.to_vec())
    }

    fn component(&self, idx: &[usize]) -> Expr {
        self.comps
            .get(idx)
            .cloned()
            .unwrap_or_else(|| Expr::zero(&self.sig))
    }

    fn add(&self, other: &Skew) -> Result<Skew, GeomError> {
        if self.sig != other.sig {
            return Err(GeomError::ChartMismatch);
        }
        if self.grade != other.grade {
            return Err(GeomError::GradeMismatch {
                expected: self.grade,
                got: other.grade,
            });
        }
        let mut out = self.clone();
        for (k, v) in &other.comps {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    fn neg(&self) -> Skew {
        Skew {
            sig: self.sig.clone(),
            grade: self.grade,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }

    fn scale(&self, e: &Expr) -> Skew {
        let mut out = Skew::zero(&self.sig, self.grade);
        for (k, v) in &self.comps {
            out.insert(k.clone(), e * v);
        }
        out
    }

    fn wedge(&self, other: &Skew) -> Result<Skew, GeomError> {
        if self.sig != other.sig {
            return Err(GeomError::ChartMismatch);
        }
        let mut out = Skew::zero(&self.sig, self.grade + other.grade);
        for (ka, va) in &self.comps {
            for (kb, vb) in &other.comps {
                let mut idx = ka.clone();
                idx.extend_from_slice(kb);
                out.add_signed(&idx, va * vb);
            }
        }
        Ok(out)
    }

    fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Pairing against `grade` many grade-1 component vectors (determinant
    /// convention).
    fn evaluate(&self, args: &[&Skew]) -> Result<Expr, GeomError> {
        if args.len() != self.grade {
            return Err(GeomError::ArityMismatch {
                expected: self.grade,
                got: args.len(),
            });
        }
        for a in args {
            if a.sig != self.sig {
                return Err(GeomError::ChartMismatch);
            }
            if a.grade != 1 {
                return Err(GeomError::GradeMismatch {
                    expected: 1,
                    got: a.grade,
                });
            }
        }
        if self.grade == 0 {
            return Ok(self.component(&[]));
        }
        let mut total = Expr::zero(&self.sig);
        for (idx, coeff) in &self.comps {
            let mut m: Vec<Vec<Expr>> = Vec::with_capacity(self.grade);
            for a in args {
                m.push(idx.iter().map(|&i| a.component(&[i])).collect());
            }
            let d = det(&self.sig, &m);
            if !d.is_zero() {
                total = &total + &(coeff * &d);
            }
        }
        Ok(total)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, basis: &str) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, v) in &self.comps {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let names: Vec<&str> = idx.iter().map(|&i| self.sig.coord_name(i)).collect();
            write!(f, "({v})")?;
            if !names.is_empty() {
                write!(f, " {}[{}]", basis, names.join(","))?;
            }
        }
        Ok(())
    }
}

fn det(sig: &Arc<ChartSignature>, m: &[Vec<Expr>]) -> Expr {
    let n = m.len();
    match n {
        0 => Expr::one(sig),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        _ => {
            let mut acc = Expr::zero(sig);
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Expr>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &det(sig, &minor);
                if j % 2 == 0 {
                    acc = &acc + &term;
                } else {
                    acc = &acc - &term;
                }
            }
            acc
        }
    }
}

macro_rules! tensor_api {
    ($name:ident, $basis:literal) => {
        impl $name {
            pub fn zero(sig: &Arc<ChartSignature>, grade: usize) -> Self {
                $name(Skew::zero(sig, grade))
            }

            /// Grade-0 tensor holding a single scalar.
            pub fn scalar(sig: &Arc<ChartSignature>, e: Expr) -> Self {
                let mut s = Skew::zero(sig, 0);
                s.insert(Vec::new(), e);
                $name(s)
            }

            pub fn from_components<I>(
                sig: &Arc<ChartSignature>,
                grade: usize,
                comps: I,
            ) -> Result<Self, GeomError>
            where
                I: IntoIterator<Item = (Vec<usize>, Expr)>,
            {
                let mut s = Skew::zero(sig, grade);
                for (idx, e) in comps {
                    let idx = s.checked_tuple(&idx)?;
                    s.insert(idx, e);
                }
                Ok($name(s))
            }

            pub fn signature(&self) -> &Arc<ChartSignature> {
                &self.0.sig
            }

            pub fn grade(&self) -> usize {
                self.0.grade
            }

            pub fn component(&self, idx: &[usize]) -> Expr {
                if let Some((sorted, sign)) = sort_indices(idx) {
                    let e = self.0.component(&sorted);
                    if sign < 0 {
                        -e
                    } else {
                        e
                    }
                } else {
                    Expr::zero(&self.0.sig)
                }
            }

            pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Expr)> {
                self.0.comps.iter()
            }

            pub fn is_zero(&self) -> bool {
                self.0.is_zero()
            }

            pub fn add(&self, other: &Self) -> Result<Self, GeomError> {
                Ok($name(self.0.add(&other.0)?))
            }

            pub fn sub(&self, other: &Self) -> Result<Self, GeomError> {
                Ok($name(self.0.add(&other.0.neg())?))
            }

            pub fn neg(&self) -> Self {
                $name(self.0.neg())
            }

            pub fn scale(&self, e: &Expr) -> Self {
                $name(self.0.scale(e))
            }

            pub fn scale_const(&self, c: &GaussRat) -> Self {
                let e = Expr::constant(&self.0.sig, c.clone());
                $name(self.0.scale(&e))
            }

            /// Graded-commutative associative product within one variance.
            pub fn wedge(&self, other: &Self) -> Result<Self, GeomError> {
                Ok($name(self.0.wedge(&other.0)?))
            }

            /// Componentwise complex conjugation.
            pub fn conjugate(&self) -> Result<Self, GeomError> {
                let mut s = Skew::zero(&self.0.sig, self.0.grade);
                for (k, v) in &self.0.comps {
                    s.insert(k.clone(), v.conjugate()?);
                }
                Ok($name(s))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, $basis)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self)
            }
        }
    };
}

/// Contravariant antisymmetric tensor (multivector field on the chart).
#[derive(Clone, PartialEq)]
pub struct MultiVector(pub(crate) Skew);

/// Covariant antisymmetric tensor (differential form on the chart).
#[derive(Clone, PartialEq)]
pub struct Form(pub(crate) Skew);

tensor_api!(MultiVector, "d/d");
tensor_api!(Form, "dx");

impl MultiVector {
    /// The coordinate vector field along coordinate `i`.
    pub fn basis_vector(sig: &Arc<ChartSignature>, i: usize) -> Self {
        let mut s = Skew::zero(sig, 1);
        s.insert(vec![i], Expr::one(sig));
        MultiVector(s)
    }

    /// Evaluation on grade-1 forms: `P(a1,...,ak)`.
    pub fn evaluate(&self, args: &[&Form]) -> Result<Expr, GeomError> {
        let raw: Vec<&Skew> = args.iter().map(|f| &f.0).collect();
        self.0.evaluate(&raw)
    }

    /// Directional derivative of a scalar along a vector field.
    pub fn apply_to_scalar(&self, g: &Expr) -> Result<Expr, GeomError> {
        if self.0.grade != 1 {
            return Err(GeomError::GradeMismatch {
                expected: 1,
                got: self.0.grade,
            });
        }
        if g.signature() != &self.0.sig {
            return Err(GeomError::ChartMismatch);
        }
        let mut out = Expr::zero(&self.0.sig);
        for (idx, coeff) in &self.0.comps {
            out = &out + &(coeff * &g.differentiate_index(idx[0]));
        }
        Ok(out)
    }
}

impl Form {
    /// The coordinate coform `dx_i`.
    pub fn basis_coform(sig: &Arc<ChartSignature>, i: usize) -> Self {
        let mut s = Skew::zero(sig, 1);
        s.insert(vec![i], Expr::one(sig));
        Form(s)
    }

    /// Evaluation on grade-1 multivectors: `eta(X1,...,Xk)`.
    pub fn evaluate(&self, args: &[&MultiVector]) -> Result<Expr, GeomError> {
        let raw: Vec<&Skew> = args.iter().map(|f| &f.0).collect();
        self.0.evaluate(&raw)
    }

    /// The differential of a scalar function.
    pub fn differential(g: &Expr) -> Form {
        let sig = g.signature().clone();
        let mut s = Skew::zero(&sig, 1);
        for i in 0..sig.dim() {
            s.insert(vec![i], g.differentiate_index(i));
        }
        Form(s)
    }
}

/// Natural pairing `<eta, X>` of a 1-form with a vector field.
pub fn pairing(eta: &Form, x: &MultiVector) -> Result<Expr, GeomError> {
    eta.evaluate(&[x])
}

/// Exterior derivative; satisfies d(d(eta)) = 0 and the graded Leibniz rule.
pub fn exterior_derivative(eta: &Form) -> Form {
    let sig = &eta.0.sig;
    let mut out = Skew::zero(sig, eta.0.grade + 1);
    for (idx, coeff) in &eta.0.comps {
        for i in 0..sig.dim() {
            if idx.contains(&i) {
                continue;
            }
            let d = coeff.differentiate_index(i);
            if d.is_zero() {
                continue;
            }
            let mut t = Vec::with_capacity(idx.len() + 1);
            t.push(i);
            t.extend_from_slice(idx);
            out.add_signed(&t, d);
        }
    }
    Form(out)
}

/// The bundle map induced by a bivector: on grade 1, `<b, sharp(L, a)> =
/// L(a, b)`; on grade k it is the natural extension
/// `sharp(L, eta)(a1,...,ak) = (-1)^k eta(sharp(L,a1),...,sharp(L,ak))`;
/// on grade 0 the identity.
pub fn sharp(l: &MultiVector, eta: &Form) -> Result<MultiVector, GeomError> {
    if l.0.sig != eta.0.sig {
        return Err(GeomError::ChartMismatch);
    }
    if l.0.grade != 2 {
        return Err(GeomError::GradeMismatch {
            expected: 2,
            got: l.0.grade,
        });
    }
    let sig = &l.0.sig;
    let k = eta.0.grade;
    if k == 0 {
        let mut s = Skew::zero(sig, 0);
        s.insert(Vec::new(), eta.0.component(&[]));
        return Ok(MultiVector(s));
    }
    let images = sharp_basis_images(l)?;
    let mut out = Skew::zero(sig, k);
    let mut seen: std::collections::BTreeSet<Vec<usize>> = Default::default();
    // Only index tuples drawn from coordinates appearing in eta can
    // contribute; iterate over the tuples of the full chart.
    let dim = sig.dim();
    let tuples = increasing_tuples(dim, k);
    for t in tuples {
        if !seen.insert(t.clone()) {
            continue;
        }
        let args: Vec<&Skew> = t.iter().map(|&i| &images[i].0).collect();
        let mut val = eta.0.evaluate(&args)?;
        if k % 2 == 1 {
            val = -val;
        }
        out.insert(t, val);
    }
    Ok(MultiVector(out))
}

/// Images of the basis coforms under the grade-1 sharp map.
pub(crate) fn sharp_basis_images(l: &MultiVector) -> Result<Vec<MultiVector>, GeomError> {
    let sig = &l.0.sig;
    let dim = sig.dim();
    let mut images = Vec::with_capacity(dim);
    for i in 0..dim {
        // <dx_j, sharp(dx_i)> = L(dx_i, dx_j) = L-component (i, j) (signed).
        let mut s = Skew::zero(sig, 1);
        for j in 0..dim {
            if j == i {
                continue;
            }
            let c = l.component(&[i, j]);
            s.insert(vec![j], c);
        }
        images.push(MultiVector(s));
    }
    Ok(images)
}

/// All strictly increasing k-tuples from 0..dim.
pub fn increasing_tuples(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > dim {
        return out;
    }
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 <= dim - (k - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Interior product by a vector field: antiderivation of degree -1 with
/// `i_X i_X = 0`.
pub fn interior_product(x: &MultiVector, eta: &Form) -> Result<Form, GeomError> {
    if x.0.sig != eta.0.sig {
        return Err(GeomError::ChartMismatch);
    }
    if x.0.grade != 1 {
        return Err(GeomError::GradeMismatch {
            expected: 1,
            got: x.0.grade,
        });
    }
    if eta.0.grade == 0 {
        return Ok(Form::zero(&eta.0.sig, 0));
    }
    let mut out = Skew::zero(&eta.0.sig, eta.0.grade - 1);
    for (idx, coeff) in &eta.0.comps {
        for (a, &i) in idx.iter().enumerate() {
            let xi = x.0.component(&[i]);
            if xi.is_zero() {
                continue;
            }
            let rest: Vec<usize> = idx
                .iter()
                .enumerate()
                .filter(|(b, _)| *b != a)
                .map(|(_, &v)| v)
                .collect();
            let mut val = &xi * coeff;
            if a % 2 == 1 {
                val = -val;
            }
            out.insert(rest, val);
        }
    }
    Ok(Form(out))
}

/// Lie derivative of a form along a vector field (Cartan formula).
pub fn lie_derivative(x: &MultiVector, eta: &Form) -> Result<Form, GeomError> {
    let a = interior_product(x, &exterior_derivative(eta))?;
    let b = exterior_derivative(&interior_product(x, eta)?);
    a.add(&b)
}

/// Koszul bracket of 1-forms induced by a bivector:
/// `{a,b} = L_{sharp a} b - L_{sharp b} a - d(L(a,b))`.
pub fn koszul_bracket(l: &MultiVector, alpha: &Form, beta: &Form) -> Result<Form, GeomError> {
    for f in [alpha, beta] {
        if f.0.grade != 1 {
            return Err(GeomError::GradeMismatch {
                expected: 1,
                got: f.0.grade,
            });
        }
    }
    let xa = sharp(l, alpha)?;
    let xb = sharp(l, beta)?;
    let t1 = lie_derivative(&xa, beta)?;
    let t2 = lie_derivative(&xb, alpha)?;
    let lab = l.evaluate(&[alpha, beta])?;
    let t3 = Form::differential(&lab);
    t1.sub(&t2)?.sub(&t3)
}

/// Report of the two defining residuals of a twisted Poisson pair.
#[derive(Debug, Clone)]
pub struct TwistedPoissonReport {
    /// Components of d(phi).
    pub closed: Vec<(Vec<usize>, Expr)>,
    /// Components of (1/2)[Lambda,Lambda] - sharp(Lambda)(phi).
    pub structure: Vec<(Vec<usize>, Expr)>,
}

impl TwistedPoissonReport {
    pub fn passes(&self) -> bool {
        self.closed.iter().all(|(_, e)| e.is_zero())
            && self.structure.iter().all(|(_, e)| e.is_zero())
    }
}

/// Computes the residuals of d(phi) = 0 and (1/2)[L,L] = sharp(L)(phi).
pub fn check_twisted_poisson(l: &MultiVector, phi: &Form) -> Result<TwistedPoissonReport, GeomError> {
    if l.0.sig != phi.0.sig {
        return Err(GeomError::ChartMismatch);
    }
    if l.0.grade != 2 {
        return Err(GeomError::GradeMismatch {
            expected: 2,
            got: l.0.grade,
        });
    }
    if phi.0.grade != 3 {
        return Err(GeomError::GradeMismatch {
            expected: 3,
            got: phi.0.grade,
        });
    }
    let dphi = exterior_derivative(phi);
    let closed: Vec<(Vec<usize>, Expr)> = dphi
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let half = GaussRat::from_ratio(1, 2);
    let ll = schouten_bracket(l, l)?.scale_const(&half);
    let sp = sharp(l, phi)?;
    let diff = ll.sub(&sp)?;
    let structure: Vec<(Vec<usize>, Expr)> = diff
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(TwistedPoissonReport { closed, structure })
}

/// A bivector paired with a background 3-form satisfying (or declared to
/// satisfy) the twisted Poisson condition.
#[derive(Clone)]
pub struct TwistedPoissonStructure {
    pub lambda: MultiVector,
    pub phi: Form,
}

impl TwistedPoissonStructure {
    /// Builds the pair after verifying both defining residuals vanish.
    pub fn new(lambda: MultiVector, phi: Form) -> Result<Self, GeomError> {
        let report = check_twisted_poisson(&lambda, &phi)?;
        if !report.passes() {
            let offending = report
                .closed
                .iter()
                .chain(report.structure.iter())
                .find(|(_, e)| !e.is_zero())
                .map(|(k, e)| format!("component {:?}: {}", k, e))
                .unwrap_or_default();
            return Err(GeomError::StructureCheck(offending));
        }
        Ok(TwistedPoissonStructure { lambda, phi })
    }

    /// Builds the pair without verification; for negative tests and for
    /// residual reporting on user-supplied data.
    pub fn new_unchecked(lambda: MultiVector, phi: Form) -> Self {
        TwistedPoissonStructure { lambda, phi }
    }

    pub fn signature(&self) -> &Arc<ChartSignature> {
        self.lambda.signature()
    }
}

/// Twisted bracket of 1-forms: the Koszul bracket plus the background
/// correction `phi(sharp a, sharp b, .)`.
pub fn twisted_bracket(
    s: &TwistedPoissonStructure,
    alpha: &Form,
    beta: &Form,
) -> Result<Form, GeomError> {
    let k = koszul_bracket(&s.lambda, alpha, beta)?;
    let xa = sharp(&s.lambda, alpha)?;
    let xb = sharp(&s.lambda, beta)?;
    let corr = interior_product(&xb, &interior_product(&xa, &s.phi)?)?;
    k.add(&corr)
}

/// Precomputed data for the twisted differential: the sharp images of the
/// basis coforms and the twisted brackets of all basis coform pairs. Build
/// once when applying `del_phi` in a loop.
pub struct TwistedContext<'a> {
    structure: &'a TwistedPoissonStructure,
    images: Vec<MultiVector>,
    basis_brackets: BTreeMap<(usize, usize), Form>,
}

impl<'a> TwistedContext<'a> {
    pub fn new(s: &'a TwistedPoissonStructure) -> Result<Self, GeomError> {
        let sig = s.signature();
        let dim = sig.dim();
        let images = sharp_basis_images(&s.lambda)?;
        let mut basis_brackets = BTreeMap::new();
        for i in 0..dim {
            for j in i + 1..dim {
                let bi = Form::basis_coform(sig, i);
                let bj = Form::basis_coform(sig, j);
                basis_brackets.insert((i, j), twisted_bracket(s, &bi, &bj)?);
            }
        }
        Ok(TwistedContext {
            structure: s,
            images,
            basis_brackets,
        })
    }

    pub fn structure(&self) -> &TwistedPoissonStructure {
        self.structure
    }

    /// The Lichnerowicz-type differential of the twisted cotangent
    /// algebroid, via the alternating-sum formula with anchor `sharp` and
    /// the twisted bracket. Squares to zero whenever the structure
    /// residuals vanish.
    pub fn del_phi(&self, p: &MultiVector) -> Result<MultiVector, GeomError> {
        let sig = self.structure.signature();
        if p.0.sig != *sig {
            return Err(GeomError::ChartMismatch);
        }
        let dim = sig.dim();
        let k = p.0.grade;
        let mut out = Skew::zero(sig, k + 1);
        for tuple in increasing_tuples(dim, k + 1) {
            let mut val = Expr::zero(sig);
            // anchor terms
            for (a, &ia) in tuple.iter().enumerate() {
                let rest: Vec<usize> = tuple
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| *b != a)
                    .map(|(_, &v)| v)
                    .collect();
                let pcomp = p.0.component(&rest);
                if pcomp.is_zero() {
                    continue;
                }
                let deriv = self.images[ia].apply_to_scalar(&pcomp)?;
                if a % 2 == 0 {
                    val = &val + &deriv;
                } else {
                    val = &val - &deriv;
                }
            }
            // bracket terms
            for a in 0..tuple.len() {
                for b in a + 1..tuple.len() {
                    let (ia, ib) = (tuple[a], tuple[b]);
                    let bracket = self.basis_brackets.get(&(ia, ib)).unwrap();
                    let rest: Vec<usize> = tuple
                        .iter()
                        .enumerate()
                        .filter(|(c, _)| *c != a && *c != b)
                        .map(|(_, &v)| v)
                        .collect();
                    // P(bracket, rest...) expanded along the bracket
                    // components.
                    let mut term = Expr::zero(sig);
                    for (bidx, bcoeff) in bracket.components() {
                        let m = bidx[0];
                        if rest.contains(&m) {
                            continue;
                        }
                        let mut full = Vec::with_capacity(k);
                        full.push(m);
                        full.extend_from_slice(&rest);
                        if let Some((sorted, sign)) = sort_indices(&full) {
                            let mut c = bcoeff * &p.0.component(&sorted);
                            if sign < 0 {
                                c = -c;
                            }
                            term = &term + &c;
                        }
                    }
                    // sign (-1)^{(a+1)+(b+1)} = (-1)^{a+b}
                    if (a + b) % 2 == 0 {
                        val = &val + &term;
                    } else {
                        val = &val - &term;
                    }
                }
            }
            out.insert(tuple, val);
        }
        Ok(MultiVector(out))
    }
}

/// One-shot form of [`TwistedContext::del_phi`].
pub fn del_phi(s: &TwistedPoissonStructure, p: &MultiVector) -> Result<MultiVector, GeomError> {
    TwistedContext::new(s)?.del_phi(p)
}

/// Bracket of scalar functions, `{f,g} = Lambda(df,dg)`.
pub fn function_bracket(s: &TwistedPoissonStructure, f: &Expr, g: &Expr) -> Result<Expr, GeomError> {
    let df = Form::differential(f);
    let dg = Form::differential(g);
    s.lambda.evaluate(&[&df, &dg])
}

/// The twisted Jacobi defect
/// `{f,{g,h}} + {g,{h,f}} + {h,{f,g}} - sharp(phi)(df,dg,dh)`;
/// identically zero for a valid structure.
pub fn jacobiator(
    s: &TwistedPoissonStructure,
    f: &Expr,
    g: &Expr,
    h: &Expr,
) -> Result<Expr, GeomError> {
    let cyc = |a: &Expr, b: &Expr, c: &Expr| -> Result<Expr, GeomError> {
        function_bracket(s, a, &function_bracket(s, b, c)?)
    };
    let mut total = cyc(f, g, h)?;
    total = &total + &cyc(g, h, f)?;
    total = &total + &cyc(h, f, g)?;
    let sp = sharp(&s.lambda, &s.phi)?;
    let df = Form::differential(f);
    let dg = Form::differential(g);
    let dh = Form::differential(h);
    let corr = sp.evaluate(&[&df, &dg, &dh])?;
    Ok(&total - &corr)
}

/// Divergence of a vector field with respect to the coordinate volume.
pub fn divergence(x: &MultiVector) -> Result<Expr, GeomError> {
    if x.0.grade != 1 {
        return Err(GeomError::GradeMismatch {
            expected: 1,
            got: x.0.grade,
        });
    }
    let sig = &x.0.sig;
    let mut out = Expr::zero(sig);
    for (idx, coeff) in &x.0.comps {
        out = &out + &coeff.differentiate_index(idx[0]);
    }
    Ok(out)
}

/// The constant-coefficient symplectic form `sum_k dx_{2k-1} ^ dx_{2k}`
/// over the first `2n` coordinates of the chart.
pub fn standard_symplectic_form(sig: &Arc<ChartSignature>, n_pairs: usize) -> Result<Form, GeomError> {
    if 2 * n_pairs > sig.dim() {
        return Err(GeomError::IndexOutOfRange(2 * n_pairs, sig.dim()));
    }
    let mut comps = Vec::new();
    for k in 0..n_pairs {
        comps.push((vec![2 * k, 2 * k + 1], Expr::one(sig)));
    }
    Form::from_components(sig, 2, comps)
}

/// Inverts a constant-coefficient symplectic form through the convention
/// `i(sharp(L)(a)) omega = -a`: solves one exact linear system per basis
/// coform supported by `omega`, and sets the bivector to zero off the
/// support.
pub fn poisson_from_symplectic(omega: &Form) -> Result<MultiVector, GeomError> {
    if omega.0.grade != 2 {
        return Err(GeomError::GradeMismatch {
            expected: 2,
            got: omega.0.grade,
        });
    }
    let sig = &omega.0.sig;
    let mut support: Vec<usize> = Vec::new();
    for (idx, coeff) in omega.components() {
        if coeff.as_constant().is_none() {
            return Err(GeomError::NonConstantForm);
        }
        for &i in idx {
            if !support.contains(&i) {
                support.push(i);
            }
        }
    }
    support.sort_unstable();
    let m = support.len();
    // M[a][b] = omega(e_a, e_b) over the support.
    let mut mat = Mat::<GaussRat>::zeros(m, m);
    for (a, &ia) in support.iter().enumerate() {
        for (b, &ib) in support.iter().enumerate() {
            if ia == ib {
                continue;
            }
            let c = omega.component(&[ia, ib]).as_constant().unwrap();
            *mat.at_mut(a, b) = c;
        }
    }
    if mat.rank() != m {
        return Err(GeomError::DegenerateForm);
    }
    // For each support coform dx_i: solve (M^T) v = -e_i, giving
    // v = sharp(dx_i) over the support.
    let mut lambda_comps: BTreeMap<Vec<usize>, Expr> = BTreeMap::new();
    let mut mt = Mat::<GaussRat>::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            *mt.at_mut(a, b) = mat.at(b, a).clone();
        }
    }
    for (pos, &i) in support.iter().enumerate() {
        let mut rhs = vec![GaussRat::zero(); m];
        rhs[pos] = -GaussRat::from_int(1);
        let v = match solve(&mt, &rhs) {
            SolveOutcome::Solution(v) => v,
            SolveOutcome::Infeasible(_) => return Err(GeomError::DegenerateForm),
        };
        // Lambda(dx_i, dx_j) = <dx_j, sharp(dx_i)> = v[j]
        for (q, &j) in support.iter().enumerate() {
            if j <= i || v[q].is_zero() {
                continue;
            }
            lambda_comps.insert(vec![i, j], Expr::constant(sig, v[q].clone()));
        }
    }
    MultiVector::from_components(sig, 2, lambda_comps)
}
