//! Exact Chevalley-Eilenberg computations on a finite-dimensional Lie
//! algebra: the Gerstenhaber bracket on the exterior algebra, the twisted
//! differential induced by a bivector/3-form pair, closed 2-forms, the
//! prequantization solvability decision and twisted cohomology dimensions.
//!
//! Coefficients are plain rationals throughout.

use crate::linalg::{in_span, solve, Mat, SolveOutcome};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LieError {
    #[error("basis index {0} out of range for dimension {1}")]
    IndexOutOfRange(usize, usize),
    #[error("indices must be strictly increasing")]
    NotStrictlyIncreasing,
    #[error("structure constants are not antisymmetric")]
    NotAntisymmetric,
    #[error("Jacobi identity fails on basis triple ({0}, {1}, {2})")]
    JacobiFails(usize, usize, usize),
    #[error("dimension mismatch between operands")]
    DimensionMismatch,
    #[error("expected grade {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },
    #[error("the given pair is not a twisted structure: {0}")]
    StructureCheck(String),
    #[error("duplicate basis name `{0}`")]
    DuplicateName(String),
}

pub type Rat = BigRational;

#[cfg(test)]
fn rat(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Finite-dimensional real Lie algebra presented by structure constants
/// over a named basis. Antisymmetry and the Jacobi identity are verified at
/// construction.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraModel {
    names: Vec<String>,
    /// c[(i,j)] for i < j: the bracket [e_i, e_j] as a sparse vector.
    brackets: BTreeMap<(usize, usize), Vec<(usize, Rat)>>,
}

impl LieAlgebraModel {
    pub fn new(
        names: Vec<String>,
        brackets: BTreeMap<(usize, usize), Vec<(usize, Rat)>>,
    ) -> Result<Self, LieError> {
        let n = names.len();
        for i in 0..n {
            for j in i + 1..n {
                if names[i] == names[j] {
                    return Err(LieError::DuplicateName(names[i].clone()));
                }
            }
        }
        for ((i, j), v) in &brackets {
            if *i >= *j {
                return Err(LieError::NotAntisymmetric);
            }
            if *j >= n {
                return Err(LieError::IndexOutOfRange(*j, n));
            }
            for (k, _) in v {
                if *k >= n {
                    return Err(LieError::IndexOutOfRange(*k, n));
                }
            }
        }
        let model = LieAlgebraModel { names, brackets };
        model.verify_jacobi()?;
        Ok(model)
    }

    /// The subalgebra of gl(max(rows,cols), R) spanned by the elementary
    /// matrices `e_(r,c)` for r in `rows`, c in `cols` (1-based), with
    /// `[e_ab, e_cd] = delta_bc e_ad - delta_da e_cb`. Rectangular
    /// row/column sets are always closed under the commutator.
    pub fn gl_subalgebra(rows: &[usize], cols: &[usize]) -> Result<Self, LieError> {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for &r in rows {
            for &c in cols {
                if !pairs.contains(&(r, c)) {
                    pairs.push((r, c));
                }
            }
        }
        pairs.sort_unstable();
        let names: Vec<String> = pairs.iter().map(|(r, c)| format!("e{r}{c}")).collect();
        let index_of = |p: (usize, usize)| pairs.iter().position(|q| *q == p);
        let mut brackets: BTreeMap<(usize, usize), Vec<(usize, Rat)>> = BTreeMap::new();
        for (i, &(a, b)) in pairs.iter().enumerate() {
            for (j, &(c, d)) in pairs.iter().enumerate().skip(i + 1) {
                let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
                if b == c {
                    if let Some(k) = index_of((a, d)) {
                        *acc.entry(k).or_insert_with(Rat::zero) += Rat::one();
                    } else {
                        return Err(LieError::StructureCheck(format!(
                            "span not closed: missing e{a}{d}"
                        )));
                    }
                }
                if d == a {
                    if let Some(k) = index_of((c, b)) {
                        *acc.entry(k).or_insert_with(Rat::zero) -= Rat::one();
                    } else {
                        return Err(LieError::StructureCheck(format!(
                            "span not closed: missing e{c}{b}"
                        )));
                    }
                }
                let v: Vec<(usize, Rat)> =
                    acc.into_iter().filter(|(_, q)| !q.is_zero()).collect();
                if !v.is_empty() {
                    brackets.insert((i, j), v);
                }
            }
        }
        Self::new(names, brackets)
    }

    pub fn abelian(dim: usize) -> Self {
        LieAlgebraModel {
            names: (1..=dim).map(|k| format!("e{k}")).collect(),
            brackets: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn basis_name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn basis_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `[e_i, e_j]` as a sparse vector, for any index order.
    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<(usize, Rat)> {
        if i == j {
            return Vec::new();
        }
        if i < j {
            self.brackets.get(&(i, j)).cloned().unwrap_or_default()
        } else {
            self.brackets
                .get(&(j, i))
                .map(|v| v.iter().map(|(k, q)| (*k, -q.clone())).collect())
                .unwrap_or_default()
        }
    }

    /// Structure constant c^k_{ij}.
    pub fn c(&self, k: usize, i: usize, j: usize) -> Rat {
        self.bracket_basis(i, j)
            .into_iter()
            .find(|(m, _)| *m == k)
            .map(|(_, q)| q)
            .unwrap_or_else(Rat::zero)
    }

    fn verify_jacobi(&self) -> Result<(), LieError> {
        let n = self.dim();
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    // [[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]
                    let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
                    let add =
                        |outer: Vec<(usize, Rat)>, other: usize, acc: &mut BTreeMap<usize, Rat>, this: &Self| {
                            for (m, q) in outer {
                                for (l, r) in this.bracket_basis(m, other) {
                                    *acc.entry(l).or_insert_with(Rat::zero) += &q * &r;
                                }
                            }
                        };
                    add(self.bracket_basis(i, j), k, &mut acc, self);
                    add(self.bracket_basis(j, k), i, &mut acc, self);
                    add(self.bracket_basis(k, i), j, &mut acc, self);
                    if acc.values().any(|q| !q.is_zero()) {
                        return Err(LieError::JacobiFails(i, j, k));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Shared sparse storage for exterior-algebra elements with rational
/// coefficients, in either variance.
#[derive(Clone, PartialEq)]
pub(crate) struct AlgSkew {
    pub(crate) dim: usize,
    pub(crate) grade: usize,
    pub(crate) comps: BTreeMap<Vec<usize>, Rat>,
}

impl AlgSkew {
    fn zero(dim: usize, grade: usize) -> Self {
        AlgSkew {
            dim,
            grade,
            comps: BTreeMap::new(),
        }
    }

    fn insert(&mut self, idx: Vec<usize>, q: Rat) {
        if q.is_zero() {
            return;
        }
        match self.comps.get_mut(&idx) {
            Some(v) => {
                *v += q;
                if v.is_zero() {
                    self.comps.remove(&idx);
                }
            }
            None => {
                self.comps.insert(idx, q);
            }
        }
    }

    fn add_signed(&mut self, idx: &[usize], q: Rat) {
        if q.is_zero() {
            return;
        }
        if let Some((sorted, sign)) = crate::geom::sort_indices(idx) {
            self.insert(sorted, if sign < 0 { -q } else { q });
        }
    }

    fn component(&self, idx: &[usize]) -> Rat {
        self.comps.get(idx).cloned().unwrap_or_else(Rat::zero)
    }

    fn add(&self, o: &AlgSkew) -> Result<AlgSkew, LieError> {
        if self.dim != o.dim {
            return Err(LieError::DimensionMismatch);
        }
        if self.grade != o.grade {
            return Err(LieError::GradeMismatch {
                expected: self.grade,
                got: o.grade,
            });
        }
        let mut out = self.clone();
        for (k, v) in &o.comps {
            out.insert(k.clone(), v.clone());
        }
        Ok(out)
    }

    fn neg(&self) -> AlgSkew {
        AlgSkew {
            dim: self.dim,
            grade: self.grade,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    fn scale(&self, q: &Rat) -> AlgSkew {
        if q.is_zero() {
            return AlgSkew::zero(self.dim, self.grade);
        }
        AlgSkew {
            dim: self.dim,
            grade: self.grade,
            comps: self.comps.iter().map(|(k, v)| (k.clone(), v * q)).collect(),
        }
    }

    fn wedge(&self, o: &AlgSkew) -> Result<AlgSkew, LieError> {
        if self.dim != o.dim {
            return Err(LieError::DimensionMismatch);
        }
        let mut out = AlgSkew::zero(self.dim, self.grade + o.grade);
        for (ka, va) in &self.comps {
            for (kb, vb) in &o.comps {
                let mut idx = ka.clone();
                idx.extend_from_slice(kb);
                out.add_signed(&idx, va * vb);
            }
        }
        Ok(out)
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, model: &LieAlgebraModel, dual: bool) -> fmt::Result {
        if self.comps.is_empty() {
            return write!(f, "0");
        }
        let star = if dual { "*" } else { "" };
        let mut first = true;
        for (idx, q) in &self.comps {
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
            if !mag.is_one() || idx.is_empty() {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
                if !idx.is_empty() {
                    write!(f, "*")?;
                }
            }
            let names: Vec<String> = idx
                .iter()
                .map(|&i| format!("{}{}", model.basis_name(i), star))
                .collect();
            write!(f, "{}", names.join("^"))?;
        }
        Ok(())
    }
}

macro_rules! alg_api {
    ($name:ident) => {
        impl $name {
            pub fn zero(dim: usize, grade: usize) -> Self {
                $name(AlgSkew::zero(dim, grade))
            }

            pub fn scalar(dim: usize, q: Rat) -> Self {
                let mut s = AlgSkew::zero(dim, 0);
                s.insert(Vec::new(), q);
                $name(s)
            }

            pub fn basis(dim: usize, i: usize) -> Self {
                let mut s = AlgSkew::zero(dim, 1);
                s.insert(vec![i], Rat::one());
                $name(s)
            }

            pub fn from_components<I>(dim: usize, grade: usize, comps: I) -> Result<Self, LieError>
            where
                I: IntoIterator<Item = (Vec<usize>, Rat)>,
            {
                let mut s = AlgSkew::zero(dim, grade);
                for (idx, q) in comps {
                    if idx.len() != grade {
                        return Err(LieError::GradeMismatch {
                            expected: grade,
                            got: idx.len(),
                        });
                    }
                    for &i in &idx {
                        if i >= dim {
                            return Err(LieError::IndexOutOfRange(i, dim));
                        }
                    }
                    if !idx.windows(2).all(|w| w[0] < w[1]) {
                        return Err(LieError::NotStrictlyIncreasing);
                    }
                    s.insert(idx, q);
                }
                Ok($name(s))
            }

            pub fn dim(&self) -> usize {
                self.0.dim
            }

            pub fn grade(&self) -> usize {
                self.0.grade
            }

            pub fn component(&self, idx: &[usize]) -> Rat {
                if let Some((sorted, sign)) = crate::geom::sort_indices(idx) {
                    let q = self.0.component(&sorted);
                    if sign < 0 {
                        -q
                    } else {
                        q
                    }
                } else {
                    Rat::zero()
                }
            }

            pub fn components(&self) -> impl Iterator<Item = (&Vec<usize>, &Rat)> {
                self.0.comps.iter()
            }

            pub fn is_zero(&self) -> bool {
                self.0.comps.is_empty()
            }

            pub fn add(&self, o: &Self) -> Result<Self, LieError> {
                Ok($name(self.0.add(&o.0)?))
            }

            pub fn sub(&self, o: &Self) -> Result<Self, LieError> {
                Ok($name(self.0.add(&o.0.neg())?))
            }

            pub fn neg(&self) -> Self {
                $name(self.0.neg())
            }

            pub fn scale(&self, q: &Rat) -> Self {
                $name(self.0.scale(q))
            }

            pub fn wedge(&self, o: &Self) -> Result<Self, LieError> {
                Ok($name(self.0.wedge(&o.0)?))
            }

            /// Flattens a grade-k element to the coefficient vector over all
            /// strictly increasing k-tuples, in lexicographic order.
            pub fn to_vec(&self) -> Vec<Rat> {
                let tuples = crate::geom::increasing_tuples(self.0.dim, self.0.grade);
                tuples.iter().map(|t| self.0.component(t)).collect()
            }

            pub fn from_vec(dim: usize, grade: usize, v: &[Rat]) -> Self {
                let tuples = crate::geom::increasing_tuples(dim, grade);
                assert_eq!(tuples.len(), v.len());
                let mut s = AlgSkew::zero(dim, grade);
                for (t, q) in tuples.into_iter().zip(v.iter()) {
                    s.insert(t, q.clone());
                }
                $name(s)
            }

            pub fn display<'a>(&'a self, model: &'a LieAlgebraModel) -> AlgDisplay<'a, $name> {
                AlgDisplay { value: self, model }
            }
        }
    };
}

/// Element of the exterior algebra over the Lie algebra itself.
#[derive(Clone, PartialEq)]
pub struct AlgMultiVector(pub(crate) AlgSkew);

/// Element of the exterior algebra over the dual space.
#[derive(Clone, PartialEq)]
pub struct AlgForm(pub(crate) AlgSkew);

alg_api!(AlgMultiVector);
alg_api!(AlgForm);

pub struct AlgDisplay<'a, T> {
    value: &'a T,
    model: &'a LieAlgebraModel,
}

impl<'a> fmt::Display for AlgDisplay<'a, AlgMultiVector> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.0.fmt_with(f, self.model, false)
    }
}

impl<'a> fmt::Display for AlgDisplay<'a, AlgForm> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.value.0.fmt_with(f, self.model, true)
    }
}

impl fmt::Debug for AlgMultiVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgMultiVector{:?}", self.0.comps)
    }
}

impl fmt::Debug for AlgForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgForm{:?}", self.0.comps)
    }
}

fn det_rat(m: &[Vec<Rat>]) -> Rat {
    match m.len() {
        0 => Rat::one(),
        1 => m[0][0].clone(),
        2 => &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]),
        n => {
            let mut acc = Rat::zero();
            for j in 0..n {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Rat>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(c, _)| *c != j)
                            .map(|(_, e)| e.clone())
                            .collect()
                    })
                    .collect();
                let term = &m[0][j] * &det_rat(&minor);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

impl AlgMultiVector {
    /// Evaluation on grade-1 forms (determinant convention).
    pub fn evaluate(&self, args: &[&AlgForm]) -> Result<Rat, LieError> {
        if args.len() != self.0.grade {
            return Err(LieError::GradeMismatch {
                expected: self.0.grade,
                got: args.len(),
            });
        }
        if self.0.grade == 0 {
            return Ok(self.0.component(&[]));
        }
        let mut total = Rat::zero();
        for (idx, coeff) in &self.0.comps {
            let m: Vec<Vec<Rat>> = args
                .iter()
                .map(|a| idx.iter().map(|&i| a.0.component(&[i])).collect())
                .collect();
            total += coeff * &det_rat(&m);
        }
        Ok(total)
    }
}

impl AlgForm {
    /// Evaluation on grade-1 multivectors.
    pub fn evaluate(&self, args: &[&AlgMultiVector]) -> Result<Rat, LieError> {
        if args.len() != self.0.grade {
            return Err(LieError::GradeMismatch {
                expected: self.0.grade,
                got: args.len(),
            });
        }
        if self.0.grade == 0 {
            return Ok(self.0.component(&[]));
        }
        let mut total = Rat::zero();
        for (idx, coeff) in &self.0.comps {
            let m: Vec<Vec<Rat>> = args
                .iter()
                .map(|a| idx.iter().map(|&i| a.0.component(&[i])).collect())
                .collect();
            total += coeff * &det_rat(&m);
        }
        Ok(total)
    }
}

/// Chevalley-Eilenberg differential with trivial coefficients: the
/// antiderivation extending `d(e_m*) = -sum_{i<j} c^m_{ij} e_i* ^ e_j*`.
/// Satisfies d(d(xi)) = 0 by the Jacobi identity.
pub fn ce_differential(model: &LieAlgebraModel, xi: &AlgForm) -> Result<AlgForm, LieError> {
    let dim = model.dim();
    if xi.0.dim != dim {
        return Err(LieError::DimensionMismatch);
    }
    if xi.0.grade == 0 {
        return Ok(AlgForm::zero(dim, 1));
    }
    // d(e_m*) for each m, once.
    let mut d_basis: Vec<AlgForm> = Vec::with_capacity(dim);
    for m in 0..dim {
        let mut s = AlgSkew::zero(dim, 2);
        for i in 0..dim {
            for j in i + 1..dim {
                let c = model.c(m, i, j);
                if !c.is_zero() {
                    s.insert(vec![i, j], -c);
                }
            }
        }
        d_basis.push(AlgForm(s));
    }
    let mut out = AlgSkew::zero(dim, xi.0.grade + 1);
    for (idx, coeff) in &xi.0.comps {
        for (pos, &m) in idx.iter().enumerate() {
            let rest: Vec<usize> = idx
                .iter()
                .enumerate()
                .filter(|(p, _)| *p != pos)
                .map(|(_, &v)| v)
                .collect();
            for (didx, dq) in &d_basis[m].0.comps {
                let mut full = didx.clone();
                full.extend_from_slice(&rest);
                let mut q = coeff * dq;
                if pos % 2 == 1 {
                    q = -q;
                }
                out.add_signed(&full, q);
            }
        }
    }
    Ok(AlgForm(out))
}

/// Gerstenhaber extension of the Lie bracket to the exterior algebra:
/// `[X_1^..^X_p, Y_1^..^Y_q] = sum (-1)^(a+b) [X_a,Y_b] ^ rest`, with
/// scalars central. Matches the chart-level Schouten convention.
pub fn algebraic_schouten(
    model: &LieAlgebraModel,
    p: &AlgMultiVector,
    q: &AlgMultiVector,
) -> Result<AlgMultiVector, LieError> {
    let dim = model.dim();
    if p.0.dim != dim || q.0.dim != dim {
        return Err(LieError::DimensionMismatch);
    }
    if p.0.grade == 0 || q.0.grade == 0 {
        return Ok(AlgMultiVector::zero(
            dim,
            (p.0.grade + q.0.grade).saturating_sub(1),
        ));
    }
    let mut out = AlgSkew::zero(dim, p.0.grade + q.0.grade - 1);
    for (ia, ca) in &p.0.comps {
        for (ib, cb) in &q.0.comps {
            for (a, &xa) in ia.iter().enumerate() {
                for (b, &yb) in ib.iter().enumerate() {
                    let br = model.bracket_basis(xa, yb);
                    if br.is_empty() {
                        continue;
                    }
                    // sign (-1)^{(a+1)+(b+1)} = (-1)^{a+b}
                    let base_sign = if (a + b) % 2 == 0 { 1 } else { -1 };
                    let rest_a: Vec<usize> = ia
                        .iter()
                        .enumerate()
                        .filter(|(s, _)| *s != a)
                        .map(|(_, &v)| v)
                        .collect();
                    let rest_b: Vec<usize> = ib
                        .iter()
                        .enumerate()
                        .filter(|(s, _)| *s != b)
                        .map(|(_, &v)| v)
                        .collect();
                    for (m, qc) in &br {
                        let mut idx = vec![*m];
                        idx.extend_from_slice(&rest_a);
                        idx.extend_from_slice(&rest_b);
                        let mut coeff = ca * cb * qc;
                        if base_sign < 0 {
                            coeff = -coeff;
                        }
                        out.add_signed(&idx, coeff);
                    }
                }
            }
        }
    }
    Ok(AlgMultiVector(out))
}

/// The bundle-map analogue of the chart-level sharp: on grade 1,
/// `<b, sharp(r)(a)> = r(a,b)`; on grade k,
/// `sharp(r)(xi)(a_1..a_k) = (-1)^k xi(sharp a_1, ..., sharp a_k)`.
pub fn algebraic_sharp(r: &AlgMultiVector, xi: &AlgForm) -> Result<AlgMultiVector, LieError> {
    if r.0.grade != 2 {
        return Err(LieError::GradeMismatch {
            expected: 2,
            got: r.0.grade,
        });
    }
    let dim = r.0.dim;
    if xi.0.dim != dim {
        return Err(LieError::DimensionMismatch);
    }
    let k = xi.0.grade;
    if k == 0 {
        return Ok(AlgMultiVector::scalar(dim, xi.0.component(&[])));
    }
    // images[i] = sharp(e_i*) as a column of rationals.
    let images: Vec<Vec<Rat>> = (0..dim)
        .map(|i| (0..dim).map(|j| r.component(&[i, j])).collect())
        .collect();
    let mut out = AlgSkew::zero(dim, k);
    for t in crate::geom::increasing_tuples(dim, k) {
        // xi(sharp e_{t1}*, ..., sharp e_{tk}*)
        let mut val = Rat::zero();
        for (idx, coeff) in &xi.0.comps {
            let m: Vec<Vec<Rat>> = t
                .iter()
                .map(|&a| idx.iter().map(|&i| images[a][i].clone()).collect())
                .collect();
            val += coeff * &det_rat(&m);
        }
        if k % 2 == 1 {
            val = -val;
        }
        out.insert(t, val);
    }
    Ok(AlgMultiVector(out))
}

/// Report of the two residuals of a twisted structure on a Lie algebra.
#[derive(Debug, Clone)]
pub struct AlgStructureReport {
    pub closed: Vec<(Vec<usize>, Rat)>,
    pub structure: Vec<(Vec<usize>, Rat)>,
}

impl AlgStructureReport {
    pub fn passes(&self) -> bool {
        self.closed.iter().all(|(_, q)| q.is_zero())
            && self.structure.iter().all(|(_, q)| q.is_zero())
    }
}

/// Residuals of `d(phi) = 0` and `(1/2)[r,r] = sharp(r)(phi)`.
pub fn check_twisted_structure(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
) -> Result<AlgStructureReport, LieError> {
    if r.0.grade != 2 {
        return Err(LieError::GradeMismatch {
            expected: 2,
            got: r.0.grade,
        });
    }
    if phi.0.grade != 3 {
        return Err(LieError::GradeMismatch {
            expected: 3,
            got: phi.0.grade,
        });
    }
    let dphi = ce_differential(model, phi)?;
    let closed = dphi
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rr = algebraic_schouten(model, r, r)?.scale(&half);
    let sp = algebraic_sharp(r, phi)?;
    let structure = rr
        .sub(&sp)?
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(AlgStructureReport { closed, structure })
}

/// Coadjoint-type Lie derivative on the dual: `(L_X a)(Y) = -a([X, Y])`,
/// the Cartan formula of the Chevalley-Eilenberg complex.
fn coadjoint_lie(model: &LieAlgebraModel, x: &[(usize, Rat)], a: &AlgForm) -> AlgForm {
    let dim = model.dim();
    debug_assert_eq!(a.0.grade, 1);
    let mut out = AlgSkew::zero(dim, 1);
    for m in 0..dim {
        // gamma(e_m) = -a([X, e_m])
        let mut val = Rat::zero();
        for (xi, xq) in x {
            for (k, q) in model.bracket_basis(*xi, m) {
                val -= xq * &q * &a.0.component(&[k]);
            }
        }
        out.insert(vec![m], val);
    }
    AlgForm(out)
}

/// Twisted bracket on the dual space:
/// `{a,b}^phi = L_{sharp a} b - L_{sharp b} a + phi(sharp a, sharp b, .)`.
pub fn algebraic_twisted_bracket(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
    a: &AlgForm,
    b: &AlgForm,
) -> Result<AlgForm, LieError> {
    let dim = model.dim();
    let sharp_vec = |xi: &AlgForm| -> Vec<(usize, Rat)> {
        let mut v = Vec::new();
        for j in 0..dim {
            let mut q = Rat::zero();
            for (idx, coeff) in &xi.0.comps {
                let i = idx[0];
                q += coeff * &r.component(&[i, j]);
            }
            if !q.is_zero() {
                v.push((j, q));
            }
        }
        v
    };
    let xa = sharp_vec(a);
    let xb = sharp_vec(b);
    let mut out = coadjoint_lie(model, &xa, b)
        .sub(&coadjoint_lie(model, &xb, a))?;
    // phi(Xa, Xb, .)
    let mut corr = AlgSkew::zero(dim, 1);
    for m in 0..dim {
        let mut val = Rat::zero();
        for (idx, coeff) in &phi.0.comps {
            // det over columns (Xa, Xb, e_m)
            let col = |col: usize, i: usize| -> Rat {
                match col {
                    0 => xa
                        .iter()
                        .find(|(j, _)| *j == i)
                        .map(|(_, q)| q.clone())
                        .unwrap_or_else(Rat::zero),
                    1 => xb
                        .iter()
                        .find(|(j, _)| *j == i)
                        .map(|(_, q)| q.clone())
                        .unwrap_or_else(Rat::zero),
                    _ => {
                        if i == m {
                            Rat::one()
                        } else {
                            Rat::zero()
                        }
                    }
                }
            };
            let m3: Vec<Vec<Rat>> = (0..3)
                .map(|row| idx.iter().map(|&i| col(row, i)).collect())
                .collect();
            val += coeff * &det_rat(&m3);
        }
        corr.insert(vec![m], val);
    }
    out = out.add(&AlgForm(corr))?;
    Ok(out)
}

/// The twisted differential on the exterior algebra of the Lie algebra:
/// the alternating-sum formula with the anchor terms dropped (the base is a
/// point, so the anchor acts on constants) and the twisted bracket above.
pub fn algebraic_del_phi(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
    p: &AlgMultiVector,
) -> Result<AlgMultiVector, LieError> {
    let dim = model.dim();
    if p.0.dim != dim {
        return Err(LieError::DimensionMismatch);
    }
    let k = p.0.grade;
    // Precompute {e_i*, e_j*}^phi.
    let mut brackets: BTreeMap<(usize, usize), AlgForm> = BTreeMap::new();
    for i in 0..dim {
        for j in i + 1..dim {
            let a = AlgForm::basis(dim, i);
            let b = AlgForm::basis(dim, j);
            brackets.insert((i, j), algebraic_twisted_bracket(model, r, phi, &a, &b)?);
        }
    }
    let mut out = AlgSkew::zero(dim, k + 1);
    for tuple in crate::geom::increasing_tuples(dim, k + 1) {
        let mut val = Rat::zero();
        for a in 0..tuple.len() {
            for b in a + 1..tuple.len() {
                let (ia, ib) = (tuple[a], tuple[b]);
                let br = brackets.get(&(ia, ib)).unwrap();
                let rest: Vec<usize> = tuple
                    .iter()
                    .enumerate()
                    .filter(|(c, _)| *c != a && *c != b)
                    .map(|(_, &v)| v)
                    .collect();
                let mut term = Rat::zero();
                for (bidx, bq) in &br.0.comps {
                    let m = bidx[0];
                    if rest.contains(&m) {
                        continue;
                    }
                    let mut full = Vec::with_capacity(k);
                    full.push(m);
                    full.extend_from_slice(&rest);
                    if let Some((sorted, sign)) = crate::geom::sort_indices(&full) {
                        let mut c = bq * &p.0.component(&sorted);
                        if sign < 0 {
                            c = -c;
                        }
                        term += c;
                    }
                }
                if (a + b) % 2 == 0 {
                    val += term;
                } else {
                    val -= term;
                }
            }
        }
        out.insert(tuple, val);
    }
    Ok(AlgMultiVector(out))
}

/// Exact basis of the closed 2-forms: the nullspace of the CE differential
/// on grade 2.
pub fn closed_two_forms(model: &LieAlgebraModel) -> Vec<AlgForm> {
    let dim = model.dim();
    let dom = crate::geom::increasing_tuples(dim, 2);
    let cod = crate::geom::increasing_tuples(dim, 3);
    let mut mat = Mat::<Rat>::zeros(cod.len(), dom.len());
    for (c, pair) in dom.iter().enumerate() {
        let basis = AlgForm::from_components(dim, 2, vec![(pair.clone(), Rat::one())]).unwrap();
        let d = ce_differential(model, &basis).unwrap();
        for (r, triple) in cod.iter().enumerate() {
            *mat.at_mut(r, c) = d.0.component(triple);
        }
    }
    mat.nullspace()
        .into_iter()
        .map(|v| AlgForm::from_vec(dim, 2, &v))
        .collect()
}

/// The matrix of `del_phi` from grade `k` to grade `k+1` over the tuple
/// bases.
pub fn del_phi_matrix(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
    k: usize,
) -> Result<Mat<Rat>, LieError> {
    let dim = model.dim();
    let dom = crate::geom::increasing_tuples(dim, k);
    let cod = crate::geom::increasing_tuples(dim, k + 1);
    let mut mat = Mat::<Rat>::zeros(cod.len(), dom.len());
    for (c, t) in dom.iter().enumerate() {
        let basis =
            AlgMultiVector::from_components(dim, k, vec![(t.clone(), Rat::one())]).unwrap();
        let d = algebraic_del_phi(model, r, phi, &basis)?;
        for (rw, tt) in cod.iter().enumerate() {
            *mat.at_mut(rw, c) = d.0.component(tt);
        }
    }
    Ok(mat)
}

/// Dimension of the degree-k twisted cohomology
/// `ker(del_phi on grade k) / im(del_phi on grade k-1)`.
pub fn ltp_cohomology(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
    k: usize,
) -> Result<usize, LieError> {
    let dim = model.dim();
    let dom_size = crate::geom::increasing_tuples(dim, k).len();
    let dk = del_phi_matrix(model, r, phi, k)?;
    let rank_k = dk.rank();
    let kernel = dom_size - rank_k;
    let image_below = if k == 0 {
        0
    } else {
        del_phi_matrix(model, r, phi, k - 1)?.rank()
    };
    Ok(kernel - image_below)
}

/// Outcome of the algebraic prequantization equation
/// `r + del_phi(Z) = sharp(r)(Phi)` with `Phi` ranging over closed 2-forms.
pub enum PrequantOutcome {
    /// A witness pair; closedness of the 2-form holds by construction, its
    /// integrality is an assumption this linear model cannot decide.
    Solvable {
        z: AlgMultiVector,
        phi_two: AlgForm,
    },
    /// A separating functional on grade-2 multivectors: it annihilates every
    /// reachable `sharp(Phi) - del_phi(Z)` but not `r`.
    Unsolvable { certificate: Vec<Rat> },
}

/// Decides the prequantization equation exactly by rational linear algebra
/// over the unknowns `Z` (in the algebra) and `Phi` (in the span of the
/// closed 2-forms).
pub fn solve_prequantization(
    model: &LieAlgebraModel,
    r: &AlgMultiVector,
    phi: &AlgForm,
) -> Result<PrequantOutcome, LieError> {
    let report = check_twisted_structure(model, r, phi)?;
    if !report.passes() {
        return Err(LieError::StructureCheck(
            "input pair fails the twisted-structure residuals".into(),
        ));
    }
    let dim = model.dim();
    let closed = closed_two_forms(model);
    let pairs = crate::geom::increasing_tuples(dim, 2);
    let n_rows = pairs.len();
    let n_unknowns = dim + closed.len();
    // Columns: del_phi(e_m) for each basis vector (negated), then
    // sharp(Phi_b) for each closed basis form. Equation:
    // sharp(Phi) - del_phi(Z) = r.
    let mut a = Mat::<Rat>::zeros(n_rows, n_unknowns);
    for m in 0..dim {
        let dz = algebraic_del_phi(model, r, phi, &AlgMultiVector::basis(dim, m))?;
        for (row, pr) in pairs.iter().enumerate() {
            *a.at_mut(row, m) = -dz.0.component(pr);
        }
    }
    for (bidx, form) in closed.iter().enumerate() {
        let sp = algebraic_sharp(r, form)?;
        for (row, pr) in pairs.iter().enumerate() {
            *a.at_mut(row, dim + bidx) = sp.0.component(pr);
        }
    }
    let b: Vec<Rat> = pairs.iter().map(|pr| r.0.component(pr)).collect();
    match solve(&a, &b) {
        SolveOutcome::Solution(x) => {
            let z = AlgMultiVector::from_vec(dim, 1, &x[..dim]);
            let mut phi_two = AlgForm::zero(dim, 2);
            for (bidx, form) in closed.iter().enumerate() {
                phi_two = phi_two.add(&form.scale(&x[dim + bidx]))?;
            }
            Ok(PrequantOutcome::Solvable { z, phi_two })
        }
        SolveOutcome::Infeasible(y) => Ok(PrequantOutcome::Unsolvable { certificate: y }),
    }
}

/// Checks a claimed span equality by mutual exact containment.
pub fn spans_equal(a: &[AlgForm], b: &[AlgForm]) -> bool {
    if a.is_empty() && b.is_empty() {
        return true;
    }
    let va: Vec<Vec<Rat>> = a.iter().map(|f| f.to_vec()).collect();
    let vb: Vec<Vec<Rat>> = b.iter().map(|f| f.to_vec()).collect();
    va.iter().all(|v| in_span(&vb, v)) && vb.iter().all(|v| in_span(&va, v))
}
