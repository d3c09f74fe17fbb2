//! Polarizations, quantizable-observable membership, half-density transport
//! and the quantum operator on the polarized kernel.
//!
//! A polarization is held as a list of grade-1 generators with constant
//! complex coefficients; membership of a bracket in the polarization is
//! decided by eliminating the generator directions and reading off the
//! residual components along a complement, which for constant-coefficient
//! spans is computed from the reduced row echelon form of the generator
//! matrix.

use crate::expr::{Expr, ExprError};
use crate::gauss::GaussRat;
use crate::geom::{
    divergence, pairing, sharp, Form, GeomError, MultiVector, TwistedPoissonStructure,
};
use crate::linalg::Mat;
use crate::prequant::{BundleError, LineBundleModel};
use num_traits::Zero;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantError {
    #[error("polarization generators must have grade 1")]
    GeneratorGrade,
    #[error("polarization generators must have constant coefficients")]
    NonConstantGenerators,
    #[error("generators fail isotropy: Lambda(a_{0}, a_{1}) != 0")]
    NotIsotropic(usize, usize),
    #[error("complement index {0} out of range")]
    BadComplement(usize),
    #[error("the diagonal pair is excluded from the quantizable-pair relation")]
    DiagonalPair,
    #[error("membership precondition failed for `{0}`: residuals are nonzero")]
    MembershipPrecondition(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Isotropic span of 1-forms; closure under the twisted bracket is reported
/// by [`check_polarization`], not assumed. Projection onto a complement
/// requires constant-coefficient generators and is built on demand.
#[derive(Clone)]
pub struct Polarization {
    pub structure: TwistedPoissonStructure,
    pub generators: Vec<Form>,
    /// Coordinate indices spanning a complement of the generator span; when
    /// not supplied, the non-pivot columns of the generator matrix are used.
    complement: Option<Vec<usize>>,
}

impl Polarization {
    /// Builds the polarization, checking grades and isotropy exactly. An
    /// explicit complement (coordinate indices) may be given; otherwise the
    /// non-pivot coordinates of the generator matrix are used when a
    /// projection is requested.
    pub fn new(
        structure: TwistedPoissonStructure,
        generators: Vec<Form>,
        complement: Option<Vec<usize>>,
    ) -> Result<Self, QuantError> {
        let dim = structure.signature().dim();
        for g in &generators {
            if g.grade() != 1 {
                return Err(QuantError::GeneratorGrade);
            }
        }
        for (i, a) in generators.iter().enumerate() {
            for (j, b) in generators.iter().enumerate().skip(i) {
                let v = structure.lambda.evaluate(&[a, b])?;
                if !v.is_zero() {
                    return Err(QuantError::NotIsotropic(i, j));
                }
            }
        }
        if let Some(c) = &complement {
            for &i in c {
                if i >= dim {
                    return Err(QuantError::BadComplement(i));
                }
            }
        }
        Ok(Polarization {
            structure,
            generators,
            complement,
        })
    }

    /// Row-reduced generator matrix with its pivot columns; requires
    /// constant-coefficient generators.
    fn projection(&self) -> Result<(Mat<GaussRat>, Vec<usize>), QuantError> {
        let dim = self.structure.signature().dim();
        let mut mat = Mat::<GaussRat>::zeros(self.generators.len(), dim);
        for (r, g) in self.generators.iter().enumerate() {
            for (idx, c) in g.components() {
                let Some(value) = c.as_constant() else {
                    return Err(QuantError::NonConstantGenerators);
                };
                *mat.at_mut(r, idx[0]) = value;
            }
        }
        let pivots = mat.rref();
        Ok((mat, pivots))
    }

    /// The complement coordinate indices actually used for residuals.
    pub fn complement(&self) -> Result<Vec<usize>, QuantError> {
        match &self.complement {
            Some(c) => Ok(c.clone()),
            None => {
                let dim = self.structure.signature().dim();
                let (_, pivots) = self.projection()?;
                Ok((0..dim).filter(|i| !pivots.contains(i)).collect())
            }
        }
    }

    /// Reduces a 1-form by the generator span and returns its components
    /// along the complement coordinates; all zero iff the form lies in the
    /// span over the scalars.
    pub fn off_span_components(&self, gamma: &Form) -> Result<Vec<(usize, Expr)>, QuantError> {
        if gamma.grade() != 1 {
            return Err(QuantError::GeneratorGrade);
        }
        let sig = self.structure.signature();
        let (rref, pivots) = self.projection()?;
        let complement = self.complement()?;
        let mut comps: Vec<Expr> = (0..sig.dim())
            .map(|i| gamma.component(&[i]))
            .collect();
        for (row, &pc) in pivots.iter().enumerate() {
            // rref row has a unit pivot at column pc
            let factor = comps[pc].clone();
            if factor.is_zero() {
                continue;
            }
            for c in 0..sig.dim() {
                let m = rref.at(row, c);
                if m.is_zero() {
                    continue;
                }
                let sub = factor.scale(m);
                comps[c] = &comps[c] - &sub;
            }
        }
        Ok(complement.iter().map(|&i| (i, comps[i].clone())).collect())
    }
}

/// Polarization report: pairwise isotropy residuals plus the off-span
/// residuals of all generator brackets.
#[derive(Debug, Clone)]
pub struct PolarizationReport {
    pub isotropy: Vec<((usize, usize), Expr)>,
    pub closure: Vec<((usize, usize, usize), Expr)>,
}

impl PolarizationReport {
    pub fn passes(&self) -> bool {
        self.isotropy.iter().all(|(_, e)| e.is_zero())
            && self.closure.iter().all(|(_, e)| e.is_zero())
    }
}

/// Re-verifies isotropy and checks closure of the span under the twisted
/// bracket.
pub fn check_polarization(p: &Polarization) -> Result<PolarizationReport, QuantError> {
    let mut isotropy = Vec::new();
    for (i, a) in p.generators.iter().enumerate() {
        for (j, b) in p.generators.iter().enumerate().skip(i) {
            isotropy.push(((i, j), p.structure.lambda.evaluate(&[a, b])?));
        }
    }
    let mut closure = Vec::new();
    for (i, a) in p.generators.iter().enumerate() {
        for (j, b) in p.generators.iter().enumerate().skip(i + 1) {
            let br = crate::geom::twisted_bracket(&p.structure, a, b)?;
            for (c, e) in p.off_span_components(&br)? {
                closure.push(((i, j, c), e));
            }
        }
    }
    Ok(PolarizationReport { isotropy, closure })
}

/// Off-span residuals of `{gamma, a}^phi` for every generator `a`; all zero
/// iff bracketing with `gamma` preserves the polarization.
pub fn membership_residual(
    p: &Polarization,
    gamma: &Form,
) -> Result<Vec<((usize, usize), Expr)>, QuantError> {
    if gamma.grade() != 1 {
        return Err(QuantError::GeneratorGrade);
    }
    let mut out = Vec::new();
    for (gi, a) in p.generators.iter().enumerate() {
        let br = crate::geom::twisted_bracket(&p.structure, gamma, a)?;
        for (c, e) in p.off_span_components(&br)? {
            out.push(((gi, c), e));
        }
    }
    Ok(out)
}

/// Report of the second-level (pairwise) quantizability condition.
#[derive(Debug, Clone)]
pub struct PairReport {
    pub residuals: Vec<((usize, usize), Expr)>,
}

impl PairReport {
    pub fn passes(&self) -> bool {
        self.residuals.iter().all(|(_, e)| e.is_zero())
    }
}

/// For two distinct observables already bracketing into the polarization,
/// checks that `{phi(sharp dg1, sharp dg2, .), a}^phi` stays in the span
/// for every generator `a`.
pub fn quantizable_pair_check(
    p: &Polarization,
    g1: &Expr,
    g2: &Expr,
) -> Result<PairReport, QuantError> {
    if g1 == g2 {
        return Err(QuantError::DiagonalPair);
    }
    for (name, g) in [("g1", g1), ("g2", g2)] {
        let resid = membership_residual(p, &Form::differential(g))?;
        if resid.iter().any(|(_, e)| !e.is_zero()) {
            return Err(QuantError::MembershipPrecondition(name.to_string()));
        }
    }
    let x1 = sharp(&p.structure.lambda, &Form::differential(g1))?;
    let x2 = sharp(&p.structure.lambda, &Form::differential(g2))?;
    let inner = crate::geom::interior_product(
        &x2,
        &crate::geom::interior_product(&x1, &p.structure.phi)?,
    )?;
    let mut residuals = Vec::new();
    for (gi, a) in p.generators.iter().enumerate() {
        let br = crate::geom::twisted_bracket(&p.structure, &inner, a)?;
        for (c, e) in p.off_span_components(&br)? {
            residuals.push(((gi, c), e));
        }
    }
    Ok(PairReport { residuals })
}

/// Section of the bundle tensored with half-densities, written against the
/// unit section and the coordinate basis half-density.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfDensitySection {
    pub chi: Expr,
}

impl HalfDensitySection {
    pub fn new(chi: Expr) -> Self {
        HalfDensitySection { chi }
    }
}

/// Extended contravariant derivative on half-density sections:
/// bundle part plus anchor transport plus half the anchor divergence,
///
/// ```text
/// chi' = (<w, sharp a> + 2*pi*i <a, Z>) chi + sharp(a)(chi)
///      + (1/2) chi div(sharp a)
/// ```
pub fn half_density_d(
    b: &LineBundleModel,
    alpha: &Form,
    s: &HalfDensitySection,
) -> Result<HalfDensitySection, QuantError> {
    let xa = sharp(&b.structure.lambda, alpha)?;
    let bundle = &b.unit_section_factor(alpha)? * &s.chi;
    let transport = xa.apply_to_scalar(&s.chi)?;
    let half = Expr::constant(b.structure.signature(), GaussRat::from_ratio(1, 2));
    let density = &(&half * &s.chi) * &divergence(&xa)?;
    Ok(HalfDensitySection::new(&(&bundle + &transport) + &density))
}

/// Quantum operator on half-density sections:
/// `ghat(1 (x) chi b) = D_{dg}(1 (x) chi b) + 2*pi*i g (1 (x) chi b)`.
pub fn quantum_operator(
    b: &LineBundleModel,
    g: &Expr,
    s: &HalfDensitySection,
) -> Result<HalfDensitySection, QuantError> {
    let sig = b.structure.signature();
    let dg = Form::differential(g);
    let transported = half_density_d(b, &dg, s)?;
    let phase = &(&Expr::two_pi_i(sig) * g) * &s.chi;
    Ok(HalfDensitySection::new(&transported.chi + &phase))
}

/// Residuals of the kernel condition `D_a (1 (x) chi b) = 0` along every
/// polarization generator.
pub fn kernel_residuals(
    b: &LineBundleModel,
    p: &Polarization,
    s: &HalfDensitySection,
) -> Result<Vec<(usize, Expr)>, QuantError> {
    let mut out = Vec::new();
    for (gi, a) in p.generators.iter().enumerate() {
        out.push((gi, half_density_d(b, a, s)?.chi));
    }
    Ok(out)
}

/// Hermitian-pairing integrand `h(s1, s2) rho1 conj(rho2)` written on the
/// coordinate volume: the scalar `chi1 * conj(chi2)`; exported for external
/// quadrature.
pub fn pairing_integrand(
    s1: &HalfDensitySection,
    s2: &HalfDensitySection,
) -> Result<Expr, QuantError> {
    Ok(&s1.chi * &s2.chi.conjugate()?)
}

/// The operator identity `D_a(ghat s) - ghat(D_a s) + D_{{dg,a}^phi} s`,
/// identically zero over a bundle whose curvature represents the structure.
pub fn operator_commutation_residual(
    b: &LineBundleModel,
    g: &Expr,
    alpha: &Form,
    s: &HalfDensitySection,
) -> Result<Expr, QuantError> {
    let lhs = half_density_d(b, alpha, &quantum_operator(b, g, s)?)?;
    let mid = quantum_operator(b, g, &half_density_d(b, alpha, s)?)?;
    let br = crate::geom::twisted_bracket(&b.structure, &Form::differential(g), alpha)?;
    let last = half_density_d(b, &br, s)?;
    Ok(&(&lhs.chi - &mid.chi) + &last.chi)
}

/// Pairing helper re-export used by callers assembling reports.
pub fn coform_pairing(eta: &Form, x: &MultiVector) -> Result<Expr, QuantError> {
    Ok(pairing(eta, x)?)
}
