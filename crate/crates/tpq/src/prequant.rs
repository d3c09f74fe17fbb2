//! Contravariant derivatives, their curvature, the prequantization
//! operators, and the prequantization-equation checker, all on trivial
//! Hermitian line bundles over a single chart.
//!
//! Local bundle data is a purely imaginary connection 1-form together with a
//! real vector field; the contravariant derivative acts on scalar sections
//! (the trivial bundle is framed by the unit section) as
//!
//! ```text
//! D_a s = sharp(a)(s) + <w, sharp(a)> s + 2*pi*i <a, Z> s
//! ```

use crate::expr::{Expr, ExprError};
use crate::geom::{
    del_phi, divergence, pairing, sharp, Form, GeomError, MultiVector, TwistedPoissonStructure,
};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("connection form must be purely imaginary")]
    ConnectionNotImaginary,
    #[error("bundle vector field must be real")]
    VectorNotReal,
    #[error("expected grade {expected}, got {got}")]
    GradeMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Trivial Hermitian line bundle over a chart carrying a twisted Poisson
/// structure, with contravariant-derivative data `(omega, Z)`.
#[derive(Clone)]
pub struct LineBundleModel {
    pub structure: TwistedPoissonStructure,
    /// Connection 1-form; purely imaginary so the derivative is Hermitian.
    pub omega: Form,
    /// Real vector field shifting the derivative, `2*pi*i <a, Z>` per section.
    pub z_field: MultiVector,
}

impl LineBundleModel {
    pub fn new(
        structure: TwistedPoissonStructure,
        omega: Form,
        z_field: MultiVector,
    ) -> Result<Self, BundleError> {
        if omega.grade() != 1 {
            return Err(BundleError::GradeMismatch {
                expected: 1,
                got: omega.grade(),
            });
        }
        if z_field.grade() != 1 {
            return Err(BundleError::GradeMismatch {
                expected: 1,
                got: z_field.grade(),
            });
        }
        // omega purely imaginary: conj(omega) = -omega
        if omega.conjugate()? != omega.neg() {
            return Err(BundleError::ConnectionNotImaginary);
        }
        if z_field.conjugate()? != z_field {
            return Err(BundleError::VectorNotReal);
        }
        Ok(LineBundleModel {
            structure,
            omega,
            z_field,
        })
    }

    /// The bundle with zero connection form and zero vector field, whose
    /// derivative is the bare anchor transport `D_a s = sharp(a) s`.
    pub fn anchor_only(structure: TwistedPoissonStructure) -> Self {
        let sig = structure.signature().clone();
        LineBundleModel {
            structure,
            omega: Form::zero(&sig, 1),
            z_field: MultiVector::zero(&sig, 1),
        }
    }

    /// 2*pi*i <a, Z> + <w, sharp(a)>, the scalar D_a picks up on the unit
    /// section.
    pub fn unit_section_factor(&self, alpha: &Form) -> Result<Expr, BundleError> {
        let sig = self.structure.signature();
        let xa = sharp(&self.structure.lambda, alpha)?;
        let mut out = pairing(&self.omega, &xa)?;
        if !self.z_field.is_zero() {
            let zpart = pairing(alpha, &self.z_field)?;
            out = &out + &(&Expr::two_pi_i(sig) * &zpart);
        }
        Ok(out)
    }

    /// The complex vector field X with `D_a(1) = <a, X>`:
    /// `X = -sharp(omega) + 2*pi*i Z`.
    pub fn local_field(&self) -> Result<MultiVector, BundleError> {
        let sig = self.structure.signature();
        let xw = sharp(&self.structure.lambda, &self.omega)?;
        let z2pi = self.z_field.scale(&Expr::two_pi_i(sig));
        Ok(xw.neg().add(&z2pi)?)
    }
}

/// Contravariant derivative on scalar sections.
pub fn d_apply(b: &LineBundleModel, alpha: &Form, s: &Expr) -> Result<Expr, BundleError> {
    let xa = sharp(&b.structure.lambda, alpha)?;
    let transport = xa.apply_to_scalar(s)?;
    let factor = b.unit_section_factor(alpha)?;
    Ok(&transport + &(&factor * s))
}

/// Curvature of the contravariant derivative:
/// `C_D(a,b)s = D_a D_b s - D_b D_a s - D_{{a,b}^phi} s`.
pub fn curvature(
    b: &LineBundleModel,
    alpha: &Form,
    beta: &Form,
    s: &Expr,
) -> Result<Expr, BundleError> {
    let ab = d_apply(b, alpha, &d_apply(b, beta, s)?)?;
    let ba = d_apply(b, beta, &d_apply(b, alpha, s)?)?;
    let tb = crate::geom::twisted_bracket(&b.structure, alpha, beta)?;
    let br = d_apply(b, &tb, s)?;
    Ok(&(&ab - &ba) - &br)
}

/// The complex bivector representing the curvature on the trivial bundle:
/// `Pi = del_phi(X)` for the local field `X` with `D_a(1) = <a, X>`.
pub fn pi_bivector(b: &LineBundleModel) -> Result<MultiVector, BundleError> {
    let x = b.local_field()?;
    Ok(del_phi(&b.structure, &x)?)
}

/// Residual report of the prequantization equation
/// `Lambda + del_phi(Z) = sharp(Phi)` with `Phi` closed.
#[derive(Debug, Clone)]
pub struct PrequantReport {
    /// Components of d(Phi).
    pub closed: Vec<(Vec<usize>, Expr)>,
    /// Components of `Lambda + del_phi(Z) - sharp(Phi)`.
    pub equation: Vec<(Vec<usize>, Expr)>,
    /// Integrality of the 2-form class is not decidable in this model.
    pub assumptions: Vec<String>,
}

impl PrequantReport {
    pub fn passes(&self) -> bool {
        self.closed.iter().all(|(_, e)| e.is_zero())
            && self.equation.iter().all(|(_, e)| e.is_zero())
    }
}

/// Checks the prequantization equation for a candidate pair `(Z, Phi)`.
pub fn check_prequantization(
    s: &TwistedPoissonStructure,
    z: &MultiVector,
    phi_two: &Form,
) -> Result<PrequantReport, BundleError> {
    if z.grade() != 1 {
        return Err(BundleError::GradeMismatch {
            expected: 1,
            got: z.grade(),
        });
    }
    if phi_two.grade() != 2 {
        return Err(BundleError::GradeMismatch {
            expected: 2,
            got: phi_two.grade(),
        });
    }
    let dphi = crate::geom::exterior_derivative(phi_two);
    let closed = dphi
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    let dz = del_phi(s, z)?;
    let sp = sharp(&s.lambda, phi_two)?;
    let resid = s.lambda.add(&dz)?.sub(&sp)?;
    let equation = resid
        .components()
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    Ok(PrequantReport {
        closed,
        equation,
        assumptions: vec!["integrality: assumed".to_string()],
    })
}

/// The prequantization operator `fhat(s) = D_{df} s + 2*pi*i f s`.
pub fn fhat_apply(b: &LineBundleModel, f: &Expr, s: &Expr) -> Result<Expr, BundleError> {
    let sig = b.structure.signature();
    let df = Form::differential(f);
    let d = d_apply(b, &df, s)?;
    Ok(&d + &(&(&Expr::two_pi_i(sig) * f) * s))
}

/// The twisted commutator
/// `[fhat, ghat]^phi(s) = (fhat ghat - ghat fhat)(s) - D_{phi(Xf, Xg, .)} s`.
pub fn twisted_commutator(
    b: &LineBundleModel,
    f: &Expr,
    g: &Expr,
    s: &Expr,
) -> Result<Expr, BundleError> {
    let fg = fhat_apply(b, f, &fhat_apply(b, g, s)?)?;
    let gf = fhat_apply(b, g, &fhat_apply(b, f, s)?)?;
    let corr = d_apply(b, &background_insertion(b, f, g)?, s)?;
    Ok(&(&fg - &gf) - &corr)
}

/// The 1-form `phi(sharp(df), sharp(dg), .)`.
pub fn background_insertion(
    b: &LineBundleModel,
    f: &Expr,
    g: &Expr,
) -> Result<Form, BundleError> {
    let xf = sharp(&b.structure.lambda, &Form::differential(f))?;
    let xg = sharp(&b.structure.lambda, &Form::differential(g))?;
    let inner = crate::geom::interior_product(
        &xg,
        &crate::geom::interior_product(&xf, &b.structure.phi)?,
    )?;
    Ok(inner)
}

/// The representation-homomorphism residual
/// `hat{f,g}(s) - [fhat, ghat]^phi(s)`; zero exactly when the curvature
/// satisfies `C_D(df,dg) = -2*pi*i {f,g}` on the pair.
pub fn homomorphism_residual(
    b: &LineBundleModel,
    f: &Expr,
    g: &Expr,
    s: &Expr,
) -> Result<Expr, BundleError> {
    let fg = crate::geom::function_bracket(&b.structure, f, g)?;
    let lhs = fhat_apply(b, &fg, s)?;
    let rhs = twisted_commutator(b, f, g, s)?;
    Ok(&lhs - &rhs)
}

/// Divergence re-exported at the bundle level for half-density transport.
pub fn anchor_divergence(b: &LineBundleModel, alpha: &Form) -> Result<Expr, BundleError> {
    let xa = sharp(&b.structure.lambda, alpha)?;
    Ok(divergence(&xa)?)
}
