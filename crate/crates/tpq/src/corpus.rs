//! Built-in example models, one constructor per frozen corpus name
//! (ex1, ex2, ex3, ex4, ex6, quant51). These back both the `run-example`
//! command and the verification suites.

use crate::chart::{ChartError, ChartSignature};
use crate::expr::{Expr, ExprError};
use crate::gauss::GaussRat;
use crate::geom::{
    del_phi, exterior_derivative, poisson_from_symplectic, sharp, standard_symplectic_form, Form,
    GeomError, MultiVector, TwistedPoissonStructure,
};
use crate::liealg::{AlgForm, AlgMultiVector, LieAlgebraModel, LieError, Rat};
use crate::prequant::{BundleError, LineBundleModel};
use crate::quant::{Polarization, QuantError};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Quant(#[from] QuantError),
    #[error("unknown example `{0}`")]
    UnknownExample(String),
    #[error("unsupported size {0} for this example")]
    UnsupportedSize(usize),
}

/// Constant bivector with an arbitrary 3-form on a 3-dimensional chart:
/// every 3-form is closed there and the image of sharp kills it.
pub fn ex1() -> Result<TwistedPoissonStructure, CorpusError> {
    let sig = ChartSignature::new(&["x1", "x2", "x3"])?.shared();
    let lambda =
        MultiVector::from_components(&sig, 2, vec![(vec![0, 1], Expr::one(&sig))])?;
    let phi = Form::from_components(&sig, 3, vec![(vec![0, 1, 2], Expr::one(&sig))])?;
    Ok(TwistedPoissonStructure::new(lambda, phi)?)
}

/// Scaled symplectic structure on R^4 with an opaque scaling function:
/// `Lambda = f L0`, `phi = -f^-2 omega0 ^ df`, plus an opaque 1-form used
/// by the non-prequantizability identity.
pub struct Ex2Model {
    pub structure: TwistedPoissonStructure,
    pub l0: MultiVector,
    pub omega0: Form,
    /// 1-form with opaque components a1..a4.
    pub alpha: Form,
    pub f: Expr,
}

pub fn ex2() -> Result<Ex2Model, CorpusError> {
    let coords = ["x1", "x2", "x3", "x4"];
    let mut sig = ChartSignature::new(&coords)?.opaque("f", &coords, true)?;
    for name in ["a1", "a2", "a3", "a4"] {
        sig = sig.opaque(name, &coords, true)?;
    }
    let sig = sig.shared();
    let omega0 = standard_symplectic_form(&sig, 2)?;
    let l0 = poisson_from_symplectic(&omega0)?;
    let f = Expr::symbol(&sig, "f")?;
    let lambda = l0.scale(&f);
    let phi = omega0
        .wedge(&Form::differential(&f))?
        .scale(&f.pow(-2)?)
        .neg();
    let alpha = Form::from_components(
        &sig,
        1,
        (0..4)
            .map(|i| {
                Ok((
                    vec![i],
                    Expr::symbol(&sig, &format!("a{}", i + 1))?,
                ))
            })
            .collect::<Result<Vec<_>, ExprError>>()?,
    )?;
    let structure = TwistedPoissonStructure::new(lambda, phi)?;
    Ok(Ex2Model {
        structure,
        l0,
        omega0,
        alpha,
        f,
    })
}

/// Exponentially scaled symplectic structure on R^4 x R with an opaque
/// function of the symplectic factor:
/// `Lambda = e^t (L0 + sharp(L0)(df) ^ d/dt)`, `phi = -e^-t omega0 ^ dt`.
pub struct Ex3Model {
    pub structure: TwistedPoissonStructure,
    pub l0: MultiVector,
    pub omega0: Form,
    pub f: Expr,
}

pub fn ex3() -> Result<Ex3Model, CorpusError> {
    let sig = ChartSignature::new(&["x1", "x2", "x3", "x4", "t"])?
        .opaque("f", &["x1", "x2", "x3", "x4"], true)?
        .shared();
    let omega0 = standard_symplectic_form(&sig, 2)?;
    let l0 = poisson_from_symplectic(&omega0)?;
    let f = Expr::symbol(&sig, "f")?;
    let t = Expr::coord(&sig, "t")?;
    let et = Expr::exp(&t)?;
    let emt = Expr::exp(&-&t)?;
    let hf = sharp(&l0, &Form::differential(&f))?;
    let dt_vec = MultiVector::basis_vector(&sig, 4);
    let lambda = l0.add(&hf.wedge(&dt_vec)?)?.scale(&et);
    let phi = omega0.wedge(&Form::basis_coform(&sig, 4))?.scale(&emt).neg();
    let structure = TwistedPoissonStructure::new(lambda, phi)?;
    Ok(Ex3Model {
        structure,
        l0,
        omega0,
        f,
    })
}

/// The prequantizable instance of the exponentially scaled structure:
/// the f = 0 case with the potential 1-form `alpha0 = x1 dx2 + x3 dx4`,
/// witness pair `(Z, Phi) = (d/dt, d(e^-t alpha0))`.
pub struct Ex3Instance {
    pub structure: TwistedPoissonStructure,
    pub z: MultiVector,
    pub phi_two: Form,
}

pub fn ex3_prequant_instance() -> Result<Ex3Instance, CorpusError> {
    let sig = ChartSignature::new(&["x1", "x2", "x3", "x4", "t"])?.shared();
    let omega0 = standard_symplectic_form(&sig, 2)?;
    let l0 = poisson_from_symplectic(&omega0)?;
    let t = Expr::coord(&sig, "t")?;
    let et = Expr::exp(&t)?;
    let emt = Expr::exp(&-&t)?;
    let lambda = l0.scale(&et);
    let phi = omega0.wedge(&Form::basis_coform(&sig, 4))?.scale(&emt).neg();
    let structure = TwistedPoissonStructure::new(lambda, phi)?;
    let z = MultiVector::basis_vector(&sig, 4);
    let alpha0 = Form::from_components(
        &sig,
        1,
        vec![
            (vec![1], Expr::coord(&sig, "x1")?),
            (vec![3], Expr::coord(&sig, "x3")?),
        ],
    )?;
    let phi_two = exterior_derivative(&alpha0.scale(&emt));
    Ok(Ex3Instance {
        structure,
        z,
        phi_two,
    })
}

/// Exact structure on R^4: the constant symplectic inverse is the twisted
/// differential of `X0 = x1 d1 + x3 d3` (with zero background), so the
/// bundle with `Z = -X0` prequantizes it.
pub struct Ex4Model {
    pub bundle: LineBundleModel,
    pub x0: MultiVector,
}

pub fn ex4() -> Result<Ex4Model, CorpusError> {
    let sig = ChartSignature::new(&["x1", "x2", "x3", "x4"])?.shared();
    let omega0 = standard_symplectic_form(&sig, 2)?;
    let l0 = poisson_from_symplectic(&omega0)?;
    let structure = TwistedPoissonStructure::new(l0, Form::zero(&sig, 3))?;
    let x0 = MultiVector::from_components(
        &sig,
        1,
        vec![
            (vec![0], Expr::coord(&sig, "x1")?),
            (vec![2], Expr::coord(&sig, "x3")?),
        ],
    )?;
    debug_assert!(del_phi(&structure, &x0)?.sub(&structure.lambda)?.is_zero());
    let bundle = LineBundleModel::new(structure, Form::zero(&sig, 1), x0.neg())?;
    Ok(Ex4Model { bundle, x0 })
}

/// The twisted triangular pair on the 6-dimensional subalgebra of
/// gl(3, R) spanned by the first two rows of elementary matrices:
/// `r = e11^e22 + e13^e23`, `phi = -(e11* + e22*)^e13*^e23*`.
pub fn ex6() -> Result<(LieAlgebraModel, AlgMultiVector, AlgForm), CorpusError> {
    let model = LieAlgebraModel::gl_subalgebra(&[1, 2], &[1, 2, 3])?;
    let one = || BigRational::from_integer(BigInt::from(1));
    let r = AlgMultiVector::from_components(
        6,
        2,
        vec![(vec![0, 4], one()), (vec![2, 5], one())],
    )?;
    let phi = AlgForm::from_components(
        6,
        3,
        vec![(vec![0, 2, 5], -one()), (vec![2, 4, 5], one())],
    )?;
    Ok((model, r, phi))
}

/// Quantization model in complex coordinates `(z_1..z_n, zb_1..zb_n, t)`
/// with an opaque real function `f` of the symplectic factor (and a second
/// opaque real `h` free for observable candidates):
///
/// ```text
/// Lambda = -2i e^t ( sum_k d/dz_k ^ d/dzb_k
///                  + sum_k (f_{z_k} d/dzb_k - f_{zb_k} d/dz_k) ^ d/dt )
/// phi    = -(i/2) e^-t sum_k dz_k ^ dzb_k ^ dt
/// ```
///
/// with the anchor-transport bundle and the polarization spanned by the
/// `dz_k`, complemented by the `dzb_l` and `dt` directions.
pub struct QuantModel {
    pub n: usize,
    pub bundle: LineBundleModel,
    pub polarization: Polarization,
}

pub fn quant51(n: usize) -> Result<QuantModel, CorpusError> {
    if n == 0 || 2 * n + 1 > crate::chart::DEFAULT_MAX_DIM {
        return Err(CorpusError::UnsupportedSize(n));
    }
    let mut names: Vec<String> = (1..=n).map(|k| format!("z{k}")).collect();
    names.extend((1..=n).map(|k| format!("zb{k}")));
    names.push("t".to_string());
    let mut sig = ChartSignature::new(&names)?;
    for k in 1..=n {
        sig = sig.conjugate_pair(&format!("z{k}"), &format!("zb{k}"))?;
    }
    let space: Vec<String> = names[..2 * n].to_vec();
    sig = sig.opaque("f", &space, true)?;
    sig = sig.opaque("h", &space, true)?;
    let sig = sig.shared();
    let t = Expr::coord(&sig, "t")?;
    let et = Expr::exp(&t)?;
    let emt = Expr::exp(&-&t)?;
    let m2i = Expr::constant(&sig, &GaussRat::i() * &GaussRat::from_int(-2));
    let tdir = 2 * n;
    let mut lam_comps: Vec<(Vec<usize>, Expr)> = Vec::new();
    for k in 0..n {
        // -2i e^t d/dz_k ^ d/dzb_k
        lam_comps.push((vec![k, n + k], &m2i * &et));
        // -2i e^t f_{z_k} d/dzb_k ^ d/dt
        let fz = Expr::jet(&sig, "f", &[format!("z{}", k + 1)])?;
        lam_comps.push((vec![n + k, tdir], &(&m2i * &et) * &fz));
        // +2i e^t f_{zb_k} d/dz_k ^ d/dt
        let fzb = Expr::jet(&sig, "f", &[format!("zb{}", k + 1)])?;
        lam_comps.push((vec![k, tdir], -&(&(&m2i * &et) * &fzb)));
    }
    let lambda = MultiVector::from_components(&sig, 2, lam_comps)?;
    let mhi = Expr::constant(
        &sig,
        GaussRat::new(
            BigRational::from_integer(BigInt::from(0)),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
        ),
    );
    let mut phi_comps: Vec<(Vec<usize>, Expr)> = Vec::new();
    for k in 0..n {
        phi_comps.push((vec![k, n + k, tdir], &mhi * &emt));
    }
    let phi = Form::from_components(&sig, 3, phi_comps)?;
    let structure = TwistedPoissonStructure::new(lambda, phi)?;
    let bundle = LineBundleModel::anchor_only(structure.clone());
    let generators: Vec<Form> = (0..n).map(|k| Form::basis_coform(&sig, k)).collect();
    let complement: Vec<usize> = (n..=2 * n).collect();
    let polarization = Polarization::new(structure, generators, Some(complement))?;
    Ok(QuantModel {
        n,
        bundle,
        polarization,
    })
}

/// Rational helper shared by corpus consumers.
pub fn rational(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Signature accessor used by file-driven callers that only need the chart.
pub fn chart_of(structure: &TwistedPoissonStructure) -> Arc<ChartSignature> {
    structure.signature().clone()
}
