//! Schouten bracket of multivector fields.
//!
//! Convention, in odd-coordinate form with xi_k standing for d/dx_k and the
//! left odd derivative d/dxi_k:
//!
//! ```text
//! [P,Q] = (-1)^(p-1) sum_k (dP/dxi_k)^(dQ/dx_k) - sum_k (dP/dx_k)^(dQ/dxi_k)
//! ```
//!
//! This is the unique extension of the Lie bracket of vector fields with
//! `[X,f] = X(f)` that satisfies
//! `[P,Q] = -(-1)^((p-1)(q-1)) [Q,P]` and
//! `[P, Q^R] = [P,Q]^R + (-1)^((p-1)q) Q^[P,R]`.

use super::{GeomError, MultiVector, Skew};

/// Schouten bracket; reduces to the Lie bracket on grade 1 x 1 and to
/// (+/-) the interior product against a differential on grade k x 0.
pub fn schouten_bracket(p: &MultiVector, q: &MultiVector) -> Result<MultiVector, GeomError> {
    if p.0.sig != q.0.sig {
        return Err(GeomError::ChartMismatch);
    }
    let sig = &p.0.sig;
    let dim = sig.dim();
    let pg = p.0.grade;
    let qg = q.0.grade;
    if pg + qg == 0 {
        return Ok(MultiVector::zero(sig, 0));
    }
    let mut out = Skew::zero(sig, pg + qg - 1);
    let front_sign = if (pg + 1) % 2 == 0 { 1i64 } else { -1i64 }; // (-1)^(p-1)
    for (ia, ca) in &p.0.comps {
        for (ib, cb) in &q.0.comps {
            // (-1)^(p-1) (dP/dxi_k) ^ (dQ/dx_k)
            for (pos, &k) in ia.iter().enumerate() {
                let db = cb.differentiate_index(k);
                if db.is_zero() {
                    continue;
                }
                let mut coeff = ca * &db;
                let mut sign = front_sign;
                if pos % 2 == 1 {
                    sign = -sign;
                }
                if sign < 0 {
                    coeff = -coeff;
                }
                let mut idx: Vec<usize> = ia
                    .iter()
                    .enumerate()
                    .filter(|(s, _)| *s != pos)
                    .map(|(_, &v)| v)
                    .collect();
                idx.extend_from_slice(ib);
                out.add_signed(&idx, coeff);
            }
            // - (dP/dx_k) ^ (dQ/dxi_k)
            for (pos, &k) in ib.iter().enumerate() {
                let da = ca.differentiate_index(k);
                if da.is_zero() {
                    continue;
                }
                let mut coeff = &da * cb;
                let mut sign = -1i64;
                if pos % 2 == 1 {
                    sign = -sign;
                }
                if sign < 0 {
                    coeff = -coeff;
                }
                let mut idx: Vec<usize> = ia.clone();
                idx.extend(
                    ib.iter()
                        .enumerate()
                        .filter(|(s, _)| *s != pos)
                        .map(|(_, &v)| v),
                );
                out.add_signed(&idx, coeff);
            }
        }
    }
    let _ = dim;
    Ok(MultiVector(out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartSignature;
    use crate::expr::Expr;
    use crate::gauss::GaussRat;
    use crate::geom::{sharp, Form};
    use std::sync::Arc;

    fn r4f() -> Arc<ChartSignature> {
        ChartSignature::new(&["x1", "x2", "x3", "x4"])
            .unwrap()
            .opaque("f", &["x1", "x2", "x3", "x4"], true)
            .unwrap()
            .shared()
    }

    #[test]
    fn lie_bracket_on_vector_fields() {
        // [d1, x1 d2] = d2
        let sig = r4f();
        let d1 = MultiVector::basis_vector(&sig, 0);
        let x1 = Expr::coord(&sig, "x1").unwrap();
        let x1d2 = MultiVector::basis_vector(&sig, 1).scale(&x1);
        let b = schouten_bracket(&d1, &x1d2).unwrap();
        assert_eq!(b, MultiVector::basis_vector(&sig, 1));
    }

    #[test]
    fn vector_on_function() {
        // [X, f] = X(f), [f, X] = -X(f)
        let sig = r4f();
        let d1 = MultiVector::basis_vector(&sig, 0);
        let f = Expr::symbol(&sig, "f").unwrap();
        let fv = MultiVector::scalar(&sig, f.clone());
        let xf = schouten_bracket(&d1, &fv).unwrap();
        assert_eq!(
            xf,
            MultiVector::scalar(&sig, Expr::jet(&sig, "f", &["x1"]).unwrap())
        );
        let fx = schouten_bracket(&fv, &d1).unwrap();
        assert_eq!(fx, xf.neg());
    }

    #[test]
    fn scaled_symplectic_self_bracket() {
        // (1/2)[f L0, f L0] = -(f L0) ^ sharp(L0)(df) on R^4.
        let sig = r4f();
        let f = Expr::symbol(&sig, "f").unwrap();
        let l0 = MultiVector::from_components(
            &sig,
            2,
            vec![
                (vec![0, 1], Expr::one(&sig)),
                (vec![2, 3], Expr::one(&sig)),
            ],
        )
        .unwrap();
        let fl0 = l0.scale(&f);
        let half = GaussRat::from_ratio(1, 2);
        let lhs = schouten_bracket(&fl0, &fl0).unwrap().scale_const(&half);
        let df = Form::differential(&f);
        let rhs = fl0.wedge(&sharp(&l0, &df).unwrap()).unwrap().neg();
        assert_eq!(lhs, rhs);
        assert!(!lhs.is_zero());
    }
}
