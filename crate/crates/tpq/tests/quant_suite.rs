//! Quantization-layer identities: the half-density operator commutation
//! rule, the extended homomorphism on half-density sections, and the
//! density Leibniz rules.

mod common;

use common::random_polynomial;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tpq::corpus;
use tpq::expr::Expr;
use tpq::gauss::GaussRat;
use tpq::geom::{divergence, Form, MultiVector};
use tpq::quant::{
    half_density_d, operator_commutation_residual, pairing_integrand, quantum_operator,
    HalfDensitySection,
};

fn random_one_form(sig: &std::sync::Arc<tpq::chart::ChartSignature>, rng: &mut ChaCha8Rng) -> Form {
    let mut comps = Vec::new();
    for i in 0..sig.dim() {
        if rng.gen_bool(0.6) {
            comps.push((vec![i], random_polynomial(sig, rng, 2)));
        }
    }
    Form::from_components(sig, 1, comps).unwrap()
}

#[test]
fn operator_commutation_identity_over_prequantized_model() {
    // D_a(ghat s) - ghat(D_a s) + D_{{dg,a}^phi} s = 0 over a bundle whose
    // curvature represents the bivector.
    let m = corpus::ex4().unwrap();
    let sig = m.bundle.structure.signature().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..8 {
        let g = random_polynomial(&sig, &mut rng, 2);
        let alpha = random_one_form(&sig, &mut rng);
        let s = HalfDensitySection::new(random_polynomial(&sig, &mut rng, 2));
        let r = operator_commutation_residual(&m.bundle, &g, &alpha, &s).unwrap();
        assert!(r.is_zero(), "commutation identity failed");
    }
    // Negative control: perturb Z so the curvature no longer represents
    // the bivector; the identity must break for some data.
    let x1 = Expr::coord(&sig, "x1").unwrap();
    let bad_z = m
        .bundle
        .z_field
        .add(&MultiVector::basis_vector(&sig, 0).scale(&x1))
        .unwrap();
    let bad = tpq::prequant::LineBundleModel::new(
        m.bundle.structure.clone(),
        m.bundle.omega.clone(),
        bad_z,
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut found = false;
    for _ in 0..10 {
        let g = random_polynomial(&sig, &mut rng, 2);
        let alpha = random_one_form(&sig, &mut rng);
        let s = HalfDensitySection::new(random_polynomial(&sig, &mut rng, 2));
        if !operator_commutation_residual(&bad, &g, &alpha, &s)
            .unwrap()
            .is_zero()
        {
            found = true;
            break;
        }
    }
    assert!(found, "expected the identity to break on the perturbed model");
}

#[test]
fn extended_homomorphism_on_half_densities() {
    // hat{f,g}(s) = [fhat, ghat]^phi(s) on half-density sections of the
    // exact model, with the operators extended by the anchor transport.
    let m = corpus::ex4().unwrap();
    let sig = m.bundle.structure.signature().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..6 {
        let f = random_polynomial(&sig, &mut rng, 2);
        let g = random_polynomial(&sig, &mut rng, 2);
        let s = HalfDensitySection::new(random_polynomial(&sig, &mut rng, 2));
        let fb = tpq::geom::function_bracket(&m.bundle.structure, &f, &g).unwrap();
        let lhs = quantum_operator(&m.bundle, &fb, &s).unwrap();
        // [fhat, ghat]^phi on half densities; phi = 0 here so only the
        // plain commutator contributes.
        let fg = quantum_operator(&m.bundle, &f, &quantum_operator(&m.bundle, &g, &s).unwrap())
            .unwrap();
        let gf = quantum_operator(&m.bundle, &g, &quantum_operator(&m.bundle, &f, &s).unwrap())
            .unwrap();
        let comm = &fg.chi - &gf.chi;
        assert_eq!(lhs.chi, comm);
    }
}

#[test]
fn density_divergence_leibniz() {
    // div(fX) = f div X + X(f), and the transport of a product of two
    // half-densities matches the 1-density rule: each factor carries half
    // of the divergence, the product carries all of it.
    let m = corpus::ex4().unwrap();
    let sig = m.bundle.structure.signature().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for _ in 0..8 {
        let x = common::random_multivector(&sig, 1, &mut rng, 2);
        let f = random_polynomial(&sig, &mut rng, 2);
        let lhs = divergence(&x.scale(&f)).unwrap();
        let rhs = &(&f * &divergence(&x).unwrap()) + &x.apply_to_scalar(&f).unwrap();
        assert_eq!(lhs, rhs);
    }
    // product rule: L_X(chi1 chi2 v) = (X(chi1 chi2) + chi1 chi2 div X) v
    // decomposes as (L on chi1 beta) chi2 + chi1 (L on chi2 beta);
    // use the bare transport bundle so no section phase enters.
    let plain = tpq::prequant::LineBundleModel::anchor_only(m.bundle.structure.clone());
    for _ in 0..5 {
        let alpha = random_one_form(&sig, &mut rng);
        let chi1 = random_polynomial(&sig, &mut rng, 2);
        let chi2 = random_polynomial(&sig, &mut rng, 2);
        let x = tpq::geom::sharp(&plain.structure.lambda, &alpha).unwrap();
        let s1 = HalfDensitySection::new(chi1.clone());
        let s2 = HalfDensitySection::new(chi2.clone());
        let t1 = half_density_d(&plain, &alpha, &s1).unwrap();
        let t2 = half_density_d(&plain, &alpha, &s2).unwrap();
        let product_rule = &(&t1.chi * &chi2) + &(&chi1 * &t2.chi);
        let one_density = &x.apply_to_scalar(&(&chi1 * &chi2)).unwrap()
            + &(&(&chi1 * &chi2) * &divergence(&x).unwrap());
        assert_eq!(product_rule, one_density);
    }
}

#[test]
fn pairing_integrand_is_conjugate_symmetric() {
    let m = corpus::quant51(2).unwrap();
    let sig = m.bundle.structure.signature().clone();
    let f = Expr::symbol(&sig, "f").unwrap();
    let half = GaussRat::from_ratio(1, 2);
    let chi1 = Expr::exp(&f.scale(&half)).unwrap();
    let t = Expr::coord(&sig, "t").unwrap();
    let chi2 = Expr::exp(&t.scale(&-half)).unwrap();
    let s1 = HalfDensitySection::new(chi1);
    let s2 = HalfDensitySection::new(chi2);
    let p12 = pairing_integrand(&s1, &s2).unwrap();
    let p21 = pairing_integrand(&s2, &s1).unwrap();
    assert_eq!(p12.conjugate().unwrap(), p21);
    assert!(!p12.is_zero());
}

#[test]
fn kernel_is_invariant_under_quantizable_flow() {
    // Members of the polarized kernel stay members under the operator of a
    // quantizable observable.
    let m = corpus::quant51(2).unwrap();
    let sig = m.bundle.structure.signature().clone();
    let f = Expr::symbol(&sig, "f").unwrap();
    let t = Expr::coord(&sig, "t").unwrap();
    let g = &f + &t;
    let half = GaussRat::from_ratio(1, 2);
    for chi in [
        Expr::exp(&f.scale(&half)).unwrap(),
        Expr::exp(&t.scale(&-half)).unwrap(),
    ] {
        let s = HalfDensitySection::new(chi);
        let base = tpq::quant::kernel_residuals(&m.bundle, &m.polarization, &s).unwrap();
        assert!(base.iter().all(|(_, e)| e.is_zero()));
        let image = quantum_operator(&m.bundle, &g, &s).unwrap();
        let after = tpq::quant::kernel_residuals(&m.bundle, &m.polarization, &image).unwrap();
        assert!(after.iter().all(|(_, e)| e.is_zero()));
    }
}
