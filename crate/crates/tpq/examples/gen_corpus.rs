//! Regenerates the shipped corpus files from the built-in models.

use tpq::corpus;
use tpq::expr::Expr;
use tpq::gauss::GaussRat;
use tpq::structure::{Candidates, LieSection, StructureFile};

fn write(name: &str, f: &StructureFile) {
    let path = format!("crates/tpq/corpus/{name}.toml");
    std::fs::write(&path, f.to_toml_string()).unwrap();
    println!("wrote {path}");
}

fn main() {
    // ex1
    let s = corpus::ex1().unwrap();
    let file = StructureFile {
        sig: s.signature().clone(),
        bivector: Some(s.lambda.clone()),
        form_1: None,
        form_2: None,
        form_3: Some(s.phi.clone()),
        bundle: None,
        polarization: None,
        lie: None,
        candidates: Candidates::default(),
    };
    write("ex1", &file);

    // ex2
    let m = corpus::ex2().unwrap();
    let file = StructureFile {
        sig: m.structure.signature().clone(),
        bivector: Some(m.structure.lambda.clone()),
        form_1: Some(m.alpha.clone()),
        form_2: None,
        form_3: Some(m.structure.phi.clone()),
        bundle: None,
        polarization: None,
        lie: None,
        candidates: Candidates::default(),
    };
    write("ex2", &file);

    // ex3 (generic opaque f)
    let m = corpus::ex3().unwrap();
    let file = StructureFile {
        sig: m.structure.signature().clone(),
        bivector: Some(m.structure.lambda.clone()),
        form_1: None,
        form_2: None,
        form_3: Some(m.structure.phi.clone()),
        bundle: None,
        polarization: None,
        lie: None,
        candidates: Candidates::default(),
    };
    write("ex3", &file);

    // ex3_instance (f = 0, with the witness pair)
    let inst = corpus::ex3_prequant_instance().unwrap();
    let file = StructureFile {
        sig: inst.structure.signature().clone(),
        bivector: Some(inst.structure.lambda.clone()),
        form_1: None,
        form_2: None,
        form_3: Some(inst.structure.phi.clone()),
        bundle: None,
        polarization: None,
        lie: None,
        candidates: Candidates {
            z: Some(inst.z.clone()),
            phi_two: Some(inst.phi_two.clone()),
            chi: vec![],
            g: vec![],
            f: vec![],
        },
    };
    write("ex3_instance", &file);

    // ex4: exact structure with its bundle data
    let m = corpus::ex4().unwrap();
    let sig = m.bundle.structure.signature().clone();
    let file = StructureFile {
        sig: sig.clone(),
        bivector: Some(m.bundle.structure.lambda.clone()),
        form_1: None,
        form_2: None,
        form_3: Some(m.bundle.structure.phi.clone()),
        bundle: Some((m.bundle.omega.clone(), m.bundle.z_field.clone())),
        polarization: None,
        lie: None,
        candidates: Candidates {
            z: Some(m.x0.neg()),
            phi_two: Some(tpq::geom::Form::zero(&sig, 2)),
            chi: vec![],
            g: vec![],
            f: vec![],
        },
    };
    write("ex4", &file);

    // ex6: pure Lie-algebra file
    let (model, r, phi) = corpus::ex6().unwrap();
    let empty: [&str; 0] = [];
    let file = StructureFile {
        sig: tpq::chart::ChartSignature::new(&empty).unwrap().shared(),
        bivector: None,
        form_1: None,
        form_2: None,
        form_3: None,
        bundle: None,
        polarization: None,
        lie: Some(LieSection {
            model,
            r: Some(r),
            phi: Some(phi),
        }),
        candidates: Candidates::default(),
    };
    write("ex6", &file);

    // quant51 (n = 2)
    let m = corpus::quant51(2).unwrap();
    let sig = m.bundle.structure.signature().clone();
    let f = Expr::symbol(&sig, "f").unwrap();
    let t = Expr::coord(&sig, "t").unwrap();
    let half = GaussRat::from_ratio(1, 2);
    let file = StructureFile {
        sig: sig.clone(),
        bivector: Some(m.bundle.structure.lambda.clone()),
        form_1: None,
        form_2: None,
        form_3: Some(m.bundle.structure.phi.clone()),
        bundle: None,
        polarization: Some((
            m.polarization.generators.clone(),
            Some(m.polarization.complement().unwrap()),
        )),
        lie: None,
        candidates: Candidates {
            z: None,
            phi_two: None,
            chi: vec![
                Expr::exp(&f.scale(&half)).unwrap(),
                Expr::exp(&t.scale(&-half.clone())).unwrap(),
            ],
            g: vec![&f + &t],
            f: vec![],
        },
    };
    write("quant51", &file);
}
