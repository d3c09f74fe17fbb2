//! File-driven front-end tests: loading and validation errors, report
//! determinism, exit-code mapping, and the shipped corpus files.

mod common;

use std::path::{Path, PathBuf};
use tpq::cli::{run_command, Command, Options};
use tpq::report::Status;
use tpq::structure::{StructureError, StructureFile};

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("corpus")
        .join(format!("{name}.toml"))
}

#[test]
fn shipped_corpus_loads_and_validates() {
    for name in ["ex1", "ex2", "ex3", "ex3_instance", "ex4", "ex6", "quant51"] {
        let f = StructureFile::load(&corpus(name)).unwrap_or_else(|e| {
            panic!("corpus file {name} failed to load: {e}");
        });
        match name {
            "ex3" => {
                assert_eq!(f.sig.dim(), 5);
                assert_eq!(f.bivector.as_ref().unwrap().components().count(), 6);
            }
            "ex6" => {
                assert!(f.lie.is_some());
                assert_eq!(f.lie.as_ref().unwrap().model.dim(), 6);
            }
            "quant51" => {
                assert_eq!(f.sig.dim(), 5);
                assert!(f.polarization.is_some());
                assert_eq!(f.candidates.chi.len(), 2);
            }
            _ => {}
        }
    }
}

#[test]
fn corpus_round_trips_through_save() {
    for name in ["ex2", "ex3", "ex6", "quant51"] {
        let a = StructureFile::load(&corpus(name)).unwrap();
        let text = a.to_toml_string();
        let b = StructureFile::from_toml_str(&text).unwrap();
        assert_eq!(a.sig, b.sig, "{name}: chart changed");
        assert_eq!(a.bivector, b.bivector, "{name}: bivector changed");
        assert_eq!(a.form_3, b.form_3, "{name}: background changed");
        assert_eq!(a.candidates.chi, b.candidates.chi);
        if let (Some(la), Some(lb)) = (&a.lie, &b.lie) {
            assert_eq!(la.model, lb.model, "{name}: algebra changed");
            assert_eq!(la.r, lb.r);
            assert_eq!(la.phi, lb.phi);
        }
    }
}

#[test]
fn missing_chart_and_bad_indices() {
    assert!(matches!(
        StructureFile::from_toml_str(""),
        Err(StructureError::MissingChart)
    ));
    let bad = r#"
[chart]
coordinates = ["x1", "x2", "x3"]
[form_3]
"2,1,3" = "1"
"#;
    match StructureFile::from_toml_str(bad) {
        Err(StructureError::IndicesNotIncreasing { .. }) => {}
        other => panic!("expected increasing-index error, got {:?}", other.err()),
    }
}

#[test]
fn command_exit_codes() {
    let opts = Options::default();
    // pass -> 0
    let rep = run_command(Command::CheckStructure, corpus("ex2").to_str().unwrap(), &opts);
    assert_eq!(rep.status, Status::Pass);
    assert_eq!(rep.status.exit_code(), 0);
    // fail -> 1 (the prequantization equation has no solution here)
    let rep = run_command(
        Command::SolvePrequantLie,
        corpus("ex6").to_str().unwrap(),
        &opts,
    );
    assert_eq!(rep.status, Status::Fail);
    assert_eq!(rep.status.exit_code(), 1);
    assert!(rep
        .residuals
        .iter()
        .any(|r| r.location.starts_with("certificate")));
    // error -> 2 (missing file)
    let rep = run_command(Command::CheckStructure, "no-such-file.toml", &opts);
    assert_eq!(rep.status, Status::Error);
    assert_eq!(rep.status.exit_code(), 2);
    // error -> 2 (missing section)
    let rep = run_command(Command::Membership, corpus("ex2").to_str().unwrap(), &opts);
    assert_eq!(rep.status, Status::Error);
}

#[test]
fn reports_are_deterministic_up_to_timing() {
    let opts = Options {
        n: 2,
        seed: 7,
        max_dim: None,
    };
    for (cmd, target) in [
        (Command::CheckStructure, corpus("ex3")),
        (Command::CheckPrequant, corpus("ex3_instance")),
        (Command::SolvePrequantLie, corpus("ex6")),
        (Command::Jacobiator, corpus("ex2")),
        (Command::Chainmap, corpus("ex1")),
        (Command::Membership, corpus("quant51")),
        (Command::H0Residual, corpus("quant51")),
    ] {
        let mut a = run_command(cmd, target.to_str().unwrap(), &opts);
        let mut b = run_command(cmd, target.to_str().unwrap(), &opts);
        a.millis = 0;
        b.millis = 0;
        assert_eq!(
            a.to_json(),
            b.to_json(),
            "report for {} not byte-stable",
            cmd.name()
        );
    }
}

#[test]
fn quant51_file_checks_pass() {
    let opts = Options::default();
    let target = corpus("quant51");
    for cmd in [
        Command::CheckStructure,
        Command::CheckPolarization,
        Command::Membership,
        Command::H0Residual,
        Command::QuantumOp,
    ] {
        let rep = run_command(cmd, target.to_str().unwrap(), &opts);
        assert_eq!(rep.status, Status::Pass, "{}: {rep}", cmd.name());
    }
}

#[test]
fn ex3_instance_prequant_passes() {
    let opts = Options::default();
    let rep = run_command(
        Command::CheckPrequant,
        corpus("ex3_instance").to_str().unwrap(),
        &opts,
    );
    assert_eq!(rep.status, Status::Pass, "{rep}");
    assert!(rep.assumptions.iter().any(|a| a.contains("integrality")));
}

#[test]
fn ex4_prequant_and_cohomology() {
    let opts = Options::default();
    let rep = run_command(Command::CheckPrequant, corpus("ex4").to_str().unwrap(), &opts);
    assert_eq!(rep.status, Status::Pass, "{rep}");
    let rep = run_command(
        Command::CohomologyLie,
        corpus("ex6").to_str().unwrap(),
        &Options {
            n: 2,
            seed: 0,
            max_dim: None,
        },
    );
    assert_eq!(rep.status, Status::Pass);
    assert!(rep.assumptions.iter().any(|a| a.contains("dim H^2 = 2")));
}

#[test]
fn structure_command_catches_broken_background() {
    // Perturb the background of the exponential example by a non-closed
    // form; the structure check must fail with nonzero residuals.
    let text = std::fs::read_to_string(corpus("ex3")).unwrap();
    let mut f = StructureFile::from_toml_str(&text).unwrap();
    let sig = f.sig.clone();
    let x1 = tpq::expr::Expr::coord(&sig, "x1").unwrap();
    let bad = tpq::geom::Form::from_components(&sig, 3, vec![(vec![1, 2, 3], x1)]).unwrap();
    f.form_3 = Some(f.form_3.unwrap().add(&bad).unwrap());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, f.to_toml_string()).unwrap();
    let rep = run_command(
        Command::CheckStructure,
        path.to_str().unwrap(),
        &Options::default(),
    );
    assert_eq!(rep.status, Status::Fail);
    assert!(!rep.residuals.is_empty());
}
