//! Command dispatch: loads a structure file (or a built-in example name),
//! runs the requested verification, and produces a [`Report`].
//!
//! Exit codes: 0 pass, 1 fail, 2 error. Reports are deterministic for a
//! fixed input and seed (up to the timing field); independent residuals are
//! emitted in a fixed order.

use crate::corpus;
use crate::expr::Expr;
use crate::gauss::GaussRat;
use crate::geom::{
    check_twisted_poisson, del_phi, divergence, exterior_derivative, sharp, Form,
    TwistedPoissonStructure,
};
use crate::liealg::{
    algebraic_sharp, check_twisted_structure, closed_two_forms, ltp_cohomology,
    solve_prequantization, AlgMultiVector, PrequantOutcome,
};
use crate::prequant::{check_prequantization, homomorphism_residual, LineBundleModel};
use crate::quant::{
    check_polarization, kernel_residuals, membership_residual, quantizable_pair_check,
    quantum_operator, HalfDensitySection, Polarization,
};
use crate::report::Report;
use crate::structure::{StructureError, StructureFile};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    CheckStructure,
    CheckPrequant,
    SolvePrequantLie,
    CheckPolarization,
    Membership,
    H0Residual,
    QuantumOp,
    CohomologyLie,
    Jacobiator,
    Chainmap,
    RunExample,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        Some(match name {
            "check-structure" => Command::CheckStructure,
            "check-prequant" => Command::CheckPrequant,
            "solve-prequant-lie" => Command::SolvePrequantLie,
            "check-polarization" => Command::CheckPolarization,
            "membership" => Command::Membership,
            "h0-residual" => Command::H0Residual,
            "quantum-op" => Command::QuantumOp,
            "cohomology-lie" => Command::CohomologyLie,
            "jacobiator" => Command::Jacobiator,
            "chainmap" => Command::Chainmap,
            "run-example" => Command::RunExample,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckStructure => "check-structure",
            Command::CheckPrequant => "check-prequant",
            Command::SolvePrequantLie => "solve-prequant-lie",
            Command::CheckPolarization => "check-polarization",
            Command::Membership => "membership",
            Command::H0Residual => "h0-residual",
            Command::QuantumOp => "quantum-op",
            Command::CohomologyLie => "cohomology-lie",
            Command::Jacobiator => "jacobiator",
            Command::Chainmap => "chainmap",
            Command::RunExample => "run-example",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    /// Size parameter: complex dimension for quant51, cohomology degree for
    /// cohomology-lie.
    pub n: usize,
    pub seed: u64,
    pub max_dim: Option<usize>,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            n: 2,
            seed: 0,
            max_dim: None,
        }
    }
}

/// Runs a command against a structure file path (or example name for
/// `run-example`), capturing any error into an error report.
pub fn run_command(cmd: Command, target: &str, opts: &Options) -> Report {
    let start = Instant::now();
    let mut report = match dispatch(cmd, target, opts) {
        Ok(r) => r,
        Err(msg) => Report::error(cmd.name(), msg),
    };
    report.millis = start.elapsed().as_millis() as u64;
    report
}

fn dispatch(cmd: Command, target: &str, opts: &Options) -> Result<Report, String> {
    if cmd == Command::RunExample {
        return run_example(target, opts);
    }
    let file = StructureFile::load(Path::new(target)).map_err(|e| e.to_string())?;
    match cmd {
        Command::CheckStructure => check_structure_cmd(&file),
        Command::CheckPrequant => check_prequant_cmd(&file),
        Command::SolvePrequantLie => solve_prequant_lie_cmd(&file),
        Command::CheckPolarization => check_polarization_cmd(&file),
        Command::Membership => membership_cmd(&file),
        Command::H0Residual => h0_residual_cmd(&file),
        Command::QuantumOp => quantum_op_cmd(&file),
        Command::CohomologyLie => cohomology_lie_cmd(&file, opts.n),
        Command::Jacobiator => jacobiator_cmd(&file, opts.seed),
        Command::Chainmap => chainmap_cmd(&file, opts.seed),
        Command::RunExample => unreachable!(),
    }
}

fn idx_label(sig: &crate::chart::ChartSignature, idx: &[usize]) -> String {
    idx.iter()
        .map(|&i| sig.coord_name(i).to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn structure_of(file: &StructureFile) -> Result<TwistedPoissonStructure, String> {
    let lambda = file
        .bivector
        .clone()
        .ok_or_else(|| StructureError::MissingSection("bivector").to_string())?;
    let phi = file
        .form_3
        .clone()
        .unwrap_or_else(|| Form::zero(&file.sig, 3));
    Ok(TwistedPoissonStructure::new_unchecked(lambda, phi))
}

fn check_structure_cmd(file: &StructureFile) -> Result<Report, String> {
    let s = structure_of(file)?;
    let rep = check_twisted_poisson(&s.lambda, &s.phi).map_err(|e| e.to_string())?;
    let mut out = Report::new("check-structure");
    for (idx, e) in &rep.closed {
        out.push_residual(format!("d(phi)[{}]", idx_label(&file.sig, idx)), e);
    }
    for (idx, e) in &rep.structure {
        out.push_residual(
            format!("(1/2)[L,L]-sharp(L)(phi)[{}]", idx_label(&file.sig, idx)),
            e,
        );
    }
    Ok(out)
}

fn check_prequant_cmd(file: &StructureFile) -> Result<Report, String> {
    let s = structure_of(file)?;
    let z = file
        .candidates
        .z
        .clone()
        .ok_or_else(|| StructureError::MissingSection("candidates.z").to_string())?;
    let phi_two = file
        .candidates
        .phi_two
        .clone()
        .ok_or_else(|| StructureError::MissingSection("candidates.phi").to_string())?;
    let rep = check_prequantization(&s, &z, &phi_two).map_err(|e| e.to_string())?;
    let mut out = Report::new("check-prequant");
    for (idx, e) in &rep.closed {
        out.push_residual(format!("d(Phi)[{}]", idx_label(&file.sig, idx)), e);
    }
    for (idx, e) in &rep.equation {
        out.push_residual(
            format!("L+del(Z)-sharp(Phi)[{}]", idx_label(&file.sig, idx)),
            e,
        );
    }
    for a in &rep.assumptions {
        out.push_assumption(a.clone());
    }
    Ok(out)
}

fn lie_triple(
    file: &StructureFile,
) -> Result<(crate::liealg::LieAlgebraModel, AlgMultiVector, crate::liealg::AlgForm), String> {
    let lie = file
        .lie
        .as_ref()
        .ok_or_else(|| StructureError::MissingSection("lie").to_string())?;
    let dim = lie.model.dim();
    let r = lie
        .r
        .clone()
        .unwrap_or_else(|| AlgMultiVector::zero(dim, 2));
    let phi = lie
        .phi
        .clone()
        .unwrap_or_else(|| crate::liealg::AlgForm::zero(dim, 3));
    Ok((lie.model.clone(), r, phi))
}

fn solve_prequant_lie_cmd(file: &StructureFile) -> Result<Report, String> {
    let (model, r, phi) = lie_triple(file)?;
    let mut out = Report::new("solve-prequant-lie");
    out.push_assumption("model: algebraic (Lie-algebra) reading");
    let srep = check_twisted_structure(&model, &r, &phi).map_err(|e| e.to_string())?;
    if !srep.passes() {
        return Err("input pair fails the twisted-structure residuals".to_string());
    }
    match solve_prequantization(&model, &r, &phi).map_err(|e| e.to_string())? {
        PrequantOutcome::Solvable { z, phi_two } => {
            out.push_assumption("integrality: assumed");
            out.push_assumption(format!("witness Z = {}", z.display(&model)));
            out.push_assumption(format!("witness Phi = {}", phi_two.display(&model)));
        }
        PrequantOutcome::Unsolvable { certificate } => {
            let pairs = crate::geom::increasing_tuples(model.dim(), 2);
            for (row, pr) in pairs.iter().enumerate() {
                if !num_traits::Zero::is_zero(&certificate[row]) {
                    out.push_entry(
                        format!(
                            "certificate[{}^{}]",
                            model.basis_name(pr[0]),
                            model.basis_name(pr[1])
                        ),
                        certificate[row].to_string(),
                    );
                }
            }
            out.push_assumption(
                "no (Z, Phi) solves the prequantization equation; the certificate \
                 annihilates every reachable right-hand side but not the bivector",
            );
        }
    }
    Ok(out)
}

fn polarization_of(file: &StructureFile) -> Result<Polarization, String> {
    let s = structure_of(file)?;
    let (gens, complement) = file
        .polarization
        .clone()
        .ok_or_else(|| StructureError::MissingSection("polarization").to_string())?;
    Polarization::new(s, gens, complement).map_err(|e| e.to_string())
}

fn check_polarization_cmd(file: &StructureFile) -> Result<Report, String> {
    let p = polarization_of(file)?;
    let rep = check_polarization(&p).map_err(|e| e.to_string())?;
    let mut out = Report::new("check-polarization");
    for ((i, j), e) in &rep.isotropy {
        out.push_residual(format!("isotropy[{i},{j}]"), e);
    }
    for ((i, j, c), e) in &rep.closure {
        out.push_residual(
            format!("closure[{i},{j}] off {}", file.sig.coord_name(*c)),
            e,
        );
    }
    Ok(out)
}

fn membership_cmd(file: &StructureFile) -> Result<Report, String> {
    let p = polarization_of(file)?;
    if file.candidates.g.is_empty() {
        return Err(StructureError::MissingSection("candidates.g").to_string());
    }
    let mut out = Report::new("membership");
    for (gi, g) in file.candidates.g.iter().enumerate() {
        let resid = membership_residual(&p, &Form::differential(g)).map_err(|e| e.to_string())?;
        for ((gen, c), e) in resid {
            out.push_residual(
                format!("g[{gi}] gen[{gen}] off {}", file.sig.coord_name(c)),
                &e,
            );
        }
    }
    Ok(out)
}

fn bundle_of(file: &StructureFile) -> Result<LineBundleModel, String> {
    let s = structure_of(file)?;
    match &file.bundle {
        Some((omega, z)) => {
            LineBundleModel::new(s, omega.clone(), z.clone()).map_err(|e| e.to_string())
        }
        None => Ok(LineBundleModel::anchor_only(s)),
    }
}

fn h0_residual_cmd(file: &StructureFile) -> Result<Report, String> {
    let p = polarization_of(file)?;
    let b = bundle_of(file)?;
    if file.candidates.chi.is_empty() {
        return Err(StructureError::MissingSection("candidates.chi").to_string());
    }
    let mut out = Report::new("h0-residual");
    for (ci, chi) in file.candidates.chi.iter().enumerate() {
        let s = HalfDensitySection::new(chi.clone());
        let resid = kernel_residuals(&b, &p, &s).map_err(|e| e.to_string())?;
        for (gen, e) in resid {
            out.push_residual(format!("chi[{ci}] gen[{gen}]"), &e);
        }
    }
    Ok(out)
}

fn quantum_op_cmd(file: &StructureFile) -> Result<Report, String> {
    let p = polarization_of(file)?;
    let b = bundle_of(file)?;
    if file.candidates.g.is_empty() || file.candidates.chi.is_empty() {
        return Err(StructureError::MissingSection("candidates.g and candidates.chi").to_string());
    }
    let mut out = Report::new("quantum-op");
    for (gi, g) in file.candidates.g.iter().enumerate() {
        for (ci, chi) in file.candidates.chi.iter().enumerate() {
            let s = HalfDensitySection::new(chi.clone());
            let image = quantum_operator(&b, g, &s).map_err(|e| e.to_string())?;
            out.push_assumption(format!("ghat[g[{gi}], chi[{ci}]] = {}", image.chi));
            // The image must stay in the polarized kernel when the input did.
            let in_kernel = kernel_residuals(&b, &p, &s)
                .map_err(|e| e.to_string())?
                .iter()
                .all(|(_, e)| e.is_zero());
            if in_kernel {
                for (gen, e) in kernel_residuals(&b, &p, &image).map_err(|e| e.to_string())? {
                    out.push_residual(format!("stability g[{gi}] chi[{ci}] gen[{gen}]"), &e);
                }
            } else {
                out.push_assumption(format!(
                    "chi[{ci}] is not in the polarized kernel; stability not required"
                ));
            }
        }
    }
    Ok(out)
}

fn cohomology_lie_cmd(file: &StructureFile, degree: usize) -> Result<Report, String> {
    let (model, r, phi) = lie_triple(file)?;
    let srep = check_twisted_structure(&model, &r, &phi).map_err(|e| e.to_string())?;
    if !srep.passes() {
        return Err("input pair fails the twisted-structure residuals".to_string());
    }
    let dim = ltp_cohomology(&model, &r, &phi, degree).map_err(|e| e.to_string())?;
    let mut out = Report::new("cohomology-lie");
    out.push_assumption(format!("dim H^{degree} = {dim}"));
    Ok(out)
}

/// Seeded random polynomial of degree <= 2 in the chart coordinates.
pub fn random_polynomial(sig: &Arc<crate::chart::ChartSignature>, rng: &mut ChaCha8Rng) -> Expr {
    let dim = sig.dim();
    let mut e = Expr::int(sig, rng.gen_range(-3i64..=3));
    for _ in 0..3 {
        let c = rng.gen_range(-3i64..=3);
        if c == 0 {
            continue;
        }
        let mut term = Expr::int(sig, c);
        for _ in 0..rng.gen_range(1..=2usize) {
            let i = rng.gen_range(0..dim);
            term = &term * &Expr::coord_by_index(sig, i);
        }
        e = &e + &term;
    }
    e
}

/// Seeded random form of the given grade with polynomial coefficients.
fn random_form(sig: &Arc<crate::chart::ChartSignature>, grade: usize, rng: &mut ChaCha8Rng) -> Form {
    let tuples = crate::geom::increasing_tuples(sig.dim(), grade);
    let mut comps = Vec::new();
    for t in tuples {
        if rng.gen_bool(0.5) {
            comps.push((t, random_polynomial(sig, rng)));
        }
    }
    Form::from_components(sig, grade, comps).expect("random form")
}

fn jacobiator_cmd(file: &StructureFile, seed: u64) -> Result<Report, String> {
    let s = structure_of(file)?;
    let mut out = Report::new("jacobiator");
    let mut triples: Vec<(Expr, Expr, Expr)> = Vec::new();
    if file.candidates.f.len() >= 3 {
        triples.push((
            file.candidates.f[0].clone(),
            file.candidates.f[1].clone(),
            file.candidates.f[2].clone(),
        ));
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..5 {
            triples.push((
                random_polynomial(&file.sig, &mut rng),
                random_polynomial(&file.sig, &mut rng),
                random_polynomial(&file.sig, &mut rng),
            ));
        }
        out.push_assumption(format!("trials: 5 random polynomial triples, seed {seed}"));
    }
    for (k, (f, g, h)) in triples.iter().enumerate() {
        let j = crate::geom::jacobiator(&s, f, g, h).map_err(|e| e.to_string())?;
        out.push_residual(format!("jacobiator[{k}]"), &j);
    }
    Ok(out)
}

fn chainmap_cmd(file: &StructureFile, seed: u64) -> Result<Report, String> {
    let s = structure_of(file)?;
    let mut out = Report::new("chainmap");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_grade = 3.min(file.sig.dim());
    for grade in 0..=max_grade {
        for trial in 0..3 {
            let eta = random_form(&file.sig, grade, &mut rng);
            let lhs = del_phi(&s, &sharp(&s.lambda, &eta).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let rhs = sharp(&s.lambda, &exterior_derivative(&eta)).map_err(|e| e.to_string())?;
            let resid = lhs.add(&rhs).map_err(|e| e.to_string())?;
            for (idx, e) in resid.components() {
                out.push_residual(
                    format!(
                        "grade {grade} trial {trial} [{}]",
                        idx_label(&file.sig, idx)
                    ),
                    e,
                );
            }
        }
    }
    out.push_assumption(format!(
        "del_phi(sharp(eta)) + sharp(d eta) over random forms, seed {seed}"
    ));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Built-in example batteries
// ---------------------------------------------------------------------------

fn run_example(name: &str, opts: &Options) -> Result<Report, String> {
    match name {
        "ex1" => example_ex1(),
        "ex2" => example_ex2(),
        "ex3" => example_ex3(),
        "ex4" => example_ex4(opts.seed),
        "ex6" => example_ex6(),
        "quant51" => example_quant51(opts.n),
        other => Err(corpus::CorpusError::UnknownExample(other.to_string()).to_string()),
    }
}

fn push_structure_residuals(
    out: &mut Report,
    sig: &crate::chart::ChartSignature,
    s: &TwistedPoissonStructure,
) -> Result<(), String> {
    let rep = check_twisted_poisson(&s.lambda, &s.phi).map_err(|e| e.to_string())?;
    for (idx, e) in &rep.closed {
        out.push_residual(format!("d(phi)[{}]", idx_label(sig, idx)), e);
    }
    for (idx, e) in &rep.structure {
        out.push_residual(
            format!("(1/2)[L,L]-sharp(L)(phi)[{}]", idx_label(sig, idx)),
            e,
        );
    }
    Ok(())
}

fn example_ex1() -> Result<Report, String> {
    let s = corpus::ex1().map_err(|e| e.to_string())?;
    let mut out = Report::new("run-example ex1");
    let sig = s.signature().clone();
    push_structure_residuals(&mut out, &sig, &s)?;
    // sharp(L)(phi) vanishes outright on a 3-dimensional chart.
    let sp = sharp(&s.lambda, &s.phi).map_err(|e| e.to_string())?;
    for (idx, e) in sp.components() {
        out.push_residual(format!("sharp(L)(phi)[{}]", idx_label(&sig, idx)), e);
    }
    Ok(out)
}

fn example_ex2() -> Result<Report, String> {
    let m = corpus::ex2().map_err(|e| e.to_string())?;
    let sig = m.structure.signature().clone();
    let mut out = Report::new("run-example ex2");
    push_structure_residuals(&mut out, &sig, &m.structure)?;
    // Identity behind non-prequantizability:
    // L + del(sharp(L0)(alpha)) = sharp(L0)(f w0 - f d(alpha) - alpha ^ df).
    let z = sharp(&m.l0, &m.alpha).map_err(|e| e.to_string())?;
    let lhs = m
        .structure
        .lambda
        .add(&del_phi(&m.structure, &z).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let df = Form::differential(&m.f);
    let inner = m
        .omega0
        .scale(&m.f)
        .sub(&exterior_derivative(&m.alpha).scale(&m.f))
        .map_err(|e| e.to_string())?
        .sub(&m.alpha.wedge(&df).map_err(|e| e.to_string())?)
        .map_err(|e| e.to_string())?;
    let rhs = sharp(&m.l0, &inner).map_err(|e| e.to_string())?;
    let resid = lhs.sub(&rhs).map_err(|e| e.to_string())?;
    for (idx, e) in resid.components() {
        out.push_residual(format!("reduction identity[{}]", idx_label(&sig, idx)), e);
    }
    out.push_assumption(
        "any closed Phi matching the reduced equation would need d(Phi) = phi != 0, \
         so no prequantization pair exists",
    );
    Ok(out)
}

fn example_ex3() -> Result<Report, String> {
    let m = corpus::ex3().map_err(|e| e.to_string())?;
    let sig = m.structure.signature().clone();
    let mut out = Report::new("run-example ex3");
    push_structure_residuals(&mut out, &sig, &m.structure)?;
    let inst = corpus::ex3_prequant_instance().map_err(|e| e.to_string())?;
    let rep = check_prequantization(&inst.structure, &inst.z, &inst.phi_two)
        .map_err(|e| e.to_string())?;
    let isig = inst.structure.signature().clone();
    for (idx, e) in &rep.closed {
        out.push_residual(format!("instance d(Phi)[{}]", idx_label(&isig, idx)), e);
    }
    for (idx, e) in &rep.equation {
        out.push_residual(
            format!("instance L+del(Z)-sharp(Phi)[{}]", idx_label(&isig, idx)),
            e,
        );
    }
    for a in &rep.assumptions {
        out.push_assumption(a.clone());
    }
    Ok(out)
}

fn example_ex4(seed: u64) -> Result<Report, String> {
    let m = corpus::ex4().map_err(|e| e.to_string())?;
    let sig = m.bundle.structure.signature().clone();
    let mut out = Report::new("run-example ex4");
    // exactness and the prequantization residuals for (Z, Phi) = (-X0, 0)
    let d = del_phi(&m.bundle.structure, &m.x0).map_err(|e| e.to_string())?;
    let resid = d.sub(&m.bundle.structure.lambda).map_err(|e| e.to_string())?;
    for (idx, e) in resid.components() {
        out.push_residual(format!("exactness[{}]", idx_label(&sig, idx)), e);
    }
    let rep = check_prequantization(
        &m.bundle.structure,
        &m.x0.neg(),
        &Form::zero(&sig, 2),
    )
    .map_err(|e| e.to_string())?;
    for (idx, e) in &rep.equation {
        out.push_residual(
            format!("L+del(Z)-sharp(Phi)[{}]", idx_label(&sig, idx)),
            e,
        );
    }
    for a in &rep.assumptions {
        out.push_assumption(a.clone());
    }
    // homomorphism property on random observables
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..3 {
        let f = random_polynomial(&sig, &mut rng);
        let g = random_polynomial(&sig, &mut rng);
        let s = random_polynomial(&sig, &mut rng);
        let r = homomorphism_residual(&m.bundle, &f, &g, &s).map_err(|e| e.to_string())?;
        out.push_residual(format!("homomorphism[{k}]"), &r);
    }
    out.push_assumption(format!("homomorphism trials seeded with {seed}"));
    Ok(out)
}

fn example_ex6() -> Result<Report, String> {
    let (model, r, phi) = corpus::ex6().map_err(|e| e.to_string())?;
    let mut out = Report::new("run-example ex6");
    out.push_assumption("model: algebraic (Lie-algebra) reading");
    let srep = check_twisted_structure(&model, &r, &phi).map_err(|e| e.to_string())?;
    for (idx, q) in srep.closed.iter().chain(srep.structure.iter()) {
        if !num_traits::Zero::is_zero(q) {
            out.push_entry(format!("structure{:?}", idx), q.to_string());
        }
    }
    let closed = closed_two_forms(&model);
    out.push_assumption(format!("closed 2-forms: dimension {}", closed.len()));
    let annihilated = closed
        .iter()
        .filter(|f| algebraic_sharp(&r, f).unwrap().is_zero())
        .count();
    out.push_assumption(format!(
        "sharp(r) annihilates {annihilated} of {} closed basis forms",
        closed.len()
    ));
    match solve_prequantization(&model, &r, &phi).map_err(|e| e.to_string())? {
        PrequantOutcome::Unsolvable { .. } => {
            out.push_assumption("prequantization equation: unsolvable, as expected");
        }
        PrequantOutcome::Solvable { .. } => {
            out.push_entry("prequantization", "unexpectedly solvable");
        }
    }
    // symbolic expansion of r + del(Z) over the free coefficients of Z
    for m in 0..model.dim() {
        let dz = crate::liealg::algebraic_del_phi(&model, &r, &phi, &AlgMultiVector::basis(model.dim(), m))
            .map_err(|e| e.to_string())?;
        if !dz.is_zero() {
            out.push_assumption(format!(
                "del({}) = {}",
                model.basis_name(m),
                dz.display(&model)
            ));
        }
    }
    Ok(out)
}

fn example_quant51(n: usize) -> Result<Report, String> {
    let m = corpus::quant51(n).map_err(|e| e.to_string())?;
    let sig = m.bundle.structure.signature().clone();
    let mut out = Report::new("run-example quant51");
    push_structure_residuals(&mut out, &sig, &m.bundle.structure)?;
    // polarization residuals
    let prep = check_polarization(&m.polarization).map_err(|e| e.to_string())?;
    for ((i, j), e) in &prep.isotropy {
        out.push_residual(format!("isotropy[{i},{j}]"), e);
    }
    for ((i, j, c), e) in &prep.closure {
        out.push_residual(format!("closure[{i},{j}] off {}", sig.coord_name(*c)), e);
    }
    // membership and pair checks for the time-affine observable f + t
    let f = Expr::symbol(&sig, "f").map_err(|e| e.to_string())?;
    let t = Expr::coord(&sig, "t").map_err(|e| e.to_string())?;
    let g1 = &f + &t;
    for ((gen, c), e) in
        membership_residual(&m.polarization, &Form::differential(&g1)).map_err(|e| e.to_string())?
    {
        out.push_residual(
            format!("membership f+t gen[{gen}] off {}", sig.coord_name(c)),
            &e,
        );
    }
    let g2 = g1.scale(&GaussRat::from_int(2));
    let pair = quantizable_pair_check(&m.polarization, &g1, &g2).map_err(|e| e.to_string())?;
    for ((gen, c), e) in &pair.residuals {
        out.push_residual(
            format!("pair(f+t, 2f+2t) gen[{gen}] off {}", sig.coord_name(*c)),
            e,
        );
    }
    // polarized-kernel members
    let half = GaussRat::from_ratio(1, 2);
    let chi_f = Expr::exp(&f.scale(&half)).map_err(|e| e.to_string())?;
    let chi_mt = Expr::exp(&t.scale(&-half)).map_err(|e| e.to_string())?;
    for (label, chi) in [("exp(f/2)", &chi_f), ("exp(-t/2)", &chi_mt)] {
        let s = HalfDensitySection::new(chi.clone());
        for (gen, e) in
            kernel_residuals(&m.bundle, &m.polarization, &s).map_err(|e| e.to_string())?
        {
            out.push_residual(format!("kernel {label} gen[{gen}]"), &e);
        }
    }
    // divergence of the anchor images: div sharp(dz_k) = 2i e^t f_{zb_k}
    for k in 0..n {
        let x = sharp(
            &m.bundle.structure.lambda,
            &Form::basis_coform(&sig, k),
        )
        .map_err(|e| e.to_string())?;
        let div = divergence(&x).map_err(|e| e.to_string())?;
        let expected = crate::expr::parse_expr(&format!("2*i*exp(t)*D[f,zb{}]", k + 1), &sig)
            .map_err(|e| e.to_string())?;
        out.push_residual(format!("divergence[dz{}]", k + 1), &(&div - &expected));
    }
    // quantum operator image of f+t stays in the kernel
    let s = HalfDensitySection::new(chi_f);
    let image = quantum_operator(&m.bundle, &g1, &s).map_err(|e| e.to_string())?;
    for (gen, e) in
        kernel_residuals(&m.bundle, &m.polarization, &image).map_err(|e| e.to_string())?
    {
        out.push_residual(format!("operator stability gen[{gen}]"), &e);
    }
    out.push_assumption(format!("complex dimension n = {n}"));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Status;

    #[test]
    fn command_names_round_trip() {
        for name in [
            "check-structure",
            "check-prequant",
            "solve-prequant-lie",
            "check-polarization",
            "membership",
            "h0-residual",
            "quantum-op",
            "cohomology-lie",
            "jacobiator",
            "chainmap",
            "run-example",
        ] {
            let cmd = Command::parse(name).unwrap();
            assert_eq!(cmd.name(), name);
        }
        assert!(Command::parse("bogus").is_none());
    }

    #[test]
    fn unknown_example_is_an_error() {
        let rep = run_command(Command::RunExample, "nope", &Options::default());
        assert_eq!(rep.status, Status::Error);
    }

    #[test]
    fn builtin_examples_pass() {
        for name in ["ex1", "ex2", "ex3", "ex4", "ex6", "quant51"] {
            let rep = run_command(Command::RunExample, name, &Options::default());
            assert_eq!(rep.status, Status::Pass, "example {name}: {rep}");
        }
    }
}
