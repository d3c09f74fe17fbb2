//! Structure files: the TOML input format of the command-line front end.
//!
//! Component keys are comma-joined 1-based index tuples, strictly
//! increasing ("1,2" for the first two coordinate directions); values are
//! expression strings over the declared chart. The `[lie]` section holds
//! rational coefficients instead.

use crate::chart::{ChartError, ChartSignature};
use crate::expr::{parse_expr, Expr, ParseError};
use crate::geom::{Form, GeomError, MultiVector};
use crate::liealg::{AlgForm, AlgMultiVector, LieAlgebraModel, LieError, Rat};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StructureError {
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("TOML parse error: {0}")]
    Toml(String),
    #[error("missing [chart]")]
    MissingChart,
    #[error(transparent)]
    Chart(#[from] ChartError),
    #[error("in `{key}`: indices must be strictly increasing")]
    IndicesNotIncreasing { key: String },
    #[error("in `{key}`: bad index tuple `{text}`")]
    BadIndexTuple { key: String, text: String },
    #[error("in `{key}`: index {index} out of range (1..={dim})")]
    IndexOutOfRange {
        key: String,
        index: usize,
        dim: usize,
    },
    #[error("in `{key}`: {source}")]
    Parse { key: String, source: ParseError },
    #[error("in `{key}`: bad rational `{text}`")]
    BadRational { key: String, text: String },
    #[error("[lie] needs either `basis` + `brackets` or `gl_rows` + `gl_cols`")]
    LieUnderspecified,
    #[error(transparent)]
    Lie(#[from] LieError),
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error("missing section [{0}] required by this command")]
    MissingSection(&'static str),
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct RawOpaque {
    name: String,
    depends: Vec<String>,
    real: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawChart {
    coordinates: Vec<String>,
    max_dim: Option<usize>,
    conjugation: Option<BTreeMap<String, String>>,
    opaque: Option<Vec<RawOpaque>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct RawBundle {
    connection: Option<BTreeMap<String, String>>,
    z: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawPolarization {
    generators: Vec<BTreeMap<String, String>>,
    complement: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct RawLie {
    basis: Option<Vec<String>>,
    brackets: Option<BTreeMap<String, BTreeMap<String, String>>>,
    gl_rows: Option<Vec<usize>>,
    gl_cols: Option<Vec<usize>>,
    r: Option<BTreeMap<String, String>>,
    phi: Option<BTreeMap<String, String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct RawCandidates {
    z: Option<BTreeMap<String, String>>,
    phi: Option<BTreeMap<String, String>>,
    chi: Option<Vec<String>>,
    g: Option<Vec<String>>,
    f: Option<Vec<String>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawFile {
    chart: Option<RawChart>,
    bivector: Option<BTreeMap<String, String>>,
    form_1: Option<BTreeMap<String, String>>,
    form_2: Option<BTreeMap<String, String>>,
    form_3: Option<BTreeMap<String, String>>,
    bundle: Option<RawBundle>,
    polarization: Option<RawPolarization>,
    lie: Option<RawLie>,
    candidates: Option<RawCandidates>,
}

/// Candidate data for the verification commands.
#[derive(Clone, Default)]
pub struct Candidates {
    pub z: Option<MultiVector>,
    pub phi_two: Option<Form>,
    pub chi: Vec<Expr>,
    pub g: Vec<Expr>,
    pub f: Vec<Expr>,
}

/// Lie-algebra section: the model plus optional bivector and background.
#[derive(Clone)]
pub struct LieSection {
    pub model: LieAlgebraModel,
    pub r: Option<AlgMultiVector>,
    pub phi: Option<AlgForm>,
}

/// Fully validated in-memory model of a structure file.
#[derive(Clone)]
pub struct StructureFile {
    pub sig: Arc<ChartSignature>,
    pub bivector: Option<MultiVector>,
    pub form_1: Option<Form>,
    pub form_2: Option<Form>,
    pub form_3: Option<Form>,
    pub bundle: Option<(Form, MultiVector)>,
    pub polarization: Option<(Vec<Form>, Option<Vec<usize>>)>,
    pub lie: Option<LieSection>,
    pub candidates: Candidates,
}

fn parse_tuple(key: &str, text: &str, arity: usize, dim: usize) -> Result<Vec<usize>, StructureError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let n: usize = part.trim().parse().map_err(|_| StructureError::BadIndexTuple {
            key: key.to_string(),
            text: text.to_string(),
        })?;
        if n == 0 || n > dim {
            return Err(StructureError::IndexOutOfRange {
                key: key.to_string(),
                index: n,
                dim,
            });
        }
        out.push(n - 1);
    }
    if out.len() != arity {
        return Err(StructureError::BadIndexTuple {
            key: key.to_string(),
            text: text.to_string(),
        });
    }
    if !out.windows(2).all(|w| w[0] < w[1]) {
        return Err(StructureError::IndicesNotIncreasing {
            key: key.to_string(),
        });
    }
    Ok(out)
}

fn parse_components(
    section: &str,
    sig: &Arc<ChartSignature>,
    arity: usize,
    map: &BTreeMap<String, String>,
) -> Result<Vec<(Vec<usize>, Expr)>, StructureError> {
    let mut out = Vec::new();
    for (k, v) in map {
        let key = format!("{section}.{k}");
        let idx = parse_tuple(&key, k, arity, sig.dim())?;
        let e = parse_expr(v, sig).map_err(|source| StructureError::Parse {
            key: key.clone(),
            source,
        })?;
        out.push((idx, e));
    }
    Ok(out)
}

fn parse_rational(key: &str, text: &str) -> Result<Rat, StructureError> {
    let t = text.trim();
    let bad = || StructureError::BadRational {
        key: key.to_string(),
        text: text.to_string(),
    };
    if let Some((n, d)) = t.split_once('/') {
        let num = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if den == BigInt::from(0) {
            return Err(bad());
        }
        Ok(BigRational::new(num, den))
    } else {
        let num = BigInt::from_str(t).map_err(|_| bad())?;
        Ok(BigRational::from_integer(num))
    }
}

fn parse_rat_components(
    section: &str,
    dim: usize,
    arity: usize,
    map: &BTreeMap<String, String>,
) -> Result<Vec<(Vec<usize>, Rat)>, StructureError> {
    let mut out = Vec::new();
    for (k, v) in map {
        let key = format!("{section}.{k}");
        let idx = parse_tuple(&key, k, arity, dim)?;
        out.push((idx, parse_rational(&key, v)?));
    }
    Ok(out)
}

impl StructureFile {
    /// Loads and fully validates a structure file.
    pub fn load(path: &Path) -> Result<Self, StructureError> {
        let text = std::fs::read_to_string(path).map_err(|source| StructureError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, StructureError> {
        let raw: RawFile =
            toml::from_str(text).map_err(|e| StructureError::Toml(e.to_string()))?;
        let chart = raw.chart.ok_or(StructureError::MissingChart)?;
        let max_dim = chart.max_dim.unwrap_or(crate::chart::DEFAULT_MAX_DIM);
        let mut sig = ChartSignature::with_max_dim(&chart.coordinates, max_dim)?;
        if let Some(conj) = &chart.conjugation {
            for (a, b) in conj {
                sig = sig.conjugate_pair(a, b)?;
            }
        }
        if let Some(opaques) = &chart.opaque {
            for o in opaques {
                sig = sig.opaque(&o.name, &o.depends, o.real.unwrap_or(true))?;
            }
        }
        let sig = sig.shared();

        let bivector = match &raw.bivector {
            Some(m) => Some(MultiVector::from_components(
                &sig,
                2,
                parse_components("bivector", &sig, 2, m)?,
            )?),
            None => None,
        };
        let mut forms: [Option<Form>; 3] = [None, None, None];
        for (slot, (name, m)) in [
            ("form_1", &raw.form_1),
            ("form_2", &raw.form_2),
            ("form_3", &raw.form_3),
        ]
        .iter()
        .enumerate()
        .map(|(i, p)| (i, *p))
        {
            if let Some(map) = m {
                forms[slot] = Some(Form::from_components(
                    &sig,
                    slot + 1,
                    parse_components(name, &sig, slot + 1, map)?,
                )?);
            }
        }
        let bundle = match &raw.bundle {
            Some(b) => {
                let omega = match &b.connection {
                    Some(m) => Form::from_components(
                        &sig,
                        1,
                        parse_components("bundle.connection", &sig, 1, m)?,
                    )?,
                    None => Form::zero(&sig, 1),
                };
                let z = match &b.z {
                    Some(m) => MultiVector::from_components(
                        &sig,
                        1,
                        parse_components("bundle.z", &sig, 1, m)?,
                    )?,
                    None => MultiVector::zero(&sig, 1),
                };
                Some((omega, z))
            }
            None => None,
        };
        let polarization = match &raw.polarization {
            Some(p) => {
                let mut gens = Vec::new();
                for (i, g) in p.generators.iter().enumerate() {
                    gens.push(Form::from_components(
                        &sig,
                        1,
                        parse_components(&format!("polarization.generators[{i}]"), &sig, 1, g)?,
                    )?);
                }
                let complement = match &p.complement {
                    Some(c) => {
                        let mut v = Vec::new();
                        for &i in c {
                            if i == 0 || i > sig.dim() {
                                return Err(StructureError::IndexOutOfRange {
                                    key: "polarization.complement".to_string(),
                                    index: i,
                                    dim: sig.dim(),
                                });
                            }
                            v.push(i - 1);
                        }
                        Some(v)
                    }
                    None => None,
                };
                Some((gens, complement))
            }
            None => None,
        };
        let lie = match &raw.lie {
            Some(l) => {
                let model = if let (Some(rows), Some(cols)) = (&l.gl_rows, &l.gl_cols) {
                    LieAlgebraModel::gl_subalgebra(rows, cols)?
                } else if let Some(basis) = &l.basis {
                    let mut brackets: BTreeMap<(usize, usize), Vec<(usize, Rat)>> =
                        BTreeMap::new();
                    if let Some(raw_br) = &l.brackets {
                        for (pair, val) in raw_br {
                            let key = format!("lie.brackets.{pair}");
                            let idx = parse_tuple(&key, pair, 2, basis.len())?;
                            let mut v = Vec::new();
                            for (target, coeff) in val {
                                let tkey = format!("{key}.{target}");
                                let ti = parse_tuple(&tkey, target, 1, basis.len())?;
                                v.push((ti[0], parse_rational(&tkey, coeff)?));
                            }
                            brackets.insert((idx[0], idx[1]), v);
                        }
                    }
                    LieAlgebraModel::new(basis.clone(), brackets)?
                } else {
                    return Err(StructureError::LieUnderspecified);
                };
                let dim = model.dim();
                let r = match &l.r {
                    Some(m) => Some(AlgMultiVector::from_components(
                        dim,
                        2,
                        parse_rat_components("lie.r", dim, 2, m)?,
                    )?),
                    None => None,
                };
                let phi = match &l.phi {
                    Some(m) => Some(AlgForm::from_components(
                        dim,
                        3,
                        parse_rat_components("lie.phi", dim, 3, m)?,
                    )?),
                    None => None,
                };
                Some(LieSection { model, r, phi })
            }
            None => None,
        };
        let mut candidates = Candidates::default();
        if let Some(c) = &raw.candidates {
            if let Some(m) = &c.z {
                candidates.z = Some(MultiVector::from_components(
                    &sig,
                    1,
                    parse_components("candidates.z", &sig, 1, m)?,
                )?);
            }
            if let Some(m) = &c.phi {
                candidates.phi_two = Some(Form::from_components(
                    &sig,
                    2,
                    parse_components("candidates.phi", &sig, 2, m)?,
                )?);
            }
            for (list, out) in [
                (&c.chi, &mut candidates.chi),
                (&c.g, &mut candidates.g),
                (&c.f, &mut candidates.f),
            ] {
                if let Some(items) = list {
                    for (i, s) in items.iter().enumerate() {
                        out.push(parse_expr(s, &sig).map_err(|source| StructureError::Parse {
                            key: format!("candidates[{i}]"),
                            source,
                        })?);
                    }
                }
            }
        }
        Ok(StructureFile {
            sig,
            bivector,
            form_1: forms[0].take(),
            form_2: forms[1].take(),
            form_3: forms[2].take(),
            bundle,
            polarization,
            lie,
            candidates,
        })
    }

    /// Serializes the model back to TOML; loading the output reproduces the
    /// model (expressions print in canonical form, which parses back to
    /// itself).
    pub fn to_toml_string(&self) -> String {
        fn comps_expr<'a, I: Iterator<Item = (&'a Vec<usize>, &'a Expr)>>(
            it: I,
        ) -> BTreeMap<String, String> {
            it.map(|(idx, e)| {
                (
                    idx.iter()
                        .map(|i| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    e.to_string(),
                )
            })
            .collect()
        }
        fn comps_rat<'a, I: Iterator<Item = (&'a Vec<usize>, &'a Rat)>>(
            it: I,
        ) -> BTreeMap<String, String> {
            it.map(|(idx, q)| {
                (
                    idx.iter()
                        .map(|i| (i + 1).to_string())
                        .collect::<Vec<_>>()
                        .join(","),
                    q.to_string(),
                )
            })
            .collect()
        }
        let chart = RawChart {
            coordinates: self.sig.coord_names().to_vec(),
            max_dim: Some(crate::chart::DEFAULT_MAX_DIM.max(self.sig.dim())),
            conjugation: {
                let mut m = BTreeMap::new();
                for i in 0..self.sig.dim() {
                    let j = self.sig.conjugate_coord(i);
                    if j > i {
                        m.insert(
                            self.sig.coord_name(i).to_string(),
                            self.sig.coord_name(j).to_string(),
                        );
                    }
                }
                if m.is_empty() {
                    None
                } else {
                    Some(m)
                }
            },
            opaque: {
                let v: Vec<RawOpaque> = self
                    .sig
                    .symbols()
                    .iter()
                    .map(|s| RawOpaque {
                        name: s.name.clone(),
                        depends: s
                            .deps
                            .iter()
                            .map(|&i| self.sig.coord_name(i).to_string())
                            .collect(),
                        real: Some(s.real),
                    })
                    .collect();
                if v.is_empty() {
                    None
                } else {
                    Some(v)
                }
            },
        };
        let raw = RawFile {
            chart: Some(chart),
            bivector: self.bivector.as_ref().map(|b| comps_expr(b.components())),
            form_1: self.form_1.as_ref().map(|f| comps_expr(f.components())),
            form_2: self.form_2.as_ref().map(|f| comps_expr(f.components())),
            form_3: self.form_3.as_ref().map(|f| comps_expr(f.components())),
            bundle: self.bundle.as_ref().map(|(w, z)| RawBundle {
                connection: Some(comps_expr(w.components())),
                z: Some(comps_expr(z.components())),
            }),
            polarization: self.polarization.as_ref().map(|(gens, comp)| RawPolarization {
                generators: gens.iter().map(|g| comps_expr(g.components())).collect(),
                complement: comp
                    .as_ref()
                    .map(|c| c.iter().map(|i| i + 1).collect()),
            }),
            lie: self.lie.as_ref().map(|l| RawLie {
                basis: Some(
                    (0..l.model.dim())
                        .map(|i| l.model.basis_name(i).to_string())
                        .collect(),
                ),
                brackets: Some({
                    let mut m = BTreeMap::new();
                    for i in 0..l.model.dim() {
                        for j in i + 1..l.model.dim() {
                            let br = l.model.bracket_basis(i, j);
                            if br.is_empty() {
                                continue;
                            }
                            let mut inner = BTreeMap::new();
                            for (k, qv) in br {
                                inner.insert((k + 1).to_string(), qv.to_string());
                            }
                            m.insert(format!("{},{}", i + 1, j + 1), inner);
                        }
                    }
                    m
                }),
                gl_rows: None,
                gl_cols: None,
                r: l.r.as_ref().map(|r| comps_rat(r.components())),
                phi: l.phi.as_ref().map(|p| comps_rat(p.components())),
            }),
            candidates: {
                let c = &self.candidates;
                if c.z.is_none()
                    && c.phi_two.is_none()
                    && c.chi.is_empty()
                    && c.g.is_empty()
                    && c.f.is_empty()
                {
                    None
                } else {
                    Some(RawCandidates {
                        z: c.z.as_ref().map(|z| comps_expr(z.components())),
                        phi: c.phi_two.as_ref().map(|p| comps_expr(p.components())),
                        chi: if c.chi.is_empty() {
                            None
                        } else {
                            Some(c.chi.iter().map(|e| e.to_string()).collect())
                        },
                        g: if c.g.is_empty() {
                            None
                        } else {
                            Some(c.g.iter().map(|e| e.to_string()).collect())
                        },
                        f: if c.f.is_empty() {
                            None
                        } else {
                            Some(c.f.iter().map(|e| e.to_string()).collect())
                        },
                    })
                }
            },
        };
        toml::to_string_pretty(&raw).expect("structure serialization")
    }
}
