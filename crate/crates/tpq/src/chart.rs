//! Coordinate chart signatures: coordinate names, the conjugation involution,
//! and declarations of opaque smooth functions.
//!
//! An opaque function is a free differential indeterminate: nothing is assumed
//! about it beyond smoothness, its declared coordinate dependencies and an
//! optional reality flag. Identities proved over a chart therefore hold for
//! every smooth instantiation of its opaque symbols.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// Default cap on chart dimension; the alternating-sum operators are
/// exponential in grade, so large charts are rejected unless raised
/// explicitly.
pub const DEFAULT_MAX_DIM: usize = 8;

const RESERVED: &[&str] = &["i", "pi", "exp", "D"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChartError {
    #[error("chart dimension {0} exceeds the maximum {1}")]
    DimensionTooLarge(usize, usize),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("`{0}` is reserved and cannot name a coordinate or symbol")]
    ReservedName(String),
    #[error("invalid identifier `{0}`")]
    InvalidIdentifier(String),
    #[error("unknown coordinate `{0}`")]
    UnknownCoordinate(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("coordinate `{0}` already participates in a conjugation pair")]
    ConjugationClash(String),
}

/// Declaration of an opaque smooth function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpaqueSymbol {
    pub name: String,
    /// Indices of the coordinates the symbol may depend on.
    pub deps: BTreeSet<usize>,
    /// Real-valued symbols conjugate through the coordinate involution;
    /// conjugating a non-real symbol is an error.
    pub real: bool,
}

/// An ordered coordinate system together with its conjugation involution and
/// opaque-symbol declarations. Immutable once built; shared via `Arc`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChartSignature {
    coords: Vec<String>,
    /// Involution on coordinate indices; `conj[i] == i` for real coordinates.
    conj: Vec<usize>,
    symbols: Vec<OpaqueSymbol>,
}

fn valid_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl ChartSignature {
    pub fn new<S: AsRef<str>>(coords: &[S]) -> Result<Self, ChartError> {
        Self::with_max_dim(coords, DEFAULT_MAX_DIM)
    }

    pub fn with_max_dim<S: AsRef<str>>(coords: &[S], max_dim: usize) -> Result<Self, ChartError> {
        if coords.len() > max_dim {
            return Err(ChartError::DimensionTooLarge(coords.len(), max_dim));
        }
        let mut names = Vec::with_capacity(coords.len());
        for c in coords {
            let name = c.as_ref();
            if !valid_ident(name) {
                return Err(ChartError::InvalidIdentifier(name.to_string()));
            }
            if RESERVED.contains(&name) {
                return Err(ChartError::ReservedName(name.to_string()));
            }
            if names.iter().any(|n: &String| n == name) {
                return Err(ChartError::DuplicateName(name.to_string()));
            }
            names.push(name.to_string());
        }
        let dim = names.len();
        Ok(ChartSignature {
            coords: names,
            conj: (0..dim).collect(),
            symbols: Vec::new(),
        })
    }

    /// Declares `a` and `b` as complex conjugates of each other.
    pub fn conjugate_pair(mut self, a: &str, b: &str) -> Result<Self, ChartError> {
        let ia = self.coord_index(a)?;
        let ib = self.coord_index(b)?;
        if self.conj[ia] != ia {
            return Err(ChartError::ConjugationClash(a.to_string()));
        }
        if self.conj[ib] != ib {
            return Err(ChartError::ConjugationClash(b.to_string()));
        }
        self.conj[ia] = ib;
        self.conj[ib] = ia;
        Ok(self)
    }

    /// Declares an opaque smooth function with the given coordinate
    /// dependencies.
    pub fn opaque<S: AsRef<str>>(
        mut self,
        name: &str,
        deps: &[S],
        real: bool,
    ) -> Result<Self, ChartError> {
        if !valid_ident(name) {
            return Err(ChartError::InvalidIdentifier(name.to_string()));
        }
        if RESERVED.contains(&name) {
            return Err(ChartError::ReservedName(name.to_string()));
        }
        if self.coords.iter().any(|c| c == name) || self.symbols.iter().any(|s| s.name == name) {
            return Err(ChartError::DuplicateName(name.to_string()));
        }
        let mut dep_set = BTreeSet::new();
        for d in deps {
            dep_set.insert(self.coord_index(d.as_ref())?);
        }
        self.symbols.push(OpaqueSymbol {
            name: name.to_string(),
            deps: dep_set,
            real,
        });
        Ok(self)
    }

    pub fn shared(self) -> Arc<Self> {
        Arc::new(self)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coord_name(&self, i: usize) -> &str {
        &self.coords[i]
    }

    pub fn coord_names(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_index(&self, name: &str) -> Result<usize, ChartError> {
        self.coords
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| ChartError::UnknownCoordinate(name.to_string()))
    }

    pub fn conjugate_coord(&self, i: usize) -> usize {
        self.conj[i]
    }

    pub fn symbols(&self) -> &[OpaqueSymbol] {
        &self.symbols
    }

    pub fn symbol(&self, id: usize) -> &OpaqueSymbol {
        &self.symbols[id]
    }

    pub fn symbol_index(&self, name: &str) -> Result<usize, ChartError> {
        self.symbols
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| ChartError::UnknownSymbol(name.to_string()))
    }

    pub fn symbol_depends_on(&self, sym: usize, coord: usize) -> bool {
        self.symbols[sym].deps.contains(&coord)
    }
}

impl fmt::Display for ChartSignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart({})", self.coords.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn involution_is_symmetric() {
        let sig = ChartSignature::new(&["z1", "zb1", "t"])
            .unwrap()
            .conjugate_pair("z1", "zb1")
            .unwrap();
        assert_eq!(sig.conjugate_coord(0), 1);
        assert_eq!(sig.conjugate_coord(1), 0);
        assert_eq!(sig.conjugate_coord(2), 2);
    }

    #[test]
    fn reserved_names_rejected() {
        assert!(matches!(
            ChartSignature::new(&["pi"]),
            Err(ChartError::ReservedName(_))
        ));
        let sig = ChartSignature::new(&["x"]).unwrap();
        assert!(matches!(
            sig.opaque("exp", &["x"], true),
            Err(ChartError::ReservedName(_))
        ));
    }

    #[test]
    fn dimension_cap() {
        let names: Vec<String> = (0..9).map(|k| format!("x{k}")).collect();
        assert!(matches!(
            ChartSignature::new(&names),
            Err(ChartError::DimensionTooLarge(9, 8))
        ));
        assert!(ChartSignature::with_max_dim(&names, 9).is_ok());
    }

    #[test]
    fn opaque_deps_must_exist() {
        let sig = ChartSignature::new(&["x", "y"]).unwrap();
        assert!(sig.opaque("f", &["z"], true).is_err());
    }
}
