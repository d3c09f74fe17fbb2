//! Machine-readable check reports.
//!
//! Schema: `{check, status, residuals: [{where, expr}], assumptions: [..],
//! millis}`. A report passes exactly when every residual expression is the
//! zero expression; passing reports therefore carry no residual entries.
//! Reports are byte-deterministic for identical input and seed, up to the
//! `millis` timing field.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Pass => 0,
            Status::Fail => 1,
            Status::Error => 2,
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Status::Pass => write!(f, "pass"),
            Status::Fail => write!(f, "fail"),
            Status::Error => write!(f, "error"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Residual {
    #[serde(rename = "where")]
    pub location: String,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub check: String,
    pub status: Status,
    pub residuals: Vec<Residual>,
    pub assumptions: Vec<String>,
    pub millis: u64,
}

impl Report {
    pub fn new(check: &str) -> Self {
        Report {
            check: check.to_string(),
            status: Status::Pass,
            residuals: Vec::new(),
            assumptions: Vec::new(),
            millis: 0,
        }
    }

    /// Records a residual; nonzero expressions flip the status to fail.
    /// Zero residuals are dropped (pass is "all residuals are zero").
    pub fn push_residual(&mut self, location: impl Into<String>, expr: &crate::expr::Expr) {
        if expr.is_zero() {
            return;
        }
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.residuals.push(Residual {
            location: location.into(),
            expr: expr.to_string(),
        });
    }

    /// Records a raw nonzero entry (rational certificates, etc.).
    pub fn push_entry(&mut self, location: impl Into<String>, expr: impl Into<String>) {
        if self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.residuals.push(Residual {
            location: location.into(),
            expr: expr.into(),
        });
    }

    pub fn push_assumption(&mut self, a: impl Into<String>) {
        self.assumptions.push(a.into());
    }

    pub fn error(check: &str, message: impl Into<String>) -> Self {
        Report {
            check: check.to_string(),
            status: Status::Error,
            residuals: vec![Residual {
                location: "error".to_string(),
                expr: message.into(),
            }],
            assumptions: Vec::new(),
            millis: 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    /// Merges a sub-report under a prefixed location, in call order.
    pub fn merge(&mut self, prefix: &str, sub: Report) {
        match sub.status {
            Status::Error => {
                self.status = Status::Error;
            }
            Status::Fail => {
                if self.status == Status::Pass {
                    self.status = Status::Fail;
                }
            }
            Status::Pass => {}
        }
        for r in sub.residuals {
            self.residuals.push(Residual {
                location: format!("{prefix}: {}", r.location),
                expr: r.expr,
            });
        }
        for a in sub.assumptions {
            self.assumptions.push(format!("{prefix}: {a}"));
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "check: {}", self.check)?;
        writeln!(f, "status: {}", self.status)?;
        for r in &self.residuals {
            writeln!(f, "  {} = {}", r.location, r.expr)?;
        }
        for a in &self.assumptions {
            writeln!(f, "  note: {a}")?;
        }
        write!(f, "  ({} ms)", self.millis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ChartSignature;
    use crate::expr::Expr;

    #[test]
    fn pass_iff_no_nonzero_residuals() {
        let sig = ChartSignature::new(&["x"]).unwrap().shared();
        let mut r = Report::new("demo");
        r.push_residual("a", &Expr::zero(&sig));
        assert_eq!(r.status, Status::Pass);
        assert!(r.residuals.is_empty());
        r.push_residual("b", &Expr::one(&sig));
        assert_eq!(r.status, Status::Fail);
        assert_eq!(r.residuals.len(), 1);
    }

    #[test]
    fn json_schema_fields() {
        let r = Report::new("demo");
        let j = r.to_json();
        let v: serde_json::Value = serde_json::from_str(&j).unwrap();
        for key in ["check", "status", "residuals", "assumptions", "millis"] {
            assert!(v.get(key).is_some(), "missing key {key}");
        }
        assert_eq!(v["status"], "pass");
    }
}
