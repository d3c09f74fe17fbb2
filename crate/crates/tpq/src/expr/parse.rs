//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := ('+'|'-')? term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := natural | 'i' | 'pi' | ident | ident '(' args ')'
//!         | 'exp' '(' expr ')' | 'D' '[' ident (',' ident)+ ']' | '(' expr ')'
//! ```
//!
//! `D[f,x1,x2]` denotes the jet f_{,x1 x2}. Rationals are written with the
//! division operator (`1/2`), exponents as `^-2` or `^(-2)`.

use super::{Expr, ExprError};
use crate::chart::ChartSignature;
use num_bigint::BigInt;
use std::str::FromStr;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared identifier `{name}` at byte {pos}")]
    Undeclared { pos: usize, name: String },
    #[error("at byte {pos}: {source}")]
    Eval { pos: usize, source: ExprError },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                toks.push((i, Tok::Plus));
                i += 1;
            }
            b'-' => {
                toks.push((i, Tok::Minus));
                i += 1;
            }
            b'*' => {
                toks.push((i, Tok::Star));
                i += 1;
            }
            b'/' => {
                toks.push((i, Tok::Slash));
                i += 1;
            }
            b'^' => {
                toks.push((i, Tok::Caret));
                i += 1;
            }
            b'(' => {
                toks.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                toks.push((i, Tok::RParen));
                i += 1;
            }
            b'[' => {
                toks.push((i, Tok::LBracket));
                i += 1;
            }
            b']' => {
                toks.push((i, Tok::RBracket));
                i += 1;
            }
            b',' => {
                toks.push((i, Tok::Comma));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let n = BigInt::from_str(&src[start..i]).expect("digits");
                toks.push((start, Tok::Int(n)));
            }
            _ if (b as char).is_ascii_alphabetic() || b == b'_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                toks.push((start, Tok::Ident(src[start..i].to_string())));
            }
            _ => {
                return Err(ParseError::Syntax {
                    pos: i,
                    msg: format!("unexpected character `{}`", &src[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    sig: &'a Arc<ChartSignature>,
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(t) if t == tok => Ok(()),
            _ => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn err_eval(&self, pos: usize, e: ExprError) -> ParseError {
        ParseError::Eval { pos, source: e }
    }

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        let mut negate = false;
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                negate = true;
            }
            Some(Tok::Plus) => {
                self.bump();
            }
            _ => {}
        }
        let mut acc = self.parse_term()?;
        if negate {
            acc = -acc;
        }
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = &acc + &t;
                }
                Some(Tok::Minus) => {
                    self.bump();
                    let t = self.parse_term()?;
                    acc = &acc - &t;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.parse_factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let t = self.parse_factor()?;
                    acc = &acc * &t;
                }
                Some(Tok::Slash) => {
                    let pos = self.here();
                    self.bump();
                    let t = self.parse_factor()?;
                    acc = acc.checked_div(&t).map_err(|e| self.err_eval(pos, e))?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.parse_base()?;
        if let Some(Tok::Caret) = self.peek() {
            let pos = self.here();
            self.bump();
            let k = self.parse_integer()?;
            return base.pow(k).map_err(|e| self.err_eval(pos, e));
        }
        Ok(base)
    }

    fn parse_integer(&mut self) -> Result<i64, ParseError> {
        let pos = self.here();
        let parenthesized = matches!(self.peek(), Some(Tok::LParen));
        if parenthesized {
            self.bump();
        }
        let neg = matches!(self.peek(), Some(Tok::Minus));
        if neg {
            self.bump();
        }
        let n = match self.bump() {
            Some(Tok::Int(n)) => n,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "expected integer exponent".into(),
                })
            }
        };
        if parenthesized {
            self.expect(Tok::RParen, "`)`")?;
        }
        let v: i64 = n.try_into().map_err(|_| ParseError::Syntax {
            pos,
            msg: "exponent out of range".into(),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn parse_base(&mut self) -> Result<Expr, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Int(n)) => Ok(Expr::constant(
                self.sig,
                crate::gauss::GaussRat::from_rational(num_rational::BigRational::from_integer(n)),
            )),
            Some(Tok::LParen) => {
                let e = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.parse_named(pos, name),
            Some(_) => Err(ParseError::Syntax {
                pos,
                msg: "expected a number, identifier or `(`".into(),
            }),
            None => Err(ParseError::Syntax {
                pos,
                msg: "unexpected end of input".into(),
            }),
        }
    }

    fn parse_named(&mut self, pos: usize, name: String) -> Result<Expr, ParseError> {
        match name.as_str() {
            "i" => return Ok(Expr::imaginary_unit(self.sig)),
            "pi" => return Ok(Expr::pi(self.sig)),
            "exp" => {
                self.expect(Tok::LParen, "`(` after exp")?;
                let arg = self.parse_expr()?;
                self.expect(Tok::RParen, "`)`")?;
                return Expr::exp(&arg).map_err(|e| self.err_eval(pos, e));
            }
            "D" => {
                self.expect(Tok::LBracket, "`[` after D")?;
                let sym_pos = self.here();
                let sym = match self.bump() {
                    Some(Tok::Ident(s)) => s,
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: sym_pos,
                            msg: "expected symbol name in D[...]".into(),
                        })
                    }
                };
                if self.sig.symbol_index(&sym).is_err() {
                    return Err(ParseError::Undeclared {
                        pos: sym_pos,
                        name: sym,
                    });
                }
                let mut coords: Vec<String> = Vec::new();
                loop {
                    match self.bump() {
                        Some(Tok::Comma) => {
                            let cpos = self.here();
                            match self.bump() {
                                Some(Tok::Ident(c)) => {
                                    if self.sig.coord_index(&c).is_err() {
                                        return Err(ParseError::Undeclared { pos: cpos, name: c });
                                    }
                                    coords.push(c);
                                }
                                _ => {
                                    return Err(ParseError::Syntax {
                                        pos: cpos,
                                        msg: "expected coordinate name".into(),
                                    })
                                }
                            }
                        }
                        Some(Tok::RBracket) => break,
                        _ => {
                            return Err(ParseError::Syntax {
                                pos: self.here(),
                                msg: "expected `,` or `]` in D[...]".into(),
                            })
                        }
                    }
                }
                if coords.is_empty() {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: "D[...] needs at least one derivative coordinate".into(),
                    });
                }
                return Expr::jet(self.sig, &sym, &coords).map_err(|e| self.err_eval(pos, e));
            }
            _ => {}
        }
        // Plain identifier: coordinate or opaque symbol, optionally followed
        // by an explicit argument list naming dependencies, e.g. f(x1,x2).
        if let Some(Tok::LParen) = self.peek() {
            let sym_id = self.sig.symbol_index(&name).map_err(|_| ParseError::Undeclared {
                pos,
                name: name.clone(),
            })?;
            self.bump();
            let mut deps = Vec::new();
            loop {
                let cpos = self.here();
                match self.bump() {
                    Some(Tok::Ident(c)) => {
                        let ci = self.sig.coord_index(&c).map_err(|_| ParseError::Undeclared {
                            pos: cpos,
                            name: c.clone(),
                        })?;
                        deps.push(ci);
                    }
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: cpos,
                            msg: "expected coordinate name in argument list".into(),
                        })
                    }
                }
                match self.bump() {
                    Some(Tok::Comma) => {}
                    Some(Tok::RParen) => break,
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: self.here(),
                            msg: "expected `,` or `)`".into(),
                        })
                    }
                }
            }
            let declared = &self.sig.symbol(sym_id).deps;
            let listed: std::collections::BTreeSet<usize> = deps.into_iter().collect();
            if &listed != declared {
                return Err(ParseError::Syntax {
                    pos,
                    msg: format!("argument list of `{name}` does not match its declaration"),
                });
            }
            return Expr::symbol(self.sig, &name).map_err(|e| self.err_eval(pos, e));
        }
        if self.sig.coord_index(&name).is_ok() {
            return Expr::coord(self.sig, &name).map_err(|e| self.err_eval(pos, e));
        }
        if self.sig.symbol_index(&name).is_ok() {
            return Expr::symbol(self.sig, &name).map_err(|e| self.err_eval(pos, e));
        }
        Err(ParseError::Undeclared { pos, name })
    }
}

/// Parses a text expression over the chart into canonical form.
pub fn parse_expr(text: &str, sig: &Arc<ChartSignature>) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        sig,
        toks,
        pos: 0,
        end: text.len(),
    };
    let e = p.parse_expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError::Syntax {
            pos: p.here(),
            msg: "trailing input".into(),
        });
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::GaussRat;

    fn chart() -> Arc<ChartSignature> {
        ChartSignature::new(&["x1", "x2", "t"])
            .unwrap()
            .opaque("f", &["x1", "x2"], true)
            .unwrap()
            .shared()
    }

    #[test]
    fn single_atom_normalization() {
        let sig = chart();
        let e = parse_expr("-exp(-t)", &sig).unwrap();
        let t = Expr::coord(&sig, "t").unwrap();
        assert_eq!(e, -Expr::exp(&-&t).unwrap());
    }

    #[test]
    fn i_times_i_plus_one_is_zero() {
        let sig = chart();
        assert!(parse_expr("i*i + 1", &sig).unwrap().is_zero());
    }

    #[test]
    fn exponential_merging() {
        let sig = chart();
        let e = parse_expr("exp(t)*exp(t)", &sig).unwrap();
        let t = Expr::coord(&sig, "t").unwrap();
        assert_eq!(e, Expr::exp(&(&t + &t)).unwrap());
    }

    #[test]
    fn rationals_and_powers() {
        let sig = chart();
        let e = parse_expr("3/2*x1^2 - x1*x1/2", &sig).unwrap();
        let x = Expr::coord(&sig, "x1").unwrap();
        assert_eq!(e, &x * &x);
        let e = parse_expr("f^-2", &sig).unwrap();
        assert_eq!(e, Expr::symbol(&sig, "f").unwrap().pow(-2).unwrap());
        let e2 = parse_expr("f^(-2)", &sig).unwrap();
        assert_eq!(e, e2);
    }

    #[test]
    fn jets_and_symbol_args() {
        let sig = chart();
        let e = parse_expr("D[f,x2,x1]", &sig).unwrap();
        assert_eq!(e, Expr::jet(&sig, "f", &["x1", "x2"]).unwrap());
        let e = parse_expr("f(x1,x2)", &sig).unwrap();
        assert_eq!(e, Expr::symbol(&sig, "f").unwrap());
        assert!(parse_expr("f(x1)", &sig).is_err());
    }

    #[test]
    fn undeclared_identifier_with_position() {
        let sig = chart();
        match parse_expr("x1 + y", &sig) {
            Err(ParseError::Undeclared { pos, name }) => {
                assert_eq!(pos, 5);
                assert_eq!(name, "y");
            }
            other => panic!("expected undeclared error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_with_position() {
        let sig = chart();
        assert!(matches!(
            parse_expr("x1 + ", &sig),
            Err(ParseError::Syntax { .. })
        ));
        assert!(matches!(
            parse_expr("(x1", &sig),
            Err(ParseError::Syntax { .. })
        ));
    }

    #[test]
    fn division_by_sum_rejected() {
        let sig = chart();
        assert!(matches!(
            parse_expr("1/(x1+x2)", &sig),
            Err(ParseError::Eval { .. })
        ));
    }

    #[test]
    fn display_round_trips() {
        let sig = chart();
        for src in [
            "1/2*x1^2*D[f,x1,x2] - 3*exp(2*t) + i*pi",
            "f^-2*exp(-t) + (1+2*i)*x2",
            "exp(1/2*f)",
            "0",
        ] {
            let e = parse_expr(src, &sig).unwrap();
            let printed = e.to_string();
            let back = parse_expr(&printed, &sig).unwrap();
            assert_eq!(e, back, "round trip failed for `{src}` -> `{printed}`");
        }
    }

    #[test]
    fn scale_constant_display() {
        let sig = chart();
        let e = parse_expr("-x1 - x2", &sig).unwrap();
        assert_eq!(e.to_string(), "-x1 - x2");
        let c = Expr::constant(&sig, GaussRat::from_int(2));
        assert_eq!(c.to_string(), "2");
    }
}
