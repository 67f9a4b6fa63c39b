//! Textual form of [`CopulaSpec`]: a family name, optionally followed by a
//! parenthesized list of `key=value` pairs. The `base` key of `perturbed`
//! takes a nested spec.
//!
//! ```text
//! spec   := name [ "(" [ pair { "," pair } ] ")" ]
//! pair   := key "=" ( number | spec )
//! ```

use std::str::FromStr;

use crate::copula::{CopulaSpec, DependenceParam, PerturbParam};
use crate::error::{Error, Result};

impl FromStr for CopulaSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut p = Parser { src: s, pos: 0 };
        let spec = p.spec()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(spec)
    }
}

enum Value {
    Number(f64),
    Spec(CopulaSpec),
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            pos: self.pos,
            msg: msg.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.src.len() - trimmed.len();
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '-' || c == '_'))
            .unwrap_or(self.rest().len());
        if len == 0 {
            return Err(self.err("expected a name"));
        }
        let name = &self.rest()[..len];
        self.pos += len;
        Ok(name)
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let len = self
            .rest()
            .find(|c: char| !(c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E')))
            .unwrap_or(self.rest().len());
        let text = &self.rest()[..len];
        let value = text
            .parse::<f64>()
            .map_err(|_| self.err(format!("invalid number {text:?}")))?;
        self.pos += len;
        Ok(value)
    }

    fn value(&mut self) -> Result<Value> {
        self.skip_ws();
        match self.rest().chars().next() {
            Some(c) if c.is_ascii_digit() || matches!(c, '.' | '-' | '+') => self.number().map(Value::Number),
            Some(_) => self.spec().map(Value::Spec),
            None => Err(self.err("expected a value")),
        }
    }

    fn spec(&mut self) -> Result<CopulaSpec> {
        let start = self.pos;
        let name = self.ident()?;
        let mut pairs: Vec<(&str, Value)> = Vec::new();
        if self.eat('(') && !self.eat(')') {
            loop {
                let key = self.ident()?;
                if pairs.iter().any(|(k, _)| *k == key) {
                    return Err(self.err(format!("duplicate key {key:?}")));
                }
                if !self.eat('=') {
                    return Err(self.err("expected '='"));
                }
                let value = self.value()?;
                pairs.push((key, value));
                if self.eat(')') {
                    break;
                }
                if !self.eat(',') {
                    return Err(self.err("expected ',' or ')'"));
                }
            }
        }

        let at = |msg: String| Error::Parse { pos: start, msg };
        let mut take = |key: &str| pairs.iter().position(|(k, _)| *k == key).map(|i| pairs.remove(i).1);
        let mut number = |key: &'static str| match take(key) {
            Some(Value::Number(x)) => Ok(x),
            Some(Value::Spec(_)) => Err(at(format!("{name}: {key} must be a number"))),
            None => Err(at(format!("{name}: missing {key}"))),
        };

        let spec = match name {
            "product" => CopulaSpec::Product,
            "frechet-upper" => CopulaSpec::FrechetUpper,
            "frechet-lower" => CopulaSpec::FrechetLower,
            "fgm" => CopulaSpec::Fgm {
                theta: DependenceParam::new(number("theta")?)?,
            },
            "bound" => CopulaSpec::Bound {
                theta: DependenceParam::new(number("theta")?)?,
            },
            "perturbed" => {
                let alpha = PerturbParam::new(number("alpha")?)?;
                let base = match take("base") {
                    Some(Value::Spec(s)) => s,
                    Some(Value::Number(_)) => return Err(at("perturbed: base must be a copula spec".into())),
                    None => return Err(at("perturbed: missing base".into())),
                };
                CopulaSpec::Perturbed {
                    base: Box::new(base),
                    alpha,
                }
            }
            other => return Err(at(format!("unknown family {other:?}"))),
        };
        if let Some((key, _)) = pairs.first() {
            return Err(at(format!("{name}: unexpected key {key:?}")));
        }
        Ok(spec)
    }
}
