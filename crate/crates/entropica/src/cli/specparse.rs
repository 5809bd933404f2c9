//! Density spec grammar: `name(arg,...)`, `mix(w:gaussian(m,v),...)`, or
//! `file:<path>`. Errors carry the byte position of the failure.

use std::path::PathBuf;

use crate::density::{FamilySpec, MixtureComponent};
use crate::{Error, Result};

/// Parses a density spec string into a family.
pub fn parse_density_spec(text: &str) -> Result<FamilySpec> {
    if let Some(path) = text.strip_prefix("file:") {
        if path.is_empty() {
            return Err(syntax(5, "expected a path after `file:`"));
        }
        return Ok(FamilySpec::Tabulated {
            path: PathBuf::from(path),
        });
    }
    let mut parser = Parser { text, pos: 0 };
    let spec = parser.family()?;
    parser.skip_ws();
    if parser.pos != text.len() {
        return Err(syntax(parser.pos, "trailing input after density spec"));
    }
    spec.validate()?;
    Ok(spec)
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::SpecSyntax {
        position,
        message: message.into(),
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        while self.rest().starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<()> {
        self.skip_ws();
        if self.rest().starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err(syntax(self.pos, format!("expected `{c}`")))
        }
    }

    fn identifier(&mut self) -> Result<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len()
            && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(syntax(start, "expected a family name"));
        }
        Ok(&self.text[start..self.pos])
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let start = self.pos;
        let bytes = self.text.as_bytes();
        while self.pos < bytes.len()
            && matches!(bytes[self.pos], b'0'..=b'9' | b'.' | b'-' | b'+' | b'e' | b'E')
        {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(syntax(start, "expected a number"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| syntax(start, format!("invalid number `{}`", &self.text[start..self.pos])))
    }

    fn numbers(&mut self) -> Result<Vec<f64>> {
        self.eat('(')?;
        let mut out = vec![self.number()?];
        loop {
            self.skip_ws();
            if self.rest().starts_with(',') {
                self.pos += 1;
                out.push(self.number()?);
            } else {
                break;
            }
        }
        self.eat(')')?;
        Ok(out)
    }

    fn family(&mut self) -> Result<FamilySpec> {
        let name_pos = {
            self.skip_ws();
            self.pos
        };
        let name = self.identifier()?;
        match name {
            "gaussian" => {
                let args = self.numbers()?;
                self.arity(name, &args, 2, name_pos)?;
                Ok(FamilySpec::Gaussian {
                    mean: args[0],
                    variance: args[1],
                })
            }
            "uniform" => {
                let args = self.numbers()?;
                self.arity(name, &args, 2, name_pos)?;
                Ok(FamilySpec::Uniform {
                    lower: args[0],
                    upper: args[1],
                })
            }
            "laplace" => {
                let args = self.numbers()?;
                self.arity(name, &args, 2, name_pos)?;
                Ok(FamilySpec::Laplace {
                    location: args[0],
                    scale: args[1],
                })
            }
            "mix" | "gauss_mixture" => self.mixture(),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }

    fn mixture(&mut self) -> Result<FamilySpec> {
        self.eat('(')?;
        let mut components = Vec::new();
        loop {
            let weight = self.number()?;
            self.eat(':')?;
            let component_pos = self.pos;
            let inner = self.family()?;
            let FamilySpec::Gaussian { mean, variance } = inner else {
                return Err(syntax(component_pos, "mixture components must be gaussian(mean,var)"));
            };
            components.push(MixtureComponent {
                weight,
                mean,
                variance,
            });
            self.skip_ws();
            if self.rest().starts_with(',') {
                self.pos += 1;
            } else {
                break;
            }
        }
        self.eat(')')?;
        Ok(FamilySpec::GaussMixture { components })
    }

    fn arity(&self, name: &str, args: &[f64], expected: usize, pos: usize) -> Result<()> {
        if args.len() == expected {
            Ok(())
        } else {
            Err(syntax(
                pos,
                format!("{name} takes {expected} arguments, got {}", args.len()),
            ))
        }
    }
}
