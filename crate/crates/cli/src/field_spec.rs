//! Boundary-field expressions: `const:v`, `cos:k`, `sin:k` and `file:path`,
//! summed with `+`. Trigonometric terms use the sample angle
//! `θ_i = 2πi/N`, which is the polar angle for contours generated by
//! `shapeflow generate`.

use std::f64::consts::TAU;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use shapeflow::{BoundaryScalarField, Contour};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Const(f64),
    Cos(u32),
    Sin(u32),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldSpec {
    terms: Vec<Term>,
}

impl FieldSpec {
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Values at the samples of `c`.
    pub fn evaluate(&self, c: &Contour) -> CliResult<BoundaryScalarField> {
        let n = c.len();
        let mut values = vec![0.0; n];
        for term in &self.terms {
            let add: Vec<f64> = match term {
                Term::Const(v) => vec![*v; n],
                Term::Cos(k) => (0..n)
                    .map(|i| (*k as f64 * TAU * i as f64 / n as f64).cos())
                    .collect(),
                Term::Sin(k) => (0..n)
                    .map(|i| (*k as f64 * TAU * i as f64 / n as f64).sin())
                    .collect(),
                Term::File(path) => {
                    let text = std::fs::read_to_string(path).map_err(|e| {
                        CliError::usage(format!("cannot read {}: {e}", path.display()))
                    })?;
                    let field = BoundaryScalarField::from_json(&text).map_err(CliError::input)?;
                    if field.len() != n {
                        return Err(CliError::usage(format!(
                            "{} holds {} values for a contour of {n} samples",
                            path.display(),
                            field.len()
                        )));
                    }
                    field.values
                }
            };
            values.iter_mut().zip(add).for_each(|(v, a)| *v += a);
        }
        Ok(BoundaryScalarField::new(values))
    }
}

impl FromStr for FieldSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let terms = s
            .split('+')
            .map(parse_term)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(FieldSpec { terms })
    }
}

fn parse_term(raw: &str) -> Result<Term, String> {
    let t = raw.trim();
    let (kind, arg) = t
        .split_once(':')
        .ok_or_else(|| format!("term `{t}` lacks a `kind:` prefix"))?;
    let frequency = || {
        arg.parse::<u32>()
            .map_err(|_| format!("`{t}`: frequency must be a non-negative integer"))
    };
    match kind {
        "const" => match arg.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Term::Const(v)),
            _ => Err(format!("`{t}`: constant must be a finite number")),
        },
        "cos" => Ok(Term::Cos(frequency()?)),
        "sin" => Ok(Term::Sin(frequency()?)),
        "file" if !arg.is_empty() => Ok(Term::File(PathBuf::from(arg))),
        "file" => Err("`file:` needs a path".into()),
        _ => Err(format!(
            "unknown term kind `{kind}` (expected const, cos, sin or file)"
        )),
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|t| match t {
                Term::Const(v) => format!("const:{v}"),
                Term::Cos(k) => format!("cos:{k}"),
                Term::Sin(k) => format!("sin:{k}"),
                Term::File(p) => format!("file:{}", p.display()),
            })
            .collect();
        f.write_str(&parts.join("+"))
    }
}
