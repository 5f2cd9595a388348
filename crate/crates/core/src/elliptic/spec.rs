use serde::{Deserialize, Serialize};

use super::expr::{Expr, ExprError, Var, Vars};
use super::EllipticError;

/// A scalar coefficient field as written in a configuration file.
///
/// Accepted JSON forms: a number (`1.5`), an expression string (`"1 + x^2"`),
/// or one of the named built-ins `{"constant": 1.5}`, `{"radial": "exp(-r)"}`,
/// `{"expression": "x * y"}`. Radial expressions may only reference `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coefficient {
    Constant(f64),
    Expression(String),
    Named(NamedCoefficient),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum NamedCoefficient {
    Constant(f64),
    Radial(String),
    Expression(String),
}

impl From<f64> for Coefficient {
    fn from(v: f64) -> Self {
        Coefficient::Constant(v)
    }
}

impl From<&str> for Coefficient {
    fn from(s: &str) -> Self {
        Coefficient::Expression(s.to_string())
    }
}

/// Coefficient ready for evaluation.
#[derive(Debug, Clone)]
pub enum CompiledCoefficient {
    Constant(f64),
    Expr(Expr),
}

impl CompiledCoefficient {
    pub fn eval(&self, v: &Vars) -> f64 {
        match self {
            CompiledCoefficient::Constant(c) => *c,
            CompiledCoefficient::Expr(e) => e.eval(v),
        }
    }

    pub fn uses_distance(&self) -> bool {
        matches!(self, CompiledCoefficient::Expr(e) if e.uses(Var::D))
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            CompiledCoefficient::Constant(c) => Some(*c),
            CompiledCoefficient::Expr(e) => e.constant_value(),
        }
    }
}

impl Coefficient {
    pub fn compile(&self, name: &'static str) -> Result<CompiledCoefficient, EllipticError> {
        let wrap = |source: ExprError| EllipticError::Expression { name, source };
        Ok(match self {
            Coefficient::Constant(c) | Coefficient::Named(NamedCoefficient::Constant(c)) => {
                CompiledCoefficient::Constant(*c)
            }
            Coefficient::Expression(s) | Coefficient::Named(NamedCoefficient::Expression(s)) => {
                CompiledCoefficient::Expr(Expr::parse(s).map_err(wrap)?)
            }
            Coefficient::Named(NamedCoefficient::Radial(s)) => {
                let e = Expr::parse(s).map_err(wrap)?;
                if e.uses(Var::X) || e.uses(Var::Y) || e.uses(Var::D) {
                    return Err(EllipticError::NotRadial { name });
                }
                CompiledCoefficient::Expr(e)
            }
        })
    }
}

/// How the zeroth-order coefficient is bounded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialMode {
    /// `|c| ≤ k` everywhere.
    #[default]
    Strict,
    /// `-k ≤ c ≤ a_bound · đ⁻²`, for Schrödinger-type potentials that blow up
    /// at the boundary.
    Singular { a_bound: f64 },
}

fn one() -> Coefficient {
    Coefficient::Constant(1.0)
}

fn zero() -> Coefficient {
    Coefficient::Constant(0.0)
}

fn default_k() -> f64 {
    1.0
}

/// `L u = -Σ a_ij ∂_ij u + Σ b_i ∂_i u + c u` with symmetric `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default = "one")]
    pub a11: Coefficient,
    #[serde(default = "zero")]
    pub a12: Coefficient,
    #[serde(default = "one")]
    pub a22: Coefficient,
    #[serde(default = "zero")]
    pub b1: Coefficient,
    #[serde(default = "zero")]
    pub b2: Coefficient,
    #[serde(default = "zero")]
    pub c: Coefficient,
    #[serde(default = "default_k")]
    pub adaptedness_k: f64,
    #[serde(default)]
    pub mode: PotentialMode,
}

impl Default for OperatorSpec {
    fn default() -> Self {
        Self::laplacian()
    }
}

impl OperatorSpec {
    /// `-Δ`.
    pub fn laplacian() -> Self {
        OperatorSpec {
            a11: one(),
            a12: zero(),
            a22: one(),
            b1: zero(),
            b2: zero(),
            c: zero(),
            adaptedness_k: 1.0,
            mode: PotentialMode::Strict,
        }
    }

    /// `-Δ + c` with constant `c`; `k` is raised to cover `|c|`.
    pub fn laplacian_plus(c: f64) -> Self {
        OperatorSpec {
            c: Coefficient::Constant(c),
            adaptedness_k: c.abs().max(1.0),
            ..Self::laplacian()
        }
    }

    pub fn with_drift(mut self, b1: impl Into<Coefficient>, b2: impl Into<Coefficient>) -> Self {
        self.b1 = b1.into();
        self.b2 = b2.into();
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.adaptedness_k = k;
        self
    }

    pub fn compile(&self) -> Result<CompiledOperator, EllipticError> {
        if !(self.adaptedness_k.is_finite() && self.adaptedness_k >= 1.0) {
            return Err(EllipticError::InvalidAdaptedness(self.adaptedness_k));
        }
        if let PotentialMode::Singular { a_bound } = self.mode {
            if !(a_bound.is_finite() && a_bound > 0.0) {
                return Err(EllipticError::InvalidSingularBound(a_bound));
            }
        }
        Ok(CompiledOperator {
            a11: self.a11.compile("a11")?,
            a12: self.a12.compile("a12")?,
            a22: self.a22.compile("a22")?,
            b1: self.b1.compile("b1")?,
            b2: self.b2.compile("b2")?,
            c: self.c.compile("c")?,
            k: self.adaptedness_k,
            mode: self.mode,
        })
    }
}

#[derive(Debug, Clone)]
pub struct CompiledOperator {
    pub a11: CompiledCoefficient,
    pub a12: CompiledCoefficient,
    pub a22: CompiledCoefficient,
    pub b1: CompiledCoefficient,
    pub b2: CompiledCoefficient,
    pub c: CompiledCoefficient,
    pub k: f64,
    pub mode: PotentialMode,
}

impl CompiledOperator {
    pub fn needs_distance(&self) -> bool {
        matches!(self.mode, PotentialMode::Singular { .. })
            || [&self.a11, &self.a12, &self.a22, &self.b1, &self.b2, &self.c]
                .iter()
                .any(|c| c.uses_distance())
    }

    pub fn named(&self) -> [(&'static str, &CompiledCoefficient); 6] {
        [
            ("a11", &self.a11),
            ("a12", &self.a12),
            ("a22", &self.a22),
            ("b1", &self.b1),
            ("b2", &self.b2),
            ("c", &self.c),
        ]
    }
}
