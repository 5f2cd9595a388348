//! A tiny arithmetic language for coefficient fields.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | variable | constant | call | '(' expr ')'
//! call   := ('exp' | 'log' | 'sqrt' | 'abs') '(' expr ')'
//!         | ('min' | 'max') '(' expr ',' expr ')'
//! ```
//!
//! Variables are `x`, `y`, `r = sqrt(x² + y²)` and `d`, the exact distance
//! to the boundary. `pi` is the only named constant. `^` is right
//! associative and binds tighter than unary minus, so `-x^2 = -(x^2)`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExprError {
    #[error("unexpected character `{ch}` at offset {pos}")]
    UnexpectedChar { ch: char, pos: usize },
    #[error("unexpected {found} at offset {pos}, expected {expected}")]
    UnexpectedToken {
        found: String,
        expected: &'static str,
        pos: usize,
    },
    #[error("unknown identifier `{name}` at offset {pos}")]
    UnknownIdentifier { name: String, pos: usize },
    #[error("function `{name}` takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    R,
    D,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Min,
    Max,
}

impl Func {
    fn lookup(name: &str) -> Option<(Func, usize)> {
        Some(match name {
            "exp" => (Func::Exp, 1),
            "log" => (Func::Log, 1),
            "sqrt" => (Func::Sqrt, 1),
            "abs" => (Func::Abs, 1),
            "min" => (Func::Min, 2),
            "max" => (Func::Max, 2),
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Min => "min",
            Func::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(Var),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Vec<Node>),
}

/// A parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
}

/// Evaluation point.
#[derive(Debug, Clone, Copy, Default)]
pub struct Vars {
    pub x: f64,
    pub y: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num(v) => write!(f, "number {v}"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Op(c) => write!(f, "`{c}`"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError::UnexpectedChar { ch: c, pos: start })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else if "+-*/^(),".contains(c) {
            out.push((Tok::Op(c), i));
            i += 1;
        } else {
            return Err(ExprError::UnexpectedChar { ch: c, pos: i });
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, op: char, expected: &'static str) -> Result<(), ExprError> {
        if *self.peek() == Tok::Op(op) {
            self.bump();
            Ok(())
        } else {
            Err(ExprError::UnexpectedToken {
                found: self.peek().to_string(),
                expected,
                pos: self.offset(),
            })
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Tok::Op(op @ ('+' | '-')) = *self.peek() {
            self.bump();
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(op @ ('*' | '/')) = *self.peek() {
            self.bump();
            lhs = Node::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let pos = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Node::Num(v)),
            Tok::Op('(') => {
                let inner = self.expr()?;
                self.expect(')', "`)`")?;
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Node::Var(Var::X)),
                "y" => Ok(Node::Var(Var::Y)),
                "r" => Ok(Node::Var(Var::R)),
                "d" => Ok(Node::Var(Var::D)),
                "pi" => Ok(Node::Num(std::f64::consts::PI)),
                _ => {
                    let Some((func, arity)) = Func::lookup(&name) else {
                        return Err(ExprError::UnknownIdentifier { name, pos });
                    };
                    self.expect('(', "`(` after function name")?;
                    let mut args = vec![self.expr()?];
                    while *self.peek() == Tok::Op(',') {
                        self.bump();
                        args.push(self.expr()?);
                    }
                    self.expect(')', "`)` or `,`")?;
                    if args.len() != arity {
                        return Err(ExprError::Arity {
                            name,
                            expected: arity,
                            got: args.len(),
                        });
                    }
                    Ok(Node::Call(func, args))
                }
            },
            other => Err(ExprError::UnexpectedToken {
                found: other.to_string(),
                expected: "a number, variable, function call or `(`",
                pos,
            }),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ExprError> {
        let mut p = Parser {
            toks: tokenize(src)?,
            pos: 0,
        };
        let root = p.expr()?;
        if *p.peek() != Tok::End {
            return Err(ExprError::UnexpectedToken {
                found: p.peek().to_string(),
                expected: "an operator or end of input",
                pos: p.offset(),
            });
        }
        Ok(Expr { root })
    }

    pub fn eval(&self, v: &Vars) -> f64 {
        eval(&self.root, v)
    }

    pub fn uses(&self, var: Var) -> bool {
        fn walk(n: &Node, var: Var) -> bool {
            match n {
                Node::Num(_) => false,
                Node::Var(v) => *v == var,
                Node::Neg(a) => walk(a, var),
                Node::Bin(_, a, b) => walk(a, var) || walk(b, var),
                Node::Call(_, args) => args.iter().any(|a| walk(a, var)),
            }
        }
        walk(&self.root, var)
    }

    /// Constant value when the expression references no variable.
    pub fn constant_value(&self) -> Option<f64> {
        let free = [Var::X, Var::Y, Var::R, Var::D].iter().all(|&v| !self.uses(v));
        free.then(|| self.eval(&Vars::default()))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn show(n: &Node, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match n {
                Node::Num(v) => write!(f, "{v}"),
                Node::Var(v) => write!(
                    f,
                    "{}",
                    match v {
                        Var::X => "x",
                        Var::Y => "y",
                        Var::R => "r",
                        Var::D => "d",
                    }
                ),
                Node::Neg(a) => {
                    write!(f, "-(")?;
                    show(a, f)?;
                    write!(f, ")")
                }
                Node::Bin(op, a, b) => {
                    write!(f, "(")?;
                    show(a, f)?;
                    write!(f, " {op} ")?;
                    show(b, f)?;
                    write!(f, ")")
                }
                Node::Call(func, args) => {
                    write!(f, "{}(", func.name())?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        show(a, f)?;
                    }
                    write!(f, ")")
                }
            }
        }
        show(&self.root, f)
    }
}

fn eval(n: &Node, v: &Vars) -> f64 {
    match n {
        Node::Num(c) => *c,
        Node::Var(Var::X) => v.x,
        Node::Var(Var::Y) => v.y,
        Node::Var(Var::R) => v.x.hypot(v.y),
        Node::Var(Var::D) => v.d,
        Node::Neg(a) => -eval(a, v),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, v), eval(b, v));
            match op {
                '+' => a + b,
                '-' => a - b,
                '*' => a * b,
                '/' => a / b,
                _ => a.powf(b),
            }
        }
        Node::Call(func, args) => {
            let a = eval(&args[0], v);
            match func {
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
                Func::Min => a.min(eval(&args[1], v)),
                Func::Max => a.max(eval(&args[1], v)),
            }
        }
    }
}
