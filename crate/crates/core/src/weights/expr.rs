//! A small expression language for user-defined weights.
//!
//! Grammar (whitespace insignificant):
//! ```text
//! expr   := term (("+"|"-") term)*
//! term   := factor (("*"|"/") factor)*
//! factor := base ("^" factor)?          // ^ is right-associative
//! base   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")" | "-" base
//! ```
//! Identifiers are `x<k>`, `y<k>`, `r<k>`, `th<k>`, `absz` and the function
//! names `exp`, `log`, `sqrt`, `sin`, `cos`, `abs`, `pow`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarKind {
    /// Re z_k
    X,
    /// Im z_k
    Y,
    /// |z_k|
    R,
    /// arg z_k in [0, 2π), with arg(0) = 0
    Th,
    /// Euclidean |z|
    AbsZ,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Sin,
    Cos,
    Abs,
}

/// Parsed weight-expression AST.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Number(f64),
    /// `index` is 1-based; 0 for `absz`.
    Var { kind: VarKind, index: usize },
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Point data an expression is evaluated against.
#[derive(Debug, Clone)]
pub struct EvalContext {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub r: Vec<f64>,
    pub th: Vec<f64>,
    pub absz: f64,
}

impl EvalContext {
    pub fn from_point(z: &[num_complex::Complex64]) -> Self {
        let x: Vec<f64> = z.iter().map(|w| w.re).collect();
        let y: Vec<f64> = z.iter().map(|w| w.im).collect();
        let r: Vec<f64> = z.iter().map(|w| w.norm()).collect();
        // principal argument folded to [0, 2π); arg(0) := 0
        let th: Vec<f64> = z
            .iter()
            .map(|w| {
                if w.re == 0.0 && w.im == 0.0 {
                    0.0
                } else {
                    let a = w.im.atan2(w.re);
                    if a < 0.0 {
                        a + std::f64::consts::TAU
                    } else {
                        a
                    }
                }
            })
            .collect();
        let absz = z.iter().map(|w| w.norm_sqr()).sum::<f64>().sqrt();
        EvalContext { x, y, r, th, absz }
    }

    /// Context on the distinguished boundary: only the angles are meaningful.
    pub fn from_angles(th: &[f64]) -> Self {
        let n = th.len();
        EvalContext {
            x: th.iter().map(|t| t.cos()).collect(),
            y: th.iter().map(|t| t.sin()).collect(),
            r: vec![1.0; n],
            th: th.to_vec(),
            absz: (n as f64).sqrt(),
        }
    }

    /// Context on the radial box I^n: only the moduli are meaningful.
    pub fn from_radii(r: &[f64]) -> Self {
        EvalContext {
            x: r.to_vec(),
            y: vec![0.0; r.len()],
            r: r.to_vec(),
            th: vec![0.0; r.len()],
            absz: r.iter().map(|v| v * v).sum::<f64>().sqrt(),
        }
    }
}

impl Expr {
    pub fn evaluate(&self, ctx: &EvalContext) -> Result<f64> {
        match self {
            Expr::Number(v) => Ok(*v),
            Expr::Var { kind, index } => {
                let k = index.wrapping_sub(1);
                let v = match kind {
                    VarKind::X => ctx.x.get(k).copied(),
                    VarKind::Y => ctx.y.get(k).copied(),
                    VarKind::R => ctx.r.get(k).copied(),
                    VarKind::Th => ctx.th.get(k).copied(),
                    VarKind::AbsZ => Some(ctx.absz),
                };
                v.ok_or_else(|| Error::invalid(format!("variable index {index} out of range")))
            }
            Expr::Neg(e) => Ok(-e.evaluate(ctx)?),
            Expr::Binary(op, a, b) => {
                let a = a.evaluate(ctx)?;
                let b = b.evaluate(ctx)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => Ok(a / b),
                    BinOp::Pow => {
                        if a < 0.0 && b.fract() != 0.0 {
                            return Err(Error::invalid(format!(
                                "non-integer exponent {b} on negative base {a}"
                            )));
                        }
                        Ok(a.powf(b))
                    }
                }
            }
            Expr::Call(f, e) => {
                let v = e.evaluate(ctx)?;
                let out = match f {
                    Func::Exp => v.exp(),
                    Func::Log => {
                        if v <= 0.0 {
                            return Err(Error::invalid(format!("log of non-positive value {v}")));
                        }
                        v.ln()
                    }
                    Func::Sqrt => {
                        if v < 0.0 {
                            return Err(Error::invalid(format!("sqrt of negative value {v}")));
                        }
                        v.sqrt()
                    }
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Abs => v.abs(),
                };
                Ok(out)
            }
        }
    }

    /// Largest variable index referenced (0 if none).
    pub fn max_var_index(&self) -> usize {
        match self {
            Expr::Number(_) => 0,
            Expr::Var { index, .. } => *index,
            Expr::Neg(e) | Expr::Call(_, e) => e.max_var_index(),
            Expr::Binary(_, a, b) => a.max_var_index().max(b.max_var_index()),
        }
    }

    /// True if the expression reads only `th<k>` variables.
    pub fn is_angular_only(&self) -> bool {
        match self {
            Expr::Number(_) => true,
            Expr::Var { kind, .. } => matches!(kind, VarKind::Th),
            Expr::Neg(e) | Expr::Call(_, e) => e.is_angular_only(),
            Expr::Binary(_, a, b) => a.is_angular_only() && b.is_angular_only(),
        }
    }

    /// True if the expression reads only `r<k>` variables.
    pub fn is_radial_only(&self) -> bool {
        match self {
            Expr::Number(_) => true,
            Expr::Var { kind, .. } => matches!(kind, VarKind::R),
            Expr::Neg(e) | Expr::Call(_, e) => e.is_radial_only(),
            Expr::Binary(_, a, b) => a.is_radial_only() && b.is_radial_only(),
        }
    }

    /// Pretty-prints the AST; `parse(pretty_print(e))` reproduces `e`.
    pub fn pretty_print(&self) -> String {
        fn fname(f: Func) -> &'static str {
            match f {
                Func::Exp => "exp",
                Func::Log => "log",
                Func::Sqrt => "sqrt",
                Func::Sin => "sin",
                Func::Cos => "cos",
                Func::Abs => "abs",
            }
        }
        fn vname(kind: VarKind, index: usize) -> String {
            match kind {
                VarKind::X => format!("x{index}"),
                VarKind::Y => format!("y{index}"),
                VarKind::R => format!("r{index}"),
                VarKind::Th => format!("th{index}"),
                VarKind::AbsZ => "absz".to_string(),
            }
        }
        match self {
            Expr::Number(v) => {
                if *v < 0.0 {
                    format!("({v})")
                } else {
                    format!("{v}")
                }
            }
            Expr::Var { kind, index } => vname(*kind, *index),
            Expr::Neg(e) => format!("(-{})", e.pretty_print()),
            Expr::Binary(op, a, b) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                format!("({}{sym}{})", a.pretty_print(), b.pretty_print())
            }
            Expr::Call(f, e) => format!("{}({})", fname(*f), e.pretty_print()),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dimension: usize,
}

/// Parses a weight expression over `C^n` with standard precedence.
pub fn parse_expr(src: &str, dimension: usize) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(Error::Parse {
            offset: 0,
            message: "empty expression".to_string(),
        });
    }
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        dimension,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(Error::Parse {
            offset: p.pos,
            message: format!("unexpected character '{}'", p.src[p.pos] as char),
        });
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'+' => BinOp::Add,
                b'-' => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        while let Some(c) = self.peek() {
            let op = match c {
                b'*' => BinOp::Mul,
                b'/' => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.factor()?; // right-associative
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(Error::Parse {
                offset: self.pos,
                message: "unexpected end of input".to_string(),
            }),
            Some(b'-') => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.base()?)))
            }
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_lowercase() => self.ident(),
            Some(c) => Err(Error::Parse {
                offset: self.pos,
                message: format!("unexpected character '{}'", c as char),
            }),
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::Parse {
                offset: self.pos,
                message: format!("expected '{}'", c as char),
            })
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
        {
            self.pos += 1;
        }
        // optional exponent
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let mut p = self.pos + 1;
            if p < self.src.len() && (self.src[p] == b'+' || self.src[p] == b'-') {
                p += 1;
            }
            if p < self.src.len() && self.src[p].is_ascii_digit() {
                self.pos = p;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Number).map_err(|_| Error::Parse {
            offset: start,
            message: format!("malformed number '{text}'"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_lowercase() {
            self.pos += 1;
        }
        let name_end = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..name_end]).unwrap();
        let digits = std::str::from_utf8(&self.src[name_end..self.pos]).unwrap();

        if digits.is_empty() {
            if name == "absz" {
                return Ok(Expr::Var {
                    kind: VarKind::AbsZ,
                    index: 0,
                });
            }
            let func = match name {
                "exp" => Some(Func::Exp),
                "log" => Some(Func::Log),
                "sqrt" => Some(Func::Sqrt),
                "sin" => Some(Func::Sin),
                "cos" => Some(Func::Cos),
                "abs" => Some(Func::Abs),
                _ => None,
            };
            if let Some(f) = func {
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                return Ok(Expr::Call(f, Box::new(arg)));
            }
            return Err(Error::Parse {
                offset: start,
                message: format!("unknown identifier '{name}'"),
            });
        }

        let kind = match name {
            "x" => VarKind::X,
            "y" => VarKind::Y,
            "r" => VarKind::R,
            "th" => VarKind::Th,
            _ => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unknown identifier '{name}{digits}'"),
                })
            }
        };
        let index: usize = digits.parse().map_err(|_| Error::Parse {
            offset: name_end,
            message: format!("malformed variable index '{digits}'"),
        })?;
        if index == 0 || index > self.dimension {
            return Err(Error::Parse {
                offset: name_end,
                message: format!(
                    "variable index {index} out of range 1..={}",
                    self.dimension
                ),
            });
        }
        Ok(Expr::Var { kind, index })
    }
}
