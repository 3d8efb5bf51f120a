//! Expression tree over the four canonical model variables.

use std::fmt;

use super::jet::Jet;

/// One of the four symbols a model expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Current state `x(t)`.
    X,
    /// Delayed state `x(t - tau)`.
    Xd,
    /// Distinguished bifurcation parameter.
    Lam,
    /// Unfolding parameter.
    Mu,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Xd, Var::Lam, Var::Mu];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Xd => "xd",
            Var::Lam => "lam",
            Var::Mu => "mu",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "xd" => Some(Var::Xd),
            "lam" => Some(Var::Lam),
            "mu" => Some(Var::Mu),
            _ => None,
        }
    }
}

/// 1-based line/column of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            _ => None,
        }
    }
}

/// Abstract syntax tree of a model expression.
///
/// Equality is structural: source positions are ignored.
#[derive(Debug, Clone)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
        pos: Pos,
    },
    Call {
        func: Func,
        arg: Box<Expr>,
        pos: Pos,
    },
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Expr::Num(a), Expr::Num(b)) => a.to_bits() == b.to_bits(),
            (Expr::Var(a), Expr::Var(b)) => a == b,
            (Expr::Neg(a), Expr::Neg(b)) => a == b,
            (
                Expr::Binary { op: o1, lhs: l1, rhs: r1, .. },
                Expr::Binary { op: o2, lhs: l2, rhs: r2, .. },
            ) => o1 == o2 && l1 == l2 && r1 == r2,
            (Expr::Call { func: f1, arg: a1, .. }, Expr::Call { func: f2, arg: a2, .. }) => {
                f1 == f2 && a1 == a2
            }
            _ => false,
        }
    }
}

/// Values bound to the four variables during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub xd: f64,
    pub lam: f64,
    pub mu: f64,
}

impl Point {
    pub fn new(x: f64, xd: f64, lam: f64, mu: f64) -> Self {
        Point { x, xd, lam, mu }
    }

    pub fn get(&self, v: Var) -> f64 {
        match v {
            Var::X => self.x,
            Var::Xd => self.xd,
            Var::Lam => self.lam,
            Var::Mu => self.mu,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("domain error at {pos}: {what}")]
pub struct DomainError {
    pub pos: Pos,
    pub what: String,
}

impl DomainError {
    fn new(pos: Pos, what: impl Into<String>) -> Self {
        DomainError { pos, what: what.into() }
    }
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), pos: Pos::default() }
    }

    pub fn call(func: Func, arg: Expr) -> Expr {
        Expr::Call { func, arg: Box::new(arg), pos: Pos::default() }
    }

    /// True if `v` appears anywhere in the tree.
    pub fn references(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(e) => e.references(v),
            Expr::Binary { lhs, rhs, .. } => lhs.references(v) || rhs.references(v),
            Expr::Call { arg, .. } => arg.references(v),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) => 1,
            Expr::Neg(e) => 1 + e.node_count(),
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.node_count() + rhs.node_count(),
            Expr::Call { arg, .. } => 1 + arg.node_count(),
        }
    }

    /// IEEE-double evaluation.
    pub fn eval_real(&self, at: &Point) -> Result<f64, DomainError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var(v) => Ok(at.get(*v)),
            Expr::Neg(e) => Ok(-e.eval_real(at)?),
            Expr::Binary { op, lhs, rhs, pos } => {
                let a = lhs.eval_real(at)?;
                let b = rhs.eval_real(at)?;
                match op {
                    BinOp::Add => Ok(a + b),
                    BinOp::Sub => Ok(a - b),
                    BinOp::Mul => Ok(a * b),
                    BinOp::Div => {
                        if b == 0.0 {
                            Err(DomainError::new(*pos, "division by zero"))
                        } else {
                            Ok(a / b)
                        }
                    }
                    BinOp::Pow => real_pow(a, b, *pos),
                }
            }
            Expr::Call { func, arg, pos } => {
                let a = arg.eval_real(at)?;
                match func {
                    Func::Exp => Ok(a.exp()),
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Ln => {
                        if a > 0.0 {
                            Ok(a.ln())
                        } else {
                            Err(DomainError::new(*pos, format!("ln of non-positive value {a}")))
                        }
                    }
                    Func::Sqrt => {
                        if a >= 0.0 {
                            Ok(a.sqrt())
                        } else {
                            Err(DomainError::new(*pos, format!("sqrt of negative value {a}")))
                        }
                    }
                }
            }
        }
    }

    /// Truncated Taylor expansion about `base`.
    pub fn eval_jet(&self, base: &Point) -> Result<Jet, DomainError> {
        let vars = [
            Jet::variable(Var::X, base.x),
            Jet::variable(Var::Xd, base.xd),
            Jet::variable(Var::Lam, base.lam),
            Jet::variable(Var::Mu, base.mu),
        ];
        self.eval_jet_with(&vars)
    }

    /// Evaluate over jets with arbitrary jets bound to the variables, in
    /// the order `x, xd, lam, mu`. Used to compose the model with a
    /// parameter-dependent equilibrium.
    pub fn eval_jet_with(&self, vars: &[Jet; 4]) -> Result<Jet, DomainError> {
        match self {
            Expr::Num(v) => Ok(Jet::constant(*v)),
            Expr::Var(v) => Ok(vars[*v as usize].clone()),
            Expr::Neg(e) => Ok(-e.eval_jet_with(vars)?),
            Expr::Binary { op, lhs, rhs, pos } => {
                let a = lhs.eval_jet_with(vars)?;
                let b = rhs.eval_jet_with(vars)?;
                match op {
                    BinOp::Add => Ok(&a + &b),
                    BinOp::Sub => Ok(&a - &b),
                    BinOp::Mul => Ok(&a * &b),
                    BinOp::Div => a.checked_div(&b).ok_or_else(|| {
                        DomainError::new(*pos, "division by a jet with zero constant term")
                    }),
                    BinOp::Pow => a
                        .pow(&b)
                        .ok_or_else(|| DomainError::new(*pos, "power outside its real domain")),
                }
            }
            Expr::Call { func, arg, pos } => {
                let a = arg.eval_jet_with(vars)?;
                match func {
                    Func::Exp => Ok(a.exp()),
                    Func::Sin => Ok(a.sin()),
                    Func::Cos => Ok(a.cos()),
                    Func::Ln => a.ln().ok_or_else(|| {
                        DomainError::new(*pos, format!("ln of non-positive value {}", a.value()))
                    }),
                    Func::Sqrt => a.sqrt().ok_or_else(|| {
                        DomainError::new(*pos, format!("sqrt at non-positive value {}", a.value()))
                    }),
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary { op, .. } => op.precedence(),
            Expr::Neg(_) => 3,
            Expr::Num(v) if v.is_sign_negative() => 3,
            _ => 5,
        }
    }
}

fn real_pow(a: f64, b: f64, pos: Pos) -> Result<f64, DomainError> {
    if a == 0.0 && b < 0.0 {
        return Err(DomainError::new(pos, "zero raised to a negative power"));
    }
    if a < 0.0 && b.fract() != 0.0 {
        return Err(DomainError::new(pos, format!("negative base {a} with non-integer exponent {b}")));
    }
    Ok(a.powf(b))
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "(-{:?})", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => {
                // Negation binds tighter than * but looser than ^.
                if e.precedence() < 4 {
                    write!(f, "-({e})")
                } else {
                    write!(f, "-{e}")
                }
            }
            Expr::Binary { op, lhs, rhs, .. } => {
                let p = op.precedence();
                let (lp, rp) = match op {
                    BinOp::Pow => (lhs.precedence() <= p, rhs.precedence() < 3),
                    _ => (lhs.precedence() < p, rhs.precedence() <= p),
                };
                if lp {
                    write!(f, "({lhs})")?;
                } else {
                    write!(f, "{lhs}")?;
                }
                write!(f, " {} ", op.symbol())?;
                if rp {
                    write!(f, "({rhs})")
                } else {
                    write!(f, "{rhs}")
                }
            }
            Expr::Call { func, arg, .. } => write!(f, "{}({arg})", func.name()),
        }
    }
}
