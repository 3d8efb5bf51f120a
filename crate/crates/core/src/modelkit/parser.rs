//! Recursive-descent parser for model expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x^2`
//! is `-(x^2)` and `2^-x` is `2^(-x)`. U+2212 MINUS SIGN is accepted
//! wherever `-` is.

use std::collections::BTreeMap;

use super::expr::{BinOp, Expr, Func, Pos, Var};

/// Trees deeper than this are rejected so evaluation cannot exhaust the stack.
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("unknown identifier `{name}` at {pos}")]
    UnknownIdentifier { pos: Pos, name: String },
}

impl ParseError {
    pub fn pos(&self) -> Pos {
        match self {
            ParseError::Syntax { pos, .. } | ParseError::UnknownIdentifier { pos, .. } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut chars = src.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        let pos = Pos { line, col };
        if c == '\n' {
            chars.next();
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            chars.next();
            col += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = single {
            chars.next();
            col += 1;
            out.push((t, pos));
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let mut end = start;
            let mut prev = ' ';
            while let Some(&(i, d)) = chars.peek() {
                let exp_sign = (d == '+' || d == '-') && (prev == 'e' || prev == 'E');
                if d.is_ascii_digit() || d == '.' || d == 'e' || d == 'E' || exp_sign {
                    chars.next();
                    end = i + d.len_utf8();
                    col += 1;
                    prev = d;
                } else {
                    break;
                }
            }
            let text = &src[start..end];
            let v: f64 = text.parse().map_err(|_| ParseError::Syntax {
                pos,
                msg: format!("malformed number `{text}`"),
            })?;
            if !v.is_finite() {
                return Err(ParseError::Syntax { pos, msg: format!("number `{text}` overflows") });
            }
            out.push((Tok::Num(v), pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut end = start;
            while let Some(&(i, d)) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    chars.next();
                    end = i + d.len_utf8();
                    col += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(src[start..end].to_string()), pos));
            continue;
        }
        return Err(ParseError::Syntax { pos, msg: format!("unexpected character {c:?}") });
    }
    out.push((Tok::End, Pos { line, col }));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    nesting: usize,
    constants: &'a BTreeMap<String, f64>,
}

type Parsed = (Expr, usize);

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            pos: self.pos(),
            msg: format!("expected {expected}, found {}", self.peek().describe()),
        })
    }

    fn check_depth(depth: usize, pos: Pos) -> Result<usize, ParseError> {
        if depth > MAX_DEPTH {
            Err(ParseError::Syntax { pos, msg: format!("expression nested deeper than {MAX_DEPTH}") })
        } else {
            Ok(depth)
        }
    }

    fn binary(op: BinOp, pos: Pos, l: Parsed, r: Parsed) -> Result<Parsed, ParseError> {
        let depth = Self::check_depth(1 + l.1.max(r.1), pos)?;
        Ok((Expr::Binary { op, lhs: Box::new(l.0), rhs: Box::new(r.0), pos }, depth))
    }

    fn expr(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, pos) = self.bump();
            let rhs = self.term()?;
            lhs = Self::binary(op, pos, lhs, rhs)?;
        }
    }

    fn term(&mut self) -> Result<Parsed, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let (_, pos) = self.bump();
            let rhs = self.unary()?;
            lhs = Self::binary(op, pos, lhs, rhs)?;
        }
    }

    fn unary(&mut self) -> Result<Parsed, ParseError> {
        // Every recursive path of the grammar passes through here.
        self.nesting += 1;
        if self.nesting > MAX_DEPTH {
            let pos = self.pos();
            return Err(ParseError::Syntax { pos, msg: format!("expression nested deeper than {MAX_DEPTH}") });
        }
        let out = self.unary_inner();
        self.nesting -= 1;
        out
    }

    fn unary_inner(&mut self) -> Result<Parsed, ParseError> {
        match self.peek() {
            Tok::Minus => {
                let (_, pos) = self.bump();
                let (e, d) = self.unary()?;
                Ok((Expr::Neg(Box::new(e)), Self::check_depth(d + 1, pos)?))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Parsed, ParseError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            let (_, pos) = self.bump();
            let exponent = self.unary()?;
            return Self::binary(BinOp::Pow, pos, base, exponent);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Parsed, ParseError> {
        let (tok, pos) = self.bump();
        match tok {
            Tok::Num(v) => Ok((Expr::Num(v), 1)),
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.unexpected("')'");
                }
                self.bump();
                Self::check_depth(inner.1, pos)?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return self.unexpected(&format!("'(' after `{name}`"));
                    }
                    self.bump();
                    let (arg, d) = self.expr()?;
                    if *self.peek() != Tok::RParen {
                        return self.unexpected("')'");
                    }
                    self.bump();
                    let depth = Self::check_depth(d + 1, pos)?;
                    return Ok((Expr::Call { func, arg: Box::new(arg), pos }, depth));
                }
                if let Some(v) = Var::from_name(&name) {
                    return Ok((Expr::Var(v), 1));
                }
                match self.constants.get(&name) {
                    // Negative constants are inlined as a negation of a literal so that
                    // printed output reparses to the same tree.
                    Some(&c) if c.is_sign_negative() => {
                        Ok((Expr::Neg(Box::new(Expr::Num(-c))), 2))
                    }
                    Some(&c) => Ok((Expr::Num(c), 1)),
                    None => Err(ParseError::UnknownIdentifier { pos, name }),
                }
            }
            other => Err(ParseError::Syntax {
                pos,
                msg: format!("expected an operand, found {}", other.describe()),
            }),
        }
    }
}

/// Parse an expression that may reference only `x`, `xd`, `lam`, `mu`.
pub fn parse(source: &str) -> Result<Expr, ParseError> {
    parse_with_constants(source, &BTreeMap::new())
}

/// Parse an expression, inlining the given named constants as literals.
///
/// Constants must be finite and may not shadow a variable or function name.
pub fn parse_with_constants(
    source: &str,
    constants: &BTreeMap<String, f64>,
) -> Result<Expr, ParseError> {
    for (name, value) in constants {
        if Var::from_name(name).is_some() || Func::from_name(name).is_some() {
            return Err(ParseError::Syntax {
                pos: Pos::default(),
                msg: format!("constant `{name}` shadows a built-in name"),
            });
        }
        if !value.is_finite() {
            return Err(ParseError::Syntax {
                pos: Pos::default(),
                msg: format!("constant `{name}` is not finite"),
            });
        }
    }
    let toks = tokenize(source)?;
    let mut p = Parser { toks, at: 0, nesting: 0, constants };
    let (e, _) = p.expr()?;
    if *p.peek() != Tok::End {
        return p.unexpected("an operator or end of input");
    }
    Ok(e)
}
