//! A small arithmetic expression language for user-supplied functions.
//!
//! Grammar: real literals, declared variables, `+ - * / ^`, unary minus and
//! the functions `ln exp sin cos sqrt`. Precedence from tight to loose is
//! `^`, unary `-`, `* /`, `+ -`; operators of equal precedence associate to
//! the left, so `2^3^2` is `(2^3)^2`.
//!
//! ```
//! use benney_core::expr::ExprAst;
//! let f = ExprAst::parse("g*ln(t+g)", &["g", "t"]).unwrap();
//! let df = f.differentiate("g").unwrap();
//! let v = df.eval(&[("g", 1.0), ("t", 1.0)]).unwrap();
//! assert!((v - (core::f64::consts::LN_2 + 0.5)).abs() < 1e-15);
//! ```

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

const MAX_DEPTH: usize = 200;

/// Byte range of the source text a node came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Ln,
    Exp,
    Sin,
    Cos,
    Sqrt,
    Tanh,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "ln" => Self::Ln,
            "exp" => Self::Exp,
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "sqrt" => Self::Sqrt,
            "tanh" => Self::Tanh,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Ln => "ln",
            Self::Exp => "exp",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Sqrt => "sqrt",
            Self::Tanh => "tanh",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn precedence(self) -> u8 {
        match self {
            Self::Add | Self::Sub => 10,
            Self::Mul | Self::Div => 20,
            Self::Pow => 40,
        }
    }

    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

const NEG_PRECEDENCE: u8 = 30;

#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    Const(f64),
    /// Index into the declared variable list.
    Var(usize),
    Unary(UnaryOp, Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub kind: NodeKind,
    pub span: Span,
}

/// A parsed expression together with its declared variables.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprAst {
    vars: Vec<String>,
    root: Node,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedEnd,
    UnexpectedToken,
    BadNumber,
    UnknownVariable(String),
    NestingTooDeep,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub offset: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => f.write_str("empty expression"),
            Self::UnexpectedChar(c) => write!(f, "unexpected character {c:?}"),
            Self::UnexpectedEnd => f.write_str("unexpected end of input"),
            Self::UnexpectedToken => f.write_str("unexpected token"),
            Self::BadNumber => f.write_str("malformed number"),
            Self::UnknownVariable(v) => write!(f, "unknown variable `{v}`"),
            Self::NestingTooDeep => f.write_str("nesting too deep"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("domain error in {what} at {}..{}", span.start, span.end)]
    Domain { what: &'static str, span: Span },
    #[error("variable `{0}` is not bound")]
    Unbound(String),
    #[error("expected {expected} values, got {got}")]
    Arity { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("variable `{0}` is not declared")]
pub struct UndeclaredVariable(pub String);

// ---------------------------------------------------------------- lexer

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn next(&mut self) -> Result<(Tok, Span), ParseError> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && (bytes[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        if start >= bytes.len() {
            return Ok((Tok::End, Span { start, end: start }));
        }
        let c = bytes[start] as char;
        let tok = if c.is_ascii_digit() || c == '.' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_digit() || bytes[end] == b'.') {
                end += 1;
            }
            if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
                let mut k = end + 1;
                if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                    k += 1;
                }
                if k < bytes.len() && bytes[k].is_ascii_digit() {
                    while k < bytes.len() && bytes[k].is_ascii_digit() {
                        k += 1;
                    }
                    end = k;
                }
            }
            self.pos = end;
            let text = &self.src[start..end];
            match text.parse::<f64>() {
                Ok(v) => Tok::Num(v),
                Err(_) => return Err(ParseError { kind: ParseErrorKind::BadNumber, offset: start }),
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut end = start;
            while end < bytes.len() && (bytes[end].is_ascii_alphanumeric() || bytes[end] == b'_') {
                end += 1;
            }
            self.pos = end;
            Tok::Ident(self.src[start..end].to_string())
        } else {
            self.pos += 1;
            match c {
                '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => {
                    let ch = self.src[start..].chars().next().unwrap_or(c);
                    return Err(ParseError { kind: ParseErrorKind::UnexpectedChar(ch), offset: start });
                }
            }
        };
        Ok((tok, Span { start, end: self.pos }))
    }
}

// ---------------------------------------------------------------- parser

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    span: Span,
    vars: &'a [String],
    depth: usize,
}

impl<'a> Parser<'a> {
    fn bump(&mut self) -> Result<(), ParseError> {
        let (tok, span) = self.lexer.next()?;
        self.tok = tok;
        self.span = span;
        Ok(())
    }

    fn error(&self) -> ParseError {
        let kind = if self.tok == Tok::End { ParseErrorKind::UnexpectedEnd } else { ParseErrorKind::UnexpectedToken };
        ParseError { kind, offset: self.span.start }
    }

    fn expr(&mut self, min_prec: u8) -> Result<Node, ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError { kind: ParseErrorKind::NestingTooDeep, offset: self.span.start });
        }
        let mut lhs = self.prefix()?;
        loop {
            let op = match self.tok {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                Tok::Op('^') => BinaryOp::Pow,
                Tok::RParen | Tok::End => break,
                _ => return Err(self.error()),
            };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.bump()?;
            let rhs = self.expr(prec + 1)?;
            let span = Span { start: lhs.span.start, end: rhs.span.end };
            lhs = Node { kind: NodeKind::Binary(op, Box::new(lhs), Box::new(rhs)), span };
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Node, ParseError> {
        let span = self.span;
        match self.tok.clone() {
            Tok::Num(v) => {
                self.bump()?;
                Ok(Node { kind: NodeKind::Const(v), span })
            }
            Tok::Op('-') => {
                self.bump()?;
                let inner = self.expr(NEG_PRECEDENCE)?;
                let span = Span { start: span.start, end: inner.span.end };
                Ok(Node { kind: NodeKind::Unary(UnaryOp::Neg, Box::new(inner)), span })
            }
            Tok::LParen => {
                self.bump()?;
                let inner = self.expr(0)?;
                if self.tok != Tok::RParen {
                    return Err(self.error());
                }
                self.bump()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump()?;
                if self.tok == Tok::LParen {
                    if let Some(op) = UnaryOp::from_name(&name) {
                        self.bump()?;
                        let arg = self.expr(0)?;
                        if self.tok != Tok::RParen {
                            return Err(self.error());
                        }
                        let end = self.span.end;
                        self.bump()?;
                        return Ok(Node {
                            kind: NodeKind::Unary(op, Box::new(arg)),
                            span: Span { start: span.start, end },
                        });
                    }
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => Ok(Node { kind: NodeKind::Var(i), span }),
                    None => Err(ParseError { kind: ParseErrorKind::UnknownVariable(name), offset: span.start }),
                }
            }
            _ => Err(self.error()),
        }
    }
}

// ---------------------------------------------------------------- builders

fn constant(v: f64, span: Span) -> Node {
    Node { kind: NodeKind::Const(v), span }
}

fn as_const(n: &Node) -> Option<f64> {
    match n.kind {
        NodeKind::Const(v) => Some(v),
        _ => None,
    }
}

fn unary(op: UnaryOp, a: Node, span: Span) -> Node {
    if op == UnaryOp::Neg {
        if let Some(v) = as_const(&a) {
            return constant(-v, span);
        }
    }
    Node { kind: NodeKind::Unary(op, Box::new(a)), span }
}

fn binary(op: BinaryOp, a: Node, b: Node, span: Span) -> Node {
    let (ca, cb) = (as_const(&a), as_const(&b));
    match op {
        BinaryOp::Add => {
            if ca == Some(0.0) {
                return b;
            }
            if cb == Some(0.0) {
                return a;
            }
        }
        BinaryOp::Sub => {
            if cb == Some(0.0) {
                return a;
            }
            if ca == Some(0.0) {
                return unary(UnaryOp::Neg, b, span);
            }
        }
        BinaryOp::Mul => {
            if ca == Some(0.0) || cb == Some(0.0) {
                return constant(0.0, span);
            }
            if ca == Some(1.0) {
                return b;
            }
            if cb == Some(1.0) {
                return a;
            }
        }
        BinaryOp::Div => {
            if ca == Some(0.0) && cb != Some(0.0) {
                return constant(0.0, span);
            }
            if cb == Some(1.0) {
                return a;
            }
        }
        BinaryOp::Pow => {
            if cb == Some(1.0) {
                return a;
            }
            if cb == Some(0.0) {
                return constant(1.0, span);
            }
        }
    }
    if let (Some(x), Some(y)) = (ca, cb) {
        let folded = match op {
            BinaryOp::Add => Some(x + y),
            BinaryOp::Sub => Some(x - y),
            BinaryOp::Mul => Some(x * y),
            _ => None,
        };
        if let Some(v) = folded {
            return constant(v, span);
        }
    }
    Node { kind: NodeKind::Binary(op, Box::new(a), Box::new(b)), span }
}

fn depends_on(n: &Node, var: usize) -> bool {
    match &n.kind {
        NodeKind::Const(_) => false,
        NodeKind::Var(i) => *i == var,
        NodeKind::Unary(_, a) => depends_on(a, var),
        NodeKind::Binary(_, a, b) => depends_on(a, var) || depends_on(b, var),
    }
}

fn derive(n: &Node, var: usize) -> Node {
    use BinaryOp::*;
    use UnaryOp::*;
    let s = n.span;
    if !depends_on(n, var) {
        return constant(0.0, s);
    }
    match &n.kind {
        NodeKind::Const(_) => constant(0.0, s),
        NodeKind::Var(i) => constant(if *i == var { 1.0 } else { 0.0 }, s),
        NodeKind::Unary(op, a) => {
            let da = derive(a, var);
            let a = (**a).clone();
            match op {
                Neg => unary(Neg, da, s),
                Ln => binary(Div, da, a, s),
                Exp => binary(Mul, unary(Exp, a, s), da, s),
                Sin => binary(Mul, unary(Cos, a, s), da, s),
                Cos => unary(Neg, binary(Mul, unary(Sin, a, s), da, s), s),
                Sqrt => binary(Div, da, binary(Mul, constant(2.0, s), unary(Sqrt, a, s), s), s),
                Tanh => {
                    let th = unary(Tanh, a, s);
                    binary(Mul, binary(Sub, constant(1.0, s), binary(Mul, th.clone(), th, s), s), da, s)
                }
            }
        }
        NodeKind::Binary(op, a, b) => {
            let (da, db) = (derive(a, var), derive(b, var));
            let (a, b) = ((**a).clone(), (**b).clone());
            match op {
                Add => binary(Add, da, db, s),
                Sub => binary(Sub, da, db, s),
                Mul => binary(Add, binary(Mul, da, b.clone(), s), binary(Mul, a, db, s), s),
                Div => binary(
                    Div,
                    binary(Sub, binary(Mul, da, b.clone(), s), binary(Mul, a, db, s), s),
                    binary(Mul, b.clone(), b, s),
                    s,
                ),
                Pow => {
                    if !depends_on(&b, var) {
                        // b · a^(b−1) · a′
                        let exp = binary(Sub, b.clone(), constant(1.0, s), s);
                        binary(Mul, binary(Mul, b, binary(Pow, a, exp, s), s), da, s)
                    } else if !depends_on(&a, var) {
                        let p = binary(Pow, a.clone(), b, s);
                        binary(Mul, binary(Mul, p, unary(Ln, a, s), s), db, s)
                    } else {
                        let p = binary(Pow, a.clone(), b.clone(), s);
                        let t1 = binary(Mul, db, unary(Ln, a.clone(), s), s);
                        let t2 = binary(Div, binary(Mul, b, da, s), a, s);
                        binary(Mul, p, binary(Add, t1, t2, s), s)
                    }
                }
            }
        }
    }
}

fn eval_node(n: &Node, vals: &[f64]) -> Result<f64, EvalError> {
    let dom = |what| EvalError::Domain { what, span: n.span };
    Ok(match &n.kind {
        NodeKind::Const(v) => *v,
        NodeKind::Var(i) => vals[*i],
        NodeKind::Unary(op, a) => {
            let x = eval_node(a, vals)?;
            match op {
                UnaryOp::Neg => -x,
                UnaryOp::Ln => {
                    if !(x > 0.0) {
                        return Err(dom("ln"));
                    }
                    libm::log(x)
                }
                UnaryOp::Exp => libm::exp(x),
                UnaryOp::Sin => libm::sin(x),
                UnaryOp::Cos => libm::cos(x),
                UnaryOp::Sqrt => {
                    if !(x >= 0.0) {
                        return Err(dom("sqrt"));
                    }
                    libm::sqrt(x)
                }
                UnaryOp::Tanh => libm::tanh(x),
            }
        }
        NodeKind::Binary(op, a, b) => {
            let x = eval_node(a, vals)?;
            let y = eval_node(b, vals)?;
            match op {
                BinaryOp::Add => x + y,
                BinaryOp::Sub => x - y,
                BinaryOp::Mul => x * y,
                BinaryOp::Div => {
                    if y == 0.0 {
                        return Err(dom("division"));
                    }
                    x / y
                }
                BinaryOp::Pow => {
                    let integral = libm::trunc(y) == y && y.abs() < 2_147_483_648.0;
                    if x == 0.0 && y < 0.0 {
                        return Err(dom("power"));
                    }
                    if x < 0.0 && !integral {
                        return Err(dom("power"));
                    }
                    if integral {
                        powi(x, y as i64)
                    } else {
                        libm::pow(x, y)
                    }
                }
            }
        }
    })
}

impl ExprAst {
    /// Parses `source`; every identifier must be a declared variable or one
    /// of the built-in functions applied with parentheses.
    pub fn parse(source: &str, variables: &[&str]) -> Result<Self, ParseError> {
        if source.trim().is_empty() {
            return Err(ParseError { kind: ParseErrorKind::Empty, offset: 0 });
        }
        let vars: Vec<String> = variables.iter().map(|v| v.to_string()).collect();
        let mut p = Parser {
            lexer: Lexer { src: source, pos: 0 },
            tok: Tok::End,
            span: Span::default(),
            vars: &vars,
            depth: 0,
        };
        p.bump()?;
        let root = p.expr(0)?;
        if p.tok != Tok::End {
            return Err(p.error());
        }
        Ok(Self { vars, root })
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Evaluates with values given in declared-variable order.
    pub fn eval_at(&self, values: &[f64]) -> Result<f64, EvalError> {
        if values.len() != self.vars.len() {
            return Err(EvalError::Arity { expected: self.vars.len(), got: values.len() });
        }
        eval_node(&self.root, values)
    }

    /// Evaluates with named bindings; every declared variable must be bound.
    pub fn eval(&self, bindings: &[(&str, f64)]) -> Result<f64, EvalError> {
        let mut values = Vec::with_capacity(self.vars.len());
        for v in &self.vars {
            match bindings.iter().find(|(n, _)| n == v) {
                Some(&(_, x)) => values.push(x),
                None => return Err(EvalError::Unbound(v.clone())),
            }
        }
        eval_node(&self.root, &values)
    }

    /// Symbolic partial derivative with respect to `var`.
    pub fn differentiate(&self, var: &str) -> Result<Self, UndeclaredVariable> {
        let i = self.vars.iter().position(|v| v == var).ok_or_else(|| UndeclaredVariable(var.to_string()))?;
        Ok(Self { vars: self.vars.clone(), root: derive(&self.root, i) })
    }

    /// True when the expression does not mention `var`.
    pub fn is_independent_of(&self, var: &str) -> bool {
        match self.vars.iter().position(|v| v == var) {
            Some(i) => !depends_on(&self.root, i),
            None => true,
        }
    }
}

struct Show<'a>(&'a Node, &'a [String]);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vars = self.1;
        let prec = |n: &Node| match &n.kind {
            NodeKind::Binary(op, _, _) => op.precedence(),
            NodeKind::Unary(UnaryOp::Neg, _) => NEG_PRECEDENCE,
            NodeKind::Const(v) if *v < 0.0 => NEG_PRECEDENCE,
            _ => u8::MAX,
        };
        match &self.0.kind {
            NodeKind::Const(v) => write!(f, "{v}"),
            NodeKind::Var(i) => f.write_str(&vars[*i]),
            NodeKind::Unary(UnaryOp::Neg, a) => {
                if prec(a) <= NEG_PRECEDENCE {
                    write!(f, "-({})", Show(a, vars))
                } else {
                    write!(f, "-{}", Show(a, vars))
                }
            }
            NodeKind::Unary(op, a) => write!(f, "{}({})", op.name(), Show(a, vars)),
            NodeKind::Binary(op, a, b) => {
                let p = op.precedence();
                if prec(a) < p {
                    write!(f, "({})", Show(a, vars))?;
                } else {
                    write!(f, "{}", Show(a, vars))?;
                }
                write!(f, " {} ", op.symbol())?;
                if prec(b) <= p {
                    write!(f, "({})", Show(b, vars))
                } else {
                    write!(f, "{}", Show(b, vars))
                }
            }
        }
    }
}

impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Show(&self.root, &self.vars))
    }
}

/// `x^n` by repeated squaring.
fn powi(x: f64, n: i64) -> f64 {
    let (mut base, mut e, mut acc) = (x, n.unsigned_abs(), 1.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}
