//! NC rational expressions: ASTs built from constants and the letters
//! Z1..Zd by addition, multiplication and inversion, with a small parser,
//! a printer, pointwise evaluation, and a probabilistic equivalence test.
//!
//! Expressions denote functions on matrix tuples. Equality of the denoted
//! rational functions is tested by evaluation at generic random tuples of
//! increasing size, which separates distinct functions with probability 1.

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::freepoly::{MatPoly, MatrixTuple, Word};
use crate::linalg::{derive_seed, ginibre, seeded_rng, CMatrix};

/// Inv nodes fail when smallest singular value <= this times the norm.
pub const DOMAIN_REL_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub enum RatExpr {
    Const(C64),
    /// 1-based letter index.
    Var(u8),
    Add(Box<RatExpr>, Box<RatExpr>),
    Sub(Box<RatExpr>, Box<RatExpr>),
    Mul(Box<RatExpr>, Box<RatExpr>),
    Neg(Box<RatExpr>),
    Inv(Box<RatExpr>),
    Scale(C64, Box<RatExpr>),
}

/// A square grid of scalar rational expressions.
#[derive(Clone, Debug, PartialEq)]
pub struct MatExpr {
    pub k: usize,
    /// Row-major, length k*k.
    pub entries: Vec<RatExpr>,
}

/// Result of `parse`: a bare expression or a bracketed matrix of them.
#[derive(Clone, Debug, PartialEq)]
pub enum Parsed {
    Expr(RatExpr),
    Matrix(MatExpr),
}

impl RatExpr {
    pub fn constant(re: f64) -> Self {
        RatExpr::Const(C64::new(re, 0.0))
    }

    pub fn var(j: u8) -> Self {
        RatExpr::Var(j)
    }

    pub fn add(self, other: RatExpr) -> Self {
        RatExpr::Add(Box::new(self), Box::new(other))
    }

    pub fn sub(self, other: RatExpr) -> Self {
        RatExpr::Sub(Box::new(self), Box::new(other))
    }

    pub fn mul(self, other: RatExpr) -> Self {
        RatExpr::Mul(Box::new(self), Box::new(other))
    }

    pub fn inv(self) -> Self {
        RatExpr::Inv(Box::new(self))
    }

    pub fn scale_by(self, z: C64) -> Self {
        RatExpr::Scale(z, Box::new(self))
    }

    pub fn neg(self) -> Self {
        RatExpr::Neg(Box::new(self))
    }

    /// Largest letter index appearing in the expression (0 if none).
    pub fn max_var(&self) -> u8 {
        match self {
            RatExpr::Const(_) => 0,
            RatExpr::Var(j) => *j,
            RatExpr::Add(l, r) | RatExpr::Sub(l, r) | RatExpr::Mul(l, r) => {
                l.max_var().max(r.max_var())
            }
            RatExpr::Neg(e) | RatExpr::Inv(e) | RatExpr::Scale(_, e) => e.max_var(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            RatExpr::Const(_) | RatExpr::Var(_) => 1,
            RatExpr::Add(l, r) | RatExpr::Sub(l, r) | RatExpr::Mul(l, r) => {
                1 + l.node_count() + r.node_count()
            }
            RatExpr::Neg(e) | RatExpr::Inv(e) | RatExpr::Scale(_, e) => 1 + e.node_count(),
        }
    }

    pub fn contains_inv(&self) -> bool {
        match self {
            RatExpr::Const(_) | RatExpr::Var(_) => false,
            RatExpr::Add(l, r) | RatExpr::Sub(l, r) | RatExpr::Mul(l, r) => {
                l.contains_inv() || r.contains_inv()
            }
            RatExpr::Neg(e) | RatExpr::Scale(_, e) => e.contains_inv(),
            RatExpr::Inv(_) => true,
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Imag(f64),
    Var(u8),
    Inv,
    InvPow,
    Plus,
    Minus,
    Star,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
}

#[derive(Clone, Debug)]
struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
    d: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str, d: usize) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
            d,
        }
    }

    fn err(&self, expected: &str) -> Error {
        Error::Syntax {
            line: self.line,
            col: self.col,
            expected: expected.to_string(),
        }
    }

    fn bump(&mut self) -> u8 {
        let b = self.src[self.pos];
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Spanned>> {
        let mut out = Vec::new();
        while let Some(b) = self.peek() {
            if b.is_ascii_whitespace() {
                self.bump();
                continue;
            }
            let (line, col) = (self.line, self.col);
            let tok = match b {
                b'+' => {
                    self.bump();
                    Tok::Plus
                }
                b'-' => {
                    self.bump();
                    Tok::Minus
                }
                b'*' => {
                    self.bump();
                    Tok::Star
                }
                b'(' => {
                    self.bump();
                    Tok::LParen
                }
                b')' => {
                    self.bump();
                    Tok::RParen
                }
                b'[' => {
                    self.bump();
                    Tok::LBracket
                }
                b']' => {
                    self.bump();
                    Tok::RBracket
                }
                b',' => {
                    self.bump();
                    Tok::Comma
                }
                b';' => {
                    self.bump();
                    Tok::Semi
                }
                b'^' => {
                    self.bump();
                    if self.peek() == Some(b'-') {
                        self.bump();
                        if self.peek() == Some(b'1') {
                            self.bump();
                            Tok::InvPow
                        } else {
                            return Err(self.err("`1` after `^-`"));
                        }
                    } else {
                        return Err(self.err("`-1` after `^`"));
                    }
                }
                b'0'..=b'9' | b'.' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit() || c == b'.') {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    let value: f64 = text
                        .parse()
                        .map_err(|_| self.err("a decimal number"))?;
                    if self.peek() == Some(b'i') {
                        self.bump();
                        Tok::Imag(value)
                    } else {
                        Tok::Num(value)
                    }
                }
                b'a'..=b'z' | b'A'..=b'Z' => {
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric()) {
                        self.bump();
                    }
                    let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    match name {
                        "inv" => Tok::Inv,
                        "i" => Tok::Imag(1.0),
                        "W" if self.d == 2 => Tok::Var(2),
                        _ => {
                            if let Some(num) = name.strip_prefix('Z') {
                                let j: usize = num
                                    .parse()
                                    .map_err(|_| Error::UnknownVariable(name.to_string()))?;
                                if j == 0 || j > self.d {
                                    return Err(Error::UnknownVariable(name.to_string()));
                                }
                                Tok::Var(j as u8)
                            } else {
                                return Err(Error::UnknownVariable(name.to_string()));
                            }
                        }
                    }
                }
                _ => return Err(self.err("an expression token")),
            };
            out.push(Spanned { tok, line, col });
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Parser
//
//   expr   := term (("+"|"-") term)*
//   term   := factor ("*" factor)*
//   factor := base ("^-1")?
//   base   := number | variable | "(" expr ")" | "inv" "(" expr ")" | "-" factor
//   matrix := "[" row (";" row)* "]",  row := expr ("," expr)*

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn err_at(&self, expected: &str) -> Error {
        let (line, col) = match self.toks.get(self.pos) {
            Some(s) => (s.line, s.col),
            None => self
                .toks
                .last()
                .map(|s| (s.line, s.col + 1))
                .unwrap_or((1, 1)),
        };
        Error::Syntax {
            line,
            col,
            expected: expected.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn eat(&mut self, t: &Tok, expected: &str) -> Result<()> {
        if self.peek() == Some(t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err_at(expected))
        }
    }

    fn expr(&mut self) -> Result<RatExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.sub(self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<RatExpr> {
        let mut acc = self.factor()?;
        while self.peek() == Some(&Tok::Star) {
            self.pos += 1;
            acc = acc.mul(self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<RatExpr> {
        let base = self.base()?;
        if self.peek() == Some(&Tok::InvPow) {
            self.pos += 1;
            Ok(base.inv())
        } else {
            Ok(base)
        }
    }

    fn base(&mut self) -> Result<RatExpr> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(RatExpr::Const(C64::new(v, 0.0)))
            }
            Some(Tok::Imag(v)) => {
                self.pos += 1;
                Ok(RatExpr::Const(C64::new(0.0, v)))
            }
            Some(Tok::Var(j)) => {
                self.pos += 1;
                Ok(RatExpr::Var(j))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Some(Tok::Inv) => {
                self.pos += 1;
                self.eat(&Tok::LParen, "`(` after `inv`")?;
                let e = self.expr()?;
                self.eat(&Tok::RParen, "`)`")?;
                Ok(e.inv())
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.factor()?.neg())
            }
            _ => Err(self.err_at("a number, variable, `(`, `inv(` or `-`")),
        }
    }

    fn matrix(&mut self) -> Result<MatExpr> {
        self.eat(&Tok::LBracket, "`[`")?;
        let mut rows: Vec<Vec<RatExpr>> = Vec::new();
        loop {
            let mut row = vec![self.expr()?];
            while self.peek() == Some(&Tok::Comma) {
                self.pos += 1;
                row.push(self.expr()?);
            }
            rows.push(row);
            match self.peek() {
                Some(Tok::Semi) => {
                    self.pos += 1;
                }
                Some(Tok::RBracket) => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(self.err_at("`;` or `]`")),
            }
        }
        let k = rows.len();
        if rows.iter().any(|r| r.len() != k) {
            return Err(self.err_at("a square matrix (equal row lengths, rows = columns)"));
        }
        Ok(MatExpr {
            k,
            entries: rows.into_iter().flatten().collect(),
        })
    }
}

/// Parse an expression or a bracketed matrix of expressions in d letters.
/// "W" is accepted as an alias for Z2 when d = 2.
pub fn parse(text: &str, d: usize) -> Result<Parsed> {
    let toks = Lexer::new(text, d).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let out = if p.peek() == Some(&Tok::LBracket) {
        Parsed::Matrix(p.matrix()?)
    } else {
        Parsed::Expr(p.expr()?)
    };
    if p.pos != p.toks.len() {
        return Err(p.err_at("end of input"));
    }
    Ok(out)
}

/// Parse, requiring a bare (non-matrix) expression.
pub fn parse_expr(text: &str, d: usize) -> Result<RatExpr> {
    match parse(text, d)? {
        Parsed::Expr(e) => Ok(e),
        Parsed::Matrix(_) => Err(Error::Syntax {
            line: 1,
            col: 1,
            expected: "a scalar expression, not a matrix".to_string(),
        }),
    }
}

// ---------------------------------------------------------------------------
// Printer. Precedence-aware; output re-parses to a structurally equal AST
// as long as constants carry no negative parts (use Neg for those).

fn prec(e: &RatExpr) -> u8 {
    match e {
        RatExpr::Add(..) | RatExpr::Sub(..) => 0,
        RatExpr::Mul(..) | RatExpr::Scale(..) => 1,
        RatExpr::Neg(..) => 2,
        RatExpr::Const(_) | RatExpr::Var(_) | RatExpr::Inv(_) => 3,
    }
}

fn fmt_const(c: C64, out: &mut String) {
    use std::fmt::Write;
    if c.im == 0.0 {
        write!(out, "{}", c.re).unwrap();
    } else if c.re == 0.0 {
        write!(out, "{}i", c.im).unwrap();
    } else {
        write!(out, "({}+{}i)", c.re, c.im).unwrap();
    }
}

fn fmt_expr(e: &RatExpr, parent: u8, out: &mut String) {
    let me = prec(e);
    let need = me < parent;
    if need {
        out.push('(');
    }
    match e {
        RatExpr::Const(c) => fmt_const(*c, out),
        RatExpr::Var(j) => {
            out.push('Z');
            out.push_str(&j.to_string());
        }
        RatExpr::Add(l, r) => {
            fmt_expr(l, 0, out);
            out.push_str(" + ");
            fmt_expr(r, 1, out);
        }
        RatExpr::Sub(l, r) => {
            fmt_expr(l, 0, out);
            out.push_str(" - ");
            fmt_expr(r, 1, out);
        }
        RatExpr::Mul(l, r) => {
            fmt_expr(l, 1, out);
            out.push_str(" * ");
            fmt_expr(r, 2, out);
        }
        RatExpr::Scale(c, r) => {
            fmt_const(*c, out);
            out.push_str(" * ");
            fmt_expr(r, 2, out);
        }
        RatExpr::Neg(x) => {
            out.push('-');
            fmt_expr(x, 2, out);
        }
        RatExpr::Inv(x) => {
            out.push_str("inv(");
            fmt_expr(x, 0, out);
            out.push(')');
        }
    }
    if need {
        out.push(')');
    }
}

pub fn print_expr(e: &RatExpr) -> String {
    let mut s = String::new();
    fmt_expr(e, 0, &mut s);
    s
}

pub fn print_matrix(m: &MatExpr) -> String {
    let rows: Vec<String> = (0..m.k)
        .map(|i| {
            (0..m.k)
                .map(|j| print_expr(&m.entries[i * m.k + j]))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

// ---------------------------------------------------------------------------
// Evaluation

fn eval_node(e: &RatExpr, x: &MatrixTuple, path: &mut Vec<&'static str>) -> Result<CMatrix> {
    let n = x.level;
    match e {
        RatExpr::Const(c) => Ok(CMatrix::identity(n).scale(*c)),
        RatExpr::Var(j) => {
            if *j as usize > x.d {
                return Err(Error::UnknownVariable(format!("Z{}", j)));
            }
            Ok(x.matrices[(*j - 1) as usize].clone())
        }
        RatExpr::Add(l, r) => {
            path.push("add.l");
            let a = eval_node(l, x, path)?;
            path.pop();
            path.push("add.r");
            let b = eval_node(r, x, path)?;
            path.pop();
            Ok(&a + &b)
        }
        RatExpr::Sub(l, r) => {
            path.push("sub.l");
            let a = eval_node(l, x, path)?;
            path.pop();
            path.push("sub.r");
            let b = eval_node(r, x, path)?;
            path.pop();
            Ok(&a - &b)
        }
        RatExpr::Mul(l, r) => {
            path.push("mul.l");
            let a = eval_node(l, x, path)?;
            path.pop();
            path.push("mul.r");
            let b = eval_node(r, x, path)?;
            path.pop();
            Ok(&a * &b)
        }
        RatExpr::Neg(inner) => {
            path.push("neg");
            let a = eval_node(inner, x, path)?;
            path.pop();
            Ok(-&a)
        }
        RatExpr::Scale(c, inner) => {
            path.push("scale");
            let a = eval_node(inner, x, path)?;
            path.pop();
            Ok(a.scale(*c))
        }
        RatExpr::Inv(inner) => {
            path.push("inv");
            let a = eval_node(inner, x, path)?;
            let out = match a.solve_with_tol(&CMatrix::identity(n), DOMAIN_REL_TOL) {
                Ok(m) => Ok(m),
                Err(Error::Singular { smallest_sv, .. }) => Err(Error::OutOfDomain {
                    path: path.join("/"),
                    smallest_sv,
                }),
                Err(e) => Err(e),
            };
            path.pop();
            out
        }
    }
}

/// Evaluate at a matrix tuple; Const c becomes c times the identity. An
/// Inv node whose argument is numerically singular reports OutOfDomain
/// with the path to the failing node.
pub fn eval_expr(e: &RatExpr, x: &MatrixTuple) -> Result<CMatrix> {
    eval_node(e, x, &mut Vec::new())
}

/// Evaluate a matrix of expressions blockwise into a (k n)-by-(k n) matrix.
pub fn eval_matrix(m: &MatExpr, x: &MatrixTuple) -> Result<CMatrix> {
    let n = x.level;
    let mut out = CMatrix::zeros(m.k * n, m.k * n);
    for i in 0..m.k {
        for j in 0..m.k {
            let block = eval_expr(&m.entries[i * m.k + j], x)?;
            out.set_block(i * n, j * n, &block);
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Probabilistic equivalence

#[derive(Clone, Debug)]
pub enum Equivalence {
    /// All common-domain samples agreed; carries the number of samples
    /// actually compared.
    Equivalent { samples_compared: usize },
    /// A common-domain point where values differ beyond tolerance.
    Distinct {
        witness: MatrixTuple,
        discrepancy: f64,
    },
}

/// Compare two expressions at `trials` random Ginibre tuples over levels
/// 1..=3, skipping points outside either domain. Deterministic in `seed`.
pub fn equivalent(e1: &RatExpr, e2: &RatExpr, trials: usize, seed: u64) -> Result<Equivalence> {
    let d = e1.max_var().max(e2.max_var()).max(1) as usize;
    let outcomes: Vec<Option<(MatrixTuple, f64, bool)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let level = 1 + t % 3;
            let mut rng = seeded_rng(derive_seed(seed, t as u64, level as u64));
            let x =
                MatrixTuple::new((0..d).map(|_| ginibre(level, &mut rng)).collect()).unwrap();
            let v1 = eval_expr(e1, &x);
            let v2 = eval_expr(e2, &x);
            match (v1, v2) {
                (Ok(a), Ok(b)) => {
                    let scale = a.max_abs().max(b.max_abs()).max(1.0);
                    let diff = a.max_abs_diff(&b);
                    Some((x, diff, diff > 1e-8 * scale))
                }
                _ => None,
            }
        })
        .collect();
    let mut compared = 0;
    for o in outcomes {
        if let Some((x, diff, distinct)) = o {
            if distinct {
                return Ok(Equivalence::Distinct {
                    witness: x,
                    discrepancy: diff,
                });
            }
            compared += 1;
        }
    }
    if compared == 0 {
        return Err(Error::Degenerate);
    }
    Ok(Equivalence::Equivalent {
        samples_compared: compared,
    })
}

// ---------------------------------------------------------------------------
// Bridge to matrix free polynomials

fn word_expr(w: &Word, coeff: C64) -> RatExpr {
    let mut e = RatExpr::Const(coeff);
    // fold letters on the right so the word multiplies in order
    for &l in &w.0 {
        e = e.mul(RatExpr::Var(l));
    }
    e
}

/// Entrywise expression form of a matrix free polynomial.
pub fn poly_to_expr(p: &MatPoly) -> MatExpr {
    let mut entries = Vec::with_capacity(p.k * p.k);
    for i in 0..p.k {
        for j in 0..p.k {
            let scalar = p.entry(i, j);
            let mut acc: Option<RatExpr> = None;
            for (w, c) in scalar.terms() {
                let t = word_expr(w, c[(0, 0)]);
                acc = Some(match acc {
                    None => t,
                    Some(a) => a.add(t),
                });
            }
            entries.push(acc.unwrap_or_else(|| RatExpr::constant(0.0)));
        }
    }
    MatExpr { k: p.k, entries }
}

fn expr_poly(e: &RatExpr, d: usize) -> Result<MatPoly> {
    match e {
        RatExpr::Const(c) => Ok(MatPoly::scalar_term(d, Word::empty(), *c)),
        RatExpr::Var(j) => Ok(MatPoly::variable(d, *j)),
        RatExpr::Add(l, r) => Ok(expr_poly(l, d)?.add(&expr_poly(r, d)?)),
        RatExpr::Sub(l, r) => Ok(expr_poly(l, d)?.sub(&expr_poly(r, d)?)),
        RatExpr::Mul(l, r) => Ok(expr_poly(l, d)?.mul(&expr_poly(r, d)?)),
        RatExpr::Neg(x) => Ok(expr_poly(x, d)?.scale(C64::new(-1.0, 0.0))),
        RatExpr::Scale(c, x) => Ok(expr_poly(x, d)?.scale(*c)),
        RatExpr::Inv(x) => {
            // only a constant inverse cancels syntactically
            if let RatExpr::Const(c) = x.as_ref() {
                if c.norm() > 0.0 {
                    return Ok(MatPoly::scalar_term(d, Word::empty(), c.inv()));
                }
            }
            Err(Error::NotPolynomial)
        }
    }
}

/// Expand an expression into a scalar polynomial if every inverse cancels
/// syntactically (only constant inverses do).
pub fn expr_is_polynomial(e: &RatExpr) -> Result<MatPoly> {
    let d = e.max_var().max(1) as usize;
    expr_poly(e, d)
}

// ---------------------------------------------------------------------------
// Named expressions used throughout

/// (1 - Z1) * inv(2 - Z1 - Z2) * (1 - Z2).
pub fn parallel_sum() -> RatExpr {
    parse_expr("(1 - Z1) * inv(2 - Z1 - Z2) * (1 - Z2)", 2).unwrap()
}

/// inv(inv(1 - Z1) + inv(1 - Z2)), the harmonic-mean form.
pub fn parallel_sum_harmonic() -> RatExpr {
    parse_expr("inv(inv(1 - Z1) + inv(1 - Z2))", 2).unwrap()
}

/// (1 - Z2) * inv(2 - Z1 - Z2) * (1 - Z1), the reversed form.
pub fn parallel_sum_reversed() -> RatExpr {
    parse_expr("(1 - Z2) * inv(2 - Z1 - Z2) * (1 - Z1)", 2).unwrap()
}

/// inv(2 - Z1 - Z2) * (1 - Z1) * (1 - Z2), the left-decoupled variant.
pub fn parallel_sum_left() -> RatExpr {
    parse_expr("inv(2 - Z1 - Z2) * (1 - Z1) * (1 - Z2)", 2).unwrap()
}

/// (1 - Z1) * (1 - Z2) * inv(2 - Z1 - Z2), the right-decoupled variant.
pub fn parallel_sum_right() -> RatExpr {
    parse_expr("(1 - Z1) * (1 - Z2) * inv(2 - Z1 - Z2)", 2).unwrap()
}

/// Random expression for oracle corpora. Inverses are shifted away from
/// zero so most expressions have a nonempty domain; depth bounds the tree.
pub fn random_expr(d: usize, depth: usize, rng: &mut impl rand::Rng) -> RatExpr {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => RatExpr::Const(C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() - 0.5)),
            _ => RatExpr::Var(rng.gen_range(1..=d as u8)),
        };
    }
    match rng.gen_range(0..6) {
        0 => random_expr(d, depth - 1, rng).add(random_expr(d, depth - 1, rng)),
        1 => random_expr(d, depth - 1, rng).sub(random_expr(d, depth - 1, rng)),
        2 => random_expr(d, depth - 1, rng).mul(random_expr(d, depth - 1, rng)),
        3 => random_expr(d, depth - 1, rng).neg(),
        4 => {
            let shift = 1.5 + rng.gen::<f64>();
            RatExpr::Const(C64::new(shift, 0.0))
                .add(random_expr(d, depth - 1, rng).scale_by(C64::new(0.5, 0.0)))
                .inv()
        }
        _ => random_expr(d, 0, rng),
    }
}

/// Swap Z1 and Z2 throughout.
pub fn swap_vars(e: &RatExpr) -> RatExpr {
    match e {
        RatExpr::Const(c) => RatExpr::Const(*c),
        RatExpr::Var(1) => RatExpr::Var(2),
        RatExpr::Var(2) => RatExpr::Var(1),
        RatExpr::Var(j) => RatExpr::Var(*j),
        RatExpr::Add(l, r) => swap_vars(l).add(swap_vars(r)),
        RatExpr::Sub(l, r) => swap_vars(l).sub(swap_vars(r)),
        RatExpr::Mul(l, r) => swap_vars(l).mul(swap_vars(r)),
        RatExpr::Neg(x) => swap_vars(x).neg(),
        RatExpr::Inv(x) => swap_vars(x).inv(),
        RatExpr::Scale(c, x) => RatExpr::Scale(*c, Box::new(swap_vars(x))),
    }
}
