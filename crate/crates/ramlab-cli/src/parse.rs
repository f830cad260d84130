//! Expression parsing for germs, maps, moduli, and valued scalars.
//!
//! One grammar serves every text input; evaluation happens against a
//! context that decides which identifiers exist and what the values are.
//! Multiplication is always explicit (`2*z`, never `2z`) and errors carry
//! the byte offset into the original flag text.

use std::fmt;
use std::sync::Arc;

use ramlab_core::coeff::Ring;
use ramlab_core::cycles::OKPoly;
use ramlab_core::ff::{FFElem, FieldSpec};
use ramlab_core::valued::{FPoly, LaurentScalar, PadicScalar, RatFun, ValuedScalar};

/// Degree guard for parsed polynomials; dynamics has its own ceiling.
pub const EXPR_DEGREE_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

impl ParseError {
    fn new(pos: usize, msg: impl Into<String>) -> ParseError {
        ParseError {
            pos,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at byte {}: {}", self.pos, self.msg)
    }
}

// ---- lexer ----

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(text: &str, offset: usize) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0usize;
    while i < bytes.len() {
        let b = bytes[i];
        let pos = offset + i;
        match b {
            b' ' | b'\t' | b'\n' | b'\r' => i += 1,
            b'+' => {
                out.push((pos, Tok::Plus));
                i += 1;
            }
            b'-' => {
                out.push((pos, Tok::Minus));
                i += 1;
            }
            b'*' => {
                out.push((pos, Tok::Star));
                i += 1;
            }
            b'/' => {
                out.push((pos, Tok::Slash));
                i += 1;
            }
            b'^' => {
                out.push((pos, Tok::Caret));
                i += 1;
            }
            b'(' => {
                out.push((pos, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((pos, Tok::RParen));
                i += 1;
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let s = &text[start..i];
                let v: i64 = s
                    .parse()
                    .map_err(|_| ParseError::new(offset + start, "integer literal overflows"))?;
                out.push((offset + start, Tok::Int(v)));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((offset + start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError::new(
                    pos,
                    format!("unexpected character {:?}", b as char),
                ))
            }
        }
    }
    Ok(out)
}

// ---- grammar ----

#[derive(Debug, Clone)]
pub enum Ast {
    Int(i64),
    Ident(String, usize),
    Neg(Box<Ast>),
    Add(Box<Ast>, Box<Ast>),
    Sub(Box<Ast>, Box<Ast>),
    Mul(Box<Ast>, Box<Ast>),
    Div(Box<Ast>, Box<Ast>, usize),
    Pow(Box<Ast>, i64, usize),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    i: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.toks.get(self.i)
    }

    fn bump(&mut self) -> Option<(usize, Tok)> {
        let t = self.toks.get(self.i).cloned();
        if t.is_some() {
            self.i += 1;
        }
        t
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some((_, Tok::Plus)) => {
                    self.bump();
                    acc = Ast::Add(Box::new(acc), Box::new(self.term()?));
                }
                Some((_, Tok::Minus)) => {
                    self.bump();
                    acc = Ast::Sub(Box::new(acc), Box::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some((_, Tok::Star)) => {
                    self.bump();
                    acc = Ast::Mul(Box::new(acc), Box::new(self.unary()?));
                }
                Some(&(pos, Tok::Slash)) => {
                    self.bump();
                    acc = Ast::Div(Box::new(acc), Box::new(self.unary()?), pos);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Ast, ParseError> {
        if let Some((_, Tok::Minus)) = self.peek() {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Ast, ParseError> {
        let base = self.atom()?;
        if let Some(&(pos, Tok::Caret)) = self.peek() {
            self.bump();
            let e = self.exponent()?;
            return Ok(Ast::Pow(Box::new(base), e, pos));
        }
        Ok(base)
    }

    /// An exponent is an integer literal, optionally negated, optionally
    /// parenthesized: `^3`, `^-1`, `^(-2)`.
    fn exponent(&mut self) -> Result<i64, ParseError> {
        let paren = matches!(self.peek(), Some((_, Tok::LParen)));
        if paren {
            self.bump();
        }
        let neg = matches!(self.peek(), Some((_, Tok::Minus)));
        if neg {
            self.bump();
        }
        let (pos, tok) = self
            .bump()
            .ok_or_else(|| ParseError::new(self.end, "expected an integer exponent"))?;
        let v = match tok {
            Tok::Int(v) => v,
            _ => return Err(ParseError::new(pos, "expected an integer exponent")),
        };
        if paren {
            match self.bump() {
                Some((_, Tok::RParen)) => {}
                Some((p, _)) => return Err(ParseError::new(p, "expected `)` after exponent")),
                None => return Err(ParseError::new(self.end, "expected `)` after exponent")),
            }
        }
        Ok(if neg { -v } else { v })
    }

    fn atom(&mut self) -> Result<Ast, ParseError> {
        match self.bump() {
            Some((_, Tok::Int(v))) => Ok(Ast::Int(v)),
            Some((pos, Tok::Ident(name))) => Ok(Ast::Ident(name, pos)),
            Some((_, Tok::LParen)) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some((_, Tok::RParen)) => Ok(inner),
                    Some((p, _)) => Err(ParseError::new(p, "expected `)`")),
                    None => Err(ParseError::new(self.end, "unclosed `(`")),
                }
            }
            Some((pos, tok)) => Err(ParseError::new(
                pos,
                format!("expected a value, found {:?}", tok),
            )),
            None => Err(ParseError::new(self.end, "expected a value")),
        }
    }
}

/// Parse an expression; `offset` shifts reported byte positions so they
/// stay meaningful when `text` is a suffix of the user's flag value.
pub fn parse_expr_at(text: &str, offset: usize) -> Result<Ast, ParseError> {
    let toks = lex(text, offset)?;
    if toks.is_empty() {
        return Err(ParseError::new(offset, "empty expression"));
    }
    let end = offset + text.len();
    let mut p = Parser { toks, i: 0, end };
    let ast = p.expr()?;
    if let Some((pos, tok)) = p.peek() {
        return Err(ParseError::new(
            *pos,
            format!("trailing input, found {:?}", tok),
        ));
    }
    Ok(ast)
}

pub fn parse_expr(text: &str) -> Result<Ast, ParseError> {
    parse_expr_at(text, 0)
}

// ---- integer polynomials in x (modulus input) ----

fn zx_trim(mut v: Vec<i64>) -> Vec<i64> {
    while v.len() > 1 && *v.last().unwrap() == 0 {
        v.pop();
    }
    v
}

fn zx_checked(a: i64, b: i64, add: bool, pos: usize) -> Result<i64, ParseError> {
    let r = if add { a.checked_add(b) } else { a.checked_mul(b) };
    r.ok_or_else(|| ParseError::new(pos, "modulus coefficient overflows"))
}

fn eval_zx(ast: &Ast) -> Result<Vec<i64>, ParseError> {
    match ast {
        Ast::Int(v) => Ok(vec![*v]),
        Ast::Ident(name, pos) => {
            if name == "x" {
                Ok(vec![0, 1])
            } else {
                Err(ParseError::new(
                    *pos,
                    format!("unknown name `{}`; a modulus uses only x", name),
                ))
            }
        }
        Ast::Neg(a) => Ok(zx_trim(eval_zx(a)?.into_iter().map(|c| -c).collect())),
        Ast::Add(a, b) | Ast::Sub(a, b) => {
            let sign = if matches!(ast, Ast::Add(..)) { 1 } else { -1 };
            let (va, vb) = (eval_zx(a)?, eval_zx(b)?);
            let mut out = vec![0i64; va.len().max(vb.len())];
            for (i, c) in va.iter().enumerate() {
                out[i] = *c;
            }
            for (i, c) in vb.iter().enumerate() {
                out[i] = zx_checked(out[i], sign * c, true, 0)?;
            }
            Ok(zx_trim(out))
        }
        Ast::Mul(a, b) => {
            let (va, vb) = (eval_zx(a)?, eval_zx(b)?);
            if va.len() + vb.len() > EXPR_DEGREE_CAP {
                return Err(ParseError::new(0, "modulus degree is unreasonably large"));
            }
            let mut out = vec![0i64; va.len() + vb.len() - 1];
            for (i, ca) in va.iter().enumerate() {
                for (j, cb) in vb.iter().enumerate() {
                    let prod = zx_checked(*ca, *cb, false, 0)?;
                    out[i + j] = zx_checked(out[i + j], prod, true, 0)?;
                }
            }
            Ok(zx_trim(out))
        }
        Ast::Div(_, _, pos) => Err(ParseError::new(*pos, "division is not allowed in a modulus")),
        Ast::Pow(a, e, pos) => {
            if *e < 0 {
                return Err(ParseError::new(*pos, "a modulus needs nonnegative exponents"));
            }
            let base = eval_zx(a)?;
            let mut acc = vec![1i64];
            for _ in 0..*e {
                acc = eval_zx(&Ast::Mul(
                    Box::new(wrap_zx(acc)),
                    Box::new(wrap_zx(base.clone())),
                ))?;
            }
            Ok(acc)
        }
    }
}

// re-wrap a computed polynomial so eval_zx's Mul arm can be reused
fn wrap_zx(v: Vec<i64>) -> Ast {
    let mut terms: Option<Ast> = None;
    for (i, c) in v.into_iter().enumerate() {
        if c == 0 {
            continue;
        }
        let mut t = Ast::Int(c);
        if i > 0 {
            t = Ast::Mul(
                Box::new(t),
                Box::new(Ast::Pow(Box::new(Ast::Ident("x".into(), 0)), i as i64, 0)),
            );
        }
        terms = Some(match terms {
            None => t,
            Some(acc) => Ast::Add(Box::new(acc), Box::new(t)),
        });
    }
    terms.unwrap_or(Ast::Int(0))
}

/// Modulus text like `"x^4+x+1"` to ascending coefficients.
pub fn parse_modulus(text: &str) -> Result<Vec<i64>, ParseError> {
    eval_zx(&parse_expr(text)?)
}

// ---- polynomials over a finite field (germ input) ----

pub struct GermCtx<'a> {
    pub field: &'a Arc<FieldSpec>,
    /// Extra identifier bindings, e.g. the sweep variable of classify.
    pub bindings: &'a [(&'a str, FFElem)],
}

fn ffp_trim(field: &Arc<FieldSpec>, mut v: Vec<FFElem>) -> Vec<FFElem> {
    while v.len() > 1 && v.last().map_or(false, |c| c.is_zero()) {
        v.pop();
    }
    if v.is_empty() {
        v.push(field.zero());
    }
    v
}

fn ffp_mul(
    ctx: &GermCtx,
    a: &[FFElem],
    b: &[FFElem],
    pos: usize,
) -> Result<Vec<FFElem>, ParseError> {
    if a.len() + b.len() > EXPR_DEGREE_CAP {
        return Err(ParseError::new(pos, "polynomial degree exceeds the parser cap"));
    }
    let mut out = vec![ctx.field.zero(); a.len() + b.len() - 1];
    for (i, ca) in a.iter().enumerate() {
        if ca.is_zero() {
            continue;
        }
        for (j, cb) in b.iter().enumerate() {
            if cb.is_zero() {
                continue;
            }
            out[i + j] = out[i + j].add(&ca.mul(cb));
        }
    }
    Ok(ffp_trim(ctx.field, out))
}

fn eval_ffp(ast: &Ast, ctx: &GermCtx) -> Result<Vec<FFElem>, ParseError> {
    match ast {
        Ast::Int(v) => Ok(vec![ctx.field.from_int(*v)]),
        Ast::Ident(name, pos) => {
            if name == "z" {
                return Ok(vec![ctx.field.zero(), ctx.field.one()]);
            }
            if name == "x" {
                if ctx.field.k() == 1 {
                    return Err(ParseError::new(
                        *pos,
                        "x denotes the extension generator; pass --k > 1",
                    ));
                }
                return Ok(vec![ctx.field.gen_x()]);
            }
            for (bound, v) in ctx.bindings {
                if bound == name {
                    return Ok(vec![v.clone()]);
                }
            }
            Err(ParseError::new(*pos, format!("unknown name `{}`", name)))
        }
        Ast::Neg(a) => Ok(ffp_trim(
            ctx.field,
            eval_ffp(a, ctx)?.iter().map(|c| c.neg()).collect(),
        )),
        Ast::Add(a, b) | Ast::Sub(a, b) => {
            let sub = matches!(ast, Ast::Sub(..));
            let (va, vb) = (eval_ffp(a, ctx)?, eval_ffp(b, ctx)?);
            let mut out = vec![ctx.field.zero(); va.len().max(vb.len())];
            for (i, c) in va.iter().enumerate() {
                out[i] = c.clone();
            }
            for (i, c) in vb.iter().enumerate() {
                out[i] = if sub { out[i].sub(c) } else { out[i].add(c) };
            }
            Ok(ffp_trim(ctx.field, out))
        }
        Ast::Mul(a, b) => {
            let (va, vb) = (eval_ffp(a, ctx)?, eval_ffp(b, ctx)?);
            ffp_mul(ctx, &va, &vb, 0)
        }
        Ast::Div(a, b, pos) => {
            let (va, vb) = (eval_ffp(a, ctx)?, eval_ffp(b, ctx)?);
            if vb.len() != 1 {
                return Err(ParseError::new(*pos, "can only divide by a constant here"));
            }
            let inv = vb[0]
                .inv()
                .map_err(|_| ParseError::new(*pos, "division by zero"))?;
            Ok(ffp_trim(
                ctx.field,
                va.iter().map(|c| c.mul(&inv)).collect(),
            ))
        }
        Ast::Pow(a, e, pos) => {
            let base = eval_ffp(a, ctx)?;
            if *e < 0 {
                if base.len() != 1 {
                    return Err(ParseError::new(
                        *pos,
                        "negative exponents need a constant base here",
                    ));
                }
                let inv = base[0]
                    .inv()
                    .map_err(|_| ParseError::new(*pos, "zero has no negative power"))?;
                return Ok(vec![inv.pow((-e) as u64)]);
            }
            if (base.len() - 1).saturating_mul(*e as usize) > EXPR_DEGREE_CAP {
                return Err(ParseError::new(*pos, "polynomial degree exceeds the parser cap"));
            }
            let mut acc = vec![ctx.field.one()];
            for _ in 0..*e {
                acc = ffp_mul(ctx, &acc, &base, *pos)?;
            }
            Ok(acc)
        }
    }
}

/// Evaluate polynomial text in `z` (ascending coefficients).
pub fn parse_ff_poly(
    text: &str,
    field: &Arc<FieldSpec>,
    bindings: &[(&str, FFElem)],
) -> Result<Vec<FFElem>, ParseError> {
    let ctx = GermCtx { field, bindings };
    eval_ffp(&parse_expr(text)?, &ctx)
}

/// Evaluate an already-parsed expression against fresh bindings. Lets a
/// sweep parse its template once and substitute many multipliers.
pub fn eval_parsed_ff_poly(ast: &Ast, ctx: &GermCtx) -> Result<Vec<FFElem>, ParseError> {
    eval_ffp(ast, ctx)
}

// ---- valued scalar backends ----

#[derive(Clone)]
pub enum Backend {
    Rational { field: Arc<FieldSpec> },
    Laurent { field: Arc<FieldSpec>, cut: i64 },
    Padic { p: u64, prec: u32 },
}

impl Backend {
    pub fn name(&self) -> &'static str {
        match self {
            Backend::Rational { .. } => "rational",
            Backend::Laurent { .. } => "laurent",
            Backend::Padic { .. } => "padic",
        }
    }

    pub fn one(&self) -> ValuedScalar {
        match self {
            Backend::Rational { field } => ValuedScalar::Rational(RatFun::one(field)),
            Backend::Laurent { field, .. } => ValuedScalar::Laurent(LaurentScalar::one(field)),
            Backend::Padic { p, prec } => {
                ValuedScalar::Padic(PadicScalar::new(*p, *prec, 1).expect("validated precision"))
            }
        }
    }

    fn int(&self, v: i64) -> ValuedScalar {
        match self {
            Backend::Rational { field } => ValuedScalar::Rational(RatFun::from_poly(
                FPoly::constant(field.from_int(v)),
            )),
            Backend::Laurent { field, .. } => {
                ValuedScalar::Laurent(LaurentScalar::from_ff(field.from_int(v)))
            }
            Backend::Padic { p, prec } => {
                ValuedScalar::Padic(PadicScalar::new(*p, *prec, v).expect("validated precision"))
            }
        }
    }

    fn laurent_window(&self) -> usize {
        match self {
            Backend::Laurent { cut, .. } => (*cut).max(4) as usize * 2,
            _ => 64,
        }
    }
}

fn scalar_div(a: &ValuedScalar, b: &ValuedScalar, backend: &Backend, pos: usize)
    -> Result<ValuedScalar, ParseError>
{
    match (a, b) {
        (ValuedScalar::Rational(x), ValuedScalar::Rational(y)) => {
            let inv = y
                .inv()
                .map_err(|_| ParseError::new(pos, "division by zero"))?;
            Ok(ValuedScalar::Rational(x.mul(&inv)))
        }
        (ValuedScalar::Laurent(x), ValuedScalar::Laurent(y)) => {
            let q = x
                .div(y, backend.laurent_window())
                .map_err(|e| ParseError::new(pos, format!("{}", e)))?;
            Ok(ValuedScalar::Laurent(q))
        }
        (ValuedScalar::Padic(x), ValuedScalar::Padic(y)) => {
            let inv = y.inv().map_err(|_| {
                ParseError::new(pos, "not invertible over Z_p (positive valuation)")
            })?;
            Ok(ValuedScalar::Padic(x.mul(&inv)))
        }
        _ => Err(ParseError::new(pos, "mixed scalar backends")),
    }
}

fn scalar_pow(
    a: &ValuedScalar,
    e: i64,
    backend: &Backend,
    pos: usize,
) -> Result<ValuedScalar, ParseError> {
    if e >= 0 {
        return Ok(a.pow(e as u64));
    }
    let inv = scalar_div(&backend.one(), a, backend, pos)?;
    Ok(inv.pow((-e) as u64))
}

fn eval_vs(ast: &Ast, backend: &Backend) -> Result<ValuedScalar, ParseError> {
    match ast {
        Ast::Int(v) => Ok(backend.int(*v)),
        Ast::Ident(name, pos) => match (name.as_str(), backend) {
            ("t", Backend::Rational { field }) => {
                Ok(ValuedScalar::Rational(RatFun::from_poly(FPoly::t(field))))
            }
            ("t", Backend::Laurent { field, cut }) => Ok(ValuedScalar::Laurent(
                LaurentScalar::from_coeffs(field, 1, vec![field.one()], Some(*cut)),
            )),
            ("t", Backend::Padic { .. }) => Err(ParseError::new(
                *pos,
                "t is not a p-adic quantity; use p as the uniformizer",
            )),
            ("p", Backend::Padic { p, prec }) => Ok(ValuedScalar::Padic(
                PadicScalar::new(*p, *prec, *p as i64).expect("validated precision"),
            )),
            ("p", _) => Err(ParseError::new(
                *pos,
                "p is only a value in padic: scalars",
            )),
            ("x", Backend::Rational { field }) | ("x", Backend::Laurent { field, .. }) => {
                if field.k() == 1 {
                    return Err(ParseError::new(
                        *pos,
                        "x denotes the extension generator; pass --k > 1",
                    ));
                }
                let g = field.gen_x();
                Ok(match backend {
                    Backend::Rational { .. } => {
                        ValuedScalar::Rational(RatFun::from_poly(FPoly::constant(g)))
                    }
                    _ => ValuedScalar::Laurent(LaurentScalar::from_ff(g)),
                })
            }
            _ => Err(ParseError::new(
                *pos,
                format!("unknown name `{}` in a scalar", name),
            )),
        },
        Ast::Neg(a) => Ok(eval_vs(a, backend)?.neg()),
        Ast::Add(a, b) => Ok(eval_vs(a, backend)?.add(&eval_vs(b, backend)?)),
        Ast::Sub(a, b) => Ok(eval_vs(a, backend)?.sub(&eval_vs(b, backend)?)),
        Ast::Mul(a, b) => Ok(Ring::mul(&eval_vs(a, backend)?, &eval_vs(b, backend)?)),
        Ast::Div(a, b, pos) => {
            let (va, vb) = (eval_vs(a, backend)?, eval_vs(b, backend)?);
            scalar_div(&va, &vb, backend, *pos)
        }
        Ast::Pow(a, e, pos) => scalar_pow(&eval_vs(a, backend)?, *e, backend, *pos),
    }
}

/// How the scalar text asked to be interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Plain,
    Padic,
    Rat,
}

/// Split an optional `padic:` / `rat:` prefix; the returned offset keeps
/// byte positions aligned with the original flag text.
pub fn split_scalar_prefix(text: &str) -> (ScalarKind, &str, usize) {
    if let Some(rest) = text.strip_prefix("padic:") {
        (ScalarKind::Padic, rest, "padic:".len())
    } else if let Some(rest) = text.strip_prefix("rat:") {
        (ScalarKind::Rat, rest, "rat:".len())
    } else {
        (ScalarKind::Plain, text, 0)
    }
}

/// Evaluate scalar text against an already-chosen backend.
pub fn parse_scalar(text: &str, backend: &Backend) -> Result<ValuedScalar, ParseError> {
    let (kind, body, offset) = split_scalar_prefix(text);
    match (kind, backend) {
        (ScalarKind::Plain, _) | (ScalarKind::Padic, Backend::Padic { .. }) => {}
        (ScalarKind::Rat, Backend::Rational { .. }) => {}
        (k, b) => {
            return Err(ParseError::new(
                0,
                format!(
                    "scalar prefix {:?} conflicts with the active {} backend",
                    k,
                    b.name()
                ),
            ))
        }
    }
    eval_vs(&parse_expr_at(body, offset)?, backend)
}

// ---- map polynomials over a valued backend ----

pub struct MapCtx<'a> {
    pub backend: &'a Backend,
    pub lambda: Option<&'a ValuedScalar>,
    pub mu: Option<&'a ValuedScalar>,
}

/// Coefficients indexed by the power of z; `None` marks a coefficient that
/// is zero by construction (so exact-zero even on censored backends).
struct MPoly {
    c: Vec<Option<ValuedScalar>>,
}

impl MPoly {
    fn scalar(s: ValuedScalar) -> MPoly {
        MPoly { c: vec![Some(s)] }
    }

    fn deg(&self) -> usize {
        self.c
            .iter()
            .rposition(|c| c.is_some())
            .unwrap_or(0)
    }

    fn only_scalar(&self) -> Option<&ValuedScalar> {
        if self.deg() == 0 {
            self.c[0].as_ref()
        } else {
            None
        }
    }
}

fn mp_add(a: MPoly, b: MPoly, sub: bool) -> MPoly {
    let mut c: Vec<Option<ValuedScalar>> = vec![None; a.c.len().max(b.c.len())];
    for (i, v) in a.c.into_iter().enumerate() {
        c[i] = v;
    }
    for (i, v) in b.c.into_iter().enumerate() {
        if let Some(v) = v {
            let v = if sub { v.neg() } else { v };
            c[i] = Some(match c[i].take() {
                None => v,
                Some(old) => old.add(&v),
            });
        }
    }
    MPoly { c }
}

fn mp_mul(a: &MPoly, b: &MPoly, pos: usize) -> Result<MPoly, ParseError> {
    if a.c.len() + b.c.len() > EXPR_DEGREE_CAP {
        return Err(ParseError::new(pos, "map degree exceeds the parser cap"));
    }
    let mut c: Vec<Option<ValuedScalar>> = vec![None; a.c.len() + b.c.len() - 1];
    for (i, ca) in a.c.iter().enumerate() {
        let ca = match ca {
            Some(v) => v,
            None => continue,
        };
        for (j, cb) in b.c.iter().enumerate() {
            let cb = match cb {
                Some(v) => v,
                None => continue,
            };
            let prod = Ring::mul(ca, cb);
            c[i + j] = Some(match c[i + j].take() {
                None => prod,
                Some(old) => old.add(&prod),
            });
        }
    }
    Ok(MPoly { c })
}

fn eval_mp(ast: &Ast, ctx: &MapCtx) -> Result<MPoly, ParseError> {
    match ast {
        Ast::Int(v) => Ok(MPoly::scalar(ctx.backend.int(*v))),
        Ast::Ident(name, pos) => match name.as_str() {
            "z" => Ok(MPoly {
                c: vec![None, Some(ctx.backend.one())],
            }),
            "l" | "lambda" => ctx
                .lambda
                .cloned()
                .map(MPoly::scalar)
                .ok_or_else(|| ParseError::new(*pos, "l is unbound; pass --lambda")),
            "mu" => ctx
                .mu
                .cloned()
                .map(MPoly::scalar)
                .ok_or_else(|| ParseError::new(*pos, "mu is unbound; pass --mu")),
            _ => Ok(MPoly::scalar(eval_vs(ast, ctx.backend)?)),
        },
        Ast::Neg(a) => {
            let v = eval_mp(a, ctx)?;
            Ok(MPoly {
                c: v.c.into_iter().map(|o| o.map(|s| s.neg())).collect(),
            })
        }
        Ast::Add(a, b) => Ok(mp_add(eval_mp(a, ctx)?, eval_mp(b, ctx)?, false)),
        Ast::Sub(a, b) => Ok(mp_add(eval_mp(a, ctx)?, eval_mp(b, ctx)?, true)),
        Ast::Mul(a, b) => mp_mul(&eval_mp(a, ctx)?, &eval_mp(b, ctx)?, 0),
        Ast::Div(a, b, pos) => {
            let (va, vb) = (eval_mp(a, ctx)?, eval_mp(b, ctx)?);
            let d = vb
                .only_scalar()
                .ok_or_else(|| ParseError::new(*pos, "can only divide by a scalar here"))?;
            let one = ctx.backend.one();
            let inv = scalar_div(&one, d, ctx.backend, *pos)?;
            Ok(MPoly {
                c: va
                    .c
                    .into_iter()
                    .map(|o| o.map(|s| Ring::mul(&s, &inv)))
                    .collect(),
            })
        }
        Ast::Pow(a, e, pos) => {
            let base = eval_mp(a, ctx)?;
            if let Some(s) = base.only_scalar() {
                return Ok(MPoly::scalar(scalar_pow(s, *e, ctx.backend, *pos)?));
            }
            if *e < 0 {
                return Err(ParseError::new(
                    *pos,
                    "negative exponents need a scalar base",
                ));
            }
            if base.deg().saturating_mul(*e as usize) > EXPR_DEGREE_CAP {
                return Err(ParseError::new(*pos, "map degree exceeds the parser cap"));
            }
            let mut acc = MPoly::scalar(ctx.backend.one());
            for _ in 0..*e {
                acc = mp_mul(&acc, &base, *pos)?;
            }
            Ok(acc)
        }
    }
}

/// Evaluate map text in `z` over the chosen valued backend. Structural
/// zeros (powers of z the expression never touches) come out as exact
/// zeros even on censored backends.
pub fn parse_map(text: &str, ctx: &MapCtx) -> Result<OKPoly, ParseError> {
    let m = eval_mp(&parse_expr(text)?, ctx)?;
    let coeffs: Vec<ValuedScalar> = m
        .c
        .into_iter()
        .map(|o| o.unwrap_or_else(|| ctx.backend.one().zero_like()))
        .collect();
    Ok(OKPoly::new(coeffs))
}
