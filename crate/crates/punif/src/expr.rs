//! Gate expressions.
//!
//! ```text
//! product := tensor ('*' tensor)*
//! tensor  := postfix (('⊗' | 'x') postfix)*
//! postfix := atom '\''*
//! atom    := NAME | 'W' '[' ints '|' ints ']' | 'exp' '(' 'i' ['*' | '·'] angle ')' | '(' product ')'
//! angle   := arithmetic over numbers and 'pi' / 'π' with + - * / · and parentheses
//! ```
//!
//! Names are `I X Y Z H S T CZ CNOT`. For `d > 2` only `I`, `X` (shift),
//! `Z` (clock) and `W[..]` are defined. `I` and `exp(i·θ)` take the size of
//! whatever they are multiplied with; alone they act on `--n` qudits.
//! Products are matrix products in reading order, so `H*T` applies `T` first.

use std::path::PathBuf;

use num_complex::Complex64;
use punif_core::galois::{Prime, Register, SympVector};
use punif_core::pauligroup::weyl_unitary;
use punif_core::{gates, DenseOperator, UnitaryHandle};

use crate::error::{CliError, Result};
use crate::matrix_json::read_unitary;

/// Where a gate comes from, plus the register it is meant for.
#[derive(Clone, Debug, PartialEq)]
pub enum GateSource {
    Expr(String),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateSpec {
    pub source: GateSource,
    pub n: Option<usize>,
    pub d: u32,
}

impl GateSpec {
    pub fn expr(text: impl Into<String>) -> Self {
        GateSpec { source: GateSource::Expr(text.into()), n: None, d: 2 }
    }

    pub fn label(&self) -> String {
        match &self.source {
            GateSource::Expr(e) => e.clone(),
            GateSource::File(p) => p.display().to_string(),
        }
    }

    pub fn resolve(&self, tolerance: f64) -> Result<UnitaryHandle> {
        let u = match &self.source {
            GateSource::Expr(text) => parse_gate(text, self.d, self.n)?,
            GateSource::File(path) => {
                let u = read_unitary(path, tolerance)?;
                if u.register().d.get() != self.d {
                    return Err(CliError::Matrix(format!(
                        "file is for d = {}, but d = {} was requested",
                        u.register().d,
                        self.d
                    )));
                }
                u
            }
        };
        if let Some(n) = self.n {
            if u.register().n != n {
                return Err(CliError::Parse(format!(
                    "gate acts on {} qudits, but n = {n} was requested",
                    u.register().n
                )));
            }
        }
        UnitaryHandle::with_tolerance(u.into_operator(), tolerance).map_err(|e| CliError::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Name(String),
    Word(String),
    Num(f64),
    Pi,
    Star,
    Dot,
    Tensor,
    Adjoint,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Bar,
    Comma,
    Plus,
    Minus,
    Slash,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let single = match c {
            '*' => Some(Tok::Star),
            '·' => Some(Tok::Dot),
            '⊗' => Some(Tok::Tensor),
            '\'' => Some(Tok::Adjoint),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            '|' => Some(Tok::Bar),
            ',' => Some(Tok::Comma),
            '+' => Some(Tok::Plus),
            '-' | '−' => Some(Tok::Minus),
            '/' => Some(Tok::Slash),
            'π' => Some(Tok::Pi),
            _ => None,
        };
        if let Some(t) = single {
            out.push((pos, t));
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let run = |pred: fn(char) -> bool| {
            chars[i..].iter().take_while(|(_, c)| pred(*c)).map(|(_, c)| c).collect::<String>()
        };
        if c.is_ascii_uppercase() {
            let s = run(|c| c.is_ascii_uppercase());
            i += s.chars().count();
            out.push((pos, Tok::Name(s)));
        } else if c.is_ascii_lowercase() {
            let s = run(|c| c.is_ascii_lowercase());
            i += s.chars().count();
            out.push((
                pos,
                match s.as_str() {
                    "x" => Tok::Tensor,
                    "pi" => Tok::Pi,
                    _ => Tok::Word(s),
                },
            ));
        } else if c.is_ascii_digit() || c == '.' {
            let s = run(|c| c.is_ascii_digit() || c == '.' || c == 'e');
            i += s.chars().count();
            let v = s.parse::<f64>().map_err(|_| CliError::Parse(format!("bad number {s:?} at {pos}")))?;
            out.push((pos, Tok::Num(v)));
        } else {
            return Err(CliError::Parse(format!("unexpected character {c:?} at {pos}")));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Named(String),
    Weyl(Vec<i64>, Vec<i64>),
    Phase(f64),
    Adjoint(Box<Node>),
    Tensor(Box<Node>, Box<Node>),
    Product(Box<Node>, Box<Node>),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map_or(self.len, |(p, _)| *p)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.error(&format!("expected {what}")))
        }
    }

    fn error(&self, msg: &str) -> CliError {
        match self.peek() {
            Some(t) => CliError::Parse(format!("{msg} at position {}, found {t:?}", self.at())),
            None => CliError::Parse(format!("{msg} at end of input")),
        }
    }

    fn product(&mut self) -> Result<Node> {
        let mut lhs = self.tensor()?;
        while self.eat(&Tok::Star) || self.eat(&Tok::Dot) {
            let rhs = self.tensor()?;
            lhs = Node::Product(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn tensor(&mut self) -> Result<Node> {
        let mut lhs = self.postfix()?;
        while self.eat(&Tok::Tensor) {
            let rhs = self.postfix()?;
            lhs = Node::Tensor(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Node> {
        let mut node = self.atom()?;
        while self.eat(&Tok::Adjoint) {
            node = Node::Adjoint(Box::new(node));
        }
        Ok(node)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Tok::LParen) => {
                let inner = self.product()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Name(name)) if name == "W" => {
                self.expect(Tok::LBrack, "'[' after W")?;
                let u = self.ints()?;
                self.expect(Tok::Bar, "'|' between the Z and X halves of a Weyl label")?;
                let v = self.ints()?;
                self.expect(Tok::RBrack, "']'")?;
                if u.len() != v.len() || u.is_empty() {
                    return Err(CliError::Parse(format!("Weyl label halves have lengths {} and {}", u.len(), v.len())));
                }
                Ok(Node::Weyl(u, v))
            }
            Some(Tok::Name(name)) => Ok(Node::Named(name)),
            Some(Tok::Word(w)) if w == "exp" => {
                self.expect(Tok::LParen, "'(' after exp")?;
                if self.next() != Some(Tok::Word("i".into())) {
                    self.pos -= 1;
                    return Err(self.error("expected 'i' in exp(i·θ)"));
                }
                let _ = self.eat(&Tok::Star) || self.eat(&Tok::Dot);
                let theta = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(Node::Phase(theta))
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a gate"))
            }
        }
    }

    fn ints(&mut self) -> Result<Vec<i64>> {
        let mut out = Vec::new();
        loop {
            let neg = self.eat(&Tok::Minus);
            match self.next() {
                Some(Tok::Num(v)) if v.fract() == 0.0 => out.push(if neg { -(v as i64) } else { v as i64 }),
                _ => {
                    self.pos -= 1;
                    return Err(self.error("expected an integer"));
                }
            }
            if !self.eat(&Tok::Comma) {
                return Ok(out);
            }
        }
    }

    fn sum(&mut self) -> Result<f64> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                acc += self.term()?;
            } else if self.eat(&Tok::Minus) {
                acc -= self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(&Tok::Star) || self.eat(&Tok::Dot) {
                acc *= self.unary()?;
            } else if self.eat(&Tok::Slash) {
                acc /= self.unary()?;
            } else if matches!(self.peek(), Some(Tok::Pi | Tok::LParen)) {
                // implicit product, as in `3pi` or `2(pi/3)`
                acc *= self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat(&Tok::Minus) {
            return Ok(-self.unary()?);
        }
        match self.next() {
            Some(Tok::Num(v)) => Ok(v),
            Some(Tok::Pi) => Ok(std::f64::consts::PI),
            Some(Tok::LParen) => {
                let v = self.sum()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(v)
            }
            _ => {
                self.pos -= 1;
                Err(self.error("expected a number or pi"))
            }
        }
    }
}

fn parse(src: &str) -> Result<Node> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, len: src.len() };
    let node = p.product()?;
    if p.peek().is_some() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(node)
}

fn named_size(name: &str) -> Result<Option<usize>> {
    match name {
        "I" => Ok(None),
        "X" | "Y" | "Z" | "H" | "S" | "T" => Ok(Some(1)),
        "CZ" | "CNOT" => Ok(Some(2)),
        _ => Err(CliError::Parse(format!("unknown gate {name:?}"))),
    }
}

// Number of qudits, or None for sizeless factors (I and global phases).
fn size(node: &Node) -> Result<Option<usize>> {
    Ok(match node {
        Node::Named(name) => named_size(name)?,
        Node::Weyl(u, _) => Some(u.len()),
        Node::Phase(_) => None,
        Node::Adjoint(a) => size(a)?,
        Node::Tensor(a, b) => Some(size(a)?.unwrap_or(1) + size(b)?.unwrap_or(1)),
        Node::Product(a, b) => match (size(a)?, size(b)?) {
            (Some(x), Some(y)) if x != y => {
                return Err(CliError::Parse(format!("product of gates on {x} and {y} qudits")))
            }
            (x, y) => x.or(y),
        },
    })
}

fn eval(node: &Node, reg: Register) -> Result<DenseOperator> {
    let d = reg.d.get();
    Ok(match node {
        Node::Named(name) => {
            let u = match (name.as_str(), d) {
                ("I", _) => return Ok(DenseOperator::identity(reg)),
                ("X", 2) => gates::x(),
                ("Y", 2) => gates::y(),
                ("Z", 2) => gates::z(),
                ("H", 2) => gates::h(),
                ("S", 2) => gates::s(),
                ("T", 2) => gates::t(),
                ("CZ", 2) => gates::cz(),
                ("CNOT", 2) => gates::cnot(),
                ("X", _) => gates::qudit_x(reg.d),
                ("Z", _) => gates::qudit_z(reg.d),
                (other, _) => return Err(CliError::Parse(format!("gate {other} is only defined for d = 2"))),
            };
            u.into_operator()
        }
        Node::Weyl(u, v) => weyl_unitary(&SympVector::new(d, u, v)?).into_operator(),
        Node::Phase(theta) => DenseOperator::identity(reg).scalar_mul(Complex64::from_polar(1.0, *theta)),
        Node::Adjoint(a) => eval(a, reg)?.adjoint(),
        Node::Tensor(a, b) => {
            let left = Register { n: size(a)?.unwrap_or(1), d: reg.d };
            let right = Register { n: size(b)?.unwrap_or(1), d: reg.d };
            eval(a, left)?.tensor(&eval(b, right)?)?
        }
        Node::Product(a, b) => eval(a, reg)?.matmul(&eval(b, reg)?)?,
    })
}

/// Parses a gate expression into a unitary on qudits of dimension `d`.
/// `n` sizes expressions that are only identities and phases; otherwise
/// it must agree with the expression.
pub fn parse_gate(src: &str, d: u32, n: Option<usize>) -> Result<UnitaryHandle> {
    let prime = Prime::new(d).map_err(|e| CliError::Parse(e.to_string()))?;
    let node = parse(src)?;
    let inferred = size(&node)?;
    let n = match (inferred, n) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Parse(format!("expression acts on {a} qudits, but n = {b} was requested")))
        }
        (a, b) => a.or(b).unwrap_or(1),
    };
    let reg = Register::new(n, prime.get())?;
    let op = eval(&node, reg)?;
    UnitaryHandle::new(op).map_err(|e| CliError::Parse(e.to_string()))
}
