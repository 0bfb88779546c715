//! Text format for gate definitions.
//!
//! ```text
//! # comment
//! gate <name> (inputs: id:role, ...; challenges: name, ...) {
//!     <poly>
//! }
//! ```
//!
//! `<poly>` is an expression over inputs, challenges and integer literals
//! (decimal or `0x` hex) using `+ - * ^` and parentheses. It is expanded into
//! a flat sum of products with like terms merged, in first-appearance order.
//! A document without a `gate` header (e.g. `f = a*b`) is accepted too; every
//! identifier then becomes a witness input.

use indexmap::IndexMap;

use super::{Coeff, CompositePoly, GateError, MleRef, Role, Term};
use crate::field::Fr;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(Fr),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, GateError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            let hex = c == '0' && chars.get(i + 1).is_some_and(|&x| x == 'x' || x == 'X');
            let (radix, digits_from) = if hex { (16u64, i + 2) } else { (10u64, i) };
            i = digits_from;
            let mut v = Fr::ZERO;
            let base = Fr::from(radix);
            while i < chars.len() && chars[i].is_digit(radix as u32) {
                v = v * base + Fr::from(chars[i].to_digit(radix as u32).unwrap() as u64);
                i += 1;
            }
            if i == digits_from {
                return Err(GateError::Parse {
                    line: tl,
                    col: tc,
                    msg: "empty hex literal".into(),
                });
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Num(v),
                line: tl,
                col: tc,
            });
            continue;
        }
        if "(){}:;,+-*^=".contains(c) {
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
            i += 1;
            col += 1;
            continue;
        }
        return Err(GateError::Parse {
            line: tl,
            col: tc,
            msg: format!("unexpected character `{c}`"),
        });
    }
    Ok(out)
}

/// Expanded polynomial: (sorted factors, sorted challenges) -> coefficient.
type Expansion = IndexMap<(Vec<usize>, Vec<usize>), Fr>;

fn constant(c: Fr) -> Expansion {
    let mut e = Expansion::new();
    e.insert((Vec::new(), Vec::new()), c);
    e
}

fn add_into(acc: &mut Expansion, other: Expansion, sign: Fr) {
    for (k, v) in other {
        *acc.entry(k).or_insert(Fr::ZERO) += sign * v;
    }
}

fn mul(a: &Expansion, b: &Expansion) -> Expansion {
    let mut out = Expansion::new();
    for ((fa, ca), va) in a {
        for ((fb, cb), vb) in b {
            let mut f: Vec<usize> = fa.iter().chain(fb).copied().collect();
            f.sort_unstable();
            let mut c: Vec<usize> = ca.iter().chain(cb).copied().collect();
            c.sort_unstable();
            *out.entry((f, c)).or_insert(Fr::ZERO) += *va * *vb;
        }
    }
    out
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    inputs: Vec<MleRef>,
    challenges: Vec<String>,
    /// Bare documents declare inputs implicitly.
    implicit: bool,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, GateError> {
        let (line, col) = self.here();
        Err(GateError::Parse {
            line,
            col,
            msg: msg.into(),
        })
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), GateError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn ident(&mut self) -> Result<String, GateError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), GateError> {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => self.err(format!("expected `{kw}`")),
        }
    }

    fn declare_input(&mut self, id: String, role: Role) -> Result<(), GateError> {
        if self.inputs.iter().any(|m| m.id == id) || self.challenges.contains(&id) {
            return Err(GateError::DuplicateInput(id));
        }
        self.inputs.push(MleRef { id, role });
        Ok(())
    }

    fn header(&mut self) -> Result<String, GateError> {
        self.keyword("gate")?;
        let name = self.ident()?;
        self.expect_sym('(')?;
        self.keyword("inputs")?;
        self.expect_sym(':')?;
        loop {
            let id = self.ident()?;
            self.expect_sym(':')?;
            let role_name = self.ident()?;
            let Some(role) = Role::parse(&role_name) else {
                self.pos -= 1;
                return self.err(format!("unknown role `{role_name}`"));
            };
            self.declare_input(id, role)?;
            if !self.eat_sym(',') {
                break;
            }
        }
        if self.eat_sym(';') {
            self.keyword("challenges")?;
            self.expect_sym(':')?;
            loop {
                let c = self.ident()?;
                if self.challenges.contains(&c) || self.inputs.iter().any(|m| m.id == c) {
                    return Err(GateError::DuplicateInput(c));
                }
                self.challenges.push(c);
                if !self.eat_sym(',') {
                    break;
                }
            }
        }
        self.expect_sym(')')?;
        Ok(name)
    }

    fn expr(&mut self) -> Result<Expansion, GateError> {
        let mut acc = Expansion::new();
        let mut sign = Fr::ONE;
        if self.eat_sym('-') {
            sign = -Fr::ONE;
        } else {
            self.eat_sym('+');
        }
        loop {
            let t = self.product()?;
            add_into(&mut acc, t, sign);
            if self.eat_sym('+') {
                sign = Fr::ONE;
            } else if self.eat_sym('-') {
                sign = -Fr::ONE;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<Expansion, GateError> {
        let mut acc = self.power()?;
        while self.eat_sym('*') {
            let rhs = self.power()?;
            acc = mul(&acc, &rhs);
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<Expansion, GateError> {
        let base = self.atom()?;
        if !self.eat_sym('^') {
            return Ok(base);
        }
        let k = match self.peek() {
            Some(Tok::Num(v)) => match v.as_u64() {
                Some(k) if k <= 64 => k,
                _ => return self.err("exponent must be at most 64"),
            },
            _ => return self.err("expected integer exponent"),
        };
        self.pos += 1;
        let mut acc = constant(Fr::ONE);
        for _ in 0..k {
            acc = mul(&acc, &base);
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Expansion, GateError> {
        let Some(tok) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of input");
        };
        match tok.tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(constant(v))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                let mut e = Expansion::new();
                if let Some(i) = self.inputs.iter().position(|m| m.id == name) {
                    e.insert((vec![i], Vec::new()), Fr::ONE);
                } else if let Some(c) = self.challenges.iter().position(|c| *c == name) {
                    e.insert((Vec::new(), vec![c]), Fr::ONE);
                } else if self.implicit {
                    self.inputs.push(MleRef {
                        id: name,
                        role: Role::Witness,
                    });
                    e.insert((vec![self.inputs.len() - 1], Vec::new()), Fr::ONE);
                } else {
                    return Err(GateError::UnknownSymbol {
                        name,
                        line: tok.line,
                        col: tok.col,
                    });
                }
                Ok(e)
            }
            Tok::Sym(c) => self.err(format!("unexpected `{c}`")),
        }
    }

    /// Optional `name =` prefix of a body.
    fn skip_lhs(&mut self) {
        if let (Some(Tok::Ident(_)), Some(Tok::Sym('='))) =
            (self.peek(), self.toks.get(self.pos + 1).map(|t| &t.tok))
        {
            self.pos += 2;
        }
    }

    fn finish(&mut self, name: String, e: Expansion) -> CompositePoly {
        let terms = e
            .into_iter()
            .filter(|(_, v)| !v.is_zero())
            .map(|((factors, challenges), constant)| Term {
                coeff: Coeff {
                    constant,
                    challenges,
                },
                factors,
            })
            .collect();
        CompositePoly {
            name,
            inputs: std::mem::take(&mut self.inputs),
            challenges: std::mem::take(&mut self.challenges),
            terms,
        }
    }

    fn gate(&mut self) -> Result<CompositePoly, GateError> {
        let name = self.header()?;
        self.expect_sym('{')?;
        self.skip_lhs();
        let e = self.expr()?;
        self.expect_sym('}')?;
        Ok(self.finish(name, e))
    }

    fn bare(&mut self) -> Result<CompositePoly, GateError> {
        self.implicit = true;
        let name = match (self.peek(), self.toks.get(self.pos + 1).map(|t| &t.tok)) {
            (Some(Tok::Ident(n)), Some(Tok::Sym('='))) => n.clone(),
            _ => "f".to_string(),
        };
        self.skip_lhs();
        let e = self.expr()?;
        Ok(self.finish(name, e))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }
}

fn parser(text: &str) -> Result<Parser, GateError> {
    Ok(Parser {
        toks: lex(text)?,
        pos: 0,
        inputs: Vec::new(),
        challenges: Vec::new(),
        implicit: false,
    })
}

/// Parses a single gate document.
pub fn parse_gate(text: &str) -> Result<CompositePoly, GateError> {
    let mut p = parser(text)?;
    let g = if matches!(p.peek(), Some(Tok::Ident(s)) if s == "gate") {
        p.gate()?
    } else {
        p.bare()?
    };
    if !p.at_end() {
        return p.err("trailing input after gate");
    }
    Ok(g)
}

/// Parses a file holding several `gate` blocks.
pub fn parse_gates(text: &str) -> Result<Vec<CompositePoly>, GateError> {
    let mut p = parser(text)?;
    let mut out = Vec::new();
    while !p.at_end() {
        out.push(p.gate()?);
    }
    Ok(out)
}
