//! Parser for group-ring expressions such as `2 - t - t^-1` or `(1-t)*(1-t)^*`.
//!
//! ```text
//! expr    := ['+'|'-'] term (('+'|'-') term)*
//! term    := power (['*'] power)*          juxtaposition multiplies
//! power   := atom ('^' (int | '-' int | '*'))*
//! atom    := number | 'i' | generator | '(' expr ')'
//! ```
//!
//! Generators depend on the model: `t` (rank 1) or `t1..td` for lattices,
//! `x`, `y`, `c` for the Heisenberg group, `g0..g{n-1}` for a finite group
//! given by its table. Negative powers apply to monomials only.

use lcmg_spectra::group::Group;
use lcmg_spectra::{Complex64, Error, GroupElement, GroupModel, Result, RingElement};

/// Largest exponent accepted by `^n`.
pub const MAX_EXPONENT: usize = 64;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        let start = i;
        let tok = match ch {
            ' ' | '\t' | '\n' => {
                i += 1;
                continue;
            }
            '+' => Tok::Plus,
            '-' | '\u{2212}' => Tok::Minus,
            '*' | '·' => Tok::Star,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if c.is_ascii_digit() || c == '.' => {
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                // exponent part, only when followed by digits
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    if j < chars.len() && chars[j].is_ascii_digit() {
                        while j < chars.len() && chars[j].is_ascii_digit() {
                            j += 1;
                        }
                        i = j;
                    }
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| err(start, &format!("bad number {text:?}")))?;
                out.push((start, Tok::Num(v)));
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                out.push((start, Tok::Ident(chars[start..i].iter().collect())));
                continue;
            }
            other => return Err(err(start, &format!("unexpected character {other:?}"))),
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

fn err(pos: usize, msg: &str) -> Error {
    Error::Config(format!("expression error at offset {pos}: {msg}"))
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    model: &'a GroupModel,
}

type Elem = RingElement<GroupElement>;

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.0)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.1.clone());
        self.pos += 1;
        t
    }

    fn scalar(&self, c: Complex64) -> Elem {
        RingElement::monomial(self.model.identity(), c)
    }

    fn expr(&mut self) -> Result<Elem> {
        let mut acc = match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                self.term()?.scale(Complex64::new(-1.0, 0.0))
            }
            Some(Tok::Plus) => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Elem> {
        let mut acc = self.power()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    let rhs = self.power()?;
                    acc = acc.multiply(&rhs, self.model)?;
                }
                Some(Tok::Num(_) | Tok::Ident(_) | Tok::LParen) => {
                    let rhs = self.power()?;
                    acc = acc.multiply(&rhs, self.model)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn power(&mut self) -> Result<Elem> {
        let mut base = self.atom()?;
        while self.peek() == Some(&Tok::Caret) {
            self.bump();
            let at = self.offset();
            base = match self.bump() {
                Some(Tok::Star) => base.involution(self.model)?,
                Some(Tok::Num(n)) => base.power(self.exponent(n, at)?, self.model)?,
                Some(Tok::Minus) => {
                    let at = self.offset();
                    let Some(Tok::Num(n)) = self.bump() else {
                        return Err(err(at, "expected an integer after '^-'"));
                    };
                    let k = self.exponent(n, at)?;
                    self.inverse(&base, at)?.power(k, self.model)?
                }
                _ => return Err(err(at, "expected an integer, '-integer' or '*' after '^'")),
            };
        }
        Ok(base)
    }

    fn exponent(&self, n: f64, at: usize) -> Result<usize> {
        if n.fract() != 0.0 || n < 0.0 || n > MAX_EXPONENT as f64 {
            return Err(err(at, &format!("exponent must be an integer in 0..={MAX_EXPONENT}")));
        }
        Ok(n as usize)
    }

    fn inverse(&self, base: &Elem, at: usize) -> Result<Elem> {
        let mut terms = base.terms();
        match (terms.next(), terms.next()) {
            (Some((g, c)), None) => Ok(RingElement::monomial(self.model.inverse(g)?, c.inv())),
            _ => Err(err(at, "negative powers apply to monomials only")),
        }
    }

    fn atom(&mut self) -> Result<Elem> {
        let at = self.offset();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(self.scalar(Complex64::new(v, 0.0))),
            Some(Tok::Ident(name)) => self.generator(&name, at),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(inner),
                    _ => Err(err(self.offset(), "expected ')'")),
                }
            }
            Some(_) => Err(err(at, "expected a number, generator or '('")),
            None => Err(err(at, "unexpected end of expression")),
        }
    }

    fn generator(&self, name: &str, at: usize) -> Result<Elem> {
        if name == "i" {
            return Ok(self.scalar(Complex64::new(0.0, 1.0)));
        }
        let unknown = || err(at, &format!("unknown generator {name:?} for model {}", self.model.name()));
        let g = match self.model {
            GroupModel::Lattice { dim } => {
                let axis = match name.strip_prefix('t') {
                    Some("") if *dim == 1 => 0,
                    Some(rest) => match rest.parse::<usize>() {
                        Ok(k) if (1..=*dim).contains(&k) && !rest.starts_with('0') => k - 1,
                        _ => return Err(unknown()),
                    },
                    None => return Err(unknown()),
                };
                let mut v = vec![0i64; *dim];
                v[axis] = 1;
                self.model.element_i64(&v)?
            }
            GroupModel::Heisenberg => match name {
                "x" => self.model.element_i64(&[1, 0, 0])?,
                "y" => self.model.element_i64(&[0, 1, 0])?,
                "c" => self.model.element_i64(&[0, 0, 1])?,
                _ => return Err(unknown()),
            },
            GroupModel::Finite(_) => {
                let idx = name
                    .strip_prefix('g')
                    .and_then(|r| r.parse::<i64>().ok())
                    .ok_or_else(unknown)?;
                self.model.element_i64(&[idx]).map_err(|_| unknown())?
            }
        };
        Ok(RingElement::monomial(g, Complex64::new(1.0, 0.0)))
    }
}

/// Parses `src` into an element of the group ring of `model`.
pub fn parse(src: &str, model: &GroupModel) -> Result<Elem> {
    let toks = lex(src)?;
    if toks.is_empty() {
        return Err(err(0, "empty expression"));
    }
    let mut p = Parser { toks, pos: 0, end: src.chars().count(), model };
    let value = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.offset(), "unexpected trailing input"));
    }
    Ok(value)
}
