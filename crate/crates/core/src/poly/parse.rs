//! Text form of polynomials: `3/2*x^2*y - z`, `(x + eps*y)^2`.

use num_bigint::BigInt;

use super::monomial::Monomial;
use super::param::{Param, ParamPoly};
use super::polynomial::Polynomial;
use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Op(char),
}

fn tokenize(s: &str) -> Result<Vec<(usize, Tok)>> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push((start, Tok::Num(text.parse().expect("digits"))));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(perr(i, format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn perr(pos: usize, message: String) -> Error {
    Error::Parse {
        line: 1,
        column: pos + 1,
        message,
    }
}

struct Parser<'a, P: Param> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    names: &'a [String],
    end: usize,
    _p: std::marker::PhantomData<P>,
}

impl<P: Param> Parser<'_, P> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn expr(&mut self) -> Result<ParamPoly<P>> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<ParamPoly<P>> {
        let mut acc = self.factor()?;
        while let Some(Tok::Op('*')) = self.peek() {
            self.pos += 1;
            let rhs = self.factor()?;
            acc = &acc * &rhs;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<ParamPoly<P>> {
        if let Some(Tok::Op('-')) = self.peek() {
            self.pos += 1;
            return Ok(-&self.factor()?);
        }
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let at = self.here();
            match self.peek().cloned() {
                Some(Tok::Num(n)) => {
                    self.pos += 1;
                    let e: u32 = n.try_into().map_err(|_| perr(at, "exponent too large".into()))?;
                    let mut acc = ParamPoly::constant(Polynomial::one());
                    for _ in 0..e {
                        acc = &acc * &base;
                    }
                    return Ok(acc);
                }
                _ => return Err(perr(at, "expected integer exponent".into())),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ParamPoly<P>> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                let mut r = Rational::from_integer(n);
                if let (Some(Tok::Op('/')), Some(Tok::Num(d))) =
                    (self.toks.get(self.pos).map(|t| &t.1), self.toks.get(self.pos + 1).map(|t| &t.1))
                {
                    if *d == BigInt::from(0) {
                        return Err(perr(self.here(), "division by zero".into()));
                    }
                    r /= Rational::from_integer(d.clone());
                    self.pos += 2;
                }
                Ok(ParamPoly::constant(Polynomial::constant(r)))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if name == P::NAME {
                    return Ok(ParamPoly::monomial(1, Polynomial::one()));
                }
                match self.names.iter().position(|n| *n == name) {
                    Some(i) => Ok(ParamPoly::constant(Polynomial::term(Monomial::var(i), Rational::from_integer(1.into())))),
                    None => Err(perr(at, format!("unknown variable {name:?}"))),
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                match self.peek() {
                    Some(Tok::Op(')')) => {
                        self.pos += 1;
                        Ok(e)
                    }
                    _ => Err(perr(self.here(), "expected ')'".into())),
                }
            }
            Some(t) => Err(perr(at, format!("unexpected token {t:?}"))),
            None => Err(perr(at, "unexpected end of input".into())),
        }
    }
}

/// Parses a polynomial that may contain the formal parameter `P::NAME`.
pub fn parse_param<P: Param>(s: &str, names: &[String]) -> Result<ParamPoly<P>> {
    let toks = tokenize(s)?;
    let mut p = Parser::<P> {
        toks,
        pos: 0,
        names,
        end: s.chars().count(),
        _p: std::marker::PhantomData,
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(perr(p.here(), "trailing input".into()));
    }
    Ok(e)
}

/// Parses a parameter-free polynomial in the named variables.
pub fn parse_polynomial(s: &str, names: &[String]) -> Result<Polynomial> {
    // `eps` is not a variable here; any occurrence is rejected below
    let e = parse_param::<super::param::Eps>(s, names)?;
    if e.param_degree().unwrap_or(0) > 0 {
        return Err(perr(0, "unexpected formal parameter 'eps'".into()));
    }
    Ok(e.coeff(0))
}
