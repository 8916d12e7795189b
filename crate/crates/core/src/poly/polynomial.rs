use std::collections::BTreeMap;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::monomial::Monomial;
use crate::error::{Error, Result};
use crate::rational::{format_rational, rat, Rational};

/// A polynomial over the rationals in commuting variables indexed by `usize`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(Monomial::one(), c)
    }

    pub fn var(i: usize) -> Self {
        Self::term(Monomial::var(i), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero();
        p.add_term(m, c);
        p
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Monomial, Rational)> {
        self.terms.into_iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant_term(&self) -> Rational {
        self.coeff(&Monomial::one())
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.terms.keys().filter_map(|m| m.max_var()).max()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v.clone())).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn check_degree(&self, max: u32) -> Result<()> {
        match self.degree() {
            Some(d) if d > max => Err(Error::DegreeOverflow { degree: d, max }),
            _ => Ok(()),
        }
    }

    pub fn check_vars(&self, nvars: usize) -> Result<()> {
        match self.max_var() {
            Some(i) if i >= nvars => Err(Error::VariableOutOfRange { index: i, nvars }),
            _ => Ok(()),
        }
    }

    /// Partial derivative with respect to `x_i`.
    pub fn partial(&self, i: usize) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e > 0 {
                out.add_term(m.div_var(i).expect("exponent > 0"), c * rat(e as i64));
            }
        }
        out
    }

    /// Iterated partial derivative by a monomial of derivative symbols.
    pub fn partial_monomial(&self, d: &Monomial) -> Polynomial {
        let mut p = self.clone();
        for (i, e) in d.iter() {
            for _ in 0..e {
                p = p.partial(i);
                if p.is_zero() {
                    return p;
                }
            }
        }
        p
    }

    /// Evaluation homomorphism on the assigned variables, identity elsewhere.
    pub fn substitute(&self, assignment: &BTreeMap<usize, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut coef = c.clone();
            let mut rest = Vec::new();
            for (i, e) in m.iter() {
                match assignment.get(&i) {
                    Some(v) => coef *= num_traits::pow(v.clone(), e as usize),
                    None => rest.push((i, e)),
                }
            }
            out.add_term(Monomial::from_exponents(rest), coef);
        }
        out
    }

    /// Substitutes polynomials for variables.
    pub fn substitute_poly(&self, assignment: &BTreeMap<usize, Polynomial>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut acc = Polynomial::constant(c.clone());
            let mut rest = Vec::new();
            for (i, e) in m.iter() {
                match assignment.get(&i) {
                    Some(p) => acc = &acc * &p.pow(e),
                    None => rest.push((i, e)),
                }
            }
            out += &acc.mul_monomial(&Monomial::from_exponents(rest));
        }
        out
    }

    pub fn map_vars(&self, f: impl Fn(usize) -> usize) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.map_vars(&f), c.clone())))
    }

    /// Homogeneous components `(degree, part)` in increasing degree.
    pub fn homogeneous_components(&self) -> Vec<(u32, Polynomial)> {
        let mut by_deg: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            by_deg.entry(m.degree()).or_default().add_term(m.clone(), c.clone());
        }
        by_deg.into_iter().collect()
    }

    pub fn homogeneous_part(&self, d: u32) -> Polynomial {
        Polynomial::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Keeps terms of degree `<= d`.
    pub fn truncate(&self, d: u32) -> Polynomial {
        Polynomial::from_terms(
            self.terms
                .iter()
                .filter(|(m, _)| m.degree() <= d)
                .map(|(m, c)| (m.clone(), c.clone())),
        )
    }

    /// Printed highest term first, e.g. `3/2*x^2*y - z`.
    pub fn format(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c < &Rational::zero();
            let a = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            if m.is_one() {
                s.push_str(&format_rational(&a));
            } else if a.is_one() {
                s.push_str(&m.format(names));
            } else {
                s.push_str(&format!("{}*{}", format_rational(&a), m.format(names)));
            }
        }
        s
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl<'a> Add<&'a Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self += &rhs;
        self
    }
}

impl<'a> AddAssign<&'a Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &'a Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> SubAssign<&'a Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &'a Polynomial) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl<'a> Sub<&'a Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(mut self, rhs: Polynomial) -> Polynomial {
        self -= &rhs;
        self
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl<'a> Mul<&'a Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (a, x) in &self.terms {
            for (b, y) in &rhs.terms {
                out.add_term(a.mul(b), x * y);
            }
        }
        out
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn names() -> Vec<String> {
        ["x", "y", "z"].iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn homogeneous_components_examples() {
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let f = &(&x * &x) + &y;
        let comps = f.homogeneous_components();
        assert_eq!(comps, vec![(1, y.clone()), (2, &x * &x)]);
        assert!(Polynomial::zero().homogeneous_components().is_empty());

        // (x+1)^3: binomial oracle 1,3,3,1
        let p = (&x + &Polynomial::one()).pow(3);
        let comps = p.homogeneous_components();
        let binom = [1, 3, 3, 1];
        assert_eq!(comps.len(), 4);
        for (d, part) in comps {
            assert_eq!(part, Polynomial::term(Monomial::var_pow(0, d), rat(binom[d as usize])));
        }
    }

    #[test]
    fn substitute_examples() {
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let z = Polynomial::var(2);
        let a: BTreeMap<usize, Rational> = [(2, rat(-1))].into_iter().collect();
        assert_eq!((&x * &z).substitute(&a), -&x);
        assert_eq!(x.pow(3).substitute(&a), x.pow(3));
        let b: BTreeMap<usize, Rational> = [(1, rat(0)), (2, rat(-1))].into_iter().collect();
        assert_eq!((&y + &z).pow(2).substitute(&b), Polynomial::one());
    }

    #[test]
    fn formatting() {
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let z = Polynomial::var(2);
        let p = &(&(&x * &x) * &y).scale(&ratio(3, 2)) - &z;
        assert_eq!(p.format(&names()), "3/2*x^2*y - z");
        assert_eq!((-&z).format(&names()), "-z");
        assert_eq!(Polynomial::zero().format(&names()), "0");
    }

    #[test]
    fn derivative() {
        let x = Polynomial::var(0);
        let y = Polynomial::var(1);
        let p = &x.pow(3) * &y;
        assert_eq!(p.partial(0), (&x.pow(2) * &y).scale(&rat(3)));
        assert_eq!(p.partial(2), Polynomial::zero());
    }
}
