//! Polynomials in a formal parameter (`eps` or `t`).

use std::fmt;
use std::marker::PhantomData;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::polynomial::Polynomial;
use crate::rational::{format_rational, Rational};

/// Univariate polynomial over the rationals; coefficient `k` multiplies `p^k`.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn zero() -> Self {
        UniPoly { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c * p^k`
    pub fn monomial(k: usize, c: Rational) -> Self {
        let mut v = vec![Rational::zero(); k + 1];
        v[k] = c;
        Self::from_coeffs(v)
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Lowest power with nonzero coefficient.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    pub fn shift(&self, k: usize) -> UniPoly {
        if self.is_zero() {
            return self.clone();
        }
        let mut v = vec![Rational::zero(); k];
        v.extend(self.coeffs.iter().cloned());
        UniPoly { coeffs: v }
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn sum_coeffs(&self) -> Rational {
        self.coeffs.iter().fold(Rational::zero(), |a, b| a + b)
    }

    pub fn format(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let v = match k {
                0 => String::new(),
                1 => var.to_string(),
                _ => format!("{var}^{k}"),
            };
            parts.push(match (k, c.is_one()) {
                (0, _) => format_rational(c),
                (_, true) => v,
                _ => format!("{}*{}", format_rational(c), v),
            });
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl<'a> Add<&'a UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn add(self, rhs: &'a UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::from_coeffs((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl<'a> AddAssign<&'a UniPoly> for UniPoly {
    fn add_assign(&mut self, rhs: &'a UniPoly) {
        *self = &*self + rhs;
    }
}

impl<'a> Sub<&'a UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn sub(self, rhs: &'a UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        UniPoly::from_coeffs((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::from_coeffs(self.coeffs.iter().map(|c| -c.clone()).collect())
    }
}

impl<'a> Mul<&'a UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn mul(self, rhs: &'a UniPoly) -> UniPoly {
        if self.is_zero() || rhs.is_zero() {
            return UniPoly::zero();
        }
        let mut v = vec![Rational::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        UniPoly::from_coeffs(v)
    }
}

/// Marker naming a formal parameter.
pub trait Param: Clone + fmt::Debug + PartialEq + Eq + Default {
    const NAME: &'static str;
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct Eps;
impl Param for Eps {
    const NAME: &'static str = "eps";
}

#[derive(Clone, Debug, PartialEq, Eq, Default, Hash)]
pub struct TParam;
impl Param for TParam {
    const NAME: &'static str = "t";
}

/// A polynomial in the formal parameter with polynomial coefficients:
/// `coeffs[k]` multiplies `p^k`. Trailing zero coefficients are trimmed.
#[derive(Clone, PartialEq, Eq, Default, Debug, Hash)]
pub struct ParamPoly<P: Param> {
    coeffs: Vec<Polynomial>,
    _p: PhantomData<P>,
}

/// Elements of `S(q)[eps]`.
pub type EpsPolynomial = ParamPoly<Eps>;
/// Families `sum_p t^p F_p`.
pub type TPolynomial = ParamPoly<TParam>;

impl<P: Param> ParamPoly<P> {
    pub fn zero() -> Self {
        ParamPoly {
            coeffs: Vec::new(),
            _p: PhantomData,
        }
    }

    pub fn from_coeffs(mut coeffs: Vec<Polynomial>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        ParamPoly {
            coeffs,
            _p: PhantomData,
        }
    }

    pub fn constant(p: Polynomial) -> Self {
        Self::from_coeffs(vec![p])
    }

    /// `p^k * f`
    pub fn monomial(k: usize, f: Polynomial) -> Self {
        let mut v = vec![Polynomial::zero(); k + 1];
        v[k] = f;
        Self::from_coeffs(v)
    }

    pub fn coeffs(&self) -> &[Polynomial] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Polynomial {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn param_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.coeffs.iter().filter_map(|c| c.degree()).max()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|p| p.scale(c)).collect())
    }

    pub fn map(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(f).collect())
    }

    /// Keeps parameter powers `<= k`.
    pub fn truncate(&self, k: usize) -> Self {
        Self::from_coeffs(self.coeffs.iter().take(k + 1).cloned().collect())
    }

    /// Sets the parameter to a rational value.
    pub fn eval(&self, x: &Rational) -> Polynomial {
        let mut acc = Polynomial::zero();
        for c in self.coeffs.iter().rev() {
            acc = &acc.scale(x) + c;
        }
        acc
    }

    /// Sum of all coefficients, i.e. evaluation at 1.
    pub fn sum_coeffs(&self) -> Polynomial {
        self.coeffs.iter().fold(Polynomial::zero(), |a, b| &a + b)
    }

    /// Reinterprets the coefficients under another parameter name.
    pub fn rename<Q: Param>(&self) -> ParamPoly<Q> {
        ParamPoly::from_coeffs(self.coeffs.clone())
    }

    /// Builds from `(param power, polynomial)` pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Polynomial)>) -> Self {
        let mut out = Self::zero();
        for (k, p) in pairs {
            out = &out + &Self::monomial(k, p);
        }
        out
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let pw = match k {
                0 => String::new(),
                1 => P::NAME.to_string(),
                _ => format!("{}^{k}", P::NAME),
            };
            if k == 0 {
                parts.push(c.format(names));
            } else if c.len() == 1 && c.constant_term() == Rational::one() && c.degree() == Some(0) {
                parts.push(pw);
            } else if c.len() == 1 {
                let (m, v) = c.terms().next().expect("one term");
                let body = if m.is_one() {
                    format_rational(v)
                } else if v.is_one() {
                    m.format(names)
                } else {
                    format!("{}*{}", format_rational(v), m.format(names))
                };
                parts.push(format!("{body}*{pw}"));
            } else {
                parts.push(format!("({})*{pw}", c.format(names)));
            }
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

impl<'a, P: Param> Add<&'a ParamPoly<P>> for &ParamPoly<P> {
    type Output = ParamPoly<P>;
    fn add(self, rhs: &'a ParamPoly<P>) -> ParamPoly<P> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ParamPoly::from_coeffs((0..n).map(|k| &self.coeff(k) + &rhs.coeff(k)).collect())
    }
}

impl<'a, P: Param> AddAssign<&'a ParamPoly<P>> for ParamPoly<P> {
    fn add_assign(&mut self, rhs: &'a ParamPoly<P>) {
        *self = &*self + rhs;
    }
}

impl<'a, P: Param> Sub<&'a ParamPoly<P>> for &ParamPoly<P> {
    type Output = ParamPoly<P>;
    fn sub(self, rhs: &'a ParamPoly<P>) -> ParamPoly<P> {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        ParamPoly::from_coeffs((0..n).map(|k| &self.coeff(k) - &rhs.coeff(k)).collect())
    }
}

impl<'a, P: Param> SubAssign<&'a ParamPoly<P>> for ParamPoly<P> {
    fn sub_assign(&mut self, rhs: &'a ParamPoly<P>) {
        *self = &*self - rhs;
    }
}

impl<P: Param> Neg for &ParamPoly<P> {
    type Output = ParamPoly<P>;
    fn neg(self) -> ParamPoly<P> {
        self.map(|p| -p)
    }
}

impl<'a, P: Param> Mul<&'a ParamPoly<P>> for &ParamPoly<P> {
    type Output = ParamPoly<P>;
    fn mul(self, rhs: &'a ParamPoly<P>) -> ParamPoly<P> {
        if self.is_zero() || rhs.is_zero() {
            return ParamPoly::zero();
        }
        let mut v = vec![Polynomial::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                v[i + j] += &(a * b);
            }
        }
        ParamPoly::from_coeffs(v)
    }
}

impl<P: Param> From<Polynomial> for ParamPoly<P> {
    fn from(p: Polynomial) -> Self {
        ParamPoly::constant(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn unipoly_arith() {
        let a = UniPoly::from_coeffs(vec![rat(1), rat(1)]); // 1 + e
        let b = &a * &a;
        assert_eq!(b.coeffs(), &[rat(1), rat(2), rat(1)]);
        assert_eq!((&b - &b), UniPoly::zero());
        assert_eq!(b.eval(&rat(2)), rat(9));
        assert_eq!(UniPoly::monomial(2, rat(3)).valuation(), Some(2));
    }

    #[test]
    fn eps_poly_ring() {
        let x = Polynomial::var(0);
        let a = EpsPolynomial::from_coeffs(vec![x.clone(), Polynomial::one()]); // x + eps
        let b = &a * &a;
        assert_eq!(b.coeff(0), &x * &x);
        assert_eq!(b.coeff(1), x.scale(&rat(2)));
        assert_eq!(b.coeff(2), Polynomial::one());
        assert_eq!(b.param_degree(), Some(2));
        assert_eq!(b.sum_coeffs(), (&x + &Polynomial::one()).pow(2));
        let names = vec!["x".to_string()];
        assert_eq!(a.format(&names), "eps + x");
    }
}
