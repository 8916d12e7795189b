use std::cmp::Ordering;
use std::fmt;

/// A commutative monomial, stored sparsely as `(variable, exponent)` pairs
/// with strictly increasing variable index and no zero exponents.
///
/// Ordering is graded lexicographic: total degree first, then the exponent
/// of variable 0, then variable 1, and so on (larger exponent is larger).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Monomial { exps: Vec::new() }
    }

    pub fn var(i: usize) -> Self {
        Monomial { exps: vec![(i, 1)] }
    }

    pub fn var_pow(i: usize, e: u32) -> Self {
        if e == 0 {
            Self::one()
        } else {
            Monomial { exps: vec![(i, e)] }
        }
    }

    pub fn from_exponents(pairs: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut exps: Vec<(usize, u32)> = Vec::new();
        let mut sorted: Vec<(usize, u32)> = pairs.into_iter().filter(|(_, e)| *e > 0).collect();
        sorted.sort_by_key(|(i, _)| *i);
        for (i, e) in sorted {
            match exps.last_mut() {
                Some((j, f)) if *j == i => *f += e,
                _ => exps.push((i, e)),
            }
        }
        Monomial { exps }
    }

    /// From a dense exponent vector.
    pub fn from_dense(exps: &[u32]) -> Self {
        Self::from_exponents(exps.iter().enumerate().map(|(i, e)| (i, *e)))
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.exps.iter().map(|(_, e)| e).sum()
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.exps
            .binary_search_by_key(&i, |(j, _)| *j)
            .map(|k| self.exps[k].1)
            .unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.exps.iter().copied()
    }

    pub fn max_var(&self) -> Option<usize> {
        self.exps.last().map(|(i, _)| *i)
    }

    pub fn min_var(&self) -> Option<usize> {
        self.exps.first().map(|(i, _)| *i)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() || j < other.exps.len() {
            match (self.exps.get(i), other.exps.get(j)) {
                (Some(&(a, e)), Some(&(b, f))) if a == b => {
                    out.push((a, e + f));
                    i += 1;
                    j += 1;
                }
                (Some(&(a, e)), Some(&(b, _))) if a < b => {
                    out.push((a, e));
                    i += 1;
                }
                (_, Some(&(b, f))) => {
                    out.push((b, f));
                    j += 1;
                }
                (Some(&(a, e)), None) => {
                    out.push((a, e));
                    i += 1;
                }
                (None, None) => unreachable!(),
            }
        }
        Monomial { exps: out }
    }

    /// Multiplies by `x_i^e`.
    pub fn mul_var(&self, i: usize, e: u32) -> Monomial {
        self.mul(&Monomial::var_pow(i, e))
    }

    /// Divides by `x_i` once; `None` if `x_i` does not divide.
    pub fn div_var(&self, i: usize) -> Option<Monomial> {
        let k = self.exps.binary_search_by_key(&i, |(j, _)| *j).ok()?;
        let mut exps = self.exps.clone();
        if exps[k].1 == 1 {
            exps.remove(k);
        } else {
            exps[k].1 -= 1;
        }
        Some(Monomial { exps })
    }

    /// Splits into the part with variables `< split` and the rest.
    pub fn split_at(&self, split: usize) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.exps.iter().partition(|(i, _)| *i < split);
        (Monomial { exps: a }, Monomial { exps: b })
    }

    /// Normal-ordered word: each variable repeated by its exponent, in
    /// increasing index order.
    pub fn word(&self) -> Vec<usize> {
        self.exps
            .iter()
            .flat_map(|(i, e)| std::iter::repeat_n(*i, *e as usize))
            .collect()
    }

    /// Renames variables through `f`.
    pub fn map_vars(&self, f: impl Fn(usize) -> usize) -> Monomial {
        Monomial::from_exponents(self.exps.iter().map(|(i, e)| (f(*i), *e)))
    }

    pub fn format(&self, names: &[String]) -> String {
        if self.is_one() {
            return "1".to_string();
        }
        self.exps
            .iter()
            .map(|(i, e)| {
                let name = names.get(*i).cloned().unwrap_or_else(|| format!("x{i}"));
                if *e == 1 {
                    name
                } else {
                    format!("{name}^{e}")
                }
            })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.exps.get(i), other.exps.get(j)) {
                (None, None) => return Ordering::Equal,
                // same degree, so an exhausted side with the other not exhausted cannot
                // happen without an earlier difference; still order deterministically
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(&(a, e)), Some(&(b, f))) => {
                    if a == b {
                        match e.cmp(&f) {
                            Ordering::Equal => {
                                i += 1;
                                j += 1;
                            }
                            o => return o,
                        }
                    } else if a < b {
                        // self has x_a, other has exponent 0 there
                        return Ordering::Greater;
                    } else {
                        return Ordering::Less;
                    }
                }
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self
            .exps
            .iter()
            .map(|(i, e)| if *e == 1 { format!("x{i}") } else { format!("x{i}^{e}") })
            .collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// All monomials in variables `vars` of total degree exactly `d`, ascending.
pub fn monomials_of_degree(vars: &[usize], d: u32) -> Vec<Monomial> {
    fn rec(vars: &[usize], d: u32, acc: &mut Vec<(usize, u32)>, out: &mut Vec<Monomial>) {
        if vars.is_empty() {
            if d == 0 {
                out.push(Monomial::from_exponents(acc.iter().copied()));
            }
            return;
        }
        if vars.len() == 1 {
            acc.push((vars[0], d));
            out.push(Monomial::from_exponents(acc.iter().copied()));
            acc.pop();
            return;
        }
        for e in 0..=d {
            acc.push((vars[0], e));
            rec(&vars[1..], d - e, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, d, &mut Vec::new(), &mut out);
    out.sort();
    out
}

/// All monomials in `vars` of total degree `<= d`, ascending in graded lex.
pub fn monomials_up_to(vars: &[usize], d: u32) -> Vec<Monomial> {
    (0..=d).flat_map(|k| monomials_of_degree(vars, k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let x = Monomial::var(0);
        let y = Monomial::var(1);
        let xx = x.mul(&x);
        let xy = x.mul(&y);
        let yy = y.mul(&y);
        let mut v = vec![yy.clone(), Monomial::one(), xy.clone(), y.clone(), xx.clone(), x.clone()];
        v.sort();
        assert_eq!(v, vec![Monomial::one(), y, x, yy, xy, xx]);
    }

    #[test]
    fn counts() {
        assert_eq!(monomials_up_to(&[0, 1, 2], 6).len(), 84);
        assert_eq!(monomials_of_degree(&[], 0).len(), 1);
        assert_eq!(monomials_of_degree(&[], 2).len(), 0);
    }

    #[test]
    fn word_and_division() {
        let m = Monomial::from_exponents([(2, 1), (0, 2)]);
        assert_eq!(m.word(), vec![0, 0, 2]);
        assert_eq!(m.div_var(0).unwrap().word(), vec![0, 2]);
        assert!(m.div_var(1).is_none());
    }
}
