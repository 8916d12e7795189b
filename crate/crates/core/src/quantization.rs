//! Symmetrization, the Duflo operator, the transported star product on
//! `S(g)[eps]` and the candidate isomorphism onto the invariant quotient.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::algebra::{LieAlgebra, SubalgebraSetup};
use crate::enveloping::{quotient_reduce, shift_eps, symmetric_invariants, Enveloping, PbwElement, QuotientElement, QuotientOptions};
use crate::error::{Error, Result};
use crate::poly::{max_degree, EpsPolynomial, Monomial, Polynomial};
use crate::rational::{format_rational, rat, Rational};

/// `sum_m c_m d^m` with `d^m` a monomial in the partial derivatives.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ConstantCoefficientOperator {
    pub terms: BTreeMap<Monomial, Rational>,
    pub truncation_degree: u32,
}

impl ConstantCoefficientOperator {
    pub fn identity(truncation_degree: u32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::one(), Rational::one());
        ConstantCoefficientOperator {
            terms,
            truncation_degree,
        }
    }

    /// The operator with the same coefficients as `p` (`x_i -> d_i`).
    pub fn from_symbol(p: &Polynomial, truncation_degree: u32) -> Self {
        ConstantCoefficientOperator {
            terms: p.terms().map(|(m, c)| (m.clone(), c.clone())).collect(),
            truncation_degree,
        }
    }

    pub fn symbol(&self) -> Polynomial {
        Polynomial::from_terms(self.terms.iter().map(|(m, c)| (m.clone(), c.clone())))
    }

    pub fn is_identity(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|c| c.is_one())
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    /// Printed with `d_<name>` symbols, highest order first.
    pub fn format(&self, names: &[String]) -> String {
        let dn: Vec<String> = names.iter().map(|n| format!("d_{n}")).collect();
        self.symbol().format(&dn)
    }
}

/// Applies a constant-coefficient operator.
pub fn apply_operator(op: &ConstantCoefficientOperator, f: &Polynomial) -> Polynomial {
    let mut out = Polynomial::zero();
    for (m, c) in &op.terms {
        out += &f.partial_monomial(m).scale(c);
    }
    out
}

/// Applies the operator to an `eps`-family, weighting an order-`k` derivative
/// by `eps^k` (the operator of the algebra with brackets scaled by `eps`).
pub fn apply_operator_eps(op: &ConstantCoefficientOperator, f: &EpsPolynomial) -> EpsPolynomial {
    let mut out = EpsPolynomial::zero();
    for (k, fk) in f.coeffs().iter().enumerate() {
        for (m, c) in &op.terms {
            let d = fk.partial_monomial(m).scale(c);
            out += &shift_eps(&EpsPolynomial::constant(d), k + m.degree() as usize);
        }
    }
    out
}

/// Pluggable series `sum_k eps^k A_k` of constant-coefficient corrections;
/// empty means identity.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct CorrectionSeries {
    pub entries: Vec<(usize, ConstantCoefficientOperator)>,
}

impl CorrectionSeries {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn push(&mut self, order: usize, op: ConstantCoefficientOperator) -> Result<()> {
        if order == 0 {
            return Err(Error::InvalidArgument("correction orders start at 1".into()));
        }
        self.entries.push((order, op));
        Ok(())
    }

    pub fn apply(&self, f: &EpsPolynomial) -> EpsPolynomial {
        let mut out = f.clone();
        for (order, op) in &self.entries {
            let g = f.map(|p| apply_operator(op, p));
            out += &shift_eps(&g, *order);
        }
        out
    }
}

fn distinct_permutations(word: &[usize]) -> Vec<Vec<usize>> {
    fn rec(counts: &mut BTreeMap<usize, usize>, left: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        let keys: Vec<usize> = counts.iter().filter(|(_, c)| **c > 0).map(|(k, _)| *k).collect();
        for k in keys {
            *counts.get_mut(&k).expect("key") -= 1;
            acc.push(k);
            rec(counts, left - 1, acc, out);
            acc.pop();
            *counts.get_mut(&k).expect("key") += 1;
        }
    }
    let mut counts = BTreeMap::new();
    for w in word {
        *counts.entry(*w).or_insert(0) += 1;
    }
    let mut out = Vec::new();
    rec(&mut counts, word.len(), &mut Vec::new(), &mut out);
    out
}

/// Symmetrization `S(g) -> U_eps(g)`: a monomial goes to the average of the
/// products of all orderings of its letters.
pub fn symmetrize(env: &Enveloping, f: &Polynomial) -> Result<PbwElement> {
    if let Some(d) = f.degree() {
        if d > max_degree() {
            return Err(Error::DegreeOverflow { degree: d, max: max_degree() });
        }
    }
    let mut out = EpsPolynomial::zero();
    for (m, c) in f.terms() {
        let perms = distinct_permutations(&m.word());
        let w = c / Rational::from_integer(BigInt::from(perms.len()));
        for p in perms {
            out += &env.word(&p)?.0.scale(&w);
        }
    }
    Ok(PbwElement(out))
}

/// Symmetrization extended `eps`-linearly.
pub fn symmetrize_eps(env: &Enveloping, f: &EpsPolynomial) -> Result<PbwElement> {
    let mut out = EpsPolynomial::zero();
    for (k, fk) in f.coeffs().iter().enumerate() {
        out += &shift_eps(&symmetrize(env, fk)?.0, k);
    }
    Ok(PbwElement(out))
}

/// Inverse of symmetrization by back-substitution on the top filtration
/// degree (symmetrization is the identity on leading words).
pub fn symmetrize_inverse(env: &Enveloping, u: &PbwElement) -> Result<EpsPolynomial> {
    let mut rem = u.0.clone();
    let mut out = EpsPolynomial::zero();
    while let Some(d) = rem.total_degree() {
        let mut top = EpsPolynomial::zero();
        for (k, p) in rem.coeffs().iter().enumerate() {
            let h = p.homogeneous_part(d);
            if !h.is_zero() {
                top += &EpsPolynomial::monomial(k, h);
            }
        }
        out += &top;
        rem -= &symmetrize_eps(env, &top)?.0;
    }
    Ok(out)
}

/// `beta^{-1}(beta(F) beta(G))`, the star product transported from `U_eps(g)`.
pub fn gutt_star(env: &Enveloping, f: &EpsPolynomial, g: &EpsPolynomial) -> Result<EpsPolynomial> {
    let bf = symmetrize_eps(env, f)?;
    let bg = symmetrize_eps(env, g)?;
    symmetrize_inverse(env, &env.multiply(&bf, &bg)?)
}

/// Coefficients `a_k` of `log(sinh(u/2)/(u/2)) = sum_k a_k u^(2k)`, for
/// `k = 1..=kmax`, by exact power-series arithmetic.
pub fn log_sinhc_coefficients(kmax: usize) -> Vec<Rational> {
    let n = 2 * kmax;
    // s(u) - 1 with s(u) = sum_j (u/2)^(2j) / (2j+1)!
    let mut w = vec![Rational::zero(); n + 1];
    let mut fact = Rational::one();
    for j in 1..=n + 1 {
        fact *= rat(j as i64);
        if j % 2 == 1 && j >= 3 {
            let e = (j - 1) / 2;
            // (1/2)^(2e) / (2e+1)!
            w[2 * e] = Rational::one() / (fact.clone() * num_traits::pow(rat(4), e));
        }
    }
    // log(1 + w) = sum_m (-1)^(m+1) w^m / m
    let mut out = vec![Rational::zero(); n + 1];
    let mut pw = w.clone();
    for m in 1..=n {
        let sign = if m % 2 == 1 { rat(1) } else { rat(-1) };
        for (o, p) in out.iter_mut().zip(&pw) {
            *o += &sign * p / rat(m as i64);
        }
        let mut next = vec![Rational::zero(); n + 1];
        for (i, a) in pw.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in w.iter().enumerate() {
                if i + j <= n && !b.is_zero() {
                    next[i + j] += a * b;
                }
            }
        }
        pw = next;
    }
    (1..=kmax).map(|k| out[2 * k].clone()).collect()
}

fn mat_mul(a: &[Vec<Polynomial>], b: &[Vec<Polynomial>]) -> Vec<Vec<Polynomial>> {
    let n = a.len();
    let mut out = vec![vec![Polynomial::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &(&a[i][k] * &b[k][j]);
                }
            }
        }
    }
    out
}

/// `tr((ad Y)^k)` for `k = 1..=kmax` with symbolic `Y`.
pub fn adjoint_power_traces(algebra: &LieAlgebra, kmax: usize) -> Vec<Polynomial> {
    let ad = algebra.adjoint_matrix_symbolic();
    let mut pw = ad.clone();
    let mut out = Vec::new();
    for k in 1..=kmax {
        if k > 1 {
            pw = mat_mul(&pw, &ad);
        }
        let mut tr = Polynomial::zero();
        for (i, row) in pw.iter().enumerate() {
            tr += &row[i];
        }
        out.push(tr);
    }
    out
}

/// Truncated `exp(p)` for `p` without constant term.
fn exp_truncated(p: &Polynomial, truncation: u32) -> Polynomial {
    let mut out = Polynomial::one();
    let mut term = Polynomial::one();
    for m in 1..=truncation {
        term = (&term * p).truncate(truncation).scale(&(Rational::one() / rat(m as i64)));
        if term.is_zero() {
            break;
        }
        out += &term;
    }
    out
}

/// `log q(Y) = tr log(sinh(ad Y/2)/(ad Y/2))` up to degree `truncation`.
pub fn duflo_log(algebra: &LieAlgebra, truncation: u32) -> Polynomial {
    let kmax = truncation as usize / 2;
    let a = log_sinhc_coefficients(kmax);
    let traces = adjoint_power_traces(algebra, 2 * kmax);
    let mut out = Polynomial::zero();
    for k in 1..=kmax {
        out += &traces[2 * k - 1].scale(&a[k - 1]);
    }
    out
}

/// `q(Y) = det(sinh(ad Y/2)/(ad Y/2))` up to degree `truncation`.
pub fn duflo_q(algebra: &LieAlgebra, truncation: u32) -> Polynomial {
    exp_truncated(&duflo_log(algebra, truncation), truncation)
}

/// The operator of `q^(1/2)` truncated at `truncation`.
pub fn duflo_series(algebra: &LieAlgebra, truncation: u32) -> ConstantCoefficientOperator {
    let half = duflo_log(algebra, truncation).scale(&Rational::new(1.into(), 2.into()));
    ConstantCoefficientOperator::from_symbol(&exp_truncated(&half, truncation), truncation)
}

/// `quotient_reduce(beta(d_{q^(1/2)}(T(F))))`.
pub fn iso_candidate(
    env: &Enveloping,
    f: &EpsPolynomial,
    setup: &SubalgebraSetup,
    corrections: &CorrectionSeries,
    opts: QuotientOptions,
) -> Result<QuotientElement> {
    let trunc = f.total_degree().unwrap_or(0);
    let op = duflo_series(setup.algebra(), trunc);
    let g = apply_operator_eps(&op, &corrections.apply(f));
    let b = symmetrize_eps(env, &g)?;
    Ok(quotient_reduce(&b, setup, opts))
}

/// Outcome of the check that `beta o d_{q^(1/2)}` sends `S(g)^g` into the
/// center of `U_eps(g)` multiplicatively.
#[derive(Clone, Debug, PartialEq)]
pub struct DufloCenterReport {
    pub invariants: Vec<Polynomial>,
    pub images: Vec<PbwElement>,
    pub central: bool,
    pub multiplicative: bool,
    pub failures: Vec<String>,
}

impl DufloCenterReport {
    pub fn to_json(&self, names: &[String]) -> Value {
        json!({
            "invariants": self.invariants.iter().map(|p| p.format(names)).collect::<Vec<_>>(),
            "images": self.images.iter().map(|p| p.format(names)).collect::<Vec<_>>(),
            "central": self.central,
            "multiplicative": self.multiplicative,
            "failures": self.failures,
        })
    }
}

fn duflo_map(env: &Enveloping, f: &Polynomial) -> Result<PbwElement> {
    let trunc = f.degree().unwrap_or(0);
    let op = duflo_series(env.algebra(), trunc);
    symmetrize_eps(env, &apply_operator_eps(&op, &EpsPolynomial::constant(f.clone())))
}

pub fn duflo_center_check(algebra: &LieAlgebra, n: u32) -> Result<DufloCenterReport> {
    let env = Enveloping::new(algebra);
    let inv = symmetric_invariants(algebra, n)?;
    let images = inv.iter().map(|f| duflo_map(&env, f)).collect::<Result<Vec<_>>>()?;
    let names = algebra.basis_names();
    let mut failures = Vec::new();
    let mut central = true;
    for (f, u) in inv.iter().zip(&images) {
        for i in 0..algebra.dim() {
            let c = env.commutator(u, &env.generator(i))?;
            if !c.is_zero() {
                central = false;
                failures.push(format!("image of {} does not commute with {}", f.format(names), names[i]));
            }
        }
    }
    let mut multiplicative = true;
    for a in 0..inv.len() {
        for b in a..inv.len() {
            let da = inv[a].degree().unwrap_or(0);
            let db = inv[b].degree().unwrap_or(0);
            if da + db > n {
                continue;
            }
            let lhs = duflo_map(&env, &(&inv[a] * &inv[b]))?;
            let rhs = env.multiply(&images[a], &images[b])?;
            if lhs != rhs {
                multiplicative = false;
                failures.push(format!(
                    "not multiplicative on ({}, {})",
                    inv[a].format(names),
                    inv[b].format(names)
                ));
            }
        }
    }
    Ok(DufloCenterReport {
        invariants: inv,
        images,
        central,
        multiplicative,
        failures,
    })
}

/// Formats the Duflo operator with its provenance for reports.
pub fn duflo_report(algebra: &LieAlgebra, truncation: u32) -> Value {
    let op = duflo_series(algebra, truncation);
    let q = duflo_q(algebra, truncation);
    json!({
        "algebra": algebra.name(),
        "truncation": truncation,
        "q": q.format(algebra.basis_names()),
        "operator": op.format(algebra.basis_names()),
        "identity": op.is_identity(),
        "log_coefficients": log_sinhc_coefficients(truncation as usize / 2)
            .iter().map(format_rational).collect::<Vec<_>>(),
    })
}
