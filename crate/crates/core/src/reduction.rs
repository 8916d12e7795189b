//! The reduction differential on `S(q)[eps]`, its solution spaces, the
//! reduced product and the transfer maps between the `eps`-graded, the
//! `eps = 1` and the `t`-deformed pictures.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::algebra::{CentralExtension, SubalgebraSetup};
use crate::cascade::{solve_filtered, EpsOperator};
use crate::enveloping::{
    check_cap, default_depth, eps_vector_to_poly, finish_column, invariants_up_to_degree, poisson_action,
    prefix_sizes, quotient_reduce, twisted_left_action, Coords, EpsMode, Enveloping,
    InvariantAlgebraPresentation, PbwElement, QuotientElement, QuotientOptions,
};
use crate::error::{Error, Result};
use crate::graphs::{
    bernoulli_graph, bernoulli_wheel_graph, graph_operator, KGraph, WeightTable, BERNOULLI_FUNCTION_SLOT,
};
use crate::linalg::{rank_of, row_from_map, SparseRow};
use crate::poly::{monomials_up_to, poisson_bracket_unchecked, EpsPolynomial, Monomial, Polynomial, TPolynomial, UniPoly};
use crate::quantization::{iso_candidate, CorrectionSeries};
use crate::rational::{rat, ratio, Rational};

/// The graphs of `B_i` and `BW_i`: the chain and every chain-plus-wheel split
/// of `i` vertices.
pub fn bernoulli_family(i: usize) -> Result<Vec<KGraph>> {
    let mut out = vec![bernoulli_graph(i)?];
    for wheel in 2..i {
        out.push(bernoulli_wheel_graph(i - wheel, wheel)?);
    }
    Ok(out)
}

/// `d^(eps) = sum_i eps^i d^(i)` over odd `i`; `d^(1)` is built in, higher
/// orders carry weighted Bernoulli-family graphs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReductionDifferential {
    higher: BTreeMap<usize, Vec<(KGraph, Rational)>>,
    assumed_zero: BTreeSet<usize>,
}

impl ReductionDifferential {
    pub fn d1_only() -> Self {
        Self::default()
    }

    /// Higher orders through `max_order` set to zero by explicit choice.
    pub fn with_zero_higher(max_order: usize) -> Self {
        let mut d = Self::default();
        for i in (3..=max_order).step_by(2) {
            d.higher.insert(i, Vec::new());
            d.assumed_zero.insert(i);
        }
        d
    }

    /// Higher orders through `max_order` from exact table entries; all
    /// missing graph ids are reported together.
    pub fn from_weights(table: &WeightTable, max_order: usize) -> Result<Self> {
        let mut d = Self::default();
        let mut missing = Vec::new();
        for i in (3..=max_order).step_by(2) {
            let mut terms = Vec::new();
            for g in bernoulli_family(i)? {
                match table.exact(&g) {
                    Ok(w) => terms.push((g, w)),
                    Err(Error::MissingWeight(id)) => missing.push(id),
                    Err(e) => return Err(e),
                }
            }
            d.higher.insert(i, terms);
        }
        if !missing.is_empty() {
            return Err(Error::MissingWeights(missing));
        }
        Ok(d)
    }

    pub fn assumed_zero_orders(&self) -> Vec<usize> {
        self.assumed_zero.iter().copied().collect()
    }

    /// Fails with the graph ids still needed to reach `eps_order`.
    pub fn require(&self, eps_order: usize) -> Result<()> {
        let mut missing = Vec::new();
        for i in (3..=eps_order).step_by(2) {
            if !self.higher.contains_key(&i) {
                for g in bernoulli_family(i)? {
                    missing.push(g.canonical_id().to_string());
                }
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::MissingWeights(missing))
        }
    }

    fn orders(&self, eps_order: usize) -> Vec<usize> {
        (1..=eps_order.max(1)).step_by(2).collect()
    }

    /// Components `(d^(i) F)(H_j)` before the substitution `h -> -lambda`.
    fn raw(&self, i: usize, f: &Polynomial, setup: &SubalgebraSetup) -> Vec<Polynomial> {
        let alg = setup.algebra();
        setup
            .h_indices()
            .map(|j| {
                if i == 1 {
                    return poisson_bracket_unchecked(&Polynomial::var(j), f, alg);
                }
                let mut acc = Polynomial::zero();
                for (g, w) in self.higher.get(&i).into_iter().flatten() {
                    let mut args = [Polynomial::zero(), Polynomial::zero()];
                    args[BERNOULLI_FUNCTION_SLOT] = f.clone();
                    args[1 - BERNOULLI_FUNCTION_SLOT] = Polynomial::var(j);
                    let b = graph_operator(g, alg, &args).expect("two ground slots");
                    acc += &b.scale(w);
                }
                acc
            })
            .collect()
    }

    /// `(d^(i) F)(H_j)` for each `h` index.
    pub fn apply_order(&self, i: usize, f: &Polynomial, setup: &SubalgebraSetup) -> Vec<Polynomial> {
        if i == 1 {
            return d1(f, setup);
        }
        self.raw(i, f, setup).iter().map(|p| reduce(p, setup)).collect()
    }

    /// `d^(eps) F` truncated to orders `<= eps_order`, per `h` index.
    pub fn apply(&self, f: &EpsPolynomial, setup: &SubalgebraSetup, eps_order: usize) -> Result<Vec<EpsPolynomial>> {
        self.require(eps_order)?;
        let mut out = vec![EpsPolynomial::zero(); setup.h_len()];
        for i in self.orders(eps_order) {
            for (k, fk) in f.coeffs().iter().enumerate() {
                for (slot, c) in out.iter_mut().zip(self.apply_order(i, fk, setup)) {
                    *slot += &EpsPolynomial::monomial(k + i, c);
                }
            }
        }
        Ok(out)
    }

    /// `d_{t lambda}` with symbolic `t`, at `eps = 1`.
    pub fn apply_symbolic(&self, f: &TPolynomial, setup: &SubalgebraSetup, eps_order: usize) -> Result<Vec<TPolynomial>> {
        self.require(eps_order)?;
        let mut out = vec![TPolynomial::zero(); setup.h_len()];
        for i in self.orders(eps_order) {
            for (k, fk) in f.coeffs().iter().enumerate() {
                for (slot, c) in out.iter_mut().zip(self.raw(i, fk, setup)) {
                    let r = reduce_symbolic(&c, setup);
                    *slot += &shift_t(&r, k);
                }
            }
        }
        Ok(out)
    }
}

fn reduce(p: &Polynomial, setup: &SubalgebraSetup) -> Polynomial {
    crate::enveloping::reduce_to_q(p, setup)
}

fn shift_t(p: &TPolynomial, k: usize) -> TPolynomial {
    if k == 0 || p.is_zero() {
        return p.clone();
    }
    let mut c = vec![Polynomial::zero(); k];
    c.extend(p.coeffs().iter().cloned());
    TPolynomial::from_coeffs(c)
}

/// `h -> -t lambda(h)` with symbolic `t`.
pub fn reduce_symbolic(p: &Polynomial, setup: &SubalgebraSetup) -> TPolynomial {
    let q = setup.q_len();
    let mut by_t: BTreeMap<usize, Polynomial> = BTreeMap::new();
    for (m, c) in p.terms() {
        let (qpart, hpart) = m.split_at(q);
        let mut coef = c.clone();
        let mut s = 0usize;
        for (i, e) in hpart.iter() {
            coef *= num_traits::pow(-setup.lambda(i), e as usize);
            s += e as usize;
        }
        if !coef.is_zero() {
            by_t.entry(s).or_default().add_term(qpart, coef);
        }
    }
    TPolynomial::from_pairs(by_t)
}

/// `(d^1 F)(H_j) = reduce({H_j, F})`.
pub fn d1(f: &Polynomial, setup: &SubalgebraSetup) -> Vec<Polynomial> {
    poisson_action(f, setup)
}

/// Degree-truncated `H^0` with the cascade imposed through `eps_order`.
#[derive(Clone, Debug)]
pub struct ReductionSpace {
    pub setup: SubalgebraSetup,
    pub max_degree: u32,
    pub eps_order: usize,
    pub basis: Vec<EpsPolynomial>,
    pub degrees: Vec<u32>,
    pub degree_dims: Vec<usize>,
    pub imposed_orders: Vec<usize>,
    pub assumed_zero_orders: Vec<usize>,
    pub complete: bool,
}

impl ReductionSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn to_json(&self) -> Value {
        let names = self.setup.names();
        json!({
            "max_degree": self.max_degree,
            "eps_order": self.eps_order,
            "imposed_orders": self.imposed_orders,
            "assumed_zero_orders": self.assumed_zero_orders,
            "q_variables": self.setup.q_names(),
            "degree_dims": self.degree_dims,
            "basis": self.basis.iter().map(|b| b.format(names)).collect::<Vec<_>>(),
            "basis_degrees": self.degrees,
            "complete": self.complete,
        })
    }
}

fn reduction_operator(
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
    monos: &[Monomial],
) -> EpsOperator {
    let mut coords = Coords::default();
    let columns = monos
        .iter()
        .map(|m| {
            let f = Polynomial::term(m.clone(), Rational::one());
            let mut col = BTreeMap::new();
            // d^(eps) / eps: order i sits at eps^(i-1)
            for i in diff.orders(eps_order) {
                for (j, c) in setup.h_indices().zip(diff.apply_order(i, &f, setup)) {
                    coords.eps_column(j, &EpsPolynomial::monomial(i - 1, c), &mut col);
                }
            }
            finish_column(col)
        })
        .collect();
    EpsOperator { columns }
}

/// Basis of `F in S(q)[eps]`, degree `<= n`, with `d^(eps) F = 0` through
/// `eps_order`.
pub fn solve_reduction(
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
    n: u32,
) -> Result<ReductionSpace> {
    check_cap(n)?;
    diff.require(eps_order)?;
    let q_vars: Vec<usize> = setup.q_indices().collect();
    let monos = monomials_up_to(&q_vars, n);
    let op = reduction_operator(setup, diff, eps_order, &monos);
    let fk = solve_filtered(&op, &prefix_sizes(&monos, n), default_depth(n));
    let basis: Vec<EpsPolynomial> = fk.basis.iter().map(|v| eps_vector_to_poly(v, &monos)).collect();
    let degrees = basis.iter().map(|b| b.total_degree().unwrap_or(0)).collect();
    Ok(ReductionSpace {
        setup: setup.clone(),
        max_degree: n,
        eps_order,
        basis,
        degrees,
        degree_dims: fk.dims,
        imposed_orders: diff.orders(eps_order),
        assumed_zero_orders: diff.assumed_zero_orders().into_iter().filter(|i| *i <= eps_order).collect(),
        complete: fk.complete,
    })
}

/// `solve_reduction` for the character `t * lambda` at a fixed rational `t`.
pub fn solve_reduction_at_t(
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    t: &Rational,
    eps_order: usize,
    n: u32,
) -> Result<ReductionSpace> {
    solve_reduction(&t_scaled_setup(setup, t), diff, eps_order, n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub member: bool,
    /// `(h name, eps power, nonzero component)` of the first failing equation.
    pub witness: Option<(String, usize, Polynomial)>,
}

impl MembershipReport {
    fn from_components(setup: &SubalgebraSetup, comps: &[EpsPolynomial]) -> Self {
        for (j, c) in setup.h_indices().zip(comps) {
            if let Some(k) = c.coeffs().iter().position(|p| !p.is_zero()) {
                return MembershipReport {
                    member: false,
                    witness: Some((setup.names()[j].clone(), k, c.coeff(k))),
                };
            }
        }
        MembershipReport {
            member: true,
            witness: None,
        }
    }

    pub fn to_json(&self, names: &[String]) -> Value {
        json!({
            "member": self.member,
            "witness": self.witness.as_ref().map(|(h, k, p)| json!({"h": h, "eps_power": k, "component": p.format(names)})),
        })
    }
}

pub fn membership_check(
    f: &EpsPolynomial,
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
) -> Result<MembershipReport> {
    check_q_only(f.coeffs(), setup)?;
    let comps = diff.apply(f, setup, eps_order)?;
    Ok(MembershipReport::from_components(setup, &comps))
}

/// Membership of a family in `H^0(h_{t lambda})` as an identity in `Q[t]`.
pub fn t_membership_check(
    f: &TPolynomial,
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
) -> Result<MembershipReport> {
    check_q_only(f.coeffs(), setup)?;
    let comps = diff.apply_symbolic(f, setup, eps_order)?;
    let as_eps: Vec<EpsPolynomial> = comps.iter().map(|c| c.rename()).collect();
    Ok(MembershipReport::from_components(setup, &as_eps))
}

fn check_q_only(ps: &[Polynomial], setup: &SubalgebraSetup) -> Result<()> {
    for p in ps {
        if let Some(v) = p.max_var() {
            if v >= setup.q_len() {
                return Err(Error::InvalidArgument(format!(
                    "{} is not a q-variable",
                    setup.names()[v]
                )));
            }
        }
    }
    Ok(())
}

/// `P_ab = reduce({x_a, x_b})` on the `q` variables.
pub fn reduced_bracket_matrix(setup: &SubalgebraSetup) -> Vec<Vec<Polynomial>> {
    let alg = setup.algebra();
    let q = setup.q_len();
    (0..q)
        .map(|a| {
            (0..q)
                .map(|b| reduce(&poisson_bracket_unchecked(&Polynomial::var(a), &Polynomial::var(b), alg), setup))
                .collect()
        })
        .collect()
}

/// Whether every `reduce({x_a, x_b})` is a constant, in which case the
/// reduced product is the Moyal product of that constant bracket.
pub fn reduced_bracket_is_constant(setup: &SubalgebraSetup) -> bool {
    reduced_bracket_matrix(setup)
        .iter()
        .flatten()
        .all(|p| p.degree().is_none_or(|d| d == 0))
}

/// Terms `sum (P d ⊗ d)^n` as `(alpha, beta) -> coefficient`.
fn moyal_power(p: &[Vec<Polynomial>], n: usize) -> BTreeMap<(Monomial, Monomial), Polynomial> {
    let mut cur: BTreeMap<(Monomial, Monomial), Polynomial> = BTreeMap::new();
    cur.insert((Monomial::one(), Monomial::one()), Polynomial::one());
    for _ in 0..n {
        let mut next: BTreeMap<(Monomial, Monomial), Polynomial> = BTreeMap::new();
        for ((al, be), c) in &cur {
            for (a, row) in p.iter().enumerate() {
                for (b, pab) in row.iter().enumerate() {
                    if pab.is_zero() {
                        continue;
                    }
                    *next.entry((al.mul_var(a, 1), be.mul_var(b, 1))).or_insert_with(Polynomial::zero) += &(c * pab);
                }
            }
        }
        cur = next;
    }
    cur
}

/// The reduced product `F *_CF G` truncated at `eps^order`. Orders 0 and 1
/// are always available (`FG` and `1/2 reduce({F,G})`); higher orders need the
/// reduced bracket of the `q` coordinates to be constant.
pub fn cf_product(f: &EpsPolynomial, g: &EpsPolynomial, setup: &SubalgebraSetup, order: usize) -> Result<EpsPolynomial> {
    check_q_only(f.coeffs(), setup)?;
    check_q_only(g.coeffs(), setup)?;
    let p = reduced_bracket_matrix(setup);
    let constant = p.iter().flatten().all(|x| x.degree().is_none_or(|d| d == 0));
    let deg = |x: &EpsPolynomial| x.total_degree().unwrap_or(0) as usize;
    let needed = order.min(deg(f).min(deg(g)));
    if needed >= 2 && !constant {
        return Err(Error::MissingWeights(
            (2..=needed).map(|k| format!("two-brane order {k}")).collect(),
        ));
    }
    let mut out = EpsPolynomial::zero();
    let mut fact = rat(1);
    for n in 0..=needed {
        if n > 0 {
            fact *= rat(n as i64);
        }
        let c = num_traits::pow(ratio(1, 2), n) / &fact;
        let terms = moyal_power(&p, n);
        for (i, fi) in f.coeffs().iter().enumerate() {
            for (j, gj) in g.coeffs().iter().enumerate() {
                let k = i + j + n;
                if k > order {
                    continue;
                }
                let mut acc = Polynomial::zero();
                for ((al, be), coef) in &terms {
                    let a = fi.partial_monomial(al);
                    if a.is_zero() {
                        continue;
                    }
                    let b = gj.partial_monomial(be);
                    if b.is_zero() {
                        continue;
                    }
                    acc += &(&(&a * &b) * coef);
                }
                out += &EpsPolynomial::monomial(k, acc.scale(&c));
            }
        }
    }
    Ok(out)
}

/// `eps -> 1`.
pub fn specialize_eps1(f: &EpsPolynomial) -> Polynomial {
    f.sum_coeffs()
}

/// `J(F) = sum_k F_k`, checked to lie in the kernel of `d = sum_i d^(i)`.
pub fn map_j(f: &EpsPolynomial, setup: &SubalgebraSetup, diff: &ReductionDifferential, eps_order: usize) -> Result<Polynomial> {
    let j = specialize_eps1(f);
    let comps = diff.apply(&EpsPolynomial::constant(j.clone()), setup, eps_order)?;
    let at_one: Vec<Polynomial> = comps.iter().map(|c| c.sum_coeffs()).collect();
    if let Some((h, c)) = setup.h_indices().zip(&at_one).find(|(_, c)| !c.is_zero()) {
        return Err(Error::Membership(format!(
            "J(F) fails the {} equation: {}",
            setup.names()[h],
            c.format(setup.names())
        )));
    }
    Ok(j)
}

/// The setup with character `t * lambda`.
pub fn t_scaled_setup(setup: &SubalgebraSetup, t: &Rational) -> SubalgebraSetup {
    setup.scaled_character(t)
}

/// `max(i + p)` over the `t^i`-coefficients' degree-`p` parts (resp. `eps`).
fn weight_bound<P: crate::poly::Param>(f: &crate::poly::ParamPoly<P>) -> usize {
    let mut n = 0;
    for (i, fi) in f.coeffs().iter().enumerate() {
        for (p, _) in fi.homogeneous_components() {
            n = n.max(i + p as usize);
        }
    }
    n
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferResult<T> {
    pub element: T,
    /// The exponent `N` used in the transfer formula.
    pub n: usize,
}

/// `F_eps = eps^N sum F_p^(i) eps^-(i+p)` with `N = max(i + p)`.
pub fn eps_from_t_family(
    f_t: &TPolynomial,
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
) -> Result<TransferResult<EpsPolynomial>> {
    let m = t_membership_check(f_t, setup, diff, eps_order)?;
    if !m.member {
        return Err(Error::Membership(format!("family is not a member for symbolic t: {:?}", m.witness)));
    }
    let n = weight_bound(f_t);
    let mut out = EpsPolynomial::zero();
    for (i, fi) in f_t.coeffs().iter().enumerate() {
        for (p, part) in fi.homogeneous_components() {
            out += &EpsPolynomial::monomial(n - i - p as usize, part);
        }
    }
    if specialize_eps1(&out) != f_t.sum_coeffs() {
        return Err(Error::Membership("J(F_eps) differs from F_(t=1)".into()));
    }
    Ok(TransferResult { element: out, n })
}

/// `F_t = t^N sum t^-(i+k) F_k^(i)` with `N = max(i + k)`; membership for
/// symbolic `t` is verified.
pub fn t_family_from_eps(
    f_eps: &EpsPolynomial,
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
) -> Result<TransferResult<TPolynomial>> {
    let m = membership_check(f_eps, setup, diff, eps_order)?;
    if !m.member {
        return Err(Error::Membership(format!("element is not in H0: {:?}", m.witness)));
    }
    let n = weight_bound(f_eps);
    let mut out = TPolynomial::zero();
    for (k, fk) in f_eps.coeffs().iter().enumerate() {
        for (i, part) in fk.homogeneous_components() {
            out += &TPolynomial::monomial(n - k - i as usize, part);
        }
    }
    let back = t_membership_check(&out, setup, diff, eps_order)?;
    if !back.member {
        return Err(Error::Membership(format!("family fails for symbolic t: {:?}", back.witness)));
    }
    Ok(TransferResult { element: out, n })
}

/// `u_t -> u_T` (`t^k -> T^k`), checked by `(H_j + lambda_j T) u_T = 0` in
/// `U(g_T)/U(g_T)h^T` and by `e_{T=t}(u_T) = u_t` for symbolic `t`.
pub fn lift_polynomial_family(u_t: &TPolynomial, ext: &CentralExtension) -> Result<Polynomial> {
    check_q_only(u_t.coeffs(), ext.base())?;
    let t = ext.t_index();
    let mut u = Polynomial::zero();
    for (k, uk) in u_t.coeffs().iter().enumerate() {
        u += &uk.mul_monomial(&Monomial::var_pow(t, k as u32));
    }
    let setup = ext.extended();
    let env = Enveloping::new(setup.algebra());
    let ue = EpsPolynomial::constant(u.clone());
    for j in setup.h_indices() {
        let img = twisted_left_action(&env, setup, j, &ue, QuotientOptions::default()).sum_coeffs();
        if !img.is_zero() {
            return Err(Error::Membership(format!(
                "u_T is not invariant under {}: {}",
                setup.names()[j],
                img.format(setup.names())
            )));
        }
    }
    if ext.evaluate_symbolic(&u) != *u_t {
        return Err(Error::Membership("e_(T=t)(u_T) differs from u_t".into()));
    }
    Ok(u)
}

/// One basis element through both transfer directions.
#[derive(Clone, Debug)]
pub struct Theorem5Entry {
    pub element: EpsPolynomial,
    pub family: Option<TPolynomial>,
    pub n_t: usize,
    pub n_eps: usize,
    /// `J(eps_from_t_family(t_family_from_eps(F))) = J(F)`.
    pub roundtrip: bool,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Theorem5Report {
    pub entries: Vec<Theorem5Entry>,
}

impl Theorem5Report {
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.roundtrip && e.error.is_none())
    }

    pub fn to_json(&self, names: &[String]) -> Value {
        json!({
            "all_ok": self.all_ok(),
            "entries": self.entries.iter().map(|e| json!({
                "element": e.element.format(names),
                "family": e.family.as_ref().map(|f| f.format(names)),
                "n_t": e.n_t,
                "n_eps": e.n_eps,
                "roundtrip": e.roundtrip,
                "error": e.error,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Runs every basis element of `solve_reduction(..., n)` through
/// `t_family_from_eps` (with its symbolic-`t` membership postcondition) and
/// back through `eps_from_t_family`, comparing `J`.
pub fn theorem5_roundtrip(
    setup: &SubalgebraSetup,
    diff: &ReductionDifferential,
    eps_order: usize,
    n: u32,
) -> Result<Theorem5Report> {
    let space = solve_reduction(setup, diff, eps_order, n)?;
    let mut entries = Vec::new();
    for b in &space.basis {
        let mut e = Theorem5Entry {
            element: b.clone(),
            family: None,
            n_t: 0,
            n_eps: 0,
            roundtrip: false,
            error: None,
        };
        match t_family_from_eps(b, setup, diff, eps_order) {
            Ok(fam) => {
                e.n_t = fam.n;
                match eps_from_t_family(&fam.element, setup, diff, eps_order) {
                    Ok(back) => {
                        e.n_eps = back.n;
                        e.roundtrip = specialize_eps1(&back.element) == specialize_eps1(b);
                    }
                    Err(err) => e.error = Some(err.to_string()),
                }
                e.family = Some(fam.element);
            }
            Err(err) => e.error = Some(err.to_string()),
        }
        entries.push(e);
    }
    Ok(Theorem5Report { entries })
}

/// Whether the square matrix over `Q[eps]` has a nonzero constant determinant.
fn is_unimodular(m: &[Vec<UniPoly>]) -> bool {
    let n = m.len();
    if n == 0 {
        return true;
    }
    let bound: usize = (0..n)
        .map(|c| m.iter().map(|r| r[c].degree().unwrap_or(0)).max().unwrap_or(0))
        .sum();
    let mut first: Option<Rational> = None;
    for s in 0..=bound as i64 {
        let e = ratio(2 * s + 3, 7);
        let rows: Vec<SparseRow> = m
            .iter()
            .map(|r| row_from_map(r.iter().enumerate().map(|(i, x)| (i, x.eval(&e))).collect()))
            .collect();
        let d = determinant(&rows, n);
        if d.is_zero() {
            return false;
        }
        match &first {
            None => first = Some(d),
            Some(f) if *f != d => return false,
            _ => {}
        }
    }
    true
}

fn determinant(rows: &[SparseRow], n: usize) -> Rational {
    let mut a: Vec<Vec<Rational>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![Rational::zero(); n];
            for (i, c) in r {
                v[*i] = c.clone();
            }
            v
        })
        .collect();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= &a[col][col];
        for r in col + 1..n {
            let f = &a[r][col] / &a[col][col];
            if !f.is_zero() {
                for c in col..n {
                    let x = &f * &a[col][c];
                    a[r][c] -= x;
                }
            }
        }
    }
    det
}

/// The candidate isomorphism with empty corrections.
fn iso(env: &Enveloping, f: &EpsPolynomial, setup: &SubalgebraSetup) -> Result<QuotientElement> {
    iso_candidate(env, f, setup, &CorrectionSeries::identity(), QuotientOptions::default())
}

/// Agreement of the `d^1` reduction space with the enveloping-side invariants.
#[derive(Clone, Debug)]
pub struct AgreementReport {
    pub reduction_dims: Vec<usize>,
    pub invariant_dims: Vec<usize>,
    pub dims_match: bool,
    pub bijective: bool,
    pub multiplicative: bool,
    pub pairs_checked: usize,
    pub failures: Vec<String>,
}

impl AgreementReport {
    pub fn consistent(&self) -> bool {
        self.dims_match && self.bijective && self.multiplicative
    }

    pub fn to_json(&self) -> Value {
        json!({
            "reduction_dims": self.reduction_dims,
            "invariant_dims": self.invariant_dims,
            "dims_match": self.dims_match,
            "bijective": self.bijective,
            "multiplicative": self.multiplicative,
            "pairs_checked": self.pairs_checked,
            "failures": self.failures,
            "verdict": if self.consistent() { "consistent" } else { "inconsistent" },
        })
    }
}

/// Compares `solve_reduction({d^1})` with `invariants_up_to_degree` through
/// degree `n`, and checks `iso_candidate` for bijectivity and
/// multiplicativity against `cf_product` on pairs of total degree `<= n`.
pub fn reduction_enveloping_agreement(setup: &SubalgebraSetup, n: u32) -> Result<AgreementReport> {
    let diff = ReductionDifferential::d1_only();
    let space = solve_reduction(setup, &diff, 1, n)?;
    let pres = invariants_up_to_degree(setup, n, EpsMode::Symbolic, QuotientOptions::default())?;
    let env = Enveloping::new(setup.algebra());
    let mut failures = Vec::new();
    let dims_match = space.degree_dims == pres.degree_dims;
    if !dims_match {
        failures.push(format!("dims {:?} vs {:?}", space.degree_dims, pres.degree_dims));
    }
    let images: Vec<QuotientElement> = space.basis.iter().map(|b| iso(&env, b, setup)).collect::<Result<_>>()?;
    let bijective = dims_match && iso_is_bijective(&pres, &images, &space.degree_dims, &mut failures);
    let (multiplicative, pairs_checked) = check_multiplicative(&space, &images, &env, n, &mut failures, |a, b| {
        pres.product(&env, a, b)
    })?;
    Ok(AgreementReport {
        reduction_dims: space.degree_dims,
        invariant_dims: pres.degree_dims,
        dims_match,
        bijective,
        multiplicative,
        pairs_checked,
        failures,
    })
}

fn iso_is_bijective(
    pres: &InvariantAlgebraPresentation,
    images: &[QuotientElement],
    dims: &[usize],
    failures: &mut Vec<String>,
) -> bool {
    let r = pres.dim();
    let mut m = vec![vec![UniPoly::zero(); r]; images.len()];
    for (row, img) in m.iter_mut().zip(images) {
        match pres.coordinates(img) {
            Some(c) => {
                for (i, p) in c {
                    row[i] = p;
                }
            }
            None => {
                failures.push(format!("image {} is not invariant", img.format(pres.names())));
                return false;
            }
        }
    }
    for &d in dims {
        let block: Vec<Vec<UniPoly>> = m[..d].iter().map(|row| row[..d].to_vec()).collect();
        if !is_unimodular(&block) {
            failures.push(format!("transition block of size {d} is not invertible over Q[eps]"));
            return false;
        }
    }
    true
}

fn check_multiplicative(
    space: &ReductionSpace,
    images: &[QuotientElement],
    env: &Enveloping,
    n: u32,
    failures: &mut Vec<String>,
    product: impl Fn(&QuotientElement, &QuotientElement) -> Result<QuotientElement>,
) -> Result<(bool, usize)> {
    let setup = &space.setup;
    let mut ok = true;
    let mut checked = 0;
    for a in 0..space.dim() {
        for b in 0..space.dim() {
            if space.degrees[a] + space.degrees[b] > n {
                continue;
            }
            let star = cf_product(&space.basis[a], &space.basis[b], setup, n as usize)?;
            let lhs = iso(env, &star, setup)?;
            let rhs = product(&images[a], &images[b])?;
            checked += 1;
            if lhs != rhs {
                ok = false;
                failures.push(format!(
                    "iso({} * {}) = {} but iso products give {}",
                    space.basis[a].format(setup.names()),
                    space.basis[b].format(setup.names()),
                    lhs.format(setup.names()),
                    rhs.format(setup.names())
                ));
            }
        }
    }
    Ok((ok, checked))
}

/// Comparison of `D_(T=1)` with `H^0_(eps=1)` through degree `n`.
#[derive(Clone, Debug)]
pub struct Theorem6Report {
    pub max_degree: u32,
    pub d_dims: Vec<usize>,
    pub h_dims: Vec<usize>,
    pub dims_match: bool,
    pub spans_match: bool,
    pub multiplicative: bool,
    pub inconclusive: Option<String>,
    pub failures: Vec<String>,
}

impl Theorem6Report {
    pub fn verdict(&self) -> &'static str {
        if self.inconclusive.is_some() {
            "inconclusive"
        } else if self.dims_match && self.spans_match && self.multiplicative {
            "consistent"
        } else {
            "inconsistent"
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "max_degree": self.max_degree,
            "d_T1_dims": self.d_dims,
            "h0_eps1_dims": self.h_dims,
            "dims_match": self.dims_match,
            "spans_match": self.spans_match,
            "multiplicative": self.multiplicative,
            "inconclusive": self.inconclusive,
            "failures": self.failures,
            "verdict": self.verdict(),
        })
    }
}

fn span_rank(polys: &[&Polynomial], coords: &mut Coords) -> usize {
    let rows: Vec<SparseRow> = polys.iter().map(|p| coords.row(0, p)).collect();
    rank_of(&rows, coords.len())
}

/// `D_(T=1)`: invariants of `(g_T, h^T)` at `eps = 1` evaluated at `T = 1`,
/// against the `J`-images of `H^0`, with `iso_candidate` at `eps = 1`.
pub fn theorem6_check(setup: &SubalgebraSetup, n: u32, eps_order: usize, diff: &ReductionDifferential) -> Result<Theorem6Report> {
    let ext = CentralExtension::new(setup)?;
    let pres_t = match invariants_up_to_degree(ext.extended(), n, EpsMode::One, QuotientOptions::default()) {
        Ok(p) => p,
        Err(Error::DegreeOverflow { degree, max }) => {
            return Ok(inconclusive(n, format!("degree {degree} exceeds the cap {max}")));
        }
        Err(e) => return Err(e),
    };
    let t_assign: BTreeMap<usize, Rational> = [(ext.t_index(), Rational::one())].into_iter().collect();
    let d_images: Vec<(u32, Polynomial)> = pres_t
        .basis
        .iter()
        .zip(&pres_t.degrees)
        .map(|(b, d)| (*d, b.0.sum_coeffs().substitute(&t_assign)))
        .collect();
    let space = solve_reduction(setup, diff, eps_order, n)?;
    let env = Enveloping::new(setup.algebra());
    let mut h_images = Vec::new();
    for (b, d) in space.basis.iter().zip(&space.degrees) {
        let j = map_j(b, setup, diff, eps_order)?;
        let img = iso(&env, &EpsPolynomial::constant(j.clone()), setup)?.0.sum_coeffs();
        h_images.push((*d, j, img));
    }
    let mut coords = Coords::default();
    let mut jcoords = Coords::default();
    let mut d_dims = Vec::new();
    let mut h_dims = Vec::new();
    let mut spans_match = true;
    let mut failures = Vec::new();
    for d in 0..=n {
        let dd: Vec<&Polynomial> = d_images.iter().filter(|(k, _)| *k <= d).map(|(_, p)| p).collect();
        let hj: Vec<&Polynomial> = h_images.iter().filter(|(k, _, _)| *k <= d).map(|(_, j, _)| j).collect();
        let hi: Vec<&Polynomial> = h_images.iter().filter(|(k, _, _)| *k <= d).map(|(_, _, i)| i).collect();
        let rd = span_rank(&dd, &mut coords);
        let rh = span_rank(&hj, &mut jcoords);
        let ri = span_rank(&hi, &mut coords);
        let both: Vec<&Polynomial> = dd.iter().chain(hi.iter()).copied().collect();
        let ru = span_rank(&both, &mut coords);
        d_dims.push(rd);
        h_dims.push(rh);
        if !(ri == rh && ru == rd && ri == rd) {
            spans_match = false;
            failures.push(format!("degree {d}: iso image rank {ri}, D rank {rd}, joint rank {ru}"));
        }
    }
    let dims_match = d_dims == h_dims;
    let mut multiplicative = true;
    let mut inconclusive_reason = None;
    'outer: for a in 0..space.dim() {
        for b in 0..space.dim() {
            if space.degrees[a] + space.degrees[b] > n {
                continue;
            }
            let star = match cf_product(&space.basis[a], &space.basis[b], setup, n as usize) {
                Ok(s) => s,
                Err(Error::MissingWeights(w)) => {
                    inconclusive_reason = Some(format!("reduced product unavailable: {}", w.join(", ")));
                    break 'outer;
                }
                Err(e) => return Err(e),
            };
            let lhs = iso(&env, &EpsPolynomial::constant(specialize_eps1(&star)), setup)?.0.sum_coeffs();
            let pa = EpsPolynomial::constant(h_images[a].2.clone());
            let pb = EpsPolynomial::constant(h_images[b].2.clone());
            let prod = env.multiply(&PbwElement(pa), &PbwElement(pb))?;
            let rhs = quotient_reduce(&prod, setup, QuotientOptions::default()).0.sum_coeffs();
            if lhs != rhs {
                multiplicative = false;
                failures.push(format!(
                    "iso(J(F*G)) = {} but iso(J F) iso(J G) = {}",
                    lhs.format(setup.names()),
                    rhs.format(setup.names())
                ));
            }
        }
    }
    Ok(Theorem6Report {
        max_degree: n,
        d_dims,
        h_dims,
        dims_match,
        spans_match,
        multiplicative,
        inconclusive: inconclusive_reason,
        failures,
    })
}

fn inconclusive(n: u32, reason: String) -> Theorem6Report {
    Theorem6Report {
        max_degree: n,
        d_dims: Vec::new(),
        h_dims: Vec::new(),
        dims_match: false,
        spans_match: false,
        multiplicative: false,
        inconclusive: Some(reason),
        failures: Vec::new(),
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::enveloping::s_invariants_up_to_degree;
    use crate::poly::parse_polynomial;
    use proptest::prelude::*;

    fn poly(s: &str, setup: &SubalgebraSetup) -> Polynomial {
        parse_polynomial(s, setup.names()).unwrap()
    }

    fn yz() -> SubalgebraSetup {
        corpus::default_setup("heisenberg3").unwrap()
    }

    #[test]
    fn d1_examples() {
        let s = yz();
        assert!(d1(&Polynomial::one(), &s).iter().all(|c| c.is_zero()));
        assert_eq!(d1(&poly("X", &s), &s), vec![Polynomial::one(), Polynomial::zero()]);
        let c = corpus::heisenberg3_center_setup();
        assert!(d1(&poly("X^2*Y + Y^3", &c), &c).iter().all(|p| p.is_zero()));
    }

    #[test]
    fn solve_examples() {
        let d = ReductionDifferential::d1_only();
        let sp = solve_reduction(&yz(), &d, 1, 6).unwrap();
        assert_eq!(sp.dim(), 1);
        assert!(sp.complete);
        let c = solve_reduction(&corpus::heisenberg3_center_setup(), &d, 1, 3).unwrap();
        assert_eq!(c.dim(), 10);
        let ab = corpus::default_setup("abelian2").unwrap();
        assert_eq!(solve_reduction(&ab, &d, 1, 4).unwrap().dim(), 5);
        assert!(matches!(solve_reduction(&yz(), &d, 3, 2), Err(Error::MissingWeights(ids)) if ids.len() == 2));
        let z = ReductionDifferential::with_zero_higher(5);
        let sp5 = solve_reduction(&yz(), &z, 5, 4).unwrap();
        assert_eq!(sp5.assumed_zero_orders, vec![3, 5]);
        assert_eq!(sp5.to_json()["imposed_orders"], json!([1, 3, 5]));
    }

    #[test]
    fn missing_weights_listed_together() {
        let err = ReductionDifferential::from_weights(&WeightTable::new(), 5).unwrap_err();
        match err {
            Error::MissingWeights(ids) => assert_eq!(ids.len(), 2 + 4),
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn higher_orders_lower_degree() {
        let mut t = WeightTable::new();
        for g in bernoulli_family(3).unwrap() {
            t.insert(&g, crate::graphs::WeightEntry::exact(ratio(1, 12)));
        }
        let d = ReductionDifferential::from_weights(&t, 3).unwrap();
        let s = corpus::default_setup("filiform4").unwrap();
        let f = poly("X1^4", &s);
        for c in d.apply_order(3, &f, &s) {
            assert!(c.degree().is_none_or(|k| k <= 2), "{c:?}");
        }
    }

    #[test]
    fn d1_kernel_matches_twisted_invariance() {
        for name in corpus::NAMES {
            let s = corpus::default_setup(name).unwrap();
            let r = solve_reduction(&s, &ReductionDifferential::d1_only(), 1, 4).unwrap();
            let p = s_invariants_up_to_degree(&s, 4).unwrap();
            assert_eq!(r.degree_dims, p.degree_dims, "{name}");
        }
    }

    #[test]
    fn membership() {
        let s = yz();
        let d = ReductionDifferential::d1_only();
        let m = membership_check(&EpsPolynomial::constant(poly("X", &s)), &s, &d, 1).unwrap();
        assert!(!m.member);
        assert_eq!(m.witness, Some(("Y".to_string(), 1, Polynomial::one())));
        let c = corpus::heisenberg3_center_setup();
        let sp = solve_reduction(&c, &d, 1, 2).unwrap();
        let sum = sp.basis.iter().fold(EpsPolynomial::zero(), |a, b| &a + b);
        assert!(membership_check(&sum, &c, &d, 1).unwrap().member);
        assert!(membership_check(&EpsPolynomial::constant(poly("Z", &c)), &c, &d, 1).is_err());
    }

    #[test]
    fn cf_product_examples() {
        let c = corpus::heisenberg3_center_setup();
        let x = EpsPolynomial::constant(poly("X", &c));
        let y = EpsPolynomial::constant(poly("Y", &c));
        let one = EpsPolynomial::constant(Polynomial::one());
        assert_eq!(cf_product(&one, &x, &c, 4).unwrap(), x);
        let xy = cf_product(&x, &y, &c, 4).unwrap();
        let yx = cf_product(&y, &x, &c, 4).unwrap();
        assert_eq!(xy.coeff(0), poly("X*Y", &c));
        assert_eq!(&xy - &yx, EpsPolynomial::monomial(1, Polynomial::constant(rat(-1))));
    }

    #[test]
    fn cf_product_needs_constant_bracket_beyond_first_order() {
        let s = SubalgebraSetup::by_names(&corpus::filiform4(), &["X4"], &[]).unwrap();
        assert!(!reduced_bracket_is_constant(&s));
        let f = EpsPolynomial::constant(poly("X1^2", &s));
        let g = EpsPolynomial::constant(poly("X2^2", &s));
        assert!(cf_product(&f, &g, &s, 1).is_ok());
        assert!(matches!(cf_product(&f, &g, &s, 2), Err(Error::MissingWeights(_))));
    }

    #[test]
    fn specialization_and_j() {
        let c = corpus::heisenberg3_center_setup();
        let x = poly("X", &c);
        let y = poly("Y", &c);
        assert_eq!(specialize_eps1(&EpsPolynomial::monomial(2, x.clone())), x);
        let f = &EpsPolynomial::constant(x.clone()) + &EpsPolynomial::monomial(1, y.clone());
        assert_eq!(specialize_eps1(&f), &x + &y);
        let g = &EpsPolynomial::constant(y.clone()) + &EpsPolynomial::monomial(2, x.pow(2));
        let lhs = specialize_eps1(&cf_product(&f, &g, &c, 8).unwrap());
        let one = |p: &Polynomial| EpsPolynomial::constant(p.clone());
        let rhs = specialize_eps1(&cf_product(&one(&specialize_eps1(&f)), &one(&specialize_eps1(&g)), &c, 8).unwrap());
        assert_eq!(lhs, rhs);
        let d = ReductionDifferential::d1_only();
        let sp = solve_reduction(&c, &d, 1, 3).unwrap();
        let images: Vec<Polynomial> = sp.basis.iter().map(|b| map_j(b, &c, &d, 1).unwrap()).collect();
        let mut coords = Coords::default();
        let refs: Vec<&Polynomial> = images.iter().collect();
        assert_eq!(span_rank(&refs, &mut coords), 10);
        assert!(matches!(
            map_j(&EpsPolynomial::constant(poly("X", &yz())), &yz(), &d, 1),
            Err(Error::Membership(_))
        ));
    }

    #[test]
    fn theorem5_examples() {
        let c = corpus::heisenberg3_center_setup();
        let d = ReductionDifferential::d1_only();
        let one = TPolynomial::constant(Polynomial::one());
        let r = eps_from_t_family(&one, &c, &d, 1).unwrap();
        assert_eq!((r.element.sum_coeffs(), r.n), (Polynomial::one(), 0));
        let tx = TPolynomial::monomial(1, poly("X", &c));
        let r = eps_from_t_family(&tx, &c, &d, 1).unwrap();
        assert_eq!(r.n, 2);
        assert_eq!(r.element, EpsPolynomial::constant(poly("X", &c)));
        let back = t_family_from_eps(&r.element, &c, &d, 1).unwrap();
        assert_eq!(back.element, TPolynomial::constant(poly("X", &c)));
        // a non-member family is rejected
        let s = yz();
        let fx = TPolynomial::constant(poly("X", &s));
        assert!(matches!(eps_from_t_family(&fx, &s, &d, 1), Err(Error::Membership(_))));
        // mixed weights: t x + y^2 + eps-free constant
        let f = &(&tx + &TPolynomial::constant(poly("Y^2", &c))) + &one;
        let e = eps_from_t_family(&f, &c, &d, 1).unwrap();
        assert_eq!(e.n, 2);
        assert_eq!(e.element.coeff(2), Polynomial::one());
        assert_eq!(specialize_eps1(&e.element), f.sum_coeffs());
    }

    #[test]
    fn t_scaling() {
        let s = yz();
        let d = ReductionDifferential::d1_only();
        assert_eq!(t_scaled_setup(&s, &rat(1)), s);
        assert!(t_scaled_setup(&s, &rat(0)).has_zero_character());
        for t in [rat(1), rat(-3), ratio(2, 5)] {
            assert_eq!(solve_reduction_at_t(&s, &d, &t, 1, 4).unwrap().dim(), 1);
        }
        // lambda = 0: Y acts by -x d/dz, which vanishes on S(q); z -> 0
        let zero = solve_reduction_at_t(&s, &d, &rat(0), 1, 4).unwrap();
        assert_eq!(zero.dim(), 5);
        // the symbolic-t system: d1(x) = t at Y
        let m = t_membership_check(&TPolynomial::constant(poly("X", &s)), &s, &d, 1).unwrap();
        assert_eq!(m.witness, Some(("Y".to_string(), 1, Polynomial::one())));
    }

    #[test]
    fn lifts() {
        let c = corpus::heisenberg3_center_setup();
        let ext = CentralExtension::new(&c).unwrap();
        let one = TPolynomial::constant(Polynomial::one());
        assert_eq!(lift_polynomial_family(&one, &ext).unwrap(), Polynomial::one());
        let tx = TPolynomial::monomial(1, poly("X", &c));
        let t = ext.t_index();
        assert_eq!(
            lift_polynomial_family(&tx, &ext).unwrap(),
            Polynomial::var(0).mul_monomial(&Monomial::var(t))
        );
        // x^2 t + y t^3 lifts and evaluates back for symbolic t
        let fam = &TPolynomial::monomial(1, poly("X^2", &c)) + &TPolynomial::monomial(3, poly("Y", &c));
        let u = lift_polynomial_family(&fam, &ext).unwrap();
        assert_eq!(ext.evaluate_symbolic(&u), fam);
        // x is not invariant under Y + 0*T in the (Y,Z) setup
        let s = yz();
        let e2 = CentralExtension::new(&s).unwrap();
        assert!(lift_polynomial_family(&TPolynomial::constant(poly("X", &s)), &e2).is_err());
    }

    #[test]
    fn theorem6_examples() {
        let d = ReductionDifferential::d1_only();
        let r = theorem6_check(&yz(), 3, 1, &d).unwrap();
        assert_eq!(r.verdict(), "consistent", "{:?}", r.failures);
        assert_eq!(r.d_dims, vec![1; 4]);
        let r = theorem6_check(&corpus::heisenberg3_center_setup(), 2, 1, &d).unwrap();
        assert_eq!(r.verdict(), "consistent", "{:?}", r.failures);
        assert_eq!(r.d_dims, vec![1, 3, 6]);
        assert_eq!(r.h_dims, vec![1, 3, 6]);
        let ab = corpus::default_setup("abelian2").unwrap();
        assert_eq!(theorem6_check(&ab, 3, 1, &d).unwrap().verdict(), "consistent");
    }

    #[test]
    fn agreement_small() {
        let r = reduction_enveloping_agreement(&corpus::heisenberg3_center_setup(), 3).unwrap();
        assert!(r.consistent(), "{:?}", r.failures);
        assert!(r.pairs_checked > 0);
        let r = reduction_enveloping_agreement(&yz(), 3).unwrap();
        assert!(r.consistent(), "{:?}", r.failures);
    }

    #[test]
    fn unimodular_detection() {
        let c = |v: i64| UniPoly::constant(rat(v));
        let e = UniPoly::monomial(1, rat(1));
        assert!(is_unimodular(&[vec![c(1), e.clone()], vec![c(0), c(2)]]));
        assert!(!is_unimodular(&[vec![e.clone(), c(0)], vec![c(0), c(1)]]));
        assert!(!is_unimodular(&[vec![c(1), c(1)], vec![c(1), c(1)]]));
    }

    fn arb_q_poly() -> impl Strategy<Value = Polynomial> {
        prop::collection::vec((0u32..3, 0u32..3, -3i64..4), 1..4).prop_map(|ts| {
            Polynomial::from_terms(ts.into_iter().map(|(a, b, c)| (Monomial::from_dense(&[a, b]), rat(c))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn d1_is_leibniz(f in arb_q_poly(), g in arb_q_poly()) {
            let s = corpus::default_setup("filiform4").unwrap();
            let s2 = SubalgebraSetup::by_names(s.algebra(), &["X3", "X4"], &[("X4", rat(2))]).unwrap();
            let lhs = d1(&(&f * &g), &s2);
            let (df, dg) = (d1(&f, &s2), d1(&g, &s2));
            for k in 0..lhs.len() {
                prop_assert_eq!(&lhs[k], &(&(&f * &dg[k]) + &(&g * &df[k])));
            }
        }

        #[test]
        fn moyal_is_associative_and_closed(f in arb_q_poly(), g in arb_q_poly(), h in arb_q_poly()) {
            let c = corpus::heisenberg3_center_setup();
            let e = |p: &Polynomial| EpsPolynomial::constant(p.clone());
            let fg = cf_product(&e(&f), &e(&g), &c, 8).unwrap();
            let gh = cf_product(&e(&g), &e(&h), &c, 8).unwrap();
            prop_assert_eq!(cf_product(&fg, &e(&h), &c, 8).unwrap(), cf_product(&e(&f), &gh, &c, 8).unwrap());
            let d = ReductionDifferential::d1_only();
            prop_assert!(membership_check(&fg, &c, &d, 1).unwrap().member);
        }
    }
}
