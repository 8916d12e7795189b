//! The deformed enveloping algebra `U_eps(g)` (relations `XY - YX = eps[X,Y]`)
//! in PBW normal order, its quotient by the left ideal generated by
//! `H + lambda(H)`, and degree-truncated invariant algebras on both the
//! enveloping and the Poisson side.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{LieAlgebra, SubalgebraSetup};
use crate::cascade::{solve_filtered, EpsOperator, EpsVector, FilteredKernel};
use crate::error::{Error, Result};
use crate::linalg::{row_from_map, Expresser, SparseRow};
use crate::poly::{max_degree, monomials_up_to, poisson_bracket_unchecked, EpsPolynomial, Monomial, Polynomial, UniPoly};
use crate::rational::Rational;

/// Element of `U_eps(g)`: monomials are normal-ordered words (basis order),
/// coefficients polynomial in `eps`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PbwElement(pub EpsPolynomial);

/// Class in `U_eps(g) / U_eps(g) h_lambda`, written on `q`-words only.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct QuotientElement(pub EpsPolynomial);

impl PbwElement {
    pub fn one() -> Self {
        PbwElement(EpsPolynomial::constant(Polynomial::one()))
    }

    /// Filtration degree (longest word).
    pub fn degree(&self) -> Option<u32> {
        self.0.total_degree()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn format(&self, names: &[String]) -> String {
        self.0.format(names)
    }
}

impl QuotientElement {
    pub fn one() -> Self {
        QuotientElement(EpsPolynomial::constant(Polynomial::one()))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn degree(&self) -> Option<u32> {
        self.0.total_degree()
    }

    /// The representative built from the same `q`-words.
    pub fn lift(&self) -> PbwElement {
        PbwElement(self.0.clone())
    }

    pub fn format(&self, names: &[String]) -> String {
        self.0.format(names)
    }
}

/// Options of the quotient map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct QuotientOptions {
    /// Use `H + eps*lambda(H)` instead of `H + lambda(H)` as ideal generators.
    pub lambda_eps_scaling: bool,
}

/// How `eps` is treated by the invariant solvers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsMode {
    /// Formal parameter; solutions form a `Q[eps]`-module.
    #[default]
    Symbolic,
    /// `eps = 1`, i.e. the ordinary enveloping algebra.
    One,
}

/// Multiplication in `U_eps(g)` with memoized straightening.
pub struct Enveloping {
    algebra: LieAlgebra,
    memo: Mutex<HashMap<(usize, Monomial), Arc<EpsPolynomial>>>,
}

impl Enveloping {
    pub fn new(algebra: &LieAlgebra) -> Self {
        Enveloping {
            algebra: algebra.clone(),
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn generator(&self, i: usize) -> PbwElement {
        PbwElement(EpsPolynomial::constant(Polynomial::var(i)))
    }

    /// Product `X_{w_1} X_{w_2} ... X_{w_k}` of a word in any order.
    pub fn word(&self, letters: &[usize]) -> Result<PbwElement> {
        let d = self.algebra.dim();
        if let Some(&bad) = letters.iter().find(|&&l| l >= d) {
            return Err(Error::VariableOutOfRange { index: bad, nvars: d });
        }
        check_cap(letters.len() as u32)?;
        let mut acc = EpsPolynomial::constant(Polynomial::one());
        for &l in letters.iter().rev() {
            acc = self.left_mul(l, &acc);
        }
        Ok(PbwElement(acc))
    }

    /// `X_i * w` for a normal-ordered word `w`, normal-ordered.
    pub fn left_mul_generator(&self, i: usize, w: &Monomial) -> Arc<EpsPolynomial> {
        let key = (i, w.clone());
        if let Some(v) = self.memo.lock().expect("memo lock").get(&key) {
            return v.clone();
        }
        let out = match w.min_var() {
            Some(j) if j < i => {
                // X_i X_j w' = X_j (X_i w') + eps [X_i, X_j] w'
                let rest = w.div_var(j).expect("min var divides");
                let inner = self.left_mul_generator(i, &rest);
                let mut acc = self.left_mul(j, &inner);
                let br = self.algebra.bracket_basis(i, j);
                if !br.is_empty() {
                    let mut corr = EpsPolynomial::zero();
                    for (k, c) in br {
                        corr += &self.left_mul_generator(*k, &rest).scale(c);
                    }
                    acc += &shift_eps(&corr, 1);
                }
                acc
            }
            _ => EpsPolynomial::constant(Polynomial::term(w.mul_var(i, 1), Rational::one())),
        };
        let out = Arc::new(out);
        self.memo.lock().expect("memo lock").insert(key, out.clone());
        out
    }

    /// `X_i * u` for a normal-ordered element `u`.
    pub fn left_mul(&self, i: usize, u: &EpsPolynomial) -> EpsPolynomial {
        let mut parts: Vec<EpsPolynomial> = Vec::new();
        for (k, p) in u.coeffs().iter().enumerate() {
            let mut acc = EpsPolynomial::zero();
            for (m, c) in p.terms() {
                acc += &self.left_mul_generator(i, m).scale(c);
            }
            parts.push(shift_eps(&acc, k));
        }
        parts.into_iter().fold(EpsPolynomial::zero(), |a, b| &a + &b)
    }

    /// Product in `U_eps(g)`; errors if the filtration degree exceeds the cap.
    pub fn multiply(&self, u: &PbwElement, v: &PbwElement) -> Result<PbwElement> {
        let deg = u.degree().unwrap_or(0) + v.degree().unwrap_or(0);
        check_cap(deg)?;
        Ok(self.multiply_unchecked(u, v))
    }

    pub fn multiply_unchecked(&self, u: &PbwElement, v: &PbwElement) -> PbwElement {
        let mut out = EpsPolynomial::zero();
        for (k, p) in u.0.coeffs().iter().enumerate() {
            let mut acc = EpsPolynomial::zero();
            for (m, c) in p.terms() {
                let mut w = v.0.clone();
                for l in m.word().into_iter().rev() {
                    w = self.left_mul(l, &w);
                }
                acc += &w.scale(c);
            }
            out += &shift_eps(&acc, k);
        }
        PbwElement(out)
    }

    pub fn commutator(&self, u: &PbwElement, v: &PbwElement) -> Result<PbwElement> {
        let a = self.multiply(u, v)?;
        let b = self.multiply(v, u)?;
        Ok(PbwElement(&a.0 - &b.0))
    }
}

pub(crate) fn check_cap(deg: u32) -> Result<()> {
    let max = max_degree();
    if deg > max {
        Err(Error::DegreeOverflow { degree: deg, max })
    } else {
        Ok(())
    }
}

/// Multiplies by `eps^k`.
pub fn shift_eps(p: &EpsPolynomial, k: usize) -> EpsPolynomial {
    if k == 0 || p.is_zero() {
        return p.clone();
    }
    let mut c = vec![Polynomial::zero(); k];
    c.extend(p.coeffs().iter().cloned());
    EpsPolynomial::from_coeffs(c)
}

/// `u * v` in `U_eps(g)` (one-off convenience; reuse an [`Enveloping`] for
/// repeated products).
pub fn pbw_multiply(u: &PbwElement, v: &PbwElement, algebra: &LieAlgebra) -> Result<PbwElement> {
    Enveloping::new(algebra).multiply(u, v)
}

/// Suffix substitution `h_k -> -lambda(h_k)` (or `-eps*lambda(h_k)`) on
/// normal-ordered words.
pub fn quotient_reduce(u: &PbwElement, setup: &SubalgebraSetup, opts: QuotientOptions) -> QuotientElement {
    let q = setup.q_len();
    let mut out = EpsPolynomial::zero();
    for (k, p) in u.0.coeffs().iter().enumerate() {
        let mut by_shift: BTreeMap<usize, Polynomial> = BTreeMap::new();
        for (m, c) in p.terms() {
            let (qpart, hpart) = m.split_at(q);
            let mut coef = c.clone();
            let mut hdeg = 0usize;
            for (i, e) in hpart.iter() {
                coef *= num_traits::pow(-setup.lambda(i), e as usize);
                hdeg += e as usize;
            }
            if coef.is_zero() {
                continue;
            }
            let shift = if opts.lambda_eps_scaling { hdeg } else { 0 };
            by_shift.entry(shift).or_default().add_term(qpart, coef);
        }
        for (s, poly) in by_shift {
            out += &EpsPolynomial::monomial(k + s, poly);
        }
    }
    QuotientElement(out)
}

/// `quotient_reduce((H_j + lambda_j) * u)` for the `h` index `j` (setup order).
pub fn twisted_left_action(
    env: &Enveloping,
    setup: &SubalgebraSetup,
    j: usize,
    u: &EpsPolynomial,
    opts: QuotientOptions,
) -> EpsPolynomial {
    let hu = env.left_mul(j, u);
    let mut r = quotient_reduce(&PbwElement(hu), setup, opts).0;
    let l = setup.lambda(j);
    if !l.is_zero() {
        let shift = if opts.lambda_eps_scaling { 1 } else { 0 };
        r += &shift_eps(&u.scale(&l), shift);
    }
    r
}

/// `h ↦ -lambda(h)` on a commutative polynomial.
pub fn reduce_to_q(f: &Polynomial, setup: &SubalgebraSetup) -> Polynomial {
    f.substitute(&setup.reduction_assignment(&Rational::one()))
}

/// `reduce({H_j, F})` for each `h` index, the Poisson form of the twisted action.
pub fn poisson_action(f: &Polynomial, setup: &SubalgebraSetup) -> Vec<Polynomial> {
    setup
        .h_indices()
        .map(|j| reduce_to_q(&poisson_bracket_unchecked(&Polynomial::var(j), f, setup.algebra()), setup))
        .collect()
}

/// Interns `(component, monomial)` output coordinates.
#[derive(Default)]
pub(crate) struct Coords {
    index: HashMap<(usize, Monomial), usize>,
}

impl Coords {
    pub(crate) fn len(&self) -> usize {
        self.index.len()
    }

    pub(crate) fn get(&mut self, comp: usize, m: &Monomial) -> usize {
        let n = self.index.len();
        *self.index.entry((comp, m.clone())).or_insert(n)
    }

    pub(crate) fn row(&mut self, comp: usize, p: &Polynomial) -> SparseRow {
        let mut acc = BTreeMap::new();
        for (m, c) in p.terms() {
            acc.insert(self.get(comp, m), c.clone());
        }
        row_from_map(acc)
    }

    pub(crate) fn eps_column(&mut self, comp: usize, p: &EpsPolynomial, col: &mut BTreeMap<usize, BTreeMap<usize, Rational>>) {
        for (k, poly) in p.coeffs().iter().enumerate() {
            for (w, x) in self.row(comp, poly) {
                *col.entry(k).or_default().entry(w).or_insert_with(Rational::zero) += x;
            }
        }
    }
}

pub(crate) fn finish_column(col: BTreeMap<usize, BTreeMap<usize, Rational>>) -> Vec<(usize, SparseRow)> {
    col.into_iter()
        .map(|(k, r)| (k, row_from_map(r)))
        .filter(|(_, r)| !r.is_empty())
        .collect()
}

pub(crate) fn eps_vector_to_poly(v: &EpsVector, monos: &[Monomial]) -> EpsPolynomial {
    EpsPolynomial::from_coeffs(
        v.parts
            .iter()
            .map(|part| Polynomial::from_terms(part.iter().map(|(i, c)| (monos[*i].clone(), c.clone()))))
            .collect(),
    )
}

pub(crate) fn set_eps_one(op: &EpsOperator) -> EpsOperator {
    EpsOperator {
        columns: op
            .eval_columns(&Rational::one())
            .into_iter()
            .map(|c| if c.is_empty() { vec![] } else { vec![(0, c)] })
            .collect(),
    }
}

pub(crate) fn prefix_sizes(monos: &[Monomial], n: u32) -> Vec<usize> {
    (0..=n).map(|d| monos.iter().filter(|m| m.degree() <= d).count()).collect()
}

pub(crate) fn default_depth(n: u32) -> usize {
    n as usize + 2
}

/// Coordinates of an element in a basis, for the product table.
pub type Coordinates = Vec<(usize, UniPoly)>;

#[derive(Clone, Debug, PartialEq)]
pub struct ProductEntry {
    pub i: usize,
    pub j: usize,
    /// `None` when the product leaves the truncation (`overflow`) or could
    /// not be expressed in the basis.
    pub coords: Option<Coordinates>,
    pub overflow: bool,
}

/// Degree-truncated `(U_eps(g)/U_eps(g)h_lambda)^h`.
#[derive(Clone, Debug)]
pub struct InvariantAlgebraPresentation {
    pub setup: SubalgebraSetup,
    pub max_degree: u32,
    pub mode: EpsMode,
    pub options: QuotientOptions,
    pub basis: Vec<QuotientElement>,
    /// Filtration degree of each basis element.
    pub degrees: Vec<u32>,
    /// Rank of the invariants of filtration degree `<= d`, for `d = 0..=N`.
    pub degree_dims: Vec<usize>,
    pub products: Vec<ProductEntry>,
    /// Completeness certificate of the kernel computation.
    pub complete: bool,
}

/// Linear operator `u -> ((H_j + lambda_j) u)_j` on `q`-words up to degree `n`.
fn u_invariance_operator(
    env: &Enveloping,
    setup: &SubalgebraSetup,
    monos: &[Monomial],
    opts: QuotientOptions,
) -> EpsOperator {
    let mut coords = Coords::default();
    let columns = monos
        .iter()
        .map(|m| {
            let u = EpsPolynomial::constant(Polynomial::term(m.clone(), Rational::one()));
            let mut col = BTreeMap::new();
            for j in setup.h_indices() {
                let img = twisted_left_action(env, setup, j, &u, opts);
                coords.eps_column(j, &img, &mut col);
            }
            finish_column(col)
        })
        .collect();
    EpsOperator { columns }
}

/// The invariant elements of the quotient up to filtration degree `n`,
/// with their product table.
pub fn invariants_up_to_degree(
    setup: &SubalgebraSetup,
    n: u32,
    mode: EpsMode,
    opts: QuotientOptions,
) -> Result<InvariantAlgebraPresentation> {
    check_cap(n)?;
    let env = Enveloping::new(setup.algebra());
    let q_vars: Vec<usize> = setup.q_indices().collect();
    let monos = monomials_up_to(&q_vars, n);
    let mut op = u_invariance_operator(&env, setup, &monos, opts);
    if mode == EpsMode::One {
        op = set_eps_one(&op);
    }
    let fk: FilteredKernel = solve_filtered(&op, &prefix_sizes(&monos, n), default_depth(n));
    let basis: Vec<QuotientElement> = fk
        .basis
        .iter()
        .map(|v| QuotientElement(eps_vector_to_poly(v, &monos)))
        .collect();
    let degrees = basis.iter().map(|b| b.degree().unwrap_or(0)).collect();
    let mut pres = InvariantAlgebraPresentation {
        setup: setup.clone(),
        max_degree: n,
        mode,
        options: opts,
        basis,
        degrees,
        degree_dims: fk.dims,
        products: Vec::new(),
        complete: fk.complete,
    };
    pres.products = pres.product_table(&env);
    Ok(pres)
}

impl InvariantAlgebraPresentation {
    pub fn names(&self) -> &[String] {
        self.setup.names()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Product of two quotient classes (valid when the left factor is invariant).
    pub fn product(&self, env: &Enveloping, a: &QuotientElement, b: &QuotientElement) -> Result<QuotientElement> {
        let p = env.multiply(&a.lift(), &b.lift())?;
        let r = quotient_reduce(&p, &self.setup, self.options);
        Ok(self.normalize(r))
    }

    fn normalize(&self, r: QuotientElement) -> QuotientElement {
        match self.mode {
            EpsMode::Symbolic => r,
            EpsMode::One => QuotientElement(EpsPolynomial::constant(r.0.sum_coeffs())),
        }
    }

    /// Coordinates of `x` in the basis; `None` if `x` is not in the span.
    pub fn coordinates(&self, x: &QuotientElement) -> Option<Coordinates> {
        let mut index: HashMap<Monomial, usize> = HashMap::new();
        let mut vecs = Vec::new();
        let to_row = |p: &Polynomial, index: &mut HashMap<Monomial, usize>| -> SparseRow {
            let mut acc = BTreeMap::new();
            for (m, c) in p.terms() {
                let n = index.len();
                acc.insert(*index.entry(m.clone()).or_insert(n), c.clone());
            }
            row_from_map(acc)
        };
        for b in &self.basis {
            vecs.push(to_row(&b.0.coeff(0), &mut index));
        }
        // register x's monomials too so that foreign monomials are detected
        let mut rem = x.0.clone();
        for p in x.0.coeffs() {
            to_row(p, &mut index);
        }
        let dim = index.len();
        let expr = Expresser::new(&vecs, dim);
        let mut coeffs: Vec<Vec<Rational>> = vec![Vec::new(); self.basis.len()];
        let cap = 4 * self.max_degree as usize + 8;
        for step in 0..=cap {
            if rem.is_zero() {
                let out = coeffs
                    .into_iter()
                    .enumerate()
                    .map(|(i, c)| (i, UniPoly::from_coeffs(c)))
                    .filter(|(_, c)| !c.is_zero())
                    .collect();
                return Some(out);
            }
            let lead = to_row(&rem.coeff(0), &mut index);
            let a = expr.express(&lead)?;
            for (i, ai) in a.iter().enumerate() {
                coeffs[i].resize(step + 1, Rational::zero());
                coeffs[i][step] = ai.clone();
                if !ai.is_zero() {
                    rem -= &self.basis[i].0.scale(ai);
                }
            }
            if !rem.coeff(0).is_zero() {
                return None;
            }
            rem = EpsPolynomial::from_coeffs(rem.coeffs().iter().skip(1).cloned().collect());
        }
        None
    }

    fn product_table(&self, env: &Enveloping) -> Vec<ProductEntry> {
        let mut out = Vec::new();
        for i in 0..self.basis.len() {
            for j in 0..self.basis.len() {
                if self.degrees[i] + self.degrees[j] > self.max_degree {
                    out.push(ProductEntry {
                        i,
                        j,
                        coords: None,
                        overflow: true,
                    });
                    continue;
                }
                let coords = self
                    .product(env, &self.basis[i], &self.basis[j])
                    .ok()
                    .and_then(|p| self.coordinates(&p));
                out.push(ProductEntry {
                    i,
                    j,
                    overflow: coords.is_none(),
                    coords,
                });
            }
        }
        out
    }

    pub fn any_overflow(&self) -> bool {
        self.products.iter().any(|p| p.overflow)
    }

    pub fn to_json(&self) -> Value {
        let names = self.names();
        let var = "eps";
        json!({
            "max_degree": self.max_degree,
            "mode": self.mode,
            "lambda_eps_scaling": self.options.lambda_eps_scaling,
            "q_variables": self.setup.q_names(),
            "basis": self.basis.iter().map(|b| b.format(names)).collect::<Vec<_>>(),
            "basis_degrees": self.degrees,
            "degree_dims": self.degree_dims,
            "complete": self.complete,
            "products": self.products.iter().map(|p| json!({
                "i": p.i,
                "j": p.j,
                "overflow": p.overflow,
                "coords": p.coords.as_ref().map(|c| c.iter().map(|(k, v)| json!([k, v.format(var)])).collect::<Vec<_>>()),
            })).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommutativityReport {
    /// `None` when every test overflowed the degree cap.
    pub commutative: Option<bool>,
    /// First failing pair `(i, j)` with the commutator class.
    pub witness: Option<(usize, usize, QuotientElement)>,
    pub tested: usize,
    pub overflowed: usize,
}

/// Commutators of all basis pairs, computed directly in the quotient.
pub fn is_commutative(pres: &InvariantAlgebraPresentation) -> CommutativityReport {
    let env = Enveloping::new(pres.setup.algebra());
    let (mut tested, mut overflowed) = (0, 0);
    for i in 0..pres.basis.len() {
        for j in (i + 1)..pres.basis.len() {
            let ab = pres.product(&env, &pres.basis[i], &pres.basis[j]);
            let ba = pres.product(&env, &pres.basis[j], &pres.basis[i]);
            match (ab, ba) {
                (Ok(ab), Ok(ba)) => {
                    tested += 1;
                    let c = QuotientElement(&ab.0 - &ba.0);
                    if !c.is_zero() {
                        return CommutativityReport {
                            commutative: Some(false),
                            witness: Some((i, j, c)),
                            tested,
                            overflowed,
                        };
                    }
                }
                _ => overflowed += 1,
            }
        }
    }
    CommutativityReport {
        commutative: if tested == 0 && overflowed > 0 { None } else { Some(true) },
        witness: None,
        tested,
        overflowed,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CenterReport<T> {
    pub basis: Vec<T>,
    /// Dimension of the center among basis elements of degree `<= d`.
    pub degree_dims: Vec<usize>,
    pub overflow: bool,
    pub complete: bool,
}

/// Center of the truncated invariant algebra: combinations `z` of basis
/// elements with `[z, b] = 0` for every basis element `b`.
pub fn center_of(pres: &InvariantAlgebraPresentation) -> CenterReport<QuotientElement> {
    let env = Enveloping::new(pres.setup.algebra());
    let r = pres.basis.len();
    let mut coords = Coords::default();
    let mut overflow = false;
    let mut columns = Vec::with_capacity(r);
    for i in 0..r {
        let mut col = BTreeMap::new();
        for j in 0..r {
            let ab = pres.product(&env, &pres.basis[i], &pres.basis[j]);
            let ba = pres.product(&env, &pres.basis[j], &pres.basis[i]);
            match (ab, ba) {
                (Ok(ab), Ok(ba)) => coords.eps_column(j, &(&ab.0 - &ba.0), &mut col),
                _ => overflow = true,
            }
        }
        columns.push(finish_column(col));
    }
    let op = EpsOperator { columns };
    let sizes: Vec<usize> = (0..=pres.max_degree)
        .map(|d| pres.degrees.iter().filter(|x| **x <= d).count())
        .collect();
    let fk = solve_filtered(&op, &sizes, default_depth(pres.max_degree));
    let basis = fk
        .basis
        .iter()
        .map(|v| {
            let mut acc = EpsPolynomial::zero();
            for (s, part) in v.parts.iter().enumerate() {
                for (i, c) in part {
                    acc += &shift_eps(&pres.basis[*i].0.scale(c), s);
                }
            }
            QuotientElement(acc)
        })
        .collect();
    CenterReport {
        basis,
        degree_dims: fk.dims,
        overflow,
        complete: fk.complete,
    }
}

/// Degree-truncated `(S(g)/S(g)h_lambda)^h`, written on `S(q)`.
#[derive(Clone, Debug)]
pub struct SInvariantPresentation {
    pub setup: SubalgebraSetup,
    pub max_degree: u32,
    pub basis: Vec<Polynomial>,
    pub degrees: Vec<u32>,
    pub degree_dims: Vec<usize>,
}

impl SInvariantPresentation {
    pub fn to_json(&self) -> Value {
        json!({
            "max_degree": self.max_degree,
            "q_variables": self.setup.q_names(),
            "basis": self.basis.iter().map(|b| b.format(self.setup.names())).collect::<Vec<_>>(),
            "basis_degrees": self.degrees,
            "degree_dims": self.degree_dims,
        })
    }

    /// Reduced Poisson bracket of two invariants.
    pub fn bracket(&self, f: &Polynomial, g: &Polynomial) -> Polynomial {
        reduce_to_q(&poisson_bracket_unchecked(f, g, self.setup.algebra()), &self.setup)
    }
}

/// Operator `F -> (reduce({H_j, F}))_j` on the given `q`-monomials.
pub fn poisson_invariance_operator(setup: &SubalgebraSetup, monos: &[Monomial]) -> EpsOperator {
    let mut coords = Coords::default();
    let columns = monos
        .iter()
        .map(|m| {
            let f = Polynomial::term(m.clone(), Rational::one());
            let mut col: BTreeMap<usize, BTreeMap<usize, Rational>> = BTreeMap::new();
            for (j, img) in setup.h_indices().zip(poisson_action(&f, setup)) {
                coords.eps_column(j, &EpsPolynomial::constant(img), &mut col);
            }
            finish_column(col)
        })
        .collect();
    EpsOperator { columns }
}

fn filtered_polys(fk: &FilteredKernel, monos: &[Monomial]) -> Vec<Polynomial> {
    fk.basis.iter().map(|v| eps_vector_to_poly(v, monos).coeff(0)).collect()
}

/// Poisson-side invariants up to degree `n`.
pub fn s_invariants_up_to_degree(setup: &SubalgebraSetup, n: u32) -> Result<SInvariantPresentation> {
    check_cap(n)?;
    let q_vars: Vec<usize> = setup.q_indices().collect();
    let monos = monomials_up_to(&q_vars, n);
    let op = poisson_invariance_operator(setup, &monos);
    let fk = solve_filtered(&op, &prefix_sizes(&monos, n), 0);
    let basis = filtered_polys(&fk, &monos);
    let degrees = basis.iter().map(|b| b.degree().unwrap_or(0)).collect();
    Ok(SInvariantPresentation {
        setup: setup.clone(),
        max_degree: n,
        basis,
        degrees,
        degree_dims: fk.dims,
    })
}

/// `S(g)^g` up to degree `n`: polynomials Poisson-commuting with every `x_i`.
pub fn symmetric_invariants(algebra: &LieAlgebra, n: u32) -> Result<Vec<Polynomial>> {
    check_cap(n)?;
    let vars: Vec<usize> = (0..algebra.dim()).collect();
    let monos = monomials_up_to(&vars, n);
    let mut coords = Coords::default();
    let columns = monos
        .iter()
        .map(|m| {
            let f = Polynomial::term(m.clone(), Rational::one());
            let mut col = BTreeMap::new();
            for i in 0..algebra.dim() {
                let b = poisson_bracket_unchecked(&Polynomial::var(i), &f, algebra);
                coords.eps_column(i, &EpsPolynomial::constant(b), &mut col);
            }
            finish_column(col)
        })
        .collect();
    let op = EpsOperator { columns };
    let fk = solve_filtered(&op, &prefix_sizes(&monos, n), 0);
    Ok(filtered_polys(&fk, &monos))
}

/// Poisson center of the truncated Poisson-side invariants.
pub fn poisson_center_of(pres: &SInvariantPresentation) -> CenterReport<Polynomial> {
    let r = pres.basis.len();
    let mut coords = Coords::default();
    let columns = (0..r)
        .map(|i| {
            let mut col = BTreeMap::new();
            for j in 0..r {
                let b = pres.bracket(&pres.basis[i], &pres.basis[j]);
                coords.eps_column(j, &EpsPolynomial::constant(b), &mut col);
            }
            finish_column(col)
        })
        .collect();
    let op = EpsOperator { columns };
    let sizes: Vec<usize> = (0..=pres.max_degree)
        .map(|d| pres.degrees.iter().filter(|x| **x <= d).count())
        .collect();
    let fk = solve_filtered(&op, &sizes, 0);
    let basis = fk
        .basis
        .iter()
        .map(|v| {
            v.lead()
                .iter()
                .fold(Polynomial::zero(), |acc, (i, c)| &acc + &pres.basis[*i].scale(c))
        })
        .collect();
    CenterReport {
        basis,
        degree_dims: fk.dims,
        overflow: false,
        complete: fk.complete,
    }
}

/// Scalar multiple helper used by callers building elements by hand.
pub fn quotient_from_poly(p: Polynomial) -> QuotientElement {
    QuotientElement(EpsPolynomial::constant(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::kernel_of_columns;
    use crate::rational::rat;

    fn names(s: &SubalgebraSetup) -> Vec<String> {
        s.names().to_vec()
    }

    fn e(p: Polynomial) -> PbwElement {
        PbwElement(EpsPolynomial::constant(p))
    }

    /// Oracle: rewrite a tensor word by repeatedly swapping the leftmost
    /// out-of-order adjacent pair, independent of the memoized recursion.
    fn brute_normal_order(word: &[usize], alg: &LieAlgebra) -> EpsPolynomial {
        let mut todo: Vec<(Vec<usize>, usize, Rational)> = vec![(word.to_vec(), 0, rat(1))];
        let mut out = EpsPolynomial::zero();
        while let Some((w, k, c)) = todo.pop() {
            match (0..w.len().saturating_sub(1)).find(|&a| w[a] > w[a + 1]) {
                None => {
                    let m = Monomial::from_exponents(w.iter().map(|i| (*i, 1)));
                    out += &EpsPolynomial::monomial(k, Polynomial::term(m, c));
                }
                Some(a) => {
                    let mut sw = w.clone();
                    sw.swap(a, a + 1);
                    todo.push((sw, k, c.clone()));
                    for (l, x) in alg.bracket_basis(w[a], w[a + 1]) {
                        let mut nw = w[..a].to_vec();
                        nw.push(*l);
                        nw.extend_from_slice(&w[a + 2..]);
                        todo.push((nw, k + 1, &c * x));
                    }
                }
            }
        }
        out
    }

    #[test]
    fn yx_straightens() {
        let g = corpus::heisenberg3();
        let env = Enveloping::new(&g);
        let yx = env.word(&[1, 0]).unwrap();
        let expected = EpsPolynomial::from_coeffs(vec![
            &Polynomial::var(0) * &Polynomial::var(1),
            -&Polynomial::var(2),
        ]);
        assert_eq!(yx.0, expected);
    }

    #[test]
    fn confluence_two_routes() {
        let g = corpus::heisenberg3();
        let env = Enveloping::new(&g);
        let y = env.generator(1);
        let x = env.generator(0);
        let a = env.multiply(&env.multiply(&y, &x).unwrap(), &x).unwrap();
        let b = env.multiply(&y, &env.multiply(&x, &x).unwrap()).unwrap();
        assert_eq!(a, b);
        let expected = EpsPolynomial::from_coeffs(vec![
            &Polynomial::var(0).pow(2) * &Polynomial::var(1),
            (&Polynomial::var(0) * &Polynomial::var(2)).scale(&rat(-2)),
        ]);
        assert_eq!(a.0, expected);
        assert_eq!(brute_normal_order(&[1, 0, 0], &g), expected);
    }

    #[test]
    fn brute_force_agreement_on_words() {
        for g in [corpus::heisenberg3(), corpus::filiform4(), corpus::axb()] {
            let env = Enveloping::new(&g);
            let d = g.dim();
            for a in 0..d {
                for b in 0..d {
                    for c in 0..d {
                        let w = [c, a, b];
                        assert_eq!(env.word(&w).unwrap().0, brute_normal_order(&w, &g));
                    }
                }
            }
        }
    }

    #[test]
    fn abelian_is_concatenation() {
        let g = corpus::abelian2();
        let env = Enveloping::new(&g);
        let p = env.word(&[1, 0, 1]).unwrap();
        assert_eq!(p.0, EpsPolynomial::constant(&Polynomial::var(0) * &Polynomial::var(1).pow(2)));
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let g = corpus::heisenberg3();
        let env = Enveloping::new(&g);
        let big = e(Polynomial::var(0).pow(10));
        assert!(matches!(env.multiply(&big, &big), Err(Error::DegreeOverflow { .. })));
    }

    #[test]
    fn quotient_reduce_examples() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Y", "Z"], &[("Z", rat(1))]).unwrap();
        let xz = e(&Polynomial::var(0) * &Polynomial::var(2));
        assert_eq!(quotient_reduce(&xz, &s, QuotientOptions::default()).0, EpsPolynomial::constant(-&Polynomial::var(0)));
        let xy = e(&Polynomial::var(0) * &Polynomial::var(1));
        assert!(quotient_reduce(&xy, &s, QuotientOptions::default()).is_zero());
        let scaled = quotient_reduce(&xz, &s, QuotientOptions { lambda_eps_scaling: true });
        assert_eq!(scaled.0, EpsPolynomial::monomial(1, -&Polynomial::var(0)));
    }

    #[test]
    fn ideal_membership_of_z_plus_one() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        let env = Enveloping::new(s.algebra());
        let zp1 = e(&Polynomial::var(2) + &Polynomial::one());
        for w in [vec![0usize], vec![1, 0], vec![0, 1, 1], vec![1, 1, 0, 2]] {
            let u = env.word(&w).unwrap();
            let p = env.multiply(&zp1, &u).unwrap();
            assert!(quotient_reduce(&p, &s, QuotientOptions::default()).is_zero());
        }
    }

    #[test]
    fn pbw_word_count() {
        // normal-ordered words of length <= N in dim variables: C(dim + N, N)
        for g in corpus::all() {
            let vars: Vec<usize> = (0..g.dim()).collect();
            for n in 0..=4u32 {
                let count = monomials_up_to(&vars, n).len();
                let binom = (1..=n as usize).fold(1usize, |acc, k| acc * (g.dim() + k) / k);
                assert_eq!(count, binom);
            }
        }
    }

    /// Dense oracle: invariants of the `q`-monomials of degree <= n at
    /// leading order (eps^1), plus the full condition at eps = 2.
    fn oracle_kernel_dim(s: &SubalgebraSetup, n: u32) -> usize {
        let monos = monomials_up_to(&s.q_indices().collect::<Vec<_>>(), n);
        let mut idx: HashMap<(usize, Monomial), usize> = HashMap::new();
        let cols: Vec<SparseRow> = monos
            .iter()
            .map(|m| {
                let mut acc = BTreeMap::new();
                for j in s.h_indices() {
                    // (H_j + lambda_j) m, straightened by the brute-force oracle
                    let mut w: Vec<usize> = vec![j];
                    w.extend(m.word());
                    let hm = PbwElement(brute_normal_order(&w, s.algebra()));
                    let mut r = quotient_reduce(&hm, s, QuotientOptions::default()).0;
                    r += &EpsPolynomial::constant(Polynomial::term(m.clone(), s.lambda(j)));
                    let at2 = r.eval(&rat(2));
                    for (mm, c) in at2.terms() {
                        let l = idx.len();
                        let k = *idx.entry((j, mm.clone())).or_insert(l);
                        acc.insert(k, c.clone());
                    }
                }
                row_from_map(acc)
            })
            .collect();
        kernel_of_columns(&cols).len()
    }

    #[test]
    fn heisenberg_polarization_gives_scalars() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Y", "Z"], &[("Z", rat(1))]).unwrap();
        let p = invariants_up_to_degree(&s, 6, EpsMode::Symbolic, QuotientOptions::default()).unwrap();
        assert_eq!(p.basis, vec![QuotientElement::one()]);
        assert_eq!(p.degree_dims, vec![1; 7]);
        assert_eq!(oracle_kernel_dim(&s, 6), 1);
        assert!(p.complete);
        assert_eq!(is_commutative(&p).commutative, Some(true));
    }

    #[test]
    fn heisenberg_center_only_gives_everything() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        let p = invariants_up_to_degree(&s, 2, EpsMode::Symbolic, QuotientOptions::default()).unwrap();
        assert_eq!(p.basis.len(), 6);
        assert_eq!(p.degree_dims, vec![1, 3, 6]);
        assert_eq!(oracle_kernel_dim(&s, 2), 6);
        let c = is_commutative(&p);
        assert_eq!(c.commutative, Some(false));
        let (i, j, w) = c.witness.unwrap();
        let nm = names(&s);
        let pair = (p.basis[i].format(&nm), p.basis[j].format(&nm));
        assert_eq!(pair, ("Y".to_string(), "X".to_string()));
        // [Y, X] = -eps Z = eps in the quotient, so [X, Y] = -eps
        assert_eq!(w.0, EpsPolynomial::monomial(1, Polynomial::one()));
        // the product table is closed in degree 2
        let xy = p.products.iter().find(|e| e.i == j && e.j == i).unwrap();
        assert!(xy.coords.is_some());
    }

    #[test]
    fn abelian_everything_invariant() {
        let g = corpus::abelian2();
        let s = SubalgebraSetup::by_names(&g, &["B"], &[]).unwrap();
        let p = invariants_up_to_degree(&s, 4, EpsMode::Symbolic, QuotientOptions::default()).unwrap();
        assert_eq!(p.degree_dims, vec![1, 2, 3, 4, 5]);
        assert_eq!(is_commutative(&p).commutative, Some(true));
    }

    #[test]
    fn center_of_weyl_type_quotient_is_scalars() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        let p = invariants_up_to_degree(&s, 2, EpsMode::Symbolic, QuotientOptions::default()).unwrap();
        let c = center_of(&p);
        assert_eq!(c.basis, vec![QuotientElement::one()]);
        assert_eq!(c.degree_dims, vec![1, 1, 1]);
        // Poisson side computed for comparison
        let sp = s_invariants_up_to_degree(&s, 2).unwrap();
        let pc = poisson_center_of(&sp);
        assert_eq!(pc.degree_dims, vec![1, 1, 1]);
    }

    #[test]
    fn s_invariants_examples() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Y", "Z"], &[("Z", rat(1))]).unwrap();
        let p = s_invariants_up_to_degree(&s, 6).unwrap();
        assert_eq!(p.basis, vec![Polynomial::one()]);
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        let p = s_invariants_up_to_degree(&s, 3).unwrap();
        assert_eq!(p.degree_dims, vec![1, 3, 6, 10]);
    }

    #[test]
    fn symmetric_invariants_degree_one_is_center() {
        for g in corpus::all() {
            let inv = symmetric_invariants(&g, 1).unwrap();
            let deg1 = inv.iter().filter(|p| p.degree() == Some(1)).count();
            // center of g: kernel of x -> ad x
            let cols: Vec<SparseRow> = (0..g.dim())
                .map(|i| {
                    let mut acc = BTreeMap::new();
                    for j in 0..g.dim() {
                        for (k, c) in g.bracket_basis(i, j) {
                            acc.insert(j * g.dim() + k, c.clone());
                        }
                    }
                    row_from_map(acc)
                })
                .collect();
            assert_eq!(deg1, kernel_of_columns(&cols).len(), "{}", g.name());
        }
    }

    #[test]
    fn eps_one_mode() {
        let g = corpus::heisenberg3();
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        let p = invariants_up_to_degree(&s, 2, EpsMode::One, QuotientOptions::default()).unwrap();
        assert_eq!(p.degree_dims, vec![1, 3, 6]);
        let c = is_commutative(&p);
        assert_eq!(c.witness.unwrap().2 .0, EpsPolynomial::constant(Polynomial::constant(rat(1))));
    }
}
