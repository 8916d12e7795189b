//! Lie algebras over the rationals, subalgebra/character data and the
//! central extension `g_T = g + QT`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{Echelon, SparseRow};
use crate::poly::Polynomial;
use crate::rational::{format_rational, Rational};

/// Above this dimension structure constants are stored as a triple list.
pub const DENSE_LIMIT: usize = 16;

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Dense(Vec<Rational>),
    Sparse(BTreeMap<(usize, usize, usize), Rational>),
}

/// A raw structure tensor `c[i][j][k]` meaning `[e_i, e_j] = sum_k c_ij^k e_k`,
/// not yet checked for antisymmetry or Jacobi.
#[derive(Clone, Debug, PartialEq)]
pub struct StructureTensor {
    dim: usize,
    storage: Storage,
}

impl StructureTensor {
    pub fn zeros(dim: usize) -> Self {
        let storage = if dim <= DENSE_LIMIT {
            Storage::Dense(vec![Rational::zero(); dim * dim * dim])
        } else {
            Storage::Sparse(BTreeMap::new())
        };
        StructureTensor { dim, storage }
    }

    /// From `(i, j, k, c)` entries; repeated entries are summed.
    pub fn from_entries(dim: usize, entries: impl IntoIterator<Item = (usize, usize, usize, Rational)>) -> Result<Self> {
        let mut t = Self::zeros(dim);
        for (i, j, k, c) in entries {
            if i >= dim || j >= dim || k >= dim {
                return Err(Error::Structure(format!(
                    "index ({i},{j},{k}) out of range for dimension {dim}"
                )));
            }
            let v = t.get(i, j, k) + c;
            t.set(i, j, k, v);
        }
        Ok(t)
    }

    /// From a nested `dim x dim x dim` array.
    pub fn from_nested(c: &[Vec<Vec<Rational>>]) -> Result<Self> {
        let dim = c.len();
        let mut entries = Vec::new();
        for (i, ci) in c.iter().enumerate() {
            if ci.len() != dim {
                return Err(Error::Structure(format!("row {i} has length {} != {dim}", ci.len())));
            }
            for (j, cij) in ci.iter().enumerate() {
                if cij.len() != dim {
                    return Err(Error::Structure(format!(
                        "entry ({i},{j}) has length {} != {dim}",
                        cij.len()
                    )));
                }
                for (k, v) in cij.iter().enumerate() {
                    if !v.is_zero() {
                        entries.push((i, j, k, v.clone()));
                    }
                }
            }
        }
        Self::from_entries(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> Rational {
        match &self.storage {
            Storage::Dense(v) => v[(i * self.dim + j) * self.dim + k].clone(),
            Storage::Sparse(m) => m.get(&(i, j, k)).cloned().unwrap_or_else(Rational::zero),
        }
    }

    fn set(&mut self, i: usize, j: usize, k: usize, c: Rational) {
        let dim = self.dim;
        match &mut self.storage {
            Storage::Dense(v) => v[(i * dim + j) * dim + k] = c,
            Storage::Sparse(m) => {
                if c.is_zero() {
                    m.remove(&(i, j, k));
                } else {
                    m.insert((i, j, k), c);
                }
            }
        }
    }

    /// Nonzero entries in `(i, j, k)` order.
    pub fn entries(&self) -> Vec<(usize, usize, usize, Rational)> {
        match &self.storage {
            Storage::Dense(v) => {
                let d = self.dim;
                v.iter()
                    .enumerate()
                    .filter(|(_, c)| !c.is_zero())
                    .map(|(n, c)| (n / (d * d), (n / d) % d, n % d, c.clone()))
                    .collect()
            }
            Storage::Sparse(m) => m.iter().map(|((i, j, k), c)| (*i, *j, *k, c.clone())).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Antisymmetry {
        i: usize,
        j: usize,
        k: usize,
    },
    Jacobi {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        #[serde(with = "crate::rational::serde_str")]
        value: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn describe(&self, names: &[String]) -> Vec<String> {
        let n = |i: &usize| names.get(*i).cloned().unwrap_or_else(|| format!("e{i}"));
        self.violations
            .iter()
            .map(|v| match v {
                Violation::Antisymmetry { i, j, k } => format!(
                    "antisymmetry violated at ({}, {}, {}): c_{{{},{}}}^{} != -c_{{{},{}}}^{}",
                    n(i), n(j), n(k), n(i), n(j), n(k), n(j), n(i), n(k)
                ),
                Violation::Jacobi { i, j, k, l, value } => format!(
                    "Jacobi identity violated for ({}, {}, {}) in component {}: {}",
                    n(i), n(j), n(k), n(l), format_rational(value)
                ),
            })
            .collect()
    }
}

/// Checks antisymmetry and the Jacobi identity, listing every violation.
pub fn validate(c: &StructureTensor) -> ValidationReport {
    let d = c.dim();
    let mut violations = Vec::new();
    for i in 0..d {
        for j in i..d {
            for k in 0..d {
                if !(c.get(i, j, k) + c.get(j, i, k)).is_zero() {
                    violations.push(Violation::Antisymmetry { i, j, k });
                }
            }
        }
    }
    // sparse bracket rows speed up the m-sum
    let mut rows: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); d * d];
    for (i, j, k, v) in c.entries() {
        rows[i * d + j].push((k, v));
    }
    for i in 0..d {
        for j in (i + 1)..d {
            for k in (j + 1)..d {
                let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                for (a, b, cc) in [(i, j, k), (j, k, i), (k, i, j)] {
                    for (m, x) in &rows[a * d + b] {
                        for (l, y) in &rows[m * d + cc] {
                            *acc.entry(*l).or_insert_with(Rational::zero) += x * y;
                        }
                    }
                }
                for (l, value) in acc {
                    if !value.is_zero() {
                        violations.push(Violation::Jacobi { i, j, k, l, value });
                    }
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A validated finite-dimensional Lie algebra over the rationals.
#[derive(Clone, PartialEq)]
pub struct LieAlgebra {
    name: String,
    basis_names: Vec<String>,
    tensor: StructureTensor,
    // [e_i, e_j] as a sparse vector, indexed i * dim + j
    brackets: Vec<Vec<(usize, Rational)>>,
}

impl fmt::Debug for LieAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieAlgebra({}, {:?})", self.name, self.basis_names)
    }
}

impl LieAlgebra {
    /// Rejects tensors that fail [`validate`].
    pub fn new(name: impl Into<String>, basis_names: Vec<String>, tensor: StructureTensor) -> Result<Self> {
        if basis_names.len() != tensor.dim() {
            return Err(Error::Structure(format!(
                "{} basis names for a tensor of dimension {}",
                basis_names.len(),
                tensor.dim()
            )));
        }
        if tensor.dim() == 0 {
            return Err(Error::Structure("dimension must be positive".into()));
        }
        let distinct: BTreeSet<&String> = basis_names.iter().collect();
        if distinct.len() != basis_names.len() {
            return Err(Error::Structure("basis names must be distinct".into()));
        }
        for n in &basis_names {
            if n == "eps" || n == "t" || !n.chars().next().is_some_and(|c| c.is_alphabetic() || c == '_') {
                return Err(Error::Structure(format!("invalid basis name {n:?}")));
            }
        }
        let report = validate(&tensor);
        if !report.is_valid() {
            return Err(Error::Validation(report.describe(&basis_names)));
        }
        let d = tensor.dim();
        let mut brackets = vec![Vec::new(); d * d];
        for (i, j, k, v) in tensor.entries() {
            brackets[i * d + j].push((k, v));
        }
        Ok(LieAlgebra {
            name: name.into(),
            basis_names,
            tensor,
            brackets,
        })
    }

    /// Builds from brackets `[left, right] = sum coeff * basis[k]`, filling in
    /// the antisymmetric partner of each bracket.
    pub fn from_brackets(
        name: impl Into<String>,
        basis_names: &[&str],
        brackets: &[(usize, usize, Vec<(usize, Rational)>)],
    ) -> Result<Self> {
        let dim = basis_names.len();
        let mut entries = Vec::new();
        for (i, j, res) in brackets {
            for (k, c) in res {
                entries.push((*i, *j, *k, c.clone()));
                entries.push((*j, *i, *k, -c.clone()));
            }
        }
        let tensor = StructureTensor::from_entries(dim, entries)?;
        Self::new(name, basis_names.iter().map(|s| s.to_string()).collect(), tensor)
    }

    pub fn abelian(name: impl Into<String>, basis_names: &[&str]) -> Result<Self> {
        Self::from_brackets(name, basis_names, &[])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis_names.len()
    }

    pub fn basis_names(&self) -> &[String] {
        &self.basis_names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis_names.iter().position(|n| n == name)
    }

    pub fn tensor(&self) -> &StructureTensor {
        &self.tensor
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> Rational {
        self.tensor.get(i, j, k)
    }

    /// `[e_i, e_j]` as sparse coordinates.
    pub fn bracket_basis(&self, i: usize, j: usize) -> &[(usize, Rational)] {
        &self.brackets[i * self.dim() + j]
    }

    /// Bracket of coordinate vectors.
    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.dim()];
        for (i, xi) in x.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
            for (j, yj) in y.iter().enumerate().filter(|(_, v)| !v.is_zero()) {
                for (k, c) in self.bracket_basis(i, j) {
                    out[k.to_owned()] += xi * yj * c;
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.brackets.iter().all(|b| b.is_empty())
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.tensor)
    }

    /// Dimensions of `g, [g,g], [g,[g,g]], ...` until the series stabilizes
    /// (the repeated value is listed once) or reaches zero.
    pub fn lower_central_series(&self) -> Vec<usize> {
        let d = self.dim();
        let mut current: Vec<SparseRow> = (0..d).map(|i| vec![(i, Rational::one())]).collect();
        let mut dims = vec![d];
        loop {
            let mut e = Echelon::new(d);
            for v in &current {
                for i in 0..d {
                    let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                    for (j, x) in v {
                        for (k, c) in self.bracket_basis(i, *j) {
                            *acc.entry(*k).or_insert_with(Rational::zero) += x * c;
                        }
                    }
                    e.insert(crate::linalg::row_from_map(acc));
                }
            }
            let r = e.rank();
            let prev = *dims.last().expect("non-empty");
            dims.push(r);
            if r == 0 || r == prev {
                return dims;
            }
            current = e.rows().cloned().collect();
        }
    }

    pub fn is_nilpotent(&self) -> bool {
        self.lower_central_series().last() == Some(&0)
    }

    /// Matrix of `ad Y` with polynomial entries, `M[k][j] = sum_i Y_i c_ij^k`;
    /// column `j` is the image of `e_j`.
    pub fn adjoint_matrix(&self, y: &[Polynomial]) -> Vec<Vec<Polynomial>> {
        let d = self.dim();
        let mut m = vec![vec![Polynomial::zero(); d]; d];
        for (i, yi) in y.iter().enumerate().take(d) {
            if yi.is_zero() {
                continue;
            }
            for j in 0..d {
                for (k, c) in self.bracket_basis(i, j) {
                    m[*k][j] += &yi.scale(c);
                }
            }
        }
        m
    }

    /// `ad Y` for symbolic `Y = sum_i x_i e_i`.
    pub fn adjoint_matrix_symbolic(&self) -> Vec<Vec<Polynomial>> {
        let y: Vec<Polynomial> = (0..self.dim()).map(Polynomial::var).collect();
        self.adjoint_matrix(&y)
    }

    /// Same algebra with basis permuted: new index `n` is old index `order[n]`.
    pub fn permuted(&self, order: &[usize]) -> Result<LieAlgebra> {
        let d = self.dim();
        let mut inv = vec![usize::MAX; d];
        for (n, o) in order.iter().enumerate() {
            inv[*o] = n;
        }
        if order.len() != d || inv.contains(&usize::MAX) {
            return Err(Error::Structure("not a permutation of the basis".into()));
        }
        let entries = self
            .tensor
            .entries()
            .into_iter()
            .map(|(i, j, k, c)| (inv[i], inv[j], inv[k], c));
        let tensor = StructureTensor::from_entries(d, entries)?;
        let names = order.iter().map(|o| self.basis_names[*o].clone()).collect();
        LieAlgebra::new(self.name.clone(), names, tensor)
    }

    /// Structure constants scaled by `s` (still a Lie algebra).
    pub fn scaled(&self, s: &Rational) -> LieAlgebra {
        let entries = self.tensor.entries().into_iter().map(|(i, j, k, c)| (i, j, k, c * s));
        let tensor = StructureTensor::from_entries(self.dim(), entries).expect("same shape");
        LieAlgebra::new(self.name.clone(), self.basis_names.clone(), tensor).expect("scaling preserves validity")
    }
}

/// A subalgebra `h`, a complement `q` and a character `lambda` of `h`.
///
/// The basis of the stored algebra is reordered so that the `q` indices come
/// first and the `h` indices last; `q_len()` marks the split.
#[derive(Clone, Debug, PartialEq)]
pub struct SubalgebraSetup {
    algebra: LieAlgebra,
    q_len: usize,
    lambda: Vec<Rational>,
    original_index: Vec<usize>,
}

impl SubalgebraSetup {
    /// `h_indices` and the keys of `lambda` refer to the algebra's basis as
    /// given; missing lambda values are zero.
    pub fn new(algebra: &LieAlgebra, h_indices: &[usize], lambda: &BTreeMap<usize, Rational>) -> Result<Self> {
        let d = algebra.dim();
        let h: BTreeSet<usize> = h_indices.iter().copied().collect();
        let mut errors = Vec::new();
        if h.len() != h_indices.len() {
            errors.push("subalgebra indices repeated".to_string());
        }
        if let Some(bad) = h.iter().find(|i| **i >= d) {
            return Err(Error::Structure(format!("subalgebra index {bad} out of range")));
        }
        for k in lambda.keys() {
            if !h.contains(k) {
                errors.push(format!(
                    "character given on {} which is not in the subalgebra",
                    algebra.basis_names()[*k]
                ));
            }
        }
        let names = algebra.basis_names();
        for &i in &h {
            for &j in &h {
                if i >= j {
                    continue;
                }
                for (k, _) in algebra.bracket_basis(i, j) {
                    if !h.contains(k) {
                        errors.push(format!(
                            "subalgebra not closed: [{}, {}] has a component along {}",
                            names[i], names[j], names[*k]
                        ));
                    }
                }
                let val: Rational = algebra
                    .bracket_basis(i, j)
                    .iter()
                    .map(|(k, c)| c * lambda.get(k).cloned().unwrap_or_else(Rational::zero))
                    .fold(Rational::zero(), |a, b| a + b);
                if !val.is_zero() {
                    errors.push(format!(
                        "character violation: lambda([{}, {}]) = {} != 0",
                        names[i],
                        names[j],
                        format_rational(&val)
                    ));
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::Validation(errors));
        }
        let mut order: Vec<usize> = (0..d).filter(|i| !h.contains(i)).collect();
        let q_len = order.len();
        order.extend(h.iter().copied());
        let lambda_vec = order[q_len..]
            .iter()
            .map(|i| lambda.get(i).cloned().unwrap_or_else(Rational::zero))
            .collect();
        Ok(SubalgebraSetup {
            algebra: algebra.permuted(&order)?,
            q_len,
            lambda: lambda_vec,
            original_index: order,
        })
    }

    /// Convenience constructor by basis names.
    pub fn by_names(algebra: &LieAlgebra, h: &[&str], lambda: &[(&str, Rational)]) -> Result<Self> {
        let idx = |n: &str| {
            algebra
                .index_of(n)
                .ok_or_else(|| Error::Structure(format!("unknown basis element {n:?}")))
        };
        let h_idx = h.iter().map(|n| idx(n)).collect::<Result<Vec<_>>>()?;
        let mut lam = BTreeMap::new();
        for (n, v) in lambda {
            lam.insert(idx(n)?, v.clone());
        }
        Self::new(algebra, &h_idx, &lam)
    }

    /// The algebra in setup order (`q` first, then `h`).
    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn dim(&self) -> usize {
        self.algebra.dim()
    }

    pub fn q_len(&self) -> usize {
        self.q_len
    }

    pub fn h_len(&self) -> usize {
        self.dim() - self.q_len
    }

    pub fn q_indices(&self) -> std::ops::Range<usize> {
        0..self.q_len
    }

    pub fn h_indices(&self) -> std::ops::Range<usize> {
        self.q_len..self.dim()
    }

    pub fn is_h(&self, i: usize) -> bool {
        i >= self.q_len
    }

    /// `lambda(e_i)` for an `h` index in setup order.
    pub fn lambda(&self, i: usize) -> Rational {
        if self.is_h(i) {
            self.lambda[i - self.q_len].clone()
        } else {
            Rational::zero()
        }
    }

    pub fn lambda_values(&self) -> &[Rational] {
        &self.lambda
    }

    pub fn names(&self) -> &[String] {
        self.algebra.basis_names()
    }

    pub fn q_names(&self) -> &[String] {
        &self.algebra.basis_names()[..self.q_len]
    }

    /// Index in the algebra as originally given.
    pub fn original_index(&self, i: usize) -> usize {
        self.original_index[i]
    }

    /// The substitution `h_k -> -s * lambda(h_k)` defining the reduction to
    /// `S(q)` on `h_lambda^perp`.
    pub fn reduction_assignment(&self, s: &Rational) -> BTreeMap<usize, Rational> {
        self.h_indices().map(|i| (i, -(s * self.lambda(i)))).collect()
    }

    /// The same data with `lambda` replaced by `t * lambda`.
    pub fn scaled_character(&self, t: &Rational) -> SubalgebraSetup {
        let mut s = self.clone();
        s.lambda = self.lambda.iter().map(|l| l * t).collect();
        s
    }

    pub fn has_zero_character(&self) -> bool {
        self.lambda.iter().all(|l| l.is_zero())
    }
}

/// `g_T = g + QT` with `T` central, in the basis `(q..., T, H_1 + lambda_1 T, ...)`.
///
/// In this basis the extended subalgebra `h^T` is spanned by the last
/// `h_len` basis vectors and carries the zero character.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralExtension {
    base: SubalgebraSetup,
    extended: SubalgebraSetup,
}

impl CentralExtension {
    pub fn new(base: &SubalgebraSetup) -> Result<Self> {
        let g = base.algebra();
        let d = g.dim();
        let q = base.q_len();
        let t_idx = q;
        // base index -> extended index
        let ext_of = |i: usize| if i < q { i } else { i + 1 };
        let mut entries = Vec::new();
        for (i, j, k, c) in g.tensor().entries() {
            let (ei, ej) = (ext_of(i), ext_of(j));
            if k < q {
                entries.push((ei, ej, k, c));
            } else {
                // e_k = H'_k - lambda_k T
                entries.push((ei, ej, ext_of(k), c.clone()));
                let l = base.lambda(k);
                if !l.is_zero() {
                    entries.push((ei, ej, t_idx, -(c * l)));
                }
            }
        }
        let tensor = StructureTensor::from_entries(d + 1, entries)?;
        let mut names: Vec<String> = g.basis_names()[..q].to_vec();
        names.push(unique_name("T", g.basis_names()));
        for n in &g.basis_names()[q..] {
            names.push(format!("{n}_T"));
        }
        let ext_alg = LieAlgebra::new(format!("{}_T", g.name()), names, tensor)?;
        let h_idx: Vec<usize> = (q + 1..=d).collect();
        let extended = SubalgebraSetup::new(&ext_alg, &h_idx, &BTreeMap::new())?;
        debug_assert_eq!(extended.q_len(), q + 1);
        Ok(CentralExtension {
            base: base.clone(),
            extended,
        })
    }

    pub fn base(&self) -> &SubalgebraSetup {
        &self.base
    }

    /// The extended algebra with `h^T`, zero character.
    pub fn extended(&self) -> &SubalgebraSetup {
        &self.extended
    }

    pub fn t_index(&self) -> usize {
        self.base.q_len()
    }

    /// `e_{T=t}`: `T -> t`, `H'_j -> H_j + lambda_j t`, identity on `q`.
    pub fn evaluate(&self, p: &Polynomial, t: &Rational) -> Polynomial {
        let q = self.base.q_len();
        let mut assign: BTreeMap<usize, Polynomial> = BTreeMap::new();
        assign.insert(q, Polynomial::constant(t.clone()));
        for i in self.base.h_indices() {
            let img = &Polynomial::var(i) + &Polynomial::constant(self.base.lambda(i) * t);
            // placeholder index beyond both algebras to avoid clobbering
            assign.insert(i + 1, img);
        }
        // h' variables sit at i + 1 in the extension; substitute simultaneously
        p.substitute_poly(&assign)
    }

    /// `e_{T=t}` for symbolic `t`: the result as a polynomial family in `t`.
    pub fn evaluate_symbolic(&self, p: &Polynomial) -> crate::poly::TPolynomial {
        let q = self.base.q_len();
        let mut out = crate::poly::TPolynomial::zero();
        for (m, c) in p.terms() {
            // expand prod (H_j + lambda_j t)^b * t^a
            let mut acc = crate::poly::TPolynomial::constant(Polynomial::constant(c.clone()));
            let mut rest = Vec::new();
            for (i, e) in m.iter() {
                if i < q {
                    rest.push((i, e));
                } else if i == q {
                    acc = &acc * &crate::poly::TPolynomial::monomial(e as usize, Polynomial::one());
                } else {
                    let base_i = i - 1;
                    let f = crate::poly::TPolynomial::from_coeffs(vec![
                        Polynomial::var(base_i),
                        Polynomial::constant(self.base.lambda(base_i)),
                    ]);
                    for _ in 0..e {
                        acc = &acc * &f;
                    }
                }
            }
            let mono = crate::poly::Monomial::from_exponents(rest);
            out = &out + &acc.map(|x| x.mul_monomial(&mono));
        }
        out
    }
}

fn unique_name(base: &str, taken: &[String]) -> String {
    let mut n = base.to_string();
    while taken.contains(&n) {
        n.push('_');
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, ratio};

    fn heis() -> LieAlgebra {
        LieAlgebra::from_brackets("heisenberg3", &["X", "Y", "Z"], &[(0, 1, vec![(2, rat(1))])]).unwrap()
    }

    fn axb() -> LieAlgebra {
        LieAlgebra::from_brackets("axb", &["H", "E"], &[(0, 1, vec![(1, rat(1))])]).unwrap()
    }

    /// Independent Jacobi oracle: nested brackets of basis coordinate vectors.
    fn brute_jacobi(t: &StructureTensor) -> Vec<(usize, usize, usize, usize)> {
        let d = t.dim();
        let br = |x: &[Rational], y: &[Rational]| -> Vec<Rational> {
            let mut out = vec![Rational::zero(); d];
            for i in 0..d {
                for j in 0..d {
                    for k in 0..d {
                        out[k] += &x[i] * &y[j] * t.get(i, j, k);
                    }
                }
            }
            out
        };
        let e = |i: usize| -> Vec<Rational> { (0..d).map(|k| if k == i { rat(1) } else { rat(0) }).collect() };
        let mut bad = Vec::new();
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    let a = br(&e(i), &br(&e(j), &e(k)));
                    let b = br(&e(j), &br(&e(k), &e(i)));
                    let c = br(&e(k), &br(&e(i), &e(j)));
                    for l in 0..d {
                        if !(&a[l] + &b[l] + &c[l]).is_zero() {
                            bad.push((i, j, k, l));
                        }
                    }
                }
            }
        }
        bad
    }

    #[test]
    fn heisenberg_is_valid() {
        assert!(heis().validate().is_valid());
    }

    #[test]
    fn antisymmetry_violation_detected() {
        let t = StructureTensor::from_entries(3, vec![(0, 1, 2, rat(1)), (1, 0, 2, rat(1))]).unwrap();
        let r = validate(&t);
        assert_eq!(r.violations, vec![Violation::Antisymmetry { i: 0, j: 1, k: 2 }]);
        assert!(LieAlgebra::new("bad", vec!["X".into(), "Y".into(), "Z".into()], t).is_err());
    }

    #[test]
    fn jacobi_report_matches_brute_force() {
        // [X,Y]=Z, [X,Z]=Y, [Y,Z]=0
        let entries = vec![
            (0, 1, 2, rat(1)),
            (1, 0, 2, rat(-1)),
            (0, 2, 1, rat(1)),
            (2, 0, 1, rat(-1)),
        ];
        let t = StructureTensor::from_entries(3, entries).unwrap();
        let r = validate(&t);
        let from_validator: Vec<_> = r
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::Jacobi { i, j, k, l, .. } => Some((*i, *j, *k, *l)),
                _ => None,
            })
            .collect();
        assert_eq!(from_validator, brute_jacobi(&t));
        assert!(r.is_valid());

        // a genuinely broken tensor: [X,Y]=Y, [Y,Z]=X, [X,Z]=0
        let entries = vec![(0, 1, 1, rat(1)), (1, 0, 1, rat(-1)), (1, 2, 0, rat(1)), (2, 1, 0, rat(-1))];
        let t = StructureTensor::from_entries(3, entries).unwrap();
        let r = validate(&t);
        let from_validator: Vec<_> = r
            .violations
            .iter()
            .filter_map(|v| match v {
                Violation::Jacobi { i, j, k, l, .. } => Some((*i, *j, *k, *l)),
                _ => None,
            })
            .collect();
        assert!(!from_validator.is_empty());
        assert_eq!(from_validator, brute_jacobi(&t));
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let bad = vec![vec![vec![rat(0); 2]; 2], vec![vec![rat(0); 2]]];
        assert!(matches!(StructureTensor::from_nested(&bad), Err(Error::Structure(_))));
    }

    #[test]
    fn lower_central_series_examples() {
        assert_eq!(heis().lower_central_series(), vec![3, 1, 0]);
        assert_eq!(LieAlgebra::abelian("ab", &["A", "B"]).unwrap().lower_central_series(), vec![2, 0]);
        assert_eq!(axb().lower_central_series(), vec![2, 1, 1]);
        assert!(!axb().is_nilpotent());
    }

    #[test]
    fn adjoint_examples() {
        let g = heis();
        let m = g.adjoint_matrix(&[Polynomial::one(), Polynomial::zero(), Polynomial::zero()]);
        // ad X: Y -> Z, X -> 0, Z -> 0
        assert_eq!(m[2][1], Polynomial::one());
        let nonzero: usize = m.iter().flatten().filter(|p| !p.is_zero()).count();
        assert_eq!(nonzero, 1);

        let a = axb();
        let m = a.adjoint_matrix(&[Polynomial::one(), Polynomial::zero()]);
        assert_eq!(m[1][1], Polynomial::one());
        assert!(m[0][0].is_zero() && m[0][1].is_zero() && m[1][0].is_zero());

        let z = g.adjoint_matrix(&[Polynomial::zero(), Polynomial::zero(), Polynomial::zero()]);
        assert!(z.iter().flatten().all(|p| p.is_zero()));
    }

    #[test]
    fn setup_reorders_q_first() {
        let g = heis();
        let s = SubalgebraSetup::by_names(&g, &["Z"], &[("Z", rat(1))]).unwrap();
        assert_eq!(s.names(), &["X", "Y", "Z"]);
        let s = SubalgebraSetup::by_names(&g, &["X", "Z"], &[("Z", rat(1))]).unwrap();
        assert_eq!(s.names(), &["Y", "X", "Z"]);
        assert_eq!(s.q_len(), 1);
        assert_eq!(s.lambda(2), rat(1));
        // brackets follow the permutation: [X, Y] = Z becomes [e1, e0] = e2
        assert_eq!(s.algebra().c(1, 0, 2), rat(1));
    }

    #[test]
    fn character_violation() {
        let g = heis();
        let e = SubalgebraSetup::by_names(&g, &["X", "Y", "Z"], &[("Z", ratio(1, 2))]).unwrap_err();
        assert!(matches!(e, Error::Validation(v) if v.iter().any(|m| m.contains("character"))));
        let e = SubalgebraSetup::by_names(&g, &["X", "Y"], &[]).unwrap_err();
        assert!(matches!(e, Error::Validation(v) if v.iter().any(|m| m.contains("not closed"))));
    }

    #[test]
    fn central_extension_of_heisenberg() {
        let g = heis();
        let s = SubalgebraSetup::by_names(&g, &["Y", "Z"], &[("Z", rat(1))]).unwrap();
        let ext = CentralExtension::new(&s).unwrap();
        let e = ext.extended();
        assert_eq!(e.dim(), 4);
        assert_eq!(e.names(), &["X", "T", "Y_T", "Z_T"]);
        // [X, Y] = Z = Z_T - T
        assert_eq!(e.algebra().c(0, 2, 3), rat(1));
        assert_eq!(e.algebra().c(0, 2, 1), rat(-1));
        // T central
        for j in 0..4 {
            assert!(e.algebra().bracket_basis(1, j).is_empty());
        }
        // e_{T=1}(Z_T) = Z + 1, the h_lambda generator
        let img = ext.evaluate(&Polynomial::var(3), &rat(1));
        assert_eq!(img, &Polynomial::var(2) + &Polynomial::one());
    }

    #[test]
    fn abelian_extension_is_abelian() {
        let g = LieAlgebra::abelian("ab", &["A", "B"]).unwrap();
        let s = SubalgebraSetup::by_names(&g, &["B"], &[("B", rat(3))]).unwrap();
        let ext = CentralExtension::new(&s).unwrap();
        assert!(ext.extended().algebra().is_abelian());
    }

    #[test]
    fn sparse_storage_above_limit() {
        let names: Vec<String> = (0..20).map(|i| format!("e{i}")).collect();
        let t = StructureTensor::from_entries(20, vec![(0, 1, 2, rat(1)), (1, 0, 2, rat(-1))]).unwrap();
        assert!(!t.is_dense());
        let g = LieAlgebra::new("big", names, t).unwrap();
        assert_eq!(g.c(0, 1, 2), rat(1));
        assert_eq!(g.lower_central_series(), vec![20, 1, 0]);
    }
}
