//! Kernels of linear maps whose matrix entries are polynomials in `eps`.
//!
//! The unknown is `F = sum_s eps^s F_s` with `F_s` in a finite-dimensional
//! rational space `V`; the operator is `L = sum_p eps^p L_p`. All equations
//! `sum_{s+p=m} L_p F_s = 0` are imposed exactly. A `Q[eps]`-basis of the
//! (saturated) solution module is built greedily: increasing the allowed
//! eps-degree of `F`, keep the solutions whose `eps^0` parts are new. The
//! result is certified complete when its size equals `dim V` minus the rank
//! of `L` at sample values of `eps`.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use crate::linalg::{row_from_map, Echelon, SparseRow};
use crate::rational::{ratio, Rational};

/// `sum_p eps^p v_p` with `v_p` sparse over the unknown space.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EpsVector {
    pub parts: Vec<SparseRow>,
}

impl EpsVector {
    pub fn constant(v: SparseRow) -> Self {
        Self::from_parts(vec![v])
    }

    pub fn from_parts(mut parts: Vec<SparseRow>) -> Self {
        while parts.last().is_some_and(|p| p.is_empty()) {
            parts.pop();
        }
        EpsVector { parts }
    }

    pub fn is_zero(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn eps_degree(&self) -> usize {
        self.parts.len().saturating_sub(1)
    }

    pub fn lead(&self) -> SparseRow {
        self.parts.first().cloned().unwrap_or_default()
    }

    /// Largest unknown index in the support.
    pub fn max_index(&self) -> Option<usize> {
        self.parts.iter().filter_map(|p| p.last().map(|(i, _)| *i)).max()
    }

    /// Evaluation at a rational value of `eps`.
    pub fn eval(&self, e: &Rational) -> SparseRow {
        let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
        let mut pw = Rational::one();
        for p in &self.parts {
            for (i, v) in p {
                *acc.entry(*i).or_insert_with(Rational::zero) += v * &pw;
            }
            pw *= e;
        }
        row_from_map(acc)
    }

    /// Coefficient of unknown `i` as a polynomial in `eps` (ascending powers).
    pub fn coefficient(&self, i: usize) -> Vec<Rational> {
        let mut c: Vec<Rational> = self
            .parts
            .iter()
            .map(|p| {
                p.binary_search_by_key(&i, |(j, _)| *j)
                    .map(|k| p[k].1.clone())
                    .unwrap_or_else(|_| Rational::zero())
            })
            .collect();
        while c.last().is_some_and(|v| v.is_zero()) {
            c.pop();
        }
        c
    }
}

/// A linear map `V -> W[eps]` given column by column: column `j` lists
/// `(eps power, image vector in W)`.
#[derive(Clone, Debug, Default)]
pub struct EpsOperator {
    pub columns: Vec<Vec<(usize, SparseRow)>>,
}

impl EpsOperator {
    pub fn n_unknowns(&self) -> usize {
        self.columns.len()
    }

    pub fn max_power(&self) -> usize {
        self.columns
            .iter()
            .flat_map(|c| c.iter().map(|(p, _)| *p))
            .max()
            .unwrap_or(0)
    }

    /// Operator restricted to the first `n` unknowns.
    pub fn prefix(&self, n: usize) -> EpsOperator {
        EpsOperator {
            columns: self.columns[..n].to_vec(),
        }
    }

    /// Matrix columns at a rational value of `eps`.
    pub fn eval_columns(&self, e: &Rational) -> Vec<SparseRow> {
        self.columns
            .iter()
            .map(|col| {
                let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
                for (p, v) in col {
                    let pw = num_traits::pow(e.clone(), *p);
                    for (w, x) in v {
                        *acc.entry(*w).or_insert_with(Rational::zero) += x * &pw;
                    }
                }
                row_from_map(acc)
            })
            .collect()
    }

    pub fn rank_at(&self, e: &Rational) -> usize {
        let mut ech = Echelon::new(usize::MAX);
        let mut r = 0;
        for c in self.eval_columns(e) {
            if ech.insert(c) {
                r += 1;
            }
        }
        r
    }

    /// Applies the operator to an eps-vector: `sum_m eps^m w_m`.
    pub fn apply(&self, v: &EpsVector) -> Vec<SparseRow> {
        let mut acc: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
        for (s, part) in v.parts.iter().enumerate() {
            for (j, x) in part {
                for (p, col) in &self.columns[*j] {
                    for (w, y) in col {
                        *acc.entry((s + p, *w)).or_insert_with(Rational::zero) += x * y;
                    }
                }
            }
        }
        let mut out: Vec<BTreeMap<usize, Rational>> = Vec::new();
        for ((m, w), x) in acc {
            if x.is_zero() {
                continue;
            }
            if out.len() <= m {
                out.resize(m + 1, BTreeMap::new());
            }
            out[m].insert(w, x);
        }
        let mut out: Vec<SparseRow> = out.into_iter().map(row_from_map).collect();
        while out.last().is_some_and(|r| r.is_empty()) {
            out.pop();
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KernelCertificate {
    /// Number of unknowns.
    pub n: usize,
    /// Largest rank of the operator observed at the sample points.
    pub sampled_rank: usize,
    /// Largest eps-degree of the unknown that was tried.
    pub eps_depth: usize,
    /// `true` iff the basis size equals `n - sampled_rank`.
    pub complete: bool,
}

#[derive(Clone, Debug)]
pub struct EpsKernel {
    pub basis: Vec<EpsVector>,
    pub certificate: KernelCertificate,
}

fn sample_points() -> Vec<Rational> {
    vec![ratio(2, 1), ratio(3, 1), ratio(7, 5), ratio(-11, 13)]
}

/// Row echelon over full eps-vectors whose pivots live in the `eps^0` part,
/// at its largest index.
struct LeadEchelon {
    n: usize,
    rows: BTreeMap<usize, Vec<Rational>>,
}

impl LeadEchelon {
    fn new(n: usize) -> Self {
        LeadEchelon { n, rows: BTreeMap::new() }
    }

    fn reduce(&self, v: &mut [Rational]) {
        for (p, row) in self.rows.iter().rev() {
            if !v[*p].is_zero() {
                let c = v[*p].clone();
                for (a, b) in v.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a -= &c * b;
                    }
                }
            }
        }
    }

    /// Returns the reduced vector if it has a new `eps^0` pivot.
    fn insert(&mut self, mut v: Vec<Rational>) -> Option<Vec<Rational>> {
        self.reduce(&mut v);
        let p = (0..self.n).rev().find(|i| !v[*i].is_zero())?;
        let inv = Rational::one() / v[p].clone();
        for a in v.iter_mut() {
            *a *= &inv;
        }
        for row in self.rows.values_mut() {
            if !row[p].is_zero() {
                let c = row[p].clone();
                for (a, b) in row.iter_mut().zip(&v) {
                    if !b.is_zero() {
                        *a -= &c * b;
                    }
                }
            }
        }
        self.rows.insert(p, v.clone());
        Some(v)
    }
}

fn to_dense(v: &EpsVector, n: usize, depth: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); n * (depth + 1)];
    for (s, part) in v.parts.iter().enumerate().take(depth + 1) {
        for (j, x) in part {
            out[s * n + j] = x.clone();
        }
    }
    out
}

fn from_dense(v: &[Rational], n: usize) -> EpsVector {
    EpsVector::from_parts(
        v.chunks(n)
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (i, x.clone()))
                    .collect()
            })
            .collect(),
    )
}

/// Kernel of `op` over `Q[eps]`, extending the independent solutions
/// `initial` (which must lie in the kernel). `max_depth` caps the eps-degree
/// of the unknown.
pub fn solve_eps_kernel(op: &EpsOperator, initial: &[EpsVector], max_depth: usize) -> EpsKernel {
    let n = op.n_unknowns();
    let sampled_rank = sample_points().iter().map(|e| op.rank_at(e)).max().unwrap_or(0);
    let target = n - sampled_rank;
    let mut chosen: Vec<EpsVector> = initial.to_vec();
    // start deep enough that every initial element takes part in the lead span
    let mut depth = chosen.iter().map(|c| c.eps_degree()).max().unwrap_or(0).min(max_depth);
    loop {
        if chosen.len() >= target {
            break;
        }
        // equations for eps-degree <= depth
        let nun = n * (depth + 1);
        let mut eqs: BTreeMap<(usize, usize), BTreeMap<usize, Rational>> = BTreeMap::new();
        for (j, col) in op.columns.iter().enumerate() {
            for (p, img) in col {
                for s in 0..=depth {
                    for (w, x) in img {
                        eqs.entry((s + p, *w)).or_default().insert(s * n + j, x.clone());
                    }
                }
            }
        }
        let mut ech = Echelon::new(nun);
        for (_, row) in eqs {
            ech.insert(row_from_map(row));
        }
        let kernel = ech.nullspace();
        let mut lead = LeadEchelon::new(n);
        let mut next: Vec<EpsVector> = Vec::new();
        for c in &chosen {
            if c.eps_degree() <= depth {
                lead.insert(to_dense(c, n, depth));
                next.push(c.clone());
            }
        }
        let deferred: Vec<EpsVector> = chosen.iter().filter(|c| c.eps_degree() > depth).cloned().collect();
        for k in kernel {
            let mut dense = vec![Rational::zero(); nun];
            for (i, x) in k {
                dense[i] = x;
            }
            if let Some(v) = lead.insert(dense) {
                next.push(from_dense(&v, n));
            }
        }
        next.extend(deferred);
        chosen = next;
        if chosen.len() >= target || depth >= max_depth {
            break;
        }
        depth += 1;
    }
    let complete = chosen.len() == target;
    EpsKernel {
        basis: chosen,
        certificate: KernelCertificate {
            n,
            sampled_rank,
            eps_depth: depth,
            complete,
        },
    }
}

/// Basis of the kernel compatible with a filtration of the unknowns:
/// `prefix_sizes[d]` unknowns span filtration level `d`. The basis for level
/// `d` extends the one for level `d - 1`; `dims[d]` is the rank at level `d`.
#[derive(Clone, Debug)]
pub struct FilteredKernel {
    pub basis: Vec<EpsVector>,
    /// Filtration level at which each basis element first appears.
    pub levels: Vec<usize>,
    pub dims: Vec<usize>,
    pub complete: bool,
    pub certificates: Vec<KernelCertificate>,
}

pub fn solve_filtered(op: &EpsOperator, prefix_sizes: &[usize], max_depth: usize) -> FilteredKernel {
    let mut basis: Vec<EpsVector> = Vec::new();
    let mut levels = Vec::new();
    let mut dims = Vec::new();
    let mut certificates = Vec::new();
    let mut complete = true;
    for (d, &n) in prefix_sizes.iter().enumerate() {
        let k = solve_eps_kernel(&op.prefix(n), &basis, max_depth);
        for _ in basis.len()..k.basis.len() {
            levels.push(d);
        }
        basis = k.basis;
        complete &= k.certificate.complete;
        dims.push(if k.certificate.complete {
            k.certificate.n - k.certificate.sampled_rank
        } else {
            basis.len()
        });
        certificates.push(k.certificate);
    }
    FilteredKernel {
        basis,
        levels,
        dims,
        complete,
        certificates,
    }
}

/// Kernel of `op` at `eps = 1`, a plain rational kernel.
pub fn solve_at_one(op: &EpsOperator) -> Vec<SparseRow> {
    crate::linalg::kernel_of_columns(&op.eval_columns(&Rational::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn col(entries: &[(usize, usize, i64)]) -> Vec<(usize, SparseRow)> {
        let mut m: BTreeMap<usize, BTreeMap<usize, Rational>> = BTreeMap::new();
        for (p, w, x) in entries {
            m.entry(*p).or_default().insert(*w, rat(*x));
        }
        m.into_iter().map(|(p, r)| (p, row_from_map(r))).collect()
    }

    #[test]
    fn zero_operator_gives_everything() {
        let op = EpsOperator {
            columns: vec![vec![], vec![], vec![]],
        };
        let k = solve_eps_kernel(&op, &[], 3);
        assert_eq!(k.basis.len(), 3);
        assert!(k.certificate.complete);
    }

    #[test]
    fn needs_an_eps_correction() {
        // L(e0) = eps * w0, L(e1) = eps^2 * w0: kernel generated by eps*e0 - e1
        let op = EpsOperator {
            columns: vec![col(&[(1, 0, 1)]), col(&[(2, 0, 1)])],
        };
        let k = solve_eps_kernel(&op, &[], 4);
        assert!(k.certificate.complete);
        assert_eq!(k.basis.len(), 1);
        let v = &k.basis[0];
        assert_eq!(v.eps_degree(), 1);
        assert!(op.apply(v).is_empty());
        // leading part is e1
        assert_eq!(v.lead(), vec![(1, rat(1))]);
    }

    #[test]
    fn injective_operator() {
        let op = EpsOperator {
            columns: vec![col(&[(1, 0, 1)]), col(&[(1, 1, 1), (2, 0, 3)])],
        };
        let k = solve_eps_kernel(&op, &[], 4);
        assert!(k.basis.is_empty());
        assert!(k.certificate.complete);
    }

    #[test]
    fn extension_keeps_initial() {
        let op = EpsOperator {
            columns: vec![vec![], col(&[(1, 0, 1)]), vec![]],
        };
        let init = vec![EpsVector::constant(vec![(0, rat(1))])];
        let k = solve_eps_kernel(&op, &init, 2);
        assert_eq!(k.basis.len(), 2);
        assert_eq!(k.basis[0], init[0]);
    }

    #[test]
    fn filtered_levels() {
        // unknowns e0 | e1 e2; L(e1) = eps*w0, L(e2) = eps*w0
        let op = EpsOperator {
            columns: vec![vec![], col(&[(1, 0, 1)]), col(&[(1, 0, 1)])],
        };
        let k = solve_filtered(&op, &[1, 3], 2);
        assert_eq!(k.dims, vec![1, 2]);
        assert_eq!(k.levels, vec![0, 1]);
        assert!(k.complete);
    }

    #[test]
    fn at_one() {
        let op = EpsOperator {
            columns: vec![col(&[(1, 0, 1)]), col(&[(2, 0, 1)])],
        };
        let k = solve_at_one(&op);
        assert_eq!(k.len(), 1);
    }
}
