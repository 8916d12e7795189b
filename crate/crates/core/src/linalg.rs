//! Sparse exact Gaussian elimination over the rationals.
//!
//! Pivots are always taken at the smallest column index of a row, so the
//! caller controls tie-breaking by ordering columns. Kernel vectors returned
//! by [`Echelon::nullspace`] have their free column as the largest index in
//! their support.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::rational::Rational;

/// Sparse row: strictly increasing column indices, no zero entries.
pub type SparseRow = Vec<(usize, Rational)>;

pub fn row_from_map(map: BTreeMap<usize, Rational>) -> SparseRow {
    map.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// `a + s * b`
fn axpy(a: &SparseRow, s: &Rational, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        match (a.get(i), b.get(j)) {
            (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                let v = va + s * vb;
                if !v.is_zero() {
                    out.push((*ca, v));
                }
                i += 1;
                j += 1;
            }
            (Some((ca, va)), Some((cb, _))) if ca < cb => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (Some(_), Some((cb, vb))) => {
                out.push((*cb, s * vb));
                j += 1;
            }
            (Some((ca, va)), None) => {
                out.push((*ca, va.clone()));
                i += 1;
            }
            (None, Some((cb, vb))) => {
                out.push((*cb, s * vb));
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

fn entry(row: &SparseRow, col: usize) -> Option<&Rational> {
    row.binary_search_by_key(&col, |(c, _)| *c)
        .ok()
        .map(|k| &row[k].1)
}

/// Incrementally built row echelon form with normalized pivots.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    ncols: usize,
    pivots: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    pub fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            pivots: BTreeMap::new(),
        }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn pivot_columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.pivots.keys().copied()
    }

    /// Reduces `row` against the current pivots (leading entries only
    /// eliminated in increasing column order, i.e. full reduction).
    pub fn reduce(&self, row: &SparseRow) -> SparseRow {
        let mut r = row.clone();
        let mut k = 0;
        while k < r.len() {
            let (col, val) = (r[k].0, r[k].1.clone());
            if let Some(p) = self.pivots.get(&col) {
                r = axpy(&r, &(-val), p);
                // entries before `col` are untouched since pivot rows start at `col`
            } else {
                k += 1;
            }
        }
        r
    }

    /// Adds a row; returns `true` iff it increased the rank.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let r = self.reduce(&row);
        let Some((lead, lv)) = r.first().cloned() else {
            return false;
        };
        let inv = Rational::one() / lv;
        let r: SparseRow = r.into_iter().map(|(c, v)| (c, v * &inv)).collect();
        // keep existing pivot rows reduced with respect to the new pivot
        for p in self.pivots.values_mut() {
            if let Some(v) = entry(p, lead).cloned() {
                *p = axpy(p, &(-v), &r);
            }
        }
        self.pivots.insert(lead, r);
        true
    }

    pub fn contains(&self, row: &SparseRow) -> bool {
        self.reduce(row).is_empty()
    }

    /// Basis of `{v : row . v = 0 for every inserted row}`.
    pub fn nullspace(&self) -> Vec<SparseRow> {
        let mut out = Vec::new();
        for f in 0..self.ncols {
            if self.pivots.contains_key(&f) {
                continue;
            }
            let mut v: BTreeMap<usize, Rational> = BTreeMap::new();
            v.insert(f, Rational::one());
            for (p, row) in &self.pivots {
                if let Some(x) = entry(row, f) {
                    v.insert(*p, -x.clone());
                }
            }
            out.push(row_from_map(v));
        }
        out
    }

    pub fn rows(&self) -> impl Iterator<Item = &SparseRow> {
        self.pivots.values()
    }
}

pub fn rank_of(rows: &[SparseRow], ncols: usize) -> usize {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// Kernel of the linear map whose *columns* are given (column `j` is the
/// image of the `j`-th unknown, as a sparse vector over output coordinates).
pub fn kernel_of_columns(columns: &[SparseRow]) -> Vec<SparseRow> {
    // transpose into equations: one row per output coordinate
    let mut eqs: BTreeMap<usize, BTreeMap<usize, Rational>> = BTreeMap::new();
    for (j, col) in columns.iter().enumerate() {
        for (i, v) in col {
            eqs.entry(*i).or_default().insert(j, v.clone());
        }
    }
    let mut e = Echelon::new(columns.len());
    for (_, row) in eqs {
        e.insert(row_from_map(row));
    }
    e.nullspace()
}

/// Writes vectors as combinations of a fixed independent family.
#[derive(Clone, Debug)]
pub struct Expresser {
    offset: usize,
    count: usize,
    ech: Echelon,
}

impl Expresser {
    /// `dim` bounds the column indices used by the vectors.
    pub fn new(generators: &[SparseRow], dim: usize) -> Self {
        let mut ech = Echelon::new(dim + generators.len());
        for (i, g) in generators.iter().enumerate() {
            debug_assert!(g.last().is_none_or(|(c, _)| *c < dim));
            let mut r = g.clone();
            r.push((dim + i, Rational::one()));
            ech.insert(r);
        }
        Expresser {
            offset: dim,
            count: generators.len(),
            ech,
        }
    }

    /// Coefficients `a` with `v = sum_i a_i g_i`, or `None` outside the span.
    pub fn express(&self, v: &SparseRow) -> Option<Vec<Rational>> {
        if v.last().is_some_and(|(c, _)| *c >= self.offset) {
            return None;
        }
        let r = self.ech.reduce(v);
        if r.first().is_some_and(|(c, _)| *c < self.offset) {
            return None;
        }
        let mut out = vec![Rational::zero(); self.count];
        for (c, x) in r {
            out[c - self.offset] = -x;
        }
        Some(out)
    }
}

pub fn dot(a: &SparseRow, b: &SparseRow) -> Rational {
    let mut s = Rational::zero();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Equal => {
                s += &a[i].1 * &b[j].1;
                i += 1;
                j += 1;
            }
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    fn row(v: &[(usize, i64)]) -> SparseRow {
        v.iter().map(|(c, x)| (*c, rat(*x))).filter(|(_, x)| !x.is_zero()).collect()
    }

    #[test]
    fn rank_and_kernel() {
        // x + y + z = 0, 2x + 2y + 2z = 0, y - z = 0
        let rows = vec![row(&[(0, 1), (1, 1), (2, 1)]), row(&[(0, 2), (1, 2), (2, 2)]), row(&[(1, 1), (2, -1)])];
        let mut e = Echelon::new(3);
        let added: Vec<bool> = rows.iter().map(|r| e.insert(r.clone())).collect();
        assert_eq!(added, vec![true, false, true]);
        let ker = e.nullspace();
        assert_eq!(ker.len(), 1);
        for r in &rows {
            assert!(dot(r, &ker[0]).is_zero());
        }
        // free column is the last one
        assert_eq!(ker[0].last().unwrap().0, 2);
    }

    #[test]
    fn express_in_family() {
        let gens = vec![row(&[(0, 1), (1, 1)]), row(&[(1, 1), (2, 2)])];
        let e = Expresser::new(&gens, 3);
        assert_eq!(e.express(&row(&[(0, 2), (1, 5), (2, 6)])), Some(vec![rat(2), rat(3)]));
        assert_eq!(e.express(&row(&[(0, 1)])), None);
        assert_eq!(e.express(&vec![]), Some(vec![rat(0), rat(0)]));
    }

    #[test]
    fn kernel_from_columns() {
        // map (a,b) -> a - b
        let cols = vec![row(&[(0, 1)]), row(&[(0, -1)])];
        let k = kernel_of_columns(&cols);
        assert_eq!(k, vec![row(&[(0, 1), (1, 1)])]);
    }
}
