use std::collections::BTreeMap;

use crate::algebra::LieAlgebra;
use crate::error::{Error, Result};
use crate::poly::{Monomial, Polynomial};
use crate::rational::ratio;

use super::KGraph;

/// Nonzero components `pi^{ij} = 1/2 sum_k c_ij^k x_k` of the linear bivector.
pub fn linear_bivector(algebra: &LieAlgebra) -> Vec<(usize, usize, Polynomial)> {
    let half = ratio(1, 2);
    let mut by_pair: BTreeMap<(usize, usize), Polynomial> = BTreeMap::new();
    for (i, j, k, c) in algebra.tensor().entries() {
        by_pair
            .entry((i, j))
            .or_insert_with(Polynomial::zero)
            .add_term(Monomial::var(k), &c * &half);
    }
    by_pair
        .into_iter()
        .filter(|(_, p)| !p.is_zero())
        .map(|((i, j), p)| (i, j, p))
        .collect()
}

/// `B_Gamma(args)`: one copy of `pi` per aerial vertex, an edge into a vertex
/// differentiating that vertex's coefficient or argument.
pub fn graph_operator(g: &KGraph, algebra: &LieAlgebra, args: &[Polynomial]) -> Result<Polynomial> {
    if args.len() != g.n_ground() {
        return Err(Error::Arity {
            expected: g.n_ground(),
            got: args.len(),
        });
    }
    for a in args {
        a.check_vars(algebra.dim())?;
    }
    if g.vanishes_for_linear() {
        return Ok(Polynomial::zero());
    }
    Ok(contract_all(g, algebra, args))
}

fn contract_all(g: &KGraph, algebra: &LieAlgebra, args: &[Polynomial]) -> Polynomial {
    let pi = linear_bivector(algebra);
    let n = g.n_aerial();
    let mut choice = vec![0usize; n];
    let mut out = Polynomial::zero();
    contract(g, &pi, args, 0, &mut choice, &mut out);
    out
}

fn contract(
    g: &KGraph,
    pi: &[(usize, usize, Polynomial)],
    args: &[Polynomial],
    v: usize,
    choice: &mut [usize],
    out: &mut Polynomial,
) {
    let n = g.n_aerial();
    if v < n {
        for c in 0..pi.len() {
            choice[v] = c;
            contract(g, pi, args, v + 1, choice, out);
        }
        return;
    }
    let total = n + g.n_ground();
    let mut derivs = vec![Monomial::one(); total];
    for (u, [a, b]) in g.edges().iter().enumerate() {
        let (i, j, _) = &pi[choice[u]];
        derivs[*a] = derivs[*a].mul_var(*i, 1);
        derivs[*b] = derivs[*b].mul_var(*j, 1);
    }
    let mut term = Polynomial::one();
    for u in 0..n {
        let f = pi[choice[u]].2.partial_monomial(&derivs[u]);
        if f.is_zero() {
            return;
        }
        term = &term * &f;
    }
    for (k, arg) in args.iter().enumerate() {
        let f = arg.partial_monomial(&derivs[n + k]);
        if f.is_zero() {
            return;
        }
        term = &term * &f;
    }
    *out += &term;
}

/// Skew combination `B(g1,g2) - B(g2,g1)` of the two wedge orderings.
pub fn wedge_skew(algebra: &LieAlgebra, f: &Polynomial, h: &Polynomial) -> Result<Polynomial> {
    let w = KGraph::new(1, 2, vec![[1, 2]])?;
    let r = KGraph::new(1, 2, vec![[2, 1]])?;
    let args = [f.clone(), h.clone()];
    Ok(&graph_operator(&w, algebra, &args)? - &graph_operator(&r, algebra, &args)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::graphs::enumerate_admissible;
    use crate::poly::{parse_polynomial, poisson_bracket};
    use crate::rational::rat;

    #[test]
    fn empty_graph_is_product() {
        let g = corpus::heisenberg3();
        let f = parse_polynomial("x^2 + y", &["x".into(), "y".into(), "z".into()]).unwrap();
        let h = Polynomial::var(2);
        assert_eq!(graph_operator(&KGraph::empty(2), &g, &[f.clone(), h.clone()]).unwrap(), &f * &h);
        assert!(matches!(
            graph_operator(&KGraph::empty(2), &g, &[f]),
            Err(Error::Arity { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn skew_wedge_is_poisson_bracket() {
        for g in corpus::all() {
            for i in 0..g.dim() {
                for j in 0..g.dim() {
                    let (x, y) = (Polynomial::var(i), Polynomial::var(j));
                    assert_eq!(wedge_skew(&g, &x, &y).unwrap(), poisson_bracket(&x, &y, &g).unwrap());
                }
            }
        }
        let g = corpus::heisenberg3();
        let w = KGraph::new(1, 2, vec![[1, 2]]).unwrap();
        let b = graph_operator(&w, &g, &[Polynomial::var(0), Polynomial::var(1)]).unwrap();
        assert_eq!(b, Polynomial::var(2).scale(&ratio(1, 2)));
    }

    #[test]
    fn vanishing_and_scaling() {
        let g = corpus::filiform4();
        let args = [Polynomial::var(0).pow(2) + Polynomial::var(1), Polynomial::var(1).pow(2)];
        let s = rat(3);
        let gs = g.scaled(&s);
        for gr in enumerate_admissible(2, 2, false).unwrap() {
            let b = graph_operator(&gr, &g, &args).unwrap();
            assert_eq!(contract_all(&gr, &g, &args), b);
            assert_eq!(graph_operator(&gr, &gs, &args).unwrap(), b.scale(&(&s * &s)));
            // linear in the first argument
            let doubled = [args[0].scale(&rat(2)), args[1].clone()];
            assert_eq!(graph_operator(&gr, &g, &doubled).unwrap(), b.scale(&rat(2)));
        }
    }
}
