use super::monomial::Monomial;
use super::polynomial::Polynomial;
use crate::algebra::LieAlgebra;
use crate::error::Result;

/// Linear Poisson bracket on `S(g)`: `{x_i, x_j} = sum_k c_ij^k x_k`,
/// extended by Leibniz.
pub fn poisson_bracket(f: &Polynomial, g: &Polynomial, algebra: &LieAlgebra) -> Result<Polynomial> {
    f.check_vars(algebra.dim())?;
    g.check_vars(algebra.dim())?;
    Ok(poisson_bracket_unchecked(f, g, algebra))
}

/// As [`poisson_bracket`] without the variable range check.
pub fn poisson_bracket_unchecked(f: &Polynomial, g: &Polynomial, algebra: &LieAlgebra) -> Polynomial {
    let mut out = Polynomial::zero();
    if f.is_zero() || g.is_zero() {
        return out;
    }
    let d = algebra.dim();
    let df: Vec<(usize, Polynomial)> = (0..d).map(|i| (i, f.partial(i))).filter(|(_, p)| !p.is_zero()).collect();
    let dg: Vec<(usize, Polynomial)> = (0..d).map(|j| (j, g.partial(j))).filter(|(_, p)| !p.is_zero()).collect();
    for (i, fi) in &df {
        for (j, gj) in &dg {
            let br = algebra.bracket_basis(*i, *j);
            if br.is_empty() {
                continue;
            }
            let prod = fi * gj;
            for (k, c) in br {
                out += &prod.mul_monomial(&Monomial::var(*k)).scale(c);
            }
        }
    }
    out
}
