//! Exact polynomials over the rationals, parameter polynomials in `eps` and
//! `t`, a text parser and the linear Poisson bracket.

mod monomial;
mod param;
mod parse;
mod poisson;
mod polynomial;

pub use monomial::{monomials_of_degree, monomials_up_to, Monomial};
pub use param::{Eps, EpsPolynomial, Param, ParamPoly, TPolynomial, TParam, UniPoly};
pub use parse::{parse_param, parse_polynomial};
pub use poisson::{poisson_bracket, poisson_bracket_unchecked};
pub use polynomial::Polynomial;

/// Default cap on total polynomial degree.
pub const DEFAULT_MAX_DEGREE: u32 = 12;

/// The global degree cap, overridable through `LIEQ_MAX_DEGREE`.
pub fn max_degree() -> u32 {
    std::env::var("LIEQ_MAX_DEGREE")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_DEGREE)
}
