//! Built-in example algebras and their default subalgebra/character data.

use crate::algebra::{LieAlgebra, SubalgebraSetup};
use crate::rational::rat;

pub const NAMES: [&str; 5] = ["abelian2", "heisenberg3", "heisenberg5", "filiform4", "axb"];

pub fn abelian2() -> LieAlgebra {
    LieAlgebra::abelian("abelian2", &["A", "B"]).expect("valid")
}

/// `[X, Y] = Z`.
pub fn heisenberg3() -> LieAlgebra {
    LieAlgebra::from_brackets("heisenberg3", &["X", "Y", "Z"], &[(0, 1, vec![(2, rat(1))])]).expect("valid")
}

/// `[X1, Y1] = [X2, Y2] = Z`.
pub fn heisenberg5() -> LieAlgebra {
    LieAlgebra::from_brackets(
        "heisenberg5",
        &["X1", "X2", "Y1", "Y2", "Z"],
        &[(0, 2, vec![(4, rat(1))]), (1, 3, vec![(4, rat(1))])],
    )
    .expect("valid")
}

/// `[X1, X2] = X3`, `[X1, X3] = X4`.
pub fn filiform4() -> LieAlgebra {
    LieAlgebra::from_brackets(
        "filiform4",
        &["X1", "X2", "X3", "X4"],
        &[(0, 1, vec![(2, rat(1))]), (0, 2, vec![(3, rat(1))])],
    )
    .expect("valid")
}

/// `[H, E] = E`, the non-nilpotent example.
pub fn axb() -> LieAlgebra {
    LieAlgebra::from_brackets("axb", &["H", "E"], &[(0, 1, vec![(1, rat(1))])]).expect("valid")
}

pub fn all() -> Vec<LieAlgebra> {
    vec![abelian2(), heisenberg3(), heisenberg5(), filiform4(), axb()]
}

pub fn by_name(name: &str) -> Option<LieAlgebra> {
    match name {
        "abelian2" => Some(abelian2()),
        "heisenberg3" => Some(heisenberg3()),
        "heisenberg5" => Some(heisenberg5()),
        "filiform4" => Some(filiform4()),
        "axb" => Some(axb()),
        _ => None,
    }
}

/// Default subalgebra and character of each built-in algebra.
pub fn default_setup(name: &str) -> Option<SubalgebraSetup> {
    let s = match name {
        "abelian2" => SubalgebraSetup::by_names(&abelian2(), &["B"], &[]),
        "heisenberg3" => SubalgebraSetup::by_names(&heisenberg3(), &["Y", "Z"], &[("Z", rat(1))]),
        "heisenberg5" => SubalgebraSetup::by_names(&heisenberg5(), &["Y1", "Y2", "Z"], &[("Z", rat(1))]),
        "filiform4" => SubalgebraSetup::by_names(&filiform4(), &["X2", "X3", "X4"], &[("X4", rat(1))]),
        "axb" => SubalgebraSetup::by_names(&axb(), &["E"], &[]),
        _ => return None,
    };
    Some(s.expect("built-in setups are valid"))
}

/// `heisenberg3` with `h = <Z>`, `lambda(Z) = 1`.
pub fn heisenberg3_center_setup() -> SubalgebraSetup {
    SubalgebraSetup::by_names(&heisenberg3(), &["Z"], &[("Z", rat(1))]).expect("valid")
}
