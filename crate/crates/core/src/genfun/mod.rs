//! Rational functions in `q, T1, ..., Tk` with Igusa-type denominators and
//! closed-form summation of exponential sums over Presburger cells.

mod family;
mod poly;
mod ratfun;
mod sum;

pub use family::{uniform_family, zeta_assemble, FamilyEntry, FamilyReport, ScalingCheck, Summand, ZetaPiece};
pub use poly::{Exps, Poly};
pub use ratfun::RatFun;
pub use sum::{sum_over_cell, sum_over_set, ExponentData};
