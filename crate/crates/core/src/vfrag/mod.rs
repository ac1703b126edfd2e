//! Valuation-and-residue definable subsets of `VF^n` with monomial data:
//! their classes, volumes, zeta functions, iterated integrals and
//! monomial changes of variables.

mod change;
mod integrate;
mod region;

pub use change::{change_of_variables, check_measure_preserving, MonomialMap};
pub use integrate::{class_volume, integrate_ordered, truncated_base, volume_series, zeta, zeta_pieces};
pub use region::{integral_class, nonnegative_orthant, MonomialRegion, Stratum, ValWeight};
