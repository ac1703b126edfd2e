//! Linear integer arithmetic over `Z^n`.
//!
//! Sets are finite disjoint unions of [`PCell`]s, each a conjunction of
//! linear inequalities and congruences. Quantifier elimination follows
//! Cooper's bounded-residue method and produces disjoint cells again.

mod affine;
mod cell;
mod formula;
pub mod qe;
mod set;
mod term;

pub use affine::{
    small_point, unimodularize, AffinePiece, PAffineMap, Rejection, UnimodularConfig,
    UnimodularOutcome,
};
pub use cell::{Atom, Congruence, PCell};
pub use formula::Formula;
pub use set::PresburgerSet;
pub use term::LinTerm;
