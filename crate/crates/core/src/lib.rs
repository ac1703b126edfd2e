//! Exact symbolic engine for Igusa-style local zeta functions.
//!
//! Integrals over valuation-theoretically defined subsets of `VF^n` are
//! decomposed into Presburger-indexed sums of `q`-powers, summed in closed
//! form, and cross-checked against brute-force truncated integration over
//! concrete local fields.
//!
//! Module map:
//!
//! - [`presburger`]: linear integer arithmetic over `Z^n` (cells with native
//!   congruences, quantifier elimination, set algebra, unimodularization).
//! - [`semilinear`]: dense `Q`-linear cells over the value group, the two
//!   o-minimal Euler characteristics, Γ-category morphism checks and
//!   convolution.
//! - [`grothring`]: graded Grothendieck rings in tensor form, canonical
//!   lifting and the Euler retractions.
//! - [`genfun`]: rational functions in `q, T_1..T_k` and the summation
//!   engine for Presburger-indexed geometric sums.
//! - [`vfrag`]: the monomial fragment of definable subsets of `VF^n` and
//!   their integrals, Fubini reorderings and monomial changes of variables.
//! - [`padic`]: the truncated integration oracle.

pub mod error;
pub mod genfun;
pub mod grothring;
pub mod num;
pub mod padic;
pub mod presburger;
pub mod qlinear;
pub mod semilinear;
pub mod vfrag;

pub use error::{Error, Result};
pub use genfun::{ExponentData, Poly, RatFun, ZetaPiece};
pub use grothring::{GammaGradeClass, GammaRep, RVClass, ResClass};
pub use padic::{LocalFieldConfig, OracleReport};
pub use presburger::{LinTerm, PAffineMap, PCell, PresburgerSet};
pub use qlinear::{QAtom, QLin};
pub use semilinear::{EulerData, GammaBarClass, QCell, QFormula, QPiecewiseMap, SemilinearSet};
pub use vfrag::{MonomialMap, MonomialRegion, ValWeight};


