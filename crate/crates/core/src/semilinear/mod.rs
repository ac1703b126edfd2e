//! Dense `Q`-linear geometry over the value group: cylindrical cells,
//! the two Euler characteristics, piecewise affine maps and convolution.

mod cell;
mod convolve;
mod euler;
mod morphism;
mod set;

pub use cell::{Level, QCell};
pub use convolve::{auxiliary_first, convolve, unit_family};
pub use euler::{EulerData, GammaBarClass};
pub use morphism::{
    check_form_identity, check_mg_morphism, gamma_jacobian, nonzero_witness, GammaObject,
    GammaValue, QPiece, QPiecewiseMap, Verdict,
};
pub use set::{cad, QFormula, SemilinearSet};
