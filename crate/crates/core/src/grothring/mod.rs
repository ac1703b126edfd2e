//! Graded Grothendieck ring algebra: residue classes in `u = [T¹]` and
//! `v = [1]_1`, Γ-graded classes, RV classes in tensor form, the canonical
//! lifting, the Euler retractions and the kernel generator.

mod gamma;
mod measure;
mod res;
mod rv;
mod twistoid;

pub use gamma::{Carrier, GammaGradeClass, GammaRep, VolumeFormData};
pub use measure::check_gamma_measure_preserving;
pub use res::{ResClass, ResMono, SymbolRegistry};
pub use rv::{
    generator_j, lift_gamma, retract, scaled, LiftMode, LocalBase, Localized, RVClass, Retracted,
    Variant, Which,
};
pub use twistoid::refine_to_twistoids;
