use super::gamma::{Carrier, VolumeFormData};
use crate::error::{Error, Result};
use crate::qlinear::QLin;
use crate::semilinear::{check_form_identity, QPiecewiseMap, Verdict};

/// Checks `ω(x) = ω'(F(x)) + jac(x)` on the source carrier.
pub fn check_gamma_measure_preserving(
    map: &QPiecewiseMap,
    src: (&Carrier, &VolumeFormData),
    dst: (&Carrier, &VolumeFormData),
    jac: &QLin,
) -> Result<Verdict> {
    let (src_set, dst_arity) = match (src.0, dst.0) {
        (Carrier::Dense(s), Carrier::Dense(d)) => (s, d.arity()),
        _ => {
            return Err(Error::CarrierMismatch(
                "measure check needs dense carriers".to_string(),
            ))
        }
    };
    if src_set.arity() != map.source() || dst_arity != map.target() {
        return Err(Error::CarrierMismatch(format!(
            "map {} -> {} between carriers of arity {} and {}",
            map.source(),
            map.target(),
            src_set.arity(),
            dst_arity
        )));
    }
    if jac.arity() != map.source() {
        return Err(Error::ArityMismatch {
            expected: map.source(),
            found: jac.arity(),
        });
    }
    check_form_identity(src_set, map, &src.1.gamma, &dst.1.gamma, jac)
}
