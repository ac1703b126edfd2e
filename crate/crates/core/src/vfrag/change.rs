use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::region::{bounded_below, denominator_of, to_term, zero_form, MonomialRegion, Stratum, ValWeight};
use crate::error::{Error, Result};
use crate::num::{det, mat_vec, to_rat_matrix, unimodular_inverse};
use crate::presburger::{qe, PresburgerSet};
use crate::qlinear::QLin;
use crate::semilinear::Verdict;

/// `x ↦ c·x^M`: `x'_i = c_i Π_j x_j^{M_ij}`, acting on valuations by
/// `γ ↦ Mγ + v(c)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    matrix: Vec<Vec<BigInt>>,
    unit_valuations: Vec<BigInt>,
}

impl MonomialMap {
    pub fn new(matrix: Vec<Vec<BigInt>>, unit_valuations: Vec<BigInt>) -> Result<Self> {
        let n = matrix.len();
        if matrix.iter().any(|r| r.len() != n) || unit_valuations.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "monomial map needs an {n}x{n} matrix and {n} unit valuations"
            )));
        }
        let d = det(&matrix);
        if !d.abs().is_one() {
            return Err(Error::NonUnimodular { det: d });
        }
        Ok(MonomialMap {
            matrix,
            unit_valuations,
        })
    }

    pub fn from_ints(rows: &[&[i64]], units: &[i64]) -> Result<Self> {
        MonomialMap::new(
            rows.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect(),
            units.iter().map(|&v| BigInt::from(v)).collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.matrix.len()
    }

    pub fn matrix(&self) -> &[Vec<BigInt>] {
        &self.matrix
    }

    pub fn unit_valuations(&self) -> &[BigInt] {
        &self.unit_valuations
    }

    pub fn apply(&self, gamma: &[BigInt]) -> Vec<BigInt> {
        mat_vec(&self.matrix, gamma)
            .into_iter()
            .zip(&self.unit_valuations)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// `(M⁻¹, -M⁻¹ v(c))`, the inverse action on valuations.
    fn inverse(&self) -> (Vec<Vec<BigInt>>, Vec<BigInt>) {
        let inv = unimodular_inverse(&self.matrix).expect("checked unimodular");
        let off = mat_vec(&inv, &self.unit_valuations).into_iter().map(|v| -v).collect();
        (inv, off)
    }

    /// Valuation of the Jacobian: `Σ v(c_i) + Σ_j (Σ_i M_ij - 1) γ_j`.
    pub fn jacobian_valuation(&self) -> QLin {
        let n = self.dim();
        let coeffs = (0..n)
            .map(|j| {
                let col: BigInt = self.matrix.iter().map(|r| &r[j]).sum();
                BigRational::from_integer(col - 1)
            })
            .collect();
        let c: BigInt = self.unit_valuations.iter().sum();
        QLin::new(coeffs, BigRational::from_integer(c))
    }
}

fn compose_inverse(f: &QLin, inv: &[Vec<BigInt>], off: &[BigInt]) -> QLin {
    let m = to_rat_matrix(inv);
    let o: Vec<BigRational> = off.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    f.compose(&m, &o)
}

/// Pushes the region forward along the map and adjusts the weight so the
/// zeta function is unchanged; strata with zero coordinates are dropped.
pub fn change_of_variables(
    region: &MonomialRegion,
    weight: &ValWeight,
    map: &MonomialMap,
) -> Result<(MonomialRegion, ValWeight)> {
    let n = region.arity();
    if map.dim() != n {
        return Err(Error::ArityMismatch {
            expected: n,
            found: map.dim(),
        });
    }
    weight.check_arity(n)?;
    let (inv, off) = map.inverse();
    let mut strata = Vec::new();
    for s in region.open_strata() {
        let base = s.base.preimage(&inv, &off);
        bounded_below(&base)?;
        let fibers = s
            .fibers
            .iter()
            .filter_map(|(c, class)| c.preimage(&inv, &off).map(|c| (c, class.clone())))
            .collect();
        strata.push(Stratum {
            zeros: Vec::new(),
            base,
            fibers,
        });
    }
    let out = MonomialRegion::new(n, strata)?.with_symbols(region.symbols.clone());
    let omega = weight.omega.clone().unwrap_or_else(|| zero_form(n));
    let new_omega = compose_inverse(&omega.sub(&map.jacobian_valuation()), &inv, &off);
    let w = ValWeight {
        kappa: weight
            .kappa
            .iter()
            .map(|(&i, f)| (i, compose_inverse(f, &inv, &off)))
            .collect(),
        omega: Some(new_omega),
    };
    Ok((out, w))
}

fn open_base(region: &MonomialRegion) -> Result<PresburgerSet> {
    let n = region.arity();
    region
        .open_strata()
        .try_fold(PresburgerSet::empty(n), |acc, s| acc.union(&s.base))
}

fn rat_point(p: Vec<BigInt>) -> Vec<BigRational> {
    p.into_iter().map(BigRational::from_integer).collect()
}

/// Checks `ω(γ) = ω'(Mγ + v(c)) + v(jcb)(γ)` on the lattice points of the
/// source, and that the map carries the source valuation base onto the target's.
pub fn check_measure_preserving(
    map: &MonomialMap,
    src: (&MonomialRegion, Option<&QLin>),
    dst: (&MonomialRegion, Option<&QLin>),
) -> Result<Verdict> {
    let n = src.0.arity();
    if dst.0.arity() != n || map.dim() != n {
        return Err(Error::CarrierMismatch(format!(
            "map of dimension {} between regions of arity {} and {}",
            map.dim(),
            n,
            dst.0.arity()
        )));
    }
    let (inv, off) = map.inverse();
    let src_base = open_base(src.0)?;
    let pushed = src_base.preimage(&inv, &off);
    let dst_base = open_base(dst.0)?;
    for (a, b) in [(&pushed, &dst_base), (&dst_base, &pushed)] {
        if let Some(p) = a.difference(b)?.find_point() {
            return Ok(Verdict::Rejected {
                reason: "map does not carry the source base onto the target base".to_string(),
                witness: rat_point(p),
            });
        }
    }
    let zero = zero_form(n);
    let w_src = src.1.unwrap_or(&zero);
    let w_dst = dst.1.unwrap_or(&zero);
    let m = to_rat_matrix(&map.matrix);
    let c: Vec<BigRational> = map.unit_valuations.iter().map(|v| BigRational::from_integer(v.clone())).collect();
    let gap = w_src
        .sub(&w_dst.compose(&m, &c))
        .sub(&map.jacobian_valuation());
    let d = denominator_of(&[&gap]);
    let t = to_term(&gap, &d);
    let one = BigInt::one();
    for cell in src_base.cells() {
        for side in [t.clone(), t.neg()] {
            let Some(c) = cell.and_ge(side.shift(&-&one)) else { continue };
            if let Some(p) = qe::find_point(&c) {
                let w = rat_point(p);
                return Ok(Verdict::Rejected {
                    reason: format!(
                        "volume forms differ by {} at the witness",
                        gap.eval(&w)
                    ),
                    witness: w,
                });
            }
        }
    }
    Ok(Verdict::Accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::{Poly, RatFun};
    use crate::vfrag::integrate::{volume_series, zeta};

    #[test]
    fn non_unimodular_rejected() {
        assert_eq!(
            MonomialMap::from_ints(&[&[2, 0], &[0, 1]], &[0, 0]),
            Err(Error::NonUnimodular { det: BigInt::from(2) })
        );
    }

    #[test]
    fn swap_keeps_zeta() {
        let r = MonomialRegion::unit_polydisc(2);
        let w = ValWeight::monomial(&[1, 2]);
        let swap = MonomialMap::from_ints(&[&[0, 1], &[1, 0]], &[0, 0]).unwrap();
        assert_eq!(swap.jacobian_valuation(), QLin::from_ints(&[0, 0], 0));
        let (r2, w2) = change_of_variables(&r, &w, &swap).unwrap();
        assert_eq!(zeta(&r, &w, 1).unwrap(), zeta(&r2, &w2, 1).unwrap());
    }

    #[test]
    fn scaling_shifts_volume() {
        let r = MonomialRegion::unit_polydisc(1);
        let scale = MonomialMap::from_ints(&[&[1]], &[1]).unwrap();
        let (r2, w2) = change_of_variables(&r, &ValWeight::trivial(), &scale).unwrap();
        // the pushed region is the maximal ideal, carrying the compensating form
        let bare = volume_series(&r2, &ValWeight::trivial(), 1).unwrap();
        assert_eq!(bare, RatFun::from_poly(Poly::q().mul(&Poly::power(vec![-1]))));
        assert_eq!(volume_series(&r2, &w2, 1).unwrap(), RatFun::from_poly(Poly::q()));
        let v = check_measure_preserving(&scale, (&r, None), (&r2, w2.omega.as_ref())).unwrap();
        assert!(v.is_accepted());
        let v = check_measure_preserving(&scale, (&r, None), (&r2, None)).unwrap();
        assert!(matches!(v, Verdict::Rejected { .. }));
    }

    #[test]
    fn shear_keeps_zeta() {
        let r = MonomialRegion::unit_polydisc(2);
        let w = ValWeight::monomial(&[1, 1]);
        let shear = MonomialMap::from_ints(&[&[1, 0], &[1, 1]], &[0, 0]).unwrap();
        let (r2, w2) = change_of_variables(&r, &w, &shear).unwrap();
        assert_eq!(zeta(&r, &w, 1).unwrap(), zeta(&r2, &w2, 1).unwrap());
        assert!(check_measure_preserving(&shear, (&r, None), (&r2, w2.omega.as_ref()))
            .unwrap()
            .is_accepted());
    }

    #[test]
    fn identity_accepted_and_range_checked() {
        let r = MonomialRegion::unit_polydisc(1);
        let id = MonomialMap::from_ints(&[&[1]], &[0]).unwrap();
        assert!(check_measure_preserving(&id, (&r, None), (&r, None)).unwrap().is_accepted());
        let flip = MonomialMap::from_ints(&[&[-1]], &[0]).unwrap();
        assert!(matches!(
            change_of_variables(&r, &ValWeight::trivial(), &flip),
            Err(Error::RangeViolation(_))
        ));
    }
}
