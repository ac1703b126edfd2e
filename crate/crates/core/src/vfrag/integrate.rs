use num_bigint::BigInt;

use super::region::{denominator_of, non_integral_point, to_term, zero_form, MonomialRegion, ValWeight};
use crate::error::{Error, Result};
use crate::genfun::{zeta_assemble, ExponentData, RatFun, ZetaPiece};
use crate::grothring::{Carrier, RVClass, SymbolRegistry};
use crate::presburger::PresburgerSet;
use crate::qlinear::QLin;

/// Exponent data for `q^{-(Σγ + ω(γ))} Π T_i^{f_i(γ)}` on `m` coordinates.
fn exponents(m: usize, omega: Option<&QLin>, kappa: &[QLin]) -> ExponentData {
    let mut lq = QLin::from_ints(&vec![1; m], 0);
    if let Some(w) = omega {
        lq = lq.add(w);
    }
    let mut all: Vec<&QLin> = vec![&lq];
    all.extend(kappa.iter());
    let den = denominator_of(&all);
    ExponentData::new(to_term(&lq, &den), kappa.iter().map(|f| to_term(f, &den)).collect())
        .with_den(den)
}

fn permute_form(f: &QLin, perm: &[usize]) -> QLin {
    QLin::new(perm.iter().map(|&p| f.coeffs[p].clone()).collect(), f.constant.clone())
}

/// Full coordinate order: `order` first, then the remaining coordinates.
fn complete_order(n: usize, order: &[usize]) -> Result<Vec<usize>> {
    let mut seen = vec![false; n];
    for &i in order {
        if i >= n || seen[i] {
            return Err(Error::Invalid(format!("bad coordinate order {order:?}")));
        }
        seen[i] = true;
    }
    let mut full = order.to_vec();
    full.extend((0..n).filter(|&i| !seen[i]));
    Ok(full)
}

fn pieces_in_order(region: &MonomialRegion, weight: &ValWeight, perm: &[usize]) -> Result<Vec<ZetaPiece>> {
    let n = region.arity();
    weight.check_arity(n)?;
    let k = weight.num_t();
    let mut kappa: Vec<QLin> = (1..=k)
        .map(|i| weight.kappa.get(&i).cloned().unwrap_or_else(|| zero_form(n)))
        .collect();
    let mut omega = weight.omega.clone();
    let mut out = Vec::new();
    for s in region.open_strata() {
        for f in kappa.iter().chain(omega.iter()) {
            if let Some(p) = non_integral_point(&s.base, f) {
                return Err(Error::IntegralityViolation(format!(
                    "form {f} is not integral at valuation {p:?}"
                )));
            }
        }
    }
    kappa = kappa.iter().map(|f| permute_form(f, perm)).collect();
    omega = omega.map(|w| permute_form(&w, perm));
    let e = exponents(n, omega.as_ref(), &kappa);
    for s in region.open_strata() {
        for (set, class) in s.parts()? {
            out.push(ZetaPiece {
                count: class.point_count(&region.symbols)?,
                set: set.permute(perm),
                exponents: e.clone(),
            });
        }
    }
    Ok(out)
}

/// Summands of the zeta function; strata with zero coordinates have measure zero.
pub fn zeta_pieces(region: &MonomialRegion, weight: &ValWeight) -> Result<Vec<ZetaPiece>> {
    let id: Vec<usize> = (0..region.arity()).collect();
    pieces_in_order(region, weight, &id)
}

/// `∫_A q^{-ρ Σ κ_i f_i} |dX|` as a rational function in `q` and `T_i = q^{-κ_i}`.
pub fn zeta(region: &MonomialRegion, weight: &ValWeight, rho: u32) -> Result<RatFun> {
    zeta_assemble(&zeta_pieces(region, weight)?, rho)
}

/// Volume of the region (the Γ-volume form is kept, the `κ` forms dropped).
pub fn volume_series(region: &MonomialRegion, weight: &ValWeight, rho: u32) -> Result<RatFun> {
    zeta(region, &weight.without_kappa(), rho)
}

/// Iterated integral: the coordinates in `order` form the outer base, listed
/// outermost first; the rest are integrated first, as fibres.
pub fn integrate_ordered(
    region: &MonomialRegion,
    weight: &ValWeight,
    order: &[usize],
    rho: u32,
) -> Result<RatFun> {
    let perm = complete_order(region.arity(), order)?;
    zeta_assemble(&pieces_in_order(region, weight, &perm)?, rho)
}

/// Sums the point-counted grade-`n` part of a class: each `x ⊗ (D, id, ω)`
/// contributes `#x · Σ_{γ∈D} q^{-ρ(Σγ + ω(γ))}`.
pub fn class_volume(class: &RVClass, n: usize, symbols: &SymbolRegistry, rho: u32) -> Result<RatFun> {
    let mut pieces = Vec::new();
    for (res, rep) in class.component(n as u32).terms() {
        let Carrier::Lattice(set) = &rep.carrier else {
            return Err(Error::CarrierMismatch("volume needs a lattice carrier".to_string()));
        };
        if set.arity() != n {
            continue;
        }
        let omega = match &rep.volume {
            None => None,
            Some(v) => match v.gamma.pieces() {
                [p] if p.domain.dim() == n => Some(p.rows().remove(0)),
                _ => return Err(Error::Invalid("volume form must be a single linear form".to_string())),
            },
        };
        pieces.push(ZetaPiece {
            count: res.point_count(symbols)?,
            set: set.clone(),
            exponents: exponents(n, omega.as_ref(), &[]),
        });
    }
    zeta_assemble(&pieces, rho)
}

/// Region volume cut to valuations at most `depth`, used by tests of tails.
pub fn truncated_base(set: &PresburgerSet, depth: i64) -> PresburgerSet {
    let m = set.arity();
    let mut out = set.clone();
    for j in 0..m {
        let mut coeffs = vec![BigInt::from(0); m];
        coeffs[j] = BigInt::from(-1);
        let cap = crate::presburger::LinTerm::new(coeffs, BigInt::from(depth));
        out = PresburgerSet::from_cells(
            m,
            out.cells().iter().filter_map(|c| c.and_ge(cap.clone())),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genfun::Poly;
    use crate::grothring::ResClass;
    use crate::num::rat;
    use crate::presburger::{LinTerm, PCell};
    use crate::vfrag::region::{integral_class, nonnegative_orthant, Stratum};

    #[test]
    fn disc_volume_is_q() {
        let r = MonomialRegion::unit_polydisc(1);
        let v = volume_series(&r, &ValWeight::trivial(), 1).unwrap();
        assert_eq!(v, RatFun::from_poly(Poly::q()));
        let v2 = volume_series(&MonomialRegion::unit_polydisc(2), &ValWeight::trivial(), 1).unwrap();
        assert_eq!(v2, RatFun::from_poly(Poly::q().pow(2)));
    }

    #[test]
    fn valuation_shell_volume() {
        let shell = PresburgerSet::from_opt_cell(1, PCell::universe(1).and_eq(LinTerm::from_ints(&[1], -2)));
        let r = MonomialRegion::new(1, vec![Stratum::full(shell, ResClass::u())]).unwrap();
        for rho in [1u32, 2] {
            let v = volume_series(&r, &ValWeight::trivial(), rho).unwrap();
            let expected = Poly::q().sub(&Poly::one()).mul(&Poly::power(vec![-2 * rho as i64]));
            assert_eq!(v, RatFun::from_poly(expected));
        }
    }

    #[test]
    fn monomial_zeta() {
        let r = MonomialRegion::unit_polydisc(1);
        for a in 1..=3 {
            let z = zeta(&r, &ValWeight::monomial(&[a]), 1).unwrap();
            let t = if a == 1 { "T1".to_string() } else { format!("T1^{a}") };
            assert_eq!(z.to_string(), format!("(q-1)/(1 - q^-1*{t})"));
        }
        let z2 = zeta(&MonomialRegion::unit_polydisc(2), &ValWeight::monomial(&[1, 1]), 1).unwrap();
        let z1 = zeta(&r, &ValWeight::monomial(&[1]), 1).unwrap();
        assert_eq!(z2, z1.mul(&z1));
    }

    #[test]
    fn orders_agree_on_wedge() {
        // v(x) ≤ v(y) inside the unit square
        let base = PresburgerSet::from_opt_cell(
            2,
            PCell::new(2, vec![LinTerm::from_ints(&[1, 0], 0), LinTerm::from_ints(&[-1, 1], 0)], vec![]),
        );
        let r = MonomialRegion::new(2, vec![Stratum::full(base, ResClass::u().pow(2))]).unwrap();
        let w = ValWeight::monomial(&[2, 1]);
        let a = integrate_ordered(&r, &w, &[0, 1], 1).unwrap();
        let b = integrate_ordered(&r, &w, &[1, 0], 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, zeta(&r, &w, 1).unwrap());
        assert_eq!(integrate_ordered(&r, &w, &[1], 1).unwrap(), a);
        assert!(integrate_ordered(&r, &w, &[1, 1], 1).is_err());
    }

    #[test]
    fn class_volume_matches_series() {
        let r = MonomialRegion::unit_polydisc(2);
        let w = ValWeight {
            omega: Some(QLin::new(vec![rat(1, 1), rat(0, 1)], rat(0, 1))),
            ..ValWeight::trivial()
        };
        let c = integral_class(&r, &w).unwrap();
        let lhs = class_volume(&c, 2, &r.symbols, 1).unwrap();
        assert_eq!(lhs, volume_series(&r, &w, 1).unwrap());
    }

    #[test]
    fn truncation_caps_coordinates() {
        let t = truncated_base(&nonnegative_orthant(2), 3);
        assert_eq!(t.enumerate(&[(-5, 5), (-5, 5)]).len(), 16);
    }
}
