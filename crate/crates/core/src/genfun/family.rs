use num_bigint::BigInt;
use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use super::poly::Poly;
use super::ratfun::RatFun;
use super::sum::{sum_over_set, ExponentData};
use crate::error::Result;
use crate::presburger::{LinTerm, PCell, PresburgerSet};

/// One summand `count(q) · Σ_{x∈set} z^{e(x)}` of a zeta decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZetaPiece {
    pub count: Poly,
    pub set: PresburgerSet,
    pub exponents: ExponentData,
}

/// Residue vectors in `[0, rho)^n`.
fn residue_vectors(n: usize, rho: u32) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|r| {
                (0..rho).map(move |v| {
                    let mut r = r.clone();
                    r.push(BigInt::from(v));
                    r
                })
            })
            .collect();
    }
    out
}

/// The index set seen at ramification `rho`, cut into residue classes mod `rho`.
fn split_classes(set: &PresburgerSet, rho: u32) -> Vec<(Vec<BigInt>, PresburgerSet)> {
    let n = set.arity();
    let r = BigInt::from(rho);
    let scaled = set.scale(&r);
    residue_vectors(n, rho)
        .into_iter()
        .filter_map(|d| {
            let mut cell = Some(PCell::universe(n));
            for (i, di) in d.iter().enumerate() {
                let t = LinTerm::var(n, i).shift(&-di);
                cell = cell.and_then(|c| c.and_cong(t, r.clone()));
            }
            let class = scaled.intersect_cell(&cell?);
            (!class.is_empty()).then_some((d, class))
        })
        .collect()
}

/// `Σ_pieces count(q) · Σ_d Σ_{x ∈ Δ_d} z^{rho·e(x/rho)}`.
pub fn zeta_assemble(pieces: &[ZetaPiece], rho: u32) -> Result<RatFun> {
    assert!(rho >= 1, "rho must be positive");
    let parts: Vec<Result<RatFun>> = pieces
        .par_iter()
        .map(|p| {
            if p.count.is_zero() {
                return Ok(RatFun::zero());
            }
            let e = p.exponents.dilate(&BigInt::from(rho));
            let mut s = RatFun::zero();
            for (_, class) in split_classes(&p.set, rho) {
                s = s.add(&sum_over_set(&class, &e)?);
            }
            Ok(s.mul_poly(&p.count))
        })
        .collect();
    let mut total = RatFun::zero();
    for p in parts {
        total = total.add(&p?);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Summand {
    /// Divisor `m | rho`; the base function is evaluated at `(q^{rho/m}, T^{rho/m})`.
    pub m: u32,
    pub piece: usize,
    pub residue: Vec<BigInt>,
    pub coefficient: Poly,
    pub base: RatFun,
    pub evaluated: RatFun,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyEntry {
    pub rho: u32,
    pub summands: Vec<Summand>,
    pub zeta: RatFun,
    pub reproduces: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScalingCheck {
    pub from: u32,
    pub to: u32,
    pub piece: usize,
    pub residue: Vec<BigInt>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyReport {
    pub entries: Vec<FamilyEntry>,
    pub checks: Vec<ScalingCheck>,
    /// Largest number of summands used for a single `rho`.
    pub mu: usize,
    /// Largest total denominator degree among the base functions.
    pub nu: u32,
}

impl FamilyReport {
    pub fn all_certified(&self) -> bool {
        self.checks.iter().all(|c| c.certified) && self.entries.iter().all(|e| e.reproduces)
    }
}

/// Decomposes each `zeta_assemble(pieces, rho)` into base functions indexed
/// by divisors of `rho`, and certifies the dilation relation between
/// residue classes for every pair `rho | rho'` in the list.
pub fn uniform_family(pieces: &[ZetaPiece], rhos: &[u32]) -> Result<FamilyReport> {
    let mut entries = Vec::new();
    let mut mu = 0;
    let mut nu = 0;
    for &rho in rhos {
        let mut summands = Vec::new();
        let mut sum = RatFun::zero();
        for (i, p) in pieces.iter().enumerate() {
            if p.count.is_zero() {
                continue;
            }
            let n = p.set.arity();
            for (d, class) in split_classes(&p.set, rho) {
                let c = d.iter().fold(BigInt::from(rho), |g, x| g.gcd(x));
                let c32 = u32::try_from(&c).expect("divisor of rho");
                let m = rho / c32;
                let shrink: Vec<Vec<BigInt>> = (0..n)
                    .map(|r| (0..n).map(|s| if r == s { c.clone() } else { BigInt::from(0) }).collect())
                    .collect();
                let reduced = class.preimage(&shrink, &vec![BigInt::from(0); n]);
                let base = sum_over_set(&reduced, &p.exponents.dilate(&BigInt::from(m)))?;
                let evaluated = base.substitute_power(i64::from(c32));
                sum = sum.add(&evaluated.mul_poly(&p.count));
                nu = nu.max(base.denominator().values().sum());
                summands.push(Summand {
                    m,
                    piece: i,
                    residue: d,
                    coefficient: p.count.clone(),
                    base,
                    evaluated,
                });
            }
        }
        let zeta = zeta_assemble(pieces, rho)?;
        mu = mu.max(summands.len());
        entries.push(FamilyEntry {
            rho,
            reproduces: sum == zeta,
            summands,
            zeta,
        });
    }

    let mut checks = Vec::new();
    for &a in rhos {
        for &b in rhos {
            if a >= b || b % a != 0 {
                continue;
            }
            let c = b / a;
            for (i, p) in pieces.iter().enumerate() {
                let coarse = split_classes(&p.set, a);
                let fine = split_classes(&p.set, b);
                for (d, class) in coarse {
                    let target: Vec<BigInt> = d.iter().map(|x| x * c).collect();
                    let scaled = class.scale(&BigInt::from(c));
                    let other = fine
                        .iter()
                        .find(|(e, _)| *e == target)
                        .map(|(_, s)| s.clone())
                        .unwrap_or_else(|| PresburgerSet::empty(p.set.arity()));
                    checks.push(ScalingCheck {
                        from: a,
                        to: b,
                        piece: i,
                        certified: scaled.equivalent(&other)?,
                        residue: d,
                    });
                }
            }
        }
    }
    Ok(FamilyReport {
        entries,
        checks,
        mu,
        nu,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::PCell;

    fn monomial_piece(a: i64) -> ZetaPiece {
        ZetaPiece {
            count: Poly::q().sub(&Poly::one()),
            set: PresburgerSet::from_cell(PCell::new(1, vec![LinTerm::from_ints(&[1], 0)], vec![]).unwrap()),
            exponents: ExponentData::new(LinTerm::from_ints(&[1], 0), vec![LinTerm::from_ints(&[a], 0)]),
        }
    }

    #[test]
    fn rho_one_is_geometric() {
        let z = zeta_assemble(&[monomial_piece(2)], 1).unwrap();
        assert_eq!(z.to_string(), "(q-1)/(1 - q^-1*T1^2)");
    }

    #[test]
    fn rho_two_substitutes_powers_in_the_sum() {
        let p = monomial_piece(1);
        let one = sum_over_set(&p.set, &p.exponents).unwrap();
        let two = zeta_assemble(std::slice::from_ref(&p), 2).unwrap();
        assert_eq!(two, one.substitute_power(2).mul_poly(&p.count));
    }

    #[test]
    fn zero_count_vanishes() {
        let mut p = monomial_piece(1);
        p.count = Poly::zero();
        assert!(zeta_assemble(&[p], 3).unwrap().is_zero());
    }

    #[test]
    fn family_reports_certify_scaling() {
        let r = uniform_family(&[monomial_piece(1)], &[1, 2, 4]).unwrap();
        assert_eq!(r.entries.len(), 3);
        assert!(r.all_certified());
        assert!(r.checks.iter().any(|c| c.from == 2 && c.to == 4));
        let single = uniform_family(&[monomial_piece(1)], &[1]).unwrap();
        assert_eq!(single.entries[0].summands.len(), 1);
    }
}
