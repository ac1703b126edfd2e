use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::cell::{Atom, Congruence, PCell};
use super::set::PresburgerSet;
use super::term::LinTerm;
use crate::error::{Error, Result};

/// Quantified Presburger formula over `x_1..x_n`.
///
/// `Exists` binds one fresh variable, appended as the last coordinate of its
/// body (so the body has arity `n + 1`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formula {
    True,
    False,
    /// `term >= 0`
    Ge(LinTerm),
    /// `term == 0`
    Eq(LinTerm),
    /// `term ≡ 0 (mod m)`
    Cong(LinTerm, BigInt),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Exists(Box<Formula>),
}

impl Formula {
    pub fn ge(t: LinTerm) -> Self {
        Formula::Ge(t)
    }

    pub fn le(t: LinTerm) -> Self {
        Formula::Ge(t.neg())
    }

    pub fn gt(t: LinTerm) -> Self {
        Formula::Ge(t.shift(&-BigInt::from(1)))
    }

    pub fn lt(t: LinTerm) -> Self {
        Formula::Ge(t.neg().shift(&-BigInt::from(1)))
    }

    pub fn eq(t: LinTerm) -> Self {
        Formula::Eq(t)
    }

    pub fn cong(t: LinTerm, modulus: BigInt) -> Self {
        Formula::Cong(t, modulus)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn exists(body: Formula) -> Self {
        Formula::Exists(Box::new(body))
    }

    /// Evaluates the formula by brute force; existential variables range over
    /// `witness_range`.
    pub fn eval(&self, point: &[i64], witness_range: (i64, i64)) -> bool {
        let term = |t: &LinTerm| -> i128 {
            t.coeffs
                .iter()
                .zip(point)
                .map(|(c, &x)| i128::try_from(c).expect("small coefficient") * x as i128)
                .sum::<i128>()
                + i128::try_from(&t.constant).expect("small constant")
        };
        match self {
            Formula::True => true,
            Formula::False => false,
            Formula::Ge(t) => term(t) >= 0,
            Formula::Eq(t) => term(t) == 0,
            Formula::Cong(t, m) => {
                term(t).rem_euclid(i128::try_from(m).expect("small modulus")) == 0
            }
            Formula::Not(f) => !f.eval(point, witness_range),
            Formula::And(fs) => fs.iter().all(|f| f.eval(point, witness_range)),
            Formula::Or(fs) => fs.iter().any(|f| f.eval(point, witness_range)),
            Formula::Exists(body) => {
                let mut p = point.to_vec();
                p.push(0);
                (witness_range.0..=witness_range.1).any(|y| {
                    *p.last_mut().unwrap() = y;
                    body.eval(&p, witness_range)
                })
            }
        }
    }

    /// Compiles the formula into a disjoint cell decomposition over `Z^arity`.
    pub fn to_set(&self, arity: usize) -> Result<PresburgerSet> {
        let atom_set = |atoms: Vec<Atom>| -> PresburgerSet {
            PresburgerSet::from_opt_cell(arity, PCell::from_atoms(arity, atoms))
        };
        let check = |t: &LinTerm| -> Result<()> {
            if t.arity() != arity {
                return Err(Error::ArityMismatch {
                    expected: arity,
                    found: t.arity(),
                });
            }
            Ok(())
        };
        Ok(match self {
            Formula::True => PresburgerSet::universe(arity),
            Formula::False => PresburgerSet::empty(arity),
            Formula::Ge(t) => {
                check(t)?;
                atom_set(vec![Atom::Ge(t.clone())])
            }
            Formula::Eq(t) => {
                check(t)?;
                atom_set(vec![Atom::Ge(t.clone()), Atom::Ge(t.neg())])
            }
            Formula::Cong(t, m) => {
                check(t)?;
                if m < &BigInt::from(1) {
                    return Err(Error::Invalid(format!("modulus must be positive, got {m}")));
                }
                atom_set(vec![Atom::Cong(Congruence::new(t.clone(), m.clone()))])
            }
            Formula::Not(f) => f.to_set(arity)?.complement(),
            Formula::And(fs) => {
                // conjunctions of plain atoms become a single cell
                let mut cell = Some(PCell::universe(arity));
                let mut rest = Vec::new();
                for f in fs {
                    match f.as_atoms() {
                        Some(atoms) => {
                            for a in atoms {
                                let (Atom::Ge(t) | Atom::Cong(Congruence { term: t, .. })) = &a;
                                check(t)?;
                                cell = cell.and_then(|c| c.and_atom(a));
                            }
                        }
                        None => rest.push(f),
                    }
                }
                let mut acc = PresburgerSet::from_opt_cell(arity, cell);
                for f in rest {
                    if acc.cells().is_empty() {
                        break;
                    }
                    acc = acc.intersect(&f.to_set(arity)?)?;
                }
                acc
            }
            Formula::Or(fs) => {
                let mut acc = PresburgerSet::empty(arity);
                for f in fs {
                    acc = acc.union(&f.to_set(arity)?)?;
                }
                acc
            }
            Formula::Exists(body) => body.to_set(arity + 1)?.eliminate(arity)?,
        })
    }

    fn as_atoms(&self) -> Option<Vec<Atom>> {
        match self {
            Formula::True => Some(Vec::new()),
            Formula::Ge(t) => Some(vec![Atom::Ge(t.clone())]),
            Formula::Eq(t) => Some(vec![Atom::Ge(t.clone()), Atom::Ge(t.neg())]),
            Formula::Cong(t, m) if m >= &BigInt::from(1) => {
                Some(vec![Atom::Cong(Congruence::new(t.clone(), m.clone()))])
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exists_even() {
        // ∃y. x = 2y
        let f = Formula::exists(Formula::eq(LinTerm::from_ints(&[1, -2], 0)));
        let s = f.to_set(1).unwrap();
        for x in -10..=10i64 {
            assert_eq!(s.contains(&[BigInt::from(x)]), x % 2 == 0);
            assert_eq!(f.eval(&[x], (-20, 20)), x % 2 == 0);
        }
    }

    #[test]
    fn negation_and_disjunction() {
        let f = Formula::Or(vec![
            Formula::not(Formula::ge(LinTerm::from_ints(&[1], 0))),
            Formula::cong(LinTerm::from_ints(&[1], -1), BigInt::from(3)),
        ]);
        let s = f.to_set(1).unwrap();
        for x in -10..=10i64 {
            assert_eq!(s.contains(&[BigInt::from(x)]), f.eval(&[x], (0, 0)));
        }
    }
}
