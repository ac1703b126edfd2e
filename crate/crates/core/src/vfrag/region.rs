use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grothring::{Carrier, GammaRep, RVClass, ResClass, SymbolRegistry, VolumeFormData};
use crate::num::{common_denominator, lcm};
use crate::presburger::{qe, LinTerm, PCell, PresburgerSet};
use crate::qlinear::{lp_min, LpResult, QAtom, QLin};
use crate::semilinear::QPiecewiseMap;

/// Points with the coordinates in `zeros` equal to 0 and the others nonzero
/// with valuations in `base`; over each valuation vector the residue data
/// is the class attached to the fibre piece containing it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub zeros: Vec<usize>,
    pub base: PresburgerSet,
    pub fibers: Vec<(PCell, ResClass)>,
}

impl Stratum {
    /// Stratum without zero coordinates and a single fibre class.
    pub fn full(base: PresburgerSet, fiber: ResClass) -> Self {
        let m = base.arity();
        Stratum {
            zeros: Vec::new(),
            base,
            fibers: vec![(PCell::universe(m), fiber)],
        }
    }

    /// The nonzero coordinates, in increasing order.
    pub fn free_coords(&self, n: usize) -> Vec<usize> {
        (0..n).filter(|i| !self.zeros.contains(i)).collect()
    }

    /// `base` cut into disjoint parts with constant fibre class.
    pub fn parts(&self) -> Result<Vec<(PresburgerSet, ResClass)>> {
        let m = self.base.arity();
        for i in 0..self.fibers.len() {
            for j in i + 1..self.fibers.len() {
                if self.fibers[i].1 == self.fibers[j].1 {
                    continue;
                }
                let overlap = self.fibers[i].0.intersect(&self.fibers[j].0);
                if let Some(c) = overlap {
                    if !self.base.intersect_cell(&c).is_empty() {
                        return Err(Error::ContradictoryFibers { first: i, second: j });
                    }
                }
            }
        }
        let mut groups: Vec<(ResClass, Vec<PCell>)> = Vec::new();
        for (cell, class) in &self.fibers {
            match groups.iter_mut().find(|(c, _)| c == class) {
                Some((_, cells)) => cells.push(cell.clone()),
                None => groups.push((class.clone(), vec![cell.clone()])),
            }
        }
        let mut covered = PresburgerSet::empty(m);
        let mut out = Vec::new();
        for (class, cells) in groups {
            let part = self.base.intersect(&PresburgerSet::from_cells(m, cells))?;
            if part.is_empty() {
                continue;
            }
            covered = covered.union(&part)?;
            out.push((part, class));
        }
        if let Some(p) = self.base.difference(&covered)?.find_point() {
            return Err(Error::Invalid(format!(
                "fibre pieces do not cover the valuation base at {p:?}"
            )));
        }
        Ok(out)
    }
}

/// Valuation-and-residue definable subset of `VF^n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialRegion {
    arity: usize,
    strata: Vec<Stratum>,
    pub symbols: SymbolRegistry,
}

impl MonomialRegion {
    pub fn new(arity: usize, strata: Vec<Stratum>) -> Result<Self> {
        for s in &strata {
            if s.zeros.iter().any(|&z| z >= arity) {
                return Err(Error::Invalid(format!("zero pattern {:?} outside arity {arity}", s.zeros)));
            }
            let mut z = s.zeros.clone();
            z.sort_unstable();
            z.dedup();
            if z != s.zeros {
                return Err(Error::Invalid("zero patterns must be sorted and distinct".to_string()));
            }
            let m = arity - s.zeros.len();
            if s.base.arity() != m || s.fibers.iter().any(|(c, _)| c.arity() != m) {
                return Err(Error::ArityMismatch {
                    expected: m,
                    found: s.base.arity(),
                });
            }
            for (_, class) in &s.fibers {
                if class.grades() != [m as u32] && !class.is_zero() {
                    return Err(Error::Invalid(format!(
                        "fibre class {class} is not homogeneous of degree {m}"
                    )));
                }
            }
            bounded_below(&s.base)?;
        }
        for i in 0..strata.len() {
            for j in i + 1..strata.len() {
                if strata[i].zeros == strata[j].zeros
                    && !strata[i].base.intersect(&strata[j].base)?.is_empty()
                {
                    return Err(Error::Invalid(format!("strata {i} and {j} overlap")));
                }
            }
        }
        Ok(MonomialRegion {
            arity,
            strata,
            symbols: SymbolRegistry::default(),
        })
    }

    pub fn with_symbols(mut self, symbols: SymbolRegistry) -> Self {
        self.symbols = symbols;
        self
    }

    pub fn empty(arity: usize) -> Self {
        MonomialRegion {
            arity,
            strata: Vec::new(),
            symbols: SymbolRegistry::default(),
        }
    }

    /// `{x ∈ VF^n : v(x_i) ≥ 0}` with full residue data, zero strata included.
    pub fn unit_polydisc(n: usize) -> Self {
        let mut strata = Vec::new();
        for mask in 0u32..(1 << n) {
            let zeros: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let m = n - zeros.len();
            strata.push(Stratum {
                zeros,
                ..Stratum::full(nonnegative_orthant(m), ResClass::u().pow(m as u32))
            });
        }
        MonomialRegion::new(n, strata).expect("valid polydisc")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn strata(&self) -> &[Stratum] {
        &self.strata
    }

    /// Strata without zero coordinates; the only ones of full dimension.
    pub fn open_strata(&self) -> impl Iterator<Item = &Stratum> {
        self.strata.iter().filter(|s| s.zeros.is_empty())
    }
}

pub fn nonnegative_orthant(m: usize) -> PresburgerSet {
    let ineqs = (0..m).map(|i| LinTerm::var(m, i)).collect();
    PresburgerSet::from_opt_cell(m, PCell::new(m, ineqs, vec![]))
}

/// Fails unless every coordinate is bounded below on `set`.
pub(crate) fn bounded_below(set: &PresburgerSet) -> Result<()> {
    let m = set.arity();
    for cell in set.cells() {
        let atoms: Vec<QAtom> = cell.ineqs().iter().map(|t| QAtom::ge(QLin::from_term(t))).collect();
        for j in 0..m {
            if lp_min(&atoms, m, &QLin::var(m, j)) == LpResult::Unbounded {
                return Err(Error::RangeViolation(format!(
                    "valuation coordinate {} is unbounded below",
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

/// Exponent forms on the valuation space: `f_i` for the variable `T_i`
/// and an optional Γ-volume form.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValWeight {
    pub kappa: BTreeMap<usize, QLin>,
    pub omega: Option<QLin>,
}

impl ValWeight {
    pub fn trivial() -> Self {
        ValWeight::default()
    }

    /// `|x^a|^κ` summed over a single `T_1`.
    pub fn monomial(exponents: &[i64]) -> Self {
        ValWeight {
            kappa: BTreeMap::from([(1, QLin::from_ints(exponents, 0))]),
            omega: None,
        }
    }

    pub fn num_t(&self) -> usize {
        self.kappa.keys().copied().max().unwrap_or(0)
    }

    pub fn check_arity(&self, n: usize) -> Result<()> {
        for f in self.kappa.values().chain(self.omega.iter()) {
            if f.arity() != n {
                return Err(Error::ArityMismatch {
                    expected: n,
                    found: f.arity(),
                });
            }
        }
        if self.kappa.contains_key(&0) {
            return Err(Error::Invalid("T variables are numbered from 1".to_string()));
        }
        Ok(())
    }

    pub fn without_kappa(&self) -> ValWeight {
        ValWeight {
            kappa: BTreeMap::new(),
            omega: self.omega.clone(),
        }
    }
}

/// Restriction of a form on `Γ^n` to the coordinates in `keep`.
pub(crate) fn restrict(form: &QLin, keep: &[usize]) -> QLin {
    QLin::new(
        keep.iter().map(|&i| form.coeffs[i].clone()).collect(),
        form.constant.clone(),
    )
}

/// A lattice point of `set` where `form` is not an integer.
pub(crate) fn non_integral_point(set: &PresburgerSet, form: &QLin) -> Option<Vec<BigInt>> {
    let d = common_denominator(form.coeffs.iter().chain(std::iter::once(&form.constant)));
    if d.is_one() {
        return None;
    }
    let scaled = to_term(form, &d);
    let mut r = BigInt::one();
    while r < d {
        for cell in set.cells() {
            if let Some(c) = cell.and_cong(scaled.shift(&-&r), d.clone()) {
                if let Some(p) = qe::find_point(&c) {
                    return Some(p);
                }
            }
        }
        r += 1;
    }
    None
}

/// `d·form` as an integer term; `d` must clear all denominators.
pub(crate) fn to_term(form: &QLin, d: &BigInt) -> LinTerm {
    let dr = BigRational::from_integer(d.clone());
    let int = |c: &BigRational| {
        let v = c * &dr;
        debug_assert!(v.is_integer());
        v.to_integer()
    };
    LinTerm::new(form.coeffs.iter().map(int).collect(), int(&form.constant))
}

pub(crate) fn denominator_of(forms: &[&QLin]) -> BigInt {
    forms.iter().fold(BigInt::one(), |acc, f| {
        lcm(&acc, &common_denominator(f.coeffs.iter().chain(std::iter::once(&f.constant))))
    })
}

/// Class of the region in tensor form: each fibre piece contributes
/// `class ⊗ [(piece, id, ω)]` in grade `n - |zeros|`.
pub fn integral_class(region: &MonomialRegion, weight: &ValWeight) -> Result<RVClass> {
    let n = region.arity();
    weight.check_arity(n)?;
    let mut out = RVClass::zero();
    for s in region.strata() {
        let keep = s.free_coords(n);
        let omega = weight.omega.as_ref().map(|w| restrict(w, &keep));
        for f in weight.kappa.values().map(|f| restrict(f, &keep)).chain(omega.clone()) {
            if let Some(p) = non_integral_point(&s.base, &f) {
                return Err(Error::IntegralityViolation(format!(
                    "form {f} is not integral at valuation {p:?}"
                )));
            }
        }
        let m = keep.len();
        for (part, class) in s.parts()? {
            let mut rep = GammaRep::new(Carrier::Lattice(part), QPiecewiseMap::identity(m))?;
            if let Some(w) = &omega {
                rep = rep.with_volume(VolumeFormData {
                    gamma: QPiecewiseMap::form(w),
                    unit_twist: None,
                })?;
            }
            out = out.add(&RVClass::term(class, rep)?);
        }
    }
    Ok(out)
}

pub(crate) fn zero_form(n: usize) -> QLin {
    QLin::new(vec![BigRational::zero(); n], BigRational::zero())
}
