use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presburger::PresburgerSet;
use crate::semilinear::{EulerData, QCell, QPiecewiseMap, SemilinearSet};

/// Underlying set of a Γ-representative: a semilinear set over `Q`, or a
/// lattice set when the representative comes from a valued-field fragment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Carrier {
    Dense(SemilinearSet),
    Lattice(PresburgerSet),
}

impl Carrier {
    pub fn arity(&self) -> usize {
        match self {
            Carrier::Dense(s) => s.arity(),
            Carrier::Lattice(s) => s.arity(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            Carrier::Dense(s) => s.is_empty(),
            Carrier::Lattice(s) => s.is_empty(),
        }
    }

    pub fn product(&self, other: &Carrier) -> Result<Carrier> {
        match (self, other) {
            (Carrier::Dense(a), Carrier::Dense(b)) => Ok(Carrier::Dense(a.product(b))),
            (Carrier::Lattice(a), Carrier::Lattice(b)) => Ok(Carrier::Lattice(a.product(b))),
            (a, b) if a.arity() == 0 => Ok(if a.is_empty() { empty_like(b) } else { b.clone() }),
            (a, b) if b.arity() == 0 => Ok(if b.is_empty() { empty_like(a) } else { a.clone() }),
            _ => Err(Error::CarrierMismatch(
                "cannot multiply a dense carrier by a lattice carrier".to_string(),
            )),
        }
    }
}

fn empty_like(c: &Carrier) -> Carrier {
    match c {
        Carrier::Dense(s) => Carrier::Dense(SemilinearSet::empty(s.arity())),
        Carrier::Lattice(s) => Carrier::Lattice(PresburgerSet::empty(s.arity())),
    }
}

/// Γ-volume form, with an optional marker for a twist on the unit part.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VolumeFormData {
    pub gamma: QPiecewiseMap,
    pub unit_twist: Option<i64>,
}

impl VolumeFormData {
    pub fn zero(arity: usize) -> Self {
        VolumeFormData {
            gamma: QPiecewiseMap::constant(arity, vec![BigRational::zero()]),
            unit_twist: None,
        }
    }
}

/// Representative `(I, f)` of a class in `Γ[k]`, optionally with a volume form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaRep {
    pub carrier: Carrier,
    pub coords: QPiecewiseMap,
    pub volume: Option<VolumeFormData>,
}

impl GammaRep {
    pub fn new(carrier: Carrier, coords: QPiecewiseMap) -> Result<Self> {
        if carrier.arity() != coords.source() {
            return Err(Error::ArityMismatch {
                expected: carrier.arity(),
                found: coords.source(),
            });
        }
        if let Carrier::Dense(s) = &carrier {
            if let Some(c) = s.difference(&coords.domain())?.cells().first() {
                return Err(Error::NotTotal { witness: c.sample() });
            }
        }
        Ok(GammaRep {
            carrier,
            coords,
            volume: None,
        })
    }

    pub fn with_volume(mut self, volume: VolumeFormData) -> Result<Self> {
        if volume.gamma.source() != self.carrier.arity() || volume.gamma.target() != 1 {
            return Err(Error::DimensionMismatch(
                "volume form must map the carrier into Γ".to_string(),
            ));
        }
        self.volume = Some(volume);
        Ok(self)
    }

    /// The one-point representative of grade 0.
    pub fn unit() -> Self {
        GammaRep {
            carrier: Carrier::Dense(SemilinearSet::point(&[])),
            coords: QPiecewiseMap::identity(0),
            volume: None,
        }
    }

    /// `(S, id)` for a dense set `S`.
    pub fn dense(set: SemilinearSet) -> Self {
        let n = set.arity();
        GammaRep {
            carrier: Carrier::Dense(set),
            coords: QPiecewiseMap::identity(n),
            volume: None,
        }
    }

    /// `[H]_1`, the open half line `(0, ∞)` with the identity.
    pub fn half_line() -> Self {
        GammaRep::dense(SemilinearSet::from_disjoint_cells(
            1,
            vec![QCell::interval(Some(BigRational::zero()), None)],
        )
        .expect("single cell"))
    }

    /// `[0]_1`, the point `0` with the identity.
    pub fn origin() -> Self {
        GammaRep::dense(SemilinearSet::point(&[BigRational::zero()]))
    }

    pub fn grade(&self) -> usize {
        self.coords.target()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    /// Cartesian product of carriers with concatenated coordinates and summed volume forms.
    pub fn product(&self, other: &GammaRep) -> Result<GammaRep> {
        let carrier = self.carrier.product(&other.carrier)?;
        let coords = self.coords.product(&other.coords);
        let volume = match (&self.volume, &other.volume) {
            (None, None) => None,
            (a, b) => {
                let a = a.clone().unwrap_or_else(|| VolumeFormData::zero(self.carrier.arity()));
                let b = b.clone().unwrap_or_else(|| VolumeFormData::zero(other.carrier.arity()));
                let unit_twist = match (a.unit_twist, b.unit_twist) {
                    (None, None) => None,
                    (x, y) => Some(x.unwrap_or(0) + y.unwrap_or(0)),
                };
                Some(VolumeFormData {
                    gamma: a.gamma.sum_product(&b.gamma),
                    unit_twist,
                })
            }
        };
        Ok(GammaRep {
            carrier,
            coords,
            volume,
        })
    }

    /// Euler data of the carrier; only dense carriers have one.
    pub fn euler(&self) -> Result<EulerData> {
        match &self.carrier {
            Carrier::Dense(s) => Ok(s.euler()),
            Carrier::Lattice(_) => Err(Error::CarrierMismatch(
                "Euler characteristic needs a dense carrier".to_string(),
            )),
        }
    }
}

impl fmt::Display for GammaRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let set = match &self.carrier {
            Carrier::Dense(s) => s.to_string(),
            Carrier::Lattice(s) => s.to_string(),
        };
        write!(f, "[{set}]_{}", self.grade())?;
        if let Some(v) = &self.volume {
            match v.unit_twist {
                Some(t) => write!(f, " vol(twist {t})")?,
                None => f.write_str(" vol")?,
            }
        }
        Ok(())
    }
}

/// Integer combination of representatives of one grade.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaGradeClass {
    grade: usize,
    terms: Vec<(BigInt, GammaRep)>,
}

impl GammaGradeClass {
    pub fn zero(grade: usize) -> Self {
        GammaGradeClass {
            grade,
            terms: Vec::new(),
        }
    }

    pub fn from_rep(rep: GammaRep) -> Self {
        GammaGradeClass {
            grade: rep.grade(),
            terms: vec![(BigInt::one(), rep)],
        }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn terms(&self) -> &[(BigInt, GammaRep)] {
        &self.terms
    }

    pub fn push(&mut self, coef: BigInt, rep: GammaRep) -> Result<()> {
        if rep.grade() != self.grade {
            return Err(Error::DimensionMismatch(format!(
                "grade {} representative in a grade {} class",
                rep.grade(),
                self.grade
            )));
        }
        match self.terms.iter_mut().find(|(_, r)| *r == rep) {
            Some((c, _)) => *c += coef,
            None => self.terms.push((coef, rep)),
        }
        self.terms.retain(|(c, _)| !c.is_zero());
        Ok(())
    }

    pub fn add(&self, other: &GammaGradeClass) -> Result<GammaGradeClass> {
        let mut out = self.clone();
        for (c, r) in &other.terms {
            out.push(c.clone(), r.clone())?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &GammaGradeClass) -> Result<GammaGradeClass> {
        let mut out = GammaGradeClass::zero(self.grade + other.grade);
        for (c1, r1) in &self.terms {
            for (c2, r2) in &other.terms {
                out.push(c1 * c2, r1.product(r2)?)?;
            }
        }
        Ok(out)
    }

    /// Generic and bounded Euler characteristics summed over the terms.
    pub fn euler(&self) -> Result<(BigInt, BigInt)> {
        let mut g = BigInt::zero();
        let mut b = BigInt::zero();
        for (c, r) in &self.terms {
            let e = r.euler()?;
            g += c * e.chi_g;
            b += c * e.chi_b;
        }
        Ok((g, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presburger::LinTerm;
    use crate::presburger::PCell;

    #[test]
    fn half_line_euler() {
        let h = GammaRep::half_line();
        assert_eq!(h.grade(), 1);
        assert_eq!(h.euler().unwrap().chi_g, -1);
        assert_eq!(h.euler().unwrap().chi_b, 0);
        assert_eq!(GammaRep::origin().euler().unwrap().chi_g, 1);
    }

    #[test]
    fn product_grades_add() {
        let p = GammaRep::half_line().product(&GammaRep::origin()).unwrap();
        assert_eq!(p.grade(), 2);
        assert_eq!(p.euler().unwrap().chi_g, -1);
        let u = GammaRep::unit().product(&GammaRep::half_line()).unwrap();
        assert_eq!(u, GammaRep::half_line());
    }

    #[test]
    fn mixed_carriers_rejected() {
        let cell = PCell::new(1, vec![LinTerm::from_ints(&[1], 0)], vec![]).unwrap();
        let lattice = GammaRep::new(
            Carrier::Lattice(PresburgerSet::from_cell(cell)),
            QPiecewiseMap::identity(1),
        )
        .unwrap();
        assert!(lattice.euler().is_err());
        assert!(matches!(
            lattice.product(&GammaRep::origin()),
            Err(Error::CarrierMismatch(_))
        ));
        assert_eq!(lattice.product(&lattice).unwrap().grade(), 2);
    }

    #[test]
    fn class_terms_merge() {
        let mut c = GammaGradeClass::from_rep(GammaRep::half_line());
        c.push(BigInt::from(2), GammaRep::origin()).unwrap();
        c.push(BigInt::from(-1), GammaRep::half_line()).unwrap();
        assert_eq!(c.terms().len(), 1);
        assert_eq!(c.euler().unwrap(), (BigInt::from(2), BigInt::from(2)));
        assert!(c.push(BigInt::one(), GammaRep::unit()).is_err());
    }
}
