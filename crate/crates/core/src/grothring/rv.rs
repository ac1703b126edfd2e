use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::gamma::{Carrier, GammaGradeClass, GammaRep, VolumeFormData};
use super::res::ResClass;
use crate::error::{Error, Result};
use crate::semilinear::QPiecewiseMap;

/// Class in the graded RV ring, stored as a sum of `res ⊗ rep` with
/// homogeneous residue parts; the grade of a term is the degree of its
/// residue part.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct RVClass {
    terms: Vec<(ResClass, GammaRep)>,
    semiring: bool,
}

impl PartialEq for RVClass {
    fn eq(&self, other: &RVClass) -> bool {
        self.terms.len() == other.terms.len()
            && self
                .terms
                .iter()
                .all(|t| other.terms.iter().any(|o| o.1 == t.1 && o.0 == t.0))
    }
}

impl RVClass {
    pub fn zero() -> Self {
        RVClass::default()
    }

    pub fn one() -> Self {
        RVClass::term(ResClass::one(), GammaRep::unit()).expect("unit term")
    }

    /// `res ⊗ rep`; `res` is split into homogeneous components.
    pub fn term(res: ResClass, rep: GammaRep) -> Result<Self> {
        let mut out = RVClass {
            terms: Vec::new(),
            semiring: res.is_semiring(),
        };
        for k in res.grades() {
            if (k as usize) < rep.grade() {
                return Err(Error::DimensionMismatch(format!(
                    "residue grade {k} below Γ grade {}",
                    rep.grade()
                )));
            }
            out.push(res.component(k), rep.clone());
        }
        Ok(out)
    }

    pub fn from_res(res: ResClass) -> Self {
        RVClass::term(res, GammaRep::unit()).expect("grade-0 representative")
    }

    pub fn terms(&self) -> &[(ResClass, GammaRep)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_semiring(&self) -> bool {
        self.semiring
    }

    pub fn into_semiring(mut self) -> Result<Self> {
        self.terms = self
            .terms
            .into_iter()
            .map(|(r, g)| Ok((r.into_semiring()?, g)))
            .collect::<Result<_>>()?;
        self.semiring = true;
        Ok(self)
    }

    fn push(&mut self, res: ResClass, rep: GammaRep) {
        if res.is_zero() || rep.is_empty() {
            return;
        }
        let grade = res.grades()[0];
        match self
            .terms
            .iter_mut()
            .find(|(r, g)| *g == rep && r.grades() == [grade])
        {
            Some(slot) => slot.0 = slot.0.add(&res),
            None => self.terms.push((res, rep)),
        }
        self.terms.retain(|(r, _)| !r.is_zero());
    }

    pub fn grades(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.terms.iter().flat_map(|(r, _)| r.grades()).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    pub fn component(&self, k: u32) -> RVClass {
        RVClass {
            terms: self
                .terms
                .iter()
                .filter(|(r, _)| r.grades() == [k])
                .cloned()
                .collect(),
            semiring: self.semiring,
        }
    }

    pub fn add(&self, other: &RVClass) -> RVClass {
        let mut out = self.clone();
        out.semiring = self.semiring && other.semiring;
        for (r, g) in &other.terms {
            out.push(r.clone(), g.clone());
        }
        out
    }

    pub fn neg(&self) -> Result<RVClass> {
        if self.semiring && !self.is_zero() {
            return Err(Error::SemiringNegative);
        }
        Ok(RVClass {
            terms: self
                .terms
                .iter()
                .map(|(r, g)| Ok((r.neg()?, g.clone())))
                .collect::<Result<_>>()?,
            semiring: false,
        })
    }

    pub fn sub(&self, other: &RVClass) -> Result<RVClass> {
        Ok(self.add(&other.neg()?))
    }

    pub fn mul(&self, other: &RVClass) -> Result<RVClass> {
        let mut out = RVClass {
            terms: Vec::new(),
            semiring: self.semiring && other.semiring,
        };
        for (r1, g1) in &self.terms {
            for (r2, g2) in &other.terms {
                out.push(r1.mul(r2), g1.product(g2)?);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let top = self.grades().last().copied().unwrap_or(0) as usize;
        let mut grades: Vec<Vec<serde_json::Value>> = vec![Vec::new(); top + 1];
        for (r, g) in &self.terms {
            let k = r.grades()[0] as usize;
            let set = match &g.carrier {
                Carrier::Dense(s) => s.to_string(),
                Carrier::Lattice(s) => s.to_string(),
            };
            let maps: Vec<serde_json::Value> = g
                .coords
                .pieces()
                .iter()
                .map(|p| {
                    serde_json::json!({
                        "domain": p.domain.to_string(),
                        "matrix": p.matrix.iter().map(|row| row.iter().map(ToString::to_string).collect::<Vec<_>>()).collect::<Vec<_>>(),
                        "offset": p.offset.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    })
                })
                .collect();
            grades[k].push(serde_json::json!({
                "res": r.to_string(),
                "gamma": {"grade": g.grade(), "set": set, "map": maps},
            }));
        }
        serde_json::json!(grades)
    }
}

impl fmt::Display for RVClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(r, g)| format!("({r}) ⊗ {g}"))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LiftMode {
    Plain,
    Mu,
}

/// `u^k ⊗ x` for `x` of grade `k`; the `Mu` lift attaches the trivial
/// volume form where a representative has none.
pub fn lift_gamma(x: &GammaGradeClass, mode: LiftMode) -> RVClass {
    let k = x.grade() as u32;
    let mut out = RVClass::zero();
    for (c, rep) in x.terms() {
        let mut rep = rep.clone();
        if mode == LiftMode::Mu && rep.volume.is_none() {
            rep.volume = Some(VolumeFormData {
                unit_twist: Some(0),
                ..VolumeFormData::zero(rep.carrier.arity())
            });
        }
        let res = ResClass::u().pow(k).scale(c);
        out = out.add(&RVClass::term(res, rep).expect("grade matches"));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    Plain,
    MuGamma,
    Mu,
}

/// The kernel generator: `[1]_0 + j` in plain mode, `j_μ` otherwise, with
/// `j = u ⊗ [H]_1 - v ⊗ [0]_1`.
pub fn generator_j(variant: Variant, semiring: bool) -> Result<RVClass> {
    if semiring {
        return Err(Error::SemiringNegative);
    }
    let (h, o) = match variant {
        Variant::Plain => (GammaRep::half_line(), GammaRep::origin()),
        Variant::MuGamma | Variant::Mu => {
            let twist = (variant == Variant::Mu).then_some(1);
            let vol = VolumeFormData {
                gamma: QPiecewiseMap::constant(1, vec![BigRational::zero()]),
                unit_twist: twist,
            };
            (
                GammaRep::half_line().with_volume(vol.clone())?,
                GammaRep::origin().with_volume(vol)?,
            )
        }
    };
    let j = RVClass::term(ResClass::u(), h)?.sub(&RVClass::term(ResClass::v(), o)?)?;
    Ok(match variant {
        Variant::Plain => RVClass::one().add(&j),
        _ => j,
    })
}

/// Which Euler characteristic collapses the Γ part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Which {
    Eg,
    Eb,
}

/// Base of a localization: `A = u + v` or `v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LocalBase {
    A,
    V,
}

/// `num / base^power`, kept reduced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Localized {
    pub num: ResClass,
    pub base: LocalBase,
    pub power: u32,
}

impl Localized {
    pub fn new(num: ResClass, base: LocalBase, power: u32) -> Self {
        let mut out = Localized { num, base, power };
        out.reduce();
        out
    }

    fn reduce(&mut self) {
        if self.num.is_zero() {
            self.power = 0;
            return;
        }
        while self.power > 0 {
            let q = match self.base {
                LocalBase::A => self.num.div_a(),
                LocalBase::V => self.num.div_v(),
            };
            match q {
                Some(q) => {
                    self.num = q;
                    self.power -= 1;
                }
                None => break,
            }
        }
    }

    fn base_class(&self) -> ResClass {
        match self.base {
            LocalBase::A => ResClass::a(),
            LocalBase::V => ResClass::v(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn add(&self, other: &Localized) -> Result<Localized> {
        if self.base != other.base {
            return Err(Error::Invalid("localizations at different bases".to_string()));
        }
        let p = self.power.max(other.power);
        let b = self.base_class();
        let num = self
            .num
            .mul(&b.pow(p - self.power))
            .add(&other.num.mul(&b.pow(p - other.power)));
        Ok(Localized::new(num, self.base, p))
    }
}

impl fmt::Display for Localized {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num.to_string();
        if self.power == 0 {
            return f.write_str(&num);
        }
        let num = if self.num.terms().len() > 1 {
            format!("({num})")
        } else {
            num
        };
        let base = match self.base {
            LocalBase::A => "A",
            LocalBase::V => "v",
        };
        match self.power {
            1 => write!(f, "{num}/{base}"),
            p => write!(f, "{num}/{base}^{p}"),
        }
    }
}

/// Image of an RV class under a retraction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Retracted {
    /// Element of the degree-0 part of the localization (plain mode).
    Localized(Localized),
    /// Residue class modulo `A` (for `Eg`) or `v` (for `Eb`).
    Quotient(ResClass),
}

impl Retracted {
    pub fn is_zero(&self) -> bool {
        match self {
            Retracted::Localized(l) => l.is_zero(),
            Retracted::Quotient(r) => r.is_zero(),
        }
    }
}

impl fmt::Display for Retracted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Retracted::Localized(l) => l.fmt(f),
            Retracted::Quotient(r) => r.fmt(f),
        }
    }
}

/// Collapses each `x ⊗ y` to `χ(y) x`, then divides by `A^deg` (or `v^deg`)
/// in plain mode, or reduces modulo `A` (or `v`) in the μ modes.
pub fn retract(x: &RVClass, which: Which, variant: Variant) -> Result<Retracted> {
    if x.is_semiring() {
        return Err(Error::Invalid("retraction needs ring mode".to_string()));
    }
    let base = match which {
        Which::Eg => LocalBase::A,
        Which::Eb => LocalBase::V,
    };
    let mut collapsed = ResClass::zero();
    let mut local = Localized::new(ResClass::zero(), base, 0);
    for (r, g) in &x.terms {
        let e = g.euler()?;
        let chi = match which {
            Which::Eg => e.chi_g,
            Which::Eb => e.chi_b,
        };
        let part = r.scale(&BigInt::from(chi));
        match variant {
            Variant::Plain => {
                let deg = r.grades()[0];
                local = local.add(&Localized::new(part, base, deg))?;
            }
            _ => collapsed = collapsed.add(&part),
        }
    }
    Ok(match variant {
        Variant::Plain => Retracted::Localized(local),
        _ => {
            let value = match which {
                Which::Eg => ResClass::u().neg()?,
                Which::Eb => ResClass::zero(),
            };
            Retracted::Quotient(collapsed.substitute_v(&value))
        }
    })
}

/// Helper for tests and callers: `c` copies of a representative as a grade class.
pub fn scaled(rep: GammaRep, c: i64) -> GammaGradeClass {
    let mut out = GammaGradeClass::zero(rep.grade());
    out.push(BigInt::from(c), rep).expect("same grade");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_of_generators() {
        let a = RVClass::term(ResClass::u(), GammaRep::half_line()).unwrap();
        let b = RVClass::term(ResClass::v(), GammaRep::origin()).unwrap();
        let p = a.mul(&b).unwrap();
        assert_eq!(p.grades(), vec![2]);
        let (r, g) = &p.terms()[0];
        assert_eq!(r.to_string(), "u*v");
        assert_eq!(g.grade(), 2);
        assert_eq!(g.euler().unwrap().chi_g, -1);
        assert!(a.mul(&RVClass::zero()).unwrap().is_zero());
    }

    #[test]
    fn lift_point_and_half_line() {
        let l = lift_gamma(&GammaGradeClass::from_rep(GammaRep::origin()), LiftMode::Plain);
        assert_eq!(l, RVClass::term(ResClass::u(), GammaRep::origin()).unwrap());
        let h = lift_gamma(&scaled(GammaRep::half_line(), 2), LiftMode::Plain);
        assert_eq!(h.terms()[0].0.to_string(), "2*u");
    }

    #[test]
    fn kernel_generator_retracts_to_zero() {
        let g = generator_j(Variant::Plain, false).unwrap();
        assert_eq!(g.grades(), vec![0, 1]);
        for which in [Which::Eg, Which::Eb] {
            assert!(retract(&g, which, Variant::Plain).unwrap().is_zero());
        }
        for v in [Variant::Mu, Variant::MuGamma] {
            let jm = generator_j(v, false).unwrap();
            for which in [Which::Eg, Which::Eb] {
                assert!(retract(&jm, which, v).unwrap().is_zero());
            }
        }
        assert_eq!(generator_j(Variant::Plain, true), Err(Error::SemiringNegative));
    }

    #[test]
    fn point_retracts_to_u_over_v() {
        let x = RVClass::term(ResClass::u(), GammaRep::origin()).unwrap();
        assert_eq!(retract(&x, Which::Eb, Variant::Plain).unwrap().to_string(), "u/v");
        assert_eq!(retract(&x, Which::Eg, Variant::Plain).unwrap().to_string(), "u/A");
        let a2 = RVClass::from_res(ResClass::a().pow(2));
        assert_eq!(retract(&a2, Which::Eg, Variant::Plain).unwrap().to_string(), "1");
    }

    #[test]
    fn mu_twist_marker() {
        let jm = generator_j(Variant::Mu, false).unwrap();
        let vol = jm.terms()[0].1.volume.as_ref().unwrap();
        assert_eq!(vol.unit_twist, Some(1));
    }
}
