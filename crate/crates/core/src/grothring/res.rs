use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::Poly;

/// Monomial `u^a v^b Π s^k` in the torus class `u = [T¹]`, the point class
/// `v = [1]_1` and registered residue symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ResMono {
    pub u: u32,
    pub v: u32,
    pub syms: BTreeMap<String, u32>,
}

impl ResMono {
    pub fn degree(&self) -> u32 {
        self.u + self.v + self.syms.values().sum::<u32>()
    }

    fn mul(&self, other: &ResMono) -> ResMono {
        let mut syms = self.syms.clone();
        for (s, k) in &other.syms {
            *syms.entry(s.clone()).or_insert(0) += k;
        }
        ResMono {
            u: self.u + other.u,
            v: self.v + other.v,
            syms,
        }
    }
}

impl fmt::Display for ResMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let mut push = |name: &str, k: u32| match k {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{k}")),
        };
        push("u", self.u);
        push("v", self.v);
        for (s, &k) in &self.syms {
            push(s, k);
        }
        f.write_str(&parts.join("*"))
    }
}

/// Element of the graded ring generated by `u`, `v` and registered symbols;
/// the grade of a monomial is its total degree.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResClass {
    terms: BTreeMap<ResMono, BigInt>,
    semiring: bool,
}

impl ResClass {
    pub fn zero() -> Self {
        ResClass::default()
    }

    pub fn int(c: i64) -> Self {
        ResClass::from_mono(ResMono::default(), BigInt::from(c))
    }

    pub fn one() -> Self {
        ResClass::int(1)
    }

    pub fn u() -> Self {
        ResClass::from_mono(
            ResMono {
                u: 1,
                ..ResMono::default()
            },
            BigInt::one(),
        )
    }

    pub fn v() -> Self {
        ResClass::from_mono(
            ResMono {
                v: 1,
                ..ResMono::default()
            },
            BigInt::one(),
        )
    }

    /// `A = u + v`, the class of the closed unit disc fibre.
    pub fn a() -> Self {
        ResClass::u().add(&ResClass::v())
    }

    pub fn symbol(name: &str) -> Self {
        ResClass::from_mono(
            ResMono {
                syms: BTreeMap::from([(name.to_string(), 1)]),
                ..ResMono::default()
            },
            BigInt::one(),
        )
    }

    pub fn from_mono(m: ResMono, c: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        ResClass {
            terms,
            semiring: false,
        }
    }

    /// Marks the class as a semiring element; fails on negative coefficients.
    pub fn into_semiring(mut self) -> Result<Self> {
        if self.terms.values().any(|c| c.is_negative()) {
            return Err(Error::SemiringNegative);
        }
        self.semiring = true;
        Ok(self)
    }

    pub fn into_ring(mut self) -> Self {
        self.semiring = false;
        self
    }

    pub fn is_semiring(&self) -> bool {
        self.semiring
    }

    pub fn terms(&self) -> &BTreeMap<ResMono, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn grades(&self) -> Vec<u32> {
        let mut g: Vec<u32> = self.terms.keys().map(ResMono::degree).collect();
        g.sort_unstable();
        g.dedup();
        g
    }

    /// Homogeneous component of grade `k`.
    pub fn component(&self, k: u32) -> ResClass {
        ResClass {
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == k)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
            semiring: self.semiring,
        }
    }

    pub fn is_homogeneous(&self) -> bool {
        self.grades().len() <= 1
    }

    pub fn add(&self, other: &ResClass) -> ResClass {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let e = terms.entry(m.clone()).or_insert_with(BigInt::zero);
            *e += c;
            if e.is_zero() {
                terms.remove(m);
            }
        }
        ResClass {
            terms,
            semiring: self.semiring && other.semiring,
        }
    }

    pub fn neg(&self) -> Result<ResClass> {
        if self.semiring && !self.is_zero() {
            return Err(Error::SemiringNegative);
        }
        Ok(ResClass {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
            semiring: false,
        })
    }

    pub fn sub(&self, other: &ResClass) -> Result<ResClass> {
        let out = self.add(&other.neg()?);
        if self.semiring && out.terms.values().any(|c| c.is_negative()) {
            return Err(Error::SemiringNegative);
        }
        Ok(out)
    }

    pub fn mul(&self, other: &ResClass) -> ResClass {
        let mut terms: BTreeMap<ResMono, BigInt> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                *terms.entry(m1.mul(m2)).or_insert_with(BigInt::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        ResClass {
            terms,
            semiring: self.semiring && other.semiring,
        }
    }

    pub fn scale(&self, c: &BigInt) -> ResClass {
        if c.is_zero() {
            return ResClass {
                terms: BTreeMap::new(),
                semiring: self.semiring,
            };
        }
        ResClass {
            terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect(),
            semiring: self.semiring && c.is_positive(),
        }
    }

    pub fn pow(&self, k: u32) -> ResClass {
        (0..k).fold(ResClass::one(), |acc, _| acc.mul(self))
    }

    /// `v ↦ value`, where `value` is free of `v`.
    pub fn substitute_v(&self, value: &ResClass) -> ResClass {
        let mut out = ResClass::zero();
        for (m, c) in &self.terms {
            let rest = ResMono { v: 0, ..m.clone() };
            out = out.add(&ResClass::from_mono(rest, c.clone()).mul(&value.pow(m.v)));
        }
        out
    }

    /// Exact quotient by `u + v`, if it exists.
    pub fn div_a(&self) -> Option<ResClass> {
        // synthetic division in u with coefficients in the other generators
        let top = self.terms.keys().map(|m| m.u).max()?;
        let mut coeffs: Vec<ResClass> = vec![ResClass::zero(); top as usize + 1];
        for (m, c) in &self.terms {
            let rest = ResMono { u: 0, ..m.clone() };
            coeffs[m.u as usize] = coeffs[m.u as usize].add(&ResClass::from_mono(rest, c.clone()));
        }
        let v = ResClass::v();
        let mut quotient: Vec<ResClass> = vec![ResClass::zero(); top as usize];
        let mut carry = coeffs[top as usize].clone();
        for i in (0..top as usize).rev() {
            quotient[i] = carry.clone();
            carry = coeffs[i].add(&v.mul(&carry).neg().expect("ring element"));
        }
        if !carry.is_zero() {
            return None;
        }
        let mut out = ResClass::zero();
        for (i, q) in quotient.into_iter().enumerate() {
            out = out.add(&q.mul(&ResClass::u().pow(i as u32)));
        }
        Some(out)
    }

    /// Exact quotient by `v`, if it exists.
    pub fn div_v(&self) -> Option<ResClass> {
        if self.terms.keys().any(|m| m.v == 0) {
            return None;
        }
        Some(ResClass {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (ResMono { v: m.v - 1, ..m.clone() }, c.clone()))
                .collect(),
            semiring: self.semiring,
        })
    }

    /// Point count under `u ↦ q - 1`, `v ↦ 1` and the registered symbol counts.
    pub fn point_count(&self, registry: &SymbolRegistry) -> Result<Poly> {
        let u = Poly::q().sub(&Poly::one());
        let mut total = Poly::zero();
        for (m, c) in &self.terms {
            let mut p = u.pow(m.u);
            for (s, &k) in &m.syms {
                let count = registry.counts.get(s).ok_or_else(|| {
                    Error::Invalid(format!("symbol {s} has no registered point count"))
                })?;
                p = p.mul(&count.pow(k));
            }
            total = total.add(&p.scale(&num_rational::BigRational::from_integer(c.clone())));
        }
        Ok(total)
    }

    /// Parses sums of terms like `3*u^2*v - v^2`.
    pub fn parse(text: &str) -> Result<ResClass> {
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Invalid("empty residue class".to_string()));
        }
        let mut out = ResClass::zero();
        let mut rest = s.as_str();
        while !rest.is_empty() {
            let (sign, body) = match rest.as_bytes()[0] {
                b'+' => (1, &rest[1..]),
                b'-' => (-1, &rest[1..]),
                _ => (1, rest),
            };
            let end = body.find(['+', '-']).unwrap_or(body.len());
            let term = &body[..end];
            rest = &body[end..];
            if term.is_empty() {
                return Err(Error::Invalid(format!("dangling sign in {text:?}")));
            }
            let mut coef = BigInt::from(sign);
            let mut mono = ResMono::default();
            for factor in term.split('*') {
                let (name, power) = match factor.split_once('^') {
                    Some((n, p)) => (
                        n,
                        p.parse::<u32>()
                            .map_err(|_| Error::Invalid(format!("bad exponent in {factor:?}")))?,
                    ),
                    None => (factor, 1),
                };
                if let Ok(c) = name.parse::<BigInt>() {
                    coef *= num_traits::pow(c, power as usize);
                    continue;
                }
                let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                    && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
                if !valid {
                    return Err(Error::Invalid(format!("bad factor {factor:?}")));
                }
                match name {
                    "u" => mono.u += power,
                    "v" => mono.v += power,
                    other => *mono.syms.entry(other.to_string()).or_insert(0) += power,
                }
            }
            out = out.add(&ResClass::from_mono(mono, coef));
        }
        Ok(out)
    }
}

impl fmt::Display for ResClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut entries: Vec<(&ResMono, &BigInt)> = self.terms.iter().collect();
        entries.sort_by(|a, b| {
            b.0.degree()
                .cmp(&a.0.degree())
                .then(b.0.u.cmp(&a.0.u))
                .then(b.0.v.cmp(&a.0.v))
                .then(a.0.syms.cmp(&b.0.syms))
        });
        for (i, (m, c)) in entries.into_iter().enumerate() {
            let mono = m.to_string();
            let mag = c.abs();
            let sign = match (c.is_negative(), i) {
                (true, 0) => "-",
                (true, _) => " - ",
                (false, 0) => "",
                (false, _) => " + ",
            };
            let body = match (mono.is_empty(), mag.is_one()) {
                (true, _) => mag.to_string(),
                (false, true) => mono,
                (false, false) => format!("{mag}*{mono}"),
            };
            write!(f, "{sign}{body}")?;
        }
        Ok(())
    }
}

/// Point-count polynomials for registered residue symbols.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolRegistry {
    pub counts: BTreeMap<String, Poly>,
}

impl SymbolRegistry {
    pub fn register(&mut self, name: &str, count: Poly) {
        self.counts.insert(name.to_string(), count);
    }
}
