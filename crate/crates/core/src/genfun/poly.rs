use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::rat_pow;

/// Exponent vector over `(q, T1, ..., Tk)`, trailing zeros trimmed.
pub type Exps = Vec<i64>;

pub(crate) fn trim(mut e: Exps) -> Exps {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

pub(crate) fn exp_add(a: &[i64], b: &[i64]) -> Exps {
    let n = a.len().max(b.len());
    trim(
        (0..n)
            .map(|i| a.get(i).copied().unwrap_or(0) + b.get(i).copied().unwrap_or(0))
            .collect(),
    )
}

pub(crate) fn exp_scale(a: &[i64], c: i64) -> Exps {
    trim(a.iter().map(|x| x * c).collect())
}

/// Laurent polynomial in `q, T1, ..., Tk` with rational coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Poly {
    terms: BTreeMap<Exps, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        Poly::monomial(c, Vec::new())
    }

    pub fn int(c: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(c)))
    }

    pub fn monomial(c: BigRational, exps: Exps) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(trim(exps), c);
        }
        Poly { terms }
    }

    /// `z^exps` with coefficient one.
    pub fn power(exps: Exps) -> Self {
        Poly::monomial(BigRational::one(), exps)
    }

    pub fn q() -> Self {
        Poly::power(vec![1])
    }

    /// `T_i`, counted from 1.
    pub fn t(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Poly::power(e)
    }

    /// Polynomial in `q` from coefficients in increasing degree.
    pub fn in_q(coeffs: &[BigInt]) -> Self {
        let mut p = Poly::zero();
        for (d, c) in coeffs.iter().enumerate() {
            p = p.add(&Poly::monomial(BigRational::from_integer(c.clone()), vec![d as i64]));
        }
        p
    }

    pub fn terms(&self) -> &BTreeMap<Exps, BigRational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }

    /// Largest `T` index in use.
    pub fn num_t(&self) -> usize {
        self.terms.keys().map(|e| e.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let entry = terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *entry += c;
            if entry.is_zero() {
                terms.remove(e);
            }
        }
        Poly { terms }
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut terms: BTreeMap<Exps, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                *terms.entry(exp_add(e1, e2)).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Poly { terms }
    }

    pub fn shift(&self, exps: &[i64]) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (exp_add(e, exps), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// `q ↦ q^c`, `T_i ↦ T_i^c`.
    pub fn substitute_power(&self, c: i64) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, v)| (exp_scale(e, c), v.clone()))
                .collect(),
        }
    }

    pub fn eval(&self, q: &BigRational, ts: &[BigRational]) -> Result<BigRational> {
        let mut total = BigRational::zero();
        for (e, c) in &self.terms {
            total += c * eval_monomial(e, q, ts)?;
        }
        Ok(total)
    }

    /// Exact quotient by `1 - z^w`, if it exists.
    pub fn div_one_minus(&self, w: &[i64]) -> Option<Poly> {
        let pivot = w.iter().position(|&x| x != 0)?;
        let step = w[pivot];
        let mut chains: BTreeMap<Exps, BTreeMap<i64, BigRational>> = BTreeMap::new();
        for (e, c) in &self.terms {
            let ep = e.get(pivot).copied().unwrap_or(0);
            let k = ep.div_euclid(step);
            let base = exp_add(e, &exp_scale(w, -k));
            chains.entry(base).or_default().insert(k, c.clone());
        }
        let mut terms = BTreeMap::new();
        for (base, chain) in chains {
            let total: BigRational = chain.values().sum();
            if !total.is_zero() {
                return None;
            }
            let lo = *chain.keys().next().expect("nonempty chain");
            let hi = *chain.keys().last().expect("nonempty chain");
            let mut acc = BigRational::zero();
            for k in lo..hi {
                if let Some(c) = chain.get(&k) {
                    acc += c;
                }
                if !acc.is_zero() {
                    terms.insert(exp_add(&base, &exp_scale(w, k)), acc.clone());
                }
            }
        }
        Some(Poly { terms })
    }
}

pub(crate) fn eval_monomial(e: &[i64], q: &BigRational, ts: &[BigRational]) -> Result<BigRational> {
    let mut v = BigRational::one();
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let base = if i == 0 {
            q
        } else {
            ts.get(i - 1).ok_or_else(|| {
                Error::DimensionMismatch(format!("no value supplied for T{i}"))
            })?
        };
        if base.is_zero() && k < 0 {
            return Err(Error::PoleHit {
                factor: monomial_string(e),
            });
        }
        v *= rat_pow(base, k);
    }
    Ok(v)
}

pub(crate) fn monomial_string(e: &[i64]) -> String {
    let mut parts = Vec::new();
    for (i, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let name = if i == 0 { "q".to_string() } else { format!("T{i}") };
        if k == 1 {
            parts.push(name);
        } else {
            parts.push(format!("{name}^{k}"));
        }
    }
    parts.join("*")
}

/// Display order: descending in `q`, then in `T1`, `T2`, ...
pub(crate) fn display_order(a: &[i64], b: &[i64]) -> std::cmp::Ordering {
    let n = a.len().max(b.len());
    for i in 0..n {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        if x != y {
            return y.cmp(&x);
        }
    }
    std::cmp::Ordering::Equal
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut entries: Vec<(&Exps, &BigRational)> = self.terms.iter().collect();
        entries.sort_by(|a, b| display_order(a.0, b.0));
        for (i, (e, c)) in entries.into_iter().enumerate() {
            let mono = monomial_string(e);
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else if i > 0 { "+" } else { "" };
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    #[test]
    fn display_and_arithmetic() {
        let p = Poly::q().sub(&Poly::one());
        assert_eq!(p.to_string(), "q-1");
        assert_eq!(p.pow(2).to_string(), "q^2-2*q+1");
        let m = Poly::monomial(rat(1, 1), vec![-5, 5]);
        assert_eq!(m.to_string(), "q^-5*T1^5");
    }

    #[test]
    fn binomial_division() {
        let w = vec![-1, 1];
        let f = Poly::one().sub(&Poly::power(w.clone()));
        let p = f.mul(&Poly::q().add(&Poly::t(2)));
        assert_eq!(p.div_one_minus(&w), Some(Poly::q().add(&Poly::t(2))));
        assert_eq!(Poly::q().div_one_minus(&w), None);
        // 1 - z^2 = (1 - z)(1 + z)
        let z2 = Poly::one().sub(&Poly::power(vec![-2]));
        assert_eq!(
            z2.div_one_minus(&[-1]),
            Some(Poly::one().add(&Poly::power(vec![-1])))
        );
    }

    #[test]
    fn evaluation() {
        let p = Poly::q().sub(&Poly::one()).mul(&Poly::t(1));
        assert_eq!(p.eval(&rat(3, 1), &[rat(1, 9)]).unwrap(), rat(2, 9));
        assert!(Poly::power(vec![0, -1]).eval(&rat(3, 1), &[rat(0, 1)]).is_err());
    }
}
