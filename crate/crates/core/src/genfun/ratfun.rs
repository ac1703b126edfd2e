use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{eval_monomial, exp_scale, monomial_string, trim, Exps, Poly};
use crate::error::{Error, Result};

/// `numerator / Π (1 - z^w)^m` with the factors kept unexpanded.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatFun {
    num: Poly,
    den: BTreeMap<Exps, u32>,
}

/// Orientation of a factor `1 - z^w`: `q`-exponent negative, or zero with
/// the first nonzero `T`-exponent positive.
fn is_canonical(w: &[i64]) -> bool {
    match w.first() {
        Some(&a) if a != 0 => a < 0,
        _ => w.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0),
    }
}

impl RatFun {
    pub fn zero() -> Self {
        RatFun::from_poly(Poly::zero())
    }

    pub fn one() -> Self {
        RatFun::from_poly(Poly::one())
    }

    pub fn constant(c: BigRational) -> Self {
        RatFun::from_poly(Poly::constant(c))
    }

    pub fn from_poly(num: Poly) -> Self {
        RatFun {
            num,
            den: BTreeMap::new(),
        }
    }

    /// `num / Π (1 - z^w)^m`; factors are reoriented and cancelled.
    pub fn new(num: Poly, factors: impl IntoIterator<Item = (Exps, u32)>) -> Result<Self> {
        let mut out = RatFun::from_poly(num);
        for (w, m) in factors {
            let w = trim(w);
            if w.is_empty() {
                return Err(Error::Invalid("denominator factor 1 - 1 vanishes".to_string()));
            }
            for _ in 0..m {
                out = out.div_factor(&w);
            }
        }
        Ok(out)
    }

    /// `1 / (1 - z^w)`.
    pub fn geometric(w: Exps) -> Result<Self> {
        RatFun::new(Poly::one(), [(w, 1)])
    }

    /// Divides by a single factor `1 - z^w`, `w ≠ 0`.
    pub(crate) fn div_factor(&self, w: &[i64]) -> RatFun {
        let mut out = self.clone();
        let (w, flip) = if is_canonical(w) {
            (w.to_vec(), false)
        } else {
            (exp_scale(w, -1), true)
        };
        if flip {
            // 1/(1 - z^-w) = -z^w / (1 - z^w)
            out.num = out.num.shift(&w).neg();
        }
        if let Some(q) = out.num.div_one_minus(&w) {
            out.num = q;
        } else {
            *out.den.entry(w).or_insert(0) += 1;
        }
        out
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &BTreeMap<Exps, u32> {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    fn den_poly(den: &BTreeMap<Exps, u32>) -> Poly {
        den.iter().fold(Poly::one(), |acc, (w, &m)| {
            acc.mul(&Poly::one().sub(&Poly::power(w.clone())).pow(m))
        })
    }

    fn cancel(mut self) -> RatFun {
        if self.num.is_zero() {
            self.den.clear();
            return self;
        }
        let keys: Vec<Exps> = self.den.keys().cloned().collect();
        for w in keys {
            while self.den.get(&w).copied().unwrap_or(0) > 0 {
                match self.num.div_one_minus(&w) {
                    Some(q) => {
                        self.num = q;
                        let m = self.den.get_mut(&w).expect("present");
                        *m -= 1;
                        if *m == 0 {
                            self.den.remove(&w);
                        }
                    }
                    None => break,
                }
            }
        }
        self
    }

    pub fn add(&self, other: &RatFun) -> RatFun {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.clone();
        }
        let mut den = self.den.clone();
        for (w, &m) in &other.den {
            let e = den.entry(w.clone()).or_insert(0);
            *e = (*e).max(m);
        }
        let lift = |r: &RatFun| -> Poly {
            let extra: BTreeMap<Exps, u32> = den
                .iter()
                .map(|(w, &m)| (w.clone(), m - r.den.get(w).copied().unwrap_or(0)))
                .filter(|(_, m)| *m > 0)
                .collect();
            r.num.mul(&RatFun::den_poly(&extra))
        };
        let num = lift(self).add(&lift(other));
        RatFun { num, den }.cancel()
    }

    pub fn neg(&self) -> RatFun {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &RatFun) -> RatFun {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &RatFun) -> RatFun {
        if self.is_zero() || other.is_zero() {
            return RatFun::zero();
        }
        let mut den = self.den.clone();
        for (w, &m) in &other.den {
            *den.entry(w.clone()).or_insert(0) += m;
        }
        RatFun {
            num: self.num.mul(&other.num),
            den,
        }
        .cancel()
    }

    pub fn mul_poly(&self, p: &Poly) -> RatFun {
        self.mul(&RatFun::from_poly(p.clone()))
    }

    pub fn scale(&self, c: &BigRational) -> RatFun {
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
        .cancel()
    }

    /// Multiplies by the monomial `z^e`.
    pub fn shift(&self, e: &[i64]) -> RatFun {
        RatFun {
            num: self.num.shift(e),
            den: self.den.clone(),
        }
    }

    /// `q ↦ q^c`, `T_i ↦ T_i^c` for `c ≥ 1`.
    pub fn substitute_power(&self, c: i64) -> RatFun {
        assert!(c >= 1, "substitution exponent must be positive");
        RatFun {
            num: self.num.substitute_power(c),
            den: self
                .den
                .iter()
                .map(|(w, &m)| (exp_scale(w, c), m))
                .collect(),
        }
        .cancel()
    }

    pub fn evaluate(&self, q: &BigRational, ts: &[BigRational]) -> Result<BigRational> {
        let mut d = BigRational::one();
        for (w, &m) in &self.den {
            let f = BigRational::one() - eval_monomial(w, q, ts)?;
            if f.is_zero() {
                return Err(Error::PoleHit {
                    factor: format!("1 - {}", monomial_string(w)),
                });
            }
            d *= num_traits::pow(f, m as usize);
        }
        Ok(self.num.eval(q, ts)? / d)
    }

    /// Canonical text `numerator/(1 - z^w)^m...`.
    pub fn canonical_string(&self) -> String {
        self.to_string()
    }

    /// JSON mirror of the canonical text.
    pub fn to_json(&self) -> serde_json::Value {
        let factors: Vec<serde_json::Value> = self
            .den
            .iter()
            .map(|(w, m)| {
                serde_json::json!({
                    "q": w.first().copied().unwrap_or(0),
                    "T": w.iter().skip(1).copied().collect::<Vec<i64>>(),
                    "multiplicity": m,
                })
            })
            .collect();
        serde_json::json!({
            "numerator": self.num.to_string(),
            "denominator": factors,
            "canonical": self.to_string(),
        })
    }
}

impl PartialEq for RatFun {
    fn eq(&self, other: &RatFun) -> bool {
        if self.den == other.den {
            return self.num == other.num;
        }
        self.num.mul(&RatFun::den_poly(&other.den)) == other.num.mul(&RatFun::den_poly(&self.den))
    }
}

impl Eq for RatFun {}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = self.num.to_string();
        if self.den.is_empty() {
            return f.write_str(&num);
        }
        let single = self.num.terms().len() <= 1;
        let num = if single { num } else { format!("({num})") };
        let mut factors: Vec<(&Exps, &u32)> = self.den.iter().collect();
        factors.sort_by(|a, b| super::poly::display_order(b.0, a.0));
        let parts: Vec<String> = factors
            .into_iter()
            .map(|(w, &m)| {
                let base = format!("(1 - {})", monomial_string(w));
                if m == 1 {
                    base
                } else {
                    format!("{base}^{m}")
                }
            })
            .collect();
        if parts.len() == 1 {
            write!(f, "{num}/{}", parts[0])
        } else {
            write!(f, "{num}/({})", parts.join("*"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn q_minus_one() -> Poly {
        Poly::q().sub(&Poly::one())
    }

    #[test]
    fn display_matches_igusa_form() {
        let f = RatFun::new(q_minus_one(), [(vec![-1, 1], 1)]).unwrap();
        assert_eq!(f.to_string(), "(q-1)/(1 - q^-1*T1)");
        let g = RatFun::new(Poly::power(vec![-1]), [(vec![-2], 1)]).unwrap();
        assert_eq!(g.to_string(), "q^-1/(1 - q^-2)");
    }

    #[test]
    fn evaluate_example() {
        let f = RatFun::new(q_minus_one(), [(vec![-1, 1], 1)]).unwrap();
        assert_eq!(f.evaluate(&rat(3, 1), &[rat(1, 9)]).unwrap(), rat(27, 13));
        assert_eq!(RatFun::one().evaluate(&rat(7, 2), &[]).unwrap(), rat(1, 1));
        // T = q makes 1 - q^-1 T vanish
        assert!(matches!(
            f.evaluate(&rat(3, 1), &[rat(3, 1)]),
            Err(Error::PoleHit { .. })
        ));
    }

    #[test]
    fn reorientation_and_cancellation() {
        // 1/(1 - q) = -q^-1/(1 - q^-1)
        let a = RatFun::geometric(vec![1]).unwrap();
        let b = RatFun::new(Poly::power(vec![-1]).neg(), [(vec![-1], 1)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.denominator().keys().next().unwrap(), &vec![-1]);
        // (1 - q^-2)/(1 - q^-1) = 1 + q^-1
        let c = RatFun::new(Poly::one().sub(&Poly::power(vec![-2])), [(vec![-1], 1)]).unwrap();
        assert!(c.denominator().is_empty());
    }

    #[test]
    fn even_plus_odd_is_whole() {
        // q^-1/(1 - q^-2) + 1/(1 - q^-2) = 1/(1 - q^-1)
        let odd = RatFun::new(Poly::power(vec![-1]), [(vec![-2], 1)]).unwrap();
        let even = RatFun::geometric(vec![-2]).unwrap();
        assert_eq!(odd.add(&even), RatFun::geometric(vec![-1]).unwrap());
    }
}
