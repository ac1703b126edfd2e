use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::poly::{trim, Poly};
use super::ratfun::RatFun;
use crate::error::{Error, Result};
use crate::num::{binomial, lcm};
use crate::presburger::{qe, Congruence, LinTerm, PCell, PresburgerSet};
use crate::qlinear::QLin;

/// Exponents of a summand `q^{-lq(x)/den} · Π T_i^{lt_i(x)/den}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentData {
    pub lq: LinTerm,
    pub lt: Vec<LinTerm>,
    pub den: BigInt,
}

impl ExponentData {
    pub fn new(lq: LinTerm, lt: Vec<LinTerm>) -> Self {
        ExponentData {
            lq,
            lt,
            den: BigInt::one(),
        }
    }

    pub fn with_den(mut self, den: BigInt) -> Self {
        self.den = den;
        self
    }

    pub fn arity(&self) -> usize {
        self.lq.arity()
    }

    /// Exponents seen on the points `c·x`, scaled by `c`: `x ↦ c·e(x/c)`.
    pub fn dilate(&self, c: &BigInt) -> ExponentData {
        let dil = |t: &LinTerm| LinTerm::new(t.coeffs.clone(), &t.constant * c);
        ExponentData {
            lq: dil(&self.lq),
            lt: self.lt.iter().map(dil).collect(),
            den: self.den.clone(),
        }
    }

    /// z-exponent forms `(-lq, lt_1, ..., lt_k) / den`.
    fn z_forms(&self) -> Vec<QLin> {
        let d = BigRational::from_integer(self.den.clone()).recip();
        std::iter::once(QLin::from_term(&self.lq).neg())
            .chain(self.lt.iter().map(QLin::from_term))
            .map(|f| f.scale(&d))
            .collect()
    }
}

type Mono = Vec<u32>;

/// Polynomial in the summation variables with rational-function coefficients.
#[derive(Clone, Debug)]
struct YPoly {
    arity: usize,
    terms: BTreeMap<Mono, RatFun>,
}

impl YPoly {
    fn constant(arity: usize, c: RatFun) -> YPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; arity], c);
        }
        YPoly { arity, terms }
    }

    fn from_form(f: &QLin) -> YPoly {
        let n = f.arity();
        let mut out = YPoly::constant(n, RatFun::constant(f.constant.clone()));
        for (i, c) in f.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let mut m = vec![0; n];
            m[i] = 1;
            out = out.add(&YPoly {
                arity: n,
                terms: BTreeMap::from([(m, RatFun::constant(c.clone()))]),
            });
        }
        out
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &YPoly) -> YPoly {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            let sum = match terms.get(m) {
                Some(a) => a.add(c),
                None => c.clone(),
            };
            if sum.is_zero() {
                terms.remove(m);
            } else {
                terms.insert(m.clone(), sum);
            }
        }
        YPoly {
            arity: self.arity,
            terms,
        }
    }

    fn mul(&self, other: &YPoly) -> YPoly {
        let mut out = YPoly::constant(self.arity, RatFun::zero());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m: Mono = m1.iter().zip(m2).map(|(a, b)| a + b).collect();
                out = out.add(&YPoly {
                    arity: self.arity,
                    terms: BTreeMap::from([(m, c1.mul(c2))]),
                });
            }
        }
        out
    }

    fn scale(&self, c: &RatFun) -> YPoly {
        let mut terms = BTreeMap::new();
        for (m, v) in &self.terms {
            let p = v.mul(c);
            if !p.is_zero() {
                terms.insert(m.clone(), p);
            }
        }
        YPoly {
            arity: self.arity,
            terms,
        }
    }

    fn pow(&self, k: u32) -> YPoly {
        let mut out = YPoly::constant(self.arity, RatFun::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Substitutes `y_i = forms[i]` (forms over the new variables).
    fn compose(&self, forms: &[QLin], arity: usize) -> YPoly {
        let images: Vec<YPoly> = forms.iter().map(YPoly::from_form).collect();
        let mut out = YPoly::constant(arity, RatFun::zero());
        for (m, c) in &self.terms {
            let mut t = YPoly::constant(arity, c.clone());
            for (i, &k) in m.iter().enumerate() {
                if k > 0 {
                    t = t.mul(&images[i].pow(k));
                }
            }
            out = out.add(&t);
        }
        out
    }

    /// Coefficients of powers of the last variable, as polys in the others.
    fn split_last(&self) -> Vec<YPoly> {
        let n = self.arity - 1;
        let mut out: Vec<YPoly> = Vec::new();
        for (m, c) in &self.terms {
            let k = m[n] as usize;
            while out.len() <= k {
                out.push(YPoly::constant(n, RatFun::zero()));
            }
            out[k] = out[k].add(&YPoly {
                arity: n,
                terms: BTreeMap::from([(m[..n].to_vec(), c.clone())]),
            });
        }
        out
    }
}

/// `coef(y) · z^{exp(y)}`.
#[derive(Clone, Debug)]
struct Term {
    exp: Vec<QLin>,
    coef: YPoly,
}

/// Summation direction `z^w` converges for all `q > 1`, `κ_i > 0`.
fn is_small(w: &[BigInt]) -> bool {
    let q_ok = w.first().is_none_or(|a| !a.is_positive());
    let t_ok = w.iter().skip(1).all(|b| !b.is_negative());
    q_ok && t_ok && w.iter().any(|x| !x.is_zero())
}

fn to_exps(w: &[BigInt]) -> Vec<i64> {
    trim(
        w.iter()
            .map(|x| i64::try_from(x).expect("exponent fits in i64"))
            .collect(),
    )
}

fn integral_vector(forms: &[QLin], index: usize) -> Option<Vec<BigInt>> {
    forms
        .iter()
        .map(|f| {
            let c = &f.coeffs[index];
            c.is_integer().then(|| c.to_integer())
        })
        .collect()
}

/// Sum of a single arithmetic progression cell.
pub fn sum_over_cell(cell: &PCell, e: &ExponentData) -> Result<RatFun> {
    if e.arity() != cell.arity() || e.lt.iter().any(|t| t.arity() != cell.arity()) {
        return Err(Error::ArityMismatch {
            expected: cell.arity(),
            found: e.arity(),
        });
    }
    let n = cell.arity();
    if qe::is_empty(cell) {
        return Ok(RatFun::zero());
    }
    let term = Term {
        exp: e.z_forms(),
        coef: YPoly::constant(n, RatFun::one()),
    };
    let den = if e.den.is_one() { None } else { Some(e.den.clone()) };
    sum_cell(cell.clone(), vec![term], den, n)
}

pub fn sum_over_set(set: &PresburgerSet, e: &ExponentData) -> Result<RatFun> {
    let parts: Vec<Result<RatFun>> = set
        .cells()
        .par_iter()
        .map(|c| sum_over_cell(c, e))
        .collect();
    let mut total = RatFun::zero();
    for p in parts {
        total = total.add(&p?);
    }
    Ok(total)
}

fn unit(n: usize, i: usize, sign: i64) -> Vec<i64> {
    let mut v = vec![0; n];
    v[i] = sign;
    v
}

fn sum_cell(
    cell: PCell,
    terms: Vec<Term>,
    den: Option<BigInt>,
    original: usize,
) -> Result<RatFun> {
    let n = cell.arity();
    if n == 0 {
        let mut total = RatFun::zero();
        for t in terms {
            let exps: Option<Vec<BigInt>> = t
                .exp
                .iter()
                .map(|f| f.constant.is_integer().then(|| f.constant.to_integer()))
                .collect();
            let exps = exps.ok_or_else(|| Error::NonIntegralExponent { residue: Vec::new() })?;
            let c = t.coef.terms.get(&Vec::new()).cloned().unwrap_or_else(RatFun::zero);
            total = total.add(&c.shift(&to_exps(&exps)));
        }
        return Ok(total);
    }

    // per-variable moduli from congruences (and the exponent denominator)
    let mut moduli = vec![BigInt::one(); n];
    for c in cell.congs() {
        for (i, m) in moduli.iter_mut().enumerate() {
            if c.term.mentions(i) {
                *m = lcm(m, &c.modulus);
            }
        }
    }
    if let Some(d) = &den {
        for m in moduli.iter_mut() {
            *m = lcm(m, d);
        }
    }
    for t in &terms {
        for f in &t.exp {
            for (i, c) in f.coeffs.iter().enumerate() {
                if !c.is_integer() {
                    moduli[i] = lcm(&moduli[i], c.denom());
                }
            }
        }
    }
    if moduli.iter().any(|m| !m.is_one()) {
        return substitute_residues(&cell, &terms, &moduli, original);
    }
    eliminate_last(&cell, &terms, original)
}

fn substitute_residues(
    cell: &PCell,
    terms: &[Term],
    moduli: &[BigInt],
    original: usize,
) -> Result<RatFun> {
    let n = cell.arity();
    let mut residues: Vec<Vec<BigInt>> = vec![Vec::new()];
    for m in moduli {
        let bound = i64::try_from(m).expect("modulus fits in i64");
        residues = residues
            .into_iter()
            .flat_map(|r| {
                (0..bound).map(move |v| {
                    let mut r = r.clone();
                    r.push(BigInt::from(v));
                    r
                })
            })
            .collect();
    }
    let matrix: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { moduli[i].clone() } else { BigInt::zero() })
                .collect()
        })
        .collect();
    let parts: Vec<Result<RatFun>> = residues
        .par_iter()
        .filter(|r| cell.congs().iter().all(|c: &Congruence| c.holds(r)))
        .map(|r| {
            let sub = match cell.preimage(&matrix, r) {
                Some(c) => c,
                None => return Ok(RatFun::zero()),
            };
            if qe::is_empty(&sub) {
                return Ok(RatFun::zero());
            }
            let forms: Vec<QLin> = (0..n)
                .map(|i| {
                    QLin::var(n, i)
                        .scale(&BigRational::from_integer(moduli[i].clone()))
                        .shift(&BigRational::from_integer(r[i].clone()))
                })
                .collect();
            let rmat: Vec<Vec<BigRational>> = forms.iter().map(|f| f.coeffs.clone()).collect();
            let roff: Vec<BigRational> = forms.iter().map(|f| f.constant.clone()).collect();
            let mut new_terms = Vec::with_capacity(terms.len());
            for t in terms {
                let exp: Vec<QLin> = t.exp.iter().map(|f| f.compose(&rmat, &roff)).collect();
                if exp
                    .iter()
                    .any(|f| f.coeffs.iter().chain(std::iter::once(&f.constant)).any(|c| !c.is_integer()))
                {
                    return Err(Error::NonIntegralExponent { residue: r.clone() });
                }
                new_terms.push(Term {
                    exp,
                    coef: t.coef.compose(&forms, n),
                });
            }
            sum_cell(sub, new_terms, None, original)
        })
        .collect();
    let mut total = RatFun::zero();
    for p in parts {
        total = total.add(&p?);
    }
    Ok(total)
}

/// `Q` with `g·Q(t+1) - Q(t) = P(t)`, or `Q(t+1) - Q(t) = P(t)` when `g = 1`.
fn antidifference(p: &[YPoly], g: Option<&[i64]>, arity: usize) -> Vec<YPoly> {
    let zero = || YPoly::constant(arity, RatFun::zero());
    let d = p.len();
    match g {
        Some(w) => {
            // 1/(g - 1) = -1/(1 - g)
            let inv = RatFun::geometric(w.to_vec()).expect("nonzero step").neg();
            let gpoly = RatFun::from_poly(Poly::power(w.to_vec()));
            let mut c: Vec<YPoly> = vec![zero(); d];
            for j in (0..d).rev() {
                let mut acc = p[j].clone();
                for i in j + 1..d {
                    let b = RatFun::constant(BigRational::from_integer(binomial(i as u32, j as u32)));
                    acc = acc.add(&c[i].scale(&gpoly.mul(&b).neg()));
                }
                c[j] = acc.scale(&inv);
            }
            c
        }
        None => {
            let mut c: Vec<YPoly> = vec![zero(); d + 1];
            for j in (1..=d).rev() {
                let mut acc = p[j - 1].clone();
                for i in j + 1..=d {
                    let b = RatFun::constant(BigRational::from_integer(binomial(i as u32, (j - 1) as u32)));
                    acc = acc.add(&c[i].scale(&b.neg()));
                }
                let inv = RatFun::constant(BigRational::new(BigInt::one(), BigInt::from(j)));
                c[j] = acc.scale(&inv);
            }
            c
        }
    }
}

/// `Q(at) · z^{base + ℓ·at}` as a term over the remaining variables.
fn evaluate_at(q: &[YPoly], at: &QLin, base: &[QLin], step: &[BigInt], arity: usize, sign: i64) -> Term {
    let a = YPoly::from_form(at);
    let mut coef = YPoly::constant(arity, RatFun::zero());
    let mut power = YPoly::constant(arity, RatFun::one());
    for c in q {
        coef = coef.add(&c.mul(&power));
        power = power.mul(&a);
    }
    if sign < 0 {
        coef = coef.scale(&RatFun::one().neg());
    }
    let exp = base
        .iter()
        .zip(step)
        .map(|(b, l)| b.add(&at.scale(&BigRational::from_integer(l.clone()))))
        .collect();
    Term { exp, coef }
}

fn eliminate_last(cell: &PCell, terms: &[Term], original: usize) -> Result<RatFun> {
    let n = cell.arity();
    let v = n - 1;
    let mut base: Vec<LinTerm> = Vec::new();
    let mut lowers: Vec<(BigInt, LinTerm)> = Vec::new();
    let mut uppers: Vec<(BigInt, LinTerm)> = Vec::new();
    for t in cell.ineqs() {
        let a = &t.coeffs[v];
        let rest = t.remove_var(v);
        if a.is_zero() {
            base.push(rest);
        } else if a.is_positive() {
            // y ≥ ceil(-rest / a)
            lowers.push((a.clone(), rest));
        } else {
            // y ≤ floor(rest / |a|)
            uppers.push((-a, rest));
        }
    }
    if lowers.is_empty() && uppers.is_empty() {
        return Err(Error::Divergent {
            variable: v,
            step: unit(original, v, 1),
        });
    }

    // split each term into the step ℓ along y_v and the rest
    let mut split = Vec::with_capacity(terms.len());
    for t in terms {
        let step = integral_vector(&t.exp, v).ok_or(Error::NonIntegralExponent { residue: Vec::new() })?;
        let rest: Vec<QLin> = t.exp.iter().map(|f| f.remove_var(v)).collect();
        split.push((step, rest, t.coef.split_last()));
    }
    for (step, _, _) in &split {
        let flat = step.iter().all(|x| x.is_zero());
        if uppers.is_empty() && (flat || !is_small(step)) {
            return Err(Error::Divergent {
                variable: v,
                step: unit(original, v, 1),
            });
        }
        if lowers.is_empty() {
            let back: Vec<BigInt> = step.iter().map(|x| -x).collect();
            if flat || !is_small(&back) {
                return Err(Error::Divergent {
                    variable: v,
                    step: unit(original, v, -1),
                });
            }
        }
    }

    let lower_choices: Vec<Option<usize>> = if lowers.is_empty() {
        vec![None]
    } else {
        (0..lowers.len()).map(Some).collect()
    };
    let upper_choices: Vec<Option<usize>> = if uppers.is_empty() {
        vec![None]
    } else {
        (0..uppers.len()).map(Some).collect()
    };
    let base_cell = PCell::new(
        n - 1,
        base,
        cell.congs().iter().map(|c| Congruence::new(c.term.remove_var(v), c.modulus.clone())).collect(),
    );
    let base_cell = match base_cell {
        Some(c) => c,
        None => return Ok(RatFun::zero()),
    };

    let mut cases: Vec<(Option<(usize, BigInt)>, Option<(usize, BigInt)>)> = Vec::new();
    for &li in &lower_choices {
        for &ui in &upper_choices {
            let ls: Vec<Option<(usize, BigInt)>> = match li {
                Some(i) => residues(&lowers[i].0).map(|s| Some((i, s))).collect(),
                None => vec![None],
            };
            let us: Vec<Option<(usize, BigInt)>> = match ui {
                Some(j) => residues(&uppers[j].0).map(|s| Some((j, s))).collect(),
                None => vec![None],
            };
            for l in &ls {
                for u in &us {
                    cases.push((l.clone(), u.clone()));
                }
            }
        }
    }

    let parts: Vec<Result<RatFun>> = cases
        .par_iter()
        .map(|(l, u)| {
            let mut c = Some(base_cell.clone());
            let mut lo_form: Option<QLin> = None;
            let mut hi_form: Option<QLin> = None;
            let mut lo_int: Option<(BigInt, LinTerm)> = None;
            let mut hi_int: Option<(BigInt, LinTerm)> = None;
            if let Some((i, s)) = l {
                let (a, rest) = &lowers[*i];
                // ceil(-rest/a) = (s - rest)/a where rest ≡ s (mod a)
                c = c.and_then(|c| c.and_cong(rest.shift(&-s), a.clone()));
                // -rest_i/a_i is the largest lower bound, ties go to the first index
                for (k, (b, r)) in lowers.iter().enumerate() {
                    if k == *i {
                        continue;
                    }
                    // -rest/a ≥ -r/b  ⇔  r·a - rest·b ≥ 0
                    let diff = r.scale(a).sub(&rest.scale(b));
                    let diff = if k < *i { diff.shift(&-BigInt::one()) } else { diff };
                    c = c.and_then(|c| c.and_ge(diff));
                }
                lo_form = Some(
                    QLin::from_term(&rest.neg().shift(s))
                        .scale(&BigRational::from_integer(a.clone()).recip()),
                );
                lo_int = Some((a.clone(), rest.neg().shift(s)));
            }
            if let Some((j, s)) = u {
                let (b, rest) = &uppers[*j];
                c = c.and_then(|c| c.and_cong(rest.shift(&-s), b.clone()));
                for (k, (d, r)) in uppers.iter().enumerate() {
                    if k == *j {
                        continue;
                    }
                    // rest/b ≤ r/d  ⇔  r·b - rest·d ≥ 0
                    let diff = r.scale(b).sub(&rest.scale(d));
                    let diff = if k < *j { diff.shift(&-BigInt::one()) } else { diff };
                    c = c.and_then(|c| c.and_ge(diff));
                }
                hi_form = Some(
                    QLin::from_term(&rest.shift(&-s))
                        .scale(&BigRational::from_integer(b.clone()).recip()),
                );
                hi_int = Some((b.clone(), rest.shift(&-s)));
            }
            if let (Some((a, lo)), Some((b, hi))) = (&lo_int, &hi_int) {
                // lo/a ≤ hi/b
                c = c.and_then(|c| c.and_ge(hi.scale(a).sub(&lo.scale(b))));
            }
            let c = match c {
                Some(c) if !qe::is_empty(&c) => c,
                _ => return Ok(RatFun::zero()),
            };
            let mut new_terms = Vec::new();
            for (step, rest, coeffs) in &split {
                let flat = step.iter().all(|x| x.is_zero());
                let w = to_exps(step);
                let q = antidifference(coeffs, if flat { None } else { Some(&w) }, n - 1);
                if let Some(h) = &hi_form {
                    let at = h.shift(&BigRational::one());
                    new_terms.push(evaluate_at(&q, &at, rest, step, n - 1, 1));
                }
                if let Some(lf) = &lo_form {
                    new_terms.push(evaluate_at(&q, lf, rest, step, n - 1, -1));
                }
            }
            new_terms.retain(|t| !t.coef.is_zero());
            sum_cell(c, new_terms, None, original)
        })
        .collect();
    let mut total = RatFun::zero();
    for p in parts {
        total = total.add(&p?);
    }
    Ok(total)
}

fn residues(m: &BigInt) -> impl Iterator<Item = BigInt> {
    let bound = i64::try_from(m).expect("coefficient fits in i64");
    (0..bound).map(BigInt::from)
}
