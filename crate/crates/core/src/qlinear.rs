//! Rational linear forms and Fourier–Motzkin elimination over `Q`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::presburger::LinTerm;

/// Rational affine form `c·x + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QLin {
    pub coeffs: Vec<BigRational>,
    pub constant: BigRational,
}

impl QLin {
    pub fn new(coeffs: Vec<BigRational>, constant: BigRational) -> Self {
        QLin { coeffs, constant }
    }

    pub fn zero(arity: usize) -> Self {
        QLin {
            coeffs: vec![BigRational::zero(); arity],
            constant: BigRational::zero(),
        }
    }

    pub fn constant(arity: usize, value: BigRational) -> Self {
        QLin {
            coeffs: vec![BigRational::zero(); arity],
            constant: value,
        }
    }

    pub fn var(arity: usize, index: usize) -> Self {
        let mut f = QLin::zero(arity);
        f.coeffs[index] = BigRational::one();
        f
    }

    pub fn from_ints(coeffs: &[i64], constant: i64) -> Self {
        QLin {
            coeffs: coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
            constant: BigRational::from_integer(BigInt::from(constant)),
        }
    }

    pub fn from_term(t: &LinTerm) -> Self {
        QLin {
            coeffs: t
                .coeffs
                .iter()
                .map(|c| BigRational::from_integer(c.clone()))
                .collect(),
            constant: BigRational::from_integer(t.constant.clone()),
        }
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn mentions(&self, index: usize) -> bool {
        !self.coeffs[index].is_zero()
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        self.coeffs
            .iter()
            .zip(point)
            .fold(self.constant.clone(), |acc, (c, x)| {
                if c.is_zero() {
                    acc
                } else {
                    acc + c * x
                }
            })
    }

    pub fn add(&self, other: &QLin) -> QLin {
        QLin {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &QLin) -> QLin {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QLin {
        QLin {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            constant: -&self.constant,
        }
    }

    pub fn scale(&self, factor: &BigRational) -> QLin {
        QLin {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            constant: &self.constant * factor,
        }
    }

    pub fn shift(&self, delta: &BigRational) -> QLin {
        QLin {
            coeffs: self.coeffs.clone(),
            constant: &self.constant + delta,
        }
    }

    pub fn substitute(&self, index: usize, replacement: &QLin) -> QLin {
        let c = self.coeffs[index].clone();
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs[index] = BigRational::zero();
        out.add(&replacement.scale(&c))
    }

    /// `f(A x + b)` where `A` has `self.arity()` rows.
    pub fn compose(&self, matrix: &[Vec<BigRational>], offset: &[BigRational]) -> QLin {
        let cols = matrix.first().map_or(0, Vec::len);
        let mut coeffs = vec![BigRational::zero(); cols];
        let mut constant = self.constant.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, a) in matrix[i].iter().enumerate() {
                coeffs[j] += c * a;
            }
            constant += c * &offset[i];
        }
        QLin { coeffs, constant }
    }

    pub fn remove_var(&self, index: usize) -> QLin {
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(index);
        QLin {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    pub fn insert_var(&self, index: usize) -> QLin {
        let mut coeffs = self.coeffs.clone();
        coeffs.insert(index, BigRational::zero());
        QLin {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    pub fn extend(&self, arity: usize) -> QLin {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(arity, BigRational::zero());
        QLin {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    /// Places the coefficients at `offset..offset + arity` inside a form of arity `total`.
    pub fn embed(&self, total: usize, offset: usize) -> QLin {
        let mut coeffs = vec![BigRational::zero(); total];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[offset + i] = c.clone();
        }
        QLin {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    /// Positive multiple with first nonzero coefficient of magnitude one.
    fn normalized(&self) -> QLin {
        match self.coeffs.iter().find(|c| !c.is_zero()) {
            Some(c) => self.scale(&c.abs().recip()),
            None => self.clone(),
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let name = names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("x{}", i + 1));
            push_signed(&mut out, c, Some(&name));
        }
        if !self.constant.is_zero() || out.is_empty() {
            push_signed(&mut out, &self.constant, None);
        }
        out
    }
}

fn push_signed(out: &mut String, c: &BigRational, name: Option<&str>) {
    let first = out.is_empty();
    let mag = c.abs();
    if c.is_negative() {
        out.push_str(if first { "-" } else { " - " });
    } else if !first {
        out.push_str(" + ");
    }
    match name {
        Some(n) if mag.is_one() => out.push_str(n),
        Some(n) => {
            out.push_str(&mag.to_string());
            out.push('*');
            out.push_str(n);
        }
        None => out.push_str(&mag.to_string()),
    }
}

impl fmt::Display for QLin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rel {
    Eq,
    Gt,
    Ge,
}

/// `form rel 0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QAtom {
    pub form: QLin,
    pub rel: Rel,
}

impl QAtom {
    pub fn new(form: QLin, rel: Rel) -> Self {
        QAtom { form, rel }
    }

    pub fn ge(form: QLin) -> Self {
        QAtom::new(form, Rel::Ge)
    }

    pub fn gt(form: QLin) -> Self {
        QAtom::new(form, Rel::Gt)
    }

    pub fn eq(form: QLin) -> Self {
        QAtom::new(form, Rel::Eq)
    }

    pub fn holds(&self, point: &[BigRational]) -> bool {
        let v = self.form.eval(point);
        match self.rel {
            Rel::Eq => v.is_zero(),
            Rel::Gt => v.is_positive(),
            Rel::Ge => !v.is_negative(),
        }
    }

    /// Truth value of a variable-free atom.
    pub fn constant_truth(&self) -> Option<bool> {
        if !self.form.is_constant() {
            return None;
        }
        let c = &self.form.constant;
        Some(match self.rel {
            Rel::Eq => c.is_zero(),
            Rel::Gt => c.is_positive(),
            Rel::Ge => !c.is_negative(),
        })
    }

    /// Disjoint atoms whose union is the complement.
    pub fn negation(&self) -> Vec<QAtom> {
        match self.rel {
            Rel::Ge => vec![QAtom::gt(self.form.neg())],
            Rel::Gt => vec![QAtom::ge(self.form.neg())],
            Rel::Eq => vec![QAtom::gt(self.form.clone()), QAtom::gt(self.form.neg())],
        }
    }

    fn normalized(&self) -> QAtom {
        let form = self.form.normalized();
        // equalities are sign-normalized too
        let form = match (self.rel, form.coeffs.iter().find(|c| !c.is_zero())) {
            (Rel::Eq, Some(c)) if c.is_negative() => form.neg(),
            _ => form,
        };
        QAtom {
            form,
            rel: self.rel,
        }
    }
}

/// Simplifies a conjunction: drops true constant atoms and duplicates;
/// `None` if a constant atom is false.
pub fn simplify(atoms: Vec<QAtom>) -> Option<Vec<QAtom>> {
    let mut out: Vec<QAtom> = Vec::with_capacity(atoms.len());
    for a in atoms {
        match a.constant_truth() {
            Some(true) => continue,
            Some(false) => return None,
            None => out.push(a.normalized()),
        }
    }
    out.sort();
    out.dedup();
    // among parallel inequalities keep the tightest
    let mut kept: Vec<QAtom> = Vec::with_capacity(out.len());
    for a in out {
        if a.rel == Rel::Eq {
            kept.push(a);
            continue;
        }
        if let Some(b) = kept
            .iter_mut()
            .find(|b| b.rel != Rel::Eq && b.form.coeffs == a.form.coeffs)
        {
            // form ≥ 0 with smaller constant is tighter
            let tighter = match a.form.constant.cmp(&b.form.constant) {
                std::cmp::Ordering::Less => true,
                std::cmp::Ordering::Greater => false,
                std::cmp::Ordering::Equal => a.rel == Rel::Gt,
            };
            if tighter {
                *b = a;
            }
        } else {
            kept.push(a);
        }
    }
    Some(kept)
}

/// Eliminates `var` from a conjunction; the variable keeps its slot with
/// coefficient zero. `None` if infeasibility surfaced.
pub fn fm_eliminate(atoms: &[QAtom], var: usize) -> Option<Vec<QAtom>> {
    if let Some(eq) = atoms.iter().find(|a| a.rel == Rel::Eq && a.form.mentions(var)) {
        // var = -(rest)/c
        let c = eq.form.coeffs[var].clone();
        let mut rest = eq.form.clone();
        rest.coeffs[var] = BigRational::zero();
        let replacement = rest.scale(&(-c.recip()));
        let out = atoms
            .iter()
            .filter(|a| *a != eq)
            .map(|a| QAtom::new(a.form.substitute(var, &replacement), a.rel))
            .collect();
        return simplify(out);
    }
    let mut keep = Vec::new();
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for a in atoms {
        let c = &a.form.coeffs[var];
        if c.is_zero() {
            keep.push(a.clone());
            continue;
        }
        // a: c·x + r rel 0, so x rel' -r/c
        let mut r = a.form.clone();
        r.coeffs[var] = BigRational::zero();
        let bound = r.scale(&(-c.recip()));
        if c.is_positive() {
            lowers.push((bound, a.rel == Rel::Gt));
        } else {
            uppers.push((bound, a.rel == Rel::Gt));
        }
    }
    for (l, sl) in &lowers {
        for (u, su) in &uppers {
            let form = u.sub(l);
            keep.push(if *sl || *su {
                QAtom::gt(form)
            } else {
                QAtom::ge(form)
            });
        }
    }
    simplify(keep)
}

pub fn feasible(atoms: &[QAtom], arity: usize) -> bool {
    find_point(atoms, arity).is_some()
}

/// A rational point satisfying every atom, by elimination and back-substitution.
pub fn find_point(atoms: &[QAtom], arity: usize) -> Option<Vec<BigRational>> {
    let mut stages: Vec<Vec<QAtom>> = Vec::with_capacity(arity + 1);
    let mut current = simplify(atoms.to_vec())?;
    for var in (0..arity).rev() {
        stages.push(current.clone());
        current = fm_eliminate(&current, var)?;
    }
    let mut point = vec![BigRational::zero(); arity];
    for var in 0..arity {
        let stage = &stages[arity - 1 - var];
        point[var] = pick_value(stage, var, &point)?;
    }
    Some(point)
}

/// Value for `var` given the earlier coordinates of `point`.
fn pick_value(atoms: &[QAtom], var: usize, point: &[BigRational]) -> Option<BigRational> {
    let mut lo: Option<(BigRational, bool)> = None;
    let mut hi: Option<(BigRational, bool)> = None;
    let mut fixed: Option<BigRational> = None;
    for a in atoms {
        let c = a.form.coeffs[var].clone();
        let mut p = point.to_vec();
        p[var] = BigRational::zero();
        let r = a.form.eval(&p);
        if c.is_zero() {
            continue;
        }
        let b = -r / &c;
        match a.rel {
            Rel::Eq => fixed = Some(b),
            rel => {
                let strict = rel == Rel::Gt;
                if c.is_positive() {
                    lo = Some(match lo {
                        Some((l, s)) if l > b || (l == b && s) => (l, s),
                        _ => (b, strict),
                    });
                } else {
                    hi = Some(match hi {
                        Some((h, s)) if h < b || (h == b && s) => (h, s),
                        _ => (b, strict),
                    });
                }
            }
        }
    }
    let v = match (fixed, lo, hi) {
        (Some(v), _, _) => v,
        (None, Some((l, ls)), Some((h, hs))) => {
            if l == h && !ls && !hs {
                l
            } else {
                (l + h) / BigRational::from_integer(BigInt::from(2))
            }
        }
        (None, Some((l, ls)), None) => {
            if ls {
                l + BigRational::one()
            } else {
                l
            }
        }
        (None, None, Some((h, hs))) => {
            if hs {
                h - BigRational::one()
            } else {
                h
            }
        }
        (None, None, None) => BigRational::zero(),
    };
    let mut p = point.to_vec();
    p[var] = v.clone();
    if atoms
        .iter()
        .filter(|a| a.form.coeffs[..=var].iter().any(|c| !c.is_zero()))
        .filter(|a| a.form.coeffs[var + 1..].iter().all(Zero::is_zero))
        .all(|a| a.holds(&p))
    {
        Some(v)
    } else {
        None
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpResult {
    Infeasible,
    Unbounded,
    /// Infimum of the objective; `attained` is false for strict boundaries.
    Min { value: BigRational, attained: bool },
}

/// Infimum of `objective` over the conjunction.
pub fn lp_min(atoms: &[QAtom], arity: usize, objective: &QLin) -> LpResult {
    // z = objective as coordinate `arity`
    let total = arity + 1;
    let mut lifted: Vec<QAtom> = atoms
        .iter()
        .map(|a| QAtom::new(a.form.extend(total), a.rel))
        .collect();
    let mut def = objective.extend(total).neg();
    def.coeffs[arity] = BigRational::one();
    lifted.push(QAtom::eq(def));
    let Some(mut current) = simplify(lifted) else {
        return LpResult::Infeasible;
    };
    for var in (0..arity).rev() {
        match fm_eliminate(&current, var) {
            Some(c) => current = c,
            None => return LpResult::Infeasible,
        }
    }
    let mut best: Option<(BigRational, bool)> = None;
    for a in &current {
        let c = a.form.coeffs[arity].clone();
        let b = -&a.form.constant / &c;
        match a.rel {
            Rel::Eq => {
                return LpResult::Min {
                    value: b,
                    attained: true,
                }
            }
            rel => {
                let strict = rel == Rel::Gt;
                if c.is_positive() {
                    best = Some(match best {
                        Some((l, s)) if l > b || (l == b && s) => (l, s),
                        _ => (b, strict),
                    });
                }
            }
        }
    }
    match best {
        None => LpResult::Unbounded,
        Some((value, strict)) => LpResult::Min {
            value,
            attained: !strict,
        },
    }
}
