//! Numeric oracle over `Q_p` and `F_q((t))`: truncated integrals computed
//! exactly modulo `π^N`, exact tail bounds, and comparison with symbolic results.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genfun::RatFun;
use crate::presburger::{qe, LinTerm};
use crate::qlinear::{lp_min, LpResult, QAtom, QLin};
use crate::vfrag::{MonomialRegion, ValWeight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldKind {
    Qp,
    Laurent,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Qp => "qp",
            FieldKind::Laurent => "laurent",
        })
    }
}

/// A concrete local field with ramification 1, worked modulo `π^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalFieldConfig {
    pub kind: FieldKind,
    pub p: u32,
    pub delta: u32,
    pub precision: u32,
}

fn is_prime(p: u32) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

impl LocalFieldConfig {
    pub fn new(kind: FieldKind, p: u32, delta: u32, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::Invalid(format!("{p} is not prime")));
        }
        if delta == 0 || (kind == FieldKind::Qp && delta != 1) {
            return Err(Error::Invalid(format!("residue degree {delta} not allowed for {kind}")));
        }
        if precision == 0 {
            return Err(Error::Precision {
                precision,
                reason: "need at least one digit".to_string(),
            });
        }
        Ok(LocalFieldConfig {
            kind,
            p,
            delta,
            precision,
        })
    }

    pub fn qp(p: u32, precision: u32) -> Result<Self> {
        LocalFieldConfig::new(FieldKind::Qp, p, 1, precision)
    }

    pub fn laurent(p: u32, delta: u32, precision: u32) -> Result<Self> {
        LocalFieldConfig::new(FieldKind::Laurent, p, delta, precision)
    }

    pub fn q(&self) -> u64 {
        u64::from(self.p).pow(self.delta)
    }

    fn q_big(&self) -> BigInt {
        BigInt::from(self.q())
    }

    /// Valuation and angular component index (in `0..q-1`) of a residue
    /// representative, or `None` on the deep stratum `π^N 𝒪`.
    fn digits_of(&self, x: u64) -> Option<(u32, u64)> {
        let q = self.q();
        match self.kind {
            FieldKind::Qp => {
                if x == 0 {
                    return None;
                }
                let p = u64::from(self.p);
                let mut v = 0;
                let mut y = x;
                while y.is_multiple_of(p) {
                    y /= p;
                    v += 1;
                }
                Some((v, y % p - 1))
            }
            FieldKind::Laurent => {
                // little-endian coefficients in F_q, each encoded in 0..q
                let mut y = x;
                for v in 0..self.precision {
                    let c = y % q;
                    if c != 0 {
                        return Some((v, c - 1));
                    }
                    y /= q;
                }
                None
            }
        }
    }
}

/// Outcome of an oracle comparison; all values exact.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleReport {
    pub truncated: BigRational,
    pub tail_bound: BigRational,
    pub symbolic: BigRational,
    pub pass: bool,
}

impl OracleReport {
    pub fn discrepancy(&self) -> BigRational {
        (&self.truncated - &self.symbolic).abs()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "truncated": self.truncated.to_string(),
            "tail_bound": self.tail_bound.to_string(),
            "symbolic": self.symbolic.to_string(),
            "discrepancy": self.discrepancy().to_string(),
            "verdict": if self.pass { "pass" } else { "fail" },
        })
    }
}

fn q_pow(q: &BigInt, e: &BigInt) -> BigRational {
    let k = e.to_i64().expect("exponent fits in i64");
    let base = BigRational::from_integer(q.clone());
    if k >= 0 {
        num_traits::pow(base, k as usize)
    } else {
        num_traits::pow(base.recip(), (-k) as usize)
    }
}

/// Exponent `E(γ) = Σγ + Σ κ_i f_i(γ) + ω(γ)` of `q^{-E}` as one form.
fn exponent_form(n: usize, weight: &ValWeight, kappa: &[BigRational]) -> Result<QLin> {
    weight.check_arity(n)?;
    if kappa.len() < weight.num_t() {
        return Err(Error::Invalid(format!(
            "{} values of kappa given, {} needed",
            kappa.len(),
            weight.num_t()
        )));
    }
    if kappa.iter().any(|k| !k.is_positive()) {
        return Err(Error::Invalid("kappa values must be positive".to_string()));
    }
    let mut e = QLin::from_ints(&vec![1; n], 0);
    for (&i, f) in &weight.kappa {
        e = e.add(&f.scale(&kappa[i - 1]));
    }
    if let Some(w) = &weight.omega {
        e = e.add(w);
    }
    Ok(e)
}

fn integral_exponent(e: &QLin, gamma: &[BigRational]) -> Result<BigInt> {
    let v = e.eval(gamma);
    if !v.is_integer() {
        return Err(Error::Invalid(format!(
            "exponent {v} of q is not an integer; use integral kappa"
        )));
    }
    Ok(v.to_integer())
}

/// Fibre counts at `q` per part, checked to fit in the torus.
fn realized_parts(
    region: &MonomialRegion,
    q: &BigInt,
) -> Result<Vec<(crate::presburger::PresburgerSet, BigInt)>> {
    let n = region.arity();
    let torus = num_traits::pow(q - 1, n);
    let mut out = Vec::new();
    for s in region.open_strata() {
        for cell in s.base.cells() {
            for j in 0..n {
                let below = cell.and_ge(LinTerm::var(n, j).neg().shift(&BigInt::from(-1)));
                if below.as_ref().is_some_and(|c| !qe::is_empty(c)) {
                    return Err(Error::RangeViolation(
                        "region leaves the unit polydisc".to_string(),
                    ));
                }
            }
        }
        for (set, class) in s.parts()? {
            let count = class
                .point_count(&region.symbols)?
                .eval(&BigRational::from_integer(q.clone()), &[])?;
            if !count.is_integer() || count.is_negative() || count.to_integer() > torus {
                return Err(Error::Unrealizable(format!(
                    "class {class} counts {count} points, torus has {torus}"
                )));
            }
            out.push((set, count.to_integer()));
        }
    }
    Ok(out)
}

fn valuation_vectors(n: usize, depth: u32) -> Vec<Vec<BigInt>> {
    let mut out: Vec<Vec<BigInt>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|g| {
                (0..depth).map(move |v| {
                    let mut g = g.clone();
                    g.push(BigInt::from(v));
                    g
                })
            })
            .collect();
    }
    out
}

/// `Σ_{x mod π^N, x ∈ A, off the deep stratum} q^{-ρ(Σκ_i f_i + ω)(x)} · q^{(1-N)n}`,
/// summed class by class: the residues with valuation `γ` and a fixed
/// angular component number `q^{Σ(N-1-γ_i)}`.
pub fn truncated_zeta(
    region: &MonomialRegion,
    weight: &ValWeight,
    kappa: &[BigRational],
    cfg: &LocalFieldConfig,
) -> Result<BigRational> {
    let n = region.arity();
    let e = exponent_form(n, weight, kappa)?;
    let q = cfg.q_big();
    let parts = realized_parts(region, &q)?;
    let total: Result<Vec<BigRational>> = valuation_vectors(n, cfg.precision)
        .par_iter()
        .map(|g| {
            let Some((_, count)) = parts.iter().find(|(s, _)| s.contains(g)) else {
                return Ok(BigRational::zero());
            };
            let point: Vec<BigRational> = g.iter().cloned().map(BigRational::from_integer).collect();
            let k = integral_exponent(&e, &point)?;
            Ok(BigRational::from_integer(count.clone()) * q_pow(&q, &-k))
        })
        .collect();
    Ok(total?.into_iter().sum())
}

/// Truncated integral by visiting every residue vector modulo `π^N`; also
/// returns the number of vectors visited. Angular tuples are realized as the
/// lexicographically first `#class(q)` elements of the torus.
pub fn brute_force_zeta(
    region: &MonomialRegion,
    weight: &ValWeight,
    kappa: &[BigRational],
    cfg: &LocalFieldConfig,
) -> Result<(BigRational, BigInt)> {
    let n = region.arity();
    let e = exponent_form(n, weight, kappa)?;
    let q = cfg.q_big();
    let parts = realized_parts(region, &q)?;
    let per_coord = cfg
        .q()
        .checked_pow(cfg.precision)
        .filter(|&m| m.checked_pow(n as u32).is_some_and(|t| t <= 1 << 22))
        .ok_or_else(|| Error::Precision {
            precision: cfg.precision,
            reason: "too many residue vectors to visit one by one".to_string(),
        })?;
    let total = per_coord.pow(n as u32);
    let cell_measure = q_pow(&q, &BigInt::from((1 - i64::from(cfg.precision)) * n as i64));
    let qm1 = cfg.q() - 1;
    // partitioned by the leading residue digit of the first coordinate
    let chunks: Vec<Result<BigRational>> = (0..cfg.q())
        .into_par_iter()
        .map(|lead| {
            let mut acc = BigRational::zero();
            let mut idx = lead;
            while idx < total {
                let mut rest = idx;
                let mut gamma = Vec::with_capacity(n);
                let mut tuple: u64 = 0;
                let mut deep = false;
                for _ in 0..n {
                    let x = rest % per_coord;
                    rest /= per_coord;
                    match cfg.digits_of(x) {
                        Some((v, a)) => {
                            gamma.push(BigInt::from(v));
                            tuple = tuple * qm1 + a;
                        }
                        None => deep = true,
                    }
                }
                idx += cfg.q();
                if deep {
                    continue;
                }
                let Some((_, count)) = parts.iter().find(|(s, _)| s.contains(&gamma)) else {
                    continue;
                };
                if BigInt::from(tuple) >= *count {
                    continue;
                }
                let point: Vec<BigRational> = gamma.into_iter().map(BigRational::from_integer).collect();
                let k = integral_exponent(&e, &point)? - point.iter().map(BigRational::to_integer).sum::<BigInt>();
                // the class measure is folded in: cell_measure per representative
                acc += q_pow(&q, &-k) * &cell_measure;
            }
            Ok(acc)
        })
        .collect();
    let mut sum = BigRational::zero();
    for c in chunks {
        sum += c?;
    }
    Ok((sum, BigInt::from(total)))
}

/// Exact upper bound on the mass of the deep stratum `{∃i: γ_i ≥ N}`.
///
/// Two bounds are tried and the smaller one is kept. The first multiplies
/// `vol{x_i ∈ π^N 𝒪} = q^{n-N}` by the supremum of the weight on the part of
/// the region with `γ_i ≥ N`. The second sums a dominating geometric series
/// cell by cell, and still applies when the weight alone is unbounded there.
pub fn tail_bound(
    region: &MonomialRegion,
    weight: &ValWeight,
    kappa: &[BigRational],
    cfg: &LocalFieldConfig,
) -> Result<BigRational> {
    let n = region.arity();
    let e = exponent_form(n, weight, kappa)?;
    let q = cfg.q_big();
    let parts = realized_parts(region, &q)?;
    let depth = BigInt::from(cfg.precision);
    let sup = supremum_bound(region, &e, &q, &depth);
    let series = series_bound(&parts, &e, &q, &depth);
    match (sup, series) {
        (Some(a), Some(b)) => Ok(a.min(b)),
        (Some(a), None) | (None, Some(a)) => Ok(a),
        (None, None) => Err(Error::Precision {
            precision: cfg.precision,
            reason: "integrand does not decay on the deep stratum".to_string(),
        }),
    }
}

fn cell_atoms(cell: &crate::presburger::PCell, n: usize, i: usize, depth: &BigInt) -> Vec<QAtom> {
    let mut atoms: Vec<QAtom> = cell.ineqs().iter().map(|t| QAtom::ge(QLin::from_term(t))).collect();
    atoms.extend((0..n).map(|j| QAtom::ge(QLin::var(n, j))));
    atoms.push(QAtom::ge(QLin::from_term(&LinTerm::var(n, i).shift(&-depth))));
    atoms
}

fn supremum_bound(region: &MonomialRegion, e: &QLin, q: &BigInt, depth: &BigInt) -> Option<BigRational> {
    let n = region.arity();
    // the volume part Σγ is already in q^{n-N}
    let e = e.sub(&QLin::from_ints(&vec![1; n], 0));
    let mut bound = BigRational::zero();
    for i in 0..n {
        let mut best: Option<BigInt> = None;
        for s in region.open_strata() {
            for cell in s.base.cells() {
                match lp_min(&cell_atoms(cell, n, i, depth), n, &e) {
                    LpResult::Infeasible => {}
                    LpResult::Unbounded => return None,
                    LpResult::Min { value, .. } => {
                        let low = value.ceil().to_integer();
                        best = Some(best.map_or(low.clone(), |b: BigInt| b.min(low)));
                    }
                }
            }
        }
        if let Some(low) = best {
            let vol = q_pow(q, &(BigInt::from(n) - depth));
            bound += vol * q_pow(q, &-low);
        }
    }
    Some(bound)
}

const SLOPES: [u32; 12] = [1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64];

/// `Σ_{γ ∈ cell, γ_i ≥ N} q^{-E(γ)}` is at most `q^{-⌊d⌋} q^{-⌊N/m⌋} (mq/(q-1))^n`
/// whenever `E ≥ d + Σγ/m` on the cell; `1 - q^{-1/m} ≥ (1 - q^{-1})/m` by convexity.
fn series_bound(
    parts: &[(crate::presburger::PresburgerSet, BigInt)],
    e: &QLin,
    q: &BigInt,
    depth: &BigInt,
) -> Option<BigRational> {
    let Some(n) = parts.first().map(|(s, _)| s.arity()) else {
        return Some(BigRational::zero());
    };
    let qr = BigRational::from_integer(q.clone());
    let ratio = &qr / (&qr - BigRational::from_integer(1.into()));
    let mut total = BigRational::zero();
    for (set, count) in parts {
        for cell in set.cells() {
            for i in 0..n {
                let atoms = cell_atoms(cell, n, i, depth);
                let mut best: Option<BigRational> = None;
                for m in SLOPES {
                    let slope = QLin::from_ints(&vec![1; n], 0).scale(&BigRational::new(1.into(), m.into()));
                    match lp_min(&atoms, n, &e.sub(&slope)) {
                        LpResult::Infeasible => {
                            best = Some(BigRational::zero());
                            break;
                        }
                        LpResult::Unbounded => {}
                        LpResult::Min { value, .. } => {
                            let geometric = num_traits::pow(&ratio * BigRational::from_integer(m.into()), n);
                            let b = q_pow(q, &-value.floor().to_integer())
                                * q_pow(q, &-(depth / BigInt::from(m)))
                                * geometric;
                            best = Some(best.map_or(b.clone(), |x| x.min(b)));
                        }
                    }
                }
                total += BigRational::from_integer(count.clone()) * best?;
            }
        }
    }
    Some(total)
}

/// Evaluates the symbolic result at `q` and `T_i = q^{-κ_i}` and checks it
/// against the truncated integral within the tail bound.
pub fn compare(
    symbolic: &RatFun,
    region: &MonomialRegion,
    weight: &ValWeight,
    kappa: &[BigRational],
    cfg: &LocalFieldConfig,
) -> Result<OracleReport> {
    let q = cfg.q_big();
    let qr = BigRational::from_integer(q.clone());
    let ts: Vec<BigRational> = kappa
        .iter()
        .map(|k| {
            if !k.is_integer() {
                return Err(Error::Invalid(format!("T = q^-{k} is not rational")));
            }
            Ok(q_pow(&q, &-k.to_integer()))
        })
        .collect::<Result<_>>()?;
    let symbolic = symbolic.evaluate(&qr, &ts)?;
    let truncated = truncated_zeta(region, weight, kappa, cfg)?;
    let tail = tail_bound(region, weight, kappa, cfg)?;
    let pass = (&truncated - &symbolic).abs() <= tail;
    Ok(OracleReport {
        truncated,
        tail_bound: tail,
        symbolic,
        pass,
    })
}
