//! Cooper-style projection, emptiness and witnesses for single cells.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::cell::{crt, mod_inverse, Congruence, PCell};
use super::term::LinTerm;
use crate::num::{ceil_div, floor_div, lcm, modulo};
use crate::qlinear::{lp_min, LpResult, QAtom, QLin};

/// Exact projection of `cell` along coordinate `var`.
///
/// Returns pairwise disjoint cells of arity `arity - 1`; some may be empty.
pub fn project_cell(cell: &PCell, var: usize) -> Vec<PCell> {
    let n = cell.arity();
    let mut pass_ineqs = Vec::new();
    let mut pass_congs = Vec::new();
    let mut ineqs = Vec::new();
    let mut congs = Vec::new();
    for t in cell.ineqs() {
        if t.mentions(var) {
            ineqs.push(t.clone());
        } else {
            pass_ineqs.push(t.clone());
        }
    }
    for c in cell.congs() {
        if c.term.mentions(var) {
            congs.push(c.clone());
        } else {
            pass_congs.push(c.clone());
        }
    }
    let finish = |ineqs: Vec<LinTerm>, congs: Vec<Congruence>| -> Option<PCell> {
        PCell::new(
            n - 1,
            ineqs.iter().map(|t| t.remove_var(var)).collect(),
            congs
                .into_iter()
                .map(|c| Congruence::new(c.term.remove_var(var), c.modulus))
                .collect(),
        )
    };
    if ineqs.is_empty() && congs.is_empty() {
        return finish(pass_ineqs, pass_congs).into_iter().collect();
    }

    if let Some(eq) = best_equality(cell, var) {
        return project_by_equality(&eq, var, &ineqs, &congs, pass_ineqs, pass_congs)
            .and_then(|(i, c)| finish(i, c))
            .into_iter()
            .collect();
    }

    // scale so that the eliminated variable appears with coefficient ±1 as y' = δ·y
    let delta = ineqs
        .iter()
        .map(|t| t.coeff(var).abs())
        .chain(congs.iter().map(|c| c.term.coeff(var).abs()))
        .fold(BigInt::one(), |acc, a| lcm(&acc, &a));
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    for t in &ineqs {
        let a = t.coeff(var).clone();
        let mut rest = t.clone();
        rest.coeffs[var] = BigInt::zero();
        let k = &delta / a.abs();
        if a.is_positive() {
            lowers.push(rest.scale(&k).neg());
        } else {
            uppers.push(rest.scale(&k));
        }
    }
    // y' ≡ residue(x) (mod m)
    let mut classes: Vec<(LinTerm, BigInt)> = Vec::new();
    for c in &congs {
        let a = c.term.coeff(var).clone();
        let mut rest = c.term.clone();
        rest.coeffs[var] = BigInt::zero();
        let k = &delta / a.abs();
        let r = if a.is_positive() {
            rest.scale(&k).neg()
        } else {
            rest.scale(&k)
        };
        classes.push((r, &c.modulus * &k));
    }
    if !delta.is_one() {
        classes.push((LinTerm::zero(n), delta.clone()));
    }

    if lowers.is_empty() || uppers.is_empty() {
        // unbounded on one side: only solvability of the congruence system matters
        let mut out_congs = pass_congs;
        for i in 0..classes.len() {
            for j in i + 1..classes.len() {
                let g = classes[i].1.gcd(&classes[j].1);
                if !g.is_one() {
                    out_congs.push(Congruence::new(classes[i].0.sub(&classes[j].0), g));
                }
            }
        }
        return finish(pass_ineqs, out_congs).into_iter().collect();
    }

    if classes.is_empty() {
        let mut out = pass_ineqs;
        for l in &lowers {
            for u in &uppers {
                out.push(u.sub(l));
            }
        }
        return finish(out, pass_congs).into_iter().collect();
    }

    // least (or greatest) solution sits at a distance τ ∈ [0, D) from the extreme bound
    let period = classes
        .iter()
        .fold(BigInt::one(), |acc, (_, m)| lcm(&acc, m));
    let use_lower = lowers.len() <= uppers.len();
    let (anchors, others) = if use_lower {
        (&lowers, &uppers)
    } else {
        (&uppers, &lowers)
    };
    let mut out = Vec::new();
    for (i, anchor) in anchors.iter().enumerate() {
        let mut base_ineqs = pass_ineqs.clone();
        for (l, other) in anchors.iter().enumerate() {
            if l == i {
                continue;
            }
            // anchor is the strict extreme against earlier bounds, weak against later ones
            let diff = if use_lower {
                anchor.sub(other)
            } else {
                other.sub(anchor)
            };
            base_ineqs.push(if l < i {
                diff.shift(&-BigInt::one())
            } else {
                diff
            });
        }
        let mut tau = BigInt::zero();
        while tau < period {
            let y = if use_lower {
                anchor.shift(&tau)
            } else {
                anchor.shift(&-&tau)
            };
            let mut ci = base_ineqs.clone();
            for other in others.iter() {
                ci.push(if use_lower { other.sub(&y) } else { y.sub(other) });
            }
            let mut cc = pass_congs.clone();
            for (r, m) in &classes {
                cc.push(Congruence::new(y.sub(r), m.clone()));
            }
            if let Some(c) = finish(ci, cc) {
                out.push(c);
            }
            tau += 1;
        }
    }
    out
}

fn best_equality(cell: &PCell, var: usize) -> Option<LinTerm> {
    cell.equalities()
        .into_iter()
        .filter(|t| t.mentions(var))
        .min_by(|a, b| a.coeff(var).abs().cmp(&b.coeff(var).abs()))
}

type Atoms = (Vec<LinTerm>, Vec<Congruence>);

/// Eliminates `var` through `eq = a·y + s = 0`, i.e. `a·y = -s`.
fn project_by_equality(
    eq: &LinTerm,
    var: usize,
    ineqs: &[LinTerm],
    congs: &[Congruence],
    mut pass_ineqs: Vec<LinTerm>,
    mut pass_congs: Vec<Congruence>,
) -> Option<Atoms> {
    let a = eq.coeff(var).clone();
    let abs_a = a.abs();
    let sign = if a.is_positive() {
        BigInt::one()
    } else {
        -BigInt::one()
    };
    let mut s = eq.clone();
    s.coeffs[var] = BigInt::zero();
    let neg_eq = eq.neg();
    let rewrite = |t: &LinTerm| -> LinTerm {
        let b = t.coeff(var).clone();
        let mut r = t.clone();
        r.coeffs[var] = BigInt::zero();
        // |a|·(b·y + r) = b·sign(a)·(a·y) + |a|·r = -b·sign(a)·s + |a|·r
        r.scale(&abs_a).sub(&s.scale(&(&b * &sign)))
    };
    for t in ineqs {
        if t == eq || t == &neg_eq {
            continue;
        }
        pass_ineqs.push(rewrite(t));
    }
    for c in congs {
        pass_congs.push(Congruence::new(rewrite(&c.term), &c.modulus * &abs_a));
    }
    if !abs_a.is_one() {
        pass_congs.push(Congruence::new(s, abs_a));
    }
    Some((pass_ineqs, pass_congs))
}

/// Rough cost of projecting `var`, used to pick an elimination order.
fn projection_cost(cell: &PCell, var: usize) -> u128 {
    if cell.atoms().iter().all(|a| !a.mentions(var)) {
        return 0;
    }
    if best_equality(cell, var).is_some() {
        return 1;
    }
    let mut lo = 0u128;
    let mut hi = 0u128;
    let mut delta = BigInt::one();
    for t in cell.ineqs() {
        let a = t.coeff(var);
        if a.is_positive() {
            lo += 1;
        } else if a.is_negative() {
            hi += 1;
        }
        if !a.is_zero() {
            delta = lcm(&delta, &a.abs());
        }
    }
    let mut period = delta.clone();
    let mut has_cong = false;
    for c in cell.congs() {
        let a = c.term.coeff(var);
        if !a.is_zero() {
            has_cong = true;
            let k = &delta / a.abs().gcd(&delta);
            period = lcm(&period, &(&c.modulus * k));
        }
    }
    if lo == 0 || hi == 0 {
        return 2;
    }
    let p: u128 = period.try_into().unwrap_or(u128::MAX / 4);
    if p == 1 && !has_cong {
        return 2 + lo * hi;
    }
    2 + lo.min(hi) * p * 4
}

/// Some integer point of `cell`, or `None` if it is empty.
pub fn find_point(cell: &PCell) -> Option<Vec<BigInt>> {
    let n = cell.arity();
    if n == 0 {
        return Some(Vec::new());
    }
    if n == 1 {
        return point_on_line(cell).map(|x| vec![x]);
    }
    let var = (0..n)
        .min_by_key(|&v| projection_cost(cell, v))
        .expect("arity is positive");
    let cost = projection_cost(cell, var);
    if cost > BRANCH_THRESHOLD {
        if let Some(found) = branch(cell, cost) {
            return found;
        }
    }
    for piece in project_cell(cell, var) {
        if let Some(mut point) = find_point(&piece) {
            point.insert(var, BigInt::zero());
            let y = solve_fiber(cell, var, &point)
                .expect("projection is exact, so every projected point has a fiber");
            point[var] = y;
            return Some(point);
        }
    }
    None
}

const BRANCH_THRESHOLD: u128 = 32;

/// Searches the integer values of the variable with the narrowest rational
/// range; `None` when that is not cheaper than projecting.
fn branch(cell: &PCell, cost: u128) -> Option<Option<Vec<BigInt>>> {
    let n = cell.arity();
    let atoms: Vec<QAtom> = cell.ineqs().iter().map(|t| QAtom::ge(QLin::from_term(t))).collect();
    let mut best: Option<(usize, BigInt, BigInt)> = None;
    for v in 0..n {
        let x = QLin::var(n, v);
        let lo = match lp_min(&atoms, n, &x) {
            LpResult::Infeasible => return Some(None),
            LpResult::Unbounded => continue,
            LpResult::Min { value, .. } => value.ceil().to_integer(),
        };
        let hi = match lp_min(&atoms, n, &x.neg()) {
            LpResult::Infeasible => return Some(None),
            LpResult::Unbounded => continue,
            LpResult::Min { value, .. } => (-value).floor().to_integer(),
        };
        if hi < lo {
            return Some(None);
        }
        if best.as_ref().is_none_or(|(_, l, h)| &hi - &lo < h - l) {
            best = Some((v, lo, hi));
        }
    }
    let (v, lo, hi) = best?;
    let width: u128 = (&hi - &lo).try_into().ok()?;
    if width >= cost {
        return None;
    }
    let mut value = lo;
    while value <= hi {
        let fixed = cell.map_terms(n - 1, |t| {
            let mut t = t.clone();
            t.constant += &t.coeffs[v] * &value;
            t.coeffs[v] = BigInt::zero();
            t.remove_var(v)
        });
        if let Some(mut point) = fixed.as_ref().and_then(find_point) {
            point.insert(v, value);
            return Some(Some(point));
        }
        value += 1;
    }
    Some(None)
}

/// Direct solution in one variable: intersect the bounds, merge the congruences.
fn point_on_line(cell: &PCell) -> Option<BigInt> {
    let mut lower: Option<BigInt> = None;
    let mut upper: Option<BigInt> = None;
    for t in cell.ineqs() {
        let a = &t.coeffs[0];
        let c = &t.constant;
        if a.is_positive() {
            let b = ceil_div(&-c, a);
            lower = Some(lower.map_or(b.clone(), |l| l.max(b)));
        } else if a.is_negative() {
            let b = floor_div(c, &-a);
            upper = Some(upper.map_or(b.clone(), |u| u.min(b)));
        } else if c.is_negative() {
            return None;
        }
    }
    let (mut residue, mut modulus) = (BigInt::zero(), BigInt::one());
    for cg in cell.congs() {
        let a = modulo(&cg.term.coeffs[0], &cg.modulus);
        let g = a.gcd(&cg.modulus);
        if !cg.term.constant.is_multiple_of(&g) {
            return None;
        }
        let m = &cg.modulus / &g;
        let inv = mod_inverse(&(&a / &g), &m)?;
        let r = modulo(&(-&cg.term.constant / &g * inv), &m);
        (residue, modulus) = crt(&residue, &modulus, &r, &m)?;
    }
    let x = match (&lower, &upper) {
        (Some(lo), _) => lo + modulo(&(&residue - lo), &modulus),
        (None, Some(hi)) => hi - modulo(&(hi - &residue), &modulus),
        (None, None) => residue,
    };
    match &upper {
        Some(hi) if &x > hi => None,
        _ => Some(x),
    }
}

pub fn is_empty(cell: &PCell) -> bool {
    find_point(cell).is_none()
}

/// The fiber of `cell` over `point` along `var` as `lo ≤ y ≤ hi, y ≡ r (mod m)`.
pub struct Fiber {
    pub lower: Option<BigInt>,
    pub upper: Option<BigInt>,
    pub residue: BigInt,
    pub modulus: BigInt,
}

impl Fiber {
    /// Smallest element (or largest if unbounded below).
    pub fn pick(&self) -> Option<BigInt> {
        let y = match (&self.lower, &self.upper) {
            (Some(lo), _) => lo + modulo(&(&self.residue - lo), &self.modulus),
            (None, Some(hi)) => hi - modulo(&(hi - &self.residue), &self.modulus),
            (None, None) => self.residue.clone(),
        };
        match &self.upper {
            Some(hi) if &y > hi => None,
            _ => Some(y),
        }
    }
}

/// Fiber of `cell` along `var` above the remaining coordinates of `point`
/// (the entry at `var` is ignored).
pub fn fiber(cell: &PCell, var: usize, point: &[BigInt]) -> Option<Fiber> {
    let mut base = point.to_vec();
    base[var] = BigInt::zero();
    let mut lower: Option<BigInt> = None;
    let mut upper: Option<BigInt> = None;
    for t in cell.ineqs() {
        let a = t.coeff(var);
        let s = t.eval(&base);
        if a.is_zero() {
            if s.is_negative() {
                return None;
            }
        } else if a.is_positive() {
            let b = ceil_div(&-s, a);
            lower = Some(match lower {
                Some(l) if l >= b => l,
                _ => b,
            });
        } else {
            let b = floor_div(&s, &-a);
            upper = Some(match upper {
                Some(u) if u <= b => u,
                _ => b,
            });
        }
    }
    let mut residue = BigInt::zero();
    let mut modulus = BigInt::one();
    for c in cell.congs() {
        let a = modulo(c.term.coeff(var), &c.modulus);
        let s = c.term.eval(&base);
        // a·y ≡ -s (mod m)
        let g = a.gcd(&c.modulus);
        let rhs = modulo(&-s, &c.modulus);
        if !rhs.is_multiple_of(&g) {
            return None;
        }
        if a.is_zero() {
            continue;
        }
        let m = &c.modulus / &g;
        let inv = mod_inverse(&(&a / &g), &m).expect("reduced coefficient is a unit");
        let r = modulo(&(&rhs / &g * inv), &m);
        let (r2, m2) = crt(&residue, &modulus, &r, &m)?;
        residue = r2;
        modulus = m2;
    }
    if let (Some(l), Some(u)) = (&lower, &upper) {
        if l > u {
            return None;
        }
    }
    Some(Fiber {
        lower,
        upper,
        residue,
        modulus,
    })
}

pub fn solve_fiber(cell: &PCell, var: usize, point: &[BigInt]) -> Option<BigInt> {
    fiber(cell, var, point)?.pick()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn brute_projection(cell: &PCell, var: usize, range: i64, yrange: i64) -> Vec<i64> {
        assert_eq!(cell.arity(), 2);
        let mut out = Vec::new();
        for x in -range..=range {
            let ok = (-yrange..=yrange).any(|y| {
                let mut p = vec![int(x), int(x)];
                p[var] = int(y);
                p[1 - var] = int(x);
                cell.contains(&p)
            });
            if ok {
                out.push(x);
            }
        }
        out
    }

    fn projected_points(pieces: &[PCell], range: i64) -> Vec<i64> {
        (-range..=range)
            .filter(|&x| {
                let hits = pieces.iter().filter(|c| c.contains(&[int(x)])).count();
                assert!(hits <= 1, "pieces overlap at {x}");
                hits == 1
            })
            .collect()
    }

    #[test]
    fn parity_by_equality() {
        // exists y: x = 2y
        let c = PCell::universe(2)
            .and_eq(LinTerm::from_ints(&[1, -2], 0))
            .unwrap();
        let p = project_cell(&c, 1);
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].congs().len(), 1);
        assert_eq!(p[0].congs()[0].modulus, int(2));
        assert_eq!(p[0].congs()[0].residue(), int(0));
    }

    #[test]
    fn cooper_with_mixed_coefficients() {
        // 3y ≤ x + 4, 2y ≥ x - 1, y ≡ 1 (mod 3)
        let c = PCell::new(
            2,
            vec![
                LinTerm::from_ints(&[1, -3], 4),
                LinTerm::from_ints(&[-1, 2], 1),
            ],
            vec![Congruence::new(LinTerm::from_ints(&[0, 1], -1), int(3))],
        )
        .unwrap();
        let pieces = project_cell(&c, 1);
        assert_eq!(projected_points(&pieces, 40), brute_projection(&c, 1, 40, 200));
    }

    #[test]
    fn shadow_for_unit_coefficients() {
        let c = PCell::new(
            2,
            vec![
                LinTerm::from_ints(&[1, -1], 0),
                LinTerm::from_ints(&[0, 1], 0),
            ],
            vec![],
        )
        .unwrap();
        let pieces = project_cell(&c, 1);
        assert_eq!(pieces.len(), 1);
        assert_eq!(projected_points(&pieces, 10), (0..=10).collect::<Vec<_>>());
    }

    #[test]
    fn witness_for_nonempty_and_none_for_empty() {
        let c = PCell::new(
            2,
            vec![
                LinTerm::from_ints(&[2, 3], -7),
                LinTerm::from_ints(&[-2, -3], 8),
                LinTerm::from_ints(&[1, 0], 0),
            ],
            vec![Congruence::new(LinTerm::from_ints(&[0, 1], 0), int(2))],
        )
        .unwrap();
        let p = find_point(&c).expect("nonempty");
        assert!(c.contains(&p));
        // 2x + 4y = 3 has no integer solutions
        let e = PCell::universe(2).and_eq(LinTerm::from_ints(&[2, 4], -3));
        assert!(e.is_none_or(|e| is_empty(&e)));
        // 1 ≤ 3x ≤ 2
        let f = PCell::new(
            1,
            vec![LinTerm::from_ints(&[3], -1), LinTerm::from_ints(&[-3], 2)],
            vec![],
        );
        assert!(f.is_none_or(|f| is_empty(&f)));
    }
}
