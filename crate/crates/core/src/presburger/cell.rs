use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::term::LinTerm;
use crate::num::{floor_div, gcd_all, modulo};

/// `term ≡ 0 (mod modulus)`; the constant of `term` carries the residue.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Congruence {
    pub term: LinTerm,
    pub modulus: BigInt,
}

impl Congruence {
    pub fn new(term: LinTerm, modulus: BigInt) -> Self {
        Congruence { term, modulus }
    }

    /// Residue `r` in the reading `coeffs·x ≡ r (mod m)`.
    pub fn residue(&self) -> BigInt {
        modulo(&-&self.term.constant, &self.modulus)
    }

    pub fn holds(&self, point: &[BigInt]) -> bool {
        self.term.eval(point).is_multiple_of(&self.modulus)
    }

    /// Reduced form, `None` if unsatisfiable, `Some(None)` if trivially true.
    fn normalized(&self) -> Option<Option<Congruence>> {
        let m = self.modulus.abs();
        if m.is_zero() {
            return Some(None);
        }
        let mut coeffs: Vec<BigInt> = self.term.coeffs.iter().map(|c| modulo(c, &m)).collect();
        let mut constant = modulo(&self.term.constant, &m);
        let g = gcd_all(coeffs.iter()).gcd(&m);
        if !constant.is_multiple_of(&g) {
            return None;
        }
        let mut m = m / &g;
        for c in coeffs.iter_mut() {
            *c /= &g;
        }
        constant /= &g;
        if m.is_one() {
            return Some(None);
        }
        let support: Vec<usize> = (0..coeffs.len()).filter(|&i| !coeffs[i].is_zero()).collect();
        if support.len() == 1 {
            // a*x + c ≡ 0 with gcd(a, m) = 1 becomes x + c/a ≡ 0
            let i = support[0];
            let inv = mod_inverse(&coeffs[i], &m).expect("coefficient is a unit modulo m");
            constant = modulo(&(&constant * &inv), &m);
            coeffs[i] = BigInt::one();
        }
        m = m.abs();
        Some(Some(Congruence {
            term: LinTerm::new(coeffs, constant),
            modulus: m,
        }))
    }
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = modulo(a, m).extended_gcd(m);
    if e.gcd.is_one() {
        Some(modulo(&e.x, m))
    } else {
        None
    }
}

/// Merges `x ≡ a (mod m)` and `x ≡ b (mod n)`.
pub(crate) fn crt(a: &BigInt, m: &BigInt, b: &BigInt, n: &BigInt) -> Option<(BigInt, BigInt)> {
    let e = m.extended_gcd(n);
    let g = e.gcd;
    let diff = b - a;
    if !diff.is_multiple_of(&g) {
        return None;
    }
    let l = m / &g * n;
    let k = modulo(&(&diff / &g * &e.x), &(n / &g));
    Some((modulo(&(a + m * k), &l), l))
}

fn prime_powers(m: &BigInt) -> Vec<(BigInt, u32)> {
    let mut out = Vec::new();
    let mut rest = m.abs();
    let mut p = BigInt::from(2);
    while &p * &p <= rest {
        let mut k = 0;
        while rest.is_multiple_of(&p) {
            rest /= &p;
            k += 1;
        }
        if k > 0 {
            out.push((p.clone(), k));
        }
        p += 1;
    }
    if rest > BigInt::one() {
        out.push((rest, 1));
    }
    out
}

/// A single atomic constraint of a cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Atom {
    /// `term >= 0`
    Ge(LinTerm),
    Cong(Congruence),
}

impl Atom {
    /// Disjoint atoms whose union is the complement of `self`.
    ///
    /// A congruence modulo `m = Π p^k` is negated along its prime powers:
    /// the pieces are `term ≡ 0 (mod Q)` for the earlier prime powers `Q`
    /// together with `term ≡ r·p^j (mod p^{j+1})`, `0 < r < p`, `j < k`.
    pub fn negation(&self) -> Vec<Atom> {
        match self {
            Atom::Ge(t) => vec![Atom::Ge(t.neg().shift(&-BigInt::one()))],
            Atom::Cong(c) => {
                let mut out = Vec::new();
                let mut done = BigInt::one();
                for (p, k) in prime_powers(&c.modulus) {
                    let mut pj = BigInt::one();
                    for _ in 0..k {
                        let next = &pj * &p;
                        let mut r = BigInt::one();
                        while r < p {
                            let (s, m) = crt(&BigInt::zero(), &done, &(&r * &pj), &next)
                                .expect("coprime moduli");
                            out.push(Atom::Cong(Congruence::new(c.term.shift(&-s), m)));
                            r += 1;
                        }
                        pj = next;
                    }
                    done *= pj;
                }
                out
            }
        }
    }

    pub fn mentions(&self, index: usize) -> bool {
        match self {
            Atom::Ge(t) => t.mentions(index),
            Atom::Cong(c) => c.term.mentions(index),
        }
    }
}

/// Conjunction of linear inequalities and congruences over `Z^arity`.
///
/// Cells are kept normalized: inequality coefficients are primitive with the
/// constant floored, redundant parallel inequalities are dropped, congruences
/// are reduced and trivially true ones removed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PCell {
    arity: usize,
    ineqs: Vec<LinTerm>,
    congs: Vec<Congruence>,
}

impl PCell {
    pub fn universe(arity: usize) -> Self {
        PCell {
            arity,
            ineqs: Vec::new(),
            congs: Vec::new(),
        }
    }

    /// Normalized cell, or `None` when normalization already exposes emptiness.
    pub fn new(arity: usize, ineqs: Vec<LinTerm>, congs: Vec<Congruence>) -> Option<Self> {
        PCell {
            arity,
            ineqs,
            congs,
        }
        .normalize()
    }

    /// Sound syntactic test for `self ⊆ other`: every constraint of `other`
    /// is a weakening of one in `self`.
    pub fn implies(&self, other: &PCell) -> bool {
        other.atoms().iter().all(|a| self.implies_atom(a))
    }

    fn implies_atom(&self, atom: &Atom) -> bool {
        match atom {
            Atom::Ge(t) => self
                .ineqs
                .iter()
                .any(|s| s.coeffs == t.coeffs && s.constant <= t.constant),
            Atom::Cong(c) => self.congs.iter().any(|d| {
                d.modulus.is_multiple_of(&c.modulus)
                    && (&d.term.constant - &c.term.constant).is_multiple_of(&c.modulus)
                    && d.term
                        .coeffs
                        .iter()
                        .zip(&c.term.coeffs)
                        .all(|(a, b)| (a - b).is_multiple_of(&c.modulus))
            }),
        }
    }

    pub fn from_atoms(arity: usize, atoms: impl IntoIterator<Item = Atom>) -> Option<Self> {
        let mut ineqs = Vec::new();
        let mut congs = Vec::new();
        for a in atoms {
            match a {
                Atom::Ge(t) => ineqs.push(t),
                Atom::Cong(c) => congs.push(c),
            }
        }
        PCell::new(arity, ineqs, congs)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn ineqs(&self) -> &[LinTerm] {
        &self.ineqs
    }

    pub fn congs(&self) -> &[Congruence] {
        &self.congs
    }

    pub fn atoms(&self) -> Vec<Atom> {
        self.ineqs
            .iter()
            .cloned()
            .map(Atom::Ge)
            .chain(self.congs.iter().cloned().map(Atom::Cong))
            .collect()
    }

    pub fn is_universe(&self) -> bool {
        self.ineqs.is_empty() && self.congs.is_empty()
    }

    pub fn contains(&self, point: &[BigInt]) -> bool {
        self.ineqs.iter().all(|t| !t.eval(point).is_negative())
            && self.congs.iter().all(|c| c.holds(point))
    }

    /// Terms `t` with `t = 0` forced by an opposite pair of inequalities.
    pub fn equalities(&self) -> Vec<LinTerm> {
        let mut out = Vec::new();
        for t in &self.ineqs {
            let n = t.neg();
            if self.ineqs.contains(&n) && t > &n {
                out.push(t.clone());
            }
        }
        out
    }

    pub fn and_atom(&self, atom: Atom) -> Option<PCell> {
        let mut c = self.clone();
        match atom {
            Atom::Ge(t) => c.ineqs.push(t),
            Atom::Cong(k) => c.congs.push(k),
        }
        c.normalize()
    }

    pub fn and_ge(&self, t: LinTerm) -> Option<PCell> {
        self.and_atom(Atom::Ge(t))
    }

    pub fn and_eq(&self, t: LinTerm) -> Option<PCell> {
        let n = t.neg();
        self.and_ge(t)?.and_ge(n)
    }

    pub fn and_cong(&self, t: LinTerm, modulus: BigInt) -> Option<PCell> {
        self.and_atom(Atom::Cong(Congruence::new(t, modulus)))
    }

    pub fn intersect(&self, other: &PCell) -> Option<PCell> {
        debug_assert_eq!(self.arity, other.arity);
        let mut c = self.clone();
        c.ineqs.extend(other.ineqs.iter().cloned());
        c.congs.extend(other.congs.iter().cloned());
        c.normalize()
    }

    /// Pieces of `self \ other`, pairwise disjoint; some may still be empty.
    pub fn difference(&self, other: &PCell) -> Vec<PCell> {
        let mut out = Vec::new();
        let mut prefix = Some(self.clone());
        for atom in other.atoms() {
            let Some(base) = prefix.clone() else { break };
            if base.implies_atom(&atom) {
                continue;
            }
            for neg in atom.negation() {
                if let Some(piece) = base.and_atom(neg) {
                    out.push(piece);
                }
            }
            prefix = base.and_atom(atom);
        }
        out
    }

    /// `{x : A x + b ∈ self}`; `A` has `self.arity()` rows.
    pub fn preimage(&self, matrix: &[Vec<BigInt>], offset: &[BigInt]) -> Option<PCell> {
        let arity = matrix.first().map_or(0, Vec::len);
        PCell::new(
            arity,
            self.ineqs.iter().map(|t| t.compose(matrix, offset)).collect(),
            self.congs
                .iter()
                .map(|c| Congruence::new(c.term.compose(matrix, offset), c.modulus.clone()))
                .collect(),
        )
    }

    pub fn map_terms(&self, arity: usize, f: impl Fn(&LinTerm) -> LinTerm) -> Option<PCell> {
        PCell::new(
            arity,
            self.ineqs.iter().map(&f).collect(),
            self.congs
                .iter()
                .map(|c| Congruence::new(f(&c.term), c.modulus.clone()))
                .collect(),
        )
    }

    pub fn insert_var(&self, index: usize) -> PCell {
        self.map_terms(self.arity + 1, |t| t.insert_var(index))
            .expect("inserting a variable preserves satisfiability")
    }

    pub fn extend(&self, arity: usize) -> PCell {
        self.map_terms(arity, |t| t.extend(arity))
            .expect("extending preserves satisfiability")
    }

    pub fn permute(&self, perm: &[usize]) -> PCell {
        self.map_terms(perm.len(), |t| t.permute(perm))
            .expect("permutation preserves satisfiability")
    }

    /// Drops a coordinate the cell does not mention.
    pub fn remove_unused_var(&self, index: usize) -> PCell {
        debug_assert!(self.atoms().iter().all(|a| !a.mentions(index)));
        self.map_terms(self.arity - 1, |t| t.remove_var(index))
            .expect("removing an unused variable preserves satisfiability")
    }

    fn normalize(mut self) -> Option<PCell> {
        let mut congs = Vec::new();
        for c in &self.congs {
            if let Some(n) = c.normalized()? {
                congs.push(n);
            }
        }
        congs = merge_single_var_congruences(self.arity, congs)?;
        congs.sort();
        congs.dedup();
        for w in congs.windows(2) {
            if w[0].term.coeffs == w[1].term.coeffs
                && w[0].modulus == w[1].modulus
                && w[0].term.constant != w[1].term.constant
            {
                return None;
            }
        }
        self.congs = congs;

        let mut ineqs: Vec<LinTerm> = Vec::with_capacity(self.ineqs.len());
        for t in &self.ineqs {
            let g = gcd_all(t.coeffs.iter());
            if g.is_zero() {
                if t.constant.is_negative() {
                    return None;
                }
                continue;
            }
            let coeffs = t.coeffs.iter().map(|c| c / &g).collect();
            ineqs.push(LinTerm::new(coeffs, floor_div(&t.constant, &g)));
        }
        ineqs.sort();
        // keep the tightest constant per direction
        let mut tight: Vec<LinTerm> = Vec::with_capacity(ineqs.len());
        for t in ineqs {
            match tight.last() {
                Some(last) if last.coeffs == t.coeffs => {}
                _ => tight.push(t),
            }
        }
        for t in &tight {
            let opp: Vec<BigInt> = t.coeffs.iter().map(|c| -c).collect();
            if let Ok(i) = tight.binary_search_by(|u| u.coeffs.cmp(&opp)) {
                if (&t.constant + &tight[i].constant).is_negative() {
                    return None;
                }
            }
        }
        self.ineqs = tight;
        Some(self)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut parts: Vec<String> = Vec::new();
        let eqs = self.equalities();
        for t in &self.ineqs {
            if eqs.contains(t) {
                parts.push(format!("{} == 0", t.display_with(names)));
            } else if eqs.contains(&t.neg()) {
                continue;
            } else {
                parts.push(format!("{} >= 0", t.display_with(names)));
            }
        }
        for c in &self.congs {
            let lhs = LinTerm::new(c.term.coeffs.clone(), BigInt::zero());
            parts.push(format!(
                "{} == {} (mod {})",
                lhs.display_with(names),
                c.residue(),
                c.modulus
            ));
        }
        if parts.is_empty() {
            "true".to_string()
        } else {
            parts.join(" and ")
        }
    }
}

fn merge_single_var_congruences(arity: usize, congs: Vec<Congruence>) -> Option<Vec<Congruence>> {
    let mut out: Vec<Congruence> = Vec::new();
    let mut single: Vec<(usize, BigInt, BigInt)> = Vec::new();
    for c in congs {
        let support: Vec<usize> = (0..c.term.arity())
            .filter(|&i| !c.term.coeffs[i].is_zero())
            .collect();
        if support.len() == 1 && c.term.coeffs[support[0]].is_one() {
            let i = support[0];
            let r = modulo(&-&c.term.constant, &c.modulus);
            if let Some(entry) = single.iter_mut().find(|e| e.0 == i) {
                let (r2, m2) = crt(&entry.1, &entry.2, &r, &c.modulus)?;
                entry.1 = r2;
                entry.2 = m2;
            } else {
                single.push((i, r, c.modulus.clone()));
            }
        } else {
            out.push(c);
        }
    }
    for (i, r, m) in single {
        let mut t = LinTerm::var(arity, i);
        t.constant = modulo(&-r, &m);
        out.push(Congruence::new(t, m));
    }
    Some(out)
}

impl fmt::Display for PCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn pt(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn holds(a: &Atom, p: &[BigInt]) -> bool {
        match a {
            Atom::Ge(t) => !t.eval(p).is_negative(),
            Atom::Cong(c) => c.holds(p),
        }
    }

    #[test]
    fn congruence_negation_partitions() {
        for m in 2..=60 {
            let atom = Atom::Cong(Congruence::new(LinTerm::from_ints(&[3, -1], 5), int(m)));
            let neg = atom.negation();
            for x in -20..=20 {
                for y in -3..=3 {
                    let p = pt(&[x, y]);
                    let hits = neg.iter().filter(|a| holds(a, &p)).count();
                    assert_eq!(hits + usize::from(holds(&atom, &p)), 1, "m = {m} at {p:?}");
                }
            }
        }
        let pieces = Atom::Cong(Congruence::new(LinTerm::from_ints(&[1], 0), int(36))).negation();
        assert_eq!(pieces.len(), 6);
    }

    #[test]
    fn normalization_tightens_and_detects_contradictions() {
        let c = PCell::new(1, vec![LinTerm::from_ints(&[2], 3)], vec![]).unwrap();
        assert_eq!(c.ineqs()[0], LinTerm::from_ints(&[1], 1));
        assert!(PCell::new(
            1,
            vec![LinTerm::from_ints(&[1], -3), LinTerm::from_ints(&[-1], 2)],
            vec![]
        )
        .is_none());
        let odd_even = PCell::new(
            1,
            vec![],
            vec![
                Congruence::new(LinTerm::from_ints(&[1], 0), int(2)),
                Congruence::new(LinTerm::from_ints(&[1], 1), int(2)),
            ],
        );
        assert!(odd_even.is_none());
    }

    #[test]
    fn congruences_merge_by_crt() {
        let c = PCell::new(
            1,
            vec![],
            vec![
                Congruence::new(LinTerm::from_ints(&[1], -2), int(6)),
                Congruence::new(LinTerm::from_ints(&[1], 0), int(2)),
            ],
        )
        .unwrap();
        assert_eq!(c.congs().len(), 1);
        assert_eq!(c.congs()[0].modulus, int(6));
        assert_eq!(c.congs()[0].residue(), int(2));
        let d = PCell::new(
            1,
            vec![],
            vec![Congruence::new(LinTerm::from_ints(&[3], -1), int(4))],
        )
        .unwrap();
        // 3x ≡ 1 (mod 4) iff x ≡ 3 (mod 4)
        assert_eq!(d.congs()[0].residue(), int(3));
    }

    #[test]
    fn difference_pieces_partition() {
        let a = PCell::universe(1);
        let b = PCell::new(1, vec![LinTerm::from_ints(&[1], 0)], vec![]).unwrap();
        let pieces = a.difference(&b);
        for x in -5..5 {
            let p = pt(&[x]);
            let hits = pieces.iter().filter(|c| c.contains(&p)).count();
            assert_eq!(hits, usize::from(x < 0));
        }
    }

    #[test]
    fn display_shows_equalities_once() {
        let c = PCell::universe(2)
            .and_eq(LinTerm::from_ints(&[1, 1], -2))
            .unwrap();
        assert_eq!(c.to_string(), "x1 + x2 - 2 == 0");
    }
}
