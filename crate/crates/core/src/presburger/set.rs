use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{Congruence, PCell};
use super::qe;
use super::term::LinTerm;
use crate::error::{Error, Result};

/// Finite disjoint union of cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PresburgerSet {
    arity: usize,
    cells: Vec<PCell>,
}

impl PresburgerSet {
    pub fn empty(arity: usize) -> Self {
        PresburgerSet {
            arity,
            cells: Vec::new(),
        }
    }

    pub fn universe(arity: usize) -> Self {
        PresburgerSet {
            arity,
            cells: vec![PCell::universe(arity)],
        }
    }

    pub fn from_cell(cell: PCell) -> Self {
        let arity = cell.arity();
        let mut s = PresburgerSet {
            arity,
            cells: vec![cell],
        };
        s.prune();
        s
    }

    pub fn from_opt_cell(arity: usize, cell: Option<PCell>) -> Self {
        match cell {
            Some(c) => PresburgerSet::from_cell(c),
            None => PresburgerSet::empty(arity),
        }
    }

    /// Union of arbitrary (possibly overlapping) cells.
    pub fn from_cells(arity: usize, cells: impl IntoIterator<Item = PCell>) -> Self {
        let mut acc = PresburgerSet::empty(arity);
        for c in cells {
            let piece = PresburgerSet::from_cell(c);
            acc = acc.union_unchecked(&piece);
        }
        acc
    }

    /// Wraps cells the caller guarantees to be pairwise disjoint.
    pub fn from_disjoint_cells(arity: usize, cells: Vec<PCell>) -> Self {
        let mut s = PresburgerSet { arity, cells };
        s.prune();
        s
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cells(&self) -> &[PCell] {
        &self.cells
    }

    pub fn into_cells(self) -> Vec<PCell> {
        self.cells
    }

    fn prune(&mut self) {
        self.cells.retain(|c| !qe::is_empty(c));
        self.cells.sort();
        self.cells.dedup();
    }

    fn check_arity(&self, other: &PresburgerSet) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(qe::is_empty)
    }

    pub fn find_point(&self) -> Option<Vec<BigInt>> {
        self.cells.iter().find_map(qe::find_point)
    }

    pub fn contains(&self, point: &[BigInt]) -> bool {
        self.cells.iter().any(|c| c.contains(point))
    }

    pub fn union(&self, other: &PresburgerSet) -> Result<PresburgerSet> {
        self.check_arity(other)?;
        Ok(self.union_unchecked(other))
    }

    fn union_unchecked(&self, other: &PresburgerSet) -> PresburgerSet {
        let extra = other.difference_unchecked(self);
        let mut cells = self.cells.clone();
        cells.extend(extra.cells);
        PresburgerSet {
            arity: self.arity,
            cells,
        }
    }

    pub fn intersect(&self, other: &PresburgerSet) -> Result<PresburgerSet> {
        self.check_arity(other)?;
        Ok(self.intersect_unchecked(other))
    }

    fn intersect_unchecked(&self, other: &PresburgerSet) -> PresburgerSet {
        let cells: Vec<PCell> = self
            .cells
            .iter()
            .flat_map(|a| other.cells.iter().filter_map(move |b| a.intersect(b)))
            .collect();
        PresburgerSet::from_disjoint_cells(self.arity, cells)
    }

    pub fn intersect_cell(&self, cell: &PCell) -> PresburgerSet {
        let cells = self.cells.iter().filter_map(|a| a.intersect(cell)).collect();
        PresburgerSet::from_disjoint_cells(self.arity, cells)
    }

    pub fn difference(&self, other: &PresburgerSet) -> Result<PresburgerSet> {
        self.check_arity(other)?;
        Ok(self.difference_unchecked(other))
    }

    fn difference_unchecked(&self, other: &PresburgerSet) -> PresburgerSet {
        let cells: Vec<PCell> = self
            .cells
            .par_iter()
            .flat_map_iter(|c| {
                let mut pieces = vec![c.clone()];
                for d in &other.cells {
                    pieces = pieces
                        .iter()
                        .flat_map(|p| {
                            if p.implies(d) {
                                vec![]
                            } else if p.intersect(d).is_none_or(|i| qe::is_empty(&i)) {
                                vec![p.clone()]
                            } else {
                                p.difference(d)
                                    .into_iter()
                                    .filter(|q| !qe::is_empty(q))
                                    .collect()
                            }
                        })
                        .collect();
                }
                pieces
            })
            .collect();
        PresburgerSet::from_disjoint_cells(self.arity, cells)
    }

    pub fn complement(&self) -> PresburgerSet {
        PresburgerSet::universe(self.arity).difference_unchecked(self)
    }

    pub fn equivalent(&self, other: &PresburgerSet) -> Result<bool> {
        self.check_arity(other)?;
        Ok(self.difference_unchecked(other).is_empty()
            && other.difference_unchecked(self).is_empty())
    }

    /// Projection `∃ x_var`, of arity one less.
    pub fn eliminate(&self, var: usize) -> Result<PresburgerSet> {
        if var >= self.arity {
            return Err(Error::VariableOutOfRange {
                index: var,
                arity: self.arity,
            });
        }
        let projected: Vec<PCell> = self
            .cells
            .par_iter()
            .flat_map_iter(|c| qe::project_cell(c, var))
            .filter(|c| !qe::is_empty(c))
            .collect();
        Ok(PresburgerSet::from_cells(self.arity - 1, projected))
    }

    /// Eliminates every coordinate not in `keep`; survivors keep their order.
    pub fn project_onto(&self, keep: &[usize]) -> Result<PresburgerSet> {
        let mut s = self.clone();
        for var in (0..self.arity).rev() {
            if !keep.contains(&var) {
                s = s.eliminate(var)?;
            }
        }
        Ok(s)
    }

    /// Lattice points inside the box `bounds[i].0 ≤ x_i ≤ bounds[i].1`,
    /// sorted lexicographically.
    pub fn enumerate(&self, bounds: &[(i64, i64)]) -> Vec<Vec<BigInt>> {
        assert_eq!(bounds.len(), self.arity, "box dimension must match arity");
        if self.cells.is_empty() {
            return Vec::new();
        }
        if self.arity == 0 {
            return vec![Vec::new()];
        }
        let (lo0, hi0) = bounds[0];
        let mut out: Vec<Vec<BigInt>> = (lo0..=hi0)
            .into_par_iter()
            .flat_map_iter(|x0| {
                let mut found = Vec::new();
                let mut point = vec![BigInt::from(x0)];
                self.enumerate_rec(bounds, &mut point, &mut found);
                found
            })
            .collect();
        out.sort();
        out
    }

    fn enumerate_rec(
        &self,
        bounds: &[(i64, i64)],
        point: &mut Vec<BigInt>,
        found: &mut Vec<Vec<BigInt>>,
    ) {
        let k = point.len();
        if k == self.arity {
            if self.contains(point) {
                found.push(point.clone());
            }
            return;
        }
        let (lo, hi) = bounds[k];
        for v in lo..=hi {
            point.push(BigInt::from(v));
            self.enumerate_rec(bounds, point, found);
            point.pop();
        }
    }

    /// `{c·x : x ∈ self}`.
    pub fn scale(&self, c: &BigInt) -> PresburgerSet {
        assert!(c >= &BigInt::one(), "scale factor must be positive");
        if c.is_one() {
            return self.clone();
        }
        let n = self.arity;
        let cells = self
            .cells
            .iter()
            .filter_map(|cell| {
                let ineqs = cell
                    .ineqs()
                    .iter()
                    .map(|t| LinTerm::new(t.coeffs.clone(), &t.constant * c))
                    .collect();
                let mut congs: Vec<Congruence> = cell
                    .congs()
                    .iter()
                    .map(|k| {
                        Congruence::new(
                            LinTerm::new(k.term.coeffs.clone(), &k.term.constant * c),
                            &k.modulus * c,
                        )
                    })
                    .collect();
                for i in 0..n {
                    congs.push(Congruence::new(LinTerm::var(n, i), c.clone()));
                }
                PCell::new(n, ineqs, congs)
            })
            .collect();
        PresburgerSet::from_disjoint_cells(n, cells)
    }

    /// `{x : A x + b ∈ self}`.
    pub fn preimage(&self, matrix: &[Vec<BigInt>], offset: &[BigInt]) -> PresburgerSet {
        let arity = matrix.first().map_or(0, Vec::len);
        let cells = self
            .cells
            .iter()
            .filter_map(|c| c.preimage(matrix, offset))
            .collect();
        // preimages of disjoint cells are disjoint
        PresburgerSet::from_disjoint_cells(arity, cells)
    }

    /// Image under `x ↦ A x + b` (any integer matrix), by elimination.
    pub fn image(&self, matrix: &[Vec<BigInt>], offset: &[BigInt]) -> Result<PresburgerSet> {
        let n = self.arity;
        let m = matrix.len();
        if matrix.iter().any(|r| r.len() != n) || offset.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "map matrix must be {m}x{n} with offset of length {m}"
            )));
        }
        let total = m + n;
        let mut acc = PresburgerSet::empty(m);
        for cell in &self.cells {
            // coordinates (z_1..z_m, x_1..x_n)
            let mut lifted = cell
                .map_terms(total, |t| {
                    let mut coeffs = vec![BigInt::zero(); m];
                    coeffs.extend(t.coeffs.iter().cloned());
                    LinTerm::new(coeffs, t.constant.clone())
                })
                .expect("lifting preserves satisfiability");
            for (i, row) in matrix.iter().enumerate() {
                let mut coeffs = vec![BigInt::zero(); total];
                coeffs[i] = BigInt::one();
                for (j, a) in row.iter().enumerate() {
                    coeffs[m + j] = -a;
                }
                match lifted.and_eq(LinTerm::new(coeffs, -&offset[i])) {
                    Some(c) => lifted = c,
                    None => break,
                }
            }
            let mut s = PresburgerSet::from_cell(lifted);
            for var in (m..total).rev() {
                s = s.eliminate(var)?;
            }
            acc = acc.union_unchecked(&s);
        }
        Ok(acc)
    }

    /// Adds a fresh unconstrained coordinate at `index`.
    pub fn insert_var(&self, index: usize) -> PresburgerSet {
        PresburgerSet {
            arity: self.arity + 1,
            cells: self.cells.iter().map(|c| c.insert_var(index)).collect(),
        }
    }

    /// Reorders coordinates: new coordinate `j` is old coordinate `perm[j]`.
    pub fn permute(&self, perm: &[usize]) -> PresburgerSet {
        PresburgerSet {
            arity: self.arity,
            cells: self.cells.iter().map(|c| c.permute(perm)).collect(),
        }
    }

    /// Cartesian product; coordinates of `other` follow those of `self`.
    pub fn product(&self, other: &PresburgerSet) -> PresburgerSet {
        let total = self.arity + other.arity;
        let mut cells = Vec::new();
        for a in &self.cells {
            let a_ext = a.extend(total);
            for b in &other.cells {
                let b_ext = b
                    .map_terms(total, |t| {
                        let mut coeffs = vec![BigInt::zero(); self.arity];
                        coeffs.extend(t.coeffs.iter().cloned());
                        LinTerm::new(coeffs, t.constant.clone())
                    })
                    .expect("lifting preserves satisfiability");
                if let Some(c) = a_ext.intersect(&b_ext) {
                    cells.push(c);
                }
            }
        }
        PresburgerSet::from_disjoint_cells(total, cells)
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.cells.is_empty() {
            return "false".to_string();
        }
        self.cells
            .iter()
            .map(|c| format!("({})", c.display_with(names)))
            .collect::<Vec<_>>()
            .join(" or ")
    }
}

impl fmt::Display for PresburgerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::int;

    fn half(c: &[i64], k: i64) -> PresburgerSet {
        PresburgerSet::from_opt_cell(c.len(), PCell::universe(c.len()).and_ge(LinTerm::from_ints(c, k)))
    }

    fn cong(n: usize, i: usize, r: i64, m: i64) -> PresburgerSet {
        let mut t = LinTerm::var(n, i);
        t.constant = int(-r);
        PresburgerSet::from_opt_cell(n, PCell::universe(n).and_cong(t, int(m)))
    }

    #[test]
    fn boundary_intersection_is_a_point() {
        let s = half(&[1], 0).intersect(&half(&[-1], 0)).unwrap();
        assert_eq!(s.cells().len(), 1);
        assert_eq!(s.enumerate(&[(-5, 5)]), vec![vec![int(0)]]);
    }

    #[test]
    fn complement_of_universe_is_empty() {
        assert!(PresburgerSet::universe(2).complement().is_empty());
    }

    #[test]
    fn parity_classes_cover_the_line() {
        let u = cong(1, 0, 0, 2).union(&cong(1, 0, 1, 2)).unwrap();
        assert!(u.equivalent(&PresburgerSet::universe(1)).unwrap());
        assert_eq!(u.enumerate(&[(-50, 50)]).len(), 101);
    }

    #[test]
    fn equivalence_examples() {
        assert!(!half(&[1], 0).equivalent(&half(&[1], -1)).unwrap());
        assert!(PresburgerSet::empty(1)
            .equivalent(&PresburgerSet::empty(1))
            .unwrap());
                assert!(half(&[1], 0).union(&half(&[1, 1], 0)).is_err());
    }

    #[test]
    fn elimination_examples() {
        // ∃y: 2y ≤ x ≤ 2y + 1
        let c = PCell::new(
            2,
            vec![LinTerm::from_ints(&[1, -2], 0), LinTerm::from_ints(&[-1, 2], 1)],
            vec![],
        )
        .unwrap();
        let p = PresburgerSet::from_cell(c).eliminate(1).unwrap();
        assert!(p.equivalent(&PresburgerSet::universe(1)).unwrap());
        // ∃y: y ≥ 0 ∧ x = 3y + 1
        let c = PCell::universe(2)
            .and_ge(LinTerm::from_ints(&[0, 1], 0))
            .unwrap()
            .and_eq(LinTerm::from_ints(&[1, -3], -1))
            .unwrap();
        let p = PresburgerSet::from_cell(c).eliminate(1).unwrap();
        let expected = half(&[1], -1).intersect(&cong(1, 0, 1, 3)).unwrap();
        assert!(p.equivalent(&expected).unwrap());
        assert_eq!(
            p.enumerate(&[(0, 12)]),
            vec![vec![int(1)], vec![int(4)], vec![int(7)], vec![int(10)]]
        );
    }

    #[test]
    fn enumeration_examples() {
        let s = cong(1, 0, 1, 3)
            .intersect(&half(&[1], 0))
            .unwrap()
            .intersect(&half(&[-1], 10))
            .unwrap();
        let pts: Vec<i64> = s
            .enumerate(&[(-20, 20)])
            .into_iter()
            .map(|p| i64::try_from(&p[0]).unwrap())
            .collect();
        assert_eq!(pts, vec![1, 4, 7, 10]);
        assert!(PresburgerSet::empty(2).enumerate(&[(0, 3), (0, 3)]).is_empty());
        let diag = PresburgerSet::from_opt_cell(
            2,
            PCell::new(
                2,
                vec![LinTerm::from_ints(&[1, 0], 0), LinTerm::from_ints(&[0, 1], 0)],
                vec![],
            )
            .unwrap()
            .and_eq(LinTerm::from_ints(&[1, 1], -2)),
        );
        let pts = diag.enumerate(&[(0, 5), (0, 5)]);
        assert_eq!(
            pts,
            vec![
                vec![int(0), int(2)],
                vec![int(1), int(1)],
                vec![int(2), int(0)]
            ]
        );
    }

    #[test]
    fn scaling_examples() {
        let s = half(&[1], 0).scale(&int(2));
        let expected = half(&[1], 0).intersect(&cong(1, 0, 0, 2)).unwrap();
        assert!(s.equivalent(&expected).unwrap());
        let t = cong(1, 0, 1, 3).scale(&int(2));
        assert!(t.equivalent(&cong(1, 0, 2, 6)).unwrap());
        assert_eq!(t.cells()[0].congs()[0].modulus, int(6));
        assert_eq!(half(&[1], 0).scale(&int(1)), half(&[1], 0));
    }

    #[test]
    fn image_of_doubling() {
        let s = PresburgerSet::universe(1)
            .image(&[vec![int(2)]], &[int(0)])
            .unwrap();
        assert!(s.equivalent(&cong(1, 0, 0, 2)).unwrap());
    }
}
