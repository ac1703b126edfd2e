use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::cell::PCell;
use super::qe;
use super::set::PresburgerSet;
use super::term::LinTerm;
use crate::error::{Error, Result};
use crate::num::{det, mat_vec, rank, rat_int, IntMatrix};

/// `x ↦ matrix·x + offset` on `domain`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffinePiece {
    pub domain: PCell,
    pub matrix: IntMatrix,
    pub offset: Vec<BigInt>,
}

impl AffinePiece {
    pub fn apply(&self, x: &[BigInt]) -> Vec<BigInt> {
        mat_vec(&self.matrix, x)
            .into_iter()
            .zip(&self.offset)
            .map(|(a, b)| a + b)
            .collect()
    }
}

/// Piecewise affine self-map of `Z^n` with pairwise disjoint piece domains.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAffineMap {
    arity: usize,
    pieces: Vec<AffinePiece>,
}

impl PAffineMap {
    pub fn new(arity: usize, pieces: Vec<AffinePiece>) -> Result<Self> {
        for p in &pieces {
            if p.domain.arity() != arity
                || p.matrix.len() != arity
                || p.matrix.iter().any(|r| r.len() != arity)
                || p.offset.len() != arity
            {
                return Err(Error::DimensionMismatch(format!(
                    "piece data must be {arity}-dimensional"
                )));
            }
        }
        for i in 0..pieces.len() {
            for j in i + 1..pieces.len() {
                if let Some(c) = pieces[i].domain.intersect(&pieces[j].domain) {
                    if let Some(x) = qe::find_point(&c) {
                        return Err(Error::Invalid(format!(
                            "piece domains {i} and {j} overlap at {x:?}"
                        )));
                    }
                }
            }
        }
        Ok(PAffineMap { arity, pieces })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn pieces(&self) -> &[AffinePiece] {
        &self.pieces
    }

    pub fn apply(&self, x: &[BigInt]) -> Option<Vec<BigInt>> {
        self.pieces
            .iter()
            .find(|p| p.domain.contains(x))
            .map(|p| p.apply(x))
    }

    pub fn domain(&self) -> PresburgerSet {
        PresburgerSet::from_disjoint_cells(
            self.arity,
            self.pieces.iter().map(|p| p.domain.clone()).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnimodularConfig {
    /// Radius of the box used for witness searches.
    pub search_radius: i64,
    /// Range of the entries tried when correcting a matrix along implicit equalities.
    pub correction_range: i64,
}

impl Default for UnimodularConfig {
    fn default() -> Self {
        UnimodularConfig {
            search_radius: 100,
            correction_range: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rejection {
    /// A point of the source where the map is undefined.
    Undefined { point: Vec<BigInt> },
    NotInjective {
        first: Vec<BigInt>,
        second: Vec<BigInt>,
        image: Vec<BigInt>,
    },
    /// A point of the target outside the image.
    NotSurjective { missing: Vec<BigInt> },
    OutsideCodomain {
        point: Vec<BigInt>,
        image: Vec<BigInt>,
    },
    /// The piece agrees with the given matrix on `points`; when they are
    /// `n + 1` affinely independent points, every affine map agreeing with the
    /// piece has that linear part.
    NotUnimodularizable {
        domain: PCell,
        det: BigInt,
        points: Vec<Vec<BigInt>>,
        certified: bool,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnimodularOutcome {
    Recovered(Vec<AffinePiece>),
    Rejected(Rejection),
}

/// Refines `f` on `source` into pieces given by `GL_n(Z)` matrices, after
/// checking that `f` maps `source` bijectively onto `target`.
pub fn unimodularize(
    f: &PAffineMap,
    source: &PresburgerSet,
    target: &PresburgerSet,
    config: &UnimodularConfig,
) -> Result<UnimodularOutcome> {
    let n = f.arity;
    if source.arity() != n || target.arity() != n {
        return Err(Error::DimensionMismatch(format!(
            "map of arity {n} against sets of arity {} and {}",
            source.arity(),
            target.arity()
        )));
    }
    let uncovered = source.difference(&f.domain())?;
    if let Some(point) = small_point(&uncovered, config.search_radius) {
        return Ok(UnimodularOutcome::Rejected(Rejection::Undefined { point }));
    }

    // restricted cells, each with its piece
    let mut cells: Vec<(PCell, &AffinePiece)> = Vec::new();
    for p in &f.pieces {
        for c in source.intersect_cell(&p.domain).into_cells() {
            cells.push((c, p));
        }
    }

    for (c, p) in &cells {
        if det(&p.matrix).is_zero() {
            if let Some((a, b)) = collision_within(c, p) {
                let image = p.apply(&a);
                return Ok(UnimodularOutcome::Rejected(Rejection::NotInjective {
                    first: a,
                    second: b,
                    image,
                }));
            }
        }
    }

    let images: Vec<PresburgerSet> = cells
        .iter()
        .map(|(c, p)| PresburgerSet::from_cell(c.clone()).image(&p.matrix, &p.offset))
        .collect::<Result<_>>()?;
    for i in 0..images.len() {
        for j in i + 1..images.len() {
            let common = images[i].intersect(&images[j])?;
            if let Some(z) = small_point(&common, config.search_radius) {
                let first = preimage_point(&cells[i].0, cells[i].1, &z)
                    .expect("image point has a preimage");
                let second = preimage_point(&cells[j].0, cells[j].1, &z)
                    .expect("image point has a preimage");
                return Ok(UnimodularOutcome::Rejected(Rejection::NotInjective {
                    first,
                    second,
                    image: z,
                }));
            }
        }
    }
    let mut image = PresburgerSet::empty(n);
    for img in &images {
        image = image.union(img)?;
    }
    let outside = image.difference(target)?;
    if let Some(z) = small_point(&outside, config.search_radius) {
        let point = cells
            .iter()
            .find_map(|(c, p)| preimage_point(c, p, &z))
            .expect("image point has a preimage");
        return Ok(UnimodularOutcome::Rejected(Rejection::OutsideCodomain {
            point,
            image: z,
        }));
    }
    let missing = target.difference(&image)?;
    if let Some(z) = small_point(&missing, config.search_radius) {
        return Ok(UnimodularOutcome::Rejected(Rejection::NotSurjective {
            missing: z,
        }));
    }

    let mut out = Vec::new();
    for (c, p) in &cells {
        let d = det(&p.matrix);
        if d.abs().is_one() {
            out.push(AffinePiece {
                domain: c.clone(),
                matrix: p.matrix.clone(),
                offset: p.offset.clone(),
            });
            continue;
        }
        match correct_along_equalities(c, p, config.correction_range) {
            Some(piece) => out.push(piece),
            None => {
                let points = independent_points(c, config.search_radius);
                let certified = points.len() == n + 1;
                return Ok(UnimodularOutcome::Rejected(
                    Rejection::NotUnimodularizable {
                        domain: c.clone(),
                        det: d,
                        points,
                        certified,
                    },
                ));
            }
        }
    }
    Ok(UnimodularOutcome::Recovered(out))
}

/// Point of `set` of least norm inside the search box, else any point.
pub fn small_point(set: &PresburgerSet, radius: i64) -> Option<Vec<BigInt>> {
    let n = set.arity();
    let first = set.find_point()?;
    let mut r = 1i64;
    while r <= radius {
        let volume = (2 * r + 1) as f64;
        if volume.powi(n as i32) > 2.0e5 {
            break;
        }
        let pts = set.enumerate(&vec![(-r, r); n]);
        if let Some(best) = pts.into_iter().min_by_key(|p| norm_key(p)) {
            return Some(best);
        }
        r *= 2;
    }
    Some(first)
}

/// Orders points by L1 norm, then coordinatewise magnitude with positives first.
fn norm_key(p: &[BigInt]) -> (BigInt, Vec<(BigInt, bool)>) {
    let total = p.iter().map(|v| v.abs()).sum();
    (total, p.iter().map(|v| (v.abs(), v.is_negative())).collect())
}

fn preimage_point(cell: &PCell, piece: &AffinePiece, z: &[BigInt]) -> Option<Vec<BigInt>> {
    let mut c = cell.clone();
    for (i, row) in piece.matrix.iter().enumerate() {
        let t = LinTerm::new(row.clone(), &piece.offset[i] - &z[i]);
        c = c.and_eq(t)?;
    }
    qe::find_point(&c)
}

/// Two distinct points of `cell` with the same image under a singular piece.
fn collision_within(cell: &PCell, piece: &AffinePiece) -> Option<(Vec<BigInt>, Vec<BigInt>)> {
    let n = cell.arity();
    let total = 2 * n;
    let left = cell.extend(total);
    let right = cell
        .map_terms(total, |t| {
            let mut coeffs = vec![BigInt::zero(); n];
            coeffs.extend(t.coeffs.iter().cloned());
            LinTerm::new(coeffs, t.constant.clone())
        })
        .expect("lifting preserves satisfiability");
    let mut base = left.intersect(&right)?;
    for row in &piece.matrix {
        let mut coeffs = row.clone();
        coeffs.extend(row.iter().map(|a| -a));
        base = base.and_eq(LinTerm::new(coeffs, BigInt::zero()))?;
    }
    // lexicographically first differing coordinate is larger on the left
    for k in 0..n {
        let mut c = Some(base.clone());
        for i in 0..k {
            let mut coeffs = vec![BigInt::zero(); total];
            coeffs[i] = BigInt::one();
            coeffs[n + i] = -BigInt::one();
            c = c.and_then(|c| c.and_eq(LinTerm::new(coeffs, BigInt::zero())));
        }
        let mut coeffs = vec![BigInt::zero(); total];
        coeffs[k] = BigInt::one();
        coeffs[n + k] = -BigInt::one();
        c = c.and_then(|c| c.and_ge(LinTerm::new(coeffs, -BigInt::one())));
        if let Some(p) = c.as_ref().and_then(qe::find_point) {
            return Some((p[..n].to_vec(), p[n..].to_vec()));
        }
    }
    None
}

/// Inequalities of `cell` that hold with equality at every lattice point.
fn implicit_equalities(cell: &PCell) -> Vec<LinTerm> {
    let mut out = Vec::new();
    for t in cell.ineqs() {
        if out.contains(&t.neg()) {
            continue;
        }
        let strict = cell.and_ge(t.shift(&-BigInt::one()));
        if strict.is_none_or(|c| qe::is_empty(&c)) {
            out.push(t.clone());
        }
    }
    out
}

/// Replaces the matrix by `A + Σ w_k η_kᵀ` for implicit equalities `η_k·x + c_k = 0`.
fn correct_along_equalities(cell: &PCell, piece: &AffinePiece, range: i64) -> Option<AffinePiece> {
    let n = cell.arity();
    let eqs = implicit_equalities(cell);
    if eqs.is_empty() {
        return None;
    }
    let candidates: Vec<Vec<BigInt>> = {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|v: Vec<BigInt>| {
                    (-range..=range).map(move |w| {
                        let mut v = v.clone();
                        v.push(BigInt::from(w));
                        v
                    })
                })
                .collect();
        }
        out
    };
    let apply = |matrix: &IntMatrix, offset: &[BigInt], eq: &LinTerm, w: &[BigInt]| {
        let mut m = matrix.clone();
        let mut b = offset.to_vec();
        for i in 0..n {
            for j in 0..n {
                m[i][j] += &w[i] * &eq.coeffs[j];
            }
            b[i] += &w[i] * &eq.constant;
        }
        (m, b)
    };
    for eq in &eqs {
        for w in &candidates {
            let (m, b) = apply(&piece.matrix, &piece.offset, eq, w);
            if det(&m).abs().is_one() {
                return Some(AffinePiece {
                    domain: cell.clone(),
                    matrix: m,
                    offset: b,
                });
            }
        }
    }
    if eqs.len() >= 2 {
        let small: Vec<&Vec<BigInt>> = candidates
            .iter()
            .filter(|w| w.iter().all(|v| v.abs() <= BigInt::from(1)))
            .collect();
        for (i, e1) in eqs.iter().enumerate() {
            for e2 in &eqs[i + 1..] {
                for w1 in &small {
                    let (m1, b1) = apply(&piece.matrix, &piece.offset, e1, w1);
                    for w2 in &small {
                        let (m, b) = apply(&m1, &b1, e2, w2);
                        if det(&m).abs().is_one() {
                            return Some(AffinePiece {
                                domain: cell.clone(),
                                matrix: m,
                                offset: b,
                            });
                        }
                    }
                }
            }
        }
    }
    None
}

/// Greedy affinely independent points of `cell` near a first witness.
fn independent_points(cell: &PCell, radius: i64) -> Vec<Vec<BigInt>> {
    let n = cell.arity();
    let Some(x0) = qe::find_point(cell) else {
        return Vec::new();
    };
    let mut chosen = vec![x0.clone()];
    let mut diffs: Vec<Vec<BigRational>> = Vec::new();
    let set = PresburgerSet::from_cell(cell.clone());
    let mut r = 1i64;
    while r <= radius && chosen.len() < n + 1 {
        let volume = (2 * r + 1) as f64;
        if volume.powi(n as i32) > 2.0e5 {
            break;
        }
        let bounds: Vec<(i64, i64)> = x0
            .iter()
            .map(|v| {
                let c = i64::try_from(v).unwrap_or(0);
                (c - r, c + r)
            })
            .collect();
        for p in set.enumerate(&bounds) {
            let d: Vec<BigRational> = p
                .iter()
                .zip(&x0)
                .map(|(a, b)| rat_int(&(a - b)))
                .collect();
            let mut trial = diffs.clone();
            trial.push(d.clone());
            if rank(&trial) == trial.len() {
                diffs = trial;
                chosen.push(p);
                if chosen.len() == n + 1 {
                    break;
                }
            }
        }
        r *= 2;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{int, int_matrix};

    fn piece(domain: PCell, m: &[&[i64]], b: &[i64]) -> AffinePiece {
        AffinePiece {
            domain,
            matrix: int_matrix(m),
            offset: b.iter().map(|&v| int(v)).collect(),
        }
    }

    fn recovered(o: UnimodularOutcome) -> Vec<AffinePiece> {
        match o {
            UnimodularOutcome::Recovered(p) => p,
            UnimodularOutcome::Rejected(r) => panic!("unexpected rejection {r:?}"),
        }
    }

    #[test]
    fn identity_and_shear_are_single_pieces() {
        let cfg = UnimodularConfig::default();
        let z2 = PresburgerSet::universe(2);
        let id = PAffineMap::new(2, vec![piece(PCell::universe(2), &[&[1, 0], &[0, 1]], &[0, 0])])
            .unwrap();
        let p = recovered(unimodularize(&id, &z2, &z2, &cfg).unwrap());
        assert_eq!(p.len(), 1);
        assert_eq!(p[0].matrix, int_matrix(&[&[1, 0], &[0, 1]]));
        let shear =
            PAffineMap::new(2, vec![piece(PCell::universe(2), &[&[1, 1], &[0, 1]], &[0, 0])])
                .unwrap();
        let p = recovered(unimodularize(&shear, &z2, &z2, &cfg).unwrap());
        assert_eq!(p[0].matrix, int_matrix(&[&[1, 1], &[0, 1]]));
    }

    #[test]
    fn doubling_is_rejected_both_ways() {
        let cfg = UnimodularConfig::default();
        let z = PresburgerSet::universe(1);
        let f = PAffineMap::new(1, vec![piece(PCell::universe(1), &[&[2]], &[0])]).unwrap();
        let evens = PresburgerSet::from_opt_cell(
            1,
            PCell::universe(1).and_cong(LinTerm::from_ints(&[1], 0), int(2)),
        );
        match unimodularize(&f, &z, &evens, &cfg).unwrap() {
            UnimodularOutcome::Rejected(Rejection::NotUnimodularizable {
                det,
                points,
                certified,
                ..
            }) => {
                assert_eq!(det, int(2));
                assert!(certified);
                assert_eq!(points.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
        match unimodularize(&f, &z, &z, &cfg).unwrap() {
            UnimodularOutcome::Rejected(Rejection::NotSurjective { missing }) => {
                assert_eq!(missing, vec![int(1)]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn degenerate_domain_gets_corrected() {
        // on the diagonal x = y, (x, y) ↦ (2x - y, y) is the identity
        let diag = PCell::universe(2)
            .and_eq(LinTerm::from_ints(&[1, -1], 0))
            .unwrap();
        let f = PAffineMap::new(2, vec![piece(diag.clone(), &[&[2, -1], &[0, 1]], &[0, 0])])
            .unwrap();
        let d = PresburgerSet::from_cell(diag);
        let p = recovered(unimodularize(&f, &d, &d, &UnimodularConfig::default()).unwrap());
        assert_eq!(det(&p[0].matrix).abs(), int(1));
        for x in -5..5 {
            let pt = vec![int(x), int(x)];
            assert_eq!(p[0].apply(&pt), f.apply(&pt).unwrap());
        }
    }

    #[test]
    fn overlapping_images_are_not_injective() {
        let nonneg = PCell::universe(1).and_ge(LinTerm::from_ints(&[1], 0)).unwrap();
        let neg = PCell::universe(1).and_ge(LinTerm::from_ints(&[-1], -1)).unwrap();
        let f = PAffineMap::new(
            1,
            vec![piece(nonneg, &[&[1]], &[0]), piece(neg, &[&[-1]], &[0])],
        )
        .unwrap();
        let z = PresburgerSet::universe(1);
        match unimodularize(&f, &z, &z, &UnimodularConfig::default()).unwrap() {
            UnimodularOutcome::Rejected(Rejection::NotInjective { first, second, image }) => {
                assert_ne!(first, second);
                assert_eq!(f.apply(&first).unwrap(), image);
                assert_eq!(f.apply(&second).unwrap(), image);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
