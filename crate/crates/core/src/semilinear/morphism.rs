use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::cell::QCell;
use super::set::{QFormula, SemilinearSet};
use crate::error::{Error, Result};
use crate::qlinear::{self, QAtom, QLin};

/// Element of `Γ_∞`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GammaValue {
    Finite(BigRational),
    Infinity,
}

/// `-Σu + Σv`.
pub fn gamma_jacobian(u: &[GammaValue], v: &[GammaValue]) -> Result<BigRational> {
    let sum = |xs: &[GammaValue]| -> Result<BigRational> {
        xs.iter().try_fold(BigRational::zero(), |acc, x| match x {
            GammaValue::Finite(r) => Ok(acc + r),
            GammaValue::Infinity => Err(Error::InfinityInput),
        })
    };
    Ok(sum(v)? - sum(u)?)
}

/// Affine map on one cell: `x ↦ A x + b`, `A` of shape `m × n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QPiece {
    pub domain: QCell,
    pub matrix: Vec<Vec<BigRational>>,
    pub offset: Vec<BigRational>,
}

impl QPiece {
    pub fn apply(&self, point: &[BigRational]) -> Vec<BigRational> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| row.iter().zip(point).map(|(a, x)| a * x).sum::<BigRational>() + b)
            .collect()
    }

    /// Output coordinates as forms over the source.
    pub fn rows(&self) -> Vec<QLin> {
        self.matrix
            .iter()
            .zip(&self.offset)
            .map(|(row, b)| QLin::new(row.clone(), b.clone()))
            .collect()
    }
}

/// Piecewise `Q`-affine map `Γ^n → Γ^m` with disjoint cell domains.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QPiecewiseMap {
    source: usize,
    target: usize,
    pieces: Vec<QPiece>,
}

impl QPiecewiseMap {
    pub fn new(source: usize, target: usize, pieces: Vec<QPiece>) -> Result<Self> {
        for p in &pieces {
            if p.domain.arity() != source
                || p.matrix.len() != target
                || p.offset.len() != target
                || p.matrix.iter().any(|r| r.len() != source)
            {
                return Err(Error::DimensionMismatch(format!(
                    "piece does not fit a map from arity {source} to arity {target}"
                )));
            }
        }
        for (i, a) in pieces.iter().enumerate() {
            for b in &pieces[i + 1..] {
                let mut atoms = a.domain.atoms();
                atoms.extend(b.domain.atoms());
                if let Some(w) = qlinear::find_point(&atoms, source) {
                    return Err(Error::DimensionMismatch(format!(
                        "overlapping piece domains at {}",
                        show_point(&w)
                    )));
                }
            }
        }
        Ok(QPiecewiseMap {
            source,
            target,
            pieces,
        })
    }

    /// Affine map defined everywhere.
    pub fn affine(matrix: Vec<Vec<BigRational>>, offset: Vec<BigRational>) -> Result<Self> {
        let source = matrix.first().map_or(0, Vec::len);
        let target = matrix.len();
        QPiecewiseMap::new(
            source,
            target,
            vec![QPiece {
                domain: QCell::universe(source),
                matrix,
                offset,
            }],
        )
    }

    pub fn identity(n: usize) -> Self {
        let matrix = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        QPiecewiseMap::affine(matrix, vec![BigRational::zero(); n]).expect("square identity")
    }

    pub fn constant(source: usize, values: Vec<BigRational>) -> Self {
        let matrix = vec![vec![BigRational::zero(); source]; values.len()];
        QPiecewiseMap {
            source,
            target: values.len(),
            pieces: vec![QPiece {
                domain: QCell::universe(source),
                matrix,
                offset: values,
            }],
        }
    }

    /// A single affine form `Γ^n → Γ` defined everywhere.
    pub fn form(f: &QLin) -> Self {
        QPiecewiseMap {
            source: f.arity(),
            target: 1,
            pieces: vec![QPiece {
                domain: QCell::universe(f.arity()),
                matrix: vec![f.coeffs.clone()],
                offset: vec![f.constant.clone()],
            }],
        }
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn pieces(&self) -> &[QPiece] {
        &self.pieces
    }

    pub fn piece_at(&self, point: &[BigRational]) -> Option<&QPiece> {
        self.pieces.iter().find(|p| p.domain.contains(point))
    }

    pub fn apply(&self, point: &[BigRational]) -> Option<Vec<BigRational>> {
        self.piece_at(point).map(|p| p.apply(point))
    }

    pub fn domain(&self) -> SemilinearSet {
        SemilinearSet::from_disjoint_cells(
            self.source,
            self.pieces.iter().map(|p| p.domain.clone()).collect(),
        )
        .expect("piece arities checked")
    }

    /// Every form a piece boundary depends on.
    pub fn boundary_forms(&self) -> Vec<QLin> {
        self.pieces
            .iter()
            .flat_map(|p| p.domain.atoms().into_iter().map(|a| a.form))
            .collect()
    }
}

impl QPiecewiseMap {
    /// `(x, y) ↦ (self(x), other(y))`.
    pub fn product(&self, other: &QPiecewiseMap) -> QPiecewiseMap {
        let (n1, n2) = (self.source, other.source);
        let mut pieces = Vec::with_capacity(self.pieces.len() * other.pieces.len());
        for a in &self.pieces {
            for b in &other.pieces {
                let mut matrix = Vec::with_capacity(self.target + other.target);
                for row in &a.matrix {
                    let mut r = row.clone();
                    r.resize(n1 + n2, BigRational::zero());
                    matrix.push(r);
                }
                for row in &b.matrix {
                    let mut r = vec![BigRational::zero(); n1];
                    r.extend(row.iter().cloned());
                    matrix.push(r);
                }
                let mut offset = a.offset.clone();
                offset.extend(b.offset.iter().cloned());
                pieces.push(QPiece {
                    domain: a.domain.product(&b.domain),
                    matrix,
                    offset,
                });
            }
        }
        QPiecewiseMap {
            source: n1 + n2,
            target: self.target + other.target,
            pieces,
        }
    }

    /// `(x, y) ↦ self(x) + other(y)` for two maps into `Γ`.
    pub fn sum_product(&self, other: &QPiecewiseMap) -> QPiecewiseMap {
        let p = self.product(other);
        let pieces = p
            .pieces
            .into_iter()
            .map(|piece| {
                let row: Vec<BigRational> = (0..p.source)
                    .map(|j| piece.matrix.iter().map(|r| r[j].clone()).sum())
                    .collect();
                QPiece {
                    domain: piece.domain,
                    matrix: vec![row],
                    offset: vec![piece.offset.iter().cloned().sum()],
                }
            })
            .collect();
        QPiecewiseMap {
            source: p.source,
            target: 1,
            pieces,
        }
    }
}

/// A point of `cell` where `form` does not vanish.
pub fn nonzero_witness(cell: &QCell, form: &QLin) -> Option<Vec<BigRational>> {
    [form.clone(), form.neg()].into_iter().find_map(|g| {
        let mut atoms = cell.atoms();
        atoms.push(QAtom::gt(g));
        qlinear::find_point(&atoms, cell.arity())
    })
}

/// Checks `lhs(x) = rhs(map(x)) + extra(x)` on `set`, for maps into `Γ`.
pub fn check_form_identity(
    set: &SemilinearSet,
    map: &QPiecewiseMap,
    lhs: &QPiecewiseMap,
    rhs: &QPiecewiseMap,
    extra: &QLin,
) -> Result<Verdict> {
    if let Some(w) = set.difference(&map.domain())?.cells().first() {
        return Err(Error::NotTotal { witness: w.sample() });
    }
    let mut forms = map.boundary_forms();
    forms.extend(lhs.boundary_forms());
    for p in map.pieces() {
        for f in rhs.boundary_forms() {
            forms.push(f.compose(&p.matrix, &p.offset));
        }
    }
    for cell in set.refine(&forms).cells() {
        let sample = cell.sample();
        let piece = map.piece_at(&sample).expect("totality checked");
        let image = piece.apply(&sample);
        let (l, r) = match (lhs.piece_at(&sample), rhs.piece_at(&image)) {
            (Some(l), Some(r)) => (l, r),
            _ => return Ok(Verdict::reject("volume form undefined", sample)),
        };
        let left = l.rows().remove(0);
        let right = r.rows().remove(0).compose(&piece.matrix, &piece.offset).add(extra);
        if let Some(w) = nonzero_witness(cell, &left.sub(&right)) {
            return Ok(Verdict::reject(
                format!("{} != {}", left.eval(&w), right.eval(&w)),
                w,
            ));
        }
    }
    Ok(Verdict::Accepted)
}

/// Carrier set with its coordinate map and Γ-volume form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaObject {
    pub set: SemilinearSet,
    pub coords: QPiecewiseMap,
    pub volume: QPiecewiseMap,
}

impl GammaObject {
    /// `Σ coords(γ) + volume(γ)` as a form on the cell around `point`.
    fn weight_form(&self, point: &[BigRational]) -> Option<QLin> {
        let f = self.coords.piece_at(point)?;
        let w = self.volume.piece_at(point)?;
        let mut out = w.rows().into_iter().next()?;
        for r in f.rows() {
            out = out.add(&r);
        }
        Some(out)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    Rejected {
        reason: String,
        witness: Vec<BigRational>,
    },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }

    fn reject(reason: impl Into<String>, witness: Vec<BigRational>) -> Verdict {
        Verdict::Rejected {
            reason: reason.into(),
            witness,
        }
    }
}

pub(crate) fn show_point(p: &[BigRational]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

/// Image of a cell under an affine piece, as a conjunction over the target.
fn image_atoms(cell: &QCell, piece: &QPiece) -> Option<Vec<QAtom>> {
    let n = cell.arity();
    let m = piece.offset.len();
    let total = n + m;
    let mut atoms: Vec<QAtom> = cell.atoms().iter().map(|a| QAtom::new(a.form.extend(total), a.rel)).collect();
    for (j, row) in piece.rows().iter().enumerate() {
        atoms.push(QAtom::eq(QLin::var(total, n + j).sub(&row.extend(total))));
    }
    let mut current = qlinear::simplify(atoms)?;
    for v in 0..n {
        current = qlinear::fm_eliminate(&current, v)?;
    }
    Some(
        current
            .into_iter()
            .map(|a| {
                let mut f = a.form;
                for _ in 0..n {
                    f = f.remove_var(0);
                }
                QAtom::new(f, a.rel)
            })
            .collect(),
    )
}

/// Two distinct points of `cell` with equal image, if any.
fn collision(cell: &QCell, piece: &QPiece) -> Option<(Vec<BigRational>, Vec<BigRational>)> {
    let n = cell.arity();
    let total = 2 * n;
    let mut base: Vec<QAtom> = Vec::new();
    for a in cell.atoms() {
        base.push(QAtom::new(a.form.extend(total), a.rel));
        base.push(QAtom::new(a.form.embed(total, n), a.rel));
    }
    for row in piece.rows() {
        let lhs = row.extend(total);
        let rhs = row.embed(total, n);
        base.push(QAtom::eq(lhs.sub(&rhs)));
    }
    for i in 0..n {
        let diff = QLin::var(total, i).sub(&QLin::var(total, n + i));
        for d in [diff.clone(), diff.neg()] {
            let mut atoms = base.clone();
            atoms.push(QAtom::gt(d));
            if let Some(p) = qlinear::find_point(&atoms, total) {
                return Some((p[..n].to_vec(), p[n..].to_vec()));
            }
        }
    }
    None
}

/// Checks that `map` is a Γ-category morphism from `src` to `dst`.
pub fn check_mg_morphism(
    map: &QPiecewiseMap,
    src: &GammaObject,
    dst: &GammaObject,
) -> Result<Verdict> {
    let n = src.set.arity();
    if map.source() != n || map.target() != dst.set.arity() {
        return Err(Error::ArityMismatch {
            expected: n,
            found: map.source(),
        });
    }
    if let Some(w) = src.set.difference(&map.domain())?.cells().first() {
        return Err(Error::NotTotal { witness: w.sample() });
    }

    // cut src so every relevant piece is constant on each cell
    let mut forms = map.boundary_forms();
    forms.extend(src.coords.boundary_forms());
    forms.extend(src.volume.boundary_forms());
    let dst_forms: Vec<QLin> = dst
        .coords
        .boundary_forms()
        .into_iter()
        .chain(dst.volume.boundary_forms())
        .chain(dst.set.cells().iter().flat_map(|c| c.atoms().into_iter().map(|a| a.form)))
        .collect();
    for p in map.pieces() {
        for f in &dst_forms {
            forms.push(f.compose(&p.matrix, &p.offset));
        }
    }
    let refined = src.set.refine(&forms);

    let mut images: Vec<SemilinearSet> = Vec::new();
    for cell in refined.cells() {
        let sample = cell.sample();
        let piece = map.piece_at(&sample).expect("totality checked");
        if let Some((a, b)) = collision(cell, piece) {
            return Ok(Verdict::reject(
                format!("not injective: {} and {} share an image", show_point(&a), show_point(&b)),
                a,
            ));
        }
        let image = match image_atoms(cell, piece) {
            Some(atoms) => SemilinearSet::from_conjunction(map.target(), atoms),
            None => continue,
        };
        if let Some(w) = image.difference(&dst.set)?.cells().first() {
            return Ok(Verdict::reject("image leaves the target", w.sample()));
        }
        for earlier in &images {
            if let Some(w) = image.intersect(earlier)?.cells().first() {
                return Ok(Verdict::reject("not injective across pieces", w.sample()));
            }
        }
        images.push(image);

        let lhs = src.weight_form(&sample);
        let image_point = piece.apply(&sample);
        let rhs = dst
            .weight_form(&image_point)
            .map(|f| f.compose(&piece.matrix, &piece.offset));
        let (lhs, rhs) = match (lhs, rhs) {
            (Some(l), Some(r)) => (l, r),
            _ => {
                return Ok(Verdict::reject("coordinate or volume data undefined", sample));
            }
        };
        if let Some(w) = nonzero_witness(cell, &lhs.sub(&rhs)) {
            let (l, r) = (lhs.eval(&w), rhs.eval(&w));
            return Ok(Verdict::reject(
                format!("weighted volume not preserved: {l} != {r}"),
                w,
            ));
        }
    }
    let covered = images
        .iter()
        .fold(SemilinearSet::empty(dst.set.arity()), |acc, s| {
            SemilinearSet::decompose(
                acc.arity(),
                &QFormula::Or(vec![acc.to_formula(), s.to_formula()]),
            )
        });
    if let Some(w) = dst.set.difference(&covered)?.cells().first() {
        return Ok(Verdict::reject("not surjective onto the target", w.sample()));
    }
    Ok(Verdict::Accepted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn unit_interval(lo: i64) -> SemilinearSet {
        SemilinearSet::decompose(
            1,
            &QFormula::conj([
                QAtom::gt(QLin::from_ints(&[1], -lo)),
                QAtom::gt(QLin::from_ints(&[-1], lo + 1)),
            ]),
        )
    }

    fn object(lo: i64, omega: i64) -> GammaObject {
        GammaObject {
            set: unit_interval(lo),
            coords: QPiecewiseMap::identity(1),
            volume: QPiecewiseMap::constant(1, vec![rat(omega, 1)]),
        }
    }

    fn shift_by_one() -> QPiecewiseMap {
        QPiecewiseMap::affine(vec![vec![rat(1, 1)]], vec![rat(1, 1)]).unwrap()
    }

    #[test]
    fn jacobian_examples() {
        let f = |xs: &[i64]| xs.iter().map(|&x| GammaValue::Finite(rat(x, 1))).collect::<Vec<_>>();
        assert_eq!(gamma_jacobian(&f(&[1, 2]), &f(&[3, 0])).unwrap(), rat(0, 1));
        assert_eq!(gamma_jacobian(&f(&[0]), &f(&[5])).unwrap(), rat(5, 1));
        assert_eq!(gamma_jacobian(&f(&[1, 1, 1]), &f(&[0, 0, 0])).unwrap(), rat(-3, 1));
        assert_eq!(
            gamma_jacobian(&[GammaValue::Infinity], &f(&[0])),
            Err(Error::InfinityInput)
        );
    }

    #[test]
    fn identity_is_accepted() {
        let v = check_mg_morphism(&QPiecewiseMap::identity(1), &object(0, 0), &object(0, 0)).unwrap();
        assert_eq!(v, Verdict::Accepted);
    }

    #[test]
    fn shift_without_compensation_is_rejected() {
        let v = check_mg_morphism(&shift_by_one(), &object(0, 0), &object(1, 0)).unwrap();
        match v {
            Verdict::Rejected { witness, .. } => {
                assert_eq!(witness.len(), 1);
                assert!(witness[0] > rat(0, 1) && witness[0] < rat(1, 1));
            }
            Verdict::Accepted => panic!("expected rejection"),
        }
    }

    #[test]
    fn shift_with_compensation_is_accepted() {
        let v = check_mg_morphism(&shift_by_one(), &object(0, 1), &object(1, 0)).unwrap();
        assert_eq!(v, Verdict::Accepted);
    }

    #[test]
    fn partial_map_is_not_total() {
        let half = QPiecewiseMap::new(
            1,
            1,
            vec![QPiece {
                domain: QCell::interval(None, Some(rat(1, 2))),
                matrix: vec![vec![rat(1, 1)]],
                offset: vec![rat(0, 1)],
            }],
        )
        .unwrap();
        let err = check_mg_morphism(&half, &object(0, 0), &object(0, 0)).unwrap_err();
        assert!(matches!(err, Error::NotTotal { .. }));
    }

    #[test]
    fn collapsing_map_is_not_injective() {
        let src = GammaObject {
            set: SemilinearSet::decompose(
                2,
                &QFormula::conj([
                    QAtom::gt(QLin::from_ints(&[1, 0], 0)),
                    QAtom::gt(QLin::from_ints(&[0, 1], 0)),
                ]),
            ),
            coords: QPiecewiseMap::identity(2),
            volume: QPiecewiseMap::constant(2, vec![rat(0, 1)]),
        };
        let sum = QPiecewiseMap::affine(
            vec![vec![rat(1, 1), rat(1, 1)], vec![rat(0, 1), rat(0, 1)]],
            vec![rat(0, 1), rat(0, 1)],
        )
        .unwrap();
        let v = check_mg_morphism(&sum, &src, &src).unwrap();
        assert!(!v.is_accepted());
    }
}
