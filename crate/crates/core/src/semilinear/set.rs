use std::fmt;

use num_rational::BigRational;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cell::{band_sample, Level, QCell};
use super::euler::{EulerData, GammaBarClass};
use crate::error::{Error, Result};
use crate::qlinear::{QAtom, QLin};

/// Quantifier-free boolean combination of rational linear atoms.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QFormula {
    True,
    False,
    Atom(QAtom),
    Not(Box<QFormula>),
    And(Vec<QFormula>),
    Or(Vec<QFormula>),
}

impl QFormula {
    pub fn atom(a: QAtom) -> Self {
        QFormula::Atom(a)
    }

    pub fn conj(atoms: impl IntoIterator<Item = QAtom>) -> Self {
        QFormula::And(atoms.into_iter().map(QFormula::Atom).collect())
    }

    pub fn not(f: QFormula) -> Self {
        QFormula::Not(Box::new(f))
    }

    pub fn eval(&self, point: &[BigRational]) -> bool {
        match self {
            QFormula::True => true,
            QFormula::False => false,
            QFormula::Atom(a) => a.holds(point),
            QFormula::Not(f) => !f.eval(point),
            QFormula::And(fs) => fs.iter().all(|f| f.eval(point)),
            QFormula::Or(fs) => fs.iter().any(|f| f.eval(point)),
        }
    }

    pub fn forms(&self, out: &mut Vec<QLin>) {
        match self {
            QFormula::True | QFormula::False => {}
            QFormula::Atom(a) => out.push(a.form.clone()),
            QFormula::Not(f) => f.forms(out),
            QFormula::And(fs) | QFormula::Or(fs) => fs.iter().for_each(|f| f.forms(out)),
        }
    }

    /// Arity of the first atom, if any.
    pub fn arity(&self) -> Option<usize> {
        let mut forms = Vec::new();
        self.forms(&mut forms);
        forms.first().map(QLin::arity)
    }
}

/// Disjoint union of cylindrical cells in `Q^n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SemilinearSet {
    arity: usize,
    cells: Vec<QCell>,
}

impl SemilinearSet {
    pub fn empty(arity: usize) -> Self {
        SemilinearSet {
            arity,
            cells: Vec::new(),
        }
    }

    pub fn universe(arity: usize) -> Self {
        SemilinearSet {
            arity,
            cells: vec![QCell::universe(arity)],
        }
    }

    pub fn point(values: &[BigRational]) -> Self {
        SemilinearSet {
            arity: values.len(),
            cells: vec![QCell::from_point(values)],
        }
    }

    /// Wraps cells the caller guarantees to be pairwise disjoint.
    pub fn from_disjoint_cells(arity: usize, cells: Vec<QCell>) -> Result<Self> {
        if let Some(c) = cells.iter().find(|c| c.arity() != arity) {
            return Err(Error::ArityMismatch {
                expected: arity,
                found: c.arity(),
            });
        }
        Ok(SemilinearSet { arity, cells })
    }

    /// Cell decomposition of the set described by `formula`.
    pub fn decompose(arity: usize, formula: &QFormula) -> SemilinearSet {
        SemilinearSet::decompose_with(arity, formula, &[])
    }

    /// As [`decompose`](Self::decompose), additionally cutting along `extra` forms.
    pub fn decompose_with(arity: usize, formula: &QFormula, extra: &[QLin]) -> SemilinearSet {
        let mut forms = Vec::new();
        formula.forms(&mut forms);
        forms.extend(extra.iter().cloned());
        let cells = cad(arity, forms)
            .into_par_iter()
            .filter(|c| formula.eval(&c.sample()))
            .collect();
        SemilinearSet { arity, cells }
    }

    pub fn from_conjunction(arity: usize, atoms: Vec<QAtom>) -> SemilinearSet {
        SemilinearSet::decompose(arity, &QFormula::conj(atoms))
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn cells(&self) -> &[QCell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, point: &[BigRational]) -> bool {
        self.cells.iter().any(|c| c.contains(point))
    }

    pub fn to_formula(&self) -> QFormula {
        QFormula::Or(
            self.cells
                .iter()
                .map(|c| QFormula::conj(c.atoms()))
                .collect(),
        )
    }

    /// Same set, decomposed again with additional cutting forms.
    pub fn refine(&self, extra: &[QLin]) -> SemilinearSet {
        SemilinearSet::decompose_with(self.arity, &self.to_formula(), extra)
    }

    fn check_arity(&self, other: &SemilinearSet) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: other.arity,
            });
        }
        Ok(())
    }

    pub fn union(&self, other: &SemilinearSet) -> Result<SemilinearSet> {
        self.check_arity(other)?;
        Ok(SemilinearSet::decompose(
            self.arity,
            &QFormula::Or(vec![self.to_formula(), other.to_formula()]),
        ))
    }

    pub fn intersect(&self, other: &SemilinearSet) -> Result<SemilinearSet> {
        self.check_arity(other)?;
        Ok(SemilinearSet::decompose(
            self.arity,
            &QFormula::And(vec![self.to_formula(), other.to_formula()]),
        ))
    }

    pub fn difference(&self, other: &SemilinearSet) -> Result<SemilinearSet> {
        self.check_arity(other)?;
        Ok(SemilinearSet::decompose(
            self.arity,
            &QFormula::And(vec![self.to_formula(), QFormula::not(other.to_formula())]),
        ))
    }

    pub fn complement(&self) -> SemilinearSet {
        SemilinearSet::decompose(self.arity, &QFormula::not(self.to_formula()))
    }

    /// A point in the symmetric difference, if any.
    pub fn distinguishing_point(&self, other: &SemilinearSet) -> Result<Option<Vec<BigRational>>> {
        self.check_arity(other)?;
        let a = self.to_formula();
        let b = other.to_formula();
        let xor = QFormula::Or(vec![
            QFormula::And(vec![a.clone(), QFormula::not(b.clone())]),
            QFormula::And(vec![b, QFormula::not(a)]),
        ]);
        Ok(SemilinearSet::decompose(self.arity, &xor)
            .cells
            .first()
            .map(QCell::sample))
    }

    pub fn equivalent(&self, other: &SemilinearSet) -> Result<bool> {
        Ok(self.distinguishing_point(other)?.is_none())
    }

    pub fn product(&self, other: &SemilinearSet) -> SemilinearSet {
        SemilinearSet {
            arity: self.arity + other.arity,
            cells: self
                .cells
                .iter()
                .flat_map(|a| other.cells.iter().map(move |b| a.product(b)))
                .collect(),
        }
    }

    /// Euler characteristics: `χ_g = Σ(-1)^dim`, and `χ_b` from the class.
    pub fn euler(&self) -> EulerData {
        let class: GammaBarClass = self.cells.iter().map(QCell::class).sum();
        let chi_g: i64 = self
            .cells
            .iter()
            .map(|c| if c.dim() % 2 == 0 { 1 } else { -1 })
            .sum();
        debug_assert_eq!(chi_g, class.chi_g());
        EulerData::from_class(class)
    }

    /// O-minimal dimension; `None` for the empty set.
    pub fn qdim(&self) -> Option<usize> {
        self.cells.iter().map(QCell::dim).max()
    }

    /// Fiber over `x_0 = value`, as a set in the remaining coordinates.
    pub fn fiber(&self, value: &BigRational) -> SemilinearSet {
        let n = self.arity;
        let mut matrix = vec![vec![BigRational::zero(); n - 1]; n];
        let mut offset = vec![BigRational::zero(); n];
        offset[0] = value.clone();
        for i in 1..n {
            matrix[i][i - 1] = num_traits::One::one();
        }
        let formula = QFormula::Or(
            self.cells
                .iter()
                .map(|c| {
                    QFormula::conj(
                        c.atoms()
                            .into_iter()
                            .map(|a| QAtom::new(a.form.compose(&matrix, &offset), a.rel)),
                    )
                })
                .collect(),
        );
        SemilinearSet::decompose(n - 1, &simplify_constants(formula))
    }

    pub fn display_with(&self, names: &[String]) -> String {
        if self.cells.is_empty() {
            return "empty".to_string();
        }
        self.cells
            .iter()
            .map(|c| format!("[{}]", c.display_with(names)))
            .collect::<Vec<_>>()
            .join(" ∪ ")
    }
}

/// Replaces variable-free atoms by their truth values.
fn simplify_constants(f: QFormula) -> QFormula {
    match f {
        QFormula::Atom(a) => match a.constant_truth() {
            Some(true) => QFormula::True,
            Some(false) => QFormula::False,
            None => QFormula::Atom(a),
        },
        QFormula::Not(g) => QFormula::not(simplify_constants(*g)),
        QFormula::And(fs) => QFormula::And(fs.into_iter().map(simplify_constants).collect()),
        QFormula::Or(fs) => QFormula::Or(fs.into_iter().map(simplify_constants).collect()),
        other => other,
    }
}

impl fmt::Display for SemilinearSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}

/// Normalizes a form up to positive scaling and drops constants.
fn canonical(form: &QLin) -> Option<QLin> {
    let c = form.coeffs.iter().rev().find(|c| !c.is_zero())?;
    let s = num_traits::Signed::abs(c);
    Some(form.scale(&num_traits::Inv::inv(s)))
}

/// All cells of a cylindrical decomposition of `Q^arity` on which every
/// form has constant sign.
pub fn cad(arity: usize, forms: Vec<QLin>) -> Vec<QCell> {
    let mut current: Vec<QLin> = forms.iter().filter_map(canonical).collect();
    current.sort();
    current.dedup();
    let mut roots: Vec<Vec<QLin>> = vec![Vec::new(); arity];
    for k in (0..arity).rev() {
        let mut next = Vec::new();
        let mut level_roots: Vec<QLin> = Vec::new();
        for f in &current {
            if f.mentions(k) {
                let c = f.coeffs[k].clone();
                let mut rest = f.clone();
                rest.coeffs[k] = BigRational::zero();
                let root = rest.scale(&(-num_traits::Inv::inv(c))).remove_var(k);
                level_roots.push(root.extend(k));
            } else {
                next.push(f.remove_var(k));
            }
        }
        level_roots.sort();
        level_roots.dedup();
        for i in 0..level_roots.len() {
            for j in i + 1..level_roots.len() {
                next.push(level_roots[i].sub(&level_roots[j]));
            }
        }
        let mut canon: Vec<QLin> = next.iter().filter_map(canonical).collect();
        canon.sort();
        canon.dedup();
        roots[k] = level_roots;
        current = canon;
    }

    let mut cells = vec![(QCell::point(), Vec::<BigRational>::new())];
    for (k, level_roots) in roots.iter().enumerate() {
        cells = cells
            .into_par_iter()
            .flat_map_iter(|(cell, sample)| {
                let mut vals: Vec<(BigRational, QLin)> = level_roots
                    .iter()
                    .map(|r| (r.eval(&sample), r.clone()))
                    .collect();
                vals.sort_by(|a, b| a.0.cmp(&b.0));
                vals.dedup_by(|a, b| a.0 == b.0);
                let mut out = Vec::with_capacity(2 * vals.len() + 1);
                let mut lower: Option<(BigRational, QLin)> = None;
                for (v, r) in vals {
                    let lo = lower.as_ref().map(|l| l.0.clone());
                    let band = Level::Band {
                        lower: lower.as_ref().map(|l| l.1.clone()),
                        upper: Some(r.clone()),
                    };
                    out.push(lift(&cell, &sample, band, band_sample(lo, Some(v.clone()))));
                    out.push(lift(&cell, &sample, Level::Section(r.clone()), v.clone()));
                    lower = Some((v, r));
                }
                let lo = lower.as_ref().map(|l| l.0.clone());
                let band = Level::Band {
                    lower: lower.map(|l| l.1),
                    upper: None,
                };
                out.push(lift(&cell, &sample, band, band_sample(lo, None)));
                debug_assert!(out.iter().all(|(_, s)| s.len() == k + 1));
                out
            })
            .collect();
    }
    cells.into_iter().map(|(c, _)| c).collect()
}

fn lift(
    cell: &QCell,
    sample: &[BigRational],
    level: Level,
    value: BigRational,
) -> (QCell, Vec<BigRational>) {
    let mut s = sample.to_vec();
    s.push(value);
    (cell.push(level), s)
}
