use num_rational::BigRational;
use num_traits::Zero;

use super::set::{QFormula, SemilinearSet};
use crate::error::{Error, Result};
use crate::qlinear::{QAtom, QLin};

/// Pulls a set back along the affine map given by `rows` (one form per coordinate).
fn pullback(set: &SemilinearSet, rows: &[QLin]) -> QFormula {
    let arity = rows.first().map_or(0, QLin::arity);
    let matrix: Vec<Vec<BigRational>> = rows.iter().map(|r| r.coeffs.clone()).collect();
    let offset: Vec<BigRational> = rows.iter().map(|r| r.constant.clone()).collect();
    QFormula::Or(
        set.cells()
            .iter()
            .map(|c| {
                QFormula::conj(c.atoms().into_iter().map(|a| {
                    let f = if matrix.is_empty() {
                        QLin::constant(arity, a.form.constant.clone())
                    } else {
                        a.form.compose(&matrix, &offset)
                    };
                    QAtom::new(f, a.rel)
                }))
            })
            .collect(),
    )
}

/// Convolution of two Γ-families graded by their first coordinate.
///
/// The result lives in coordinates `(γ, x, y, α)` and contains
/// `(γ, x, y, α)` exactly when `(α, x) ∈ left` and `(γ - α, y) ∈ right`.
pub fn convolve(left: &SemilinearSet, right: &SemilinearSet) -> Result<SemilinearSet> {
    if left.arity() == 0 || right.arity() == 0 {
        return Err(Error::DimensionMismatch(
            "families need a grading coordinate".to_string(),
        ));
    }
    let a = left.arity() - 1;
    let b = right.arity() - 1;
    let total = 1 + a + b + 1;
    let alpha = QLin::var(total, total - 1);
    let gamma = QLin::var(total, 0);

    let mut left_rows = vec![alpha.clone()];
    left_rows.extend((0..a).map(|i| QLin::var(total, 1 + i)));
    let mut right_rows = vec![gamma.sub(&alpha)];
    right_rows.extend((0..b).map(|i| QLin::var(total, 1 + a + i)));

    let formula = QFormula::And(vec![pullback(left, &left_rows), pullback(right, &right_rows)]);
    Ok(SemilinearSet::decompose(total, &formula))
}

/// The unit family: the point over grade 0.
pub fn unit_family() -> SemilinearSet {
    SemilinearSet::point(&[BigRational::zero()])
}

/// Moves the trailing auxiliary coordinate of a convolution away, so the
/// result reads `(γ, α, x, y)`.
pub fn auxiliary_first(set: &SemilinearSet) -> SemilinearSet {
    let n = set.arity();
    let mut rows: Vec<QLin> = Vec::with_capacity(n);
    for old in 0..n {
        let new = match old {
            0 => 0,
            k if k == n - 1 => 1,
            k => k + 1,
        };
        rows.push(QLin::var(n, new));
    }
    SemilinearSet::decompose(n, &pullback(set, &rows))
}
