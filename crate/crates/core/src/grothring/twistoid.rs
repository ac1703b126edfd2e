use super::res::ResClass;
use crate::error::{Error, Result};
use crate::qlinear;
use crate::semilinear::{QCell, QFormula, SemilinearSet};

/// Partitions `base` so that the fibre class is constant on each part.
///
/// Pieces with equal classes are merged; overlapping pieces with different
/// classes are an error, as is a base point no piece covers.
pub fn refine_to_twistoids(
    base: &SemilinearSet,
    pieces: &[(QCell, ResClass)],
) -> Result<Vec<(SemilinearSet, ResClass)>> {
    let n = base.arity();
    for (cell, _) in pieces {
        if cell.arity() != n {
            return Err(Error::ArityMismatch {
                expected: n,
                found: cell.arity(),
            });
        }
    }
    for i in 0..pieces.len() {
        for j in i + 1..pieces.len() {
            if pieces[i].1 == pieces[j].1 {
                continue;
            }
            let mut atoms = pieces[i].0.atoms();
            atoms.extend(pieces[j].0.atoms());
            if qlinear::feasible(&atoms, n) {
                return Err(Error::ContradictoryFibers { first: i, second: j });
            }
        }
    }
    let mut classes: Vec<(ResClass, Vec<&QCell>)> = Vec::new();
    for (cell, class) in pieces {
        match classes.iter_mut().find(|(c, _)| c == class) {
            Some((_, cells)) => cells.push(cell),
            None => classes.push((class.clone(), vec![cell])),
        }
    }
    let base_formula = base.to_formula();
    let mut covered = SemilinearSet::empty(n);
    let mut out = Vec::new();
    for (class, cells) in classes {
        let union = QFormula::Or(cells.iter().map(|c| QFormula::conj(c.atoms())).collect());
        let part = SemilinearSet::decompose(n, &QFormula::And(vec![base_formula.clone(), union]));
        if part.is_empty() {
            continue;
        }
        covered = covered.union(&part)?;
        out.push((part, class));
    }
    if let Some(c) = base.difference(&covered)?.cells().first() {
        return Err(Error::Invalid(format!(
            "fibre pieces do not cover the base near {:?}",
            c.sample().iter().map(ToString::to_string).collect::<Vec<_>>()
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::rat;

    fn line() -> SemilinearSet {
        SemilinearSet::universe(1)
    }

    fn ray(lo: Option<i64>, hi: Option<i64>) -> QCell {
        QCell::interval(lo.map(|v| rat(v, 1)), hi.map(|v| rat(v, 1)))
    }

    #[test]
    fn constant_fibre_gives_one_part() {
        let parts = refine_to_twistoids(&line(), &[(QCell::universe(1), ResClass::u())]).unwrap();
        assert_eq!(parts.len(), 1);
        assert!(parts[0].0.equivalent(&line()).unwrap());
    }

    #[test]
    fn distinct_fibres_give_two_parts() {
        let pieces = vec![
            (ray(None, Some(0)), ResClass::u()),
            (QCell::from_point(&[rat(0, 1)]), ResClass::u()),
            (ray(Some(0), None), ResClass::v()),
        ];
        let parts = refine_to_twistoids(&line(), &pieces).unwrap();
        assert_eq!(parts.len(), 2);
        assert!(parts[0].0.contains(&[rat(0, 1)]));
        assert!(parts[0].0.intersect(&parts[1].0).unwrap().is_empty());
    }

    #[test]
    fn equal_fibres_on_overlap_merge() {
        let a = ResClass::parse("u + v").unwrap();
        let b = ResClass::parse("v + u").unwrap();
        let pieces = vec![(ray(None, Some(1)), a), (ray(Some(-1), None), b)];
        let parts = refine_to_twistoids(&line(), &pieces).unwrap();
        assert_eq!(parts.len(), 1);
    }

    #[test]
    fn contradictions_and_gaps() {
        let pieces = vec![(ray(None, Some(1)), ResClass::u()), (ray(Some(0), None), ResClass::v())];
        assert_eq!(
            refine_to_twistoids(&line(), &pieces),
            Err(Error::ContradictoryFibers { first: 0, second: 1 })
        );
        let gap = vec![(ray(None, Some(0)), ResClass::u())];
        assert!(matches!(refine_to_twistoids(&line(), &gap), Err(Error::Invalid(_))));
    }
}
