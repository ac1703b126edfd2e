mod common;

use common::{ints, random_qf, rng};
use igusa_core::presburger::Formula;
use num_bigint::BigInt;

fn box_points(arity: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|p| {
                (-r..=r).map(move |v| {
                    let mut p = p.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}

#[test]
fn projection_matches_brute_force_on_small_boxes() {
    let mut rng = rng(11);
    for round in 0..40 {
        let free = 1 + round % 2;
        let body = random_qf(&mut rng, free + 1, 2);
        let f = Formula::exists(body);
        let set = f.to_set(free).unwrap();
        for p in box_points(free, 12) {
            let expected = f.eval(&p, (-200, 200));
            assert_eq!(set.contains(&ints(&p)), expected, "round {round} at {p:?}: {f:?}");
        }
    }
}

#[test]
fn boolean_laws_hold_extensionally() {
    let mut rng = rng(5);
    for _ in 0..10 {
        let a = random_qf(&mut rng, 2, 1).to_set(2).unwrap();
        let b = random_qf(&mut rng, 2, 1).to_set(2).unwrap();
        let lhs = a.union(&b).unwrap().complement();
        let rhs = a.complement().intersect(&b.complement()).unwrap();
        assert!(lhs.equivalent(&rhs).unwrap());
        assert!(a.union(&a).unwrap().equivalent(&a).unwrap());
        let bounds = [(-8, 8), (-8, 8)];
        assert_eq!(lhs.enumerate(&bounds), rhs.enumerate(&bounds));
    }
}

#[test]
fn scaling_composes() {
    let mut rng = rng(9);
    for _ in 0..10 {
        let s = random_qf(&mut rng, 1, 1).to_set(1).unwrap();
        let two = s.scale(&BigInt::from(2)).scale(&BigInt::from(3));
        let six = s.scale(&BigInt::from(6));
        assert!(two.equivalent(&six).unwrap());
    }
}
