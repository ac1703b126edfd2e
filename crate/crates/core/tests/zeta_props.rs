use igusa_core::genfun::{Poly, RatFun};
use igusa_core::num::rat;
use igusa_core::padic::{brute_force_zeta, compare, truncated_zeta, LocalFieldConfig};
use igusa_core::vfrag::{integrate_ordered, zeta, MonomialRegion, ValWeight};
use proptest::prelude::*;

fn line(a: i64) -> RatFun {
    RatFun::new(Poly::q().sub(&Poly::one()), [(vec![-1, a], 1)]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn polydisc_zeta_factors(a in 0i64..4, b in 0i64..4) {
        let z = zeta(&MonomialRegion::unit_polydisc(2), &ValWeight::monomial(&[a, b]), 1).unwrap();
        prop_assert_eq!(z, line(a).mul(&line(b)));
    }

    #[test]
    fn orders_agree_on_polydisc(a in 0i64..3, b in 0i64..3, c in 0i64..3) {
        let r = MonomialRegion::unit_polydisc(3);
        let w = ValWeight::monomial(&[a, b, c]);
        let z = zeta(&r, &w, 1).unwrap();
        prop_assert_eq!(integrate_ordered(&r, &w, &[2, 0, 1], 1).unwrap(), z.clone());
        prop_assert_eq!(integrate_ordered(&r, &w, &[1, 2, 0], 1).unwrap(), z);
    }

    #[test]
    fn oracle_accepts_polydisc(a in 0i64..3, b in 1i64..3, p in prop::sample::select(vec![2u32, 3]), kappa in 1i64..3) {
        let r = MonomialRegion::unit_polydisc(2);
        let w = ValWeight::monomial(&[a, b]);
        let z = zeta(&r, &w, 1).unwrap();
        let cfg = LocalFieldConfig::qp(p, 8).unwrap();
        let rep = compare(&z, &r, &w, &[rat(kappa, 1)], &cfg).unwrap();
        prop_assert!(rep.pass, "{:?}", rep.to_json());
    }

    #[test]
    fn brute_force_matches_class_sum(a in 0i64..3, b in 0i64..3) {
        let r = MonomialRegion::unit_polydisc(2);
        let w = ValWeight::monomial(&[a, b]);
        let cfg = LocalFieldConfig::qp(2, 4).unwrap();
        let k = [rat(1, 1)];
        let (direct, _) = brute_force_zeta(&r, &w, &k, &cfg).unwrap();
        prop_assert_eq!(direct, truncated_zeta(&r, &w, &k, &cfg).unwrap());
    }
}
