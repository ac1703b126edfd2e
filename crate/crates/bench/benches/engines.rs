use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use igusa_core::num::rat;
use igusa_core::padic::{truncated_zeta, LocalFieldConfig};
use igusa_core::presburger::{Formula, LinTerm};
use igusa_core::qlinear::{QAtom, QLin};
use igusa_core::semilinear::{QFormula, SemilinearSet};
use igusa_core::vfrag::{zeta, MonomialRegion, ValWeight};

fn qe(c: &mut Criterion) {
    // exists y. x = 3y + 1 and 0 <= y <= 20
    let body = Formula::And(vec![
        Formula::eq(LinTerm::from_ints(&[1, -3], -1)),
        Formula::ge(LinTerm::from_ints(&[0, 1], 0)),
        Formula::le(LinTerm::from_ints(&[0, 1], -20)),
    ]);
    let f = Formula::exists(body);
    c.bench_function("presburger_exists_projection", |b| {
        b.iter(|| black_box(f.to_set(1).unwrap()))
    });
}

fn euler(c: &mut Criterion) {
    let f = QFormula::conj([
        QAtom::gt(QLin::from_ints(&[1, 0, 0], 0)),
        QAtom::ge(QLin::from_ints(&[-1, 1, 0], 0)),
        QAtom::gt(QLin::from_ints(&[0, -1, 1], 3)),
    ]);
    c.bench_function("semilinear_euler_3d", |b| {
        b.iter(|| black_box(SemilinearSet::decompose(3, &f).euler()))
    });
}

fn zeta_fn(c: &mut Criterion) {
    let r = MonomialRegion::unit_polydisc(3);
    let w = ValWeight::monomial(&[1, 2, 3]);
    c.bench_function("zeta_polydisc_3", |b| b.iter(|| black_box(zeta(&r, &w, 1).unwrap())));
    c.bench_function("zeta_polydisc_3_rho4", |b| b.iter(|| black_box(zeta(&r, &w, 4).unwrap())));
}

fn oracle(c: &mut Criterion) {
    let r = MonomialRegion::unit_polydisc(2);
    let w = ValWeight::monomial(&[1, 1]);
    let cfg = LocalFieldConfig::qp(3, 10).unwrap();
    c.bench_function("oracle_truncated_2d", |b| {
        b.iter(|| black_box(truncated_zeta(&r, &w, &[rat(1, 1)], &cfg).unwrap()))
    });
}

criterion_group!(benches, qe, euler, zeta_fn, oracle);
criterion_main!(benches);
