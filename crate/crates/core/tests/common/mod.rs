#![allow(dead_code)]

use igusa_core::presburger::{Formula, LinTerm};
use num_bigint::BigInt;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_term<R: Rng>(rng: &mut R, arity: usize, coeff: i64, constant: i64) -> LinTerm {
    loop {
        let coeffs: Vec<i64> = (0..arity).map(|_| rng.gen_range(-coeff..=coeff)).collect();
        if coeffs.iter().any(|&c| c != 0) {
            return LinTerm::from_ints(&coeffs, rng.gen_range(-constant..=constant));
        }
    }
}

pub fn random_atom<R: Rng>(rng: &mut R, arity: usize) -> Formula {
    let t = random_term(rng, arity, 3, 10);
    match rng.gen_range(0..6) {
        0 | 1 => Formula::ge(t),
        2 => Formula::le(t),
        3 => Formula::eq(t),
        _ => Formula::cong(t, BigInt::from(rng.gen_range(2..=4))),
    }
}

/// Quantifier-free boolean combination of a few atoms.
pub fn random_qf<R: Rng>(rng: &mut R, arity: usize, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_atom(rng, arity);
    }
    let k = rng.gen_range(2..=3);
    let parts: Vec<Formula> = (0..k).map(|_| random_qf(rng, arity, depth - 1)).collect();
    match rng.gen_range(0..5) {
        0 | 1 => Formula::And(parts),
        2 | 3 => Formula::Or(parts),
        _ => Formula::not(Formula::And(parts)),
    }
}

pub fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}
