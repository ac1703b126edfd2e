//! Small exact-arithmetic helpers shared by the engines.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(v: &BigInt) -> BigRational {
    BigRational::from_integer(v.clone())
}

pub fn gcd_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::zero(), |acc, v| acc.gcd(v))
}

pub fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    a.lcm(b)
}

pub fn lcm_all<'a>(values: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| lcm(&acc, v))
}

/// `floor(a / b)` for `b != 0`.
pub fn floor_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_floor(b)
}

/// `ceil(a / b)` for `b != 0`.
pub fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -((-a).div_floor(b))
}

/// Non-negative remainder of `a` modulo `m > 0`.
pub fn modulo(a: &BigInt, m: &BigInt) -> BigInt {
    a.mod_floor(m)
}

pub fn to_i64(v: &BigInt) -> i64 {
    v.to_i64().expect("integer does not fit in i64")
}

pub fn floor_rat(r: &BigRational) -> BigInt {
    r.floor().to_integer()
}

pub fn ceil_rat(r: &BigRational) -> BigInt {
    r.ceil().to_integer()
}

/// Least common multiple of the denominators of the given rationals.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a BigRational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, v| lcm(&acc, v.denom()))
}

/// Exact `base^exp` for a possibly negative exponent.
pub fn rat_pow(base: &BigRational, exp: i64) -> BigRational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), (-exp) as usize)
    }
}

/// Integer `k`-th root of a non-negative integer if it is exact.
pub fn exact_root(value: &BigInt, k: u32) -> Option<BigInt> {
    if value.is_negative() {
        return None;
    }
    let r = value.nth_root(k);
    if num_traits::pow(r.clone(), k as usize) == *value {
        Some(r)
    } else {
        None
    }
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

pub type IntMatrix = Vec<Vec<BigInt>>;
pub type RatMatrix = Vec<Vec<BigRational>>;

pub fn int_matrix(rows: &[&[i64]]) -> IntMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect()
}

pub fn identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                .collect()
        })
        .collect()
}

/// Determinant of a square integer matrix (fraction-free elimination).
pub fn det(matrix: &[Vec<BigInt>]) -> BigInt {
    let n = matrix.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: IntMatrix = matrix.to_vec();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn to_rat_matrix(matrix: &[Vec<BigInt>]) -> RatMatrix {
    matrix
        .iter()
        .map(|r| r.iter().map(rat_int).collect())
        .collect()
}

/// Rank of a rational matrix given by rows.
pub fn rank(rows: &[Vec<BigRational>]) -> usize {
    let mut a: RatMatrix = rows.to_vec();
    let cols = a.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        let pivot = a[r][c].clone();
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = &a[i][c] / &pivot;
                for j in c..cols {
                    let v = &a[r][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Inverse of a square rational matrix, if it is invertible.
pub fn inverse(matrix: &[Vec<BigRational>]) -> Option<RatMatrix> {
    let n = matrix.len();
    let mut a: RatMatrix = matrix
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    BigRational::one()
                } else {
                    BigRational::zero()
                }
            }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !a[i][c].is_zero())?;
        a.swap(c, p);
        let pivot = a[c][c].clone();
        for v in a[c].iter_mut() {
            *v /= &pivot;
        }
        for i in 0..n {
            if i != c && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..2 * n {
                    let v = &a[c][j] * &f;
                    a[i][j] -= v;
                }
            }
        }
    }
    Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Inverse of a unimodular integer matrix.
pub fn unimodular_inverse(matrix: &[Vec<BigInt>]) -> Option<IntMatrix> {
    let d = det(matrix);
    if d.abs() != BigInt::one() {
        return None;
    }
    let inv = inverse(&to_rat_matrix(matrix))?;
    Some(
        inv.into_iter()
            .map(|r| r.into_iter().map(|v| v.to_integer()).collect())
            .collect(),
    )
}

pub fn mat_vec(matrix: &[Vec<BigInt>], v: &[BigInt]) -> Vec<BigInt> {
    matrix
        .iter()
        .map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

pub fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> IntMatrix {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|r| {
            (0..cols)
                .map(|j| r.iter().zip(b).map(|(x, row)| x * &row[j]).sum())
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_and_ceil_division_round_toward_infinities() {
        assert_eq!(floor_div(&int(-7), &int(2)), int(-4));
        assert_eq!(ceil_div(&int(-7), &int(2)), int(-3));
        assert_eq!(ceil_div(&int(7), &int(2)), int(4));
        assert_eq!(modulo(&int(-7), &int(3)), int(2));
    }

    #[test]
    fn exact_roots() {
        assert_eq!(exact_root(&int(81), 4), Some(int(3)));
        assert_eq!(exact_root(&int(80), 4), None);
        assert_eq!(binomial(5, 2), int(10));
    }

    #[test]
    fn determinant_and_inverse() {
        let m = int_matrix(&[&[2, 1, 0], &[1, 3, 1], &[0, 1, 4]]);
        assert_eq!(det(&m), int(18));
        let u = int_matrix(&[&[1, 1], &[0, 1]]);
        assert_eq!(unimodular_inverse(&u), Some(int_matrix(&[&[1, -1], &[0, 1]])));
        assert_eq!(det(&int_matrix(&[&[0, 1], &[1, 0]])), int(-1));
        assert_eq!(rank(&to_rat_matrix(&int_matrix(&[&[1, 2], &[2, 4]]))), 1);
    }
}
