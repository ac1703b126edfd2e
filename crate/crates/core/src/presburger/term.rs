use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Integer affine form `c_1*x_1 + ... + c_n*x_n + constant`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinTerm {
    pub coeffs: Vec<BigInt>,
    pub constant: BigInt,
}

impl LinTerm {
    pub fn new(coeffs: Vec<BigInt>, constant: BigInt) -> Self {
        LinTerm { coeffs, constant }
    }

    pub fn from_ints(coeffs: &[i64], constant: i64) -> Self {
        LinTerm {
            coeffs: coeffs.iter().map(|&c| BigInt::from(c)).collect(),
            constant: BigInt::from(constant),
        }
    }

    pub fn zero(arity: usize) -> Self {
        LinTerm {
            coeffs: vec![BigInt::zero(); arity],
            constant: BigInt::zero(),
        }
    }

    pub fn constant(arity: usize, value: BigInt) -> Self {
        LinTerm {
            coeffs: vec![BigInt::zero(); arity],
            constant: value,
        }
    }

    pub fn var(arity: usize, index: usize) -> Self {
        let mut t = LinTerm::zero(arity);
        t.coeffs[index] = BigInt::one();
        t
    }

    pub fn arity(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, index: usize) -> &BigInt {
        &self.coeffs[index]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn mentions(&self, index: usize) -> bool {
        !self.coeffs[index].is_zero()
    }

    pub fn eval(&self, point: &[BigInt]) -> BigInt {
        debug_assert_eq!(point.len(), self.arity());
        self.coeffs
            .iter()
            .zip(point)
            .fold(self.constant.clone(), |acc, (c, x)| {
                if c.is_zero() {
                    acc
                } else {
                    acc + c * x
                }
            })
    }

    pub fn add(&self, other: &LinTerm) -> LinTerm {
        debug_assert_eq!(self.arity(), other.arity());
        LinTerm {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
            constant: &self.constant + &other.constant,
        }
    }

    pub fn sub(&self, other: &LinTerm) -> LinTerm {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
            constant: -&self.constant,
        }
    }

    pub fn scale(&self, factor: &BigInt) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            constant: &self.constant * factor,
        }
    }

    pub fn shift(&self, delta: &BigInt) -> LinTerm {
        LinTerm {
            coeffs: self.coeffs.clone(),
            constant: &self.constant + delta,
        }
    }

    /// Drops coordinate `index`; its coefficient is discarded.
    pub fn remove_var(&self, index: usize) -> LinTerm {
        let mut coeffs = self.coeffs.clone();
        coeffs.remove(index);
        LinTerm {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    /// Inserts a fresh coordinate with coefficient zero at `index`.
    pub fn insert_var(&self, index: usize) -> LinTerm {
        let mut coeffs = self.coeffs.clone();
        coeffs.insert(index, BigInt::zero());
        LinTerm {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    /// Appends zero coefficients up to `arity`.
    pub fn extend(&self, arity: usize) -> LinTerm {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(arity, BigInt::zero());
        LinTerm {
            coeffs,
            constant: self.constant.clone(),
        }
    }

    /// Replaces `x_index` by `replacement` (same arity).
    pub fn substitute(&self, index: usize, replacement: &LinTerm) -> LinTerm {
        let c = self.coeffs[index].clone();
        if c.is_zero() {
            return self.clone();
        }
        let mut out = self.clone();
        out.coeffs[index] = BigInt::zero();
        out.add(&replacement.scale(&c))
    }

    /// `t(A x + b)` where `A` has `self.arity()` rows.
    pub fn compose(&self, matrix: &[Vec<BigInt>], offset: &[BigInt]) -> LinTerm {
        let cols = matrix.first().map_or(0, Vec::len);
        let mut coeffs = vec![BigInt::zero(); cols];
        let mut constant = self.constant.clone();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (j, a) in matrix[i].iter().enumerate() {
                coeffs[j] += c * a;
            }
            constant += c * &offset[i];
        }
        LinTerm { coeffs, constant }
    }

    /// Reorders coordinates: result coefficient `j` is `self.coeffs[perm[j]]`.
    pub fn permute(&self, perm: &[usize]) -> LinTerm {
        LinTerm {
            coeffs: perm.iter().map(|&p| self.coeffs[p].clone()).collect(),
            constant: self.constant.clone(),
        }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let mut out = String::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let name = names
                .get(i)
                .cloned()
                .unwrap_or_else(|| format!("x{}", i + 1));
            push_signed(&mut out, c, Some(&name));
        }
        if !self.constant.is_zero() || out.is_empty() {
            push_signed(&mut out, &self.constant, None);
        }
        out
    }
}

fn push_signed(out: &mut String, c: &BigInt, name: Option<&str>) {
    let first = out.is_empty();
    let mag = c.abs();
    if c.is_negative() {
        out.push_str(if first { "-" } else { " - " });
    } else if !first {
        out.push_str(" + ");
    }
    match name {
        Some(n) if mag.is_one() => out.push_str(n),
        Some(n) => {
            out.push_str(&mag.to_string());
            out.push('*');
            out.push_str(n);
        }
        None => out.push_str(&mag.to_string()),
    }
}

impl fmt::Display for LinTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}
