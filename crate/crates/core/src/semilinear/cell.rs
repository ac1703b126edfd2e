use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::euler::GammaBarClass;
use crate::qlinear::{self, QAtom, QLin};

/// One coordinate of a cylindrical cell, described over the earlier ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Level {
    /// `x_k = f(x_0..x_{k-1})`
    Section(QLin),
    /// `lower < x_k < upper`; `None` stands for an infinite end.
    Band {
        lower: Option<QLin>,
        upper: Option<QLin>,
    },
}

impl Level {
    pub fn is_band(&self) -> bool {
        matches!(self, Level::Band { .. })
    }

    /// Contribution to the class in `Z[X]/(X²+X)`.
    pub fn class(&self) -> GammaBarClass {
        match self {
            Level::Section(_) => GammaBarClass::one(),
            Level::Band { lower, upper } => match (lower.is_some(), upper.is_some()) {
                (true, true) => GammaBarClass::new(-1, 0),
                (false, false) => GammaBarClass::new(1, 2),
                _ => GammaBarClass::new(0, 1),
            },
        }
    }
}

/// Cylindrical cell in `Q^n` built level by level from the point `Q^0`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QCell {
    levels: Vec<Level>,
}

impl QCell {
    pub fn point() -> Self {
        QCell { levels: Vec::new() }
    }

    /// All of `Q^n`.
    pub fn universe(arity: usize) -> Self {
        QCell {
            levels: (0..arity)
                .map(|_| Level::Band {
                    lower: None,
                    upper: None,
                })
                .collect(),
        }
    }

    /// Checks that every bound has the right arity and bands are nonempty.
    pub fn new(levels: Vec<Level>) -> Option<Self> {
        for (k, l) in levels.iter().enumerate() {
            let ok = match l {
                Level::Section(f) => f.arity() == k,
                Level::Band { lower, upper } => {
                    lower.as_ref().is_none_or(|f| f.arity() == k)
                        && upper.as_ref().is_none_or(|f| f.arity() == k)
                }
            };
            if !ok {
                return None;
            }
        }
        let cell = QCell { levels };
        if qlinear::feasible(&cell.atoms(), cell.arity()) {
            Some(cell)
        } else {
            None
        }
    }

    /// The point `(v_1, ..., v_n)`.
    pub fn from_point(values: &[BigRational]) -> Self {
        QCell {
            levels: values
                .iter()
                .enumerate()
                .map(|(k, v)| Level::Section(QLin::constant(k, v.clone())))
                .collect(),
        }
    }

    /// Open interval `(lo, hi)` in `Q^1` with optional ends.
    pub fn interval(lo: Option<BigRational>, hi: Option<BigRational>) -> Self {
        QCell {
            levels: vec![Level::Band {
                lower: lo.map(|v| QLin::constant(0, v)),
                upper: hi.map(|v| QLin::constant(0, v)),
            }],
        }
    }

    pub fn arity(&self) -> usize {
        self.levels.len()
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn push(&self, level: Level) -> QCell {
        let mut levels = self.levels.clone();
        levels.push(level);
        QCell { levels }
    }

    pub fn dim(&self) -> usize {
        self.levels.iter().filter(|l| l.is_band()).count()
    }

    /// Boundedness of each band factor, in level order.
    pub fn band_bounded(&self) -> Vec<bool> {
        self.levels
            .iter()
            .filter_map(|l| match l {
                Level::Band { lower, upper } => Some(lower.is_some() && upper.is_some()),
                Level::Section(_) => None,
            })
            .collect()
    }

    pub fn class(&self) -> GammaBarClass {
        self.levels
            .iter()
            .fold(GammaBarClass::one(), |acc, l| acc * l.class())
    }

    /// Defining conjunction over `Q^n`.
    pub fn atoms(&self) -> Vec<QAtom> {
        let n = self.arity();
        let mut out = Vec::new();
        for (k, l) in self.levels.iter().enumerate() {
            let x = QLin::var(n, k);
            match l {
                Level::Section(f) => out.push(QAtom::eq(x.sub(&f.extend(n)))),
                Level::Band { lower, upper } => {
                    if let Some(f) = lower {
                        out.push(QAtom::gt(x.sub(&f.extend(n))));
                    }
                    if let Some(f) = upper {
                        out.push(QAtom::gt(f.extend(n).sub(&x)));
                    }
                }
            }
        }
        out
    }

    pub fn contains(&self, point: &[BigRational]) -> bool {
        self.atoms().iter().all(|a| a.holds(point))
    }

    /// Deterministic interior sample point.
    pub fn sample(&self) -> Vec<BigRational> {
        let mut p: Vec<BigRational> = Vec::with_capacity(self.arity());
        for l in &self.levels {
            let v = match l {
                Level::Section(f) => f.eval(&p),
                Level::Band { lower, upper } => band_sample(
                    lower.as_ref().map(|f| f.eval(&p)),
                    upper.as_ref().map(|f| f.eval(&p)),
                ),
            };
            p.push(v);
        }
        p
    }

    /// Sample plus one perturbation per band level; the points affinely span the cell.
    pub fn spanning_samples(&self) -> Vec<Vec<BigRational>> {
        let base = self.sample();
        let mut out = vec![base.clone()];
        for (k, l) in self.levels.iter().enumerate() {
            if !l.is_band() {
                continue;
            }
            let mut p: Vec<BigRational> = base[..k].to_vec();
            let (lo, hi) = match l {
                Level::Band { lower, upper } => (
                    lower.as_ref().map(|f| f.eval(&p)),
                    upper.as_ref().map(|f| f.eval(&p)),
                ),
                Level::Section(_) => unreachable!(),
            };
            let mid = band_sample(lo.clone(), hi.clone());
            let v = match (lo, hi) {
                (Some(l), Some(_)) => (&mid + &l) / BigRational::from_integer(BigInt::from(2)),
                (Some(_), None) | (None, None) => mid + BigRational::one(),
                (None, Some(_)) => mid - BigRational::one(),
            };
            p.push(v);
            for later in &self.levels[k + 1..] {
                let w = match later {
                    Level::Section(f) => f.eval(&p),
                    Level::Band { lower, upper } => band_sample(
                        lower.as_ref().map(|f| f.eval(&p)),
                        upper.as_ref().map(|f| f.eval(&p)),
                    ),
                };
                p.push(w);
            }
            out.push(p);
        }
        out
    }

    /// Cartesian product; the levels of `other` follow, shifted past `self`.
    pub fn product(&self, other: &QCell) -> QCell {
        let n = self.arity();
        let mut levels = self.levels.clone();
        for (k, l) in other.levels.iter().enumerate() {
            let shift = |f: &QLin| f.embed(n + k, n);
            levels.push(match l {
                Level::Section(f) => Level::Section(shift(f)),
                Level::Band { lower, upper } => Level::Band {
                    lower: lower.as_ref().map(shift),
                    upper: upper.as_ref().map(shift),
                },
            });
        }
        QCell { levels }
    }

    pub fn display_with(&self, names: &[String]) -> String {
        let n = self.arity();
        let name = |k: usize| {
            names
                .get(k)
                .cloned()
                .unwrap_or_else(|| format!("x{}", k + 1))
        };
        let mut parts = Vec::new();
        for (k, l) in self.levels.iter().enumerate() {
            match l {
                Level::Section(f) => {
                    parts.push(format!("{} = {}", name(k), f.extend(n).display_with(names)))
                }
                Level::Band { lower, upper } => {
                    let lo = lower
                        .as_ref()
                        .map(|f| format!("{} < ", f.extend(n).display_with(names)))
                        .unwrap_or_default();
                    let hi = upper
                        .as_ref()
                        .map(|f| format!(" < {}", f.extend(n).display_with(names)))
                        .unwrap_or_default();
                    if lo.is_empty() && hi.is_empty() {
                        parts.push(format!("{} free", name(k)));
                    } else {
                        parts.push(format!("{lo}{}{hi}", name(k)));
                    }
                }
            }
        }
        if parts.is_empty() {
            "point".to_string()
        } else {
            parts.join(", ")
        }
    }
}

pub(crate) fn band_sample(lo: Option<BigRational>, hi: Option<BigRational>) -> BigRational {
    match (lo, hi) {
        (Some(l), Some(h)) => (l + h) / BigRational::from_integer(BigInt::from(2)),
        (Some(l), None) => l + BigRational::one(),
        (None, Some(h)) => h - BigRational::one(),
        (None, None) => BigRational::zero(),
    }
}

impl fmt::Display for QCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&[]))
    }
}
