use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// `a + bX` in `Z[X]/(X² + X)`, where `X` is the class of `(0, ∞)`.
///
/// The characters `X ↦ 0` and `X ↦ -1` give the bounded and the generic
/// Euler characteristic.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GammaBarClass {
    pub a: i64,
    pub b: i64,
}

impl GammaBarClass {
    pub const fn new(a: i64, b: i64) -> Self {
        GammaBarClass { a, b }
    }

    pub const fn zero() -> Self {
        GammaBarClass::new(0, 0)
    }

    pub const fn one() -> Self {
        GammaBarClass::new(1, 0)
    }

    pub const fn x() -> Self {
        GammaBarClass::new(0, 1)
    }

    /// Class with the given `(χ_b, χ_g)`.
    pub fn from_chars(chi_b: i64, chi_g: i64) -> Self {
        GammaBarClass::new(chi_b, chi_b - chi_g)
    }

    pub fn chi_b(&self) -> i64 {
        self.a
    }

    pub fn chi_g(&self) -> i64 {
        self.a - self.b
    }
}

impl Add for GammaBarClass {
    type Output = GammaBarClass;
    fn add(self, o: GammaBarClass) -> GammaBarClass {
        GammaBarClass::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for GammaBarClass {
    type Output = GammaBarClass;
    fn sub(self, o: GammaBarClass) -> GammaBarClass {
        GammaBarClass::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for GammaBarClass {
    type Output = GammaBarClass;
    fn neg(self) -> GammaBarClass {
        GammaBarClass::new(-self.a, -self.b)
    }
}

impl Mul for GammaBarClass {
    type Output = GammaBarClass;
    fn mul(self, o: GammaBarClass) -> GammaBarClass {
        // X² = -X
        GammaBarClass::new(self.a * o.a, self.a * o.b + self.b * o.a - self.b * o.b)
    }
}

impl std::iter::Sum for GammaBarClass {
    fn sum<I: Iterator<Item = GammaBarClass>>(iter: I) -> GammaBarClass {
        iter.fold(GammaBarClass::zero(), Add::add)
    }
}

impl fmt::Display for GammaBarClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let xpart = |b: i64| match b.abs() {
            1 => "X".to_string(),
            m => format!("{m}X"),
        };
        match (self.a, self.b) {
            (a, 0) => write!(f, "{a}"),
            (0, b) if b < 0 => write!(f, "-{}", xpart(b)),
            (0, b) => write!(f, "{}", xpart(b)),
            (a, b) if b < 0 => write!(f, "{a} - {}", xpart(b)),
            (a, b) => write!(f, "{a} + {}", xpart(b)),
        }
    }
}

/// Both Euler characteristics together with the class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerData {
    pub chi_g: i64,
    pub chi_b: i64,
    pub class: GammaBarClass,
}

impl EulerData {
    pub fn from_class(class: GammaBarClass) -> Self {
        EulerData {
            chi_g: class.chi_g(),
            chi_b: class.chi_b(),
            class,
        }
    }
}
