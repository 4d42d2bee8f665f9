//! Complex numbers with a separate power-of-two exponent.
//!
//! Radial powers such as `r_e^(3k)` leave the `f64` range for a few hundred
//! degrees. Every per-mode coefficient and energy is carried as a
//! [`ScaledComplex`] and only converted back at the edges.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

/// Exponent gap beyond which the smaller addend cannot affect the sum.
const ADD_CUTOFF: i64 = 80;

/// `mantissa * 2^exponent` with `|mantissa|` in `[1, 2)`, or exactly zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    mantissa: Complex64,
    exponent: i64,
}

impl ScaledComplex {
    pub const ZERO: Self = Self {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0,
    };
    pub const ONE: Self = Self {
        mantissa: Complex64::new(1.0, 0.0),
        exponent: 0,
    };

    pub fn new(mantissa: Complex64, exponent: i64) -> Self {
        let mag = mantissa.norm();
        if mag == 0.0 {
            return Self::ZERO;
        }
        if !mag.is_finite() {
            // NaN and infinities are passed through unnormalized so they stay visible.
            return Self { mantissa, exponent };
        }
        let (_, e) = libm::frexp(mag);
        let shift = e - 1;
        Self {
            mantissa: Complex64::new(
                libm::scalbn(mantissa.re, -shift),
                libm::scalbn(mantissa.im, -shift),
            ),
            exponent: exponent + shift as i64,
        }
    }

    pub fn from_f64(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0)
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0)
    }

    pub fn mantissa(&self) -> Complex64 {
        self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite()
    }

    /// `x^n` for a real base, including negative powers.
    pub fn powi_f64(x: f64, n: i64) -> Self {
        Self::from_f64(x).powi(n)
    }

    /// Integer power by repeated squaring.
    pub fn powi(self, n: i64) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        let mut m = n.unsigned_abs();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            m >>= 1;
        }
        if n < 0 {
            Self::ONE / acc
        } else {
            acc
        }
    }

    pub fn conj(self) -> Self {
        Self {
            mantissa: self.mantissa.conj(),
            exponent: self.exponent,
        }
    }

    /// Modulus as a real-valued scaled number.
    pub fn abs(self) -> Self {
        Self::new(Complex64::new(self.mantissa.norm(), 0.0), self.exponent)
    }

    /// Squared modulus as a real-valued scaled number.
    pub fn norm_sqr(self) -> Self {
        Self::new(
            Complex64::new(self.mantissa.norm_sqr(), 0.0),
            2 * self.exponent,
        )
    }

    /// Square root of the real part; the imaginary part is ignored.
    pub fn sqrt_re(self) -> Self {
        if self.is_zero() {
            return Self::ZERO;
        }
        let m = self.mantissa.re;
        if self.exponent % 2 == 0 {
            Self::new(Complex64::new(m.sqrt(), 0.0), self.exponent / 2)
        } else {
            Self::new(
                Complex64::new((2.0 * m).sqrt(), 0.0),
                (self.exponent - 1) / 2,
            )
        }
    }

    pub fn scale_f64(self, x: f64) -> Self {
        Self::new(self.mantissa * x, self.exponent)
    }

    /// Natural logarithm of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        self.mantissa.norm().ln() + self.exponent as f64 * std::f64::consts::LN_2
    }

    /// Converts to a native complex number, saturating to infinity or zero.
    pub fn to_complex(&self) -> Complex64 {
        let e = self.exponent.clamp(-4000, 4000) as i32;
        Complex64::new(
            libm::scalbn(self.mantissa.re, e),
            libm::scalbn(self.mantissa.im, e),
        )
    }

    pub fn to_f64(&self) -> f64 {
        self.to_complex().re
    }

    pub fn re(&self) -> Self {
        Self::new(Complex64::new(self.mantissa.re, 0.0), self.exponent)
    }

    /// Compares moduli.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self
                .exponent
                .cmp(&other.exponent)
                .then_with(|| self.mantissa.norm().total_cmp(&other.mantissa.norm())),
        }
    }

    /// `|self| / |other|` as a plain float (saturating).
    pub fn ratio_abs(&self, other: &Self) -> f64 {
        (self.abs() / other.abs()).to_f64()
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl Mul for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Mul<f64> for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale_f64(rhs)
    }
}

impl Mul<Complex64> for ScaledComplex {
    type Output = Self;
    fn mul(self, rhs: Complex64) -> Self {
        self * Self::from_complex(rhs)
    }
}

impl Div for ScaledComplex {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return Self {
                mantissa: self.mantissa / rhs.mantissa,
                exponent: 0,
            };
        }
        Self::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledComplex {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return rhs;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let gap = big.exponent - small.exponent;
        if gap > ADD_CUTOFF {
            return big;
        }
        let g = -(gap as i32);
        let shifted = Complex64::new(
            libm::scalbn(small.mantissa.re, g),
            libm::scalbn(small.mantissa.im, g),
        );
        Self::new(big.mantissa + shifted, big.exponent)
    }
}

impl Neg for ScaledComplex {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sum for ScaledComplex {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |acc, x| acc + x)
    }
}

impl fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent.abs() < 1000 {
            let z = self.to_complex();
            if z.im == 0.0 {
                write!(f, "{:e}", z.re)
            } else {
                write!(f, "{:e}{:+e}i", z.re, z.im)
            }
        } else {
            write!(f, "({}{:+}i)*2^{}", self.mantissa.re, self.mantissa.im, self.exponent)
        }
    }
}
