//! Orthonormal spherical harmonics with the Condon-Shortley phase.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Degree `k` and order `l` of a spherical harmonic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex {
    pub k: usize,
    pub l: i64,
}

impl ModeIndex {
    pub fn new(k: usize, l: i64) -> Result<Self> {
        let m = Self { k, l };
        m.validate()?;
        Ok(m)
    }

    pub fn zonal(k: usize) -> Self {
        Self { k, l: 0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.l.unsigned_abs() as usize > self.k {
            return Err(Error::Domain(format!(
                "order {} exceeds degree {}",
                self.l, self.k
            )));
        }
        Ok(())
    }
}

/// Normalized associated Legendre function, so that
/// `Y_k^m(theta, phi) = plm(k, m, theta) * exp(i m phi)` for `m >= 0`.
pub(crate) fn normalized_legendre(k: usize, m: usize, theta: f64) -> f64 {
    let x = theta.cos();
    let s = theta.sin();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for i in 1..=m {
        let fi = i as f64;
        pmm *= -((2.0 * fi + 1.0) / (2.0 * fi)).sqrt() * s;
    }
    if k == m {
        return pmm;
    }
    let mut prev = pmm;
    let mut cur = x * (2.0 * m as f64 + 3.0).sqrt() * pmm;
    let mf = m as f64;
    for l in (m + 2)..=k {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let lp = lf - 1.0;
        let b = ((lp * lp - mf * mf) / (4.0 * lp * lp - 1.0)).sqrt();
        let next = a * (x * cur - b * prev);
        prev = cur;
        cur = next;
    }
    cur
}

/// Evaluates `Y_k^l(theta, phi)`, unit-normalized on the sphere.
pub fn eval_harmonic(m: ModeIndex, theta: f64, phi: f64) -> Result<Complex64> {
    m.validate()?;
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::Domain(format!("polar angle {theta} outside [0, pi]")));
    }
    let order = m.l.unsigned_abs() as usize;
    let p = normalized_legendre(m.k, order, theta);
    let y = Complex64::from_polar(p, order as f64 * phi);
    if m.l >= 0 {
        Ok(y)
    } else if order % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn low_degree_values() {
        let y00 = eval_harmonic(ModeIndex::new(0, 0).unwrap(), 0.3, 1.1).unwrap();
        assert!((y00.re - 0.282_094_791_773_878_14).abs() < 1e-15);
        let y10 = eval_harmonic(ModeIndex::new(1, 0).unwrap(), 0.0, 0.0).unwrap();
        assert!((y10.re - (3.0 / (4.0 * PI)).sqrt()).abs() < 1e-15);
        // Y_1^1 = -sqrt(3/8pi) sin(theta) e^{i phi}
        let y11 = eval_harmonic(ModeIndex::new(1, 1).unwrap(), 0.7, 0.4).unwrap();
        let expect = Complex64::from_polar(-(3.0 / (8.0 * PI)).sqrt() * 0.7f64.sin(), 0.4);
        assert!((y11 - expect).norm() < 1e-15);
    }

    #[test]
    fn rejects_bad_order_and_angle() {
        assert!(ModeIndex::new(2, 3).is_err());
        assert!(eval_harmonic(ModeIndex { k: 2, l: -3 }, 0.1, 0.0).is_err());
        assert!(eval_harmonic(ModeIndex::zonal(2), -0.1, 0.0).is_err());
    }

    #[test]
    fn conjugation_symmetry() {
        for k in 1..8 {
            for l in 1..=k as i64 {
                let p = eval_harmonic(ModeIndex::new(k, l).unwrap(), 1.1, 0.6).unwrap();
                let n = eval_harmonic(ModeIndex::new(k, -l).unwrap(), 1.1, 0.6).unwrap();
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                assert!((n - sign * p.conj()).norm() < 1e-14);
            }
        }
    }

    proptest! {
        #[test]
        fn addition_theorem(k in 0usize..=10, theta in 0.0..PI, phi in 0.0..(2.0 * PI)) {
            let sum: f64 = (-(k as i64)..=k as i64)
                .map(|l| eval_harmonic(ModeIndex { k, l }, theta, phi).unwrap().norm_sqr())
                .sum();
            let expect = (2 * k + 1) as f64 / (4.0 * PI);
            prop_assert!((sum - expect).abs() < 1e-10 * expect);
        }
    }
}
