//! Piecewise radial profiles `g r^k + h r^(-k-1)` and their exact energies.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

/// Dirichlet integral of `(b r^k + c r^(-k-1)) Y_k^l` over `r0 < |x| < r1`.
///
/// The harmonic is unit-normalized, so the cross term between the growing and
/// decaying parts integrates to zero.
pub fn mode_shell_energy(
    k: usize,
    b: ScaledComplex,
    c: ScaledComplex,
    r0: f64,
    r1: f64,
) -> Result<ScaledComplex> {
    if !(r0 >= 0.0 && r0 < r1) || r0.is_nan() || r1.is_nan() {
        return Err(Error::Domain(format!("need 0 <= r0 < r1 (got {r0}, {r1})")));
    }
    if r0 == 0.0 && !c.is_zero() {
        return Err(Error::SingularIntegrand(
            "decaying part is not square-integrable at the origin".into(),
        ));
    }
    if r1.is_infinite() && !b.is_zero() {
        return Err(Error::SingularIntegrand(
            "growing part is not square-integrable at infinity".into(),
        ));
    }
    let n = 2 * k as i64 + 1;
    // 1 - (r0/r1)^(2k+1), shared by both terms
    let gap = if r1.is_infinite() || r0 == 0.0 {
        1.0
    } else {
        1.0 - ScaledComplex::powi_f64(r0 / r1, n).to_f64()
    };
    let mut total = ScaledComplex::ZERO;
    if !b.is_zero() && k > 0 {
        total = total + b.norm_sqr() * ScaledComplex::powi_f64(r1, n) * (k as f64 * gap);
    }
    if !c.is_zero() {
        total = total + c.norm_sqr() * ScaledComplex::powi_f64(r0, -n) * ((k + 1) as f64 * gap);
    }
    Ok(total)
}

/// One layer `inner < r < outer` of a radial profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPiece {
    pub inner: f64,
    pub outer: f64,
    pub growing: ScaledComplex,
    pub decaying: ScaledComplex,
    /// Coefficient multiplying the radial derivative in the flux.
    pub eps: Complex64,
}

impl RadialPiece {
    pub fn value(&self, k: usize, r: f64) -> ScaledComplex {
        let k = k as i64;
        self.growing * ScaledComplex::powi_f64(r, k)
            + self.decaying * ScaledComplex::powi_f64(r, -k - 1)
    }

    pub fn derivative(&self, k: usize, r: f64) -> ScaledComplex {
        let ki = k as i64;
        let mut d = self.decaying * ScaledComplex::powi_f64(r, -ki - 2) * -((k + 1) as f64);
        if k > 0 {
            d = d + self.growing * ScaledComplex::powi_f64(r, ki - 1) * k as f64;
        }
        d
    }

    pub fn flux(&self, k: usize, r: f64) -> ScaledComplex {
        self.derivative(k, r) * self.eps
    }
}

/// Jumps (outer side minus inner side) across a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterfaceJump {
    pub radius: f64,
    pub value_jump: ScaledComplex,
    pub flux_jump: ScaledComplex,
    pub value_scale: ScaledComplex,
    pub flux_scale: ScaledComplex,
}

/// Radial factor of a single-degree field, piecewise over concentric layers.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub degree: usize,
    pub pieces: Vec<RadialPiece>,
}

impl RadialProfile {
    /// Builds a profile, checking that the pieces tile `[0, inf)` in order.
    pub fn new(degree: usize, pieces: Vec<RadialPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::Domain("profile needs at least one piece".into()));
        }
        for w in pieces.windows(2) {
            if w[0].outer != w[1].inner {
                return Err(Error::Domain(format!(
                    "pieces do not meet: {} vs {}",
                    w[0].outer, w[1].inner
                )));
            }
        }
        Ok(Self { degree, pieces })
    }

    /// Solution of `-Laplace w = sum sigma_j delta(r - a_j)` decaying at infinity.
    ///
    /// A density `sigma` on radius `a` contributes `sigma a/(2k+1) (r/a)^k`
    /// inside and `sigma a/(2k+1) (a/r)^(k+1)` outside.
    pub fn from_surface_densities(degree: usize, densities: &[(f64, ScaledComplex)]) -> Result<Self> {
        let mut radii: Vec<f64> = densities.iter().map(|(a, _)| *a).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        if radii.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::Domain("density radii must be positive".into()));
        }
        let k = degree as i64;
        let n = (2 * k + 1) as f64;
        let mut bounds = vec![0.0];
        bounds.extend(radii.iter().copied());
        bounds.push(f64::INFINITY);
        let pieces = bounds
            .windows(2)
            .map(|w| {
                let (lo, hi) = (w[0], w[1]);
                let mut growing = ScaledComplex::ZERO;
                let mut decaying = ScaledComplex::ZERO;
                for (a, sigma) in densities {
                    if *a >= hi {
                        growing = growing + *sigma * ScaledComplex::powi_f64(*a, 1 - k) * (1.0 / n);
                    } else {
                        decaying = decaying + *sigma * ScaledComplex::powi_f64(*a, k + 2) * (1.0 / n);
                    }
                }
                RadialPiece {
                    inner: lo,
                    outer: hi,
                    growing,
                    decaying,
                    eps: Complex64::new(1.0, 0.0),
                }
            })
            .collect();
        Self::new(degree, pieces)
    }

    fn piece_at(&self, r: f64) -> &RadialPiece {
        self.pieces
            .iter()
            .find(|p| r < p.outer)
            .unwrap_or_else(|| self.pieces.last().expect("nonempty"))
    }

    pub fn value(&self, r: f64) -> ScaledComplex {
        self.piece_at(r).value(self.degree, r)
    }

    pub fn derivative(&self, r: f64) -> ScaledComplex {
        self.piece_at(r).derivative(self.degree, r)
    }

    /// Unweighted Dirichlet energy `int |grad(R Y)|^2`.
    pub fn dirichlet_energy(&self) -> Result<ScaledComplex> {
        self.pieces
            .iter()
            .map(|p| mode_shell_energy(self.degree, p.growing, p.decaying, p.inner, p.outer))
            .sum()
    }

    /// Dirichlet energy restricted to `lo < r < hi`.
    pub fn energy_between(&self, lo: f64, hi: f64) -> Result<ScaledComplex> {
        let mut total = ScaledComplex::ZERO;
        for p in &self.pieces {
            let a = p.inner.max(lo);
            let b = p.outer.min(hi);
            if a < b {
                total = total + mode_shell_energy(self.degree, p.growing, p.decaying, a, b)?;
            }
        }
        Ok(total)
    }

    pub fn interface_jumps(&self) -> Vec<InterfaceJump> {
        let k = self.degree;
        self.pieces
            .windows(2)
            .map(|w| {
                let r = w[0].outer;
                let (vi, vo) = (w[0].value(k, r), w[1].value(k, r));
                let (fi, fo) = (w[0].flux(k, r), w[1].flux(k, r));
                InterfaceJump {
                    radius: r,
                    value_jump: vo - vi,
                    flux_jump: fo - fi,
                    value_scale: vo.abs() + vi.abs(),
                    flux_scale: fo.abs() + fi.abs(),
                }
            })
            .collect()
    }

    /// Largest relative violation of "values continuous, flux jumps as prescribed".
    ///
    /// `expected` lists `(radius, flux jump)`; unlisted breakpoints must be flux-continuous.
    pub fn constraint_residual(&self, expected: &[(f64, ScaledComplex)]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in self.interface_jumps() {
            let want = expected
                .iter()
                .find(|(r, _)| (*r - j.radius).abs() <= 1e-14 * j.radius.max(1.0))
                .map(|(_, v)| *v)
                .unwrap_or(ScaledComplex::ZERO);
            if !j.value_scale.is_zero() {
                worst = worst.max(j.value_jump.ratio_abs(&j.value_scale));
            }
            let scale = j.flux_scale + want.abs();
            if !scale.is_zero() {
                worst = worst.max((j.flux_jump - want).ratio_abs(&scale));
            }
        }
        worst
    }

    pub fn scaled(&self, s: ScaledComplex) -> Self {
        Self {
            degree: self.degree,
            pieces: self
                .pieces
                .iter()
                .map(|p| RadialPiece {
                    growing: p.growing * s,
                    decaying: p.decaying * s,
                    ..*p
                })
                .collect(),
        }
    }
}
