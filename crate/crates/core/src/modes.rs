//! Per-degree transmission problem of the three-layer sphere.
//!
//! For an incoming field `r^k Y` the solution is
//! `a r^k` in the core, `b r^k + c r^(-k-1)` in the shell and
//! `r^k + d r^(-k-1)` in the matrix.

use num_complex::Complex64;

use crate::config::LayeredConfig;
use crate::error::{Error, Result};
use crate::linalg::{norm1, solve_tridiagonal, Lu};
use crate::scaled::ScaledComplex;

/// Relative size of the denominator below which a degree is treated as resonant.
pub const SINGULAR_RELATIVE: f64 = 1e-13;
/// Absolute floor on the denominator modulus.
pub const SINGULAR_ABSOLUTE: f64 = 1e-280;
/// Condition-number ceiling for the 4x4 interface system.
pub const SINGULAR_CONDITION: f64 = 1e13;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeCoefficients {
    pub k: usize,
    pub a: ScaledComplex,
    pub b: ScaledComplex,
    pub c: ScaledComplex,
    pub d: ScaledComplex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeDiagnostics {
    pub denominator: ScaledComplex,
    pub residual: f64,
    pub condition: f64,
}

impl ModeCoefficients {
    /// Largest relative mismatch in the four interface conditions.
    pub fn transmission_residual(&self, cfg: &LayeredConfig) -> f64 {
        let e = cfg.effective();
        let k = self.k as i64;
        let kf = self.k as f64;
        let kp = kf + 1.0;
        let p = |r: f64, n: i64| ScaledComplex::powi_f64(r, n);
        let (ri, re) = (cfg.r_i, cfg.r_e);

        let rel = |terms: &[ScaledComplex]| -> f64 {
            let sum: ScaledComplex = terms.iter().copied().sum();
            let scale: ScaledComplex = terms.iter().map(|t| t.abs()).sum();
            if scale.is_zero() {
                0.0
            } else {
                sum.ratio_abs(&scale)
            }
        };

        let v_i = rel(&[
            self.a * p(ri, k),
            -(self.b * p(ri, k)),
            -(self.c * p(ri, -k - 1)),
        ]);
        let v_e = rel(&[
            self.b * p(re, k),
            self.c * p(re, -k - 1),
            -p(re, k),
            -(self.d * p(re, -k - 1)),
        ]);
        let f_i = rel(&[
            self.a * p(ri, k - 1) * (e.core * kf),
            -(self.b * p(ri, k - 1) * (e.shell * kf)),
            self.c * p(ri, -k - 2) * (e.shell * kp),
        ]);
        let f_e = rel(&[
            self.b * p(re, k - 1) * (e.shell * kf),
            -(self.c * p(re, -k - 2) * (e.shell * kp)),
            -(p(re, k - 1) * (e.matrix * kf)),
            self.d * p(re, -k - 2) * (e.matrix * kp),
        ]);
        v_i.max(v_e).max(f_i).max(f_e)
    }

    /// Identity response of a homogeneous medium.
    pub fn identity(k: usize) -> Self {
        Self {
            k,
            a: ScaledComplex::ONE,
            b: ScaledComplex::ONE,
            c: ScaledComplex::ZERO,
            d: ScaledComplex::ZERO,
        }
    }
}

fn check_degree(k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::Domain("degree 0 is excluded by the zero-mean source".into()));
    }
    Ok(())
}

struct Denominator {
    value: ScaledComplex,
    scale: ScaledComplex,
}

fn denominator(cfg: &LayeredConfig, k: usize) -> Denominator {
    let e = cfg.effective();
    let (ec, es, em) = (e.core, e.shell, e.matrix);
    let kf = k as f64;
    let kp = kf + 1.0;
    let s = ScaledComplex::powi_f64(cfg.rho(), 2 * k as i64 + 1);
    let f1 = es * kp + ec * kf;
    let f2 = em * kp + es * kf;
    let value = s * ((es - ec) * (es - em) * (kf * kp)) - ScaledComplex::from(f1 * f2);
    let scale = s * ((es.norm() + ec.norm()) * (es.norm() + em.norm()) * kf * kp)
        + ScaledComplex::from_f64((kp * es.norm() + kf * ec.norm()) * (kp * em.norm() + kf * es.norm()));
    Denominator { value, scale }
}

/// Modulus of the common denominator of the closed-form coefficients.
pub fn denominator_magnitude(cfg: &LayeredConfig, k: usize) -> ScaledComplex {
    denominator(cfg, k).value.abs()
}

/// Coefficients from the explicit formulas.
pub fn solve_mode_closed_form(cfg: &LayeredConfig, k: usize) -> Result<ModeCoefficients> {
    check_degree(k)?;
    let e = cfg.effective();
    let (ec, es, em) = (e.core, e.shell, e.matrix);
    let den = denominator(cfg, k);
    let d_abs = den.value.abs();
    if d_abs.cmp_abs(&ScaledComplex::from_f64(SINGULAR_ABSOLUTE)).is_lt()
        || d_abs.cmp_abs(&(den.scale * SINGULAR_RELATIVE)).is_le()
    {
        return Err(Error::ModeSingular {
            k,
            condition: None,
            detail: format!(
                "denominator {} is negligible against its terms {}",
                den.value, den.scale
            ),
        });
    }
    let kf = k as f64;
    let kp = kf + 1.0;
    let n = 2.0 * kf + 1.0;
    let ni = 2 * k as i64 + 1;
    let s = ScaledComplex::powi_f64(cfg.rho(), ni);
    let f1 = es * kp + ec * kf;
    let dv = den.value;

    let a = -(ScaledComplex::from(em * es * (n * n)) / dv);
    let b = -(ScaledComplex::from(em * f1 * n) / dv);
    let c = -(ScaledComplex::powi_f64(cfg.r_i, ni) * (em * (es - ec) * (kf * n)) / dv);
    let bracket = ScaledComplex::from((em - es) * f1) + s * ((es - ec) * (em * kf + es * kp));
    let d = -(ScaledComplex::powi_f64(cfg.r_e, ni) * bracket * kf / dv);
    Ok(ModeCoefficients { k, a, b, c, d })
}

/// Coefficients from a direct solve of the four interface conditions.
///
/// The unknowns are `a`, `b`, `c r_i^(-2k-1)` and `d r_e^(-2k-1)`, which keeps
/// every matrix entry of order one.
pub fn solve_mode_general(cfg: &LayeredConfig, k: usize) -> Result<(ModeCoefficients, ModeDiagnostics)> {
    check_degree(k)?;
    let e = cfg.effective();
    let (ec, es, em) = (e.core, e.shell, e.matrix);
    let kf = k as f64;
    let kp = kf + 1.0;
    let ni = 2 * k as i64 + 1;
    let s = ScaledComplex::powi_f64(cfg.rho(), ni).to_f64();
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let m = [
        [one, -one, -one, z],
        [ec * kf, -es * kf, es * kp, z],
        [z, one, one * s, -one],
        [z, es * kf, -es * (kp * s), em * kp],
    ];
    let rhs = [z, z, one, em * kf];
    let singular = |condition: Option<f64>| Error::ModeSingular {
        k,
        condition,
        detail: match condition {
            Some(c) => format!("interface system condition estimate {c:.3e}"),
            None => "interface system has a zero pivot".into(),
        },
    };
    let lu = Lu::factor(m).ok_or_else(|| singular(None))?;
    let condition = norm1(&m) * lu.inverse_norm1();
    if !(condition < SINGULAR_CONDITION) {
        return Err(singular(Some(condition)));
    }
    let x = lu.solve(rhs);
    let coeffs = ModeCoefficients {
        k,
        a: x[0].into(),
        b: x[1].into(),
        c: ScaledComplex::from(x[2]) * ScaledComplex::powi_f64(cfg.r_i, ni),
        d: ScaledComplex::from(x[3]) * ScaledComplex::powi_f64(cfg.r_e, ni),
    };
    let diag = ModeDiagnostics {
        denominator: denominator(cfg, k).value,
        residual: coeffs.transmission_residual(cfg),
        condition,
    };
    Ok((coeffs, diag))
}

/// Grid size of the coarsest level used by [`radial_oracle`].
pub const ORACLE_BASE_POINTS: usize = 4000;
/// Largest degree the finite-difference oracle is trusted for.
pub const ORACLE_MAX_DEGREE: usize = 20;

/// Finite-volume solution of the radial problem on one grid of about `points` nodes.
///
/// The source is a density on `r = q` scaled so the incoming field has unit
/// amplitude; the coefficients are then read off by least squares per layer.
pub fn radial_fd_solve(cfg: &LayeredConfig, k: usize, q: f64, points: usize) -> Result<ModeCoefficients> {
    check_degree(k)?;
    if k > ORACLE_MAX_DEGREE {
        return Err(Error::Domain(format!(
            "radial oracle supports degrees up to {ORACLE_MAX_DEGREE} (got {k})"
        )));
    }
    if !(q > cfg.r_e) {
        return Err(Error::Domain(format!("source radius {q} must exceed r_e = {}", cfg.r_e)));
    }
    let r_out = 20.0 * q;
    let per = (points / 4).max(8);
    let mut r = Vec::with_capacity(4 * per + 1);
    let push_segment = |a: f64, b: f64, geometric: bool, r: &mut Vec<f64>| {
        for j in 0..per {
            let t = j as f64 / per as f64;
            let x = if geometric {
                a * (b / a).powf(t)
            } else {
                a + (b - a) * (0.5 * t + 0.25 * (1.0 - (std::f64::consts::PI * t).cos()))
            };
            r.push(x);
        }
    };
    push_segment(0.0, cfg.r_i, false, &mut r);
    push_segment(cfg.r_i, cfg.r_e, false, &mut r);
    push_segment(cfg.r_e, q, false, &mut r);
    push_segment(q, r_out, true, &mut r);
    r.push(r_out);
    let n = r.len();
    let q_node = 3 * per;

    let eff = cfg.effective();
    let eps_cell = |lo: f64, hi: f64| cfg.eps_at(0.5 * (lo + hi));
    let kk = (k * (k + 1)) as f64;
    let zero = Complex64::new(0.0, 0.0);
    // unknowns are nodes 1..n-1 (R(0) = 0)
    let m = n - 1;
    let mut lower = vec![zero; m - 1];
    let mut diag = vec![zero; m];
    let mut upper = vec![zero; m - 1];
    let mut rhs = vec![zero; m];
    let sigma = -(2.0 * k as f64 + 1.0) * q.powi(k as i32 - 1) * eff.matrix;
    for j in 1..n {
        let row = j - 1;
        let hl = r[j] - r[j - 1];
        let el = eps_cell(r[j - 1], r[j]);
        let wl = el * (r[j - 1] * r[j]) / hl;
        let mut dsum = -wl - kk * el * hl * 0.5;
        if row > 0 {
            lower[row - 1] = wl;
        }
        if j + 1 < n {
            let hr = r[j + 1] - r[j];
            let er = eps_cell(r[j], r[j + 1]);
            let wr = er * (r[j] * r[j + 1]) / hr;
            dsum += -wr - kk * er * hr * 0.5;
            upper[row] = wr;
        } else {
            // Robin closure R' = -(k+1) R / r at the outer boundary
            dsum += -eff.matrix * ((k + 1) as f64 * r[j]);
        }
        diag[row] = dsum;
        if j == q_node {
            rhs[row] = sigma * (q * q);
        }
    }
    let sol = solve_tridiagonal(&lower, &diag, &upper, &rhs)
        .ok_or_else(|| Error::OracleFailure("zero pivot in radial system".into()))?;
    let value = |j: usize| if j == 0 { zero } else { sol[j - 1] };

    let kf = k as f64;
    let core = fit_layer(&r, &value, 1, per, &[Box::new(|x: f64| (x / cfg.r_i).powf(kf))])?;
    let shell = fit_layer(
        &r,
        &value,
        per,
        2 * per,
        &[
            Box::new(|x: f64| (x / cfg.r_e).powf(kf)),
            Box::new(|x: f64| (x / cfg.r_i).powf(-kf - 1.0)),
        ],
    )?;
    let matrix = fit_layer(
        &r,
        &value,
        2 * per,
        3 * per,
        &[
            Box::new(|x: f64| (x / q).powf(kf)),
            Box::new(|x: f64| (x / cfg.r_e).powf(-kf - 1.0)),
        ],
    )?;
    let incoming = ScaledComplex::from(matrix[0]) * ScaledComplex::powi_f64(q, -(k as i64));
    let ki = k as i64;
    let a = ScaledComplex::from(core[0]) * ScaledComplex::powi_f64(cfg.r_i, -ki);
    let b = ScaledComplex::from(shell[0]) * ScaledComplex::powi_f64(cfg.r_e, -ki);
    let c = ScaledComplex::from(shell[1]) * ScaledComplex::powi_f64(cfg.r_i, ki + 1);
    let d = ScaledComplex::from(matrix[1]) * ScaledComplex::powi_f64(cfg.r_e, ki + 1);
    Ok(ModeCoefficients {
        k,
        a: a / incoming,
        b: b / incoming,
        c: c / incoming,
        d: d / incoming,
    })
}

type Basis<'a> = Box<dyn Fn(f64) -> f64 + 'a>;

/// Least-squares coefficients of `basis` over nodes `lo..=hi`.
fn fit_layer(
    r: &[f64],
    value: &dyn Fn(usize) -> Complex64,
    lo: usize,
    hi: usize,
    basis: &[Basis<'_>],
) -> Result<Vec<Complex64>> {
    let p = basis.len();
    let mut g = vec![vec![0.0f64; p]; p];
    let mut rhs = vec![Complex64::new(0.0, 0.0); p];
    for j in lo..=hi {
        let phi: Vec<f64> = basis.iter().map(|f| f(r[j])).collect();
        for a in 0..p {
            for b in 0..p {
                g[a][b] += phi[a] * phi[b];
            }
            rhs[a] += value(j) * phi[a];
        }
    }
    match p {
        1 => Ok(vec![rhs[0] / g[0][0]]),
        2 => {
            let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
            if det.abs() <= 1e-14 * g[0][0] * g[1][1] {
                return Err(Error::OracleFailure("layer fit is ill-conditioned".into()));
            }
            Ok(vec![
                (rhs[0] * g[1][1] - rhs[1] * g[0][1]) / det,
                (rhs[1] * g[0][0] - rhs[0] * g[1][0]) / det,
            ])
        }
        _ => unreachable!("layers carry one or two basis functions"),
    }
}

fn coefficient_vector(m: &ModeCoefficients) -> [ScaledComplex; 4] {
    [m.a, m.b, m.c, m.d]
}

/// Largest coefficient-wise relative difference between two solutions.
pub fn relative_difference(x: &ModeCoefficients, y: &ModeCoefficients) -> f64 {
    coefficient_vector(x)
        .iter()
        .zip(coefficient_vector(y).iter())
        .map(|(p, q)| {
            let scale = p.abs() + q.abs();
            if scale.is_zero() {
                0.0
            } else {
                (*p - *q).ratio_abs(&scale) * 2.0
            }
        })
        .fold(0.0, f64::max)
}

/// Three-level Richardson-extrapolated finite-difference solution.
///
/// Fails if successive differences do not shrink at a second-order rate.
pub fn radial_oracle(cfg: &LayeredConfig, k: usize, q: f64) -> Result<ModeCoefficients> {
    let n = ORACLE_BASE_POINTS;
    let c1 = radial_fd_solve(cfg, k, q, n)?;
    let c2 = radial_fd_solve(cfg, k, q, 2 * n)?;
    let c4 = radial_fd_solve(cfg, k, q, 4 * n)?;
    let v1 = coefficient_vector(&c1);
    let v2 = coefficient_vector(&c2);
    let v4 = coefficient_vector(&c4);
    let mut out = [ScaledComplex::ZERO; 4];
    for i in 0..4 {
        let e12 = (v1[i] - v2[i]).abs();
        let e24 = (v2[i] - v4[i]).abs();
        let size = v4[i].abs() + ScaledComplex::ONE;
        let resolved = e24.cmp_abs(&(size * 1e-12)).is_gt();
        if resolved {
            let ratio = e12.ratio_abs(&e24);
            if !(2.5..=6.0).contains(&ratio) {
                return Err(Error::OracleFailure(format!(
                    "refinement ratio {ratio:.3} for coefficient {i} of degree {k} is not second order"
                )));
            }
        }
        out[i] = (v4[i] * 4.0 - v2[i]) * (1.0 / 3.0);
    }
    Ok(ModeCoefficients {
        k,
        a: out[0],
        b: out[1],
        c: out[2],
        d: out[3],
    })
}
