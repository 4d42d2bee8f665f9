#![allow(dead_code)]

/// Legendre `P_n(x)` and its derivative by the three-term recurrence.
pub fn legendre_p_dp(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() < 1e-300 {
        // endpoint limit
        x.signum().powi(n as i32 + 1) * nf * (nf + 1.0) / 2.0
    } else {
        nf * (p0 - x * p1) / (1.0 - x * x)
    };
    (p1, dp)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_p_dp(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_p_dp(n, x);
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// Gauss-Legendre rule mapped to `[a, b]`.
pub fn gauss_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    gauss_legendre(n).into_iter().map(|(x, w)| (c + h * x, h * w)).collect()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn quadrature_integrates_polynomials() {
    let rule = gauss_on(8, 0.0, 2.0);
    let s: f64 = rule.iter().map(|(x, w)| w * x.powi(15)).sum();
    assert!(rel(s, 2f64.powi(16) / 16.0) < 1e-14);
}

use calr_core::{FieldEvaluator, LayeredConfig, LossRegion, SphericalPoint};

/// Fourth-order central difference of `f` at `x` with step `h`.
fn d4(f: impl Fn(f64) -> num_complex::Complex64, x: f64, h: f64) -> num_complex::Complex64 {
    (f(x - 2.0 * h) - f(x + 2.0 * h) + (f(x + h) - f(x - h)) * 8.0) / (12.0 * h)
}

/// `(eta/2) int_D |grad u|^2` by tensor Gauss quadrature in `(r, cos theta)`
/// and the trapezoid rule in `phi`, with gradients by finite differences of
/// the evaluated field.
pub fn energy_by_quadrature(ev: &FieldEvaluator, cfg: &LayeredConfig, q: f64, nodes: usize) -> f64 {
    let mut breaks = vec![(cfg.r_i, cfg.r_e)];
    if cfg.loss_region == LossRegion::WholeSpace {
        breaks = vec![(0.0, cfg.r_i), (cfg.r_i, cfg.r_e), (cfg.r_e, q)];
    }
    let interfaces = [cfg.r_i, cfg.r_e, q];
    // radial points and weights including the r^2 Jacobian
    let mut radial: Vec<(f64, f64)> = Vec::new();
    for (a, b) in breaks {
        radial.extend(gauss_on(nodes, a, b).into_iter().map(|(r, w)| (r, w * r * r)));
    }
    if cfg.loss_region == LossRegion::WholeSpace {
        // r = q / t on (0, 1]
        radial.extend(gauss_on(nodes, 0.0, 1.0).into_iter().map(|(t, w)| {
            let r = q / t;
            (r, w * r * r * q / (t * t))
        }));
    }
    let polar = gauss_legendre(nodes);
    let n_phi = 4;
    let mut total = 0.0;
    for &(r, wr) in &radial {
        let gap = interfaces.iter().map(|a| (r - a).abs()).fold(f64::INFINITY, f64::min);
        let h = (1e-3 * r).min(gap / 4.0);
        for &(x, wx) in &polar {
            let theta = x.acos();
            let s = theta.sin();
            for j in 0..n_phi {
                let phi = 2.0 * std::f64::consts::PI * j as f64 / n_phi as f64;
                let u = |rr: f64, tt: f64, pp: f64| ev.eval(SphericalPoint::new(rr, tt, pp)).unwrap().value;
                let ur = d4(|t| u(t, theta, phi), r, h);
                let ht = 1e-3;
                let ut = d4(|t| u(r, t, phi), theta, ht);
                let up = d4(|t| u(r, theta, t), phi, 1e-3);
                let g2 = ur.norm_sqr() + ut.norm_sqr() / (r * r) + up.norm_sqr() / (r * r * s * s);
                total += wr * wx * g2 * 2.0 * std::f64::consts::PI / n_phi as f64;
            }
        }
    }
    0.5 * cfg.eta * total
}

/// Admissible three-layer configuration with mixed-sign real permittivities.
pub fn random_config(rng: &mut rand_chacha::ChaCha8Rng) -> LayeredConfig {
    use rand::Rng;
    let r_i = rng.gen_range(0.5..2.0);
    let r_e = r_i * rng.gen_range(1.2..3.0);
    let mut eps = || {
        if rng.gen_bool(0.5) {
            num_complex::Complex64::new(rng.gen_range(0.2..5.0), 0.0)
        } else {
            num_complex::Complex64::new(-rng.gen_range(0.5..3.0), 0.0)
        }
    };
    let (c, s) = (eps(), eps());
    let m = num_complex::Complex64::new(rng.gen_range(0.5..3.0), 0.0);
    let region = if rng.gen_bool(0.5) { LossRegion::Shell } else { LossRegion::WholeSpace };
    LayeredConfig::new(r_i, r_e, c, s, m, rng.gen_range(0.05..1.0), region).unwrap()
}

/// Energy of `R(r) P_k(cos) sqrt((2k+1)/4pi)` by quadrature, with `R` and `R'` given.
pub fn zonal_energy(k: usize, radial: &[(f64, f64)], r: impl Fn(f64) -> (f64, f64)) -> f64 {
    let norm = (2 * k + 1) as f64 / (4.0 * std::f64::consts::PI);
    let mut total = 0.0;
    for &(x, wx) in &gauss_legendre(k + 4) {
        let (p, dp) = legendre_p_dp(k, x);
        let y2 = norm * p * p;
        // |d Y / d theta|^2 = (1 - x^2) P'(x)^2
        let yt2 = norm * (1.0 - x * x) * dp * dp;
        for &(rr, wr) in radial {
            let (v, dv) = r(rr);
            total += wr * wx * 2.0 * std::f64::consts::PI * (dv * dv * y2 + v * v * yt2 / (rr * rr)) * rr * rr;
        }
    }
    total
}
