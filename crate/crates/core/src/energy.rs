//! Dissipated energy, loss sweeps and blow-up classification.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::{LayeredConfig, LossRegion};
use crate::error::{Error, Result};
use crate::fit::{fit_line, LineFit};
use crate::modes::{solve_mode_closed_form, ModeCoefficients};
use crate::radial::mode_shell_energy;
use crate::scaled::ScaledComplex;
use crate::source::{SourceKind, SourceSpectrum};

/// Extra degrees examined when bounding the truncated remainder.
const TAIL_DEGREES: usize = 400;

/// `sqrt(r_e^3 / r_i)`.
pub fn critical_radius(cfg: &LayeredConfig) -> f64 {
    critical_radius_for(cfg.r_i, cfg.r_e)
}

/// The same formula on raw radii, without validating the geometry.
pub fn critical_radius_for(r_i: f64, r_e: f64) -> f64 {
    (r_e * r_e * r_e / r_i).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyBreakdown {
    pub eta: f64,
    pub k_eta: Option<usize>,
    pub total: ScaledComplex,
    pub per_mode: BTreeMap<usize, ScaledComplex>,
    /// Bound on the contribution of degrees above the truncation; may be infinite.
    pub tail_bound: f64,
}

impl EnergyBreakdown {
    pub fn total_f64(&self) -> f64 {
        self.total.to_f64()
    }

    /// The `n` largest per-degree contributions, largest first.
    pub fn top_modes(&self, n: usize) -> Vec<(usize, ScaledComplex)> {
        let mut v: Vec<(usize, ScaledComplex)> = self.per_mode.iter().map(|(k, e)| (*k, *e)).collect();
        v.sort_by(|a, b| b.1.cmp_abs(&a.1).then(a.0.cmp(&b.0)));
        v.truncate(n);
        v
    }
}

/// Energy of the unit-amplitude mode over the lossy region, before the `eta/2` factor.
pub(crate) fn lossy_mode_energy(cfg: &LayeredConfig, m: &ModeCoefficients, q: f64) -> Result<ScaledComplex> {
    let k = m.k;
    let shell = mode_shell_energy(k, m.b, m.c, cfg.r_i, cfg.r_e)?;
    match cfg.loss_region {
        LossRegion::Shell => Ok(shell),
        LossRegion::WholeSpace => {
            let core = mode_shell_energy(k, m.a, ScaledComplex::ZERO, 0.0, cfg.r_i)?;
            let near = mode_shell_energy(k, ScaledComplex::ONE, m.d, cfg.r_e, q)?;
            let far_coeff = ScaledComplex::powi_f64(q, 2 * k as i64 + 1) + m.d;
            let far = mode_shell_energy(k, ScaledComplex::ZERO, far_coeff, q, f64::INFINITY)?;
            Ok(core + shell + near + far)
        }
    }
}

/// Factor converting `|beta|^2` into the squared incoming amplitude.
fn incoming_factor(cfg: &LayeredConfig) -> f64 {
    1.0 / cfg.effective().matrix.norm_sqr()
}

fn check_support(cfg: &LayeredConfig, src: &SourceSpectrum) -> Result<()> {
    if !(src.support_radius > cfg.r_e) {
        return Err(Error::Domain(format!(
            "source radius {} must exceed r_e = {}",
            src.support_radius, cfg.r_e
        )));
    }
    Ok(())
}

/// Power dissipated in the lossy region, `(eta/2) int_D |grad u|^2`.
pub fn dissipated_energy(cfg: &LayeredConfig, src: &SourceSpectrum) -> Result<EnergyBreakdown> {
    cfg.validate()?;
    check_support(cfg, src)?;
    let q = src.support_radius;
    let weight = 0.5 * cfg.eta * incoming_factor(cfg);
    let mut per_mode = BTreeMap::new();
    for k in src.degrees() {
        let m = solve_mode_closed_form(cfg, k)?;
        let e = if cfg.eta == 0.0 {
            ScaledComplex::ZERO
        } else {
            lossy_mode_energy(cfg, &m, q)? * src.beta_power(k) * weight
        };
        per_mode.insert(k, e.re());
    }
    let total: ScaledComplex = per_mode.values().copied().sum();
    let tail_bound = tail_bound(cfg, src, weight, total);
    Ok(EnergyBreakdown {
        eta: cfg.eta,
        k_eta: None,
        total,
        per_mode,
        tail_bound,
    })
}

/// Remainder above `k_max` under the envelope `sum_l |beta_kl|^2 <= M^2 q^(-2k)`.
fn tail_bound(cfg: &LayeredConfig, src: &SourceSpectrum, weight: f64, total: ScaledComplex) -> f64 {
    if weight == 0.0 || src.is_empty() {
        return 0.0;
    }
    let q = src.support_radius;
    let envelope = src
        .degrees()
        .into_iter()
        .map(|k| src.beta_power(k) * ScaledComplex::powi_f64(q, 2 * k as i64))
        .max_by(|a, b| a.cmp_abs(b))
        .unwrap_or(ScaledComplex::ZERO);
    let mut tail = ScaledComplex::ZERO;
    let mut prev: Option<ScaledComplex> = None;
    for k in src.k_max + 1..=src.k_max + TAIL_DEGREES {
        let Ok(m) = solve_mode_closed_form(cfg, k) else {
            return f64::INFINITY;
        };
        let Ok(g) = lossy_mode_energy(cfg, &m, q) else {
            return f64::INFINITY;
        };
        let term = g * envelope * ScaledComplex::powi_f64(q, -2 * k as i64) * weight;
        tail = tail + term;
        if let Some(p) = prev {
            let ratio = term.ratio_abs(&p);
            if ratio < 0.9 && term.cmp_abs(&((total + tail) * 1e-17)).is_le() {
                return (tail + term * (ratio / (1.0 - ratio))).to_f64();
            }
        }
        prev = Some(term);
    }
    f64::INFINITY
}

/// Band rule linking the loss to the resonant degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KRule {
    /// `rho^k < eta <= rho^(k-1)` with `rho = r_i / r_e`.
    Shell,
    /// `r_e^(-k) < eta <= r_e^(-k+1)` with radii measured in units of `r_i`.
    WholeSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KSelection {
    pub k: usize,
    /// Set when `eta` lies above the first band and `k = 1` was forced.
    pub clamped: bool,
}

/// Degree whose band contains `eta`.
pub fn select_k_of_eta(eta: f64, cfg: &LayeredConfig, rule: KRule) -> Result<KSelection> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Domain(format!("loss must be positive (got {eta})")));
    }
    // Both rules use the same ratio once lengths are measured in units of r_i.
    let base = match rule {
        KRule::Shell | KRule::WholeSpace => cfg.r_i / cfg.r_e,
    };
    if eta > 1.0 {
        return Ok(KSelection { k: 1, clamped: true });
    }
    let guess = (eta.ln() / base.ln()).floor().max(0.0) as usize + 1;
    let mut k = guess.max(1);
    while base.powi(k as i32) >= eta {
        k += 1;
    }
    while k > 1 && base.powi(k as i32 - 1) < eta {
        k -= 1;
    }
    Ok(KSelection { k, clamped: false })
}

/// How the permittivities follow the selected degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MaterialLaw {
    /// Keep the template's permittivities.
    AsGiven,
    /// Core `(1+1/k)^2`, shell `-1-1/k`, matrix `1`.
    ResonantCoreShell,
    /// Shell `-1-1/k`; core and matrix from the template.
    TunedShell,
    /// Core and shell `-1-1/k`, matrix `1`.
    TunedCoreless,
    /// Every coefficient `1` and no loss, whatever the grid value.
    Vacuum,
}

impl MaterialLaw {
    pub fn apply(&self, base: &LayeredConfig, k: usize, eta: f64) -> LayeredConfig {
        let kf = k as f64;
        let plasmon = Complex64::new(-1.0 - 1.0 / kf, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let mut cfg = base.with_eta(eta);
        match self {
            MaterialLaw::AsGiven => {}
            MaterialLaw::ResonantCoreShell => {
                cfg.eps_c = Complex64::new((1.0 + 1.0 / kf).powi(2), 0.0);
                cfg.eps_s = plasmon;
                cfg.eps_m = one;
            }
            MaterialLaw::TunedShell => cfg.eps_s = plasmon,
            MaterialLaw::TunedCoreless => {
                cfg.eps_c = plasmon;
                cfg.eps_s = plasmon;
                cfg.eps_m = one;
            }
            MaterialLaw::Vacuum => {
                cfg.eps_c = one;
                cfg.eps_s = one;
                cfg.eps_m = one;
                cfg.eta = 0.0;
            }
        }
        cfg
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Coupling {
    /// Materials tuned to one degree for every loss value.
    Fixed(usize),
    /// Degree re-selected from each loss value.
    Adaptive(KRule),
}

/// Geometry plus a rule for the permittivities.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepTemplate {
    pub base: LayeredConfig,
    pub law: MaterialLaw,
}

impl SweepTemplate {
    /// Configuration used at one loss value, with the band selection when adaptive.
    pub fn config_at(&self, eta: f64, coupling: Coupling) -> Result<(LayeredConfig, Option<KSelection>)> {
        match coupling {
            Coupling::Fixed(k) => {
                if k == 0 {
                    return Err(Error::Domain("tuned degree must be at least 1".into()));
                }
                Ok((self.law.apply(&self.base, k, eta), None))
            }
            Coupling::Adaptive(rule) => {
                let sel = select_k_of_eta(eta, &self.base, rule)?;
                Ok((self.law.apply(&self.base, sel.k, eta), Some(sel)))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Blowup,
    Bounded,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Blowup => "Blowup",
            Verdict::Bounded => "Bounded",
            Verdict::Inconclusive => "Inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepPoint {
    pub eta: f64,
    pub selection: Option<KSelection>,
    pub result: std::result::Result<EnergyBreakdown, Error>,
}

impl SweepPoint {
    pub fn energy(&self) -> Option<f64> {
        self.result.as_ref().ok().map(|b| b.total_f64())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergySweep {
    pub points: Vec<SweepPoint>,
    /// Fit of `ln E` against the selected degree (adaptive) or `-ln eta` (fixed).
    pub growth_fit: Option<LineFit>,
    pub verdict: Verdict,
}

impl EnergySweep {
    /// Points with a finite positive energy, as `(eta, k_eta, E)`.
    pub fn valid(&self) -> Vec<(f64, Option<usize>, f64)> {
        self.points
            .iter()
            .filter_map(|p| {
                let e = p.energy()?;
                (e > 0.0 && e.is_finite()).then(|| (p.eta, p.selection.map(|s| s.k), e))
            })
            .collect()
    }

    /// Slope of `ln E` against `ln eta`.
    pub fn loglog_slope(&self) -> Option<f64> {
        let v = self.valid();
        let xs: Vec<f64> = v.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = v.iter().map(|p| p.2.ln()).collect();
        fit_line(&xs, &ys).map(|f| f.slope)
    }
}

fn check_grid(etas: &[f64]) -> Result<()> {
    if etas.is_empty() {
        return Err(Error::Domain("loss grid is empty".into()));
    }
    if etas.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::Domain("loss values must be positive".into()));
    }
    if etas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Domain("loss values must be strictly decreasing".into()));
    }
    Ok(())
}

/// Dissipated energy along a decreasing loss grid.
///
/// Points are evaluated in parallel; failures are kept on the point.
pub fn eta_sweep(
    template: &SweepTemplate,
    src: &SourceSpectrum,
    etas: &[f64],
    coupling: Coupling,
) -> Result<EnergySweep> {
    check_grid(etas)?;
    template.base.validate()?;
    check_support(&template.base, src)?;
    let points: Vec<SweepPoint> = etas
        .par_iter()
        .map(|&eta| match template.config_at(eta, coupling) {
            Err(e) => SweepPoint {
                eta,
                selection: None,
                result: Err(e),
            },
            Ok((cfg, selection)) => {
                let result = dissipated_energy(&cfg, src).map(|mut b| {
                    b.k_eta = selection.map(|s| s.k);
                    b
                });
                SweepPoint { eta, selection, result }
            }
        })
        .collect();
    let adaptive = matches!(coupling, Coupling::Adaptive(_));
    let (growth_fit, verdict) = classify_points(&points, adaptive);
    Ok(EnergySweep {
        points,
        growth_fit,
        verdict,
    })
}

fn classify_points(points: &[SweepPoint], adaptive: bool) -> (Option<LineFit>, Verdict) {
    let valid: Vec<(f64, f64)> = points
        .iter()
        .filter_map(|p| {
            let e = p.energy()?;
            if !(e > 0.0 && e.is_finite()) {
                return None;
            }
            let x = if adaptive {
                p.selection?.k as f64
            } else {
                -p.eta.ln()
            };
            Some((x, e))
        })
        .collect();
    let xs: Vec<f64> = valid.iter().map(|v| v.0).collect();
    let ys: Vec<f64> = valid.iter().map(|v| v.1.ln()).collect();
    let fit = fit_line(&xs, &ys);
    let n = valid.len();
    let Some(f) = fit else {
        return (None, Verdict::Inconclusive);
    };
    if n < 3 {
        return (fit, Verdict::Inconclusive);
    }
    let split = n / 3;
    let head = &valid[..split.max(1)];
    let tail = &valid[split..];
    let rising = tail.windows(2).all(|w| w[1].1 > w[0].1);
    if rising && f.slope > 0.0 && f.residual < 0.2 {
        return (fit, Verdict::Blowup);
    }
    let head_max = head.iter().map(|v| v.1).fold(f64::MIN, f64::max);
    let later_max = valid[split.max(1)..].iter().map(|v| v.1).fold(f64::MIN, f64::max);
    if later_max <= head_max * (1.0 + 1e-9) {
        return (fit, Verdict::Bounded);
    }
    (fit, Verdict::Inconclusive)
}

/// Position of a source relative to the critical radius, or growth of its density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SourceClass {
    InsideCritical,
    OutsideCritical,
    GrowthOK,
    GrowthFails,
}

/// Classifies a multipole source by its geometric decay rate against `1/r*`,
/// or a surface density by the trend of `|alpha_k|^2 (r_e^3/q^2)^k / k`.
///
/// Rates are read from a line fit over the upper half of the stored degrees.
pub fn classify_source(src: &SourceSpectrum, cfg: &LayeredConfig) -> Result<SourceClass> {
    let degrees: Vec<usize> = src.degrees();
    if degrees.len() < 6 {
        return Err(Error::Inconclusive(format!(
            "need at least 6 nonzero degrees to estimate a rate (got {})",
            degrees.len()
        )));
    }
    let upper = &degrees[degrees.len() / 2..];
    let xs: Vec<f64> = upper.iter().map(|&k| k as f64).collect();
    // lengths in units of r_i
    let re = cfg.r_e / cfg.r_i;
    let q = src.support_radius / cfg.r_i;
    match src.kind {
        SourceKind::Multipole => {
            let ys: Vec<f64> = upper
                .iter()
                .map(|&k| {
                    let s: ScaledComplex = src.modes_of_degree(k).map(|(m, _)| src.beta(m).abs()).sum();
                    // beta scales like r_i^(-k) under the normalization
                    s.ln_abs() + k as f64 * cfg.r_i.ln()
                })
                .collect();
            let f = fit_line(&xs, &ys).ok_or_else(|| Error::Inconclusive("degenerate fit".into()))?;
            let rate = f.slope.exp();
            let critical = (re * re * re).sqrt();
            Ok(if rate > 1.0 / critical {
                SourceClass::InsideCritical
            } else {
                SourceClass::OutsideCritical
            })
        }
        SourceKind::DeltaShell => {
            let growth = (re * re * re / (q * q)).ln();
            let ys: Vec<f64> = upper
                .iter()
                .map(|&k| src.alpha_power(k).ln_abs() + k as f64 * growth - (k as f64).ln())
                .collect();
            let f = fit_line(&xs, &ys).ok_or_else(|| Error::Inconclusive("degenerate fit".into()))?;
            Ok(if f.slope > 0.0 {
                SourceClass::GrowthOK
            } else {
                SourceClass::GrowthFails
            })
        }
    }
}
