//! Pointwise evaluation of the potential and the localized-resonance diagnostic.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::LayeredConfig;
use crate::energy::{critical_radius, dissipated_energy, Coupling, SweepTemplate};
use crate::error::{Error, Result};
use crate::harmonics::{eval_harmonic, ModeIndex};
use crate::modes::{solve_mode_closed_form, ModeCoefficients};
use crate::scaled::ScaledComplex;
use crate::source::SourceSpectrum;

/// Points on the probe ring.
pub const RING_POINTS: usize = 33;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphericalPoint {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(r: f64, theta: f64, phi: f64) -> Self {
        Self { r, theta, phi }
    }

    pub fn from_cartesian(x: [f64; 3]) -> Self {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        let theta = if r == 0.0 { 0.0 } else { (x[2] / r).clamp(-1.0, 1.0).acos() };
        Self {
            r,
            theta,
            phi: x[1].atan2(x[0]),
        }
    }

    pub fn to_cartesian(&self) -> [f64; 3] {
        let s = self.theta.sin();
        [
            self.r * s * self.phi.cos(),
            self.r * s * self.phi.sin(),
            self.r * self.theta.cos(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSample {
    pub point: SphericalPoint,
    pub value: Complex64,
    /// Newtonian potential of the source alone.
    pub newtonian: Complex64,
    pub anomaly: Complex64,
}

struct ModeTerm {
    index: ModeIndex,
    beta: ScaledComplex,
    /// Incoming amplitude `beta / eps_m`.
    incoming: ScaledComplex,
    coeffs: ModeCoefficients,
}

/// Mode solutions for one configuration and source, reusable across points.
pub struct FieldEvaluator {
    cfg: LayeredConfig,
    q: f64,
    terms: Vec<ModeTerm>,
}

impl FieldEvaluator {
    pub fn new(cfg: &LayeredConfig, src: &SourceSpectrum) -> Result<Self> {
        cfg.validate()?;
        if !(src.support_radius > cfg.r_e) {
            return Err(Error::Domain(format!(
                "source radius {} must exceed r_e = {}",
                src.support_radius, cfg.r_e
            )));
        }
        let em = ScaledComplex::from(cfg.effective().matrix);
        let mut terms = Vec::new();
        let mut solved: Option<ModeCoefficients> = None;
        for m in src.coefficients().keys() {
            let coeffs = match solved {
                Some(c) if c.k == m.k => c,
                _ => solve_mode_closed_form(cfg, m.k)?,
            };
            solved = Some(coeffs);
            let beta = src.beta(*m);
            terms.push(ModeTerm {
                index: *m,
                beta,
                incoming: beta / em,
                coeffs,
            });
        }
        Ok(Self {
            cfg: *cfg,
            q: src.support_radius,
            terms,
        })
    }

    pub fn config(&self) -> &LayeredConfig {
        &self.cfg
    }

    /// Radial factors of `u` and of the Newtonian potential for one mode.
    fn radial(&self, t: &ModeTerm, r: f64) -> (ScaledComplex, ScaledComplex) {
        let k = t.coeffs.k as i64;
        let grow = ScaledComplex::powi_f64(r, k);
        let decay = ScaledComplex::powi_f64(r, -k - 1);
        let c = &t.coeffs;
        if r > self.q {
            let qk = ScaledComplex::powi_f64(self.q, 2 * k + 1);
            let u = t.incoming * (qk + c.d) * decay;
            return (u, t.beta * qk * decay);
        }
        let newton = t.beta * grow;
        let u = if r <= self.cfg.r_i {
            t.incoming * c.a * grow
        } else if r <= self.cfg.r_e {
            t.incoming * (c.b * grow + c.c * decay)
        } else {
            t.incoming * (grow + c.d * decay)
        };
        (u, newton)
    }

    pub fn eval(&self, p: SphericalPoint) -> Result<FieldSample> {
        if !(p.r >= 0.0 && p.r.is_finite()) {
            return Err(Error::Domain(format!("radius must be finite and nonnegative (got {})", p.r)));
        }
        if (p.r - self.q).abs() <= 1e-12 * self.q {
            return Err(Error::SingularIntegrand(format!(
                "field has a kink on the source sphere r = {}",
                self.q
            )));
        }
        let mut u = ScaledComplex::ZERO;
        let mut f = ScaledComplex::ZERO;
        for t in &self.terms {
            let y = ScaledComplex::from(eval_harmonic(t.index, p.theta, p.phi)?);
            let (ru, rf) = self.radial(t, p.r);
            u = u + ru * y;
            f = f + rf * y;
        }
        let value = u.to_complex();
        let newtonian = f.to_complex();
        Ok(FieldSample {
            point: p,
            value,
            newtonian,
            anomaly: (u - f).to_complex(),
        })
    }
}

/// Potential at one point; solves every stored mode.
pub fn eval_field(cfg: &LayeredConfig, src: &SourceSpectrum, p: SphericalPoint) -> Result<FieldSample> {
    FieldEvaluator::new(cfg, src)?.eval(p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalrPoint {
    pub eta: f64,
    pub k_eta: Option<usize>,
    pub energy: f64,
    /// Largest `|u|` on the probe ring.
    pub sup_field: f64,
    /// `sup_field / sqrt(energy)`; `None` when the energy vanishes or the point failed.
    pub ratio: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CalrTrend {
    /// Strictly decreasing over the last five points.
    Decaying,
    NotDecaying,
    /// Some point has zero energy or failed.
    Undefined,
}

impl std::fmt::Display for CalrTrend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CalrTrend::Decaying => "Decaying",
            CalrTrend::NotDecaying => "NotDecaying",
            CalrTrend::Undefined => "Undefined",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalrDiagnostic {
    pub probe_radius: f64,
    pub points: Vec<CalrPoint>,
    pub trend: CalrTrend,
}

impl CalrDiagnostic {
    pub fn min_ratio(&self) -> Option<f64> {
        self.points.iter().filter_map(|p| p.ratio).reduce(f64::min)
    }
}

/// Default probe: `max(1.05 r*, 1.05 q)`.
pub fn default_probe_radius(cfg: &LayeredConfig, src: &SourceSpectrum) -> f64 {
    1.05 * critical_radius(cfg).max(src.support_radius)
}

fn ring_sup(ev: &FieldEvaluator, r: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for j in 0..RING_POINTS {
        let theta = std::f64::consts::PI * j as f64 / (RING_POINTS - 1) as f64;
        sup = sup.max(ev.eval(SphericalPoint::new(r, theta, 0.0))?.value.norm());
    }
    Ok(sup)
}

fn calr_point(
    template: &SweepTemplate,
    coupling: Coupling,
    src: &SourceSpectrum,
    eta: f64,
    probe: f64,
) -> Result<CalrPoint> {
    let (cfg, sel) = template.config_at(eta, coupling)?;
    let energy = dissipated_energy(&cfg, src)?.total_f64();
    let sup_field = ring_sup(&FieldEvaluator::new(&cfg, src)?, probe)?;
    let ratio = (energy > 0.0 && energy.is_finite()).then(|| sup_field / energy.sqrt());
    Ok(CalrPoint {
        eta,
        k_eta: sel.map(|s| s.k),
        energy,
        sup_field,
        ratio,
        error: None,
    })
}

/// `sup |u| / sqrt(E)` on a probe ring along a loss grid.
///
/// The ring is the `phi = 0` meridian; for sources of low degree its maximum
/// stands in for the maximum over the sphere.
pub fn calr_diagnostic(
    template: &SweepTemplate,
    coupling: Coupling,
    src: &SourceSpectrum,
    etas: &[f64],
    probe_radius: Option<f64>,
) -> Result<CalrDiagnostic> {
    template.base.validate()?;
    if etas.is_empty() {
        return Err(Error::Domain("loss grid is empty".into()));
    }
    let probe = probe_radius.unwrap_or_else(|| default_probe_radius(&template.base, src));
    if !(probe > template.base.r_e && probe.is_finite()) {
        return Err(Error::Domain(format!(
            "probe radius {probe} must exceed r_e = {}",
            template.base.r_e
        )));
    }
    let points: Vec<CalrPoint> = etas
        .par_iter()
        .map(|&eta| {
            calr_point(template, coupling, src, eta, probe).unwrap_or_else(|e| CalrPoint {
                eta,
                k_eta: None,
                energy: f64::NAN,
                sup_field: f64::NAN,
                ratio: None,
                error: Some(e.to_string()),
            })
        })
        .collect();
    let trend = if points.iter().any(|p| p.ratio.is_none()) || points.len() < 5 {
        CalrTrend::Undefined
    } else {
        let last: Vec<f64> = points[points.len() - 5..].iter().filter_map(|p| p.ratio).collect();
        if last.windows(2).all(|w| w[1] < w[0]) {
            CalrTrend::Decaying
        } else {
            CalrTrend::NotDecaying
        }
    };
    Ok(CalrDiagnostic {
        probe_radius: probe,
        points,
        trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LossRegion;
    use crate::energy::MaterialLaw;
    use crate::source::{CoefficientRule, SourceKind};

    fn source() -> SourceSpectrum {
        SourceSpectrum::from_rule(SourceKind::Multipole, 3.0, CoefficientRule::Geometric { base: 2.0 }, 6).unwrap()
    }

    #[test]
    fn homogeneous_field_is_newtonian() {
        let cfg = LayeredConfig::homogeneous(1.0, 2.0, 0.0, LossRegion::Shell).unwrap();
        let ev = FieldEvaluator::new(&cfg, &source()).unwrap();
        for r in [0.3, 1.5, 2.5, 4.0] {
            let s = ev.eval(SphericalPoint::new(r, 0.7, 0.3)).unwrap();
            assert!(s.anomaly.norm() <= 1e-12 * s.newtonian.norm().max(1.0));
        }
    }

    #[test]
    fn kink_on_source_sphere() {
        let cfg = LayeredConfig::homogeneous(1.0, 2.0, 0.1, LossRegion::Shell).unwrap();
        assert!(matches!(
            eval_field(&cfg, &source(), SphericalPoint::new(3.0, 0.2, 0.0)),
            Err(Error::SingularIntegrand(_))
        ));
    }

    #[test]
    fn continuous_across_interfaces() {
        let cfg = LayeredConfig::real(1.0, 2.0, [2.0, -1.2, 1.0], 0.05, LossRegion::Shell).unwrap();
        let ev = FieldEvaluator::new(&cfg, &source()).unwrap();
        for r in [1.0, 2.0] {
            let lo = ev.eval(SphericalPoint::new(r * (1.0 - 1e-13), 0.4, 0.0)).unwrap().value;
            let hi = ev.eval(SphericalPoint::new(r * (1.0 + 1e-13), 0.4, 0.0)).unwrap().value;
            assert!((lo - hi).norm() <= 1e-8 * lo.norm().max(1.0));
        }
    }

    #[test]
    fn cartesian_round_trip() {
        let p = SphericalPoint::new(2.0, 0.9, -1.2);
        let back = SphericalPoint::from_cartesian(p.to_cartesian());
        assert!((back.r - 2.0).abs() < 1e-14 && (back.theta - 0.9).abs() < 1e-14 && (back.phi + 1.2).abs() < 1e-14);
    }

    #[test]
    fn zero_loss_is_undefined() {
        let base = LayeredConfig::homogeneous(1.0, 2.0, 0.0, LossRegion::Shell).unwrap();
        let t = SweepTemplate { base, law: MaterialLaw::AsGiven };
        let d = calr_diagnostic(&t, Coupling::Fixed(1), &source(), &[0.0], None).unwrap();
        assert_eq!(d.points[0].energy, 0.0);
        assert_eq!(d.trend, CalrTrend::Undefined);
        assert!(calr_diagnostic(&t, Coupling::Fixed(1), &source(), &[0.1], Some(1.5)).is_err());
    }
}
