//! Declarative scenario files.

use calr_core::{
    CoefficientRule, Coupling, KRule, LayeredConfig, LossRegion, MaterialLaw, SourceKind,
    SourceSpectrum, SweepTemplate,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Result this scenario reproduces, e.g. "3.1".
    #[serde(default)]
    pub theorem: Option<String>,
    #[serde(default)]
    pub expected_verdict: Option<ExpectedVerdict>,
    #[serde(default)]
    pub description: Option<String>,
    pub geometry: Geometry,
    pub materials: Materials,
    pub loss_region: Region,
    pub source: Source,
    pub eta_grid: EtaGrid,
    pub outputs: Vec<Output>,
    #[serde(default)]
    pub bounds: Vec<BoundFamily>,
    #[serde(default)]
    pub lambda: Lambda,
    #[serde(default)]
    pub probe_radius: Option<f64>,
    #[serde(default)]
    pub profile: Option<Profile>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExpectedVerdict {
    Blowup,
    Bounded,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    pub r_i: f64,
    pub r_e: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Materials {
    /// Core `1`, shell `-1`, matrix `1`.
    Standard,
    /// Core and shell `-1-1/k0`.
    Coreless { k0: usize },
    /// Shell `-1-1/k(eta)`; core `(1+1/k)^2` unless given.
    AdaptiveShell {
        #[serde(default)]
        eps_c: Option<f64>,
    },
    /// Shell `-1-1/k0`; core `(1+1/k0)^2` unless given.
    FixedShell {
        k0: usize,
        #[serde(default)]
        eps_c: Option<f64>,
    },
    /// All coefficients `1` and no loss.
    Homogeneous,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Shell,
    WholeSpace,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Multipole,
    DeltaShell,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// `base^(-k)` for every degree.
    Geometric { base: f64 },
    Constant { value: f64 },
    Single { k: usize, #[serde(default)] l: i64, value: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Source {
    pub kind: Kind,
    pub q: f64,
    pub rule: Rule,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
}

fn default_k_max() -> usize {
    calr_core::DEFAULT_K_MAX
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridRule {
    /// Band midpoints `(r_i/r_e)^(j-1/2)` lying in `[stop, start]`.
    BandCentered,
    /// Log-spaced, both ends included.
    Geometric { points: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaGrid {
    pub start: f64,
    pub stop: f64,
    pub rule: GridRule,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    EnergySweep,
    Bounds,
    FieldProfile,
    CalrDiagnostic,
}

impl Output {
    pub fn file_name(&self) -> &'static str {
        match self {
            Output::EnergySweep => "energy_sweep.csv",
            Output::Bounds => "bounds.csv",
            Output::FieldProfile => "field_profile.csv",
            Output::CalrDiagnostic => "calr_diagnostic.csv",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    PrimalNr1,
    PrimalCrcFixed,
    PrimalCrcAdaptive,
    DualR1,
    DualR2,
}

impl BoundFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BoundFamily::PrimalNr1 => "primal_nr1",
            BoundFamily::PrimalCrcFixed => "primal_crc_fixed",
            BoundFamily::PrimalCrcAdaptive => "primal_crc_adaptive",
            BoundFamily::DualR1 => "dual_r1",
            BoundFamily::DualR2 => "dual_r2",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda {
    #[default]
    Optimal,
    InverseSqrtEta,
    Fixed(f64),
}

impl From<Lambda> for calr_core::LambdaChoice {
    fn from(l: Lambda) -> Self {
        match l {
            Lambda::Optimal => Self::Optimal,
            Lambda::InverseSqrtEta => Self::InverseSqrtEta,
            Lambda::Fixed(x) => Self::Fixed(x),
        }
    }
}

/// Radial line of field samples at one loss value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub phi: f64,
    /// Defaults to the last grid value.
    #[serde(default)]
    pub eta: Option<f64>,
}

/// A scenario field that failed validation.
#[derive(Debug, thiserror::Error)]
#[error("{field}: {message}")]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

fn bad(field: &str, message: impl Into<String>) -> FieldError {
    FieldError {
        field: field.into(),
        message: message.into(),
    }
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, FieldError> {
        serde_json::from_str(text).map_err(|e| bad("scenario", e.to_string()))
    }

    /// Structural checks that do not need the numerical library.
    pub fn validate(&self) -> Result<(), FieldError> {
        if self.name.trim().is_empty() {
            return Err(bad("name", "must not be empty"));
        }
        let g = self.geometry;
        if !(g.r_i > 0.0 && g.r_i.is_finite()) {
            return Err(bad("geometry.r_i", "must be positive"));
        }
        if !(g.r_e > g.r_i && g.r_e.is_finite()) {
            return Err(bad("geometry.r_e", "must exceed r_i"));
        }
        if !(self.source.q > g.r_e && self.source.q.is_finite()) {
            return Err(bad("source.q", "must exceed r_e"));
        }
        if self.source.k_max == 0 {
            return Err(bad("source.k_max", "must be at least 1"));
        }
        match self.materials {
            Materials::Coreless { k0 } | Materials::FixedShell { k0, .. } if k0 == 0 => {
                return Err(bad("materials.k0", "must be at least 1"));
            }
            Materials::AdaptiveShell { eps_c: Some(e) } | Materials::FixedShell { eps_c: Some(e), .. }
                if !(e.is_finite() && e != 0.0) =>
            {
                return Err(bad("materials.eps_c", "must be finite and nonzero"));
            }
            _ => {}
        }
        let grid = self.eta_grid;
        if !(grid.start > 0.0 && grid.start.is_finite()) {
            return Err(bad("eta_grid.start", "must be positive"));
        }
        if !(grid.stop > 0.0 && grid.stop.is_finite()) {
            return Err(bad("eta_grid.stop", "must be positive"));
        }
        if grid.start <= grid.stop {
            return Err(bad("eta_grid.start", "must exceed eta_grid.stop (the grid runs toward zero loss)"));
        }
        if let GridRule::Geometric { points } = grid.rule {
            if points < 2 {
                return Err(bad("eta_grid.rule.geometric.points", "need at least 2 points"));
            }
        }
        if self.etas().is_empty() {
            return Err(bad("eta_grid", "contains no band midpoint"));
        }
        if self.outputs.is_empty() {
            return Err(bad("outputs", "request at least one output"));
        }
        if self.outputs.contains(&Output::Bounds) && self.bounds.is_empty() {
            return Err(bad("bounds", "the bounds output needs at least one family"));
        }
        if let Some(p) = self.probe_radius {
            if !(p > g.r_e && p.is_finite()) {
                return Err(bad("probe_radius", "must exceed r_e"));
            }
        }
        if let Some(p) = self.profile {
            if !(p.r_min >= 0.0 && p.r_max > p.r_min && p.r_max.is_finite()) {
                return Err(bad("profile.r_max", "need 0 <= r_min < r_max"));
            }
            if p.points < 2 {
                return Err(bad("profile.points", "need at least 2 points"));
            }
        } else if self.outputs.contains(&Output::FieldProfile) {
            return Err(bad("profile", "the field_profile output needs a profile"));
        }
        Ok(())
    }

    pub fn etas(&self) -> Vec<f64> {
        let g = self.eta_grid;
        match g.rule {
            GridRule::Geometric { points } => {
                let (a, b) = (g.start.ln(), g.stop.ln());
                (0..points)
                    .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
                    .collect()
            }
            GridRule::BandCentered => {
                let rho = self.geometry.r_i / self.geometry.r_e;
                let slack = 1e-9;
                (1..10_000)
                    .map(|j| rho.powf(j as f64 - 0.5))
                    .take_while(|e| *e >= g.stop * (1.0 - slack))
                    .filter(|e| *e <= g.start * (1.0 + slack))
                    .collect()
            }
        }
    }

    pub fn region(&self) -> LossRegion {
        match self.loss_region {
            Region::Shell => LossRegion::Shell,
            Region::WholeSpace => LossRegion::WholeSpace,
        }
    }

    /// Sweep template and coupling described by the materials.
    pub fn template(&self) -> calr_core::Result<(SweepTemplate, Coupling)> {
        let g = self.geometry;
        let region = self.region();
        let rule = match region {
            LossRegion::Shell => KRule::Shell,
            LossRegion::WholeSpace => KRule::WholeSpace,
        };
        let with_core = |c: Option<f64>| -> calr_core::Result<(LayeredConfig, MaterialLaw)> {
            match c {
                None => Ok((LayeredConfig::homogeneous(g.r_i, g.r_e, 0.0, region)?, MaterialLaw::ResonantCoreShell)),
                Some(e) => {
                    let mut cfg = LayeredConfig::homogeneous(g.r_i, g.r_e, 0.0, region)?;
                    cfg.eps_c = Complex64::new(e, 0.0);
                    Ok((cfg, MaterialLaw::TunedShell))
                }
            }
        };
        let (base, law, coupling) = match self.materials {
            Materials::Standard => (
                LayeredConfig::real(g.r_i, g.r_e, [1.0, -1.0, 1.0], 0.0, region)?,
                MaterialLaw::AsGiven,
                Coupling::Fixed(1),
            ),
            Materials::Homogeneous => (
                LayeredConfig::homogeneous(g.r_i, g.r_e, 0.0, region)?,
                MaterialLaw::Vacuum,
                Coupling::Fixed(1),
            ),
            Materials::Coreless { k0 } => (
                LayeredConfig::homogeneous(g.r_i, g.r_e, 0.0, region)?,
                MaterialLaw::TunedCoreless,
                Coupling::Fixed(k0),
            ),
            Materials::AdaptiveShell { eps_c } => {
                let (b, l) = with_core(eps_c)?;
                (b, l, Coupling::Adaptive(rule))
            }
            Materials::FixedShell { k0, eps_c } => {
                let (b, l) = with_core(eps_c)?;
                (b, l, Coupling::Fixed(k0))
            }
        };
        Ok((SweepTemplate { base, law }, coupling))
    }

    pub fn spectrum(&self, k_max_override: Option<usize>) -> calr_core::Result<SourceSpectrum> {
        let s = self.source;
        let kind = match s.kind {
            Kind::Multipole => SourceKind::Multipole,
            Kind::DeltaShell => SourceKind::DeltaShell,
        };
        let rule = match s.rule {
            Rule::Geometric { base } => CoefficientRule::Geometric { base },
            Rule::Constant { value } => CoefficientRule::Constant { value },
            Rule::Single { k, l, value } => CoefficientRule::Single { k, l, value },
        };
        SourceSpectrum::from_rule(kind, s.q, rule, k_max_override.unwrap_or(s.k_max))
    }
}
