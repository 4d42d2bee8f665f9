//! Sources supported on the sphere `|x| = q`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::harmonics::ModeIndex;
use crate::scaled::ScaledComplex;

pub const DEFAULT_K_MAX: usize = 64;

/// How the stored coefficients are to be read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SourceKind {
    /// Surface density `sum alpha_kl Y_kl` on the sphere of radius `q`.
    DeltaShell,
    /// Coefficients `beta_kl` of the Newtonian potential `beta r^k Y_kl` inside `r < q`.
    Multipole,
}

/// Generator for zonal coefficient sequences.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientRule {
    /// `base^(-k)` at order zero for every degree.
    Geometric { base: f64 },
    /// The same value at order zero for every degree.
    Constant { value: f64 },
    /// A single harmonic.
    Single { k: usize, l: i64, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SourceSpectrum {
    pub support_radius: f64,
    pub kind: SourceKind,
    pub k_max: usize,
    coeffs: BTreeMap<ModeIndex, ScaledComplex>,
    rule: Option<CoefficientRule>,
}

impl SourceSpectrum {
    pub fn new(
        kind: SourceKind,
        support_radius: f64,
        k_max: usize,
        coeffs: BTreeMap<ModeIndex, ScaledComplex>,
    ) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "support radius must be positive (got {support_radius})"
            )));
        }
        let mut kept = BTreeMap::new();
        for (m, v) in coeffs {
            m.validate()?;
            if v.is_zero() {
                continue;
            }
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("coefficient of {m:?} is not finite")));
            }
            if m.k == 0 {
                return Err(Error::InvalidConfig(
                    "source must have zero mean (degree 0 coefficient must vanish)".into(),
                ));
            }
            if m.k > k_max {
                return Err(Error::InvalidConfig(format!(
                    "degree {} exceeds truncation {k_max}",
                    m.k
                )));
            }
            kept.insert(m, v);
        }
        Ok(Self {
            support_radius,
            kind,
            k_max,
            coeffs: kept,
            rule: None,
        })
    }

    /// Builds the spectrum described by `rule` up to degree `k_max`.
    pub fn from_rule(
        kind: SourceKind,
        support_radius: f64,
        rule: CoefficientRule,
        k_max: usize,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        match rule {
            CoefficientRule::Geometric { base } => {
                if !(base > 0.0 && base.is_finite()) {
                    return Err(Error::InvalidConfig(format!(
                        "geometric base must be positive (got {base})"
                    )));
                }
                for k in 1..=k_max {
                    coeffs.insert(ModeIndex::zonal(k), ScaledComplex::powi_f64(base, -(k as i64)));
                }
            }
            CoefficientRule::Constant { value } => {
                for k in 1..=k_max {
                    coeffs.insert(ModeIndex::zonal(k), value.into());
                }
            }
            CoefficientRule::Single { k, l, value } => {
                coeffs.insert(ModeIndex::new(k, l)?, value.into());
            }
        }
        let mut s = Self::new(kind, support_radius, k_max, coeffs)?;
        s.rule = Some(rule);
        Ok(s)
    }

    /// Single zonal harmonic with a complex amplitude.
    pub fn single(kind: SourceKind, support_radius: f64, m: ModeIndex, value: Complex64) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(m, value.into());
        Self::new(kind, support_radius, m.k.max(1), coeffs)
    }

    /// Regenerates (rule-based) or truncates the spectrum at a new maximum degree.
    pub fn with_k_max(&self, k_max: usize) -> Result<Self> {
        match self.rule {
            Some(rule) => Self::from_rule(self.kind, self.support_radius, rule, k_max),
            None => {
                let coeffs = self
                    .coeffs
                    .iter()
                    .filter(|(m, _)| m.k <= k_max)
                    .map(|(m, v)| (*m, *v))
                    .collect();
                Self::new(self.kind, self.support_radius, k_max, coeffs)
            }
        }
    }

    /// Multiplies every coefficient by `s`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|(m, v)| (*m, *v * s)).collect();
        let mut out = Self::new(self.kind, self.support_radius, self.k_max, coeffs)?;
        out.rule = None;
        Ok(out)
    }

    pub fn rule(&self) -> Option<CoefficientRule> {
        self.rule
    }

    /// Stored coefficients in the source's own convention.
    pub fn coefficients(&self) -> &BTreeMap<ModeIndex, ScaledComplex> {
        &self.coeffs
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Distinct degrees carrying a nonzero coefficient, ascending.
    pub fn degrees(&self) -> Vec<usize> {
        let mut ks: Vec<usize> = self.coeffs.keys().map(|m| m.k).collect();
        ks.dedup();
        ks
    }

    pub fn modes_of_degree(&self, k: usize) -> impl Iterator<Item = (ModeIndex, ScaledComplex)> + '_ {
        self.coeffs
            .range(ModeIndex { k, l: i64::MIN }..=ModeIndex { k, l: i64::MAX })
            .map(|(m, v)| (*m, *v))
    }

    /// Newtonian-potential coefficient: the potential is `beta r^k Y` for `r < q`
    /// and `beta q^(2k+1) r^(-k-1) Y` for `r > q`.
    pub fn beta(&self, m: ModeIndex) -> ScaledComplex {
        let Some(v) = self.coeffs.get(&m) else {
            return ScaledComplex::ZERO;
        };
        match self.kind {
            SourceKind::Multipole => *v,
            SourceKind::DeltaShell => density_to_beta(*v, m.k, self.support_radius),
        }
    }

    /// Equivalent surface density on the support sphere.
    pub fn alpha(&self, m: ModeIndex) -> ScaledComplex {
        let Some(v) = self.coeffs.get(&m) else {
            return ScaledComplex::ZERO;
        };
        match self.kind {
            SourceKind::DeltaShell => *v,
            SourceKind::Multipole => {
                let k = m.k as i64;
                -(*v * ScaledComplex::powi_f64(self.support_radius, k - 1) * (2 * k + 1) as f64)
            }
        }
    }

    /// `sum_l |beta_kl|^2` for one degree.
    pub fn beta_power(&self, k: usize) -> ScaledComplex {
        self.modes_of_degree(k).map(|(m, _)| self.beta(m).norm_sqr()).sum()
    }

    /// `sum_l |alpha_kl|^2` for one degree.
    pub fn alpha_power(&self, k: usize) -> ScaledComplex {
        self.modes_of_degree(k).map(|(m, _)| self.alpha(m).norm_sqr()).sum()
    }
}

fn density_to_beta(alpha: ScaledComplex, k: usize, q: f64) -> ScaledComplex {
    let k = k as i64;
    -(alpha * ScaledComplex::powi_f64(q, 1 - k) / ScaledComplex::from_f64((2 * k + 1) as f64))
}
