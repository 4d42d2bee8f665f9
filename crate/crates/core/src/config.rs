//! Geometry and materials of the three-layer sphere.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Where the loss `i*eta` is added to the permittivity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossRegion {
    /// Only the shell `r_i < r < r_e` is lossy.
    Shell,
    /// Core, shell and matrix are all lossy.
    WholeSpace,
}

/// Core `r < r_i`, shell `r_i < r < r_e` and matrix `r > r_e`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LayeredConfig {
    pub r_i: f64,
    pub r_e: f64,
    pub eps_c: Complex64,
    pub eps_s: Complex64,
    pub eps_m: Complex64,
    pub eta: f64,
    pub loss_region: LossRegion,
}

/// Permittivities with the loss already applied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Effective {
    pub core: Complex64,
    pub shell: Complex64,
    pub matrix: Complex64,
}

impl LayeredConfig {
    pub fn new(
        r_i: f64,
        r_e: f64,
        eps_c: Complex64,
        eps_s: Complex64,
        eps_m: Complex64,
        eta: f64,
        loss_region: LossRegion,
    ) -> Result<Self> {
        let cfg = Self {
            r_i,
            r_e,
            eps_c,
            eps_s,
            eps_m,
            eta,
            loss_region,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// All permittivities equal to one.
    pub fn homogeneous(r_i: f64, r_e: f64, eta: f64, loss_region: LossRegion) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::new(r_i, r_e, one, one, one, eta, loss_region)
    }

    /// Real permittivities, the common case.
    pub fn real(
        r_i: f64,
        r_e: f64,
        eps: [f64; 3],
        eta: f64,
        loss_region: LossRegion,
    ) -> Result<Self> {
        Self::new(
            r_i,
            r_e,
            eps[0].into(),
            eps[1].into(),
            eps[2].into(),
            eta,
            loss_region,
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_i.is_finite() && self.r_e.is_finite()) || !(0.0 < self.r_i && self.r_i < self.r_e) {
            return Err(Error::InvalidConfig(format!(
                "radii must satisfy 0 < r_i < r_e (got r_i = {}, r_e = {})",
                self.r_i, self.r_e
            )));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "loss must be finite and nonnegative (got {})",
                self.eta
            )));
        }
        for (name, e) in [("eps_c", self.eps_c), ("eps_s", self.eps_s), ("eps_m", self.eps_m)] {
            if !(e.re.is_finite() && e.im.is_finite()) {
                return Err(Error::InvalidConfig(format!("{name} is not finite")));
            }
        }
        Ok(())
    }

    pub fn with_eta(mut self, eta: f64) -> Self {
        self.eta = eta;
        self
    }

    pub fn rho(&self) -> f64 {
        self.r_i / self.r_e
    }

    pub fn effective(&self) -> Effective {
        let loss = Complex64::new(0.0, self.eta);
        match self.loss_region {
            LossRegion::Shell => Effective {
                core: self.eps_c,
                shell: self.eps_s + loss,
                matrix: self.eps_m,
            },
            LossRegion::WholeSpace => Effective {
                core: self.eps_c + loss,
                shell: self.eps_s + loss,
                matrix: self.eps_m + loss,
            },
        }
    }

    /// Effective permittivity at radius `r`; interfaces belong to the inner layer.
    pub fn eps_at(&self, r: f64) -> Complex64 {
        let e = self.effective();
        if r <= self.r_i {
            e.core
        } else if r <= self.r_e {
            e.shell
        } else {
            e.matrix
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_geometry() {
        assert!(LayeredConfig::homogeneous(1.0, 1.0, 0.0, LossRegion::Shell).is_err());
        assert!(LayeredConfig::homogeneous(0.0, 1.0, 0.0, LossRegion::Shell).is_err());
        assert!(LayeredConfig::homogeneous(1.0, 2.0, -1e-3, LossRegion::Shell).is_err());
        assert!(LayeredConfig::homogeneous(1.0, 2.0, f64::NAN, LossRegion::Shell).is_err());
    }

    #[test]
    fn loss_placement() {
        let c = LayeredConfig::real(1.0, 2.0, [2.0, -1.0, 1.0], 0.1, LossRegion::Shell).unwrap();
        let e = c.effective();
        assert_eq!(e.core, Complex64::new(2.0, 0.0));
        assert_eq!(e.shell, Complex64::new(-1.0, 0.1));
        assert_eq!(e.matrix, Complex64::new(1.0, 0.0));
        let w = LayeredConfig { loss_region: LossRegion::WholeSpace, ..c }.effective();
        assert_eq!(w.core.im, 0.1);
        assert_eq!(w.matrix.im, 0.1);
        assert_eq!(c.eps_at(0.5), e.core);
        assert_eq!(c.eps_at(1.5), e.shell);
        assert_eq!(c.eps_at(3.0), e.matrix);
        assert_eq!(c.rho(), 0.5);
    }
}
