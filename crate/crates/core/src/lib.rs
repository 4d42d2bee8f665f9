//! Numerical laboratory for anomalous localized resonance around
//! concentric plasmonic spheres.
//!
//! The quasi-static field of a source outside a core-shell sphere is expanded
//! in spherical harmonics. Each degree is solved exactly, so the dissipated
//! energy, the field and the primal and dual energy bounds are all available
//! in closed form per mode.
//!
//! ```
//! use calr_core::{LayeredConfig, LossRegion, solve_mode_closed_form};
//!
//! let cfg = LayeredConfig::homogeneous(1.0, 2.0, 0.0, LossRegion::Shell)?;
//! let m = solve_mode_closed_form(&cfg, 3)?;
//! assert!((m.b.to_f64() - 1.0).abs() < 1e-12);
//! # Ok::<(), calr_core::Error>(())
//! ```

pub mod config;
pub mod energy;
pub mod error;
pub mod field;
pub mod fit;
pub mod harmonics;
mod linalg;
pub mod modes;
pub mod radial;
pub mod scaled;
pub mod source;
pub mod variational;

pub use config::{Effective, LayeredConfig, LossRegion};
pub use energy::{
    classify_source, critical_radius, critical_radius_for, dissipated_energy, eta_sweep,
    select_k_of_eta, Coupling, EnergyBreakdown, EnergySweep, KRule, KSelection, MaterialLaw,
    SourceClass, SweepPoint, SweepTemplate, Verdict,
};
pub use error::{Error, Result};
pub use field::{calr_diagnostic, eval_field, CalrDiagnostic, CalrPoint, CalrTrend, FieldEvaluator, FieldSample, SphericalPoint};
pub use harmonics::{eval_harmonic, ModeIndex};
pub use modes::{
    denominator_magnitude, radial_fd_solve, radial_oracle, solve_mode_closed_form,
    solve_mode_general, ModeCoefficients, ModeDiagnostics,
};
pub use radial::{mode_shell_energy, RadialPiece, RadialProfile};
pub use scaled::ScaledComplex;
pub use source::{CoefficientRule, SourceKind, SourceSpectrum, DEFAULT_K_MAX};
pub use variational::{
    dual_bound_r1, dual_bound_r2, primal_bound_crc, primal_bound_nr1, psi_hat_energy,
    BoundKind, BoundPart, BoundReport, CrcMode, FamilyKind, LambdaChoice, TestFamily,
};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/modes.md")]
    struct Modes;
    #[doc = include_str!("../../../book/src/energy.md")]
    struct Energy;
    #[doc = include_str!("../../../book/src/bounds.md")]
    struct Bounds;
    #[doc = include_str!("../../../book/src/field.md")]
    struct Field;
}
