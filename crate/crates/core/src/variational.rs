//! Primal upper and dual lower bounds on the dissipated energy.
//!
//! All families are evaluated in units where the core radius is one: lengths
//! are divided by `r_i`, densities multiplied by `r_i`, and the resulting
//! energies and pairings multiplied back by `r_i`. The lossless permittivities
//! of the configuration enter the constraints; the loss is the explicit `eta`.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::config::{LayeredConfig, LossRegion};
use crate::energy::{select_k_of_eta, KRule};
use crate::error::{Error, Result};
use crate::harmonics::ModeIndex;
use crate::radial::{RadialPiece, RadialProfile};
use crate::scaled::ScaledComplex;
use crate::source::{SourceKind, SourceSpectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `r^k` inside `r_e`, `r_e^(2k+1) r^(-k-1)` outside.
    PsiHat,
    /// Outward continuation through core `1`, shell `-1`, matrix `1`.
    VHatNR1,
    /// Outward continuation through core `1`, shell `-1-1/k_ref`, matrix `1`.
    VHatCRC,
    /// Newtonian potential of a single density harmonic on `r = q`.
    VTilde,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub mode: ModeIndex,
    pub lambda: Complex64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoundKind {
    Primal,
    Dual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundPart {
    SourcePairing,
    VEnergy,
    WEnergy,
    PsiEnergy,
}

impl BoundPart {
    pub fn name(&self) -> &'static str {
        match self {
            BoundPart::SourcePairing => "source_pairing",
            BoundPart::VEnergy => "v_energy",
            BoundPart::WEnergy => "w_energy",
            BoundPart::PsiEnergy => "psi_energy",
        }
    }
}

/// Fitted constants of the dual lower-bound envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Envelope {
    /// Pairing constant.
    pub c_tilde: f64,
    /// Quadratic-term constant.
    pub c: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub eta: f64,
    pub kind: BoundKind,
    pub value: f64,
    /// Primal: energies summing to `value`. Dual: pairing minus energies.
    pub parts: BTreeMap<BoundPart, f64>,
    pub families: Vec<TestFamily>,
    pub k_eta: Option<usize>,
    /// Largest relative interface residual of the PDE constraint.
    pub max_constraint_residual: f64,
    /// Dual only: maximizing weight and the optimal value.
    pub optimal_lambda: Option<f64>,
    pub optimal_value: Option<f64>,
    pub envelope: Option<Envelope>,
}

impl BoundReport {
    pub fn part(&self, p: BoundPart) -> f64 {
        self.parts.get(&p).copied().unwrap_or(0.0)
    }
}

/// Weight in the dual families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LambdaChoice {
    Fixed(f64),
    /// Maximizer of the quadratic in the weight.
    Optimal,
    /// `eta^(-1/2)`, keeping `eta lambda^2` fixed.
    InverseSqrtEta,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CrcMode {
    /// Shell tuned to one fixed degree, no correction field.
    FixedK0,
    /// Shell tuned to the band degree of `eta`, with a correction field.
    AdaptiveK,
}

/// Energy of the reference function `psi_hat_k`: `(2k+1) r_e^(2k+1)`.
pub fn psi_hat_energy(k: usize, r_e: f64) -> f64 {
    psi_hat_energy_scaled(k, r_e).to_f64()
}

fn psi_hat_energy_scaled(k: usize, r_e: f64) -> ScaledComplex {
    ScaledComplex::powi_f64(r_e, 2 * k as i64 + 1) * (2 * k + 1) as f64
}

/// `psi_hat_k` with interior coefficient `-1-1/k` and unit exterior.
pub fn psi_hat_profile(k: usize, r_e: f64) -> RadialProfile {
    let inner = Complex64::new(-1.0 - 1.0 / k as f64, 0.0);
    RadialProfile::new(
        k,
        vec![
            RadialPiece {
                inner: 0.0,
                outer: r_e,
                growing: ScaledComplex::ONE,
                decaying: ScaledComplex::ZERO,
                eps: inner,
            },
            RadialPiece {
                inner: r_e,
                outer: f64::INFINITY,
                growing: ScaledComplex::ZERO,
                decaying: ScaledComplex::powi_f64(r_e, 2 * k as i64 + 1),
                eps: Complex64::new(1.0, 0.0),
            },
        ],
    )
    .expect("two adjacent pieces")
}

/// Continues `r^k` from the unit core outward, flux-continuously through
/// `r = 1` and `r = r_e`, then purely decaying beyond `q`.
///
/// `eps` holds the core, shell and matrix coefficients.
pub fn outward_profile(k: usize, eps: [Complex64; 3], r_e: f64, q: f64) -> RadialProfile {
    let mut pieces = vec![RadialPiece {
        inner: 0.0,
        outer: 1.0,
        growing: ScaledComplex::ONE,
        decaying: ScaledComplex::ZERO,
        eps: eps[0],
    }];
    for (lo, hi, e) in [(1.0, r_e, eps[1]), (r_e, q, eps[2])] {
        let prev = pieces.last().expect("nonempty");
        let value = prev.value(k, lo);
        let flux = prev.flux(k, lo);
        let (g, h) = match_value_and_flux(k, lo, value, flux, e);
        pieces.push(RadialPiece {
            inner: lo,
            outer: hi,
            growing: g,
            decaying: h,
            eps: e,
        });
    }
    let prev = pieces.last().expect("nonempty");
    let value = prev.value(k, q);
    pieces.push(RadialPiece {
        inner: q,
        outer: f64::INFINITY,
        growing: ScaledComplex::ZERO,
        decaying: value * ScaledComplex::powi_f64(q, k as i64 + 1),
        eps: eps[2],
    });
    RadialProfile::new(k, pieces).expect("contiguous pieces")
}

/// Coefficients of `g r^k + h r^(-k-1)` with given value and `eps`-weighted
/// derivative at radius `a`.
fn match_value_and_flux(
    k: usize,
    a: f64,
    value: ScaledComplex,
    flux: ScaledComplex,
    eps: Complex64,
) -> (ScaledComplex, ScaledComplex) {
    let kf = k as f64;
    let n = 2.0 * kf + 1.0;
    let ki = k as i64;
    let slope = flux / ScaledComplex::from(eps);
    let g = (value * ((kf + 1.0) / a) + slope) * ScaledComplex::powi_f64(a, 1 - ki) * (1.0 / n);
    let h = (value * (kf / a) - slope) * ScaledComplex::powi_f64(a, ki + 2) * (1.0 / n);
    (g, h)
}

/// Flux jump (outer minus inner) of `profile` at `radius`.
pub fn flux_jump(profile: &RadialProfile, radius: f64) -> Option<ScaledComplex> {
    profile
        .interface_jumps()
        .into_iter()
        .find(|j| j.radius == radius)
        .map(|j| j.flux_jump)
}

/// Relative violation of `sum_j weight_j [flux_j] = expected` with continuous values.
fn combined_residual(terms: &[(&RadialProfile, f64)], expected: &[(f64, ScaledComplex)]) -> f64 {
    let mut radii: Vec<f64> = terms
        .iter()
        .flat_map(|(p, _)| p.interface_jumps().into_iter().map(|j| j.radius))
        .chain(expected.iter().map(|e| e.0))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    let mut worst: f64 = 0.0;
    for r in radii {
        let mut sum = ScaledComplex::ZERO;
        let mut scale = ScaledComplex::ZERO;
        for (p, w) in terms {
            for j in p.interface_jumps().into_iter().filter(|j| j.radius == r) {
                sum = sum + j.flux_jump * *w;
                scale = scale + j.flux_scale * w.abs();
                if !j.value_scale.is_zero() {
                    worst = worst.max(j.value_jump.ratio_abs(&j.value_scale));
                }
            }
        }
        let want = expected
            .iter()
            .find(|e| e.0 == r)
            .map(|e| e.1)
            .unwrap_or(ScaledComplex::ZERO);
        scale = scale + want.abs();
        if !scale.is_zero() {
            worst = worst.max((sum - want).ratio_abs(&scale));
        }
    }
    worst
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(msg()))
    }
}

fn close_to(z: Complex64, target: f64) -> bool {
    (z - target).norm() <= 1e-12 * (1.0 + target.abs())
}

fn require_eps(name: &str, z: Complex64, target: f64) -> Result<()> {
    require(close_to(z, target), || format!("{name} must be {target} (got {z})"))
}

fn require_common(cfg: &LayeredConfig, src: &SourceSpectrum, eta: f64) -> Result<()> {
    cfg.validate()?;
    require(cfg.loss_region == LossRegion::WholeSpace, || {
        "variational bounds need loss in the whole space".into()
    })?;
    require(src.kind == SourceKind::DeltaShell, || {
        "variational bounds need a surface-density source".into()
    })?;
    require(src.support_radius > cfg.r_e, || {
        format!("source radius {} must exceed r_e = {}", src.support_radius, cfg.r_e)
    })?;
    require(eta > 0.0 && eta.is_finite(), || format!("loss must be positive (got {eta})"))
}

/// Degree encoded by a shell coefficient `-1-1/k`.
fn tuned_degree(eps_s: Complex64) -> Result<usize> {
    let kf = -1.0 / (eps_s.re + 1.0);
    let k = kf.round();
    require(eps_s.im == 0.0 && k >= 1.0 && (kf - k).abs() < 1e-9, || {
        format!("shell permittivity {eps_s} is not of the form -1-1/k")
    })?;
    Ok(k as usize)
}

struct Normalized {
    r_e: f64,
    q: f64,
    /// Multiplies densities on the way in, energies and pairings on the way out.
    length: f64,
}

fn normalize(cfg: &LayeredConfig, src: &SourceSpectrum) -> Normalized {
    Normalized {
        r_e: cfg.r_e / cfg.r_i,
        q: src.support_radius / cfg.r_i,
        length: cfg.r_i,
    }
}

fn base_eps(cfg: &LayeredConfig) -> [Complex64; 3] {
    [cfg.eps_c, cfg.eps_s, cfg.eps_m]
}

struct PrimalTerm {
    family: TestFamily,
    v_energy: ScaledComplex,
    w_energy: ScaledComplex,
    residual: f64,
}

fn primal_report(eta: f64, terms: Vec<PrimalTerm>, length: f64, k_eta: Option<usize>) -> BoundReport {
    let v: ScaledComplex = terms.iter().map(|t| t.v_energy).sum();
    let w: ScaledComplex = terms.iter().map(|t| t.w_energy).sum();
    let v = v.to_f64() * length;
    let w = w.to_f64() * length;
    let mut parts = BTreeMap::new();
    parts.insert(BoundPart::VEnergy, v);
    parts.insert(BoundPart::WEnergy, w);
    BoundReport {
        eta,
        kind: BoundKind::Primal,
        value: v + w,
        parts,
        families: terms.iter().map(|t| t.family).collect(),
        k_eta,
        max_constraint_residual: terms.iter().map(|t| t.residual).fold(0.0, f64::max),
        optimal_lambda: None,
        optimal_value: None,
        envelope: None,
    }
}

/// One mode `lambda * profile` with `lambda` fixed by the flux jump at `q`.
fn matched_mode(
    kind: FamilyKind,
    m: ModeIndex,
    alpha: ScaledComplex,
    profile: &RadialProfile,
    q: f64,
    eta: f64,
) -> Result<PrimalTerm> {
    let jump = flux_jump(profile, q).expect("profile breaks at q");
    if jump.is_zero() {
        return Err(Error::ModeSingular {
            k: m.k,
            condition: None,
            detail: "test function has no flux jump at the source".into(),
        });
    }
    let lambda = alpha / jump;
    let v = profile.scaled(lambda);
    let residual = combined_residual(&[(&v, 1.0)], &[(q, alpha)]);
    Ok(PrimalTerm {
        family: TestFamily {
            kind,
            mode: m,
            lambda: lambda.to_complex(),
        },
        v_energy: v.dirichlet_energy()? * (0.5 * eta),
        w_energy: ScaledComplex::ZERO,
        residual,
    })
}

/// Profile of the family used for the standard structure.
pub fn nr1_profile(k: usize, r_e: f64, q: f64) -> RadialProfile {
    let one = Complex64::new(1.0, 0.0);
    outward_profile(k, [one, -one, one], r_e, q)
}

/// Upper bound for the structure with core `1`, shell `-1`, matrix `1`.
///
/// Uses `v = sum lambda_k v_hat_k` and `w = 0`; `v` does not depend on `eta`.
pub fn primal_bound_nr1(cfg: &LayeredConfig, src: &SourceSpectrum, eta: f64) -> Result<BoundReport> {
    require_common(cfg, src, eta)?;
    require_eps("eps_c", cfg.eps_c, 1.0)?;
    require_eps("eps_s", cfg.eps_s, -1.0)?;
    require_eps("eps_m", cfg.eps_m, 1.0)?;
    let n = normalize(cfg, src);
    let mut terms = Vec::new();
    for (m, alpha) in src.coefficients() {
        let profile = nr1_profile(m.k, n.r_e, n.q);
        terms.push(matched_mode(FamilyKind::VHatNR1, *m, *alpha * n.length, &profile, n.q, eta)?);
    }
    Ok(primal_report(eta, terms, n.length, None))
}

/// Newtonian potential of a unit growing harmonic cut at `q`, with the
/// configuration's coefficients in each layer.
fn v_tilde_profile(k: usize, eps: [Complex64; 3], r_e: f64, q: f64) -> RadialProfile {
    let piece = |inner, outer, e| RadialPiece {
        inner,
        outer,
        growing: ScaledComplex::ONE,
        decaying: ScaledComplex::ZERO,
        eps: e,
    };
    RadialProfile::new(
        k,
        vec![
            piece(0.0, 1.0, eps[0]),
            piece(1.0, r_e, eps[1]),
            piece(r_e, q, eps[2]),
            RadialPiece {
                inner: q,
                outer: f64::INFINITY,
                growing: ScaledComplex::ZERO,
                decaying: ScaledComplex::powi_f64(q, 2 * k as i64 + 1),
                eps: eps[2],
            },
        ],
    )
    .expect("contiguous pieces")
}

/// Weight of the shell-tuned family at degree `k` when the shell is tuned to `k_ref`.
pub fn crc_lambda(k: usize, k_ref: usize, r_e: f64, q: f64, alpha: Complex64) -> Complex64 {
    let one = Complex64::new(1.0, 0.0);
    let es = Complex64::new(-1.0 - 1.0 / k_ref as f64, 0.0);
    let p = outward_profile(k, [one, es, one], r_e, q);
    let jump = flux_jump(&p, q).expect("profile breaks at q");
    (ScaledComplex::from(alpha) / jump).to_complex()
}

/// Upper bound for a shell tuned to `-1-1/k_ref` (core and matrix `1`).
///
/// `FixedK0` reads `k_ref` from the shell and uses the continued family for
/// every degree. `AdaptiveK` requires `k_ref` to be the band degree of `eta`
/// and replaces that degree by the cut Newtonian potential plus a correction
/// field carrying its interface fluxes.
pub fn primal_bound_crc(
    cfg: &LayeredConfig,
    src: &SourceSpectrum,
    eta: f64,
    mode: CrcMode,
) -> Result<BoundReport> {
    require_common(cfg, src, eta)?;
    require_eps("eps_c", cfg.eps_c, 1.0)?;
    require_eps("eps_m", cfg.eps_m, 1.0)?;
    let k_ref = tuned_degree(cfg.eps_s)?;
    let n = normalize(cfg, src);
    let k_eta = match mode {
        CrcMode::FixedK0 => None,
        CrcMode::AdaptiveK => {
            let sel = select_k_of_eta(eta, cfg, KRule::WholeSpace)?;
            require(sel.k == k_ref, || {
                format!("shell is tuned to degree {k_ref} but the loss selects {}", sel.k)
            })?;
            let critical = n.r_e.powf(1.5);
            require(n.q > critical, || {
                format!("source radius must exceed the critical radius {}", critical * n.length)
            })?;
            Some(sel.k)
        }
    };
    let eps = base_eps(cfg);
    let mut terms = Vec::new();
    for (m, alpha) in src.coefficients() {
        let alpha = *alpha * n.length;
        if k_eta == Some(m.k) {
            let base = v_tilde_profile(m.k, eps, n.r_e, n.q);
            let jump = flux_jump(&base, n.q).expect("profile breaks at q");
            let lambda = alpha / jump;
            let v = base.scaled(lambda);
            let densities: Vec<(f64, ScaledComplex)> = [1.0, n.r_e]
                .iter()
                .map(|&a| (a, -flux_jump(&v, a).expect("interface")))
                .collect();
            let w = RadialProfile::from_surface_densities(m.k, &densities)?;
            let residual = combined_residual(&[(&v, 1.0), (&w, -1.0)], &[(n.q, alpha)]);
            terms.push(PrimalTerm {
                family: TestFamily {
                    kind: FamilyKind::VTilde,
                    mode: *m,
                    lambda: lambda.to_complex(),
                },
                v_energy: v.dirichlet_energy()? * (0.5 * eta),
                w_energy: w.dirichlet_energy()? * (0.5 / eta),
                residual,
            });
        } else {
            let profile = outward_profile(m.k, eps, n.r_e, n.q);
            terms.push(matched_mode(FamilyKind::VHatCRC, *m, alpha, &profile, n.q, eta)?);
        }
    }
    Ok(primal_report(eta, terms, n.length, k_eta))
}

/// Real test pattern `Re(conj psi_hat Y_kl)` or `Im(...)` chosen for a source.
#[derive(Clone, Copy, Debug)]
struct Projection {
    mode: ModeIndex,
    /// `Re int F * pattern` over the unit sphere, per unit radial factor.
    coefficient: f64,
    /// Energy of the real pattern relative to the complex harmonic.
    energy_factor: f64,
}

fn best_projection(src: &SourceSpectrum, k: usize, length: f64) -> Option<Projection> {
    let get = |l: i64| -> Complex64 {
        src.coefficients()
            .get(&ModeIndex { k, l })
            .map(|v| (*v * length).to_complex())
            .unwrap_or_default()
    };
    let mut best: Option<(f64, Projection)> = None;
    for l in 0..=k as i64 {
        let a = get(l);
        let b = get(-l) * if l % 2 == 0 { 1.0 } else { -1.0 };
        let mut candidates = vec![(0.5 * (a + b)).re];
        if l > 0 {
            candidates.push(((a - b) / Complex64::new(0.0, 2.0)).re);
        }
        let h = if l == 0 { 1.0 } else { 0.5 };
        for c in candidates {
            let score = c * c / h;
            if score > 0.0 && best.map_or(true, |(s, _)| score > s) {
                best = Some((
                    score,
                    Projection {
                        mode: ModeIndex { k, l },
                        coefficient: c,
                        energy_factor: h,
                    },
                ));
            }
        }
    }
    best.map(|b| b.1)
}

struct Quadratic {
    pairing: f64,
    psi: f64,
    v: f64,
}

fn dual_report(
    eta: f64,
    mode: ModeIndex,
    quad: Quadratic,
    lambda: LambdaChoice,
    residual: f64,
    k_eta: Option<usize>,
    length: f64,
) -> BoundReport {
    // J(l) = l P - (eta/2) l^2 (E_psi + E_v)
    let curvature = 0.5 * eta * (quad.psi + quad.v);
    let l_opt = quad.pairing / (2.0 * curvature);
    let j_opt = quad.pairing * quad.pairing / (4.0 * curvature);
    let l = match lambda {
        LambdaChoice::Fixed(x) => x,
        LambdaChoice::Optimal => l_opt,
        LambdaChoice::InverseSqrtEta => 1.0 / eta.sqrt(),
    };
    let mut parts = BTreeMap::new();
    let pairing = l * quad.pairing * length;
    let psi = 0.5 * eta * l * l * quad.psi * length;
    let v = 0.5 * eta * l * l * quad.v * length;
    parts.insert(BoundPart::SourcePairing, pairing);
    parts.insert(BoundPart::PsiEnergy, psi);
    parts.insert(BoundPart::VEnergy, v);
    BoundReport {
        eta,
        kind: BoundKind::Dual,
        value: pairing - psi - v,
        parts,
        families: vec![TestFamily {
            kind: FamilyKind::PsiHat,
            mode,
            lambda: l.into(),
        }],
        k_eta,
        max_constraint_residual: residual,
        optimal_lambda: Some(l_opt),
        optimal_value: Some(j_opt * length),
        envelope: None,
    }
}

/// Lower bound for the coreless structure with shell `-1-1/k0`.
///
/// Evaluates `J(0, lambda * Re psi_hat_k0)` (or the imaginary-part pattern,
/// whichever pairs more strongly with the source).
pub fn dual_bound_r1(
    cfg: &LayeredConfig,
    src: &SourceSpectrum,
    k0: usize,
    eta: f64,
    lambda: LambdaChoice,
) -> Result<BoundReport> {
    require_common(cfg, src, eta)?;
    require(k0 >= 1, || "degree must be at least 1".into())?;
    require((cfg.eps_c - cfg.eps_s).norm() <= 1e-12, || {
        "structure must be coreless (eps_c = eps_s)".into()
    })?;
    require_eps("eps_s", cfg.eps_s, -1.0 - 1.0 / k0 as f64)?;
    require_eps("eps_m", cfg.eps_m, 1.0)?;
    let r_e = cfg.r_e;
    let q = src.support_radius;
    let proj = best_projection(src, k0, 1.0).ok_or_else(|| {
        Error::Precondition(format!(
            "source has no degree-{k0} density; neither the real nor the imaginary pattern pairs with it"
        ))
    })?;
    let psi = psi_hat_profile(k0, r_e);
    let residual = combined_residual(&[(&psi, 1.0)], &[]);
    let radial_at_q = psi.value(q).to_f64();
    let quad = Quadratic {
        pairing: q * q * radial_at_q * proj.coefficient,
        psi: psi_hat_energy(k0, r_e) * proj.energy_factor,
        v: 0.0,
    };
    Ok(dual_report(eta, proj.mode, quad, lambda, residual, None, 1.0))
}

/// Lower bound for a spherical core `eps_c` inside a shell tuned to the band
/// degree of `eta`.
///
/// The correction `v` solves `eta Laplace v = -div(eps grad psi)` exactly,
/// from the two interface densities of `psi`. The envelope reports the
/// constants for which the closed-form lower-bound expression equals the
/// optimal value at this point.
pub fn dual_bound_r2(
    cfg: &LayeredConfig,
    src: &SourceSpectrum,
    eta: f64,
    lambda: LambdaChoice,
) -> Result<BoundReport> {
    require_common(cfg, src, eta)?;
    require(cfg.eps_c.im == 0.0 && cfg.eps_c.re > 0.0, || {
        format!("core permittivity must be real and positive (got {})", cfg.eps_c)
    })?;
    require_eps("eps_m", cfg.eps_m, 1.0)?;
    let n = normalize(cfg, src);
    let critical = n.r_e.powf(1.5);
    require(n.q < critical, || {
        format!("source radius must lie inside the critical radius {}", critical * n.length)
    })?;
    let sel = select_k_of_eta(eta, cfg, KRule::WholeSpace)?;
    let k = sel.k;
    require_eps("eps_s", cfg.eps_s, -1.0 - 1.0 / k as f64)?;
    let proj = best_projection(src, k, n.length).ok_or_else(|| {
        Error::Precondition(format!("source has no density at the band degree {k}"))
    })?;

    let eps = base_eps(cfg);
    let mut psi = v_tilde_profile(k, eps, n.r_e, n.r_e);
    // drop the zero-width piece introduced by cutting at r_e
    psi.pieces.remove(2);
    psi.pieces[2].inner = n.r_e;
    let densities: Vec<(f64, ScaledComplex)> = [1.0, n.r_e]
        .iter()
        .map(|&a| (a, flux_jump(&psi, a).expect("interface") * (1.0 / eta)))
        .collect();
    let v = RadialProfile::from_surface_densities(k, &densities)?;
    let residual = combined_residual(&[(&psi, 1.0), (&v, eta)], &[]);
    let e_psi = psi_hat_energy(k, n.r_e) * proj.energy_factor;
    let e_v = v.dirichlet_energy()?.to_f64() * proj.energy_factor;
    let radial_at_q = psi.value(n.q).to_f64();
    let quad = Quadratic {
        pairing: n.q * n.q * radial_at_q * proj.coefficient,
        psi: e_psi,
        v: e_v,
    };
    let curvature = 0.5 * eta * (quad.psi + quad.v);
    let c_tilde = n.q * n.q;
    let c = curvature / (k as f64 * n.r_e.powi(k as i32));
    let kf = k as f64;
    let envelope_value = (c_tilde * proj.coefficient).powi(2)
        * (n.r_e / n.q).powi(2)
        * (n.r_e.powi(3) / (n.q * n.q)).powf(kf)
        / (4.0 * c * kf)
        * n.length;
    let mut report = dual_report(eta, proj.mode, quad, lambda, residual, Some(k), n.length);
    report.envelope = Some(Envelope {
        c_tilde,
        c,
        value: envelope_value,
    });
    Ok(report)
}
