mod common;

use calr_core::variational::{crc_lambda, flux_jump, nr1_profile, psi_hat_profile};
use calr_core::*;
use common::{gauss_on, rel, zonal_energy};

fn whole(eps: [f64; 3]) -> LayeredConfig {
    LayeredConfig::real(1.0, 2.0, eps, 0.0, LossRegion::WholeSpace).unwrap()
}

fn density_constant(q: f64, k_max: usize) -> SourceSpectrum {
    SourceSpectrum::from_rule(SourceKind::DeltaShell, q, CoefficientRule::Constant { value: 1.0 }, k_max).unwrap()
}

#[test]
fn psi_hat_energy_and_surface_pairing_agree() {
    for k in 1..=20usize {
        for r_e in [1.0f64, 1.5, 2.0] {
            let kf = k as f64;
            let inner = |r: f64| (r.powi(k as i32), kf * r.powi(k as i32 - 1));
            let outer = |r: f64| {
                let c = r_e.powi(2 * k as i32 + 1);
                (c * r.powi(-(k as i32) - 1), -(kf + 1.0) * c * r.powi(-(k as i32) - 2))
            };
            let n = k + 4;
            let vol_in = zonal_energy(k, &gauss_on(n, 0.0, r_e), inner);
            let far: Vec<(f64, f64)> = gauss_on(n + k, 0.0, 1.0)
                .into_iter()
                .map(|(t, w)| (r_e / t, w * r_e / (t * t)))
                .collect();
            let vol_out = zonal_energy(k, &far, outer);
            let volume = vol_in + vol_out;
            // -int psi [d psi / dr] over r = r_e with orthonormal Y
            let jump = outer(r_e).1 - inner(r_e).1;
            let surface = -inner(r_e).0 * jump * r_e * r_e;
            let expected = psi_hat_energy(k, r_e);
            assert!(rel(volume, expected) < 1e-10, "k = {k}: {volume} vs {expected}");
            assert!(rel(surface, volume) < 1e-10, "k = {k}: {surface} vs {volume}");
            let p = psi_hat_profile(k, r_e);
            assert!(p.constraint_residual(&[]) < 1e-10);
            assert!(rel(p.dirichlet_energy().unwrap().to_f64(), expected) < 1e-12);
        }
    }
}

#[test]
fn nr1_flux_jump_matches_closed_form() {
    let (r_e, q) = (2.0f64, 3.0f64);
    for k in 1..=40usize {
        let kf = k as f64;
        let rek = ScaledComplex::powi_f64(r_e, 2 * k as i64 + 1);
        let closed = -((rek + ScaledComplex::from_f64(4.0 * kf * (kf + 1.0))) * ScaledComplex::powi_f64(q, k as i64 - 1))
            / (rek * (2.0 * kf + 1.0));
        let jump = flux_jump(&nr1_profile(k, r_e, q), q).unwrap();
        assert!((jump - closed).ratio_abs(&closed) < 1e-10, "k = {k}");
    }
}

#[test]
fn nr1_bound_is_linear_in_the_loss() {
    let cfg = whole([1.0, -1.0, 1.0]);
    let src = SourceSpectrum::single(SourceKind::DeltaShell, 3.0, ModeIndex::zonal(3), 1.0.into()).unwrap();
    let a = primal_bound_nr1(&cfg, &src, 1e-3).unwrap().value;
    let b = primal_bound_nr1(&cfg, &src, 1e-6).unwrap().value;
    assert!(rel(a / b, 1e3) < 1e-2);
}

#[test]
fn crc_weight_for_the_band_degree() {
    // the cut Newtonian potential weight: -q^(1-k)/(2k+1)
    let cfg = whole([1.0, -1.5, 1.0]);
    let src = SourceSpectrum::single(SourceKind::DeltaShell, 3.0, ModeIndex::zonal(2), 1.0.into()).unwrap();
    // k(eta) = 2 for 2^-2 < eta <= 2^-1
    let r = primal_bound_crc(&cfg, &src, 0.3, CrcMode::AdaptiveK);
    // q = 3 exceeds r* = 2.83
    let r = r.unwrap();
    let fam = r.families[0];
    assert_eq!(fam.kind, FamilyKind::VTilde);
    assert!((fam.lambda.re + 1.0 / 15.0).abs() < 1e-14 && fam.lambda.im == 0.0);
    assert!(r.max_constraint_residual < 1e-10);
}

#[test]
fn crc_family_matches_explicit_layers() {
    let (r_e, q) = (2.0f64, 3.2f64);
    let one = num_complex::Complex64::new(1.0, 0.0);
    for k_ref in 1..=6usize {
        let m = k_ref as f64;
        for k in 1..=12usize {
            let kf = k as f64;
            let n = 2.0 * kf + 1.0;
            let rek = r_e.powi(2 * k as i32 + 1);
            let closed = n * m * (m + 1.0)
                / (q.powi(k as i32 - 1) / rek
                    * ((kf - m) * (kf + m + 1.0) * rek - kf * (kf + 1.0) * (2.0 * m + 1.0).powi(2)));
            let l = crc_lambda(k, k_ref, r_e, q, one);
            assert!(rel(l.re, closed) < 1e-10 && l.im == 0.0, "k = {k}, k_ref = {k_ref}");
            let es = num_complex::Complex64::new(-1.0 - 1.0 / m, 0.0);
            let p = calr_core::variational::outward_profile(k, [one, es, one], r_e, q);
            let shell_g = (1.0 + kf + m) / (n * (1.0 + m));
            let shell_h = (kf + 2.0 * kf * m) / (n * (1.0 + m));
            assert!(rel(p.pieces[1].growing.to_f64(), shell_g) < 1e-12);
            assert!(rel(p.pieces[1].decaying.to_f64(), shell_h) < 1e-12);
            let matrix_h = kf * (2.0 * m + 1.0) * (kf + m + 1.0) * (rek - 1.0) / (n * n * m * (m + 1.0));
            assert!(rel(p.pieces[2].decaying.to_f64(), matrix_h) < 1e-12);
        }
    }
}

#[test]
fn dual_families_agree_for_a_trivial_core() {
    let base = whole([1.0, -1.5, 1.0]);
    let src = density_constant(2.5, 30);
    for eta in [0.1, 0.01, 0.002] {
        let k = select_k_of_eta(eta, &base, KRule::WholeSpace).unwrap().k;
        let cfg = MaterialLaw::TunedShell.apply(&base, k, 0.0);
        let coreless = MaterialLaw::TunedCoreless.apply(&base, k, 0.0);
        let lambda = LambdaChoice::Fixed(0.37);
        let r2 = dual_bound_r2(&cfg, &src, eta, lambda).unwrap();
        let r1 = dual_bound_r1(&coreless, &src, k, eta, lambda).unwrap();
        let corrected = r1.value - r2.part(BoundPart::VEnergy);
        assert!(rel(r2.value, corrected) < 1e-9, "eta = {eta}");
        assert!(r2.max_constraint_residual < 1e-10);
    }
}

#[test]
fn dual_optimum_scales_inversely_with_loss() {
    let cfg = whole([-4.0 / 3.0, -4.0 / 3.0, 1.0]);
    let src = density_constant(3.0, 10);
    let a = dual_bound_r1(&cfg, &src, 3, 1e-4, LambdaChoice::Optimal).unwrap();
    let b = dual_bound_r1(&cfg, &src, 3, 5e-5, LambdaChoice::Optimal).unwrap();
    assert!(rel(b.value, 2.0 * a.value) < 1e-10);
    assert!(rel(a.value, a.optimal_value.unwrap()) < 1e-14);
}

#[test]
fn duality_sandwich_on_mixed_sources() {
    let src = density_constant(3.2, 24);
    let base = whole([1.0, -1.2, 1.0]);
    for eta in [0.2, 0.05, 1e-3, 1e-5] {
        let fixed = primal_bound_crc(&base, &src, eta, CrcMode::FixedK0).unwrap().value;
        let e = dissipated_energy(&base.with_eta(eta), &src).unwrap().total_f64();
        assert!(e <= fixed * (1.0 + 1e-10), "eta = {eta}: {e} > {fixed}");
        let nr1 = whole([1.0, -1.0, 1.0]);
        let upper = primal_bound_nr1(&nr1, &src, eta).unwrap().value;
        let e = dissipated_energy(&nr1.with_eta(eta), &src).unwrap().total_f64();
        assert!(e <= upper * (1.0 + 1e-10));
        let coreless = whole([-1.25, -1.25, 1.0]);
        for choice in [LambdaChoice::Optimal, LambdaChoice::InverseSqrtEta, LambdaChoice::Fixed(3.0)] {
            let lower = dual_bound_r1(&coreless, &src, 4, eta, choice).unwrap().value;
            let e = dissipated_energy(&coreless.with_eta(eta), &src).unwrap().total_f64();
            assert!(lower <= e * (1.0 + 1e-10), "eta = {eta}: {lower} > {e}");
        }
    }
}

#[test]
fn bounds_scale_with_the_core_radius() {
    // lengths and densities scaled together: energies scale by the length factor
    let s = 1.7;
    let src = density_constant(3.0, 12);
    let scaled_src = SourceSpectrum::from_rule(SourceKind::DeltaShell, 3.0 * s, CoefficientRule::Constant { value: 1.0 / s }, 12).unwrap();
    let cfg = whole([1.0, -1.0, 1.0]);
    let big = LayeredConfig::real(s, 2.0 * s, [1.0, -1.0, 1.0], 0.0, LossRegion::WholeSpace).unwrap();
    let a = primal_bound_nr1(&cfg, &src, 1e-3).unwrap().value;
    let b = primal_bound_nr1(&big, &scaled_src, 1e-3).unwrap().value;
    let e_a = dissipated_energy(&cfg.with_eta(1e-3), &src).unwrap().total_f64();
    let e_b = dissipated_energy(&big.with_eta(1e-3), &scaled_src).unwrap().total_f64();
    assert!(rel(b / a, e_b / e_a) < 1e-10);
}
