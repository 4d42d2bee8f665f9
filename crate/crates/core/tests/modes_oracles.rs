mod common;

use calr_core::*;
use common::random_config;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_matches_general_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut compared = 0;
    for _ in 0..200 {
        let cfg = random_config(&mut rng);
        for k in 1..=60 {
            let (Ok(a), Ok((b, _))) = (solve_mode_closed_form(&cfg, k), solve_mode_general(&cfg, k)) else {
                continue;
            };
            let d = calr_core::modes::relative_difference(&a, &b);
            assert!(d < 1e-9, "k = {k}, diff = {d:e}, cfg = {cfg:?}");
            compared += 1;
        }
    }
    assert!(compared > 10_000);
}

#[test]
fn finite_difference_oracle_agrees_and_converges() {
    let cfg = LayeredConfig::real(1.0, 2.0, [2.25, -1.5, 1.0], 0.1, LossRegion::Shell).unwrap();
    for k in [1, 2, 5, 10, 20] {
        let exact = solve_mode_closed_form(&cfg, k).unwrap();
        let oracle = radial_oracle(&cfg, k, 3.0).unwrap();
        let d = calr_core::modes::relative_difference(&exact, &oracle);
        assert!(d < 1e-4, "k = {k}: {d:e}");
    }
    // second order: halving the spacing quarters the error
    let k = 3;
    let exact = solve_mode_closed_form(&cfg, k).unwrap();
    let e1 = calr_core::modes::relative_difference(&exact, &radial_fd_solve(&cfg, k, 3.0, 2000).unwrap());
    let e2 = calr_core::modes::relative_difference(&exact, &radial_fd_solve(&cfg, k, 3.0, 4000).unwrap());
    let order = (e1 / e2).log2();
    assert!((1.7..2.3).contains(&order), "observed order {order}");
}

#[test]
fn resonant_denominator_is_small_near_the_tuned_degree() {
    // at eta = 0 the coreless structure tuned to k0 is exactly singular there
    for k0 in [2usize, 4, 7] {
        let kf = k0 as f64;
        let eps = -1.0 - 1.0 / kf;
        let lossless = LayeredConfig::real(1.0, 2.0, [eps, eps, 1.0], 0.0, LossRegion::WholeSpace).unwrap();
        assert!(matches!(solve_mode_closed_form(&lossless, k0), Err(Error::ModeSingular { .. })));
        let lossy = lossless.with_eta(1e-6);
        let at = denominator_magnitude(&lossy, k0).to_f64();
        let off = denominator_magnitude(&lossy, k0 + 1).to_f64();
        assert!(at < 1e-4 * off, "k0 = {k0}: {at:e} vs {off:e}");
    }
}

#[test]
fn exterior_coefficient_stays_within_interface_bound() {
    // |d_k| r_e^(-2k-1) is the reflected amplitude at r_e; it stays O(1) away from resonance
    let cfg = LayeredConfig::real(1.0, 2.0, [3.0, 2.0, 1.0], 0.0, LossRegion::Shell).unwrap();
    for k in 1..=40 {
        let m = solve_mode_closed_form(&cfg, k).unwrap();
        let reflected = m.d.ratio_abs(&ScaledComplex::powi_f64(2.0, 2 * k as i64 + 1));
        assert!(reflected < 1.0, "k = {k}: {reflected}");
    }
}

#[test]
fn tuned_exterior_coefficients_follow_critical_envelope() {
    // |d_k| <= C r_e^(3k) / r_i^k for every degree, one C over the band-centred grid
    let base = LayeredConfig::homogeneous(1.0, 2.0, 0.0, LossRegion::Shell).unwrap();
    let mut c: f64 = 0.0;
    for j in 5..=20 {
        let eta = 0.5f64.powf(j as f64 - 0.5);
        let k0 = select_k_of_eta(eta, &base, KRule::Shell).unwrap().k;
        let cfg = MaterialLaw::ResonantCoreShell.apply(&base, k0, eta);
        for k in 1..=64 {
            let d = solve_mode_closed_form(&cfg, k).unwrap().d;
            c = c.max(d.ratio_abs(&ScaledComplex::powi_f64(2.0, 3 * k as i64)));
        }
    }
    assert!(c <= 10.0, "{c}");
}
