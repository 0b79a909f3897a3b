mod common;

use common::gauss_legendre;
use mick_core::{tau_from_theta, theta_from_tau, Error, FrankParameter};

fn fp(t: f64) -> FrankParameter {
    FrankParameter::new(t).unwrap()
}

/// `τ = 1 − 4/θ + (4/θ²) ∫₀^θ t/(eᵗ−1) dt` by quadrature.
fn tau_by_quadrature(theta: f64) -> f64 {
    let integral: f64 = gauss_legendre(64, 0.0, theta)
        .iter()
        .map(|&(t, w)| w * if t == 0.0 { 1.0 } else { t / t.exp_m1() })
        .sum();
    1.0 - 4.0 / theta + 4.0 * integral / (theta * theta)
}

#[test]
fn tau_of_three() {
    let tau = tau_from_theta(fp(3.0));
    assert!((tau - 0.307).abs() < 1e-3);
    assert!((tau - 0.30724695943072382).abs() < 1e-15, "{tau}");
}

#[test]
fn tau_against_quadrature() {
    for &t in &[
        -20.0, -7.0, -2.5, -1.0, -0.01, 0.01, 0.7, 1.99, 2.01, 5.0, 15.0,
    ] {
        let q = tau_by_quadrature(t);
        assert!((tau_from_theta(fp(t)) - q).abs() < 1e-12, "θ={t}");
    }
}

#[test]
fn tau_is_odd_and_increasing() {
    let mut prev = -1.0;
    for k in -300..=300 {
        if k == 0 {
            continue;
        }
        let t = k as f64 / 10.0;
        let tau = tau_from_theta(fp(t));
        assert!(tau > prev, "θ={t}");
        assert!(tau.abs() < 1.0);
        assert_eq!(tau, -tau_from_theta(fp(-t)));
        prev = tau;
    }
}

#[test]
fn small_theta_limit() {
    // τ ≈ θ/9 near independence
    for &t in &[1e-8, 1e-5, 1e-3] {
        assert!((tau_from_theta(fp(t)) - t / 9.0).abs() < t * t);
    }
}

#[test]
fn round_trip() {
    for &t in &[-10.0, -3.0, -1.0, -0.5, 0.5, 1.0, 3.0, 10.0] {
        let back = theta_from_tau(tau_from_theta(fp(t)), 1e-12)
            .unwrap()
            .theta();
        assert!((back - t).abs() < 1e-8, "θ={t}: {back}");
    }
}

#[test]
fn extreme_tau_inverts() {
    let p = theta_from_tau(0.99, 1e-12).unwrap();
    assert!(p.theta() > 300.0);
    assert!((tau_from_theta(p) - 0.99).abs() < 1e-12);
    let q = theta_from_tau(-0.99, 1e-12).unwrap();
    assert!((q.theta() + p.theta()).abs() < 1e-6 * p.theta());
}

#[test]
fn inversion_domain() {
    assert!(matches!(theta_from_tau(0.0, 1e-12), Err(Error::ZeroTau)));
    for bad in [1.0, -1.0, 1.5, f64::NAN] {
        assert!(theta_from_tau(bad, 1e-12).is_err(), "{bad}");
    }
}
