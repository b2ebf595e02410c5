#![allow(clippy::excessive_precision)]
use std::f64::consts::PI;

use klein_core::elliptic::*;
use proptest::prelude::*;

/// Trapezoid rule for ∫₀^{π/2} h(sin²θ) dθ; exponentially accurate since the
/// integrand is even and π-periodic in θ.
fn quarter_period(h: impl Fn(f64) -> f64, n: usize) -> f64 {
    let step = PI / 2.0 / n as f64;
    (0..=n)
        .map(|i| {
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * h((i as f64 * step).sin().powi(2))
        })
        .sum::<f64>()
        * step
}

fn k_direct(m: f64) -> f64 {
    quarter_period(|s| 1.0 / (1.0 - m * s).sqrt(), 4000)
}

fn e_direct(m: f64) -> f64 {
    quarter_period(|s| (1.0 - m * s).sqrt(), 4000)
}

fn pi_direct(n: f64, m: f64) -> f64 {
    quarter_period(|s| 1.0 / ((1.0 - n * s) * (1.0 - m * s).sqrt()), 8000)
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

// 20-digit reference values.
const KE_TABLE: [(f64, f64, f64); 4] = [
    (0.25, 1.685_750_354_812_596_042_87, 1.467_462_209_339_427_155_46),
    (0.5, 1.854_074_677_301_371_918_43, 1.350_643_881_047_675_502_52),
    (0.9, 2.578_092_113_348_173_188_20, 1.104_774_732_704_073_326_09),
    (0.99, 3.695_637_362_989_874_677_81, 1.015_993_545_025_223_935_64),
];

const PI_TABLE: [(f64, f64, f64); 5] = [
    (0.4, 0.25, 2.196_290_536_617_806_540_45),
    (-0.5, 0.3, 1.386_884_413_579_364_811_78),
    (0.9, 0.5, 6.425_573_644_195_658_592_78),
    (-3.0, 0.7, 0.942_409_233_637_775_965_66),
    (0.5, 0.0, 2.221_441_469_079_183_123_51),
];

#[test]
fn k_and_e_match_reference_table() {
    for (m, k, e) in KE_TABLE {
        assert!(rel(elliptic_k(m).unwrap(), k) < 1e-14, "K({m})");
        assert!(rel(elliptic_e(m).unwrap(), e) < 1e-14, "E({m})");
        let (k2, e2) = complete_elliptic(m).unwrap();
        assert!(rel(k2, k) < 1e-14 && rel(e2, e) < 1e-14);
    }
}

#[test]
fn pi_matches_reference_table() {
    for (n, m, v) in PI_TABLE {
        assert!(rel(complete_elliptic_pi(n, m).unwrap(), v) < 1e-13, "Pi({n}, {m})");
    }
}

#[test]
fn degenerate_parameters() {
    let (k, e) = complete_elliptic(0.0).unwrap();
    assert!((k - PI / 2.0).abs() < 1e-15 && (e - PI / 2.0).abs() < 1e-15);
    assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
    assert!((complete_elliptic_pi(0.0, 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
}

#[test]
fn domain_errors() {
    assert_eq!(elliptic_k(1.0), Err(EllipticError::Divergent(1.0)));
    assert!(matches!(complete_elliptic(1.0), Err(EllipticError::Divergent(_))));
    assert!(matches!(elliptic_k(-0.1), Err(EllipticError::ParameterDomain(_))));
    assert!(matches!(elliptic_e(1.5), Err(EllipticError::ParameterDomain(_))));
    assert!(matches!(complete_elliptic_pi(1.0, 0.5), Err(EllipticError::CharacteristicDomain(_))));
    assert!(matches!(complete_elliptic_pi(0.5, 1.0), Err(EllipticError::ParameterDomain(_))));
    assert!(matches!(EllipticArgs::new(0.5, 2.0), Err(EllipticError::CharacteristicDomain(_))));
    assert!(EllipticArgs::new(f64::NAN, 0.0).is_err());
}

#[test]
fn parameter_versus_modulus() {
    let args = EllipticArgs::from_modulus(2.0 * 2f64.sqrt() / 3.0, 0.0).unwrap();
    assert!((args.m() - EXTREMAL_PARAMETER).abs() < 1e-15);
    let e = args.e().unwrap();
    assert!(rel(e, 1.113_741_101_712_938_185_84) < 1e-14);
    assert!((args.k().unwrap() - args.pi().unwrap()).abs() < 1e-13);
}

#[test]
fn target_constant_value() {
    let t = target_constant();
    assert!(rel(t, 41.987_050_357_708_43) < 1e-14);
    // Published anchor: 13.365π.
    assert!((t / PI - 13.365).abs() < 5e-3);
    assert!(rel(t / (12.0 * PI), e_direct(8.0 / 9.0)) < 1e-13);
}

#[test]
fn monotone_on_grid() {
    let grid: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0 * 0.999).collect();
    for w in grid.windows(2) {
        assert!(elliptic_k(w[1]).unwrap() > elliptic_k(w[0]).unwrap());
        assert!(elliptic_e(w[1]).unwrap() < elliptic_e(w[0]).unwrap());
    }
}

#[test]
fn legendre_relation() {
    for m in [0.1, 0.3, 0.5, 0.77] {
        let (k, e) = complete_elliptic(m).unwrap();
        let (kc, ec) = complete_elliptic(1.0 - m).unwrap();
        assert!((e * kc + ec * k - k * kc - PI / 2.0).abs() < 1e-14);
    }
}

proptest! {
    #[test]
    fn agm_matches_direct_quadrature(m in 0.0f64..0.99) {
        let (k, e) = complete_elliptic(m).unwrap();
        prop_assert!(rel(k, k_direct(m)) < 1e-11);
        prop_assert!(rel(e, e_direct(m)) < 1e-11);
    }

    #[test]
    fn carlson_matches_direct_quadrature(n in -5.0f64..0.95, m in 0.0f64..0.95) {
        prop_assert!(rel(complete_elliptic_pi(n, m).unwrap(), pi_direct(n, m)) < 1e-12);
    }

    #[test]
    fn pi_at_zero_characteristic_is_k(m in 0.0f64..0.999) {
        prop_assert!(rel(complete_elliptic_pi(0.0, m).unwrap(), elliptic_k(m).unwrap()) < 1e-12);
    }

    #[test]
    fn pi_at_zero_parameter(n in -10.0f64..0.99) {
        let exact = PI / (2.0 * (1.0 - n).sqrt());
        prop_assert!(rel(complete_elliptic_pi(n, 0.0).unwrap(), exact) < 1e-12);
    }
}
