#![allow(clippy::excessive_precision)]
use klein_core::odecore::*;
use klein_core::periods::{find_p_for_ratio, RationalTarget};
use klein_core::{P_DECAY, P_EXTREMAL};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-12;
/// 2K(1/4) and 2K(3/4), 25-digit reference values.
const PERIOD_EXTREMAL: f64 = 3.371_500_709_625_192_085_742;
const PERIOD_CIRCLE: f64 = 4.313_031_294_999_286_470_877;

fn params(p: f64) -> Params {
    Params::new(p).unwrap()
}

fn state(phi1: f64, phi2: f64, dphi1: f64, dphi2: f64) -> State {
    State { y: 0.0, phi1, phi2, dphi1, dphi2 }
}

fn y_period(p: Params) -> f64 {
    match detect_period(p, RATIO_MATCH_TOL).unwrap() {
        PeriodVerdict::Periodic { y_period, .. } => y_period,
        v => panic!("expected a period, got {v:?}"),
    }
}

/// Classical fixed-step RK4, independent of the adaptive integrator.
fn rk4(p: f64, y_end: f64, steps: usize) -> [f64; 4] {
    let f = |z: [f64; 4]| {
        let (a1, a2) = rhs(&State::from_vector(0.0, z));
        [z[2], z[3], a1, a2]
    };
    let h = y_end / steps as f64;
    let mut z = initial_state(params(p)).vector();
    for _ in 0..steps {
        let k1 = f(z);
        let k2 = f(std::array::from_fn(|i| z[i] + 0.5 * h * k1[i]));
        let k3 = f(std::array::from_fn(|i| z[i] + 0.5 * h * k2[i]));
        let k4 = f(std::array::from_fn(|i| z[i] + h * k3[i]));
        z = std::array::from_fn(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]));
    }
    z
}

/// (s + 3/4)-weighted u-integral via s = ½sin²θ, whose trapezoid rule converges geometrically.
fn extremal_period_oracle() -> f64 {
    let p2 = 0.375;
    let n = 400;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let sum: f64 = (0..=n)
        .map(|i| {
            let s = 0.5 * (i as f64 * h).sin().powi(2);
            let rest = (3.0 + 2.0 * s) * (2.0 * p2 + s) * (3.0 - 4.0 * p2 + 2.0 * s);
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * (s + 0.75) / rest.sqrt()
        })
        .sum();
    // y-period = 2·∫₀^{T_u}(u + 3/4)dτ = 2·2·√2·∫₀^{π/2}(s + 3/4)/√rest dθ.
    4.0 * 2f64.sqrt() * sum * h
}

#[test]
fn initial_states() {
    let s = initial_state(params(0.5));
    assert_eq!(s.vector(), [0.0, 0.5, 1.0, 0.0]);
    let s = initial_state(params(1.0));
    assert_eq!(s.vector(), [0.0, 1.0, 2.0, 0.0]);
    let s = initial_state(params(P_EXTREMAL));
    assert!((s.dphi1 - 1.224_744_871_391_589).abs() < 1e-15);
}

#[test]
fn parameter_domain() {
    for bad in [0.0, -0.5, 1.0 + 1e-9, f64::NAN] {
        assert!(matches!(Params::new(bad), Err(OdeError::ParamDomain(_))));
    }
    assert!(params(P_EXTREMAL).is_extremal() && params(P_DECAY).is_decay() && params(1.0).is_circle());
    assert!(params(0.9).beyond_decay() && !params(0.5).beyond_decay());
}

#[test]
fn accelerations() {
    assert_eq!(rhs(&state(0.0, 0.0, 0.3, 0.1)), (0.0, 0.0));
    assert_eq!(rhs(&state(1.0, 0.0, 0.0, 0.0)), (-1.0, 0.0));
    assert_eq!(rhs(&initial_state(params(0.5))), (0.0, 1.0));
}

#[test]
fn first_integral_examples() {
    assert_eq!(first_integrals(&initial_state(params(0.5))), (-2.0, -2.0));
    assert_eq!(first_integrals(&state(0.0, 0.0, 0.0, 0.0)), (0.0, 0.0));
    for p in [0.1, 0.4, P_EXTREMAL, 0.8, 0.95, 1.0] {
        let (h1, h2) = first_integrals(&initial_state(params(p)));
        let k = -4.0 * p * p * (3.0 - 4.0 * p * p);
        assert!((h1 - k).abs() < 1e-15 && (h2 - k).abs() < 1e-15);
        assert_eq!(energy_level(params(p)), k);
    }
}

#[test]
fn hamiltonian_examples() {
    let p = 0.7;
    let h = to_hamiltonian(&initial_state(params(p)));
    let r2 = 2f64.sqrt();
    assert!(h.q1 == 0.0 && (h.q2 - r2 * p).abs() < 1e-15 && (h.dq1 - r2 * p).abs() < 1e-15 && h.dq2 == 0.0);
    assert!((h.h + p * p * (3.0 - 4.0 * p * p)).abs() < 1e-15);
    let h = to_hamiltonian(&state(1.0, 0.0, 0.0, 0.0));
    assert!((h.q1 - 1.0 / r2).abs() < 1e-15 && h.h.abs() < 1e-15);
    assert_eq!(to_hamiltonian(&state(0.0, 0.0, 0.0, 0.0)).h, 0.0);
}

#[test]
fn hamiltonian_consistency_on_random_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let s = state(
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-2.0..2.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        );
        let h = to_hamiltonian(&s);
        let v = (h.q1 * h.q1 + h.q2 * h.q2).powi(2) - 0.5 * h.q1 * h.q1 - 2.0 * h.q2 * h.q2;
        assert!((h.h - (0.5 * (h.dq1 * h.dq1 + h.dq2 * h.dq2) + v)).abs() < 1e-12);
        assert!((h.h - first_integrals(&s).0 / 4.0).abs() < 1e-12 * h.h.abs().max(1.0));
        assert_eq!(potential(h.q1, h.q2), v);
    }
}

#[test]
fn invalid_arguments() {
    let p = params(0.5);
    assert!(matches!(integrate(p, 0.0, TOL), Err(OdeError::InvalidArgument(_))));
    assert!(matches!(integrate(p, -1.0, TOL), Err(OdeError::InvalidArgument(_))));
    assert!(matches!(integrate(p, 1.0, 0.0), Err(OdeError::InvalidArgument(_))));
    assert!(matches!(integrate(p, f64::INFINITY, TOL), Err(OdeError::InvalidArgument(_))));
    let t = integrate(p, 1.0, TOL).unwrap();
    assert!(matches!(t.state_at(1.5), Err(OdeError::OutOfRange(_))));
    assert_eq!(detect_period(params(P_DECAY), 1e-9), Err(OdeError::DecayRejected));
}

#[test]
fn samples_increase_and_respect_drift_contract() {
    let t = integrate(params(0.3), 20.0, 1e-10).unwrap();
    assert!(t.samples().windows(2).all(|w| w[1].y > w[0].y));
    assert!(t.max_drift() <= t.drift_bound());
    assert_eq!(t.drift_bound(), 100.0 * 1e-10);
    assert_eq!(t.y_min(), 0.0);
    assert_eq!(t.y_max(), 20.0);
}

#[test]
fn adaptive_integrator_agrees_with_rk4() {
    let a = PERIOD_EXTREMAL;
    let t = integrate(params(P_EXTREMAL), 5.0 * a, TOL).unwrap();
    assert!(t.max_drift() <= 1e-9);
    let end = t.state_at(5.0 * a).unwrap().vector();
    let fixed = rk4(P_EXTREMAL, 5.0 * a, 20000);
    for i in 0..4 {
        assert!((end[i] - fixed[i]).abs() < 1e-8, "component {i}: {} vs {}", end[i], fixed[i]);
    }
}

#[test]
fn decay_orbit() {
    let p = params(P_DECAY);
    let t = integrate(p, 50.0, TOL).unwrap();
    assert!(t.is_closed_form());
    let last = t.samples().last().unwrap();
    assert!(last.phi1 * last.phi1 + last.phi2 * last.phi2 < 1e-3);
    // The closed form satisfies the equations and the initial data.
    let s0 = decay_solution(0.0);
    let i0 = initial_state(p);
    for (a, b) in s0.vector().iter().zip(i0.vector()) {
        assert!((a - b).abs() < 1e-15);
    }
    for y in [0.3, 1.0, 2.5] {
        let h = 1e-4;
        let (a1, a2) = rhs(&decay_solution(y));
        let d = |f: fn(&State) -> f64| (f(&decay_solution(y + h)) - f(&decay_solution(y - h))) / (2.0 * h);
        assert!((d(|s| s.dphi1) - a1).abs() < 1e-7 && (d(|s| s.dphi2) - a2).abs() < 1e-7);
        assert!((d(|s| s.phi1) - decay_solution(y).dphi1).abs() < 1e-7);
    }
    // Numerical integration leaves the separatrix only slowly at first.
    let num = integrate_numeric(p, 4.0, TOL).unwrap();
    let closed = decay_solution(4.0);
    assert!((num.state_at(4.0).unwrap().phi2 - closed.phi2).abs() < 1e-8);
}

#[test]
fn phi2_changes_sign_beyond_decay() {
    let t = integrate(params(0.9), 10.0, TOL).unwrap();
    assert!(t.samples().iter().any(|s| s.phi2 < 0.0));
}

#[test]
fn extremal_period() {
    let a = y_period(params(P_EXTREMAL));
    assert!((a - PERIOD_EXTREMAL).abs() < 1e-12);
    assert!((a - extremal_period_oracle()).abs() < 1e-12);
    // The trajectory returns to its initial state after a, and not after a/2.
    let t = integrate(params(P_EXTREMAL), a + 0.1, TOL).unwrap();
    let (s0, s1, sh) = (initial_state(params(P_EXTREMAL)), t.state_at(a).unwrap(), t.state_at(a / 2.0).unwrap());
    for (x, y) in s0.vector().iter().zip(s1.vector()) {
        assert!((x - y).abs() < 1e-9);
    }
    assert!((sh.dphi1 - s0.dphi1).abs() > 1.0);
}

#[test]
fn circle_period() {
    let a = y_period(params(1.0));
    assert!((a - PERIOD_CIRCLE).abs() < 1e-11);
    let t = integrate(params(1.0), a + 0.1, TOL).unwrap();
    let (s0, s1) = (initial_state(params(1.0)), t.state_at(a).unwrap());
    for (x, y) in s0.vector().iter().zip(s1.vector()) {
        assert!((x - y).abs() < 1e-9);
    }
}

#[test]
fn rational_ratio_periods() {
    let roots = find_p_for_ratio(RationalTarget::new(3, 2).unwrap(), 1e-3).unwrap();
    assert_eq!(roots.len(), 2);
    for p in roots {
        let pp = params(p);
        let verdict = detect_period(pp, RATIO_MATCH_TOL).unwrap();
        let PeriodVerdict::Periodic { y_period: a, ratio, expected_zeros } = verdict else { panic!("{verdict:?}") };
        assert_eq!(ratio, Some((3, 2)));
        assert_eq!(expected_zeros, 6);
        let t = integrate(pp, a + 0.1, TOL).unwrap();
        let (s0, s1) = (initial_state(pp), t.state_at(a).unwrap());
        for (x, y) in s0.vector().iter().zip(s1.vector()) {
            assert!((x - y).abs() < 1e-7, "p = {p}: {x} vs {y}");
        }
        let c = classify(pp, TOL).unwrap();
        assert_eq!(c.kind, SolutionKind::PeriodicInadmissible);
        assert_eq!(c.zeros_phi1, Some(6));
        assert_eq!(c.zero_positions.len(), 6);
    }
}

#[test]
fn generic_parameters_are_not_periodic() {
    for p in [0.3, 0.55, 0.81] {
        assert!(matches!(detect_period(params(p), RATIO_MATCH_TOL).unwrap(), PeriodVerdict::NotPeriodic { .. }));
        assert_eq!(classify(params(p), TOL).unwrap().kind, SolutionKind::QuasiPeriodic);
    }
}

#[test]
fn rational_matching() {
    assert_eq!(match_rational(1.5, 1e-9, 500), Some((3, 2)));
    assert_eq!(match_rational(44.0 / 29.0, 1e-12, 500), Some((44, 29)));
    assert_eq!(match_rational(std::f64::consts::PI, 1e-9, 500), None);
}

#[test]
fn classification_examples() {
    let c = classify(params(P_EXTREMAL), TOL).unwrap();
    assert_eq!(c.kind, SolutionKind::PeriodicAdmissible);
    assert_eq!(c.zeros_phi1, Some(2));
    assert!(c.min_phi2 > 0.0);
    assert!((c.period_y.unwrap() - PERIOD_EXTREMAL).abs() < 1e-12);
    assert_eq!(classify(params(P_DECAY), TOL).unwrap().kind, SolutionKind::DecayToOrigin);
    for p in [0.9, 0.95, 1.0] {
        let c = classify(params(p), TOL).unwrap();
        assert_eq!(c.kind, SolutionKind::Phi2Vanishes);
        let y = c.phi2_zero.unwrap();
        assert!(integrate(params(p), y + 1.0, TOL).unwrap().state_at(y).unwrap().phi2.abs() < 1e-10);
    }
    assert_eq!(SolutionKind::PeriodicAdmissible.to_string(), "PeriodicAdmissible");
}

#[test]
fn extremal_envelope_touches_unit_circle_twice() {
    let a = PERIOD_EXTREMAL;
    let t = integrate(params(P_EXTREMAL), a + 0.1, TOL).unwrap();
    let r = |y: f64| {
        let s = t.state_at(y).unwrap();
        s.phi1 * s.phi1 + s.phi2 * s.phi2
    };
    let n = 8192;
    let h = a / n as f64;
    let samples: Vec<f64> = (0..=n + 1).map(|i| r((i as f64 + 0.25) * h)).collect();
    let peaks: Vec<usize> = (1..=n)
        .filter(|&i| samples[i] >= samples[i - 1] && samples[i] > samples[i + 1] && samples[i] > 1.0 - 1e-4)
        .collect();
    assert_eq!(peaks.len(), 2);
    for i in peaks {
        // Golden-section refinement of the sampled peak.
        let (mut lo, mut hi) = ((i as f64 - 0.75) * h, (i as f64 + 1.25) * h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
            if r(x1) < r(x2) {
                lo = x1
            } else {
                hi = x2
            }
        }
        let peak = r(0.5 * (lo + hi));
        assert!((peak - 1.0).abs() < 1e-9, "peak = {peak}");
    }
    // The orbit lies on the hyperbola φ₁² − 4φ₂² = −3/2.
    for i in 0..=1000 {
        let s = t.state_at(a * i as f64 / 1000.0).unwrap();
        assert!((s.phi1 * s.phi1 - 4.0 * s.phi2 * s.phi2 + 1.5).abs() < 1e-8);
    }
}

#[test]
fn circle_and_ellipse_orbits() {
    let t = integrate(params(1.0), 20.0, TOL).unwrap();
    for s in t.samples() {
        assert!((s.phi1 * s.phi1 + s.phi2 * s.phi2 - 1.0).abs() < 1e-8);
    }
    let t = integrate(params(P_DECAY), 20.0, TOL).unwrap();
    for s in t.samples() {
        assert!((s.phi1 * s.phi1 + 4.0 * s.phi2 * s.phi2 - 2.0 * 3f64.sqrt() * s.phi2).abs() < 1e-8);
    }
}

#[test]
fn conformal_factor_derivative() {
    let t = integrate(params(0.6), 5.0, TOL).unwrap();
    for y in [0.5, 1.7, 3.9] {
        let h = 1e-5;
        let fd =
            (t.state_at(y + h).unwrap().conformal_factor() - t.state_at(y - h).unwrap().conformal_factor()) / (2.0 * h);
        assert!((fd - t.state_at(y).unwrap().conformal_factor_derivative()).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn first_integrals_conserved(p in 0.02f64..1.0, tol_exp in 8i32..=12) {
        prop_assume!((p - P_DECAY).abs() > 1e-6);
        let tol = 10f64.powi(-tol_exp);
        let t = integrate(params(p), 15.0, tol).unwrap();
        let (h1_0, h2_0) = t.initial_integrals();
        for s in t.samples() {
            let (h1, h2) = first_integrals(s);
            prop_assert!((h1 - h1_0).abs() <= 100.0 * tol && (h2 - h2_0).abs() <= 100.0 * tol);
        }
    }

    #[test]
    fn parity(p in 0.02f64..1.0, y in 0.0f64..12.0) {
        prop_assume!((p - P_DECAY).abs() > 1e-6);
        let f = integrate_to(params(p), 12.0, TOL).unwrap().state_at(y).unwrap();
        let b = integrate_to(params(p), -12.0, TOL).unwrap().state_at(-y).unwrap();
        prop_assert!((f.phi1 + b.phi1).abs() <= 1e-8);
        prop_assert!((f.phi2 - b.phi2).abs() <= 1e-8);
    }

    #[test]
    fn integrals_at_initial_state(p in 0.001f64..1.0) {
        let (h1, h2) = first_integrals(&initial_state(params(p)));
        let k = -4.0 * p * p * (3.0 - 4.0 * p * p);
        prop_assert!((h1 - k).abs() < 1e-14 && (h2 - k).abs() < 1e-14);
    }
}
