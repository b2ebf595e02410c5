//! Algebraic structure of the (φ₁, φ₂) system: quadrics, the discriminant Δ,
//! parabolic coordinates (u, v) that separate the dynamics, and the intervals in
//! which u and v oscillate.
//!
//! With q₁ = φ₁/√2, q₂ = √2 φ₂ the parabolic coordinates are defined by
//! q₁² = −(2/3)uv and q₂² = (3+2u)(3+2v)/6. Along a solution with initial value p
//! they satisfy u̇² = P(u), v̇² = P(v) in the time τ with dτ/dy = 1/(u − v).

use thiserror::Error;

use crate::odecore::{energy_level, first_integrals, Params, State};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("p = √3/2 has no oscillation intervals (the orbit decays to the origin)")]
    DecayCase,
    #[error("critical points need 0 < p < √3/2 (got p = {0})")]
    CriticalPointsDomain(f64),
    #[error("state is off the energy surface: |H1 - K| = {h1_defect:.3e}, |H2 - K| = {h2_defect:.3e}")]
    OffShell { h1_defect: f64, h2_defect: f64 },
    #[error("negative radicand {value:.3e} in the inverse parabolic map")]
    NegativeRadicand { value: f64 },
    #[error("u - v = {0:.3e} is not positive")]
    Collision(f64),
}

/// Energy-surface tolerance for [`to_parabolic`].
pub const ON_SHELL_TOL: f64 = 1e-8;
/// Negative radicands above this are roundoff and clamped to zero.
pub const RADICAND_CLAMP: f64 = 1e-12;
/// Below this |φᵢ| the velocity φᵢ′ is recovered from H1 instead of φᵢφᵢ′ / φᵢ.
const VELOCITY_FALLBACK: f64 = 1e-4;

/// P(s) = s(1−2s)(3+2s)(2p²+s)(3−4p²+2s).
pub fn poly_p(s: f64, params: Params) -> f64 {
    let p2 = params.p() * params.p();
    s * (1.0 - 2.0 * s) * (3.0 + 2.0 * s) * (2.0 * p2 + s) * (3.0 - 4.0 * p2 + 2.0 * s)
}

/// P′(s), from the logarithmic derivative of the factored form.
pub fn poly_p_derivative(s: f64, params: Params) -> f64 {
    let p2 = params.p() * params.p();
    let f = [s, 1.0 - 2.0 * s, 3.0 + 2.0 * s, 2.0 * p2 + s, 3.0 - 4.0 * p2 + 2.0 * s];
    let df = [1.0, -2.0, 2.0, 1.0, 2.0];
    (0..5).map(|i| df[i] * (0..5).filter(|&j| j != i).map(|j| f[j]).product::<f64>()).sum()
}

/// Q(r) = 2r(1−2r)[2p²+εr][2−2p²−εr][3−4p²−2εr] with ε = 3−8p².
pub fn poly_q(r: f64, params: Params) -> f64 {
    let p2 = params.p() * params.p();
    let eps = 3.0 - 8.0 * p2;
    2.0 * r * (1.0 - 2.0 * r) * (2.0 * p2 + eps * r) * (2.0 - 2.0 * p2 - eps * r) * (3.0 - 4.0 * p2 - 2.0 * eps * r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricValues {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub delta: f64,
}

pub fn quadrics(phi1: f64, phi2: f64, params: Params) -> QuadricValues {
    let p2 = params.p() * params.p();
    let c = 3.0 - 4.0 * p2;
    let (a, b) = (phi1 * phi1, phi2 * phi2);
    let w1 = a + b - 1.0;
    let w2 = p2 * a - c * b + p2 * c;
    let w3 = -c * a + 16.0 * p2 * b - 4.0 * p2 * c;
    let w4 = (a + 4.0 * b).powi(2) - 12.0 * b;
    let delta = -64.0 * a * b * w1 * w2 * w3;
    QuadricValues { w1, w2, w3, w4, delta }
}

/// Oscillation intervals I₁ = [alpha0, 1/2] of u and I₂ = [a0, a1] of v.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalData {
    pub alpha0: f64,
    pub i1: (f64, f64),
    pub a0: f64,
    pub a1: f64,
}

impl IntervalData {
    pub fn i2(&self) -> (f64, f64) {
        (self.a0, self.a1)
    }

    pub fn disjoint(&self) -> bool {
        self.a1 < self.alpha0 || self.i1.1 < self.a0
    }
}

pub fn intervals(params: Params) -> Result<IntervalData, GeometryError> {
    let p2 = params.p() * params.p();
    if params.is_decay() {
        return Err(GeometryError::DecayCase);
    }
    let data = if p2 < 0.75 {
        let (a0, a1) = if p2 <= 0.375 { (2.0 * p2 - 1.5, -2.0 * p2) } else { (-2.0 * p2, 2.0 * p2 - 1.5) };
        IntervalData { alpha0: 0.0, i1: (0.0, 0.5), a0, a1 }
    } else {
        let alpha0 = 2.0 * p2 - 1.5;
        IntervalData { alpha0, i1: (alpha0, 0.5), a0: -1.5, a1: 0.0 }
    };
    Ok(data)
}

/// Parabolic image of a state: (u, v), their τ-derivatives and the signs of φ₁, φ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParabolicState {
    pub u: f64,
    pub v: f64,
    pub du: f64,
    pub dv: f64,
    /// Rescaled time. [`to_parabolic`] sets it to zero; trajectory code fills it in.
    pub tau: f64,
    pub sign1: f64,
    pub sign2: f64,
}

fn sign_of(x: f64, dx: f64) -> f64 {
    if x > 0.0 || (x == 0.0 && dx >= 0.0) {
        1.0
    } else {
        -1.0
    }
}

/// (u, v) from (φ₁, φ₂), with u ≥ 0 ≥ v.
pub fn parabolic_coordinates(phi1: f64, phi2: f64) -> (f64, f64) {
    let sum = 2.0 * phi2 * phi2 + 0.5 * phi1 * phi1 - 1.5;
    let prod = -0.75 * phi1 * phi1;
    let root = (sum * sum - 4.0 * prod).sqrt();
    if sum >= 0.0 {
        let u = 0.5 * (sum + root);
        let v = if u > 0.0 { prod / u } else { 0.0 };
        (u, v)
    } else {
        let v = 0.5 * (sum - root);
        (prod / v, v)
    }
}

pub fn to_parabolic(state: &State, params: Params) -> Result<ParabolicState, GeometryError> {
    let level = energy_level(params);
    let (h1, h2) = first_integrals(state);
    let (h1_defect, h2_defect) = ((h1 - level).abs(), (h2 - level).abs());
    if h1_defect > ON_SHELL_TOL || h2_defect > ON_SHELL_TOL {
        return Err(GeometryError::OffShell { h1_defect, h2_defect });
    }
    let (u, v) = parabolic_coordinates(state.phi1, state.phi2);
    let x = state.phi1 * state.dphi1;
    let y = state.phi2 * state.dphi2;
    let ds = x + 4.0 * y;
    let dprod = -1.5 * x;
    Ok(ParabolicState {
        u,
        v,
        du: u * ds - dprod,
        dv: dprod - v * ds,
        tau: 0.0,
        sign1: sign_of(state.phi1, state.dphi1),
        sign2: sign_of(state.phi2, state.dphi2),
    })
}

fn checked_sqrt(x: f64) -> Result<f64, GeometryError> {
    if x >= 0.0 {
        Ok(x.sqrt())
    } else if x >= -RADICAND_CLAMP {
        Ok(0.0)
    } else {
        Err(GeometryError::NegativeRadicand { value: x })
    }
}

/// Inverse of [`to_parabolic`]; the state's y is set to zero.
pub fn from_parabolic(ps: &ParabolicState, params: Params) -> Result<State, GeometryError> {
    let gap = ps.u - ps.v;
    if !(gap > 0.0) {
        return Err(GeometryError::Collision(gap));
    }
    let phi1 = ps.sign1 * checked_sqrt(-4.0 * ps.u * ps.v / 3.0)?;
    let phi2 = ps.sign2 * checked_sqrt((3.0 + 2.0 * ps.u) * (3.0 + 2.0 * ps.v) / 12.0)?;
    // X = φ₁φ₁′ and Y = φ₂φ₂′ from d(uv)/dy = −(3/2)X and d(u+v)/dy = X + 4Y.
    let x = -(2.0 / 3.0) * (ps.du * ps.v + ps.u * ps.dv) / gap;
    let y = 0.25 * ((ps.du + ps.dv) / gap - x);

    // φ₁′² + 4φ₂′² fixed by H1.
    let (a, b) = (phi1 * phi1, phi2 * phi2);
    let kinetic = energy_level(params) - ((a + 4.0 * b).powi(2) - a - 16.0 * b);
    let (d1, d2) = if phi1.abs() >= VELOCITY_FALLBACK && phi2.abs() >= VELOCITY_FALLBACK {
        (x / phi1, y / phi2)
    } else if phi1.abs() < VELOCITY_FALLBACK {
        let d2 = y / phi2;
        let sign = if x != 0.0 { x.signum() * ps.sign1 } else { ps.sign1 };
        (sign * checked_sqrt(kinetic - 4.0 * d2 * d2)?, d2)
    } else {
        let d1 = x / phi1;
        let sign = if y != 0.0 { y.signum() * ps.sign2 } else { ps.sign2 };
        (d1, sign * 0.5 * checked_sqrt(kinetic - d1 * d1)?)
    };
    Ok(State { y: 0.0, phi1, phi2, dphi1: d1, dphi2: d2 })
}

/// (u″(0), v″(0)) with respect to y.
pub fn accel0(params: Params) -> Result<(f64, f64), GeometryError> {
    if params.is_decay() {
        return Err(GeometryError::DecayCase);
    }
    let p2 = params.p() * params.p();
    let c = 3.0 - 4.0 * p2;
    let first = 12.0 * p2 / c;
    let second = 16.0 * p2 * (1.0 - p2) * (3.0 - 8.0 * p2) / c;
    Ok(if p2 < 0.75 { (first, second) } else { (second, first) })
}

/// The critical points A, B, A′, B′ of the orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalPoints {
    pub a: (f64, f64),
    pub b: (f64, f64),
    pub a_prime: (f64, f64),
    pub b_prime: (f64, f64),
}

impl CriticalPoints {
    pub fn all(&self) -> [(f64, f64); 4] {
        [self.a, self.b, self.a_prime, self.b_prime]
    }
}

pub fn critical_points(params: Params) -> Result<CriticalPoints, GeometryError> {
    let p = params.p();
    if !(p * p < 0.75) {
        return Err(GeometryError::CriticalPointsDomain(p));
    }
    let x = 2.0 * p / 3f64.sqrt();
    let y = (1.0 - 4.0 * p * p / 3.0).sqrt();
    Ok(CriticalPoints { a: (x, y), b: (y, x), a_prime: (-x, y), b_prime: (-y, x) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(p: f64) -> Params {
        Params::new(p).unwrap()
    }

    #[test]
    fn p_examples() {
        let pr = params(0.5);
        assert_eq!(poly_p(0.0, pr), 0.0);
        assert_eq!(poly_p(0.5, pr), 0.0);
        assert!(poly_p(-0.5, pr).abs() < 1e-16);
        assert!((poly_p(0.25, pr) - 0.8203125).abs() < 1e-15);
        assert!((poly_q(0.25, pr) - 0.3515625).abs() < 1e-15);
    }

    #[test]
    fn interval_table() {
        let i = intervals(params(0.5)).unwrap();
        assert_eq!((i.i1, i.i2()), ((0.0, 0.5), (-1.0, -0.5)));
        let i = intervals(params(0.7)).unwrap();
        assert!((i.a0 + 0.98).abs() < 1e-15 && (i.a1 + 0.52).abs() < 1e-15);
        let i = intervals(params(0.9)).unwrap();
        assert!((i.alpha0 - 0.12).abs() < 1e-15);
        assert_eq!(i.i2(), (-1.5, 0.0));
        assert_eq!(intervals(params(crate::P_DECAY)), Err(GeometryError::DecayCase));
    }

    #[test]
    fn accel_table() {
        assert_eq!(accel0(params(0.5)).unwrap(), (1.5, 1.5));
        assert!(accel0(params(crate::P_EXTREMAL)).unwrap().1.abs() < 1e-14);
        assert_eq!(accel0(params(1.0)).unwrap().0, 0.0);
    }
}
