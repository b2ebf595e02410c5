//! Complete elliptic integrals.
//!
//! All functions take the *parameter* m = k², not the modulus k. The extremal
//! constant 12πE(k) with k = 2√2/3 is therefore evaluated as 12π·E(m = 8/9).

use std::f64::consts::PI;

use thiserror::Error;

/// Largest parameter for which [`elliptic_k`] returns a value.
pub const K_PARAMETER_LIMIT: f64 = 1.0 - 1e-12;

/// Parameter of the extremal constant: m = (2√2/3)² = 8/9.
pub const EXTREMAL_PARAMETER: f64 = 8.0 / 9.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("parameter m = {0} outside [0, 1]")]
    ParameterDomain(f64),
    #[error("characteristic n = {0} must be < 1")]
    CharacteristicDomain(f64),
    #[error("K(m) diverges as m -> 1 (m = {0})")]
    Divergent(f64),
}

/// Validated arguments: parameter m ∈ [0, 1] and characteristic n < 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticArgs {
    m: f64,
    n: f64,
}

impl EllipticArgs {
    pub fn new(m: f64, n: f64) -> Result<Self, EllipticError> {
        check_parameter(m)?;
        if !(n < 1.0) {
            return Err(EllipticError::CharacteristicDomain(n));
        }
        Ok(Self { m, n })
    }

    /// Arguments built from the modulus k instead of the parameter.
    pub fn from_modulus(k: f64, n: f64) -> Result<Self, EllipticError> {
        Self::new(k * k, n)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    pub fn k(&self) -> Result<f64, EllipticError> {
        elliptic_k(self.m)
    }

    pub fn e(&self) -> Result<f64, EllipticError> {
        elliptic_e(self.m)
    }

    pub fn pi(&self) -> Result<f64, EllipticError> {
        complete_elliptic_pi(self.n, self.m)
    }
}

fn check_parameter(m: f64) -> Result<(), EllipticError> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        Err(EllipticError::ParameterDomain(m))
    }
}

/// AGM iteration; returns (a_N, Σ 2^{n-1} c_n²).
fn agm(m: f64) -> (f64, f64) {
    let mut a = 1.0_f64;
    let mut b = (1.0 - m).sqrt();
    let mut c = m.sqrt();
    let mut weight = 0.5;
    let mut sum = weight * c * c;
    for _ in 0..64 {
        if c <= f64::EPSILON * a {
            break;
        }
        let a_next = 0.5 * (a + b);
        // c_{n+1} = c_n² / (4 a_{n+1}) avoids the cancellation in (a - b) / 2.
        c = c * c / (4.0 * a_next);
        b = (a * b).sqrt();
        a = a_next;
        weight *= 2.0;
        sum += weight * c * c;
    }
    (a, sum)
}

/// K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ).
pub fn elliptic_k(m: f64) -> Result<f64, EllipticError> {
    check_parameter(m)?;
    if m > K_PARAMETER_LIMIT {
        return Err(EllipticError::Divergent(m));
    }
    let (a, _) = agm(m);
    Ok(PI / (2.0 * a))
}

/// E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ, defined on the closed interval [0, 1].
pub fn elliptic_e(m: f64) -> Result<f64, EllipticError> {
    check_parameter(m)?;
    if m == 1.0 {
        return Ok(1.0);
    }
    let (a, sum) = agm(m);
    Ok(PI / (2.0 * a) * (1.0 - sum))
}

/// (K(m), E(m)) from a single AGM run.
pub fn complete_elliptic(m: f64) -> Result<(f64, f64), EllipticError> {
    check_parameter(m)?;
    if m > K_PARAMETER_LIMIT {
        return Err(EllipticError::Divergent(m));
    }
    let (a, sum) = agm(m);
    let k = PI / (2.0 * a);
    Ok((k, k * (1.0 - sum)))
}

/// Π(n, m) = ∫₀^{π/2} dθ / ((1 − n sin²θ) √(1 − m sin²θ)) for n < 1, 0 ≤ m < 1,
/// via Π = R_F(0, 1−m, 1) + (n/3) R_J(0, 1−m, 1, 1−n).
pub fn complete_elliptic_pi(n: f64, m: f64) -> Result<f64, EllipticError> {
    if !(n < 1.0) {
        return Err(EllipticError::CharacteristicDomain(n));
    }
    if !(0.0..1.0).contains(&m) {
        return Err(EllipticError::ParameterDomain(m));
    }
    let y = 1.0 - m;
    let rf = carlson_rf(0.0, y, 1.0);
    if n == 0.0 {
        return Ok(rf);
    }
    Ok(rf + n / 3.0 * carlson_rj(0.0, y, 1.0, 1.0 - n))
}

/// 12π·E(8/9), the extremal value of λ₁·Area on the Klein bottle.
pub fn target_constant() -> f64 {
    12.0 * PI * elliptic_e(EXTREMAL_PARAMETER).expect("8/9 lies in [0, 1]")
}

const CARLSON_TOL: f64 = 1e-4;

/// Carlson R_F(x, y, z); at most one argument may vanish.
pub fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    let mut ave;
    let (mut dx, mut dy, mut dz);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        ave = (x + y + z) / 3.0;
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()) <= CARLSON_TOL {
            break;
        }
    }
    let e2 = dx * dy - dz * dz;
    let e3 = dx * dy * dz;
    (1.0 + (e2 / 24.0 - 0.1 - 3.0 / 44.0 * e3) * e2 + e3 / 14.0) / ave.sqrt()
}

/// Carlson R_C(x, y) for y > 0.
pub fn carlson_rc(mut x: f64, mut y: f64) -> f64 {
    let mut ave;
    let mut s;
    loop {
        let lam = 2.0 * x.sqrt() * y.sqrt() + y;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        ave = (x + 2.0 * y) / 3.0;
        s = (y - ave) / ave;
        if s.abs() <= CARLSON_TOL {
            break;
        }
    }
    (1.0 + s * s * (0.3 + s * (1.0 / 7.0 + s * (0.375 + s * 9.0 / 22.0)))) / ave.sqrt()
}

/// Carlson R_J(x, y, z, p) for p > 0.
pub fn carlson_rj(mut x: f64, mut y: f64, mut z: f64, mut p: f64) -> f64 {
    const C1: f64 = 3.0 / 14.0;
    const C2: f64 = 1.0 / 3.0;
    const C3: f64 = 3.0 / 22.0;
    const C4: f64 = 3.0 / 26.0;
    const C5: f64 = 0.75 * C3;
    const C6: f64 = 1.5 * C4;
    const C7: f64 = 0.5 * C2;
    const C8: f64 = C3 + C3;
    let mut sum = 0.0;
    let mut fac = 1.0;
    let mut ave;
    let (mut dx, mut dy, mut dz, mut dp);
    loop {
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lam = sx * (sy + sz) + sy * sz;
        let alpha = (p * (sx + sy + sz) + sx * sy * sz).powi(2);
        let beta = p * (p + lam).powi(2);
        sum += fac * carlson_rc(alpha, beta);
        fac *= 0.25;
        x = 0.25 * (x + lam);
        y = 0.25 * (y + lam);
        z = 0.25 * (z + lam);
        p = 0.25 * (p + lam);
        ave = 0.2 * (x + y + z + p + p);
        dx = (ave - x) / ave;
        dy = (ave - y) / ave;
        dz = (ave - z) / ave;
        dp = (ave - p) / ave;
        if dx.abs().max(dy.abs()).max(dz.abs()).max(dp.abs()) <= CARLSON_TOL {
            break;
        }
    }
    let ea = dx * (dy + dz) + dy * dz;
    let eb = dx * dy * dz;
    let ec = dp * dp;
    let ed = ea - 3.0 * ec;
    let ee = eb + 2.0 * dp * (ea - ec);
    3.0 * sum
        + fac
            * (1.0 + ed * (-C1 + C5 * ed - C6 * ee) + eb * (C7 + dp * (-C8 + dp * C4)) + dp * ea * (C2 - dp * C3)
                - C2 * dp * ec)
            / (ave * ave.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_values() {
        let (k, e) = complete_elliptic(0.0).unwrap();
        assert!((k - PI / 2.0).abs() < 1e-15);
        assert!((e - PI / 2.0).abs() < 1e-15);
        assert_eq!(elliptic_e(1.0).unwrap(), 1.0);
        assert!(matches!(elliptic_k(1.0), Err(EllipticError::Divergent(_))));
        assert!(matches!(elliptic_k(-0.1), Err(EllipticError::ParameterDomain(_))));
        assert!(matches!(complete_elliptic_pi(1.0, 0.5), Err(EllipticError::CharacteristicDomain(_))));
        assert!(matches!(complete_elliptic_pi(0.5, 1.0), Err(EllipticError::ParameterDomain(_))));
    }

    #[test]
    fn rc_closed_form() {
        // R_C(0, 1) = π/2; R_C(1, 2) = arccos(1/√2) = π/4.
        assert!((carlson_rc(0.0, 1.0) - PI / 2.0).abs() < 1e-15);
        assert!((carlson_rc(1.0, 2.0) - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn modulus_mapping() {
        let args = EllipticArgs::from_modulus(2.0 * 2f64.sqrt() / 3.0, 0.0).unwrap();
        assert!((args.m() - EXTREMAL_PARAMETER).abs() < 1e-15);
    }
}
