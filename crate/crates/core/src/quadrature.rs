//! Quadrature kernels.
//!
//! [`tanh_sinh`] handles integrands with inverse-square-root endpoint
//! singularities. The integrand receives the node together with its distances to
//! both endpoints, computed without cancellation, so that factors such as
//! (s − lo) or (hi − s) can be formed exactly near the ends.
//!
//! [`periodic_midpoint`] is the midpoint rule on a full period of a smooth
//! periodic integrand, where it converges geometrically.

use std::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Difference between the last two refinement levels.
    pub error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

const TANH_SINH_T_MAX: f64 = 6.0;
const TANH_SINH_MAX_LEVEL: usize = 12;

/// ∫_lo^hi f(x, x − lo, hi − x) dx by double-exponential quadrature with step halving.
pub fn tanh_sinh<F>(f: F, lo: f64, hi: f64, rel_tol: f64) -> Quadrature
where
    F: Fn(f64, f64, f64) -> f64,
{
    assert!(hi > lo, "tanh_sinh needs lo < hi");
    let half = 0.5 * (hi - lo);
    let mut evaluations = 0;

    // Contribution of the node pair at ±t, already multiplied by the DE weight.
    let mut pair = |t: f64| -> f64 {
        let u = FRAC_PI_2 * t.sinh();
        let cu = u.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cu * cu);
        // 1 − tanh(u), exact for large u.
        let comp = (-u).exp() / cu;
        let near = half * comp;
        let far = half * (2.0 - comp);
        let mut acc = 0.0;
        if near > 0.0 {
            // Right node: distance `near` from hi.
            acc += f(hi - near, far, near);
            // Left node: distance `near` from lo.
            acc += f(lo + near, near, far);
            evaluations += 2;
        }
        w * acc
    };

    let mut h = 1.0;
    let mut sum = {
        let centre = FRAC_PI_2 * f(lo + half, half, half);
        let mut s = centre;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > TANH_SINH_T_MAX {
                break;
            }
            s += pair(t);
            k += 1;
        }
        s
    };
    let mut estimate = h * sum * half;
    let mut error = f64::INFINITY;
    let mut converged = false;
    for level in 1..=TANH_SINH_MAX_LEVEL {
        h *= 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > TANH_SINH_T_MAX {
                break;
            }
            sum += pair(t);
            k += 2;
        }
        let next = h * sum * half;
        error = (next - estimate).abs();
        estimate = next;
        if level >= 3 && error <= rel_tol * estimate.abs() {
            converged = true;
            break;
        }
    }
    Quadrature { value: estimate, error, evaluations: evaluations + 1, converged }
}

/// ∫_a^b g(θ) dθ for g smooth and (b − a)-periodic, by midpoint rules with
/// doubling until successive values agree to `rel_tol`.
pub fn periodic_midpoint<F>(g: F, a: f64, b: f64, rel_tol: f64, max_nodes: usize) -> Quadrature
where
    F: Fn(f64) -> f64,
{
    let mut n = 16;
    let mut evaluations = 0;
    let mut rule = |n: usize| {
        let h = (b - a) / n as f64;
        let s: f64 = (0..n).map(|i| g(a + (i as f64 + 0.5) * h)).sum();
        evaluations += n;
        s * h
    };
    let mut prev = rule(n);
    loop {
        n *= 2;
        let next = rule(n);
        let error = (next - prev).abs();
        if error <= rel_tol * next.abs() || n >= max_nodes {
            return Quadrature { value: next, error, evaluations, converged: error <= rel_tol * next.abs() };
        }
        prev = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn arcsine_weight() {
        // ∫_{-1}^{1} dx / √(1 − x²) = π.
        let q = tanh_sinh(|_, dl, dr| 1.0 / (dl * dr).sqrt(), -1.0, 1.0, 1e-15);
        assert!(q.converged);
        assert!((q.value - PI).abs() < 1e-14, "{}", q.value);
    }

    #[test]
    fn near_singular_endpoint() {
        // ∫_0^1 dx / √(x (x + ε)) = 2 asinh(1/√ε).
        let eps = 1e-12;
        let q = tanh_sinh(|x, dl, _| 1.0 / (dl * (x + eps)).sqrt(), 0.0, 1.0, 1e-14);
        let exact = 2.0 * (1.0 / eps.sqrt()).asinh();
        assert!(((q.value - exact) / exact).abs() < 1e-13, "{} vs {exact}", q.value);
    }

    #[test]
    fn smooth_polynomial() {
        let q = tanh_sinh(|x, _, _| x * x * x - x, 0.0, 2.0, 1e-15);
        assert!((q.value - 2.0).abs() < 1e-14);
    }

    #[test]
    fn midpoint_periodic() {
        // ∫_0^{2π} dθ / (2 + cos θ) = 2π/√3.
        let q = periodic_midpoint(|t| 1.0 / (2.0 + t.cos()), 0.0, 2.0 * PI, 1e-15, 1 << 16);
        assert!((q.value - 2.0 * PI / 3f64.sqrt()).abs() < 1e-14);
    }
}
