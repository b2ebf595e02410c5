//! τ-periods of the separated coordinates and their ratio.
//!
//! u and v oscillate between consecutive roots of
//! P(s) = s(1−2s)(3+2s)(2p²+s)(3−4p²+2s) = −8 Π (s − r_j), with roots
//! r ∈ {0, 1/2, −3/2, −2p², 2p²−3/2}. For an oscillation on [lo, hi],
//!
//! ```text
//! T = 2 ∫_lo^hi ds / √P(s),   P(s) = 8 (s − lo)(hi − s) Π_{other roots} (s − r_j).
//! ```
//!
//! Every root is stored as a + b·p² so that the gaps between roots, which become
//! tiny as p → 0, p → √3/2 or p → √(3/8), are formed without cancellation.

use std::f64::consts::PI;

use rayon::prelude::*;
use thiserror::Error;

use crate::odecore::{OdeError, Params};
use crate::quadrature::{periodic_midpoint, tanh_sinh, Quadrature};
use crate::roots::{self, RootError};

/// Certified range of R on (0, √3/2), widened for quadrature slack.
pub const RATIO_RANGE: (f64, f64) = (1.4795, 1.5088);
/// Tolerance for the refined roots of R(p) = q/m.
pub const ROOT_RESIDUAL: f64 = 1e-11;
/// |3 − 8p²| below this selects the limit branch of T_v.
pub const LIMIT_BRANCH_TOL: f64 = 1e-9;
const TANH_SINH_TOL: f64 = 1e-13;
const CHEBYSHEV_TOL: f64 = 1e-14;
const CHEBYSHEV_MAX_NODES: usize = 1 << 22;
const ENDPOINT_REFINEMENT: i32 = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("the period diverges at p = √3/2")]
    Divergent,
    #[error("invalid parameter: {0}")]
    Params(String),
    #[error("quadrature did not converge at p = {p} (error estimate {error:.3e})")]
    Quadrature { p: f64, error: f64 },
    #[error("target {q}/{m} outside the ratio range ({lo}, {hi})", lo = RATIO_RANGE.0, hi = RATIO_RANGE.1)]
    OutOfRange { q: u64, m: u64 },
    #[error("invalid rational target: {0}")]
    InvalidTarget(String),
    #[error("root refinement failed: {0}")]
    Root(#[from] RootError),
    #[error("refined root p = {p} leaves residual {residual:.3e}")]
    Residual { p: f64, residual: f64 },
}

impl From<OdeError> for PeriodError {
    fn from(e: OdeError) -> Self {
        PeriodError::Params(e.to_string())
    }
}

/// Quadrature scheme for the period integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Double-exponential quadrature of the raw singular integrand (production).
    TanhSinh,
    /// s = lo + (hi − lo) sin²(θ/2) followed by the midpoint rule in θ.
    Chebyshev,
}

/// Which separated coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Root {
    a: f64,
    b: f64,
}

impl Root {
    const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    fn value(&self, p2: f64) -> f64 {
        self.a + self.b * p2
    }

    /// self − other.
    fn gap(&self, other: &Root, p2: f64) -> f64 {
        (self.a - other.a) + (self.b - other.b) * p2
    }
}

const ROOTS: [Root; 5] =
    [Root::new(0.0, 0.0), Root::new(0.5, 0.0), Root::new(-1.5, 0.0), Root::new(0.0, -2.0), Root::new(-1.5, 2.0)];

/// One oscillation of u or v between consecutive roots of P.
#[derive(Debug, Clone)]
pub struct Oscillation {
    p: f64,
    p2: f64,
    lo: Root,
    hi: Root,
    /// Gaps (lo − r_j) for roots below the interval, (r_j − hi) for roots above.
    below: Vec<f64>,
    above: Vec<f64>,
}

impl Oscillation {
    /// Returns `None` for the degenerate v-oscillation at p = √(3/8).
    pub fn new(params: Params, coord: Coordinate) -> Result<Option<Self>, PeriodError> {
        if params.is_decay() {
            return Err(PeriodError::Divergent);
        }
        let p = params.p();
        let p2 = p * p;
        let (lo, hi) = match (coord, p2 < 0.75) {
            (Coordinate::U, true) => (0, 1),
            (Coordinate::U, false) => (4, 1),
            (Coordinate::V, true) => {
                if (3.0 - 8.0 * p2).abs() < LIMIT_BRANCH_TOL {
                    return Ok(None);
                }
                if p2 <= 0.375 {
                    (4, 3)
                } else {
                    (3, 4)
                }
            }
            (Coordinate::V, false) => (2, 0),
        };
        let (lo, hi) = (ROOTS[lo], ROOTS[hi]);
        let (lo_v, hi_v) = (lo.value(p2), hi.value(p2));
        let mut below = Vec::new();
        let mut above = Vec::new();
        for r in ROOTS.iter().filter(|r| **r != lo && **r != hi) {
            if r.value(p2) <= lo_v {
                below.push(lo.gap(r, p2));
            } else {
                debug_assert!(r.value(p2) >= hi_v);
                above.push(r.gap(&hi, p2));
            }
        }
        Ok(Some(Self { p, p2, lo, hi, below, above }))
    }

    pub fn lo(&self) -> f64 {
        self.lo.value(self.p2)
    }

    pub fn hi(&self) -> f64 {
        self.hi.value(self.p2)
    }

    pub fn length(&self) -> f64 {
        self.hi.gap(&self.lo, self.p2)
    }

    /// P(s) / ((s − lo)(hi − s)) = 8 Π (s − r_j), given dl = s − lo and dr = hi − s.
    pub fn reduced(&self, dl: f64, dr: f64) -> f64 {
        let b: f64 = self.below.iter().map(|g| g + dl).product();
        let a: f64 = self.above.iter().map(|g| g + dr).product();
        // (s − r_j) < 0 for every root above the interval.
        let sign = if self.above.len().is_multiple_of(2) { 1.0 } else { -1.0 };
        8.0 * sign * a * b
    }

    fn point(&self, dl: f64, dr: f64) -> f64 {
        if dl <= dr {
            self.lo() + dl
        } else {
            self.hi() - dr
        }
    }

    /// 2 ∫ w(s) ds / √P(s) over the oscillation.
    pub fn integral<W>(&self, weight: W, scheme: Scheme) -> Quadrature
    where
        W: Fn(f64) -> f64,
    {
        let len = self.length();
        if len == 0.0 || scheme == Scheme::Chebyshev {
            return self.chebyshev(weight, len);
        }
        let q = tanh_sinh(
            |_, dl, dr| weight(self.point(dl, dr)) / (dl * dr * self.reduced(dl, dr)).sqrt(),
            self.lo(),
            self.hi(),
            TANH_SINH_TOL,
        );
        Quadrature { value: 2.0 * q.value, error: 2.0 * q.error, ..q }
    }

    fn chebyshev<W>(&self, weight: W, len: f64) -> Quadrature
    where
        W: Fn(f64) -> f64,
    {
        let g = |theta: f64| {
            let (sh, ch) = (0.5 * theta).sin_cos();
            let (dl, dr) = (len * sh * sh, len * ch * ch);
            weight(self.point(dl, dr)) / self.reduced(dl, dr).sqrt()
        };
        let q = periodic_midpoint(g, 0.0, PI, CHEBYSHEV_TOL, CHEBYSHEV_MAX_NODES);
        Quadrature { value: 2.0 * q.value, error: 2.0 * q.error, ..q }
    }

    pub fn p(&self) -> f64 {
        self.p
    }
}

/// T_v at p = √(3/8), the limit 8π/(3√10).
pub fn tv_limit() -> f64 {
    8.0 * PI / (3.0 * 10f64.sqrt())
}

fn checked(q: Quadrature, p: f64) -> Result<Quadrature, PeriodError> {
    if q.value.is_finite() && q.value > 0.0 && q.error <= 1e-9 * q.value {
        Ok(q)
    } else {
        Err(PeriodError::Quadrature { p, error: q.error })
    }
}

/// T_u with the given scheme.
pub fn period_u_with(params: Params, scheme: Scheme) -> Result<Quadrature, PeriodError> {
    let osc = Oscillation::new(params, Coordinate::U)?.expect("u never degenerates");
    checked(osc.integral(|_| 1.0, scheme), params.p())
}

/// T_v with the given scheme; the limit branch is used when |3 − 8p²| < 1e−9.
pub fn period_v_with(params: Params, scheme: Scheme) -> Result<Quadrature, PeriodError> {
    match Oscillation::new(params, Coordinate::V)? {
        None => Ok(Quadrature { value: tv_limit(), error: 0.0, evaluations: 0, converged: true }),
        Some(osc) => checked(osc.integral(|_| 1.0, scheme), params.p()),
    }
}

/// τ-period of u. For p > √3/2 the oscillation runs over [2p² − 3/2, 1/2].
pub fn period_u(params: Params) -> Result<f64, PeriodError> {
    Ok(period_u_with(params, Scheme::TanhSinh)?.value)
}

/// τ-period of v. For p > √3/2 the oscillation runs over [−3/2, 0].
pub fn period_v(params: Params) -> Result<f64, PeriodError> {
    Ok(period_v_with(params, Scheme::TanhSinh)?.value)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodData {
    pub p: f64,
    pub tu: f64,
    pub tv: f64,
    pub r: f64,
    pub err: f64,
}

pub fn ratio(params: Params) -> Result<PeriodData, PeriodError> {
    let u = period_u_with(params, Scheme::TanhSinh)?;
    let v = period_v_with(params, Scheme::TanhSinh)?;
    let r = v.value / u.value;
    Ok(PeriodData { p: params.p(), tu: u.value, tv: v.value, r, err: r * (u.error / u.value + v.error / v.value) })
}

/// [`ratio`] over a grid, evaluated in parallel; row order follows the grid.
pub fn tabulate(grid: &[f64]) -> Vec<Result<PeriodData, PeriodError>> {
    grid.par_iter().map(|&p| Params::new(p).map_err(PeriodError::from).and_then(ratio)).collect()
}

/// Periods and the time integrals ∫u dτ, ∫v dτ over one oscillation of each.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauIntegrals {
    pub tu: f64,
    pub tv: f64,
    pub int_u: f64,
    pub int_v: f64,
}

impl TauIntegrals {
    /// Constant value of v on the degenerate branch.
    pub fn v_const(&self) -> f64 {
        -0.75
    }
}

pub fn tau_integrals(params: Params) -> Result<TauIntegrals, PeriodError> {
    let p = params.p();
    let osc_u = Oscillation::new(params, Coordinate::U)?.expect("u never degenerates");
    let tu = checked(osc_u.integral(|_| 1.0, Scheme::TanhSinh), p)?.value;
    let int_u = osc_u.integral(|s| s, Scheme::TanhSinh).value;
    let (tv, int_v) = match Oscillation::new(params, Coordinate::V)? {
        None => (tv_limit(), -0.75 * tv_limit()),
        Some(osc) => {
            let tv = checked(osc.integral(|_| 1.0, Scheme::TanhSinh), p)?.value;
            (tv, osc.integral(|s| s, Scheme::TanhSinh).value)
        }
    };
    Ok(TauIntegrals { tu, tv, int_u, int_v })
}

/// Irreducible fraction q/m.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RationalTarget {
    q: u64,
    m: u64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl RationalTarget {
    pub fn new(q: u64, m: u64) -> Result<Self, PeriodError> {
        if q == 0 || m == 0 {
            return Err(PeriodError::InvalidTarget(format!("{q}/{m}: need positive integers")));
        }
        if gcd(q, m) != 1 {
            return Err(PeriodError::InvalidTarget(format!("{q}/{m} is not irreducible")));
        }
        Ok(Self { q, m })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn value(&self) -> f64 {
        self.q as f64 / self.m as f64
    }
}

impl std::str::FromStr for RationalTarget {
    type Err = PeriodError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PeriodError::InvalidTarget(format!("expected q/m, got {s:?}"));
        let (q, m) = s.split_once('/').ok_or_else(bad)?;
        let q = q.trim().parse().map_err(|_| bad())?;
        let m = m.trim().parse().map_err(|_| bad())?;
        Self::new(q, m)
    }
}

impl std::fmt::Display for RationalTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.q, self.m)
    }
}

/// Scan grid on (0, √3/2) with geometric refinement towards both ends.
pub fn scan_grid(step: f64) -> Vec<f64> {
    let end = crate::P_DECAY;
    let mut grid: Vec<f64> = (1..).map(|k| k as f64 * step).take_while(|&p| p < end - 0.5 * step).collect();
    for j in 1..=ENDPOINT_REFINEMENT {
        let d = step * 2f64.powi(-j);
        grid.push(d);
        grid.push(end - d);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

/// All p ∈ (0, √3/2) with R(p) = q/m found from sign changes on the scan grid.
pub fn find_p_for_ratio(target: RationalTarget, step: f64) -> Result<Vec<f64>, PeriodError> {
    let x = target.value();
    if !(x > RATIO_RANGE.0 && x < RATIO_RANGE.1) {
        return Err(PeriodError::OutOfRange { q: target.q, m: target.m });
    }
    if !(step > 0.0 && step < 0.1) {
        return Err(PeriodError::Params(format!("scan step must lie in (0, 0.1), got {step}")));
    }
    let grid = scan_grid(step);
    let residual = |p: f64| -> Result<f64, PeriodError> { Ok(ratio(Params::new(p)?)?.r - x) };
    let values: Vec<f64> = grid.par_iter().map(|&p| residual(p)).collect::<Result<_, _>>()?;

    let mut found = Vec::new();
    for i in 0..grid.len() {
        if values[i] == 0.0 {
            found.push(grid[i]);
            continue;
        }
        if i + 1 < grid.len() && values[i + 1] != 0.0 && values[i].signum() != values[i + 1].signum() {
            let f = |p: f64| residual(p).unwrap_or(f64::NAN);
            let p = roots::brent(f, grid[i], grid[i + 1], 1e-15, 4.0 * f64::EPSILON, 200)?;
            let res = residual(p)?.abs();
            if res > ROOT_RESIDUAL {
                return Err(PeriodError::Residual { p, residual: res });
            }
            found.push(p);
        }
    }
    Ok(found)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_polynomial_matches_p() {
        for &p in &[0.2, 0.5, 0.7, 0.9] {
            let params = Params::new(p).unwrap();
            for coord in [Coordinate::U, Coordinate::V] {
                let osc = Oscillation::new(params, coord).unwrap().unwrap();
                let s = osc.lo() + 0.3 * osc.length();
                let (dl, dr) = (s - osc.lo(), osc.hi() - s);
                let direct = crate::geometry::poly_p(s, params);
                let factored = dl * dr * osc.reduced(dl, dr);
                assert!((direct - factored).abs() < 1e-12 * direct.abs().max(1e-3), "{p} {coord:?}");
                assert!(direct > 0.0);
            }
        }
    }

    #[test]
    fn targets() {
        assert!("3/2".parse::<RationalTarget>().is_ok());
        assert!("6/4".parse::<RationalTarget>().is_err());
        assert!("x".parse::<RationalTarget>().is_err());
        let one = RationalTarget::new(1, 1).unwrap();
        assert!(matches!(find_p_for_ratio(one, 1e-3), Err(PeriodError::OutOfRange { .. })));
    }
}
