//! Laplace spectra of metrics of revolution on the Klein bottle.
//!
//! Separating variables along the rotation direction reduces the Laplacian to
//! Sturm–Liouville problems, one per harmonic index k:
//!
//! ```text
//! −(p ψ′)′ + r_k ψ = λ w ψ   on a reduced interval [x0, x1],
//! ```
//!
//! Neumann conditions at both ends for even k, Dirichlet for odd k. For a
//! conformal profile f(y)(dx² + dy²) the interval is [0, a/2] with p = 1,
//! r_k = k², w = f. For a general profile M(v)du² + N(v)dv² it is the arc between
//! the two fixed points of the Klein reflection in v, with p = √(M/N),
//! r_k = ω_k²√(N/M), w = √(MN) and ω_k = 2πk / (u-period).
//!
//! Each problem is discretised by second-order finite differences, its
//! eigenvalues found by Sturm-sequence bisection, and two grids are combined by
//! Richardson extrapolation.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::elliptic::target_constant;
use crate::odecore::{self, OdeError, Params, PeriodVerdict, SolutionKind};
use crate::quadrature::tanh_sinh;

pub type Coefficient = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default harmonic cutoff for [`lambda1`].
pub const DEFAULT_K_MAX: usize = 4;
/// Default number of grid intervals on the reduced interval.
pub const DEFAULT_GRID: usize = 1024;
/// Samples per period of a reconstructed conformal factor.
pub const RECONSTRUCTION_SAMPLES: usize = 8192;
/// Integration tolerance used to reconstruct profiles.
pub const RECONSTRUCTION_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("profile is not positive: {0}")]
    Domain(String),
    #[error("grid refinement does not converge for k = {k}: λ(N) = {coarse}, λ(2N) = {fine}")]
    Accuracy { k: usize, coarse: f64, fine: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("p = {p} is not admissible ({kind})")]
    NotAdmissible { p: f64, kind: SolutionKind },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

/// Periodic function stored as values and derivatives on a uniform grid,
/// evaluated by cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct SampledFunction {
    period: f64,
    values: Vec<f64>,
    derivatives: Vec<f64>,
}

impl SampledFunction {
    /// Samples at y_i = i·period/n, i = 0..n.
    pub fn new(period: f64, values: Vec<f64>, derivatives: Vec<f64>) -> Result<Self, SpectralError> {
        if values.len() != derivatives.len() || values.len() < 8 || !values.len().is_multiple_of(2) {
            return Err(SpectralError::InvalidArgument(
                "need an even number (≥ 8) of samples with matching derivatives".into(),
            ));
        }
        if !(period > 0.0) {
            return Err(SpectralError::InvalidArgument(format!("period must be positive, got {period}")));
        }
        Ok(Self { period, values, derivatives })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    fn step(&self) -> f64 {
        self.period / self.values.len() as f64
    }

    pub fn eval(&self, y: f64) -> f64 {
        let n = self.values.len();
        let h = self.step();
        let z = y.rem_euclid(self.period) / h;
        let i = (z.floor() as usize).min(n - 1);
        let t = z - i as f64;
        let j = (i + 1) % n;
        let (t2, t3) = (t * t, t * t * t);
        (2.0 * t3 - 3.0 * t2 + 1.0) * self.values[i]
            + (t3 - 2.0 * t2 + t) * h * self.derivatives[i]
            + (3.0 * t2 - 2.0 * t3) * self.values[j]
            + (t3 - t2) * h * self.derivatives[j]
    }

    /// Exact integral of the interpolant over [0, period/2].
    pub fn half_period_integral(&self) -> f64 {
        let h = self.step();
        let n = self.values.len();
        (0..n / 2)
            .map(|i| {
                0.5 * h * (self.values[i] + self.values[i + 1])
                    + h * h / 12.0 * (self.derivatives[i] - self.derivatives[i + 1])
            })
            .sum()
    }
}

/// Conformal factor f of a profile f(y)(dx² + dy²).
#[derive(Clone)]
pub enum ConformalFactor {
    Constant(f64),
    Sampled(SampledFunction),
    Function(Coefficient),
}

impl ConformalFactor {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Self::Constant(c) => *c,
            Self::Sampled(s) => s.eval(y),
            Self::Function(f) => f(y),
        }
    }

    fn half_period_integral(&self, period: f64) -> f64 {
        match self {
            Self::Constant(c) => c * 0.5 * period,
            Self::Sampled(s) => s.half_period_integral(),
            Self::Function(f) => tanh_sinh(|y, _, _| f(y), 0.0, 0.5 * period, 1e-15).value,
        }
    }
}

#[derive(Clone)]
pub enum ProfileKind {
    /// f(y)(dx² + dy²), x ∈ [0, 2π), y-period a, f even.
    Conformal { factor: ConformalFactor, period: f64 },
    /// M(v)du² + N(v)dv², v-period `period`; `reduced` is the arc between the
    /// fixed points of the Klein reflection in v.
    General { m: Coefficient, n: Coefficient, period: f64, reduced: (f64, f64), u_period: f64 },
}

#[derive(Clone)]
pub struct MetricProfile {
    pub kind: ProfileKind,
    pub description: String,
    /// Constant multiplying the whole metric.
    pub scale: f64,
}

impl fmt::Debug for MetricProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MetricProfile")
            .field("description", &self.description)
            .field("scale", &self.scale)
            .finish_non_exhaustive()
    }
}

/// Coefficients of one reduced Sturm–Liouville problem.
struct SlProblem<'a> {
    x0: f64,
    x1: f64,
    p: Box<dyn Fn(f64) -> f64 + 'a>,
    r: Box<dyn Fn(f64) -> f64 + 'a>,
    w: Box<dyn Fn(f64) -> f64 + 'a>,
    dirichlet: bool,
}

impl MetricProfile {
    pub fn conformal(factor: ConformalFactor, period: f64, description: impl Into<String>) -> Self {
        Self { kind: ProfileKind::Conformal { factor, period }, description: description.into(), scale: 1.0 }
    }

    /// Flat metric dx² + dy² with y-period a.
    pub fn flat(a: f64) -> Self {
        Self::conformal(ConformalFactor::Constant(1.0), a, format!("flat a={a}"))
    }

    /// The same profile with the metric multiplied by c.
    pub fn scaled(&self, c: f64) -> Self {
        Self { scale: self.scale * c, description: format!("{} x{c}", self.description), ..self.clone() }
    }

    fn problem(&self, k: usize) -> SlProblem<'_> {
        let dirichlet = k % 2 == 1;
        let scale = self.scale;
        match &self.kind {
            ProfileKind::Conformal { factor, period } => {
                let k2 = (k * k) as f64;
                SlProblem {
                    x0: 0.0,
                    x1: 0.5 * period,
                    p: Box::new(|_| 1.0),
                    r: Box::new(move |_| k2),
                    w: Box::new(move |y| scale * factor.eval(y)),
                    dirichlet,
                }
            }
            ProfileKind::General { m, n, reduced, u_period, .. } => {
                let omega2 = (2.0 * PI * k as f64 / u_period).powi(2);
                SlProblem {
                    x0: reduced.0,
                    x1: reduced.1,
                    p: Box::new(move |v| (m(v) / n(v)).sqrt()),
                    r: Box::new(move |v| omega2 * (n(v) / m(v)).sqrt()),
                    w: Box::new(move |v| scale * (m(v) * n(v)).sqrt()),
                    dirichlet,
                }
            }
        }
    }

    /// Riemannian area of the Klein bottle.
    pub fn area(&self) -> f64 {
        match &self.kind {
            ProfileKind::Conformal { factor, period } => 2.0 * PI * self.scale * factor.half_period_integral(*period),
            ProfileKind::General { m, n, reduced, u_period, .. } => {
                let q = tanh_sinh(|v, _, _| (m(v) * n(v)).sqrt(), reduced.0, reduced.1, 1e-15);
                u_period * self.scale * q.value
            }
        }
    }
}

/// Closed-form extremal metric g₀ = (9 + c²)/c du² + (9 + c²)/c² dv², c = 1 + 8cos²v.
pub fn g0_profile() -> MetricProfile {
    let c = |v: f64| 1.0 + 8.0 * v.cos().powi(2);
    let m: Coefficient = Arc::new(move |v| {
        let c = c(v);
        (9.0 + c * c) / c
    });
    let n: Coefficient = Arc::new(move |v| {
        let c = c(v);
        (9.0 + c * c) / (c * c)
    });
    // The reflection c ↦ 9/c fixes c = 3, i.e. v = π/3 and 2π/3.
    MetricProfile {
        kind: ProfileKind::General { m, n, period: PI, reduced: (PI / 3.0, 2.0 * PI / 3.0), u_period: PI },
        description: "g0".into(),
        scale: 1.0,
    }
}

/// Conformal profile f = φ₁² + 4φ₂² of an admissible periodic solution.
pub fn reconstructed_profile(params: Params) -> Result<MetricProfile, SpectralError> {
    let class = odecore::classify(params, RECONSTRUCTION_TOL)?;
    if class.kind != SolutionKind::PeriodicAdmissible {
        return Err(SpectralError::NotAdmissible { p: params.p(), kind: class.kind });
    }
    let a = match odecore::detect_period(params, odecore::RATIO_MATCH_TOL)? {
        PeriodVerdict::Periodic { y_period, .. } => y_period,
        PeriodVerdict::NotPeriodic { .. } => unreachable!("admissible solutions are periodic"),
    };
    let traj = odecore::integrate(params, a, RECONSTRUCTION_TOL)?;
    let n = RECONSTRUCTION_SAMPLES;
    let mut values = Vec::with_capacity(n);
    let mut derivatives = Vec::with_capacity(n);
    for i in 0..n {
        let s = traj.state_at(a * i as f64 / n as f64)?;
        values.push(s.conformal_factor());
        derivatives.push(s.conformal_factor_derivative());
    }
    let sampled = SampledFunction::new(a, values, derivatives)?;
    Ok(MetricProfile::conformal(ConformalFactor::Sampled(sampled), a, format!("reconstructed p={}", params.p())))
}

/// Finite-difference problem on the nodes x_0..x_n of the reduced interval.
struct Discretisation {
    /// Symmetrised tridiagonal (diagonal, off-diagonal) on the free nodes.
    diag: Vec<f64>,
    off: Vec<f64>,
    /// p(x_{j+1/2}) / h² per cell.
    stiff: Vec<f64>,
    /// Lumped reaction and mass per node (halved at the ends).
    react: Vec<f64>,
    mass: Vec<f64>,
    nodes: Vec<f64>,
    /// Index of the first free node: 1 under Dirichlet conditions, else 0.
    first: usize,
}

impl Discretisation {
    fn free(&self) -> std::ops::Range<usize> {
        self.first..self.first + self.diag.len()
    }

    /// Nodal values ψ of a symmetrised vector, with zero boundary values under Dirichlet conditions.
    fn nodal(&self, y: &[f64]) -> Vec<f64> {
        let mut psi = vec![0.0; self.nodes.len()];
        for (i, v) in self.free().zip(y) {
            psi[i] = v / self.mass[i].sqrt();
        }
        psi
    }

    /// Rayleigh quotient in the sum-of-squares form, free of cancellation.
    fn rayleigh(&self, psi: &[f64]) -> f64 {
        let kinetic: f64 = self.stiff.iter().enumerate().map(|(j, s)| s * (psi[j + 1] - psi[j]).powi(2)).sum();
        let (mut num, mut den) = (kinetic, 0.0);
        for i in self.free() {
            num += self.react[i] * psi[i] * psi[i];
            den += self.mass[i] * psi[i] * psi[i];
        }
        num / den
    }

    /// Inverse iteration at a bisected eigenvalue; returns the symmetrised eigenvector.
    fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let len = self.diag.len();
        let mut y: Vec<f64> = (0..len).map(|i| 1.0 + 0.1 * (i as f64).sin()).collect();
        // Offset keeps T − σI numerically non-singular when λ is exact.
        let shift = lambda + 1e-12 * lambda.abs().max(1.0);
        for _ in 0..3 {
            y = solve_shifted(&self.diag, &self.off, shift, &y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y.iter_mut().for_each(|v| *v /= norm);
        }
        y
    }

    /// Lowest `count` eigenvalues, bisected and then refined by the Rayleigh quotient.
    fn eigenvalues(&self, count: usize) -> Vec<f64> {
        tridiagonal_eigenvalues(&self.diag, &self.off, count)
            .into_iter()
            .map(|lambda| {
                let refined = self.rayleigh(&self.nodal(&self.eigenvector(lambda)));
                // The refinement may only move λ within the bisection accuracy.
                if refined.is_finite() && (refined - lambda).abs() <= 1e-6 * lambda.abs().max(1.0) {
                    refined
                } else {
                    lambda
                }
            })
            .collect()
    }
}

fn discretise(prob: &SlProblem<'_>, n: usize) -> Result<Discretisation, SpectralError> {
    let h = (prob.x1 - prob.x0) / n as f64;
    let nodes: Vec<f64> = (0..=n).map(|i| prob.x0 + i as f64 * h).collect();
    let stiff: Vec<f64> = (0..n).map(|j| (prob.p)(prob.x0 + (j as f64 + 0.5) * h) / (h * h)).collect();
    if let Some(bad) = stiff.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(SpectralError::Domain(format!("stiffness coefficient {bad}")));
    }
    let mut react = vec![0.0; n + 1];
    let mut mass = vec![0.0; n + 1];
    for (i, &x) in nodes.iter().enumerate() {
        let half = if i == 0 || i == n { 0.5 } else { 1.0 };
        let w = (prob.w)(x);
        if !(w > 0.0 && w.is_finite()) {
            return Err(SpectralError::Domain(format!("weight {w} at x = {x}")));
        }
        mass[i] = half * w;
        react[i] = half * (prob.r)(x);
    }
    let (first, last) = if prob.dirichlet { (1, n - 1) } else { (0, n) };
    let diag = (first..=last)
        .map(|i| {
            let a = react[i] + if i > 0 { stiff[i - 1] } else { 0.0 } + if i < n { stiff[i] } else { 0.0 };
            a / mass[i]
        })
        .collect();
    let off = (first..last).map(|i| -stiff[i] / (mass[i] * mass[i + 1]).sqrt()).collect();
    Ok(Discretisation { diag, off, stiff, react, mass, nodes, first })
}

/// Number of eigenvalues below x.
fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    const TINY: f64 = 1e-300;
    let mut count = 0;
    let mut q = d[0] - x;
    for i in 0..d.len() {
        if i > 0 {
            q = d[i] - x - e2[i - 1] / q;
        }
        if q.abs() < TINY {
            q = -TINY;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Lowest `count` eigenvalues of the symmetric tridiagonal (d, e).
fn tridiagonal_eigenvalues(d: &[f64], e: &[f64], count: usize) -> Vec<f64> {
    let e2: Vec<f64> = e.iter().map(|v| v * v).collect();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..d.len() {
        let radius = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i < e.len() { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - radius);
        hi = hi.max(d[i] + radius);
    }
    (0..count)
        .map(|j| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid == a || mid == b || (b - a) <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
                    break;
                }
                if sturm_count(d, &e2, mid) > j {
                    b = mid
                } else {
                    a = mid
                }
            }
            0.5 * (a + b)
        })
        .collect()
}

/// Eigenvalues with Richardson extrapolation and per-value error estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenEstimate {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Raw eigenvalues on the grids N and 2N.
    pub coarse: Vec<f64>,
    pub fine: Vec<f64>,
}

fn check_grid(grid: usize) -> Result<(), SpectralError> {
    if grid >= 64 {
        Ok(())
    } else {
        Err(SpectralError::InvalidArgument(format!("grid must be at least 64, got {grid}")))
    }
}

/// Raw (unextrapolated) eigenvalues on a grid of `n` intervals.
pub fn sl_eigen_raw(profile: &MetricProfile, k: usize, count: usize, n: usize) -> Result<Vec<f64>, SpectralError> {
    let disc = discretise(&profile.problem(k), n)?;
    if count > disc.diag.len() {
        return Err(SpectralError::InvalidArgument(format!(
            "{count} eigenvalues requested from {} unknowns",
            disc.diag.len()
        )));
    }
    Ok(disc.eigenvalues(count))
}

/// Lowest `count` eigenvalues of the k-th reduced problem.
pub fn sl_eigen(profile: &MetricProfile, k: usize, count: usize, grid: usize) -> Result<EigenEstimate, SpectralError> {
    check_grid(grid)?;
    let coarse = sl_eigen_raw(profile, k, count, grid)?;
    let fine = sl_eigen_raw(profile, k, count, 2 * grid)?;
    let mut values = Vec::with_capacity(count);
    let mut errors = Vec::with_capacity(count);
    for (&c, &f) in coarse.iter().zip(&fine) {
        if (c - f).abs() > 1e-2 * f.abs().max(1.0) {
            return Err(SpectralError::Accuracy { k, coarse: c, fine: f });
        }
        let r = (4.0 * f - c) / 3.0;
        values.push(r);
        errors.push((r - f).abs());
    }
    Ok(EigenEstimate { values, errors, coarse, fine })
}

/// Nodes and values of the `index`-th eigenfunction ψ on the reduced interval,
/// on a grid of `n` intervals.
pub fn sl_eigenvector(
    profile: &MetricProfile,
    k: usize,
    index: usize,
    n: usize,
) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    let disc = discretise(&profile.problem(k), n)?;
    if index >= disc.diag.len() {
        return Err(SpectralError::InvalidArgument(format!(
            "eigenvalue {index} requested from {} unknowns",
            disc.diag.len()
        )));
    }
    let lambda = *tridiagonal_eigenvalues(&disc.diag, &disc.off, index + 1).last().expect("index + 1 ≥ 1");
    let psi = disc.nodal(&disc.eigenvector(lambda));
    Ok((disc.nodes, psi))
}

/// Solve (T − σI) x = b for the symmetric tridiagonal T with partial pivoting.
fn solve_shifted(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    // Banded LU with one extra super-diagonal for row swaps.
    let mut diag: Vec<f64> = d.iter().map(|v| v - sigma).collect();
    let mut sup: Vec<f64> = e.to_vec();
    sup.push(0.0);
    let mut sup2 = vec![0.0; n];
    let mut sub: Vec<f64> = e.to_vec();
    let mut rhs = b.to_vec();
    // Zero pivots are replaced by ε‖T − σI‖, as in standard inverse iteration.
    let norm = diag.iter().chain(e.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * norm.max(f64::MIN_POSITIVE);
    let pivot = |v: f64| {
        if v.abs() < tiny {
            if v < 0.0 {
                -tiny
            } else {
                tiny
            }
        } else {
            v
        }
    };
    for i in 0..n.saturating_sub(1) {
        if sub[i].abs() > diag[i].abs() {
            // Swap rows i and i + 1.
            std::mem::swap(&mut diag[i], &mut sub[i]);
            let (a, c) = (sup[i], diag[i + 1]);
            sup[i] = c;
            diag[i + 1] = a;
            let (a2, c2) = (sup2[i], sup[i + 1]);
            sup2[i] = c2;
            sup[i + 1] = a2;
            rhs.swap(i, i + 1);
        }
        diag[i] = pivot(diag[i]);
        let l = sub[i] / diag[i];
        diag[i + 1] -= l * sup[i];
        sup[i + 1] -= l * sup2[i];
        rhs[i + 1] -= l * rhs[i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= sup[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= sup2[i] * x[i + 2];
        }
        x[i] = s / pivot(diag[i]);
    }
    x
}

/// Zeros over a full period of the `index`-th eigenfunction, from its sign pattern
/// on the reduced interval and the parity extension.
pub fn nodal_count(profile: &MetricProfile, k: usize, index: usize, n: usize) -> Result<usize, SpectralError> {
    let (_, psi) = sl_eigenvector(profile, k, index, n)?;
    let inner = if k % 2 == 1 { &psi[1..psi.len() - 1] } else { &psi[..] };
    let interior = inner.windows(2).filter(|w| w[0].signum() != w[1].signum()).count();
    Ok(if k % 2 == 1 { 2 * interior + 2 } else { 2 * interior })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub lambda1: f64,
    pub k_min: usize,
    pub area: f64,
    pub product: f64,
    pub err: f64,
    /// Lowest admissible positive eigenvalue for each k = 0..=k_max.
    pub per_k: Vec<f64>,
}

/// First positive eigenvalue over the harmonics k = 0..=k_max, with area and product.
pub fn lambda1(profile: &MetricProfile, k_max: usize, grid: usize) -> Result<SpectralResult, SpectralError> {
    if k_max < 3 {
        return Err(SpectralError::InvalidArgument(format!("k_max must be at least 3, got {k_max}")));
    }
    check_grid(grid)?;
    let per_k: Vec<(f64, f64)> = (0..=k_max)
        .into_par_iter()
        .map(|k| {
            let est = if k == 0 { sl_eigen(profile, 0, 2, grid)? } else { sl_eigen(profile, k, 1, grid)? };
            let idx = if k == 0 { 1 } else { 0 };
            Ok((est.values[idx], est.errors[idx]))
        })
        .collect::<Result<_, SpectralError>>()?;
    let min = per_k.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let k_min = per_k.iter().position(|v| v.0 <= min * (1.0 + 1e-9)).expect("non-empty");
    let lambda1 = per_k[k_min].0;
    let area = profile.area();
    Ok(SpectralResult {
        lambda1,
        k_min,
        area,
        product: lambda1 * area,
        err: per_k[k_min].1,
        per_k: per_k.iter().map(|v| v.0).collect(),
    })
}

/// Tolerances of the two verification routes.
pub const ROUTE1_LAMBDA_TOL: f64 = 1e-4;
pub const ROUTE1_PRODUCT_TOL: f64 = 1e-4;
pub const ROUTE2_PRODUCT_TOL: f64 = 2e-3;
pub const ROUTES_AGREE_TOL: f64 = 2e-3;

#[derive(Debug, Clone)]
pub struct ConjectureReport {
    pub target: f64,
    pub grid: usize,
    /// Route 1: profile reconstructed from the solution with p = √(3/8).
    pub route1: Result<SpectralResult, SpectralError>,
    /// Route 2: the closed-form metric g₀.
    pub route2: Result<SpectralResult, SpectralError>,
}

impl ConjectureReport {
    fn rel(&self, x: f64) -> f64 {
        ((x - self.target) / self.target).abs()
    }

    pub fn route1_lambda_ok(&self) -> bool {
        self.route1.as_ref().is_ok_and(|r| (r.lambda1 - 2.0).abs() <= ROUTE1_LAMBDA_TOL)
    }

    pub fn route1_product_ok(&self) -> bool {
        self.route1.as_ref().is_ok_and(|r| self.rel(r.product) <= ROUTE1_PRODUCT_TOL)
    }

    pub fn route2_product_ok(&self) -> bool {
        self.route2.as_ref().is_ok_and(|r| self.rel(r.product) <= ROUTE2_PRODUCT_TOL)
    }

    pub fn routes_agree(&self) -> bool {
        match (&self.route1, &self.route2) {
            (Ok(a), Ok(b)) => ((a.product - b.product) / b.product).abs() <= ROUTES_AGREE_TOL,
            _ => false,
        }
    }

    pub fn passed(&self) -> bool {
        self.route1_lambda_ok() && self.route1_product_ok() && self.route2_product_ok() && self.routes_agree()
    }
}

/// Both spectral routes to the extremal value 12πE(8/9).
pub fn verify_conjecture(grid: usize) -> ConjectureReport {
    let route1 = Params::new(crate::P_EXTREMAL)
        .map_err(SpectralError::from)
        .and_then(reconstructed_profile)
        .and_then(|prof| lambda1(&prof, DEFAULT_K_MAX, grid));
    let route2 = lambda1(&g0_profile(), DEFAULT_K_MAX, grid);
    ConjectureReport { target: target_constant(), grid, route1, route2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_diagonal() {
        let d = [1.0, 2.0, 3.0];
        let e2 = [0.0, 0.0];
        assert_eq!(sturm_count(&d, &e2, 2.5), 2);
        assert_eq!(sturm_count(&d, &e2, 0.5), 0);
    }

    #[test]
    fn shifted_solve_matches_product() {
        let d = [2.0, 0.5, -1.0, 3.0];
        let e = [1.0, -2.0, 0.7];
        let x = solve_shifted(&d, &e, 0.3, &[1.0, 2.0, 3.0, 4.0]);
        // Multiply back.
        for i in 0..4 {
            let mut s = (d[i] - 0.3) * x[i];
            if i > 0 {
                s += e[i - 1] * x[i - 1];
            }
            if i < 3 {
                s += e[i] * x[i + 1];
            }
            assert!((s - (i + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn hermite_reproduces_cosine() {
        let a = 2.0 * PI;
        let n = 256;
        let ys: Vec<f64> = (0..n).map(|i| a * i as f64 / n as f64).collect();
        let s = SampledFunction::new(a, ys.iter().map(|y| y.cos()).collect(), ys.iter().map(|y| -y.sin()).collect())
            .unwrap();
        for y in [0.1, 1.0, 3.3, 6.2, -0.7] {
            assert!((s.eval(y) - y.cos()).abs() < 1e-9);
        }
        assert!(s.half_period_integral().abs() < 1e-12);
    }
}
