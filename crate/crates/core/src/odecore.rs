//! The coupled system
//!
//! ```text
//! φ₁″ = (1 − 2φ₁² − 8φ₂²) φ₁,    φ₂″ = (4 − 2φ₁² − 8φ₂²) φ₂,
//! φ₁(0) = 0, φ₁′(0) = 2p, φ₂(0) = p, φ₂′(0) = 0,
//! ```
//!
//! its two quadratic first integrals, numerical integration with drift monitoring,
//! period detection through the separated periods, and classification of solutions.

use std::f64::consts::SQRT_2;

use thiserror::Error;

use crate::dop853::{self, IntegratorError, Options, Solution};
use crate::periods::{self, PeriodError};
use crate::roots;

/// Special values of p closer than this are dispatched to closed-form branches.
pub const SPECIAL_TOL: f64 = 1e-12;
/// Integrators must keep |H_i − H_i(0)| below this multiple of the tolerance.
pub const DRIFT_FACTOR: f64 = 100.0;
/// Tolerance on |R(p) − q/m| used by [`classify`] to accept a rational ratio.
pub const RATIO_MATCH_TOL: f64 = 1e-9;
/// Largest denominator m considered when matching R(p) to q/m.
pub const MAX_DENOMINATOR: u64 = 500;
/// Samples with |φ₁| below this count as a zero on their own.
pub const ZERO_SNAP: f64 = 1e-13;
/// Zero crossings are located to this accuracy in y.
pub const ZERO_XTOL: f64 = 1e-12;
/// Minimum number of scan samples per period.
pub const SCAN_SAMPLES: usize = 4096;
/// Sample spacing of the closed-form decay trajectory.
const CLOSED_FORM_STEP: f64 = 1e-2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("p = {0} outside (0, 1]")]
    ParamDomain(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("integration failed at y = {y}: {source}")]
    Integration { y: f64, source: IntegratorError },
    #[error("first-integral drift {drift:.3e} exceeds the bound {bound:.3e}")]
    DriftExceeded { drift: f64, bound: f64 },
    #[error("p = √3/2 decays to the origin and has no period")]
    DecayRejected,
    #[error("y = {0} is outside the integrated range")]
    OutOfRange(f64),
    #[error(transparent)]
    Period(#[from] PeriodError),
}

/// Initial value p = φ₂(0) = φ₁′(0)/2, with 0 < p ≤ 1.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Params {
    p: f64,
}

impl Params {
    pub fn new(p: f64) -> Result<Self, OdeError> {
        if p > 0.0 && p <= 1.0 {
            Ok(Self { p })
        } else {
            Err(OdeError::ParamDomain(p))
        }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// p = √(3/8): v is constant along the solution.
    pub fn is_extremal(&self) -> bool {
        (self.p - crate::P_EXTREMAL).abs() <= SPECIAL_TOL
    }

    /// p = √3/2: the solution is homoclinic to the origin.
    pub fn is_decay(&self) -> bool {
        (self.p - crate::P_DECAY).abs() <= SPECIAL_TOL
    }

    /// p = 1: the orbit is the unit circle and u is constant.
    pub fn is_circle(&self) -> bool {
        (self.p - 1.0).abs() <= SPECIAL_TOL
    }

    /// p > √3/2, the regime in which φ₂ changes sign.
    pub fn beyond_decay(&self) -> bool {
        self.p > crate::P_DECAY && !self.is_decay()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    pub y: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub dphi1: f64,
    pub dphi2: f64,
}

impl State {
    pub fn from_vector(y: f64, v: [f64; 4]) -> Self {
        Self { y, phi1: v[0], phi2: v[1], dphi1: v[2], dphi2: v[3] }
    }

    pub fn vector(&self) -> [f64; 4] {
        [self.phi1, self.phi2, self.dphi1, self.dphi2]
    }

    pub fn is_finite(&self) -> bool {
        self.vector().iter().all(|x| x.is_finite()) && self.y.is_finite()
    }

    /// The conformal factor φ₁² + 4φ₂² of the associated metric.
    pub fn conformal_factor(&self) -> f64 {
        self.phi1 * self.phi1 + 4.0 * self.phi2 * self.phi2
    }

    /// d/dy of [`State::conformal_factor`].
    pub fn conformal_factor_derivative(&self) -> f64 {
        2.0 * self.phi1 * self.dphi1 + 8.0 * self.phi2 * self.dphi2
    }
}

/// Rescaled coordinates q₁ = φ₁/√2, q₂ = √2 φ₂ with energy H = H1/4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianState {
    pub q1: f64,
    pub q2: f64,
    pub dq1: f64,
    pub dq2: f64,
    pub h: f64,
}

pub fn initial_state(params: Params) -> State {
    let p = params.p();
    State { y: 0.0, phi1: 0.0, phi2: p, dphi1: 2.0 * p, dphi2: 0.0 }
}

/// (φ₁″, φ₂″).
pub fn rhs(state: &State) -> (f64, f64) {
    accelerations(state.phi1, state.phi2)
}

fn accelerations(phi1: f64, phi2: f64) -> (f64, f64) {
    let r = 2.0 * phi1 * phi1 + 8.0 * phi2 * phi2;
    ((1.0 - r) * phi1, (4.0 - r) * phi2)
}

/// (H1, H2).
pub fn first_integrals(s: &State) -> (f64, f64) {
    let (a, b) = (s.phi1 * s.phi1, s.phi2 * s.phi2);
    let h1 = (a + 4.0 * b).powi(2) - a - 16.0 * b + s.dphi1 * s.dphi1 + 4.0 * s.dphi2 * s.dphi2;
    let h2 = 12.0 * b * (b - 1.0) + 3.0 * a * b + b * s.dphi1 * s.dphi1 - 2.0 * s.phi1 * s.dphi1 * s.phi2 * s.dphi2
        + (3.0 + a) * s.dphi2 * s.dphi2;
    (h1, h2)
}

/// The common value K = −4p²(3 − 4p²) of H1 and H2 on the solution with parameter p.
pub fn energy_level(params: Params) -> f64 {
    let p2 = params.p() * params.p();
    -4.0 * p2 * (3.0 - 4.0 * p2)
}

/// V(q₁, q₂) = (q₁² + q₂²)² − ½q₁² − 2q₂².
pub fn potential(q1: f64, q2: f64) -> f64 {
    (q1 * q1 + q2 * q2).powi(2) - 0.5 * q1 * q1 - 2.0 * q2 * q2
}

pub fn to_hamiltonian(s: &State) -> HamiltonianState {
    let (q1, q2) = (s.phi1 / SQRT_2, SQRT_2 * s.phi2);
    let (dq1, dq2) = (s.dphi1 / SQRT_2, SQRT_2 * s.dphi2);
    HamiltonianState { q1, q2, dq1, dq2, h: 0.5 * (dq1 * dq1 + dq2 * dq2) + potential(q1, q2) }
}

/// Closed-form solution for p = √3/2: φ₁ = √3 tanh y sech y, φ₂ = (√3/2) sech² y.
pub fn decay_solution(y: f64) -> State {
    let s3 = 3f64.sqrt();
    let sech = 1.0 / y.cosh();
    let tanh = y.tanh();
    State {
        y,
        phi1: s3 * tanh * sech,
        phi2: 0.5 * s3 * sech * sech,
        dphi1: s3 * sech * (2.0 * sech * sech - 1.0),
        dphi2: -s3 * sech * sech * tanh,
    }
}

#[derive(Debug, Clone)]
enum Path {
    Numeric(Solution<4>),
    ClosedForm,
}

/// An integrated solution with dense output and first-integral monitoring.
#[derive(Debug, Clone)]
pub struct Trajectory {
    params: Params,
    tol: f64,
    path: Path,
    samples: Vec<State>,
    h1_0: f64,
    h2_0: f64,
    max_drift: f64,
}

impl Trajectory {
    pub fn params(&self) -> Params {
        self.params
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// States at the accepted step points (or the uniform closed-form grid), increasing in y.
    pub fn samples(&self) -> &[State] {
        &self.samples
    }

    pub fn initial_integrals(&self) -> (f64, f64) {
        (self.h1_0, self.h2_0)
    }

    /// max over samples of |H_i(y) − H_i(0)|, i = 1, 2.
    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }

    /// Bound on [`Trajectory::max_drift`] guaranteed at creation.
    pub fn drift_bound(&self) -> f64 {
        DRIFT_FACTOR * self.tol
    }

    pub fn y_min(&self) -> f64 {
        self.samples[0].y
    }

    pub fn y_max(&self) -> f64 {
        self.samples[self.samples.len() - 1].y
    }

    pub fn is_closed_form(&self) -> bool {
        matches!(self.path, Path::ClosedForm)
    }

    /// Dense-output state at y.
    pub fn state_at(&self, y: f64) -> Result<State, OdeError> {
        if !(y >= self.y_min() && y <= self.y_max()) {
            return Err(OdeError::OutOfRange(y));
        }
        Ok(match &self.path {
            Path::Numeric(sol) => State::from_vector(y, sol.eval(y).expect("range checked")),
            Path::ClosedForm => decay_solution(y),
        })
    }

    fn from_samples(params: Params, tol: f64, path: Path, samples: Vec<State>) -> Result<Self, OdeError> {
        let (h1_0, h2_0) = first_integrals(&initial_state(params));
        let max_drift = samples
            .iter()
            .map(|s| {
                let (h1, h2) = first_integrals(s);
                (h1 - h1_0).abs().max((h2 - h2_0).abs())
            })
            .fold(0.0, f64::max);
        let bound = DRIFT_FACTOR * tol;
        if !(max_drift <= bound) {
            return Err(OdeError::DriftExceeded { drift: max_drift, bound });
        }
        Ok(Self { params, tol, path, samples, h1_0, h2_0, max_drift })
    }
}

fn check_tol(tol: f64) -> Result<(), OdeError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(OdeError::InvalidArgument(format!("tolerance must be positive (got {tol})")))
    }
}

/// Integrate from y = 0 to y_end > 0.
pub fn integrate(params: Params, y_end: f64, tol: f64) -> Result<Trajectory, OdeError> {
    if !(y_end > 0.0 && y_end.is_finite()) {
        return Err(OdeError::InvalidArgument(format!("y_end must be positive (got {y_end})")));
    }
    integrate_to(params, y_end, tol)
}

/// Integrate from y = 0 to y_end in either direction; p = √3/2 uses the closed form.
pub fn integrate_to(params: Params, y_end: f64, tol: f64) -> Result<Trajectory, OdeError> {
    check_tol(tol)?;
    if !(y_end != 0.0 && y_end.is_finite()) {
        return Err(OdeError::InvalidArgument(format!("y_end must be finite and non-zero (got {y_end})")));
    }
    if params.is_decay() {
        let n = (y_end.abs() / CLOSED_FORM_STEP).ceil().max(1.0) as usize;
        let (lo, hi) = if y_end > 0.0 { (0.0, y_end) } else { (y_end, 0.0) };
        let samples = (0..=n).map(|i| decay_solution(lo + (hi - lo) * i as f64 / n as f64)).collect();
        return Trajectory::from_samples(params, tol, Path::ClosedForm, samples);
    }
    integrate_numeric(params, y_end, tol)
}

/// Generic numerical integration without special-case dispatch.
pub fn integrate_numeric(params: Params, y_end: f64, tol: f64) -> Result<Trajectory, OdeError> {
    check_tol(tol)?;
    let field = |_: f64, z: &[f64; 4]| {
        let (a1, a2) = accelerations(z[0], z[1]);
        [z[2], z[3], a1, a2]
    };
    let sol = dop853::solve(field, 0.0, initial_state(params).vector(), y_end, &Options::with_tol(tol))
        .map_err(|e| OdeError::Integration { y: e.last_good_t(), source: e })?;
    let samples = sol.t.iter().zip(&sol.y).map(|(&t, &z)| State::from_vector(t, z)).collect();
    Trajectory::from_samples(params, tol, Path::Numeric(sol), samples)
}

/// Outcome of [`detect_period`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PeriodVerdict {
    Periodic {
        /// Period of (φ₁, φ₂) in y.
        y_period: f64,
        /// R(p) = q/m when periodicity comes from a rational ratio.
        ratio: Option<(u64, u64)>,
        /// Zeros of φ₁ per y-period implied by the sign bookkeeping.
        expected_zeros: usize,
    },
    NotPeriodic {
        ratio: f64,
    },
}

/// Smallest-denominator fraction q/m with |x − q/m| ≤ tol and m ≤ max_den.
pub fn match_rational(x: f64, tol: f64, max_den: u64) -> Option<(u64, u64)> {
    (1..=max_den).find_map(|m| {
        let q = (x * m as f64).round();
        (q >= 1.0 && (x - q / m as f64).abs() <= tol).then_some((q as u64, m))
    })
}

/// Period in y, obtained from the τ-periods of u and v.
///
/// Over a common τ-period T = q·T_u = m·T_v the coordinates (u, v) return, and
/// y advances by q∫u dτ − m∫v dτ. φ₁ changes sign each time u touches 0 (p < √3/2)
/// and both φ₁, φ₂ change sign each time v completes an oscillation (p > √3/2), so
/// (φ₁, φ₂) needs T or 2T according to the parity of the number of sign changes.
pub fn detect_period(params: Params, tol: f64) -> Result<PeriodVerdict, OdeError> {
    if params.is_decay() {
        return Err(OdeError::DecayRejected);
    }
    let ints = periods::tau_integrals(params)?;
    if params.is_extremal() {
        // v ≡ −3/4; φ₁ changes sign once per u-oscillation.
        let y_period = 2.0 * (ints.int_u - ints.v_const() * ints.tu);
        return Ok(PeriodVerdict::Periodic { y_period, ratio: None, expected_zeros: 2 });
    }
    if params.is_circle() {
        // u ≡ 1/2; both components change sign once per v-oscillation.
        let y_period = 2.0 * (0.5 * ints.tv - ints.int_v);
        return Ok(PeriodVerdict::Periodic { y_period, ratio: None, expected_zeros: 2 });
    }
    let ratio = ints.tv / ints.tu;
    let Some((q, m)) = match_rational(ratio, tol, MAX_DENOMINATOR) else {
        return Ok(PeriodVerdict::NotPeriodic { ratio });
    };
    let y_common = q as f64 * ints.int_u - m as f64 * ints.int_v;
    let flips = if params.beyond_decay() { m } else { q };
    let factor = if flips % 2 == 1 { 2 } else { 1 };
    let expected_zeros = if params.beyond_decay() { factor * m as usize } else { factor * q as usize };
    Ok(PeriodVerdict::Periodic { y_period: factor as f64 * y_common, ratio: Some((q, m)), expected_zeros })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolutionKind {
    PeriodicAdmissible,
    PeriodicInadmissible,
    QuasiPeriodic,
    DecayToOrigin,
    Phi2Vanishes,
}

impl std::fmt::Display for SolutionKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        std::fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionClass {
    pub kind: SolutionKind,
    pub period_y: Option<f64>,
    pub zeros_phi1: Option<usize>,
    pub min_phi2: f64,
    /// Positions of the zeros of φ₁ in the counting window.
    pub zero_positions: Vec<f64>,
    /// First zero of φ₂ when it changes sign.
    pub phi2_zero: Option<f64>,
}

/// Sign-change scan of one component over [y0, y1] with `n` intervals.
/// Returns the zeros (bisection-refined) and the minimum observed sample value.
pub fn scan_component<F>(
    traj: &Trajectory,
    component: F,
    y0: f64,
    y1: f64,
    n: usize,
) -> Result<(Vec<f64>, f64), OdeError>
where
    F: Fn(&State) -> f64,
{
    let h = (y1 - y0) / n as f64;
    let value = |y: f64| traj.state_at(y).map(|s| component(&s));
    let mut zeros = Vec::new();
    let mut min = f64::INFINITY;
    let mut prev: Option<(f64, f64)> = None;
    let mut snapped = false;
    for i in 0..=n {
        let y = if i == n { y1 } else { y0 + i as f64 * h };
        let val = value(y)?;
        min = min.min(val);
        if val.abs() < ZERO_SNAP {
            if !snapped {
                zeros.push(y);
            }
            snapped = true;
            prev = None;
            continue;
        }
        snapped = false;
        if let Some((py, pv)) = prev {
            if pv.signum() != val.signum() {
                let f = |t: f64| value(t).unwrap_or(f64::NAN);
                let root = roots::bisect(f, py, y, ZERO_XTOL).unwrap_or(0.5 * (py + y));
                zeros.push(root);
            }
        }
        prev = Some((y, val));
    }
    Ok((zeros, min))
}

fn scan_intervals(length: f64) -> usize {
    SCAN_SAMPLES.max((length / 5e-3).ceil() as usize)
}

/// Classify the solution with parameter p.
pub fn classify(params: Params, tol: f64) -> Result<SolutionClass, OdeError> {
    check_tol(tol)?;
    if params.is_decay() {
        let y_end = 50.0;
        let traj = integrate(params, y_end, tol)?;
        let min_phi2 = traj.samples().iter().map(|s| s.phi2).fold(f64::INFINITY, f64::min);
        return Ok(SolutionClass {
            kind: SolutionKind::DecayToOrigin,
            period_y: None,
            zeros_phi1: None,
            min_phi2,
            zero_positions: Vec::new(),
            phi2_zero: None,
        });
    }

    let verdict = detect_period(params, RATIO_MATCH_TOL)?;
    if params.beyond_decay() {
        // v reaches −3/2, where φ₂ vanishes, within half a v-oscillation: at most T_v in y.
        let tv = periods::tau_integrals(params)?.tv;
        let (period_y, window) = match verdict {
            PeriodVerdict::Periodic { y_period, .. } => (Some(y_period), (y_period + 1.0).max(tv + 1.0)),
            PeriodVerdict::NotPeriodic { .. } => (None, tv + 1.0),
        };
        let traj = integrate(params, window, tol)?;
        let n = scan_intervals(window);
        let (phi2_zeros, min_phi2) = scan_component(&traj, |s| s.phi2, 0.0, window, n)?;
        let (zero_positions, zeros_phi1) = match period_y {
            Some(a) => {
                let n = scan_intervals(a);
                let h = a / n as f64;
                let (z, _) = scan_component(&traj, |s| s.phi1, 0.5 * h, 0.5 * h + a, n)?;
                let count = z.len();
                (z, Some(count))
            }
            None => (Vec::new(), None),
        };
        return Ok(SolutionClass {
            kind: SolutionKind::Phi2Vanishes,
            period_y,
            zeros_phi1,
            min_phi2,
            zero_positions,
            phi2_zero: phi2_zeros.first().copied(),
        });
    }

    match verdict {
        PeriodVerdict::NotPeriodic { .. } => {
            let window = 50.0;
            let traj = integrate(params, window, tol)?;
            let (_, min_phi2) = scan_component(&traj, |s| s.phi2, 0.0, window, scan_intervals(window))?;
            Ok(SolutionClass {
                kind: SolutionKind::QuasiPeriodic,
                period_y: None,
                zeros_phi1: None,
                min_phi2,
                zero_positions: Vec::new(),
                phi2_zero: None,
            })
        }
        PeriodVerdict::Periodic { y_period: a, .. } => {
            let n = scan_intervals(a);
            let h = a / n as f64;
            // Start half a sample in, so the zero at y = 0 is not on the window edge.
            let (y0, y1) = (0.5 * h, 0.5 * h + a);
            let traj = integrate(params, y1, tol)?;
            let (zeros, _) = scan_component(&traj, |s| s.phi1, y0, y1, n)?;
            let (phi2_zeros, min_phi2) = scan_component(&traj, |s| s.phi2, y0, y1, n)?;
            let admissible = zeros.len() == 2 && min_phi2 > 0.0 && phi2_zeros.is_empty();
            Ok(SolutionClass {
                kind: if admissible { SolutionKind::PeriodicAdmissible } else { SolutionKind::PeriodicInadmissible },
                period_y: Some(a),
                zeros_phi1: Some(zeros.len()),
                min_phi2,
                zero_positions: zeros,
                phi2_zero: phi2_zeros.first().copied(),
            })
        }
    }
}
