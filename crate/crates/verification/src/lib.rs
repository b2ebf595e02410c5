//! Numerical acceptance checks, shared by the `verify` command and the
//! `acceptance` test target.

use std::f64::consts::PI;
use std::fmt;

use klein_core::elliptic::{complete_elliptic_pi, target_constant};
use klein_core::geometry::{self, accel0, from_parabolic, parabolic_coordinates, poly_p, quadrics, to_parabolic};
use klein_core::odecore::{
    self, detect_period, integrate, integrate_numeric, integrate_to, Params, PeriodVerdict, SolutionKind, State,
};
use klein_core::periods::{
    self, find_p_for_ratio, period_u, period_v, tabulate, tv_limit, PeriodError, RationalTarget, RATIO_RANGE,
};
use klein_core::spectral::{self, g0_profile, lambda1, MetricProfile};
use klein_core::{P_DECAY, P_EXTREMAL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria are numbered 1 to 10.
pub const CRITERIA: std::ops::RangeInclusive<u8> = 1..=10;
/// Grid at which the spectral tolerances are certified.
pub const REFERENCE_GRID: usize = 1024;
const TOL: f64 = 1e-12;
/// Range of the integrated cross-check on the unstable decay orbit.
const DECAY_CHECK_RANGE: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not run in this configuration.
    Skip,
    /// Informational row that does not affect the verdict.
    Warn,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Pass => "PASS",
            Self::Fail => "FAIL",
            Self::Skip => "SKIP",
            Self::Warn => "WARN",
        })
    }
}

#[derive(Debug, Clone)]
pub struct Check {
    pub criterion: u8,
    pub label: String,
    pub measured: String,
    pub target: String,
    pub tolerance: String,
    pub status: Status,
}

impl Check {
    fn new(criterion: u8, label: &str, measured: String, target: String, tolerance: String, ok: bool) -> Self {
        let status = if ok { Status::Pass } else { Status::Fail };
        Self { criterion, label: label.into(), measured, target, tolerance, status }
    }

    fn abs(c: u8, label: &str, measured: f64, target: f64, tol: f64) -> Self {
        let ok = (measured - target).abs() <= tol;
        Self::new(c, label, fmt_f(measured), fmt_f(target), format!("abs {tol:e}"), ok)
    }

    fn rel(c: u8, label: &str, measured: f64, target: f64, tol: f64) -> Self {
        let ok = ((measured - target) / target).abs() <= tol;
        Self::new(c, label, fmt_f(measured), fmt_f(target), format!("rel {tol:e}"), ok)
    }

    fn at_most(c: u8, label: &str, measured: f64, bound: f64) -> Self {
        Self::new(c, label, fmt_f(measured), "0".into(), format!("<= {bound:e}"), measured <= bound)
    }

    fn within(c: u8, label: &str, measured: f64, lo: f64, hi: f64) -> Self {
        Self::new(c, label, fmt_f(measured), format!("[{lo}, {hi}]"), "range".into(), measured >= lo && measured <= hi)
    }

    fn holds(c: u8, label: &str, measured: impl fmt::Display, target: &str, ok: bool) -> Self {
        Self::new(c, label, measured.to_string(), target.into(), "exact".into(), ok)
    }

    fn error(c: u8, label: &str, err: impl fmt::Display) -> Self {
        Self::new(c, label, format!("error: {err}"), "-".into(), "-".into(), false)
    }

    fn note(c: u8, label: &str, status: Status, text: String) -> Self {
        Self { criterion: c, label: label.into(), measured: text, target: "-".into(), tolerance: "-".into(), status }
    }

    pub fn failed(&self) -> bool {
        self.status == Status::Fail
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub grid: usize,
    /// Skip the p-grid sweep.
    pub quick: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { grid: REFERENCE_GRID, quick: false }
    }
}

/// All checks of one criterion.
pub fn criterion(n: u8, opts: &VerifyOptions) -> Vec<Check> {
    match n {
        1 | 2 => headline(n, opts),
        3 => special_periods(),
        4 => ratio_range(opts),
        5 => asymptotics(),
        6 => conservation_and_parity(),
        7 => orbit_algebra(),
        8 => classification(),
        9 => spectral_oracle(opts),
        10 => separation(),
        _ => vec![Check::error(n, "unknown criterion", n)],
    }
}

pub fn run(opts: &VerifyOptions) -> Vec<Check> {
    CRITERIA.flat_map(|n| criterion(n, opts)).collect()
}

fn params(p: f64) -> Params {
    Params::new(p).expect("fixed parameters are in range")
}

fn headline(n: u8, opts: &VerifyOptions) -> Vec<Check> {
    let target = target_constant();
    let mut out = Vec::new();
    if opts.grid < REFERENCE_GRID {
        out.push(Check::note(
            n,
            "grid below reference",
            Status::Warn,
            format!("grid {} < {REFERENCE_GRID}; tolerances are certified at {REFERENCE_GRID}", opts.grid),
        ));
    }
    if n == 1 {
        let result = Params::new(P_EXTREMAL)
            .map_err(spectral::SpectralError::from)
            .and_then(spectral::reconstructed_profile)
            .and_then(|prof| lambda1(&prof, spectral::DEFAULT_K_MAX, opts.grid));
        match result {
            Ok(r) => {
                out.push(Check::abs(1, "route 1 lambda1", r.lambda1, 2.0, spectral::ROUTE1_LAMBDA_TOL));
                out.push(Check::rel(1, "route 1 lambda1*A", r.product, target, spectral::ROUTE1_PRODUCT_TOL));
            }
            Err(e) => out.push(Check::error(1, "route 1", e)),
        }
    } else {
        match lambda1(&g0_profile(), spectral::DEFAULT_K_MAX, opts.grid) {
            Ok(r) => out.push(Check::rel(2, "route 2 lambda1*A (g0)", r.product, target, spectral::ROUTE2_PRODUCT_TOL)),
            Err(e) => out.push(Check::error(2, "route 2", e)),
        }
    }
    out
}

fn special_periods() -> Vec<Check> {
    let mut out = Vec::new();
    let pe = params(P_EXTREMAL);
    match (period_u(pe), complete_elliptic_pi(0.4, 0.25)) {
        (Ok(tu), Ok(pi)) => out.push(Check::abs(3, "Tu(sqrt(3/8)) vs (4/5)Pi(2/5,1/4)", tu, 0.8 * pi, 1e-10)),
        (Err(e), _) => out.push(Check::error(3, "Tu(sqrt(3/8))", e)),
        (_, Err(e)) => out.push(Check::error(3, "Pi(2/5,1/4)", e)),
    }
    let limit = 8.0 * PI / (3.0 * 10f64.sqrt());
    match period_v(pe) {
        Ok(tv) => out.push(Check::abs(3, "Tv(sqrt(3/8)) limit", tv, limit, 1e-9)),
        Err(e) => out.push(Check::error(3, "Tv(sqrt(3/8))", e)),
    }
    debug_assert!((tv_limit() - limit).abs() < 1e-15);
    for (label, p) in [("Tv(sqrt(3/8)-1e-7)", P_EXTREMAL - 1e-7), ("Tv(sqrt(3/8)+1e-7)", P_EXTREMAL + 1e-7)] {
        match period_v(params(p)) {
            Ok(tv) => out.push(Check::abs(3, label, tv, limit, 1e-4)),
            Err(e) => out.push(Check::error(3, label, e)),
        }
    }
    out
}

/// p_i = 0.05 + i·1e−3 up to √3/2 − 0.05.
pub fn sweep_grid() -> Vec<f64> {
    let hi = P_DECAY - 0.05;
    (0..).map(|i| 0.05 + i as f64 * 1e-3).take_while(|p| *p <= hi + 1e-12).collect()
}

fn ratio_range(opts: &VerifyOptions) -> Vec<Check> {
    if opts.quick {
        return vec![Check::note(4, "ratio sweep", Status::Skip, "skipped (--quick)".into())];
    }
    let grid = sweep_grid();
    let rows = tabulate(&grid);
    let errors: Vec<String> =
        rows.iter().zip(&grid).filter_map(|(r, p)| r.as_ref().err().map(|e| format!("p={p}: {e}"))).collect();
    if !errors.is_empty() {
        return vec![Check::error(4, "ratio sweep", errors.join("; "))];
    }
    let data: Vec<_> = rows.into_iter().map(Result::unwrap).collect();
    let r_min = data.iter().map(|d| d.r).fold(f64::INFINITY, f64::min);
    let r_max = data.iter().map(|d| d.r).fold(f64::NEG_INFINITY, f64::max);
    let ordered = data.iter().filter(|d| d.tv > d.tu).count();
    vec![
        Check::within(4, &format!("min R over {} points", data.len()), r_min, RATIO_RANGE.0, RATIO_RANGE.1),
        Check::within(4, &format!("max R over {} points", data.len()), r_max, RATIO_RANGE.0, RATIO_RANGE.1),
        Check::holds(4, "points with Tv > Tu", format!("{ordered}/{}", data.len()), "all", ordered == data.len()),
    ]
}

fn asymptotics() -> Vec<Check> {
    let mut out = Vec::new();
    for (label, p) in [("R(1e-6)", 1e-6), ("R(sqrt(3)/2 - 1e-6)", P_DECAY - 1e-6)] {
        match periods::ratio(params(p)) {
            Ok(d) => out.push(Check::abs(5, label, d.r, 1.5, 0.05)),
            Err(e) => out.push(Check::error(5, label, e)),
        }
    }
    let p = 1e-4;
    match period_u(params(p)) {
        Ok(tu) => out.push(Check::within(5, "Tu(1e-4)/(-2/3 ln 1e-4)", tu / (-(2.0 / 3.0) * p.ln()), 0.9, 1.1)),
        Err(e) => out.push(Check::error(5, "Tu(1e-4)", e)),
    }
    out
}

fn conservation_and_parity() -> Vec<Check> {
    let pe = params(P_EXTREMAL);
    let a = match detect_period(pe, odecore::RATIO_MATCH_TOL) {
        Ok(PeriodVerdict::Periodic { y_period, .. }) => y_period,
        Ok(v) => return vec![Check::error(6, "period at sqrt(3/8)", format!("{v:?}"))],
        Err(e) => return vec![Check::error(6, "period at sqrt(3/8)", e)],
    };
    let forward = integrate(pe, 5.0 * a, TOL);
    let backward = integrate_to(pe, -5.0 * a, TOL);
    let (fwd, bwd) = match (forward, backward) {
        (Ok(f), Ok(b)) => (f, b),
        (Err(e), _) | (_, Err(e)) => return vec![Check::error(6, "integration over 5 periods", e)],
    };
    let (h1_0, h2_0) = fwd.initial_integrals();
    let n = 5000;
    let mut drift: f64 = fwd.max_drift().max(bwd.max_drift());
    let mut parity: f64 = 0.0;
    for i in 1..=n {
        let y = 5.0 * a * i as f64 / n as f64;
        let (f, b) = (fwd.state_at(y).unwrap(), bwd.state_at(-y).unwrap());
        for s in [&f, &b] {
            let (h1, h2) = odecore::first_integrals(s);
            drift = drift.max((h1 - h1_0).abs()).max((h2 - h2_0).abs());
        }
        parity = parity.max((f.phi1 + b.phi1).abs()).max((f.phi2 - b.phi2).abs());
    }
    vec![
        Check::at_most(6, "max |H_i - H_i(0)| over 5 periods", drift, 1e-9),
        Check::at_most(6, "parity defect phi1 odd, phi2 even", parity, 1e-8),
    ]
}

fn max_over<F: Fn(&State) -> f64>(traj: &odecore::Trajectory, n: usize, f: F) -> f64 {
    let (lo, hi) = (traj.y_min(), traj.y_max());
    let dense = (0..=n).map(|i| traj.state_at(lo + (hi - lo) * i as f64 / n as f64).unwrap());
    traj.samples().iter().cloned().chain(dense).map(|s| f(&s).abs()).fold(0.0, f64::max)
}

fn orbit_algebra() -> Vec<Check> {
    let mut out = Vec::new();
    let y_end = 20.0;
    match integrate(params(1.0), y_end, TOL) {
        Ok(t) => out.push(Check::at_most(
            7,
            "p=1 |w1|",
            max_over(&t, 4000, |s| quadrics(s.phi1, s.phi2, params(1.0)).w1),
            1e-8,
        )),
        Err(e) => out.push(Check::error(7, "p=1 orbit", e)),
    }
    let ellipse = |s: &State| s.phi1 * s.phi1 + 4.0 * s.phi2 * s.phi2 - 2.0 * 3f64.sqrt() * s.phi2;
    match integrate(params(P_DECAY), y_end, TOL) {
        Ok(t) => out.push(Check::at_most(7, "p=sqrt(3)/2 ellipse (closed form)", max_over(&t, 4000, ellipse), 1e-8)),
        Err(e) => out.push(Check::error(7, "p=sqrt(3)/2 closed form", e)),
    }
    // The decay orbit is a separatrix: integration errors grow like e^{2y}.
    match integrate_numeric(params(P_DECAY), DECAY_CHECK_RANGE, TOL) {
        Ok(t) => {
            out.push(Check::at_most(7, "p=sqrt(3)/2 ellipse (integrated, y<=4)", max_over(&t, 4000, ellipse), 1e-8))
        }
        Err(e) => out.push(Check::error(7, "p=sqrt(3)/2 integrated", e)),
    }
    let pe = params(P_EXTREMAL);
    match integrate(pe, y_end, TOL) {
        Ok(t) => {
            let hyperbola = max_over(&t, 4000, |s| s.phi1 * s.phi1 - 4.0 * s.phi2 * s.phi2 + 1.5);
            out.push(Check::at_most(7, "p=sqrt(3/8) hyperbola", hyperbola, 1e-8));
            let w = max_over(&t, 4000, |s| {
                let q = quadrics(s.phi1, s.phi2, pe);
                q.w3 + 4.0 * q.w2
            });
            out.push(Check::at_most(7, "p=sqrt(3/8) w3 + 4 w2", w, 1e-12));
        }
        Err(e) => out.push(Check::error(7, "p=sqrt(3/8) orbit", e)),
    }
    out
}

fn classification() -> Vec<Check> {
    let mut out = Vec::new();
    match odecore::classify(params(P_EXTREMAL), TOL) {
        Ok(c) => {
            out.push(Check::holds(
                8,
                "classify(sqrt(3/8))",
                c.kind,
                "PeriodicAdmissible",
                c.kind == SolutionKind::PeriodicAdmissible,
            ));
            let zeros = c.zeros_phi1.unwrap_or(0);
            out.push(Check::holds(8, "zeros of phi1 per period", zeros, "2", zeros == 2));
            out.push(Check::new(8, "min phi2", fmt_f(c.min_phi2), "> 0".into(), "sign".into(), c.min_phi2 > 0.0));
        }
        Err(e) => out.push(Check::error(8, "classify(sqrt(3/8))", e)),
    }
    for target in ["3/2", "37/25", "44/29"] {
        let t: RationalTarget = target.parse().expect("valid literal");
        match find_p_for_ratio(t, 1e-3) {
            Ok(roots) => {
                if roots.is_empty() {
                    out.push(Check::note(8, &format!("solutions of R(p) = {target}"), Status::Pass, "none".into()));
                }
                for p in roots {
                    let label = format!("R(p) = {target}, p = {p:.15}: zeros of phi1");
                    match odecore::classify(params(p), TOL) {
                        Ok(c) => {
                            let z = c.zeros_phi1.unwrap_or(0);
                            out.push(Check::new(8, &label, z.to_string(), ">= 6".into(), "count".into(), z >= 6));
                        }
                        Err(e) => out.push(Check::error(8, &label, e)),
                    }
                }
            }
            Err(PeriodError::OutOfRange { .. }) => out.push(Check::note(
                8,
                &format!("solutions of R(p) = {target}"),
                Status::Pass,
                "none: target outside the ratio range".into(),
            )),
            Err(e) => out.push(Check::error(8, &format!("find_p({target})"), e)),
        }
    }
    for p in [0.9, 0.95, 1.0] {
        let label = format!("p={p}: |phi2| at its first zero");
        let result = odecore::classify(params(p), TOL).and_then(|c| {
            let y = c
                .phi2_zero
                .ok_or_else(|| odecore::OdeError::InvalidArgument(format!("no zero of phi2 ({})", c.kind)))?;
            let t = integrate(params(p), y + 1.0, TOL)?;
            Ok(t.state_at(y)?.phi2.abs())
        });
        match result {
            Ok(v) => out.push(Check::at_most(8, &label, v, 1e-6)),
            Err(e) => out.push(Check::error(8, &label, e)),
        }
    }
    out
}

/// λ₁ of the flat Klein bottle with y-period a.
pub fn flat_oracle(a: f64) -> f64 {
    (2.0 * PI / a).powi(2).min(4.0)
}

fn spectral_oracle(opts: &VerifyOptions) -> Vec<Check> {
    let mut out = Vec::new();
    for a in [1.0, 2.0, PI, 2.0 * PI, 8.0] {
        let label = format!("lambda1(flat, a={a:.6})");
        match lambda1(&MetricProfile::flat(a), spectral::DEFAULT_K_MAX, opts.grid) {
            Ok(r) => out.push(Check::abs(9, &label, r.lambda1, flat_oracle(a), 1e-8)),
            Err(e) => out.push(Check::error(9, &label, e)),
        }
    }
    let c = 2.5;
    for profile in [MetricProfile::flat(3.0), g0_profile()] {
        let label = format!("lambda1(c f) * c, c={c}, {}", profile.description);
        match (lambda1(&profile, 4, opts.grid), lambda1(&profile.scaled(c), 4, opts.grid)) {
            (Ok(base), Ok(scaled)) => out.push(Check::abs(9, &label, scaled.lambda1 * c, base.lambda1, 1e-10 * c)),
            (Err(e), _) | (_, Err(e)) => out.push(Check::error(9, &label, e)),
        }
    }
    out
}

fn separation() -> Vec<Check> {
    let mut out = Vec::new();
    let half = params(0.5);
    match integrate(half, 20.0, TOL) {
        Ok(t) => {
            let mut du: f64 = 0.0;
            let mut dv: f64 = 0.0;
            let mut bad = None;
            for i in 0..=4000 {
                let s = t.state_at(20.0 * i as f64 / 4000.0).unwrap();
                match to_parabolic(&s, half) {
                    Ok(ps) => {
                        du = du.max((ps.du * ps.du - poly_p(ps.u, half)).abs());
                        dv = dv.max((ps.dv * ps.dv - poly_p(ps.v, half)).abs());
                    }
                    Err(e) => bad = Some(e),
                }
            }
            match bad {
                None => {
                    out.push(Check::at_most(10, "p=1/2 max |u'^2 - P(u)|", du, 1e-7));
                    out.push(Check::at_most(10, "p=1/2 max |v'^2 - P(v)|", dv, 1e-7));
                }
                Some(e) => out.push(Check::error(10, "p=1/2 parabolic map", e)),
            }
        }
        Err(e) => out.push(Check::error(10, "p=1/2 trajectory", e)),
    }
    out.push(match round_trip(1000, 0x6b_6c65_696e) {
        Ok(err) => Check::at_most(10, "parabolic round trip, 1000 states", err, 1e-10),
        Err(e) => Check::error(10, "parabolic round trip", e),
    });
    let mut worst: f64 = 0.0;
    for p in [0.3, 0.5, P_EXTREMAL, 0.7, 0.9, 1.0] {
        match accel_defect(params(p)) {
            Ok(d) => worst = worst.max(d),
            Err(e) => {
                out.push(Check::error(10, &format!("accel0 at p={p}"), e));
                return out;
            }
        }
    }
    out.push(Check::at_most(10, "accel0 vs second differences", worst, 1e-5));
    out
}

/// Largest round-trip error on (u, v, u̇, v̇) over `count` on-shell states.
pub fn round_trip(count: usize, seed: u64) -> Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_p = 50;
    let mut worst: f64 = 0.0;
    for _ in 0..count.div_ceil(per_p) {
        let p = loop {
            let p: f64 = rng.gen_range(0.05..1.0);
            if (p - P_DECAY).abs() > 1e-3 {
                break params(p);
            }
        };
        let t = integrate(p, 12.0, TOL).map_err(|e| e.to_string())?;
        for _ in 0..per_p {
            let s = t.state_at(rng.gen_range(0.0..12.0)).map_err(|e| e.to_string())?;
            let ps = to_parabolic(&s, p).map_err(|e| e.to_string())?;
            let back = from_parabolic(&ps, p).map_err(|e| e.to_string())?;
            let again = to_parabolic(&back, p).map_err(|e| e.to_string())?;
            let err = [ps.u - again.u, ps.v - again.v, ps.du - again.du, ps.dv - again.dv]
                .iter()
                .fold(0.0f64, |m, d| m.max(d.abs()));
            worst = worst.max(err);
        }
    }
    Ok(worst)
}

/// |accel0 − fourth-order centred second difference of (u, v)(y)| at y = 0.
pub fn accel_defect(p: Params) -> Result<f64, String> {
    let h = 1e-3;
    let fwd = integrate_to(p, 3.0 * h, TOL).map_err(|e| e.to_string())?;
    let bwd = integrate_to(p, -3.0 * h, TOL).map_err(|e| e.to_string())?;
    let uv = |y: f64| -> Result<(f64, f64), String> {
        let s = if y > 0.0 {
            fwd.state_at(y)
        } else if y < 0.0 {
            bwd.state_at(y)
        } else {
            Ok(odecore::initial_state(p))
        };
        let s = s.map_err(|e| e.to_string())?;
        Ok(parabolic_coordinates(s.phi1, s.phi2))
    };
    let weights = [(-2.0, -1.0), (-1.0, 16.0), (0.0, -30.0), (1.0, 16.0), (2.0, -1.0)];
    let (mut du, mut dv) = (0.0, 0.0);
    for (k, w) in weights {
        let (u, v) = uv(k * h)?;
        du += w * u;
        dv += w * v;
    }
    let scale = 12.0 * h * h;
    let (au, av) = accel0(p).map_err(|e: geometry::GeometryError| e.to_string())?;
    Ok((du / scale - au).abs().max((dv / scale - av).abs()))
}
