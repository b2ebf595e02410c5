mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use klein_core::odecore::{self, first_integrals, Params};
use klein_core::periods::{self, PeriodData, RationalTarget};
use klein_core::spectral::{self, MetricProfile};
use klein_core::P_DECAY;
use klein_verification::{Status, VerifyOptions};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const THREADS_VAR: &str = "KLEIN_NUM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "klein", version, about = "Extremal metrics on the Klein bottle: ODE, periods and spectra")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the ODE and write the trajectory as CSV or SVG.
    Integrate(IntegrateArgs),
    /// Tabulate T_u, T_v and R over a grid of p.
    Periods(PeriodsArgs),
    /// Solve R(p) = q/m.
    FindP(FindPArgs),
    /// Classify the solution with parameter p.
    Classify(ClassifyArgs),
    /// First eigenvalue, area and their product for a metric profile.
    Spectrum(SpectrumArgs),
    /// Run the acceptance checks.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Svg,
}

#[derive(Args, Debug)]
struct Output {
    /// Output file (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[arg(long, value_parser = parse_p)]
    p: f64,
    #[arg(long, default_value_t = 10.0, value_parser = parse_positive)]
    y_end: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PeriodsArgs {
    /// A single parameter instead of a sweep.
    #[arg(long, value_parser = parse_p, conflicts_with_all = ["p_min", "p_max", "p_step"])]
    p: Option<f64>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_p)]
    p_min: f64,
    #[arg(long, default_value_t = P_DECAY - 0.05, value_parser = parse_p)]
    p_max: f64,
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    p_step: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct FindPArgs {
    /// Target ratio q/m.
    #[arg(long)]
    ratio: RationalTarget,
    /// Step of the bracketing scan.
    #[arg(long, default_value_t = 1e-3, value_parser = parse_positive)]
    p_step: f64,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long, value_parser = parse_p)]
    p: f64,
    #[arg(long, default_value_t = 1e-12, value_parser = parse_positive)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    /// flat:<a>, g0 or reconstructed:<p>.
    #[arg(long, default_value = "g0", value_parser = parse_metric)]
    metric: Metric,
    #[arg(long, default_value_t = spectral::DEFAULT_GRID, value_parser = parse_grid)]
    grid: usize,
    /// Largest harmonic index considered.
    #[arg(long, default_value_t = spectral::DEFAULT_K_MAX)]
    k_max: usize,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = klein_verification::REFERENCE_GRID, value_parser = parse_grid)]
    grid: usize,
    /// Skip the p-grid sweep.
    #[arg(long)]
    quick: bool,
}

#[derive(Clone, Debug, PartialEq)]
enum Metric {
    Flat(f64),
    G0,
    Reconstructed(f64),
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        Ok(x) => Err(format!("must be positive and finite, got {x}")),
        Err(e) => Err(e.to_string()),
    }
}

fn parse_p(s: &str) -> Result<f64, String> {
    let p = parse_positive(s)?;
    Params::new(p).map(|_| p).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e: std::num::ParseIntError| e.to_string())?;
    if n >= 64 && n.is_power_of_two() {
        Ok(n)
    } else {
        Err(format!("grid must be a power of two ≥ 64, got {n}"))
    }
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    match s.split_once(':') {
        None if s == "g0" => Ok(Metric::G0),
        Some(("flat", a)) => parse_positive(a).map(Metric::Flat),
        Some(("reconstructed", p)) => parse_p(p).map(Metric::Reconstructed),
        _ => Err(format!("expected flat:<a>, g0 or reconstructed:<p>, got {s:?}")),
    }
}

/// Exactly 17 significant digits.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_output(output: &Output, contents: &[u8]) -> Result<()> {
    match &output.out {
        Some(path) => fs::write(path, contents).with_context(|| format!("writing {}", path.display())),
        None => io::stdout().write_all(contents).context("writing to standard output"),
    }
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| anyhow!("{e}"))
}

fn cmd_integrate(args: &IntegrateArgs) -> Result<()> {
    let params = Params::new(args.p)?;
    let traj = odecore::integrate(params, args.y_end, args.tol)?;
    let samples = traj.samples();
    let bytes = match args.output.format {
        Format::Csv => csv_bytes(
            &["y", "phi1", "phi2", "dphi1", "dphi2", "H1", "H2"],
            samples.iter().map(|s| {
                let (h1, h2) = first_integrals(s);
                [s.y, s.phi1, s.phi2, s.dphi1, s.dphi2, h1, h2].into_iter().map(fmt_f).collect()
            }),
        )?,
        Format::Svg => {
            let series = |label: &str, f: fn(&odecore::State) -> (f64, f64)| svg::Series {
                label: label.into(),
                points: samples.iter().map(f).collect(),
            };
            svg::render(&[
                svg::Panel {
                    title: format!("solution, p = {}", args.p),
                    x_label: "y".into(),
                    y_label: "phi".into(),
                    series: vec![series("phi1", |s| (s.y, s.phi1)), series("phi2", |s| (s.y, s.phi2))],
                },
                svg::Panel {
                    title: "orbit".into(),
                    x_label: "phi1".into(),
                    y_label: "phi2".into(),
                    series: vec![series("(phi1, phi2)", |s| (s.phi1, s.phi2))],
                },
            ])
            .into_bytes()
        }
    };
    write_output(&args.output, &bytes)
}

fn period_grid(args: &PeriodsArgs) -> Result<Vec<f64>> {
    if let Some(p) = args.p {
        return Ok(vec![p]);
    }
    if args.p_max < args.p_min {
        bail!("--p-max {} is below --p-min {}", args.p_max, args.p_min);
    }
    let n = ((args.p_max - args.p_min) / args.p_step * (1.0 + 1e-12)).floor() as usize;
    Ok((0..=n).map(|i| args.p_min + i as f64 * args.p_step).collect())
}

fn cmd_periods(args: &PeriodsArgs) -> Result<()> {
    let grid = period_grid(args)?;
    let rows = periods::tabulate(&grid);
    if !rows.is_empty() && rows.iter().all(|r| r.is_err()) {
        let first = rows.into_iter().find_map(Result::err).expect("non-empty");
        bail!("every row failed, first error: {first}");
    }
    let bytes = match args.output.format {
        Format::Csv => csv_bytes(
            &["p", "Tu", "Tv", "R", "err"],
            rows.iter().zip(&grid).map(|(row, &p)| match row {
                Ok(PeriodData { p, tu, tv, r, err }) => [*p, *tu, *tv, *r, *err].into_iter().map(fmt_f).collect(),
                Err(e) => vec![fmt_f(p), "NaN".into(), "NaN".into(), "NaN".into(), format!("error: {e}")],
            }),
        )?,
        Format::Svg => {
            let ok: Vec<&PeriodData> = rows.iter().filter_map(|r| r.as_ref().ok()).collect();
            let series = |label: &str, f: fn(&PeriodData) -> f64| svg::Series {
                label: label.into(),
                points: ok.iter().map(|d| (d.p, f(d))).collect(),
            };
            svg::render(&[
                svg::Panel {
                    title: "periods".into(),
                    x_label: "p".into(),
                    y_label: "tau-period".into(),
                    series: vec![series("Tv", |d| d.tv), series("Tu", |d| d.tu)],
                },
                svg::Panel {
                    title: "ratio".into(),
                    x_label: "p".into(),
                    y_label: "Tv / Tu".into(),
                    series: vec![series("R", |d| d.r)],
                },
            ])
            .into_bytes()
        }
    };
    write_output(&args.output, &bytes)
}

fn cmd_find_p(args: &FindPArgs) -> Result<()> {
    let roots = periods::find_p_for_ratio(args.ratio, args.p_step)?;
    if roots.is_empty() {
        eprintln!("no p with R(p) = {}", args.ratio);
    }
    let target = args.ratio.value();
    for p in roots {
        let r = periods::ratio(Params::new(p)?)?.r;
        println!("p={} R={} residual={:.3e}", fmt_f(p), fmt_f(r), (r - target).abs());
    }
    Ok(())
}

fn cmd_classify(args: &ClassifyArgs) -> Result<()> {
    let c = odecore::classify(Params::new(args.p)?, args.tol)?;
    let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_f);
    let zeros = c.zeros_phi1.map_or_else(|| "none".to_string(), |z| z.to_string());
    println!(
        "{} zeros={zeros} period_y={} min_phi2={} phi2_zero={}",
        c.kind,
        opt(c.period_y),
        fmt_f(c.min_phi2),
        opt(c.phi2_zero)
    );
    Ok(())
}

fn cmd_spectrum(args: &SpectrumArgs) -> Result<()> {
    let profile = match args.metric {
        Metric::Flat(a) => MetricProfile::flat(a),
        Metric::G0 => spectral::g0_profile(),
        Metric::Reconstructed(p) => spectral::reconstructed_profile(Params::new(p)?)?,
    };
    let r = spectral::lambda1(&profile, args.k_max, args.grid)?;
    println!(
        "lambda1={:.10} k_min={} area={:.10} product={:.10} err={:.3e}",
        r.lambda1, r.k_min, r.area, r.product, r.err
    );
    for (k, l) in r.per_k.iter().enumerate() {
        println!("k={k} lambda={}", fmt_f(*l));
    }
    Ok(())
}

enum Failure {
    Numeric(anyhow::Error),
    Verification(usize),
}

fn cmd_verify(args: &VerifyArgs) -> Result<(), Failure> {
    let opts = VerifyOptions { grid: args.grid, quick: args.quick };
    let checks = klein_verification::run(&opts);
    println!("{:<4}  {:>2}  {:<52} {:<40} {:<28} tolerance", "", "#", "check", "measured", "target");
    for c in &checks {
        println!(
            "{:<4}  {:>2}  {:<52} {:<40} {:<28} {}",
            c.status, c.criterion, c.label, c.measured, c.target, c.tolerance
        );
    }
    let failed = checks.iter().filter(|c| c.status == Status::Fail).count();
    println!("{} checks, {failed} failed", checks.len());
    if failed > 0 {
        Err(Failure::Verification(failed))
    } else {
        Ok(())
    }
}

fn configure_threads() -> Result<(), String> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize =
        value.trim().parse().map_err(|_| format!("{THREADS_VAR} must be a positive integer, got {value:?}"))?;
    if n == 0 {
        return Err(format!("{THREADS_VAR} must be a positive integer, got 0"));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match &cli.command {
        Command::Integrate(a) => cmd_integrate(a).map_err(Failure::Numeric),
        Command::Periods(a) => cmd_periods(a).map_err(Failure::Numeric),
        Command::FindP(a) => cmd_find_p(a).map_err(Failure::Numeric),
        Command::Classify(a) => cmd_classify(a).map_err(Failure::Numeric),
        Command::Spectrum(a) => cmd_spectrum(a).map_err(Failure::Numeric),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_NUMERIC)
        }
        Err(Failure::Verification(n)) => {
            eprintln!("verification failed: {n} checks");
            ExitCode::from(EXIT_VERIFY)
        }
    }
}
