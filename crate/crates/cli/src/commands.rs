//! Command-line surface: argument parsing, dispatch and file output.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use equilift::builders::{dbar_counterexample, dbar_residual};
use equilift::divisors::{generate, Divisor, GenKind, PrincipalParts};
use equilift::lifting::{
    lift_mittag_leffler, recovered_principal_parts, verify_equivariance, LiftError, PipelineConfig,
};
use equilift::periodic::{riesz_growth_demo, AnchorRange, LatticeGreen};
use equilift::plane::Window;
use equilift::toast::{build_covariant_toast, build_toast, verify_axioms, ToastForest};
use equilift::{c64, C64};
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::report::{csv_bytes, Check, Report};
use crate::suite::{self, Group};
use crate::tolerances::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn config(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

/// Complex number written as "re,im".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexArg(pub C64);

impl FromStr for ComplexArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_floats(s, 2)?;
        Ok(ComplexArg(c64(v[0], v[1])))
    }
}

/// Window written as "xmin,xmax,ymin,ymax".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowArg(pub Window);

impl FromStr for WindowArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let v = parse_floats(s, 4)?;
        Window::new(v[0], v[1], v[2], v[3]).map(WindowArg).map_err(|e| e.to_string())
    }
}

/// Inclusive integer range written as "a:b".
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RangeArg(pub u32, pub u32);

impl FromStr for RangeArg {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
        let a: u32 = a.trim().parse().map_err(|_| format!("bad range start {a:?}"))?;
        let b: u32 = b.trim().parse().map_err(|_| format!("bad range end {b:?}"))?;
        if a > b {
            return Err(format!("empty range {s}"));
        }
        Ok(RangeArg(a, b))
    }
}

fn parse_floats(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number {p:?} in {s:?}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers, got {s:?}"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(format!("non-finite value in {s:?}"));
    }
    Ok(v)
}

#[derive(Debug, Parser)]
#[command(name = "equilift", version, about = "Shift-equivariant lifting of point configurations")]
pub struct Cli {
    /// Also write the check report as JSON to this path.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate divisors.
    #[command(subcommand)]
    Divisor(DivisorCmd),
    /// Build and verify toasts.
    #[command(subcommand)]
    Toast(ToastCmd),
    /// Run the level-by-level lifting.
    #[command(subcommand)]
    Lift(LiftCmd),
    /// Double-run verifications.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// The transform counterexample and the Cauchy solver.
    #[command(subcommand)]
    Dbar(DbarCmd),
    /// Lattice Green's functions.
    #[command(subcommand)]
    Green(GreenCmd),
    /// Growth, anchor and product demonstrations.
    #[command(subcommand)]
    Demo(DemoCmd),
    /// Verification suites.
    #[command(subcommand)]
    Suite(SuiteCmd),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum KindArg {
    Poisson,
    Jittered,
    AlmostPeriodic,
    Lattice,
}

#[derive(Debug, Subcommand)]
pub enum DivisorCmd {
    Gen {
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 0.5)]
        intensity: f64,
        #[arg(long, default_value_t = 1.0)]
        spacing: f64,
        #[arg(long, default_value_t = 0.25)]
        jitter: f64,
        #[arg(long, default_value = "-16,16,-16,16", allow_hyphen_values = true)]
        window: WindowArg,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Schedule {
    Lacunary,
    Geometric,
}

#[derive(Debug, Args)]
pub struct ToastArgs {
    #[arg(long, value_enum, default_value_t = Schedule::Lacunary)]
    schedule: Schedule,
    /// Top level index N.
    #[arg(long, default_value_t = LIFT_TOP_LEVEL)]
    levels: usize,
    /// Leaf radius of the geometric schedule.
    #[arg(long, default_value_t = 1.0)]
    r0: f64,
    /// Growth factor of the geometric schedule.
    #[arg(long, default_value_t = 4.0)]
    gamma: f64,
}

#[derive(Debug, Subcommand)]
pub enum ToastCmd {
    Build {
        #[arg(long)]
        divisor: PathBuf,
        #[command(flatten)]
        toast: ToastArgs,
        #[arg(long)]
        out: PathBuf,
    },
    Verify {
        #[arg(long)]
        toast: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum LiftCmd {
    Weierstrass {
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value_t = LIFT_TOP_LEVEL)]
        levels: usize,
        /// Trace as JSON, or rate certificates as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    MittagLeffler {
        /// Principal parts as JSON.
        #[arg(long)]
        poles: PathBuf,
        #[arg(long, default_value = "-16,16,-16,16", allow_hyphen_values = true)]
        window: WindowArg,
        #[arg(long, default_value_t = LIFT_TOP_LEVEL)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Poisson {
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value_t = LIFT_TOP_LEVEL)]
        levels: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sub-mean-value probes as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    Equivariance {
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, default_value = "0.37,1.2", allow_hyphen_values = true)]
        shift: ComplexArg,
        #[arg(long, default_value_t = LIFT_TOP_LEVEL)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DbarCmd {
    Counterexample {
        #[arg(long, default_value = "5:20")]
        n: RangeArg,
        #[arg(long, default_value_t = DBAR_TABLE_H)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cauchy transform of a smooth bump, checked against d-bar.
    Solve {
        #[arg(long, default_value_t = CAUCHY_H)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GreenCmd {
    Check {
        /// Lattice configuration as JSON; defaults to Z e1 in R^3.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = GREEN_RADIUS)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum DemoCmd {
    Riesz {
        #[arg(long, default_value_t = 5.0)]
        t_min: f64,
        #[arg(long, default_value_t = 40.0)]
        t_max: f64,
        #[arg(long, default_value_t = 0.5)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Anchor {
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        s_min: f64,
        #[arg(long, default_value_t = 4.0)]
        s_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Yosida {
        #[arg(long, default_value_t = 6)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SuiteCmd {
    /// Every acceptance criterion; writes summary.json and CSV tables.
    All {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn load_divisor(path: &Path) -> Result<Divisor, CliError> {
    Divisor::from_json(&read(path)?).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn positive(name: &str, v: f64) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(config(format!("--{name} must be positive, got {v}")))
    }
}

fn pipeline(levels: usize) -> Result<PipelineConfig, CliError> {
    if levels == 0 {
        return Err(config("--levels must be at least 1"));
    }
    Ok(PipelineConfig::lacunary(levels))
}

/// Writes rows as CSV, or as a JSON array for any other extension.
fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), CliError> {
    if is_csv(path) {
        write(path, &csv_bytes(rows))
    } else {
        let mut s = serde_json::to_string_pretty(rows).expect("rows serialize");
        s.push('\n');
        write(path, s.as_bytes())
    }
}

fn write_group(path: &Path, g: &Group) -> Result<(), CliError> {
    let bytes = if is_csv(path) {
        g.tables.first().map(|t| t.1.clone()).unwrap_or_default()
    } else {
        let mut s = serde_json::to_string_pretty(&g.checks).expect("checks serialize");
        s.push('\n');
        s.into_bytes()
    };
    write(path, &bytes)
}

/// Parses arguments, runs the command and returns its report.
pub fn run(cli: &Cli, argv: Vec<String>) -> Result<Report, CliError> {
    let mut report = Report::new(argv);
    match &cli.command {
        Command::Divisor(DivisorCmd::Gen { kind, intensity, spacing, jitter, window, seed, out }) => {
            let kind = match kind {
                KindArg::Poisson => GenKind::Poisson { intensity: positive("intensity", *intensity)? },
                KindArg::Jittered => GenKind::JitteredLattice { spacing: positive("spacing", *spacing)?, jitter: *jitter },
                KindArg::AlmostPeriodic => GenKind::AlmostPeriodic,
                KindArg::Lattice => GenKind::PeriodicLattice { spacing: positive("spacing", *spacing)? },
            };
            let d = generate(kind, window.0, *seed).map_err(config)?;
            report.push(Check::flag("divisor.generated", true, json!(null)));
            write(out, d.to_json().as_bytes())?;
        }
        Command::Toast(ToastCmd::Build { divisor, toast, out }) => {
            let d = load_divisor(divisor)?;
            let t = match toast.schedule {
                Schedule::Lacunary => build_toast(&d, &pipeline(toast.levels)?.toast),
                Schedule::Geometric => {
                    build_covariant_toast(&d, toast.levels + 1, positive("r0", toast.r0)?, positive("gamma", toast.gamma)?)
                }
            }
            .map_err(config)?;
            report.push(Check::flag("toast.built", true, json!(null)));
            write(out, t.to_json().as_bytes())?;
        }
        Command::Toast(ToastCmd::Verify { toast, out }) => {
            let t = ToastForest::from_json(&read(toast)?).map_err(config)?;
            let rep = verify_axioms(&t, &t.window);
            for c in &rep.checks {
                let ok = c.status != equilift::toast::AxiomStatus::Fail;
                report.push(Check::flag(format!("toast.axiom{}", c.axiom), ok, json!(c)));
            }
            if let Some(out) = out {
                let mut s = serde_json::to_string_pretty(&rep).expect("report serializes");
                s.push('\n');
                write(out, s.as_bytes())?;
            }
        }
        Command::Lift(LiftCmd::Weierstrass { divisor, levels, out }) => {
            let d = load_divisor(divisor)?;
            let cfg = pipeline(*levels)?;
            let shift = c64(EQUIVARIANCE_SHIFT.0, EQUIVARIANCE_SHIFT.1);
            let (checks, trace) = suite::weierstrass_checks(&d, &cfg, shift, "lift");
            report.extend(checks.into_iter().filter(|c| !c.name.ends_with("equivariance")));
            if let (Some(out), Some(t)) = (out, trace) {
                if is_csv(out) {
                    write(out, &csv_bytes(&suite::rate_rows(0, &t)))?;
                } else {
                    write(out, t.to_json().as_bytes())?;
                }
            }
        }
        Command::Lift(LiftCmd::MittagLeffler { poles, window, levels, out }) => {
            let pp: PrincipalParts = serde_json::from_str(&read(poles)?).map_err(config)?;
            let pp = PrincipalParts::new(pp.entries).map_err(config)?;
            let cfg = pipeline(*levels)?;
            let d = suite::pole_divisor(&pp, window.0);
            let trace = build_toast(&d, &cfg.toast)
                .map_err(LiftError::from)
                .and_then(|t| lift_mittag_leffler(&pp, &t, &cfg.lift));
            match trace {
                Ok(tr) => {
                    let diff = recovered_principal_parts(&tr, ML_CONTOUR_RADIUS, ML_ORDER_CAP)
                        .map_or(f64::INFINITY, |b| b.max_coeff_difference(&pp, 1e-12));
                    report.push(Check::at_most("ml.coefficients", diff, ML_COEFF_TOL));
                    report.push(Check::flag("ml.rates", tr.rates_hold(), json!(tr.rates)));
                    if let Some(out) = out {
                        write(out, tr.to_json().as_bytes())?;
                    }
                }
                Err(e) => report.push(Check::flag("ml.lift", false, json!({ "error": e.to_string() }))),
            }
        }
        Command::Lift(LiftCmd::Poisson { divisor, levels, seed, out }) => {
            let d = load_divisor(divisor)?;
            match suite::poisson_checks(&d, &pipeline(*levels)?, *seed) {
                Ok((checks, rows)) => {
                    report.extend(checks);
                    if let Some(out) = out {
                        write_rows(out, &rows)?;
                    }
                }
                Err(e) => report.push(Check::flag("poisson.lift", false, json!({ "error": e }))),
            }
        }
        Command::Verify(VerifyCmd::Equivariance { divisor, shift, levels, out }) => {
            let d = load_divisor(divisor)?;
            let eq = verify_equivariance(&d, shift.0, &pipeline(*levels)?);
            report.push(
                Check::below("equivariance", eq.deviation.unwrap_or(f64::INFINITY), EQUIVARIANCE_TOL).with_witness(json!(eq)),
            );
            if let Some(out) = out {
                let mut s = serde_json::to_string_pretty(&eq).expect("report serializes");
                s.push('\n');
                write(out, s.as_bytes())?;
            }
        }
        Command::Dbar(DbarCmd::Counterexample { n, h, out }) => {
            if n.0 < 1 {
                return Err(config("--n must start at 1 or above"));
            }
            let ns: Vec<u32> = (n.0..=n.1).collect();
            let rows = dbar_counterexample(&ns, positive("h", *h)?).map_err(config)?;
            for r in &rows {
                report.push(Check::at_least(format!("dbar.n{:02}", r.n), r.computed, r.bound));
            }
            if let Some(out) = out {
                write_rows(out, &rows)?;
            }
        }
        Command::Dbar(DbarCmd::Solve { h, out }) => {
            let probes: Vec<C64> = (0..12).map(|k| C64::from_polar(0.08 * k as f64, 2.4 * k as f64)).collect();
            let h = positive("h", *h)?;
            let r = dbar_residual(suite::cauchy_test_fn, Window::square(1.5), h, &probes).map_err(config)?;
            report.push(Check::below("cauchy.residual", r, CAUCHY_RESIDUAL));
            if let Some(out) = out {
                write_rows(out, &[json!({ "h": h, "residual": r, "bound": CAUCHY_RESIDUAL })])?;
            }
        }
        Command::Green(GreenCmd::Check { config: cfg, radius, out }) => {
            let g = match cfg {
                Some(p) => {
                    let g: LatticeGreen = serde_json::from_str(&read(p)?).map_err(config)?;
                    LatticeGreen::new(g.dim, g.generators, g.radius)
                }
                None => LatticeGreen::z_e1(positive("radius", *radius)?),
            }
            .map_err(config)?;
            let (checks, rows) = suite::green_checks(&g).map_err(config)?;
            report.extend(checks);
            if let Some(out) = out {
                write_rows(out, &rows)?;
            }
        }
        Command::Demo(DemoCmd::Riesz { t_min, t_max, step, out }) => {
            if !(t_min < t_max) {
                return Err(config("--t-min must be below --t-max"));
            }
            let rows = riesz_growth_demo(positive("t-min", *t_min)?, *t_max, positive("step", *step)?);
            let last = rows.last().map_or(0.0, |r| r.ratio);
            report.push(Check::relative("riesz.ratio", last, std::f64::consts::PI, RIESZ_PI_REL));
            if let Some(out) = out {
                write_rows(out, &rows)?;
            }
        }
        Command::Demo(DemoCmd::Anchor { s_min, s_max, out }) => {
            if !(s_min < s_max) {
                return Err(config("--s-min must be below --s-max"));
            }
            let range = AnchorRange { s_min: *s_min, s_max: *s_max, ..AnchorRange::default() };
            let mut g = Group { id: 3, title: "anchors", checks: vec![], tables: vec![], seconds: 0.0 };
            suite::anchor_rows_in(&mut g, range);
            report.extend(g.checks.clone());
            if let Some(out) = out {
                write_group(out, &g)?;
            }
        }
        Command::Demo(DemoCmd::Yosida { n, seed, out }) => {
            if *n < 3 {
                return Err(config("--n must be at least 3"));
            }
            let (checks, rows) = suite::yosida_rows(*n, *seed).map_err(config)?;
            report.extend(checks);
            if let Some(out) = out {
                write_rows(out, &rows)?;
            }
        }
        Command::Suite(SuiteCmd::All { seed, out }) => {
            let res = suite::run_suite(*seed, report.command.clone());
            for g in &res.groups {
                eprintln!("[{}] {}: {} ({:.1} s)", g.id, g.title, g.summary(), g.seconds);
            }
            if let Some(dir) = out {
                fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
                for (name, bytes) in &res.files {
                    write(&dir.join(name), bytes)?;
                }
            }
            report = res.report;
        }
    }
    if let Some(p) = &cli.report {
        write(p, report.to_json().as_bytes())?;
    }
    Ok(report)
}

/// Full entry point: returns the process exit status.
pub fn main_with_args(argv: Vec<String>) -> i32 {
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli, argv.into_iter().skip(1).collect()) {
        Ok(r) if r.passed() => 0,
        Ok(r) => {
            let n = r.failures().count();
            let first = r.failures().next().expect("at least one failure");
            eprintln!(
                "check failed: {} (measured {:?}, bound {:?}){}",
                first.name,
                first.measured,
                first.bound,
                if n > 1 { format!(" and {} more", n - 1) } else { String::new() }
            );
            1
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
