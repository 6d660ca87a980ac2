//! Command-line surface of the `simid` binary.
//!
//! [`parse_job`] turns argv (plus an optional `--config` file) into a
//! validated [`JobSpec`]; [`run_job`] executes it. Data goes to standard
//! output or the `--output` path, diagnostics to standard error.
//!
//! Exit codes: 0 success, 1 I/O failure or failed selftest, 2 invalid job,
//! 3 every grid point infeasible, 4 a computation budget was exceeded.

mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::info::{DistortionMatrix, Pmf, RateCurve};
use crate::rates::{
    bound_curve, closed_form_binary_symmetric, enumerate_sign_patterns, lc_curve, r_id_curve_with,
    rd_curve, sign_pattern_count, tc_curve, Assignments, CurveOptions,
};
use crate::sim::{
    build_codebook, estimate_maybe_probability, exhaustive_admissibility_check, CodebookOptions,
    Coverage, DEFAULT_POOL,
};
use crate::solver::{check_tolerance, distortion_rate};
use crate::transport::rho_bar;
use crate::Error;

pub use output::{
    curve_csv, curve_json, format_sig, parse_curve_csv, simulation_csv, simulation_json,
    SimulationRow, CURVE_HEADER, SIMULATION_HEADER,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

/// A diagnostic with the exit code it maps to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_lib(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded(_) | Error::TooLarge { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Rid,
    RidGeneral,
    Tc,
    Lc,
    Rd,
    Rhobar,
    Bound,
    Sweep,
    Simulate,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rid => "rid",
            Command::RidGeneral => "rid-general",
            Command::Tc => "tc",
            Command::Lc => "lc",
            Command::Rd => "rd",
            Command::Rhobar => "rhobar",
            Command::Bound => "bound",
            Command::Sweep => "sweep",
            Command::Simulate => "simulate",
            Command::Selftest => "selftest",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum CoverageMode {
    #[default]
    Full,
    Typical,
}

/// How the identification rate picks `|U|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    /// `|U| = |X|` followed by the lower convex envelope.
    Envelope,
    /// `|U| = |X| + 1`, no envelope.
    Strict,
    Fixed(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub n: usize,
    pub trials: u64,
    pub coverage: Coverage,
    pub pool: usize,
    pub check: bool,
}

/// A validated job.
#[derive(Debug, Clone, PartialEq)]
pub struct JobSpec {
    pub command: Command,
    pub px: Option<Pmf>,
    pub py: Option<Pmf>,
    pub distortion: Option<DistortionMatrix>,
    pub d_grid: Vec<f64>,
    /// Budget rates for `simulate`.
    pub r_grid: Vec<f64>,
    pub tol: f64,
    pub cardinality: Cardinality,
    pub full_enumeration: bool,
    pub spot_check: bool,
    pub seed: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub threads: usize,
    pub simulation: SimulationSpec,
}

#[derive(Debug, Clone, Args)]
struct JobArgs {
    /// Source pmf, comma separated.
    #[arg(long)]
    px: Option<String>,
    /// Query pmf, comma separated.
    #[arg(long)]
    py: Option<String>,
    /// `hamming` or rows like `0,1,1;1,0,1;1,1,0`.
    #[arg(long, default_value = "hamming")]
    distortion: String,
    /// Distortion grid: `a,b,c` or `start:stop:count`.
    #[arg(long = "D")]
    d: Option<String>,
    /// Rate grid (budget rates for `simulate`).
    #[arg(long = "R")]
    r: Option<String>,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Use `|U| = |X| + 1` without the convex envelope.
    #[arg(long)]
    strict_cardinality: bool,
    /// Solve at this `|U|` without the envelope.
    #[arg(long)]
    u_size: Option<usize>,
    /// Enumerate every vertex map in `rid-general`.
    #[arg(long)]
    full_enumeration: bool,
    /// Also report the `|X| + 1` curve on standard error.
    #[arg(long)]
    spot_check: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Output file; a path prefix for `sweep`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads; falls back to `SIMID_THREADS`, then 1.
    #[arg(long)]
    threads: Option<usize>,
    /// Blocklength for `simulate`.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, value_enum, default_value_t)]
    coverage: CoverageMode,
    /// Typicality slack for `--coverage typical`.
    #[arg(long, default_value_t = 0.1)]
    gamma: f64,
    /// Largest codeword candidate pool.
    #[arg(long, default_value_t = DEFAULT_POOL)]
    pool: usize,
    /// Run the admissibility scan for each simulated threshold.
    #[arg(long)]
    check: bool,
    /// `key=value` job file; flags on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Identification rate.
    #[command(args_override_self = true)]
    Rid(JobArgs),
    /// Identification rate by the dual-vertex method, for any distortion.
    #[command(args_override_self = true)]
    RidGeneral(JobArgs),
    /// Type-covering triangle scheme rate.
    #[command(args_override_self = true)]
    Tc(JobArgs),
    /// Lossy-compression triangle scheme rate.
    #[command(args_override_self = true)]
    Lc(JobArgs),
    /// Classical rate-distortion function of the source.
    #[command(args_override_self = true)]
    Rd(JobArgs),
    /// Transport distance between `px` and `py`.
    #[command(args_override_self = true)]
    Rhobar(JobArgs),
    /// Hamming lower bound.
    #[command(args_override_self = true)]
    Bound(JobArgs),
    /// Identification, scheme and bound curves into `<output>.<label>.<ext>`.
    #[command(args_override_self = true)]
    Sweep(JobArgs),
    /// Monte Carlo of the lossy-compression triangle scheme.
    #[command(args_override_self = true)]
    Simulate(JobArgs),
    /// Built-in consistency checks.
    #[command(args_override_self = true)]
    Selftest(JobArgs),
}

#[derive(Debug, Parser)]
#[command(
    name = "simid",
    version,
    about = "Compression rates for similarity identification"
)]
struct Cli {
    #[command(subcommand)]
    sub: Sub,
}

fn parse_floats(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::usage(format!("--{field}: invalid number '{t}'")))
        })
        .collect()
}

fn parse_pmf(field: &str, s: &str) -> Result<Pmf, CliError> {
    Pmf::new(parse_floats(field, s)?).map_err(|e| CliError::usage(format!("--{field}: {e}")))
}

/// `a,b,c` or `start:stop:count` (inclusive, evenly spaced).
fn parse_grid(field: &str, s: &str) -> Result<Vec<f64>, CliError> {
    let grid = if let [a, b, c] = s.split(':').collect::<Vec<_>>()[..] {
        let a = parse_floats(field, a)?[0];
        let b = parse_floats(field, b)?[0];
        let count: usize = c
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("--{field}: invalid point count '{c}'")))?;
        match count {
            0 => Vec::new(),
            1 => vec![a],
            _ => (0..count)
                .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    } else {
        parse_floats(field, s)?
    };
    if grid.is_empty() {
        return Err(CliError::usage(format!("--{field}: grid is empty")));
    }
    if let Some(i) = grid.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(CliError::usage(format!(
            "--{field}: grid must be strictly increasing ({} then {})",
            grid[i],
            grid[i + 1]
        )));
    }
    Ok(grid)
}

fn parse_distortion(s: &str, size: Option<usize>) -> Result<DistortionMatrix, CliError> {
    let m = if s.trim().eq_ignore_ascii_case("hamming") {
        let size = size.ok_or_else(|| CliError::usage("--distortion hamming needs --px"))?;
        DistortionMatrix::hamming(size)
    } else {
        let rows = s
            .split(';')
            .map(|r| parse_floats("distortion", r))
            .collect::<Result<Vec<_>, _>>()?;
        DistortionMatrix::new(rows)
    };
    m.map_err(|e| CliError::usage(format!("--distortion: {e}")))
}

fn threads_from(flag: Option<usize>) -> Result<usize, CliError> {
    let t = match flag {
        Some(t) => t,
        None => match std::env::var("SIMID_THREADS") {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::usage(format!("SIMID_THREADS: invalid thread count '{v}'"))
            })?,
            Err(_) => 1,
        },
    };
    if t == 0 {
        return Err(CliError::usage("--threads: must be at least 1"));
    }
    Ok(t)
}

fn require<T: Clone>(v: &Option<T>, field: &str, command: Command) -> Result<T, CliError> {
    v.clone()
        .ok_or_else(|| CliError::usage(format!("{} needs --{field}", command.name())))
}

fn validate(command: Command, a: JobArgs) -> Result<JobSpec, CliError> {
    let px = a.px.as_deref().map(|s| parse_pmf("px", s)).transpose()?;
    let py = a.py.as_deref().map(|s| parse_pmf("py", s)).transpose()?;
    let d_grid =
        a.d.as_deref()
            .map(|s| parse_grid("D", s))
            .transpose()?
            .unwrap_or_default();
    let r_grid =
        a.r.as_deref()
            .map(|s| parse_grid("R", s))
            .transpose()?
            .unwrap_or_default();
    check_tolerance(a.tol).map_err(|e| CliError::usage(format!("--tol: {e}")))?;
    let distortion = match command {
        Command::Selftest => None,
        _ => Some(parse_distortion(&a.distortion, px.as_ref().map(Pmf::len))?),
    };
    let cardinality = match (a.u_size, a.strict_cardinality) {
        (Some(_), true) => {
            return Err(CliError::usage(
                "--u-size and --strict-cardinality are exclusive",
            ))
        }
        (Some(0), _) => return Err(CliError::usage("--u-size: must be at least 1")),
        (Some(u), false) => Cardinality::Fixed(u),
        (None, true) => Cardinality::Strict,
        (None, false) => Cardinality::Envelope,
    };
    let coverage = match a.coverage {
        CoverageMode::Full => Coverage::Full,
        CoverageMode::Typical => {
            if !(a.gamma > 0.0 && a.gamma.is_finite()) {
                return Err(CliError::usage(format!(
                    "--gamma: {} must be positive",
                    a.gamma
                )));
            }
            Coverage::Typical { gamma: a.gamma }
        }
    };
    let spec = JobSpec {
        command,
        px,
        py,
        distortion,
        d_grid,
        r_grid,
        tol: a.tol,
        cardinality,
        full_enumeration: a.full_enumeration,
        spot_check: a.spot_check,
        seed: a.seed,
        format: a.format,
        output: a.output,
        threads: threads_from(a.threads)?,
        simulation: SimulationSpec {
            n: a.n,
            trials: a.trials,
            coverage,
            pool: a.pool,
            check: a.check,
        },
    };

    // Per-command requirements.
    let needs_py = !matches!(command, Command::Rd | Command::Selftest);
    let needs_d = !matches!(command, Command::Rhobar | Command::Selftest);
    if command != Command::Selftest {
        let px = require(&spec.px, "px", command)?;
        let rho = spec.distortion.as_ref().expect("parsed above");
        if rho.rows() != px.len() {
            return Err(CliError::usage(format!(
                "--distortion: {} rows but --px has {} letters",
                rho.rows(),
                px.len()
            )));
        }
        if needs_py {
            let py = require(&spec.py, "py", command)?;
            if rho.cols() != py.len() {
                return Err(CliError::usage(format!(
                    "--distortion: {} columns but --py has {} letters",
                    rho.cols(),
                    py.len()
                )));
            }
        }
    }
    if needs_d && spec.d_grid.is_empty() {
        return Err(CliError::usage(format!("{} needs --D", command.name())));
    }
    match command {
        Command::Bound if !spec.distortion.as_ref().is_some_and(|r| r.is_hamming()) => {
            return Err(CliError::usage(
                "--distortion: bound is defined for hamming only",
            ))
        }
        Command::Sweep if spec.output.is_none() => {
            return Err(CliError::usage("sweep needs --output as a file prefix"))
        }
        Command::Simulate => {
            if spec.r_grid.is_empty() {
                return Err(CliError::usage("simulate needs --R (budget rates)"));
            }
            if spec.simulation.n == 0 || spec.simulation.trials == 0 {
                return Err(CliError::usage("--n and --trials must be positive"));
            }
            if spec.simulation.pool == 0 {
                return Err(CliError::usage("--pool must be positive"));
            }
        }
        _ => {}
    }
    Ok(spec)
}

/// Parses argv (including the program name) into a validated job.
///
/// `--help` and `--version` come back as an error with exit code 0 and the
/// text to print on standard output.
pub fn parse_job<I, T>(argv: I) -> Result<JobSpec, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv = config::expand_config(argv.into_iter().map(Into::into).collect())?;
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        CliError {
            code,
            message: e.render().to_string(),
        }
    })?;
    let (command, args) = match cli.sub {
        Sub::Rid(a) => (Command::Rid, a),
        Sub::RidGeneral(a) => (Command::RidGeneral, a),
        Sub::Tc(a) => (Command::Tc, a),
        Sub::Lc(a) => (Command::Lc, a),
        Sub::Rd(a) => (Command::Rd, a),
        Sub::Rhobar(a) => (Command::Rhobar, a),
        Sub::Bound(a) => (Command::Bound, a),
        Sub::Sweep(a) => (Command::Sweep, a),
        Sub::Simulate(a) => (Command::Simulate, a),
        Sub::Selftest(a) => (Command::Selftest, a),
    };
    validate(command, args)
}

/// Output of one job: files to write, and whether every point was
/// infeasible.
struct Emitted {
    files: Vec<(Option<PathBuf>, String)>,
    all_infeasible: bool,
    failed: bool,
}

impl Emitted {
    fn single(spec: &JobSpec, text: String) -> Self {
        Self {
            files: vec![(spec.output.clone(), text)],
            all_infeasible: false,
            failed: false,
        }
    }
}

fn all_infeasible(curve: &RateCurve) -> bool {
    curve.points().iter().all(|p| p.rate.is_none())
}

fn curve_options(spec: &JobSpec, force_general: bool) -> CurveOptions {
    CurveOptions {
        strict_cardinality: spec.cardinality == Cardinality::Strict,
        full_enumeration: spec.full_enumeration,
        spot_check: spec.spot_check,
        force_general,
        fixed_u_size: match spec.cardinality {
            Cardinality::Fixed(u) => Some(u),
            _ => None,
        },
    }
}

fn render_curve(spec: &JobSpec, curve: &RateCurve, channels: &[Option<crate::Channel>]) -> String {
    match spec.format {
        Format::Csv => curve_csv(curve),
        Format::Json => curve_json(curve, Some(channels)),
    }
}

fn with_suffix(prefix: &Path, label: &str, format: Format) -> PathBuf {
    let ext = match format {
        Format::Csv => "csv",
        Format::Json => "json",
    };
    let mut s = prefix.as_os_str().to_owned();
    s.push(format!(".{label}.{ext}"));
    PathBuf::from(s)
}

fn execute(spec: &JobSpec, diag: &mut Vec<u8>) -> Result<Emitted, CliError> {
    let lib = CliError::from_lib;
    let px = || spec.px.clone().expect("validated");
    let py = || spec.py.clone().expect("validated");
    let rho = || spec.distortion.clone().expect("validated");
    match spec.command {
        Command::Rid | Command::RidGeneral => {
            let force = spec.command == Command::RidGeneral;
            let c = r_id_curve_with(
                &px(),
                &py(),
                &rho(),
                &spec.d_grid,
                spec.tol,
                curve_options(spec, force),
            )
            .map_err(lib)?;
            if let Some(s) = &c.spot_check {
                let _ = writeln!(diag, "spot check at |U| = |X| + 1:");
                let _ = diag.write_all(curve_csv(s).as_bytes());
            }
            let mut e = Emitted::single(spec, render_curve(spec, &c.curve, &c.channels));
            e.all_infeasible = all_infeasible(&c.curve);
            Ok(e)
        }
        Command::Tc | Command::Lc | Command::Rd => {
            let c = match spec.command {
                Command::Tc => tc_curve(&px(), &py(), &rho(), &spec.d_grid, spec.tol),
                Command::Lc => lc_curve(&px(), &py(), &rho(), &spec.d_grid, spec.tol),
                _ => rd_curve(&px(), &rho(), &spec.d_grid, spec.tol),
            }
            .map_err(lib)?;
            let mut e = Emitted::single(spec, render_curve(spec, &c.curve, &c.channels));
            e.all_infeasible = all_infeasible(&c.curve);
            Ok(e)
        }
        Command::Bound => {
            let c = bound_curve(&px(), &py(), &spec.d_grid).map_err(lib)?;
            let none = vec![None; c.len()];
            Ok(Emitted::single(spec, render_curve(spec, &c, &none)))
        }
        Command::Rhobar => {
            let (v, coupling) = rho_bar(&px(), &py(), &rho()).map_err(lib)?;
            let text = match spec.format {
                Format::Csv => format!("rho_bar\n{}\n", format_sig(v)),
                Format::Json => {
                    let rows: Vec<Vec<f64>> = (0..coupling.rows())
                        .map(|x| (0..coupling.cols()).map(|y| coupling.get(x, y)).collect())
                        .collect();
                    let mut s = serde_json::to_string_pretty(&serde_json::json!({
                        "rho_bar": v,
                        "coupling": rows,
                    }))
                    .expect("value serializes");
                    s.push('\n');
                    s
                }
            };
            Ok(Emitted::single(spec, text))
        }
        Command::Sweep => sweep(spec),
        Command::Simulate => simulate(spec, diag),
        Command::Selftest => Ok(selftest(spec)),
    }
}

fn sweep(spec: &JobSpec) -> Result<Emitted, CliError> {
    let lib = CliError::from_lib;
    let (px, py) = (
        spec.px.as_ref().expect("validated"),
        spec.py.as_ref().expect("validated"),
    );
    let rho = spec.distortion.as_ref().expect("validated");
    let prefix = spec.output.as_deref().expect("validated");
    let rid = r_id_curve_with(
        px,
        py,
        rho,
        &spec.d_grid,
        spec.tol,
        curve_options(spec, false),
    )
    .map_err(lib)?;
    let tc = tc_curve(px, py, rho, &spec.d_grid, spec.tol).map_err(lib)?;
    let lc = lc_curve(px, py, rho, &spec.d_grid, spec.tol).map_err(lib)?;
    let infeasible = [&rid.curve, &tc.curve, &lc.curve]
        .into_iter()
        .all(all_infeasible);
    let mut files = vec![
        (
            Some(with_suffix(prefix, "rid", spec.format)),
            render_curve(spec, &rid.curve, &rid.channels),
        ),
        (
            Some(with_suffix(prefix, "tc", spec.format)),
            render_curve(spec, &tc.curve, &tc.channels),
        ),
        (
            Some(with_suffix(prefix, "lc", spec.format)),
            render_curve(spec, &lc.curve, &lc.channels),
        ),
    ];
    if rho.is_hamming() {
        let b = bound_curve(px, py, &spec.d_grid).map_err(lib)?;
        let none = vec![None; b.len()];
        files.push((
            Some(with_suffix(prefix, "bound", spec.format)),
            render_curve(spec, &b, &none),
        ));
    }
    Ok(Emitted {
        files,
        all_infeasible: infeasible,
        failed: false,
    })
}

fn simulate(spec: &JobSpec, diag: &mut Vec<u8>) -> Result<Emitted, CliError> {
    let lib = CliError::from_lib;
    let (px, py) = (
        spec.px.as_ref().expect("validated"),
        spec.py.as_ref().expect("validated"),
    );
    let rho = spec.distortion.as_ref().expect("validated");
    let sim = &spec.simulation;
    let opts = CodebookOptions {
        coverage: sim.coverage,
        tau: None,
        pool_limit: sim.pool,
        seed: spec.seed,
    };
    let mut codebooks = Vec::with_capacity(spec.r_grid.len());
    for &r in &spec.r_grid {
        let target = distortion_rate(px, &rho.transpose(), r, spec.tol).map_err(lib)?;
        let cb =
            build_codebook(sim.n, px, &target.achieving_channel, r, rho, &opts).map_err(lib)?;
        let _ = writeln!(
            diag,
            "R_budget {}: {} codewords, rate {}, covering distortion {}",
            format_sig(r),
            cb.len(),
            format_sig(cb.rate()),
            format_sig(cb.covering_radius_report().max_distortion)
        );
        codebooks.push((r, cb));
    }
    let mut rows = Vec::new();
    for (r, cb) in &codebooks {
        for &d in &spec.d_grid {
            let result =
                estimate_maybe_probability(cb, px, py, d, sim.trials, spec.seed).map_err(lib)?;
            let admissibility = if sim.check {
                Some(exhaustive_admissibility_check(cb, d, spec.seed).map_err(lib)?)
            } else {
                None
            };
            rows.push(SimulationRow {
                budget_rate: *r,
                codebook: cb,
                result,
                admissibility,
            });
        }
    }
    let failed = rows.iter().any(|r| {
        r.result.false_negative_count > 0 || r.admissibility.as_ref().is_some_and(|a| !a.passed())
    });
    if failed {
        let _ = writeln!(
            diag,
            "admissibility violated: a similar pair was answered no"
        );
    }
    let text = match spec.format {
        Format::Csv => simulation_csv(&rows),
        Format::Json => simulation_json(&rows),
    };
    let mut e = Emitted::single(spec, text);
    e.failed = failed;
    Ok(e)
}

/// Pattern counts for `|X| = |U| = 2..=5`.
const PATTERN_COUNTS: [(usize, u128); 4] = [(2, 1), (3, 20), (4, 1001), (5, 142_506)];

fn selftest(spec: &JobSpec) -> Emitted {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut record = |name: String, pass: bool, detail: String| {
        ok &= pass;
        lines.push(format!(
            "{} {name}: {detail}",
            if pass { "PASS" } else { "FAIL" }
        ));
    };
    for (x, expected) in PATTERN_COUNTS {
        let count = sign_pattern_count(x, x);
        record(
            format!("pattern count |X|=|U|={x}"),
            count == expected,
            format!("{count} (expected {expected})"),
        );
        if x <= 4 {
            let listed = enumerate_sign_patterns(x, x)
                .map(|it| it.count() as u128)
                .unwrap_or(0);
            record(
                format!("pattern enumeration |X|=|U|={x}"),
                listed == expected,
                format!("{listed} listed"),
            );
        }
    }

    let half = Pmf::uniform(2).expect("valid pmf");
    let b = bound_curve(&half, &half, &[0.25]).map(|c| c.points()[0].rate.unwrap_or(f64::NAN));
    let expected = 0.180_336_880_111_120_4;
    record(
        "hamming bound at D=0.25".into(),
        b.as_ref().is_ok_and(|v| (v - expected).abs() < 1e-9),
        format!(
            "{} (expected {})",
            b.map_or_else(|e| e.to_string(), format_sig),
            format_sig(expected)
        ),
    );

    let h2 = DistortionMatrix::hamming(2).expect("valid matrix");
    for (p, d) in [(0.5, 0.1), (0.5, 0.2), (0.3, 0.3)] {
        let px = Pmf::bernoulli(p).expect("valid pmf");
        let got = r_id_curve_with(&px, &half, &h2, &[d], 1e-5, CurveOptions::default())
            .map(|c| c.curve.points()[0].rate.unwrap_or(f64::INFINITY));
        let want = closed_form_binary_symmetric(p, d);
        let (pass, detail) = match (got, want) {
            (Ok(g), Ok(w)) => (
                (g - w).abs() <= 2e-5,
                format!("{} vs closed form {}", format_sig(g), format_sig(w)),
            ),
            (g, w) => (false, format!("{g:?} / {w:?}")),
        };
        record(format!("binary rid p={p} D={d}"), pass, detail);
    }

    let px = Pmf::new(vec![0.8, 0.1, 0.1]).expect("valid pmf");
    let h3 = DistortionMatrix::hamming(3).expect("valid matrix");
    let opts = CurveOptions {
        force_general: true,
        ..CurveOptions::default()
    };
    let fast = r_id_curve_with(&px, &px, &h3, &[0.1], 1e-5, CurveOptions::default());
    let general = r_id_curve_with(&px, &px, &h3, &[0.1], 1e-5, opts);
    let full =
        crate::rates::r_id_general_with(&px, &px, &h3, 0.1, 3, 1e-5, Assignments::FullEnumeration);
    let (pass, detail) = match (fast, general, full) {
        (Ok(a), Ok(b), Ok(c)) => {
            let (a, b) = (a.curve.points()[0].rate, b.curve.points()[0].rate);
            let pass = matches!((a, b, c.rate), (Some(a), Some(b), Some(c)) if (a - b).abs() <= 2e-5 && (b - c).abs() <= 2e-5);
            (pass, format!("{a:?} / {b:?} / {:?}", c.rate))
        }
        (a, b, c) => (
            false,
            format!("{:?} / {:?} / {:?}", a.err(), b.err(), c.err()),
        ),
    };
    record(
        "ternary hamming vs dual-vertex vs full enumeration".into(),
        pass,
        detail,
    );

    let mut text = lines.join("\n");
    text.push('\n');
    let mut e = Emitted::single(spec, text);
    e.failed = !ok;
    e
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError {
        code: EXIT_FAILURE,
        message: format!("cannot write {}: {e}", path.display()),
    })
}

/// Runs a job, writing data to `out` (or the output path) and diagnostics to
/// `diag`. Returns the process exit code.
pub fn run_job_with(spec: &JobSpec, out: &mut dyn Write, diag: &mut dyn Write) -> i32 {
    let pool = match rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
    {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(diag, "error: cannot start {} threads: {e}", spec.threads);
            return EXIT_FAILURE;
        }
    };
    let mut notes = Vec::new();
    let result = pool.install(|| execute(spec, &mut notes));
    let _ = diag.write_all(&notes);
    let emitted = match result {
        Ok(e) => e,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            return e.code;
        }
    };
    for (path, text) in &emitted.files {
        let written = match path {
            Some(p) => write_file(p, text).map(|_| {
                let _ = writeln!(diag, "wrote {}", p.display());
            }),
            None => out.write_all(text.as_bytes()).map_err(|e| CliError {
                code: EXIT_FAILURE,
                message: format!("cannot write output: {e}"),
            }),
        };
        if let Err(e) = written {
            let _ = writeln!(diag, "error: {e}");
            return e.code;
        }
    }
    if emitted.failed {
        EXIT_FAILURE
    } else if emitted.all_infeasible {
        let _ = writeln!(diag, "every grid point is infeasible");
        EXIT_INFEASIBLE
    } else {
        EXIT_OK
    }
}

pub fn run_job(spec: &JobSpec) -> i32 {
    run_job_with(
        spec,
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    )
}

/// Entry point of the binary: parse, run, and map everything to an exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    match parse_job(argv) {
        Ok(spec) => run_job(&spec),
        Err(e) if e.code == EXIT_OK => {
            print!("{}", e.message);
            EXIT_OK
        }
        Err(e) => {
            eprint!("{}", e.message);
            if !e.message.ends_with('\n') {
                eprintln!();
            }
            e.code
        }
    }
}
