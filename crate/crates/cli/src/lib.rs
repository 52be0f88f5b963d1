//! Command-line front end: operators, Nevanlinna tables, checks and the
//! series solver. [`run`] is the whole program minus process exit.

mod args;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use clap::Parser;
use hahn_core::heq::default_residual_points;
use hahn_core::parse::parse_expr_with_tol;
use hahn_core::verify::{
    check_defect_sum, check_fermat, check_lodl, check_smt, classify_picard, compare_sharing,
};
use hahn_core::{
    format_expr, hahn_expand, hahn_iter, heq_residual, heq_solve, parse_complex, parse_target,
    Candidate, CheckReport, Complex64, Error, Grid, HahnParams, NevOptions, NevTable, PowerSeries,
    RatFun, Target, Value,
};
use serde::Serialize;

pub use args::{Check, Cli, Command, Common, Format};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

/// Failure of a run, with the exit code it maps to.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Numeric(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numeric(_) => EXIT_NUMERIC,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => f.write_str(m),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        if e.is_numeric_failure() {
            CliError::Numeric(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

type CliResult<T> = Result<T, CliError>;

fn parse_err(what: &str, text: &str, e: impl fmt::Display) -> CliError {
    CliError::Config(format!("cannot parse {what} '{text}': {e}"))
}

/// Every setting a run used, echoed into JSON output.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub q: Complex64,
    pub c: Complex64,
    pub r_min: f64,
    pub r_max: f64,
    pub grid_points: usize,
    pub theta_samples: usize,
    pub cluster_tol: f64,
    pub quad_tol: f64,
    pub slack_fraction: f64,
    pub format: Format,
    pub output: Option<String>,
    pub precision: usize,
    /// Subcommand arguments as given.
    pub inputs: BTreeMap<String, String>,
}

impl RunConfig {
    fn new(command: &str, common: &Common, default_format: Format) -> CliResult<Self> {
        let q = parse_complex(&common.q).map_err(|e| parse_err("q", &common.q, e))?;
        let c = parse_complex(&common.c).map_err(|e| parse_err("c", &common.c, e))?;
        if !(common.rmin > 0.0 && common.rmin < common.rmax && common.rmax.is_finite()) {
            return Err(CliError::Config(format!(
                "need 0 < rmin < rmax, got {} and {}",
                common.rmin, common.rmax
            )));
        }
        if common.grid < 2 {
            return Err(CliError::Config("grid needs at least 2 points".into()));
        }
        if !(common.cluster_tol > 0.0 && common.cluster_tol < 1.0) {
            return Err(CliError::Config("cluster-tol must lie in (0, 1)".into()));
        }
        Ok(Self {
            command: command.to_string(),
            q,
            c,
            r_min: common.rmin,
            r_max: common.rmax,
            grid_points: common.grid,
            theta_samples: common.theta,
            cluster_tol: common.cluster_tol,
            quad_tol: common.quad_tol,
            slack_fraction: common.slack_fraction,
            format: common.format.unwrap_or(default_format),
            output: common.output.clone(),
            precision: common.precision,
            inputs: BTreeMap::new(),
        })
    }

    fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    fn params(&self) -> CliResult<HahnParams> {
        Ok(HahnParams::new(self.q, self.c)?)
    }

    fn grid(&self) -> CliResult<Grid> {
        Ok(Grid::geometric(self.r_min, self.r_max, self.grid_points)?)
    }

    fn options(&self) -> NevOptions {
        NevOptions {
            theta_panels: self.theta_samples,
            quad_tol: self.quad_tol,
            slack_fraction: self.slack_fraction,
            ..NevOptions::default()
        }
    }

    fn function(&self, text: &str) -> CliResult<RatFun> {
        parse_expr_with_tol(text, self.cluster_tol).map_err(|e| parse_err("function", text, e))
    }
}

fn parse_targets(list: &str) -> CliResult<Vec<Target>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_target(s).map_err(|e| parse_err("target", s, e)))
        .collect()
}

fn parse_complex_list(list: &str, what: &str) -> CliResult<Vec<Complex64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_complex(s).map_err(|e| parse_err(what, s, e)))
        .collect()
}

/// What a command produced: bytes to write and the exit code.
struct Outcome {
    body: String,
    code: i32,
}

fn json<T: Serialize>(v: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(v)
        .map_err(|e| CliError::Config(format!("serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    config: &'a RunConfig,
    #[serde(flatten)]
    body: T,
}

fn cmd_diff(function: &str, k: usize, expand: bool, common: &Common) -> CliResult<(RunConfig, Outcome)> {
    let cfg = RunConfig::new("diff", common, Format::Csv)?
        .input("fn", function)
        .input("k", k)
        .input("expand", expand);
    let p = cfg.params()?;
    let g = cfg.function(function)?;
    let d = if expand { hahn_expand(&g, k, &p)? } else { hahn_iter(&g, k, &p)? };
    let text = format_expr(&d, cfg.precision);
    let body = match cfg.format {
        Format::Csv => format!("{text}\n"),
        Format::Json => {
            #[derive(Serialize)]
            struct Out {
                result: String,
            }
            json(&Envelope { config: &cfg, body: Out { result: text } })?
        }
    };
    Ok((cfg, Outcome { body, code: EXIT_OK }))
}

/// Column header of the table CSV.
pub fn table_header(targets: &[Target]) -> Vec<String> {
    let mut h: Vec<String> = ["r", "m", "N", "T"].iter().map(|s| s.to_string()).collect();
    for t in targets {
        h.push(format!("N:{t}"));
        h.push(format!("Nhat:{t}"));
    }
    h.push("Nqc".into());
    h.push("slack".into());
    h
}

fn table_csv(table: &NevTable) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Config(format!("csv output failed: {e}"));
    w.write_record(table_header(&table.targets)).map_err(io)?;
    for row in &table.rows {
        let mut rec = vec![row.r.to_string(), row.m.to_string(), row.n.to_string(), row.t.to_string()];
        for c in &row.targets {
            rec.push(c.n.to_string());
            rec.push(c.n_hat.to_string());
        }
        rec.push(row.n_qc.to_string());
        rec.push(row.slack.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))
}

fn cmd_table(function: &str, targets: &str, common: &Common) -> CliResult<(RunConfig, Outcome)> {
    let cfg = RunConfig::new("table", common, Format::Csv)?
        .input("fn", function)
        .input("targets", targets);
    let p = cfg.params()?;
    let g = cfg.function(function)?;
    let targets = parse_targets(targets)?;
    let table = NevTable::build(&g, &targets, &p, &cfg.grid()?, &cfg.options())?;
    let body = match cfg.format {
        Format::Csv => table_csv(&table)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                table: &'a NevTable,
            }
            json(&Envelope { config: &cfg, body: Out { table: &table } })?
        }
    };
    Ok((cfg, Outcome { body, code: EXIT_OK }))
}

fn report_outcome(cfg: &RunConfig, report: &CheckReport) -> CliResult<Outcome> {
    #[derive(Serialize)]
    struct Out<'a> {
        report: &'a CheckReport,
    }
    let body = json(&Envelope { config: cfg, body: Out { report } })?;
    let code = if report.verdict.passed() { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Outcome { body, code })
}

fn cmd_verify(check: &Check) -> CliResult<(RunConfig, Outcome)> {
    let (cfg, report) = match check {
        Check::Smt { function, targets, assert_from, common } => {
            let mut cfg = RunConfig::new("verify smt", common, Format::Json)?
                .input("fn", function)
                .input("targets", targets);
            if let Some(r) = assert_from {
                cfg = cfg.input("assert_from", r);
            }
            let g = cfg.function(function)?;
            let report = check_smt(
                &g,
                &parse_targets(targets)?,
                &cfg.params()?,
                &cfg.grid()?,
                &cfg.options(),
                *assert_from,
            )?;
            (cfg, report)
        }
        Check::Lodl { function, k, common } => {
            let cfg = RunConfig::new("verify lodl", common, Format::Json)?
                .input("fn", function)
                .input("k", k);
            let g = cfg.function(function)?;
            let report = check_lodl(&g, &cfg.params()?, *k, &cfg.grid()?, &cfg.options())?;
            (cfg, report)
        }
        Check::Defects { function, targets, common } => {
            let cfg = RunConfig::new("verify defects", common, Format::Json)?
                .input("fn", function)
                .input("targets", targets);
            let g = cfg.function(function)?;
            let report = check_defect_sum(
                &g,
                &parse_targets(targets)?,
                &cfg.params()?,
                &cfg.grid()?,
                &cfg.options(),
            )?;
            (cfg, report)
        }
        Check::Picard { function, target, common } => {
            let cfg = RunConfig::new("verify picard", common, Format::Json)?
                .input("fn", function)
                .input("target", target);
            let g = cfg.function(function)?;
            let a = parse_target(target).map_err(|e| parse_err("target", target, e))?;
            let report = classify_picard(&g, a, &cfg.params()?, &cfg.grid()?, &cfg.options())?;
            (cfg, report)
        }
        Check::Share { function, other, targets, bound, common } => {
            let cfg = RunConfig::new("verify share", common, Format::Json)?
                .input("fn", function)
                .input("other", other)
                .input("targets", targets)
                .input("bound", bound);
            let g = cfg.function(function)?;
            let h = cfg.function(other)?;
            let report = compare_sharing(
                &g,
                &h,
                &parse_targets(targets)?,
                &cfg.params()?,
                &cfg.grid()?,
                &cfg.options(),
                *bound,
            )?;
            (cfg, report)
        }
        Check::Fermat { function, common } => {
            let cfg = RunConfig::new("verify fermat", common, Format::Json)?.input("fn", function);
            let g = cfg.function(function)?;
            let report = check_fermat(&g, &cfg.params()?)?;
            (cfg, report)
        }
    };
    let out = report_outcome(&cfg, &report)?;
    Ok((cfg, out))
}

#[derive(Serialize)]
struct ResidualRow {
    z: Complex64,
    w_abs: f64,
    residual: Option<Complex64>,
    residual_abs: Option<f64>,
}

fn cmd_solve_heq(
    coeffs: &str,
    init: &str,
    order: usize,
    points: Option<&str>,
    common: &Common,
) -> CliResult<(RunConfig, Outcome)> {
    let mut cfg = RunConfig::new("solve-heq", common, Format::Json)?
        .input("coeffs", coeffs)
        .input("init", init)
        .input("order", order);
    if let Some(pts) = points {
        cfg = cfg.input("points", pts);
    }
    let p = cfg.params()?;
    let a: Vec<PowerSeries> = coeffs
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let g = cfg.function(s)?;
            Ok(PowerSeries::from_ratfun(&g, p.z0(), order)?)
        })
        .collect::<CliResult<_>>()?;
    let init = parse_complex_list(init, "initial coefficient")?;
    let g = heq_solve(&a, &init, order, &p)?;
    let pts = match points {
        Some(list) => parse_complex_list(list, "point")?,
        None => default_residual_points(&g, &p),
    };
    let residuals = heq_residual(&a, Candidate::Series(&g), &pts, &p)?;
    let rows: Vec<ResidualRow> = pts
        .iter()
        .zip(&residuals)
        .map(|(&z, v)| {
            let residual = match v {
                Value::Finite(v) => Some(*v),
                Value::Pole => None,
            };
            ResidualRow {
                z,
                w_abs: (z - p.z0()).norm(),
                residual,
                residual_abs: residual.map(|v| v.norm()),
            }
        })
        .collect();
    let ratios = g.coefficient_ratios();
    let body = match cfg.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Out<'a> {
                z0: Complex64,
                trunc: usize,
                coefficients: &'a [Complex64],
                coefficient_ratios: Vec<(usize, f64)>,
                empirical_radius: Option<f64>,
                residuals: Vec<ResidualRow>,
            }
            json(&Envelope {
                config: &cfg,
                body: Out {
                    z0: p.z0(),
                    trunc: g.trunc(),
                    coefficients: g.coeffs(),
                    coefficient_ratios: ratios,
                    empirical_radius: g.empirical_radius(),
                    residuals: rows,
                },
            })?
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| CliError::Config(format!("csv output failed: {e}"));
            w.write_record(["n", "re", "im"]).map_err(io)?;
            for (n, a) in g.coeffs().iter().enumerate() {
                w.write_record([n.to_string(), a.re.to_string(), a.im.to_string()])
                    .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Config(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| CliError::Config(e.to_string()))?
        }
    };
    Ok((cfg, Outcome { body, code: EXIT_OK }))
}

fn dispatch(cli: &Cli) -> CliResult<(RunConfig, Outcome)> {
    match &cli.command {
        Command::Diff { function, k, expand, common } => cmd_diff(function, *k, *expand, common),
        Command::Table { function, targets, common } => cmd_table(function, targets, common),
        Command::Verify { check } => cmd_verify(check),
        Command::SolveHeq { coeffs, init, order, points, common } => {
            cmd_solve_heq(coeffs, init, *order, points.as_deref(), common)
        }
    }
}

/// Runs the program on `argv` (including the program name) and returns the
/// exit code. Results go to `--output` when given, otherwise to `out`;
/// diagnostics go to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = dispatch(&cli).and_then(|(cfg, outcome)| {
        match &cfg.output {
            Some(path) => std::fs::write(path, outcome.body.as_bytes())?,
            None => out.write_all(outcome.body.as_bytes())?,
        }
        Ok(outcome.code)
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
