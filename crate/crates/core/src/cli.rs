//! Command-line front end.
//!
//! Every command produces a JSON document with the fields `command`, `inputs`,
//! `results`, `checks` and `version`; `staircase` and `table2` can also be
//! rendered as CSV. Numbers are rounded to 10 significant digits so output is
//! byte-stable across runs.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::error::{invalid, Error, Result};
use crate::layered_scheme::{
    check_feasibility, geometric_schedule, lemma2_inequality, optimize_upper_bound, staircase_fidelity, theorem2_constant,
    total_energy, GeometricParams, UpperSearchConfig,
};
use crate::lower_bounds::{optimize_levels, optimize_two_level, theorem1_series, TWO_LEVEL_START};
use crate::mmse_validation::{identities_suite, mmse_suite, rates_suite, Check};
use crate::numerics::AscentConfig;
use crate::profiles::{BoundReport, SquareLawProfile};

/// Where the upper bound is evaluated when no search is requested.
pub const DEFAULT_UPPER_POINT: (f64, f64) = (0.00137, 0.999);
/// Default staircase ladder `(c, d, K)`.
pub const DEFAULT_STAIRCASE: (f64, f64, usize) = (1.0, 0.5, 3);
pub const TABLE_ALPHAS: [f64; 5] = [1.0, 10.0, 100.0, 1000.0, 10000.0];
pub const IDENTITY_INSTANCES: usize = 1000;
pub const RATE_INSTANCES: usize = 100;
/// `d` values swept by `lemma2` unless `--d` is given.
pub const LEMMA2_DS: [f64; 14] = [0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999, 0.9999];
pub const LEMMA2_MAX_K: usize = 10_000;

/// Slack below which the staircase counts as dominating the profile.
pub const SLACK_FLOOR: f64 = -1e-12;
/// Largest slack allowed at the left limit of a jump point.
pub const JUMP_SLACK: f64 = 1e-9;
pub const LOWER_TARGET: f64 = 0.9050;
pub const UPPER_TARGET: f64 = 2.3210;

/// Four-decimal constants the comparison table is built from, each checked
/// against its computed counterpart before use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableConstants {
    pub prior_lower: f64,
    pub our_lower: f64,
    pub prior_upper: f64,
    pub our_upper: f64,
}

pub const TABLE_CONSTANTS: TableConstants =
    TableConstants { prior_lower: 0.4507, our_lower: 0.9057, prior_upper: 3.1846, our_upper: 2.3203 };

/// Allowed gap between each table constant and its computed value.
pub const TABLE_CONSTANT_TOL: TableConstants =
    TableConstants { prior_lower: 5e-4, our_lower: 5e-4, prior_upper: 5e-4, our_upper: 1e-2 };

#[derive(Debug, Parser)]
#[command(name = "energy-bounds", version, allow_negative_numbers = true)]
#[command(about = "Minimum-energy bounds for square-law distortion-noise profiles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Prior and new lower and upper bounds side by side.
    Bounds,
    /// The multi-level lower bound (`--K` levels).
    Lower,
    /// The geometric-ladder upper bound at `(--c, --d)`, or searched with `--optimize`.
    Upper,
    /// Profile versus scheme fidelity along a finite geometric ladder.
    Staircase,
    /// The five-column comparison table.
    Table2,
    /// Run one of the validation suites.
    Validate {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// The per-layer feasibility inequality of the geometric ladder.
    Lemma2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Identities,
    Mmse,
    Rates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    #[arg(long, global = true, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Ladder depth for `staircase`, largest k for `lemma2`.
    #[arg(long, global = true)]
    pub layers: Option<usize>,
    #[arg(long, global = true)]
    pub qmax: Option<f64>,
    #[arg(long, global = true)]
    pub step: Option<f64>,
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Relative tolerance for series truncation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Search over `(c, d)` instead of evaluating a single point.
    #[arg(long, global = true)]
    pub optimize: bool,
    /// Number of levels in the lower bound.
    #[arg(long = "K", global = true)]
    pub levels: Option<usize>,
}

/// Everything a command produced, before rendering.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub command: &'static str,
    pub inputs: Value,
    pub results: Value,
    pub checks: Vec<Check>,
    /// CSV rendering, for commands that have one.
    pub csv: Option<String>,
    pub converged: bool,
}

impl Outcome {
    fn new(command: &'static str, inputs: Value, results: Value, checks: Vec<Check>) -> Self {
        Self { command, inputs, results, checks, csv: None, converged: true }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// 0 success, 1 failed check, 3 non-convergence.
    pub fn exit_code(&self) -> i32 {
        if !self.passed() {
            1
        } else if !self.converged {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> Value {
        let doc = json!({
            "command": self.command,
            "inputs": self.inputs,
            "results": self.results,
            "checks": self.checks,
            "version": env!("CARGO_PKG_VERSION"),
        });
        round_value(doc)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Json => {
                let mut text = serde_json::to_string_pretty(&self.to_json()).expect("JSON values always serialize");
                text.push('\n');
                Ok(text)
            }
            Format::Csv => self
                .csv
                .clone()
                .ok_or_else(|| invalid(format!("`{}` has no CSV form; use --format json", self.command))),
        }
    }
}

/// Rounds to 10 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.9e}").parse().expect("formatted float parses")
}

fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => json!(round_sig(n.as_f64().expect("f64 number"))),
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(map) => Value::Object(map.into_iter().map(|(k, v)| (k, round_value(v))).collect()),
        other => other,
    }
}

fn csv_number(x: f64) -> String {
    format!("{}", round_sig(x))
}

/// Exit status for an error: 2 for bad input, 3 for numerical failure, 1 otherwise.
pub fn error_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Infeasible(_) | Error::OutOfLadder { .. } => 2,
        Error::NonConvergence(_) | Error::NonFinite(_) => 3,
        Error::NotPositiveDefinite(_) | Error::Inconsistent(_) => 1,
    }
}

fn params_map(report: &BoundReport) -> Value {
    Value::Object(report.params.iter().map(|(k, v)| (k.clone(), json!(v))).collect::<Map<_, _>>())
}

fn report_json(report: &BoundReport) -> Value {
    json!({
        "value": report.value,
        "constant": report.normalized_constant,
        "params": params_map(report),
        "iterations": report.iterations,
        "converged": report.converged,
    })
}

fn bound_json(constant: f64, scale: f64) -> Value {
    json!({ "constant": constant, "value": constant * scale })
}

fn ascent_config() -> AscentConfig {
    AscentConfig::default()
}

/// Runs the parsed command. Progress messages go to `progress`.
pub fn run(cli: &Cli, mut progress: impl FnMut(&str)) -> Result<Outcome> {
    let o = &cli.opts;
    if !(o.tol > 0.0 && o.tol < 1.0) {
        return Err(invalid(format!("--tol must lie in (0, 1), got {}", o.tol)));
    }
    match cli.command {
        Command::Bounds => cmd_bounds(o, &mut progress),
        Command::Lower => cmd_lower(o),
        Command::Upper => cmd_upper(o, &mut progress),
        Command::Staircase => cmd_staircase(o),
        Command::Table2 => cmd_table2(o),
        Command::Validate { suite } => cmd_validate(o, suite),
        Command::Lemma2 => cmd_lemma2(o),
    }
}

struct UpperResult {
    constant: f64,
    results: Value,
    converged: bool,
}

fn upper_bound(o: &Options, progress: &mut dyn FnMut(&str)) -> Result<UpperResult> {
    if o.optimize {
        let report = optimize_upper_bound(o.alpha, &UpperSearchConfig::default(), |m| progress(m))?;
        let mut results = report_json(&report);
        results["method"] = json!("search");
        return Ok(UpperResult { constant: report.normalized_constant, converged: report.converged, results });
    }
    let (c, d) = (o.c.unwrap_or(DEFAULT_UPPER_POINT.0), o.d.unwrap_or(DEFAULT_UPPER_POINT.1));
    let params = GeometricParams::new(o.alpha, c, d, 1)?;
    let e = total_energy(&params, o.tol)?;
    let constant = e.e_total / o.alpha.sqrt();
    let results = json!({
        "value": e.e_total,
        "constant": constant,
        "params": { "c": c, "d": d },
        "e_unc": e.e_unc,
        "e_dig": e.e_dig,
        "unc_terms": e.unc_terms,
        "dig_terms": e.dig_terms,
        "tail_bound": e.tail_bound,
        "method": "evaluation",
    });
    Ok(UpperResult { constant, results, converged: true })
}

fn cmd_bounds(o: &Options, progress: &mut dyn FnMut(&str)) -> Result<Outcome> {
    let profile = SquareLawProfile::new(o.alpha)?;
    let scale = profile.scale();
    let prior_lower = theorem1_series(o.tol)?;
    let prior_upper = theorem2_constant()?;
    let lower = optimize_two_level(&profile, TWO_LEVEL_START, &ascent_config())?;
    let upper = upper_bound(o, progress)?;

    let mut our_lower = report_json(&lower);
    our_lower["constant"] = json!(lower.normalized_constant);
    let results = json!({
        "prior_lower": bound_json(prior_lower.value, scale),
        "prior_lower_terms": prior_lower.terms_used,
        "our_lower": our_lower,
        "prior_upper": bound_json(prior_upper, scale),
        "our_upper": upper.results,
        "lower_improvement": bound_json(lower.normalized_constant - prior_lower.value, scale),
        "upper_improvement": bound_json(prior_upper - upper.constant, scale),
    });
    let checks = vec![
        Check::new("our_lower_at_least_target", lower.normalized_constant, LOWER_TARGET, (LOWER_TARGET - lower.normalized_constant).max(0.0), 0.0),
        Check::new("our_upper_at_most_target", upper.constant, UPPER_TARGET, (upper.constant - UPPER_TARGET).max(0.0), 0.0),
        Check::new("lower_improves", lower.normalized_constant, prior_lower.value, (prior_lower.value - lower.normalized_constant).max(0.0), 0.0),
        Check::new("upper_improves", upper.constant, prior_upper, (upper.constant - prior_upper).max(0.0), 0.0),
    ];
    let inputs = json!({ "alpha": o.alpha, "tol": o.tol, "optimize": o.optimize, "c": o.c, "d": o.d });
    let mut out = Outcome::new("bounds", inputs, results, checks);
    out.converged = lower.converged && upper.converged;
    Ok(out)
}

fn cmd_lower(o: &Options) -> Result<Outcome> {
    let profile = SquareLawProfile::new(o.alpha)?;
    let levels = o.levels.unwrap_or(2);
    let report = optimize_levels(&profile, levels, &ascent_config())?;
    let mut results = report_json(&report);
    results["levels"] = json!(levels);
    let inputs = json!({ "alpha": o.alpha, "K": levels, "start": [TWO_LEVEL_START.0, TWO_LEVEL_START.1, TWO_LEVEL_START.2] });
    let mut out = Outcome::new("lower", inputs, results, Vec::new());
    out.converged = report.converged;
    Ok(out)
}

fn cmd_upper(o: &Options, progress: &mut dyn FnMut(&str)) -> Result<Outcome> {
    SquareLawProfile::new(o.alpha)?;
    let upper = upper_bound(o, progress)?;
    let mut checks = Vec::new();
    if o.optimize {
        checks.push(Check::new("constant_at_most_target", upper.constant, UPPER_TARGET, (upper.constant - UPPER_TARGET).max(0.0), 0.0));
    } else {
        let tail = upper.results["tail_bound"].as_f64().unwrap_or(f64::INFINITY);
        let value = upper.results["value"].as_f64().unwrap_or(f64::NAN);
        checks.push(Check::new("truncation_within_tol", tail / value, 0.0, tail / value, o.tol));
    }
    let inputs = json!({ "alpha": o.alpha, "tol": o.tol, "optimize": o.optimize, "c": o.c, "d": o.d });
    let mut out = Outcome::new("upper", inputs, upper.results, checks);
    out.converged = upper.converged;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StaircaseRow {
    pub q: f64,
    pub profile: f64,
    pub scheme: f64,
    pub slack: f64,
    /// True for rows at a jump point, whose `scheme` is the left limit.
    pub jump: bool,
}

/// Rows on the grid `0, step, 2·step, … ≤ q_max` plus every jump point below
/// `q_max`. A grid point that coincides with a jump point is replaced by the
/// jump row.
pub fn staircase_rows(params: &GeometricParams, q_max: f64, step: f64) -> Result<Vec<StaircaseRow>> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid(format!("--step must be positive, got {step}")));
    }
    let ladder = geometric_schedule(params)?;
    let last = *ladder.q_points().last().expect("nonempty ladder");
    if !(q_max >= 0.0 && q_max < last) {
        return Err(Error::OutOfLadder { quality: q_max, last_jump: last });
    }
    let profile = SquareLawProfile::new(params.alpha)?;
    let jumps: Vec<f64> = ladder.q_points().iter().copied().filter(|&q| q <= q_max).collect();
    let mut rows = Vec::new();
    for (k, &q) in jumps.iter().enumerate() {
        let f = profile.fidelity_of(q)?;
        let s = ladder.left_limit(k + 1);
        rows.push(StaircaseRow { q, profile: f, scheme: s, slack: s - f, jump: true });
    }
    let count = (q_max / step).floor() as u64;
    for i in 0..=count {
        let q = i as f64 * step;
        if jumps.iter().any(|&j| (q - j).abs() <= 1e-9 * step) {
            continue;
        }
        let f = profile.fidelity_of(q)?;
        let s = staircase_fidelity(&ladder, q)?;
        rows.push(StaircaseRow { q, profile: f, scheme: s, slack: s - f, jump: false });
    }
    rows.sort_by(|a, b| a.q.total_cmp(&b.q));
    Ok(rows)
}

fn cmd_staircase(o: &Options) -> Result<Outcome> {
    let (c0, d0, k0) = DEFAULT_STAIRCASE;
    let (c, d, layers) = (o.c.unwrap_or(c0), o.d.unwrap_or(d0), o.layers.unwrap_or(k0));
    let params = GeometricParams::new(o.alpha, c, d, layers)?;
    let last = layers as f64 * params.delta;
    let step = o.step.unwrap_or(params.delta / 20.0);
    let q_max = o.qmax.unwrap_or(last - step / 2.0);
    let rows = staircase_rows(&params, q_max, step)?;

    let min_slack = rows.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    let max_jump = rows.iter().filter(|r| r.jump).map(|r| r.slack.abs()).fold(0.0, f64::max);
    let violations = check_feasibility(&geometric_schedule(&params)?);
    let checks = vec![
        Check::new("min_slack", min_slack, 0.0, (-min_slack).max(0.0), -SLACK_FLOOR),
        Check::new("jump_slack", max_jump, 0.0, max_jump, JUMP_SLACK),
        Check::new("feasible", violations.len() as f64, 0.0, violations.len() as f64, 0.0),
    ];
    let mut csv = String::from("Q,profile,scheme,slack\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", csv_number(r.q), csv_number(r.profile), csv_number(r.scheme), csv_number(r.slack)));
    }
    let inputs = json!({ "alpha": o.alpha, "c": c, "d": d, "layers": layers, "qmax": q_max, "step": step });
    let results = json!({ "delta": params.delta, "min_slack": min_slack, "max_jump_slack": max_jump, "rows": rows });
    let mut out = Outcome::new("staircase", inputs, results, checks);
    out.csv = Some(csv);
    Ok(out)
}

/// Table rows in display order.
pub const TABLE_ROWS: [&str; 6] =
    ["prior_lower", "our_lower", "prior_upper", "our_upper", "lower_improvement", "upper_improvement"];

/// The 6 × 5 table built from `constants`: each bound row is its constant
/// times `√α` and the improvement rows are differences of the bound rows.
pub fn table_cells(constants: &TableConstants) -> [[f64; 5]; 6] {
    let mut cells = [[0.0; 5]; 6];
    for (j, alpha) in TABLE_ALPHAS.iter().enumerate() {
        let s = alpha.sqrt();
        let row = [constants.prior_lower * s, constants.our_lower * s, constants.prior_upper * s, constants.our_upper * s];
        cells[0][j] = row[0];
        cells[1][j] = row[1];
        cells[2][j] = row[2];
        cells[3][j] = row[3];
        cells[4][j] = (row[1] - row[0]).abs();
        cells[5][j] = (row[2] - row[3]).abs();
    }
    cells
}

/// Constants computed from scratch: the two prior-work constants, the
/// optimized two-level bound and the ladder energy at [`DEFAULT_UPPER_POINT`].
pub fn computed_table_constants(tol: f64) -> Result<(TableConstants, bool)> {
    let prior_lower = theorem1_series(tol)?.value;
    let prior_upper = theorem2_constant()?;
    let lower = optimize_two_level(&SquareLawProfile::unit(), TWO_LEVEL_START, &ascent_config())?;
    let (c, d) = DEFAULT_UPPER_POINT;
    let upper = total_energy(&GeometricParams::new(1.0, c, d, 1)?, tol)?.e_total;
    let constants =
        TableConstants { prior_lower, our_lower: lower.normalized_constant, prior_upper, our_upper: upper };
    Ok((constants, lower.converged))
}

fn cmd_table2(o: &Options) -> Result<Outcome> {
    let (computed, converged) = computed_table_constants(o.tol)?;
    let fixed = TABLE_CONSTANTS;
    let tol = TABLE_CONSTANT_TOL;
    let cells = table_cells(&fixed);
    let computed_cells = table_cells(&computed);

    let pairs = [
        ("prior_lower", computed.prior_lower, fixed.prior_lower, tol.prior_lower),
        ("our_lower", computed.our_lower, fixed.our_lower, tol.our_lower),
        ("prior_upper", computed.prior_upper, fixed.prior_upper, tol.prior_upper),
        ("our_upper", computed.our_upper, fixed.our_upper, tol.our_upper),
    ];
    let mut checks: Vec<Check> =
        pairs.iter().map(|&(name, c, f, t)| Check::absolute(format!("constant_{name}"), c, f, t)).collect();
    let consistency = (0..5)
        .map(|j| {
            let lower_gap = (cells[4][j] - (cells[1][j] - cells[0][j]).abs()).abs();
            let upper_gap = (cells[5][j] - (cells[2][j] - cells[3][j]).abs()).abs();
            lower_gap.max(upper_gap)
        })
        .fold(0.0, f64::max);
    checks.push(Check::new("improvement_rows_consistent", consistency, 0.0, consistency, 1e-3));

    let rows: Vec<Value> = TABLE_ROWS
        .iter()
        .zip(cells.iter().zip(&computed_cells))
        .map(|(name, (row, crow))| json!({ "name": name, "cells": row, "computed_cells": crow }))
        .collect();
    let results = json!({
        "alphas": TABLE_ALPHAS,
        "rows": rows,
        "fixed_constants": fixed,
        "computed_constants": computed,
    });

    let mut csv = String::from("row");
    for a in TABLE_ALPHAS {
        csv.push_str(&format!(",{a}"));
    }
    csv.push('\n');
    for (name, row) in TABLE_ROWS.iter().zip(&cells) {
        csv.push_str(name);
        for x in row {
            csv.push_str(&format!(",{}", csv_number(*x)));
        }
        csv.push('\n');
    }

    let inputs = json!({ "tol": o.tol, "upper_point": [DEFAULT_UPPER_POINT.0, DEFAULT_UPPER_POINT.1] });
    let mut out = Outcome::new("table2", inputs, results, checks);
    out.csv = Some(csv);
    out.converged = converged;
    Ok(out)
}

fn cmd_validate(o: &Options, suite: Suite) -> Result<Outcome> {
    let (checks, inputs) = match suite {
        Suite::Identities => {
            (identities_suite(o.seed, IDENTITY_INSTANCES)?, json!({ "seed": o.seed, "instances": IDENTITY_INSTANCES }))
        }
        Suite::Rates => (rates_suite(o.seed, RATE_INSTANCES)?, json!({ "seed": o.seed, "instances": RATE_INSTANCES })),
        Suite::Mmse => (mmse_suite(o.seed, o.samples)?, json!({ "seed": o.seed, "samples": o.samples })),
    };
    let mut inputs = inputs;
    inputs["suite"] = json!(suite);
    let passed = checks.iter().all(|c| c.passed);
    let results = json!({ "suite": suite, "passed": passed, "checks_run": checks.len() });
    Ok(Outcome::new("validate", inputs, results, checks))
}

fn cmd_lemma2(o: &Options) -> Result<Outcome> {
    let max_k = o.layers.unwrap_or(LEMMA2_MAX_K);
    if max_k == 0 {
        return Err(invalid("--layers must be at least 1"));
    }
    let ds: Vec<f64> = match o.d {
        Some(d) => vec![d],
        None => LEMMA2_DS.to_vec(),
    };
    let c = o.c.unwrap_or(1.0);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for &d in &ds {
        let mut min_margin = f64::INFINITY;
        let mut worst_k = 0;
        let mut failures = 0usize;
        for k in 1..=max_k as u64 {
            let check = lemma2_inequality(d, k)?;
            let margin = check.rhs - check.lhs;
            if margin < min_margin {
                min_margin = margin;
                worst_k = k;
            }
            if !check.holds {
                failures += 1;
            }
        }
        let ladder = geometric_schedule(&GeometricParams::new(o.alpha, c, d, max_k + 1)?)?;
        let violations = check_feasibility(&ladder).len();
        rows.push(json!({
            "d": d,
            "min_margin": min_margin,
            "worst_k": worst_k,
            "failures": failures,
            "ladder_violations": violations,
        }));
        checks.push(Check::new(format!("inequality_d{d}"), failures as f64, 0.0, failures as f64, 0.0));
        checks.push(Check::new(format!("feasible_d{d}"), violations as f64, 0.0, violations as f64, 0.0));
    }
    let inputs = json!({ "alpha": o.alpha, "c": c, "max_k": max_k, "d": ds });
    Ok(Outcome::new("lemma2", inputs, json!({ "rows": rows }), checks))
}

/// Parses `args`, runs the command, writes the output and returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stderr = std::io::stderr();
    let outcome = run(&cli, |msg| {
        let _ = writeln!(stderr, "{msg}");
    });
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return error_code(&e);
        }
    };
    let text = match outcome.render(cli.opts.format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return error_code(&e);
        }
    };
    let written = match &cli.opts.out {
        Some(path) => std::fs::write(path, &text),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write output: {e}");
        return 1;
    }
    outcome.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("energy-bounds").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn defaults() {
        let cli = parse(&["bounds"]);
        assert_eq!(cli.command, Command::Bounds);
        assert_eq!(cli.opts.alpha, 1.0);
        assert_eq!(cli.opts.tol, 1e-9);
        assert_eq!(cli.opts.seed, 42);
        assert_eq!(cli.opts.format, Format::Json);
        let cli = parse(&["lower", "--K", "3", "--alpha", "4"]);
        assert_eq!(cli.opts.levels, Some(3));
        assert_eq!(cli.opts.alpha, 4.0);
        let cli = parse(&["--seed", "7", "validate", "mmse"]);
        assert_eq!(cli.command, Command::Validate { suite: Suite::Mmse });
        assert_eq!(cli.opts.seed, 7);
        assert!(Cli::try_parse_from(["energy-bounds", "validate", "nope"]).is_err());
    }

    #[test]
    fn rounding() {
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1.23456789012345), 1.23456789);
        assert_eq!(round_sig(-2.0 / 3.0), -0.6666666667);
        assert_eq!(round_sig(1e-300 / 3.0), 3.333333333e-301);
        let v = round_value(json!({ "a": [1.0 / 3.0, 2], "b": { "c": 1e20 / 7.0 } }));
        assert_eq!(v, json!({ "a": [0.3333333333, 2], "b": { "c": 1.428571429e19 } }));
    }

    #[test]
    fn table_arithmetic() {
        let cells = table_cells(&TABLE_CONSTANTS);
        assert!((cells[1][3] - 28.6407).abs() < 5e-5);
        assert!((cells[5][1] - 2.7332).abs() < 5e-5);
        assert!((cells[0][4] - 45.07).abs() < 1e-9);
        assert!((cells[4][0] - 0.4550).abs() < 1e-12);
    }

    #[test]
    fn staircase_grid() {
        let params = GeometricParams::new(1.0, 1.0, 0.5, 3).unwrap();
        let rows = staircase_rows(&params, 2.9, 0.5).unwrap();
        assert_eq!(rows[0], StaircaseRow { q: 0.0, profile: 1.0, scheme: 1.0, slack: 0.0, jump: false });
        let jumps: Vec<f64> = rows.iter().filter(|r| r.jump).map(|r| r.q).collect();
        assert_eq!(jumps, vec![1.0, 2.0]);
        assert_eq!(rows.iter().filter(|r| r.q == 1.0).count(), 1);
        assert!(rows.iter().all(|r| r.slack >= -1e-12));
        assert!(rows.iter().filter(|r| r.jump).all(|r| r.slack.abs() <= 1e-9));
        assert!(matches!(staircase_rows(&params, 3.0, 0.5), Err(Error::OutOfLadder { .. })));
        assert!(staircase_rows(&params, 2.0, 0.0).is_err());
    }

    #[test]
    fn error_codes() {
        assert_eq!(error_code(&invalid("x")), 2);
        assert_eq!(error_code(&Error::NonConvergence("x".into())), 3);
        assert_eq!(error_code(&Error::NotPositiveDefinite("x".into())), 1);
    }

    #[test]
    fn csv_only_where_defined() {
        let cli = parse(&["lemma2", "--d", "0.5", "--layers", "10"]);
        let out = run(&cli, |_| {}).unwrap();
        assert!(out.passed());
        assert!(out.render(Format::Csv).is_err());
        assert!(out.render(Format::Json).unwrap().contains("\"command\": \"lemma2\""));
    }
}
