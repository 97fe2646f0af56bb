//! `bmspec` — batch front end for spec checking, evaluation and reporting.
//!
//! Exit codes are part of the contract so monitoring pipelines can tell a
//! misbehaving facility from a broken invocation:
//!
//! - 0: success (possibly with no-data warnings)
//! - 1: spec errors
//! - 2: I/O or usage failures
//! - 3: evaluation found violated cells
//! - 4: required sensors missing from the data

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{DateTime, NaiveDate, Utc};
use chrono_tz::Tz;
use clap::{Args, Parser, Subcommand, ValueEnum};

use bmspec_core::eval::EvalError;
use bmspec_core::pipeline::{run_pipeline, PipelineError, PipelineOptions, SpaceOutcome};
use bmspec_core::report::{build_carpet, export_results_csv, read_results_csv, render_svg, CarpetKind};
use bmspec_core::scenario::{generate, FaultInjection, FaultKind, ScenarioConfig};
use bmspec_core::spec::ast::SpaceMode;
use bmspec_core::spec::{parse_spec, resolve_spec, Resolved};
use bmspec_core::timeseries::Grid;

const EXIT_OK: u8 = 0;
const EXIT_SPEC: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VIOLATIONS: u8 = 3;
const EXIT_MISSING_SENSOR: u8 = 4;

#[derive(Parser)]
#[command(name = "bmspec", version, about = "Specification-based monitoring for building management systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate a spec file
    Check {
        #[arg(long)]
        spec: PathBuf,
    },
    /// Evaluate logged sensor data against a spec
    Evaluate(EvaluateArgs),
    /// Render a carpet plot from a results file
    Report(ReportArgs),
    /// Generate the room-temperature example scenario
    Generate(GenerateArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Spec file (.ens)
    #[arg(long)]
    spec: PathBuf,
    /// Sensor CSV log; repeatable
    #[arg(long = "data", required = true)]
    data: Vec<PathBuf>,
    /// Marker CSV log
    #[arg(long)]
    markers: Option<PathBuf>,
    /// Plausibility bounds CSV
    #[arg(long)]
    bounds: Option<PathBuf>,
    /// Grid start, ISO-8601
    #[arg(long)]
    from: String,
    /// Grid end (exclusive), ISO-8601
    #[arg(long)]
    to: String,
    /// Grid step in seconds
    #[arg(long, default_value_t = 900)]
    step: u32,
    /// IANA timezone for time routines and reports
    #[arg(long, default_value = "UTC")]
    tz: String,
    /// Override the declared mode of every state space
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Absolute tolerance on =, >= and <= comparisons
    #[arg(long, default_value_t = bmspec_core::eval::DEFAULT_EQ_EPS)]
    eq_eps: f64,
    /// Longest missing-cell run filled by interpolation
    #[arg(long, default_value_t = 1)]
    max_gap: usize,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Results CSV written by `evaluate`
    results: PathBuf,
    /// Which carpet to draw
    #[arg(long, value_enum, default_value_t = KindArg::States)]
    kind: KindArg,
    /// IANA timezone for the date/time axes
    #[arg(long, default_value = "UTC")]
    tz: String,
    /// Output SVG file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory for sensors.csv, markers.csv and spec.ens
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    days: u32,
    #[arg(long, default_value_t = 900)]
    step: u32,
    /// Seed for the generated measurement noise
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Reference temperature in °C
    #[arg(long, default_value_t = 21.0)]
    reference: f64,
    /// First day of the scenario (data starts at 00:00 UTC)
    #[arg(long, default_value = "2011-01-10")]
    start_date: String,
    /// Fault to inject: `kind,FROM,TO[,MAGNITUDE]` with kind one of
    /// stuck-mode, setpoint-drift, wrong-marker, sensor-gap; repeatable
    #[arg(long = "fault")]
    faults: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exclusive,
    Permissive,
}

impl From<ModeArg> for SpaceMode {
    fn from(m: ModeArg) -> SpaceMode {
        match m {
            ModeArg::Exclusive => SpaceMode::Exclusive,
            ModeArg::Permissive => SpaceMode::Permissive,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    States,
    Verdict,
}

impl From<KindArg> for CarpetKind {
    fn from(k: KindArg) -> CarpetKind {
        match k {
            KindArg::States => CarpetKind::States,
            KindArg::Verdict => CarpetKind::Verdict,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { spec } => cmd_check(&spec),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Report(args) => cmd_report(&args),
        Command::Generate(args) => cmd_generate(&args),
    };
    ExitCode::from(code)
}

fn read_file(path: &Path) -> Result<Vec<u8>, u8> {
    std::fs::read(path).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", path.display());
        EXIT_IO
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), u8> {
    std::fs::write(path, bytes).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        EXIT_IO
    })
}

/// Parses and resolves a spec file, printing diagnostics with positions.
fn load_spec(path: &Path) -> Result<Resolved, u8> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes).map_err(|_| {
        eprintln!("error: {} is not UTF-8", path.display());
        EXIT_IO
    })?;
    let source = path.display().to_string();
    let parsed = match parse_spec(&text) {
        Ok(p) => p,
        Err(diags) => {
            eprint!("{}", diags.render(&source));
            return Err(EXIT_SPEC);
        }
    };
    eprint!("{}", parsed.warnings.render(&source));
    match resolve_spec(parsed.doc) {
        Ok(resolved) => {
            eprint!("{}", resolved.warnings.render(&source));
            Ok(resolved)
        }
        Err(diags) => {
            eprint!("{}", diags.render(&source));
            Err(EXIT_SPEC)
        }
    }
}

fn parse_timestamp(s: &str, what: &str) -> Result<DateTime<Utc>, u8> {
    DateTime::parse_from_rfc3339(s)
        .map(|t| t.with_timezone(&Utc))
        .map_err(|_| {
            eprintln!("error: {what} `{s}` is not an ISO-8601 timestamp");
            EXIT_IO
        })
}

fn parse_zone(s: &str) -> Result<Tz, u8> {
    s.parse().map_err(|_| {
        eprintln!("error: unknown timezone `{s}`");
        EXIT_IO
    })
}

fn cmd_check(spec: &Path) -> u8 {
    match load_spec(spec) {
        Ok(resolved) => {
            println!(
                "ok: {} elements, {} state spaces",
                resolved.spec.document().elements.len(),
                resolved.spec.statespaces().count()
            );
            EXIT_OK
        }
        Err(code) => code,
    }
}

fn cmd_evaluate(args: &EvaluateArgs) -> u8 {
    let resolved = match load_spec(&args.spec) {
        Ok(r) => r,
        Err(code) => return code,
    };

    let (from, to) = match (
        parse_timestamp(&args.from, "--from"),
        parse_timestamp(&args.to, "--to"),
    ) {
        (Ok(f), Ok(t)) => (f, t),
        (Err(code), _) | (_, Err(code)) => return code,
    };
    let grid = match Grid::new(from, to, args.step) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let zone = match parse_zone(&args.tz) {
        Ok(z) => z,
        Err(code) => return code,
    };

    let mut data_files = Vec::new();
    for path in &args.data {
        match read_file(path) {
            Ok(bytes) => data_files.push(bytes),
            Err(code) => return code,
        }
    }
    let data_refs: Vec<&[u8]> = data_files.iter().map(|b| b.as_slice()).collect();
    let markers = match &args.markers {
        Some(path) => match read_file(path) {
            Ok(bytes) => Some(bytes),
            Err(code) => return code,
        },
        None => None,
    };
    let bounds = match &args.bounds {
        Some(path) => match read_file(path) {
            Ok(bytes) => Some(bytes),
            Err(code) => return code,
        },
        None => None,
    };

    let mut opts = PipelineOptions::new(grid);
    opts.zone = zone;
    opts.eq_eps = args.eq_eps;
    opts.max_gap_cells = args.max_gap;
    opts.mode_override = args.mode.map(SpaceMode::from);

    let output = match run_pipeline(
        &resolved.spec,
        &data_refs,
        markers.as_deref(),
        bounds.as_deref(),
        &opts,
    ) {
        Ok(o) => o,
        Err(PipelineError::Eval(EvalError::MissingSensors { ids })) => {
            eprintln!("error: data is missing required sensors: {}", ids.join(", "));
            return EXIT_MISSING_SENSOR;
        }
        Err(PipelineError::NoStateSpaces) => {
            eprintln!("error: the spec defines no state space to evaluate");
            return EXIT_SPEC;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };

    if let Err(code) = std::fs::create_dir_all(&args.out).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        EXIT_IO
    }) {
        return code;
    }

    let single = output.spaces.len() == 1;
    let file_name = |space: &str, base: &str| {
        if single {
            base.to_string()
        } else {
            format!("{space}.{base}")
        }
    };

    let mut summary_text = String::new();
    for outcome in &output.spaces {
        let space = &outcome.result.statespace;
        if let Err(code) = write_file(
            &args.out.join(file_name(space, "results.csv")),
            &export_results_csv(&outcome.result),
        ) {
            return code;
        }
        if let Err(code) = write_file(
            &args.out.join(file_name(space, "mismatches.csv")),
            &mismatches_csv(outcome),
        ) {
            return code;
        }
        if let Err(code) = write_file(
            &args.out.join(file_name(space, "transitions.csv")),
            &transitions_csv(outcome),
        ) {
            return code;
        }
        summary_text.push_str(&outcome.summary.to_text());
        if let Some(rec) = &outcome.reconciliation {
            summary_text.push_str(&format!(
                "marker cells examined: {}, skipped: {}\n",
                rec.examined, rec.skipped
            ));
            if !rec.unmapped_states.is_empty() {
                summary_text.push_str(&format!(
                    "states without markers: {}\n",
                    rec.unmapped_states.join(", ")
                ));
            }
        } else {
            summary_text.push_str("marker comparison: no marker stream for this space\n");
        }
        summary_text.push('\n');
    }
    if let Err(code) = write_file(&args.out.join("summary.txt"), summary_text.as_bytes()) {
        return code;
    }
    print!("{summary_text}");

    if output.any_violated() {
        eprintln!("verdict: violations found");
        EXIT_VIOLATIONS
    } else if output.any_no_data() {
        eprintln!("warning: verdict satisfied where decidable, but no-data cells remain");
        EXIT_OK
    } else {
        EXIT_OK
    }
}

fn mismatches_csv(outcome: &SpaceOutcome) -> Vec<u8> {
    let grid = outcome.result.verdict.grid();
    let mut out = String::from("cell_index,timestamp,expected_states,observed_marker\n");
    if let Some(rec) = &outcome.reconciliation {
        for m in &rec.mismatches {
            out.push_str(&format!(
                "{},{},{},{}\n",
                m.cell_index,
                grid.timestamp(m.cell_index)
                    .to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                m.expected_states.join("+"),
                m.observed_marker.as_deref().unwrap_or(""),
            ));
        }
    }
    out.into_bytes()
}

fn transitions_csv(outcome: &SpaceOutcome) -> Vec<u8> {
    let mut out = String::from("from_marker,to_marker,count,declared\n");
    for t in &outcome.transitions {
        out.push_str(&format!(
            "{},{},{},{}\n",
            t.from_marker, t.to_marker, t.count, t.declared
        ));
    }
    out.into_bytes()
}

fn cmd_report(args: &ReportArgs) -> u8 {
    let bytes = match read_file(&args.results) {
        Ok(b) => b,
        Err(code) => return code,
    };
    let result = match read_results_csv(&bytes) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let zone = match parse_zone(&args.tz) {
        Ok(z) => z,
        Err(code) => return code,
    };
    let carpet = match build_carpet(&result, args.kind.into(), zone) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    if let Err(code) = write_file(&args.out, &render_svg(&carpet)) {
        return code;
    }
    EXIT_OK
}

/// `kind,FROM,TO[,MAGNITUDE]`.
fn parse_fault(s: &str) -> Result<FaultInjection, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 && parts.len() != 4 {
        return Err(format!("fault `{s}` must be `kind,FROM,TO[,MAGNITUDE]`"));
    }
    let kind = FaultKind::parse_name(parts[0]).ok_or_else(|| {
        format!(
            "unknown fault kind `{}`; expected stuck-mode, setpoint-drift, wrong-marker or sensor-gap",
            parts[0]
        )
    })?;
    let from = DateTime::parse_from_rfc3339(parts[1])
        .map_err(|_| format!("fault start `{}` is not ISO-8601", parts[1]))?
        .with_timezone(&Utc);
    let to = DateTime::parse_from_rfc3339(parts[2])
        .map_err(|_| format!("fault end `{}` is not ISO-8601", parts[2]))?
        .with_timezone(&Utc);
    let magnitude = match parts.get(3) {
        Some(m) => m
            .parse::<f64>()
            .map_err(|_| format!("fault magnitude `{m}` is not a number"))?,
        None => 0.0,
    };
    Ok(FaultInjection {
        kind,
        from,
        to,
        magnitude,
    })
}

fn cmd_generate(args: &GenerateArgs) -> u8 {
    let start_date = match args.start_date.parse::<NaiveDate>() {
        Ok(d) => d,
        Err(_) => {
            eprintln!("error: --start-date `{}` is not a date (YYYY-MM-DD)", args.start_date);
            return EXIT_IO;
        }
    };
    let config = ScenarioConfig {
        days: args.days,
        step_secs: args.step,
        reference_value: args.reference,
        seed: args.seed,
        start_date,
        ..ScenarioConfig::default()
    };
    let mut faults = Vec::new();
    for s in &args.faults {
        match parse_fault(s) {
            Ok(f) => faults.push(f),
            Err(msg) => {
                eprintln!("error: {msg}");
                return EXIT_IO;
            }
        }
    }
    let scenario = match generate(&config, &faults) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    if let Err(code) = std::fs::create_dir_all(&args.out).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", args.out.display());
        EXIT_IO
    }) {
        return code;
    }
    for (name, bytes) in [
        ("sensors.csv", scenario.sensor_csv.as_slice()),
        ("markers.csv", scenario.marker_csv.as_slice()),
        ("spec.ens", scenario.spec_text.as_bytes()),
    ] {
        if let Err(code) = write_file(&args.out.join(name), bytes) {
            return code;
        }
    }
    println!(
        "generated {} cells into {}",
        scenario.grid.cell_count(),
        args.out.display()
    );
    EXIT_OK
}
