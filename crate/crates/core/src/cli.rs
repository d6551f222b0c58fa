//! Command-line front end. Exit codes: 0 success, 1 analyzer and simulator
//! disagree, 2 usage or input error. Errors go to stderr as JSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::energy::format_pj;
use crate::linear::Bindings;
use crate::mapping::MappingConfig;
use crate::par::Exec;
use crate::pra::parse_pra;
use crate::report::{analyze, AnalysisReport};
use crate::sim::{compare, simulate, SimConfig};
use crate::sweep::{parse_axis, run_sweep, write_csv, SweepAxis, TileRule};
use crate::tiling::tile_program;

#[derive(Debug, Parser)]
#[command(name = "pra-energy", version, about = "Symbolic energy and latency analysis of tiled loop programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Symbolic volumes, energies and latency as a JSON report.
    Analyze(AnalyzeArgs),
    /// Concrete values of a report, or of a program and mapping, at bindings.
    Evaluate(EvaluateArgs),
    /// Exact counts by enumerating the tiled iteration space.
    Simulate(SimulateArgs),
    /// Analyzer against simulator; exit code 1 on any difference.
    Compare(CompareArgs),
    /// Evaluates a report over parameter ranges, one CSV row per point.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct Inputs {
    /// Program file.
    #[arg(long)]
    pub program: PathBuf,
    /// Mapping file (TOML).
    #[arg(long)]
    pub mapping: PathBuf,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter bindings, e.g. `N0=4,N1=5`; may repeat.
    #[arg(long = "bind", value_name = "NAME=VALUE,...")]
    pub bind: Vec<String>,
    /// Output file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run on one thread.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Report written by `analyze`.
    #[arg(long, conflicts_with_all = ["program", "mapping"])]
    pub report: Option<PathBuf>,
    #[arg(long, requires = "mapping")]
    pub program: Option<PathBuf>,
    #[arg(long, requires = "program")]
    pub mapping: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub common: Common,
    /// Adds one to the analyzer count of a statement.
    #[arg(long, hide = true, value_name = "STATEMENT")]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub inputs: Inputs,
    #[command(flatten)]
    pub common: Common,
    /// Swept parameters, e.g. `N0,N1=8:128:*2`; the last varies fastest.
    #[arg(long = "range", required = true)]
    pub range: Vec<String>,
    #[arg(long, value_enum, default_value = "ceil")]
    pub tile_rule: RuleArg,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Ceil,
    Given,
}

/// A failure with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    fn input(kind: &'static str, e: impl ToString) -> Self {
        Failure {
            code: 2,
            kind,
            message: e.to_string(),
        }
    }
}

pub fn parse_bindings(items: &[String]) -> Result<Bindings, Failure> {
    let mut b = Bindings::new();
    for item in items {
        for part in item.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Failure::input("usage", format!("binding `{part}` is not NAME=VALUE")))?;
            let v: i64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::input("usage", format!("binding `{part}` has a non-integer value")))?;
            b.insert(k.trim().to_string(), v);
        }
    }
    Ok(b)
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input("io", format!("{}: {e}", path.display())))
}

fn exec(c: &Common) -> Exec {
    if c.sequential {
        Exec::Sequential
    } else {
        Exec::Parallel
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::input("io", format!("{}: {e}", p.display()))),
        None => {
            let mut o = std::io::stdout().lock();
            o.write_all(text.as_bytes())
                .and_then(|_| o.flush())
                .map_err(|e| Failure::input("io", e))
        }
    }
}

fn warn(report: &AnalysisReport) {
    for w in &report.warnings {
        eprintln!("{}", json!({ "warning": w }));
    }
}

fn load_report(inputs: &Inputs, exec: Exec) -> Result<(String, MappingConfig, AnalysisReport), Failure> {
    let text = read(&inputs.program)?;
    let mapping = MappingConfig::load(&inputs.mapping).map_err(|e| Failure::input("mapping", e))?;
    let report = analyze(&text, &mapping, exec).map_err(|e| Failure::input("analysis", e))?;
    warn(&report);
    Ok((text, mapping, report))
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn render_text(report: &AnalysisReport) -> String {
    let mut s = String::new();
    s.push_str(&format!("program sha256 {}\n", report.program_digest));
    for a in &report.assumptions {
        s.push_str(&format!("assume {a}\n"));
    }
    for st in &report.energy.statements {
        let vol = match &st.volume {
            crate::energy::VolumeReport::Symbolic { pieces } => pieces.to_string(),
            crate::energy::VolumeReport::Enumerated { reason } => format!("enumerated ({reason})"),
        };
        s.push_str(&format!(
            "{} {} {} fJ/exec  vol = {}\n",
            st.id, st.dependence, st.energy_per_exec_fj, vol
        ));
    }
    if let Some(l) = &report.latency {
        s.push_str(&format!("L = {l}\n"));
    }
    s.push_str(&format!("E_tot pieces: {}\n", report.energy.energy_total_fj.pieces.len()));
    if let Some(c) = &report.concrete {
        s.push_str(&format!("E_tot = {} fJ ({})\n", c.counts.energy_fj, format_pj(c.counts.energy_fj)));
        if let Some(l) = c.counts.latency {
            s.push_str(&format!("L = {l}\n"));
        }
    }
    s
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<u8, Failure> {
    let bindings = parse_bindings(&a.common.bind)?;
    let (_, _, mut report) = load_report(&a.inputs, exec(&a.common))?;
    if !bindings.is_empty() {
        report.concrete = Some(report.evaluate(&bindings).map_err(|e| Failure::input("evaluate", e))?);
    }
    let text = match a.format {
        Format::Text => render_text(&report),
        _ => to_json(&report),
    };
    emit(&a.common.out, &text)?;
    Ok(0)
}

fn cmd_evaluate(a: &EvaluateArgs) -> Result<u8, Failure> {
    let bindings = parse_bindings(&a.common.bind)?;
    let report: AnalysisReport = match (&a.report, &a.program, &a.mapping) {
        (Some(r), _, _) => serde_json::from_str(&read(r)?).map_err(|e| Failure::input("report", e))?,
        (None, Some(p), Some(m)) => {
            load_report(
                &Inputs {
                    program: p.clone(),
                    mapping: m.clone(),
                },
                exec(&a.common),
            )?
            .2
        }
        _ => return Err(Failure::input("usage", "evaluate needs --report or --program with --mapping")),
    };
    let c = report.evaluate(&bindings).map_err(|e| Failure::input("evaluate", e))?;
    let text = match a.format {
        Format::Text => format!(
            "E_tot = {} fJ ({})\nL = {}\n",
            c.counts.energy_fj,
            format_pj(c.counts.energy_fj),
            c.counts.latency.map(|l| l.to_string()).unwrap_or_else(|| "-".into())
        ),
        _ => to_json(&c),
    };
    emit(&a.common.out, &text)?;
    Ok(0)
}

fn sim_counts(inputs: &Inputs, common: &Common) -> Result<crate::sim::AccessCounts, Failure> {
    let bindings = parse_bindings(&common.bind)?;
    let text = read(&inputs.program)?;
    let program = parse_pra(&text).map_err(|e| Failure::input("parse", e))?;
    let mapping = MappingConfig::load(&inputs.mapping).map_err(|e| Failure::input("mapping", e))?;
    let tiled = tile_program(&program, &mapping.tiling, &mapping.assume).map_err(|e| Failure::input("tiling", e))?;
    simulate(&SimConfig {
        program: &program,
        tiled: &tiled,
        table: &mapping.table,
        bindings: &bindings,
        schedule: mapping.schedule.as_ref(),
        exec: exec(common),
    })
    .map_err(|e| Failure::input("simulate", e))
}

fn cmd_simulate(a: &SimulateArgs) -> Result<u8, Failure> {
    let counts = sim_counts(&a.inputs, &a.common)?;
    emit(&a.common.out, &to_json(&counts))?;
    Ok(0)
}

fn cmd_compare(a: &CompareArgs) -> Result<u8, Failure> {
    let bindings = parse_bindings(&a.common.bind)?;
    let (_, _, report) = load_report(&a.inputs, exec(&a.common))?;
    let mut analysis = report.evaluate(&bindings).map_err(|e| Failure::input("evaluate", e))?.counts;
    if let Some(id) = &a.inject_fault {
        *analysis
            .per_statement
            .get_mut(id)
            .ok_or_else(|| Failure::input("usage", format!("no statement `{id}`")))? += 1;
    }
    let sim = sim_counts(&a.inputs, &a.common)?;
    let diff = compare(&analysis, &sim).map_err(|e| Failure::input("compare", e))?;
    emit(&a.common.out, &to_json(&diff))?;
    Ok(if diff.is_empty() { 0 } else { 1 })
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8, Failure> {
    let fixed = parse_bindings(&a.common.bind)?;
    let axes: Vec<SweepAxis> = a
        .range
        .iter()
        .map(|r| parse_axis(r))
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::input("usage", e))?;
    let (_, _, report) = load_report(&a.inputs, exec(&a.common))?;
    let rule = match a.tile_rule {
        RuleArg::Ceil => TileRule::Ceil,
        RuleArg::Given => TileRule::Given,
    };
    let rows = run_sweep(&report, &axes, &fixed, rule, exec(&a.common));
    let text = match a.format {
        Format::Json => to_json(&rows),
        _ => {
            let mut buf = Vec::new();
            write_csv(&report, &rows, &mut buf).map_err(|e| Failure::input("io", e))?;
            String::from_utf8(buf).expect("utf-8 csv")
        }
    };
    emit(&a.common.out, &text)?;
    Ok(0)
}

pub fn run(cli: &Cli) -> Result<u8, Failure> {
    match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Evaluate(a) => cmd_evaluate(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Sweep(a) => cmd_sweep(a),
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
