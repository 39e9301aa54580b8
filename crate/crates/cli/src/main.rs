use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nlswap_core::checks::{run_checks, CheckOptions, CriterionResult};
use nlswap_core::format::{parse_json, to_json_pretty, BoxFile};
use nlswap_core::report::{render_box, render_checks, ReportDocument};
use nlswap_core::{bounds, ch_evaluate, classify, run_scenario, BoxTable, Error, ScenarioSpec};

#[derive(Parser)]
#[command(
    name = "nlswap",
    version,
    about = "Exact nonlocality-swapping calculator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum FunctionalArg {
    Gsi,
    Ch,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and report every branch.
    Run {
        path: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Recompute every reference number and compare it exactly.
    Reproduce {
        /// Run only the check with this name (for example `gsi-bounds`).
        #[arg(long)]
        filter: Option<String>,
        /// Also assert the literal anti-PR claim (expected to fail).
        #[arg(long)]
        literal_claims: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate a functional on a box file.
    Eval {
        box_path: PathBuf,
        #[arg(value_enum)]
        functional: FunctionalArg,
        /// Expected party count.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Print a box file as an inputs × outputs table with its validation report.
    Show {
        box_path: PathBuf,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    /// Input could not be read, parsed or validated.
    Invalid(String),
    CouplerInvalid(String),
    /// Checks ran but some failed; the report is already written.
    ChecksFailed,
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_coupler_invalid() {
            Failure::CouplerInvalid(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read_input(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> CmdResult {
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
            {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                    Err(Failure::Internal(format!("cannot write to stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}

fn load_box(path: &Path) -> Result<BoxTable, Failure> {
    let text = read_input(path)?;
    let file: BoxFile = parse_json(&text, &path.display().to_string())?;
    Ok(file.to_table()?)
}

fn cmd_run(path: &Path, format: Format, output: Option<&Path>) -> CmdResult {
    let text = read_input(path)?;
    let spec: ScenarioSpec = parse_json(&text, &path.display().to_string())?;
    let report = run_scenario(&spec)?;
    let doc = ReportDocument::from_report(&report);
    let rendered = match format {
        Format::Json => to_json_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?,
        Format::Table => nlswap_core::report::render_table(&doc),
    };
    emit(&rendered, output)?;
    if doc.all_checks_pass() {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn render_results(results: &[CriterionResult]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:<24} {:<52} result",
        "#", "check", "reference"
    );
    for r in results {
        let _ = writeln!(
            out,
            "{:>3}  {:<24} {:<52} {}",
            r.id,
            r.slug,
            r.title,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    for r in results.iter().filter(|r| !r.pass) {
        let _ = writeln!(out, "\n{} ({}):", r.slug, r.title);
        if let Some(e) = &r.error {
            let _ = writeln!(out, "  error: {e}");
        }
        let failed: Vec<_> = r.checks.iter().filter(|c| !c.pass).cloned().collect();
        for line in render_checks(&failed).lines() {
            let _ = writeln!(out, "  {line}");
        }
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "\n{passed}/{} checks passed", results.len());
    out
}

fn cmd_reproduce(
    filter: Option<&str>,
    literal_claims: bool,
    format: Format,
    output: Option<&Path>,
) -> CmdResult {
    let opts = CheckOptions {
        literal_claims,
        ..CheckOptions::default()
    };
    let results = run_checks(filter, &opts)?;
    let rendered = match format {
        Format::Json => to_json_pretty(&results).map_err(|e| Failure::Internal(e.to_string()))?,
        Format::Table => render_results(&results),
    };
    emit(&rendered, output)?;
    if results.iter().all(|r| r.pass) {
        Ok(())
    } else {
        Err(Failure::ChecksFailed)
    }
}

fn cmd_eval(
    path: &Path,
    functional: FunctionalArg,
    n: Option<usize>,
    format: Format,
    output: Option<&Path>,
) -> CmdResult {
    let table = load_box(path)?;
    if let Some(n) = n {
        if n != table.parties() {
            return Err(Error::ArityMismatch {
                expected: n,
                found: table.parties(),
            }
            .into());
        }
    }
    let parties = table.parties();
    let value = match functional {
        FunctionalArg::Gsi => classify(&table).gsi_value,
        FunctionalArg::Ch => ch_evaluate(&table)?,
    };
    let decimal = value.to_decimal(12);
    let rendered = match (functional, format) {
        (FunctionalArg::Gsi, Format::Table) => {
            let b = bounds(parties);
            let c = classify(&table);
            let verdict = if c.exceeds_quantum {
                format!("exceeds quantum bound ({})", b.quantum)
            } else if c.exceeds_local {
                format!(
                    "exceeds local bound ({}), within quantum bound ({})",
                    b.local, b.quantum
                )
            } else {
                format!("within local bound ({})", b.local)
            };
            format!(
                "GSI = {value} (≈ {decimal})\nbounds: local {}, quantum {}, algebraic {}\n{verdict}\n",
                b.local, b.quantum, b.algebraic
            )
        }
        (FunctionalArg::Ch, Format::Table) => format!("CH = {value} (≈ {decimal})\n"),
        (FunctionalArg::Gsi, Format::Json) => {
            let c = classify(&table);
            let doc = serde_json::json!({
                "functional": "gsi",
                "n": parties,
                "value": value,
                "decimal": decimal,
                "bounds": bounds(parties),
                "exceeds_local": c.exceeds_local,
                "exceeds_quantum": c.exceeds_quantum,
            });
            to_json_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?
        }
        (FunctionalArg::Ch, Format::Json) => {
            let doc = serde_json::json!({
                "functional": "ch",
                "n": parties,
                "value": value,
                "decimal": decimal,
            });
            to_json_pretty(&doc).map_err(|e| Failure::Internal(e.to_string()))?
        }
    };
    emit(&rendered, output)
}

fn cmd_show(path: &Path, output: Option<&Path>) -> CmdResult {
    let text = read_input(path)?;
    let file: BoxFile = parse_json(&text, &path.display().to_string())?;
    let table = file.to_quasi_table()?;
    let report = table.validate();
    let nonzero = table.probs().iter().filter(|p| !p.is_zero()).count();
    let mut out = format!(
        "{}-party box, {} entries, {nonzero} nonzero (· marks zero)\n\n",
        table.parties(),
        table.probs().len()
    );
    out.push_str(&render_box(&table));
    out.push('\n');
    let flags: Vec<String> = report
        .nonsignaling
        .iter()
        .enumerate()
        .map(|(i, ok)| format!("party {}: {}", i + 1, if *ok { "ok" } else { "signals" }))
        .collect();
    let _ = writeln!(out, "normalized:    {}", report.normalized);
    let _ = writeln!(out, "nonnegative:   {}", report.nonnegative);
    let _ = writeln!(out, "nonsignaling:  {}", flags.join(", "));
    for p in &report.problems {
        let _ = writeln!(out, "problem: {p}");
    }
    emit(&out, output)?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::Invalid(format!(
            "{} is not a valid box",
            path.display()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            path,
            format,
            output,
        } => cmd_run(path, *format, output.as_deref()),
        Command::Reproduce {
            filter,
            literal_claims,
            format,
            output,
        } => cmd_reproduce(
            filter.as_deref(),
            *literal_claims,
            *format,
            output.as_deref(),
        ),
        Command::Eval {
            box_path,
            functional,
            n,
            format,
            output,
        } => cmd_eval(box_path, *functional, *n, *format, output.as_deref()),
        Command::Show { box_path, output } => cmd_show(box_path, output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::ChecksFailed) => ExitCode::from(2),
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::CouplerInvalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(1)
        }
    }
}
