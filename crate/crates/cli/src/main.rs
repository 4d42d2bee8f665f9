//! Command-line front end for the calr-core laboratory.

mod catalog;
mod runner;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use runner::RunError;
use scenario::Scenario;

const EXIT_IO: u8 = 1;
const EXIT_PARSE: u8 = 2;
const EXIT_PRECONDITION: u8 = 3;

#[derive(Parser)]
#[command(name = "calr-lab", version, about = "Resonance sweeps and energy bounds for layered spheres")]
struct Cli {
    /// Worker threads for sweep points.
    #[arg(long, global = true, env = "CALR_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file (or a bundled scenario by name) and write CSV outputs.
    Run {
        scenario: String,
        /// Output directory; defaults to ./calr-out/<scenario name>.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the source truncation degree.
        #[arg(long)]
        kmax: Option<usize>,
        /// Reserved; every computation is deterministic.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// List bundled scenarios.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Validate a scenario without running it.
    Check {
        scenario: String,
        #[arg(long)]
        kmax: Option<usize>,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match e {
            RunError::Precondition(_) => EXIT_PRECONDITION,
            RunError::Invalid(_) => EXIT_PARSE,
        };
        Failure::new(code, e.to_string())
    }
}

fn load(arg: &str) -> Result<Scenario, Failure> {
    let path = Path::new(arg);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{arg}: {e}")))?
    } else if let Some(text) = catalog::find(arg) {
        text.to_string()
    } else {
        return Err(Failure::new(EXIT_IO, format!("{arg}: no such file or bundled scenario")));
    };
    let s = Scenario::parse(&text).map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    s.validate().map_err(|e| Failure::new(EXIT_PARSE, e.to_string()))?;
    Ok(s)
}

fn list(as_json: bool) -> Result<(), Failure> {
    let all = catalog::all();
    if as_json {
        let text = serde_json::to_string_pretty(&all).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    println!("{:<30} {:<8} {:<13} description", "name", "theorem", "expected");
    for s in all {
        println!(
            "{:<30} {:<8} {:<13} {}",
            s.name,
            s.theorem.as_deref().unwrap_or("-"),
            s.expected_verdict.map(|v| format!("{v:?}")).unwrap_or_else(|| "-".into()),
            s.description.as_deref().unwrap_or("")
        );
    }
    Ok(())
}

fn run(arg: &str, out: Option<PathBuf>, kmax: Option<usize>, seed: Option<u64>, threads: usize) -> Result<(), Failure> {
    let scenario = load(arg)?;
    let result = runner::run(&scenario, kmax)?;
    let dir = out.unwrap_or_else(|| Path::new("calr-out").join(&scenario.name));
    let io = |e: std::io::Error| Failure::new(EXIT_IO, format!("{}: {e}", dir.display()));
    std::fs::create_dir_all(&dir).map_err(io)?;
    let mut files = Vec::new();
    for (output, table) in &result.tables {
        let path = dir.join(output.file_name());
        runner::write_csv(&path, table).map_err(io)?;
        files.push(json!({"file": output.file_name(), "rows": table.rows.len()}));
    }
    let created = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let manifest = json!({
        "scenario": scenario,
        "library_version": env!("CARGO_PKG_VERSION"),
        "created_unix": created,
        "threads": threads,
        "k_max_override": kmax,
        "seed": seed,
        "outputs": files,
        "summary": result.summary,
        "points": result.points,
        "warnings": result.warnings,
    });
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::new(EXIT_IO, e.to_string()))?;
    std::fs::write(dir.join("manifest.json"), text).map_err(io)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(v) = &result.summary.verdict {
        println!("{}: verdict {v}", scenario.name);
    }
    if let Some(t) = &result.summary.calr_trend {
        println!("{}: normalized field {t}", scenario.name);
    }
    println!("wrote {}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = cli.threads.unwrap_or(0);
    if threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_IO);
        }
    }
    let threads = rayon::current_num_threads();
    let result = match cli.command {
        Command::List { json } => list(json),
        Command::Check { scenario, kmax } => load(&scenario).and_then(|s| {
            runner::check(&s, kmax)?;
            println!("{}: ok", s.name);
            Ok(())
        }),
        Command::Run { scenario, out, kmax, seed } => run(&scenario, out, kmax, seed, threads),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
