use clap::{Parser, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use verify::{run_batch, ConfigFile, Registry, RunOptions};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Run verification scenarios and emit a report.
///
/// Exit status: 0 when every task passes or its scenario is rejected at
/// admission, 1 when some identity fails, 2 on a config error.
#[derive(Parser, Debug)]
#[command(name = "verify", version)]
struct Args {
    /// Scenario config (JSON): one scenario or {"scenarios": [...]}.
    #[arg(long, required_unless_present = "list_tasks")]
    config: Option<PathBuf>,
    /// Run only these tasks (repeatable); overrides the config.
    #[arg(long = "task")]
    tasks: Vec<String>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Include per-task timings (makes the JSON run-dependent).
    #[arg(long)]
    timings: bool,
    /// Worker threads for running scenarios in parallel.
    #[arg(long, env = "VERIFY_THREADS")]
    threads: Option<usize>,
    /// List the registered tasks and exit.
    #[arg(long)]
    list_tasks: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let reg = Registry::standard();
    if args.list_tasks {
        for n in reg.names() {
            println!("{n}");
        }
        return ExitCode::SUCCESS;
    }
    if let Some(n) = args.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("verify: thread pool: {e}");
        }
    }
    let Some(path) = &args.config else {
        return ExitCode::from(2);
    };
    let cfgs = match ConfigFile::load(path) {
        Ok(c) => c.scenarios(),
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    let opts = RunOptions { tasks: (!args.tasks.is_empty()).then_some(args.tasks), timings: args.timings };
    let batch = match run_batch(&reg, &cfgs, &opts) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("verify: {e}");
            return ExitCode::from(2);
        }
    };
    let text = match args.format {
        Format::Json => batch.to_json(),
        Format::Text => batch.to_text(),
    };
    match &args.out {
        Some(p) => {
            if let Err(e) = std::fs::write(p, &text) {
                eprintln!("verify: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    if batch.ok() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
