use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use ergokit_cli::{execute, tsv_rows, CliError, Options, Workspace};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Out {
    Json,
    Tsv,
}

/// Exact analysis of eventually periodic piecewise translations of the real line.
#[derive(Parser, Debug)]
#[command(name = "ergokit", version)]
struct Cli {
    /// validate | op | metric | construct | analyze | report
    command: String,
    /// Workspace file (JSON).
    workspace: PathBuf,
    /// Operation and names, e.g. `separator T C`.
    args: Vec<String>,
    #[arg(long, value_enum, default_value = "json", global = true)]
    out: Out,
    /// Step budget for dynamics; overrides ERGOKIT_BUDGET and the workspace option.
    #[arg(long)]
    budget: Option<u64>,
    /// Scalar bound for rokhlin and factor.
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    /// Truncation for the weak metric.
    #[arg(long)]
    trunc: Option<u64>,
    /// Emit component rows `start<TAB>end<TAB>kind` instead of the report.
    #[arg(long)]
    plot: bool,
    /// Half-width of the plotted window.
    #[arg(long, default_value_t = 16)]
    plot_range: i64,
}

fn render(v: &Value, out: Out) -> String {
    match out {
        Out::Json => serde_json::to_string_pretty(v).unwrap_or_default() + "\n",
        Out::Tsv => {
            let mut s = String::new();
            tsv_rows(v, "", &mut s);
            s
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let opts = Options {
        budget: cli.budget,
        eps: cli.eps.clone(),
        trunc: cli.trunc,
        plot: cli.plot,
        plot_range: Some(cli.plot_range),
    };
    let run = || -> Result<_, CliError> {
        let path = cli.workspace.display().to_string();
        let text = std::fs::read_to_string(&cli.workspace).map_err(|e| CliError::Io(path, e.to_string()))?;
        let ws = Workspace::parse(&text)?;
        execute(&ws, &cli.command, &cli.args, &opts)
    };
    match run() {
        Ok(outcome) => {
            if let Some(rows) = outcome.plot {
                print!("{rows}");
            } else {
                let mut report = outcome.report;
                report["timing_us"] = json!(start.elapsed().as_micros() as u64);
                print!("{}", render(&report, cli.out));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("ergokit: {}: {e}", e.code());
            let mut echo = vec![json!(cli.command)];
            echo.extend(cli.args.iter().map(|a| json!(a)));
            let report = json!({ "command": echo, "error": e.to_json() });
            print!("{}", render(&report, cli.out));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
