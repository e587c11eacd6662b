mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use commands::Output;
use config::{CommandKind, Format, Params, RunConfig};

const TOOL: &str = concat!("mzi-fisher ", env!("CARGO_PKG_VERSION"));

/// Fisher information of a Mach-Zehnder interferometer fed with a coherent
/// state and a squeezed vacuum, with finite photon-number resolution.
#[derive(Debug, Parser)]
#[command(name = "mzi-fisher", version)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
    #[command(flatten)]
    params: Params,
    /// Output file, written atomically; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format; CSV by default, JSON for `crb`.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use mzi_fisher::Error;
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidParameter { .. } | Error::PhaseMismatch { .. }) => 2,
        Some(Error::ResourceGuard { .. }) => 4,
        _ => 3,
    }
}

fn execute(cfg: &RunConfig) -> anyhow::Result<()> {
    cfg.validate()?;
    let result = commands::run(cfg)?;
    let text = match (result, cfg.format()) {
        (Output::Tables(tables), Format::Csv) => {
            let comment = format!("{TOOL} {} {}", cfg.command.name(), serde_json::to_string(cfg)?);
            output::render_csv(&comment, &tables)
        }
        (Output::Tables(tables), Format::Json) => {
            let doc = json!({ "tool": TOOL, "config": cfg, "panels": output::tables_json(&tables) });
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        (Output::Record(mut value), _) => {
            value["tool"] = json!(TOOL);
            value["config"] = json!(cfg);
            serde_json::to_string_pretty(&value)? + "\n"
        }
    };
    output::write_output(cfg.output_path.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = RunConfig {
        command: cli.command,
        params: cli.params,
        output_path: cli.out,
        format: cli.format,
    };
    match execute(&cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
