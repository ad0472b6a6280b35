use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use maglab_cli::{emit_report, exit, run, ExperimentConfig, Format};

#[derive(Parser)]
#[command(
    name = "maglab",
    version,
    about = "Run magnetic ground-state experiments from a JSON config"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for independent rows.
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Check the config against the schema and exit.
        #[arg(long)]
        validate: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    #[value(name = "csv+svg")]
    CsvSvg,
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return code(if e.use_stderr() {
                exit::CONFIG
            } else {
                exit::OK
            });
        }
    };
    let Command::Run {
        config,
        out,
        threads,
        format,
        validate,
    } = cli.command;
    let bytes = match std::fs::read(&config) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return code(exit::CONFIG);
        }
    };
    let cfg = match std::str::from_utf8(&bytes)
        .map_err(|e| vec![e.to_string()])
        .and_then(ExperimentConfig::from_json)
    {
        Ok(c) => c,
        Err(errs) => {
            eprintln!("config invalid: {}", config.display());
            for e in errs {
                eprintln!("  {e}");
            }
            return code(exit::CONFIG);
        }
    };
    if threads == 0 {
        eprintln!("config invalid: --threads must be at least 1");
        return code(exit::CONFIG);
    }
    if validate {
        println!(
            "config ok: {} ({})",
            config.display(),
            cfg.experiment.kind()
        );
        return code(exit::OK);
    }
    let dir = match out.or_else(|| cfg.output_dir.clone()) {
        Some(d) => d,
        None => {
            eprintln!("config invalid: no output directory (use --out or output_dir)");
            return code(exit::CONFIG);
        }
    };
    let format = match format {
        FormatArg::Csv => Format::Csv,
        FormatArg::CsvSvg => Format::CsvSvg,
    };
    let result = match run(&cfg, threads) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return code(exit::INTERNAL);
        }
    };
    if let Err(e) = emit_report(&dir, &cfg, &bytes, &result, format, threads) {
        eprintln!("error: writing reports to {}: {e}", dir.display());
        return code(exit::INTERNAL);
    }
    for n in &result.notes {
        println!("{n}");
    }
    let rows: usize = result.tables.iter().map(|t| t.rows).sum();
    println!(
        "{}: {rows} rows, {} flagged, {} failed checks -> {}",
        cfg.experiment.kind(),
        result.flagged,
        result.failed_checks,
        dir.display()
    );
    if result.flagged > 0 || result.failed_checks > 0 {
        code(exit::FLAGGED)
    } else {
        code(exit::OK)
    }
}
