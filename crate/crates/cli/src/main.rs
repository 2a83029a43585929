use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod config;
mod error;
mod output;
mod params;
mod studies;
mod table;

use config::Config;
use error::Result;
use table::{Table, TableName};

/// Option prices and hedges with CVaR initial-margin funding costs.
#[derive(Debug, Parser)]
#[command(name = "margin-bsde", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Flat `key = value` file; omitted keys take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price and delta table for one product family.
    Table {
        #[arg(value_enum)]
        name: TableName,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Implied volatility smile of the IM prices.
    Smile(RunArgs),
    /// Gap norms and fitted orders in the margin horizon.
    Convergence(RunArgs),
    /// Empirical CVaR of a sample file with one number per line.
    Cvar {
        sample: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        alpha: f64,
        /// Optional CSV destination; the result is always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>) -> Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

fn emit(table: &Table, out: &Path) -> Result<()> {
    output::write_csv(out, &table.header, &table.rows)?;
    eprintln!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Table { name, run } => {
            let table = table::run(name, &load(run.config.as_deref())?, run.seed)?;
            emit(&table, &run.out)
        }
        Command::Smile(run) => emit(&studies::smile(&load(run.config.as_deref())?)?, &run.out),
        Command::Convergence(run) => {
            emit(&studies::convergence(&load(run.config.as_deref())?)?, &run.out)
        }
        Command::Cvar { sample, alpha, out } => {
            let data = studies::read_sample(&sample)?;
            let (result, table) = studies::cvar(&data, alpha)?;
            println!("cvar = {:.6}", result.cvar);
            println!("minimizer = {:.6}", result.minimizer_x);
            match out {
                Some(path) => emit(&table, &path),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("margin-bsde: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
