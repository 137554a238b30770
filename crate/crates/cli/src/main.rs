use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbfem_cli::{commands, config, CliError, Format, Order, Overrides, Report, RunConfig};

/// Convertible bond pricing with penalty finite elements.
#[derive(Debug, Parser)]
#[command(name = "cbfem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; defaults are used for anything it leaves out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Output encoding; `price` defaults to json, everything else to csv.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    #[arg(long, global = true, value_enum)]
    order: Option<Order>,

    /// Number of elements; also sets n_t unless that is given.
    #[arg(long = "n-elements", global = true)]
    n_elements: Option<usize>,

    #[arg(long = "n-t", global = true)]
    n_t: Option<usize>,

    #[arg(long, global = true)]
    theta: Option<f64>,

    /// Penalty weight.
    #[arg(long, global = true)]
    rho: Option<f64>,

    /// Comma-separated mesh sizes for `converge` and `compare-fdm`.
    #[arg(long, global = true, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Bond value today at S = S_int.
    Price,
    /// U and V at every time level and node.
    Surface,
    /// Delta and Gamma at every time level.
    Greeks,
    /// Price under mesh refinement with n_t = n_E.
    Converge,
    /// Manufactured-solution error and order study.
    Mms,
    /// Finite elements against finite differences.
    CompareFdm,
}

impl Cli {
    fn overrides(&self) -> Overrides {
        Overrides {
            order: self.order,
            n_elements: self.n_elements,
            n_t: self.n_t,
            theta: self.theta,
            rho: self.rho,
            sizes: self.sizes.clone(),
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, CliError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?,
        None => String::new(),
    };
    config::load(&text, &cli.overrides())
}

fn emit(
    report: &Report,
    cfg: &RunConfig,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let io_err = |source| CliError::Io {
                path: path.display().to_string(),
                source,
            };
            let file = File::create(path).map_err(io_err)?;
            let mut w = BufWriter::new(file);
            report.write(format, cfg, &mut w)?;
            w.flush().map_err(io_err)
        }
        None => report.write(format, cfg, io::stdout().lock()),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = load_config(cli)?;
    let report = match cli.command {
        Command::Price => commands::price(&cfg)?,
        Command::Surface => commands::surface(&cfg)?,
        Command::Greeks => commands::greeks_table(&cfg)?,
        Command::Converge => commands::converge(&cfg)?,
        Command::Mms => commands::mms(&cfg)?,
        Command::CompareFdm => commands::compare_fdm(&cfg)?,
    };
    if let Some(w) = report.summary.get("warnings").and_then(|w| w.as_array()) {
        for msg in w {
            eprintln!("warning: {}", msg.as_str().unwrap_or_default());
        }
    }
    let default_format = match cli.command {
        Command::Price => Format::Json,
        _ => Format::Csv,
    };
    let format = cli.format.unwrap_or(default_format);
    emit(&report, &cfg, format, cli.out.as_ref())?;
    if let (Command::Price, Some(_)) = (cli.command, &cli.out) {
        if let Some(p) = commands::summary_number(&report, "price") {
            println!("U(t=0, S={}) = {p:.17}", cfg.market.s_int);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
