mod config;
mod error;
mod presets;
mod run;
mod table;

use clap::{Parser, Subcommand};
use config::{CommandKind, ExperimentConfig};
use error::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "tanglebounds", version, about = "Probability bounds for clique-induced tangles on Gaussian-mixture data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Worker threads.
    #[arg(long, global = true, env = "TANGLEBOUNDS_THREADS")]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Smallest separable mean distance over a sweep.
    Threshold,
    /// Finite-n probability bounds over a sweep.
    Bound,
    /// Bounds side by side with Monte Carlo estimates.
    Simulate,
    /// Oracle, κ-lemma and moment self-checks.
    Verify,
    /// CSV and SVG for one figure panel from its built-in configuration.
    Reproduce {
        /// fig2a … fig5b
        figure: Option<String>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<Option<ExperimentConfig>, CliError> {
    path.as_deref().map(config::load).transpose()
}

fn write_outputs(out: &Path, stem: &str, cfg: &ExperimentConfig, outcome: &run::Outcome) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    let csv = out.join(format!("{stem}.csv"));
    outcome.table.write_csv(&csv, &cfg.digest(), cfg.seed)?;
    log::info!("wrote {}", csv.display());
    if let Some(plot) = &outcome.plot {
        let mut all = Vec::new();
        let filtered;
        let table = match plot.event {
            Some(ev) => {
                let col = outcome.table.column("event").expect("event column");
                let mut t = table::Table::new(outcome.table.columns.clone());
                for row in outcome.table.rows.iter().filter(|r| r[col] == table::Cell::Text(ev.into())) {
                    t.push(row.clone());
                }
                filtered = t;
                &filtered
            }
            None => &outcome.table,
        };
        for y in &plot.y {
            let mut s = table::series(table, plot.x, y, &plot.group);
            if plot.y.len() > 1 {
                for ser in &mut s {
                    ser.label = format!("{y} {}", ser.label).trim().to_string();
                }
            }
            all.extend(s);
        }
        let svg = out.join(format!("{stem}.svg"));
        table::write_svg(&svg, &plot.title, plot.x, &plot.y.join(" / "), &all)?;
        log::info!("wrote {}", svg.display());
    }
    Ok(())
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::schema("--threads", "must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Internal(e.to_string()))?;
    }
    let loaded = load_config(&cli.config)?;
    let (kind, cfg) = match &cli.command {
        Command::Reproduce { figure } => {
            let from_file = loaded.as_ref().and_then(|c| c.figure.clone());
            let fig = match (figure, from_file) {
                (Some(a), Some(b)) if *a != b => {
                    return Err(CliError::schema("figure", format!("argument `{a}` disagrees with config `{b}`")))
                }
                (Some(a), _) => a.clone(),
                (None, Some(b)) => b,
                (None, None) => return Err(CliError::schema("figure", "reproduce needs a figure id")),
            };
            let cfg = presets::preset(&fig)?;
            (cfg.command.expect("presets name their command"), cfg)
        }
        Command::Threshold => (CommandKind::Threshold, loaded.ok_or_else(|| CliError::schema("--config", "required"))?),
        Command::Bound => (CommandKind::Bound, loaded.ok_or_else(|| CliError::schema("--config", "required"))?),
        Command::Simulate => (CommandKind::Simulate, loaded.ok_or_else(|| CliError::schema("--config", "required"))?),
        Command::Verify => {
            let mut cfg = loaded.unwrap_or_else(ExperimentConfig::empty);
            cfg.seed.get_or_insert(run::VERIFY_SEED);
            cfg.trials.get_or_insert(run::VERIFY_TRIALS);
            (CommandKind::Verify, cfg)
        }
    };
    cfg.validate(kind)?;
    let outcome = match kind {
        CommandKind::Threshold => run::threshold(&cfg)?,
        CommandKind::Bound => run::bound(&cfg, false)?,
        CommandKind::Simulate => run::bound(&cfg, true)?,
        CommandKind::Verify => run::verify(&cfg)?,
        CommandKind::Reproduce => unreachable!("presets resolve to a concrete command"),
    };
    let stem = cfg.output.clone().unwrap_or_else(|| kind.name().to_string());
    write_outputs(&cli.out, &stem, &cfg, &outcome)?;
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { log::LevelFilter::Info } else { log::LevelFilter::Warn };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
