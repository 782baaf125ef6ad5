//! Command-line front end: `aggregate` merges a recommendation file into one
//! trust weight, `simulate` runs a scenario and writes its event log and
//! metrics.
//!
//! Exit status is 0 on success, 1 when reading or writing a file fails and
//! 2 for malformed input or out-of-range parameters.

mod scenario;

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pso_trust::pso::{self, write_trace_csv, PsoConfig};
use pso_trust::real::format_real;
use pso_trust::trust::load_recommendations;

pub use scenario::{parse_scenario, render_scenario, SCENARIO_KEYS};

pub const EVENTS_FILE: &str = "events.csv";
pub const METRICS_FILE: &str = "metrics.txt";
pub const SCENARIO_FILE: &str = "scenario.txt";
pub const TRACE_FILE: &str = "trace.csv";
pub const WEIGHT_FILE: &str = "trust_weight.txt";

#[derive(Debug, Parser)]
#[command(name = "pso-trust", version, about = "Trust-based admission of cloud clients")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate acquaintance recommendations about one client.
    Aggregate(AggregateArgs),
    /// Run an open-world admission scenario.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct AggregateArgs {
    /// CSV with rows `recommender_id,recommender_trust,reported_value`.
    pub input: PathBuf,
    #[arg(long, default_value_t = pso::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long, default_value_t = pso::DEFAULT_C1)]
    pub c1: f64,
    #[arg(long, default_value_t = pso::DEFAULT_C2)]
    pub c2: f64,
    #[arg(long, default_value_t = pso::DEFAULT_INERTIA)]
    pub inertia: f64,
    #[arg(long, default_value_t = pso::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = pso::DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: u32,
    /// Write the per-iteration trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Also write the weight and trace into this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario file of `key=value` lines.
    pub config: PathBuf,
    /// Overrides the scenario's seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed input or parameters.
    #[error("{0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io { .. } => 1,
        }
    }

    fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn core(path: &Path, err: pso_trust::Error) -> CliError {
        match err {
            pso_trust::Error::Io(source) => CliError::Io {
                path: path.to_path_buf(),
                source,
            },
            other => CliError::Config(format!("{}: {other}", path.display())),
        }
    }
}

/// Parses `args` and runs the command, returning the exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Aggregate(args) => cmd_aggregate(&args, stdout),
        Command::Simulate(args) => cmd_simulate(&args, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

pub fn cmd_aggregate(args: &AggregateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = File::open(&args.input).map_err(CliError::io(&args.input))?;
    let recs = load_recommendations(BufReader::new(file)).map_err(|e| CliError::core(&args.input, e))?;
    let config = PsoConfig {
        c1: args.c1,
        c2: args.c2,
        inertia: args.inertia,
        max_iterations: args.max_iterations,
        epsilon: args.epsilon,
        seed: args.seed,
        ..PsoConfig::default()
    };
    let result = pso::aggregate(&recs, &config).map_err(|e| CliError::core(&args.input, e))?;
    let weight = format_real(result.trust_weight.value());

    let mut traces: Vec<PathBuf> = args.trace.iter().cloned().collect();
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let path = dir.join(WEIGHT_FILE);
        let mut w = create(&path)?;
        writeln!(w, "{weight}").and_then(|_| w.flush()).map_err(CliError::io(&path))?;
        traces.push(dir.join(TRACE_FILE));
    }
    for path in &traces {
        write_trace_csv(&result.trace, create(path)?).map_err(|e| CliError::core(path, e))?;
    }
    writeln!(stdout, "{weight}").map_err(CliError::io(Path::new("<stdout>")))?;
    Ok(())
}

pub fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&args.config).map_err(CliError::io(&args.config))?;
    let mut config = parse_scenario(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let (metrics, log) = pso_trust::run(config.clone()).map_err(|e| CliError::core(&args.config, e))?;

    fs::create_dir_all(&args.out).map_err(CliError::io(&args.out))?;
    let events = args.out.join(EVENTS_FILE);
    log.write_csv(create(&events)?).map_err(|e| CliError::core(&events, e))?;
    let summary = metrics.summary();
    for (name, body) in [(METRICS_FILE, &summary), (SCENARIO_FILE, &render_scenario(&config))] {
        let path = args.out.join(name);
        let mut w = create(&path)?;
        w.write_all(body.as_bytes())
            .and_then(|_| w.flush())
            .map_err(CliError::io(&path))?;
    }
    stdout
        .write_all(summary.as_bytes())
        .map_err(CliError::io(Path::new("<stdout>")))?;
    Ok(())
}
