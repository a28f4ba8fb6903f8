//! `qpa`: runs noisy privacy-amplification experiments and writes CSV.

use std::collections::HashMap;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qpa_core::experiment::{self, CsvTable, RunSpec, ThetaGrid, VerifyOptions};
use qpa_core::{ChannelKind, Wire};

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "qpa",
    version,
    about = "Exact density-matrix experiments on noisy quantum privacy amplification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Noiseless protocol trace: n, F, 1-F, step probability, survival, efficiency.
    Ideal(RunArgs),
    /// Protocol trace with one noise channel on one wire.
    Noisy(RunArgs),
    /// 1-F after --steps rounds over a linear theta grid, per channel.
    Sweep(RunArgs),
    /// Noise strength reaching --target after --steps rounds, for all nine channels.
    Table1(RunArgs),
    /// Checks channel representations, the noiseless oracle and the cloner identities.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Default, Clone)]
struct RunArgs {
    /// Intrusion parameter in [0, 1].
    #[arg(long)]
    f_alpha: Option<f64>,
    /// Channel name, `none`, or (sweep only) a comma-separated list.
    #[arg(long)]
    channel: Option<String>,
    /// Noise strength.
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    /// Number of protocol rounds (default 10 for ideal/noisy, 5 otherwise).
    #[arg(long)]
    steps: Option<usize>,
    /// Wire carrying the noise: alice-ctl, bob-ctl, alice-tgt or bob-tgt.
    #[arg(long)]
    location: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    theta_min: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta_max: Option<f64>,
    #[arg(long)]
    theta_count: Option<usize>,
    /// Target 1-F for table1.
    #[arg(long)]
    target: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File of key=value lines using the flag names; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, hide = true)]
    corrupt_kraus_normalization: bool,
}

/// A failure with its exit code and one-line message.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<qpa_core::Error> for Failure {
    fn from(e: qpa_core::Error) -> Self {
        let code = if e.is_numerical() { EXIT_NUMERICAL } else { EXIT_USAGE };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn read_config(path: &Path) -> Result<RunArgs, Failure> {
    let text =
        fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut values = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{}:{}: expected key=value", path.display(), lineno + 1)))?;
        values.insert(
            key.trim().trim_start_matches("--").replace('_', "-"),
            value.trim().to_string(),
        );
    }

    fn take<T: std::str::FromStr>(values: &mut HashMap<String, String>, key: &str) -> Result<Option<T>, Failure> {
        values
            .remove(key)
            .map(|v| {
                v.parse()
                    .map_err(|_| Failure::usage(format!("config key {key}: invalid value {v:?}")))
            })
            .transpose()
    }

    let args = RunArgs {
        f_alpha: take(&mut values, "f-alpha")?,
        channel: take(&mut values, "channel")?,
        theta: take(&mut values, "theta")?,
        steps: take(&mut values, "steps")?,
        location: take(&mut values, "location")?,
        theta_min: take(&mut values, "theta-min")?,
        theta_max: take(&mut values, "theta-max")?,
        theta_count: take(&mut values, "theta-count")?,
        target: take(&mut values, "target")?,
        out: take(&mut values, "out")?,
        config: None,
    };
    if let Some(key) = values.keys().min() {
        return Err(Failure::usage(format!("unknown config key {key:?}")));
    }
    Ok(args)
}

impl RunArgs {
    fn overriding(self, base: RunArgs) -> RunArgs {
        RunArgs {
            f_alpha: self.f_alpha.or(base.f_alpha),
            channel: self.channel.or(base.channel),
            theta: self.theta.or(base.theta),
            steps: self.steps.or(base.steps),
            location: self.location.or(base.location),
            theta_min: self.theta_min.or(base.theta_min),
            theta_max: self.theta_max.or(base.theta_max),
            theta_count: self.theta_count.or(base.theta_count),
            target: self.target.or(base.target),
            out: self.out.or(base.out),
            config: None,
        }
    }

    fn into_spec(self, default_steps: usize) -> Result<(RunSpec, Option<PathBuf>), Failure> {
        let base = match &self.config {
            Some(path) => read_config(path)?,
            None => RunArgs::default(),
        };
        let args = self.overriding(base);
        let defaults = RunSpec::default();
        let grid = ThetaGrid::default();
        let channels = match args.channel.as_deref().map(str::trim) {
            None | Some("none") => Vec::new(),
            Some(list) => list
                .split(',')
                .map(str::parse::<ChannelKind>)
                .collect::<Result<_, _>>()?,
        };
        let location = match args.location {
            Some(w) => w.parse::<Wire>()?,
            None => defaults.location,
        };
        let spec = RunSpec {
            f_alpha: args.f_alpha.unwrap_or(defaults.f_alpha),
            channels,
            theta: args.theta.unwrap_or(defaults.theta),
            steps: args.steps.unwrap_or(default_steps),
            location,
            grid: ThetaGrid {
                min: args.theta_min.unwrap_or(grid.min),
                max: args.theta_max.unwrap_or(grid.max),
                count: args.theta_count.unwrap_or(grid.count),
            },
            target: args.target.unwrap_or(defaults.target),
        };
        Ok((spec, args.out))
    }
}

fn open_output(out: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(path) => {
            Box::new(BufWriter::new(File::create(path).map_err(|e| {
                Failure::usage(format!("cannot create {}: {e}", path.display()))
            })?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn write_table(table: &CsvTable, out: Option<&Path>) -> Result<(), Failure> {
    table.write_to(open_output(out)?)?;
    Ok(())
}

fn run_table(
    args: RunArgs,
    default_steps: usize,
    cmd: fn(&RunSpec) -> qpa_core::Result<CsvTable>,
) -> Result<(), Failure> {
    let (spec, out) = args.into_spec(default_steps)?;
    write_table(&cmd(&spec)?, out.as_deref())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Ideal(args) => run_table(args, 10, experiment::cmd_ideal),
        Command::Noisy(args) => run_table(args, 10, experiment::cmd_noisy),
        Command::Sweep(args) => run_table(args, 5, experiment::cmd_sweep),
        Command::Table1(args) => run_table(args, 5, experiment::cmd_table1),
        Command::Verify(args) => {
            let report = experiment::verify(VerifyOptions {
                corrupt_kraus_normalization: args.corrupt_kraus_normalization,
            })?;
            let mut w = open_output(args.out.as_deref())?;
            writeln!(w, "{report}")
                .and_then(|_| w.flush())
                .map_err(|e| Failure::usage(format!("write failed: {e}")))?;
            if report.all_passed() {
                Ok(())
            } else {
                let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
                Err(Failure {
                    code: EXIT_VERIFY,
                    message: format!("verification failed: {}", names.join(", ")),
                })
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("invalid arguments");
            eprintln!("qpa: {}", first.trim_start_matches("error: ").trim());
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("qpa: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
