use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use spapt::harness::{self, ApplyMode, ChannelName, DetectMethod, OutputFormat, RunConfig};
use spapt::tomography::{DEFAULT_SEED, DEFAULT_SHOTS};
use spapt::Error;

#[derive(Parser, Debug)]
#[command(
    name = "spapt",
    version,
    about = "SPA-PT simulation and entanglement detection"
)]
struct Cli {
    /// Shots per measurement setting (trajectories for apply --mode trajectory).
    #[arg(long, global = true, default_value_t = DEFAULT_SHOTS)]
    shots: u64,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => OutputFormat::Json,
            Format::Csv => OutputFormat::Csv,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a state file: bell KIND | werner p=P | mems p=P | rho_family p=P alpha=A | file PATH.
    Prepare { family: String, params: Vec<String> },
    /// Apply a channel to a state file and report the output spectrum.
    Apply {
        state: PathBuf,
        channel: String,
        #[arg(long, default_value = "exact")]
        mode: String,
        /// Where to write the output state file.
        #[arg(long)]
        state_out: Option<PathBuf>,
    },
    /// Entanglement verdict: ppt, spa_spectrum, f_hat_ideal or f_hat_sampled.
    Detect { state: PathBuf, method: String },
    /// Minimum eigenvalues for the four Bell states by three methods.
    Table1,
    /// Sweep of the state families in the tangle / linear-entropy plane.
    Fig3,
    /// Run the invariant suites; nonzero exit if any fails.
    Selftest,
}

fn run(cli: Cli) -> Result<(), Error> {
    let (name, params): (&str, Vec<String>) = match &cli.command {
        Command::Prepare { family, params } => {
            let mut all = vec![family.clone()];
            all.extend(params.iter().cloned());
            ("prepare", all)
        }
        Command::Apply {
            state,
            channel,
            mode,
            ..
        } => (
            "apply",
            vec![
                state.display().to_string(),
                channel.clone(),
                format!("mode={mode}"),
            ],
        ),
        Command::Detect { state, method } => {
            ("detect", vec![state.display().to_string(), method.clone()])
        }
        Command::Table1 => ("table1", vec![]),
        Command::Fig3 => ("fig3", vec![]),
        Command::Selftest => ("selftest", vec![]),
    };
    let mut cfg = RunConfig::new(name)
        .with_shots(cli.shots)
        .with_seed(cli.seed)
        .with_params(&params);
    cfg.format = cli.format.into();
    cfg.out = cli.out.clone();
    if cfg.shots_per_setting == 0 {
        return Err(Error::InvalidInput("--shots must be positive".into()));
    }
    let out = cli.out.as_deref();

    let report = match cli.command {
        Command::Prepare { family, params } => {
            let sf = harness::prepare(&family, &params)?;
            return harness::emit(&sf.to_json()?, out);
        }
        Command::Apply {
            state,
            channel,
            mode,
            state_out,
        } => {
            let channel: ChannelName = channel.parse()?;
            let mode: ApplyMode = mode.parse()?;
            let rho = harness::load_state(&state)?;
            let outcome = harness::apply(&rho, channel, mode, &cfg)?;
            if let Some(path) = state_out {
                let mut meta = std::collections::BTreeMap::new();
                meta.insert("channel".into(), channel.name().into());
                meta.insert("mode".into(), mode.name().into());
                meta.insert("source".into(), state.display().to_string());
                meta.insert("seed".into(), cfg.seed.to_string());
                meta.insert(
                    "shots_per_setting".into(),
                    cfg.shots_per_setting.to_string(),
                );
                harness::StateFile::from_density(&outcome.state, meta).save(&path)?;
            }
            outcome.report
        }
        Command::Detect { state, method } => {
            let method: DetectMethod = method.parse()?;
            let rho = harness::load_state(&state)?;
            harness::detect(&rho, method, &cfg)?
        }
        Command::Table1 => harness::table1(&cfg)?,
        Command::Fig3 => harness::fig3(&cfg)?,
        Command::Selftest => {
            let (report, results) = harness::selftest(&cfg);
            for r in &results {
                let status = if r.passed { "PASS" } else { "FAIL" };
                eprintln!("{status} {:<26} {:>9.3} s  {}", r.name, r.seconds, r.detail);
            }
            harness::emit(&report.render(cfg.format)?, out)?;
            let failed: Vec<&str> = results
                .iter()
                .filter(|r| !r.passed)
                .map(|r| r.name)
                .collect();
            if !failed.is_empty() {
                return Err(Error::Validation(format!(
                    "failing suites: {}",
                    failed.join(", ")
                )));
            }
            return Ok(());
        }
    };
    harness::emit(&report.render(cfg.format)?, out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("spapt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
