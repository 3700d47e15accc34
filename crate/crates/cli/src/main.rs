use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use harmrec_cli::{
    read_bundle_summary, run_representer_convergence, run_single_recovery, run_table, with_threads,
    write_bundle_from_config, ConfigError, ExperimentConfig, ExperimentKind, FunctionalKind,
};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "harmrec",
    version,
    about = "Recovery of Poisson solutions from linear measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON experiment configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Allow levels above 7 in tables.
    #[arg(long)]
    long_run: bool,
    /// Worker threads.
    #[arg(long)]
    threads: Option<usize>,
    /// Measurement functional: gaussian or point.
    #[arg(long, value_parser = parse_functional)]
    functional: Option<FunctionalKind>,
    /// Comma-separated sensor counts.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Comma-separated mesh levels.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    /// Relative residual tolerance of the sparse solves.
    #[arg(long)]
    tol: Option<f64>,
    /// Measure data on the interpolant at this fine level instead of the closed form.
    #[arg(long)]
    data_level: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Recovery error table, CSV.
    Table(Common),
    /// Representer convergence against a reference level, CSV.
    Conv {
        #[command(flatten)]
        common: Common,
        /// Reference level.
        #[arg(long)]
        reference_n: Option<u32>,
    },
    /// One recovery, JSON report.
    Recover {
        #[command(flatten)]
        common: Common,
        /// Comma-separated measurement vector.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        data: Option<Vec<f64>>,
        /// Uniform noise level added to the data.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write or inspect offline bundle files.
    #[command(subcommand)]
    Bundle(BundleCommand),
}

#[derive(Subcommand)]
enum BundleCommand {
    /// Run the offline stage for one (n, m) and write the bundle to --out.
    Write(Common),
    /// Read a bundle, print a JSON summary and time online solves.
    Read {
        path: PathBuf,
        #[arg(long, default_value_t = 0)]
        repeat: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_functional(s: &str) -> Result<FunctionalKind, String> {
    match s {
        "gaussian" => Ok(FunctionalKind::Gaussian),
        "point" => Ok(FunctionalKind::Point),
        _ => Err(format!("unknown functional {s:?}")),
    }
}

fn resolve(common: &Common, kind: ExperimentKind) -> anyhow::Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    config.experiment = kind;
    if common.out.is_some() {
        config.output = common.out.clone();
    }
    config.long_run |= common.long_run;
    if common.threads.is_some() {
        config.threads = common.threads;
    }
    if let Some(f) = common.functional {
        config.functional = f;
    }
    if let Some(m) = &common.m {
        config.m_list = m.clone();
    }
    if let Some(n) = &common.n {
        config.n_list = n.clone();
    }
    if let Some(tol) = common.tol {
        config.tol = tol;
    }
    if let Some(level) = common.data_level {
        config.data_source = harmrec_cli::DataSource::FineMesh { level };
    }
    Ok(config)
}

fn emit(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Table(common) => {
            let config = resolve(&common, ExperimentKind::Table)?;
            config.validate()?;
            let table = with_threads(config.threads, || run_table(&config))?;
            emit(config.output.as_deref(), &table.to_csv())
        }
        Command::Conv {
            common,
            reference_n,
        } => {
            let mut config = resolve(&common, ExperimentKind::RepresenterConvergence)?;
            if common.n.is_none() && common.config.is_none() {
                config.n_list = (4..=8).collect();
            }
            if let Some(r) = reference_n {
                config.reference_n = r;
            }
            config.validate()?;
            let report = with_threads(config.threads, || run_representer_convergence(&config))??;
            emit(config.output.as_deref(), &report.to_csv())
        }
        Command::Recover {
            common,
            data,
            noise,
            seed,
        } => {
            let mut config = resolve(&common, ExperimentKind::SingleRecovery)?;
            if data.is_some() {
                config.data = data;
            }
            if noise.is_some() {
                config.noise = noise;
            }
            if let Some(s) = seed {
                config.seed = s;
            }
            config.validate()?;
            let report = with_threads(config.threads, || run_single_recovery(&config))??;
            emit(
                config.output.as_deref(),
                &(serde_json::to_string_pretty(&report)? + "\n"),
            )
        }
        Command::Bundle(BundleCommand::Write(common)) => {
            let config = resolve(&common, ExperimentKind::SingleRecovery)?;
            config.validate()?;
            let path = config
                .output
                .clone()
                .ok_or_else(|| ConfigError("bundle write needs --out".into()))?;
            let bundle =
                with_threads(config.threads, || write_bundle_from_config(&config, &path))??;
            eprintln!(
                "wrote {} (level {}, {} sensors)",
                path.display(),
                bundle.mesh.level(),
                bundle.len()
            );
            Ok(())
        }
        Command::Bundle(BundleCommand::Read { path, repeat, out }) => {
            let summary = read_bundle_summary(&path, repeat)?;
            emit(
                out.as_deref(),
                &(serde_json::to_string_pretty(&summary)? + "\n"),
            )
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use harmrec_core::Error;
    if err.downcast_ref::<ConfigError>().is_some() || err.downcast_ref::<clap::Error>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config(_) | Error::Domain { .. } | Error::Format(_)) => 2,
        Some(_) => 3,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
