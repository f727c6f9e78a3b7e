//! `eap` command line. Every `run` flag can also be set through an `EAP_`
//! environment variable (`EAP_GAMMA`, `EAP_MAX_ITER`, ...); flags win.
//!
//! Exit codes: 0 success (for `run`: converged), 2 `run` stopped at the
//! iteration cap without converging (results are still written), 1 error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eap::config::{parse_preference, parse_scenario};
use eap::report::{compare, plot_rows, write_compare, write_plot_data};
use eap::runner::{read_result, EXIT_ERROR};
use eap::{save_csv, Algorithm, CliError, ColumnMapping, DatasetSource, RunConfig};
use eap_core::{EapConfig, PreferenceMode};

#[derive(Parser)]
#[command(name = "eap", version, about = "Evolutionary affinity propagation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster one dataset and write result.json, assignments.csv and metrics.csv.
    Run(RunArgs),
    /// Tabulate result files: one row per (dataset, algorithm).
    Compare(CompareArgs),
    /// Write a synthetic benchmark dataset as CSV.
    Generate(GenerateArgs),
    /// Check result files against the result schema.
    Validate {
        #[arg(required = true)]
        results: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    Ap,
    Eap,
    EapNocn,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ap => Algorithm::Ap,
            AlgoArg::Eap => Algorithm::Eap,
            AlgoArg::EapNocn => Algorithm::EapNoCn,
        }
    }
}

#[derive(Args)]
struct SourceArgs {
    /// Dataset CSV: point_id, t (from 1), features, optional label.
    #[arg(long, env = "EAP_CSV", conflicts_with = "synthetic", required_unless_present = "synthetic")]
    csv: Option<PathBuf>,
    /// separated, colliding, cluster-change or third-cluster.
    #[arg(long, env = "EAP_SYNTHETIC", value_parser = parse_scenario)]
    synthetic: Option<eap_core::synthgen::ScenarioKind>,
    #[arg(long, env = "EAP_SEED", default_value_t = 0)]
    seed: u64,
    /// Points of a synthetic dataset (default 200).
    #[arg(long, env = "EAP_N_POINTS")]
    n_points: Option<usize>,
    /// Time steps of a synthetic dataset (scenario default otherwise).
    #[arg(long, env = "EAP_STEPS")]
    steps: Option<usize>,
    #[arg(long, env = "EAP_ID_COLUMN", default_value = "point_id")]
    id_column: String,
    #[arg(long, env = "EAP_TIME_COLUMN", default_value = "t")]
    time_column: String,
    /// Used if present in the header.
    #[arg(long, env = "EAP_LABEL_COLUMN", default_value = "label")]
    label_column: String,
    /// Comma-separated feature columns; all remaining columns by default.
    #[arg(long, env = "EAP_FEATURE_COLUMNS", value_delimiter = ',')]
    feature_columns: Option<Vec<String>>,
    /// Standardise CSV features over the whole horizon (synthetic data always is).
    #[arg(long, env = "EAP_NORMALIZE")]
    normalize: bool,
}

impl SourceArgs {
    fn source(&self) -> DatasetSource {
        match (&self.csv, self.synthetic) {
            (Some(path), _) => DatasetSource::Csv {
                path: path.clone(),
                mapping: ColumnMapping {
                    id: self.id_column.clone(),
                    time: self.time_column.clone(),
                    label: Some(self.label_column.clone()),
                    features: self.feature_columns.clone(),
                },
                normalize: self.normalize,
            },
            (None, Some(kind)) => DatasetSource::Synthetic {
                kind,
                seed: self.seed,
                n_points: self.n_points,
                n_steps: self.steps,
            },
            (None, None) => unreachable!("clap requires a dataset source"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, env = "EAP_ALGO", value_enum, default_value = "eap")]
    algo: AlgoArg,
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, env = "EAP_GAMMA", default_value_t = 2.0)]
    gamma: f64,
    #[arg(long, env = "EAP_OMEGA", default_value_t = 1.0)]
    omega: f64,
    #[arg(long, env = "EAP_LAMBDA", default_value_t = 0.9)]
    lambda: f64,
    #[arg(long, env = "EAP_MAX_ITER", default_value_t = 500)]
    max_iter: usize,
    #[arg(long, env = "EAP_CONV_WINDOW", default_value_t = 20)]
    conv_window: usize,
    #[arg(long, env = "EAP_MIN_CLUSTER_SIZE", default_value_t = 1)]
    min_cluster_size: usize,
    /// per-time-min, global-min or const:X.
    #[arg(long, env = "EAP_PREFERENCE", default_value = "per-time-min", value_parser = parse_preference)]
    preference: PreferenceMode,
    #[arg(long, env = "EAP_OUT", default_value = ".")]
    out: PathBuf,
    /// Also write plot.csv (t, algorithm, rand).
    #[arg(long, env = "EAP_EMIT_PLOT_DATA")]
    emit_plot_data: bool,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        let mut cfg = RunConfig::new(self.algo.into(), self.source.source());
        cfg.params = EapConfig {
            gamma: self.gamma,
            omega: self.omega,
            lambda: self.lambda,
            max_iter: self.max_iter,
            conv_window: self.conv_window,
            min_cluster_size: self.min_cluster_size,
            ..EapConfig::default()
        };
        cfg.preference = self.preference;
        cfg.out = self.out.clone();
        cfg.emit_plot_data = self.emit_plot_data;
        cfg
    }
}

#[derive(Args)]
struct CompareArgs {
    #[arg(required = true)]
    results: Vec<PathBuf>,
    #[arg(long, default_value = "compare.csv")]
    out: PathBuf,
    /// Also write seed-averaged per-step Rand curves (single dataset only).
    #[arg(long)]
    plot_data: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_scenario)]
    synthetic: eap_core::synthgen::ScenarioKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    /// Write the raw draws instead of the standardised features.
    #[arg(long)]
    raw: bool,
    #[arg(long)]
    out: PathBuf,
}

fn warn(msg: &str) {
    eprintln!("warning: {msg}");
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Run(args) => {
            let cfg = args.config();
            let (outcome, warnings) = eap::run(&cfg)?;
            warnings.iter().for_each(|w| warn(w));
            let m = &outcome.doc.metrics;
            println!(
                "{} on {}: {} iterations, converged {}, distinct exemplars {}, mean Rand {}",
                cfg.algorithm,
                outcome.doc.dataset.name,
                outcome.doc.iterations,
                outcome.doc.converged,
                m.summary,
                m.mean_rand.map_or("n/a".into(), |r| format!("{r:.4}"))
            );
            Ok(outcome.exit_code())
        }
        Command::Compare(args) => {
            let docs = args.results.iter().map(|p| read_result(p)).collect::<Result<Vec<_>, _>>()?;
            let rows = compare(&docs)?;
            write_compare(&rows, eap::runner::create(&args.out)?, &args.out)?;
            if let Some(path) = &args.plot_data {
                let (rows, warnings) = plot_rows(&docs)?;
                warnings.iter().for_each(|w| warn(w));
                write_plot_data(&rows, eap::runner::create(path)?, path)?;
            }
            Ok(0)
        }
        Command::Generate(args) => {
            let source = DatasetSource::Synthetic {
                kind: args.synthetic,
                seed: args.seed,
                n_points: args.n_points,
                n_steps: args.steps,
            };
            let ds = if args.raw { source.scenario().expect("synthetic").generate() } else { source.load()? };
            save_csv(&ds, &args.out)?;
            Ok(0)
        }
        Command::Validate { results } => {
            for path in &results {
                read_result(path)?;
                println!("{}: valid", path.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
