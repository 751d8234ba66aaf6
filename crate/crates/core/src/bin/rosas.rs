use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rosas::cli::{self, RunConfig, SynthKind, DEFAULT_LABEL_COLUMN};
use rosas::losses::AblationMode;

#[derive(Parser)]
#[command(
    name = "rosas",
    version,
    about = "Semi-supervised anomaly detection for tabular data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory.
    #[arg(long, env = cli::OUT_DIR_ENV, default_value = cli::DEFAULT_OUT_DIR)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Split, label, contaminate, normalize and train; writes model.rosas,
    /// history.json, test.csv and train.manifest.json.
    Train {
        #[arg(long)]
        data: PathBuf,
        /// Separate test set; disables the internal split.
        #[arg(long)]
        test_data: Option<PathBuf>,
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_col: String,
        /// TOML file with [train] and [protocol] tables. Flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        labeled_anomalies: Option<usize>,
        /// Target anomaly share of the unlabeled pool, or "none" to keep it.
        #[arg(long)]
        contamination: Option<String>,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        batches_per_epoch: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// full, discrete_targets, plain_regression, no_consistency or no_regularizer.
        #[arg(long)]
        ablation: Option<AblationMode>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Score a labeled CSV with a model and print AUC-ROC and AUC-PR.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_col: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Write a `row,score` CSV for every row of the input.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Column ignored if present.
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_col: String,
        /// Score file; defaults to <out>/scores.csv.
        #[arg(long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        out: OutDir,
    },
    /// Generate synthetic data: toy, clustered, scattered or novel.
    Synthesize {
        #[arg(long, default_value = "toy")]
        kind: SynthKind,
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long)]
        anomaly_fraction: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_col: String,
        #[command(flatten)]
        out: OutDir,
    },
    /// Grid of independent seeded runs over contamination levels and labeled
    /// budgets. Writes sweep.csv with columns
    /// setting_kind,setting_value,repeat,seed,auc_pr,auc_roc,status.
    Sweep {
        /// Input CSV; toy data is generated per cell when omitted.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 5000)]
        toy_rows: usize,
        #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
        label_col: String,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated contamination levels, e.g. 0,0.02,0.04,0.08.
        #[arg(long, value_delimiter = ',')]
        contamination: Vec<f64>,
        /// Comma-separated labeled anomaly budgets, e.g. 10,30,90.
        #[arg(long, value_delimiter = ',')]
        budgets: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long)]
        epochs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        out: OutDir,
    },
}

fn load_config(path: Option<&PathBuf>) -> rosas::Result<RunConfig> {
    path.map(RunConfig::load)
        .transpose()
        .map(Option::unwrap_or_default)
}

fn run(command: Command) -> rosas::Result<()> {
    match command {
        Command::Train {
            data,
            test_data,
            label_col,
            config,
            labeled_anomalies,
            contamination,
            epochs,
            batches_per_epoch,
            seed,
            ablation,
            out,
        } => {
            let mut config = load_config(config.as_ref())?;
            if let Some(n) = labeled_anomalies {
                config.protocol.labeled_anomalies = n;
            }
            if let Some(c) = contamination {
                config.protocol.contamination = match c.as_str() {
                    "none" => None,
                    v => Some(v.parse().map_err(|_| {
                        rosas::Error::InvalidParameter(format!("bad contamination '{v}'"))
                    })?),
                };
            }
            if let Some(e) = epochs {
                config.train.epochs = e;
            }
            if let Some(b) = batches_per_epoch {
                config.train.batches_per_epoch = b;
            }
            if let Some(s) = seed {
                config.train.seed = s;
            }
            if let Some(a) = ablation {
                config.train.ablation = a;
            }
            let outcome = cli::cmd_train(&cli::TrainRequest {
                data,
                label_column: label_col,
                test_data,
                out: out.out.clone(),
                config,
            })?;
            match outcome.test_report {
                Some(report) => println!("test {report}"),
                None => println!("trained; no labeled test rows to report on"),
            }
            println!("wrote {}", out.out.display());
        }
        Command::Evaluate {
            model,
            data,
            label_col,
            out,
        } => {
            let (report, _) = cli::cmd_evaluate(&cli::EvaluateRequest {
                model,
                data,
                label_column: label_col,
                out: out.out,
            })?;
            println!("{}", serde_json::to_string(&report)?);
        }
        Command::Score {
            model,
            data,
            label_col,
            output,
            out,
        } => {
            let output = output.unwrap_or_else(|| out.out.join("scores.csv"));
            let (scores, _) = cli::cmd_score(&cli::ScoreRequest {
                model,
                data,
                label_column: Some(label_col),
                output: output.clone(),
                out: out.out,
            })?;
            println!("scored {} rows into {}", scores.len(), output.display());
        }
        Command::Synthesize {
            kind,
            n,
            anomaly_fraction,
            seed,
            label_col,
            out,
        } => {
            for path in cli::cmd_synthesize(&cli::SynthesizeRequest {
                kind,
                n,
                anomaly_fraction,
                seed,
                label_column: label_col,
                out: out.out,
            })? {
                println!("wrote {}", path.display());
            }
        }
        Command::Sweep {
            data,
            toy_rows,
            label_col,
            config,
            contamination,
            budgets,
            repeats,
            epochs,
            seed,
            out,
        } => {
            let mut config = load_config(config.as_ref())?;
            if let Some(e) = epochs {
                config.train.epochs = e;
            }
            if let Some(s) = seed {
                config.train.seed = s;
            }
            let rows = cli::cmd_sweep(&cli::SweepRequest {
                data,
                toy_rows,
                label_column: label_col,
                contamination_levels: contamination,
                labeled_budgets: budgets,
                repeats,
                config,
                out: out.out.clone(),
            })?;
            println!(
                "{} cells written to {}",
                rows.len(),
                out.out.join(cli::SWEEP_FILE).display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", cli::error_record(&e));
            ExitCode::FAILURE
        }
    }
}
