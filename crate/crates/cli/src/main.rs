use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Point-to-point ICP registration and nearest-scan basket prediction.
#[derive(Parser, Debug)]
#[command(name = "logscan", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct IcpArgs {
    /// Convergence threshold on the mse decrease (mm²)
    #[arg(long, default_value_t = 1e-8)]
    pub tau: f64,
    /// Iteration cap per alignment
    #[arg(long = "max-iters", default_value_t = 50)]
    pub max_iters: usize,
    /// Translate the moving scan onto the model centroid before iterating
    #[arg(long = "pre-align")]
    pub pre_align: bool,
    /// Use every n-th point of the moving scan
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Args, Debug, Clone)]
pub struct MetricArgs {
    /// Floor applied to quantities in the ratio scores
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    /// Keep products where both real and predicted quantities are zero
    #[arg(long = "no-filter")]
    pub no_filter: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SplitArgs {
    #[arg(long = "train-frac", default_value_t = 0.6)]
    pub train_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Remove logs whose basket is all zeros before splitting
    #[arg(long = "drop-empty")]
    pub drop_empty: bool,
}

#[derive(Args, Debug, Clone)]
pub struct PredictorArgs {
    /// Predictor(s): icp, mean, knn (comma separated where several are allowed)
    #[arg(long, value_delimiter = ',', default_value = "icp")]
    pub predictor: Vec<String>,
    /// Neighbors for the knn baseline
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Worker threads (defaults to available parallelism)
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Align SCAN_A onto SCAN_B and print the transform
    Register {
        scan_a: PathBuf,
        scan_b: PathBuf,
        #[command(flatten)]
        icp: IcpArgs,
        /// Write per-iteration mse as csv ("-" for stdout)
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Predict baskets for the logs of a test manifest
    Predict {
        train_manifest: PathBuf,
        test_manifest: PathBuf,
        /// Basket table for the training manifest
        #[arg(long)]
        baskets: Option<PathBuf>,
        #[command(flatten)]
        predictor: PredictorArgs,
        #[command(flatten)]
        icp: IcpArgs,
        /// Output csv (stdout when omitted)
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Score a prediction table against the true baskets
    Evaluate {
        predictions: PathBuf,
        truth: PathBuf,
        #[command(flatten)]
        metrics: MetricArgs,
        /// Value of the predictor column
        #[arg(long, default_value = "model")]
        label: String,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Repeated random-split experiment over a full dataset
    Experiment {
        manifest: PathBuf,
        #[arg(long)]
        baskets: Option<PathBuf>,
        #[command(flatten)]
        split: SplitArgs,
        #[command(flatten)]
        predictor: PredictorArgs,
        #[command(flatten)]
        icp: IcpArgs,
        #[command(flatten)]
        metrics: MetricArgs,
        #[arg(long, default_value = "csv")]
        format: String,
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Also write each run's predictions here
        #[arg(long = "predictions-dir")]
        predictions_dir: Option<PathBuf>,
    },
    /// Write the train/test manifests of one run, plus basket tables
    Split {
        manifest: PathBuf,
        #[arg(long)]
        baskets: Option<PathBuf>,
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long, default_value_t = 0)]
        run: usize,
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
    },
    /// Generate a synthetic dataset of log scans
    Synth {
        #[arg(long = "out-dir")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 30)]
        prototypes: usize,
        #[arg(long, default_value_t = 7)]
        copies: usize,
        #[arg(long, default_value_t = 19)]
        products: usize,
        #[arg(long = "empty-prototypes", default_value_t = 0)]
        empty_prototypes: usize,
        #[arg(long = "min-points", default_value_t = 200)]
        min_points: usize,
        #[arg(long = "max-points", default_value_t = 400)]
        max_points: usize,
        #[arg(long = "max-rotation-deg", default_value_t = 5.0)]
        max_rotation_deg: f64,
        #[arg(long = "max-translation", default_value_t = 25.0)]
        max_translation: f64,
        #[arg(long, default_value_t = 0.5)]
        jitter: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Register {
            scan_a,
            scan_b,
            icp,
            trace,
        } => commands::register(&scan_a, &scan_b, &icp, trace.as_deref()),
        Command::Predict {
            train_manifest,
            test_manifest,
            baskets,
            predictor,
            icp,
            out,
        } => commands::predict(
            &train_manifest,
            &test_manifest,
            baskets.as_deref(),
            &predictor,
            &icp,
            out.as_deref(),
        ),
        Command::Evaluate {
            predictions,
            truth,
            metrics,
            label,
            format,
            out,
        } => commands::evaluate(
            &predictions,
            &truth,
            &metrics,
            &label,
            &format,
            out.as_deref(),
        ),
        Command::Experiment {
            manifest,
            baskets,
            split,
            predictor,
            icp,
            metrics,
            format,
            out,
            predictions_dir,
        } => commands::experiment(commands::ExperimentArgs {
            manifest: &manifest,
            baskets: baskets.as_deref(),
            split: &split,
            predictor: &predictor,
            icp: &icp,
            metrics: &metrics,
            format: &format,
            out: out.as_deref(),
            predictions_dir: predictions_dir.as_deref(),
        }),
        Command::Split {
            manifest,
            baskets,
            split,
            run,
            out_dir,
        } => commands::split(&manifest, baskets.as_deref(), &split, run, &out_dir),
        Command::Synth {
            out_dir,
            prototypes,
            copies,
            products,
            empty_prototypes,
            min_points,
            max_points,
            max_rotation_deg,
            max_translation,
            jitter,
            seed,
        } => commands::synth(
            &out_dir,
            &logscan::synthetic::SyntheticSpec {
                prototypes,
                copies_per_prototype: copies,
                products,
                points: (min_points, max_points),
                max_rotation_deg,
                max_translation_mm: max_translation,
                jitter_mm: jitter,
                empty_prototypes,
                seed,
            },
        ),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
