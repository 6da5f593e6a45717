use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use featnet::correlation::CorrelationMode;
use featnet::dataset::{load_dataset, Format, PartitionSelector};
use featnet::graph::{GammaMethod, DEFAULT_HUB_THRESHOLD};
use featnet::pipeline::{
    export_matrices, run_eval_on, run_pipeline, stability_check_on, PipelineConfig, RunManifest,
};
use featnet::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Correlation-network feature analysis of categorical datasets.
#[derive(Parser)]
#[command(name = "featnet", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the feature networks and write hubs, communities, trees and the manifest.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare a hub-feature classifier with a PCA baseline.
    Eval {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated feature names; derived from the all-rows tree when omitted.
        #[arg(long, value_delimiter = ',', conflicts_with = "manifest")]
        features: Option<Vec<String>>,
        /// Take the hub features from a manifest written by `analyze`.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Comma-separated split seeds; overrides --seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        pca_components: usize,
        #[arg(long, default_value_t = 0.8)]
        train_fraction: f64,
        /// Boosting rounds.
        #[arg(long, default_value_t = 200)]
        rounds: usize,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rerun the analysis on random row subsets and compare hub sets.
    Stability {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 5)]
        subsamples: usize,
        #[arg(long, default_value_t = 0.8)]
        fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the correlation, distance and similarity matrices as CSV.
    Export {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Dataset in CSV or ARFF form.
    #[arg(long)]
    input: PathBuf,
    /// csv, arff or auto.
    #[arg(long, default_value = "auto")]
    format: Format,
    /// Comma-separated subset of all, legitimate, phishing.
    #[arg(long, value_delimiter = ',', default_value = "all,legitimate,phishing")]
    partitions: Vec<PartitionSelector>,
    /// tie_aware or literal_formula.
    #[arg(long, default_value = "tie_aware")]
    corr_mode: CorrelationMode,
    /// loglog_ols or mle.
    #[arg(long, default_value = "loglog_ols")]
    gamma_method: GammaMethod,
    /// Nodes with degree above this are hubs.
    #[arg(long, default_value_t = DEFAULT_HUB_THRESHOLD)]
    hub_threshold: usize,
}

impl CommonArgs {
    fn config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(&self.input);
        cfg.format = self.format;
        cfg.partitions = self.partitions.clone();
        cfg.correlation_mode = self.corr_mode;
        cfg.gamma_method = self.gamma_method;
        cfg.hub_threshold = self.hub_threshold;
        cfg
    }
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_data_error() {
            Failure::Data(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Data(format!("{}: {e}", p.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn analyze(common: &CommonArgs, out: PathBuf) -> Result<u8, Failure> {
    let mut cfg = common.config();
    cfg.out_dir = Some(out);
    let manifest = run_pipeline(&cfg)?;
    for e in &manifest.entries {
        match &e.error {
            Some(err) => eprintln!("{}: failed: {err}", e.partition),
            None => {
                let hubs = e.hubs.as_ref().map_or(String::new(), |h| {
                    h.entries
                        .iter()
                        .map(|x| format!("{}({})", x.feature, x.degree))
                        .collect::<Vec<_>>()
                        .join(", ")
                });
                let gamma = e
                    .gamma_for(cfg.gamma_method)
                    .map_or("n/a".to_string(), |g| format!("{g:.4}"));
                println!("{}: {} rows, gamma {gamma}, hubs: {hubs}", e.partition, e.n_rows);
                for w in &e.warnings {
                    eprintln!("{}: warning: {w}", e.partition);
                }
            }
        }
    }
    Ok(match manifest.failed() {
        0 => 0,
        n if n == manifest.entries.len() => EXIT_DATA,
        _ => EXIT_PARTIAL,
    })
}

fn manifest_features(path: &Path) -> Result<Vec<String>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let manifest = RunManifest::from_json(&text)?;
    let entry = manifest
        .entry(PartitionSelector::All)
        .ok_or_else(|| Failure::Data("manifest has no entry for partition all".into()))?;
    let features = entry.core_hub_features();
    if features.is_empty() {
        return Err(Failure::Data("manifest lists no hubs for partition all".into()));
    }
    Ok(features)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Analyze { common, out } => analyze(&common, out),
        Command::Eval {
            common,
            features,
            manifest,
            seeds,
            seed,
            pca_components,
            train_fraction,
            rounds,
            out,
        } => {
            let mut cfg = common.config();
            cfg.eval.seeds = seeds.unwrap_or_else(|| vec![seed]);
            cfg.eval.pca_components = pca_components;
            cfg.eval.train_fraction = train_fraction;
            cfg.eval.params.n_rounds = rounds;
            cfg.eval.hub_features = match (features, manifest) {
                (Some(f), _) => Some(f),
                (None, Some(path)) => Some(manifest_features(&path)?),
                (None, None) => None,
            };
            let table = load_dataset(&cfg.input, cfg.format)?;
            let report = run_eval_on(&table, &cfg)?;
            eprintln!(
                "hub features {:?}: {:.4} (sd {:.4}); pca-{}: {:.4} (sd {:.4}); delta {:+.4}",
                report.hub_features,
                report.hub_accuracy.mean,
                report.hub_accuracy.std_dev,
                pca_components,
                report.baseline_accuracy.mean,
                report.baseline_accuracy.std_dev,
                report.delta
            );
            let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            write_or_print(out.as_deref(), &json)?;
            Ok(0)
        }
        Command::Stability {
            common,
            subsamples,
            fraction,
            seed,
            out,
        } => {
            let cfg = common.config();
            let table = load_dataset(&cfg.input, cfg.format)?;
            let report = stability_check_on(&table, &cfg, subsamples, fraction, seed)?;
            for p in &report.partitions {
                eprintln!(
                    "{}: mean Jaccard vs full {:.3}, pairwise {:.3}",
                    p.partition, p.mean_jaccard_vs_full, p.mean_pairwise_jaccard
                );
            }
            let json = serde_json::to_string_pretty(&report).map_err(Error::from)?;
            write_or_print(out.as_deref(), &json)?;
            Ok(0)
        }
        Command::Export { common, out } => {
            let cfg = common.config();
            cfg.validate()?;
            let table = load_dataset(&cfg.input, cfg.format)?;
            export_matrices(&table, &cfg, &out)?;
            Ok(0)
        }
    }
}
