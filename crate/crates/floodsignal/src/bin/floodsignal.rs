//! Thin command-line front end over the library pipeline stages.

use std::path::PathBuf;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use floodsignal::artifact::{digest_bytes, ArtifactMeta};
use floodsignal::evaluator::LooOptions;
use floodsignal::features::NormalizationPolicy;
use floodsignal::forest::ForestParams;
use floodsignal::ingest::DayWindow;
use floodsignal::pipeline::{self, CountFilter, LabelingOptions, PipelineConfig, VolumeSource};
use floodsignal::seed::{self, stream};
use floodsignal::synthgen;

#[derive(Parser)]
#[command(name = "floodsignal", version, about = "Flood-event detection from relevance-scored postings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by stages that stamp artifact headers without a config file.
#[derive(Args)]
struct MetaArgs {
    /// Master seed recorded in artifact headers (and driving any randomness).
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Optional config file whose digest is recorded in artifact headers.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl MetaArgs {
    fn meta(&self) -> anyhow::Result<ArtifactMeta> {
        let digest = match &self.config {
            Some(path) => digest_bytes(
                &std::fs::read(path).with_context(|| format!("reading {}", path.display()))?,
            ),
            None => "none".to_string(),
        };
        Ok(ArtifactMeta::new(self.seed, digest))
    }
}

fn parse_window(s: &str) -> Result<DayWindow, String> {
    let (start, end) = s.split_once(':').ok_or("expected START:END")?;
    DayWindow::new(
        start.parse().map_err(|e| format!("start: {e}"))?,
        end.parse().map_err(|e| format!("end: {e}"))?,
    )
    .map_err(|e| e.to_string())
}

fn parse_policy(s: &str) -> Result<NormalizationPolicy, String> {
    NormalizationPolicy::parse(s).map_err(|e| e.to_string())
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic posting corpus from a config file.
    Synth {
        /// Config with a [synth] section (or a bare synth config).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Parse postings, apply the six-hour validity rule, and bundle by region-day.
    Ingest {
        #[arg(long)]
        postings: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        /// Observation window as START:END (inclusive UTC dates).
        #[arg(long, value_parser = parse_window)]
        window: DayWindow,
        /// Fail on malformed postings instead of skipping them.
        #[arg(long)]
        strict: bool,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Compute the 73-feature daily vectors.
    Featurize {
        #[arg(long)]
        bundles: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        validity: PathBuf,
        #[arg(long, value_parser = parse_policy, default_value = "consistent")]
        policy: NormalizationPolicy,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Derive weak labels from ground-truth events and emit the training set.
    Label {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        volumes: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        /// Series used for peak finding: total or flood-weighted.
        #[arg(long, default_value = "total")]
        volume_source: String,
        /// Count used by the >100-postings filter: all or flood-classified.
        #[arg(long, default_value = "all")]
        count_filter: String,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Fit feature selection and the random forest.
    Train {
        #[arg(long)]
        training: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        forest: ForestArgs,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Score feature rows with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Stratified k-fold cross-validation with ROC artifacts.
    Evaluate {
        #[arg(long)]
        training: PathBuf,
        #[arg(long, default_value_t = 3)]
        folds: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        forest: ForestArgs,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Leave-one-event-out experiment and final report.
    Loo {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        events: PathBuf,
        #[arg(long)]
        volumes: PathBuf,
        #[arg(long)]
        regions: PathBuf,
        /// Count used by the >100-postings filter: all or flood-classified.
        #[arg(long, default_value = "all")]
        count_filter: String,
        /// Count a hit anywhere in the whole event window, not just [d_b, d_e].
        #[arg(long)]
        widen_hit_range: bool,
        /// Optional CSV of external forecasts to join into the report.
        #[arg(long)]
        external: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        forest: ForestArgs,
        #[command(flatten)]
        meta: MetaArgs,
    },
    /// Run every stage end to end from one config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

/// Forest hyperparameters for stages that fit or refit models.
#[derive(Args)]
struct ForestArgs {
    #[arg(long, default_value_t = 1000)]
    trees: usize,
    #[arg(long, default_value_t = 2)]
    max_depth: usize,
    #[arg(long, default_value_t = 40)]
    k_features: usize,
    #[arg(long, default_value_t = 0.2)]
    threshold: f64,
    /// Balance bootstrap samples between classes.
    #[arg(long)]
    balanced: bool,
}

impl ForestArgs {
    fn params(&self, master_seed: u64) -> ForestParams {
        ForestParams {
            n_trees: self.trees,
            max_depth: self.max_depth,
            k_features: self.k_features,
            mtry: None,
            threshold: self.threshold,
            seed: seed::derive(master_seed, stream::FOREST),
            balanced_bootstrap: self.balanced,
        }
    }
}

fn parse_volume_source(s: &str) -> anyhow::Result<VolumeSource> {
    match s {
        "total" => Ok(VolumeSource::Total),
        "flood-weighted" => Ok(VolumeSource::FloodWeighted),
        other => Err(anyhow!("unknown volume source {other:?} (expected total or flood-weighted)")),
    }
}

fn parse_count_filter(s: &str) -> anyhow::Result<CountFilter> {
    match s {
        "all" => Ok(CountFilter::All),
        "flood-classified" => Ok(CountFilter::FloodClassified),
        other => Err(anyhow!("unknown count filter {other:?} (expected all or flood-classified)")),
    }
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Synth { config, out } => {
            let (pipeline_config, digest) = PipelineConfig::load(&config)?;
            let synth_config = pipeline_config
                .synth_config()
                .ok_or_else(|| anyhow!("config has no [synth] section"))?;
            let meta = ArtifactMeta::new(pipeline_config.seed, digest);
            let summary = synthgen::generate(&synth_config, &out, &meta)?;
            eprintln!(
                "wrote {} postings ({} drawn, {} deleted by outages) to {}",
                summary.emitted_postings,
                summary.drawn_postings,
                summary.deleted_postings,
                out.display()
            );
        }
        Command::Ingest { postings, regions, window, strict, out, meta } => {
            let summary =
                pipeline::cmd_ingest(&postings, &regions, window, strict, &out, &meta.meta()?)?;
            eprintln!(
                "{} postings accepted, {} rejected; {}/{} valid days",
                summary.accepted, summary.rejected, summary.valid_days, summary.total_days
            );
        }
        Command::Featurize { bundles, regions, baseline, validity, policy, out, meta } => {
            let rows = pipeline::cmd_featurize(
                &bundles, &regions, &baseline, &validity, policy, &out, &meta.meta()?,
            )?;
            eprintln!("{} feature rows written to {}", rows.len(), out.display());
        }
        Command::Label {
            features,
            events,
            volumes,
            regions,
            volume_source,
            count_filter,
            out,
            meta,
        } => {
            let options = LabelingOptions {
                volume_source: parse_volume_source(&volume_source)?,
                count_filter: parse_count_filter(&count_filter)?,
            };
            pipeline::cmd_label(
                &features, &events, &volumes, &regions, options, &out, &meta.meta()?,
            )?;
        }
        Command::Train { training, out, forest, meta } => {
            let params = forest.params(meta.seed);
            pipeline::cmd_train(&training, &params, &out)?;
            eprintln!("model written to {}", out.display());
        }
        Command::Predict { model, features, out, meta } => {
            pipeline::cmd_predict(&model, &features, &out, &meta.meta()?)?;
            eprintln!("scores written to {}", out.display());
        }
        Command::Evaluate { training, folds, out, forest, meta } => {
            let params = forest.params(meta.seed);
            let cv = pipeline::cmd_evaluate(&training, &params, folds, &out, &meta.meta()?)?;
            eprintln!("AUC {:.4}, pooled recall {:.4}", cv.auc, cv.pooled_recall);
        }
        Command::Loo {
            features,
            labels,
            events,
            volumes,
            regions,
            count_filter,
            widen_hit_range,
            external,
            out,
            forest,
            meta,
        } => {
            let params = forest.params(meta.seed);
            let labeling = LabelingOptions {
                volume_source: VolumeSource::Total,
                count_filter: parse_count_filter(&count_filter)?,
            };
            let summary = pipeline::cmd_loo(
                &features,
                &labels,
                &events,
                &volumes,
                &regions,
                &params,
                labeling,
                LooOptions { widen_hit_range },
                external.as_deref(),
                &out,
                &meta.meta()?,
            )?;
            eprintln!(
                "hit rate {:.3} over {} events ({} skipped)",
                summary.outcome.hit_rate,
                summary.outcome.results.len(),
                summary.outcome.skipped.len()
            );
        }
        Command::Run { config, out } => {
            pipeline::run_pipeline(&config, &out)?;
        }
    }
    Ok(())
}
