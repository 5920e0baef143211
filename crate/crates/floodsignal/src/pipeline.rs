//! Stage orchestration and the intermediate file formats shared between
//! subcommands: validity.csv, bundles.jsonl, volumes.csv, scores.csv, and
//! the run configuration. `run_pipeline` executes
//! synth -> ingest -> featurize -> label -> train -> evaluate -> loo over
//! a single config file; each stage is also callable on its own so the
//! subcommands compose on disk.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::artifact::{create_with_header, digest_bytes, ArtifactMeta};
use crate::error::{Error, Result};
use crate::evaluator::{
    self, loo_events, render_report, CvMetrics, LooOptions, LooOutcome,
};
use crate::features::{
    self, read_features_csv, write_features_csv, FeatureRow, Label, NormalizationPolicy,
};
use crate::forest::{Forest, ForestParams};
use crate::ingest::{self, DayValidity, DayWindow, RegionDayBundle, RegionMeta};
use crate::labeler::{
    self, apply_labels, label_dataset, ranges_from_labels, read_events, training_filter,
    GroundTruthEvent, Labeling,
};
use crate::seed::{self, stream};
use crate::synthgen::{self, SynthConfig, SynthEvent, SynthRegion};

/// Which per-day series drives peak finding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeSource {
    /// Total collected postings.
    #[default]
    Total,
    /// Postings weighted by their flood-relevance probability.
    FloodWeighted,
}

/// Which count feeds the >100-postings training filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CountFilter {
    /// All collected postings.
    #[default]
    All,
    /// Only postings with relevance above one half.
    FloodClassified,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelingOptions {
    pub volume_source: VolumeSource,
    pub count_filter: CountFilter,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalOptions {
    pub folds: usize,
    pub widen_hit_range: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { folds: 3, widen_hit_range: false }
    }
}

/// Inline synthetic-corpus section of a pipeline config; seed and window
/// are inherited from the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSection {
    pub regions: Vec<SynthRegion>,
    #[serde(default)]
    pub events: Vec<SynthEvent>,
    #[serde(default)]
    pub outages: Vec<crate::synthgen::Outage>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub window: DayWindow,
    #[serde(default)]
    pub policy: NormalizationPolicy,
    #[serde(default)]
    pub strict_ingest: bool,
    #[serde(default)]
    pub forest: ForestParams,
    #[serde(default)]
    pub labeling: LabelingOptions,
    #[serde(default)]
    pub evaluation: EvalOptions,
    #[serde(default)]
    pub synth: Option<SynthSection>,
    #[serde(default)]
    pub external_forecasts: Option<PathBuf>,
}

impl PipelineConfig {
    /// Load a config file and the digest of its exact bytes.
    pub fn load(path: &Path) -> Result<(PipelineConfig, String)> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let config: PipelineConfig = toml::from_str(
            std::str::from_utf8(&bytes)
                .map_err(|e| Error::Config { field: "<config>".into(), reason: e.to_string() })?,
        )
        .map_err(|e| Error::Config { field: "<config>".into(), reason: e.to_string() })?;
        config.forest.validate()?;
        Ok((config, digest_bytes(&bytes)))
    }

    /// Forest parameters with the tree seed derived from the master seed,
    /// so one knob controls the whole run.
    pub fn forest_params(&self) -> ForestParams {
        let mut params = self.forest.clone();
        params.seed = seed::derive(self.seed, stream::FOREST);
        params
    }

    pub fn synth_config(&self) -> Option<SynthConfig> {
        self.synth.as_ref().map(|section| SynthConfig {
            seed: self.seed,
            window: self.window,
            regions: section.regions.clone(),
            events: section.events.clone(),
            outages: section.outages.clone(),
        })
    }
}

/// Per-cell posting volume in the three countings the config can select.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VolumeCell {
    pub total: u64,
    pub flood_weighted: f64,
    pub flood_classified: u64,
}

pub type VolumeTable = BTreeMap<(String, NaiveDate), VolumeCell>;

pub fn volumes_by_region(table: &VolumeTable, source: VolumeSource) -> BTreeMap<String, labeler::DayVolumes> {
    let mut out: BTreeMap<String, labeler::DayVolumes> = BTreeMap::new();
    for ((region, day), cell) in table {
        let value = match source {
            VolumeSource::Total => cell.total,
            VolumeSource::FloodWeighted => cell.flood_weighted.round() as u64,
        };
        out.entry(region.clone()).or_default().insert(*day, value);
    }
    out
}

pub fn raw_counts(table: &VolumeTable, filter: CountFilter) -> BTreeMap<(String, NaiveDate), u64> {
    table
        .iter()
        .map(|((region, day), cell)| {
            let value = match filter {
                CountFilter::All => cell.total,
                CountFilter::FloodClassified => cell.flood_classified,
            };
            ((region.clone(), *day), value)
        })
        .collect()
}

fn write_volumes_csv(table: &VolumeTable, path: &Path, meta: &ArtifactMeta) -> Result<()> {
    let mut writer = create_with_header(path, meta)?;
    let io_err = |e| Error::io(path, e);
    writeln!(writer, "day,region_id,total,flood_weighted,flood_classified").map_err(io_err)?;
    for ((region, day), cell) in table {
        writeln!(
            writer,
            "{day},{region},{},{},{}",
            cell.total, cell.flood_weighted, cell.flood_classified
        )
        .map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

pub fn read_volumes_csv(path: &Path) -> Result<VolumeTable> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut table = VolumeTable::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let bad = |reason: String| Error::MalformedRecord { line: idx + 2, reason };
        let day: NaiveDate = record[0].parse().map_err(|e| bad(format!("day: {e}")))?;
        let cell = VolumeCell {
            total: record[2].parse().map_err(|e| bad(format!("total: {e}")))?,
            flood_weighted: record[3].parse().map_err(|e| bad(format!("flood_weighted: {e}")))?,
            flood_classified: record[4]
                .parse()
                .map_err(|e| bad(format!("flood_classified: {e}")))?,
        };
        table.insert((record[1].to_string(), day), cell);
    }
    Ok(table)
}

fn read_validity_csv(path: &Path) -> Result<(DayWindow, BTreeMap<NaiveDate, DayValidity>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let bad = |reason: String| Error::MalformedRecord { line: idx + 2, reason };
        let day: NaiveDate = record[0].parse().map_err(|e| bad(format!("day: {e}")))?;
        let valid: bool = record[1].parse().map_err(|e| bad(format!("valid: {e}")))?;
        let max_gap_minutes: i64 =
            record[2].parse().map_err(|e| bad(format!("max_gap_minutes: {e}")))?;
        map.insert(day, DayValidity { valid, max_gap_minutes });
    }
    let (Some((&start, _)), Some((&end, _))) = (map.iter().next(), map.iter().next_back()) else {
        return Err(Error::EmptyWindow);
    };
    Ok((DayWindow::new(start, end)?, map))
}

fn read_bundles_jsonl(path: &Path) -> Result<Vec<RegionDayBundle>> {
    use std::io::BufRead;
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bundles = Vec::new();
    for (idx, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        bundles.push(
            serde_json::from_str(trimmed)
                .map_err(|e| Error::MalformedRecord { line: idx + 1, reason: e.to_string() })?,
        );
    }
    Ok(bundles)
}

#[derive(Debug)]
pub struct IngestSummary {
    pub accepted: usize,
    pub rejected: usize,
    pub valid_days: usize,
    pub total_days: usize,
}

/// ingest: parse postings, apply the six-hour rule, and write
/// validity.csv, bundles.jsonl, and volumes.csv (valid days only).
pub fn cmd_ingest(
    postings_path: &Path,
    regions_path: &Path,
    window: DayWindow,
    strict: bool,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<IngestSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let metas = ingest::read_regions(regions_path)?;
    let known_region = |id: &str| metas.iter().any(|m| m.region_id == id);

    let parsed = ingest::read_postings_file(postings_path, strict)?;
    let mut rejected = parsed.rejected;
    let mut postings = parsed.postings;
    let before = postings.len();
    postings.retain(|p| known_region(&p.region_id));
    rejected += before - postings.len();
    if rejected > 0 {
        eprintln!("warning: {rejected} postings rejected");
    }

    let validity = ingest::day_validity(&postings, window)?;
    let valid_days = validity.values().filter(|v| v.valid).count();

    let validity_path = out_dir.join("validity.csv");
    let mut writer = create_with_header(&validity_path, meta)?;
    let io_err = |e| Error::io(&validity_path, e);
    writeln!(
        writer,
        "# valid days: {valid_days}/{} ({:.1}%)",
        validity.len(),
        100.0 * valid_days as f64 / validity.len() as f64
    )
    .map_err(io_err)?;
    writeln!(writer, "day,valid,max_gap_minutes").map_err(io_err)?;
    for (day, verdict) in &validity {
        writeln!(writer, "{day},{},{}", verdict.valid, verdict.max_gap_minutes).map_err(io_err)?;
    }
    writer.flush().map_err(io_err)?;

    let accepted = postings.len();
    let bundles = ingest::group_region_day(postings, &validity);

    let bundles_path = out_dir.join("bundles.jsonl");
    let mut writer = create_with_header(&bundles_path, meta)?;
    for bundle in &bundles {
        let line = serde_json::to_string(bundle)
            .map_err(|e| Error::Other(format!("bundle serialization: {e}")))?;
        writeln!(writer, "{line}").map_err(|e| Error::io(&bundles_path, e))?;
    }
    writer.flush().map_err(|e| Error::io(&bundles_path, e))?;

    let mut volumes = VolumeTable::new();
    for bundle in bundles.iter().filter(|b| b.valid) {
        let cell = VolumeCell {
            total: bundle.postings.len() as u64,
            flood_weighted: bundle.postings.iter().map(|p| p.relevance).sum(),
            flood_classified: bundle.postings.iter().filter(|p| p.relevance > 0.5).count() as u64,
        };
        volumes.insert((bundle.region_id.clone(), bundle.day), cell);
    }
    write_volumes_csv(&volumes, &out_dir.join("volumes.csv"), meta)?;

    Ok(IngestSummary { accepted, rejected, valid_days, total_days: validity.len() })
}

/// featurize: compute the 73-vector for every (region, valid day) cell.
pub fn cmd_featurize(
    bundles_path: &Path,
    regions_path: &Path,
    baseline_path: &Path,
    validity_path: &Path,
    policy: NormalizationPolicy,
    out_path: &Path,
    meta: &ArtifactMeta,
) -> Result<Vec<FeatureRow>> {
    let bundles = read_bundles_jsonl(bundles_path)?;
    let mut metas = ingest::read_regions(regions_path)?;
    let baseline = synthgen::read_baseline(baseline_path)?;
    let (window, validity) = read_validity_csv(validity_path)?;

    for meta in &mut metas {
        if let Some(&rate) = baseline.get(&meta.region_id) {
            meta.expected_daily_postings = rate;
        }
    }
    let (usable, unusable): (Vec<RegionMeta>, Vec<RegionMeta>) =
        metas.into_iter().partition(|m| m.expected_daily_postings > 0.0);
    for meta in &unusable {
        eprintln!("warning: region {} has zero expected rate, skipped", meta.region_id);
    }

    let rows = features::featurize(&bundles, &usable, &validity, window, policy)?;
    write_features_csv(&rows, out_path, meta)?;
    Ok(rows)
}

#[derive(Debug)]
pub struct LabelSummary {
    pub labeling: Labeling,
    pub rows: Vec<FeatureRow>,
    pub training_rows: Vec<FeatureRow>,
}

/// label: derive True/False/Undefined labels from ground-truth events and
/// write labels.csv plus the filtered training set.
pub fn cmd_label(
    features_path: &Path,
    events_path: &Path,
    volumes_path: &Path,
    regions_path: &Path,
    options: LabelingOptions,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<LabelSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rows = read_features_csv(features_path)?;
    let events = read_events(events_path)?;
    let volumes = read_volumes_csv(volumes_path)?;
    let metas = ingest::read_regions(regions_path)?;

    let (Some(first), Some(last)) = (
        rows.iter().map(|r| r.day).min(),
        rows.iter().map(|r| r.day).max(),
    ) else {
        return Err(Error::NotEnoughRows("no feature rows to label".into()));
    };
    let window = DayWindow::new(first, last)?;

    let by_region = volumes_by_region(&volumes, options.volume_source);
    let labeling = label_dataset(&metas, window, &events, &by_region);
    for event_id in &labeling.skipped_events {
        eprintln!("warning: event {event_id} has no valid volume data, excluded");
    }
    labeler::write_labels_csv(&labeling, &out_dir.join("labels.csv"), meta)?;

    apply_labels(&mut rows, &labeling);
    let counts = raw_counts(&volumes, options.count_filter);
    let training_rows = training_filter(&rows, &metas, &counts);
    if training_rows.is_empty() {
        eprintln!("warning: training filter removed every row");
    }
    let true_rows = training_rows.iter().filter(|r| r.label == Label::True).count();
    eprintln!(
        "labeled {} training rows ({} True, {:.1}%)",
        training_rows.len(),
        true_rows,
        if training_rows.is_empty() { 0.0 } else { 100.0 * true_rows as f64 / training_rows.len() as f64 }
    );
    write_features_csv(&training_rows, &out_dir.join("training.csv"), meta)?;
    Ok(LabelSummary { labeling, rows, training_rows })
}

/// train: fit feature selection and the forest on a labeled training set.
pub fn cmd_train(training_path: &Path, params: &ForestParams, model_path: &Path) -> Result<Forest> {
    let rows = read_features_csv(training_path)?;
    let x: Vec<Vec<f64>> = rows.iter().map(|r| r.values.clone()).collect();
    let y: Vec<bool> = rows.iter().map(|r| r.label == Label::True).collect();
    let forest = Forest::fit(&x, &y, params)?;
    forest.save(model_path)?;
    Ok(forest)
}

/// predict: score rows with a saved model and write scores.csv.
pub fn cmd_predict(
    model_path: &Path,
    features_path: &Path,
    out_path: &Path,
    meta: &ArtifactMeta,
) -> Result<()> {
    let forest = Forest::load(model_path)?;
    let rows = read_features_csv(features_path)?;
    let mut writer = create_with_header(out_path, meta)?;
    let io_err = |e| Error::io(out_path, e);
    writeln!(writer, "day,region_id,score,alert").map_err(io_err)?;
    for row in rows.iter().filter(|r| r.complete) {
        let score = forest.predict_proba(row)?;
        writeln!(writer, "{},{},{score},{}", row.day, row.region_id, forest.classify(score))
            .map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

/// evaluate: stratified k-fold cross-validation with ROC artifacts.
pub fn cmd_evaluate(
    training_path: &Path,
    params: &ForestParams,
    folds: usize,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<CvMetrics> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let rows = read_features_csv(training_path)?;
    let cv = evaluator::cross_validate(&rows, params, folds, seed::derive(params.seed, stream::FOLDS))?;

    let metrics_path = out_dir.join("metrics.csv");
    let mut writer = create_with_header(&metrics_path, meta)?;
    let io_err = |e| Error::io(&metrics_path, e);
    writeln!(writer, "metric,value").map_err(io_err)?;
    let fmt_opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "undefined".into());
    writeln!(writer, "folds,{}", cv.folds).map_err(io_err)?;
    writeln!(writer, "pooled_precision,{}", fmt_opt(cv.pooled_precision)).map_err(io_err)?;
    writeln!(writer, "pooled_recall,{}", cv.pooled_recall).map_err(io_err)?;
    writeln!(writer, "mean_precision,{}", fmt_opt(cv.mean_precision)).map_err(io_err)?;
    writeln!(writer, "mean_recall,{}", cv.mean_recall).map_err(io_err)?;
    writeln!(writer, "auc,{}", cv.auc).map_err(io_err)?;
    writer.flush().map_err(io_err)?;

    evaluator::write_roc_csv(&cv.roc, &out_dir.join("roc.csv"), meta)?;
    evaluator::write_roc_svg(&cv.roc, cv.auc, &out_dir.join("roc.svg"))?;
    Ok(cv)
}

#[derive(Debug)]
pub struct LooSummary {
    pub outcome: LooOutcome,
}

/// loo: the event-grouped leave-one-out experiment plus report rendering.
#[allow(clippy::too_many_arguments)]
pub fn cmd_loo(
    features_path: &Path,
    labels_path: &Path,
    events_path: &Path,
    volumes_path: &Path,
    regions_path: &Path,
    params: &ForestParams,
    labeling_options: LabelingOptions,
    options: LooOptions,
    external_path: Option<&Path>,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<LooSummary> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rows = read_features_csv(features_path)?;
    let cells = labeler::read_labels_csv(labels_path)?;
    for row in &mut rows {
        if let Some(cell) = cells.get(&(row.region_id.clone(), row.day)) {
            row.label = cell.label;
            row.event_id = cell.event_id.clone();
        }
    }
    let ranges = ranges_from_labels(&cells);
    let events = read_events(events_path)?;
    let volumes = read_volumes_csv(volumes_path)?;
    let metas = ingest::read_regions(regions_path)?;
    let counts = raw_counts(&volumes, labeling_options.count_filter);
    let training_rows = training_filter(&rows, &metas, &counts);

    let all_rows: Vec<FeatureRow> = rows.iter().filter(|r| r.complete).cloned().collect();
    let outcome = loo_events(&all_rows, &training_rows, &events, &ranges, params, options)?;
    for (event_id, reason) in &outcome.skipped {
        eprintln!("warning: event {event_id} skipped: {reason}");
    }

    write_loo_artifacts(&outcome, &rows, &events, external_path, out_dir, meta)?;
    Ok(LooSummary { outcome })
}

fn write_loo_artifacts(
    outcome: &LooOutcome,
    labeled_rows: &[FeatureRow],
    events: &[GroundTruthEvent],
    external_path: Option<&Path>,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<()> {
    // Pool held-out day scores against their labels for a LOO ROC curve.
    let label_of: BTreeMap<(&str, NaiveDate), Label> =
        labeled_rows.iter().map(|r| ((r.region_id.as_str(), r.day), r.label)).collect();
    let event_region: BTreeMap<&str, &str> =
        events.iter().map(|e| (e.event_id.as_str(), e.region_id.as_str())).collect();
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for result in &outcome.results {
        let Some(&region) = event_region.get(result.event_id.as_str()) else { continue };
        for (&day, &score) in &result.per_day_scores {
            match label_of.get(&(region, day)) {
                Some(Label::True) => {
                    scores.push(score);
                    labels.push(true);
                }
                Some(Label::False) => {
                    scores.push(score);
                    labels.push(false);
                }
                _ => {}
            }
        }
    }
    let roc = evaluator::roc_points(&scores, &labels).ok();

    let external = match external_path {
        Some(path) => Some(evaluator::read_external_forecasts(path)?),
        None => None,
    };
    let mut results = outcome.results.clone();
    let (points, auc) = roc.unwrap_or((Vec::new(), f64::NAN));
    render_report(&mut results, events, &points, auc, external.as_ref(), out_dir, meta)?;

    let summary_path = out_dir.join("loo_summary.csv");
    let mut writer = create_with_header(&summary_path, meta)?;
    let io_err = |e| Error::io(&summary_path, e);
    writeln!(writer, "metric,value").map_err(io_err)?;
    let hits = outcome.results.iter().filter(|r| r.outcome == evaluator::Outcome::Hit).count();
    writeln!(writer, "events_evaluated,{}", outcome.results.len()).map_err(io_err)?;
    writeln!(writer, "events_skipped,{}", outcome.skipped.len()).map_err(io_err)?;
    writeln!(writer, "hits,{hits}").map_err(io_err)?;
    writeln!(writer, "hit_rate,{}", outcome.hit_rate).map_err(io_err)?;
    writer.flush().map_err(io_err)
}

/// Everything a full run produces, for programmatic consumers.
#[derive(Debug)]
pub struct PipelineSummary {
    pub ingest: IngestSummary,
    pub training_rows: usize,
    pub true_rows: usize,
    pub cv: CvMetrics,
    pub hit_rate: f64,
    pub events_evaluated: usize,
    pub events_skipped: usize,
    pub out_dir: PathBuf,
}

/// Run every stage of the pipeline under one config into `out_dir`.
pub fn run_pipeline(config_path: &Path, out_dir: &Path) -> Result<PipelineSummary> {
    let (config, digest) = PipelineConfig::load(config_path)?;
    let meta = ArtifactMeta::new(config.seed, digest);
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let corpus_dir = out_dir.join("corpus");
    let synth_config = config
        .synth_config()
        .ok_or_else(|| Error::Config {
            field: "synth".into(),
            reason: "run_pipeline requires an inline [synth] section".into(),
        })
        .map_err(|e| e.in_stage("synth"))?;
    synthgen::generate(&synth_config, &corpus_dir, &meta).map_err(|e| e.in_stage("synth"))?;
    eprintln!("stage synth: corpus written to {}", corpus_dir.display());

    let ingest_dir = out_dir.join("ingest");
    let ingest_summary = cmd_ingest(
        &corpus_dir.join("postings.jsonl"),
        &corpus_dir.join("regions.csv"),
        config.window,
        config.strict_ingest,
        &ingest_dir,
        &meta,
    )
    .map_err(|e| e.in_stage("ingest"))?;
    eprintln!(
        "stage ingest: {} postings, {}/{} valid days",
        ingest_summary.accepted, ingest_summary.valid_days, ingest_summary.total_days
    );

    let features_path = out_dir.join("features.csv");
    cmd_featurize(
        &ingest_dir.join("bundles.jsonl"),
        &corpus_dir.join("regions.csv"),
        &corpus_dir.join("baseline.csv"),
        &ingest_dir.join("validity.csv"),
        config.policy,
        &features_path,
        &meta,
    )
    .map_err(|e| e.in_stage("featurize"))?;
    eprintln!("stage featurize: {}", features_path.display());

    let labels_dir = out_dir.join("labels");
    let label_summary = cmd_label(
        &features_path,
        &corpus_dir.join("events.csv"),
        &ingest_dir.join("volumes.csv"),
        &corpus_dir.join("regions.csv"),
        config.labeling,
        &labels_dir,
        &meta,
    )
    .map_err(|e| e.in_stage("label"))?;

    let params = config.forest_params();
    let model_path = out_dir.join("model.json");
    cmd_train(&labels_dir.join("training.csv"), &params, &model_path)
        .map_err(|e| e.in_stage("train"))?;
    eprintln!("stage train: {}", model_path.display());

    let eval_dir = out_dir.join("eval");
    let cv = cmd_evaluate(
        &labels_dir.join("training.csv"),
        &params,
        config.evaluation.folds,
        &eval_dir,
        &meta,
    )
    .map_err(|e| e.in_stage("evaluate"))?;
    eprintln!("stage evaluate: AUC {:.3}", cv.auc);

    let loo_dir = out_dir.join("loo");
    let loo = cmd_loo(
        &features_path,
        &labels_dir.join("labels.csv"),
        &corpus_dir.join("events.csv"),
        &ingest_dir.join("volumes.csv"),
        &corpus_dir.join("regions.csv"),
        &params,
        config.labeling,
        LooOptions { widen_hit_range: config.evaluation.widen_hit_range },
        config.external_forecasts.as_deref(),
        &loo_dir,
        &meta,
    )
    .map_err(|e| e.in_stage("loo"))?;
    eprintln!(
        "stage loo: hit rate {:.2} over {} events",
        loo.outcome.hit_rate,
        loo.outcome.results.len()
    );

    let true_rows =
        label_summary.training_rows.iter().filter(|r| r.label == Label::True).count();
    Ok(PipelineSummary {
        ingest: ingest_summary,
        training_rows: label_summary.training_rows.len(),
        true_rows,
        cv,
        hit_rate: loo.outcome.hit_rate,
        events_evaluated: loo.outcome.results.len(),
        events_skipped: loo.outcome.skipped.len(),
        out_dir: out_dir.to_path_buf(),
    })
}
