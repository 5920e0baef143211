//! Model evaluation: stratified k-fold cross-validation, ROC/AUC,
//! precision/recall at a threshold, and the event-grouped leave-one-out
//! Hit/Miss experiment with report rendering.
//!
//! Leave-one-out holds out, per event, every row of the event's region
//! within [d_start - 10, d_end + 10] (mirroring the Undefined buffers),
//! retrains feature selection and the forest on the remainder, and calls
//! the event a Hit when any day of its True range scores at or above the
//! alert threshold. Train/test key disjointness is asserted on every
//! iteration.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::artifact::{create_with_header, ArtifactMeta};
use crate::error::{Error, Result};
use crate::features::{FeatureRow, Label};
use crate::forest::{classify, Forest, ForestParams};
use crate::labeler::{GroundTruthEvent, LabelRange};

/// One step of the ROC curve. The first point carries an infinite
/// threshold (nothing alerts).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// Disjoint index folds with per-class counts differing by at most one.
pub fn stratified_kfold(labels: &[bool], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Config { field: "folds".into(), reason: "k must be at least 2".into() });
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    for class in [true, false] {
        let mut members: Vec<usize> =
            (0..labels.len()).filter(|&i| labels[i] == class).collect();
        if members.len() < k {
            return Err(Error::NotEnoughRows(format!(
                "class {class} has {} rows, need at least {k} for {k} folds",
                members.len()
            )));
        }
        members.shuffle(&mut rng);
        for (i, idx) in members.into_iter().enumerate() {
            folds[i % k].push(idx);
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(folds)
}

/// ROC curve with one step per distinct score (ties grouped) and the area
/// under it by the trapezoidal rule.
pub fn roc_points(scores: &[f64], labels: &[bool]) -> Result<(Vec<RocPoint>, f64)> {
    assert_eq!(scores.len(), labels.len());
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass);
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut i = 0;
    while i < order.len() {
        let score = scores[order[i]];
        while i < order.len() && scores[order[i]] == score {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: score,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }

    let mut auc = 0.0;
    for pair in points.windows(2) {
        auc += (pair[1].fpr - pair[0].fpr) * (pair[1].tpr + pair[0].tpr) / 2.0;
    }
    Ok((points, auc))
}

/// Precision and recall of the alert set {score >= t}. Precision is None
/// when nothing alerts; it is never coerced to 0 or 1.
pub fn pr_at_threshold(scores: &[f64], labels: &[bool], t: f64) -> (Option<f64>, f64) {
    let pos = labels.iter().filter(|&&l| l).count();
    assert!(pos > 0, "pr_at_threshold needs at least one positive label");
    let mut tp = 0usize;
    let mut alerts = 0usize;
    for (&s, &l) in scores.iter().zip(labels) {
        if classify(s, t) {
            alerts += 1;
            if l {
                tp += 1;
            }
        }
    }
    let precision = (alerts > 0).then(|| tp as f64 / alerts as f64);
    (precision, tp as f64 / pos as f64)
}

/// Cross-validation metrics, reported both pooled over all held-out
/// scores and averaged across folds.
#[derive(Debug, Clone, Serialize)]
pub struct CvMetrics {
    pub folds: usize,
    pub pooled_precision: Option<f64>,
    pub pooled_recall: f64,
    pub mean_precision: Option<f64>,
    pub mean_recall: f64,
    pub auc: f64,
    #[serde(skip)]
    pub roc: Vec<RocPoint>,
}

/// Stratified k-fold cross-validation of the full selection + forest
/// pipeline over labeled training rows.
pub fn cross_validate(
    rows: &[FeatureRow],
    params: &ForestParams,
    k: usize,
    seed: u64,
) -> Result<CvMetrics> {
    let y: Vec<bool> = rows.iter().map(|r| r.label == Label::True).collect();
    let folds = stratified_kfold(&y, k, seed)?;

    let mut pooled_scores = vec![0.0; rows.len()];
    let mut fold_precisions = Vec::new();
    let mut fold_recalls = Vec::new();
    for held_out in &folds {
        let held: BTreeSet<usize> = held_out.iter().copied().collect();
        let train_x: Vec<Vec<f64>> = rows
            .iter()
            .enumerate()
            .filter(|(i, _)| !held.contains(i))
            .map(|(_, r)| r.values.clone())
            .collect();
        let train_y: Vec<bool> =
            (0..rows.len()).filter(|i| !held.contains(i)).map(|i| y[i]).collect();
        let forest = Forest::fit(&train_x, &train_y, params)?;

        let fold_scores: Vec<f64> =
            held_out.iter().map(|&i| forest.score_values(&rows[i].values)).collect();
        let fold_labels: Vec<bool> = held_out.iter().map(|&i| y[i]).collect();
        if fold_labels.iter().any(|&l| l) {
            let (p, r) = pr_at_threshold(&fold_scores, &fold_labels, params.threshold);
            if let Some(p) = p {
                fold_precisions.push(p);
            }
            fold_recalls.push(r);
        }
        for (&i, &s) in held_out.iter().zip(&fold_scores) {
            pooled_scores[i] = s;
        }
    }

    let (roc, auc) = roc_points(&pooled_scores, &y)?;
    let (pooled_precision, pooled_recall) = pr_at_threshold(&pooled_scores, &y, params.threshold);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(CvMetrics {
        folds: k,
        pooled_precision,
        pooled_recall,
        mean_precision: (!fold_precisions.is_empty()).then(|| mean(&fold_precisions)),
        mean_recall: mean(&fold_recalls),
        auc,
        roc,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Hit,
    Miss,
}

/// Per-event leave-one-out outcome with the scores of every test day.
#[derive(Debug, Clone)]
pub struct EventResult {
    pub event_id: String,
    pub outcome: Outcome,
    pub per_day_scores: BTreeMap<NaiveDate, f64>,
    pub external_forecast: Option<String>,
}

#[derive(Debug)]
pub struct LooOutcome {
    pub results: Vec<EventResult>,
    pub hit_rate: f64,
    /// (event_id, reason) for events that could not be evaluated.
    pub skipped: Vec<(String, String)>,
}

/// Options for the leave-one-out experiment.
#[derive(Debug, Clone, Copy, Default)]
pub struct LooOptions {
    /// Judge Hit over the raw ground-truth span instead of the True range.
    pub widen_hit_range: bool,
}

/// Event-grouped leave-one-out: hold out each event's region-buffer rows,
/// retrain, and score the held-out days.
pub fn loo_events(
    all_rows: &[FeatureRow],
    training_rows: &[FeatureRow],
    events: &[GroundTruthEvent],
    ranges: &BTreeMap<String, LabelRange>,
    params: &ForestParams,
    options: LooOptions,
) -> Result<LooOutcome> {
    let mut results = Vec::new();
    let mut skipped = Vec::new();

    let mut ordered: Vec<&GroundTruthEvent> = events.iter().collect();
    ordered.sort_by(|a, b| (a.d_start, &a.event_id).cmp(&(b.d_start, &b.event_id)));

    for event in ordered {
        let Some(range) = ranges.get(&event.event_id) else {
            skipped.push((event.event_id.clone(), "no True range (no valid volume data)".into()));
            continue;
        };
        let test_start = event.d_start - Duration::days(10);
        let test_end = event.d_end + Duration::days(10);
        let in_test_window = |row: &FeatureRow| {
            row.region_id == event.region_id && row.day >= test_start && row.day <= test_end
        };

        let train: Vec<&FeatureRow> =
            training_rows.iter().filter(|r| !in_test_window(r)).collect();
        let test: Vec<&FeatureRow> =
            all_rows.iter().filter(|r| in_test_window(r) && r.complete).collect();

        // No-leakage assertion: train and test (region, day) keys must be
        // disjoint in every iteration.
        let train_keys: BTreeSet<(&str, NaiveDate)> =
            train.iter().map(|r| (r.region_id.as_str(), r.day)).collect();
        for row in &test {
            if train_keys.contains(&(row.region_id.as_str(), row.day)) {
                return Err(Error::Other(format!(
                    "leakage: ({}, {}) present in both train and test for event {}",
                    row.region_id, row.day, event.event_id
                )));
            }
        }

        let y: Vec<bool> = train.iter().map(|r| r.label == Label::True).collect();
        if !y.iter().any(|&l| l) || y.iter().all(|&l| l) {
            skipped.push((event.event_id.clone(), "training set single-class after exclusion".into()));
            continue;
        }
        let x: Vec<Vec<f64>> = train.iter().map(|r| r.values.clone()).collect();
        let forest = Forest::fit(&x, &y, params)?;

        let per_day_scores: BTreeMap<NaiveDate, f64> =
            test.iter().map(|r| (r.day, forest.score_values(&r.values))).collect();

        let (hit_start, hit_end) = if options.widen_hit_range {
            (event.d_start, event.d_end)
        } else {
            (range.d_b, range.d_e)
        };
        let scorable: Vec<f64> = per_day_scores
            .range(hit_start..=hit_end)
            .map(|(_, &s)| s)
            .collect();
        if scorable.is_empty() {
            skipped.push((event.event_id.clone(), "no complete rows in the hit range".into()));
            continue;
        }
        let hit = scorable.iter().any(|&s| classify(s, params.threshold));
        results.push(EventResult {
            event_id: event.event_id.clone(),
            outcome: if hit { Outcome::Hit } else { Outcome::Miss },
            per_day_scores,
            external_forecast: None,
        });
    }

    let hits = results.iter().filter(|r| r.outcome == Outcome::Hit).count();
    let hit_rate = if results.is_empty() { 0.0 } else { hits as f64 / results.len() as f64 };
    Ok(LooOutcome { results, hit_rate, skipped })
}

/// External forecast annotations: event_id -> (forecast text, event type).
pub type ExternalForecasts = BTreeMap<String, (String, String)>;

/// Read the optional external forecasts file
/// (`event_id,forecast_text[,event_type]`).
pub fn read_external_forecasts(path: &Path) -> Result<ExternalForecasts> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut map = ExternalForecasts::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let event_id = record.get(0).unwrap_or("").to_string();
        let forecast = record.get(1).unwrap_or("").to_string();
        let event_type = record.get(2).unwrap_or("").to_string();
        map.insert(event_id, (forecast, event_type));
    }
    Ok(map)
}

/// Write report.csv, roc.csv, and roc.svg. The report mirrors the
/// leave-one-out comparison table: one row per event with its outcome and
/// the external forecast joined by event_id (blank on join misses).
pub fn render_report(
    results: &mut [EventResult],
    events: &[GroundTruthEvent],
    roc: &[RocPoint],
    auc: f64,
    external: Option<&ExternalForecasts>,
    out_dir: &Path,
    meta: &ArtifactMeta,
) -> Result<()> {
    let event_index: BTreeMap<&str, &GroundTruthEvent> =
        events.iter().map(|e| (e.event_id.as_str(), e)).collect();

    let mut report = create_with_header(&out_dir.join("report.csv"), meta)?;
    writeln!(report, "event_id,place,country,days,result,external_forecast,event_type")
        .map_err(|e| Error::io(out_dir.join("report.csv"), e))?;
    for result in results.iter_mut() {
        let event = event_index.get(result.event_id.as_str());
        let (place, country, days) = match event {
            Some(e) => (
                e.region_id.clone(),
                e.country.clone(),
                ((e.d_end - e.d_start).num_days() + 1).to_string(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        let (forecast, event_type) = match external.and_then(|m| m.get(&result.event_id)) {
            Some((f, t)) => (f.clone(), t.clone()),
            None => {
                if external.is_some() {
                    eprintln!(
                        "warning: event {} missing from external forecasts file",
                        result.event_id
                    );
                }
                (String::new(), String::new())
            }
        };
        result.external_forecast = (!forecast.is_empty()).then(|| forecast.clone());
        let outcome = match result.outcome {
            Outcome::Hit => "hit",
            Outcome::Miss => "miss",
        };
        writeln!(
            report,
            "{},{place},{country},{days},{outcome},{forecast},{event_type}",
            result.event_id
        )
        .map_err(|e| Error::io(out_dir.join("report.csv"), e))?;
    }
    report.flush().map_err(|e| Error::io(out_dir.join("report.csv"), e))?;

    write_roc_csv(roc, &out_dir.join("roc.csv"), meta)?;
    write_roc_svg(roc, auc, &out_dir.join("roc.svg"))?;
    Ok(())
}

pub fn write_roc_csv(roc: &[RocPoint], path: &Path, meta: &ArtifactMeta) -> Result<()> {
    let mut writer = create_with_header(path, meta)?;
    writeln!(writer, "threshold,fpr,tpr").map_err(|e| Error::io(path, e))?;
    for point in roc {
        writeln!(writer, "{},{},{}", point.threshold, point.fpr, point.tpr)
            .map_err(|e| Error::io(path, e))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Static SVG plot of the ROC curve with the chance diagonal.
pub fn write_roc_svg(roc: &[RocPoint], auc: f64, path: &Path) -> Result<()> {
    let (w, h, margin) = (480.0, 480.0, 50.0);
    let sx = |fpr: f64| margin + fpr * (w - 2.0 * margin);
    let sy = |tpr: f64| h - margin - tpr * (h - 2.0 * margin);
    let polyline: Vec<String> =
        roc.iter().map(|p| format!("{:.2},{:.2}", sx(p.fpr), sy(p.tpr))).collect();

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str(&format!(
        "  <rect x=\"{margin}\" y=\"{margin}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n",
        w - 2.0 * margin,
        h - 2.0 * margin
    ));
    svg.push_str(&format!(
        "  <line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#bbb\" stroke-dasharray=\"6 4\"/>\n",
        sx(0.0),
        sy(0.0),
        sx(1.0),
        sy(1.0)
    ));
    svg.push_str(&format!(
        "  <polyline points=\"{}\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"2\"/>\n",
        polyline.join(" ")
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"14\">ROC curve (AUC = {auc:.3})</text>\n",
        margin,
        margin - 12.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\">false positive rate</text>\n",
        w / 2.0 - 50.0,
        h - margin + 30.0
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 {} {})\">true positive rate</text>\n",
        margin - 30.0,
        h / 2.0 + 40.0,
        margin - 30.0,
        h / 2.0 + 40.0
    ));
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kfold_stratifies_evenly() {
        let labels = [true, true, true, false, false, false, false, false, false];
        let folds = stratified_kfold(&labels, 3, 1).unwrap();
        for fold in &folds {
            assert_eq!(fold.iter().filter(|&&i| labels[i]).count(), 1);
            assert_eq!(fold.len(), 3);
        }
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..9).collect::<Vec<_>>());
    }

    #[test]
    fn kfold_deterministic_under_seed() {
        let labels = [true, false, true, false, true, false, true, false, true, false];
        assert_eq!(
            stratified_kfold(&labels, 3, 9).unwrap(),
            stratified_kfold(&labels, 3, 9).unwrap()
        );
    }

    #[test]
    fn kfold_rejects_small_classes() {
        assert!(stratified_kfold(&[true, false], 3, 0).is_err());
    }

    #[test]
    fn roc_perfect_separation() {
        let (points, auc) =
            roc_points(&[0.9, 0.8, 0.3, 0.1], &[true, true, false, false]).unwrap();
        assert_abs_diff_eq!(auc, 1.0, epsilon = 1e-12);
        assert!(points.len() <= 4 + 1);
    }

    #[test]
    fn roc_inverted_labels() {
        let (_, auc) = roc_points(&[0.9, 0.8, 0.3, 0.1], &[false, false, true, true]).unwrap();
        assert_abs_diff_eq!(auc, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn roc_all_tied_scores() {
        let (points, auc) = roc_points(&[0.4; 6], &[true, false, true, false, true, false]).unwrap();
        assert_abs_diff_eq!(auc, 0.5, epsilon = 1e-12);
        assert_eq!(points.len(), 2);
    }

    #[test]
    fn roc_negation_symmetry() {
        let scores = [0.9, 0.7, 0.7, 0.4, 0.2, 0.1];
        let labels = [true, false, true, true, false, false];
        let (_, auc) = roc_points(&scores, &labels).unwrap();
        let negated: Vec<f64> = scores.iter().map(|s| -s).collect();
        let (_, auc_neg) = roc_points(&negated, &labels).unwrap();
        assert_abs_diff_eq!(auc, 1.0 - auc_neg, epsilon = 1e-12);
    }

    #[test]
    fn roc_monotone_rates() {
        let scores = [0.9, 0.8, 0.8, 0.5, 0.3, 0.2, 0.1];
        let labels = [true, false, true, false, true, false, false];
        let (points, _) = roc_points(&scores, &labels).unwrap();
        for pair in points.windows(2) {
            assert!(pair[1].threshold < pair[0].threshold);
            assert!(pair[1].tpr >= pair[0].tpr);
            assert!(pair[1].fpr >= pair[0].fpr);
        }
    }

    #[test]
    fn pr_direct_counts() {
        let scores = [0.3, 0.25, 0.1, 0.05];
        let labels = [true, false, false, true];
        let (precision, recall) = pr_at_threshold(&scores, &labels, 0.2);
        assert_abs_diff_eq!(precision.unwrap(), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(recall, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn pr_zero_threshold_full_recall() {
        let (_, recall) = pr_at_threshold(&[0.3, 0.2, 0.1], &[true, false, true], 0.0);
        assert_abs_diff_eq!(recall, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn pr_empty_alert_set_sentinel() {
        let (precision, recall) = pr_at_threshold(&[0.3, 0.2], &[true, false], 0.9);
        assert!(precision.is_none());
        assert_abs_diff_eq!(recall, 0.0, epsilon = 1e-12);
    }
}
