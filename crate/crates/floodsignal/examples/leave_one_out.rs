//! The event-grouped leave-one-out experiment, run fully in memory on a
//! generated corpus: for each ground-truth flood, train on everything
//! outside its ±10-day window and ask whether any day between the detected
//! onset and the day after the peak raises an alert.

use floodsignal::artifact::ArtifactMeta;
use floodsignal::evaluator::{loo_events, LooOptions, Outcome};
use floodsignal::features::{featurize, Label, NormalizationPolicy};
use floodsignal::forest::ForestParams;
use floodsignal::ingest::{day_validity, group_region_day, read_postings_file, read_regions, DayWindow};
use floodsignal::labeler::{apply_labels, label_dataset, read_events, training_filter};
use floodsignal::pipeline::{raw_counts, volumes_by_region, CountFilter, VolumeSource};
use floodsignal::synthgen::{generate, read_baseline, SynthConfig};

fn main() -> anyhow::Result<()> {
    // Reuse the shipped demo corpus definition.
    let config_text = std::fs::read_to_string(
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("config/demo.toml"),
    )?;
    let pipeline: floodsignal::pipeline::PipelineConfig = toml::from_str(&config_text)?;
    let synth: SynthConfig = pipeline.synth_config().expect("demo config has a synth section");

    let out_dir = std::env::temp_dir().join("floodsignal-loo-example");
    generate(&synth, &out_dir, &ArtifactMeta::new(synth.seed, "example"))?;

    let window: DayWindow = synth.window;
    let postings = read_postings_file(&out_dir.join("postings.jsonl"), false)?.postings;
    let metas = read_regions(&out_dir.join("regions.csv"))?;
    let baseline = read_baseline(&out_dir.join("baseline.csv"))?;
    let events = read_events(&out_dir.join("events.csv"))?;

    let validity = day_validity(&postings, window)?;
    let bundles = group_region_day(postings, &validity);

    let mut metas = metas;
    for meta in &mut metas {
        if let Some(&rate) = baseline.get(&meta.region_id) {
            meta.expected_daily_postings = rate;
        }
    }

    let mut rows = featurize(&bundles, &metas, &validity, window, NormalizationPolicy::Consistent)?;

    let mut volumes = floodsignal::pipeline::VolumeTable::new();
    for bundle in bundles.iter().filter(|b| b.valid) {
        volumes.insert(
            (bundle.region_id.clone(), bundle.day),
            floodsignal::pipeline::VolumeCell {
                total: bundle.postings.len() as u64,
                flood_weighted: bundle.postings.iter().map(|p| p.relevance).sum(),
                flood_classified: bundle.postings.iter().filter(|p| p.relevance > 0.5).count()
                    as u64,
            },
        );
    }
    let labeling =
        label_dataset(&metas, window, &events, &volumes_by_region(&volumes, VolumeSource::Total));
    apply_labels(&mut rows, &labeling);

    let training = training_filter(&rows, &metas, &raw_counts(&volumes, CountFilter::All));
    let complete: Vec<_> = rows.iter().filter(|r| r.complete).cloned().collect();
    println!(
        "{} training rows ({} True)",
        training.len(),
        training.iter().filter(|r| r.label == Label::True).count()
    );

    let params = ForestParams::default();
    let outcome = loo_events(
        &complete,
        &training,
        &events,
        &labeling.ranges,
        &params,
        LooOptions { widen_hit_range: false },
    )?;

    println!("\n{:<8} {:<8} {:>7} {:>12}", "event", "region", "result", "best score");
    for result in &outcome.results {
        let best = result.per_day_scores.values().cloned().fold(f64::NAN, f64::max);
        let region = events
            .iter()
            .find(|e| e.event_id == result.event_id)
            .map(|e| e.region_id.as_str())
            .unwrap_or("?");
        println!(
            "{:<8} {:<8} {:>7} {:>12.3}",
            result.event_id,
            region,
            match result.outcome {
                Outcome::Hit => "hit",
                Outcome::Miss => "miss",
            },
            best
        );
    }
    println!("\nhit rate: {:.2} over {} events", outcome.hit_rate, outcome.results.len());
    Ok(())
}
