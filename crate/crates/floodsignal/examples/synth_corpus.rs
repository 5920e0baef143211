//! Generate a small synthetic posting corpus and show how the burst and
//! outage machinery shapes it. The trace file is the generator's own
//! account of what it drew, so downstream stages can be checked against it.

use floodsignal::artifact::ArtifactMeta;
use floodsignal::ingest::DayWindow;
use floodsignal::synthgen::{
    generate, MixtureComponent, Outage, SynthConfig, SynthEvent, SynthRegion,
};

fn main() -> floodsignal::Result<()> {
    let config = SynthConfig {
        seed: 7,
        window: DayWindow::new(
            "2024-01-01".parse().unwrap(),
            "2024-01-31".parse().unwrap(),
        )?,
        regions: vec![SynthRegion {
            region_id: "NZL.04".into(),
            country: "NZL".into(),
            english_status: 1,
            baseline_rate: 180.0,
            relevance_mixture: vec![
                MixtureComponent { weight: 0.85, low: 0.0, high: 0.3 },
                MixtureComponent { weight: 0.12, low: 0.3, high: 0.7 },
                MixtureComponent { weight: 0.03, low: 0.7, high: 1.0 },
            ],
        }],
        events: vec![SynthEvent {
            event_id: "DEMO".into(),
            region_id: "NZL.04".into(),
            start: "2024-01-10".parse().unwrap(),
            end: "2024-01-16".parse().unwrap(),
            burst_peak_multiplier: 8.0,
            ramp_days: 2,
            flood_relevance_shift: 0.5,
        }],
        outages: vec![Outage {
            start: "2024-01-22T08:00:00Z".parse().unwrap(),
            end: "2024-01-22T19:30:00Z".parse().unwrap(),
        }],
    };

    let out_dir = std::env::temp_dir().join("floodsignal-synth-example");
    let meta = ArtifactMeta::new(config.seed, "example");
    let summary = generate(&config, &out_dir, &meta)?;

    println!(
        "{} postings emitted ({} drawn, {} deleted by the outage)",
        summary.emitted_postings, summary.drawn_postings, summary.deleted_postings
    );
    println!("\nper-day trace around the event:");
    println!("{:<12} {:>6} {:>10} {:>7} {:>8}", "day", "event", "multiplier", "drawn", "deleted");
    for row in &summary.trace {
        if row.multiplier > 1.0 || row.deleted_count > 0 {
            println!(
                "{:<12} {:>6} {:>10.2} {:>7} {:>8}",
                row.day.to_string(),
                if row.event_id.is_empty() { "-" } else { &row.event_id },
                row.multiplier,
                row.drawn_count,
                row.deleted_count
            );
        }
    }
    println!("\ncorpus files written to {}", out_dir.display());
    Ok(())
}
