//! Build the 73-dimensional daily feature vector by hand for one region
//! and three consecutive days, then print it with canonical names: the
//! language flag, the day's volume and probability histogram, the 3-day
//! lag families, and the expected-rate normalization.

use chrono::{DateTime, Duration, NaiveDate, Utc};
use floodsignal::features::{
    daily_features, lagged_features, normalize_features, NormalizationPolicy, RegionDayFeatures,
    FEATURE_NAMES,
};
use floodsignal::ingest::{Posting, RegionDayBundle, RegionMeta};

/// A bundle with `counts[i]` postings in probability bucket i.
fn bundle(day: NaiveDate, counts: [usize; 10]) -> RegionDayBundle {
    let mut postings = Vec::new();
    for (i, &count) in counts.iter().enumerate() {
        for j in 0..count {
            let ts: DateTime<Utc> = day
                .and_hms_opt(j as u32 % 24, i as u32, 0)
                .unwrap()
                .and_utc();
            postings.push(Posting {
                id: format!("{day}-{i}-{j}"),
                timestamp: ts,
                region_id: "JPN.13".into(),
                country: "JPN".into(),
                relevance: i as f64 / 10.0 + 0.05, // lands in bucket i
            });
        }
    }
    RegionDayBundle { day, region_id: "JPN.13".into(), postings, valid: true }
}

fn main() -> floodsignal::Result<()> {
    let meta = RegionMeta {
        region_id: "JPN.13".into(),
        country: "JPN".into(),
        english_status: 0,
        expected_daily_postings: 20.0,
    };

    let day: NaiveDate = "2024-06-03".parse().unwrap();
    // A quiet day, a quiet day, then a burst concentrated in high buckets.
    let days = [
        bundle(day - Duration::days(2), [8, 5, 3, 2, 1, 1, 0, 0, 0, 0]),
        bundle(day - Duration::days(1), [9, 4, 3, 2, 2, 0, 1, 0, 0, 0]),
        bundle(day, [10, 5, 4, 3, 3, 5, 8, 12, 14, 9]),
    ];

    let stamped: Vec<RegionDayFeatures> = days
        .iter()
        .map(|b| {
            Ok(RegionDayFeatures {
                day: b.day,
                region_id: b.region_id.clone(),
                daily: daily_features(b, &meta)?,
            })
        })
        .collect::<floodsignal::Result<_>>()?;

    let lagged = lagged_features(&stamped[0], &stamped[1], &stamped[2])?;
    let values =
        normalize_features(&stamped[2].daily, &lagged, &meta, NormalizationPolicy::Consistent)?;

    println!("feature vector for {} on {day} (expected rate 20/day):\n", meta.region_id);
    for (name, value) in FEATURE_NAMES.iter().zip(&values) {
        if *value != 0.0 {
            println!("{name:<12} {value:.4}");
        }
    }
    println!("\n(zero-valued features omitted; count families are divided by the");
    println!("expected rate, proportion families are reported as-is)");
    Ok(())
}
