//! Property tests for the invariants each stage promises, checked against
//! independently coded brute-force oracles on random inputs.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate, TimeZone, Utc};
use proptest::prelude::*;

use floodsignal::evaluator::roc_points;
use floodsignal::features::{bucket_index, daily_features, Label, BUCKETS};
use floodsignal::ingest::{day_validity, DayWindow, Posting, RegionDayBundle, RegionMeta};
use floodsignal::labeler::training_filter;

fn posting(ts: chrono::DateTime<Utc>, relevance: f64) -> Posting {
    Posting {
        id: format!("{}", ts.timestamp()),
        timestamp: ts,
        region_id: "ZAF.02".into(),
        country: "ZAF".into(),
        relevance,
    }
}

proptest! {
    /// Bucket membership: p lands in (i/10, (i+1)/10], with p = 0 in
    /// bucket 0.
    #[test]
    fn bucket_bounds(p in 0.0f64..=1.0) {
        let b = bucket_index(p).unwrap().0;
        prop_assert!(b < BUCKETS);
        if p == 0.0 {
            prop_assert_eq!(b, 0);
        } else {
            prop_assert!(p <= (b + 1) as f64 / 10.0);
            if b > 0 {
                prop_assert!(p > b as f64 / 10.0);
            }
        }
    }

    /// Daily histogram always partitions the bundle: ΣT = TOT, and P sums
    /// to 1 exactly when the day is nonempty.
    #[test]
    fn daily_histogram_partitions(ps in prop::collection::vec(0.0f64..=1.0, 0..80)) {
        let day: NaiveDate = "2024-04-01".parse().unwrap();
        let postings: Vec<Posting> = ps
            .iter()
            .enumerate()
            .map(|(i, &p)| posting(Utc.with_ymd_and_hms(2024, 4, 1, (i % 24) as u32, 0, 0).unwrap(), p))
            .collect();
        let bundle = RegionDayBundle { day, region_id: "ZAF.02".into(), postings, valid: true };
        let meta = RegionMeta {
            region_id: "ZAF.02".into(),
            country: "ZAF".into(),
            english_status: 1,
            expected_daily_postings: 10.0,
        };
        let daily = daily_features(&bundle, &meta).unwrap();
        prop_assert_eq!(daily.t.iter().sum::<u64>(), ps.len() as u64);
        if !ps.is_empty() {
            prop_assert!((daily.p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    /// Day validity matches a brute-force oracle: a day is valid iff no
    /// posting-free interval longer than six hours (bounded by neighbor
    /// postings or window edges) overlaps it.
    #[test]
    fn validity_matches_brute_force(offsets in prop::collection::vec(0i64..(5 * 24 * 60), 0..60)) {
        let window = DayWindow::new(
            "2024-07-01".parse().unwrap(),
            "2024-07-05".parse().unwrap(),
        ).unwrap();
        let base = Utc.with_ymd_and_hms(2024, 7, 1, 0, 0, 0).unwrap();
        let mut stamps: Vec<_> = offsets.iter().map(|&m| base + Duration::minutes(m)).collect();
        stamps.sort();
        stamps.dedup();
        let postings: Vec<Posting> = stamps.iter().map(|&ts| posting(ts, 0.5)).collect();

        let verdicts = day_validity(&postings, window).unwrap();

        // Brute force: enumerate every posting-free interval.
        let window_end = base + Duration::days(5);
        let mut edges = vec![base];
        edges.extend(stamps.iter().copied());
        edges.push(window_end);
        let mut invalid: BTreeMap<NaiveDate, bool> = window.days().map(|d| (d, false)).collect();
        for pair in edges.windows(2) {
            let (from, to) = (pair[0], pair[1]);
            if to - from > Duration::hours(6) {
                let mut day = from.date_naive();
                let last = (to - Duration::seconds(1)).date_naive();
                while day <= last {
                    if let Some(flag) = invalid.get_mut(&day) {
                        *flag = true;
                    }
                    day += Duration::days(1);
                }
            }
        }
        for day in window.days() {
            prop_assert_eq!(
                verdicts[&day].valid,
                !invalid[&day],
                "day {} disagrees with brute force", day
            );
        }
    }

    /// ROC curves are monotone staircases from (0,0) to (1,1) with AUC in
    /// [0,1], for any score/label mix with both classes present.
    #[test]
    fn roc_is_monotone(
        scores in prop::collection::vec(0.0f64..=1.0, 2..50),
        flip in prop::collection::vec(any::<bool>(), 2..50),
    ) {
        let n = scores.len().min(flip.len());
        let scores = &scores[..n];
        let mut labels = flip[..n].to_vec();
        labels[0] = true;
        labels[n - 1] = false;

        let (points, auc) = roc_points(scores, &labels).unwrap();
        prop_assert!((0.0..=1.0).contains(&auc));
        prop_assert_eq!((points[0].fpr, points[0].tpr), (0.0, 0.0));
        let last = points.last().unwrap();
        prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        for pair in points.windows(2) {
            prop_assert!(pair[1].fpr >= pair[0].fpr);
            prop_assert!(pair[1].tpr >= pair[0].tpr);
            prop_assert!(pair[1].threshold <= pair[0].threshold);
        }
    }

    /// The training filter never lets through Undefined/Unlabeled rows,
    /// incomplete rows, non-English regions, or rows at or below the
    /// 100-posting floor.
    #[test]
    fn training_filter_is_sound(
        labels in prop::collection::vec(0u8..4, 1..60),
        completes in prop::collection::vec(any::<bool>(), 1..60),
        counts in prop::collection::vec(0u64..300, 1..60),
        english in prop::collection::vec(0u8..3, 1..60),
    ) {
        let n = labels.len().min(completes.len()).min(counts.len()).min(english.len());
        let start: NaiveDate = "2024-01-01".parse().unwrap();
        let mut rows = Vec::new();
        let mut metas = Vec::new();
        let mut raw = BTreeMap::new();
        for i in 0..n {
            let region = format!("XX{}.{i:02}", ["A", "B", "C"][english[i] as usize]);
            metas.push(RegionMeta {
                region_id: region.clone(),
                country: region[..4].into(),
                english_status: english[i],
                expected_daily_postings: 50.0,
            });
            let day = start + Duration::days(i as i64);
            rows.push(floodsignal::features::FeatureRow {
                day,
                region_id: region.clone(),
                values: vec![0.0; floodsignal::features::FEATURE_COUNT],
                complete: completes[i],
                label: match labels[i] {
                    0 => Label::True,
                    1 => Label::False,
                    2 => Label::Undefined,
                    _ => Label::Unlabeled,
                },
                event_id: None,
            });
            raw.insert((region, day), counts[i]);
        }

        let kept = training_filter(&rows, &metas, &raw);
        for row in &kept {
            prop_assert!(matches!(row.label, Label::True | Label::False));
            prop_assert!(row.complete);
            prop_assert!(raw[&(row.region_id.clone(), row.day)] > 100);
        }
        // And nothing eligible is dropped.
        let eligible = rows.iter().filter(|r| {
            matches!(r.label, Label::True | Label::False)
                && r.complete
                && raw[&(r.region_id.clone(), r.day)] > 100
                && metas.iter().any(|m| m.region_id == r.region_id && (1..=2).contains(&m.english_status))
        }).count();
        prop_assert_eq!(kept.len(), eligible);
    }
}
