//! Weak labeling from coarse event records: find the activity peak inside
//! the event window, walk backwards over strictly increasing days to the
//! detected onset, mark that range True, buffer ±10 days as Undefined, and
//! scrub same-country neighbors around the event.

use chrono::{Duration, NaiveDate};
use floodsignal::ingest::{DayWindow, RegionMeta};
use floodsignal::labeler::{label_dataset, DayVolumes, GroundTruthEvent};
use std::collections::BTreeMap;

fn main() -> floodsignal::Result<()> {
    let window =
        DayWindow::new("2024-05-01".parse().unwrap(), "2024-06-09".parse().unwrap())?;
    let metas = vec![
        region("MEX.09"),
        region("MEX.14"), // same country, no event: scrubbed around the flood
        region("CHL.05"), // different country, no event: all Undefined
    ];
    let event = GroundTruthEvent {
        event_id: "FL-2024-051".into(),
        region_id: "MEX.09".into(),
        country: "MEX".into(),
        d_start: "2024-05-15".parse().unwrap(),
        d_end: "2024-05-22".parse().unwrap(),
    };

    // Daily posting volume for the flooded region: flat background, a rise
    // starting two days into the event window, peak, then decay.
    let start: NaiveDate = "2024-05-01".parse().unwrap();
    let shape = [
        40, 41, 39, 40, 42, 40, 41, 40, 39, 41, 40, 42, 40, 41, // background
        45, 44, 60, 130, 310, 200, 110, 70, // event window May 15-22
        50, 45, 42, 41, 40, 40, 41, 39, 40, 42, 40, 41, 40, 39, 41, 40, 42, 40,
    ];
    let mut volumes: BTreeMap<String, DayVolumes> = BTreeMap::new();
    let series: DayVolumes =
        (0..40).map(|i| (start + Duration::days(i), shape[i as usize % shape.len()])).collect();
    volumes.insert("MEX.09".into(), series);

    let labeling = label_dataset(&metas, window, &[event], &volumes);
    let range = &labeling.ranges["FL-2024-051"];
    println!("event FL-2024-051: peak {} onset {} end {}\n", range.d_m, range.d_b, range.d_e);

    println!("{:<12} {:>10} {:>10} {:>10}", "day", "MEX.09", "MEX.14", "CHL.05");
    for day in window.days() {
        let cell = |region: &str| {
            labeling
                .cells
                .get(&(region.to_string(), day))
                .map(|c| c.label.as_str())
                .unwrap_or("-")
        };
        println!("{:<12} {:>10} {:>10} {:>10}", day.to_string(), cell("MEX.09"), cell("MEX.14"), cell("CHL.05"));
    }
    Ok(())
}

fn region(id: &str) -> RegionMeta {
    RegionMeta {
        region_id: id.into(),
        country: id[..3].into(),
        english_status: 1,
        expected_daily_postings: 40.0,
    }
}
