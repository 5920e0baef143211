//! The six-hour-gap rule in action: a day is a usable observation only if
//! no posting-free interval longer than six hours touches it, judged on
//! the merged stream across all regions. Collection outages — not absence
//! of floods — are what the rule screens out.

use chrono::{DateTime, Duration, Utc};
use floodsignal::ingest::{day_validity, DayWindow, Posting};

fn posting(id: u64, ts: DateTime<Utc>) -> Posting {
    Posting {
        id: id.to_string(),
        timestamp: ts,
        region_id: "CAN.02".into(),
        country: "CAN".into(),
        relevance: 0.4,
    }
}

fn main() -> floodsignal::Result<()> {
    let window =
        DayWindow::new("2024-03-01".parse().unwrap(), "2024-03-05".parse().unwrap())?;

    // Hourly postings, except a silent stretch from Mar 2 20:00 through
    // Mar 3 07:00 — an 11-hour gap spanning midnight.
    let outage_start: DateTime<Utc> = "2024-03-02T20:00:00Z".parse().unwrap();
    let outage_end: DateTime<Utc> = "2024-03-03T07:00:00Z".parse().unwrap();
    let mut postings = Vec::new();
    let mut ts: DateTime<Utc> = "2024-03-01T00:30:00Z".parse().unwrap();
    let mut id = 0;
    let stream_end: DateTime<Utc> = "2024-03-06T00:00:00Z".parse().unwrap();
    while ts < stream_end {
        if ts <= outage_start || ts >= outage_end {
            postings.push(posting(id, ts));
            id += 1;
        }
        ts += Duration::hours(1);
    }

    let verdicts = day_validity(&postings, window)?;
    println!("{:<12} {:>7} {:>14}", "day", "valid", "max gap (min)");
    for (day, verdict) in &verdicts {
        println!("{:<12} {:>7} {:>14}", day.to_string(), verdict.valid, verdict.max_gap_minutes);
    }
    println!("\nthe gap spans midnight, so both Mar 2 and Mar 3 are dropped;");
    println!("every other day has hourly coverage and survives.");
    Ok(())
}
