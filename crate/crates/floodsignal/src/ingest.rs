//! Posting ingestion: parse the postings file, apply the six-hour-gap
//! day-validity heuristic, and bundle postings by (day, region).
//!
//! Day boundaries are UTC calendar dates throughout. The gap rule inspects
//! the merged all-region stream: a day is invalid when any posting-free
//! interval longer than six hours overlaps it. Gap intervals are delimited
//! by the nearest postings (which may sit on adjacent days) or by the
//! observation-window edges, so a seven-hour outage spanning midnight
//! invalidates both days it touches.

use std::collections::BTreeMap;
use std::io::BufRead;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One social-media record with its precomputed flood-relevance probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Posting {
    pub id: String,
    #[serde(rename = "ts")]
    pub timestamp: DateTime<Utc>,
    pub region_id: String,
    pub country: String,
    #[serde(rename = "p")]
    pub relevance: f64,
}

impl Posting {
    pub fn day(&self) -> NaiveDate {
        self.timestamp.date_naive()
    }

    fn check(&self) -> std::result::Result<(), String> {
        if !(0.0..=1.0).contains(&self.relevance) || !self.relevance.is_finite() {
            return Err(format!("relevance {} outside [0,1]", self.relevance));
        }
        if !self.region_id.starts_with(&self.country) {
            return Err(format!(
                "region_id {:?} does not carry country prefix {:?}",
                self.region_id, self.country
            ));
        }
        Ok(())
    }
}

/// Per-region metadata: country, English status, expected posting rate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionMeta {
    pub region_id: String,
    pub country: String,
    /// 0 = English not official, 1 = first language, 2 = second language.
    pub english_status: u8,
    pub expected_daily_postings: f64,
}

/// Inclusive range of UTC calendar dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayWindow {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

impl DayWindow {
    pub fn new(start: NaiveDate, end: NaiveDate) -> Result<Self> {
        if start > end {
            return Err(Error::EmptyWindow);
        }
        Ok(DayWindow { start, end })
    }

    pub fn contains(&self, day: NaiveDate) -> bool {
        self.start <= day && day <= self.end
    }

    pub fn days(&self) -> impl Iterator<Item = NaiveDate> {
        self.start.iter_days().take_while({
            let end = self.end;
            move |d| *d <= end
        })
    }

    pub fn num_days(&self) -> i64 {
        (self.end - self.start).num_days() + 1
    }
}

/// Validity verdict for one day, with the longest posting-free interval
/// overlapping it (full interval length, which may exceed 24h).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DayValidity {
    pub valid: bool,
    pub max_gap_minutes: i64,
}

/// Postings of one (day, region) cell. `valid` is copied from the day's
/// global validity verdict; invalid bundles are kept as data but must not
/// be featurized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDayBundle {
    pub day: NaiveDate,
    pub region_id: String,
    pub postings: Vec<Posting>,
    pub valid: bool,
}

/// Outcome of parsing a postings stream: accepted records in input order
/// plus the count of rejected lines.
#[derive(Debug, Default)]
pub struct ParseOutcome {
    pub postings: Vec<Posting>,
    pub rejected: usize,
}

/// Parse line-delimited posting records. Malformed lines are skipped and
/// counted; in strict mode the first malformed line is fatal. Lines that
/// start with `#` are artifact headers and are ignored.
pub fn parse_postings<R: BufRead>(reader: R, strict: bool) -> Result<ParseOutcome> {
    let mut out = ParseOutcome::default();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<postings stream>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parsed: std::result::Result<Posting, String> = serde_json::from_str::<Posting>(trimmed)
            .map_err(|e| e.to_string())
            .and_then(|p| p.check().map(|_| p));
        match parsed {
            Ok(p) => out.postings.push(p),
            Err(reason) => {
                if strict {
                    return Err(Error::MalformedRecord { line: idx + 1, reason });
                }
                out.rejected += 1;
            }
        }
    }
    Ok(out)
}

pub fn read_postings_file(path: &Path, strict: bool) -> Result<ParseOutcome> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_postings(std::io::BufReader::new(file), strict)
}

/// Read regions.csv (header `region_id,country,english_status,expected_daily_postings`).
pub fn read_regions(path: &Path) -> Result<Vec<RegionMeta>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut metas = Vec::new();
    for (idx, record) in reader.deserialize::<RegionMeta>().enumerate() {
        let meta = record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        if meta.english_status > 2 {
            return Err(Error::MalformedRecord {
                line: idx + 2,
                reason: format!("english_status {} outside {{0,1,2}}", meta.english_status),
            });
        }
        if meta.expected_daily_postings < 0.0 {
            return Err(Error::MalformedRecord {
                line: idx + 2,
                reason: "negative expected_daily_postings".into(),
            });
        }
        metas.push(meta);
    }
    Ok(metas)
}

/// Classify every day of the window as valid or invalid under the
/// six-hour-gap rule, reporting the longest gap touching each day.
pub fn day_validity(
    postings: &[Posting],
    window: DayWindow,
) -> Result<BTreeMap<NaiveDate, DayValidity>> {
    let window_start = window.start.and_hms_opt(0, 0, 0).unwrap().and_utc();
    let window_end = (window.end + Duration::days(1)).and_hms_opt(0, 0, 0).unwrap().and_utc();

    let mut stamps: Vec<DateTime<Utc>> = postings
        .iter()
        .map(|p| p.timestamp)
        .filter(|t| *t >= window_start && *t < window_end)
        .collect();
    stamps.sort_unstable();

    let mut report: BTreeMap<NaiveDate, DayValidity> = window
        .days()
        .map(|d| (d, DayValidity { valid: true, max_gap_minutes: 0 }))
        .collect();

    let mut mark_gap = |from: DateTime<Utc>, to: DateTime<Utc>| {
        if to <= from {
            return;
        }
        let gap = to - from;
        let invalid = gap > Duration::hours(6);
        // Every window day the open interval (from, to) overlaps.
        let first = from.date_naive();
        let last = (to - Duration::seconds(1)).date_naive();
        let mut d = first.max(window.start);
        let stop = last.min(window.end);
        while d <= stop {
            let entry = report.get_mut(&d).unwrap();
            entry.max_gap_minutes = entry.max_gap_minutes.max(gap.num_minutes());
            if invalid {
                entry.valid = false;
            }
            d += Duration::days(1);
        }
    };

    let mut prev = window_start;
    for t in &stamps {
        mark_gap(prev, *t);
        prev = *t;
    }
    mark_gap(prev, window_end);

    Ok(report)
}

/// Partition postings into one bundle per (day, region) pair with at least
/// one posting. Validity is copied from the day verdict as a flag, not a
/// filter. Postings outside the validity window are dropped.
pub fn group_region_day(
    postings: Vec<Posting>,
    validity: &BTreeMap<NaiveDate, DayValidity>,
) -> Vec<RegionDayBundle> {
    let mut cells: BTreeMap<(NaiveDate, String), Vec<Posting>> = BTreeMap::new();
    for posting in postings {
        let day = posting.day();
        if !validity.contains_key(&day) {
            continue;
        }
        cells.entry((day, posting.region_id.clone())).or_default().push(posting);
    }
    cells
        .into_iter()
        .map(|((day, region_id), postings)| RegionDayBundle {
            valid: validity[&day].valid,
            day,
            region_id,
            postings,
        })
        .collect()
}

/// Total raw posting counts per (region, day), used by the >100-postings
/// training filter and by peak finding.
pub fn raw_volumes(bundles: &[RegionDayBundle]) -> BTreeMap<(String, NaiveDate), u64> {
    bundles
        .iter()
        .map(|b| ((b.region_id.clone(), b.day), b.postings.len() as u64))
        .collect()
}
