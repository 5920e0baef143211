//! Weak labeling: convert ground-truth flood events into True / False /
//! Undefined labels on (day, region) cells, then apply the training-data
//! filters.
//!
//! Per event the True range is [d_b, d_e]: d_m is the peak of posting
//! volume inside the ground-truth span, d_b the beginning of the rise
//! leading to it (clamped to d_start - 10), and d_e = d_m + 1. Ten-day
//! Undefined buffers surround the ground-truth span, other regions of the
//! same country with no recorded flood are scrubbed over
//! [d_start - 5, d_end + 20], and regions with no flood in the whole
//! window are entirely Undefined. Precedence True > Undefined > False
//! resolves window collisions.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureRow, Label};
use crate::ingest::{DayWindow, RegionMeta};

/// One ground-truth flood event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthEvent {
    pub event_id: String,
    pub region_id: String,
    pub country: String,
    #[serde(rename = "start")]
    pub d_start: NaiveDate,
    #[serde(rename = "end")]
    pub d_end: NaiveDate,
}

/// The True-labeled range derived for one event.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelRange {
    pub event_id: String,
    pub d_b: NaiveDate,
    pub d_m: NaiveDate,
    pub d_e: NaiveDate,
}

/// Posting volume per valid day; invalid days are simply absent.
pub type DayVolumes = BTreeMap<NaiveDate, u64>;

/// Day of maximum posting volume within the ground-truth span, earliest
/// day on ties. None when no valid day carries volume data.
pub fn peak_day(volumes: &DayVolumes, event: &GroundTruthEvent) -> Option<NaiveDate> {
    volumes
        .range(event.d_start..=event.d_end)
        .fold(None, |best: Option<(NaiveDate, u64)>, (&day, &vol)| match best {
            Some((_, best_vol)) if vol <= best_vol => best,
            _ => Some((day, vol)),
        })
        .map(|(day, _)| day)
}

/// Beginning of the activity rise that ends at the peak: walk backward
/// while each preceding valid day has strictly lower volume than its
/// successor, stopping at the first non-increase, a missing day, or the
/// clamp d_start - 10.
pub fn increase_start(volumes: &DayVolumes, d_m: NaiveDate, event: &GroundTruthEvent) -> NaiveDate {
    let clamp = event.d_start - Duration::days(10);
    let mut current = d_m;
    while current > clamp {
        let prev = current - Duration::days(1);
        let (Some(&prev_vol), Some(&cur_vol)) = (volumes.get(&prev), volumes.get(&current))
        else {
            break;
        };
        if prev_vol >= cur_vol {
            break;
        }
        current = prev;
    }
    current
}

/// Derive the full True range for an event, or None when the event has no
/// valid day with volume data (the event is excluded, not fatal).
pub fn label_range(volumes: &DayVolumes, event: &GroundTruthEvent) -> Option<LabelRange> {
    let d_m = peak_day(volumes, event)?;
    let d_b = increase_start(volumes, d_m, event);
    Some(LabelRange { event_id: event.event_id.clone(), d_b, d_m, d_e: d_m + Duration::days(1) })
}

/// Label verdict for one (region, day) cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelCell {
    pub label: Label,
    pub event_id: Option<String>,
}

/// Labels for every (region, day) cell of the window.
pub type LabelMap = BTreeMap<(String, NaiveDate), LabelCell>;

fn rank(label: Label) -> u8 {
    match label {
        Label::True => 3,
        Label::Undefined => 2,
        Label::False => 1,
        Label::Unlabeled => 0,
    }
}

/// Outcome of labeling: the cell map, the per-event True ranges, and
/// events excluded for lack of volume data.
#[derive(Debug)]
pub struct Labeling {
    pub cells: LabelMap,
    pub ranges: BTreeMap<String, LabelRange>,
    pub skipped_events: Vec<String>,
}

/// Assign labels over the whole (region, window-day) grid.
pub fn label_dataset(
    metas: &[RegionMeta],
    window: DayWindow,
    events: &[GroundTruthEvent],
    volumes_by_region: &BTreeMap<String, DayVolumes>,
) -> Labeling {
    let empty = DayVolumes::new();
    let mut ranges = BTreeMap::new();
    let mut skipped = Vec::new();
    for event in events {
        let volumes = volumes_by_region.get(&event.region_id).unwrap_or(&empty);
        match label_range(volumes, event) {
            Some(range) => {
                ranges.insert(event.event_id.clone(), range);
            }
            None => skipped.push(event.event_id.clone()),
        }
    }

    let has_event = |region: &str| events.iter().any(|e| e.region_id == region);

    // Base layer: False in flood regions, Undefined everywhere else.
    let mut cells: LabelMap = BTreeMap::new();
    for meta in metas {
        let base = if has_event(&meta.region_id) { Label::False } else { Label::Undefined };
        for day in window.days() {
            cells.insert(
                (meta.region_id.clone(), day),
                LabelCell { label: base, event_id: None },
            );
        }
    }

    let mut upgrade = |region: &str, from: NaiveDate, to: NaiveDate, label: Label, event: Option<&str>| {
        let mut day = from.max(window.start);
        let stop = to.min(window.end);
        while day <= stop {
            if let Some(cell) = cells.get_mut(&(region.to_string(), day)) {
                if rank(label) > rank(cell.label) {
                    cell.label = label;
                    cell.event_id = event.map(str::to_string);
                }
            }
            day += Duration::days(1);
        }
    };

    // Deterministic application order: events sorted by (start, id).
    let mut ordered: Vec<&GroundTruthEvent> = events.iter().collect();
    ordered.sort_by(|a, b| (a.d_start, &a.event_id).cmp(&(b.d_start, &b.event_id)));

    for event in &ordered {
        // Ten-day grey buffers around the ground-truth span.
        upgrade(
            &event.region_id,
            event.d_start - Duration::days(10),
            event.d_start - Duration::days(1),
            Label::Undefined,
            None,
        );
        upgrade(
            &event.region_id,
            event.d_end + Duration::days(1),
            event.d_end + Duration::days(10),
            Label::Undefined,
            None,
        );

        // Geocoding-ambiguity scrub: other regions of the same country
        // with no flood recorded in this period.
        let scrub_start = event.d_start - Duration::days(5);
        let scrub_end = event.d_end + Duration::days(20);
        for meta in metas {
            if meta.country != event.country || meta.region_id == event.region_id {
                continue;
            }
            let flooded_in_period = events.iter().any(|other| {
                other.region_id == meta.region_id
                    && other.d_start <= scrub_end
                    && other.d_end >= scrub_start
            });
            if !flooded_in_period {
                upgrade(&meta.region_id, scrub_start, scrub_end, Label::Undefined, None);
            }
        }
    }

    // True ranges last; the rank upgrade merges overlapping ranges and
    // keeps the first event's id on contested days.
    for event in &ordered {
        if let Some(range) = ranges.get(&event.event_id) {
            upgrade(&event.region_id, range.d_b, range.d_e, Label::True, Some(&event.event_id));
        }
    }

    Labeling { cells, ranges, skipped_events: skipped }
}

/// Copy labels onto feature rows in place.
pub fn apply_labels(rows: &mut [FeatureRow], labeling: &Labeling) {
    for row in rows {
        if let Some(cell) = labeling.cells.get(&(row.region_id.clone(), row.day)) {
            row.label = cell.label;
            row.event_id = cell.event_id.clone();
        }
    }
}

/// Keep only rows usable for training: True/False label, English an
/// official language (1st or 2nd), complete 3-day window, and strictly
/// more than 100 raw collected postings on the day.
pub fn training_filter(
    rows: &[FeatureRow],
    metas: &[RegionMeta],
    raw_counts: &BTreeMap<(String, NaiveDate), u64>,
) -> Vec<FeatureRow> {
    let english: BTreeMap<&str, u8> =
        metas.iter().map(|m| (m.region_id.as_str(), m.english_status)).collect();
    rows.iter()
        .filter(|row| {
            matches!(row.label, Label::True | Label::False)
                && row.complete
                && matches!(english.get(row.region_id.as_str()), Some(1) | Some(2))
                && raw_counts
                    .get(&(row.region_id.clone(), row.day))
                    .map(|&c| c > 100)
                    .unwrap_or(false)
        })
        .cloned()
        .collect()
}

/// Read events.csv (header `event_id,region_id,country,start,end`).
pub fn read_events(path: &Path) -> Result<Vec<GroundTruthEvent>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut events = Vec::new();
    for (idx, record) in reader.deserialize::<GroundTruthEvent>().enumerate() {
        let event = record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        if event.d_start > event.d_end {
            return Err(Error::MalformedRecord {
                line: idx + 2,
                reason: format!("event {} has start after end", event.event_id),
            });
        }
        events.push(event);
    }
    Ok(events)
}

/// Write labels.csv: `day,region_id,label,event_id` (event_id blank
/// except on True days).
pub fn write_labels_csv(
    labeling: &Labeling,
    path: &Path,
    meta: &crate::artifact::ArtifactMeta,
) -> Result<()> {
    use std::io::Write;
    let mut writer = crate::artifact::create_with_header(path, meta)?;
    let io_err = |e| Error::io(path, e);
    writeln!(writer, "day,region_id,label,event_id").map_err(io_err)?;
    for ((region, day), cell) in &labeling.cells {
        writeln!(
            writer,
            "{day},{region},{},{}",
            cell.label.as_str(),
            cell.event_id.as_deref().unwrap_or("")
        )
        .map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Read labels.csv back into a cell map.
pub fn read_labels_csv(path: &Path) -> Result<LabelMap> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut cells = LabelMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let day: NaiveDate = record[0]
            .parse()
            .map_err(|e| Error::MalformedRecord { line: idx + 2, reason: format!("day: {e}") })?;
        let label = Label::parse(&record[1 + 1])?;
        let event_id = record.get(3).filter(|s| !s.is_empty()).map(str::to_string);
        cells.insert((record[1].to_string(), day), LabelCell { label, event_id });
    }
    Ok(cells)
}

/// Recover per-event True ranges from a label cell map: the span of days
/// labeled True and attributed to the event in its region.
pub fn ranges_from_labels(cells: &LabelMap) -> BTreeMap<String, LabelRange> {
    let mut spans: BTreeMap<String, (NaiveDate, NaiveDate)> = BTreeMap::new();
    for ((_, day), cell) in cells {
        if cell.label != Label::True {
            continue;
        }
        let Some(event_id) = &cell.event_id else { continue };
        spans
            .entry(event_id.clone())
            .and_modify(|(lo, hi)| {
                *lo = (*lo).min(*day);
                *hi = (*hi).max(*day);
            })
            .or_insert((*day, *day));
    }
    spans
        .into_iter()
        .map(|(event_id, (d_b, d_e))| {
            // d_m = d_e - 1 by construction of the range end.
            let d_m = d_e - Duration::days(1);
            (event_id.clone(), LabelRange { event_id, d_b, d_m, d_e })
        })
        .collect()
}
