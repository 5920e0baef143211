//! Deterministic synthetic corpus generator: postings, region metadata,
//! baseline counts, and ground-truth events, so the full pipeline runs and
//! is regression-tested without the original (non-redistributable) data.
//!
//! Per region-day the posting count is Poisson with mean
//! baseline_rate x burst multiplier; the multiplier ramps linearly over
//! ramp_days up to the configured peak, then decays back to 1 by the event
//! end. Relevance values come from the background mixture, shifted toward
//! high relevance during events. Postings inside outage intervals are
//! deleted. Identical config + seed produce byte-identical files.
//!
//! A sidecar trace file records, per region-day, the intended mean, the
//! drawn count, and outage deletions; it is the oracle for derived
//! expected values downstream.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::artifact::{create_with_header, ArtifactMeta};
use crate::error::{Error, Result};
use crate::ingest::DayWindow;
use crate::seed::{self, stream};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub low: f64,
    pub high: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthRegion {
    pub region_id: String,
    pub country: String,
    pub english_status: u8,
    /// Background postings per day.
    pub baseline_rate: f64,
    pub relevance_mixture: Vec<MixtureComponent>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthEvent {
    pub event_id: String,
    pub region_id: String,
    pub start: NaiveDate,
    pub end: NaiveDate,
    pub burst_peak_multiplier: f64,
    pub ramp_days: u32,
    /// Probability that an event-day posting is drawn from the
    /// high-relevance band instead of the background mixture.
    pub flood_relevance_shift: f64,
}

impl SynthEvent {
    /// The day the burst multiplier reaches its configured maximum.
    pub fn peak_day(&self) -> NaiveDate {
        (self.start + Duration::days(self.ramp_days as i64)).min(self.end)
    }

    /// Burst multiplier on a day: linear ramp from the event start to the
    /// peak, linear decay back to 1 by the event end.
    pub fn multiplier(&self, day: NaiveDate) -> f64 {
        if day < self.start || day > self.end {
            return 1.0;
        }
        let peak = self.peak_day();
        let frac = if day <= peak {
            let span = (peak - self.start).num_days() + 1;
            ((day - self.start).num_days() + 1) as f64 / span as f64
        } else {
            let span = (self.end - peak).num_days();
            (self.end - day).num_days() as f64 / span as f64
        };
        1.0 + (self.burst_peak_multiplier - 1.0) * frac
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Outage {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub window: DayWindow,
    pub regions: Vec<SynthRegion>,
    #[serde(default)]
    pub events: Vec<SynthEvent>,
    #[serde(default)]
    pub outages: Vec<Outage>,
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<SynthConfig> {
        let config: SynthConfig = toml::from_str(text)
            .map_err(|e| Error::Config { field: "<synth config>".into(), reason: e.to_string() })?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |field: String, reason: String| Err(Error::Config { field, reason });
        if self.window.start > self.window.end {
            return fail("window".into(), "start after end".into());
        }
        if self.regions.is_empty() {
            return fail("regions".into(), "at least one region required".into());
        }
        for (i, region) in self.regions.iter().enumerate() {
            let at = |f: &str| format!("regions[{i}].{f}");
            if region.baseline_rate < 0.0 {
                return fail(at("baseline_rate"), "must be non-negative".into());
            }
            if region.english_status > 2 {
                return fail(at("english_status"), "must be 0, 1, or 2".into());
            }
            if region.relevance_mixture.is_empty() {
                return fail(at("relevance_mixture"), "needs at least one component".into());
            }
            for (j, c) in region.relevance_mixture.iter().enumerate() {
                if c.weight <= 0.0 || !(0.0..=1.0).contains(&c.low) || !(0.0..=1.0).contains(&c.high) || c.low > c.high {
                    return fail(
                        format!("regions[{i}].relevance_mixture[{j}]"),
                        "weight must be positive and 0 <= low <= high <= 1".into(),
                    );
                }
            }
            if !region.region_id.starts_with(&region.country) {
                return fail(at("region_id"), "must carry the country prefix".into());
            }
        }
        let region_ids: Vec<&str> = self.regions.iter().map(|r| r.region_id.as_str()).collect();
        for (i, event) in self.events.iter().enumerate() {
            let at = |f: &str| format!("events[{i}].{f}");
            if event.burst_peak_multiplier < 1.0 {
                return fail(at("burst_peak_multiplier"), "must be at least 1".into());
            }
            if !(0.0..=1.0).contains(&event.flood_relevance_shift) {
                return fail(at("flood_relevance_shift"), "must lie in [0, 1]".into());
            }
            if event.start > event.end {
                return fail(at("start"), "start after end".into());
            }
            if !region_ids.contains(&event.region_id.as_str()) {
                return fail(at("region_id"), format!("unknown region {}", event.region_id));
            }
        }
        let window_start = self.window.start.and_hms_opt(0, 0, 0).unwrap().and_utc();
        let window_end =
            (self.window.end + Duration::days(1)).and_hms_opt(0, 0, 0).unwrap().and_utc();
        for (i, outage) in self.outages.iter().enumerate() {
            if outage.start >= outage.end {
                return fail(format!("outages[{i}]"), "start must precede end".into());
            }
            if outage.start < window_start || outage.end > window_end {
                return fail(format!("outages[{i}]"), "must lie within the window".into());
            }
        }
        Ok(())
    }
}

/// Per region-day generation record, the oracle for derived values.
#[derive(Debug, Clone, Serialize)]
pub struct TraceRow {
    pub region_id: String,
    pub day: NaiveDate,
    pub event_id: String,
    pub multiplier: f64,
    pub expected_count: f64,
    pub drawn_count: u64,
    pub deleted_count: u64,
}

#[derive(Debug)]
pub struct GenerateSummary {
    pub emitted_postings: u64,
    pub drawn_postings: u64,
    pub deleted_postings: u64,
    pub trace: Vec<TraceRow>,
}

/// Days in the baseline month used for the expected-rate file.
pub const BASELINE_MONTH_DAYS: u32 = 30;

/// Generate postings.jsonl, regions.csv, baseline.csv, events.csv, and
/// trace.csv into `out_dir`.
pub fn generate(config: &SynthConfig, out_dir: &Path, meta: &ArtifactMeta) -> Result<GenerateSummary> {
    config.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |e: std::io::Error| Error::io(path.clone(), e)
    };

    // regions.csv
    let regions_path = out_dir.join("regions.csv");
    let mut regions_file = create_with_header(&regions_path, meta)?;
    writeln!(regions_file, "region_id,country,english_status,expected_daily_postings")
        .map_err(io_err(&regions_path))?;
    for region in &config.regions {
        writeln!(
            regions_file,
            "{},{},{},{}",
            region.region_id, region.country, region.english_status, region.baseline_rate
        )
        .map_err(io_err(&regions_path))?;
    }
    regions_file.flush().map_err(io_err(&regions_path))?;

    // baseline.csv: one synthetic month of background volume.
    let baseline_path = out_dir.join("baseline.csv");
    let mut baseline_file = create_with_header(&baseline_path, meta)?;
    writeln!(baseline_file, "region_id,monthly_postings,days_in_month")
        .map_err(io_err(&baseline_path))?;
    for region in &config.regions {
        writeln!(
            baseline_file,
            "{},{},{}",
            region.region_id,
            region.baseline_rate * BASELINE_MONTH_DAYS as f64,
            BASELINE_MONTH_DAYS
        )
        .map_err(io_err(&baseline_path))?;
    }
    baseline_file.flush().map_err(io_err(&baseline_path))?;

    // events.csv
    let events_path = out_dir.join("events.csv");
    let mut events_file = create_with_header(&events_path, meta)?;
    writeln!(events_file, "event_id,region_id,country,start,end").map_err(io_err(&events_path))?;
    for event in &config.events {
        let country = config
            .regions
            .iter()
            .find(|r| r.region_id == event.region_id)
            .map(|r| r.country.as_str())
            .unwrap_or("");
        writeln!(
            events_file,
            "{},{},{country},{},{}",
            event.event_id, event.region_id, event.start, event.end
        )
        .map_err(io_err(&events_path))?;
    }
    events_file.flush().map_err(io_err(&events_path))?;

    // postings.jsonl + trace.csv
    let postings_path = out_dir.join("postings.jsonl");
    let mut postings_file = create_with_header(&postings_path, meta)?;
    let trace_path = out_dir.join("trace.csv");
    let mut trace_file = create_with_header(&trace_path, meta)?;
    writeln!(
        trace_file,
        "region_id,day,event_id,multiplier,expected_count,drawn_count,deleted_count"
    )
    .map_err(io_err(&trace_path))?;

    let synth_seed = seed::derive(config.seed, stream::SYNTH);
    let in_outage = |ts: DateTime<Utc>| {
        config.outages.iter().any(|o| ts >= o.start && ts < o.end)
    };

    let mut summary = GenerateSummary {
        emitted_postings: 0,
        drawn_postings: 0,
        deleted_postings: 0,
        trace: Vec::new(),
    };

    let mut region_order: Vec<&SynthRegion> = config.regions.iter().collect();
    region_order.sort_by(|a, b| a.region_id.cmp(&b.region_id));

    for (region_idx, region) in region_order.iter().enumerate() {
        let mut rng = ChaCha12Rng::seed_from_u64(seed::derive(synth_seed, region_idx as u64));
        let weight_total: f64 = region.relevance_mixture.iter().map(|c| c.weight).sum();

        for day in config.window.days() {
            let active: Vec<&SynthEvent> = config
                .events
                .iter()
                .filter(|e| e.region_id == region.region_id && e.start <= day && day <= e.end)
                .collect();
            let multiplier =
                active.iter().map(|e| e.multiplier(day)).fold(1.0f64, f64::max);
            let shift = active
                .iter()
                .map(|e| e.flood_relevance_shift)
                .fold(0.0f64, f64::max);
            let mean = region.baseline_rate * multiplier;
            let drawn = if mean > 0.0 {
                Poisson::new(mean).unwrap().sample(&mut rng) as u64
            } else {
                0
            };

            let mut seconds: Vec<u32> = (0..drawn).map(|_| rng.gen_range(0..86_400)).collect();
            seconds.sort_unstable();

            let mut deleted = 0u64;
            let day_start = day.and_hms_opt(0, 0, 0).unwrap().and_utc();
            for (n, &s) in seconds.iter().enumerate() {
                let ts = day_start + Duration::seconds(s as i64);
                // Relevance is drawn regardless of outage deletion so the
                // stream after an outage is unaffected by its length.
                let pick = rng.gen_range(0.0..weight_total);
                let relevance = {
                    let mut acc = 0.0;
                    let mut value = 0.0;
                    for component in &region.relevance_mixture {
                        acc += component.weight;
                        if pick <= acc {
                            value = if component.low == component.high {
                                component.low
                            } else {
                                rng.gen_range(component.low..component.high)
                            };
                            break;
                        }
                    }
                    value
                };
                let shifted = shift > 0.0 && rng.gen_range(0.0..1.0) < shift;
                let relevance = if shifted { rng.gen_range(0.8..1.0) } else { relevance };

                if in_outage(ts) {
                    deleted += 1;
                    continue;
                }
                let record = serde_json::json!({
                    "id": format!("{}-{}-{}", region.region_id, day, n),
                    "ts": ts.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
                    "region_id": region.region_id,
                    "country": region.country,
                    "p": relevance,
                });
                writeln!(postings_file, "{record}").map_err(io_err(&postings_path))?;
                summary.emitted_postings += 1;
            }

            let event_id = active.first().map(|e| e.event_id.as_str()).unwrap_or("");
            writeln!(
                trace_file,
                "{},{day},{event_id},{multiplier},{mean},{drawn},{deleted}",
                region.region_id
            )
            .map_err(io_err(&trace_path))?;
            summary.drawn_postings += drawn;
            summary.deleted_postings += deleted;
            summary.trace.push(TraceRow {
                region_id: region.region_id.clone(),
                day,
                event_id: event_id.to_string(),
                multiplier,
                expected_count: mean,
                drawn_count: drawn,
                deleted_count: deleted,
            });
        }
    }
    postings_file.flush().map_err(io_err(&postings_path))?;
    trace_file.flush().map_err(io_err(&trace_path))?;

    Ok(summary)
}

/// Read baseline.csv into a per-region expected daily rate.
pub fn read_baseline(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut rates = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let region = record.get(0).unwrap_or("").to_string();
        let monthly: f64 = record
            .get(1)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::MalformedRecord { line: idx + 2, reason: format!("monthly_postings: {e}") })?;
        let days: u32 = record
            .get(2)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::MalformedRecord { line: idx + 2, reason: format!("days_in_month: {e}") })?;
        rates.insert(region, crate::features::expected_rate(monthly, days));
    }
    Ok(rates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest;
    use tempfile::tempdir;

    fn small_config() -> SynthConfig {
        SynthConfig {
            seed: 7,
            window: DayWindow::new(
                "2019-05-01".parse().unwrap(),
                "2019-05-20".parse().unwrap(),
            )
            .unwrap(),
            regions: vec![SynthRegion {
                region_id: "USA.1.1".into(),
                country: "USA".into(),
                english_status: 1,
                baseline_rate: 120.0,
                relevance_mixture: vec![
                    MixtureComponent { weight: 0.8, low: 0.0, high: 0.3 },
                    MixtureComponent { weight: 0.2, low: 0.3, high: 0.9 },
                ],
            }],
            events: vec![SynthEvent {
                event_id: "ev1".into(),
                region_id: "USA.1.1".into(),
                start: "2019-05-08".parse().unwrap(),
                end: "2019-05-14".parse().unwrap(),
                burst_peak_multiplier: 20.0,
                ramp_days: 3,
                flood_relevance_shift: 0.6,
            }],
            outages: vec![Outage {
                start: "2019-05-04T02:00:00Z".parse().unwrap(),
                end: "2019-05-04T09:30:00Z".parse().unwrap(),
            }],
        }
    }

    fn meta() -> ArtifactMeta {
        ArtifactMeta::new(7, "test")
    }

    #[test]
    fn generation_is_deterministic() {
        let config = small_config();
        let dir_a = tempdir().unwrap();
        let dir_b = tempdir().unwrap();
        generate(&config, dir_a.path(), &meta()).unwrap();
        generate(&config, dir_b.path(), &meta()).unwrap();
        for name in ["postings.jsonl", "regions.csv", "baseline.csv", "events.csv", "trace.csv"] {
            let a = std::fs::read(dir_a.path().join(name)).unwrap();
            let b = std::fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn conservation_of_postings() {
        let config = small_config();
        let dir = tempdir().unwrap();
        let summary = generate(&config, dir.path(), &meta()).unwrap();
        assert_eq!(
            summary.emitted_postings,
            summary.drawn_postings - summary.deleted_postings
        );
        let parsed = ingest::read_postings_file(&dir.path().join("postings.jsonl"), true).unwrap();
        assert_eq!(parsed.postings.len() as u64, summary.emitted_postings);
    }

    #[test]
    fn burst_peak_lands_on_configured_day() {
        let config = small_config();
        let dir = tempdir().unwrap();
        let summary = generate(&config, dir.path(), &meta()).unwrap();
        let configured_peak = config.events[0].peak_day();
        let generated_peak = summary
            .trace
            .iter()
            .max_by_key(|row| row.drawn_count)
            .map(|row| row.day)
            .unwrap();
        assert_eq!(generated_peak, configured_peak);
    }

    #[test]
    fn outage_day_invalid_downstream() {
        let config = small_config();
        let dir = tempdir().unwrap();
        generate(&config, dir.path(), &meta()).unwrap();
        let parsed = ingest::read_postings_file(&dir.path().join("postings.jsonl"), true).unwrap();
        let validity = ingest::day_validity(&parsed.postings, config.window).unwrap();
        assert!(!validity[&"2019-05-04".parse::<NaiveDate>().unwrap()].valid);
        // A quiet background day away from the outage stays valid.
        assert!(validity[&"2019-05-02".parse::<NaiveDate>().unwrap()].valid);
    }

    #[test]
    fn stationary_stream_all_days_valid() {
        let mut config = small_config();
        config.events.clear();
        config.outages.clear();
        let dir = tempdir().unwrap();
        generate(&config, dir.path(), &meta()).unwrap();
        let parsed = ingest::read_postings_file(&dir.path().join("postings.jsonl"), true).unwrap();
        let validity = ingest::day_validity(&parsed.postings, config.window).unwrap();
        assert!(validity.values().all(|v| v.valid));
    }

    #[test]
    fn config_validation_reports_field_paths() {
        let mut config = small_config();
        config.events[0].burst_peak_multiplier = 0.5;
        let err = config.validate().unwrap_err();
        assert!(err.to_string().contains("events[0].burst_peak_multiplier"));
    }
}
