//! Per-(day, region) feature extraction: 22 daily features, 50 lagged
//! features over a 3-day moving window, normalization by the expected
//! regional posting rate, and the appended expected-rate feature, for a
//! 73-long vector.
//!
//! Canonical feature ordering (index -> name):
//!   0      Lang
//!   1      TOT
//!   2-11   T00-10 .. T90-100     bucket counts
//!   12-21  P00-10 .. P90-100     bucket fractions
//!   22-31  T3P00-10 .. T3P90-100 3-day bucket counts
//!   32-41  M3P00-10 .. M3P90-100 3-day bucket fractions
//!   42-51  A3P00-10 .. A3P90-100 mean of the three daily fractions
//!   52-61  D1T00-10 .. D1T90-100 day-over-day count deltas
//!   62-71  I3T00-10 .. I3T90-100 max recent increase (non-negative)
//!   72     EXPECTED              expected daily postings for the region
//!
//! The ordering is persisted in model files as a digest to guard against
//! train/serve skew.

use std::collections::BTreeMap;
use std::fmt;

use chrono::{Duration, NaiveDate};
use once_cell::sync::Lazy;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ingest::{DayWindow, RegionDayBundle, RegionMeta};

pub const FEATURE_COUNT: usize = 73;
pub const BUCKETS: usize = 10;

/// Index of a probability interval (a, b] with a = index/10, b = (index+1)/10.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketIndex(pub usize);

/// Map a relevance probability to its bucket. The first bucket is closed
/// below so that p = 0 does not fall out of the partition.
pub fn bucket_index(p: f64) -> Result<BucketIndex> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidProbability(p));
    }
    // Compare against the f64 representations of the decade edges rather
    // than multiplying, so edge values land on the inclusive upper bound.
    for i in 0..BUCKETS {
        if p <= (i + 1) as f64 / 10.0 {
            return Ok(BucketIndex(i));
        }
    }
    Ok(BucketIndex(BUCKETS - 1))
}

/// The 22 daily features of one (day, region) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DailyFeatures {
    pub lang: u8,
    pub tot: u64,
    pub t: [u64; BUCKETS],
    pub p: [f64; BUCKETS],
}

impl DailyFeatures {
    /// Features of a day with no postings in the region.
    pub fn empty(lang: u8) -> Self {
        DailyFeatures { lang, tot: 0, t: [0; BUCKETS], p: [0.0; BUCKETS] }
    }
}

/// Compute the daily features for a bundle. The bundle must belong to a
/// valid day; invalid days must not be featurized.
pub fn daily_features(bundle: &RegionDayBundle, meta: &RegionMeta) -> Result<DailyFeatures> {
    if !bundle.valid {
        return Err(Error::InvalidDay { day: bundle.day, region: bundle.region_id.clone() });
    }
    let mut t = [0u64; BUCKETS];
    for posting in &bundle.postings {
        t[bucket_index(posting.relevance)?.0] += 1;
    }
    let tot = bundle.postings.len() as u64;
    let mut p = [0.0; BUCKETS];
    if tot > 0 {
        for i in 0..BUCKETS {
            p[i] = t[i] as f64 / tot as f64;
        }
    }
    Ok(DailyFeatures { lang: meta.english_status, tot, t, p })
}

/// Daily features stamped with their (day, region) cell, the unit the
/// 3-day window operates on.
#[derive(Debug, Clone)]
pub struct RegionDayFeatures {
    pub day: NaiveDate,
    pub region_id: String,
    pub daily: DailyFeatures,
}

/// The 50 lagged features computed over days {d-2, d-1, d}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaggedFeatures {
    /// Per-bucket counts summed over the three days.
    pub t3p: [u64; BUCKETS],
    /// Per-bucket fractions of the 3-day totals; sum to 1 when nonempty.
    pub m3p: [f64; BUCKETS],
    /// Mean of the three daily fractions.
    pub a3p: [f64; BUCKETS],
    /// t_d - t_{d-1}; may be negative.
    pub d1t: [i64; BUCKETS],
    /// max(0, t_d - t_{d-1}, t_{d-1} - t_{d-2}).
    pub i3t: [u64; BUCKETS],
}

/// Compute the lagged features from three consecutive valid days of the
/// same region, oldest first.
pub fn lagged_features(
    two_back: &RegionDayFeatures,
    one_back: &RegionDayFeatures,
    current: &RegionDayFeatures,
) -> Result<LaggedFeatures> {
    if two_back.region_id != one_back.region_id || one_back.region_id != current.region_id {
        return Err(Error::LaggedWindow(format!(
            "regions differ: {} / {} / {}",
            two_back.region_id, one_back.region_id, current.region_id
        )));
    }
    if one_back.day != two_back.day + Duration::days(1)
        || current.day != one_back.day + Duration::days(1)
    {
        return Err(Error::LaggedWindow(format!(
            "days not consecutive: {} / {} / {}",
            two_back.day, one_back.day, current.day
        )));
    }

    let (a, b, c) = (&two_back.daily, &one_back.daily, &current.daily);
    let mut out = LaggedFeatures {
        t3p: [0; BUCKETS],
        m3p: [0.0; BUCKETS],
        a3p: [0.0; BUCKETS],
        d1t: [0; BUCKETS],
        i3t: [0; BUCKETS],
    };
    for i in 0..BUCKETS {
        out.t3p[i] = a.t[i] + b.t[i] + c.t[i];
        out.a3p[i] = (a.p[i] + b.p[i] + c.p[i]) / 3.0;
        out.d1t[i] = c.t[i] as i64 - b.t[i] as i64;
        let rise1 = c.t[i] as i64 - b.t[i] as i64;
        let rise2 = b.t[i] as i64 - a.t[i] as i64;
        out.i3t[i] = rise1.max(rise2).max(0) as u64;
    }
    let window_total: u64 = out.t3p.iter().sum();
    if window_total > 0 {
        for i in 0..BUCKETS {
            out.m3p[i] = out.t3p[i] as f64 / window_total as f64;
        }
    }
    Ok(out)
}

/// Which feature families are divided by the expected posting rate.
///
/// Table I defines T3P as counts while the normalization text lists it
/// among the proportion exceptions; both readings are available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizationPolicy {
    /// Normalize every count-valued family {TOT, T, T3P, D1T, I3T};
    /// exempt the proportion-valued {Lang, P, M3P, A3P}.
    #[default]
    Consistent,
    /// Exempt exactly {Lang, P, T3P} as the normalization text lists them.
    TextLiteral,
}

impl NormalizationPolicy {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "consistent" => Ok(NormalizationPolicy::Consistent),
            "text-literal" => Ok(NormalizationPolicy::TextLiteral),
            other => Err(Error::Config {
                field: "policy".into(),
                reason: format!("unknown policy {other:?}; expected consistent|text-literal"),
            }),
        }
    }

    /// Per-index mask: true when the feature is divided by the expected rate.
    fn normalized_mask(self) -> [bool; FEATURE_COUNT] {
        let mut mask = [false; FEATURE_COUNT];
        let mut set = |range: std::ops::Range<usize>| {
            for i in range {
                mask[i] = true;
            }
        };
        set(IDX_TOT..IDX_TOT + 1);
        set(IDX_T..IDX_T + BUCKETS);
        set(IDX_D1T..IDX_D1T + BUCKETS);
        set(IDX_I3T..IDX_I3T + BUCKETS);
        match self {
            NormalizationPolicy::Consistent => set(IDX_T3P..IDX_T3P + BUCKETS),
            NormalizationPolicy::TextLiteral => {
                set(IDX_M3P..IDX_M3P + BUCKETS);
                set(IDX_A3P..IDX_A3P + BUCKETS);
            }
        }
        mask
    }
}

impl fmt::Display for NormalizationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormalizationPolicy::Consistent => write!(f, "consistent"),
            NormalizationPolicy::TextLiteral => write!(f, "text-literal"),
        }
    }
}

pub const IDX_LANG: usize = 0;
pub const IDX_TOT: usize = 1;
pub const IDX_T: usize = 2;
pub const IDX_P: usize = 12;
pub const IDX_T3P: usize = 22;
pub const IDX_M3P: usize = 32;
pub const IDX_A3P: usize = 42;
pub const IDX_D1T: usize = 52;
pub const IDX_I3T: usize = 62;
pub const IDX_EXPECTED: usize = 72;

/// Canonical feature names, in vector order.
pub static FEATURE_NAMES: Lazy<Vec<String>> = Lazy::new(|| {
    let mut names = Vec::with_capacity(FEATURE_COUNT);
    names.push("Lang".to_string());
    names.push("TOT".to_string());
    for prefix in ["T", "P", "T3P", "M3P", "A3P", "D1T", "I3T"] {
        for i in 0..BUCKETS {
            names.push(format!("{prefix}{:02}-{}", i * 10, (i + 1) * 10));
        }
    }
    names.push("EXPECTED".to_string());
    names
});

/// Checksum over the canonical ordering, stored in model files so a model
/// trained against one ordering refuses rows built against another.
pub fn feature_order_digest() -> String {
    let mut hasher = Sha256::new();
    hasher.update(FEATURE_NAMES.join(",").as_bytes());
    hex_string(&hasher.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Training label of a (day, region) row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Label {
    True,
    False,
    Undefined,
    #[default]
    Unlabeled,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::True => "true",
            Label::False => "false",
            Label::Undefined => "undefined",
            Label::Unlabeled => "unlabeled",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "true" => Ok(Label::True),
            "false" => Ok(Label::False),
            "undefined" => Ok(Label::Undefined),
            "unlabeled" => Ok(Label::Unlabeled),
            other => Err(Error::Other(format!("unknown label {other:?}"))),
        }
    }
}

/// A (day, region) cell with its 73 normalized feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub day: NaiveDate,
    pub region_id: String,
    /// Exactly FEATURE_COUNT values in canonical order.
    pub values: Vec<f64>,
    /// True when the 3-day window behind this row was fully valid.
    /// Incomplete rows never enter training or evaluation.
    pub complete: bool,
    pub label: Label,
    pub event_id: Option<String>,
}

/// Assemble and normalize the full 73-vector for one cell.
pub fn normalize_features(
    daily: &DailyFeatures,
    lagged: &LaggedFeatures,
    meta: &RegionMeta,
    policy: NormalizationPolicy,
) -> Result<Vec<f64>> {
    let expected = meta.expected_daily_postings;
    if expected <= 0.0 {
        return Err(Error::ZeroExpectedRate(meta.region_id.clone()));
    }
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    values.push(daily.lang as f64);
    values.push(daily.tot as f64);
    values.extend(daily.t.iter().map(|&v| v as f64));
    values.extend(daily.p.iter().copied());
    values.extend(lagged.t3p.iter().map(|&v| v as f64));
    values.extend(lagged.m3p.iter().copied());
    values.extend(lagged.a3p.iter().copied());
    values.extend(lagged.d1t.iter().map(|&v| v as f64));
    values.extend(lagged.i3t.iter().map(|&v| v as f64));
    values.push(expected);
    debug_assert_eq!(values.len(), FEATURE_COUNT);

    let mask = policy.normalized_mask();
    for (i, value) in values.iter_mut().enumerate() {
        if mask[i] {
            *value /= expected;
        }
    }
    Ok(values)
}

/// Expected daily postings from a one-month baseline count.
pub fn expected_rate(monthly_count: f64, days_in_month: u32) -> f64 {
    monthly_count / days_in_month as f64
}

/// Build feature rows for every (region, valid day) cell of the window.
///
/// Valid days with no postings for a region contribute an all-zero daily
/// block (TOT = 0). A row is complete only when the day and its two
/// predecessors are all valid and inside the window; incomplete rows carry
/// zeroed lagged features and are flagged for exclusion.
pub fn featurize(
    bundles: &[RegionDayBundle],
    metas: &[RegionMeta],
    validity: &BTreeMap<NaiveDate, crate::ingest::DayValidity>,
    window: DayWindow,
    policy: NormalizationPolicy,
) -> Result<Vec<FeatureRow>> {
    let mut by_region: BTreeMap<&str, BTreeMap<NaiveDate, &RegionDayBundle>> = BTreeMap::new();
    for bundle in bundles {
        by_region.entry(bundle.region_id.as_str()).or_default().insert(bundle.day, bundle);
    }

    let is_valid = |day: NaiveDate| validity.get(&day).map(|v| v.valid).unwrap_or(false);

    let zero_lagged = LaggedFeatures {
        t3p: [0; BUCKETS],
        m3p: [0.0; BUCKETS],
        a3p: [0.0; BUCKETS],
        d1t: [0; BUCKETS],
        i3t: [0; BUCKETS],
    };

    let mut rows = Vec::new();
    for meta in metas {
        let region_bundles = by_region.get(meta.region_id.as_str());
        let stamped = |day: NaiveDate| -> Result<RegionDayFeatures> {
            let daily = match region_bundles.and_then(|m| m.get(&day)) {
                Some(bundle) => daily_features(bundle, meta)?,
                None => DailyFeatures::empty(meta.english_status),
            };
            Ok(RegionDayFeatures { day, region_id: meta.region_id.clone(), daily })
        };
        for day in window.days() {
            if !is_valid(day) {
                continue;
            }
            let current = stamped(day)?;
            let d1 = day - Duration::days(1);
            let d2 = day - Duration::days(2);
            let complete =
                window.contains(d2) && is_valid(d1) && is_valid(d2);
            let lagged = if complete {
                lagged_features(&stamped(d2)?, &stamped(d1)?, &current)?
            } else {
                zero_lagged.clone()
            };
            let values = normalize_features(&current.daily, &lagged, meta, policy)?;
            rows.push(FeatureRow {
                day,
                region_id: meta.region_id.clone(),
                values,
                complete,
                label: Label::Unlabeled,
                event_id: None,
            });
        }
    }
    Ok(rows)
}

/// Write features.csv: `day,region_id,complete,label,f000..f072`, with
/// the canonical ordering recorded in a header comment.
pub fn write_features_csv(
    rows: &[FeatureRow],
    path: &std::path::Path,
    meta: &crate::artifact::ArtifactMeta,
) -> Result<()> {
    use std::io::Write;
    let mut writer = crate::artifact::create_with_header(path, meta)?;
    let io_err = |e| Error::io(path, e);
    writeln!(writer, "# feature order: {}", FEATURE_NAMES.join(" ")).map_err(io_err)?;
    writeln!(writer, "# feature order digest: {}", feature_order_digest()).map_err(io_err)?;
    let headers: Vec<String> = (0..FEATURE_COUNT).map(|i| format!("f{i:03}")).collect();
    writeln!(writer, "day,region_id,complete,label,{}", headers.join(",")).map_err(io_err)?;
    for row in rows {
        let values: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        writeln!(
            writer,
            "{},{},{},{},{}",
            row.day,
            row.region_id,
            row.complete,
            row.label.as_str(),
            values.join(",")
        )
        .map_err(io_err)?;
    }
    writer.flush().map_err(io_err)
}

/// Read a features.csv file back into rows (event ids are not part of the
/// format; join labels.csv for those).
pub fn read_features_csv(path: &std::path::Path) -> Result<Vec<FeatureRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| Error::Other(format!("cannot open {}: {e}", path.display())))?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::MalformedRecord { line: idx + 2, reason: e.to_string() })?;
        let bad = |reason: String| Error::MalformedRecord { line: idx + 2, reason };
        if record.len() != 4 + FEATURE_COUNT {
            return Err(bad(format!("expected {} columns, got {}", 4 + FEATURE_COUNT, record.len())));
        }
        let day: NaiveDate =
            record[0].parse().map_err(|e| bad(format!("day: {e}")))?;
        let complete: bool =
            record[2].parse().map_err(|e| bad(format!("complete: {e}")))?;
        let label = Label::parse(&record[3])?;
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for i in 0..FEATURE_COUNT {
            values.push(record[4 + i].parse::<f64>().map_err(|e| bad(format!("f{i:03}: {e}")))?);
        }
        rows.push(FeatureRow {
            day,
            region_id: record[1].to_string(),
            values,
            complete,
            label,
            event_id: None,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Posting;
    use approx::assert_abs_diff_eq;

    fn meta(region: &str, lang: u8, expected: f64) -> RegionMeta {
        RegionMeta {
            region_id: region.to_string(),
            country: region.split('.').next().unwrap().to_string(),
            english_status: lang,
            expected_daily_postings: expected,
        }
    }

    fn bundle(day: &str, region: &str, relevances: &[f64]) -> RegionDayBundle {
        let day: NaiveDate = day.parse().unwrap();
        let postings = relevances
            .iter()
            .enumerate()
            .map(|(i, &p)| Posting {
                id: format!("{i}"),
                timestamp: day.and_hms_opt(12, 0, 0).unwrap().and_utc(),
                region_id: region.to_string(),
                country: region.split('.').next().unwrap().to_string(),
                relevance: p,
            })
            .collect();
        RegionDayBundle { day, region_id: region.to_string(), postings, valid: true }
    }

    fn stamped(day: &str, region: &str, daily: DailyFeatures) -> RegionDayFeatures {
        RegionDayFeatures { day: day.parse().unwrap(), region_id: region.to_string(), daily }
    }

    #[test]
    fn bucket_boundaries() {
        assert_eq!(bucket_index(0.05).unwrap().0, 0);
        assert_eq!(bucket_index(0.10).unwrap().0, 0);
        assert_eq!(bucket_index(0.0).unwrap().0, 0);
        assert_eq!(bucket_index(1.0).unwrap().0, 9);
        for k in 1..=9 {
            // Each decade edge belongs to the bucket below it.
            assert_eq!(bucket_index(k as f64 / 10.0).unwrap().0, k - 1, "edge 0.{k}");
        }
        assert!(bucket_index(1.2).is_err());
        assert!(bucket_index(-0.1).is_err());
    }

    #[test]
    fn daily_features_counts_and_fractions() {
        let b = bundle("2019-05-01", "USA.1.1", &[0.05, 0.95, 0.92]);
        let f = daily_features(&b, &meta("USA.1.1", 1, 10.0)).unwrap();
        assert_eq!(f.tot, 3);
        assert_eq!(f.t[0], 1);
        assert_eq!(f.t[9], 2);
        assert_abs_diff_eq!(f.p[0], 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.p[9], 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(f.t.iter().sum::<u64>(), f.tot);
    }

    #[test]
    fn daily_features_empty_bundle() {
        let b = bundle("2019-05-01", "USA.1.1", &[]);
        let f = daily_features(&b, &meta("USA.1.1", 0, 10.0)).unwrap();
        assert_eq!(f.tot, 0);
        assert!(f.t.iter().all(|&c| c == 0));
        assert!(f.p.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn daily_features_single_bucket() {
        let b = bundle("2019-05-01", "USA.1.1", &[0.55; 100]);
        let f = daily_features(&b, &meta("USA.1.1", 2, 10.0)).unwrap();
        assert_eq!(f.t[5], 100);
        assert_abs_diff_eq!(f.p[5], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn daily_features_rejects_invalid_day() {
        let mut b = bundle("2019-05-01", "USA.1.1", &[0.5]);
        b.valid = false;
        assert!(daily_features(&b, &meta("USA.1.1", 1, 10.0)).is_err());
    }

    fn daily_with_t(t: [u64; BUCKETS], lang: u8) -> DailyFeatures {
        let tot: u64 = t.iter().sum();
        let mut p = [0.0; BUCKETS];
        if tot > 0 {
            for i in 0..BUCKETS {
                p[i] = t[i] as f64 / tot as f64;
            }
        }
        DailyFeatures { lang, tot, t, p }
    }

    #[test]
    fn lagged_formulas() {
        let mut t_a = [0; BUCKETS];
        let mut t_b = [0; BUCKETS];
        let mut t_c = [0; BUCKETS];
        t_a[9] = 2;
        t_b[9] = 5;
        t_c[9] = 3;
        let a = stamped("2019-05-01", "R.1", daily_with_t(t_a, 1));
        let b = stamped("2019-05-02", "R.1", daily_with_t(t_b, 1));
        let c = stamped("2019-05-03", "R.1", daily_with_t(t_c, 1));
        let lag = lagged_features(&a, &b, &c).unwrap();
        assert_eq!(lag.t3p[9], 10);
        assert_eq!(lag.d1t[9], -2);
        assert_eq!(lag.i3t[9], 3);
    }

    #[test]
    fn lagged_identical_days() {
        let mut t = [0; BUCKETS];
        t[4] = 7;
        t[8] = 3;
        let mk = |day| stamped(day, "R.1", daily_with_t(t, 1));
        let lag =
            lagged_features(&mk("2019-05-01"), &mk("2019-05-02"), &mk("2019-05-03")).unwrap();
        assert!(lag.d1t.iter().all(|&d| d == 0));
        assert!(lag.i3t.iter().all(|&i| i == 0));
        let daily = daily_with_t(t, 1);
        for i in 0..BUCKETS {
            assert_abs_diff_eq!(lag.m3p[i], daily.p[i], epsilon = 1e-12);
        }
    }

    #[test]
    fn lagged_monotone_growth() {
        let mut t_a = [0; BUCKETS];
        let mut t_b = [0; BUCKETS];
        let mut t_c = [0; BUCKETS];
        t_a[4] = 1;
        t_b[4] = 2;
        t_c[4] = 4;
        let lag = lagged_features(
            &stamped("2019-05-01", "R.1", daily_with_t(t_a, 1)),
            &stamped("2019-05-02", "R.1", daily_with_t(t_b, 1)),
            &stamped("2019-05-03", "R.1", daily_with_t(t_c, 1)),
        )
        .unwrap();
        assert_eq!(lag.d1t[4], 2);
        assert_eq!(lag.i3t[4], 2);
    }

    #[test]
    fn lagged_rejects_gaps_and_region_mixes() {
        let d = daily_with_t([0; BUCKETS], 1);
        let a = stamped("2019-05-01", "R.1", d.clone());
        let skip = stamped("2019-05-03", "R.1", d.clone());
        let c = stamped("2019-05-04", "R.1", d.clone());
        assert!(lagged_features(&a, &skip, &c).is_err());
        let other = stamped("2019-05-02", "R.2", d.clone());
        let b3 = stamped("2019-05-03", "R.1", d);
        assert!(lagged_features(&a, &other, &b3).is_err());
    }

    #[test]
    fn normalization_divides_counts_not_proportions() {
        let b = bundle("2019-05-01", "USA.1.1", &[0.95; 20].iter().chain(&[0.5; 30]).copied().collect::<Vec<_>>());
        let m = meta("USA.1.1", 1, 25.0);
        let daily = daily_features(&b, &m).unwrap();
        let zero = LaggedFeatures {
            t3p: [0; BUCKETS],
            m3p: [0.0; BUCKETS],
            a3p: [0.0; BUCKETS],
            d1t: [0; BUCKETS],
            i3t: [0; BUCKETS],
        };
        let v = normalize_features(&daily, &zero, &m, NormalizationPolicy::Consistent).unwrap();
        assert_eq!(v.len(), FEATURE_COUNT);
        assert_abs_diff_eq!(v[IDX_TOT], 2.0, epsilon = 1e-12); // 50 / 25
        assert_abs_diff_eq!(v[IDX_P + 9], 0.4, epsilon = 1e-12); // proportions untouched
        assert_abs_diff_eq!(v[IDX_LANG], 1.0, epsilon = 1e-12); // lang untouched
        assert_abs_diff_eq!(v[IDX_EXPECTED], 25.0, epsilon = 1e-12);
    }

    #[test]
    fn policies_differ_only_on_the_contested_families() {
        let mask_c = NormalizationPolicy::Consistent.normalized_mask();
        let mask_t = NormalizationPolicy::TextLiteral.normalized_mask();
        for i in 0..FEATURE_COUNT {
            let contested = (IDX_T3P..IDX_A3P + BUCKETS).contains(&i);
            if !contested {
                assert_eq!(mask_c[i], mask_t[i], "index {i}");
            }
        }
        assert!(mask_c[IDX_T3P] && !mask_c[IDX_M3P] && !mask_c[IDX_A3P]);
        assert!(!mask_t[IDX_T3P] && mask_t[IDX_M3P] && mask_t[IDX_A3P]);
        assert!(!mask_c[IDX_LANG] && !mask_c[IDX_EXPECTED]);
    }

    #[test]
    fn normalization_rejects_zero_rate() {
        let m = meta("USA.1.1", 1, 0.0);
        let daily = DailyFeatures::empty(1);
        let zero = LaggedFeatures {
            t3p: [0; BUCKETS],
            m3p: [0.0; BUCKETS],
            a3p: [0.0; BUCKETS],
            d1t: [0; BUCKETS],
            i3t: [0; BUCKETS],
        };
        assert!(normalize_features(&daily, &zero, &m, NormalizationPolicy::Consistent).is_err());
    }

    #[test]
    fn expected_rate_divides_by_month_length() {
        assert_abs_diff_eq!(expected_rate(900.0, 30), 30.0);
        assert_abs_diff_eq!(expected_rate(0.0, 30), 0.0);
        assert_abs_diff_eq!(expected_rate(62.0, 31), 2.0);
    }

    #[test]
    fn canonical_names_have_expected_shape() {
        assert_eq!(FEATURE_NAMES.len(), FEATURE_COUNT);
        assert_eq!(FEATURE_NAMES[0], "Lang");
        assert_eq!(FEATURE_NAMES[1], "TOT");
        assert_eq!(FEATURE_NAMES[IDX_T], "T00-10");
        assert_eq!(FEATURE_NAMES[IDX_T + 9], "T90-100");
        assert_eq!(FEATURE_NAMES[IDX_I3T + 9], "I3T90-100");
        assert_eq!(FEATURE_NAMES[IDX_EXPECTED], "EXPECTED");
        assert_eq!(feature_order_digest().len(), 64);
    }
}
