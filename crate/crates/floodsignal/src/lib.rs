//! Offline detection of flood events from relevance-scored social-media
//! postings.
//!
//! The crate turns a stream of timestamped, geolocated postings — each
//! carrying a model-assigned flood-relevance probability — into per-day,
//! per-region alerts. The stages compose on disk and in memory:
//!
//! 1. [`synthgen`] draws a reproducible synthetic posting corpus with
//!    configurable flood bursts and collection outages.
//! 2. [`ingest`] parses postings, applies the six-hour-gap day-validity
//!    rule, and groups postings into (region, day) bundles.
//! 3. [`features`] computes the 73-dimensional daily feature vector
//!    (language flag, volume, probability histograms, three-day lags,
//!    expected rate) with volume normalization.
//! 4. [`labeler`] converts ground-truth event windows into weak
//!    True/False/Undefined day labels via peak-finding.
//! 5. [`forest`] selects features by ANOVA F-score and fits a shallow
//!    random forest with soft voting.
//! 6. [`evaluator`] runs stratified cross-validation, ROC analysis, and
//!    the event-grouped leave-one-out experiment.
//! 7. [`pipeline`] wires the stages under a single TOML config with a
//!    single master seed; reruns are byte-identical.
//!
//! See the `examples/` directory for one runnable program per stage and
//! `floodsignal --help` for the command-line interface.

pub mod artifact;
pub mod error;
pub mod evaluator;
pub mod features;
pub mod forest;
pub mod ingest;
pub mod labeler;
pub mod pipeline;
pub mod seed;
pub mod synthgen;

pub use error::{Error, Result};
