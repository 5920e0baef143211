//! Run every pipeline stage under the shipped demo config and point at
//! the artifacts it leaves behind. Equivalent to:
//!
//! ```text
//! floodsignal run --config config/demo.toml --out <dir>
//! ```

use floodsignal::pipeline::run_pipeline;

fn main() -> floodsignal::Result<()> {
    let config =
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("config/demo.toml");
    let out_dir = std::env::temp_dir().join("floodsignal-end-to-end");

    let summary = run_pipeline(&config, &out_dir)?;

    println!("\n--- run summary ---");
    println!(
        "postings accepted: {} ({} of {} days valid)",
        summary.ingest.accepted, summary.ingest.valid_days, summary.ingest.total_days
    );
    println!("training rows: {} ({} True)", summary.training_rows, summary.true_rows);
    println!(
        "cross-validation: precision {:?}, recall {:.3}, AUC {:.3}",
        summary.cv.pooled_precision, summary.cv.pooled_recall, summary.cv.auc
    );
    println!(
        "leave-one-out: hit rate {:.2} over {} events ({} skipped)",
        summary.hit_rate, summary.events_evaluated, summary.events_skipped
    );
    println!("\nartifacts under {}:", summary.out_dir.display());
    for name in [
        "corpus/postings.jsonl",
        "ingest/validity.csv",
        "features.csv",
        "labels/labels.csv",
        "labels/training.csv",
        "model.json",
        "eval/metrics.csv",
        "eval/roc.svg",
        "loo/report.csv",
    ] {
        println!("  {name}");
    }
    Ok(())
}
