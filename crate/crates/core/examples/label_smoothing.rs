//! Label-smoothed targets for a class vector and for span positions.

use qacal::calibrate::{smooth_span_targets, smooth_targets, SmoothingConfig};
use qacal::prediction_log::SpanLogitRecord;

fn main() -> qacal::Result<()> {
    println!("C=4 gold=2 alpha=0.1: {:?}", smooth_targets(4, 2, 0.1)?);
    println!("C=4 gold=2 alpha=0:   {:?}", smooth_targets(4, 2, 0.0)?);

    // Question tokens (mask false) get no target mass.
    let rec = SpanLogitRecord {
        qid: "s".into(),
        language: "en".into(),
        start_logits: vec![0.0; 5],
        end_logits: vec![0.0; 5],
        context_mask: vec![false, false, true, true, true],
        token_offsets: vec![(0, 0), (0, 0), (0, 3), (4, 7), (8, 12)],
        context_text: "red fox runs".into(),
        gold_start: Some(3),
        gold_end: Some(4),
    };
    let targets = smooth_span_targets(
        &rec,
        &SmoothingConfig {
            alpha_start: 0.1,
            alpha_end: 0.3,
        },
    )?;
    println!("start {:?}", targets.start_targets);
    println!("end   {:?}", targets.end_targets);
    Ok(())
}
