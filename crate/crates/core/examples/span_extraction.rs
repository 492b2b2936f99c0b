//! Top-k answer spans from start/end logits, and the prediction-log record
//! built from them.

use qacal::extraction::{extract_prediction_record, extract_top_k_spans, ExtractionConfig};
use qacal::prediction_log::{to_json_line, SpanLogitRecord, Split};

fn main() -> qacal::Result<()> {
    // "[CLS] who won ? [SEP] the denver broncos won super bowl 50"
    let context = "the denver broncos won super bowl 50";
    let words: Vec<&str> = context.split(' ').collect();
    let mut offsets = vec![(0, 0); 5];
    let mut pos = 0;
    for w in &words {
        offsets.push((pos, pos + w.chars().count()));
        pos += w.chars().count() + 1;
    }
    let n = offsets.len();
    let mut context_mask = vec![false; 5];
    context_mask.extend(std::iter::repeat_n(true, words.len()));

    let mut start_logits = vec![-5.0; n];
    let mut end_logits = vec![-5.0; n];
    start_logits[6] = 4.0; // denver
    start_logits[7] = 3.0; // broncos
    start_logits[5] = 1.0; // the
    end_logits[7] = 4.5; // broncos
    end_logits[8] = 0.5; // won
    end_logits[6] = 1.0; // denver

    let rec = SpanLogitRecord {
        qid: "sb50".into(),
        language: "en".into(),
        start_logits,
        end_logits,
        context_mask,
        token_offsets: offsets,
        context_text: context.into(),
        gold_start: Some(6),
        gold_end: Some(7),
    };

    let cfg = ExtractionConfig {
        k: 5,
        max_answer_length: 30,
    };
    for span in extract_top_k_spans(&rec, &cfg)? {
        println!(
            "{:>6.2}  [{}, {}]  {:?}",
            span.z_ans, span.start_tok, span.end_tok, span.text
        );
    }

    let pred = extract_prediction_record(&rec, &cfg, "squad", Split::Validation)?;
    println!("{}", to_json_line(&pred));
    Ok(())
}
