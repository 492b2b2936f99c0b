//! Parse a prediction log, print warnings, and split records by language.
//!
//! Usage: `cargo run --example validate_log [LOG]`

use std::fs::File;
use std::io::BufReader;

use qacal::prediction_log::{parse_log, partition_by_language, LogReader, ParseOptions};

const SAMPLE: &str = r#"{"qid":"q1","language":"en","dataset":"xquad","split":"test","model_kind":"generative","gold_answers":["Denver Broncos"],"candidates":[{"text":"Denver Broncos","log_prob":-0.2},{"text":"Broncos","log_prob":-1.9}]}
{"qid":"q2","language":"de","dataset":"xquad","split":"test","model_kind":"generative","gold_answers":["Denver Broncos"],"candidates":[{"text":"die Broncos","log_prob":-0.4},{"text":"Denver Broncos","log_prob":0.1}]}
{"qid":"q3","language":"xx","dataset":"xquad","split":"test","model_kind":"generative","gold_answers":["1984"],"candidates":[{"text":"1984","log_prob":-0.01}]}
{"qid":"q4","language":"en","dataset":"xquad","split":"test","model_kind":"generative","gold_answers":["7"],"candidates":[{"text":"seven","log_prob":NaN}]}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args().nth(1);
    let text = match &path {
        Some(p) => std::io::read_to_string(BufReader::new(File::open(p)?))?,
        None => SAMPLE.to_string(),
    };

    // Streaming: keep going past bad lines.
    let mut reader = LogReader::new(text.as_bytes(), ParseOptions::default());
    for rec in reader.by_ref() {
        match rec {
            Ok(r) => println!(
                "ok     {} ({}, {} candidates)",
                r.qid,
                r.language,
                r.candidates.len()
            ),
            Err(e) => println!("error  {e}"),
        }
    }
    for w in reader.warnings() {
        println!("warn   {w}");
    }

    // Strict: the first bad line fails the whole log.
    match parse_log(text.as_bytes(), ParseOptions::default()) {
        Ok(log) => {
            for (lang, recs) in partition_by_language(log.records) {
                println!("{lang}: {} records", recs.len());
            }
        }
        Err(e) => println!("strict parse failed: {e}"),
    }
    Ok(())
}
