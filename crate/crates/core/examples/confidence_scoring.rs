//! Candidate confidences for extractive and generative records, with and
//! without temperatures.

use qacal::metrics::Matcher;
use qacal::prediction_log::{CandidateAnswer, ModelKind, PredictionRecord, Split};
use qacal::scoring::{score_record, ScoringOptions, TemperatureParams};

fn record(kind: ModelKind, candidates: Vec<CandidateAnswer>) -> PredictionRecord {
    PredictionRecord {
        qid: format!("{kind}-1"),
        language: "en".into(),
        dataset: "toy".into(),
        split: Split::Test,
        model_kind: kind,
        gold_answers: vec!["the Nile".into()],
        candidates,
        parallel_id: None,
        embedding: None,
    }
}

fn show(
    label: &str,
    rec: &PredictionRecord,
    temps: Option<&TemperatureParams>,
) -> qacal::Result<()> {
    let s = score_record(rec, temps, &Matcher::default(), ScoringOptions::default())?;
    let probs: Vec<String> = s
        .candidate_confidences
        .iter()
        .map(|p| format!("{p:.3}"))
        .collect();
    println!(
        "{label:<24} answer={:?} correct={} confidence={:.3} all=[{}]",
        s.answer_text,
        s.correct,
        s.confidence,
        probs.join(", ")
    );
    Ok(())
}

fn main() -> qacal::Result<()> {
    let extractive = record(
        ModelKind::Extractive,
        vec![
            CandidateAnswer::extractive("Nile", 6.0, 5.5),
            CandidateAnswer::extractive("the Nile river", 4.0, 3.0),
            CandidateAnswer::extractive("Amazon", 1.0, 2.0),
        ],
    );
    show("extractive", &extractive, None)?;
    show(
        "extractive, dual 2.0/1.5",
        &extractive,
        Some(&TemperatureParams::dual(2.0, 1.5)),
    )?;

    let generative = record(
        ModelKind::Generative,
        vec![
            CandidateAnswer::generative("Nile", -0.3),
            CandidateAnswer::generative("The Nile", -1.1),
            CandidateAnswer::generative("Amazon", -4.0),
        ],
    );
    show("generative", &generative, None)?;
    show(
        "generative, T = 1",
        &generative,
        Some(&TemperatureParams::single(1.0)),
    )?;
    show(
        "generative, T = 3",
        &generative,
        Some(&TemperatureParams::single(3.0)),
    )?;
    show(
        "generative, T = 0.5",
        &generative,
        Some(&TemperatureParams::single(0.5)),
    )?;
    Ok(())
}
