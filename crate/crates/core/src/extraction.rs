//! Top-k answer span search over extractive start/end logits.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::prediction_log::{CandidateAnswer, ModelKind, PredictionRecord, SpanLogitRecord, Split};

pub const DEFAULT_K: usize = 20;
pub const DEFAULT_MAX_ANSWER_LENGTH: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractionConfig {
    pub k: usize,
    /// Maximum span length in tokens.
    pub max_answer_length: usize,
}

impl Default for ExtractionConfig {
    fn default() -> Self {
        ExtractionConfig {
            k: DEFAULT_K,
            max_answer_length: DEFAULT_MAX_ANSWER_LENGTH,
        }
    }
}

impl ExtractionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidConfig("k must be at least 1".into()));
        }
        if self.max_answer_length == 0 {
            return Err(Error::InvalidConfig(
                "max_answer_length must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Span {
    pub start_tok: usize,
    pub end_tok: usize,
    /// Sum of the start logit at `start_tok` and the end logit at `end_tok`.
    pub z_ans: f64,
    pub text: String,
}

impl Span {
    pub fn len(&self) -> usize {
        self.end_tok - self.start_tok + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Ranking used for candidate spans: higher score first, then earlier start,
/// then shorter span.
pub fn span_order(a: (f64, usize, usize), b: (f64, usize, usize)) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then(a.1.cmp(&b.1))
        .then((a.2 - a.1).cmp(&(b.2 - b.1)))
}

/// Returns the `cfg.k` highest-scoring valid spans, best first.
///
/// A span is valid when both endpoints are context tokens, `start <= end` and
/// it is at most `cfg.max_answer_length` tokens long. For every end token only
/// the preceding `max_answer_length` starts are visited.
pub fn extract_top_k_spans(rec: &SpanLogitRecord, cfg: &ExtractionConfig) -> Result<Vec<Span>> {
    cfg.validate()?;
    let n = rec.len();
    let mut scored: Vec<(f64, usize, usize)> = Vec::new();
    for end in 0..n {
        if !rec.context_mask[end] {
            continue;
        }
        let first = (end + 1).saturating_sub(cfg.max_answer_length);
        for start in first..=end {
            if rec.context_mask[start] {
                scored.push((rec.start_logits[start] + rec.end_logits[end], start, end));
            }
        }
    }
    if scored.is_empty() {
        return Err(Error::EmptyCandidates {
            qid: rec.qid.clone(),
        });
    }
    if scored.len() > cfg.k {
        scored.select_nth_unstable_by(cfg.k - 1, |a, b| span_order(*a, *b));
        scored.truncate(cfg.k);
    }
    scored.sort_unstable_by(|a, b| span_order(*a, *b));

    Ok(scored
        .into_iter()
        .map(|(z_ans, start_tok, end_tok)| Span {
            start_tok,
            end_tok,
            z_ans,
            text: rec.span_text(start_tok, end_tok),
        })
        .collect())
}

/// Builds a prediction-log record from the top-k spans of `rec`.
///
/// The gold answer is the context text under the gold span, so the record
/// must carry both gold indices.
pub fn extract_prediction_record(
    rec: &SpanLogitRecord,
    cfg: &ExtractionConfig,
    dataset: &str,
    split: Split,
) -> Result<PredictionRecord> {
    let gold_start = rec.gold_start.ok_or_else(|| Error::MissingGold {
        qid: rec.qid.clone(),
        which: "start",
    })?;
    let gold_end = rec.gold_end.ok_or_else(|| Error::MissingGold {
        qid: rec.qid.clone(),
        which: "end",
    })?;
    let spans = extract_top_k_spans(rec, cfg)?;
    let candidates = spans
        .into_iter()
        .map(|span| {
            CandidateAnswer::extractive(
                span.text,
                rec.start_logits[span.start_tok],
                rec.end_logits[span.end_tok],
            )
        })
        .collect();
    Ok(PredictionRecord {
        qid: rec.qid.clone(),
        language: rec.language.clone(),
        dataset: dataset.to_string(),
        split,
        model_kind: ModelKind::Extractive,
        gold_answers: vec![rec.span_text(gold_start, gold_end)],
        candidates,
        parallel_id: None,
        embedding: None,
    })
}
