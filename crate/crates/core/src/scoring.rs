//! Candidate confidences for extractive and generative models, with optional
//! temperature scaling.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{Calibrated, Matcher};
use crate::prediction_log::{
    CandidateAnswer, CandidateScore, HasLanguage, ModelKind, PredictionRecord,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TemperatureKind {
    /// One temperature over sequence log-probabilities.
    Single,
    /// Separate temperatures for start and end logits.
    Dual,
}

/// Fitted (or hand-written) temperatures plus fit diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TemperatureParams {
    pub kind: TemperatureKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_nll_before: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_nll_after: Option<f64>,
    #[serde(default)]
    pub hit_bound: bool,
    /// Records left out of the fit because no candidate matched a gold answer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub excluded_count: Option<usize>,
}

fn check_tau(name: &str, value: Option<f64>) -> Result<f64> {
    match value {
        Some(t) if t.is_finite() && t > 0.0 => Ok(t),
        Some(t) => Err(Error::InvalidConfig(format!(
            "{name} must be positive and finite, got {t}"
        ))),
        None => Err(Error::InvalidConfig(format!("{name} is required"))),
    }
}

impl TemperatureParams {
    pub fn single(tau: f64) -> Self {
        TemperatureParams {
            kind: TemperatureKind::Single,
            tau: Some(tau),
            tau_start: None,
            tau_end: None,
            fit_nll_before: None,
            fit_nll_after: None,
            hit_bound: false,
            excluded_count: None,
        }
    }

    pub fn dual(tau_start: f64, tau_end: f64) -> Self {
        TemperatureParams {
            kind: TemperatureKind::Dual,
            tau: None,
            tau_start: Some(tau_start),
            tau_end: Some(tau_end),
            ..TemperatureParams::single(1.0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            TemperatureKind::Single => {
                check_tau("tau", self.tau)?;
            }
            TemperatureKind::Dual => {
                check_tau("tau_start", self.tau_start)?;
                check_tau("tau_end", self.tau_end)?;
            }
        }
        Ok(())
    }

    pub fn from_reader<R: Read>(reader: R) -> Result<Self> {
        let params: TemperatureParams = serde_json::from_reader(reader)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("temperature params serialize") + "\n"
    }

    fn single_tau(&self) -> Result<f64> {
        if self.kind != TemperatureKind::Single {
            return Err(Error::InvalidConfig(
                "generative confidences need single temperature parameters".into(),
            ));
        }
        check_tau("tau", self.tau)
    }

    fn dual_taus(&self) -> Result<(f64, f64)> {
        if self.kind != TemperatureKind::Dual {
            return Err(Error::InvalidConfig(
                "extractive confidences need dual temperature parameters".into(),
            ));
        }
        Ok((
            check_tau("tau_start", self.tau_start)?,
            check_tau("tau_end", self.tau_end)?,
        ))
    }
}

/// Log-sum-exp with max subtraction.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

pub fn log_softmax(xs: &[f64]) -> Vec<f64> {
    let lse = log_sum_exp(xs);
    xs.iter().map(|x| x - lse).collect()
}

/// Softmax of `start/tau_start + end/tau_end` over the candidates.
pub fn extractive_confidences(
    candidates: &[CandidateAnswer],
    temps: Option<&TemperatureParams>,
) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("empty candidate list".into()));
    }
    let (tau_start, tau_end) = match temps {
        Some(t) => t.dual_taus()?,
        None => (1.0, 1.0),
    };
    let scores = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| match c.score {
            CandidateScore::Extractive {
                start_logit,
                end_logit,
            } => Ok(start_logit / tau_start + end_logit / tau_end),
            CandidateScore::Generative { .. } => Err(Error::InvalidConfig(format!(
                "candidate {i} has no start/end logits"
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(softmax(&scores))
}

fn log_probs(candidates: &[CandidateAnswer]) -> Result<Vec<f64>> {
    if candidates.is_empty() {
        return Err(Error::InvalidConfig("empty candidate list".into()));
    }
    candidates
        .iter()
        .enumerate()
        .map(|(i, c)| match c.score {
            CandidateScore::Generative { log_prob } => Ok(log_prob),
            CandidateScore::Extractive { .. } => Err(Error::InvalidConfig(format!(
                "candidate {i} has no log_prob"
            ))),
        })
        .collect()
}

/// Log of the candidate-normalized sequence probabilities, `log p̂`.
pub fn generative_logits(candidates: &[CandidateAnswer]) -> Result<Vec<f64>> {
    Ok(log_softmax(&log_probs(candidates)?))
}

/// Normalized sequence probabilities, optionally re-tempered as
/// `softmax(log p̂ / T)`.
pub fn generative_confidences(
    candidates: &[CandidateAnswer],
    temp: Option<&TemperatureParams>,
) -> Result<Vec<f64>> {
    let lps = log_probs(candidates)?;
    match temp {
        None => Ok(softmax(&lps)),
        Some(t) => {
            let tau = t.single_tau()?;
            let scaled: Vec<f64> = log_softmax(&lps).into_iter().map(|z| z / tau).collect();
            Ok(softmax(&scaled))
        }
    }
}

pub fn candidate_confidences(
    rec: &PredictionRecord,
    temps: Option<&TemperatureParams>,
) -> Result<Vec<f64>> {
    match rec.model_kind {
        ModelKind::Extractive => extractive_confidences(&rec.candidates, temps),
        ModelKind::Generative => generative_confidences(&rec.candidates, temps),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoredPrediction {
    pub qid: String,
    pub language: String,
    pub answer_text: String,
    pub answer_index: usize,
    /// Confidence assigned to the selected answer.
    pub confidence: f64,
    pub correct: bool,
    pub candidate_confidences: Vec<f64>,
    pub parallel_id: Option<String>,
}

impl Calibrated for ScoredPrediction {
    fn confidence(&self) -> f64 {
        self.confidence
    }

    fn correct(&self) -> bool {
        self.correct
    }
}

impl HasLanguage for ScoredPrediction {
    fn language(&self) -> &str {
        &self.language
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ScoringOptions {
    /// Pick the answer from the tempered confidences instead of the raw ones.
    /// Only matters when dual temperatures reorder candidates.
    pub rerank: bool,
}

/// Index of the first maximum.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in xs.iter().enumerate().skip(1) {
        if *x > xs[best] {
            best = i;
        }
    }
    best
}

/// Selects the answer and its confidence for one record.
///
/// The answer is the first candidate with maximal untempered confidence;
/// temperatures only change the reported confidence unless
/// `opts.rerank` is set.
pub fn score_record(
    rec: &PredictionRecord,
    temps: Option<&TemperatureParams>,
    matcher: &Matcher,
    opts: ScoringOptions,
) -> Result<ScoredPrediction> {
    let raw = candidate_confidences(rec, None)?;
    let tempered = match temps {
        Some(_) => candidate_confidences(rec, temps)?,
        None => raw.clone(),
    };
    let answer_index = if opts.rerank {
        argmax(&tempered)
    } else {
        argmax(&raw)
    };
    let answer_text = rec.candidates[answer_index].text.clone();
    let correct = matcher.matches(&answer_text, &rec.gold_answers, &rec.language);
    Ok(ScoredPrediction {
        qid: rec.qid.clone(),
        language: rec.language.clone(),
        answer_text,
        answer_index,
        confidence: tempered[answer_index],
        correct,
        candidate_confidences: tempered,
        parallel_id: rec.parallel_id.clone(),
    })
}

pub fn score_records(
    records: &[PredictionRecord],
    temps: Option<&TemperatureParams>,
    matcher: &Matcher,
    opts: ScoringOptions,
) -> Result<Vec<ScoredPrediction>> {
    records
        .iter()
        .map(|rec| score_record(rec, temps, matcher, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prediction_log::Split;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    fn ext(pairs: &[(f64, f64)]) -> Vec<CandidateAnswer> {
        pairs
            .iter()
            .enumerate()
            .map(|(i, &(s, e))| CandidateAnswer::extractive(format!("c{i}"), s, e))
            .collect()
    }

    fn gen(lps: &[f64]) -> Vec<CandidateAnswer> {
        lps.iter()
            .enumerate()
            .map(|(i, &lp)| CandidateAnswer::generative(format!("c{i}"), lp))
            .collect()
    }

    #[test]
    fn extractive_examples() {
        let v = extractive_confidences(&ext(&[(2.0, 1.0), (0.0, 1.0)]), None).unwrap();
        assert!(close(
            &v,
            &[0.880_797_077_977_882_3, 0.119_202_922_022_117_7],
            1e-12
        ));

        let v = extractive_confidences(&ext(&[(1.5, -2.0); 4]), None).unwrap();
        assert!(close(&v, &[0.25; 4], 1e-15));

        let temps = TemperatureParams::dual(2.0, 2.0);
        let v = extractive_confidences(&ext(&[(2.0, 0.0), (0.0, 0.0)]), Some(&temps)).unwrap();
        assert!(close(
            &v,
            &[0.731_058_578_630_004_9, 0.268_941_421_369_995_1],
            1e-12
        ));
    }

    #[test]
    fn generative_examples() {
        let v = generative_confidences(&gen(&[0.3f64.ln(), 0.1f64.ln()]), None).unwrap();
        assert!(close(&v, &[0.75, 0.25], 1e-12));

        let v = generative_confidences(&gen(&[-4.2; 7]), None).unwrap();
        assert!(close(&v, &[1.0 / 7.0; 7], 1e-15));

        let cands = gen(&[-0.1, -2.5, -7.0, -0.9]);
        let plain = generative_confidences(&cands, None).unwrap();
        let unit = generative_confidences(&cands, Some(&TemperatureParams::single(1.0))).unwrap();
        assert!(close(&plain, &unit, 1e-12));
    }

    #[test]
    fn large_logits_are_stable() {
        let v = extractive_confidences(&ext(&[(400.0, 350.0), (399.0, 350.0)]), None).unwrap();
        assert!(v.iter().all(|x| x.is_finite()));
        assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kind_checks() {
        let single = TemperatureParams::single(2.0);
        assert!(extractive_confidences(&ext(&[(1.0, 1.0)]), Some(&single)).is_err());
        let dual = TemperatureParams::dual(2.0, 2.0);
        assert!(generative_confidences(&gen(&[-1.0]), Some(&dual)).is_err());
        assert!(extractive_confidences(&gen(&[-1.0]), None).is_err());
        assert!(extractive_confidences(&[], None).is_err());
        assert!(generative_confidences(&[], None).is_err());
    }

    #[test]
    fn params_document_roundtrip() {
        let doc = r#"{"kind":"dual","tau_start":1.5,"tau_end":2.0}"#;
        let p = TemperatureParams::from_reader(doc.as_bytes()).unwrap();
        assert_eq!(p, TemperatureParams::dual(1.5, 2.0));
        let back = TemperatureParams::from_reader(p.to_json().as_bytes()).unwrap();
        assert_eq!(back, p);

        assert!(TemperatureParams::from_reader(r#"{"kind":"single"}"#.as_bytes()).is_err());
        assert!(
            TemperatureParams::from_reader(r#"{"kind":"single","tau":-1}"#.as_bytes()).is_err()
        );
        assert!(
            TemperatureParams::from_reader(r#"{"kind":"single","tau":1,"x":0}"#.as_bytes())
                .is_err()
        );
    }

    fn record(kind: ModelKind, candidates: Vec<CandidateAnswer>, gold: &str) -> PredictionRecord {
        PredictionRecord {
            qid: "q".into(),
            language: "en".into(),
            dataset: "toy".into(),
            split: Split::Test,
            model_kind: kind,
            gold_answers: vec![gold.into()],
            candidates,
            parallel_id: None,
            embedding: None,
        }
    }

    #[test]
    fn score_record_selects_top_candidate() {
        let rec = record(ModelKind::Extractive, ext(&[(2.0, 1.0), (0.0, 1.0)]), "C0");
        let scored =
            score_record(&rec, None, &Matcher::default(), ScoringOptions::default()).unwrap();
        assert_eq!(scored.answer_text, "c0");
        assert!(scored.correct);
        assert_eq!(scored.confidence, scored.candidate_confidences[0]);
    }

    #[test]
    fn ties_pick_first_candidate() {
        let rec = record(ModelKind::Generative, gen(&[-1.0, -1.0]), "c1");
        let scored =
            score_record(&rec, None, &Matcher::default(), ScoringOptions::default()).unwrap();
        assert_eq!(scored.answer_index, 0);
        assert!(!scored.correct);
    }

    #[test]
    fn temperatures_keep_answer_unless_reranking() {
        // Raw scores 3.0 vs 2.5; with tau_start = 10 the second wins.
        let rec = record(ModelKind::Extractive, ext(&[(3.0, 0.0), (0.0, 2.5)]), "c0");
        let temps = TemperatureParams::dual(10.0, 1.0);
        let matcher = Matcher::default();
        let fixed = score_record(&rec, Some(&temps), &matcher, ScoringOptions::default()).unwrap();
        assert_eq!(fixed.answer_index, 0);
        assert!(fixed.correct);
        let reranked = score_record(
            &rec,
            Some(&temps),
            &matcher,
            ScoringOptions { rerank: true },
        )
        .unwrap();
        assert_eq!(reranked.answer_index, 1);
        assert!(!reranked.correct);
    }
}
