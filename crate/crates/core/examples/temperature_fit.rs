//! Fitting temperatures: a family with a closed-form optimum, an extractive
//! dual fit, and a generative fit on a synthetic overconfident log.

use qacal::calibrate::{
    fit_dual_temperature, fit_generative_temperature, fit_single_temperature, nll_single, FitConfig,
};
use qacal::metrics::{compute_ece, BinningConfig, Matcher};
use qacal::prediction_log::{CandidateAnswer, ModelKind, PredictionRecord, SpanLogitRecord, Split};
use qacal::scoring::{score_records, ScoringOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qacal::Result<()> {
    let cfg = FitConfig::default();

    // Logits [2, 0], gold index 0 twice and 1 once: the optimum is 2 / ln 2.
    let golds = [0, 0, 1];
    let fit = fit_single_temperature(
        |tau| {
            golds
                .iter()
                .map(|&g| nll_single(&[2.0, 0.0], g, tau))
                .sum::<f64>()
                / 3.0
        },
        &cfg,
    )?;
    println!(
        "closed form: tau {:.4} (2/ln2 = {:.4}), NLL {:.4} -> {:.4}",
        fit.tau.unwrap(),
        2.0 / std::f64::consts::LN_2,
        fit.fit_nll_before.unwrap(),
        fit.fit_nll_after.unwrap()
    );

    let spans: Vec<SpanLogitRecord> = golds
        .iter()
        .enumerate()
        .map(|(i, &g)| SpanLogitRecord {
            qid: format!("s{i}"),
            language: "en".into(),
            start_logits: vec![2.0, 0.0],
            end_logits: vec![3.0, 0.0],
            context_mask: vec![true, true],
            token_offsets: vec![(0, 3), (4, 7)],
            context_text: "red fox".into(),
            gold_start: Some(g),
            gold_end: Some(g),
        })
        .collect();
    println!(
        "dual fit: {}",
        fit_dual_temperature(&spans, &cfg)?.to_json().trim()
    );

    // Candidates drawn from softmax(z) but logged as 3z.
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let records: Vec<PredictionRecord> = (0..500)
        .map(|i| {
            let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let total: f64 = z.iter().map(|v| v.exp()).sum();
            let mut u = rng.gen::<f64>() * total;
            let gold = z
                .iter()
                .position(|v| {
                    u -= v.exp();
                    u < 0.0
                })
                .unwrap_or(3);
            PredictionRecord {
                qid: format!("g{i}"),
                language: "en".into(),
                dataset: "synthetic".into(),
                split: Split::Validation,
                model_kind: ModelKind::Generative,
                gold_answers: vec![format!("answer {gold}")],
                candidates: z
                    .iter()
                    .enumerate()
                    .map(|(j, v)| CandidateAnswer::generative(format!("answer {j}"), 3.0 * v - 8.0))
                    .collect(),
                parallel_id: None,
                embedding: None,
            }
        })
        .collect();
    let matcher = Matcher::default();
    let params = fit_generative_temperature(&records, &matcher, &cfg)?;
    let bins = BinningConfig::default();
    let before = score_records(&records, None, &matcher, ScoringOptions::default())?;
    let after = score_records(&records, Some(&params), &matcher, ScoringOptions::default())?;
    println!(
        "generative fit: T = {:.3}, ECE {:.2} -> {:.2}",
        params.tau.unwrap(),
        100.0 * compute_ece(&before, &bins)?,
        100.0 * compute_ece(&after, &bins)?
    );
    Ok(())
}
