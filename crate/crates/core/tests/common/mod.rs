//! Brute-force reference implementations and random fixtures shared by the
//! integration tests. Nothing here calls into the library's numerics.
#![allow(dead_code)]

use qacal::prediction_log::{CandidateAnswer, ModelKind, PredictionRecord, SpanLogitRecord, Split};
use rand::Rng;

/// ECE straight from the definition: bin `k` holds confidences in
/// `((k-1)/M, k/M]`, with anything at or below zero in the first bin.
pub fn brute_force_ece(preds: &[(f64, bool)], bins: usize) -> f64 {
    let m = bins as f64;
    let mut total = 0.0;
    for k in 1..=bins {
        let lo = (k - 1) as f64 / m;
        let hi = k as f64 / m;
        let members: Vec<&(f64, bool)> = preds
            .iter()
            .filter(|(c, _)| {
                let above = *c > lo || (k == 1 && *c <= lo);
                let below = *c <= hi || (k == bins && *c > hi);
                above && below
            })
            .collect();
        if members.is_empty() {
            continue;
        }
        let size = members.len() as f64;
        let acc = members.iter().filter(|(_, ok)| *ok).count() as f64 / size;
        let conf = members.iter().map(|(c, _)| c).sum::<f64>() / size;
        total += size / preds.len() as f64 * (acc - conf).abs();
    }
    total
}

/// Every valid span of `rec`, best first: score descending, then start
/// ascending, then length ascending.
pub fn brute_force_spans(rec: &SpanLogitRecord, max_len: usize) -> Vec<(f64, usize, usize)> {
    let n = rec.start_logits.len();
    let mut all = Vec::new();
    for s in 0..n {
        for e in 0..n {
            if s <= e && e - s < max_len && rec.context_mask[s] && rec.context_mask[e] {
                all.push((rec.start_logits[s] + rec.end_logits[e], s, e));
            }
        }
    }
    all.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then((a.2 - a.1).cmp(&(b.2 - b.1)))
    });
    all
}

pub fn textbook_cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for i in 0..a.len() {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// Pool indices sorted by descending cosine with a stable sort, first `k`.
pub fn brute_force_icl(query: &[f64], pool: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pool.len()).collect();
    let sims: Vec<f64> = pool.iter().map(|v| textbook_cosine(query, v)).collect();
    idx.sort_by(|&i, &j| sims[j].partial_cmp(&sims[i]).unwrap());
    idx.truncate(k);
    idx
}

pub fn naive_pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for i in 0..x.len() {
        num += (x[i] - mx) * (y[i] - my);
        dx += (x[i] - mx).powi(2);
        dy += (y[i] - my).powi(2);
    }
    num / (dx * dy).sqrt()
}

/// Naive softmax with max subtraction.
pub fn reference_softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().cloned().fold(f64::MIN, f64::max);
    let e: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.iter().map(|v| v / s).collect()
}

/// Random span-logit record with whitespace-separated single-letter tokens.
/// Logits are drawn from a small half-integer lattice so ties are common.
pub fn random_span_record<R: Rng>(rng: &mut R, qid: &str, max_tokens: usize) -> SpanLogitRecord {
    let n = rng.gen_range(1..=max_tokens);
    let question = rng.gen_range(0..n.min(4));
    let mut context_mask: Vec<bool> = (0..n).map(|i| i >= question).collect();
    for m in context_mask.iter_mut().skip(question) {
        if rng.gen_bool(0.1) {
            *m = false;
        }
    }
    if !context_mask.iter().any(|&m| m) {
        context_mask[n - 1] = true;
    }
    let mut text = String::new();
    let mut token_offsets = Vec::with_capacity(n);
    for &ctx in &context_mask {
        if ctx {
            if !text.is_empty() {
                text.push(' ');
            }
            let from = text.chars().count();
            text.push(char::from(b'a' + rng.gen_range(0..26u8)));
            token_offsets.push((from, from + 1));
        } else {
            token_offsets.push((0, 0));
        }
    }
    let lattice = |rng: &mut R| f64::from(rng.gen_range(-8i32..=8)) / 2.0;
    let start_logits = (0..n).map(|_| lattice(rng)).collect();
    let end_logits = (0..n).map(|_| lattice(rng)).collect();
    let ctx: Vec<usize> = (0..n).filter(|&i| context_mask[i]).collect();
    let a = ctx[rng.gen_range(0..ctx.len())];
    let b = ctx[rng.gen_range(0..ctx.len())];
    SpanLogitRecord {
        qid: qid.to_string(),
        language: "en".into(),
        start_logits,
        end_logits,
        context_mask,
        token_offsets,
        context_text: text,
        gold_start: Some(a.min(b)),
        gold_end: Some(a.max(b)),
    }
}

pub fn random_prediction_record<R: Rng>(
    rng: &mut R,
    qid: &str,
    kind: ModelKind,
) -> PredictionRecord {
    let k = rng.gen_range(1..=8);
    let words = [
        "paris", "the city", "Berlin", "1984", "a river", "Nile", "blue", "north",
    ];
    let candidates = (0..k)
        .map(|i| {
            let text = format!("{} {i}", words[rng.gen_range(0..words.len())]);
            match kind {
                ModelKind::Extractive => CandidateAnswer::extractive(
                    text,
                    rng.gen_range(-10.0..10.0),
                    rng.gen_range(-10.0..10.0),
                ),
                ModelKind::Generative => {
                    CandidateAnswer::generative(text, rng.gen_range(-30.0..0.0))
                }
            }
        })
        .collect::<Vec<_>>();
    let gold = if rng.gen_bool(0.6) {
        candidates[rng.gen_range(0..k)].text.clone()
    } else {
        "unanswerable".to_string()
    };
    PredictionRecord {
        qid: qid.to_string(),
        language: ["en", "de", "ar", "zh"][rng.gen_range(0..4)].to_string(),
        dataset: "synthetic".into(),
        split: Split::Test,
        model_kind: kind,
        gold_answers: vec![gold],
        candidates,
        parallel_id: None,
        embedding: None,
    }
}

/// Generative log whose candidates are sampled from `softmax(z)` while the
/// logged log-probabilities are `sharpness * z`, so confidences run high.
pub fn overconfident_generative_log<R: Rng>(
    rng: &mut R,
    n: usize,
    sharpness: f64,
) -> Vec<PredictionRecord> {
    (0..n)
        .map(|i| {
            let z: Vec<f64> = (0..5).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let p = reference_softmax(&z);
            let u: f64 = rng.gen();
            let mut acc = 0.0;
            let mut gold = p.len() - 1;
            for (j, pj) in p.iter().enumerate() {
                acc += pj;
                if u < acc {
                    gold = j;
                    break;
                }
            }
            let scaled: Vec<f64> = z.iter().map(|v| sharpness * v).collect();
            let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
            let lse = max + scaled.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
            let candidates = scaled
                .iter()
                .enumerate()
                .map(|(j, v)| CandidateAnswer::generative(format!("answer {i} {j}"), v - lse - 0.5))
                .collect();
            PredictionRecord {
                qid: format!("g{i}"),
                language: if i % 2 == 0 { "en".into() } else { "de".into() },
                dataset: "synthetic".into(),
                split: Split::Validation,
                model_kind: ModelKind::Generative,
                gold_answers: vec![format!("answer {i} {gold}")],
                candidates,
                parallel_id: None,
                embedding: None,
            }
        })
        .collect()
}
