mod common;

use proptest::prelude::*;
use qacal::analysis::{pearson, LanguageMetricsRow, LanguageTable};
use qacal::calibrate::{fit_single_temperature, nll_single, smooth_targets, FitConfig};
use qacal::corpus::{cosine_similarity, select_icl_examples, IclStrategy};
use qacal::extraction::{extract_top_k_spans, ExtractionConfig};
use qacal::metrics::{compute_ece, reliability_bins, BinningConfig, Matcher};
use qacal::prediction_log::{
    parse_log, parse_span_log, partition_by_language, write_log, ModelKind, ParseOptions,
};
use qacal::scoring::{
    candidate_confidences, score_record, softmax, ScoringOptions, TemperatureParams,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn preds() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((0.0..=1.0f64, any::<bool>()), 1..200)
}

proptest! {
    #[test]
    fn prediction_log_round_trips(seed in any::<u64>(), n in 1usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records: Vec<_> = (0..n)
            .map(|i| {
                let kind = if i % 3 == 0 { ModelKind::Extractive } else { ModelKind::Generative };
                common::random_prediction_record(&mut rng, &format!("q{i}"), kind)
            })
            .collect();
        let mut buf = Vec::new();
        write_log(&mut buf, &records).unwrap();
        let parsed = parse_log(buf.as_slice(), ParseOptions::default()).unwrap();
        prop_assert_eq!(parsed.records, records);
    }

    #[test]
    fn span_log_round_trips(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records: Vec<_> = (0..5).map(|i| common::random_span_record(&mut rng, &format!("s{i}"), 30)).collect();
        let mut buf = Vec::new();
        write_log(&mut buf, &records).unwrap();
        prop_assert_eq!(parse_span_log(buf.as_slice()).unwrap().records, records);
    }

    #[test]
    fn partition_preserves_counts(seed in any::<u64>(), n in 0usize..60) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let records: Vec<_> = (0..n)
            .map(|i| common::random_prediction_record(&mut rng, &format!("q{i}"), ModelKind::Generative))
            .collect();
        let parts = partition_by_language(records.clone());
        prop_assert_eq!(parts.values().map(Vec::len).sum::<usize>(), n);
        for (lang, group) in &parts {
            prop_assert!(group.iter().all(|r| &r.language == lang));
            let original: Vec<_> = records.iter().filter(|r| &r.language == lang).cloned().collect();
            prop_assert_eq!(group, &original);
        }
    }

    #[test]
    fn extraction_matches_brute_force(seed in any::<u64>(), k in 1usize..30, len in 1usize..40) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = common::random_span_record(&mut rng, "s", 50);
        let cfg = ExtractionConfig { k, max_answer_length: len };
        let got: Vec<_> = extract_top_k_spans(&rec, &cfg).unwrap()
            .into_iter().map(|s| (s.z_ans, s.start_tok, s.end_tok)).collect();
        let mut want = common::brute_force_spans(&rec, len);
        want.truncate(k);
        prop_assert!(got.iter().all(|&(_, s, e)| s <= e && e - s < len));
        prop_assert_eq!(got, want);
    }

    #[test]
    fn extraction_ignores_uniform_shift(seed in any::<u64>(), a in -20i32..20, b in -20i32..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = common::random_span_record(&mut rng, "s", 40);
        let mut shifted = rec.clone();
        shifted.start_logits.iter_mut().for_each(|x| *x += f64::from(a));
        shifted.end_logits.iter_mut().for_each(|x| *x += f64::from(b));
        let cfg = ExtractionConfig::default();
        let pos = |r| extract_top_k_spans(r, &cfg).unwrap().into_iter().map(|s| (s.start_tok, s.end_tok)).collect::<Vec<_>>();
        prop_assert_eq!(pos(&rec), pos(&shifted));
    }

    #[test]
    fn confidences_are_distributions(seed in any::<u64>(), tau in 0.05f64..50.0, tau2 in 0.05f64..50.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for (kind, temps) in [
            (ModelKind::Extractive, TemperatureParams::dual(tau, tau2)),
            (ModelKind::Generative, TemperatureParams::single(tau)),
        ] {
            let rec = common::random_prediction_record(&mut rng, "q", kind);
            for t in [None, Some(&temps)] {
                let c = candidate_confidences(&rec, t).unwrap();
                prop_assert_eq!(c.len(), rec.candidates.len());
                prop_assert!(c.iter().all(|p| (0.0..=1.0).contains(p)));
                prop_assert!((c.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn softmax_is_shift_invariant(xs in prop::collection::vec(-50.0f64..50.0, 1..20), c in -100.0f64..100.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + c).collect();
        for (p, q) in softmax(&xs).iter().zip(softmax(&shifted)) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn higher_temperature_flattens(seed in any::<u64>(), t1 in 0.05f64..10.0, factor in 1.0f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rec = common::random_prediction_record(&mut rng, "q", ModelKind::Generative);
        let sharp = score_record(&rec, Some(&TemperatureParams::single(t1)), &Matcher::default(), ScoringOptions::default()).unwrap();
        let flat = score_record(&rec, Some(&TemperatureParams::single(t1 * factor)), &Matcher::default(), ScoringOptions::default()).unwrap();
        prop_assert!(flat.confidence <= sharp.confidence + 1e-12);
        prop_assert!(flat.confidence >= 1.0 / rec.candidates.len() as f64 - 1e-12);
    }

    #[test]
    fn ece_matches_reference(p in preds(), bins in 1usize..25) {
        let got = compute_ece(&p, &BinningConfig::new(bins).unwrap()).unwrap();
        prop_assert!((got - common::brute_force_ece(&p, bins)).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&got));
    }

    #[test]
    fn ece_is_permutation_invariant(p in preds(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut q = p.clone();
        q.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let cfg = BinningConfig::default();
        prop_assert!((compute_ece(&p, &cfg).unwrap() - compute_ece(&q, &cfg).unwrap()).abs() <= 1e-12);
    }

    #[test]
    fn reliability_table_accounts_for_everything(p in preds(), bins in 1usize..25) {
        let table = reliability_bins(&p, &BinningConfig::new(bins).unwrap()).unwrap();
        prop_assert_eq!(table.bins.iter().map(|b| b.count).sum::<usize>(), p.len());
        let conf: f64 = table.bins.iter().map(|b| b.count as f64 * b.mean_confidence).sum();
        let acc: f64 = table.bins.iter().map(|b| b.count as f64 * b.mean_accuracy).sum();
        prop_assert!((conf - p.iter().map(|x| x.0).sum::<f64>()).abs() < 1e-9);
        prop_assert!((acc - p.iter().filter(|x| x.1).count() as f64).abs() < 1e-9);
    }

    #[test]
    fn merged_tables_give_the_pooled_ece(a in preds(), b in preds()) {
        let cfg = BinningConfig::default();
        let merged = reliability_bins(&a, &cfg).unwrap().merge(&reliability_bins(&b, &cfg).unwrap()).unwrap();
        let all: Vec<_> = a.iter().chain(&b).copied().collect();
        prop_assert!((merged.ece() - compute_ece(&all, &cfg).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn fitted_temperature_never_worse_than_identity(
        logits in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2..6), 1..20),
        seed in any::<u64>(),
    ) {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let golds: Vec<usize> = logits.iter().map(|l| rng.gen_range(0..l.len())).collect();
        let objective = |tau: f64| {
            logits.iter().zip(&golds).map(|(l, &g)| nll_single(l, g, tau)).sum::<f64>() / logits.len() as f64
        };
        let cfg = FitConfig::default();
        let fit = fit_single_temperature(objective, &cfg).unwrap();
        let tau = fit.tau.unwrap();
        prop_assert!((cfg.tau_min..=cfg.tau_max).contains(&tau));
        prop_assert!(fit.fit_nll_after.unwrap() <= fit.fit_nll_before.unwrap());
        prop_assert!((fit.fit_nll_before.unwrap() - objective(1.0)).abs() < 1e-12);
        prop_assert_eq!(fit.hit_bound, tau == cfg.tau_min || tau == cfg.tau_max);
    }

    #[test]
    fn smoothing_gives_distributions(c in 1usize..100, gold_frac in 0.0f64..1.0, alpha in 0.0f64..=1.0) {
        let gold = ((c as f64 * gold_frac) as usize).min(c - 1);
        let t = smooth_targets(c, gold, alpha).unwrap();
        prop_assert!((t.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(t.iter().all(|&p| p >= 0.0));
        prop_assert!((t[gold] - (1.0 - alpha + alpha / c as f64)).abs() < 1e-15);
    }

    #[test]
    fn adaptive_icl_matches_argsort(
        pool in prop::collection::vec(prop::collection::vec(-3i32..=3, 4), 1..30),
        query in prop::collection::vec(-3i32..=3, 4),
        k in 1usize..30,
    ) {
        let pool: Vec<Vec<f64>> = pool.into_iter().map(|v| v.into_iter().map(f64::from).collect()).collect();
        let query: Vec<f64> = query.into_iter().map(f64::from).collect();
        prop_assume!(query.iter().any(|&x| x != 0.0));
        prop_assume!(pool.iter().all(|v| v.iter().any(|&x| x != 0.0)));
        let k = k.min(pool.len());
        let got = select_icl_examples(&query, &pool, k, IclStrategy::Adaptive, 0).unwrap();
        prop_assert_eq!(got, common::brute_force_icl(&query, &pool, k));
    }

    #[test]
    fn cosine_is_scale_invariant(
        a in prop::collection::vec(0.1f64..10.0, 1..16),
        scale in 0.01f64..100.0,
    ) {
        let b: Vec<f64> = a.iter().rev().copied().collect();
        let scaled: Vec<f64> = b.iter().map(|x| x * scale).collect();
        let r1 = cosine_similarity(&a, &b).unwrap();
        let r2 = cosine_similarity(&a, &scaled).unwrap();
        prop_assert!((r1 - r2).abs() < 1e-12);
    }

    #[test]
    fn random_icl_is_seeded_and_distinct(size in 1usize..50, k_frac in 0.0f64..1.0, seed in any::<u64>()) {
        let pool: Vec<Vec<f64>> = (0..size).map(|i| vec![i as f64 + 1.0]).collect();
        let k = ((size as f64 * k_frac) as usize).max(1).min(size);
        let a = select_icl_examples(&[1.0], &pool, k, IclStrategy::Random, seed).unwrap();
        let b = select_icl_examples(&[1.0], &pool, k, IclStrategy::Random, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let unique: std::collections::BTreeSet<_> = a.iter().collect();
        prop_assert_eq!(unique.len(), k);
        prop_assert!(a.iter().all(|&i| i < size));
    }

    #[test]
    fn pearson_agrees_with_reference(
        xy in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0), 3..40),
    ) {
        let (x, y): (Vec<f64>, Vec<f64>) = xy.into_iter().unzip();
        let r = pearson(&x, &y);
        prop_assume!(r.is_ok());
        let r = r.unwrap();
        prop_assert!((-1.0..=1.0).contains(&r));
        prop_assert!((r - pearson(&y, &x).unwrap()).abs() < 1e-12);
        prop_assert!((r - common::naive_pearson(&x, &y)).abs() < 1e-9);
    }

    #[test]
    fn macro_average_is_unweighted(
        rows in prop::collection::btree_map("[a-z]{2}", (1usize..5000, 0.0f64..=1.0, 0.0f64..=1.0), 1..12),
    ) {
        let rows: Vec<LanguageMetricsRow> = rows
            .into_iter()
            .map(|(language, (n, em_rate, ece))| LanguageMetricsRow { language, n, em_rate, ece })
            .collect();
        let table = LanguageTable::from_rows(rows.clone()).unwrap();
        let mean = rows.iter().map(|r| r.ece).sum::<f64>() / rows.len() as f64;
        prop_assert!((table.macro_all.ece - mean).abs() < 1e-12);
        let non_en: Vec<_> = rows.iter().filter(|r| r.language != "en").collect();
        match &table.macro_non_english {
            Some(avg) => {
                let m = non_en.iter().map(|r| r.em_rate).sum::<f64>() / non_en.len() as f64;
                prop_assert!((avg.em_rate - m).abs() < 1e-12);
            }
            None => prop_assert!(non_en.is_empty()),
        }
    }
}
