//! Answer normalization, exact match, expected calibration error and
//! reliability tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::sync::OnceLock;

use regex::Regex;

use crate::error::{Error, Result};

pub const DEFAULT_BINS: usize = 10;

/// Per-language article lists removed during answer normalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Normalizer {
    articles: BTreeMap<String, Vec<String>>,
}

impl Default for Normalizer {
    fn default() -> Self {
        let mut articles = BTreeMap::new();
        articles.insert(
            "en".to_string(),
            vec!["a".to_string(), "an".to_string(), "the".to_string()],
        );
        Normalizer { articles }
    }
}

fn punctuation() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\p{P}").expect("valid regex"))
}

impl Normalizer {
    /// Normalizer that removes no articles for any language.
    pub fn without_articles() -> Self {
        Normalizer {
            articles: BTreeMap::new(),
        }
    }

    pub fn with_articles<I, S>(mut self, language: &str, articles: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.articles.insert(
            language.to_lowercase(),
            articles
                .into_iter()
                .map(|a| a.into().to_lowercase())
                .collect(),
        );
        self
    }

    /// Lowercases, strips punctuation, drops the language's articles and
    /// collapses whitespace.
    pub fn normalize(&self, text: &str, language: &str) -> String {
        let lowered = text.to_lowercase();
        let stripped = punctuation().replace_all(&lowered, "");
        let articles = self.articles.get(&language.to_lowercase());
        let tokens = stripped
            .split_whitespace()
            .filter(|tok| articles.is_none_or(|list| !list.iter().any(|a| a == tok)));
        tokens.collect::<Vec<_>>().join(" ")
    }
}

pub fn normalize_answer(text: &str, language: &str) -> String {
    Normalizer::default().normalize(text, language)
}

/// How a predicted answer is compared with the gold answers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum MatchMode {
    /// Normalized strings are equal.
    #[default]
    Exact,
    /// Some normalized gold answer occurs inside the normalized prediction.
    Contains,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Matcher {
    pub mode: MatchMode,
    pub normalizer: Normalizer,
}

impl Matcher {
    pub fn containment() -> Self {
        Matcher {
            mode: MatchMode::Contains,
            ..Default::default()
        }
    }

    pub fn matches<S: AsRef<str>>(&self, pred: &str, golds: &[S], language: &str) -> bool {
        let pred = self.normalizer.normalize(pred, language);
        golds.iter().any(|g| {
            let gold = self.normalizer.normalize(g.as_ref(), language);
            match self.mode {
                MatchMode::Exact => pred == gold,
                MatchMode::Contains => pred == gold || (!gold.is_empty() && pred.contains(&gold)),
            }
        })
    }
}

pub fn exact_match<S: AsRef<str>>(pred: &str, golds: &[S], language: &str) -> bool {
    Matcher::default().matches(pred, golds, language)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BinningConfig {
    /// Number of equal-width confidence bins.
    pub bins: usize,
}

impl Default for BinningConfig {
    fn default() -> Self {
        BinningConfig { bins: DEFAULT_BINS }
    }
}

impl BinningConfig {
    pub fn new(bins: usize) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidConfig(
                "number of bins must be at least 1".into(),
            ));
        }
        Ok(BinningConfig { bins })
    }

    /// One-based bin holding `confidence`: bin `m` covers `((m-1)/M, m/M]`.
    /// Values at or below zero fall in bin 1, values above one in bin `M`.
    pub fn bin_of(&self, confidence: f64) -> usize {
        let m = self.bins;
        let mf = m as f64;
        let mut bin = ((confidence * mf).ceil() as isize).clamp(1, m as isize) as usize;
        // `confidence * M` can round across an edge; settle against the exact
        // interval bounds.
        while bin > 1 && confidence <= (bin - 1) as f64 / mf {
            bin -= 1;
        }
        while bin < m && confidence > bin as f64 / mf {
            bin += 1;
        }
        bin
    }
}

/// A prediction reduced to what binning needs.
pub trait Calibrated {
    fn confidence(&self) -> f64;
    fn correct(&self) -> bool;
}

impl Calibrated for (f64, bool) {
    fn confidence(&self) -> f64 {
        self.0
    }

    fn correct(&self) -> bool {
        self.1
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BinStats {
    /// One-based bin index.
    pub bin: usize,
    pub count: usize,
    pub mean_confidence: f64,
    pub mean_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReliabilityTable {
    pub bins: Vec<BinStats>,
    pub total: usize,
}

impl ReliabilityTable {
    /// Bin-weighted mean absolute gap between accuracy and confidence.
    pub fn ece(&self) -> f64 {
        let n = self.total as f64;
        self.bins
            .iter()
            .filter(|b| b.count > 0)
            .map(|b| b.count as f64 / n * (b.mean_accuracy - b.mean_confidence).abs())
            .sum()
    }

    pub fn num_bins(&self) -> usize {
        self.bins.len()
    }

    /// Combines tables built over disjoint prediction sets.
    pub fn merge(&self, other: &ReliabilityTable) -> Result<ReliabilityTable> {
        if self.bins.len() != other.bins.len() {
            return Err(Error::InvalidConfig(format!(
                "cannot merge tables with {} and {} bins",
                self.bins.len(),
                other.bins.len()
            )));
        }
        let bins = self
            .bins
            .iter()
            .zip(&other.bins)
            .map(|(a, b)| {
                let count = a.count + b.count;
                let weighted = |x: f64, y: f64| {
                    if count == 0 {
                        0.0
                    } else {
                        (x * a.count as f64 + y * b.count as f64) / count as f64
                    }
                };
                BinStats {
                    bin: a.bin,
                    count,
                    mean_confidence: weighted(a.mean_confidence, b.mean_confidence),
                    mean_accuracy: weighted(a.mean_accuracy, b.mean_accuracy),
                }
            })
            .collect();
        Ok(ReliabilityTable {
            bins,
            total: self.total + other.total,
        })
    }

    /// Writes `bin,count,mean_confidence,mean_accuracy` rows; empty bins have
    /// empty mean cells.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["bin", "count", "mean_confidence", "mean_accuracy"])?;
        for b in &self.bins {
            let (conf, acc) = if b.count == 0 {
                (String::new(), String::new())
            } else {
                (b.mean_confidence.to_string(), b.mean_accuracy.to_string())
            };
            out.write_record([b.bin.to_string(), b.count.to_string(), conf, acc])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn reliability_bins<P: Calibrated>(
    preds: &[P],
    cfg: &BinningConfig,
) -> Result<ReliabilityTable> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    if cfg.bins == 0 {
        return Err(Error::InvalidConfig(
            "number of bins must be at least 1".into(),
        ));
    }
    let mut conf_sum = vec![0.0; cfg.bins];
    let mut correct = vec![0usize; cfg.bins];
    let mut count = vec![0usize; cfg.bins];
    for p in preds {
        let idx = cfg.bin_of(p.confidence()) - 1;
        count[idx] += 1;
        conf_sum[idx] += p.confidence();
        correct[idx] += usize::from(p.correct());
    }
    let bins = (0..cfg.bins)
        .map(|i| {
            let c = count[i];
            let (mean_confidence, mean_accuracy) = if c == 0 {
                (0.0, 0.0)
            } else {
                (conf_sum[i] / c as f64, correct[i] as f64 / c as f64)
            };
            BinStats {
                bin: i + 1,
                count: c,
                mean_confidence,
                mean_accuracy,
            }
        })
        .collect();
    Ok(ReliabilityTable {
        bins,
        total: preds.len(),
    })
}

/// Expected calibration error as a fraction in `[0, 1]`.
pub fn compute_ece<P: Calibrated>(preds: &[P], cfg: &BinningConfig) -> Result<f64> {
    Ok(reliability_bins(preds, cfg)?.ece())
}

/// Fraction of correct predictions.
pub fn accuracy<P: Calibrated>(preds: &[P]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::EmptyInput);
    }
    let hits = preds.iter().filter(|p| p.correct()).count();
    Ok(hits as f64 / preds.len() as f64)
}
