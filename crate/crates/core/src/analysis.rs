//! Per-language aggregation and correlation analyses.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{accuracy, compute_ece, BinningConfig};
use crate::prediction_log::{is_english, partition_by_language};
use crate::scoring::ScoredPrediction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanguageMetricsRow {
    pub language: String,
    pub n: usize,
    pub em_rate: f64,
    pub ece: f64,
}

/// Unweighted mean over per-language rows.
#[derive(Clone, Debug, PartialEq)]
pub struct MacroAverage {
    pub label: &'static str,
    pub languages: usize,
    pub n: usize,
    pub em_rate: f64,
    pub ece: f64,
}

pub const ALL_LANGUAGES_LABEL: &str = "avg";
pub const NON_ENGLISH_LABEL: &str = "avg_non_en";

#[derive(Clone, Debug, PartialEq)]
pub struct LanguageTable {
    /// Sorted by language code.
    pub rows: Vec<LanguageMetricsRow>,
    pub macro_all: MacroAverage,
    /// Absent when every row is English.
    pub macro_non_english: Option<MacroAverage>,
}

pub fn macro_average<'a, I>(rows: I, label: &'static str) -> Option<MacroAverage>
where
    I: IntoIterator<Item = &'a LanguageMetricsRow>,
{
    let (mut count, mut n, mut em, mut ece) = (0usize, 0usize, 0.0, 0.0);
    for row in rows {
        count += 1;
        n += row.n;
        em += row.em_rate;
        ece += row.ece;
    }
    (count > 0).then(|| MacroAverage {
        label,
        languages: count,
        n,
        em_rate: em / count as f64,
        ece: ece / count as f64,
    })
}

impl LanguageTable {
    pub fn from_rows(mut rows: Vec<LanguageMetricsRow>) -> Result<Self> {
        rows.sort_by(|a, b| a.language.cmp(&b.language));
        let macro_all = macro_average(&rows, ALL_LANGUAGES_LABEL).ok_or(Error::EmptyInput)?;
        let macro_non_english = macro_average(
            rows.iter().filter(|r| !is_english(&r.language)),
            NON_ENGLISH_LABEL,
        );
        Ok(LanguageTable {
            rows,
            macro_all,
            macro_non_english,
        })
    }

    pub fn row(&self, language: &str) -> Option<&LanguageMetricsRow> {
        self.rows.iter().find(|r| r.language == language)
    }
}

/// EM rate and ECE per language, plus macro averages.
pub fn per_language_table(
    scored: &[ScoredPrediction],
    cfg: &BinningConfig,
) -> Result<LanguageTable> {
    if scored.is_empty() {
        return Err(Error::EmptyInput);
    }
    let groups = partition_by_language(scored.to_vec());
    let rows = groups
        .into_iter()
        .map(|(language, preds)| {
            Ok(LanguageMetricsRow {
                n: preds.len(),
                em_rate: accuracy(&preds)?,
                ece: compute_ece(&preds, cfg)?,
                language,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    LanguageTable::from_rows(rows)
}

/// `(value - base) / base`.
pub fn relative_increase(base: f64, value: f64) -> f64 {
    (value - base) / base
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation(format!(
            "need at least 2 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Language-level features, one column per feature.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureTable {
    pub columns: Vec<String>,
    /// `(language, values)` with one value per column.
    pub rows: Vec<(String, Vec<f64>)>,
}

const REQUIRED_FEATURES: [&str; 3] = ["syntactic", "genetic", "pretrain_size"];

impl FeatureTable {
    /// Reads `language,syntactic,genetic,pretrain_size[,...]` rows.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut csv = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = csv.headers()?.iter().map(str::to_string).collect();
        let expected = std::iter::once("language").chain(REQUIRED_FEATURES);
        if header.len() < 4 || !header.iter().zip(expected).all(|(h, e)| h == e) {
            return Err(Error::schema(
                1,
                "header",
                "expected language,syntactic,genetic,pretrain_size[,...]",
            ));
        }
        let columns = header[1..].to_vec();
        let mut rows: Vec<(String, Vec<f64>)> = Vec::new();
        for (i, record) in csv.records().enumerate() {
            let record = record?;
            let line = i + 2;
            let language = record.get(0).unwrap_or_default().to_string();
            if rows.iter().any(|(l, _)| l.eq_ignore_ascii_case(&language)) {
                return Err(Error::schema(
                    line,
                    "language",
                    format!("duplicate language `{language}`"),
                ));
            }
            let mut values = Vec::with_capacity(columns.len());
            for (j, column) in columns.iter().enumerate() {
                let cell = record.get(j + 1).unwrap_or_default();
                let value: f64 = cell
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| {
                        Error::schema(line, column, format!("not a number: `{cell}`"))
                    })?;
                if j < 2 && !(0.0..=1.0).contains(&value) {
                    return Err(Error::schema(line, column, "distance must lie in [0, 1]"));
                }
                values.push(value);
            }
            rows.push((language, values));
        }
        Ok(FeatureTable { columns, rows })
    }
}

pub fn load_metrics_csv<R: Read>(reader: R) -> Result<Vec<LanguageMetricsRow>> {
    let mut csv = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for row in csv.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureCorrelation {
    pub feature: String,
    /// `None` when a column has zero variance over the joined languages.
    pub r: Option<f64>,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrelationReport {
    pub correlations: Vec<FeatureCorrelation>,
    /// Languages present only in the metrics rows.
    pub unmatched_metrics: Vec<String>,
    /// Languages present only in the feature table.
    pub unmatched_features: Vec<String>,
}

/// Pearson r between per-language ECE and each feature column, over the
/// languages present in both tables.
pub fn correlate_ece_with_features(
    metrics: &[LanguageMetricsRow],
    features: &FeatureTable,
) -> Result<CorrelationReport> {
    let by_code: HashMap<String, &Vec<f64>> = features
        .rows
        .iter()
        .map(|(l, v)| (l.to_lowercase(), v))
        .collect();
    let mut joined: Vec<(&LanguageMetricsRow, &Vec<f64>)> = Vec::new();
    let mut unmatched_metrics = Vec::new();
    for row in metrics {
        match by_code.get(&row.language.to_lowercase()) {
            Some(values) => joined.push((row, values)),
            None => unmatched_metrics.push(row.language.clone()),
        }
    }
    let unmatched_features = features
        .rows
        .iter()
        .filter(|(l, _)| !metrics.iter().any(|m| m.language.eq_ignore_ascii_case(l)))
        .map(|(l, _)| l.clone())
        .collect();
    if joined.len() < 2 {
        return Err(Error::Shortfall(format!(
            "correlation needs at least 2 shared languages, found {}",
            joined.len()
        )));
    }
    let ece: Vec<f64> = joined.iter().map(|(m, _)| m.ece).collect();
    let correlations = features
        .columns
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let column: Vec<f64> = joined.iter().map(|(_, v)| v[j]).collect();
            FeatureCorrelation {
                feature: name.clone(),
                r: pearson(&column, &ece).ok(),
                n: joined.len(),
            }
        })
        .collect();
    Ok(CorrelationReport {
        correlations,
        unmatched_metrics,
        unmatched_features,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParallelCorrelation {
    /// `None` with fewer than 2 shared ids or zero variance.
    pub r: Option<f64>,
    pub shared: usize,
}

/// For every non-source language, Pearson r between the source and target
/// confidences over questions sharing a `parallel_id`.
pub fn parallel_confidence_correlation(
    scored: &[ScoredPrediction],
    source: &str,
) -> BTreeMap<String, ParallelCorrelation> {
    let mut by_language: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for p in scored {
        if let Some(pid) = p.parallel_id.as_deref() {
            by_language
                .entry(p.language.as_str())
                .or_default()
                .entry(pid)
                .or_insert(p.confidence);
        }
    }
    let empty = BTreeMap::new();
    let source_conf = by_language.get(source).unwrap_or(&empty);
    by_language
        .iter()
        .filter(|(lang, _)| **lang != source)
        .map(|(lang, target)| {
            let (xs, ys): (Vec<f64>, Vec<f64>) = target
                .iter()
                .filter_map(|(pid, t)| source_conf.get(pid).map(|s| (*s, *t)))
                .unzip();
            let r = if xs.len() >= 2 {
                pearson(&xs, &ys).ok()
            } else {
                None
            };
            (
                lang.to_string(),
                ParallelCorrelation {
                    r,
                    shared: xs.len(),
                },
            )
        })
        .collect()
}
