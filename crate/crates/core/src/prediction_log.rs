//! On-disk prediction logs.
//!
//! Two newline-delimited JSON formats are understood:
//!
//! * prediction logs, one [`PredictionRecord`] per line, carrying a question's
//!   candidate answers together with their raw model scores;
//! * span-logit logs, one [`SpanLogitRecord`] per line, carrying the full
//!   start/end logit vectors of an extractive model.
//!
//! Readers validate every line against the record invariants and report the
//! offending line number and field. Bare `NaN`/`Infinity` literals, as emitted
//! by Python's `json` module, are recognised so that they surface as a field
//! error rather than a syntax error.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// Default upper bound on candidates per record.
pub const DEFAULT_MAX_CANDIDATES: usize = 20;

/// Language codes with known evaluation data.
pub const KNOWN_LANGUAGES: [&str; 18] = [
    "en", "ar", "de", "el", "es", "hi", "ro", "ru", "th", "tr", "vi", "zh", "ko", "fi", "sw", "id",
    "bn", "te",
];

pub fn is_known_language(code: &str) -> bool {
    KNOWN_LANGUAGES
        .iter()
        .any(|known| known.eq_ignore_ascii_case(code))
}

pub fn is_english(code: &str) -> bool {
    code.eq_ignore_ascii_case("en")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Validation,
    Test,
}

impl Split {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "train" => Some(Split::Train),
            "validation" => Some(Split::Validation),
            "test" => Some(Split::Test),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Extractive,
    Generative,
}

impl ModelKind {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "extractive" => Some(ModelKind::Extractive),
            "generative" => Some(ModelKind::Generative),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Extractive => "extractive",
            ModelKind::Generative => "generative",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Raw model score of a candidate answer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum CandidateScore {
    Extractive {
        start_logit: f64,
        end_logit: f64,
    },
    /// Natural-log joint token probability of the generated sequence.
    Generative {
        log_prob: f64,
    },
}

impl CandidateScore {
    pub fn kind(&self) -> ModelKind {
        match self {
            CandidateScore::Extractive { .. } => ModelKind::Extractive,
            CandidateScore::Generative { .. } => ModelKind::Generative,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateAnswer {
    pub text: String,
    #[serde(flatten)]
    pub score: CandidateScore,
}

impl CandidateAnswer {
    pub fn extractive(text: impl Into<String>, start_logit: f64, end_logit: f64) -> Self {
        CandidateAnswer {
            text: text.into(),
            score: CandidateScore::Extractive {
                start_logit,
                end_logit,
            },
        }
    }

    pub fn generative(text: impl Into<String>, log_prob: f64) -> Self {
        CandidateAnswer {
            text: text.into(),
            score: CandidateScore::Generative { log_prob },
        }
    }
}

/// One question with its ranked candidate answers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionRecord {
    pub qid: String,
    pub language: String,
    pub dataset: String,
    pub split: Split,
    pub model_kind: ModelKind,
    pub gold_answers: Vec<String>,
    pub candidates: Vec<CandidateAnswer>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parallel_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embedding: Option<Vec<f64>>,
}

/// Per-token start/end logits of an extractive model over one question.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpanLogitRecord {
    pub qid: String,
    pub language: String,
    pub start_logits: Vec<f64>,
    pub end_logits: Vec<f64>,
    pub context_mask: Vec<bool>,
    /// Character (code point) offsets of each token into `context_text`.
    pub token_offsets: Vec<(usize, usize)>,
    pub context_text: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_end: Option<usize>,
}

impl SpanLogitRecord {
    pub fn len(&self) -> usize {
        self.start_logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_logits.is_empty()
    }

    /// Context text covered by tokens `start..=end`.
    pub fn span_text(&self, start: usize, end: usize) -> String {
        let from = self.token_offsets[start].0;
        let to = self.token_offsets[end].1.max(from);
        self.context_text
            .chars()
            .skip(from)
            .take(to - from)
            .collect()
    }
}

/// Anything carrying a language code.
pub trait HasLanguage {
    fn language(&self) -> &str;
}

impl HasLanguage for PredictionRecord {
    fn language(&self) -> &str {
        &self.language
    }
}

impl HasLanguage for SpanLogitRecord {
    fn language(&self) -> &str {
        &self.language
    }
}

/// Groups items by language code, preserving input order within a group.
pub fn partition_by_language<T: HasLanguage>(items: Vec<T>) -> BTreeMap<String, Vec<T>> {
    let mut groups: BTreeMap<String, Vec<T>> = BTreeMap::new();
    for item in items {
        groups
            .entry(item.language().to_string())
            .or_default()
            .push(item);
    }
    groups
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParseWarning {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Clone, Debug)]
pub struct ParseOptions {
    pub expected_kind: Option<ModelKind>,
    pub max_candidates: usize,
    /// Accept candidates with empty text.
    pub allow_empty_text: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions {
            expected_kind: None,
            max_candidates: DEFAULT_MAX_CANDIDATES,
            allow_empty_text: false,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ParsedLog<T> {
    pub records: Vec<T>,
    pub warnings: Vec<ParseWarning>,
}

/// Non-empty lines of a stream, numbered from 1.
struct NumberedLines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Iterator for NumberedLines<R> {
    type Item = Result<(usize, String)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let text = match self.inner.next()? {
                Ok(text) => text,
                Err(e) => return Some(Err(e.into())),
            };
            self.line += 1;
            if !text.trim().is_empty() {
                return Some(Ok((self.line, text)));
            }
        }
    }
}

/// Streaming reader over a prediction log.
pub struct LogReader<R> {
    lines: NumberedLines<R>,
    opts: ParseOptions,
    embedding_dim: Option<usize>,
    warnings: Vec<ParseWarning>,
}

impl<R: BufRead> LogReader<R> {
    pub fn new(reader: R, opts: ParseOptions) -> Self {
        LogReader {
            lines: NumberedLines {
                inner: reader.lines(),
                line: 0,
            },
            opts,
            embedding_dim: None,
            warnings: Vec::new(),
        }
    }

    pub fn warnings(&self) -> &[ParseWarning] {
        &self.warnings
    }

    pub fn into_warnings(self) -> Vec<ParseWarning> {
        self.warnings
    }
}

impl<R: BufRead> Iterator for LogReader<R> {
    type Item = Result<PredictionRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(
            parse_prediction_line(line, &text, &self.opts, &mut self.warnings).and_then(|rec| {
                if let Some(emb) = &rec.embedding {
                    match self.embedding_dim {
                        None => self.embedding_dim = Some(emb.len()),
                        Some(dim) if dim != emb.len() => {
                            return Err(Error::schema(
                                line,
                                "embedding",
                                format!(
                                    "dimension {} differs from earlier dimension {dim}",
                                    emb.len()
                                ),
                            ))
                        }
                        Some(_) => {}
                    }
                }
                Ok(rec)
            }),
        )
    }
}

/// Reads and validates a whole prediction log, stopping at the first error.
pub fn parse_log<R: BufRead>(reader: R, opts: ParseOptions) -> Result<ParsedLog<PredictionRecord>> {
    let mut log_reader = LogReader::new(reader, opts);
    let mut records = Vec::new();
    for rec in log_reader.by_ref() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(ParsedLog {
        records,
        warnings: log_reader.into_warnings(),
    })
}

/// Streaming reader over a span-logit log.
pub struct SpanLogReader<R> {
    lines: NumberedLines<R>,
    warnings: Vec<ParseWarning>,
}

impl<R: BufRead> SpanLogReader<R> {
    pub fn new(reader: R) -> Self {
        SpanLogReader {
            lines: NumberedLines {
                inner: reader.lines(),
                line: 0,
            },
            warnings: Vec::new(),
        }
    }

    pub fn into_warnings(self) -> Vec<ParseWarning> {
        self.warnings
    }
}

impl<R: BufRead> Iterator for SpanLogReader<R> {
    type Item = Result<SpanLogitRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        let (line, text) = match self.lines.next()? {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        Some(parse_span_line(line, &text, &mut self.warnings))
    }
}

pub fn parse_span_log<R: BufRead>(reader: R) -> Result<ParsedLog<SpanLogitRecord>> {
    let mut span_reader = SpanLogReader::new(reader);
    let mut records = Vec::new();
    for rec in span_reader.by_ref() {
        records.push(rec?);
    }
    if records.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(ParsedLog {
        records,
        warnings: span_reader.into_warnings(),
    })
}

/// Writes records as newline-delimited JSON.
pub fn write_log<W: Write, T: Serialize>(mut w: W, records: &[T]) -> Result<()> {
    for rec in records {
        serde_json::to_writer(&mut w, rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn to_json_line<T: Serialize>(record: &T) -> String {
    serde_json::to_string(record).expect("log records always serialize")
}

const PREDICTION_FIELDS: &[&str] = &[
    "qid",
    "language",
    "dataset",
    "split",
    "model_kind",
    "gold_answers",
    "candidates",
    "parallel_id",
    "embedding",
];

const SPAN_FIELDS: &[&str] = &[
    "qid",
    "language",
    "start_logits",
    "end_logits",
    "context_mask",
    "token_offsets",
    "context_text",
    "gold_start",
    "gold_end",
];

fn parse_prediction_line(
    line: usize,
    text: &str,
    opts: &ParseOptions,
    warnings: &mut Vec<ParseWarning>,
) -> Result<PredictionRecord> {
    let obj = parse_object(line, text)?;
    let fields = Fields { line, obj: &obj };
    fields.reject_unknown(PREDICTION_FIELDS)?;

    let qid = fields.non_empty_str("qid")?;
    let language = fields.language(warnings)?;
    let dataset = fields.str("dataset")?;
    let split_name = fields.str("split")?;
    let split = Split::parse(&split_name)
        .ok_or_else(|| Error::schema(line, "split", format!("unknown split `{split_name}`")))?;
    let kind_name = fields.str("model_kind")?;
    let model_kind = ModelKind::parse(&kind_name).ok_or_else(|| {
        Error::schema(
            line,
            "model_kind",
            format!("unknown model kind `{kind_name}`"),
        )
    })?;
    if let Some(expected) = opts.expected_kind {
        if expected != model_kind {
            return Err(Error::KindMismatch {
                line,
                expected: expected.to_string(),
                found: model_kind.to_string(),
            });
        }
    }

    let gold_values = fields.array("gold_answers")?;
    if gold_values.is_empty() {
        return Err(Error::schema(line, "gold_answers", "must be non-empty"));
    }
    let gold_answers = gold_values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_str().map(str::to_string).ok_or_else(|| {
                Error::schema(line, format!("gold_answers[{i}]"), "expected a string")
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let cand_values = fields.array("candidates")?;
    if cand_values.is_empty() {
        return Err(Error::schema(line, "candidates", "must be non-empty"));
    }
    if cand_values.len() > opts.max_candidates {
        return Err(Error::schema(
            line,
            "candidates",
            format!(
                "{} candidates exceed the limit of {}",
                cand_values.len(),
                opts.max_candidates
            ),
        ));
    }
    let mut candidates = Vec::with_capacity(cand_values.len());
    for (i, value) in cand_values.iter().enumerate() {
        let cand = parse_candidate(line, i, value, model_kind, opts, warnings)?;
        candidates.push(cand);
    }

    let parallel_id = fields.opt_str("parallel_id")?;
    let embedding = match fields.opt("embedding") {
        None => None,
        Some(v) => {
            let values = v
                .as_array()
                .ok_or_else(|| Error::schema(line, "embedding", "expected an array"))?;
            if values.is_empty() {
                return Err(Error::schema(line, "embedding", "must be non-empty"));
            }
            let vec = values
                .iter()
                .enumerate()
                .map(|(i, x)| finite_number(line, &format!("embedding[{i}]"), x))
                .collect::<Result<Vec<_>>>()?;
            Some(vec)
        }
    };

    Ok(PredictionRecord {
        qid,
        language,
        dataset,
        split,
        model_kind,
        gold_answers,
        candidates,
        parallel_id,
        embedding,
    })
}

fn parse_candidate(
    line: usize,
    index: usize,
    value: &Value,
    kind: ModelKind,
    opts: &ParseOptions,
    warnings: &mut Vec<ParseWarning>,
) -> Result<CandidateAnswer> {
    let prefix = format!("candidates[{index}]");
    let obj = value
        .as_object()
        .ok_or_else(|| Error::schema(line, &prefix, "expected an object"))?;
    let fields = Fields { line, obj };
    let allowed: &[&str] = match kind {
        ModelKind::Extractive => &["text", "start_logit", "end_logit"],
        ModelKind::Generative => &["text", "log_prob"],
    };
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::schema(
                line,
                format!("{prefix}.{key}"),
                format!("not a field of a {kind} candidate"),
            ));
        }
    }
    let text = match obj.get("text") {
        Some(Value::String(s)) => s.clone(),
        Some(_) => {
            return Err(Error::schema(
                line,
                format!("{prefix}.text"),
                "expected a string",
            ))
        }
        None => return Err(Error::schema(line, format!("{prefix}.text"), "missing")),
    };
    if text.is_empty() && !opts.allow_empty_text {
        return Err(Error::schema(
            line,
            format!("{prefix}.text"),
            "empty candidate text",
        ));
    }
    let score = match kind {
        ModelKind::Extractive => CandidateScore::Extractive {
            start_logit: fields.nested_number(&prefix, "start_logit")?,
            end_logit: fields.nested_number(&prefix, "end_logit")?,
        },
        ModelKind::Generative => {
            let log_prob = fields.nested_number(&prefix, "log_prob")?;
            if log_prob > 0.0 {
                warnings.push(ParseWarning {
                    line,
                    message: format!("{prefix}.log_prob = {log_prob} is positive"),
                });
            }
            CandidateScore::Generative { log_prob }
        }
    };
    Ok(CandidateAnswer { text, score })
}

fn parse_span_line(
    line: usize,
    text: &str,
    warnings: &mut Vec<ParseWarning>,
) -> Result<SpanLogitRecord> {
    let obj = parse_object(line, text)?;
    let fields = Fields { line, obj: &obj };
    fields.reject_unknown(SPAN_FIELDS)?;

    let qid = fields.non_empty_str("qid")?;
    let language = fields.language(warnings)?;
    let start_logits = fields.number_array("start_logits")?;
    let end_logits = fields.number_array("end_logits")?;
    let context_mask = fields
        .array("context_mask")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.as_bool().ok_or_else(|| {
                Error::schema(line, format!("context_mask[{i}]"), "expected a boolean")
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let token_offsets = fields
        .array("token_offsets")?
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let pair = v.as_array().filter(|a| a.len() == 2);
            let parsed = pair.and_then(|a| Some((a[0].as_u64()?, a[1].as_u64()?)));
            parsed
                .map(|(s, e)| (s as usize, e as usize))
                .ok_or_else(|| {
                    Error::schema(
                        line,
                        format!("token_offsets[{i}]"),
                        "expected a [start_char, end_char] pair of non-negative integers",
                    )
                })
        })
        .collect::<Result<Vec<_>>>()?;
    let context_text = fields.str("context_text")?;
    let gold_start = fields.opt_index("gold_start")?;
    let gold_end = fields.opt_index("gold_end")?;

    let n = start_logits.len();
    if n == 0 {
        return Err(Error::schema(line, "start_logits", "must be non-empty"));
    }
    for (name, len) in [
        ("end_logits", end_logits.len()),
        ("context_mask", context_mask.len()),
        ("token_offsets", token_offsets.len()),
    ] {
        if len != n {
            return Err(Error::schema(
                line,
                name,
                format!("length {len} differs from start_logits length {n}"),
            ));
        }
    }

    let char_len = context_text.chars().count();
    let mut last_start = 0;
    for (i, &(s, e)) in token_offsets.iter().enumerate() {
        if s > e || e > char_len {
            return Err(Error::schema(
                line,
                format!("token_offsets[{i}]"),
                format!("({s}, {e}) is not a range within a context of {char_len} characters"),
            ));
        }
        if context_mask[i] {
            if s < last_start {
                return Err(Error::schema(
                    line,
                    format!("token_offsets[{i}]"),
                    "context offsets must be non-decreasing",
                ));
            }
            last_start = s;
        }
    }

    for (name, gold) in [("gold_start", gold_start), ("gold_end", gold_end)] {
        if let Some(g) = gold {
            if g >= n {
                return Err(Error::schema(
                    line,
                    name,
                    format!("index {g} out of range for {n} tokens"),
                ));
            }
            if !context_mask[g] {
                return Err(Error::schema(
                    line,
                    name,
                    format!("token {g} is not a context token"),
                ));
            }
        }
    }
    if let (Some(s), Some(e)) = (gold_start, gold_end) {
        if s > e {
            return Err(Error::schema(line, "gold_end", "precedes gold_start"));
        }
    }

    Ok(SpanLogitRecord {
        qid,
        language,
        start_logits,
        end_logits,
        context_mask,
        token_offsets,
        context_text,
        gold_start,
        gold_end,
    })
}

fn parse_object(line: usize, text: &str) -> Result<Map<String, Value>> {
    let text = quote_nonfinite_literals(text);
    match serde_json::from_str::<Value>(&text) {
        Ok(Value::Object(obj)) => Ok(obj),
        Ok(_) => Err(Error::Malformed {
            line,
            message: "expected a JSON object".into(),
        }),
        Err(e) => Err(Error::Malformed {
            line,
            message: e.to_string(),
        }),
    }
}

const NONFINITE_LITERALS: [&str; 3] = ["-Infinity", "Infinity", "NaN"];

/// Rewrites bare `NaN`, `Infinity` and `-Infinity` tokens into strings so the
/// line still parses and the offending field can be named.
fn quote_nonfinite_literals(text: &str) -> Cow<'_, str> {
    if !NONFINITE_LITERALS.iter().any(|lit| text.contains(lit)) {
        return Cow::Borrowed(text);
    }
    let mut out = String::with_capacity(text.len() + 8);
    let mut in_string = false;
    let mut escaped = false;
    let mut rest = text;
    while let Some(c) = rest.chars().next() {
        if in_string {
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
        } else if c == '"' {
            in_string = true;
        } else if let Some(lit) = NONFINITE_LITERALS.iter().find(|lit| rest.starts_with(*lit)) {
            out.push('"');
            out.push_str(lit);
            out.push('"');
            rest = &rest[lit.len()..];
            continue;
        }
        out.push(c);
        rest = &rest[c.len_utf8()..];
    }
    Cow::Owned(out)
}

fn finite_number(line: usize, field: &str, value: &Value) -> Result<f64> {
    match value {
        Value::Number(n) => {
            let x = n
                .as_f64()
                .ok_or_else(|| Error::schema(line, field, "not representable as a float"))?;
            if x.is_finite() {
                Ok(x)
            } else {
                Err(Error::schema(line, field, "non-finite value"))
            }
        }
        Value::String(s) if NONFINITE_LITERALS.contains(&s.as_str()) => {
            Err(Error::schema(line, field, format!("non-finite value {s}")))
        }
        _ => Err(Error::schema(line, field, "expected a number")),
    }
}

struct Fields<'a> {
    line: usize,
    obj: &'a Map<String, Value>,
}

impl Fields<'_> {
    fn reject_unknown(&self, allowed: &[&str]) -> Result<()> {
        match self.obj.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(key) => Err(Error::schema(self.line, key.as_str(), "unknown field")),
            None => Ok(()),
        }
    }

    fn opt(&self, name: &str) -> Option<&Value> {
        self.obj.get(name).filter(|v| !v.is_null())
    }

    fn required(&self, name: &str) -> Result<&Value> {
        self.opt(name)
            .ok_or_else(|| Error::schema(self.line, name, "missing required field"))
    }

    fn str(&self, name: &str) -> Result<String> {
        self.required(name)?
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| Error::schema(self.line, name, "expected a string"))
    }

    fn non_empty_str(&self, name: &str) -> Result<String> {
        let s = self.str(name)?;
        if s.is_empty() {
            return Err(Error::schema(self.line, name, "must be non-empty"));
        }
        Ok(s)
    }

    fn opt_str(&self, name: &str) -> Result<Option<String>> {
        match self.opt(name) {
            None => Ok(None),
            Some(v) => v
                .as_str()
                .map(|s| Some(s.to_string()))
                .ok_or_else(|| Error::schema(self.line, name, "expected a string")),
        }
    }

    fn opt_index(&self, name: &str) -> Result<Option<usize>> {
        match self.opt(name) {
            None => Ok(None),
            Some(v) => v
                .as_u64()
                .map(|i| Some(i as usize))
                .ok_or_else(|| Error::schema(self.line, name, "expected a non-negative integer")),
        }
    }

    fn array(&self, name: &str) -> Result<&Vec<Value>> {
        self.required(name)?
            .as_array()
            .ok_or_else(|| Error::schema(self.line, name, "expected an array"))
    }

    fn number_array(&self, name: &str) -> Result<Vec<f64>> {
        self.array(name)?
            .iter()
            .enumerate()
            .map(|(i, v)| finite_number(self.line, &format!("{name}[{i}]"), v))
            .collect()
    }

    fn nested_number(&self, prefix: &str, name: &str) -> Result<f64> {
        let field = format!("{prefix}.{name}");
        match self.obj.get(name) {
            None | Some(Value::Null) => {
                Err(Error::schema(self.line, field, "missing required field"))
            }
            Some(v) => finite_number(self.line, &field, v),
        }
    }

    fn language(&self, warnings: &mut Vec<ParseWarning>) -> Result<String> {
        let code = self.non_empty_str("language")?;
        if !is_known_language(&code) {
            warnings.push(ParseWarning {
                line: self.line,
                message: format!("unknown language code `{code}`"),
            });
        }
        Ok(code)
    }
}
