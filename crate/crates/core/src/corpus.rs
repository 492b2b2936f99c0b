//! Training-mix manifests, in-context example selection and prompt rendering.
//!
//! All random choices are driven by a caller-supplied seed, so identical
//! inputs always produce identical manifests.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prediction_log::is_english;

/// One question in one language; translations share `example_id`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParallelCorpusEntry {
    pub example_id: String,
    pub language: String,
    pub question: String,
    pub context: String,
    pub answer: String,
}

/// Reads a newline-delimited corpus and checks `(example_id, language)`
/// uniqueness.
pub fn load_corpus<R: BufRead>(reader: R) -> Result<Vec<ParallelCorpusEntry>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let entry: ParallelCorpusEntry =
            serde_json::from_str(&line).map_err(|e| Error::Malformed {
                line: i + 1,
                message: e.to_string(),
            })?;
        if !seen.insert((entry.example_id.clone(), entry.language.clone())) {
            return Err(Error::schema(
                i + 1,
                "example_id",
                format!("duplicate entry ({}, {})", entry.example_id, entry.language),
            ));
        }
        entries.push(entry);
    }
    if entries.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(entries)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MixMode {
    /// `n` English examples.
    En,
    /// The same `n` examples in every listed language.
    EnTr,
    /// `n·L` distinct English examples.
    EnLarge,
    /// `n·L` distinct examples split into `L` equal language blocks.
    Mixed,
    /// All English examples plus a few per other language.
    Fewshot,
}

impl MixMode {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "en" => Some(MixMode::En),
            "en_tr" => Some(MixMode::EnTr),
            "en_large" => Some(MixMode::EnLarge),
            "mixed" => Some(MixMode::Mixed),
            "fewshot" => Some(MixMode::Fewshot),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MixMode::En => "en",
            MixMode::EnTr => "en_tr",
            MixMode::EnLarge => "en_large",
            MixMode::Mixed => "mixed",
            MixMode::Fewshot => "fewshot",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixConfig {
    pub mode: MixMode,
    pub subset_size: usize,
    /// English first.
    pub languages: Vec<String>,
    pub fewshot_per_lang: usize,
    pub seed: u64,
}

impl MixConfig {
    pub fn new(mode: MixMode, subset_size: usize, languages: Vec<String>, seed: u64) -> Self {
        MixConfig {
            mode,
            subset_size,
            languages,
            fewshot_per_lang: 1000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.languages.first() {
            Some(first) if is_english(first) => {}
            _ => {
                return Err(Error::InvalidConfig(
                    "language list must start with en".into(),
                ))
            }
        }
        let unique: BTreeSet<_> = self.languages.iter().collect();
        if unique.len() != self.languages.len() {
            return Err(Error::InvalidConfig("language list has duplicates".into()));
        }
        if self.subset_size == 0 {
            return Err(Error::InvalidConfig(
                "subset size must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub example_id: String,
    pub language: String,
}

impl ManifestEntry {
    fn new(id: &str, language: &str) -> Self {
        ManifestEntry {
            example_id: id.to_string(),
            language: language.to_string(),
        }
    }
}

/// Example ids per language.
struct CorpusIndex<'a> {
    by_language: BTreeMap<&'a str, BTreeSet<&'a str>>,
}

impl<'a> CorpusIndex<'a> {
    fn new(corpus: &'a [ParallelCorpusEntry]) -> Self {
        let mut by_language: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
        for e in corpus {
            by_language
                .entry(e.language.as_str())
                .or_default()
                .insert(e.example_id.as_str());
        }
        CorpusIndex { by_language }
    }

    fn ids(&self, language: &str) -> Vec<&'a str> {
        self.by_language
            .get(language)
            .map(|ids| ids.iter().copied().collect())
            .unwrap_or_default()
    }

    fn require(&self, id: &str, language: &str) -> Result<()> {
        let present = self
            .by_language
            .get(language)
            .is_some_and(|ids| ids.contains(id));
        if present {
            Ok(())
        } else {
            Err(Error::MissingTranslation {
                id: id.to_string(),
                language: language.to_string(),
            })
        }
    }
}

fn take<'a>(pool: &[&'a str], count: usize, what: &str) -> Result<Vec<&'a str>> {
    if pool.len() < count {
        return Err(Error::Shortfall(format!(
            "{what} needs {count} ids, corpus has {}",
            pool.len()
        )));
    }
    Ok(pool[..count].to_vec())
}

/// Builds the `(example_id, language)` list for a training-mix mode.
///
/// English ids are sorted and shuffled with the seed; every mode draws from
/// the front of that order. `mixed` assigns the drawn ids round-robin to the
/// languages and emits one block per language.
pub fn build_mix_manifest(
    corpus: &[ParallelCorpusEntry],
    cfg: &MixConfig,
) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    if cfg.mode == MixMode::Fewshot {
        return build_fewshot_manifest(corpus, cfg);
    }
    let index = CorpusIndex::new(corpus);
    let english = cfg.languages[0].as_str();
    let mut pool = index.ids(english);
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));

    let n = cfg.subset_size;
    let l = cfg.languages.len();
    let mut out = Vec::new();
    match cfg.mode {
        MixMode::En => {
            for id in take(&pool, n, "en")? {
                out.push(ManifestEntry::new(id, english));
            }
        }
        MixMode::EnTr => {
            let subset = take(&pool, n, "en_tr")?;
            for lang in &cfg.languages {
                for id in &subset {
                    index.require(id, lang)?;
                    out.push(ManifestEntry::new(id, lang));
                }
            }
        }
        MixMode::EnLarge => {
            for id in take(&pool, n * l, "en_large")? {
                out.push(ManifestEntry::new(id, english));
            }
        }
        MixMode::Mixed => {
            let subset = take(&pool, n * l, "mixed")?;
            let mut blocks: Vec<Vec<ManifestEntry>> = vec![Vec::with_capacity(n); l];
            for (i, id) in subset.into_iter().enumerate() {
                let lang = &cfg.languages[i % l];
                index.require(id, lang)?;
                blocks[i % l].push(ManifestEntry::new(id, lang));
            }
            out = blocks.into_iter().flatten().collect();
        }
        MixMode::Fewshot => unreachable!("handled above"),
    }
    Ok(out)
}

/// All English entries plus `fewshot_per_lang` seeded picks for each other
/// listed language.
pub fn build_fewshot_manifest(
    corpus: &[ParallelCorpusEntry],
    cfg: &MixConfig,
) -> Result<Vec<ManifestEntry>> {
    cfg.validate()?;
    let index = CorpusIndex::new(corpus);
    let english = cfg.languages[0].as_str();
    let mut out: Vec<ManifestEntry> = index
        .ids(english)
        .into_iter()
        .map(|id| ManifestEntry::new(id, english))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for lang in &cfg.languages[1..] {
        let mut pool = index.ids(lang);
        if pool.len() < cfg.fewshot_per_lang {
            return Err(Error::Shortfall(format!(
                "fewshot needs {} {lang} entries, corpus has {}",
                cfg.fewshot_per_lang,
                pool.len()
            )));
        }
        pool.shuffle(&mut rng);
        let mut picked = pool[..cfg.fewshot_per_lang].to_vec();
        picked.sort_unstable();
        out.extend(picked.into_iter().map(|id| ManifestEntry::new(id, lang)));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IclStrategy {
    Random,
    /// Highest cosine similarity to the query embedding.
    Adaptive,
}

impl IclStrategy {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "random" => Some(IclStrategy::Random),
            "adaptive" => Some(IclStrategy::Adaptive),
            _ => None,
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroNorm(String::new()));
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    Ok(dot / (na * nb))
}

/// Picks `k` pool indices as in-context examples for `query`.
///
/// Adaptive selection ranks by cosine similarity, breaking ties toward the
/// smaller index; random selection samples without replacement.
pub fn select_icl_examples<V: AsRef<[f64]>>(
    query: &[f64],
    pool: &[V],
    k: usize,
    strategy: IclStrategy,
    seed: u64,
) -> Result<Vec<usize>> {
    if pool.len() < k {
        return Err(Error::Shortfall(format!(
            "need {k} examples, pool has {}",
            pool.len()
        )));
    }
    match strategy {
        IclStrategy::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Ok(rand::seq::index::sample(&mut rng, pool.len(), k).into_vec())
        }
        IclStrategy::Adaptive => {
            if norm(query) == 0.0 {
                return Err(Error::ZeroNorm(" (query)".into()));
            }
            let mut sims = Vec::with_capacity(pool.len());
            for (i, v) in pool.iter().enumerate() {
                let sim = cosine_similarity(query, v.as_ref()).map_err(|e| match e {
                    Error::ZeroNorm(_) => Error::ZeroNorm(format!(" (pool index {i})")),
                    other => other,
                })?;
                sims.push((sim, i));
            }
            // Plain float comparison so that -0.0 and 0.0 tie.
            sims.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap_or(Ordering::Equal)
                    .then(a.1.cmp(&b.1))
            });
            Ok(sims.into_iter().take(k).map(|(_, i)| i).collect())
        }
    }
}

/// Instruction line of the extraction prompt.
pub const PROMPT_INSTRUCTION: &str =
    "Extract the minimal span word from the \nfollowing context that best\nanswers the question.  \n";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Shot {
    pub question: String,
    pub context: String,
    pub answer: String,
}

fn prompt_block(question: &str, context: &str) -> String {
    format!("### Question:\n{question}\n### Context:\n{context}\n### Answer:\n")
}

/// Instruction, then each solved shot followed by a blank line, then the
/// query block ending at `### Answer:\n`.
pub fn render_prompt(question: &str, context: &str, shots: &[Shot]) -> String {
    let mut out = String::from(PROMPT_INSTRUCTION);
    for shot in shots {
        out.push_str(&prompt_block(&shot.question, &shot.context));
        out.push_str(&shot.answer);
        out.push_str("\n\n");
    }
    out.push_str(&prompt_block(question, context));
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PromptManifestEntry {
    pub qid: String,
    pub rendered_prompt: String,
    pub shot_qids: Vec<String>,
}

impl PromptManifestEntry {
    pub fn new(qid: &str, query: &ParallelCorpusEntry, shots: &[&ParallelCorpusEntry]) -> Self {
        let rendered: Vec<Shot> = shots
            .iter()
            .map(|e| Shot {
                question: e.question.clone(),
                context: e.context.clone(),
                answer: e.answer.clone(),
            })
            .collect();
        PromptManifestEntry {
            qid: qid.to_string(),
            rendered_prompt: render_prompt(&query.question, &query.context, &rendered),
            shot_qids: shots.iter().map(|e| e.example_id.clone()).collect(),
        }
    }
}
