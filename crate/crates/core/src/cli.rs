//! The `qacal` command line.
//!
//! Exit codes: 0 on success, 1 for domain failures (failed fits, empty
//! selections, shortfalls), 2 for unreadable or invalid input.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analysis::{
    correlate_ece_with_features, load_metrics_csv, parallel_confidence_correlation,
    per_language_table, FeatureTable,
};
use crate::calibrate::{
    fit_dual_temperature, fit_generative_temperature, smooth_span_targets, FitConfig,
    SmoothingConfig,
};
use crate::corpus::{
    build_mix_manifest, load_corpus, select_icl_examples, IclStrategy, MixConfig, MixMode,
    ParallelCorpusEntry, PromptManifestEntry,
};
use crate::error::Error;
use crate::extraction::{extract_prediction_record, ExtractionConfig, DEFAULT_MAX_ANSWER_LENGTH};
use crate::metrics::{reliability_bins, BinningConfig, Matcher, DEFAULT_BINS};
use crate::prediction_log::{
    parse_log, parse_span_log, to_json_line, write_log, LogReader, ModelKind, ParseOptions,
    PredictionRecord, SpanLogReader, Split, DEFAULT_MAX_CANDIDATES,
};
use crate::report::{self, OutputFormat};
use crate::scoring::{score_records, ScoringOptions, TemperatureParams};

#[derive(Debug, Parser)]
#[command(
    name = "qacal",
    version,
    about = "Calibration toolkit for multilingual QA prediction logs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: GlobalArgs,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Number of equal-width confidence bins.
    #[arg(long, global = true, default_value_t = DEFAULT_BINS)]
    pub bins: usize,
    /// Candidate count (extract-candidates, default 20) or number of shots (icl-select, default 2).
    #[arg(long, global = true)]
    pub k: Option<usize>,
    /// Temperature parameters document applied to confidences.
    #[arg(long, global = true, value_name = "FILE")]
    pub temperature: Option<PathBuf>,
    /// Keep only records of this language.
    #[arg(long, global = true, value_name = "CODE")]
    pub lang: Option<String>,
    /// Seed for randomized steps (assemble, random in-context selection).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Table)]
    pub format: OutputFormat,
    /// Output path (standard output when omitted).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MatchArg {
    Exact,
    /// Gold answer contained in the prediction.
    Contains,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a prediction or span-logit log against the schema.
    Validate {
        log: PathBuf,
        /// Permit empty candidate texts.
        #[arg(long)]
        allow_empty_text: bool,
        #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
        max_candidates: usize,
    },
    /// Per-language EM and ECE with macro averages.
    Evaluate {
        log: PathBuf,
        #[arg(long = "match", value_enum, default_value_t = MatchArg::Exact)]
        matcher: MatchArg,
        /// Select answers from tempered confidences.
        #[arg(long)]
        rerank: bool,
    },
    /// Reliability table (`--out`) and SVG diagram.
    Reliability {
        log: PathBuf,
        /// Diagram path; defaults to the `--out` path with an `.svg` extension.
        #[arg(long)]
        svg: Option<PathBuf>,
        #[arg(long = "match", value_enum, default_value_t = MatchArg::Exact)]
        matcher: MatchArg,
    },
    /// Fit temperatures on a span-logit log (dual) or a generative prediction log (single).
    FitTemperature {
        log: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        tau_min: f64,
        #[arg(long, default_value_t = 50.0)]
        tau_max: f64,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 1e-4)]
        tolerance: f64,
        #[arg(long = "match", value_enum, default_value_t = MatchArg::Exact)]
        matcher: MatchArg,
        /// Also write label-smoothed start/end targets for each span record.
        #[arg(long, value_name = "PATH")]
        smoothed_targets: Option<PathBuf>,
        #[arg(long, default_value_t = 0.1)]
        alpha_start: f64,
        #[arg(long, default_value_t = 0.1)]
        alpha_end: f64,
    },
    /// Turn a span-logit log into an extractive prediction log.
    ExtractCandidates {
        spans: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_ANSWER_LENGTH)]
        max_answer_length: usize,
        #[arg(long, default_value = "unknown")]
        dataset: String,
        #[arg(long, value_enum, default_value_t = SplitArg::Validation)]
        split: SplitArg,
    },
    /// Build a training-mix manifest from a parallel corpus.
    Assemble {
        corpus: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: MixMode,
        /// English subset size.
        #[arg(long, default_value_t = 9929)]
        n: usize,
        /// Comma-separated language codes, English first.
        #[arg(long, value_delimiter = ',', default_value = "en,ar,de,es,hi,vi")]
        languages: Vec<String>,
        #[arg(long, default_value_t = 1000)]
        fewshot_per_lang: usize,
    },
    /// Choose in-context examples from a log with embeddings.
    IclSelect {
        pool: PathBuf,
        /// Query embedding as comma-separated numbers.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            conflicts_with = "query_qid"
        )]
        query: Option<Vec<f64>>,
        /// Use this pool record's embedding as the query (it is left out of the pool).
        #[arg(long)]
        query_qid: Option<String>,
        #[arg(long, value_parser = parse_strategy, default_value = "adaptive")]
        strategy: IclStrategy,
        /// Corpus with question/context/answer text; emits a rendered prompt instead of indices.
        #[arg(long, requires = "query_qid")]
        corpus: Option<PathBuf>,
    },
    /// Correlate per-language ECE with language features, or confidences across parallel questions.
    Correlate {
        /// Prediction log to compute per-language metrics from.
        #[arg(long, conflicts_with = "metrics")]
        log: Option<PathBuf>,
        /// Precomputed `language,n,em_rate,ece` rows.
        #[arg(long)]
        metrics: Option<PathBuf>,
        /// `language,syntactic,genetic,pretrain_size[,...]` feature file.
        #[arg(long)]
        features: Option<PathBuf>,
        /// Source language for parallel-confidence correlation (needs --log).
        #[arg(long, requires = "log")]
        parallel_source: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Train,
    Validation,
    Test,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Validation => Split::Validation,
            SplitArg::Test => Split::Test,
        }
    }
}

fn parse_mode(s: &str) -> Result<MixMode, String> {
    MixMode::parse(s)
        .ok_or_else(|| format!("unknown mode `{s}` (en, en_tr, en_large, mixed, fewshot)"))
}

fn parse_strategy(s: &str) -> Result<IclStrategy, String> {
    IclStrategy::parse(s).ok_or_else(|| format!("unknown strategy `{s}` (random, adaptive)"))
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn domain(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { 2 } else { 1 };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match execute(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn read_input(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn emit(global: &GlobalArgs, stdout: &mut dyn Write, text: &str) -> CliResult<()> {
    match &global.out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::input(e.to_string())),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn is_span_log(text: &str) -> bool {
    text.lines()
        .find(|l| !l.trim().is_empty())
        .and_then(|l| serde_json::from_str::<serde_json::Value>(l).ok())
        .is_some_and(|v| v.get("start_logits").is_some())
}

fn load_predictions(path: &Path, global: &GlobalArgs) -> CliResult<Vec<PredictionRecord>> {
    let text = read_input(path)?;
    let log = parse_log(text.as_bytes(), ParseOptions::default())?;
    for w in &log.warnings {
        log::warn!("{}: {w}", path.display());
    }
    let records = filter_language(log.records, global);
    if records.is_empty() {
        return Err(CliError::domain(format!(
            "no records left after filtering for language `{}`",
            global.lang.as_deref().unwrap_or_default()
        )));
    }
    Ok(records)
}

fn filter_language(records: Vec<PredictionRecord>, global: &GlobalArgs) -> Vec<PredictionRecord> {
    match &global.lang {
        Some(code) => records
            .into_iter()
            .filter(|r| r.language.eq_ignore_ascii_case(code))
            .collect(),
        None => records,
    }
}

fn load_temperature(global: &GlobalArgs) -> CliResult<Option<TemperatureParams>> {
    match &global.temperature {
        None => Ok(None),
        Some(path) => {
            let text = read_input(path)?;
            Ok(Some(TemperatureParams::from_reader(text.as_bytes())?))
        }
    }
}

fn matcher(arg: MatchArg) -> Matcher {
    match arg {
        MatchArg::Exact => Matcher::default(),
        MatchArg::Contains => Matcher::containment(),
    }
}

fn binning(global: &GlobalArgs) -> CliResult<BinningConfig> {
    Ok(BinningConfig::new(global.bins)?)
}

fn require_seed(global: &GlobalArgs, command: &str) -> CliResult<u64> {
    global
        .seed
        .ok_or_else(|| CliError::input(format!("{command} requires --seed")))
}

fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CliResult<()> {
    let global = &cli.global;
    match &cli.command {
        Command::Validate {
            log,
            allow_empty_text,
            max_candidates,
        } => cmd_validate(log, *allow_empty_text, *max_candidates, stdout, stderr),
        Command::Evaluate {
            log,
            matcher: m,
            rerank,
        } => {
            let records = load_predictions(log, global)?;
            let temps = load_temperature(global)?;
            let scored = score_records(
                &records,
                temps.as_ref(),
                &matcher(*m),
                ScoringOptions { rerank: *rerank },
            )?;
            let table = per_language_table(&scored, &binning(global)?)?;
            emit(
                global,
                stdout,
                &report::language_table(&table, global.format),
            )
        }
        Command::Reliability {
            log,
            svg,
            matcher: m,
        } => {
            let out = global
                .out
                .as_ref()
                .ok_or_else(|| CliError::input("reliability requires --out for the bins file"))?;
            let records = load_predictions(log, global)?;
            let temps = load_temperature(global)?;
            let scored = score_records(
                &records,
                temps.as_ref(),
                &matcher(*m),
                ScoringOptions::default(),
            )?;
            let table = reliability_bins(&scored, &binning(global)?)?;
            let mut csv = Vec::new();
            table.write_csv(&mut csv)?;
            write_file(out, &String::from_utf8(csv).expect("csv output is utf-8"))?;
            let svg_path = svg.clone().unwrap_or_else(|| out.with_extension("svg"));
            write_file(&svg_path, &report::reliability_svg(&table))?;
            let _ = writeln!(
                stdout,
                "ECE {} over {} predictions",
                report::percent(table.ece()),
                table.total
            );
            Ok(())
        }
        Command::FitTemperature {
            log,
            tau_min,
            tau_max,
            grid,
            tolerance,
            matcher: m,
            smoothed_targets,
            alpha_start,
            alpha_end,
        } => {
            let cfg = FitConfig {
                tau_min: *tau_min,
                tau_max: *tau_max,
                grid: *grid,
                tolerance: *tolerance,
            };
            let text = read_input(log)?;
            let params = if is_span_log(&text) {
                let mut recs = parse_span_log(text.as_bytes())?.records;
                if let Some(code) = &global.lang {
                    recs.retain(|r| r.language.eq_ignore_ascii_case(code));
                }
                if recs.is_empty() {
                    return Err(CliError::domain(
                        "no span records left after language filter",
                    ));
                }
                if let Some(path) = smoothed_targets {
                    let smoothing = SmoothingConfig {
                        alpha_start: *alpha_start,
                        alpha_end: *alpha_end,
                    };
                    let targets = recs
                        .iter()
                        .map(|r| smooth_span_targets(r, &smoothing))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut buf = Vec::new();
                    write_log(&mut buf, &targets)?;
                    write_file(path, &String::from_utf8(buf).expect("json is utf-8"))?;
                }
                fit_dual_temperature(&recs, &cfg)?
            } else {
                if smoothed_targets.is_some() {
                    return Err(CliError::input("--smoothed-targets needs a span-logit log"));
                }
                let opts = ParseOptions {
                    expected_kind: Some(ModelKind::Generative),
                    ..Default::default()
                };
                let parsed = parse_log(text.as_bytes(), opts).map_err(|e| match e {
                    Error::KindMismatch { .. } => CliError::input(format!(
                        "{e}; extractive temperatures are fitted on span-logit logs"
                    )),
                    other => other.into(),
                })?;
                let recs = filter_language(parsed.records, global);
                if recs.is_empty() {
                    return Err(CliError::domain("no records left after language filter"));
                }
                let params = fit_generative_temperature(&recs, &matcher(*m), &cfg)?;
                if let Some(excluded) = params.excluded_count.filter(|&n| n > 0) {
                    let _ = writeln!(
                        stderr,
                        "excluded {excluded} records without a gold-matching candidate"
                    );
                }
                params
            };
            if params.hit_bound {
                let _ = writeln!(stderr, "warning: optimum lies on the search bound");
            }
            emit(global, stdout, &params.to_json())
        }
        Command::ExtractCandidates {
            spans,
            max_answer_length,
            dataset,
            split,
        } => {
            let text = read_input(spans)?;
            let mut recs = parse_span_log(text.as_bytes())?.records;
            if let Some(code) = &global.lang {
                recs.retain(|r| r.language.eq_ignore_ascii_case(code));
            }
            let cfg = ExtractionConfig {
                k: global.k.unwrap_or(crate::extraction::DEFAULT_K),
                max_answer_length: *max_answer_length,
            };
            let preds = recs
                .iter()
                .map(|r| extract_prediction_record(r, &cfg, dataset, (*split).into()))
                .collect::<Result<Vec<_>, _>>()?;
            let mut buf = Vec::new();
            write_log(&mut buf, &preds)?;
            emit(
                global,
                stdout,
                &String::from_utf8(buf).expect("json is utf-8"),
            )
        }
        Command::Assemble {
            corpus,
            mode,
            n,
            languages,
            fewshot_per_lang,
        } => {
            let seed = require_seed(global, "assemble")?;
            let entries = load_corpus(read_input(corpus)?.as_bytes())?;
            let mut cfg = MixConfig::new(*mode, *n, languages.clone(), seed);
            cfg.fewshot_per_lang = *fewshot_per_lang;
            let manifest = build_mix_manifest(&entries, &cfg)?;
            let mut buf = Vec::new();
            write_log(&mut buf, &manifest)?;
            emit(
                global,
                stdout,
                &String::from_utf8(buf).expect("json is utf-8"),
            )
        }
        Command::IclSelect {
            pool,
            query,
            query_qid,
            strategy,
            corpus,
        } => cmd_icl_select(
            global,
            pool,
            query.as_deref(),
            query_qid.as_deref(),
            *strategy,
            corpus.as_deref(),
            stdout,
        ),
        Command::Correlate {
            log,
            metrics,
            features,
            parallel_source,
        } => {
            let mut text = String::new();
            if let Some(source) = parallel_source {
                let log = log.as_ref().expect("clap enforces --log");
                let records = load_predictions(log, global)?;
                let temps = load_temperature(global)?;
                let scored = score_records(
                    &records,
                    temps.as_ref(),
                    &Matcher::default(),
                    ScoringOptions::default(),
                )?;
                let out = parallel_confidence_correlation(&scored, source);
                text.push_str(&report::parallel_table(&out, global.format));
            }
            if let Some(features) = features {
                let rows = match (log, metrics) {
                    (Some(log), _) => {
                        let records = load_predictions(log, global)?;
                        let temps = load_temperature(global)?;
                        let scored = score_records(
                            &records,
                            temps.as_ref(),
                            &Matcher::default(),
                            ScoringOptions::default(),
                        )?;
                        per_language_table(&scored, &binning(global)?)?.rows
                    }
                    (None, Some(path)) => load_metrics_csv(read_input(path)?.as_bytes())?,
                    (None, None) => {
                        return Err(CliError::input("correlate needs --log or --metrics"))
                    }
                };
                let table = FeatureTable::from_csv(read_input(features)?.as_bytes())?;
                let corr = correlate_ece_with_features(&rows, &table)?;
                for lang in &corr.unmatched_metrics {
                    let _ = writeln!(stderr, "no features for language `{lang}`");
                }
                for lang in &corr.unmatched_features {
                    let _ = writeln!(stderr, "no metrics for language `{lang}`");
                }
                text.push_str(&report::correlation_table(&corr, global.format));
            }
            if text.is_empty() {
                return Err(CliError::input(
                    "correlate needs --features or --parallel-source",
                ));
            }
            emit(global, stdout, &text)
        }
    }
}

fn cmd_validate(
    path: &Path,
    allow_empty_text: bool,
    max_candidates: usize,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> CliResult<()> {
    let text = read_input(path)?;
    let (count, errors, warnings) = if is_span_log(&text) {
        let mut reader = SpanLogReader::new(text.as_bytes());
        let (mut ok, mut errors) = (0usize, Vec::new());
        for rec in reader.by_ref() {
            match rec {
                Ok(_) => ok += 1,
                Err(e) => errors.push(e),
            }
        }
        (ok, errors, reader.into_warnings())
    } else {
        let opts = ParseOptions {
            allow_empty_text,
            max_candidates,
            ..Default::default()
        };
        let mut reader = LogReader::new(text.as_bytes(), opts);
        let (mut ok, mut errors) = (0usize, Vec::new());
        for rec in reader.by_ref() {
            match rec {
                Ok(_) => ok += 1,
                Err(e) => errors.push(e),
            }
        }
        (ok, errors, reader.into_warnings())
    };
    for w in &warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    for e in &errors {
        let _ = writeln!(stderr, "error: {e}");
    }
    let _ = writeln!(
        stdout,
        "{count} valid records, {} errors, {} warnings",
        errors.len(),
        warnings.len()
    );
    if !errors.is_empty() {
        return Err(CliError::input(format!("{} invalid records", errors.len())));
    }
    if count == 0 {
        return Err(Error::EmptyInput.into());
    }
    Ok(())
}

fn cmd_icl_select(
    global: &GlobalArgs,
    pool_path: &Path,
    query: Option<&[f64]>,
    query_qid: Option<&str>,
    strategy: IclStrategy,
    corpus_path: Option<&Path>,
    stdout: &mut dyn Write,
) -> CliResult<()> {
    let seed = match strategy {
        IclStrategy::Random => require_seed(global, "icl-select --strategy random")?,
        IclStrategy::Adaptive => global.seed.unwrap_or(0),
    };
    let records = load_predictions(pool_path, global)?;
    let (query_vec, pool): (Vec<f64>, Vec<&PredictionRecord>) = match (query, query_qid) {
        (Some(q), None) => (q.to_vec(), records.iter().collect()),
        (None, Some(qid)) => {
            let target = records
                .iter()
                .find(|r| r.qid == qid)
                .ok_or_else(|| CliError::input(format!("query qid `{qid}` not in pool")))?;
            let vec = target
                .embedding
                .clone()
                .ok_or_else(|| CliError::input(format!("record `{qid}` has no embedding")))?;
            (vec, records.iter().filter(|r| r.qid != qid).collect())
        }
        _ => return Err(CliError::input("icl-select needs --query or --query-qid")),
    };
    let embeddings = pool
        .iter()
        .map(|r| {
            r.embedding
                .as_deref()
                .ok_or_else(|| CliError::input(format!("pool record `{}` has no embedding", r.qid)))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let k = global.k.unwrap_or(2);
    let picked = select_icl_examples(&query_vec, &embeddings, k, strategy, seed)?;

    let text = match corpus_path {
        None => {
            let joined: Vec<String> = picked.iter().map(usize::to_string).collect();
            format!("{}\n", joined.join(","))
        }
        Some(path) => {
            let corpus = load_corpus(read_input(path)?.as_bytes())?;
            let lookup = |qid: &str, lang: &str| -> CliResult<&ParallelCorpusEntry> {
                corpus
                    .iter()
                    .find(|e| e.example_id == qid && e.language.eq_ignore_ascii_case(lang))
                    .ok_or_else(|| CliError::input(format!("({qid}, {lang}) not in corpus")))
            };
            let qid = query_qid.expect("clap enforces --query-qid with --corpus");
            let query_rec = records.iter().find(|r| r.qid == qid).expect("found above");
            let query_entry = lookup(qid, &query_rec.language)?;
            let shots = picked
                .iter()
                .map(|&i| lookup(&pool[i].qid, &pool[i].language))
                .collect::<CliResult<Vec<_>>>()?;
            let entry = PromptManifestEntry::new(qid, query_entry, &shots);
            to_json_line(&entry) + "\n"
        }
    };
    emit(global, stdout, &text)
}
