//! Builds a gendered test set from a source-language job-title dataset:
//! wrap each title in both carrier sentences, translate, strip back to the
//! bare title, merge, and carry the source judgments over by lineage.
//!
//! Source dataset, one JSON object per line:
//!
//! ```text
//! {"id": "s1", "title": "lawyer", "relevant": ["s2"], "set": "both"}
//! ```
//!
//! `set` is `query`, `corpus` or `both` (the default). `relevant` lists
//! corpus-side source ids and is read from query-side records only.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::thread;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rankfair_core::dataset::{
    merge_and_dedup, remap_judgments, MergeTally, RemapTally, SourceJudgments, TemplateError,
    TemplatePair, TranslatedRecord,
};
use rankfair_core::model::SetCounts;
use rankfair_core::{GenderTag, ModelError, TestSet};

use crate::strip::{StripError, StripRules};

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("no mock translation for {title:?} ({gender}, {language})")]
    MissingEntry {
        title: String,
        gender: &'static str,
        language: String,
    },
    #[error("translation endpoint unreachable: {0}")]
    Unreachable(String),
    #[error("translation endpoint returned {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed translation response: {0}")]
    Malformed(String),
}

#[derive(Debug, thiserror::Error)]
pub enum BuildError {
    #[error("{path} line {line}: {message}")]
    Source {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Strip(#[from] StripError),
    #[error("translating source record {source_id:?}: {source}{}", partial_note(.partial))]
    Backend {
        source_id: String,
        #[source]
        source: BackendError,
        partial: Option<PathBuf>,
    },
    #[error("no {0} survived the build")]
    EmptyResult(&'static str),
    #[error("built test set is invalid: {0}")]
    Invalid(#[from] ModelError),
}

fn partial_note(partial: &Option<PathBuf>) -> String {
    match partial {
        Some(p) => format!(" (progress saved to {})", p.display()),
        None => String::new(),
    }
}

impl BuildError {
    /// Failures of the translation service rather than of the data.
    pub fn is_backend(&self) -> bool {
        matches!(self, BuildError::Backend { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceSet {
    Query,
    Corpus,
    #[default]
    Both,
}

impl SourceSet {
    fn has_query(self) -> bool {
        matches!(self, SourceSet::Query | SourceSet::Both)
    }

    fn has_corpus(self) -> bool {
        matches!(self, SourceSet::Corpus | SourceSet::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub relevant: Vec<String>,
    #[serde(default)]
    pub set: SourceSet,
}

pub fn read_source<R: Read>(reader: R, path: &Path) -> Result<Vec<SourceRecord>, BuildError> {
    let err = |line, message: String| BuildError::Source {
        path: path.into(),
        line,
        message,
    };
    let mut records = Vec::new();
    let mut ids = BTreeSet::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| err(i + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: SourceRecord = serde_json::from_str(&line).map_err(|e| err(i + 1, e.to_string()))?;
        if record.title.trim().is_empty() {
            return Err(err(i + 1, "empty title".into()));
        }
        if !ids.insert(record.id.clone()) {
            return Err(err(i + 1, format!("duplicate id {:?}", record.id)));
        }
        records.push(record);
    }
    Ok(records)
}

pub fn load_source(path: impl AsRef<Path>) -> Result<Vec<SourceRecord>, BuildError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| BuildError::Io {
        path: path.into(),
        source,
    })?;
    read_source(file, path)
}

/// One sentence to translate.
#[derive(Debug, Clone, Copy)]
pub struct TranslationRequest<'a> {
    /// The bare source title.
    pub title: &'a str,
    /// The title inside its carrier sentence.
    pub wrapped: &'a str,
    pub gender: GenderTag,
    pub target: &'a str,
}

pub trait TranslationBackend: Send + Sync {
    fn translate(&self, request: &TranslationRequest<'_>) -> Result<String, BackendError>;
}

fn gender_name(gender: GenderTag) -> &'static str {
    match gender {
        GenderTag::Feminine => "feminine",
        GenderTag::Masculine => "masculine",
        GenderTag::Neutral => "neutral",
    }
}

#[derive(Debug, Deserialize)]
struct MockEntry {
    source: String,
    gender: GenderTag,
    language: String,
    translation: String,
}

/// Table-driven translations, JSONL of `{"source","gender","language","translation"}`.
/// `source` may be the bare title or the full carrier sentence.
#[derive(Debug, Default)]
pub struct MockBackend {
    table: HashMap<(String, GenderTag, String), String>,
}

impl MockBackend {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, BuildError> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| BuildError::Io {
            path: path.into(),
            source,
        })?;
        Self::from_reader(file, path)
    }

    pub fn from_reader<R: Read>(reader: R, path: &Path) -> Result<Self, BuildError> {
        let mut table = HashMap::new();
        for (i, line) in BufReader::new(reader).lines().enumerate() {
            let err = |message: String| BuildError::Source {
                path: path.into(),
                line: i + 1,
                message,
            };
            let line = line.map_err(|e| err(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: MockEntry = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
            let key = (entry.source, entry.gender, entry.language);
            if table.insert(key, entry.translation).is_some() {
                return Err(err("duplicate mock entry".into()));
            }
        }
        Ok(Self { table })
    }

    pub fn insert(&mut self, source: &str, gender: GenderTag, language: &str, translation: &str) {
        self.table
            .insert((source.into(), gender, language.into()), translation.into());
    }
}

impl TranslationBackend for MockBackend {
    fn translate(&self, request: &TranslationRequest<'_>) -> Result<String, BackendError> {
        let lookup = |source: &str| {
            self.table
                .get(&(source.to_string(), request.gender, request.target.to_string()))
        };
        lookup(request.wrapped)
            .or_else(|| lookup(request.title))
            .cloned()
            .ok_or_else(|| BackendError::MissingEntry {
                title: request.title.to_string(),
                gender: gender_name(request.gender),
                language: request.target.to_string(),
            })
    }
}

#[derive(Debug, Serialize)]
struct HttpRequest<'a> {
    text: &'a str,
    source: &'a str,
    target: &'a str,
}

#[derive(Debug, Deserialize)]
struct HttpResponse {
    translation: String,
}

/// `POST {endpoint}` with `{"text","source":"en","target"}`, answered by
/// `{"translation"}`. Transport errors and 5xx/429 replies are retried.
#[derive(Debug)]
pub struct HttpBackend {
    endpoint: String,
    agent: ureq::Agent,
    retries: u32,
    backoff: Duration,
}

impl HttpBackend {
    pub fn new(endpoint: impl Into<String>, timeout: Duration, retries: u32) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            endpoint: endpoint.into(),
            agent,
            retries,
            backoff: Duration::from_millis(200),
        }
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    fn attempt(&self, request: &TranslationRequest<'_>) -> Result<String, (bool, BackendError)> {
        let body = HttpRequest {
            text: request.wrapped,
            source: "en",
            target: request.target,
        };
        let mut response = self
            .agent
            .post(&self.endpoint)
            .send_json(&body)
            .map_err(|e| (true, BackendError::Unreachable(e.to_string())))?;
        let status = response.status().as_u16();
        if status != 200 {
            let body = response.body_mut().read_to_string().unwrap_or_default();
            let retry = status == 429 || status >= 500;
            return Err((retry, BackendError::Status { status, body }));
        }
        let parsed: HttpResponse = response
            .body_mut()
            .read_json()
            .map_err(|e| (false, BackendError::Malformed(e.to_string())))?;
        Ok(parsed.translation)
    }
}

impl TranslationBackend for HttpBackend {
    fn translate(&self, request: &TranslationRequest<'_>) -> Result<String, BackendError> {
        let mut attempt = 0;
        loop {
            match self.attempt(request) {
                Ok(t) => return Ok(t),
                Err((true, _)) if attempt < self.retries => {
                    attempt += 1;
                    thread::sleep(self.backoff * attempt);
                }
                Err((_, e)) => return Err(e),
            }
        }
    }
}

/// A record excluded because one of its translations could not be stripped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlaggedRecord {
    pub source_id: String,
    pub gender: GenderTag,
    pub translation: String,
    pub reason: String,
}

/// Tallies for one side (queries or corpus);
/// `records = merge.paired + merge.neutral + merge.duplicates_removed + flagged`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetReport {
    pub records: usize,
    pub flagged: usize,
    pub merge: MergeTally,
    pub counts: SetCounts,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub language: String,
    pub queries: SetReport,
    pub corpus: SetReport,
    pub judgments: RemapTally,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flagged: Vec<FlaggedRecord>,
}

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub language: String,
    pub templates: TemplatePair,
    pub rules: StripRules,
    /// Concurrent translation requests.
    pub max_in_flight: usize,
    /// Where completed translations go if the backend fails.
    pub partial_path: Option<PathBuf>,
}

impl BuildOptions {
    /// Default templates with the built-in strip rules for `language`.
    pub fn new(language: &str) -> Result<Self, StripError> {
        Ok(Self::new_with_rules(language, StripRules::builtin(language)?))
    }

    pub fn new_with_rules(language: &str, rules: StripRules) -> Self {
        Self {
            language: language.to_string(),
            templates: TemplatePair::default(),
            rules,
            max_in_flight: 4,
            partial_path: None,
        }
    }
}

#[derive(Debug, Serialize)]
struct RawTranslation<'a> {
    source_id: &'a str,
    feminine: &'a str,
    masculine: &'a str,
}

fn write_partial(path: &Path, done: &[(&SourceRecord, String, String)]) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    for (record, feminine, masculine) in done {
        serde_json::to_writer(
            &mut out,
            &RawTranslation {
                source_id: &record.id,
                feminine,
                masculine,
            },
        )?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

type Translated<'a> = (&'a SourceRecord, String, String);

fn translate_all<'a, B: TranslationBackend + ?Sized>(
    records: &'a [SourceRecord],
    backend: &B,
    options: &BuildOptions,
) -> Result<Vec<Translated<'a>>, BuildError> {
    let translate_one = |record: &'a SourceRecord| -> Result<Translated<'a>, BuildError> {
        let mut out = [String::new(), String::new()];
        for (slot, gender) in out.iter_mut().zip([GenderTag::Feminine, GenderTag::Masculine]) {
            let wrapped = options.templates.wrap(&record.title, gender)?;
            let request = TranslationRequest {
                title: &record.title,
                wrapped: &wrapped,
                gender,
                target: &options.language,
            };
            *slot = backend
                .translate(&request)
                .map_err(|source| BuildError::Backend {
                    source_id: record.id.clone(),
                    source,
                    partial: None,
                })?;
        }
        let [feminine, masculine] = out;
        Ok((record, feminine, masculine))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.max_in_flight.max(1))
        .build()
        .expect("translation thread pool");
    let results: Vec<Result<Translated<'a>, BuildError>> =
        pool.install(|| records.par_iter().map(translate_one).collect());

    let mut done = Vec::with_capacity(records.len());
    let mut failure = None;
    for result in results {
        match result {
            Ok(t) => done.push(t),
            Err(e) if failure.is_none() => failure = Some(e),
            Err(_) => {}
        }
    }
    match failure {
        None => Ok(done),
        Some(BuildError::Backend {
            source_id, source, ..
        }) => {
            let partial = match &options.partial_path {
                Some(path) => {
                    write_partial(path, &done).map_err(|source| BuildError::Io {
                        path: path.clone(),
                        source,
                    })?;
                    Some(path.clone())
                }
                None => None,
            };
            Err(BuildError::Backend {
                source_id,
                source,
                partial,
            })
        }
        Some(other) => Err(other),
    }
}

fn normalize(
    translated: &[Translated<'_>],
    rules: &StripRules,
    flagged: &mut Vec<FlaggedRecord>,
) -> Vec<TranslatedRecord> {
    let mut out = Vec::new();
    for (record, feminine, masculine) in translated {
        let f = rules.strip_and_normalize(feminine);
        let m = rules.strip_and_normalize(masculine);
        match (f, m) {
            (Ok(f), Ok(m)) => {
                let mut t = TranslatedRecord::new(record.id.clone(), f, m);
                t.source_text = Some(record.title.clone());
                out.push(t);
            }
            (f, m) => {
                for (result, gender, text) in [
                    (f, GenderTag::Feminine, feminine),
                    (m, GenderTag::Masculine, masculine),
                ] {
                    if let Err(e) = result {
                        flagged.push(FlaggedRecord {
                            source_id: record.id.clone(),
                            gender,
                            translation: text.clone(),
                            reason: e.to_string(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Runs the whole pipeline. Each distinct source title is translated once
/// even when it sits on both sides.
pub fn build_test_set<B: TranslationBackend + ?Sized>(
    source: &[SourceRecord],
    backend: &B,
    options: &BuildOptions,
) -> Result<(TestSet, BuildReport), BuildError> {
    let translated = translate_all(source, backend, options)?;
    let mut flagged = Vec::new();
    let records = normalize(&translated, &options.rules, &mut flagged);
    let flagged_ids: BTreeSet<&str> = flagged.iter().map(|f| f.source_id.as_str()).collect();

    let side = |pick: fn(SourceSet) -> bool| -> (Vec<TranslatedRecord>, SetReport) {
        let members: Vec<&SourceRecord> = source.iter().filter(|r| pick(r.set)).collect();
        let kept: BTreeSet<&str> = members.iter().map(|r| r.id.as_str()).collect();
        let side_records: Vec<TranslatedRecord> = records
            .iter()
            .filter(|r| kept.contains(r.source_id.as_str()))
            .cloned()
            .collect();
        let report = SetReport {
            records: members.len(),
            flagged: members.iter().filter(|r| flagged_ids.contains(r.id.as_str())).count(),
            ..SetReport::default()
        };
        (side_records, report)
    };
    let (query_records, mut query_report) = side(SourceSet::has_query);
    let (corpus_records, mut corpus_report) = side(SourceSet::has_corpus);

    let queries = merge_and_dedup(&query_records);
    let corpus = merge_and_dedup(&corpus_records);
    if queries.titles.is_empty() {
        return Err(BuildError::EmptyResult("queries"));
    }
    if corpus.titles.is_empty() {
        return Err(BuildError::EmptyResult("corpus items"));
    }

    let mut source_judgments = SourceJudgments::new();
    for record in source.iter().filter(|r| r.set.has_query() && !r.relevant.is_empty()) {
        source_judgments
            .entry(record.id.clone())
            .or_default()
            .extend(record.relevant.iter().cloned());
    }
    let (judgments, remap) = remap_judgments(&source_judgments, &queries.lineage, &corpus.lineage);

    query_report.merge = queries.tally;
    query_report.counts = SetCounts::from_titles(&queries.titles);
    corpus_report.merge = corpus.tally;
    corpus_report.counts = SetCounts::from_titles(&corpus.titles);

    let set = TestSet::new(options.language.clone(), queries.titles, corpus.titles, judgments)?;
    let report = BuildReport {
        language: options.language.clone(),
        queries: query_report,
        corpus: corpus_report,
        judgments: remap,
        flagged,
    };
    Ok((set, report))
}

/// Judgments keyed by source id, for callers that need the raw carry-over input.
pub fn source_judgments(source: &[SourceRecord]) -> BTreeMap<String, BTreeSet<String>> {
    source
        .iter()
        .filter(|r| r.set.has_query())
        .map(|r| (r.id.clone(), r.relevant.iter().cloned().collect()))
        .collect()
}
