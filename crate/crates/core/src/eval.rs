//! The bias evaluation pipeline.
//!
//! For each query pair, the feminine and masculine forms are ranked against
//! the same embedded corpus view and the two full rankings are compared with
//! [`rbo_uniform`]. Average precision is computed for each form against the
//! identity-level judgments. A run averages these per corpus view; a matrix
//! repeats runs over test sets, providers and views.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::embed::{EmbedError, Embedder, Role};
use crate::metrics::{
    average_precision, mean_average_precision, rbo_uniform, MetricError, MetricKind, MetricScore,
    Ranking,
};
use crate::model::{gender_view, GenderView, QueryPair, RelevanceJudgments, TestSet, ViewKind};
use crate::retrieval::{rank_corpus, Embedding, RetrievalError};
use crate::sum::mean;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("embedding {context}: {source}")]
    Embed {
        context: String,
        #[source]
        source: EmbedError,
    },
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error("provider dimension {provider} does not match the prepared corpus ({corpus})")]
    DimMismatch { provider: usize, corpus: usize },
    #[error("every query was skipped; nothing to average for {0}")]
    EmptyMean(&'static str),
    #[error("k = {k} outside 1..={max}")]
    KOutOfRange { k: usize, max: usize },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Neutral queries always rank identically; by default they are kept out
    /// of the RBO mean so they cannot dilute it.
    pub include_neutral_in_rbo: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    /// Excluded from the RBO mean.
    NeutralQuery,
    /// Excluded from MAP.
    NoRelevantItems,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairResult {
    pub query_id: String,
    pub neutral: bool,
    pub rbo: Option<MetricScore>,
    pub ap_feminine: Option<MetricScore>,
    pub ap_masculine: Option<MetricScore>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub skipped_reasons: Vec<SkipReason>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunCounts {
    pub queries: usize,
    pub rbo_evaluated: usize,
    pub rbo_skipped: usize,
    pub ap_evaluated: usize,
    pub ap_skipped: usize,
}

/// One (test set, provider, corpus view) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRun {
    pub language: String,
    pub model_name: String,
    pub corpus_view: ViewKind,
    pub include_neutral_in_rbo: bool,
    pub mean_rbo: MetricScore,
    pub map_feminine: MetricScore,
    pub map_masculine: MetricScore,
    pub counts: RunCounts,
    pub pair_results: Vec<PairResult>,
}

/// A corpus view embedded once, shared by both query genders.
#[derive(Debug, Clone)]
pub struct PreparedView {
    view: GenderView,
    vectors: Vec<Embedding>,
    positions: BTreeMap<String, usize>,
}

impl PreparedView {
    pub fn view(&self) -> &GenderView {
        &self.view
    }

    pub fn vectors(&self) -> &[Embedding] {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.vectors.first().map_or(0, Embedding::dim)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    fn relevant_positions(&self, judgments: &RelevanceJudgments, query_id: &str) -> Option<BTreeSet<usize>> {
        judgments.relevant(query_id).map(|ids| {
            ids.iter()
                .filter_map(|id| self.positions.get(id).copied())
                .collect()
        })
    }

    fn rank(&self, query: &Embedding) -> Result<Ranking<usize>, EvalError> {
        Ok(rank_corpus(query, &self.vectors)?.ranking())
    }
}

/// Embeds the chosen corpus view with `embedder`.
pub fn prepare_view<E: Embedder + ?Sized>(
    test_set: &TestSet,
    view: ViewKind,
    embedder: &E,
) -> Result<PreparedView, EvalError> {
    let view = gender_view(test_set, view);
    if view.is_empty() {
        return Err(RetrievalError::EmptyCorpus.into());
    }
    let texts: Vec<&str> = view.texts().collect();
    let vectors = embedder
        .embed_batch(&texts, Role::Passage)
        .map_err(|source| EvalError::Embed {
            context: alloc::format!("{} corpus", view.view.as_str()),
            source,
        })?;
    crate::embed::check_output(&texts, &vectors, embedder.dim()).map_err(|source| EvalError::Embed {
        context: "corpus".to_string(),
        source,
    })?;
    let positions = view
        .items
        .iter()
        .enumerate()
        .map(|(i, item)| (item.id.clone(), i))
        .collect();
    Ok(PreparedView {
        view,
        vectors,
        positions,
    })
}

fn score_pair(
    pair: &QueryPair,
    feminine: &Embedding,
    masculine: &Embedding,
    prepared: &PreparedView,
    judgments: &RelevanceJudgments,
    options: EvalOptions,
) -> Result<PairResult, EvalError> {
    let fem_ranking = prepared.rank(feminine)?;
    let masc_ranking = if pair.neutral {
        fem_ranking.clone()
    } else {
        prepared.rank(masculine)?
    };
    let mut skipped_reasons = Vec::new();

    let rbo = if pair.neutral && !options.include_neutral_in_rbo {
        skipped_reasons.push(SkipReason::NeutralQuery);
        None
    } else {
        Some(rbo_uniform(&fem_ranking, &masc_ranking)?)
    };

    let (ap_feminine, ap_masculine) = match prepared.relevant_positions(judgments, &pair.id) {
        Some(relevant) if !relevant.is_empty() => (
            Some(average_precision(&fem_ranking, &relevant)?),
            Some(average_precision(&masc_ranking, &relevant)?),
        ),
        _ => {
            skipped_reasons.push(SkipReason::NoRelevantItems);
            (None, None)
        }
    };

    Ok(PairResult {
        query_id: pair.id.clone(),
        neutral: pair.neutral,
        rbo,
        ap_feminine,
        ap_masculine,
        skipped_reasons,
    })
}

fn embed_pair<E: Embedder + ?Sized>(
    pair: &QueryPair,
    embedder: &E,
    expected_dim: usize,
) -> Result<(Embedding, Embedding), EvalError> {
    let texts = [pair.feminine.as_str(), pair.masculine.as_str()];
    let wrap = |source| EvalError::Embed {
        context: alloc::format!("query {:?}", pair.id),
        source,
    };
    let mut vectors = embedder.embed_batch(&texts, Role::Query).map_err(wrap)?;
    crate::embed::check_output(&texts, &vectors, expected_dim).map_err(wrap)?;
    let masculine = vectors.pop().expect("two vectors");
    let feminine = vectors.pop().expect("two vectors");
    Ok((feminine, masculine))
}

fn check_dims<E: Embedder + ?Sized>(prepared: &PreparedView, embedder: &E) -> Result<(), EvalError> {
    if embedder.dim() != prepared.dim() {
        return Err(EvalError::DimMismatch {
            provider: embedder.dim(),
            corpus: prepared.dim(),
        });
    }
    Ok(())
}

/// Ranks `prepared` with both forms of `pair` and compares the rankings.
pub fn evaluate_pair<E: Embedder + ?Sized>(
    pair: &QueryPair,
    prepared: &PreparedView,
    embedder: &E,
    judgments: &RelevanceJudgments,
    options: EvalOptions,
) -> Result<PairResult, EvalError> {
    check_dims(prepared, embedder)?;
    let (feminine, masculine) = embed_pair(pair, embedder, prepared.dim())?;
    score_pair(pair, &feminine, &masculine, prepared, judgments, options)
}

fn embed_queries<E: Embedder + ?Sized>(
    texts: &[&str],
    embedder: &E,
    label: &str,
) -> Result<Vec<Embedding>, EvalError> {
    let wrap = |source| EvalError::Embed {
        context: alloc::format!("{label} queries"),
        source,
    };
    let vectors = embedder.embed_batch(texts, Role::Query).map_err(wrap)?;
    crate::embed::check_output(texts, &vectors, embedder.dim()).map_err(wrap)?;
    Ok(vectors)
}

/// Evaluates every query of `test_set` over one corpus view.
pub fn evaluate_run<E: Embedder + ?Sized>(
    test_set: &TestSet,
    view: ViewKind,
    embedder: &E,
    options: EvalOptions,
) -> Result<EvalRun, EvalError> {
    let prepared = prepare_view(test_set, view, embedder)?;
    let queries = test_set.queries();
    if queries.is_empty() {
        return Err(EvalError::EmptyMean("rbo"));
    }
    let fem_texts: Vec<&str> = queries.iter().map(|q| q.feminine.as_str()).collect();
    let masc_texts: Vec<&str> = queries.iter().map(|q| q.masculine.as_str()).collect();
    let fem_vectors = embed_queries(&fem_texts, embedder, "feminine")?;
    let masc_vectors = embed_queries(&masc_texts, embedder, "masculine")?;

    let pair_results = queries
        .iter()
        .zip(fem_vectors.iter().zip(&masc_vectors))
        .map(|(pair, (f, m))| score_pair(pair, f, m, &prepared, test_set.judgments(), options))
        .collect::<Result<Vec<_>, _>>()?;

    summarize_run(test_set.language(), embedder.model_name(), view, options, pair_results)
}

fn summarize_run(
    language: &str,
    model_name: &str,
    view: ViewKind,
    options: EvalOptions,
    pair_results: Vec<PairResult>,
) -> Result<EvalRun, EvalError> {
    let rbos: Vec<f64> = pair_results.iter().filter_map(|p| p.rbo.map(|s| s.value)).collect();
    let mean_rbo = mean(rbos.iter().copied()).ok_or(EvalError::EmptyMean("rbo"))?;
    let fem_aps: Vec<MetricScore> = pair_results.iter().filter_map(|p| p.ap_feminine).collect();
    let masc_aps: Vec<MetricScore> = pair_results.iter().filter_map(|p| p.ap_masculine).collect();
    let map_feminine =
        mean_average_precision(&fem_aps).map_err(|_| EvalError::EmptyMean("feminine map"))?;
    let map_masculine =
        mean_average_precision(&masc_aps).map_err(|_| EvalError::EmptyMean("masculine map"))?;

    let counts = RunCounts {
        queries: pair_results.len(),
        rbo_evaluated: rbos.len(),
        rbo_skipped: pair_results.len() - rbos.len(),
        ap_evaluated: fem_aps.len(),
        ap_skipped: pair_results.len() - fem_aps.len(),
    };
    Ok(EvalRun {
        language: language.to_string(),
        model_name: model_name.to_string(),
        corpus_view: view,
        include_neutral_in_rbo: options.include_neutral_in_rbo,
        mean_rbo: MetricScore::new(MetricKind::MeanRboUniform, mean_rbo, None),
        map_feminine,
        map_masculine,
        counts,
        pair_results,
    })
}

/// One cell of an evaluation matrix; failures are kept, not propagated.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixEntry {
    pub language: String,
    pub model_name: String,
    pub view: ViewKind,
    pub outcome: Result<EvalRun, EvalError>,
}

/// Runs every (test set, provider, view) combination, test-set major.
pub fn evaluate_matrix(
    test_sets: &[TestSet],
    embedders: &[&dyn Embedder],
    views: &[ViewKind],
    options: EvalOptions,
) -> Vec<MatrixEntry> {
    let mut entries = Vec::with_capacity(test_sets.len() * embedders.len() * views.len());
    for set in test_sets {
        for embedder in embedders {
            for &view in views {
                entries.push(MatrixEntry {
                    language: set.language().to_string(),
                    model_name: embedder.model_name().to_string(),
                    view,
                    outcome: evaluate_run(set, view, *embedder, options),
                });
            }
        }
    }
    entries
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InspectionRow {
    pub rank: usize,
    pub feminine: String,
    pub masculine: String,
}

impl InspectionRow {
    pub fn differs(&self) -> bool {
        self.feminine != self.masculine
    }
}

/// Top-k corpus strings for both forms of one query, side by side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inspection {
    pub query_id: String,
    pub feminine_query: String,
    pub masculine_query: String,
    pub corpus_view: ViewKind,
    /// Full-depth RBO of the two rankings, not just the displayed prefix.
    pub rbo: MetricScore,
    pub rows: Vec<InspectionRow>,
}

pub fn inspect_top_k<E: Embedder + ?Sized>(
    pair: &QueryPair,
    prepared: &PreparedView,
    embedder: &E,
    k: usize,
) -> Result<Inspection, EvalError> {
    if k == 0 || k > prepared.len() {
        return Err(EvalError::KOutOfRange {
            k,
            max: prepared.len(),
        });
    }
    check_dims(prepared, embedder)?;
    let (feminine, masculine) = embed_pair(pair, embedder, prepared.dim())?;
    let fem = prepared.rank(&feminine)?;
    let masc = prepared.rank(&masculine)?;
    let rbo = rbo_uniform(&fem, &masc)?;
    let text = |pos: usize| prepared.view.items[pos].text.clone();
    let rows = fem
        .iter()
        .zip(masc.iter())
        .take(k)
        .enumerate()
        .map(|(i, (&f, &m))| InspectionRow {
            rank: i + 1,
            feminine: text(f),
            masculine: text(m),
        })
        .collect();
    Ok(Inspection {
        query_id: pair.id.clone(),
        feminine_query: pair.feminine.clone(),
        masculine_query: pair.masculine.clone(),
        corpus_view: prepared.view.view,
        rbo,
        rows,
    })
}
