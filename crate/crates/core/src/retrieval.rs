//! Exhaustive cosine retrieval with position-based tie-breaking.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::metrics::Ranking;

/// Tolerance on the raw dot product of two unit vectors before clamping.
pub const COSINE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RetrievalError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimMismatch { expected: usize, found: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("vector has zero norm")]
    ZeroNorm,
    #[error("vector has non-finite components")]
    NonFinite,
    #[error("vector has no components")]
    EmptyVector,
    #[error("dot product {0} of unit vectors is outside [-1, 1] beyond tolerance")]
    NotUnit(f64),
}

/// A unit-normalized embedding, stored in double precision.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Vec<f64>);

impl Embedding {
    /// L2-normalizes `values`.
    pub fn new(mut values: Vec<f64>) -> Result<Self, RetrievalError> {
        if values.is_empty() {
            return Err(RetrievalError::EmptyVector);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(RetrievalError::NonFinite);
        }
        let norm = libm::sqrt(values.iter().map(|v| v * v).sum::<f64>());
        if norm == 0.0 || !norm.is_finite() {
            return Err(RetrievalError::ZeroNorm);
        }
        for v in &mut values {
            *v /= norm;
        }
        Ok(Self(values))
    }

    pub fn from_f32(values: &[f32]) -> Result<Self, RetrievalError> {
        Self::new(values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.0.iter().map(|v| v * v).sum::<f64>())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Cosine similarity of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine(a: &Embedding, b: &Embedding) -> Result<f64, RetrievalError> {
    if a.dim() != b.dim() {
        return Err(RetrievalError::DimMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let raw = dot(&a.0, &b.0);
    if !(-1.0 - COSINE_SLACK..=1.0 + COSINE_SLACK).contains(&raw) {
        return Err(RetrievalError::NotUnit(raw));
    }
    Ok(raw.clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredEntry {
    /// Index into the corpus slice that was ranked.
    pub position: usize,
    pub score: f64,
}

/// Scores in non-increasing order; ties keep ascending corpus position.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredList {
    entries: Vec<ScoredEntry>,
}

impl ScoredList {
    pub fn entries(&self) -> &[ScoredEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The ranking of corpus positions.
    pub fn ranking(&self) -> Ranking<usize> {
        Ranking::from_distinct(self.entries.iter().map(|e| e.position).collect())
    }
}

/// Scores every corpus vector against `query` and sorts by descending score,
/// breaking ties by ascending corpus position.
pub fn rank_corpus(query: &Embedding, corpus: &[Embedding]) -> Result<ScoredList, RetrievalError> {
    if corpus.is_empty() {
        return Err(RetrievalError::EmptyCorpus);
    }
    let mut entries = Vec::with_capacity(corpus.len());
    for (position, item) in corpus.iter().enumerate() {
        entries.push(ScoredEntry {
            position,
            score: cosine(query, item)?,
        });
    }
    entries.sort_by(|a, b| match b.score.total_cmp(&a.score) {
        Ordering::Equal => a.position.cmp(&b.position),
        other => other,
    });
    Ok(ScoredList { entries })
}
