//! Measuring gender bias in dense job-title rankers.
//!
//! The feminine and masculine forms of the same job title are each ranked
//! against one constant corpus, and the two rankings are compared with
//! rank-biased overlap. Mean average precision is computed alongside as the
//! task-quality counterweight.
//!
//! This crate is `no_std` (it needs `alloc`) and carries only the
//! algorithms: ranking metrics, exhaustive cosine retrieval, the synthetic
//! gender-dial embedder, the test-set data model, the evaluation pipeline,
//! dataset merge rules and report grids. File formats, HTTP providers and the
//! command line live in the `rankfair` crate.
//!
//! ```
//! use rankfair_core::metrics::{rbo_uniform, Ranking};
//!
//! let s = Ranking::new(vec!["a", "b", "c", "d"]).unwrap();
//! let t = Ranking::new(vec!["d", "c", "b", "a"]).unwrap();
//! let score = rbo_uniform(&s, &t).unwrap();
//! assert!((score.value - 5.0 / 12.0).abs() < 1e-12);
//! ```

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;

pub mod dataset;
pub mod embed;
pub mod eval;
pub mod fixtures;
pub mod metrics;
pub mod model;
pub mod report;
pub mod retrieval;
mod sum;

pub use embed::{synthetic_embed, EmbedError, Embedder, Role, SyntheticEmbedder};
pub use eval::{
    evaluate_matrix, evaluate_pair, evaluate_run, inspect_top_k, prepare_view, EvalError,
    EvalOptions, EvalRun, Inspection, MatrixEntry, PairResult, PreparedView, SkipReason,
};
pub use metrics::{MetricError, MetricKind, MetricScore, Ranking};
pub use model::{
    gender_view, summarize, CorpusItem, GenderTag, GenderView, GenderedTitle, ModelError,
    QueryPair, RelevanceJudgments, TestSet, TestSetSummary, ViewKind,
};
pub use retrieval::{cosine, rank_corpus, Embedding, RetrievalError, ScoredList};
