//! Deterministic synthetic test sets for the synthetic embedder.
//!
//! Surface forms use the `lemma#f` / `lemma#m` convention, neutral items a
//! bare lemma, so [`crate::SyntheticEmbedder`] with weight 0 is gender-blind
//! on them. Each query's own lemma appears in the corpus and is judged
//! relevant, together with a few random corpus items.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::embed::SplitMix64;
use crate::model::{GenderedTitle, RelevanceJudgments, TestSet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FixtureShape {
    pub language: String,
    pub query_pairs: usize,
    pub query_neutral: usize,
    pub corpus_pairs: usize,
    pub corpus_neutral: usize,
    /// Extra relevant corpus items per query, besides its own lemma.
    pub extra_relevant: usize,
    pub seed: u64,
}

impl FixtureShape {
    pub fn new(
        language: impl Into<String>,
        (query_pairs, query_neutral): (usize, usize),
        (corpus_pairs, corpus_neutral): (usize, usize),
    ) -> Self {
        Self {
            language: language.into(),
            query_pairs,
            query_neutral,
            corpus_pairs,
            corpus_neutral,
            extra_relevant: 2,
            seed: 0x5eed,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_extra_relevant(mut self, n: usize) -> Self {
        self.extra_relevant = n;
        self
    }

    /// Per-language counts of the reference test sets:
    /// `(query M/F, query N)` and `(corpus M/F, corpus N)`.
    pub fn language_shape(language: &str) -> Option<Self> {
        let (q, c) = match language {
            "de" => ((99, 5), (2264, 201)),
            "es" => ((81, 23), (2052, 557)),
            "fr" => ((60, 44), (1566, 985)),
            "pt" => ((75, 29), (1703, 899)),
            _ => return None,
        };
        Some(Self::new(language, q, c))
    }

    /// 40 paired + 10 neutral queries over 80 paired + 20 neutral corpus items.
    pub fn standard() -> Self {
        Self::new("xx", (40, 10), (80, 20)).with_seed(7)
    }
}

fn paired(id: String, lemma: &str) -> GenderedTitle {
    GenderedTitle::new(id, format!("{lemma}#f"), format!("{lemma}#m"))
}

fn neutral(id: String, lemma: &str) -> GenderedTitle {
    GenderedTitle::new(id, lemma, lemma)
}

/// Generates the test set for `shape`.
///
/// # Panics
///
/// If the corpus has fewer paired or neutral items than the queries, since
/// every query's lemma must appear in the corpus.
pub fn generate(shape: &FixtureShape) -> TestSet {
    assert!(
        shape.corpus_pairs >= shape.query_pairs && shape.corpus_neutral >= shape.query_neutral,
        "corpus must cover every query lemma"
    );
    let mut rng = SplitMix64::new(shape.seed);
    let query_count = shape.query_pairs + shape.query_neutral;

    let mut queries = Vec::with_capacity(query_count);
    let mut corpus = Vec::with_capacity(shape.corpus_pairs + shape.corpus_neutral);
    for i in 0..shape.query_pairs {
        let lemma = format!("title{i}");
        queries.push(paired(format!("q{i}"), &lemma));
        corpus.push(paired(String::new(), &lemma));
    }
    for i in shape.query_pairs..query_count {
        let lemma = format!("title{i}");
        queries.push(neutral(format!("q{i}"), &lemma));
        corpus.push(neutral(String::new(), &lemma));
    }
    let mut next = query_count;
    for _ in shape.query_pairs..shape.corpus_pairs {
        corpus.push(paired(String::new(), &format!("title{next}")));
        next += 1;
    }
    for _ in shape.query_neutral..shape.corpus_neutral {
        corpus.push(neutral(String::new(), &format!("title{next}")));
        next += 1;
    }

    // Fisher-Yates, so query lemmas are not clustered at the top of the file.
    for i in (1..corpus.len()).rev() {
        let j = rng.below(i as u64 + 1) as usize;
        corpus.swap(i, j);
    }
    let mut own = alloc::vec![0usize; query_count];
    for (pos, item) in corpus.iter_mut().enumerate() {
        item.id = format!("c{pos}");
        let lemma = item.masculine.trim_end_matches("#m");
        if let Some(q) = lemma.strip_prefix("title").and_then(|n| n.parse::<usize>().ok()) {
            if q < query_count {
                own[q] = pos;
            }
        }
    }

    let mut judgments = RelevanceJudgments::new();
    if !corpus.is_empty() {
        for (q, query) in queries.iter().enumerate() {
            judgments.insert(query.id.clone(), corpus[own[q]].id.clone());
            for _ in 0..shape.extra_relevant {
                let pick = rng.below(corpus.len() as u64) as usize;
                judgments.insert(query.id.clone(), corpus[pick].id.clone());
            }
        }
    }
    TestSet::new(shape.language.clone(), queries, corpus, judgments)
        .expect("generated fixtures satisfy the test-set invariants")
}
