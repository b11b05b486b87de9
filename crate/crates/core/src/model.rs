//! Gender-annotated test sets and corpus gender views.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

/// Substituted by templates; must never survive into a surface form.
pub const PLACEHOLDER: &str = "{job_title}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenderTag {
    Feminine,
    Masculine,
    Neutral,
}

/// One job title with its feminine and masculine surface forms.
///
/// `neutral` holds exactly when both forms are equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderedTitle {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_text: Option<String>,
    pub feminine: String,
    pub masculine: String,
    pub neutral: bool,
}

pub type QueryPair = GenderedTitle;
pub type CorpusItem = GenderedTitle;

impl GenderedTitle {
    /// Builds a title, setting `neutral` from the forms.
    pub fn new(id: impl Into<String>, feminine: impl Into<String>, masculine: impl Into<String>) -> Self {
        let feminine = feminine.into();
        let masculine = masculine.into();
        Self {
            id: id.into(),
            source_text: None,
            neutral: feminine == masculine,
            feminine,
            masculine,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source_text = Some(source.into());
        self
    }

    /// Surface form for `gender`; neutral items return their single form.
    pub fn form(&self, gender: GenderTag) -> &str {
        match gender {
            GenderTag::Feminine => &self.feminine,
            GenderTag::Masculine | GenderTag::Neutral => &self.masculine,
        }
    }

    fn validate(&self) -> Result<(), ModelError> {
        let id = || self.id.clone();
        if self.id.is_empty() {
            return Err(ModelError::EmptyId);
        }
        for form in [&self.feminine, &self.masculine] {
            if form.trim().is_empty() {
                return Err(ModelError::EmptyForm(id()));
            }
            if form.contains(PLACEHOLDER) {
                return Err(ModelError::TemplateResidue(id()));
            }
            if *form != form.to_lowercase() {
                return Err(ModelError::NotLowercase(id()));
            }
        }
        if self.neutral != (self.feminine == self.masculine) {
            return Err(ModelError::NeutralMismatch(id()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("empty id")]
    EmptyId,
    #[error("empty language code")]
    EmptyLanguage,
    #[error("duplicate query id {0:?}")]
    DuplicateQuery(String),
    #[error("duplicate corpus id {0:?}")]
    DuplicateCorpus(String),
    #[error("judgment references unknown query {0:?}")]
    DanglingQuery(String),
    #[error("judgment for query {query:?} references unknown corpus item {corpus:?}")]
    DanglingCorpus { query: String, corpus: String },
    #[error("{0:?}: neutral flag disagrees with its surface forms")]
    NeutralMismatch(String),
    #[error("{0:?}: empty surface form")]
    EmptyForm(String),
    #[error("{0:?}: surface form is not lowercase")]
    NotLowercase(String),
    #[error("{0:?}: surface form still contains the template placeholder")]
    TemplateResidue(String),
}

/// Binary relevance keyed by query id, at corpus-item identity level.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelevanceJudgments(BTreeMap<String, BTreeSet<String>>);

impl RelevanceJudgments {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, query_id: impl Into<String>, corpus_id: impl Into<String>) {
        self.0.entry(query_id.into()).or_default().insert(corpus_id.into());
    }

    pub fn extend<I, S>(&mut self, query_id: &str, corpus_ids: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let entry = self.0.entry(query_id.to_string()).or_default();
        entry.extend(corpus_ids.into_iter().map(Into::into));
    }

    /// Relevant corpus ids for `query_id`; empty when the query has none.
    pub fn relevant(&self, query_id: &str) -> Option<&BTreeSet<String>> {
        self.0.get(query_id).filter(|s| !s.is_empty())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BTreeSet<String>)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A validated test set for one language.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSet {
    language: String,
    queries: Vec<QueryPair>,
    corpus: Vec<CorpusItem>,
    judgments: RelevanceJudgments,
}

impl TestSet {
    pub fn new(
        language: impl Into<String>,
        queries: Vec<QueryPair>,
        corpus: Vec<CorpusItem>,
        judgments: RelevanceJudgments,
    ) -> Result<Self, ModelError> {
        let set = Self {
            language: language.into(),
            queries,
            corpus,
            judgments,
        };
        set.validate()?;
        Ok(set)
    }

    fn validate(&self) -> Result<(), ModelError> {
        if self.language.trim().is_empty() {
            return Err(ModelError::EmptyLanguage);
        }
        let mut query_ids = BTreeSet::new();
        for q in &self.queries {
            q.validate()?;
            if !query_ids.insert(q.id.as_str()) {
                return Err(ModelError::DuplicateQuery(q.id.clone()));
            }
        }
        let mut corpus_ids = BTreeSet::new();
        for c in &self.corpus {
            c.validate()?;
            if !corpus_ids.insert(c.id.as_str()) {
                return Err(ModelError::DuplicateCorpus(c.id.clone()));
            }
        }
        for (query, relevant) in self.judgments.iter() {
            if !query_ids.contains(query.as_str()) {
                return Err(ModelError::DanglingQuery(query.clone()));
            }
            if let Some(missing) = relevant.iter().find(|c| !corpus_ids.contains(c.as_str())) {
                return Err(ModelError::DanglingCorpus {
                    query: query.clone(),
                    corpus: missing.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn queries(&self) -> &[QueryPair] {
        &self.queries
    }

    pub fn corpus(&self) -> &[CorpusItem] {
        &self.corpus
    }

    pub fn judgments(&self) -> &RelevanceJudgments {
        &self.judgments
    }

    pub fn query(&self, id: &str) -> Option<&QueryPair> {
        self.queries.iter().find(|q| q.id == id)
    }
}

/// Which gender's surface forms make up the corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewKind {
    MasculineCorpus,
    FeminineCorpus,
}

impl ViewKind {
    pub const BOTH: [ViewKind; 2] = [ViewKind::MasculineCorpus, ViewKind::FeminineCorpus];

    pub fn gender(self) -> GenderTag {
        match self {
            ViewKind::MasculineCorpus => GenderTag::Masculine,
            ViewKind::FeminineCorpus => GenderTag::Feminine,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ViewKind::MasculineCorpus => "masculine_corpus",
            ViewKind::FeminineCorpus => "feminine_corpus",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewItem {
    pub id: String,
    pub text: String,
}

/// The corpus rendered in one gender, in corpus file order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenderView {
    pub view: ViewKind,
    pub items: Vec<ViewItem>,
}

impl GenderView {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.items.iter().map(|i| i.text.as_str())
    }
}

pub fn gender_view(test_set: &TestSet, view: ViewKind) -> GenderView {
    let gender = view.gender();
    GenderView {
        view,
        items: test_set
            .corpus
            .iter()
            .map(|c| ViewItem {
                id: c.id.clone(),
                text: c.form(gender).to_string(),
            })
            .collect(),
    }
}

/// Paired (M/F), neutral and total title counts; `total = 2 * paired + neutral`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SetCounts {
    pub paired: usize,
    pub neutral: usize,
    pub total: usize,
}

impl SetCounts {
    pub fn from_titles(titles: &[GenderedTitle]) -> Self {
        let neutral = titles.iter().filter(|t| t.neutral).count();
        let paired = titles.len() - neutral;
        Self {
            paired,
            neutral,
            total: 2 * paired + neutral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestSetSummary {
    pub language: String,
    pub queries: SetCounts,
    pub corpus: SetCounts,
}

pub fn summarize(test_set: &TestSet) -> TestSetSummary {
    TestSetSummary {
        language: test_set.language.clone(),
        queries: SetCounts::from_titles(&test_set.queries),
        corpus: SetCounts::from_titles(&test_set.corpus),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn es_mini() -> TestSet {
        let corpus = vec![
            GenderedTitle::new("c1", "abogada", "abogado"),
            GenderedTitle::new("c2", "analista de dados", "analista de dados"),
        ];
        let queries = vec![GenderedTitle::new("q1", "abogada", "abogado")];
        let mut judgments = RelevanceJudgments::new();
        judgments.insert("q1", "c1");
        TestSet::new("es", queries, corpus, judgments).unwrap()
    }

    #[test]
    fn gender_views() {
        let set = es_mini();
        let masc = gender_view(&set, ViewKind::MasculineCorpus);
        assert_eq!(masc.texts().collect::<Vec<_>>(), ["abogado", "analista de dados"]);
        let fem = gender_view(&set, ViewKind::FeminineCorpus);
        assert_eq!(fem.texts().collect::<Vec<_>>(), ["abogada", "analista de dados"]);
        assert_eq!(fem.items[0].id, "c1");
    }

    #[test]
    fn neutral_flag_must_match_forms() {
        let mut q = GenderedTitle::new("q1", "abogada", "abogada");
        q.neutral = false;
        assert_eq!(
            TestSet::new("es", vec![q], vec![], RelevanceJudgments::new()),
            Err(ModelError::NeutralMismatch("q1".into()))
        );
    }

    #[test]
    fn validation_errors() {
        let ok = || GenderedTitle::new("a", "x", "y");
        let dup = TestSet::new("es", vec![ok(), ok()], vec![], RelevanceJudgments::new());
        assert_eq!(dup, Err(ModelError::DuplicateQuery("a".into())));

        let dup = TestSet::new("es", vec![], vec![ok(), ok()], RelevanceJudgments::new());
        assert_eq!(dup, Err(ModelError::DuplicateCorpus("a".into())));

        let mut j = RelevanceJudgments::new();
        j.insert("nope", "a");
        let dangling = TestSet::new("es", vec![ok()], vec![ok()], j);
        assert_eq!(dangling, Err(ModelError::DanglingQuery("nope".into())));

        let mut j = RelevanceJudgments::new();
        j.insert("a", "zz");
        let dangling = TestSet::new("es", vec![ok()], vec![ok()], j);
        assert!(matches!(dangling, Err(ModelError::DanglingCorpus { .. })));

        let upper = TestSet::new("de", vec![GenderedTitle::new("a", "Friseurin", "friseur")], vec![], RelevanceJudgments::new());
        assert_eq!(upper, Err(ModelError::NotLowercase("a".into())));

        let residue = TestSet::new("en", vec![GenderedTitle::new("a", "she is: {job_title}", "x")], vec![], RelevanceJudgments::new());
        assert_eq!(residue, Err(ModelError::TemplateResidue("a".into())));

        let empty = TestSet::new("es", vec![GenderedTitle::new("a", " ", "x")], vec![], RelevanceJudgments::new());
        assert_eq!(empty, Err(ModelError::EmptyForm("a".into())));

        assert_eq!(
            TestSet::new("", vec![], vec![], RelevanceJudgments::new()),
            Err(ModelError::EmptyLanguage)
        );
    }

    #[test]
    fn summary_counts() {
        let s = summarize(&es_mini());
        assert_eq!(s.queries, SetCounts { paired: 1, neutral: 0, total: 2 });
        assert_eq!(s.corpus, SetCounts { paired: 1, neutral: 1, total: 3 });

        let empty = TestSet::new("es", vec![], vec![], RelevanceJudgments::new()).unwrap();
        let s = summarize(&empty);
        assert_eq!(s.queries, SetCounts::default());
        assert_eq!(s.corpus, SetCounts::default());
    }

    fn titles(prefix: &'static str) -> impl Strategy<Value = Vec<GenderedTitle>> {
        proptest::collection::vec(("[a-z]{1,6}", "[a-z]{1,6}", any::<bool>()), 0..40).prop_map(move |rows| {
            rows.into_iter()
                .enumerate()
                .map(|(i, (f, m, neutral))| {
                    let id = alloc::format!("{prefix}{i}");
                    if neutral {
                        GenderedTitle::new(id, f.clone(), f)
                    } else {
                        GenderedTitle::new(id, f, m)
                    }
                })
                .collect()
        })
    }

    proptest! {
        #[test]
        fn totals_follow_pair_arithmetic(queries in titles("q"), corpus in titles("c")) {
            let set = TestSet::new("xx", queries, corpus, RelevanceJudgments::new()).unwrap();
            let s = summarize(&set);
            for counts in [s.queries, s.corpus] {
                prop_assert_eq!(counts.total, 2 * counts.paired + counts.neutral);
            }
            prop_assert_eq!(s.queries.paired + s.queries.neutral, set.queries().len());
        }

        #[test]
        fn views_differ_exactly_on_paired_items(corpus in titles("c")) {
            let set = TestSet::new("xx", vec![], corpus, RelevanceJudgments::new()).unwrap();
            let m = gender_view(&set, ViewKind::MasculineCorpus);
            let f = gender_view(&set, ViewKind::FeminineCorpus);
            prop_assert_eq!(m.len(), set.corpus().len());
            for ((mi, fi), item) in m.items.iter().zip(&f.items).zip(set.corpus()) {
                prop_assert_eq!(&mi.id, &item.id);
                prop_assert_eq!(mi.text != fi.text, !item.neutral);
            }
        }
    }
}
