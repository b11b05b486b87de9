//! Template-induced translation: carrier sentences, merge rules and
//! judgment carry-over.
//!
//! A source title is wrapped in a masculine and a feminine carrier sentence,
//! translated, and reduced back to the bare title. Records are then merged:
//! identical `(feminine, masculine)` results keep the first source record
//! only, and records whose two forms coincide become a single neutral item.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::model::{GenderTag, GenderedTitle, RelevanceJudgments, PLACEHOLDER};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("template {0:?} must contain {PLACEHOLDER} exactly once")]
    Placeholder(String),
    #[error("cannot wrap an empty title")]
    EmptyTitle,
    #[error("templates only exist for feminine and masculine")]
    NeutralGender,
}

/// Carrier sentences that induce a target gender, e.g. `"She is: {job_title}."`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawTemplatePair")]
pub struct TemplatePair {
    masculine_template: String,
    feminine_template: String,
}

#[derive(Deserialize)]
struct RawTemplatePair {
    masculine_template: String,
    feminine_template: String,
}

impl TryFrom<RawTemplatePair> for TemplatePair {
    type Error = TemplateError;

    fn try_from(raw: RawTemplatePair) -> Result<Self, Self::Error> {
        Self::new(raw.masculine_template, raw.feminine_template)
    }
}

impl Default for TemplatePair {
    fn default() -> Self {
        Self::new("He is: {job_title}.", "She is: {job_title}.").expect("valid default templates")
    }
}

impl TemplatePair {
    pub fn new(
        masculine_template: impl Into<String>,
        feminine_template: impl Into<String>,
    ) -> Result<Self, TemplateError> {
        let masculine_template = masculine_template.into();
        let feminine_template = feminine_template.into();
        for t in [&masculine_template, &feminine_template] {
            if t.matches(PLACEHOLDER).count() != 1 {
                return Err(TemplateError::Placeholder(t.clone()));
            }
        }
        Ok(Self {
            masculine_template,
            feminine_template,
        })
    }

    pub fn template(&self, gender: GenderTag) -> Result<&str, TemplateError> {
        match gender {
            GenderTag::Feminine => Ok(&self.feminine_template),
            GenderTag::Masculine => Ok(&self.masculine_template),
            GenderTag::Neutral => Err(TemplateError::NeutralGender),
        }
    }

    /// Substitutes `title` for the placeholder.
    pub fn wrap(&self, title: &str, gender: GenderTag) -> Result<String, TemplateError> {
        if title.trim().is_empty() {
            return Err(TemplateError::EmptyTitle);
        }
        Ok(self.template(gender)?.replacen(PLACEHOLDER, title, 1))
    }
}

/// A source title after translation and normalization of both forms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslatedRecord {
    pub source_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_text: Option<String>,
    pub feminine: String,
    pub masculine: String,
}

impl TranslatedRecord {
    pub fn new(
        source_id: impl Into<String>,
        feminine: impl Into<String>,
        masculine: impl Into<String>,
    ) -> Self {
        Self {
            source_id: source_id.into(),
            source_text: None,
            feminine: feminine.into(),
            masculine: masculine.into(),
        }
    }
}

/// Tallies for one merge; `input = paired + neutral + duplicates_removed`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeTally {
    pub input: usize,
    pub paired: usize,
    pub neutral: usize,
    pub duplicates_removed: usize,
}

impl MergeTally {
    /// Title count with each paired item counted once per gender.
    pub fn total(&self) -> usize {
        2 * self.paired + self.neutral
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Merged {
    pub titles: Vec<GenderedTitle>,
    pub tally: MergeTally,
    /// Every input source id mapped to the id of the kept representative.
    pub lineage: BTreeMap<String, String>,
}

/// Drops repeated translations (first in source order wins) and tags records
/// whose forms coincide as neutral.
pub fn merge_and_dedup(records: &[TranslatedRecord]) -> Merged {
    let mut seen: BTreeMap<(&str, &str), &str> = BTreeMap::new();
    let mut merged = Merged::default();
    merged.tally.input = records.len();
    for record in records {
        let key = (record.feminine.as_str(), record.masculine.as_str());
        if let Some(kept) = seen.get(&key) {
            merged.tally.duplicates_removed += 1;
            merged.lineage.insert(record.source_id.clone(), String::from(*kept));
            continue;
        }
        seen.insert(key, &record.source_id);
        merged.lineage.insert(record.source_id.clone(), record.source_id.clone());
        let mut title = GenderedTitle::new(
            record.source_id.clone(),
            record.feminine.clone(),
            record.masculine.clone(),
        );
        title.source_text = record.source_text.clone();
        if title.neutral {
            merged.tally.neutral += 1;
        } else {
            merged.tally.paired += 1;
        }
        merged.titles.push(title);
    }
    merged
}

/// Source-side relevance: source query id to relevant source corpus ids.
pub type SourceJudgments = BTreeMap<String, BTreeSet<String>>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemapTally {
    /// Source judgments whose query or corpus side did not survive the build.
    pub dropped: usize,
    /// Judgments redirected from a removed duplicate to its representative.
    pub redirected: usize,
}

/// Carries source judgments over to built ids by lineage. Judgments of a
/// dropped duplicate query are merged into its representative.
pub fn remap_judgments(
    source: &SourceJudgments,
    query_lineage: &BTreeMap<String, String>,
    corpus_lineage: &BTreeMap<String, String>,
) -> (RelevanceJudgments, RemapTally) {
    let mut out = RelevanceJudgments::new();
    let mut tally = RemapTally::default();
    for (query, relevant) in source {
        let Some(target_query) = query_lineage.get(query) else {
            tally.dropped += relevant.len();
            continue;
        };
        let query_moved = target_query != query;
        for corpus in relevant {
            match corpus_lineage.get(corpus) {
                Some(target) => {
                    if query_moved || target != corpus {
                        tally.redirected += 1;
                    }
                    out.insert(target_query.clone(), target.clone());
                }
                None => tally.dropped += 1,
            }
        }
    }
    (out, tally)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use proptest::prelude::*;

    #[test]
    fn wrap_examples() {
        let t = TemplatePair::default();
        assert_eq!(t.wrap("lawyer", GenderTag::Masculine).unwrap(), "He is: lawyer.");
        assert_eq!(t.wrap("data analyst", GenderTag::Feminine).unwrap(), "She is: data analyst.");
        assert_eq!(t.wrap(" ", GenderTag::Feminine), Err(TemplateError::EmptyTitle));
        assert_eq!(t.wrap("x", GenderTag::Neutral), Err(TemplateError::NeutralGender));
    }

    #[test]
    fn placeholder_must_appear_once() {
        assert!(matches!(TemplatePair::new("He is: job.", "She is: {job_title}."), Err(TemplateError::Placeholder(_))));
        assert!(TemplatePair::new("{job_title} {job_title}", "She is: {job_title}.").is_err());
    }

    #[test]
    fn repeated_translation_is_removed() {
        let merged = merge_and_dedup(&[
            TranslatedRecord::new("q1", "abogada", "abogado"),
            TranslatedRecord::new("q2", "abogada", "abogado"),
        ]);
        assert_eq!(merged.titles.len(), 1);
        assert_eq!(merged.titles[0].id, "q1");
        assert_eq!(merged.tally.duplicates_removed, 1);
        assert_eq!(merged.lineage["q2"], "q1");
    }

    #[test]
    fn equal_forms_become_neutral() {
        let merged = merge_and_dedup(&[TranslatedRecord::new("q3", "analista de dados", "analista de dados")]);
        assert_eq!(merged.tally, MergeTally { input: 1, paired: 0, neutral: 1, duplicates_removed: 0 });
        assert!(merged.titles[0].neutral);
    }

    #[test]
    fn empty_input() {
        let merged = merge_and_dedup(&[]);
        assert!(merged.titles.is_empty());
        assert_eq!(merged.tally, MergeTally::default());
    }

    #[test]
    fn judgments_follow_lineage() {
        let merged_q = merge_and_dedup(&[
            TranslatedRecord::new("q1", "abogada", "abogado"),
            TranslatedRecord::new("q2", "abogada", "abogado"),
        ]);
        let merged_c = merge_and_dedup(&[
            TranslatedRecord::new("c1", "jueza", "juez"),
            TranslatedRecord::new("c2", "jueza", "juez"),
            TranslatedRecord::new("c3", "fiscal", "fiscal"),
        ]);
        let mut source = SourceJudgments::new();
        source.insert("q1".into(), ["c2".to_string()].into_iter().collect());
        source.insert("q2".into(), ["c3".to_string(), "gone".to_string()].into_iter().collect());
        let (j, tally) = remap_judgments(&source, &merged_q.lineage, &merged_c.lineage);
        let relevant: Vec<&String> = j.relevant("q1").unwrap().iter().collect();
        assert_eq!(relevant, ["c1", "c3"]);
        assert_eq!(tally, RemapTally { dropped: 1, redirected: 2 });
        assert!(j.relevant("q2").is_none());
    }

    proptest! {
        #[test]
        fn conservation_and_idempotence(rows in proptest::collection::vec(("[a-c]{1,2}", "[a-c]{1,2}"), 0..40)) {
            let records: Vec<TranslatedRecord> = rows
                .iter()
                .enumerate()
                .map(|(i, (f, m))| TranslatedRecord::new(alloc::format!("s{i}"), f.clone(), m.clone()))
                .collect();
            let merged = merge_and_dedup(&records);
            let t = merged.tally;
            prop_assert_eq!(t.input, t.paired + t.neutral + t.duplicates_removed);
            prop_assert_eq!(merged.titles.len(), t.paired + t.neutral);

            let again: Vec<TranslatedRecord> = merged
                .titles
                .iter()
                .map(|title| TranslatedRecord::new(title.id.clone(), title.feminine.clone(), title.masculine.clone()))
                .collect();
            let twice = merge_and_dedup(&again);
            prop_assert_eq!(&twice.titles, &merged.titles);
            prop_assert_eq!(twice.tally.duplicates_removed, 0);
        }
    }

    #[test]
    fn tally_total_matches_pairs() {
        let t = MergeTally { input: 120, paired: 81, neutral: 23, duplicates_removed: 16 };
        assert_eq!(t.total(), 185);
    }
}
