//! The test-set container: UTF-8 JSONL with one header line followed by
//! query, corpus and judgment records.
//!
//! ```text
//! {"kind":"header","language":"es","version":1}
//! {"kind":"query","id":"q1","feminine":"abogada","masculine":"abogado","neutral":false}
//! {"kind":"corpus","id":"c1","feminine":"jueza","masculine":"juez","neutral":false}
//! {"kind":"judgment","query_id":"q1","relevant":["c1"]}
//! ```
//!
//! [`write_test_set`] emits the canonical form: header, queries, corpus, then
//! one judgment per query in query order with ids in corpus order.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use rankfair_core::{GenderedTitle, ModelError, RelevanceJudgments, TestSet};

use crate::error::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Header { language: String, version: u32 },
    Query(GenderedTitle),
    Corpus(GenderedTitle),
    Judgment { query_id: String, relevant: Vec<String> },
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: expected the header record first")]
    MissingHeader { line: usize },
    #[error("line {line}: second header record")]
    DuplicateHeader { line: usize },
    #[error("line {line}: unsupported format version {version}")]
    UnsupportedVersion { line: usize, version: u32 },
    #[error("empty test-set file")]
    Empty,
    #[error("invalid test set: {0}")]
    Invalid(#[from] ModelError),
    #[error("reading line {line}: {source}")]
    Io {
        line: usize,
        #[source]
        source: std::io::Error,
    },
}

pub fn load_test_set(path: impl AsRef<Path>) -> Result<TestSet, Error> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(read_test_set(BufReader::new(file))?)
}

pub fn read_test_set<R: Read>(reader: R) -> Result<TestSet, LoadError> {
    let mut language = None;
    let mut queries = Vec::new();
    let mut corpus = Vec::new();
    let mut judgments = RelevanceJudgments::new();

    for (index, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = index + 1;
        let line = line.map_err(|source| LoadError::Io { line: line_no, source })?;
        if line.trim().is_empty() {
            continue;
        }
        let record: Record = serde_json::from_str(&line).map_err(|e| LoadError::Malformed {
            line: line_no,
            message: e.to_string(),
        })?;
        match (record, &language) {
            (Record::Header { language: lang, version }, None) => {
                if version != FORMAT_VERSION {
                    return Err(LoadError::UnsupportedVersion { line: line_no, version });
                }
                language = Some(lang);
            }
            (Record::Header { .. }, Some(_)) => {
                return Err(LoadError::DuplicateHeader { line: line_no })
            }
            (_, None) => return Err(LoadError::MissingHeader { line: line_no }),
            (Record::Query(q), Some(_)) => queries.push(q),
            (Record::Corpus(c), Some(_)) => corpus.push(c),
            (Record::Judgment { query_id, relevant }, Some(_)) => {
                judgments.extend(&query_id, relevant);
            }
        }
    }
    let language = language.ok_or(LoadError::Empty)?;
    Ok(TestSet::new(language, queries, corpus, judgments)?)
}

pub fn write_test_set<W: Write>(mut writer: W, set: &TestSet) -> std::io::Result<()> {
    let mut emit = |record: &Record| -> std::io::Result<()> {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")
    };
    emit(&Record::Header {
        language: set.language().to_string(),
        version: FORMAT_VERSION,
    })?;
    for q in set.queries() {
        emit(&Record::Query(q.clone()))?;
    }
    for c in set.corpus() {
        emit(&Record::Corpus(c.clone()))?;
    }
    let corpus_order: HashMap<&str, usize> = set
        .corpus()
        .iter()
        .enumerate()
        .map(|(i, c)| (c.id.as_str(), i))
        .collect();
    for q in set.queries() {
        if let Some(relevant) = set.judgments().relevant(&q.id) {
            let mut ids: Vec<&String> = relevant.iter().collect();
            ids.sort_by_key(|id| corpus_order[id.as_str()]);
            emit(&Record::Judgment {
                query_id: q.id.clone(),
                relevant: ids.into_iter().cloned().collect(),
            })?;
        }
    }
    Ok(())
}

pub fn save_test_set(path: impl AsRef<Path>, set: &TestSet) -> Result<(), Error> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_test_set(&mut writer, set)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(path, e))
}

/// SHA-256 of the canonical serialization, hex encoded.
pub fn digest(set: &TestSet) -> String {
    use sha2::{Digest, Sha256};
    let mut buf = Vec::new();
    write_test_set(&mut buf, set).expect("writing to memory");
    hex::encode(Sha256::digest(&buf))
}
