//! Markdown, CSV and JSON output for report documents, and the `runs.json`
//! container.
//!
//! Markdown marks the best cell in bold, the worst underlined and differing
//! inspection rows in italics. CSV carries the undecorated string plus a
//! `marks` column listing `column:mark` pairs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use rankfair_core::report::{Cell, Mark, ReportDocument};
use rankfair_core::{EvalRun, TestSetSummary};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Md,
    Csv,
    Json,
}

fn decorate(cell: &Cell) -> String {
    let text = cell.display().replace('|', "\\|");
    match cell.mark() {
        Some(Mark::Best) => format!("**{text}**"),
        Some(Mark::Worst) => format!("<u>{text}</u>"),
        Some(Mark::Differs) => format!("*{text}*"),
        None => text,
    }
}

pub fn to_markdown(doc: &ReportDocument) -> String {
    let mut out = String::new();
    for (key, value) in &doc.metadata {
        let _ = writeln!(out, "<!-- {key}: {} -->", value.replace("--", "- -"));
    }
    let _ = writeln!(out, "### {}\n", doc.title);
    let _ = writeln!(out, "| {} |", doc.header.join(" | "));
    let align: Vec<&str> = (0..doc.header.len())
        .map(|i| if i == 0 { ":---" } else { "---:" })
        .collect();
    let _ = writeln!(out, "| {} |", align.join(" | "));
    for row in &doc.rows {
        let cells: Vec<String> = row.iter().map(decorate).collect();
        let _ = writeln!(out, "| {} |", cells.join(" | "));
    }
    if !doc.footnotes.is_empty() {
        out.push('\n');
        for note in &doc.footnotes {
            let _ = writeln!(out, "{note}");
        }
    }
    out
}

fn mark_name(mark: Mark) -> &'static str {
    match mark {
        Mark::Best => "best",
        Mark::Worst => "worst",
        Mark::Differs => "differs",
    }
}

pub fn to_csv(doc: &ReportDocument) -> Result<String, csv::Error> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = doc.header.clone();
    header.push("marks".into());
    writer.write_record(&header)?;
    for row in &doc.rows {
        let mut record: Vec<String> = row.iter().map(Cell::display).collect();
        let marks: Vec<String> = doc
            .header
            .iter()
            .zip(row)
            .filter_map(|(h, c)| c.mark().map(|m| format!("{h}:{}", mark_name(m))))
            .collect();
        record.push(marks.join(";"));
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv of utf-8 strings"))
}

pub fn to_json(doc: &ReportDocument) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("report serializes");
    s.push('\n');
    s
}

pub fn render(doc: &ReportDocument, format: Format) -> Result<String, Error> {
    Ok(match format {
        Format::Md => to_markdown(doc),
        Format::Csv => to_csv(doc)?,
        Format::Json => to_json(doc),
    })
}

/// Query and corpus counts per language: M/F pairs, neutral, total.
pub fn summary_table(summaries: &[TestSetSummary]) -> ReportDocument {
    let header = ["Language", "Queries M/F", "Queries N", "Queries T", "Corpus M/F", "Corpus N", "Corpus T"];
    let count = |n: usize| Cell::text(n.to_string());
    ReportDocument {
        title: "Test-set statistics".into(),
        header: header.iter().map(|h| h.to_string()).collect(),
        rows: summaries
            .iter()
            .map(|s| {
                vec![
                    Cell::text(s.language.to_uppercase()),
                    count(s.queries.paired),
                    count(s.queries.neutral),
                    count(s.queries.total),
                    count(s.corpus.paired),
                    count(s.corpus.neutral),
                    count(s.corpus.total),
                ]
            })
            .collect(),
        footnotes: vec![],
        metadata: BTreeMap::new(),
    }
}

/// A matrix cell that produced no run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFailure {
    pub language: String,
    pub model_name: String,
    pub corpus_view: rankfair_core::ViewKind,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunsFile {
    pub runs: Vec<EvalRun>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<RunFailure>,
    /// Provider specs, test-set digests and tool version of the evaluation.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl RunsFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, Error> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_reader(BufReader::new(file)).map_err(|source| Error::Json {
            path: path.into(),
            source,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), Error> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut writer = BufWriter::new(file);
        serde_json::to_writer_pretty(&mut writer, self)
            .map_err(|source| Error::Json {
                path: path.into(),
                source,
            })?;
        writer
            .write_all(b"\n")
            .and_then(|_| writer.flush())
            .map_err(|e| Error::io(path, e))
    }
}
