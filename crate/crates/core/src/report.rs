//! Result grids shaped like the published bias and MAP tables.
//!
//! Rows are models and columns languages, both sorted. In every metric
//! column the highest value is marked [`Mark::Best`] and the lowest
//! [`Mark::Worst`]; tied values share the mark, and a column whose values are
//! all equal is marked best throughout.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::eval::{EvalRun, Inspection};
use crate::model::ViewKind;
use crate::sum::mean;

pub const MISSING: &str = "—";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReportError {
    #[error("no runs for {0}")]
    NoRuns(&'static str),
    #[error("more than one run for model {model:?}, language {language:?}")]
    DuplicateCell { model: String, language: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mark {
    Best,
    Worst,
    Differs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Cell {
    Text {
        text: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mark: Option<Mark>,
    },
    Number {
        value: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mark: Option<Mark>,
    },
    Missing,
}

impl Cell {
    pub fn text(text: impl Into<String>) -> Self {
        Cell::Text {
            text: text.into(),
            mark: None,
        }
    }

    pub fn number(value: f64) -> Self {
        Cell::Number { value, mark: None }
    }

    pub fn mark(&self) -> Option<Mark> {
        match self {
            Cell::Text { mark, .. } | Cell::Number { mark, .. } => *mark,
            Cell::Missing => None,
        }
    }

    /// The displayed string without any mark decoration.
    pub fn display(&self) -> String {
        match self {
            Cell::Text { text, .. } => text.clone(),
            Cell::Number { value, .. } => format_value(*value),
            Cell::Missing => MISSING.to_string(),
        }
    }

    fn set_mark(&mut self, new: Mark) {
        match self {
            Cell::Text { mark, .. } | Cell::Number { mark, .. } => *mark = Some(new),
            Cell::Missing => {}
        }
    }
}

/// Fixed four-decimal rendering used by every output format.
pub fn format_value(value: f64) -> String {
    format!("{value:.4}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub footnotes: Vec<String>,
    /// Provenance (providers, digests, timestamp, version). Never affects cells.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

fn view_label(view: ViewKind) -> &'static str {
    match view {
        ViewKind::MasculineCorpus => "masculine corpora",
        ViewKind::FeminineCorpus => "feminine corpora",
    }
}

type Grid<'a> = (Vec<&'a str>, Vec<&'a str>, BTreeMap<(&'a str, &'a str), &'a EvalRun>);

fn grid(runs: &[EvalRun], view: ViewKind) -> Result<Grid<'_>, ReportError> {
    let mut cells = BTreeMap::new();
    let mut models = BTreeSet::new();
    let mut languages = BTreeSet::new();
    for run in runs.iter().filter(|r| r.corpus_view == view) {
        let key = (run.model_name.as_str(), run.language.as_str());
        if cells.insert(key, run).is_some() {
            return Err(ReportError::DuplicateCell {
                model: run.model_name.clone(),
                language: run.language.clone(),
            });
        }
        models.insert(key.0);
        languages.insert(key.1);
    }
    if cells.is_empty() {
        return Err(ReportError::NoRuns(view.as_str()));
    }
    Ok((models.into_iter().collect(), languages.into_iter().collect(), cells))
}

/// Marks best/worst in each of `columns` (indices into every row).
fn mark_columns(rows: &mut [Vec<Cell>], columns: impl IntoIterator<Item = usize>) {
    for col in columns {
        let values: Vec<f64> = rows
            .iter()
            .filter_map(|r| match r[col] {
                Cell::Number { value, .. } => Some(value),
                _ => None,
            })
            .collect();
        let Some(max) = values.iter().copied().reduce(f64::max) else {
            continue;
        };
        let min = values.iter().copied().reduce(f64::min).unwrap_or(max);
        for row in rows.iter_mut() {
            if let Cell::Number { value, .. } = row[col] {
                if value == max {
                    row[col].set_mark(Mark::Best);
                } else if value == min {
                    row[col].set_mark(Mark::Worst);
                }
            }
        }
    }
}

fn has_missing(rows: &[Vec<Cell>]) -> bool {
    rows.iter().flatten().any(|c| matches!(c, Cell::Missing))
}

/// Mean RBO per model and language for one corpus view.
pub fn render_rbo_table(runs: &[EvalRun], view: ViewKind) -> Result<ReportDocument, ReportError> {
    let (models, languages, cells) = grid(runs, view)?;
    let mut header = alloc::vec![String::from("Model")];
    header.extend(languages.iter().map(|l| l.to_uppercase()));
    let mut rows: Vec<Vec<Cell>> = models
        .iter()
        .map(|&model| {
            let mut row = alloc::vec![Cell::text(model)];
            row.extend(languages.iter().map(|&lang| {
                cells
                    .get(&(model, lang))
                    .map_or(Cell::Missing, |run| Cell::number(run.mean_rbo.value))
            }));
            row
        })
        .collect();
    mark_columns(&mut rows, 1..header.len());
    let mut footnotes = Vec::new();
    if has_missing(&rows) {
        footnotes.push(format!("{MISSING} no run for this model and language."));
    }
    Ok(ReportDocument {
        title: format!("RBO, feminine vs masculine queries over {}", view_label(view)),
        header,
        rows,
        footnotes,
        metadata: BTreeMap::new(),
    })
}

/// MAP per model, language and query gender for one corpus view, plus the
/// per-model average over every present cell.
pub fn render_map_table(runs: &[EvalRun], view: ViewKind) -> Result<ReportDocument, ReportError> {
    let (models, languages, cells) = grid(runs, view)?;
    let mut header = alloc::vec![String::from("Model")];
    for lang in &languages {
        let upper = lang.to_uppercase();
        header.push(format!("{upper} F"));
        header.push(format!("{upper} M"));
    }
    header.push(String::from("Average"));
    let metric_columns = 1..header.len() - 1;

    let mut rows: Vec<Vec<Cell>> = models
        .iter()
        .map(|&model| {
            let mut row = alloc::vec![Cell::text(model)];
            for &lang in &languages {
                match cells.get(&(model, lang)) {
                    Some(run) => {
                        row.push(Cell::number(run.map_feminine.value));
                        row.push(Cell::number(run.map_masculine.value));
                    }
                    None => {
                        row.push(Cell::Missing);
                        row.push(Cell::Missing);
                    }
                }
            }
            let present = row[1..].iter().filter_map(|c| match c {
                Cell::Number { value, .. } => Some(*value),
                _ => None,
            });
            row.push(mean(present).map_or(Cell::Missing, Cell::number));
            row
        })
        .collect();
    mark_columns(&mut rows, metric_columns);
    let mut footnotes = Vec::new();
    if has_missing(&rows) {
        footnotes.push(format!(
            "{MISSING} no run for this model and language; excluded from the average."
        ));
    }
    Ok(ReportDocument {
        title: format!("MAP by query gender over {}", view_label(view)),
        header,
        rows,
        footnotes,
        metadata: BTreeMap::new(),
    })
}

/// Rank, feminine-query result, masculine-query result; rows where the two
/// results differ carry [`Mark::Differs`].
pub fn render_inspection(inspection: &Inspection) -> ReportDocument {
    let rows = inspection
        .rows
        .iter()
        .map(|row| {
            let mark = row.differs().then_some(Mark::Differs);
            alloc::vec![
                Cell::text(row.rank.to_string()),
                Cell::Text { text: row.feminine.clone(), mark },
                Cell::Text { text: row.masculine.clone(), mark },
            ]
        })
        .collect();
    ReportDocument {
        title: format!(
            "Top {} results for query {:?} over {}",
            inspection.rows.len(),
            inspection.query_id,
            view_label(inspection.corpus_view)
        ),
        header: alloc::vec![
            String::from("Rank"),
            format!("{} (f)", inspection.feminine_query),
            format!("{} (m)", inspection.masculine_query),
        ],
        rows,
        footnotes: alloc::vec![format!("Full-depth RBO: {}", format_value(inspection.rbo.value))],
        metadata: BTreeMap::new(),
    }
}
