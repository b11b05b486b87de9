//! Parallel evaluation matrix. Runs are independent; results come back in
//! test-set, provider, view order regardless of completion order.

use rayon::prelude::*;

use rankfair_core::{evaluate_run, EvalOptions, Embedder, MatrixEntry, TestSet, ViewKind};

use crate::render::{RunFailure, RunsFile};

pub fn evaluate_matrix_parallel(
    test_sets: &[TestSet],
    embedders: &[&dyn Embedder],
    views: &[ViewKind],
    options: EvalOptions,
) -> Vec<MatrixEntry> {
    let cells: Vec<(&TestSet, &dyn Embedder, ViewKind)> = test_sets
        .iter()
        .flat_map(|set| {
            embedders
                .iter()
                .flat_map(move |&e| views.iter().map(move |&v| (set, e, v)))
        })
        .collect();
    cells
        .into_par_iter()
        .map(|(set, embedder, view)| MatrixEntry {
            language: set.language().to_string(),
            model_name: embedder.model_name().to_string(),
            view,
            outcome: evaluate_run(set, view, embedder, options),
        })
        .collect()
}

/// Splits matrix entries into successful runs and recorded failures.
pub fn into_runs_file(entries: Vec<MatrixEntry>) -> RunsFile {
    let mut file = RunsFile::default();
    for entry in entries {
        match entry.outcome {
            Ok(run) => file.runs.push(run),
            Err(e) => file.failures.push(RunFailure {
                language: entry.language,
                model_name: entry.model_name,
                corpus_view: entry.view,
                error: e.to_string(),
            }),
        }
    }
    file
}
