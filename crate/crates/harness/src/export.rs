//! Result output: raw-error CSV, full JSON, and a markdown summary grid.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::runner::CellResult;
use crate::stats::{mean_std_label, rank_table};
use crate::Result;

/// One CSV line: a single run of one cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CsvRow {
    pub problem: String,
    pub dim: usize,
    pub nfe: u64,
    pub optimizer: String,
    pub run: usize,
    pub error: f64,
    /// Empty in deterministic exports; wall time is hardware-dependent.
    pub wall_ms: Option<f64>,
}

const CSV_HEADER: [&str; 7] = [
    "problem",
    "dim",
    "nfe",
    "optimizer",
    "run",
    "error",
    "wall_ms",
];

/// Writes the raw per-run errors. Error values render in shortest
/// round-trip notation, so re-parsing reproduces them bit for bit. With
/// `include_wall_ms` off the wall_ms column stays empty and the bytes are a
/// pure function of the experiment content.
pub fn export_csv<W: Write>(cells: &[CellResult], include_wall_ms: bool, w: W) -> Result<()> {
    // Headers are written by hand so the empty matrix still gets them; auto
    // headers would emit a second copy before the first row.
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER)?;
    for c in cells {
        for (run, &error) in c.errors.iter().enumerate() {
            wtr.serialize(CsvRow {
                problem: c.problem.clone(),
                dim: c.dim,
                nfe: c.nfe,
                optimizer: c.optimizer.clone(),
                run,
                error,
                wall_ms: include_wall_ms.then(|| c.wall_ms[run]),
            })?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a raw-error CSV back into cells, grouped in first-appearance
/// order. The CSV carries no failure reasons or evaluation counts, so those
/// fields come back empty-handed: no reason, zero count.
pub fn load_csv<R: Read>(r: R) -> Result<Vec<CellResult>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(false).from_reader(r);
    let mut cells: Vec<CellResult> = Vec::new();
    for row in rdr.deserialize() {
        let row: CsvRow = row?;
        let cell = cells.iter_mut().find(|c| {
            c.problem == row.problem
                && c.dim == row.dim
                && c.nfe == row.nfe
                && c.optimizer == row.optimizer
        });
        let cell = match cell {
            Some(c) => c,
            None => {
                cells.push(CellResult {
                    problem: row.problem.clone(),
                    dim: row.dim,
                    nfe: row.nfe,
                    optimizer: row.optimizer.clone(),
                    errors: Vec::new(),
                    failures: Vec::new(),
                    nfe_used: Vec::new(),
                    wall_ms: Vec::new(),
                });
                cells.last_mut().expect("just pushed")
            }
        };
        cell.errors.push(row.error);
        cell.failures.push(None);
        cell.nfe_used.push(0);
        cell.wall_ms.push(row.wall_ms.unwrap_or(f64::NAN));
    }
    Ok(cells)
}

/// Full cell dump, failure reasons and evaluation counts included.
pub fn export_json<W: Write>(cells: &[CellResult], w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, cells)?;
    Ok(())
}

/// A `mean ± std` grid with one row per problem and one column per
/// optimizer, followed by the mean-rank table when at least two optimizers
/// are present.
pub fn export_markdown<W: Write>(cells: &[CellResult], mut w: W) -> Result<()> {
    let mut optimizers: Vec<String> = Vec::new();
    let mut rows: Vec<(String, usize, u64)> = Vec::new();
    for c in cells {
        if !optimizers.contains(&c.optimizer) {
            optimizers.push(c.optimizer.clone());
        }
        if !rows.iter().any(|(p, _, _)| p == &c.problem) {
            rows.push((c.problem.clone(), c.dim, c.nfe));
        }
    }

    writeln!(w, "| problem | dim | nfe | {} |", optimizers.join(" | "))?;
    writeln!(
        w,
        "|---|---|---|{}|",
        optimizers
            .iter()
            .map(|_| "---")
            .collect::<Vec<_>>()
            .join("|")
    )?;
    for (problem, dim, nfe) in &rows {
        let labels: Vec<String> = optimizers
            .iter()
            .map(|o| {
                cells
                    .iter()
                    .find(|c| &c.problem == problem && &c.optimizer == o)
                    .map(|c| mean_std_label(&c.errors))
                    .unwrap_or_else(|| "-".into())
            })
            .collect();
        writeln!(w, "| {problem} | {dim} | {nfe} | {} |", labels.join(" | "))?;
    }

    if optimizers.len() >= 2 {
        let ranks = rank_table(cells)?;
        writeln!(w)?;
        writeln!(w, "| optimizer | mean rank |")?;
        writeln!(w, "|---|---|")?;
        for (o, r) in ranks.optimizers.iter().zip(&ranks.mean_rank) {
            writeln!(w, "| {o} | {r:.2} |")?;
        }
    }
    Ok(())
}
