//! Numeric CSV input.

use std::io::Read;

use crate::error::{Error, Result};
use crate::procgen::PanelSeries;

fn parse_cell(s: &str) -> Option<f64> {
    s.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

/// Reads all records, treating the first one as a header when any of its
/// cells is not a finite number. Returns the data records with their
/// 1-based row numbers in the file.
fn numeric_records<R: Read>(input: R) -> Result<Vec<(usize, Vec<f64>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let row = i + 1;
        let rec = rec.map_err(|e| Error::Parse { row, column: 0, message: e.to_string() })?;
        if rec.iter().all(|c| c.is_empty()) {
            continue;
        }
        if row == 1 && rec.iter().any(|c| parse_cell(c).is_none()) {
            continue;
        }
        let values = rec
            .iter()
            .enumerate()
            .map(|(j, c)| {
                parse_cell(c).ok_or_else(|| Error::Parse {
                    row,
                    column: j + 1,
                    message: format!("'{c}' is not a finite number"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        out.push((row, values));
    }
    Ok(out)
}

/// Reads an `n x p` panel: one row per time point, one column per
/// coordinate, optional header row.
pub fn read_panel_csv<R: Read>(input: R) -> Result<PanelSeries> {
    let records = numeric_records(input)?;
    let Some((_, first)) = records.first() else {
        return Err(Error::Parse { row: 1, column: 1, message: "no numeric rows".into() });
    };
    let p = first.len();
    for (row, values) in &records {
        if values.len() != p {
            return Err(Error::Parse {
                row: *row,
                column: values.len().min(p) + 1,
                message: format!("expected {p} columns, found {}", values.len()),
            });
        }
    }
    let n = records.len();
    PanelSeries::from_row_major(n, p, records.into_iter().flat_map(|(_, v)| v).collect())
}

/// Reads a vector laid out as one row or one column (optional header).
pub fn read_vector_csv<R: Read>(input: R) -> Result<Vec<f64>> {
    let records = numeric_records(input)?;
    match records.as_slice() {
        [] => Err(Error::Parse { row: 1, column: 1, message: "no numeric rows".into() }),
        [(_, only)] => Ok(only.clone()),
        many => many
            .iter()
            .map(|(row, v)| match v.as_slice() {
                [x] => Ok(*x),
                _ => Err(Error::Parse {
                    row: *row,
                    column: 2,
                    message: "expected a single row or a single column".into(),
                }),
            })
            .collect(),
    }
}
