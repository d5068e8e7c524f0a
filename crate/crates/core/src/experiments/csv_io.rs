use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::SweepRecord;
use crate::error::{Error, Result};

/// Twelve significant digits, printed in the shortest form that reads back
/// to the rounded value (so 1 → "1", 0.25 → "0.25"). Very small or large
/// magnitudes use exponent notation.
pub fn render_value(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let a = rounded.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn header(records: &[SweepRecord]) -> Result<Vec<String>> {
    let Some(first) = records.first() else {
        return Ok(vec!["i_bar".into()]);
    };
    let names: Vec<&str> = first.parameters.iter().map(|(k, _)| k.as_str()).collect();
    let with_p = first.p_error.is_some();
    for (i, r) in records.iter().enumerate() {
        let same = r.parameters.len() == names.len()
            && r.parameters.iter().zip(&names).all(|((k, _), n)| k == n)
            && r.p_error.is_some() == with_p;
        if !same {
            return Err(Error::InvariantViolation(format!(
                "record {i} has different columns from record 0"
            )));
        }
    }
    let mut cols: Vec<String> = names.iter().map(|s| s.to_string()).collect();
    cols.push("i_bar".into());
    if with_p {
        cols.push("p_error".into());
    }
    Ok(cols)
}

/// Writes the records with a header row of parameter names, `i_bar` and,
/// when present, `p_error`. Row order is input order.
pub fn write_csv(records: &[SweepRecord], path: impl AsRef<Path>) -> Result<()> {
    let cols = header(records)?;
    let file = BufWriter::new(File::create(path)?);
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&cols)?;
    for r in records {
        let mut row: Vec<String> = r.parameters.iter().map(|&(_, v)| render_value(v)).collect();
        row.push(render_value(r.i_bar));
        if let Some(p) = r.p_error {
            row.push(render_value(p));
        }
        w.write_record(&row)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(e.into_error()))?
        .flush()?;
    Ok(())
}

/// Inverse of [`write_csv`].
pub fn read_csv(path: impl AsRef<Path>) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_path(path)?;
    let cols: Vec<String> = rd.headers()?.iter().map(String::from).collect();
    let i_col = cols
        .iter()
        .position(|c| c == "i_bar")
        .ok_or_else(|| Error::Parse("CSV has no i_bar column".into()))?;
    let p_col = cols.iter().position(|c| c == "p_error");
    let mut out = Vec::new();
    for row in rd.records() {
        let row = row?;
        let values = row
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("bad number {s:?}: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        out.push(SweepRecord {
            parameters: cols[..i_col]
                .iter()
                .cloned()
                .zip(values[..i_col].iter().copied())
                .collect(),
            i_bar: values[i_col],
            p_error: p_col.map(|j| values[j]),
        });
    }
    Ok(out)
}
