//! CSV ingestion and emission. The header row carries variable names.

use std::io::{Read, Write};

use super::{ContinuousTable, Dataset, DatasetError};

fn csv_err(e: csv::Error) -> DatasetError {
    let line = e.position().map(|p| p.line());
    DatasetError::Parse { line, message: e.to_string() }
}

fn read_records<R: Read, T>(
    reader: R,
    mut parse: impl FnMut(&str) -> Result<T, String>,
) -> Result<(Vec<String>, Vec<Vec<T>>), DatasetError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let names: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
    if names.is_empty() || names.iter().any(String::is_empty) {
        return Err(DatasetError::Parse { line: Some(1), message: "header must name every column".into() });
    }
    let mut columns: Vec<Vec<T>> = names.iter().map(|_| Vec::new()).collect();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map(|p| p.line());
        if rec.len() != names.len() {
            return Err(DatasetError::Parse {
                line,
                message: format!("expected {} fields, found {}", names.len(), rec.len()),
            });
        }
        for (j, field) in rec.iter().enumerate() {
            let v = parse(field)
                .map_err(|m| DatasetError::Parse { line, message: format!("column `{}`: {m}", names[j]) })?;
            columns[j].push(v);
        }
    }
    Ok((names, columns))
}

/// Reads integer category codes.
pub fn read_categorical_csv<R: Read>(reader: R) -> Result<Dataset, DatasetError> {
    let (names, columns) =
        read_records(reader, |f| f.parse::<u32>().map_err(|e| format!("`{f}` is not a category code ({e})")))?;
    Dataset::new(names, columns)
}

/// Reads real values.
pub fn read_continuous_csv<R: Read>(reader: R) -> Result<ContinuousTable, DatasetError> {
    let (names, columns) =
        read_records(reader, |f| f.parse::<f64>().map_err(|e| format!("`{f}` is not a number ({e})")))?;
    ContinuousTable::new(names, columns)
}

pub fn write_categorical_csv<W: Write>(ds: &Dataset, writer: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ds.names()).map_err(csv_err)?;
    let mut rec = Vec::with_capacity(ds.n_vars());
    for r in 0..ds.n_rows() {
        rec.clear();
        rec.extend((0..ds.n_vars()).map(|j| ds.column(j)[r].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| DatasetError::Io(e.to_string()))
}

/// Writes reals with shortest round-trip formatting.
pub fn write_continuous_csv<W: Write>(t: &ContinuousTable, writer: W) -> Result<(), DatasetError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(&t.names).map_err(csv_err)?;
    let mut rec = Vec::with_capacity(t.n_vars());
    for r in 0..t.n_rows() {
        rec.clear();
        rec.extend(t.columns.iter().map(|c| c[r].to_string()));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| DatasetError::Io(e.to_string()))
}
