//! Header-free `label,f1,...,fd` rows.

use std::path::Path;

use dsgpa_core::problems::Dataset;

use crate::error::{Result, SimError};

/// Reads a labeled dataset. Every row must have the same number of features
/// and a label in `0..classes`.
pub fn read_dataset(path: &Path, classes: usize) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut dim = None;
    for (row, record) in reader.records().enumerate() {
        let line = row + 1;
        let record = record.map_err(|e| csv_error(path, e))?;
        if record.len() < 2 {
            return Err(SimError::format(
                path,
                line,
                "need a label and at least one feature",
            ));
        }
        let d = record.len() - 1;
        match dim {
            None => dim = Some(d),
            Some(expected) if expected != d => {
                return Err(SimError::format(
                    path,
                    line,
                    format!("expected {expected} features, found {d}"),
                ))
            }
            Some(_) => {}
        }
        let label: usize = record[0].parse().map_err(|_| {
            SimError::format(
                path,
                line,
                format!("label `{}` is not a class index", &record[0]),
            )
        })?;
        if label >= classes {
            return Err(SimError::format(
                path,
                line,
                format!("label {label} outside 0..{classes}"),
            ));
        }
        labels.push(label);
        for field in record.iter().skip(1) {
            let v: f64 = field
                .parse()
                .map_err(|_| SimError::format(path, line, format!("`{field}` is not a number")))?;
            features.push(v);
        }
    }
    let dim = dim.ok_or_else(|| SimError::format(path, 1, "dataset is empty"))?;
    Ok(Dataset::new(features, labels, dim, classes)?)
}

fn csv_error(path: &Path, e: csv::Error) -> SimError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => SimError::io(path, io),
        other => SimError::format(path, line, format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_rows() {
        let f = write("0,1.5,2\n2, -1 ,0.25\n");
        let data = read_dataset(f.path(), 3).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data.dim(), 2);
        assert_eq!(data.row(1), &[-1.0, 0.25]);
        assert_eq!(data.labels(), &[0, 2]);
    }

    #[test]
    fn rejects_bad_rows() {
        let ragged = write("0,1,2\n1,3\n");
        let err = read_dataset(ragged.path(), 2).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
        assert!(read_dataset(write("5,1\n").path(), 3).is_err());
        assert!(read_dataset(write("x,1\n").path(), 3).is_err());
        assert!(read_dataset(write("").path(), 3).is_err());
        assert!(matches!(
            read_dataset(Path::new("/nonexistent/data.csv"), 2),
            Err(SimError::Io { .. })
        ));
    }
}
