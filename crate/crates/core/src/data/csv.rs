use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;

use super::Dataset;
use crate::error::{Error, Result};

/// Loads a headered, comma-delimited CSV whose last `label_count` columns are labels.
///
/// Label cells are thresholded at 0.5. Error positions are 1-based, with row 1
/// being the first data row after the header.
pub fn load_csv(path: impl AsRef<Path>, label_count: usize) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_csv(file, label_count)
}

pub fn parse_csv<R: Read>(reader: R, label_count: usize) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let header: Vec<String> = match rdr.headers() {
        Ok(h) => h.iter().map(str::to_owned).collect(),
        Err(e) => return Err(csv_error(e)),
    };
    if header.is_empty() || (header.len() == 1 && header[0].is_empty()) {
        return Err(Error::InvalidInput("no data rows".into()));
    }
    let width = header.len();
    if label_count == 0 {
        return Err(Error::param("label_count", "must be at least 1"));
    }
    if label_count >= width {
        return Err(Error::param(
            "label_count",
            format!("{label_count} label columns leave no features among {width} columns"),
        ));
    }
    let d = width - label_count;

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(csv_error)?;
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != width {
            return Err(Error::Parse {
                row,
                col: record.len().min(width) + 1,
                message: format!("expected {width} columns, found {}", record.len()),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::Parse {
                        row,
                        col: c + 1,
                        message: format!("non-numeric cell {cell:?}"),
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no data rows".into()));
    }

    let n = rows.len();
    let features = DMatrix::from_fn(d, n, |i, j| rows[j][i]);
    let labels = DMatrix::from_fn(
        n,
        label_count,
        |i, j| {
            if rows[i][d + j] >= 0.5 {
                1.0
            } else {
                0.0
            }
        },
    );
    Dataset::new(features, labels, header[..d].to_vec(), header[d..].to_vec())
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(pos) => Error::Parse {
            row: pos.record().max(1) as usize,
            col: 0,
            message: e.to_string(),
        },
        None => Error::InvalidInput(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_rows_two_features_one_label() {
        let text = "a,b,y\n1,2,1\n3,4,0\n5,6,0.7\n";
        let ds = parse_csv(text.as_bytes(), 1).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.n_samples(), 3);
        assert_eq!(ds.n_labels(), 1);
        assert_eq!(ds.features()[(1, 2)], 6.0);
        assert_eq!(ds.labels().column(0).as_slice(), &[1.0, 0.0, 1.0]);
        assert_eq!(ds.feature_names(), &["a", "b"]);
    }

    #[test]
    fn empty_file_has_no_data_rows() {
        let err = parse_csv("".as_bytes(), 1).unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
        let err = parse_csv("a,b,y\n".as_bytes(), 1).unwrap_err();
        assert!(err.to_string().contains("no data rows"), "{err}");
    }

    #[test]
    fn non_numeric_cell_reports_position() {
        let text = "a,b,y\n1,2,1\nabc,4,0\n";
        match parse_csv(text.as_bytes(), 1).unwrap_err() {
            Error::Parse { row, col, .. } => assert_eq!((row, col), (2, 1)),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn column_count_mismatch() {
        let text = "a,b,y\n1,2,1\n3,4\n";
        match parse_csv(text.as_bytes(), 1).unwrap_err() {
            Error::Parse { row, .. } => assert_eq!(row, 2),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn label_count_must_leave_features() {
        let text = "a,b,y\n1,2,1\n3,4,0\n";
        assert!(matches!(
            parse_csv(text.as_bytes(), 3),
            Err(Error::InvalidParameter { .. })
        ));
    }
}
