//! Sibling-pair CSV files.
//!
//! One row per family with the header `family_id,t1,t2,y1,y2` in any order,
//! plus any number of `cov_*` covariate columns. Other columns are ignored.
//! A row with an empty, `NA` or `.` cell in a used column is dropped
//! (complete-case analysis) and counted.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use spillover_core::estimator::{PairDataset, PairRow};
use spillover_core::Error as CoreError;

use crate::error::{LabError, Result};

const REQUIRED: [&str; 5] = ["family_id", "t1", "t2", "y1", "y2"];
const COVARIATE_PREFIX: &str = "cov_";

#[derive(Debug, Clone, PartialEq)]
pub struct LoadedPairs {
    pub dataset: PairDataset,
    /// Rows removed for missing values.
    pub dropped: usize,
}

fn is_missing(cell: &str) -> bool {
    matches!(cell.trim(), "" | "NA" | ".")
}

pub fn load_pair_csv(path: impl AsRef<Path>) -> Result<LoadedPairs> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| LabError::io(path, e))?;
    let loaded = read_pair_csv(file)?;
    if loaded.dropped > 0 {
        log::warn!(
            "{}: dropped {} row(s) with missing values",
            path.display(),
            loaded.dropped
        );
    }
    Ok(loaded)
}

pub fn read_pair_csv(reader: impl Read) -> Result<LoadedPairs> {
    let mut csv = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let headers = csv.headers()?.clone();
    let position = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut required = [0usize; 5];
    for (slot, name) in required.iter_mut().zip(REQUIRED) {
        *slot = position(name).ok_or_else(|| LabError::Schema {
            column: name.to_string(),
        })?;
    }
    let covariates: Vec<(usize, String)> = headers
        .iter()
        .enumerate()
        .filter(|(_, h)| h.trim().starts_with(COVARIATE_PREFIX))
        .map(|(i, h)| (i, h.trim().to_string()))
        .collect();

    let mut rows = Vec::new();
    let mut dropped = 0;
    for (index, record) in csv.records().enumerate() {
        let record = record?;
        let row = index + 1;
        let cell = |i: usize| record.get(i).unwrap_or("");
        let used = required.iter().chain(covariates.iter().map(|(i, _)| i));
        if used.clone().any(|&i| is_missing(cell(i))) {
            dropped += 1;
            continue;
        }
        let number = |i: usize| -> Result<f64> {
            let raw = cell(i).trim();
            raw.parse::<f64>().map_err(|_| LabError::Parse {
                row,
                column: headers[i].trim().to_string(),
                value: raw.to_string(),
            })
        };
        let values = covariates
            .iter()
            .map(|(i, _)| number(*i))
            .collect::<Result<Vec<_>>>()?;
        rows.push(
            PairRow::new(
                cell(required[0]).trim(),
                number(required[1])?,
                number(required[2])?,
                number(required[3])?,
                number(required[4])?,
            )
            .with_covariates(values),
        );
    }
    if rows.is_empty() {
        return Err(CoreError::EmptyData.into());
    }
    let names = covariates.into_iter().map(|(_, name)| name).collect();
    Ok(LoadedPairs {
        dataset: PairDataset::new(names, rows)?,
        dropped,
    })
}

/// Writes `data` in the layout [`read_pair_csv`] expects. Numbers use the
/// shortest representation that parses back to the same `f64`.
pub fn write_pair_csv(data: &PairDataset, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    let mut header: Vec<&str> = REQUIRED.to_vec();
    header.extend(data.covariate_names().iter().map(String::as_str));
    csv.write_record(&header)?;
    for row in data.rows() {
        let mut record = vec![
            row.family_id.clone(),
            row.t1.to_string(),
            row.t2.to_string(),
            row.y1.to_string(),
            row.y2.to_string(),
        ];
        record.extend(row.covariates.iter().map(f64::to_string));
        csv.write_record(&record)?;
    }
    csv.flush().map_err(|e| LabError::io("<csv output>", e))?;
    Ok(())
}

pub fn save_pair_csv(data: &PairDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| LabError::io(path, e))?;
    write_pair_csv(data, std::io::BufWriter::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str) -> Result<LoadedPairs> {
        read_pair_csv(text.as_bytes())
    }

    #[test]
    fn three_rows() {
        let loaded = read("family_id,t1,t2,y1,y2\na,0,1,2.5,3\nb,1,0,1,1\nc,1,1,0,-2\n").unwrap();
        assert_eq!(loaded.dataset.len(), 3);
        assert_eq!(loaded.dropped, 0);
        assert_eq!(loaded.dataset.rows()[2].y2, -2.0);
    }

    #[test]
    fn missing_required_column() {
        let err = read("family_id,t1,t2,y1\na,0,1,2\n").unwrap_err();
        assert!(matches!(err, LabError::Schema { ref column } if column == "y2"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn blank_cells_drop_rows() {
        let loaded = read("family_id,t1,t2,y1,y2\na,0,1,,3\nb,1,0,1,1\nc,1,1,0,NA\nd,0,0,1,2\n").unwrap();
        assert_eq!(loaded.dataset.len(), 2);
        assert_eq!(loaded.dropped, 2);
    }

    #[test]
    fn parse_error_location() {
        let err = read("family_id,t1,t2,y1,y2\na,0,1,2,3\nb,1,zero,1,1\n").unwrap_err();
        match err {
            LabError::Parse { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "t2", "zero"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_rows_missing_is_empty_data() {
        let err = read("family_id,t1,t2,y1,y2\na,,1,2,3\n").unwrap_err();
        assert_eq!(err.kind(), "empty_data");
    }

    #[test]
    fn covariates_round_trip() {
        let text = "y2,family_id,t1,t2,y1,cov_age,notes,cov_edu\n3,a,0,1,2.5,31,x,2\n1,b,1,0,1,27.25,y,\n-1,c,1,1,0.1,40,z,4\n";
        let loaded = read(text).unwrap();
        assert_eq!(loaded.dropped, 1);
        assert_eq!(loaded.dataset.covariate_names(), ["cov_age", "cov_edu"]);
        let mut out = Vec::new();
        write_pair_csv(&loaded.dataset, &mut out).unwrap();
        let again = read(std::str::from_utf8(&out).unwrap()).unwrap();
        assert_eq!(again.dataset, loaded.dataset);
    }

    #[test]
    fn floats_survive_exactly() {
        let rows = vec![PairRow::new("1", 0.1 + 0.2, 1.0 / 3.0, -1e-300, 123456.789e10)];
        let data = PairDataset::new(Vec::new(), rows).unwrap();
        let mut out = Vec::new();
        write_pair_csv(&data, &mut out).unwrap();
        assert_eq!(read(std::str::from_utf8(&out).unwrap()).unwrap().dataset, data);
    }
}
