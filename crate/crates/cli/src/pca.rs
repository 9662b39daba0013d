//! PCA over a wide per-participant feature table.

use std::path::Path;

use serde::Serialize;
use vocalis_core::stats::{pca, PcaResult};

use crate::error::CliError;

/// A wide CSV: first column the row label, remaining columns numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct WideTable {
    pub label_column: String,
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

pub fn read_wide_csv(path: &Path) -> Result<WideTable, CliError> {
    let inner = || -> Result<WideTable, CliError> {
        let mut r = csv::Reader::from_path(path)?;
        let header: Vec<String> = r.headers()?.iter().map(|h| h.trim().to_string()).collect();
        if header.len() < 2 {
            return Err(CliError::input("need a label column and at least one numeric column"));
        }
        let mut labels = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            labels.push(rec.get(0).unwrap_or_default().trim().to_string());
            let values = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, v)| {
                    v.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| {
                        CliError::input(format!("row {}: column {} is not a finite number: {v:?}", i + 2, header[j + 1]))
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(values);
        }
        Ok(WideTable { label_column: header[0].clone(), columns: header[1..].to_vec(), labels, rows })
    };
    inner().map_err(|e| e.in_file(path))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaReport {
    pub columns: Vec<String>,
    pub labels: Vec<String>,
    pub excluded: Vec<String>,
    #[serde(flatten)]
    pub result: PcaResult,
}

/// Select `columns` (all when empty), drop rows labelled in `exclude`, run PCA.
pub fn pca_table(table: &WideTable, columns: &[String], exclude: &[String], standardize: bool) -> Result<PcaReport, CliError> {
    let chosen: Vec<usize> = if columns.is_empty() {
        (0..table.columns.len()).collect()
    } else {
        columns
            .iter()
            .map(|c| {
                table
                    .columns
                    .iter()
                    .position(|h| h.eq_ignore_ascii_case(c.trim()))
                    .ok_or_else(|| CliError::input(format!("no column named {c:?}")))
            })
            .collect::<Result<_, _>>()?
    };
    for e in exclude {
        if !table.labels.contains(e) {
            return Err(CliError::input(format!("cannot exclude {e:?}: no such row")));
        }
    }
    let mut labels = Vec::new();
    let mut matrix = Vec::new();
    for (label, row) in table.labels.iter().zip(&table.rows) {
        if !exclude.contains(label) {
            labels.push(label.clone());
            matrix.push(chosen.iter().map(|&j| row[j]).collect::<Vec<_>>());
        }
    }
    let result = pca(&matrix, standardize)?;
    Ok(PcaReport {
        columns: chosen.iter().map(|&j| table.columns[j].clone()).collect(),
        labels,
        excluded: exclude.to_vec(),
        result,
    })
}

/// Write `pca.json` and `scores.csv` into `out`.
pub fn cmd_pca(path: &Path, columns: &[String], exclude: &[String], standardize: bool, out: &Path) -> Result<PcaReport, CliError> {
    let table = read_wide_csv(path)?;
    let report = pca_table(&table, columns, exclude, standardize).map_err(|e| e.in_file(path))?;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("pca.json"), serde_json::to_vec_pretty(&report)?)?;
    let mut w = csv::Writer::from_path(out.join("scores.csv"))?;
    let mut header = vec![table.label_column.clone()];
    header.extend((1..=report.result.components.len()).map(|k| format!("pc{k}")));
    w.write_record(&header)?;
    for (label, scores) in report.labels.iter().zip(&report.result.scores) {
        let mut rec = vec![label.clone()];
        rec.extend(scores.iter().map(|s| s.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(report)
}
