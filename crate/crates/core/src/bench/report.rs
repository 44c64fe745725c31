use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{RunResult, MAX_FAILURE_SHARE};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "setting,case,model,mean_mse,sd_mse,replicates";
const MISCLASS_COLUMN: &str = "mean_misclass";

/// Aggregate of one `(setting, case, model)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub setting: String,
    pub case: String,
    pub model: String,
    /// Mean test error over successful replicates; NaN for a failed cell.
    pub mean_mse: f64,
    /// Sample standard deviation (0 for a single replicate); NaN for a failed cell.
    pub sd_mse: f64,
    /// Number of successful replicates.
    pub replicates: usize,
    /// Mean misclassification rate, binary tables only.
    pub mean_misclass: Option<f64>,
    /// Why the cell failed, if it did.
    pub failure: Option<String>,
}

impl ReportRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    fn same_cells(&self, other: &Self) -> bool {
        let eq = |a: f64, b: f64| a == b || (a.is_nan() && b.is_nan());
        self.setting == other.setting
            && self.case == other.case
            && self.model == other.model
            && eq(self.mean_mse, other.mean_mse)
            && eq(self.sd_mse, other.sd_mse)
            && self.replicates == other.replicates
            && match (self.mean_misclass, other.mean_misclass) {
                (Some(a), Some(b)) => eq(a, b),
                (None, None) => true,
                _ => false,
            }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
    /// Adds a misclassification column (binary tables).
    pub with_misclass: bool,
}

impl ReportTable {
    pub fn get(&self, setting: &str, case: &str, model: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.setting == setting && r.case == case && r.model == model)
    }

    /// Equality of every emitted cell, treating NaN as equal to NaN.
    pub fn same_cells(&self, other: &Self) -> bool {
        self.with_misclass == other.with_misclass
            && self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| a.same_cells(b))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        if self.with_misclass {
            out.push(',');
            out.push_str(MISCLASS_COLUMN);
        }
        out.push('\n');
        for r in &self.rows {
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.setting,
                r.case,
                r.model,
                fmt_num(r.mean_mse),
                fmt_num(r.sd_mse),
                r.replicates
            );
            if self.with_misclass {
                let _ = write!(out, ",{}", r.mean_misclass.map_or_else(|| "NaN".into(), fmt_num));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the output of [`ReportTable::to_csv`]. Failure reasons are not
    /// part of the CSV; failed cells come back with NaN statistics.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Schema {
            row: 0,
            message: "missing header".into(),
        })?;
        let with_misclass = if header == CSV_HEADER {
            false
        } else if header == format!("{CSV_HEADER},{MISCLASS_COLUMN}") {
            true
        } else {
            return Err(Error::Schema {
                row: 0,
                message: format!("unexpected header {header:?}"),
            });
        };
        let width = if with_misclass { 7 } else { 6 };
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            let row = i + 1;
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != width {
                return Err(Error::Schema {
                    row,
                    message: format!("{} fields, expected {width}", f.len()),
                });
            }
            let num = |col: usize| -> Result<f64> {
                f64::from_str(f[col]).map_err(|e| Error::Parse {
                    row,
                    column: col + 1,
                    message: e.to_string(),
                })
            };
            let mean_mse = num(3)?;
            rows.push(ReportRow {
                setting: f[0].into(),
                case: f[1].into(),
                model: f[2].into(),
                mean_mse,
                sd_mse: num(4)?,
                replicates: f[5].parse().map_err(|e: std::num::ParseIntError| Error::Parse {
                    row,
                    column: 6,
                    message: e.to_string(),
                })?,
                mean_misclass: if with_misclass { Some(num(6)?) } else { None },
                failure: mean_mse.is_nan().then(|| "failed".to_string()),
            });
        }
        Ok(Self { rows, with_misclass })
    }

    /// A pipe table in the same long layout as the CSV, padded so columns
    /// align, with failure reasons in a trailing note column.
    pub fn to_markdown(&self) -> String {
        let mut header = vec!["setting", "case", "model", "mean_mse", "sd_mse", "replicates"];
        if self.with_misclass {
            header.push(MISCLASS_COLUMN);
        }
        header.push("note");
        let body: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.setting.clone(),
                    r.case.clone(),
                    r.model.clone(),
                    fmt_num(r.mean_mse),
                    fmt_num(r.sd_mse),
                    r.replicates.to_string(),
                ];
                if self.with_misclass {
                    cells.push(r.mean_misclass.map_or_else(|| "NaN".into(), fmt_num));
                }
                cells.push(r.failure.clone().unwrap_or_default().replace('|', "/"));
                cells
            })
            .collect();
        let widths: Vec<usize> = (0..header.len())
            .map(|j| {
                body.iter()
                    .map(|r| r[j].len())
                    .chain([header[j].len(), 3])
                    .max()
                    .unwrap_or(3)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, &w)| format!("{c:<w$}")).collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut out = line(&header.iter().map(|s| s.to_string()).collect::<Vec<_>>());
        out.push_str(&line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>()));
        for r in &body {
            out.push_str(&line(r));
        }
        out
    }
}

/// Shortest representation that parses back to the same `f64`.
fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else {
        format!("{v:e}")
    }
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, sd)
}

/// Mean and sd per cell in result order. A cell fails when more than
/// [`MAX_FAILURE_SHARE`] of its replicates failed.
pub fn summarize(results: &[RunResult]) -> ReportTable {
    let with_misclass = results
        .iter()
        .any(|r| r.replicates.iter().any(|x| x.misclassification.is_some()));
    let rows = results
        .iter()
        .map(|r| {
            let errors = r.errors();
            let total = r.replicates.len();
            let failures = r.failures();
            let failed = total == 0 || errors.is_empty() || failures as f64 > MAX_FAILURE_SHARE * total as f64;
            let failure = failed.then(|| {
                let first = r
                    .replicates
                    .iter()
                    .find_map(|x| x.error.as_ref().err().cloned())
                    .unwrap_or_else(|| "no replicates".into());
                format!("{failures} of {total} replicates failed; first: {first}")
            });
            let (mean_mse, sd_mse) = if failed { (f64::NAN, f64::NAN) } else { mean_sd(&errors) };
            let misclass: Vec<f64> = r.replicates.iter().filter_map(|x| x.misclassification).collect();
            let mean_misclass = with_misclass.then(|| {
                if failed || misclass.is_empty() {
                    f64::NAN
                } else {
                    mean_sd(&misclass).0
                }
            });
            ReportRow {
                setting: r.cell.setting.clone(),
                case: r.cell.case.clone(),
                model: r.model.name().to_string(),
                mean_mse,
                sd_mse,
                replicates: errors.len(),
                mean_misclass,
                failure,
            }
        })
        .collect();
    ReportTable { rows, with_misclass }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn emit_report(table: &ReportTable, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => table.to_csv(),
        ReportFormat::Markdown => table.to_markdown(),
    };
    std::fs::write(path, text)?;
    Ok(())
}
