//! Loaders for the Tecator and Aemet datasets, and repeated train/test splits.
//!
//! Both loaders read strict CSV: UTF-8, comma separated, `.` decimal point and
//! an exact header. Tecator files have columns `ch1..ch100,fat`; Aemet files
//! (one for temperature, one for raw precipitation) have columns `d1..d365`.
//! Blank or non-numeric cells are errors carrying the data row (1-based,
//! header excluded) and column (1-based).

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::fcurve::{FunctionalDataset, Grid, ScalarResponses};
use crate::rng;
use crate::scalar::Real;

pub const TECATOR_ROWS: usize = 215;
pub const TECATOR_CHANNELS: usize = 100;
pub const AEMET_STATIONS: usize = 73;
pub const AEMET_DAYS: usize = 365;

#[derive(Clone, Debug, PartialEq)]
pub struct TecatorData<T> {
    /// Absorbance spectra on a uniform grid over `[0, 1]`.
    pub absorbance: FunctionalDataset<T>,
    /// Fat content in percent.
    pub fat: ScalarResponses<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AemetData<T> {
    pub temperature: FunctionalDataset<T>,
    /// `log(1 + precipitation)`.
    pub log_precip: FunctionalDataset<T>,
}

fn tecator_header() -> Vec<String> {
    let mut h: Vec<String> = (1..=TECATOR_CHANNELS).map(|j| format!("ch{j}")).collect();
    h.push("fat".into());
    h
}

fn aemet_header() -> Vec<String> {
    (1..=AEMET_DAYS).map(|j| format!("d{j}")).collect()
}

/// Parses a numeric CSV with an exact header into row vectors.
fn read_table<T: Real>(path: &Path, header: &[String]) -> Result<Vec<Vec<T>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(File::open(path).map_err(|e| Error::Data(format!("cannot open {}: {e}", path.display())))?);
    let found = reader.headers()?.clone();
    if found.len() != header.len() {
        return Err(Error::Schema {
            row: 0,
            message: format!("header has {} columns, expected {}", found.len(), header.len()),
        });
    }
    if let Some((j, (got, want))) = found.iter().zip(header).enumerate().find(|(_, (g, w))| g != w) {
        return Err(Error::Schema {
            row: 0,
            message: format!("header column {} is {got:?}, expected {want:?}", j + 1),
        });
    }
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        if record.len() != header.len() {
            return Err(Error::Schema {
                row,
                message: format!("{} columns, expected {}", record.len(), header.len()),
            });
        }
        let values = record
            .iter()
            .enumerate()
            .map(|(j, cell)| parse_cell(cell, row, j + 1))
            .collect::<Result<Vec<T>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no data rows", path.display())));
    }
    Ok(rows)
}

fn parse_cell<T: Real>(cell: &str, row: usize, column: usize) -> Result<T> {
    let parse_err = |message: String| Error::Parse { row, column, message };
    if cell.is_empty() {
        return Err(parse_err("empty cell".into()));
    }
    let v: f64 = cell
        .parse()
        .map_err(|_| parse_err(format!("{cell:?} is not a number")))?;
    if !v.is_finite() {
        return Err(parse_err(format!("{cell:?} is not finite")));
    }
    Ok(T::lit(v))
}

fn check_rows(path: &Path, found: usize, expected: usize) -> Result<()> {
    if found != expected {
        return Err(Error::Schema {
            row: found,
            message: format!("{} has {found} data rows, expected {expected}", path.display()),
        });
    }
    Ok(())
}

fn matrix<T: Real>(rows: &[Vec<T>], cols: std::ops::Range<usize>) -> Array2<T> {
    Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| rows[i][cols.start + j])
}

/// Reads a Tecator-schema file with any number of rows.
pub fn read_tecator<T: Real>(path: &Path) -> Result<TecatorData<T>> {
    let rows = read_table::<T>(path, &tecator_header())?;
    let grid = Grid::uniform(TECATOR_CHANNELS)?;
    let absorbance = FunctionalDataset::new(grid, matrix(&rows, 0..TECATOR_CHANNELS))?;
    let fat = ScalarResponses::continuous(rows.iter().map(|r| r[TECATOR_CHANNELS]).collect())?;
    Ok(TecatorData { absorbance, fat })
}

/// Reads the full Tecator table, requiring exactly 215 samples.
pub fn load_tecator<T: Real>(path: &Path) -> Result<TecatorData<T>> {
    let data = read_tecator(path)?;
    check_rows(path, data.absorbance.n(), TECATOR_ROWS)?;
    Ok(data)
}

pub fn save_tecator<T: Real>(data: &TecatorData<T>, path: &Path) -> Result<()> {
    if data.absorbance.grid_len() != TECATOR_CHANNELS || data.absorbance.n() != data.fat.len() {
        return Err(Error::Dimension(format!(
            "Tecator data needs {TECATOR_CHANNELS} channels and one fat value per sample"
        )));
    }
    let rows = (0..data.absorbance.n()).map(|i| {
        let mut r: Vec<T> = data.absorbance.curve(i).to_vec();
        r.push(data.fat.values()[i]);
        r
    });
    write_table(path, &tecator_header(), rows)
}

fn read_aemet_table<T: Real>(path: &Path) -> Result<Array2<T>> {
    let rows = read_table::<T>(path, &aemet_header())?;
    Ok(matrix(&rows, 0..AEMET_DAYS))
}

/// Reads paired temperature and raw precipitation files with any (matching)
/// number of rows and applies `log(1 + x)` to precipitation.
pub fn read_aemet<T: Real>(temp_path: &Path, precip_path: &Path) -> Result<AemetData<T>> {
    let temp = read_aemet_table::<T>(temp_path)?;
    let precip = read_aemet_table::<T>(precip_path)?;
    if temp.nrows() != precip.nrows() {
        return Err(Error::Schema {
            row: temp.nrows().min(precip.nrows()),
            message: format!(
                "temperature has {} rows but precipitation has {}",
                temp.nrows(),
                precip.nrows()
            ),
        });
    }
    if let Some(((i, j), v)) = precip.indexed_iter().find(|(_, &v)| v < T::zero()) {
        return Err(Error::Data(format!(
            "negative precipitation {v} at row {}, column {}",
            i + 1,
            j + 1
        )));
    }
    let grid = Grid::uniform(AEMET_DAYS)?;
    Ok(AemetData {
        temperature: FunctionalDataset::new(grid.clone(), temp)?,
        log_precip: FunctionalDataset::new(grid, precip.mapv(|v| v.ln_1p()))?,
    })
}

/// Reads the full Aemet tables, requiring exactly 73 stations.
pub fn load_aemet<T: Real>(temp_path: &Path, precip_path: &Path) -> Result<AemetData<T>> {
    let data = read_aemet(temp_path, precip_path)?;
    check_rows(temp_path, data.temperature.n(), AEMET_STATIONS)?;
    Ok(data)
}

/// Writes one Aemet-schema table (`d1..d365`).
pub fn save_aemet_table<T: Real>(curves: &Array2<T>, path: &Path) -> Result<()> {
    if curves.ncols() != AEMET_DAYS {
        return Err(Error::Dimension(format!("Aemet tables need {AEMET_DAYS} columns")));
    }
    write_table(path, &aemet_header(), curves.rows().into_iter().map(|r| r.to_vec()))
}

fn write_table<T: Real>(path: &Path, header: &[String], rows: impl Iterator<Item = Vec<T>>) -> Result<()> {
    let mut out = std::io::BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    for r in rows {
        let cells: Vec<String> = r.iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Repeated random train/test partitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitProtocol {
    pub n_train: usize,
    pub n_test: usize,
    pub repeats: usize,
    pub seed: u64,
}

impl SplitProtocol {
    /// 200 training and 15 test spectra, ten repeats.
    pub fn tecator(seed: u64) -> Self {
        Self {
            n_train: 200,
            n_test: 15,
            repeats: 10,
            seed,
        }
    }

    /// 65 training and 8 test stations, ten repeats.
    pub fn aemet(seed: u64) -> Self {
        Self {
            n_train: 65,
            n_test: 8,
            repeats: 10,
            seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// One seeded permutation of `0..n` per repeat; the first `n_train` indices
/// train and the next `n_test` test.
pub fn make_splits(n: usize, protocol: &SplitProtocol) -> Result<Vec<Split>> {
    if protocol.n_train == 0 || protocol.n_test == 0 || protocol.repeats == 0 {
        return Err(Error::Size("split sizes and repeat count must be at least 1".into()));
    }
    if protocol.n_train + protocol.n_test > n {
        return Err(Error::Size(format!(
            "{} training + {} test samples exceed the {n} available",
            protocol.n_train, protocol.n_test
        )));
    }
    Ok((0..protocol.repeats)
        .map(|r| {
            let mut rng = rng::stream(protocol.seed, "split", r as u64);
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            Split {
                train: perm[..protocol.n_train].to_vec(),
                test: perm[protocol.n_train..protocol.n_train + protocol.n_test].to_vec(),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn tecator_protocol_splits_are_disjoint() {
        let splits = make_splits(215, &SplitProtocol::tecator(1)).unwrap();
        assert_eq!(splits.len(), 10);
        for s in &splits {
            assert_eq!(s.train.len(), 200);
            assert_eq!(s.test.len(), 15);
            let train: HashSet<_> = s.train.iter().collect();
            assert!(s.test.iter().all(|i| !train.contains(i)));
        }
    }

    #[test]
    fn aemet_protocol_gives_ten_splits() {
        let splits = make_splits(73, &SplitProtocol::aemet(1)).unwrap();
        assert_eq!(splits.len(), 10);
        assert!(splits.iter().all(|s| s.train.len() == 65 && s.test.len() == 8));
    }

    #[test]
    fn splits_are_seed_deterministic() {
        let p = SplitProtocol::aemet(5);
        assert_eq!(make_splits(73, &p).unwrap(), make_splits(73, &p).unwrap());
        let q = SplitProtocol::aemet(6);
        assert_ne!(make_splits(73, &p).unwrap(), make_splits(73, &q).unwrap());
    }

    #[test]
    fn oversized_protocol_is_rejected() {
        let p = SplitProtocol {
            n_train: 70,
            n_test: 8,
            repeats: 1,
            seed: 0,
        };
        assert!(matches!(make_splits(73, &p), Err(Error::Size(_))));
    }
}
