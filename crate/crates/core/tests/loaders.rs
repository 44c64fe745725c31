//! Dataset loaders against small CSV fixtures.

use std::path::{Path, PathBuf};

use funbench_core::datasets::{
    load_aemet, load_tecator, read_aemet, read_tecator, save_aemet_table, save_tecator, AEMET_DAYS, TECATOR_CHANNELS,
    TECATOR_ROWS,
};
use funbench_core::Error;
use ndarray::Array2;
use tempfile::TempDir;

fn tecator_header() -> String {
    let mut cols: Vec<String> = (1..=TECATOR_CHANNELS).map(|j| format!("ch{j}")).collect();
    cols.push("fat".into());
    cols.join(",")
}

fn tecator_row(i: usize) -> Vec<String> {
    let mut row: Vec<String> = (0..TECATOR_CHANNELS)
        .map(|j| format!("{}", 2.0 + 0.01 * (i + j) as f64))
        .collect();
    row.push(format!("{}", 10.0 + i as f64));
    row
}

fn write(dir: &TempDir, name: &str, header: &str, rows: &[Vec<String>]) -> PathBuf {
    let mut text = format!("{header}\n");
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn well_formed_tecator_fixture_loads() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<_> = (0..4).map(tecator_row).collect();
    let path = write(&dir, "t.csv", &tecator_header(), &rows);
    let d = read_tecator::<f64>(&path).unwrap();
    assert_eq!(d.absorbance.n(), 4);
    assert_eq!(d.absorbance.grid_len(), 100);
    assert_eq!(d.absorbance.curve(2)[3], 2.05);
    assert_eq!(d.fat.values().to_vec(), vec![10.0, 11.0, 12.0, 13.0]);
    // the full-table loader insists on 215 samples
    assert!(matches!(load_tecator::<f64>(&path), Err(Error::Schema { .. })));
}

#[test]
fn short_row_is_a_schema_error_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows: Vec<_> = (0..3).map(tecator_row).collect();
    rows[1].pop();
    let path = write(&dir, "t.csv", &tecator_header(), &rows);
    match read_tecator::<f64>(&path) {
        Err(e @ Error::Schema { row: 2, .. }) => assert!(e.is_data_error()),
        other => panic!("expected a schema error at row 2, got {other:?}"),
    }
}

#[test]
fn non_numeric_and_blank_cells_are_located() {
    let dir = tempfile::tempdir().unwrap();
    let mut rows: Vec<_> = (0..3).map(tecator_row).collect();
    rows[2][4] = "abc".into();
    let path = write(&dir, "t.csv", &tecator_header(), &rows);
    assert!(matches!(
        read_tecator::<f64>(&path),
        Err(Error::Parse { row: 3, column: 5, .. })
    ));

    rows[2][4] = "2.0".into();
    rows[0][100] = String::new();
    let path = write(&dir, "t2.csv", &tecator_header(), &rows);
    assert!(matches!(
        read_tecator::<f64>(&path),
        Err(Error::Parse {
            row: 1,
            column: 101,
            ..
        })
    ));

    rows[0][100] = "NaN".into();
    let path = write(&dir, "t3.csv", &tecator_header(), &rows);
    assert!(matches!(
        read_tecator::<f64>(&path),
        Err(Error::Parse {
            row: 1,
            column: 101,
            ..
        })
    ));
}

#[test]
fn wrong_header_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let header = tecator_header().replace("ch7,", "c7,");
    let path = write(&dir, "t.csv", &header, &[tecator_row(0)]);
    assert!(matches!(read_tecator::<f64>(&path), Err(Error::Schema { row: 0, .. })));
}

#[test]
fn missing_file_is_a_data_error() {
    let err = read_tecator::<f64>(Path::new("/nonexistent/tecator.csv")).unwrap_err();
    assert!(err.is_data_error());
}

#[test]
fn tecator_round_trips_through_csv() {
    let dir = tempfile::tempdir().unwrap();
    let rows: Vec<_> = (0..5).map(tecator_row).collect();
    let src = write(&dir, "t.csv", &tecator_header(), &rows);
    let d = read_tecator::<f64>(&src).unwrap();
    let out = dir.path().join("copy.csv");
    save_tecator(&d, &out).unwrap();
    assert_eq!(read_tecator::<f64>(&out).unwrap(), d);
}

fn aemet_tables(dir: &TempDir, n_temp: usize, n_precip: usize, precip_value: f64) -> (PathBuf, PathBuf) {
    let temp = Array2::from_shape_fn((n_temp, AEMET_DAYS), |(i, j)| 10.0 + i as f64 + (j as f64 / 58.0).sin());
    let precip = Array2::from_elem((n_precip, AEMET_DAYS), precip_value);
    let (tp, pp) = (dir.path().join("temp.csv"), dir.path().join("precip.csv"));
    save_aemet_table(&temp, &tp).unwrap();
    save_aemet_table(&precip, &pp).unwrap();
    (tp, pp)
}

#[test]
fn aemet_precipitation_is_log_transformed() {
    let dir = tempfile::tempdir().unwrap();
    let (tp, pp) = aemet_tables(&dir, 3, 3, std::f64::consts::E - 1.0);
    let d = read_aemet::<f64>(&tp, &pp).unwrap();
    assert_eq!(d.temperature.n(), 3);
    assert_eq!(d.log_precip.grid_len(), 365);
    assert!(d.log_precip.curves().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    assert!(matches!(load_aemet::<f64>(&tp, &pp), Err(Error::Schema { .. })));
}

#[test]
fn aemet_rejects_negative_precipitation_and_mismatched_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (tp, pp) = aemet_tables(&dir, 3, 3, -0.5);
    assert!(matches!(read_aemet::<f64>(&tp, &pp), Err(Error::Data(_))));
    let (tp, pp) = aemet_tables(&dir, 3, 2, 0.0);
    assert!(matches!(read_aemet::<f64>(&tp, &pp), Err(Error::Schema { .. })));
}

#[test]
fn bundled_tecator_table_has_the_published_shape() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/tecator.csv");
    let d = load_tecator::<f64>(&path).unwrap();
    assert_eq!(d.absorbance.n(), TECATOR_ROWS);
    assert_eq!(d.fat.len(), TECATOR_ROWS);
    // absorbances lie in roughly [2, 6] and fat in [0, 100] percent
    assert!(d.absorbance.curves().iter().all(|&a| (1.0..7.0).contains(&a)));
    assert!(d.fat.values().iter().all(|&f| (0.0..100.0).contains(&f)));
}
