//! Polar-motion ingestion and result serialization.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sampling::ComplexSeries;

/// Frozen IERS pole-coordinate snapshot shipped with the crate (epoch in Julian years, arcsec).
pub const POLAR_MOTION_SNAPSHOT: &str = include_str!("../data/polar_motion_c04_0p1yr.txt");

/// Spacing tolerance, in years, for a series to count as regularly sampled.
pub const DEFAULT_SPACING_TOLERANCE: f64 = 1e-6;

const MJD_J2000: f64 = 51544.5;
const DAYS_PER_JULIAN_YEAR: f64 = 365.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Arcsec,
    Mas,
}

impl AngleUnit {
    fn to_mas(self) -> f64 {
        match self {
            AngleUnit::Arcsec => 1000.0,
            AngleUnit::Mas => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Column {
    Epoch,
    Mjd,
    X,
    Y,
    Skip,
}

/// Position of the time, x and y fields in each row, e.g. `epoch,x,y` or `_,mjd,x,y`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMap {
    columns: Vec<Column>,
}

impl ColumnMap {
    pub fn parse(spec: &str) -> Result<Self> {
        let columns = spec
            .split(',')
            .map(|c| match c.trim() {
                "epoch" => Ok(Column::Epoch),
                "mjd" => Ok(Column::Mjd),
                "x" => Ok(Column::X),
                "y" => Ok(Column::Y),
                "_" | "skip" => Ok(Column::Skip),
                other => Err(Error::input(format!(
                    "unknown column `{other}` (expected epoch, mjd, x, y or _)"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let count = |k: Column| columns.iter().filter(|&&c| c == k).count();
        let times = count(Column::Epoch) + count(Column::Mjd);
        if times != 1 || count(Column::X) != 1 || count(Column::Y) != 1 {
            return Err(Error::input(
                "column map needs exactly one of epoch/mjd and exactly one x and one y",
            ));
        }
        Ok(ColumnMap { columns })
    }
}

impl Default for ColumnMap {
    fn default() -> Self {
        ColumnMap {
            columns: vec![Column::Epoch, Column::X, Column::Y],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EopFormat {
    pub columns: ColumnMap,
    pub unit: AngleUnit,
    /// Largest allowed deviation of any gap from the first one, in years.
    pub tolerance: f64,
}

impl EopFormat {
    pub fn new(columns: ColumnMap, unit: AngleUnit) -> Self {
        EopFormat {
            columns,
            unit,
            tolerance: DEFAULT_SPACING_TOLERANCE,
        }
    }
}

/// One pole position; epoch in decimal Julian years, coordinates in milliarcseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarMotionRecord {
    pub epoch: f64,
    pub x: f64,
    pub y: f64,
}

/// Parses delimited pole-coordinate rows (whitespace or commas; `#` starts a comment line).
pub fn parse_eop_records(raw: &str, fmt: &EopFormat) -> Result<Vec<PolarMotionRecord>> {
    let scale = fmt.unit.to_mas();
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for (idx, line) in raw.lines().enumerate() {
        let line_no = idx + 1;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .collect();
        if fields.len() < fmt.columns.columns.len() {
            return Err(Error::Parse {
                line: line_no,
                msg: format!(
                    "expected {} fields, found {}",
                    fmt.columns.columns.len(),
                    fields.len()
                ),
            });
        }
        let mut rec = PolarMotionRecord {
            epoch: f64::NAN,
            x: f64::NAN,
            y: f64::NAN,
        };
        for (col, field) in fmt.columns.columns.iter().zip(&fields) {
            if *col == Column::Skip {
                continue;
            }
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                line: line_no,
                msg: format!("cannot parse `{field}` as a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("non-finite value `{field}`"),
                });
            }
            match col {
                Column::Epoch => rec.epoch = v,
                Column::Mjd => rec.epoch = 2000.0 + (v - MJD_J2000) / DAYS_PER_JULIAN_YEAR,
                Column::X => rec.x = v * scale,
                Column::Y => rec.y = v * scale,
                Column::Skip => {}
            }
        }
        records.push(rec);
        lines.push(line_no);
    }
    check_spacing(
        &records.iter().map(|r| r.epoch).collect::<Vec<_>>(),
        &lines,
        fmt.tolerance,
    )?;
    Ok(records)
}

/// Requires strictly increasing times whose gaps all match the first gap within `tolerance`.
fn check_spacing(times: &[f64], lines: &[usize], tolerance: f64) -> Result<()> {
    if times.len() < 2 {
        return Err(Error::input("need at least two data rows"));
    }
    let expected = times[1] - times[0];
    for (i, w) in times.windows(2).enumerate() {
        let gap = w[1] - w[0];
        if !(gap > 0.0) {
            return Err(Error::Parse {
                line: lines[i + 1],
                msg: format!("time {} does not follow {}", w[1], w[0]),
            });
        }
        if (gap - expected).abs() > tolerance {
            return Err(Error::IrregularSpacing {
                line: lines[i + 1],
                gap,
                expected,
                tolerance,
            });
        }
    }
    Ok(())
}

fn uniform_series(times: &[f64], values: Vec<Complex64>) -> Result<ComplexSeries> {
    let n = times.len();
    let delta = (times[n - 1] - times[0]) / (n - 1) as f64;
    ComplexSeries::new(values, delta, times[0])
}

/// Reads pole coordinates into `x + iy` (mas) with `delta` in years and `t0` the first epoch.
pub fn ingest_eop(raw: &str, fmt: &EopFormat) -> Result<ComplexSeries> {
    let records = parse_eop_records(raw, fmt)?;
    let times: Vec<f64> = records.iter().map(|r| r.epoch).collect();
    uniform_series(&times, records.iter().map(|r| Complex64::new(r.x, r.y)).collect())
}

/// The bundled snapshot as a series in milliarcseconds.
pub fn bundled_polar_motion() -> Result<ComplexSeries> {
    ingest_eop(
        POLAR_MOTION_SNAPSHOT,
        &EopFormat::new(ColumnMap::default(), AngleUnit::Arcsec),
    )
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serializer formatter writing every float with 17 significant digits.
struct Digits17;

impl serde_json::ser::Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(fmt_f64(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// JSON text with 17-significant-digit floats and a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serializer emits UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// CSV text with a fixed header and 17-significant-digit fields.
pub fn to_csv<I, R>(header: &[&str], rows: I) -> Result<String>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(csv_error)?;
    for row in rows {
        let row = row.as_ref();
        if row.len() != header.len() {
            return Err(Error::Internal(format!(
                "CSV row has {} fields for a {}-column header",
                row.len(),
                header.len()
            )));
        }
        w.write_record(row.iter().map(|v| fmt_f64(*v))).map_err(csv_error)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("CSV of numbers is UTF-8"))
}

fn csv_error(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            line: p.line() as usize,
            msg: e.to_string(),
        },
        None => Error::input(e.to_string()),
    }
}

/// Parses a numeric CSV whose header must equal `header`.
pub fn read_csv(text: &str, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found: Vec<String> = r.headers().map_err(csv_error)?.iter().map(String::from).collect();
    if found != header {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header `{}`, found `{}`", header.join(","), found.join(",")),
        });
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let row = rec
            .iter()
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("cannot parse `{f}` as a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

pub const SERIES_HEADER: [&str; 3] = ["t", "x", "y"];

/// `t,x,y` rows of a series.
pub fn series_to_csv(series: &ComplexSeries) -> Result<String> {
    to_csv(
        &SERIES_HEADER,
        series
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| [series.time(i), z.re, z.im]),
    )
}

/// Reads a `t,x,y` CSV; `t` must be regularly spaced to `tolerance` (time units).
pub fn series_from_csv(text: &str, tolerance: f64) -> Result<ComplexSeries> {
    let rows = read_csv(text, &SERIES_HEADER)?;
    let times: Vec<f64> = rows.iter().map(|r| r[0]).collect();
    let lines: Vec<usize> = (2..rows.len() + 2).collect();
    check_spacing(&times, &lines, tolerance)?;
    uniform_series(&times, rows.iter().map(|r| Complex64::new(r[1], r[2])).collect())
}

/// Writes `contents` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// Serializes `value` as JSON to `path` atomically.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, to_json(value)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{EllipticalParams, GeometricParams};
    use crate::whittle::{BoundaryFlags, FitResult};
    use proptest::prelude::*;

    fn arcsec() -> EopFormat {
        EopFormat::new(ColumnMap::default(), AngleUnit::Arcsec)
    }

    #[test]
    fn converts_arcsec_to_mas() {
        let r = parse_eop_records("# header\n1900.05 0.123 0.456\n1900.15 0 0\n", &arcsec()).unwrap();
        assert_eq!(r[0].epoch, 1900.05);
        assert!((r[0].x - 123.0).abs() < 1e-12 && (r[0].y - 456.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_irregular_gap_with_line() {
        let err = parse_eop_records("1900.0 0 0\n1900.1 0 0\n1900.3 0 0\n", &arcsec()).unwrap_err();
        match err {
            Error::IrregularSpacing { line, gap, .. } => {
                assert_eq!(line, 3);
                assert!((gap - 0.2).abs() < 1e-9);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn rejects_bad_rows() {
        let e = parse_eop_records("1900.0 0 0\n1900.1 zero 0\n", &arcsec()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = parse_eop_records("1900.0 0 0\n1900.1 0\n", &arcsec()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        let e = parse_eop_records("1900.1 0 0\n1900.0 0 0\n", &arcsec()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(ColumnMap::parse("epoch,x").is_err());
        assert!(ColumnMap::parse("epoch,mjd,x,y").is_err());
        assert!(ColumnMap::parse("t,x,y").is_err());
    }

    #[test]
    fn column_map_with_mjd_and_commas() {
        let fmt = EopFormat::new(ColumnMap::parse("_,mjd,x,y").unwrap(), AngleUnit::Mas);
        let s = ingest_eop("a,51544.5,1,2\nb,51727.125,3,4\nc,51909.75,5,6\n", &fmt).unwrap();
        assert_eq!(s.t0, 2000.0);
        assert!((s.delta - 0.5).abs() < 1e-12);
        assert_eq!(s.values[2], Complex64::new(5.0, 6.0));
    }

    #[test]
    fn bundled_snapshot_shape() {
        let s = bundled_polar_motion().unwrap();
        assert_eq!(s.len(), 599);
        assert!((s.delta - 0.1).abs() < 1e-9);
        assert_eq!(s.t0, 1962.0);
        let rows = POLAR_MOTION_SNAPSHOT
            .lines()
            .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
            .count();
        assert_eq!(rows, s.len());
    }

    #[test]
    fn ingestion_is_idempotent() {
        let s = bundled_polar_motion().unwrap();
        let text: String = s
            .values
            .iter()
            .enumerate()
            .map(|(i, z)| format!("{} {} {}\n", fmt_f64(s.time(i)), fmt_f64(z.re), fmt_f64(z.im)))
            .collect();
        let again = ingest_eop(&text, &EopFormat::new(ColumnMap::default(), AngleUnit::Mas)).unwrap();
        assert_eq!(again.values, s.values);
        assert!((again.delta - s.delta).abs() < 1e-12);
    }

    #[test]
    fn fit_result_round_trips() {
        let geo = GeometricParams::new(0.02, 0.8124, 0.71636, 0.51519, 1.62481);
        let res = FitResult {
            geo,
            ell: geo.to_elliptical().unwrap(),
            psi_hat: geo.psi,
            loglik: -1234.5678901234567,
            converged: true,
            n_freqs_used: 98,
            boundary_flags: BoundaryFlags::default(),
            iterations: 10,
            evaluations: 20,
        };
        let text = to_json(&res).unwrap();
        assert!(text.contains("\"r_re\""));
        let back: FitResult = from_json(&text).unwrap();
        assert_eq!(back, res);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fit.json");
        write_json(&path, &res).unwrap();
        let back: FitResult = from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
        assert_eq!(back, res);
        let p: EllipticalParams = from_json(&to_json(&res.ell).unwrap()).unwrap();
        assert_eq!(p, res.ell);
    }

    #[test]
    fn csv_header_and_series_round_trip() {
        let s = ComplexSeries::new(
            vec![Complex64::new(0.1, -0.2), Complex64::new(1.0 / 3.0, 2e-300)],
            0.25,
            10.0,
        )
        .unwrap();
        let text = series_to_csv(&s).unwrap();
        assert!(text.starts_with("t,x,y\n"));
        let back = series_from_csv(&text, 1e-9).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.t0, 10.0);
        assert!(read_csv("a,b\n1,2\n", &["t", "x", "y"]).is_err());
        assert!(to_csv(&["a"], [[1.0, 2.0]]).is_err());
    }

    proptest! {
        #[test]
        fn floats_round_trip_exactly(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            let text = fmt_f64(v);
            prop_assert_eq!(text.parse::<f64>().unwrap().to_bits(), v.to_bits());
            let json = to_json(&vec![v]).unwrap();
            let back: Vec<f64> = from_json(&json).unwrap();
            prop_assert_eq!(back[0], v);
        }
    }
}
