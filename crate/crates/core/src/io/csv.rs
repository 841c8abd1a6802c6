//! CSV outputs: diagnostics series, CE scans and radial profiles.
//!
//! Floats are written in scientific notation with 17 significant digits,
//! enough to re-parse every f64 exactly.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::zk::RadialProfile;

pub const CE_COLUMNS: [&str; 3] = ["f1", "T", "ce"];
pub const PROFILE_COLUMNS: [&str; 2] = ["r", "phi"];

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_err(context: &str, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(context.to_string(), source),
        kind => Error::Config {
            line: line as usize,
            message: format!("{context}: {kind:?}"),
        },
    }
}

fn bad_row(line: u64, message: impl Into<String>) -> Error {
    Error::Config {
        line: line as usize,
        message: message.into(),
    }
}

fn check_header<R: Read>(reader: &mut csv::Reader<R>, want: &[&str], context: &str) -> Result<()> {
    let header = reader.headers().map_err(|e| csv_err(context, e))?;
    if !header.iter().eq(want.iter().copied()) {
        return Err(bad_row(1, format!("{context}: expected header {}", want.join(","))));
    }
    Ok(())
}

fn parse_field<V: std::str::FromStr>(record: &csv::StringRecord, k: usize, context: &str) -> Result<V> {
    let line = record.position().map(|p| p.line()).unwrap_or(0);
    let raw = record.get(k).ok_or_else(|| bad_row(line, format!("{context}: missing column {k}")))?;
    raw.trim()
        .parse()
        .map_err(|_| bad_row(line, format!("{context}: cannot parse `{raw}` in column {k}")))
}

/// Series CSV sink. The header goes out on construction, one row per
/// [`SeriesWriter::append`].
pub struct SeriesWriter<W: Write> {
    inner: csv::Writer<W>,
    rows: usize,
}

impl<W: Write> SeriesWriter<W> {
    pub fn new(out: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(out);
        inner
            .write_record(DiagnosticsRecord::COLUMNS)
            .map_err(|e| csv_err("series header", e))?;
        Ok(Self { inner, rows: 0 })
    }

    pub fn append(&mut self, record: &DiagnosticsRecord) -> Result<()> {
        let mut row = Vec::with_capacity(DiagnosticsRecord::COLUMNS.len());
        row.push(record.step.to_string());
        row.extend(record.values().iter().map(|&v| format_f64(v)));
        self.inner.write_record(&row).map_err(|e| csv_err("series row", e))?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn flush(&mut self) -> Result<()> {
        self.inner
            .flush()
            .map_err(|e| Error::io("flushing series", e))
    }

    pub fn into_inner(self) -> Result<W> {
        self.inner
            .into_inner()
            .map_err(|e| Error::io("flushing series", e.into_error()))
    }
}

impl SeriesWriter<File> {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(format!("creating {}", path.display()), e))?;
        Self::new(file)
    }
}

pub fn read_series<R: Read>(input: R) -> Result<Vec<DiagnosticsRecord>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &DiagnosticsRecord::COLUMNS, "series")?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err("series", e))?;
        let step: u64 = parse_field(&record, 0, "series")?;
        let mut values = [0.0; 13];
        for (k, v) in values.iter_mut().enumerate() {
            *v = parse_field(&record, k + 1, "series")?;
        }
        out.push(DiagnosticsRecord::from_values(step, values));
    }
    Ok(out)
}

pub fn read_series_file(path: &Path) -> Result<Vec<DiagnosticsRecord>> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_series(file)
}

/// One CE measurement; `ce` is NaN for a degenerate spectrum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CeRow {
    pub f1: f64,
    pub time: f64,
    pub ce: f64,
}

pub fn write_ce<W: Write>(out: W, rows: &[CeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CE_COLUMNS).map_err(|e| csv_err("ce header", e))?;
    for r in rows {
        w.write_record([format_f64(r.f1), format_f64(r.time), format_f64(r.ce)])
            .map_err(|e| csv_err("ce row", e))?;
    }
    w.flush().map_err(|e| Error::io("flushing ce csv", e))
}

pub fn read_ce<R: Read>(input: R) -> Result<Vec<CeRow>> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &CE_COLUMNS, "ce")?;
    reader
        .records()
        .map(|record| {
            let record = record.map_err(|e| csv_err("ce", e))?;
            Ok(CeRow {
                f1: parse_field(&record, 0, "ce")?,
                time: parse_field(&record, 1, "ce")?,
                ce: parse_field(&record, 2, "ce")?,
            })
        })
        .collect()
}

/// Two-column `(r, phi)` table of the profile.
pub fn write_profile<W: Write>(out: W, profile: &RadialProfile) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(PROFILE_COLUMNS).map_err(|e| csv_err("profile header", e))?;
    for (k, v) in profile.values.iter().enumerate() {
        w.write_record([format_f64(profile.radius(k)), format_f64(*v)])
            .map_err(|e| csv_err("profile row", e))?;
    }
    w.flush().map_err(|e| Error::io("flushing profile csv", e))
}

/// Reads a profile table written by [`write_profile`]. Radii must start at
/// zero and be uniformly spaced.
pub fn read_profile<R: Read>(input: R, c: f64) -> Result<RadialProfile> {
    let mut reader = csv::Reader::from_reader(input);
    check_header(&mut reader, &PROFILE_COLUMNS, "profile")?;
    let mut radii = Vec::new();
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err("profile", e))?;
        radii.push(parse_field::<f64>(&record, 0, "profile")?);
        values.push(parse_field::<f64>(&record, 1, "profile")?);
    }
    if radii.len() < 4 {
        return Err(bad_row(0, "profile: need at least 4 rows"));
    }
    let dr = radii[1] - radii[0];
    for (k, r) in radii.iter().enumerate() {
        if (r - k as f64 * dr).abs() > 1e-9 * (1.0 + r.abs()) {
            return Err(bad_row(k as u64 + 2, "profile: radii must start at 0 and be uniformly spaced"));
        }
    }
    RadialProfile::from_table(c, dr, values)
}

pub fn read_profile_file(path: &Path, c: f64) -> Result<RadialProfile> {
    let file = File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
    read_profile(file, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(step: u64) -> DiagnosticsRecord {
        let s = step as f64;
        DiagnosticsRecord::from_values(
            step,
            [
                s * 1e-4,
                2.391956403223674 / (1.0 + s),
                -0.1 * s,
                1.0 / 3.0,
                f64::MIN_POSITIVE,
                1e300,
                -0.0,
                std::f64::consts::PI,
                f64::EPSILON,
                -7.0,
                1.0e-17,
                0.1 + 0.2,
                f64::NAN,
            ],
        )
    }

    #[test]
    fn series_round_trip_is_exact() {
        let mut w = SeriesWriter::new(Vec::new()).unwrap();
        for step in [0, 100, 200] {
            w.append(&record(step)).unwrap();
        }
        assert_eq!(w.rows(), 3);
        let bytes = w.into_inner().unwrap();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert_eq!(text.matches("peak_value_at_y1").count(), 1);
        assert_eq!(text.lines().count(), 4);
        let back = read_series(&bytes[..]).unwrap();
        for (a, b) in back.iter().zip([0, 100, 200].map(record)) {
            assert_eq!(a.step, b.step);
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
            }
        }
    }

    #[test]
    fn empty_series_has_only_header() {
        let bytes = SeriesWriter::new(Vec::new()).unwrap().into_inner().unwrap();
        assert_eq!(String::from_utf8(bytes.clone()).unwrap().lines().count(), 1);
        assert!(read_series(&bytes[..]).unwrap().is_empty());
    }

    #[test]
    fn ce_round_trip() {
        let rows = vec![
            CeRow { f1: 0.2, time: 50.0, ce: 1.234 },
            CeRow { f1: 1.2, time: 50.0, ce: f64::NAN },
        ];
        let mut buf = Vec::new();
        write_ce(&mut buf, &rows).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("f1,T,ce\n"));
        let back = read_ce(&buf[..]).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].ce.is_nan());
    }

    #[test]
    fn bad_series_reports_line() {
        let text = format!("{}\n0,1,2\n", DiagnosticsRecord::COLUMNS.join(","));
        assert!(matches!(read_series(text.as_bytes()), Err(Error::Config { .. })));
        assert!(read_series("a,b\n".as_bytes()).is_err());
    }
}
