//! Daily count series, the national/state panel, CSV ingestion and ordered splits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::{Days, NaiveDate};

use crate::error::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// A named daily series on a gap-free calendar index.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSeries {
    name: String,
    start: NaiveDate,
    values: Vec<f64>,
    has_negative: bool,
}

impl UnivariateSeries {
    /// Builds a series from a start date and consecutive daily values.
    pub fn new(name: impl Into<String>, start: NaiveDate, values: Vec<f64>) -> Result<Self> {
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "non-finite value {v} at position {i}"
            )));
        }
        let has_negative = values.iter().any(|&v| v < 0.0);
        let series = Self {
            name: name.into(),
            start,
            values,
            has_negative,
        };
        if has_negative {
            log::warn!(
                "series {:?} contains negative daily values (reporting corrections)",
                series.name
            );
        }
        Ok(series)
    }

    /// Builds a series from unordered `(date, value)` pairs. Pairs are sorted
    /// before validation; duplicates and calendar gaps are rejected.
    pub fn from_pairs(name: impl Into<String>, mut pairs: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidSeries("no observations".into()));
        }
        pairs.sort_by_key(|(d, _)| *d);
        let mut missing = Vec::new();
        for w in pairs.windows(2) {
            let (prev, next) = (w[0].0, w[1].0);
            if prev == next {
                return Err(Error::DuplicateDate(next));
            }
            let mut d = prev + Days::new(1);
            while d < next {
                missing.push(d);
                d = d + Days::new(1);
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingDates(missing));
        }
        let start = pairs[0].0;
        Self::new(name, start, pairs.into_iter().map(|(_, v)| v).collect())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn start(&self) -> NaiveDate {
        self.start
    }

    /// Last date of the index. Panics on an empty series.
    pub fn end(&self) -> NaiveDate {
        self.date(self.len() - 1)
    }

    /// Calendar date of position `i` (0-based). Positions past the end
    /// extrapolate the daily index, which is how forecast dates are built.
    pub fn date(&self, i: usize) -> NaiveDate {
        self.start + Days::new(i as u64)
    }

    pub fn dates(&self) -> impl Iterator<Item = NaiveDate> + '_ {
        (0..self.len()).map(|i| self.date(i))
    }

    /// True when at least one daily value is negative.
    pub fn has_negative(&self) -> bool {
        self.has_negative
    }

    /// Copy of positions `range`, keeping dates aligned.
    pub fn slice(&self, range: std::ops::Range<usize>) -> UnivariateSeries {
        UnivariateSeries {
            name: self.name.clone(),
            start: self.date(range.start),
            has_negative: self.values[range.clone()].iter().any(|&v| v < 0.0),
            values: self.values[range].to_vec(),
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Writes the `date,value` schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["date", "value"])?;
        for (d, v) in self.dates().zip(&self.values) {
            w.write_record([d.format(DATE_FORMAT).to_string(), v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Order-preserving train/test partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitSpec {
    pub train_len: usize,
    pub test_len: usize,
}

impl SplitSpec {
    pub fn new(train_len: usize, test_len: usize) -> Self {
        Self {
            train_len,
            test_len,
        }
    }
}

/// First `train_len` points and the `test_len` points that follow them.
pub fn split(
    series: &UnivariateSeries,
    spec: SplitSpec,
) -> Result<(UnivariateSeries, UnivariateSeries)> {
    let end = spec.train_len + spec.test_len;
    if spec.train_len == 0 || end > series.len() {
        return Err(Error::SplitBounds {
            train: spec.train_len,
            test: spec.test_len,
            len: series.len(),
        });
    }
    Ok((
        series.slice(0..spec.train_len),
        series.slice(spec.train_len..end),
    ))
}

/// National series plus its constituent state series on one date index.
#[derive(Debug, Clone, PartialEq)]
pub struct HierarchicalPanel {
    national: UnivariateSeries,
    states: Vec<UnivariateSeries>,
    defect: Vec<f64>,
}

impl HierarchicalPanel {
    pub fn new(national: UnivariateSeries, states: Vec<UnivariateSeries>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidSeries("panel needs at least one state".into()));
        }
        for s in &states {
            if s.start() != national.start() || s.len() != national.len() {
                return Err(Error::InvalidSeries(format!(
                    "state {:?} does not share the national date index",
                    s.name()
                )));
            }
        }
        let defect = (0..national.len())
            .map(|t| national.values()[t] - states.iter().map(|s| s.values()[t]).sum::<f64>())
            .collect();
        Ok(Self {
            national,
            states,
            defect,
        })
    }

    pub fn national(&self) -> &UnivariateSeries {
        &self.national
    }

    pub fn states(&self) -> &[UnivariateSeries] {
        &self.states
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    /// `Y_t - sum_i y_t^(i)` for every date.
    pub fn defect(&self) -> &[f64] {
        &self.defect
    }

    /// Writes the `date,<national>,<state>...` schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string(), self.national.name().to_string()];
        header.extend(self.states.iter().map(|s| s.name().to_string()));
        w.write_record(&header)?;
        for t in 0..self.national.len() {
            let mut row = vec![
                self.national.date(t).format(DATE_FORMAT).to_string(),
                self.national.values()[t].to_string(),
            ];
            row.extend(self.states.iter().map(|s| s.values()[t].to_string()));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn parse_series_csv(path: impl AsRef<Path>) -> Result<UnivariateSeries> {
    let path = path.as_ref();
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "series".into());
    read_series_csv(File::open(path)?, path, name)
}

/// Reads the `date,value` schema from any reader. `source` is only used in
/// error messages.
pub fn read_series_csv<R: Read>(
    reader: R,
    source: impl Into<PathBuf>,
    name: impl Into<String>,
) -> Result<UnivariateSeries> {
    let source = source.into();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() != 2 || &header[0] != "date" || &header[1] != "value" {
        return Err(Error::Parse {
            path: source,
            line: 1,
            message: format!("expected header `date,value`, found `{}`", join(&header)),
        });
    }
    let mut pairs = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&source, e))?;
        let line = line_of(&rec);
        if rec.len() != 2 {
            return Err(Error::Parse {
                path: source,
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let date = parse_date(&rec[0], &source, line)?;
        let value = parse_value(&rec[1], &source, line)?;
        pairs.push((date, value));
    }
    UnivariateSeries::from_pairs(name, pairs)
}

pub fn parse_panel_csv(path: impl AsRef<Path>) -> Result<HierarchicalPanel> {
    let path = path.as_ref();
    read_panel_csv(File::open(path)?, path)
}

pub fn read_panel_csv<R: Read>(reader: R, source: impl Into<PathBuf>) -> Result<HierarchicalPanel> {
    let source = source.into();
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "date" {
        return Err(Error::Parse {
            path: source,
            line: 1,
            message: format!(
                "expected header `date,<national>,<state>...` with at least two data columns, found `{}`",
                join(&header)
            ),
        });
    }
    let columns = header.len() - 1;
    let mut dates = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); columns];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(&source, e))?;
        let line = line_of(&rec);
        dates.push(parse_date(&rec[0], &source, line)?);
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse_value(&rec[c + 1], &source, line)?);
        }
    }
    let mut series = cols.into_iter().enumerate().map(|(c, col)| {
        let pairs = dates.iter().copied().zip(col).collect();
        UnivariateSeries::from_pairs(&header[c + 1], pairs)
    });
    let national = series.next().expect("header checked")?;
    let states = series.collect::<Result<Vec<_>>>()?;
    HierarchicalPanel::new(national, states)
}

fn parse_date(field: &str, source: &Path, line: usize) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(field, DATE_FORMAT).map_err(|e| Error::Parse {
        path: source.to_path_buf(),
        line,
        message: format!("invalid ISO-8601 date {field:?}: {e}"),
    })
}

fn parse_value(field: &str, source: &Path, line: usize) -> Result<f64> {
    match field.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Parse {
            path: source.to_path_buf(),
            line,
            message: format!("non-numeric value {field:?}"),
        }),
    }
}

fn line_of(rec: &csv::StringRecord) -> usize {
    rec.position().map(|p| p.line() as usize).unwrap_or(0)
}

fn csv_error(source: &Path, e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        path: source.to_path_buf(),
        line,
        message: e.to_string(),
    }
}

fn join(rec: &csv::StringRecord) -> String {
    rec.iter().collect::<Vec<_>>().join(",")
}

/// Committed fixture files shipped under `data/`.
pub mod fixtures {
    use super::*;

    pub const STATE_FILES: [&str; 6] = [
        "maharashtra.csv",
        "andhra_pradesh.csv",
        "tamil_nadu.csv",
        "karnataka.csv",
        "chhattisgarh.csv",
        "kerala.csv",
    ];

    pub fn dir() -> PathBuf {
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
    }

    pub fn path(file: &str) -> PathBuf {
        dir().join(file)
    }

    pub fn india() -> Result<UnivariateSeries> {
        Ok(parse_series_csv(path("india.csv"))?.with_name("India"))
    }

    pub fn india_panel() -> Result<HierarchicalPanel> {
        parse_panel_csv(path("india_panel.csv"))
    }

    /// National series followed by the six state series.
    pub fn all_series() -> Result<Vec<UnivariateSeries>> {
        let panel = india_panel()?;
        let mut out = vec![panel.national().clone()];
        out.extend(panel.states().iter().cloned());
        Ok(out)
    }
}
