//! Reading and writing datasets in the UCR archive text layout: one series
//! per line, the class label first, values separated by commas or tabs.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::series::{TimeSeries, Window};

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSeries {
    pub label: i64,
    pub series: TimeSeries,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub train: Vec<LabeledSeries>,
    pub test: Vec<LabeledSeries>,
    pub series_length: usize,
    pub recommended_window: Option<usize>,
}

impl Dataset {
    pub fn train_series(&self) -> Vec<TimeSeries> {
        self.train.iter().map(|l| l.series.clone()).collect()
    }

    /// Replaces every series by its z-normalised form.
    pub fn znormalized(mut self) -> Self {
        for l in self.train.iter_mut().chain(self.test.iter_mut()) {
            l.series = znormalize(&l.series);
        }
        self
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Dataset name; defaults to the train file stem without `_TRAIN`.
    pub name: Option<String>,
    /// Two-column `dataset_name,window` file of recommended windows.
    pub metadata: Option<PathBuf>,
    pub znorm: bool,
}

pub fn load_dataset(train_path: &Path, test_path: &Path, options: &LoadOptions) -> Result<Dataset> {
    let train = read_series_file(train_path, "train", None)?;
    let len = train.first().map(|l| l.series.len());
    let test = read_series_file(test_path, "test", len)?;
    let series_length = len
        .or_else(|| test.first().map(|l| l.series.len()))
        .ok_or(Error::EmptyTrainingSet)?;
    let name = options
        .name
        .clone()
        .unwrap_or_else(|| dataset_name_from_path(train_path));
    let recommended_window = match &options.metadata {
        Some(p) => read_metadata(p)?.get(&name).copied(),
        None => None,
    };
    let ds = Dataset {
        name,
        train,
        test,
        series_length,
        recommended_window,
    };
    Ok(if options.znorm { ds.znormalized() } else { ds })
}

fn dataset_name_from_path(p: &Path) -> String {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    for suffix in ["_TRAIN", "_train", "-train", "_Train"] {
        if let Some(s) = stem.strip_suffix(suffix) {
            return s.to_owned();
        }
    }
    stem
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

/// `expected_len` carries the length fixed by an earlier file.
pub fn read_series_file(
    path: &Path,
    tag: &str,
    expected_len: Option<usize>,
) -> Result<Vec<LabeledSeries>> {
    let reader = open(path)?;
    parse_series(reader, tag, expected_len).map_err(|e| match e {
        Error::Io { source, .. } => Error::Io {
            path: path.to_owned(),
            source,
        },
        other => other,
    })
}

pub fn parse_series<R: BufRead>(
    reader: R,
    tag: &str,
    mut expected_len: Option<usize>,
) -> Result<Vec<LabeledSeries>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let lineno = n + 1;
        let line = line.map_err(|source| Error::Io {
            path: PathBuf::new(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let sep = if line.contains('\t') { '\t' } else { ',' };
        let mut fields = line.split(sep).map(str::trim);
        let label = parse_label(fields.next().unwrap_or(""), lineno)?;
        let values = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| Error::Parse {
                    line: lineno,
                    reason: format!("not a number: {f:?}"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        match expected_len {
            Some(expected) if expected != values.len() => {
                return Err(Error::RaggedRow {
                    line: lineno,
                    expected,
                    found: values.len(),
                })
            }
            _ => expected_len = Some(values.len()),
        }
        let series = TimeSeries::with_id(values, format!("{tag}[{}]", out.len()))?;
        out.push(LabeledSeries { label, series });
    }
    Ok(out)
}

/// Labels are integers, but some archive files write them as `2.0`.
fn parse_label(field: &str, line: usize) -> Result<i64> {
    let bad = |reason: String| Error::Parse { line, reason };
    if let Ok(l) = field.parse::<i64>() {
        return Ok(l);
    }
    let x: f64 = field
        .parse()
        .map_err(|_| bad(format!("label is not a number: {field:?}")))?;
    if x.is_finite() && x.fract() == 0.0 && x.abs() < 9.0e15 {
        Ok(x as i64)
    } else {
        Err(bad(format!("label is not an integer: {field:?}")))
    }
}

/// Writes series in the archive layout. `f64` display is the shortest
/// decimal that reads back to the same value.
pub fn write_series<W: Write>(mut out: W, series: &[LabeledSeries], sep: char) -> io::Result<()> {
    for l in series {
        write!(out, "{}", l.label)?;
        for v in l.series.values() {
            write!(out, "{sep}{v}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Reads `dataset_name,window` rows. A first row whose window column is not
/// an integer is taken as a header; `#` starts a comment line.
pub fn read_metadata(path: &Path) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::new();
    for (n, line) in open(path)?.lines().enumerate() {
        let line = line.map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        })?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let sep = if line.contains('\t') { '\t' } else { ',' };
        let mut cols = line.split(sep).map(str::trim);
        let (name, window) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
        match window.parse::<usize>() {
            Ok(w) => {
                map.insert(name.to_owned(), w);
            }
            Err(_) if n == 0 => {}
            Err(_) => {
                return Err(Error::Parse {
                    line: n + 1,
                    reason: format!("window is not a non-negative integer: {window:?}"),
                })
            }
        }
    }
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowSpec {
    Absolute(usize),
    /// Fraction of the series length in `(0, 1]`, rounded up.
    Fraction(f64),
}

/// `Fraction` products within 1e-9 of an integer are taken as that integer,
/// so `0.07 * 100` gives 7 even though the float product is 7.000000000000001.
pub fn resolve_window(spec: WindowSpec, series_length: usize) -> Result<Window> {
    match spec {
        WindowSpec::Absolute(n) => Ok(Window(n)),
        WindowSpec::Fraction(f) => {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidFraction(f));
            }
            let x = f * series_length as f64;
            let r = x.round();
            let w = if (x - r).abs() <= 1e-9 * x.max(1.0) { r } else { x.ceil() };
            Ok(Window((w as usize).max(1)))
        }
    }
}

/// Zero mean, unit (population) standard deviation. A constant series maps
/// to all zeros.
pub fn znormalize(s: &TimeSeries) -> TimeSeries {
    let v = s.values();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sd = var.sqrt();
    let values = if sd > 0.0 {
        v.iter().map(|x| (x - mean) / sd).collect()
    } else {
        vec![0.0; v.len()]
    };
    let out = TimeSeries::new(values).expect("finite input gives finite output");
    match s.id() {
        Some(id) => TimeSeries::with_id(out.values().to_vec(), id).expect("same values"),
        None => out,
    }
}
