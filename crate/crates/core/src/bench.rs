//! Experiment drivers behind the command-line tool: bound tightness over
//! all test/train pairs, timed 1-NN search, and CSV output.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bounds::{BoundSelector, Contribution, PreparedSeries};
use crate::dtw::{dtw_slices, DtwScratch};
use crate::envelope::EnvelopePair;
use crate::error::{Error, Result};
use crate::search::{
    derive_seed, search_random_order_with, search_sorted_with, CandidateSet, SearchScratch,
};
use crate::series::{CostFunction, TimeSeries, Window};
use crate::ucr::{load_dataset, resolve_window, Dataset, LoadOptions, WindowSpec};

/// First line of every CSV this module writes.
pub const CSV_VERSION_LINE: &str = "# dtw-bounds v1";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WindowArg {
    Spec(WindowSpec),
    /// The dataset's recommended window from the metadata file.
    Recommended,
}

impl WindowArg {
    pub fn resolve(&self, ds: &Dataset) -> Result<Window> {
        match self {
            WindowArg::Spec(s) => resolve_window(*s, ds.series_length),
            WindowArg::Recommended => ds
                .recommended_window
                .map(Window)
                .ok_or_else(|| Error::NoRecommendedWindow(ds.name.clone())),
        }
    }
}

/// `12` is an absolute window, `5%` a fraction of the series length,
/// `recommended` the metadata value.
impl FromStr for WindowArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("recommended") {
            return Ok(WindowArg::Recommended);
        }
        if let Some(p) = s.strip_suffix('%') {
            let p: f64 = p
                .trim()
                .parse()
                .map_err(|_| format!("bad window percentage {s:?}"))?;
            return Ok(WindowArg::Spec(WindowSpec::Fraction(p / 100.0)));
        }
        s.parse::<usize>()
            .map(|n| WindowArg::Spec(WindowSpec::Absolute(n)))
            .map_err(|_| format!("window must be an integer, `p%` or `recommended`, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    Random,
    Sorted,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Protocol::Random => "random",
            Protocol::Sorted => "sorted",
        })
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "random" => Ok(Protocol::Random),
            "sorted" => Ok(Protocol::Sorted),
            _ => Err(format!("protocol must be `random` or `sorted`, got {s:?}")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub train: PathBuf,
    pub test: PathBuf,
    pub metadata: Option<PathBuf>,
    pub window: WindowArg,
    pub cf: CostFunction,
    pub bounds: Vec<BoundSelector>,
    pub protocol: Protocol,
    pub reps: usize,
    pub seed: u64,
    pub znorm: bool,
    pub parallel: bool,
}

impl RunConfig {
    pub fn load(&self) -> Result<Dataset> {
        let opts = LoadOptions {
            name: None,
            metadata: self.metadata.clone(),
            znorm: self.znorm,
        };
        load_dataset(&self.train, &self.test, &opts)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TightnessRecord {
    pub dataset: String,
    pub bound: BoundSelector,
    pub w: Window,
    /// Mean of bound / DTW over the counted pairs; `None` when no pair counts.
    pub mean_tightness: Option<f64>,
    pub pairs_counted: usize,
    pub pairs_excluded_zero_dtw: usize,
}

pub fn run_tightness(cfg: &RunConfig) -> Result<Vec<TightnessRecord>> {
    let ds = cfg.load()?;
    let w = cfg.window.resolve(&ds)?;
    tightness(&ds, w, &cfg.cf, &cfg.bounds, cfg.parallel)
}

/// Bound / DTW for every (test, train) pair, without abandoning. Pairs at
/// DTW distance zero are excluded.
pub fn tightness(
    ds: &Dataset,
    w: Window,
    cf: &CostFunction,
    bounds: &[BoundSelector],
    parallel: bool,
) -> Result<Vec<TightnessRecord>> {
    if w.get() == 0 {
        return Err(Error::WindowZeroRejected);
    }
    for b in bounds {
        b.check(cf, ds.series_length)?;
    }
    let train = CandidateSet::new(ds.train_series(), w)?;
    let per_query = |q: &TimeSeries| -> (Vec<f64>, usize, usize) {
        let q = PreparedSeries::new(q.clone(), w);
        let mut sums = vec![0.0; bounds.len()];
        let (mut counted, mut excluded) = (0, 0);
        let mut dtw_scratch = DtwScratch::default();
        let mut scratch = Default::default();
        for t in train.iter() {
            let d = dtw_slices(q.values(), t.values(), w, cf, f64::INFINITY, &mut dtw_scratch)
                .distance()
                .expect("no cutoff");
            if d == 0.0 {
                excluded += 1;
                continue;
            }
            counted += 1;
            for (s, b) in sums.iter_mut().zip(bounds) {
                *s += b.eval_prepared(&q, t, cf, None, &mut scratch, &mut ()).value / d;
            }
        }
        (sums, counted, excluded)
    };
    let queries: Vec<&TimeSeries> = ds.test.iter().map(|l| &l.series).collect();
    let parts: Vec<(Vec<f64>, usize, usize)> = if parallel {
        queries.par_iter().map(|q| per_query(q)).collect()
    } else {
        queries.iter().map(|q| per_query(q)).collect()
    };
    // summed in query order so parallel and sequential runs agree bitwise
    let mut sums = vec![0.0; bounds.len()];
    let (mut counted, mut excluded) = (0, 0);
    for (s, c, e) in parts {
        for (acc, v) in sums.iter_mut().zip(s) {
            *acc += v;
        }
        counted += c;
        excluded += e;
    }
    Ok(bounds
        .iter()
        .zip(sums)
        .map(|(&bound, s)| TightnessRecord {
            dataset: ds.name.clone(),
            bound,
            w,
            mean_tightness: (counted > 0).then(|| s / counted as f64),
            pairs_counted: counted,
            pairs_excluded_zero_dtw: excluded,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchSummary {
    pub dataset: String,
    pub bound: BoundSelector,
    pub protocol: Protocol,
    pub w: Window,
    pub reps: usize,
    pub mean_time_s: f64,
    pub sd_time_s: f64,
    /// Per repetition, summed over all test queries.
    pub dtw_calls: Vec<u64>,
    pub bounds_abandoned: Vec<u64>,
    pub accuracy: f64,
    /// Nearest-neighbour index per test query (first repetition).
    pub nn_indices: Vec<usize>,
}

impl SearchSummary {
    pub fn mean_dtw_calls(&self) -> f64 {
        mean(&self.dtw_calls)
    }

    pub fn mean_bounds_abandoned(&self) -> f64 {
        mean(&self.bounds_abandoned)
    }
}

fn mean(xs: &[u64]) -> f64 {
    xs.iter().sum::<u64>() as f64 / xs.len().max(1) as f64
}

pub fn run_search_experiment(cfg: &RunConfig) -> Result<Vec<SearchSummary>> {
    let ds = cfg.load()?;
    let w = cfg.window.resolve(&ds)?;
    search_experiment(&ds, w, &cfg.cf, &cfg.bounds, cfg.protocol, cfg.reps, cfg.seed)
}

/// Runs each test query against the training set `reps` times per bound.
/// Runs are sequential so that wall times are comparable.
pub fn search_experiment(
    ds: &Dataset,
    w: Window,
    cf: &CostFunction,
    bounds: &[BoundSelector],
    protocol: Protocol,
    reps: usize,
    seed: u64,
) -> Result<Vec<SearchSummary>> {
    let reps = reps.max(1);
    let train = CandidateSet::new(ds.train_series(), w)?;
    let mut scratch = SearchScratch::default();
    let mut out = Vec::with_capacity(bounds.len());
    for &bound in bounds {
        if protocol == Protocol::Sorted && bound == BoundSelector::None {
            return Err(Error::BoundRequired);
        }
        bound.check(cf, ds.series_length)?;
        let mut times = Vec::with_capacity(reps);
        let mut dtw_calls = Vec::with_capacity(reps);
        let mut abandoned = Vec::with_capacity(reps);
        let mut nn_indices = Vec::new();
        for rep in 0..reps {
            let (mut secs, mut calls, mut aband) = (0.0, 0, 0);
            for (qi, q) in ds.test.iter().enumerate() {
                let r = match protocol {
                    Protocol::Random => {
                        let s = derive_seed(seed, rep as u64, qi as u64);
                        search_random_order_with(&q.series, &train, w, cf, bound, s, &mut scratch)?
                    }
                    Protocol::Sorted => search_sorted_with(&q.series, &train, w, cf, bound, &mut scratch)?,
                };
                secs += r.wall_time.as_secs_f64();
                calls += r.dtw_calls;
                aband += r.bounds_abandoned;
                if rep == 0 {
                    nn_indices.push(r.nn_index);
                }
            }
            times.push(secs);
            dtw_calls.push(calls);
            abandoned.push(aband);
        }
        let correct = nn_indices
            .iter()
            .zip(&ds.test)
            .filter(|(&nn, q)| ds.train[nn].label == q.label)
            .count();
        let mean_time = times.iter().sum::<f64>() / reps as f64;
        let sd = if reps > 1 {
            (times.iter().map(|t| (t - mean_time).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt()
        } else {
            0.0
        };
        out.push(SearchSummary {
            dataset: ds.name.clone(),
            bound,
            protocol,
            w,
            reps,
            mean_time_s: mean_time,
            sd_time_s: sd,
            dtw_calls,
            bounds_abandoned: abandoned,
            accuracy: correct as f64 / ds.test.len().max(1) as f64,
            nn_indices,
        });
    }
    Ok(out)
}

fn csv_writer<W: Write>(mut out: W, header: &[&str]) -> Result<csv::Writer<W>> {
    writeln!(out, "{CSV_VERSION_LINE}").map_err(csv::Error::from)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    Ok(w)
}

pub fn write_tightness_csv<W: Write>(out: W, records: &[TightnessRecord]) -> Result<()> {
    let mut w = csv_writer(
        out,
        &["dataset", "bound", "w", "mean_tightness", "pairs", "excluded"],
    )?;
    for r in records {
        w.write_record([
            r.dataset.clone(),
            r.bound.to_string(),
            r.w.to_string(),
            r.mean_tightness.map(|t| t.to_string()).unwrap_or_default(),
            r.pairs_counted.to_string(),
            r.pairs_excluded_zero_dtw.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_search_csv<W: Write>(out: W, rows: &[SearchSummary]) -> Result<()> {
    let mut w = csv_writer(
        out,
        &[
            "dataset",
            "bound",
            "protocol",
            "mean_time_s",
            "sd_time_s",
            "dtw_calls",
            "abandons",
            "accuracy",
        ],
    )?;
    for r in rows {
        w.write_record([
            r.dataset.clone(),
            r.bound.to_string(),
            r.protocol.to_string(),
            r.mean_time_s.to_string(),
            r.sd_time_s.to_string(),
            r.mean_dtw_calls().to_string(),
            r.mean_bounds_abandoned().to_string(),
            r.accuracy.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_envelope_csv<W: Write>(out: W, series: &TimeSeries, env: &EnvelopePair) -> Result<()> {
    let mut w = csv_writer(out, &["index", "value", "lower", "upper"])?;
    for (i, v) in series.values().iter().enumerate() {
        w.write_record([
            i.to_string(),
            v.to_string(),
            env.lower[i].to_string(),
            env.upper[i].to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

pub fn write_contrib_csv<W: Write>(out: W, rows: &[(BoundSelector, Contribution)]) -> Result<()> {
    let mut w = csv_writer(out, &["bound", "phase", "index", "clause", "contribution"])?;
    for (b, c) in rows {
        w.write_record([
            b.to_string(),
            c.phase.to_string(),
            c.index.to_string(),
            c.clause.to_string(),
            c.value.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::labelled_dataset;
    use crate::ucr::LabeledSeries;

    fn small() -> Dataset {
        labelled_dataset(4, 3, 5, 4, 24)
    }

    #[test]
    fn window_arg_parsing() {
        assert_eq!("7".parse::<WindowArg>().unwrap(), WindowArg::Spec(WindowSpec::Absolute(7)));
        assert_eq!(
            "10%".parse::<WindowArg>().unwrap(),
            WindowArg::Spec(WindowSpec::Fraction(0.1))
        );
        assert_eq!("recommended".parse::<WindowArg>().unwrap(), WindowArg::Recommended);
        assert!("x".parse::<WindowArg>().is_err());
    }

    #[test]
    fn dtw_selector_has_unit_tightness() {
        let ds = small();
        let r = tightness(&ds, Window(2), &CostFunction::squared(), &[BoundSelector::Dtw], false)
            .unwrap();
        assert_eq!(r[0].mean_tightness, Some(1.0));
        assert_eq!(r[0].pairs_counted, 15 * 12);
    }

    #[test]
    fn identical_series_are_all_excluded() {
        let s = TimeSeries::new(vec![1.0, 2.0, 0.0, 1.0, 3.0, 2.0, 1.0]).unwrap();
        let l = LabeledSeries { label: 1, series: s };
        let ds = Dataset {
            name: "same".into(),
            train: vec![l.clone(); 3],
            test: vec![l; 2],
            series_length: 7,
            recommended_window: None,
        };
        let r = tightness(&ds, Window(1), &CostFunction::absolute(), &[BoundSelector::Webb], false)
            .unwrap();
        assert_eq!(r[0].pairs_counted, 0);
        assert_eq!(r[0].pairs_excluded_zero_dtw, 6);
        assert_eq!(r[0].mean_tightness, None);
    }

    #[test]
    fn zero_window_rejected() {
        let err = tightness(&small(), Window(0), &CostFunction::squared(), &[BoundSelector::Keogh], false);
        assert!(matches!(err, Err(Error::WindowZeroRejected)));
    }

    #[test]
    fn parallel_matches_sequential() {
        let ds = small();
        let bounds = BoundSelector::all_bounds(3);
        let cf = CostFunction::squared();
        let a = tightness(&ds, Window(3), &cf, &bounds, false).unwrap();
        let b = tightness(&ds, Window(3), &cf, &bounds, true).unwrap();
        assert_eq!(a, b);
        let keogh = a[0].mean_tightness.unwrap();
        let improved = a[1].mean_tightness.unwrap();
        assert!(improved >= keogh);
    }

    #[test]
    fn search_experiment_properties() {
        let ds = small();
        let cf = CostFunction::squared();
        let w = Window(2);
        let err = search_experiment(&ds, w, &cf, &[BoundSelector::None], Protocol::Sorted, 1, 0);
        assert!(matches!(err, Err(Error::BoundRequired)));

        let sorted = search_experiment(&ds, w, &cf, &[BoundSelector::Webb], Protocol::Sorted, 2, 1)
            .unwrap();
        assert_eq!(sorted[0].dtw_calls[0], sorted[0].dtw_calls[1]);

        let bounds = [BoundSelector::None, BoundSelector::Keogh, BoundSelector::Webb];
        let r1 = search_experiment(&ds, w, &cf, &bounds, Protocol::Random, 2, 10).unwrap();
        let r2 = search_experiment(&ds, w, &cf, &bounds, Protocol::Random, 2, 11).unwrap();
        for r in r1.iter().chain(&r2).chain(&sorted) {
            assert_eq!(r.nn_indices, r1[0].nn_indices);
            assert_eq!(r.accuracy, r1[0].accuracy);
        }
    }

    #[test]
    fn csv_layout() {
        let recs = tightness(&small(), Window(1), &CostFunction::squared(), &[BoundSelector::Keogh], false)
            .unwrap();
        let mut buf = Vec::new();
        write_tightness_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_VERSION_LINE));
        assert_eq!(lines.next(), Some("dataset,bound,w,mean_tightness,pairs,excluded"));
        assert!(lines.next().unwrap().starts_with("synthetic-4,keogh,1,"));
    }
}
