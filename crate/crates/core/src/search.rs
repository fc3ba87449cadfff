//! 1-NN search under windowed DTW, pruned by a lower bound.
//!
//! Two visiting orders are provided. The random order evaluates each bound
//! with the best distance so far as its cutoff; the sorted order computes
//! every bound up front and scans candidates by increasing bound. Both
//! return the exact nearest neighbour, ties going to the lowest index.

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{BoundScratch, BoundSelector, PreparedSeries};
use crate::dtw::{dtw_slices, DtwOutcome, DtwScratch};
use crate::error::{Error, Result};
use crate::series::{CostFunction, TimeSeries, Window};

/// Training series with their envelopes, prepared once for a window.
#[derive(Debug, Clone)]
pub struct CandidateSet {
    items: Vec<PreparedSeries>,
    window: Window,
    series_len: usize,
}

impl CandidateSet {
    pub fn new(series: Vec<TimeSeries>, w: Window) -> Result<Self> {
        let series_len = series.first().ok_or(Error::EmptyTrainingSet)?.len();
        for s in &series {
            if s.len() != series_len {
                return Err(Error::LengthMismatch(series_len, s.len()));
            }
        }
        let items = series
            .into_iter()
            .map(|s| PreparedSeries::new(s, w))
            .collect();
        Ok(Self {
            items,
            window: w,
            series_len,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn series_len(&self) -> usize {
        self.series_len
    }

    pub fn get(&self, i: usize) -> &PreparedSeries {
        &self.items[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &PreparedSeries> {
        self.items.iter()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub query_id: Option<String>,
    /// Index of the nearest neighbour in the candidate set.
    pub nn_index: usize,
    pub nn_distance: f64,
    pub bounds_computed: u64,
    pub bounds_abandoned: u64,
    pub dtw_calls: u64,
    pub dtw_cells: u64,
    pub wall_time: Duration,
}

impl SearchReport {
    /// Equality ignoring `wall_time`.
    pub fn same_work(&self, other: &SearchReport) -> bool {
        let strip = |r: &SearchReport| SearchReport {
            wall_time: Duration::ZERO,
            ..r.clone()
        };
        strip(self) == strip(other)
    }
}

/// Buffers owned by one search worker.
#[derive(Debug, Default)]
pub struct SearchScratch {
    bound: BoundScratch,
    dtw: DtwScratch,
    order: Vec<usize>,
    sorted: Vec<(f64, usize)>,
}

struct Best {
    distance: f64,
    index: usize,
}

impl Best {
    fn none() -> Self {
        Best {
            distance: f64::INFINITY,
            index: usize::MAX,
        }
    }

    /// Could candidate `t` with lower bound `lb` beat the incumbent?
    #[inline]
    fn admits(&self, lb: f64, t: usize) -> bool {
        lb < self.distance || (lb == self.distance && t < self.index)
    }

    /// DTW cutoff for candidate `t`: a lower-indexed candidate also wins
    /// on equal distance, so it may only be abandoned strictly above.
    #[inline]
    fn dtw_cutoff(&self, t: usize) -> f64 {
        if t < self.index && self.distance.is_finite() {
            self.distance.next_up()
        } else {
            self.distance
        }
    }

    fn offer(&mut self, d: f64, t: usize) {
        if d < self.distance || (d == self.distance && t < self.index) {
            self.distance = d;
            self.index = t;
        }
    }
}

#[derive(Default)]
struct Counts {
    bounds_computed: u64,
    bounds_abandoned: u64,
    dtw_calls: u64,
    dtw_cells: u64,
}

fn check_inputs(q: &TimeSeries, train: &CandidateSet, w: Window) -> Result<()> {
    if train.is_empty() {
        return Err(Error::EmptyTrainingSet);
    }
    if q.len() != train.series_len {
        return Err(Error::LengthMismatch(q.len(), train.series_len));
    }
    if w != train.window {
        return Err(Error::WindowMismatch {
            given: w.get(),
            prepared: train.window.get(),
        });
    }
    Ok(())
}

fn run_dtw(
    q: &PreparedSeries,
    t: &PreparedSeries,
    cf: &CostFunction,
    cutoff: f64,
    scratch: &mut DtwScratch,
    counts: &mut Counts,
) -> Option<f64> {
    let out = dtw_slices(q.values(), t.values(), q.window(), cf, cutoff, scratch);
    counts.dtw_calls += 1;
    counts.dtw_cells += out.cells_computed();
    match out {
        DtwOutcome::Complete(r) => Some(r.distance),
        DtwOutcome::Abandoned { .. } => None,
    }
}

pub fn search_random_order(
    q: &TimeSeries,
    train: &CandidateSet,
    w: Window,
    cf: &CostFunction,
    sel: BoundSelector,
    rng_seed: u64,
) -> Result<SearchReport> {
    search_random_order_with(q, train, w, cf, sel, rng_seed, &mut SearchScratch::default())
}

pub fn search_random_order_with(
    q: &TimeSeries,
    train: &CandidateSet,
    w: Window,
    cf: &CostFunction,
    sel: BoundSelector,
    rng_seed: u64,
    scratch: &mut SearchScratch,
) -> Result<SearchReport> {
    check_inputs(q, train, w)?;
    sel.check(cf, q.len())?;

    let order = &mut scratch.order;
    order.clear();
    order.extend(0..train.len());
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(rng_seed));

    let start = Instant::now();
    let query = PreparedSeries::new(q.clone(), w);
    let mut counts = Counts::default();
    let mut best = Best::none();
    for (pos, &t) in order.iter().enumerate() {
        let cand = train.get(t);
        if pos > 0 && sel != BoundSelector::None {
            let lb = sel.eval_prepared(
                &query,
                cand,
                cf,
                Some(best.distance),
                &mut scratch.bound,
                &mut (),
            );
            counts.bounds_computed += 1;
            if lb.abandoned {
                counts.bounds_abandoned += 1;
                continue;
            }
            if !best.admits(lb.value, t) {
                continue;
            }
        }
        let cutoff = best.dtw_cutoff(t);
        if let Some(d) = run_dtw(&query, cand, cf, cutoff, &mut scratch.dtw, &mut counts) {
            best.offer(d, t);
        }
    }
    let wall_time = start.elapsed();
    Ok(report(q, best, counts, wall_time))
}

pub fn search_sorted(
    q: &TimeSeries,
    train: &CandidateSet,
    w: Window,
    cf: &CostFunction,
    sel: BoundSelector,
) -> Result<SearchReport> {
    search_sorted_with(q, train, w, cf, sel, &mut SearchScratch::default())
}

pub fn search_sorted_with(
    q: &TimeSeries,
    train: &CandidateSet,
    w: Window,
    cf: &CostFunction,
    sel: BoundSelector,
    scratch: &mut SearchScratch,
) -> Result<SearchReport> {
    if sel == BoundSelector::None {
        return Err(Error::BoundRequired);
    }
    check_inputs(q, train, w)?;
    sel.check(cf, q.len())?;

    let start = Instant::now();
    let query = PreparedSeries::new(q.clone(), w);
    let mut counts = Counts::default();
    let sorted = &mut scratch.sorted;
    sorted.clear();
    for (t, cand) in train.iter().enumerate() {
        let lb = sel.eval_prepared(&query, cand, cf, None, &mut scratch.bound, &mut ());
        counts.bounds_computed += 1;
        sorted.push((lb.value, t));
    }
    sorted.sort_unstable_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));

    let mut best = Best::none();
    for &(lb, t) in sorted.iter() {
        if !best.admits(lb, t) {
            break;
        }
        let cutoff = best.dtw_cutoff(t);
        if let Some(d) = run_dtw(&query, train.get(t), cf, cutoff, &mut scratch.dtw, &mut counts) {
            best.offer(d, t);
        }
    }
    let wall_time = start.elapsed();
    Ok(report(q, best, counts, wall_time))
}

fn report(q: &TimeSeries, best: Best, counts: Counts, wall_time: Duration) -> SearchReport {
    SearchReport {
        query_id: q.id().map(str::to_owned),
        nn_index: best.index,
        nn_distance: best.distance,
        bounds_computed: counts.bounds_computed,
        bounds_abandoned: counts.bounds_abandoned,
        dtw_calls: counts.dtw_calls,
        dtw_cells: counts.dtw_cells,
        wall_time,
    }
}

/// Seed for one (repetition, query) pair, derived from a master seed with
/// the SplitMix64 finaliser so neighbouring inputs give unrelated streams.
pub fn derive_seed(master: u64, rep: u64, query: u64) -> u64 {
    let mut z = master
        .wrapping_add(rep.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(query.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;
    use crate::dtw::dtw;

    fn ts(v: Vec<f64>) -> TimeSeries {
        TimeSeries::new(v).unwrap()
    }

    fn random_set(seed: u64, n: usize, len: usize) -> (TimeSeries, Vec<TimeSeries>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walk = |rng: &mut ChaCha8Rng| {
            let mut x = 0.0;
            ts((0..len)
                .map(|_| {
                    x += rng.gen_range(-1.0..1.0);
                    x
                })
                .collect())
        };
        let q = walk(&mut rng);
        let train = (0..n).map(|_| walk(&mut rng)).collect();
        (q, train)
    }

    fn exhaustive(q: &TimeSeries, train: &[TimeSeries], w: Window, cf: &CostFunction) -> (usize, f64) {
        let mut best = (usize::MAX, f64::INFINITY);
        for (i, t) in train.iter().enumerate() {
            let d = dtw(q, t, w, cf).unwrap().distance;
            if d < best.1 {
                best = (i, d);
            }
        }
        best
    }

    #[test]
    fn single_candidate() {
        let q = ts(vec![0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let set = CandidateSet::new(vec![ts(vec![1.0; 7])], Window(1)).unwrap();
        let cf = CostFunction::squared();
        let r = search_random_order(&q, &set, Window(1), &cf, BoundSelector::Webb, 3).unwrap();
        assert_eq!(r.dtw_calls, 1);
        assert_eq!(r.bounds_computed, 0);
        assert_eq!(r.nn_index, 0);
    }

    #[test]
    fn exact_match_prunes_everything_positive() {
        let (q, mut train) = random_set(5, 20, 24);
        train[7] = q.clone();
        let w = Window(3);
        let set = CandidateSet::new(train, w).unwrap();
        let cf = CostFunction::squared();
        let r = search_sorted(&q, &set, w, &cf, BoundSelector::Webb).unwrap();
        assert_eq!((r.nn_index, r.nn_distance), (7, 0.0));
        for seed in 0..10 {
            let r = search_random_order(&q, &set, w, &cf, BoundSelector::Webb, seed).unwrap();
            assert_eq!((r.nn_index, r.nn_distance), (7, 0.0));
            assert!(r.dtw_calls <= set.len() as u64);
        }
    }

    #[test]
    fn identical_candidates_stop_after_one_dtw() {
        let q = ts(vec![0.5, 1.0, -1.0, 2.0, 0.0, 0.0, 1.0, 3.0]);
        let set = CandidateSet::new(vec![q.clone(); 6], Window(2)).unwrap();
        let cf = CostFunction::absolute();
        let r = search_sorted(&q, &set, Window(2), &cf, BoundSelector::Keogh).unwrap();
        assert_eq!(r.dtw_calls, 1);
        assert_eq!(r.nn_index, 0);
    }

    #[test]
    fn matches_exhaustive_search() {
        let cf = CostFunction::squared();
        for seed in 0..5 {
            let (q, train) = random_set(seed, 20, 30);
            let w = Window(4);
            let expect = exhaustive(&q, &train, w, &cf);
            let set = CandidateSet::new(train, w).unwrap();
            for sel in [BoundSelector::None, BoundSelector::Webb] {
                let r = search_random_order(&q, &set, w, &cf, sel, seed).unwrap();
                assert_eq!((r.nn_index, r.nn_distance), expect);
            }
            let r = search_sorted(&q, &set, w, &cf, BoundSelector::Webb).unwrap();
            assert_eq!((r.nn_index, r.nn_distance), expect);
        }
    }

    #[test]
    fn errors() {
        let cf = CostFunction::squared();
        let q = ts(vec![0.0; 8]);
        assert!(matches!(CandidateSet::new(vec![], Window(1)), Err(Error::EmptyTrainingSet)));
        let set = CandidateSet::new(vec![q.clone()], Window(1)).unwrap();
        assert!(matches!(
            search_sorted(&q, &set, Window(1), &cf, BoundSelector::None),
            Err(Error::BoundRequired)
        ));
        assert!(matches!(
            search_sorted(&q, &set, Window(2), &cf, BoundSelector::Keogh),
            Err(Error::WindowMismatch { .. })
        ));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let (q, train) = random_set(11, 30, 20);
        let w = Window(2);
        let set = CandidateSet::new(train, w).unwrap();
        let cf = CostFunction::absolute();
        let a = search_random_order(&q, &set, w, &cf, BoundSelector::Improved, 99).unwrap();
        let b = search_random_order(&q, &set, w, &cf, BoundSelector::Improved, 99).unwrap();
        assert!(a.same_work(&b));
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..10)
            .flat_map(|r| (0..10).map(move |q| derive_seed(42, r, q)))
            .collect();
        assert_eq!(s.len(), 100);
    }
}
