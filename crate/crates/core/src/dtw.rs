//! Exact windowed DTW by dynamic programming over two rolling rows.

use crate::error::Result;
use crate::series::{check_lengths, validate_pair, CostFunction, TimeSeries, Window};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtwResult {
    pub distance: f64,
    /// Number of matrix cells for which the pairwise cost was evaluated.
    pub cells_computed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtwOutcome {
    Complete(DtwResult),
    /// Every cell of some row reached the cutoff, so the distance is `>= cutoff`.
    Abandoned { cells_computed: u64 },
}

impl DtwOutcome {
    pub fn distance(&self) -> Option<f64> {
        match self {
            DtwOutcome::Complete(r) => Some(r.distance),
            DtwOutcome::Abandoned { .. } => None,
        }
    }

    pub fn cells_computed(&self) -> u64 {
        match self {
            DtwOutcome::Complete(r) => r.cells_computed,
            DtwOutcome::Abandoned { cells_computed } => *cells_computed,
        }
    }

    pub fn is_abandoned(&self) -> bool {
        matches!(self, DtwOutcome::Abandoned { .. })
    }
}

pub fn dtw(a: &TimeSeries, b: &TimeSeries, w: Window, cf: &CostFunction) -> Result<DtwResult> {
    validate_pair(a, b)?;
    let mut scratch = DtwScratch::default();
    match dtw_slices(a.values(), b.values(), w, cf, f64::INFINITY, &mut scratch) {
        DtwOutcome::Complete(r) => Ok(r),
        DtwOutcome::Abandoned { .. } => unreachable!("infinite cutoff never abandons"),
    }
}

/// DTW that gives up once the distance is certain to be `>= cutoff`.
pub fn dtw_early_abandon(
    a: &TimeSeries,
    b: &TimeSeries,
    w: Window,
    cf: &CostFunction,
    cutoff: f64,
) -> Result<DtwOutcome> {
    validate_pair(a, b)?;
    let mut scratch = DtwScratch::default();
    Ok(dtw_slices(a.values(), b.values(), w, cf, cutoff, &mut scratch))
}

/// Reusable row buffers for repeated DTW calls in a search loop.
#[derive(Debug, Default, Clone)]
pub struct DtwScratch {
    prev: Vec<f64>,
    curr: Vec<f64>,
}

/// Slice-level kernel. Rows index `a`, columns index `b`; only cells with
/// `|i - j| <= w` are evaluated.
pub fn dtw_slices(
    a: &[f64],
    b: &[f64],
    w: Window,
    cf: &CostFunction,
    cutoff: f64,
    scratch: &mut DtwScratch,
) -> DtwOutcome {
    check_lengths(a.len(), b.len()).expect("dtw_slices requires equal lengths");
    let len = a.len();
    let w = w.get().min(len - 1);

    scratch.prev.clear();
    scratch.prev.resize(len, f64::INFINITY);
    scratch.curr.clear();
    scratch.curr.resize(len, f64::INFINITY);
    let mut cells = 0u64;

    for i in 0..len {
        let (prev, curr) = (&scratch.prev, &mut scratch.curr);
        let lo = i.saturating_sub(w);
        let hi = (i + w).min(len - 1);
        let mut row_min = f64::INFINITY;
        for j in lo..=hi {
            let cost = cf.eval(a[i], b[j]);
            // The windowed recurrence, case by case. At the lower band edge
            // (i = j + w) the cell (i, j-1) lies outside the band; at the
            // upper edge (j = i + w) the cell (i-1, j) does.
            let d = if i == 0 && j == 0 {
                cost
            } else if i == 0 {
                cost + curr[j - 1]
            } else if j == 0 {
                cost + prev[j]
            } else if w == 0 {
                cost + prev[j - 1]
            } else if i == j + w {
                cost + prev[j - 1].min(prev[j])
            } else if j == i + w {
                cost + prev[j - 1].min(curr[j - 1])
            } else {
                cost + prev[j - 1].min(curr[j - 1]).min(prev[j])
            };
            curr[j] = d;
            row_min = row_min.min(d);
        }
        cells += (hi - lo + 1) as u64;
        if row_min >= cutoff {
            return DtwOutcome::Abandoned {
                cells_computed: cells,
            };
        }
        std::mem::swap(&mut scratch.prev, &mut scratch.curr);
    }

    DtwOutcome::Complete(DtwResult {
        distance: scratch.prev[len - 1],
        cells_computed: cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{example_a, example_b};

    fn ts(v: &[f64]) -> TimeSeries {
        TimeSeries::new(v.to_vec()).unwrap()
    }

    #[test]
    fn worked_example_is_53() {
        // Exhaustive enumeration of every w=1 warping path also gives 53.
        let r = dtw(&example_a(), &example_b(), Window(1), &CostFunction::squared()).unwrap();
        assert_eq!(r.distance, 53.0);
        // 11 rows, two edge rows with 2 cells, nine with 3
        assert_eq!(r.cells_computed, 31);
    }

    #[test]
    fn identical_series_cost_zero() {
        let a = example_a();
        for w in 0..12 {
            assert_eq!(dtw(&a, &a, Window(w), &CostFunction::squared()).unwrap().distance, 0.0);
        }
    }

    #[test]
    fn single_element() {
        let r = dtw(&ts(&[2.0]), &ts(&[-1.0]), Window(3), &CostFunction::squared()).unwrap();
        assert_eq!(r.distance, 9.0);
        assert_eq!(r.cells_computed, 1);
    }

    #[test]
    fn zero_window_is_pointwise_sum() {
        let (a, b) = (example_a(), example_b());
        let sum: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y) * (x - y)).sum();
        assert_eq!(dtw(&a, &b, Window(0), &CostFunction::squared()).unwrap().distance, sum);
    }

    #[test]
    fn early_abandon_cases() {
        let (a, b) = (example_a(), example_b());
        let cf = CostFunction::squared();
        let out = dtw_early_abandon(&a, &b, Window(1), &cf, 100.0).unwrap();
        assert_eq!(out.distance(), Some(53.0));
        let out = dtw_early_abandon(&a, &b, Window(1), &cf, 10.0).unwrap();
        assert!(out.is_abandoned());
        // full-matrix row minima are 4, 4, 4, 13, ...: row 4 crosses the cutoff
        assert_eq!(out.cells_computed(), 11);
        let out = dtw_early_abandon(&a, &a, Window(1), &cf, 0.0).unwrap();
        assert!(out.is_abandoned());
    }

    #[test]
    fn length_mismatch_is_error() {
        let err = dtw(&ts(&[1.0, 2.0]), &ts(&[1.0]), Window(1), &CostFunction::absolute());
        assert!(err.is_err());
    }
}
