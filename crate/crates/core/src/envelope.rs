//! Sliding-window upper/lower envelopes in O(len) using monotonic deques,
//! plus the derived sequences built on top of them.

use std::collections::VecDeque;

use crate::error::Result;
use crate::series::{check_lengths, TimeSeries, Window};

/// Pointwise max (`upper`) and min (`lower`) of a sequence over
/// `[i - w, i + w]`, clipped to the sequence bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopePair {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
    pub window: Window,
}

impl EnvelopePair {
    pub fn from_values(values: &[f64], w: Window) -> Self {
        let mut env = EnvelopePair {
            upper: Vec::with_capacity(values.len()),
            lower: Vec::with_capacity(values.len()),
            window: w,
        };
        let mut scratch = EnvelopeScratch::default();
        envelopes_into(values, w, &mut env.upper, &mut env.lower, &mut scratch);
        env
    }

    pub fn len(&self) -> usize {
        self.upper.len()
    }

    pub fn is_empty(&self) -> bool {
        self.upper.is_empty()
    }
}

pub fn compute_envelopes(s: &TimeSeries, w: Window) -> EnvelopePair {
    EnvelopePair::from_values(s.values(), w)
}

/// Deque storage reused across envelope computations.
#[derive(Debug, Default, Clone)]
pub struct EnvelopeScratch {
    max_q: VecDeque<usize>,
    min_q: VecDeque<usize>,
}

/// Writes the envelopes of `values` into `upper` / `lower` (cleared first).
///
/// Each index enters and leaves each deque once. Equal values evict older
/// indices, so a deque always holds the most recent index of a tie.
pub fn envelopes_into(
    values: &[f64],
    w: Window,
    upper: &mut Vec<f64>,
    lower: &mut Vec<f64>,
    scratch: &mut EnvelopeScratch,
) {
    let len = values.len();
    let w = w.get().min(len.saturating_sub(1));
    upper.clear();
    lower.clear();
    upper.resize(len, 0.0);
    lower.resize(len, 0.0);
    let max_q = &mut scratch.max_q;
    let min_q = &mut scratch.min_q;
    max_q.clear();
    min_q.clear();

    for r in 0..len + w {
        if r < len {
            let v = values[r];
            while max_q.back().is_some_and(|&k| values[k] <= v) {
                max_q.pop_back();
            }
            max_q.push_back(r);
            while min_q.back().is_some_and(|&k| values[k] >= v) {
                min_q.pop_back();
            }
            min_q.push_back(r);
        }
        if r < w {
            continue;
        }
        let i = r - w;
        while max_q.front().is_some_and(|&k| k + w < i) {
            max_q.pop_front();
        }
        while min_q.front().is_some_and(|&k| k + w < i) {
            min_q.pop_front();
        }
        upper[i] = values[max_q[0]];
        lower[i] = values[min_q[0]];
    }
}

/// Envelopes of an envelope: the upper envelope of the lower envelope and
/// the lower envelope of the upper envelope, both with the source window.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivedEnvelopes {
    pub upper_of_lower: Vec<f64>,
    pub lower_of_upper: Vec<f64>,
}

impl DerivedEnvelopes {
    pub fn from_envelopes(env: &EnvelopePair) -> Self {
        let of_lower = EnvelopePair::from_values(&env.lower, env.window);
        let of_upper = EnvelopePair::from_values(&env.upper, env.window);
        Self {
            upper_of_lower: of_lower.upper,
            lower_of_upper: of_upper.lower,
        }
    }
}

/// A series clamped pointwise into another series' envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub values: Vec<f64>,
}

pub fn compute_projection(a: &TimeSeries, env_b: &EnvelopePair) -> Result<Projection> {
    check_lengths(a.len(), env_b.len())?;
    let mut values = Vec::with_capacity(a.len());
    projection_into(a.values(), env_b, &mut values);
    Ok(Projection { values })
}

pub(crate) fn project(a: f64, lower: f64, upper: f64) -> f64 {
    if a > upper {
        upper
    } else if a < lower {
        lower
    } else {
        a
    }
}

pub(crate) fn projection_into(a: &[f64], env_b: &EnvelopePair, out: &mut Vec<f64>) {
    out.clear();
    out.extend(
        a.iter()
            .zip(env_b.lower.iter().zip(&env_b.upper))
            .map(|(&x, (&lo, &hi))| project(x, lo, hi)),
    );
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::fixtures::{example_a, example_b};

    fn naive(values: &[f64], w: usize) -> (Vec<f64>, Vec<f64>) {
        let n = values.len();
        (0..n)
            .map(|i| {
                let window = &values[i.saturating_sub(w)..=(i + w).min(n - 1)];
                let hi = window.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = window.iter().cloned().fold(f64::INFINITY, f64::min);
                (hi, lo)
            })
            .unzip()
    }

    #[test]
    fn constant_series() {
        let env = EnvelopePair::from_values(&[5.0, 5.0, 5.0], Window(2));
        assert_eq!(env.upper, vec![5.0; 3]);
        assert_eq!(env.lower, vec![5.0; 3]);
    }

    #[test]
    fn full_width_window() {
        let b = example_b();
        let env = compute_envelopes(&b, Window(10));
        assert!(env.upper.iter().all(|&u| u == 1.0));
        assert!(env.lower.iter().all(|&l| l == -4.0));
        let env = compute_envelopes(&b, Window(50));
        assert!(env.upper.iter().all(|&u| u == 1.0));
    }

    #[test]
    fn worked_example_envelope() {
        let env = compute_envelopes(&example_b(), Window(1));
        assert_eq!(env.upper, vec![1., 1., 1., 1., -1., -1., -1., 1., 1., 1., 0.]);
        assert_eq!(env.lower, vec![-1., -1., -1., -1., -4., -4., -4., -4., -1., -1., -1.]);
        let (u, l) = naive(example_b().values(), 1);
        assert_eq!(env.upper, u);
        assert_eq!(env.lower, l);
    }

    #[test]
    fn projection_cases() {
        let b = example_b();
        let env = compute_envelopes(&b, Window(1));
        // inside everywhere: identity
        let inside = TimeSeries::new(env.lower.clone()).unwrap();
        assert_eq!(compute_projection(&inside, &env).unwrap().values, env.lower);
        // above everywhere: upper clamp
        let above = TimeSeries::new(vec![10.0; 11]).unwrap();
        assert_eq!(compute_projection(&above, &env).unwrap().values, env.upper);
        // worked example, evaluated clause by clause
        let p = compute_projection(&example_a(), &env).unwrap();
        assert_eq!(p.values, vec![-1., 1., -1., 1., -2., -1., -1., 1., -1., 0., 0.]);
    }

    #[test]
    fn derived_envelope_ordering() {
        let env = compute_envelopes(&example_b(), Window(1));
        let d = DerivedEnvelopes::from_envelopes(&env);
        for i in 0..env.len() {
            assert!(d.lower_of_upper[i] >= env.lower[i]);
            assert!(d.upper_of_lower[i] <= env.upper[i]);
        }
    }

    fn series_and_window() -> impl Strategy<Value = (Vec<f64>, usize)> {
        (1usize..64).prop_flat_map(|n| {
            (
                prop::collection::vec(
                    prop_oneof![(-5i32..5).prop_map(f64::from), -100.0f64..100.0],
                    n,
                ),
                0usize..=n + 2,
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn streaming_matches_naive((values, w) in series_and_window()) {
            let env = EnvelopePair::from_values(&values, Window(w));
            let (u, l) = naive(&values, w);
            prop_assert_eq!(&env.upper, &u);
            prop_assert_eq!(&env.lower, &l);
            for i in 0..values.len() {
                prop_assert!(env.lower[i] <= values[i] && values[i] <= env.upper[i]);
            }
        }

        #[test]
        fn envelopes_nest((values, w) in series_and_window()) {
            let narrow = EnvelopePair::from_values(&values, Window(w));
            let wide = EnvelopePair::from_values(&values, Window(w + 1));
            for i in 0..values.len() {
                prop_assert!(wide.upper[i] >= narrow.upper[i]);
                prop_assert!(wide.lower[i] <= narrow.lower[i]);
            }
            let d = DerivedEnvelopes::from_envelopes(&narrow);
            for i in 0..values.len() {
                prop_assert!(d.lower_of_upper[i] >= narrow.lower[i]);
                prop_assert!(d.upper_of_lower[i] <= narrow.upper[i]);
            }
        }

        #[test]
        fn projection_is_idempotent((values, w) in series_and_window(), shift in -3.0f64..3.0) {
            let b = TimeSeries::new(values.clone()).unwrap();
            let a = TimeSeries::new(values.iter().rev().map(|v| v + shift).collect()).unwrap();
            let env = compute_envelopes(&b, Window(w));
            let p = compute_projection(&a, &env).unwrap();
            for i in 0..values.len() {
                prop_assert!(env.lower[i] <= p.values[i] && p.values[i] <= env.upper[i]);
            }
            let again = compute_projection(&TimeSeries::new(p.values.clone()).unwrap(), &env).unwrap();
            prop_assert_eq!(again.values, p.values);
        }
    }
}
