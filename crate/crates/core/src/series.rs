//! Value types shared by every other module: series, windows and pairwise
//! cost functions.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// An immutable, finite, non-empty sequence of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    values: Arc<[f64]>,
    id: Option<String>,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        Self::build(values, None)
    }

    pub fn with_id(values: Vec<f64>, id: impl Into<String>) -> Result<Self> {
        Self::build(values, Some(id.into()))
    }

    fn build(values: Vec<f64>, id: Option<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                series: id.clone().unwrap_or_else(|| "<anonymous>".into()),
                index,
            });
        }
        Ok(Self {
            values: values.into(),
            id,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Always false; construction rejects empty input.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn label(&self) -> String {
        self.id.clone().unwrap_or_else(|| "<anonymous>".into())
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// Sakoe-Chiba half-width. Any value `>= len - 1` is unconstrained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Window(pub usize);

impl Window {
    pub fn new(w: usize) -> Self {
        Window(w)
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// Indices `j` with `|i - j| <= w`, clipped to `0..len`.
    #[inline]
    pub fn range(self, i: usize, len: usize) -> std::ops::RangeInclusive<usize> {
        i.saturating_sub(self.0)..=(i + self.0).min(len - 1)
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    SquaredDifference,
    AbsoluteDifference,
    Custom,
}

type CostFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Pairwise alignment cost together with the capability flags that decide
/// which lower bounds may be used with it.
#[derive(Clone)]
pub struct CostFunction {
    kind: CostKind,
    custom: Option<Arc<CostFn>>,
    triangle_surplus: bool,
    monotone_in_gap: bool,
}

impl CostFunction {
    pub fn squared() -> Self {
        Self {
            kind: CostKind::SquaredDifference,
            custom: None,
            triangle_surplus: true,
            monotone_in_gap: true,
        }
    }

    pub fn absolute() -> Self {
        Self {
            kind: CostKind::AbsoluteDifference,
            custom: None,
            triangle_surplus: true,
            monotone_in_gap: true,
        }
    }

    /// A user-supplied cost. Both capability flags must be stated; bounds
    /// whose admissibility class is not declared reject the function.
    ///
    /// `triangle_surplus` asserts that for `a <= x <= y <= b` (or the mirrored
    /// ordering) `f(a, b) >= f(a, y) + f(b, x) - f(x, y)`. `monotone_in_gap`
    /// asserts that `f(a, b)` is non-decreasing in `|a - b|`.
    pub fn custom<F>(f: F, triangle_surplus: bool, monotone_in_gap: bool) -> Self
    where
        F: Fn(f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: CostKind::Custom,
            custom: Some(Arc::new(f)),
            triangle_surplus,
            monotone_in_gap,
        }
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn satisfies_triangle_surplus(&self) -> bool {
        self.triangle_surplus
    }

    pub fn monotone_in_gap(&self) -> bool {
        self.monotone_in_gap
    }

    #[inline(always)]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            CostKind::SquaredDifference => {
                let d = x - y;
                d * d
            }
            CostKind::AbsoluteDifference => (x - y).abs(),
            CostKind::Custom => (self.custom.as_ref().expect("custom cost without function"))(x, y),
        }
    }

    pub(crate) fn require_monotone(&self, bound: &'static str) -> Result<()> {
        if self.monotone_in_gap {
            Ok(())
        } else {
            Err(Error::CostFunctionInadmissible {
                bound,
                requirement: "monotone_in_gap",
            })
        }
    }

    pub(crate) fn require_triangle_surplus(&self, bound: &'static str) -> Result<()> {
        if self.triangle_surplus {
            Ok(())
        } else {
            Err(Error::CostFunctionInadmissible {
                bound,
                requirement: "satisfies_triangle_surplus",
            })
        }
    }
}

impl fmt::Debug for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CostFunction")
            .field("kind", &self.kind)
            .field("triangle_surplus", &self.triangle_surplus)
            .field("monotone_in_gap", &self.monotone_in_gap)
            .finish()
    }
}

impl fmt::Display for CostFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            CostKind::SquaredDifference => f.write_str("squared"),
            CostKind::AbsoluteDifference => f.write_str("abs"),
            CostKind::Custom => f.write_str("custom"),
        }
    }
}

/// Pairwise cost of aligning `x` with `y`.
#[inline(always)]
pub fn delta(cf: &CostFunction, x: f64, y: f64) -> f64 {
    cf.eval(x, y)
}

/// Checks the equal-length, all-finite precondition shared by every
/// pairwise operation.
pub fn validate_pair(a: &TimeSeries, b: &TimeSeries) -> Result<()> {
    // TimeSeries construction already guarantees finiteness; re-checked here
    // because the operation is part of the public contract.
    for s in [a, b] {
        if let Some(index) = s.values().iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue {
                series: s.label(),
                index,
            });
        }
    }
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(())
}

pub(crate) fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(Error::LengthMismatch(a, b))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn squared_of_example_pair() {
        assert_eq!(delta(&CostFunction::squared(), 1.0, -4.0), 25.0);
        assert_eq!(delta(&CostFunction::squared(), -1.0, 1.0), 4.0);
        assert_eq!(delta(&CostFunction::absolute(), 3.0, 3.0), 0.0);
    }

    #[test]
    fn validate_pair_cases() {
        let a = TimeSeries::new(vec![0.0; 11]).unwrap();
        let b = TimeSeries::new(vec![1.0; 11]).unwrap();
        let c = TimeSeries::new(vec![1.0; 12]).unwrap();
        assert!(validate_pair(&a, &b).is_ok());
        assert!(matches!(
            validate_pair(&a, &c),
            Err(Error::LengthMismatch(11, 12))
        ));
    }

    #[test]
    fn nan_rejected_at_construction() {
        let err = TimeSeries::with_id(vec![0.0, f64::NAN, 1.0], "s").unwrap_err();
        match err {
            Error::NonFiniteValue { series, index } => {
                assert_eq!(series, "s");
                assert_eq!(index, 1);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(TimeSeries::new(vec![f64::INFINITY]).is_err());
        assert!(matches!(TimeSeries::new(vec![]), Err(Error::EmptySeries)));
    }

    #[test]
    fn custom_flags_are_reported() {
        let cf = CostFunction::custom(|x, y| (x - y).abs().sqrt(), false, true);
        assert_eq!(cf.kind(), CostKind::Custom);
        assert!(cf.require_monotone("LB_Keogh").is_ok());
        assert!(cf.require_triangle_surplus("LB_Webb").is_err());
        assert_eq!(cf.eval(4.0, 0.0), 2.0);
    }

    #[test]
    fn window_range_clips() {
        assert_eq!(Window(2).range(0, 5), 0..=2);
        assert_eq!(Window(2).range(4, 5), 2..=4);
        assert_eq!(Window(10).range(2, 5), 0..=4);
    }

    #[test]
    fn monotone_in_gap_on_grid() {
        for cf in [CostFunction::squared(), CostFunction::absolute()] {
            for &a in &[-3.0, -0.5, 0.0, 2.25] {
                let mut prev = 0.0;
                for step in 0..200 {
                    let gap = step as f64 * 0.05;
                    for b in [a + gap, a - gap] {
                        let v = delta(&cf, a, b);
                        assert!(v >= prev, "{cf} not monotone at a={a}, gap={gap}");
                    }
                    prev = delta(&cf, a, a + gap);
                }
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn delta_is_symmetric(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            for cf in [CostFunction::squared(), CostFunction::absolute()] {
                prop_assert_eq!(delta(&cf, x, y), delta(&cf, y, x));
                prop_assert_eq!(delta(&cf, x, x), 0.0);
            }
        }
    }

    // Precondition of the Petitjean and Webb bounds, checked for both built-ins.
    #[test]
    fn triangle_surplus_holds_for_builtins() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for cf in [CostFunction::squared(), CostFunction::absolute()] {
            for _ in 0..10_000 {
                let mut q: [f64; 4] = std::array::from_fn(|_| rng.gen_range(-10.0..10.0));
                q.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let [ai, x, y, bj] = q;
                let lhs = delta(&cf, ai, bj);
                let rhs = delta(&cf, ai, y) + delta(&cf, bj, x) - delta(&cf, x, y);
                assert!(lhs + 1e-9 >= rhs, "{cf}: {lhs} < {rhs} for {q:?}");
                // mirrored ordering
                let lhs = delta(&cf, bj, ai);
                let rhs = delta(&cf, bj, x) + delta(&cf, ai, y) - delta(&cf, y, x);
                assert!(lhs + 1e-9 >= rhs);
            }
        }
    }
}
