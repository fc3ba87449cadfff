//! Lower bounds on windowed DTW.
//!
//! Every bound accumulates non-negative terms, so any partial sum is itself a
//! valid lower bound. With a cutoff, accumulation stops as soon as the running
//! value exceeds it and the partial value is returned with `abandoned = true`.

mod classic;
mod selector;
mod webb;

use std::fmt;

pub use classic::{band_min, lb_enhanced, lb_improved, lb_keogh, BandSide, BandSpec};
pub use selector::BoundSelector;
pub use webb::{
    compute_freeness, lb_petitjean, lb_petitjean_nolr, lb_webb, lb_webb_enhanced, lb_webb_nolr,
    lb_webb_star, min_lr_paths, FreenessFlags, LrPathsValue,
};

pub(crate) use classic::{enhanced_kernel, improved_kernel, keogh_kernel};
pub(crate) use webb::{petitjean_kernel, webb_kernel, WebbPrefix, WebbVariant};

use crate::envelope::{DerivedEnvelopes, EnvelopePair, EnvelopeScratch};
use crate::series::{CostFunction, TimeSeries, Window};

/// Library default for the number of boundary bands in the Enhanced bounds.
pub const DEFAULT_K: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    pub value: f64,
    /// True when accumulation stopped early because `value > cutoff`.
    pub abandoned: bool,
    pub terms_evaluated: usize,
}

/// Which rule produced a term of a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clause {
    LrPaths,
    LeftBand,
    RightBand,
    /// `A_i` above the upper envelope of `B`.
    AboveEnvelope,
    BelowEnvelope,
    Inside,
    /// Distance from `B_j` to the envelope of the projection.
    ProjectionAbove,
    ProjectionBelow,
    /// Distance to `A`'s envelope less the slack already claimed.
    RefinedAbove,
    RefinedBelow,
    FreeAbove,
    FreeBelow,
    /// Distance straight to the envelope-of-envelope (the starred variant).
    EnvelopeOfEnvelopeAbove,
    EnvelopeOfEnvelopeBelow,
    NoContribution,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Clause::LrPaths => "lr_paths",
            Clause::LeftBand => "left_band",
            Clause::RightBand => "right_band",
            Clause::AboveEnvelope => "above_envelope",
            Clause::BelowEnvelope => "below_envelope",
            Clause::Inside => "inside",
            Clause::ProjectionAbove => "projection_above",
            Clause::ProjectionBelow => "projection_below",
            Clause::RefinedAbove => "refined_above",
            Clause::RefinedBelow => "refined_below",
            Clause::FreeAbove => "free_above",
            Clause::FreeBelow => "free_below",
            Clause::EnvelopeOfEnvelopeAbove => "env_of_env_above",
            Clause::EnvelopeOfEnvelopeBelow => "env_of_env_below",
            Clause::NoContribution => "none",
        };
        f.write_str(s)
    }
}

/// Which series a term is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    /// Constant-size boundary terms (paths or bands).
    Boundary,
    /// Pass over `A` against `B`'s envelope.
    Bridge,
    /// Pass over `B`.
    Second,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Boundary => "boundary",
            Phase::Bridge => "bridge",
            Phase::Second => "second",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub phase: Phase,
    /// Zero-based element index (band number for band terms).
    pub index: usize,
    pub clause: Clause,
    pub value: f64,
}

/// Receives per-term contributions. `()` discards them at no cost.
pub trait ContributionSink {
    fn record(&mut self, c: Contribution);
}

impl ContributionSink for () {
    #[inline(always)]
    fn record(&mut self, _: Contribution) {}
}

impl ContributionSink for Vec<Contribution> {
    fn record(&mut self, c: Contribution) {
        self.push(c);
    }
}

pub(crate) struct Acc<'s, S: ContributionSink> {
    pub value: f64,
    pub terms: usize,
    cutoff: f64,
    sink: &'s mut S,
}

impl<'s, S: ContributionSink> Acc<'s, S> {
    pub fn new(cutoff: Option<f64>, sink: &'s mut S) -> Self {
        Self {
            value: 0.0,
            terms: 0,
            cutoff: cutoff.unwrap_or(f64::INFINITY),
            sink,
        }
    }

    #[inline(always)]
    pub fn add(&mut self, phase: Phase, index: usize, clause: Clause, v: f64) {
        self.value += v;
        self.terms += 1;
        self.sink.record(Contribution {
            phase,
            index,
            clause,
            value: v,
        });
    }

    #[inline(always)]
    pub fn exceeded(&self) -> bool {
        self.value > self.cutoff
    }

    pub fn finish(self, abandoned: bool) -> BoundResult {
        BoundResult {
            value: self.value,
            abandoned,
            terms_evaluated: self.terms,
        }
    }
}

/// Per-worker buffers for bounds that build projections or freeness flags.
#[derive(Debug, Default, Clone)]
pub struct BoundScratch {
    pub(crate) projection: Vec<f64>,
    pub(crate) proj_upper: Vec<f64>,
    pub(crate) proj_lower: Vec<f64>,
    pub(crate) env: EnvelopeScratch,
    pub(crate) free_above: Vec<bool>,
    pub(crate) free_below: Vec<bool>,
}

/// A series together with everything the bounds need from it for one window:
/// its envelopes and the envelopes of those envelopes.
#[derive(Debug, Clone)]
pub struct PreparedSeries {
    pub series: TimeSeries,
    pub env: EnvelopePair,
    pub derived: DerivedEnvelopes,
}

impl PreparedSeries {
    pub fn new(series: TimeSeries, w: Window) -> Self {
        let env = EnvelopePair::from_values(series.values(), w);
        let derived = DerivedEnvelopes::from_envelopes(&env);
        Self {
            series,
            env,
            derived,
        }
    }

    pub fn values(&self) -> &[f64] {
        self.series.values()
    }

    pub fn window(&self) -> Window {
        self.env.window
    }
}

/// Slices for one (A, B) comparison handed to the kernels.
#[derive(Clone, Copy)]
pub(crate) struct Pair<'a> {
    pub a: &'a [f64],
    pub b: &'a [f64],
    pub env_a: &'a EnvelopePair,
    pub env_b: &'a EnvelopePair,
    pub derived_a: &'a DerivedEnvelopes,
    pub derived_b: &'a DerivedEnvelopes,
    pub w: Window,
    pub cf: &'a CostFunction,
}

impl<'a> Pair<'a> {
    pub fn of(a: &'a PreparedSeries, b: &'a PreparedSeries, cf: &'a CostFunction) -> Self {
        Self {
            a: a.values(),
            b: b.values(),
            env_a: &a.env,
            env_b: &b.env,
            derived_a: &a.derived,
            derived_b: &b.derived,
            w: b.env.window,
            cf,
        }
    }
}
