//! Bounds that add a second pass over `B` on top of a Keogh bridge:
//! LB_Petitjean, LB_Webb and their variants.

use std::ops::Range;

use super::classic::{band_phase, check_k, keogh_term};
use super::{Acc, BoundResult, BoundScratch, Clause, ContributionSink, Pair, Phase};
use crate::envelope::{envelopes_into, DerivedEnvelopes, EnvelopePair};
use crate::error::{Error, Result};
use crate::series::{check_lengths, validate_pair, CostFunction, CostKind, TimeSeries, Window};

/// Shortest series for which the three-step boundary paths are defined.
pub const MIN_LR_LEN: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrPathsValue {
    pub value: f64,
}

/// Corner cells plus the cheapest of seven two-step paths leaving the start
/// corner and the cheapest of the seven mirrored paths reaching the end.
///
/// Some candidates leave the window when `w = 1` (the path through `(1, 3)`
/// for example). Minimising over a superset of the feasible paths only
/// loosens the value, so the list is used as is.
pub(crate) fn lr_paths(a: &[f64], b: &[f64], cf: &CostFunction) -> f64 {
    let d = |i: usize, j: usize| cf.eval(a[i], b[j]);
    let m = a.len() - 1;
    let start = [
        d(0, 1) + d(0, 2),
        d(0, 1) + d(1, 2),
        d(1, 1) + d(1, 2),
        d(1, 1) + d(2, 2),
        d(1, 1) + d(2, 1),
        d(1, 0) + d(2, 1),
        d(1, 0) + d(2, 0),
    ];
    let end = [
        d(m, m - 1) + d(m, m - 2),
        d(m, m - 1) + d(m - 1, m - 2),
        d(m - 1, m - 1) + d(m - 1, m - 2),
        d(m - 1, m - 1) + d(m - 2, m - 2),
        d(m - 1, m - 1) + d(m - 2, m - 1),
        d(m - 1, m) + d(m - 2, m - 1),
        d(m - 1, m) + d(m - 2, m),
    ];
    let min = |xs: [f64; 7]| xs.into_iter().fold(f64::INFINITY, f64::min);
    d(0, 0) + d(m, m) + min(start) + min(end)
}

fn require_lr_len(bound: &'static str, len: usize) -> Result<()> {
    if len < MIN_LR_LEN {
        Err(Error::SeriesTooShort {
            bound,
            len,
            min: MIN_LR_LEN,
        })
    } else {
        Ok(())
    }
}

pub fn min_lr_paths(a: &TimeSeries, b: &TimeSeries, cf: &CostFunction) -> Result<LrPathsValue> {
    validate_pair(a, b)?;
    require_lr_len("MinLRPaths", a.len())?;
    Ok(LrPathsValue {
        value: lr_paths(a.values(), b.values(), cf),
    })
}

/// `with_lr` selects the boundary paths and the bridge range `4..=len-3`
/// (one-based); without them the whole series is bridged.
pub(crate) fn petitjean_kernel<S: ContributionSink>(
    p: &Pair,
    with_lr: bool,
    cutoff: Option<f64>,
    scratch: &mut BoundScratch,
    sink: &mut S,
) -> BoundResult {
    let (a, b, cf) = (p.a, p.b, p.cf);
    let len = a.len();
    let mut acc = Acc::new(cutoff, sink);
    let range = if with_lr {
        acc.add(Phase::Boundary, 0, Clause::LrPaths, lr_paths(a, b, cf));
        3..len - 3
    } else {
        0..len
    };

    // Outside the bridge range P keeps A's own values. Any choice inside B's
    // envelope would be sound; A's values keep P's envelope no tighter than
    // the full projection's at those positions.
    let proj = &mut scratch.projection;
    proj.clear();
    proj.extend_from_slice(a);
    for i in range.clone() {
        let (lo, hi) = (p.env_b.lower[i], p.env_b.upper[i]);
        let (v, clause) = keogh_term(cf, a[i], lo, hi);
        proj[i] = match clause {
            Clause::AboveEnvelope => hi,
            Clause::BelowEnvelope => lo,
            _ => a[i],
        };
        acc.add(Phase::Bridge, i, clause, v);
        if acc.exceeded() {
            return acc.finish(true);
        }
    }

    envelopes_into(
        proj,
        p.w,
        &mut scratch.proj_upper,
        &mut scratch.proj_lower,
        &mut scratch.env,
    );
    let (up, lp) = (&scratch.proj_upper, &scratch.proj_lower);
    let (ua, la) = (&p.env_a.upper, &p.env_a.lower);
    for j in range {
        let bj = b[j];
        let (v, clause) = if bj > up[j] && up[j] > ua[j] {
            (cf.eval(bj, ua[j]) - cf.eval(up[j], ua[j]), Clause::RefinedAbove)
        } else if bj < lp[j] && lp[j] < la[j] {
            (cf.eval(bj, la[j]) - cf.eval(lp[j], la[j]), Clause::RefinedBelow)
        } else if bj > up[j] {
            (cf.eval(bj, up[j]), Clause::ProjectionAbove)
        } else if bj < lp[j] {
            (cf.eval(bj, lp[j]), Clause::ProjectionBelow)
        } else {
            (0.0, Clause::NoContribution)
        };
        acc.add(Phase::Second, j, clause, v);
        if acc.exceeded() {
            return acc.finish(true);
        }
    }
    acc.finish(false)
}

fn two_sided_checks(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
) -> Result<()> {
    validate_pair(a, b)?;
    check_lengths(a.len(), env_a.len())?;
    check_lengths(a.len(), env_b.len())
}

fn check_derived(len: usize, d: &DerivedEnvelopes) -> Result<()> {
    check_lengths(len, d.upper_of_lower.len())?;
    check_lengths(len, d.lower_of_upper.len())
}

pub fn lb_petitjean(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    cf.require_triangle_surplus("LB_Petitjean")?;
    two_sided_checks(a, b, env_a, env_b)?;
    require_lr_len("LB_Petitjean", a.len())?;
    petitjean_public(a, b, env_a, env_b, w, cf, cutoff, true)
}

pub fn lb_petitjean_nolr(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    cf.require_triangle_surplus("LB_Petitjean_NoLR")?;
    two_sided_checks(a, b, env_a, env_b)?;
    petitjean_public(a, b, env_a, env_b, w, cf, cutoff, false)
}

#[allow(clippy::too_many_arguments)]
fn petitjean_public(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
    with_lr: bool,
) -> Result<BoundResult> {
    // Petitjean does not read the derived envelopes.
    let unused = DerivedEnvelopes {
        upper_of_lower: Vec::new(),
        lower_of_upper: Vec::new(),
    };
    let p = Pair {
        a: a.values(),
        b: b.values(),
        env_a,
        env_b,
        derived_a: &unused,
        derived_b: &unused,
        w,
        cf,
    };
    let mut scratch = BoundScratch::default();
    Ok(petitjean_kernel(&p, with_lr, cutoff, &mut scratch, &mut ()))
}

/// For each index `j` of the range: is `B_j` free above `A`'s upper envelope
/// (`free_above`) or free below its lower envelope (`free_below`)?
///
/// `B_j` is free above when every `A_i` of the range within `w` of `j` is
/// inside `B`'s envelope, or below it with `L^B_i <= L^{U^A}_i`. Free below is
/// the mirror image using `U^{L^A}`. Entries outside the range are false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreenessFlags {
    pub free_above: Vec<bool>,
    pub free_below: Vec<bool>,
}

/// Run-length form of the freeness predicates.
///
/// A counter holds the number of consecutive qualifying `A_i` ending at the
/// current index, starting at `w` so that positions before the range count
/// as qualifying. Once it exceeds `2w` the whole window of `j = i - w` is
/// clear. The trailing `w` positions are settled after the loop from the
/// final counter values.
///
/// Two corrections relative to the printed counter scheme. An index only
/// qualifies for the opposite flag when it also passes the derived-envelope
/// test (`L^B_i <= L^{U^A}_i`, or `U^B_i >= U^{L^A}_i`); without it the flags
/// can claim freeness the bound's proof does not support. And the flag set
/// inside the loop is the one for `i - w`, the centre of the window just
/// completed, with the tail starting at `hi + w + 1 - c`.
struct FreeCounter {
    w: usize,
    up: usize,
    down: usize,
}

impl FreeCounter {
    fn new(w: usize) -> Self {
        Self { w, up: w, down: w }
    }

    #[inline(always)]
    fn step(&mut self, i: usize, ok_above: bool, ok_below: bool, fa: &mut [bool], fb: &mut [bool]) {
        self.up = if ok_above { self.up + 1 } else { 0 };
        self.down = if ok_below { self.down + 1 } else { 0 };
        if self.up > 2 * self.w {
            fa[i - self.w] = true;
        }
        if self.down > 2 * self.w {
            fb[i - self.w] = true;
        }
    }

    fn finish(&self, range: Range<usize>, fa: &mut [bool], fb: &mut [bool]) {
        for (c, flags) in [(self.up, fa), (self.down, fb)] {
            let start = (range.end + self.w)
                .saturating_sub(c)
                .clamp(range.start, range.end);
            for f in &mut flags[start..range.end] {
                *f = true;
            }
        }
    }
}

#[inline(always)]
fn qualifies(ai: f64, lb: f64, ub: f64, lua: f64, ula: f64) -> (bool, bool) {
    if ai > ub {
        (false, ub >= ula)
    } else if ai < lb {
        (lb <= lua, false)
    } else {
        (true, true)
    }
}

pub(crate) fn freeness_into(
    a: &[f64],
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    w: usize,
    range: Range<usize>,
    fa: &mut Vec<bool>,
    fb: &mut Vec<bool>,
) {
    let len = a.len();
    fa.clear();
    fa.resize(len, false);
    fb.clear();
    fb.resize(len, false);
    if range.is_empty() {
        return;
    }
    let mut counter = FreeCounter::new(w);
    for i in range.clone() {
        let (above, below) = qualifies(
            a[i],
            env_b.lower[i],
            env_b.upper[i],
            derived_a.lower_of_upper[i],
            derived_a.upper_of_lower[i],
        );
        counter.step(i, above, below, fa, fb);
    }
    counter.finish(range, fa, fb);
}

/// `range` is zero-based and half-open, e.g. `k..len - k`.
/// `derived_a` holds the envelopes of `A`'s envelopes.
pub fn compute_freeness(
    a: &TimeSeries,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    w: Window,
    range: Range<usize>,
) -> Result<FreenessFlags> {
    check_lengths(a.len(), env_b.len())?;
    check_derived(a.len(), derived_a)?;
    if range.end > a.len() || range.start > range.end {
        return Err(Error::IndexOutOfRange {
            index: range.end,
            len: a.len(),
        });
    }
    let mut flags = FreenessFlags {
        free_above: Vec::new(),
        free_below: Vec::new(),
    };
    freeness_into(
        a.values(),
        env_b,
        derived_a,
        w.get(),
        range,
        &mut flags.free_above,
        &mut flags.free_below,
    );
    Ok(flags)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WebbPrefix {
    LrPaths,
    Bands(usize),
    Nothing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WebbVariant {
    Standard,
    Star,
}

pub(crate) fn webb_kernel<S: ContributionSink>(
    p: &Pair,
    prefix: WebbPrefix,
    variant: WebbVariant,
    cutoff: Option<f64>,
    scratch: &mut BoundScratch,
    sink: &mut S,
) -> BoundResult {
    let (a, b, cf, w) = (p.a, p.b, p.cf, p.w.get());
    let len = a.len();
    let mut acc = Acc::new(cutoff, sink);
    let range = match prefix {
        WebbPrefix::LrPaths => {
            acc.add(Phase::Boundary, 0, Clause::LrPaths, lr_paths(a, b, cf));
            3..len - 3
        }
        WebbPrefix::Bands(k) => {
            if band_phase(a, b, w, k, cf, &mut acc) {
                return acc.finish(true);
            }
            k..len - k
        }
        WebbPrefix::Nothing => 0..len,
    };

    let (fa, fb) = (&mut scratch.free_above, &mut scratch.free_below);
    fa.clear();
    fa.resize(len, false);
    fb.clear();
    fb.resize(len, false);
    let (lb, ub) = (&p.env_b.lower, &p.env_b.upper);
    let (lua, ula) = (&p.derived_a.lower_of_upper, &p.derived_a.upper_of_lower);
    let mut counter = FreeCounter::new(w);
    for i in range.clone() {
        let (v, clause) = keogh_term(cf, a[i], lb[i], ub[i]);
        acc.add(Phase::Bridge, i, clause, v);
        let (above, below) = qualifies(a[i], lb[i], ub[i], lua[i], ula[i]);
        counter.step(i, above, below, fa, fb);
        if acc.exceeded() {
            return acc.finish(true);
        }
    }
    if range.is_empty() {
        return acc.finish(false);
    }
    counter.finish(range.clone(), fa, fb);

    let (ua, la) = (&p.env_a.upper, &p.env_a.lower);
    let (ulb, lub) = (&p.derived_b.upper_of_lower, &p.derived_b.lower_of_upper);
    // With |x - y| the refined term |B - U^A| - |U^{L^B} - U^A| is exactly
    // |B - U^{L^B}|; the direct form is used so the two spellings cannot
    // round apart.
    let direct = variant == WebbVariant::Star || cf.kind() == CostKind::AbsoluteDifference;
    let star = variant == WebbVariant::Star;
    for j in range {
        let bj = b[j];
        let (v, clause) = if fa[j] && bj > ua[j] {
            (cf.eval(bj, ua[j]), Clause::FreeAbove)
        } else if fb[j] && bj < la[j] {
            (cf.eval(bj, la[j]), Clause::FreeBelow)
        } else if bj > ulb[j] && ulb[j] >= ua[j] {
            if star {
                (cf.eval(bj, ulb[j]), Clause::EnvelopeOfEnvelopeAbove)
            } else if direct {
                (cf.eval(bj, ulb[j]), Clause::RefinedAbove)
            } else {
                (cf.eval(bj, ua[j]) - cf.eval(ulb[j], ua[j]), Clause::RefinedAbove)
            }
        } else if bj < lub[j] && lub[j] <= la[j] {
            if star {
                (cf.eval(bj, lub[j]), Clause::EnvelopeOfEnvelopeBelow)
            } else if direct {
                (cf.eval(bj, lub[j]), Clause::RefinedBelow)
            } else {
                (cf.eval(bj, la[j]) - cf.eval(lub[j], la[j]), Clause::RefinedBelow)
            }
        } else {
            (0.0, Clause::NoContribution)
        };
        acc.add(Phase::Second, j, clause, v);
        if acc.exceeded() {
            return acc.finish(true);
        }
    }
    acc.finish(false)
}

/// Arguments shared by the public LB_Webb entry points. `derived_a` and
/// `derived_b` are the envelopes of the envelopes of `A` and of `B`; the
/// freeness test reads the former, the second pass the latter.
#[allow(clippy::too_many_arguments)]
fn webb_public(
    bound: &'static str,
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    derived_b: &DerivedEnvelopes,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
    prefix: WebbPrefix,
    variant: WebbVariant,
) -> Result<BoundResult> {
    match variant {
        WebbVariant::Standard => cf.require_triangle_surplus(bound)?,
        WebbVariant::Star => cf.require_monotone(bound)?,
    }
    two_sided_checks(a, b, env_a, env_b)?;
    check_derived(a.len(), derived_a)?;
    check_derived(a.len(), derived_b)?;
    match prefix {
        WebbPrefix::LrPaths => require_lr_len(bound, a.len())?,
        WebbPrefix::Bands(k) => check_k(k, a.len())?,
        WebbPrefix::Nothing => {}
    }
    let p = Pair {
        a: a.values(),
        b: b.values(),
        env_a,
        env_b,
        derived_a,
        derived_b,
        w,
        cf,
    };
    let mut scratch = BoundScratch::default();
    Ok(webb_kernel(&p, prefix, variant, cutoff, &mut scratch, &mut ()))
}

#[allow(clippy::too_many_arguments)]
pub fn lb_webb(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    derived_b: &DerivedEnvelopes,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    webb_public(
        "LB_Webb",
        a,
        b,
        env_a,
        env_b,
        derived_a,
        derived_b,
        w,
        cf,
        cutoff,
        WebbPrefix::LrPaths,
        WebbVariant::Standard,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn lb_webb_nolr(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    derived_b: &DerivedEnvelopes,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    webb_public(
        "LB_Webb_NoLR",
        a,
        b,
        env_a,
        env_b,
        derived_a,
        derived_b,
        w,
        cf,
        cutoff,
        WebbPrefix::Nothing,
        WebbVariant::Standard,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn lb_webb_star(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    derived_b: &DerivedEnvelopes,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    webb_public(
        "LB_Webb*",
        a,
        b,
        env_a,
        env_b,
        derived_a,
        derived_b,
        w,
        cf,
        cutoff,
        WebbPrefix::LrPaths,
        WebbVariant::Star,
    )
}

#[allow(clippy::too_many_arguments)]
pub fn lb_webb_enhanced(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    derived_a: &DerivedEnvelopes,
    derived_b: &DerivedEnvelopes,
    w: Window,
    k: usize,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    webb_public(
        "LB_Webb_Enhanced",
        a,
        b,
        env_a,
        env_b,
        derived_a,
        derived_b,
        w,
        cf,
        cutoff,
        WebbPrefix::Bands(k),
        WebbVariant::Standard,
    )
}
