//! LB_Keogh, LB_Improved, LB_Enhanced and the band primitive they share.

use std::ops::Range;

use super::{Acc, BoundResult, BoundScratch, Clause, ContributionSink, Phase};
use crate::envelope::{envelopes_into, project, EnvelopePair};
use crate::error::{Error, Result};
use crate::series::{check_lengths, validate_pair, CostFunction, TimeSeries, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSide {
    Left,
    Right,
}

/// One band of the cost matrix. `index` is one-based, in `1..=len`.
///
/// The left band at `i` is column `i` from row `i - w` down to the diagonal
/// plus row `i` from column `i - w` up to the diagonal; the right band is
/// the mirror image towards the end of the matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BandSpec {
    pub side: BandSide,
    pub index: usize,
    pub window: Window,
}

pub fn band_min(a: &TimeSeries, b: &TimeSeries, spec: BandSpec, cf: &CostFunction) -> Result<f64> {
    validate_pair(a, b)?;
    let len = a.len();
    if spec.index == 0 || spec.index > len {
        return Err(Error::InvalidBandIndex {
            index: spec.index,
            len,
        });
    }
    let (a, b, i, w) = (a.values(), b.values(), spec.index - 1, spec.window.get());
    Ok(match spec.side {
        BandSide::Left => left_band(a, b, i, w, cf),
        BandSide::Right => right_band(a, b, i, w, cf),
    })
}

/// Cells `(r, i)` for `r` in `i-w..=i` and `(i, c)` for `c` in `i-w..i`
/// (zero-based, `(row of A, column of B)`).
#[inline]
pub(crate) fn left_band(a: &[f64], b: &[f64], i: usize, w: usize, cf: &CostFunction) -> f64 {
    let lo = i.saturating_sub(w);
    let mut m = cf.eval(a[i], b[i]);
    for r in lo..i {
        m = m.min(cf.eval(a[r], b[i])).min(cf.eval(a[i], b[r]));
    }
    m
}

#[inline]
pub(crate) fn right_band(a: &[f64], b: &[f64], i: usize, w: usize, cf: &CostFunction) -> f64 {
    let hi = (i + w).min(a.len() - 1);
    let mut m = cf.eval(a[i], b[i]);
    for r in i + 1..=hi {
        m = m.min(cf.eval(a[r], b[i])).min(cf.eval(a[i], b[r]));
    }
    m
}

#[inline(always)]
pub(crate) fn keogh_term(cf: &CostFunction, x: f64, lower: f64, upper: f64) -> (f64, Clause) {
    if x > upper {
        (cf.eval(x, upper), Clause::AboveEnvelope)
    } else if x < lower {
        (cf.eval(x, lower), Clause::BelowEnvelope)
    } else {
        (0.0, Clause::Inside)
    }
}

/// Keogh pass of `a` against `env` over `range`. Returns true if abandoned.
#[inline]
pub(crate) fn keogh_bridge<S: ContributionSink>(
    a: &[f64],
    env: &EnvelopePair,
    range: Range<usize>,
    cf: &CostFunction,
    acc: &mut Acc<S>,
) -> bool {
    for i in range {
        let (v, clause) = keogh_term(cf, a[i], env.lower[i], env.upper[i]);
        acc.add(Phase::Bridge, i, clause, v);
        if acc.exceeded() {
            return true;
        }
    }
    false
}

pub(crate) fn keogh_kernel<S: ContributionSink>(
    a: &[f64],
    env_b: &EnvelopePair,
    cf: &CostFunction,
    cutoff: Option<f64>,
    sink: &mut S,
) -> BoundResult {
    let mut acc = Acc::new(cutoff, sink);
    let abandoned = keogh_bridge(a, env_b, 0..a.len(), cf, &mut acc);
    acc.finish(abandoned)
}

pub fn lb_keogh(
    a: &TimeSeries,
    env_b: &EnvelopePair,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    cf.require_monotone("LB_Keogh")?;
    check_lengths(a.len(), env_b.len())?;
    Ok(keogh_kernel(a.values(), env_b, cf, cutoff, &mut ()))
}

pub(crate) fn improved_kernel<S: ContributionSink>(
    a: &[f64],
    b: &[f64],
    env_b: &EnvelopePair,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
    scratch: &mut BoundScratch,
    sink: &mut S,
) -> BoundResult {
    let len = a.len();
    let mut acc = Acc::new(cutoff, sink);
    let proj = &mut scratch.projection;
    proj.clear();
    for i in 0..len {
        let (lo, hi) = (env_b.lower[i], env_b.upper[i]);
        let (v, clause) = keogh_term(cf, a[i], lo, hi);
        acc.add(Phase::Bridge, i, clause, v);
        proj.push(project(a[i], lo, hi));
        if acc.exceeded() {
            return acc.finish(true);
        }
    }
    envelopes_into(
        proj,
        w,
        &mut scratch.proj_upper,
        &mut scratch.proj_lower,
        &mut scratch.env,
    );
    for j in 0..len {
        let (v, clause) = match keogh_term(cf, b[j], scratch.proj_lower[j], scratch.proj_upper[j]) {
            (v, Clause::AboveEnvelope) => (v, Clause::ProjectionAbove),
            (v, Clause::BelowEnvelope) => (v, Clause::ProjectionBelow),
            other => other,
        };
        acc.add(Phase::Second, j, clause, v);
        if acc.exceeded() {
            return acc.finish(true);
        }
    }
    acc.finish(false)
}

/// `env_a` is accepted for symmetry with the other two-sided bounds and is
/// only length-checked.
pub fn lb_improved(
    a: &TimeSeries,
    b: &TimeSeries,
    env_a: &EnvelopePair,
    env_b: &EnvelopePair,
    w: Window,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    cf.require_monotone("LB_Improved")?;
    validate_pair(a, b)?;
    check_lengths(a.len(), env_a.len())?;
    check_lengths(a.len(), env_b.len())?;
    let mut scratch = BoundScratch::default();
    Ok(improved_kernel(
        a.values(),
        b.values(),
        env_b,
        w,
        cf,
        cutoff,
        &mut scratch,
        &mut (),
    ))
}

/// Band terms for `i` in `1..=k`: left band `i` and right band `len - i + 1`.
/// Returns true if the running value exceeds the cutoff afterwards.
pub(crate) fn band_phase<S: ContributionSink>(
    a: &[f64],
    b: &[f64],
    w: usize,
    k: usize,
    cf: &CostFunction,
    acc: &mut Acc<S>,
) -> bool {
    let len = a.len();
    for i in 0..k {
        acc.add(Phase::Boundary, i, Clause::LeftBand, left_band(a, b, i, w, cf));
        let r = len - 1 - i;
        acc.add(Phase::Boundary, r, Clause::RightBand, right_band(a, b, r, w, cf));
    }
    acc.exceeded()
}

pub(crate) fn enhanced_kernel<S: ContributionSink>(
    a: &[f64],
    b: &[f64],
    env_b: &EnvelopePair,
    w: Window,
    k: usize,
    cf: &CostFunction,
    cutoff: Option<f64>,
    sink: &mut S,
) -> BoundResult {
    let len = a.len();
    let mut acc = Acc::new(cutoff, sink);
    if band_phase(a, b, w.get(), k, cf, &mut acc) {
        return acc.finish(true);
    }
    let abandoned = keogh_bridge(a, env_b, k..len - k, cf, &mut acc);
    acc.finish(abandoned)
}

pub(crate) fn check_k(k: usize, len: usize) -> Result<()> {
    if 2 * k > len {
        Err(Error::InvalidK { k, len })
    } else {
        Ok(())
    }
}

pub fn lb_enhanced(
    a: &TimeSeries,
    b: &TimeSeries,
    env_b: &EnvelopePair,
    w: Window,
    k: usize,
    cf: &CostFunction,
    cutoff: Option<f64>,
) -> Result<BoundResult> {
    cf.require_monotone("LB_Enhanced")?;
    validate_pair(a, b)?;
    check_lengths(a.len(), env_b.len())?;
    check_k(k, a.len())?;
    Ok(enhanced_kernel(a.values(), b.values(), env_b, w, k, cf, cutoff, &mut ()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dtw::dtw;
    use crate::envelope::compute_envelopes;
    use crate::fixtures::{example_a, example_b};

    fn sq() -> CostFunction {
        CostFunction::squared()
    }

    fn band_cells(side: BandSide, i: usize, w: usize, len: usize) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        match side {
            BandSide::Left => {
                for r in i.saturating_sub(w)..=i {
                    cells.push((r, i));
                }
                for c in i.saturating_sub(w)..i {
                    cells.push((i, c));
                }
            }
            BandSide::Right => {
                for r in i..=(i + w).min(len - 1) {
                    cells.push((r, i));
                }
                for c in i + 1..=(i + w).min(len - 1) {
                    cells.push((i, c));
                }
            }
        }
        cells
    }

    fn band_sum(side: BandSide, w: usize) -> f64 {
        let (a, b) = (example_a(), example_b());
        (1..=a.len())
            .map(|index| {
                band_min(&a, &b, BandSpec { side, index, window: Window(w) }, &sq()).unwrap()
            })
            .sum()
    }

    #[test]
    fn band_sums_match_worked_example_at_w1() {
        // 39 and 36 are the band totals for this pair; w=3 gives 9 and 6.
        assert_eq!(band_sum(BandSide::Left, 1), 39.0);
        assert_eq!(band_sum(BandSide::Right, 1), 36.0);
        assert_eq!(band_sum(BandSide::Left, 3), 9.0);
        assert_eq!(band_sum(BandSide::Right, 3), 6.0);
    }

    #[test]
    fn band_min_matches_cell_enumeration() {
        let (a, b) = (example_a(), example_b());
        for w in 0..5 {
            for side in [BandSide::Left, BandSide::Right] {
                for i in 0..a.len() {
                    let expect = band_cells(side, i, w, a.len())
                        .into_iter()
                        .map(|(r, c)| sq().eval(a.values()[r], b.values()[c]))
                        .fold(f64::INFINITY, f64::min);
                    let spec = BandSpec { side, index: i + 1, window: Window(w) };
                    assert_eq!(band_min(&a, &b, spec, &sq()).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn corner_band_is_single_cell() {
        let (a, b) = (example_a(), example_b());
        let spec = BandSpec { side: BandSide::Left, index: 1, window: Window(4) };
        assert_eq!(band_min(&a, &b, spec, &sq()).unwrap(), 4.0);
        let bad = BandSpec { index: 0, ..spec };
        assert!(matches!(band_min(&a, &b, bad, &sq()), Err(Error::InvalidBandIndex { .. })));
    }

    #[test]
    fn bands_are_disjoint() {
        for len in 1..9 {
            for w in 0..len {
                for side in [BandSide::Left, BandSide::Right] {
                    let mut seen = std::collections::HashSet::new();
                    for i in 0..len {
                        for cell in band_cells(side, i, w, len) {
                            assert!(seen.insert(cell), "{side:?} overlap at {cell:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn keogh_on_worked_example() {
        let (a, b) = (example_a(), example_b());
        let env = compute_envelopes(&b, Window(1));
        let oracle: f64 = (0..11)
            .map(|i| {
                let x = a.values()[i];
                if x > env.upper[i] {
                    (x - env.upper[i]).powi(2)
                } else if x < env.lower[i] {
                    (x - env.lower[i]).powi(2)
                } else {
                    0.0
                }
            })
            .sum();
        let r = lb_keogh(&a, &env, &sq(), None).unwrap();
        assert_eq!(r.value, oracle);
        assert_eq!(r.value, 18.0);
        assert!(!r.abandoned);
        assert!(r.value <= dtw(&a, &b, Window(1), &sq()).unwrap().distance);

        let r = lb_keogh(&a, &env, &sq(), Some(1.0)).unwrap();
        assert!(r.abandoned);
        assert!(r.value > 1.0);
        // first nonzero term is A_4 = 4 above U = 1
        assert_eq!(r.value, 9.0);
        assert_eq!(r.terms_evaluated, 4);
    }

    #[test]
    fn keogh_zero_inside_envelope() {
        let b = example_b();
        let env = compute_envelopes(&b, Window(1));
        let a = TimeSeries::new(env.upper.clone()).unwrap();
        assert_eq!(lb_keogh(&a, &env, &sq(), None).unwrap().value, 0.0);
    }

    #[test]
    fn keogh_rejects_non_monotone() {
        let cf = CostFunction::custom(|x, y| (x - y).abs(), true, false);
        let b = example_b();
        let env = compute_envelopes(&b, Window(1));
        assert!(matches!(
            lb_keogh(&example_a(), &env, &cf, None),
            Err(Error::CostFunctionInadmissible { .. })
        ));
    }

    #[test]
    fn improved_on_worked_example() {
        let (a, b) = (example_a(), example_b());
        let w = Window(1);
        let (ea, eb) = (compute_envelopes(&a, w), compute_envelopes(&b, w));
        // oracle: projection, its envelope, two Keogh passes
        let p = crate::envelope::compute_projection(&a, &eb).unwrap();
        let pe = EnvelopePair::from_values(&p.values, w);
        let first = lb_keogh(&a, &eb, &sq(), None).unwrap().value;
        let second = lb_keogh(&b, &pe, &sq(), None).unwrap().value;
        let r = lb_improved(&a, &b, &ea, &eb, w, &sq(), None).unwrap();
        assert_eq!(r.value, first + second);
        assert!(r.value >= first);
        assert!(r.value <= 53.0);
        assert_eq!(lb_improved(&a, &a, &ea, &ea, w, &sq(), None).unwrap().value, 0.0);
    }

    #[test]
    fn enhanced_on_worked_example() {
        let (a, b) = (example_a(), example_b());
        let w = Window(1);
        let eb = compute_envelopes(&b, w);
        assert_eq!(lb_enhanced(&a, &b, &eb, w, 2, &sq(), None).unwrap().value, 25.0);
        let k0 = lb_enhanced(&a, &b, &eb, w, 0, &sq(), None).unwrap();
        let keogh = lb_keogh(&a, &eb, &sq(), None).unwrap();
        assert_eq!(k0.value.to_bits(), keogh.value.to_bits());
        let ea = compute_envelopes(&a, w);
        assert_eq!(lb_enhanced(&a, &a, &ea, w, 1, &sq(), None).unwrap().value, 0.0);
        assert!(matches!(
            lb_enhanced(&a, &b, &eb, w, 6, &sq(), None),
            Err(Error::InvalidK { k: 6, len: 11 })
        ));
        // k = len/2 leaves an empty bridge
        assert!(lb_enhanced(&a, &b, &eb, w, 5, &sq(), None).is_ok());
    }
}
