//! Runtime choice of bound, used by the search harness and the benchmarks.

use std::fmt;
use std::str::FromStr;

use super::classic::check_k;
use super::webb::MIN_LR_LEN;
use super::{
    enhanced_kernel, improved_kernel, keogh_kernel, petitjean_kernel, webb_kernel, BoundResult,
    BoundScratch, Contribution, ContributionSink, Pair, PreparedSeries, WebbPrefix, WebbVariant,
    DEFAULT_K,
};
use crate::dtw::{dtw_slices, DtwScratch};
use crate::error::{Error, Result};
use crate::series::{check_lengths, CostFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundSelector {
    Keogh,
    Improved,
    Enhanced(usize),
    Petitjean,
    PetitjeanNoLR,
    Webb,
    WebbNoLR,
    WebbStar,
    WebbEnhanced(usize),
    /// No bound: every candidate goes to DTW.
    None,
    /// DTW itself, for checking the tightness pipeline (ratio 1).
    Dtw,
}

impl BoundSelector {
    /// Every real bound, with the given `k` for the banded ones.
    pub fn all_bounds(k: usize) -> Vec<BoundSelector> {
        use BoundSelector::*;
        vec![
            Keogh,
            Improved,
            Enhanced(k),
            Petitjean,
            PetitjeanNoLR,
            Webb,
            WebbNoLR,
            WebbStar,
            WebbEnhanced(k),
        ]
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    /// The selector actually evaluated for series of length `len`: the
    /// boundary-path bounds fall back to their NoLR forms below length 7.
    pub fn effective(self, len: usize) -> BoundSelector {
        if len >= MIN_LR_LEN {
            return self;
        }
        match self {
            BoundSelector::Petitjean => BoundSelector::PetitjeanNoLR,
            BoundSelector::Webb | BoundSelector::WebbStar => BoundSelector::WebbNoLR,
            other => other,
        }
    }

    /// Checks the cost-function class and `k` before a run. Note that the
    /// starred variant's NoLR fallback still only needs monotonicity.
    pub fn check(&self, cf: &CostFunction, len: usize) -> Result<()> {
        use BoundSelector::*;
        match self {
            Keogh => cf.require_monotone("LB_Keogh"),
            Improved => cf.require_monotone("LB_Improved"),
            Enhanced(k) => {
                cf.require_monotone("LB_Enhanced")?;
                check_k(*k, len)
            }
            Petitjean => cf.require_triangle_surplus("LB_Petitjean"),
            PetitjeanNoLR => cf.require_triangle_surplus("LB_Petitjean_NoLR"),
            Webb => cf.require_triangle_surplus("LB_Webb"),
            WebbNoLR => cf.require_triangle_surplus("LB_Webb_NoLR"),
            WebbStar => cf.require_monotone("LB_Webb*"),
            WebbEnhanced(k) => {
                cf.require_triangle_surplus("LB_Webb_Enhanced")?;
                check_k(*k, len)
            }
            None | Dtw => Ok(()),
        }
    }

    /// Evaluates the bound for query `a` against candidate `b`. Assumes
    /// [`check`](Self::check) passed and both were prepared with the same
    /// window. `None` yields 0.
    pub fn eval_prepared<S: ContributionSink>(
        &self,
        a: &PreparedSeries,
        b: &PreparedSeries,
        cf: &CostFunction,
        cutoff: Option<f64>,
        scratch: &mut BoundScratch,
        sink: &mut S,
    ) -> BoundResult {
        let len = a.values().len();
        let p = Pair::of(a, b, cf);
        let star_short = *self == BoundSelector::WebbStar && len < MIN_LR_LEN;
        match self.effective(len) {
            BoundSelector::Keogh => keogh_kernel(p.a, p.env_b, cf, cutoff, sink),
            BoundSelector::Improved => {
                improved_kernel(p.a, p.b, p.env_b, p.w, cf, cutoff, scratch, sink)
            }
            BoundSelector::Enhanced(k) => {
                enhanced_kernel(p.a, p.b, p.env_b, p.w, k, cf, cutoff, sink)
            }
            BoundSelector::Petitjean => petitjean_kernel(&p, true, cutoff, scratch, sink),
            BoundSelector::PetitjeanNoLR => petitjean_kernel(&p, false, cutoff, scratch, sink),
            BoundSelector::Webb => webb_kernel(
                &p,
                WebbPrefix::LrPaths,
                WebbVariant::Standard,
                cutoff,
                scratch,
                sink,
            ),
            BoundSelector::WebbNoLR => {
                let variant = if star_short {
                    WebbVariant::Star
                } else {
                    WebbVariant::Standard
                };
                webb_kernel(&p, WebbPrefix::Nothing, variant, cutoff, scratch, sink)
            }
            BoundSelector::WebbStar => webb_kernel(
                &p,
                WebbPrefix::LrPaths,
                WebbVariant::Star,
                cutoff,
                scratch,
                sink,
            ),
            BoundSelector::WebbEnhanced(k) => webb_kernel(
                &p,
                WebbPrefix::Bands(k),
                WebbVariant::Standard,
                cutoff,
                scratch,
                sink,
            ),
            BoundSelector::None => BoundResult {
                value: 0.0,
                abandoned: false,
                terms_evaluated: 0,
            },
            BoundSelector::Dtw => {
                let out = dtw_slices(p.a, p.b, p.w, cf, f64::INFINITY, &mut DtwScratch::default());
                BoundResult {
                    value: out.distance().expect("no cutoff"),
                    abandoned: false,
                    terms_evaluated: out.cells_computed() as usize,
                }
            }
        }
    }

    /// Checked evaluation on two prepared series.
    pub fn evaluate(
        &self,
        a: &PreparedSeries,
        b: &PreparedSeries,
        cf: &CostFunction,
        cutoff: Option<f64>,
    ) -> Result<BoundResult> {
        self.validate(a, b, cf)?;
        Ok(self.eval_prepared(a, b, cf, cutoff, &mut BoundScratch::default(), &mut ()))
    }

    /// Like [`evaluate`](Self::evaluate), also returning every term.
    pub fn trace(
        &self,
        a: &PreparedSeries,
        b: &PreparedSeries,
        cf: &CostFunction,
    ) -> Result<(BoundResult, Vec<Contribution>)> {
        self.validate(a, b, cf)?;
        let mut terms = Vec::new();
        let r = self.eval_prepared(a, b, cf, None, &mut BoundScratch::default(), &mut terms);
        Ok((r, terms))
    }

    fn validate(&self, a: &PreparedSeries, b: &PreparedSeries, cf: &CostFunction) -> Result<()> {
        check_lengths(a.values().len(), b.values().len())?;
        if a.window() != b.window() {
            return Err(Error::WindowMismatch {
                given: a.window().get(),
                prepared: b.window().get(),
            });
        }
        self.check(cf, a.values().len())
    }
}

impl fmt::Display for BoundSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use BoundSelector::*;
        match self {
            Keogh => f.write_str("keogh"),
            Improved => f.write_str("improved"),
            Enhanced(k) => write!(f, "enhanced:{k}"),
            Petitjean => f.write_str("petitjean"),
            PetitjeanNoLR => f.write_str("petitjean_nolr"),
            Webb => f.write_str("webb"),
            WebbNoLR => f.write_str("webb_nolr"),
            WebbStar => f.write_str("webb_star"),
            WebbEnhanced(k) => write!(f, "webb_enhanced:{k}"),
            None => f.write_str("none"),
            Dtw => f.write_str("dtw"),
        }
    }
}

/// Parses the names produced by `Display`. The banded bounds accept an
/// optional `:k` suffix and otherwise use the library default.
impl FromStr for BoundSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let (name, k) = match lower.split_once(':') {
            Some((n, k)) => (
                n,
                Some(k.parse::<usize>().map_err(|_| Error::UnknownBound(s.into()))?),
            ),
            Option::None => (lower.as_str(), Option::None),
        };
        let k_or_default = k.unwrap_or(DEFAULT_K);
        let sel = match name.replace('-', "_").as_str() {
            "keogh" => BoundSelector::Keogh,
            "improved" => BoundSelector::Improved,
            "enhanced" => BoundSelector::Enhanced(k_or_default),
            "petitjean" => BoundSelector::Petitjean,
            "petitjean_nolr" => BoundSelector::PetitjeanNoLR,
            "webb" => BoundSelector::Webb,
            "webb_nolr" => BoundSelector::WebbNoLR,
            "webb_star" | "webb*" => BoundSelector::WebbStar,
            "webb_enhanced" => BoundSelector::WebbEnhanced(k_or_default),
            "none" => BoundSelector::None,
            "dtw" => BoundSelector::Dtw,
            _ => return Err(Error::UnknownBound(s.into())),
        };
        let takes_k = matches!(sel, BoundSelector::Enhanced(_) | BoundSelector::WebbEnhanced(_));
        if k.is_some() && !takes_k {
            return Err(Error::UnknownBound(s.into()));
        }
        Ok(sel)
    }
}
