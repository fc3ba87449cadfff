//! Lower bounds for Dynamic Time Warping under a Sakoe-Chiba window, exact
//! windowed DTW, and nearest-neighbour search that uses the bounds to skip
//! DTW computations.

pub mod bench;
pub mod bounds;
pub mod dtw;
pub mod envelope;
pub mod error;
pub mod fixtures;
pub mod search;
pub mod selftest;
pub mod series;
pub mod synth;
pub mod ucr;

pub use bounds::{BoundResult, BoundSelector, PreparedSeries};
pub use dtw::{dtw, dtw_early_abandon, DtwOutcome, DtwResult};
pub use envelope::{compute_envelopes, compute_projection, DerivedEnvelopes, EnvelopePair};
pub use error::{Error, Result};
pub use series::{delta, validate_pair, CostFunction, CostKind, TimeSeries, Window};
pub use search::{search_random_order, search_sorted, CandidateSet, SearchReport};
pub use ucr::{load_dataset, resolve_window, Dataset, LabeledSeries, WindowSpec};
