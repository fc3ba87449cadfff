//! The eleven-element worked example used throughout the documentation and
//! tests: two series compared with `w = 1` and squared cost.
//!
//! Band minima summed over every left band give 39 and over every right band
//! 36 at `w = 1`, checked by brute force. At `w = 3` the sums are 9 and 6.

use crate::series::TimeSeries;

pub const EXAMPLE_A: [f64; 11] = [-1., 1., -1., 4., -2., 1., 1., 1., -1., 0., 1.];
pub const EXAMPLE_B: [f64; 11] = [1., -1., 1., -1., -1., -4., -4., -1., 1., 0., -1.];

pub fn example_a() -> TimeSeries {
    TimeSeries::with_id(EXAMPLE_A.to_vec(), "A").unwrap()
}

pub fn example_b() -> TimeSeries {
    TimeSeries::with_id(EXAMPLE_B.to_vec(), "B").unwrap()
}
