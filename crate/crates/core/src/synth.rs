//! Seeded synthetic series, comparison instances and labelled datasets for
//! self-tests and examples.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::search::derive_seed;
use crate::series::{CostFunction, TimeSeries, Window};
use crate::ucr::{Dataset, LabeledSeries};

/// One (A, B, w, cost) comparison.
#[derive(Debug, Clone)]
pub struct Instance {
    pub a: TimeSeries,
    pub b: TimeSeries,
    pub w: Window,
    pub cf: CostFunction,
    /// Values lie on the grid of halves, so sums and differences are exact.
    pub quantized: bool,
}

/// A random-walk, white-noise or noisy-sine series. Quantised series are
/// rounded to multiples of 0.5.
pub fn random_series<R: Rng>(rng: &mut R, len: usize, quantized: bool) -> Vec<f64> {
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut v: Vec<f64> = match rng.gen_range(0..3) {
        0 => {
            let mut x = 0.0;
            (0..len)
                .map(|_| {
                    x += noise.sample(rng);
                    x
                })
                .collect()
        }
        1 => (0..len).map(|_| 2.0 * noise.sample(rng)).collect(),
        _ => {
            let period = rng.gen_range(4.0..24.0);
            let phase = rng.gen_range(0.0..std::f64::consts::TAU);
            let amp = rng.gen_range(0.5..4.0);
            (0..len)
                .map(|i| {
                    amp * (std::f64::consts::TAU * i as f64 / period + phase).sin()
                        + 0.3 * noise.sample(rng)
                })
                .collect()
        }
    };
    if quantized {
        for x in &mut v {
            *x = (*x * 2.0).round() / 2.0;
        }
    }
    v
}

/// `b` is independent of `a` half the time and a warped, noisy copy of it
/// otherwise, so that both loose and tight bounds occur.
pub fn random_instance<R: Rng>(rng: &mut R, len_range: std::ops::RangeInclusive<usize>) -> Instance {
    let len = rng.gen_range(len_range);
    let quantized = rng.gen_bool(0.5);
    let a = random_series(rng, len, quantized);
    let b = if rng.gen_bool(0.5) {
        random_series(rng, len, quantized)
    } else {
        let shift: isize = rng.gen_range(-3..=3);
        let noise = Normal::new(0.0, rng.gen_range(0.05..1.0)).unwrap();
        (0..len)
            .map(|i| {
                let src = (i as isize + shift).clamp(0, len as isize - 1) as usize;
                let x = a[src] + noise.sample(rng);
                if quantized {
                    (x * 2.0).round() / 2.0
                } else {
                    x
                }
            })
            .collect()
    };
    let w = Window(rng.gen_range(1..=len));
    let cf = if rng.gen_bool(0.5) {
        CostFunction::squared()
    } else {
        CostFunction::absolute()
    };
    Instance {
        a: TimeSeries::with_id(a, "A").unwrap(),
        b: TimeSeries::with_id(b, "B").unwrap(),
        w,
        cf,
        quantized,
    }
}

/// Instance `i` of the corpus for `seed`; independent of how many others are drawn.
pub fn corpus_instance(seed: u64, i: u64, len_range: std::ops::RangeInclusive<usize>) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0, i));
    random_instance(&mut rng, len_range)
}

pub fn corpus(seed: u64, n: usize, len_range: std::ops::RangeInclusive<usize>) -> Vec<Instance> {
    (0..n as u64)
        .map(|i| corpus_instance(seed, i, len_range.clone()))
        .collect()
}

/// Labelled dataset: each class is a prototype series, members are noisy,
/// slightly shifted copies of it.
pub fn labelled_dataset(
    seed: u64,
    classes: usize,
    train_per_class: usize,
    test_per_class: usize,
    len: usize,
) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let protos: Vec<Vec<f64>> = (0..classes)
        .map(|_| random_series(&mut rng, len, false))
        .collect();
    let noise = Normal::new(0.0, 0.5).unwrap();
    let member = |rng: &mut ChaCha8Rng, p: &[f64], id: String| {
        let shift: isize = rng.gen_range(-2..=2);
        let v = (0..len)
            .map(|i| p[(i as isize + shift).clamp(0, len as isize - 1) as usize] + noise.sample(rng))
            .collect();
        TimeSeries::with_id(v, id).unwrap()
    };
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (c, p) in protos.iter().enumerate() {
        for _ in 0..train_per_class {
            let id = format!("train[{}]", train.len());
            train.push(LabeledSeries {
                label: c as i64,
                series: member(&mut rng, p, id),
            });
        }
        for _ in 0..test_per_class {
            let id = format!("test[{}]", test.len());
            test.push(LabeledSeries {
                label: c as i64,
                series: member(&mut rng, p, id),
            });
        }
    }
    Dataset {
        name: format!("synthetic-{seed}"),
        train,
        test,
        series_length: len,
        recommended_window: Some((len / 10).max(1)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_reproducible() {
        let a = corpus(7, 20, 7..=64);
        let b = corpus(7, 20, 7..=64);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.a, y.a);
            assert_eq!(x.b, y.b);
            assert_eq!(x.w, y.w);
        }
        assert!(a.iter().all(|i| (7..=64).contains(&i.a.len()) && i.w.get() >= 1));
    }

    #[test]
    fn quantized_values_on_half_grid() {
        for inst in corpus(3, 50, 7..=20).iter().filter(|i| i.quantized) {
            for v in inst.a.values().iter().chain(inst.b.values()) {
                assert_eq!((v * 2.0).fract(), 0.0);
            }
        }
    }
}
