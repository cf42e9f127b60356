//! Two-sample statistics and self-calibrated null bands.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::exec::Executor;
use crate::rng::{stream, RngCore};

/// Finite sample of a scalar functional.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub label: String,
    pub seed: u64,
    values: Vec<f64>,
}

impl SampleBatch {
    /// Infinite values are mapped to `±f64::MAX`, which keeps their rank and
    /// lets them sit in a common extreme bin. NaN is rejected.
    pub fn new(label: impl Into<String>, seed: u64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InsufficientSamples {
                need: 2,
                got: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(param("values", "NaN in sample"));
        }
        let values = values
            .into_iter()
            .map(|v| {
                if v.is_infinite() {
                    f64::MAX.copysign(v)
                } else {
                    v
                }
            })
            .collect();
        Ok(Self {
            label: label.into(),
            seed,
            values,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `log(1 + |x|)` of every value.
    pub fn log_transformed(&self) -> Self {
        Self {
            label: self.label.clone(),
            seed: self.seed,
            values: self
                .values
                .iter()
                .map(|v| libm::log1p(libm::fabs(*v)))
                .collect(),
        }
    }
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `sup |F_a - F_b|` over the merged sample.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let (a, b) = (sorted(a), sorted(b));
    Ok(ks_sorted(&a, &b))
}

fn ks_sorted(a: &[f64], b: &[f64]) -> f64 {
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        // Integer cross-multiplication keeps symmetric inputs symmetric.
        let diff = (i * m).abs_diff(j * n) as f64 / (n * m) as f64;
        d = d.max(diff);
    }
    d
}

/// `∫ |F_a^{-1}(u) - F_b^{-1}(u)| du`.
pub fn wasserstein1(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let (a, b) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    if n == m {
        let s: f64 = a.iter().zip(&b).map(|(x, y)| libm::fabs(x - y)).sum();
        return Ok(s / n as f64);
    }
    // Quantile functions are constant on ((k-1)/n, k/n]; walk the merged
    // breakpoints in integer units of 1/(n m).
    let (mut i, mut j) = (0usize, 0usize);
    let mut u = 0usize;
    let total = n * m;
    let mut s = 0.0;
    while u < total {
        let next = ((i + 1) * m).min((j + 1) * n);
        s += (next - u) as f64 * libm::fabs(a[i] - b[j]);
        u = next;
        if u == (i + 1) * m {
            i += 1;
        }
        if u == (j + 1) * n {
            j += 1;
        }
    }
    Ok(s / total as f64)
}

fn dist2(x: &[f64; 2], y: &[f64; 2]) -> f64 {
    libm::hypot(x[0] - y[0], x[1] - y[1])
}

/// Energy distance `2 E|X-Y| - E|X-X'| - E|Y-Y'|` between planar samples.
pub fn energy_distance_2d(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: a.len().min(b.len()),
        });
    }
    let mean_cross = a
        .iter()
        .map(|x| b.iter().map(|y| dist2(x, y)).sum::<f64>())
        .sum::<f64>()
        / (a.len() * b.len()) as f64;
    let within = |s: &[[f64; 2]]| {
        let mut t = 0.0;
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                t += dist2(&s[i], &s[j]);
            }
        }
        2.0 * t / (s.len() * s.len()) as f64
    };
    Ok(2.0 * mean_cross - within(a) - within(b))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Statistic {
    Ks,
    W1,
    /// Wasserstein-1 after `x ↦ log(1 + |x|)`.
    W1Log,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::Ks => "ks",
            Statistic::W1 => "w1",
            Statistic::W1Log => "w1_log",
        }
    }

    pub fn compute(self, a: &[f64], b: &[f64]) -> Result<f64> {
        match self {
            Statistic::Ks => ks_two_sample(a, b),
            Statistic::W1 => wasserstein1(a, b),
            Statistic::W1Log => {
                let f = |s: &[f64]| {
                    s.iter()
                        .map(|v| libm::log1p(libm::fabs(*v)))
                        .collect::<Vec<_>>()
                };
                wasserstein1(&f(a), &f(b))
            }
        }
    }
}

/// Empirical `p`-quantile (`p ∈ [0, 1]`), the smallest order statistic with
/// at least a fraction `p` of the sample at or below it.
pub fn quantile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(param("p", "must lie in [0, 1]"));
    }
    let v = sorted(values);
    let k = libm::ceil(p * v.len() as f64) as usize;
    Ok(v[k.saturating_sub(1).min(v.len() - 1)])
}

/// `(1 - level)` quantile of `stat` between two independent batches of
/// `n_paths` draws from `sampler`, over `n_reps` replications. Replication
/// `r` uses streams `2r` and `2r + 1` of `seed`.
pub fn null_band(
    sampler: &(dyn Fn(&mut dyn RngCore) -> f64 + Sync),
    stat: Statistic,
    n_paths: usize,
    n_reps: usize,
    level: f64,
    seed: u64,
    exec: &dyn ExecutorDyn,
) -> Result<f64> {
    if n_paths == 0 || n_reps == 0 {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(param("level", "must lie in (0, 1)"));
    }
    let reps = exec.map_f64(n_reps, &|r| {
        let mut ra = stream(seed, 2 * r as u64);
        let mut rb = stream(seed, 2 * r as u64 + 1);
        let a: Vec<f64> = (0..n_paths).map(|_| sampler(&mut ra)).collect();
        let b: Vec<f64> = (0..n_paths).map(|_| sampler(&mut rb)).collect();
        stat.compute(&a, &b).unwrap_or(f64::NAN)
    });
    if reps.iter().any(|v| v.is_nan()) {
        return Err(param("sampler", "produced NaN"));
    }
    quantile(&reps, 1.0 - level)
}

/// Object-safe view of an [`Executor`] for `f64` results.
pub trait ExecutorDyn: Sync {
    fn map_f64(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64>;
}

impl<E: Executor> ExecutorDyn for E {
    fn map_f64(&self, n: usize, f: &(dyn Fn(usize) -> f64 + Sync)) -> Vec<f64> {
        self.map_indexed(n, f)
    }
}

/// Number of adjacent increases in a sequence expected to decrease.
pub fn count_inversions(seq: &[f64]) -> usize {
    seq.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Decreasing up to `allowed` adjacent increases.
pub fn is_decreasing_trend(seq: &[f64], allowed: usize) -> bool {
    count_inversions(seq) <= allowed
}

pub fn mean_and_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, f64::NAN);
    }
    let v = x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0);
    (m, libm::sqrt(v / n))
}

pub fn median(x: &[f64]) -> Result<f64> {
    if x.is_empty() {
        return Err(Error::InsufficientSamples { need: 1, got: 0 });
    }
    let v = sorted(x);
    let k = v.len();
    Ok(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(param("x", "need two or more paired points"));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::rng::{std_normal, RngCore};
    use alloc::vec;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn ks_examples() {
        let a = [0.3, 1.0, -2.0];
        assert_eq!(ks_two_sample(&a, &a).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[0.0, 1.0], &[0.0, 2.0]).unwrap(), 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    /// Brute force over every evaluation point.
    fn ks_oracle(a: &[f64], b: &[f64]) -> f64 {
        let cdf = |s: &[f64], x: f64| s.iter().filter(|v| **v <= x).count() as f64 / s.len() as f64;
        a.iter()
            .chain(b)
            .map(|&x| (cdf(a, x) - cdf(b, x)).abs())
            .fold(0.0, f64::max)
    }

    /// Midpoint rule on a fine grid of `u`, exact for step quantiles whose
    /// jumps sit on the grid.
    fn w1_oracle(a: &[f64], b: &[f64]) -> f64 {
        let (a, b) = (sorted(a), sorted(b));
        let k = a.len() * b.len() * 4;
        let q = |s: &[f64], u: f64| s[((u * s.len() as f64).ceil() as usize).clamp(1, s.len()) - 1];
        (0..k)
            .map(|i| {
                let u = (i as f64 + 0.5) / k as f64;
                (q(&a, u) - q(&b, u)).abs()
            })
            .sum::<f64>()
            / k as f64
    }

    #[test]
    fn w1_examples() {
        let a = [0.3, 1.0, -2.0];
        assert_eq!(wasserstein1(&a, &a).unwrap(), 0.0);
        assert_eq!(wasserstein1(&[0.0], &[3.0]).unwrap(), 3.0);
        let b: Vec<f64> = a.iter().map(|x| x + 0.25).collect();
        assert!((wasserstein1(&a, &b).unwrap() - 0.25).abs() < 1e-15);
        let c = [1.0, 2.0];
        assert!((wasserstein1(&a, &c).unwrap() - w1_oracle(&a, &c)).abs() < 1e-12);
    }

    #[test]
    fn energy_distance_behaves() {
        let mut rng = stream(1, 0);
        let g = |rng: &mut crate::rng::ChaCha8Rng, m: f64| -> Vec<[f64; 2]> {
            (0..300)
                .map(|_| [std_normal(rng) + m, std_normal(rng)])
                .collect()
        };
        let (a, b, c) = (g(&mut rng, 0.0), g(&mut rng, 0.0), g(&mut rng, 2.0));
        let same = energy_distance_2d(&a, &b).unwrap();
        let diff = energy_distance_2d(&a, &c).unwrap();
        assert!(same < 0.1 && diff > 1.0, "{same} {diff}");
        assert!(energy_distance_2d(&a[..1], &b).is_err());
    }

    #[test]
    fn null_band_examples() {
        let point = |_: &mut dyn RngCore| 1.0;
        assert_eq!(
            null_band(&point, Statistic::Ks, 50, 20, 0.01, 1, &Sequential).unwrap(),
            0.0
        );
        let unif = |r: &mut dyn RngCore| r.random::<f64>();
        let bands: Vec<f64> = [100, 1000, 10000]
            .iter()
            .map(|&n| null_band(&unif, Statistic::Ks, n, 200, 0.01, 7, &Sequential).unwrap())
            .collect();
        assert!(bands[0] > bands[1] && bands[1] > bands[2], "{bands:?}");
        // Two-sample DKW bound at level 0.01: sqrt(ln(2/0.01) · 2 / (2n)).
        for (b, n) in bands.iter().zip([100.0, 1000.0, 10000.0]) {
            let dkw = libm::sqrt(libm::log(200.0) / n);
            assert!(*b <= dkw, "{b} {dkw}");
            assert!(*b >= 0.3 * dkw);
        }
        let again = null_band(&unif, Statistic::Ks, 100, 200, 0.01, 7, &Sequential).unwrap();
        assert_eq!(again, bands[0]);
    }

    #[test]
    fn quantiles_trend_and_regression() {
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 0.5).unwrap(), 2.0);
        assert_eq!(quantile(&[3.0, 1.0, 2.0], 1.0).unwrap(), 3.0);
        assert_eq!(count_inversions(&[4.0, 3.0, 3.5, 1.0]), 1);
        assert!(is_decreasing_trend(&[4.0, 3.0, 3.5, 1.0], 1));
        assert!(!is_decreasing_trend(&[1.0, 2.0, 3.0], 1));
        assert_eq!(median(&[1.0, 5.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!((ols_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap() - 2.0).abs() < 1e-15);
        let b = SampleBatch::new("x", 0, vec![f64::INFINITY, 1.0]).unwrap();
        assert_eq!(b.values()[0], f64::MAX);
        assert!(SampleBatch::new("x", 0, vec![1.0]).is_err());
    }

    fn vecs() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 1..30)
    }

    proptest! {
        #[test]
        fn ks_is_symmetric_and_matches_brute_force(a in vecs(), b in vecs()) {
            let d = ks_two_sample(&a, &b).unwrap();
            prop_assert_eq!(d, ks_two_sample(&b, &a).unwrap());
            prop_assert!((d - ks_oracle(&a, &b)).abs() < 1e-12);
        }

        #[test]
        fn ks_invariant_under_increasing_maps(a in vecs(), b in vecs()) {
            let f = |s: &[f64]| s.iter().map(|x| libm::exp(*x / 3.0) + x).collect::<Vec<_>>();
            prop_assert_eq!(ks_two_sample(&a, &b).unwrap(), ks_two_sample(&f(&a), &f(&b)).unwrap());
        }

        #[test]
        fn w1_triangle_shift_and_oracle(a in vecs(), b in vecs(), c in vecs(), s in -5.0f64..5.0) {
            let ab = wasserstein1(&a, &b).unwrap();
            let bc = wasserstein1(&b, &c).unwrap();
            let ac = wasserstein1(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert!((ab - wasserstein1(&b, &a).unwrap()).abs() < 1e-12);
            let sh = |x: &[f64]| x.iter().map(|v| v + s).collect::<Vec<_>>();
            prop_assert!((wasserstein1(&sh(&a), &sh(&b)).unwrap() - ab).abs() < 1e-12);
            prop_assert!((ab - w1_oracle(&a, &b)).abs() < 1e-9);
        }
    }
}
