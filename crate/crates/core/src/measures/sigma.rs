//! Monte Carlo estimate of `σ(x) = ν(T_x < T_0)`.

use super::{ExcursionMeasure, Resolution};
use crate::error::{param, Result};
use crate::rng::RngCore;

/// Estimates `σ(x)` for `x >= r_cond` as `ν(sup >= r_cond)` times the
/// fraction of conditioned excursions that reach `x` before dying.
pub fn estimate_sigma(
    spec: &dyn ExcursionMeasure,
    x: f64,
    r_cond: f64,
    n_samples: usize,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<f64> {
    Ok(spec.sup_tail_mass(r_cond) * hit_fraction(spec, x, r_cond, n_samples, res, rng)?.0)
}

/// Fraction of `ν(· | sup >= r_cond)` draws reaching `x`, with its standard
/// error.
pub fn hit_fraction(
    spec: &dyn ExcursionMeasure,
    x: f64,
    r_cond: f64,
    n_samples: usize,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<(f64, f64)> {
    if !(r_cond > 0.0) || !(x >= r_cond) {
        return Err(param("x", "need x >= r_cond > 0"));
    }
    if n_samples == 0 {
        return Err(param("n_samples", "must be positive"));
    }
    let res = res.with_exit(x);
    let level = [x];
    let mut hits = 0usize;
    for _ in 0..n_samples {
        let p = spec.sample_sup_conditioned(r_cond, &res, rng);
        let t = p.hitting_time(&level)?;
        if t < p.lifetime() {
            hits += 1;
        }
    }
    let f = hits as f64 / n_samples as f64;
    Ok((f, libm::sqrt(f * (1.0 - f) / n_samples as f64)))
}
