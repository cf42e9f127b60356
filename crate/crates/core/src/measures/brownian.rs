//! Reflecting Brownian motion: Itô measure of `|B|` and Brownian motion
//! stopped at zero.

use core::f64::consts::PI;

use super::{ExcursionMeasure, Mark, PowerLaw, Resolution, StoppedLaw};
use crate::error::{param, Result};
use crate::path::{CadlagPath, PathBuilder, SegmentMode};
use crate::rng::{open_unit, std_normal, RngCore};
use rand::Rng;

use SegmentMode::{ConstantRight, Linear};

/// Itô measure of reflecting Brownian motion with local time normalised so
/// that `ν(sup >= r) = δ / r`.
#[derive(Clone, Debug)]
pub struct BrownianIto {
    delta: f64,
}

impl BrownianIto {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(param("normalization", "must be finite and > 0"));
        }
        Ok(Self { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Probability that a Brownian bridge between `y0` and `y1` over a step of
/// length `h` touches `level`, both endpoints lying on the same side.
fn bridge_touch(y0: f64, y1: f64, level: f64, h: f64) -> f64 {
    libm::exp(-2.0 * (y0 - level) * (y1 - level) / h)
}

/// Three-dimensional Bessel bridge from 0 to 0 of length `t_end`, i.e. a
/// Brownian excursion with prescribed lifetime.
pub fn bessel_bridge_excursion(t_end: f64, res: &Resolution, rng: &mut dyn RngCore) -> CadlagPath {
    let h = res.step;
    let est = ((t_end.min(res.horizon + h)) / h) as usize + 3;
    let mut b = PathBuilder::with_capacity(1, est.min(res.max_knots));
    b.push_scalar(0.0, 0.0, Linear);
    let mut x = [0.0f64; 3];
    let (mut t, mut r) = (0.0, 0.0);
    loop {
        let tn = t + h;
        if tn >= t_end || t >= res.horizon || r >= res.exit_level || b.len() >= res.max_knots {
            break;
        }
        let f = (t_end - tn) / (t_end - t);
        let sd = libm::sqrt(h * f);
        for xk in &mut x {
            *xk = *xk * f + sd * std_normal(rng);
        }
        let rn = libm::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        if res.exit_level.is_finite()
            && rn < res.exit_level
            && rng.random::<f64>() < bridge_touch(r, rn, res.exit_level, h)
        {
            let tc = t + h * (res.exit_level - r) / ((res.exit_level - r) + (res.exit_level - rn));
            b.push_scalar(tc, res.exit_level, Linear);
            break;
        }
        b.push_scalar(tn, rn, Linear);
        t = tn;
        r = rn;
    }
    if b.len() == 1 {
        let sd = libm::sqrt(t_end / 4.0);
        let m = (0..3)
            .map(|_| {
                let z = sd * std_normal(rng);
                z * z
            })
            .sum::<f64>();
        b.push_scalar(0.5 * t_end, libm::sqrt(m), Linear);
    }
    b.push_scalar(t_end, 0.0, ConstantRight);
    b.finish(t_end).expect("bridge knots are ordered")
}

/// Norm of a three-dimensional Brownian motion run until it reaches `level`.
/// The final knot sits exactly at `level`.
fn bessel3_ascent(level: f64, res: &Resolution, rng: &mut dyn RngCore) -> PathBuilder {
    let h = res.step;
    let sd = libm::sqrt(h);
    let mut b = PathBuilder::new(1);
    b.push_scalar(0.0, 0.0, Linear);
    let mut x = [0.0f64; 3];
    let (mut t, mut r) = (0.0, 0.0);
    loop {
        for xk in &mut x {
            *xk += sd * std_normal(rng);
        }
        let rn = libm::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        let crossed = rn >= level || rng.random::<f64>() < bridge_touch(r, rn, level, h);
        if crossed || b.len() + 1 >= res.max_knots {
            let frac = if rn >= level {
                (level - r) / (rn - r)
            } else {
                (level - r) / ((level - r) + (level - rn))
            };
            let tc = t + h * frac.clamp(0.0, 1.0);
            let tc = if tc > t { tc } else { t + h };
            b.push_scalar(tc, level, Linear);
            return b;
        }
        t += h;
        r = rn;
        b.push_scalar(t, r, Linear);
    }
}

impl ExcursionMeasure for BrownianIto {
    fn label(&self) -> &str {
        "reflecting_bm"
    }

    fn tail_mass(&self, eps: f64) -> f64 {
        self.delta * libm::sqrt(2.0 / (PI * eps))
    }

    fn small_duration_mean(&self, eps: f64) -> f64 {
        self.delta * libm::sqrt(2.0 * eps / PI)
    }

    fn sup_tail_mass(&self, r: f64) -> f64 {
        self.delta / r
    }

    fn sample_big(
        &self,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> (CadlagPath, Option<Mark>) {
        let u = open_unit(rng);
        let t_end = eps / (u * u);
        (bessel_bridge_excursion(t_end, res, rng), None)
    }

    fn sample_sup_conditioned(
        &self,
        r: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> CadlagPath {
        let mut b = bessel3_ascent(r, res, rng);
        let tc = b.last_time().unwrap_or(0.0);
        let rest = BrownianStopped::standard().run(r, &res.after(tc), rng);
        b.append_shifted(&rest, tc, true);
        b.set_last_mode(ConstantRight);
        b.finish(tc + rest.lifetime())
            .expect("ascent and descent are ordered")
    }

    fn power_law(&self) -> Option<PowerLaw> {
        Some(PowerLaw {
            delta: self.delta,
            kappa: 1.0,
        })
    }
}

/// Brownian motion started at `x > 0` and stopped when it reaches zero.
///
/// Euler steps on a grid, with the Brownian-bridge correction for crossings
/// of zero (and of the exit level) that happen between grid points.
#[derive(Clone, Debug)]
pub struct BrownianStopped {
    sigma: f64,
}

impl BrownianStopped {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(param("sigma", "must be finite and > 0"));
        }
        Ok(Self { sigma })
    }

    pub fn standard() -> Self {
        Self { sigma: 1.0 }
    }

    /// Exact law of the remaining time to reach zero from `y`.
    fn remaining_lifetime(&self, y: f64, rng: &mut dyn RngCore) -> f64 {
        loop {
            let n = std_normal(rng);
            if n != 0.0 {
                return (y * y) / (self.sigma * self.sigma * n * n);
            }
        }
    }

    fn run(&self, x: f64, res: &Resolution, rng: &mut dyn RngCore) -> CadlagPath {
        let h = res.step;
        let var = self.sigma * self.sigma * h;
        let sd = libm::sqrt(var);
        let mut b = PathBuilder::new(1);
        b.push_scalar(0.0, x, Linear);
        let (mut t, mut y) = (0.0, x);
        loop {
            if t >= res.horizon || y >= res.exit_level || b.len() + 2 >= res.max_knots {
                let rest = self.remaining_lifetime(y, rng);
                let end = t + rest;
                let end = if end > t {
                    end
                } else {
                    t + f64::EPSILON * t.max(1.0)
                };
                b.push_scalar(end, 0.0, ConstantRight);
                return b.finish(end).expect("completion is ordered");
            }
            let yn = y + sd * std_normal(rng);
            if yn <= 0.0 {
                let tc = t + h * (y / (y - yn));
                let tc = if tc > t { tc } else { t + h };
                b.push_scalar(tc, 0.0, ConstantRight);
                return b.finish(tc).expect("crossing is ordered");
            }
            if rng.random::<f64>() < libm::exp(-2.0 * y * yn / var) {
                let tc = t + h * (y / (y + yn));
                let tc = if tc > t { tc } else { t + h };
                b.push_scalar(tc, 0.0, ConstantRight);
                return b.finish(tc).expect("crossing is ordered");
            }
            if res.exit_level.is_finite()
                && yn < res.exit_level
                && rng.random::<f64>()
                    < libm::exp(-2.0 * (res.exit_level - y) * (res.exit_level - yn) / var)
            {
                let tc =
                    t + h * (res.exit_level - y) / ((res.exit_level - y) + (res.exit_level - yn));
                t = if tc > t { tc } else { t + h };
                y = res.exit_level;
                b.push_scalar(t, y, Linear);
                continue;
            }
            t += h;
            y = yn;
            b.push_scalar(t, y, Linear);
        }
    }
}

impl StoppedLaw for BrownianStopped {
    fn label(&self) -> &str {
        "brownian"
    }

    fn sample_from(&self, x: f64, res: &Resolution, rng: &mut dyn RngCore) -> Result<CadlagPath> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(param("x", "starting point must be finite and > 0"));
        }
        Ok(self.run(x, res, rng))
    }
}
