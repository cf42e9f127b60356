//! Positive self-similar Markov processes through the Lamperti transform.
//!
//! The driver is a Lévy process `Z` drifting to `-∞` made of a Brownian part
//! and negative exponential jumps. `Y = exp(Z ∘ τ^{-1})` with
//! `τ(u) = ∫_0^u exp(Z(s)/α) ds` is the pssMp started at `exp(Z(0))` and
//! stopped at zero.

use alloc::string::String;

use super::{ExcursionMeasure, Mark, PowerLaw, Resolution, StoppedLaw};
use crate::error::{param, Error, Result};
use crate::path::{CadlagPath, PathBuilder, SegmentMode};
use crate::rng::{std_normal, RngCore};
use rand_distr::{Distribution, Exp1};

use SegmentMode::{ConstantRight, Linear};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevyDriver {
    pub drift: f64,
    pub sigma: f64,
    pub jump_rate: f64,
    pub jump_mean: f64,
}

impl LevyDriver {
    pub fn new(drift: f64, sigma: f64, jump_rate: f64, jump_mean: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(param("sigma", "must be finite and > 0"));
        }
        if jump_rate < 0.0 || (jump_rate > 0.0 && !(jump_mean > 0.0)) {
            return Err(param(
                "jumps",
                "rate must be >= 0 with a positive mean size",
            ));
        }
        let d = Self {
            drift,
            sigma,
            jump_rate,
            jump_mean,
        };
        if !(d.mean() < 0.0) {
            return Err(param("drift", "driver must drift to -infinity"));
        }
        Ok(d)
    }

    pub fn brownian(drift: f64, sigma: f64) -> Result<Self> {
        Self::new(drift, sigma, 0.0, 0.0)
    }

    /// `E[Z(1)]`.
    pub fn mean(&self) -> f64 {
        self.drift - self.jump_rate * self.jump_mean
    }

    /// `ψ(θ) = log E exp(θ Z(1))`.
    pub fn laplace_exponent(&self, theta: f64) -> f64 {
        let jumps = if self.jump_rate > 0.0 {
            self.jump_rate * (1.0 / (1.0 + theta * self.jump_mean) - 1.0)
        } else {
            0.0
        };
        self.drift * theta + 0.5 * self.sigma * self.sigma * theta * theta + jumps
    }

    /// Positive root of `ψ`.
    pub fn cramer_kappa(&self) -> Result<f64> {
        if self.jump_rate == 0.0 {
            return Ok(-2.0 * self.drift / (self.sigma * self.sigma));
        }
        let mut hi = 1.0;
        while self.laplace_exponent(hi) <= 0.0 {
            hi *= 2.0;
            if hi > 1e12 {
                return Err(Error::Degenerate("no Cramér root".into()));
            }
        }
        let mut lo = 0.0;
        // ψ < 0 just right of zero because the mean is negative.
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.laplace_exponent(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Esscher transform by `exp(θ z)`.
    pub fn esscher(&self, theta: f64) -> Self {
        let k = 1.0 + theta * self.jump_mean;
        Self {
            drift: self.drift + theta * self.sigma * self.sigma,
            sigma: self.sigma,
            jump_rate: if self.jump_rate > 0.0 {
                self.jump_rate / k
            } else {
                0.0
            },
            jump_mean: if self.jump_rate > 0.0 {
                self.jump_mean / k
            } else {
                0.0
            },
        }
    }

    /// Monte Carlo mean and standard error of `exp(κ Z(1))` (should be 1).
    pub fn cramer_check(&self, n: usize, rng: &mut dyn RngCore) -> Result<(f64, f64)> {
        let kappa = self.cramer_kappa()?;
        let poisson = if self.jump_rate > 0.0 {
            Some(
                rand_distr::Poisson::new(self.jump_rate)
                    .map_err(|_| param("jump_rate", "invalid"))?,
            )
        } else {
            None
        };
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let mut z = self.drift + self.sigma * std_normal(rng);
            if let Some(p) = &poisson {
                let k: f64 = p.sample(rng);
                for _ in 0..k as u64 {
                    let e: f64 = Exp1.sample(rng);
                    z -= self.jump_mean * e;
                }
            }
            let v = libm::exp(kappa * z);
            s += v;
            s2 += v * v;
        }
        let nf = n as f64;
        let mean = s / nf;
        let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
        Ok((mean, libm::sqrt(var / nf)))
    }
}

fn tau_increment(du: f64, za: f64, zb: f64, alpha: f64) -> f64 {
    let base = du * libm::exp(za / alpha);
    let d = (zb - za) / alpha;
    if d.abs() < 1e-12 {
        base * (1.0 + 0.5 * d)
    } else {
        base * libm::expm1(d) / d
    }
}

/// Streams driver knots `(u, z)` into knots of `Y`.
struct LampertiWriter {
    alpha: f64,
    tau: f64,
    u: f64,
    z: f64,
    mode: SegmentMode,
    out: PathBuilder,
}

impl LampertiWriter {
    fn new(alpha: f64, z0: f64, mode: SegmentMode) -> Self {
        let mut out = PathBuilder::new(1);
        out.push_scalar(0.0, libm::exp(z0), mode);
        Self {
            alpha,
            tau: 0.0,
            u: 0.0,
            z: z0,
            mode,
            out,
        }
    }

    /// Integrates the current segment up to `u` and records a knot.
    fn knot(&mut self, u: f64, z: f64, mode: SegmentMode, value: Option<f64>) {
        let continuous = u > self.u;
        self.advance(u, z);
        // Increments below one ulp of τ collapse knots; keep the latest.
        if self.out.len() > 1
            && self.out.last_time() == Some(self.tau)
            && (continuous || self.out.trailing_ties() >= 2)
        {
            self.out.pop();
        }
        self.out
            .push_scalar(self.tau, value.unwrap_or_else(|| libm::exp(z)), mode);
        self.z = z;
        self.mode = mode;
    }

    fn advance(&mut self, u: f64, z: f64) {
        let du = u - self.u;
        if du > 0.0 {
            let zb = if self.mode == Linear { z } else { self.z };
            self.tau += tau_increment(du, self.z, zb, self.alpha);
        }
        self.u = u;
    }

    fn finish(mut self, terminal: Option<f64>) -> CadlagPath {
        if let Some(v) = terminal {
            if self.out.last_time() == Some(self.tau) && self.out.len() > 1 {
                self.out.pop();
            }
            self.out.push_scalar(self.tau, v, ConstantRight);
        }
        self.out.set_last_mode(ConstantRight);
        let tau = self.tau;
        self.out.finish(tau).expect("Lamperti knots are ordered")
    }
}

/// Lamperti transform of a scalar driver path, killed after its last knot
/// (or at its lifetime when finite).
pub fn lamperti_transform(z: &CadlagPath, alpha: f64) -> Result<CadlagPath> {
    if z.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: z.dim(),
        });
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(param("alpha", "must be finite and > 0"));
    }
    let n = z.len();
    let last = z.time(n - 1);
    let u_end = if z.lifetime().is_finite() {
        z.lifetime()
    } else {
        last
    };
    let mut w = LampertiWriter::new(alpha, z.value(0)[0], z.mode(0));
    for i in 1..n {
        let zi = z.value(i)[0];
        w.knot(z.time(i), zi, z.mode(i), None);
    }
    if u_end > last {
        let zl = z.value(n - 1)[0];
        w.mode = ConstantRight;
        w.knot(u_end, zl, ConstantRight, None);
    }
    Ok(w.finish(None))
}

/// The pssMp of index `alpha` driven by `driver`, stopped at zero.
///
/// Driver steps have length `du`; the run ends once `Y` falls below
/// `floor` times its running supremum, which is recorded as the hit of zero.
#[derive(Clone, Debug)]
pub struct LampertiStopped {
    pub driver: LevyDriver,
    pub alpha: f64,
    pub du: f64,
    pub floor: f64,
}

impl LampertiStopped {
    pub fn new(driver: LevyDriver, alpha: f64, du: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(param("alpha", "must be finite and > 0"));
        }
        if !(du > 0.0) {
            return Err(param("du", "must be > 0"));
        }
        Ok(Self {
            driver,
            alpha,
            du,
            floor: 1e-8,
        })
    }

    /// Runs `driver` from `z0` until `Z >= target` (when given) or until the
    /// floor is reached. Returns whether the target was hit.
    #[allow(clippy::too_many_arguments)]
    fn simulate(
        &self,
        w: &mut LampertiWriter,
        driver: &LevyDriver,
        target: Option<f64>,
        sup: &mut f64,
        exit: f64,
        max_knots: usize,
        rng: &mut dyn RngCore,
    ) -> bool {
        let sd = driver.sigma;
        let mut next_jump = if driver.jump_rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            w.u + e / driver.jump_rate
        } else {
            f64::INFINITY
        };
        let log_floor = libm::log(self.floor);
        let mut coarse = false;
        loop {
            let du = if coarse { 10.0 * self.du } else { self.du };
            let step_end = (w.u + du).min(next_jump);
            let h = step_end - w.u;
            let zn = w.z + driver.drift * h + sd * libm::sqrt(h) * std_normal(rng);
            if let Some(tz) = target {
                if zn >= tz {
                    let s = (tz - w.z) / (zn - w.z);
                    let uc = w.u + h * s.clamp(0.0, 1.0);
                    let uc = if uc > w.u { uc } else { step_end };
                    w.knot(uc, tz, Linear, Some(libm::exp(tz)));
                    return true;
                }
            }
            if coarse {
                w.advance(step_end, zn);
                w.z = zn;
            } else {
                w.knot(step_end, zn, Linear, None);
            }
            let mut z = zn;
            if step_end == next_jump {
                let e: f64 = Exp1.sample(rng);
                z -= driver.jump_mean * e;
                if coarse {
                    w.z = z;
                } else {
                    w.knot(step_end, z, Linear, None);
                }
                let e: f64 = Exp1.sample(rng);
                next_jump = step_end + e / driver.jump_rate;
            }
            if !coarse {
                *sup = sup.max(libm::exp(z));
                if libm::exp(z) >= exit || w.out.len() + 4 >= max_knots {
                    coarse = true;
                }
            }
            if z < libm::log(*sup) + log_floor {
                return false;
            }
        }
    }

    /// Starts at `exp(z0)`, optionally climbing to `exp(level)` under the
    /// driver `ascent` first.
    fn run(
        &self,
        z0: f64,
        ascent: Option<(&LevyDriver, f64, f64)>,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> CadlagPath {
        let mut w = LampertiWriter::new(self.alpha, z0, Linear);
        let mut sup = libm::exp(z0);
        if let Some((drv, level, exact)) = ascent {
            while !self.simulate(
                &mut w,
                drv,
                Some(level),
                &mut sup,
                f64::INFINITY,
                res.max_knots,
                rng,
            ) {}
            w.out.pop();
            w.out.push_scalar(w.tau, exact, Linear);
            sup = sup.max(exact);
        }
        let driver = self.driver;
        self.simulate(
            &mut w,
            &driver,
            None,
            &mut sup,
            res.exit_level,
            res.max_knots,
            rng,
        );
        w.finish(Some(0.0))
    }
}

impl StoppedLaw for LampertiStopped {
    fn label(&self) -> &str {
        "lamperti"
    }

    fn sample_from(&self, x: f64, res: &Resolution, rng: &mut dyn RngCore) -> Result<CadlagPath> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(param("x", "starting point must be finite and > 0"));
        }
        Ok(self.run(libm::log(x), None, res, rng))
    }
}

/// Excursion measure of the recurrent extension of a pssMp whose driver
/// satisfies Cramér's condition with root `κ`, with `ν(sup >= r) = δ r^{-κ}`.
///
/// Excursions conditioned on reaching `r` climb from `start_frac · r` under
/// the Esscher-tilted driver (the `h`-transform with `h(x) = x^κ`), then
/// follow the stopped law. The lifetime tail `ν(T_0 > t) = δ C t^{-ακ}` uses
/// a constant `C` calibrated by Monte Carlo at construction.
#[derive(Clone, Debug)]
pub struct PssmpMeasure {
    label: String,
    stopped: LampertiStopped,
    tilted: LevyDriver,
    kappa: f64,
    delta: f64,
    start_frac: f64,
    tail_const: f64,
}

/// Level (relative to `t^α`) at which the lifetime tail is calibrated.
const CALIBRATION_LEVEL: f64 = 0.1;

impl PssmpMeasure {
    pub fn with_tail_constant(
        stopped: LampertiStopped,
        delta: f64,
        start_frac: f64,
        tail_const: f64,
    ) -> Result<Self> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(param("normalization", "must be finite and > 0"));
        }
        if !(start_frac > 0.0 && start_frac < 1.0) {
            return Err(param("start_frac", "must lie in (0, 1)"));
        }
        let kappa = stopped.driver.cramer_kappa()?;
        if !(stopped.alpha * kappa < 1.0) {
            return Err(param(
                "alpha",
                "need alpha * kappa < 1 for a recurrent extension",
            ));
        }
        Ok(Self {
            label: String::from("pssmp"),
            tilted: stopped.driver.esscher(kappa),
            stopped,
            kappa,
            delta,
            start_frac,
            tail_const,
        })
    }

    /// Builds the measure and calibrates the lifetime tail with `samples`
    /// conditioned excursions.
    pub fn calibrated(
        stopped: LampertiStopped,
        delta: f64,
        start_frac: f64,
        samples: usize,
        rng: &mut dyn RngCore,
    ) -> Result<Self> {
        let mut m = Self::with_tail_constant(stopped, delta, start_frac, 1.0)?;
        if samples == 0 {
            return Err(Error::InsufficientSamples { need: 1, got: 0 });
        }
        let res = Resolution::new(1.0, f64::INFINITY)?;
        let hits = (0..samples)
            .filter(|_| {
                m.sample_sup_conditioned(CALIBRATION_LEVEL, &res, rng)
                    .lifetime()
                    > 1.0
            })
            .count();
        m.tail_const = libm::pow(CALIBRATION_LEVEL, -m.kappa) * hits as f64 / samples as f64;
        Ok(m)
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn tail_constant(&self) -> f64 {
        self.tail_const
    }

    pub fn stopped(&self) -> &LampertiStopped {
        &self.stopped
    }

    /// Draws from `ν` conditioned on reaching `r` by the naive route: run the
    /// stopped law from `start_frac · r` and keep paths that reach `r`.
    /// Returns the path and the number of attempts.
    pub fn sample_sup_conditioned_by_rejection(
        &self,
        r: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> (CadlagPath, usize) {
        let x0 = r * self.start_frac;
        let mut tries = 0;
        loop {
            tries += 1;
            let p = self.stopped.run(libm::log(x0), None, res, rng);
            if p.sup_norm() >= r {
                return (p, tries);
            }
        }
    }
}

impl ExcursionMeasure for PssmpMeasure {
    fn label(&self) -> &str {
        &self.label
    }

    fn tail_mass(&self, eps: f64) -> f64 {
        self.delta * self.tail_const * libm::pow(eps, -self.stopped.alpha * self.kappa)
    }

    fn small_duration_mean(&self, eps: f64) -> f64 {
        let ak = self.stopped.alpha * self.kappa;
        self.delta * self.tail_const * ak / (1.0 - ak) * libm::pow(eps, 1.0 - ak)
    }

    fn sup_tail_mass(&self, r: f64) -> f64 {
        self.delta * libm::pow(r, -self.kappa)
    }

    fn sample_big(
        &self,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> (CadlagPath, Option<Mark>) {
        let r = CALIBRATION_LEVEL * libm::pow(eps, self.stopped.alpha);
        let res = res.with_exit(f64::INFINITY);
        loop {
            let p = self.sample_sup_conditioned(r, &res, rng);
            if p.lifetime() > eps {
                return (p, None);
            }
        }
    }

    fn sample_sup_conditioned(
        &self,
        r: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> CadlagPath {
        let z0 = libm::log(r * self.start_frac);
        self.stopped
            .run(z0, Some((&self.tilted, libm::log(r), r)), res, rng)
    }

    fn power_law(&self) -> Option<PowerLaw> {
        Some(PowerLaw {
            delta: self.delta,
            kappa: self.kappa,
        })
    }
}
