//! Excursion measures, stopped laws and their samplers.

use crate::error::{param, Result};
use crate::path::CadlagPath;
use crate::rng::RngCore;

pub mod brownian;
pub mod lamperti;
pub mod sigma;

pub use brownian::{BrownianIto, BrownianStopped};
pub use lamperti::{lamperti_transform, LampertiStopped, LevyDriver, PssmpMeasure};
pub use sigma::estimate_sigma;

/// Provenance tag of a sampled excursion (index of a mixture component).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mark(pub u32);

/// How finely to simulate an excursion.
///
/// Knots are produced every `step` time units until the excursion is older
/// than `horizon`, reaches norm `exit_level`, or `max_knots` knots exist.
/// Beyond that point the excursion is completed coarsely with a lifetime of
/// the correct law, so that it remains a valid element of `D⁰`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Resolution {
    pub step: f64,
    pub horizon: f64,
    pub exit_level: f64,
    pub max_knots: usize,
}

impl Resolution {
    pub fn new(step: f64, horizon: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() {
            return Err(param("step", "must be finite and > 0"));
        }
        if horizon.is_nan() || horizon < 0.0 {
            return Err(param("horizon", "must be >= 0"));
        }
        Ok(Self {
            step,
            horizon,
            exit_level: f64::INFINITY,
            max_knots: 2_000_000,
        })
    }

    pub fn with_exit(self, level: f64) -> Self {
        Self {
            exit_level: level,
            ..self
        }
    }

    /// Resolution seen by an excursion starting `elapsed` time units into the
    /// window.
    pub fn after(self, elapsed: f64) -> Self {
        Self {
            horizon: (self.horizon - elapsed).max(0.0),
            ..self
        }
    }

    /// Resolution in coordinates where time is multiplied by `time` and
    /// space by `space`.
    pub fn rescaled(self, time: f64, space: f64) -> Self {
        Self {
            step: self.step * time,
            horizon: self.horizon * time,
            exit_level: self.exit_level * space,
            max_knots: self.max_knots,
        }
    }
}

/// `σ(x) = δ |x|^{-κ}` for self-similar families.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerLaw {
    pub delta: f64,
    pub kappa: f64,
}

impl PowerLaw {
    pub fn sigma(&self, r: f64) -> f64 {
        self.delta * libm::pow(r, -self.kappa)
    }
}

pub trait ExcursionMeasure: Send + Sync {
    fn label(&self) -> &str;

    fn dim(&self) -> usize {
        1
    }

    /// `ν(D⁰)` when finite.
    fn total_mass(&self) -> Option<f64> {
        None
    }

    /// Mass of the part kept at truncation `eps` (for Itô measures,
    /// `ν(T_0 > eps)`).
    fn tail_mass(&self, eps: f64) -> f64;

    /// `∫ T_0 1{T_0 <= eps} dν`, absorbed into the drift of `η`.
    fn small_duration_mean(&self, eps: f64) -> f64;

    /// `ν(sup |w| >= r)`.
    fn sup_tail_mass(&self, r: f64) -> f64;

    /// One draw from the kept part at truncation `eps`, normalised.
    fn sample_big(
        &self,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> (CadlagPath, Option<Mark>);

    /// One draw from `ν(· | sup |w| >= r)`.
    fn sample_sup_conditioned(&self, r: f64, res: &Resolution, rng: &mut dyn RngCore)
        -> CadlagPath;

    /// Closed form of `σ(x) = ν(T_x < T_0)` when available.
    fn power_law(&self) -> Option<PowerLaw> {
        None
    }
}

/// Law of the process started away from zero and stopped at `T_0`.
pub trait StoppedLaw: Send + Sync {
    fn label(&self) -> &str;

    /// A path of `P⁰_x` for a radial start `x > 0`.
    fn sample_from(&self, x: f64, res: &Resolution, rng: &mut dyn RngCore) -> Result<CadlagPath>;
}

pub fn sample_stopped_path(
    law: &dyn StoppedLaw,
    x: f64,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<CadlagPath> {
    law.sample_from(x, res, rng)
}

pub type SharedMeasure = alloc::sync::Arc<dyn ExcursionMeasure>;
pub type SharedStopped = alloc::sync::Arc<dyn StoppedLaw>;
