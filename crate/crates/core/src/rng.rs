//! Reproducible random streams.
//!
//! Every unit of work draws from its own ChaCha8 stream seeded with
//! `master ^ index`, so results do not depend on scheduling.

pub use rand::RngCore;
use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng;

pub fn stream(master: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(master ^ index)
}

/// Packs a work-unit coordinate into a stream index.
pub fn task_index(component: u16, level: u16, item: u32) -> u64 {
    (u64::from(component) << 48) | (u64::from(level) << 32) | u64::from(item)
}

/// Uniform on `(0, 1]`.
pub fn open_unit(rng: &mut dyn RngCore) -> f64 {
    use rand::Rng;
    1.0 - rng.random::<f64>()
}

pub fn std_normal(rng: &mut dyn RngCore) -> f64 {
    use rand_distr::Distribution;
    rand_distr::StandardNormal.sample(rng)
}
