//! Jumping-in excursion measures `Σ_v ρ(v) ν_v + ∫ j(dx) P⁰_x`.
//!
//! Marks are rays through the origin: a single half-line for scalar
//! processes, or finitely many planar rays. `j` is given per ray by a
//! radial measure on `(0, ∞)`.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::measures::{ExcursionMeasure, Mark, PowerLaw, Resolution, SharedMeasure, SharedStopped};
use crate::path::CadlagPath;
use crate::rng::{open_unit, RngCore};
use crate::special::{integrate, integrate_to_infinity};
use crate::walsh::embed_on_ray;

const QUAD_TOL: f64 = 1e-12;

/// A measure on `(0, ∞)`.
#[derive(Clone, Debug, PartialEq)]
pub enum RadialMeasure {
    /// `(position, weight)` pairs.
    Atomic(Vec<(f64, f64)>),
    /// Density `j0 β r^{-β-1}` on `(floor, ∞)`, so `j((r, ∞)) = j0 r^{-β}`
    /// for `r >= floor`. `floor = 0` gives infinite mass.
    PowerTail { j0: f64, beta: f64, floor: f64 },
    /// Density `mass · rate · e^{-rate r}`.
    Exponential { mass: f64, rate: f64 },
}

impl RadialMeasure {
    pub fn zero() -> Self {
        RadialMeasure::Atomic(Vec::new())
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            RadialMeasure::Atomic(atoms) => {
                for &(x, w) in atoms {
                    if !(x > 0.0) || !x.is_finite() || !(w >= 0.0) || !w.is_finite() {
                        return Err(param("j", "atoms need finite position > 0 and weight >= 0"));
                    }
                }
            }
            RadialMeasure::PowerTail { j0, beta, floor } => {
                if !(*j0 > 0.0) || !j0.is_finite() || !(*beta > 0.0) || !beta.is_finite() {
                    return Err(param("j", "power tail needs j0 > 0 and beta > 0"));
                }
                if !(*floor >= 0.0) || !floor.is_finite() {
                    return Err(param("j", "power tail floor must be finite and >= 0"));
                }
            }
            RadialMeasure::Exponential { mass, rate } => {
                if !(*mass >= 0.0) || !mass.is_finite() || !(*rate > 0.0) || !rate.is_finite() {
                    return Err(param("j", "exponential needs mass >= 0 and rate > 0"));
                }
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.total_mass() == 0.0
    }

    pub fn total_mass(&self) -> f64 {
        self.tail(0.0)
    }

    /// `j((r, ∞))`.
    pub fn tail(&self, r: f64) -> f64 {
        match self {
            RadialMeasure::Atomic(atoms) => atoms.iter().filter(|a| a.0 > r).map(|a| a.1).sum(),
            RadialMeasure::PowerTail { j0, beta, floor } => {
                let x = r.max(*floor);
                if x == 0.0 {
                    f64::INFINITY
                } else {
                    j0 * libm::pow(x, -beta)
                }
            }
            RadialMeasure::Exponential { mass, rate } => mass * libm::exp(-rate * r.max(0.0)),
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        match self {
            RadialMeasure::Atomic(_) => 0.0,
            RadialMeasure::PowerTail { j0, beta, floor } => {
                if x > *floor {
                    j0 * beta * libm::pow(x, -beta - 1.0)
                } else {
                    0.0
                }
            }
            RadialMeasure::Exponential { mass, rate } => mass * rate * libm::exp(-rate * x),
        }
    }

    /// `∫_{(0, r]} s^κ j(ds)`; `+∞` when it diverges at the origin.
    pub fn moment_upto(&self, kappa: f64, r: f64) -> f64 {
        if !(r > 0.0) {
            return 0.0;
        }
        match self {
            RadialMeasure::Atomic(atoms) => atoms
                .iter()
                .filter(|a| a.0 <= r)
                .map(|a| a.1 * libm::pow(a.0, kappa))
                .sum(),
            RadialMeasure::PowerTail { j0, beta, floor } => {
                if r <= *floor {
                    return 0.0;
                }
                let p = kappa - beta;
                if *floor == 0.0 && p <= 0.0 {
                    return f64::INFINITY;
                }
                if r.is_infinite() {
                    return if p < 0.0 {
                        j0 * beta * libm::pow(*floor, p) / -p
                    } else {
                        f64::INFINITY
                    };
                }
                if p == 0.0 {
                    j0 * beta * libm::log(r / floor)
                } else {
                    j0 * beta / p * (libm::pow(r, p) - libm::pow(*floor, p))
                }
            }
            RadialMeasure::Exponential { .. } => {
                let f = |s: f64| libm::pow(s, kappa) * self.density(s);
                if r.is_infinite() {
                    integrate_to_infinity(&f, 0.0, QUAD_TOL)
                } else {
                    integrate(&f, 0.0, r, QUAD_TOL)
                }
            }
        }
    }

    /// `∫ (s^κ ∧ 1) j(ds)`.
    pub fn moment_min1(&self, kappa: f64) -> f64 {
        self.moment_upto(kappa, 1.0) + self.tail(1.0)
    }

    /// `∫_{(r, ∞)} (s^κ ∧ 1) j(ds)`.
    pub fn moment_min1_above(&self, kappa: f64, r: f64) -> f64 {
        if r >= 1.0 {
            self.tail(r)
        } else {
            self.moment_upto(kappa, 1.0) - self.moment_upto(kappa, r) + self.tail(1.0)
        }
    }

    /// Same measure multiplied by `f >= 0`.
    pub fn scaled(&self, f: f64) -> Self {
        match self {
            RadialMeasure::Atomic(atoms) => {
                RadialMeasure::Atomic(atoms.iter().map(|&(x, w)| (x, w * f)).collect())
            }
            RadialMeasure::PowerTail { j0, beta, floor } => {
                if f == 0.0 {
                    RadialMeasure::zero()
                } else {
                    RadialMeasure::PowerTail {
                        j0: j0 * f,
                        beta: *beta,
                        floor: *floor,
                    }
                }
            }
            RadialMeasure::Exponential { mass, rate } => RadialMeasure::Exponential {
                mass: mass * f,
                rate: *rate,
            },
        }
    }

    /// `lim r^β j((r, ∞))` for a power tail; zero for the light-tailed
    /// classes.
    pub fn tail_index_limit(&self, beta: f64) -> f64 {
        match self {
            RadialMeasure::PowerTail { j0, beta: b, .. } if *b == beta => *j0,
            RadialMeasure::PowerTail { beta: b, .. } if *b < beta => f64::INFINITY,
            _ => 0.0,
        }
    }

    /// One draw from `j` restricted to `(r, ∞)` and normalised.
    pub fn sample_above(&self, r: f64, rng: &mut dyn RngCore) -> Result<f64> {
        let mass = self.tail(r);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(param(
                "r_min",
                format!("tail mass {mass} above {r} is not positive and finite"),
            ));
        }
        Ok(match self {
            RadialMeasure::Atomic(atoms) => {
                let mut u = rng.random::<f64>() * mass;
                let mut last = None;
                for &(x, w) in atoms.iter().filter(|a| a.0 > r && a.1 > 0.0) {
                    last = Some(x);
                    if u < w {
                        return Ok(x);
                    }
                    u -= w;
                }
                last.expect("positive mass implies an atom")
            }
            RadialMeasure::PowerTail { beta, floor, .. } => {
                r.max(*floor) * libm::pow(open_unit(rng), -1.0 / beta)
            }
            RadialMeasure::Exponential { rate, .. } => {
                r.max(0.0) - libm::log(open_unit(rng)) / rate
            }
        })
    }

    /// One draw from `s^κ j(ds)` restricted to `(0, r]` and normalised.
    pub fn sample_weighted_below(&self, kappa: f64, r: f64, rng: &mut dyn RngCore) -> Result<f64> {
        let mass = self.moment_upto(kappa, r);
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(param(
                "r",
                "weighted mass below r is not positive and finite",
            ));
        }
        Ok(match self {
            RadialMeasure::Atomic(atoms) => {
                let mut u = rng.random::<f64>() * mass;
                let mut last = None;
                for &(x, w) in atoms.iter().filter(|a| a.0 <= r && a.1 > 0.0) {
                    let m = w * libm::pow(x, kappa);
                    last = Some(x);
                    if u < m {
                        return Ok(x);
                    }
                    u -= m;
                }
                last.expect("positive mass implies an atom")
            }
            RadialMeasure::PowerTail { beta, floor, .. } => {
                let p = kappa - beta;
                let u = open_unit(rng);
                if p == 0.0 {
                    floor * libm::pow(r / floor, u)
                } else {
                    let (a, b) = (libm::pow(*floor, p), libm::pow(r, p));
                    libm::pow(a + u * (b - a), 1.0 / p)
                }
            }
            RadialMeasure::Exponential { rate, .. } => {
                // Proposal uniform on (0, r]; the target density s^κ e^{-rate s}
                // is bounded by its maximum over (0, r].
                let smax = if kappa > 0.0 {
                    (kappa / rate).min(r)
                } else {
                    r
                };
                let bound = libm::pow(smax, kappa) * libm::exp(-rate * smax);
                loop {
                    let s = r * open_unit(rng);
                    let g = libm::pow(s, kappa) * libm::exp(-rate * s);
                    if rng.random::<f64>() * bound <= g {
                        break s;
                    }
                }
            }
        })
    }

    /// `J(y) = inf{x > 0 : (1/δ) ∫_{(0,x]} s^κ j(ds) > y}`, or `+∞` when `y`
    /// is at least the total.
    pub fn j_inverse(&self, kappa: f64, delta: f64, y: f64) -> Result<f64> {
        if !(y >= 0.0) || !y.is_finite() {
            return Err(param("y", "must be finite and >= 0"));
        }
        if !(delta > 0.0) {
            return Err(param("normalization", "must be > 0"));
        }
        match self {
            RadialMeasure::Atomic(atoms) => {
                let mut sorted: Vec<(f64, f64)> =
                    atoms.iter().filter(|a| a.1 > 0.0).copied().collect();
                sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
                let mut acc = 0.0;
                for (x, w) in sorted {
                    acc += w * libm::pow(x, kappa) / delta;
                    if acc > y {
                        return Ok(x);
                    }
                }
                Ok(f64::INFINITY)
            }
            RadialMeasure::PowerTail { j0, beta, floor } => {
                let p = kappa - beta;
                if !(p > 0.0) {
                    return Err(Error::Divergent(String::from("need beta < kappa for J")));
                }
                let a = j0 * beta / (delta * p);
                Ok(libm::pow(libm::pow(*floor, p) + y / a, 1.0 / p))
            }
            RadialMeasure::Exponential { .. } => {
                let g = |x: f64| self.moment_upto(kappa, x) / delta;
                if y >= g(f64::INFINITY) {
                    return Ok(f64::INFINITY);
                }
                let (mut lo, mut hi) = (0.0, 1.0);
                while g(hi) <= y {
                    lo = hi;
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(mid) > y {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }
}

/// Where marks live.
#[derive(Clone, Debug, PartialEq)]
pub enum Geometry {
    /// `S = [0, ∞)` with one mark.
    HalfLine,
    /// Unit vectors in the plane, one per mark.
    Rays(Vec<[f64; 2]>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct MarkData {
    pub rho: f64,
    pub j: RadialMeasure,
}

/// `(ρ, j, ς)` with the ray map `ψ` given by the geometry.
#[derive(Clone, Debug, PartialEq)]
pub struct JumpInTriple {
    pub marks: Vec<MarkData>,
    pub varsigma: f64,
    pub geometry: Geometry,
}

impl JumpInTriple {
    pub fn half_line(rho: f64, j: RadialMeasure, varsigma: f64) -> Self {
        Self {
            marks: vec![MarkData { rho, j }],
            varsigma,
            geometry: Geometry::HalfLine,
        }
    }

    pub fn dim(&self) -> usize {
        match self.geometry {
            Geometry::HalfLine => 1,
            Geometry::Rays(_) => 2,
        }
    }

    pub fn ray(&self, mark: usize) -> Option<[f64; 2]> {
        match &self.geometry {
            Geometry::HalfLine => None,
            Geometry::Rays(v) => v.get(mark).copied(),
        }
    }

    /// `ψ(x)`: the mark of the ray through `x`. Invariant under positive
    /// dilations.
    pub fn psi(&self, x: &[f64]) -> Option<usize> {
        match &self.geometry {
            Geometry::HalfLine => (x.len() == 1 && x[0] > 0.0).then_some(0),
            Geometry::Rays(rays) => {
                if x.len() != 2 {
                    return None;
                }
                let r = libm::hypot(x[0], x[1]);
                if !(r > 0.0) {
                    return None;
                }
                rays.iter().position(|v| {
                    libm::fabs(x[0] / r - v[0]) <= 1e-12 && libm::fabs(x[1] / r - v[1]) <= 1e-12
                })
            }
        }
    }

    fn check_structure(&self) -> Result<()> {
        if self.marks.is_empty() {
            return Err(param("rho", "at least one mark is required"));
        }
        match &self.geometry {
            Geometry::HalfLine if self.marks.len() != 1 => {
                return Err(param("geometry", "the half-line has exactly one mark"));
            }
            Geometry::Rays(rays) => {
                if rays.len() != self.marks.len() {
                    return Err(param("geometry", "one ray per mark"));
                }
                for v in rays {
                    if libm::fabs(libm::hypot(v[0], v[1]) - 1.0) > 1e-12 {
                        return Err(param("geometry", "rays must be unit vectors"));
                    }
                }
            }
            _ => {}
        }
        if !(self.varsigma >= 0.0) || !self.varsigma.is_finite() {
            return Err(param("varsigma", "must be finite and >= 0"));
        }
        for m in &self.marks {
            if !(m.rho >= 0.0) {
                return Err(param("rho", "weights must be >= 0"));
            }
            m.j.validate()?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub value: f64,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub checks: Vec<ConditionCheck>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

/// Checks that `(ρ, j, ς)` generates a recurrent extension: `ρ` finite,
/// `∫ (|x|^κ ∧ 1) j(dx) < ∞`, and at least one of `ρ > 0`, `j` infinite,
/// `ς > 0`.
pub fn validate_triple(triple: &JumpInTriple, kappa: f64) -> AdmissibilityReport {
    let structure = triple.check_structure();
    let rho: f64 = triple.marks.iter().map(|m| m.rho).sum();
    let moment: f64 = triple.marks.iter().map(|m| m.j.moment_min1(kappa)).sum();
    let jmass: f64 = triple.marks.iter().map(|m| m.j.total_mass()).sum();
    let mut checks = vec![ConditionCheck {
        name: "well_formed",
        passed: structure.is_ok(),
        value: f64::from(u8::from(structure.is_ok())),
        detail: structure.err().map(|e| format!("{e}")).unwrap_or_default(),
    }];
    checks.push(ConditionCheck {
        name: "finite_rho",
        passed: rho.is_finite(),
        value: rho,
        detail: format!("rho total = {rho}"),
    });
    checks.push(ConditionCheck {
        name: "jump_moment",
        passed: moment.is_finite() && kappa > 0.0,
        value: moment,
        detail: format!("integral of min(|x|^{kappa}, 1) against j = {moment}"),
    });
    let nondegenerate = rho > 0.0 || jmass.is_infinite() || triple.varsigma > 0.0;
    checks.push(ConditionCheck {
        name: "nondegenerate",
        passed: nondegenerate,
        value: rho + triple.varsigma + if jmass.is_infinite() { 1.0 } else { 0.0 },
        detail: format!(
            "rho = {rho}, j mass = {jmass}, varsigma = {}",
            triple.varsigma
        ),
    });
    AdmissibilityReport { checks }
}

/// Monte Carlo spot check of `∫_{(r,∞)} (s^κ ∧ 1) j(ds)` through the sampler
/// of `j` above `r`. Returns `(exact, estimate, standard error)`.
pub fn spot_check_moment(
    j: &RadialMeasure,
    kappa: f64,
    r: f64,
    n: usize,
    rng: &mut dyn RngCore,
) -> Result<(f64, f64, f64)> {
    if n < 2 {
        return Err(Error::InsufficientSamples { need: 2, got: n });
    }
    let mass = j.tail(r);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let x = j.sample_above(r, rng)?;
        let v = libm::pow(x, kappa).min(1.0);
        s += v;
        s2 += v * v;
    }
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    Ok((
        j.moment_min1_above(kappa, r),
        mass * mean,
        mass * libm::sqrt(var / nf),
    ))
}

/// `j(dv dr) = ρ_j(dv) j_v(dr)` on finitely many rays.
#[derive(Clone, Debug, PartialEq)]
pub struct Disintegration {
    pub rays: Vec<[f64; 2]>,
    /// Probability weights on the rays.
    pub angular: Vec<f64>,
    pub radial: Vec<RadialMeasure>,
}

impl Disintegration {
    /// `π(v) = ∫ r j_v(dr)`.
    pub fn pi(&self, ray: usize) -> f64 {
        self.radial[ray].moment_upto(1.0, f64::INFINITY)
    }

    /// `ρ_j(v) j_v`, which reproduces the per-ray measure.
    pub fn recompose(&self) -> Vec<RadialMeasure> {
        self.angular
            .iter()
            .zip(&self.radial)
            .map(|(&a, j)| j.scaled(a))
            .collect()
    }
}

/// Canonical disintegration: condition on the probability measure
/// `f · j` with `f(v, r) = (r ∧ 1) / ∫ (|x| ∧ 1) j(dx)`. The angular weights
/// are the per-ray masses of `f · j`; each kernel is the per-ray measure
/// divided by its angular weight.
pub fn disintegrate(rays: &[[f64; 2]], j: &[RadialMeasure]) -> Result<Disintegration> {
    if rays.len() != j.len() {
        return Err(param("rays", "one radial measure per ray"));
    }
    let masses: Vec<f64> = j.iter().map(|m| m.moment_min1(1.0)).collect();
    let total: f64 = masses.iter().sum();
    if total == 0.0 {
        return Err(Error::Degenerate(String::from("empty jump measure")));
    }
    if !total.is_finite() {
        return Err(Error::Divergent(String::from(
            "integral of min(|x|, 1) against j",
        )));
    }
    let angular: Vec<f64> = masses.iter().map(|m| m / total).collect();
    let radial = j
        .iter()
        .zip(&angular)
        .map(|(m, &a)| {
            if a > 0.0 {
                m.scaled(1.0 / a)
            } else {
                RadialMeasure::zero()
            }
        })
        .collect();
    Ok(Disintegration {
        rays: rays.to_vec(),
        angular,
        radial,
    })
}

/// What a provenance mark of [`JumpInMeasure`] refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Component {
    Excursion(usize),
    JumpIn(usize),
}

impl Component {
    pub fn mark(self) -> Mark {
        match self {
            Component::Excursion(v) => Mark(2 * v as u32),
            Component::JumpIn(v) => Mark(2 * v as u32 + 1),
        }
    }

    pub fn from_mark(m: Mark) -> Self {
        let v = (m.0 / 2) as usize;
        if m.0.is_multiple_of(2) {
            Component::Excursion(v)
        } else {
            Component::JumpIn(v)
        }
    }

    pub fn ray(self) -> usize {
        match self {
            Component::Excursion(v) | Component::JumpIn(v) => v,
        }
    }
}

/// Sampler of `ν_{ρ,j}` truncated at lifetime `ε`.
///
/// Continuous-entry excursions are truncated by lifetime. Jump-ins are
/// truncated by starting distance `|x| > ε^α`; those below are replaced by
/// whole excursions of `ν_{ψ(x)}` with weight `∫_{|x| <= ε^α} j(dx) / σ(x)`,
/// which is how they look from far away.
pub struct JumpInMeasure {
    triple: JumpInTriple,
    excursions: Vec<SharedMeasure>,
    stopped: Vec<SharedStopped>,
    laws: Vec<PowerLaw>,
    alpha: f64,
    kappa: f64,
    label: String,
    report: AdmissibilityReport,
}

impl core::fmt::Debug for JumpInMeasure {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("JumpInMeasure")
            .field("triple", &self.triple)
            .field("alpha", &self.alpha)
            .field("kappa", &self.kappa)
            .finish()
    }
}

impl JumpInMeasure {
    /// `excursions[v]` is `ν_v` and `stopped[v]` the radial stopped law on
    /// ray `v`. Both must be scalar.
    pub fn assemble(
        triple: JumpInTriple,
        excursions: Vec<SharedMeasure>,
        stopped: Vec<SharedStopped>,
        alpha: f64,
        kappa: f64,
    ) -> Result<Self> {
        let report = validate_triple(&triple, kappa);
        // A degenerate triple (finite jump rate, no drift, no continuous
        // entries) still pieces into a valid path; it is reported, not refused.
        if !report
            .checks
            .iter()
            .all(|c| c.passed || c.name == "nondegenerate")
        {
            let what: Vec<String> = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| format!("{} ({})", c.name, c.detail))
                .collect();
            return Err(Error::Inadmissible(what.join("; ")));
        }
        if excursions.len() != triple.marks.len() {
            return Err(param("specs", "missing excursion measure for a mark"));
        }
        if stopped.len() != triple.marks.len() {
            return Err(param("stopped", "missing stopped law for a mark"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(param("alpha", "must be finite and > 0"));
        }
        let mut laws = Vec::with_capacity(excursions.len());
        for e in &excursions {
            if e.dim() != 1 {
                return Err(Error::Dimension {
                    expected: 1,
                    got: e.dim(),
                });
            }
            let law = e
                .power_law()
                .ok_or_else(|| param("specs", "excursion measures need a closed-form sigma"))?;
            laws.push(law);
        }
        let label = format!(
            "jumpin[{}]",
            excursions
                .iter()
                .map(|e| e.label())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Self {
            triple,
            excursions,
            stopped,
            laws,
            alpha,
            kappa,
            label,
            report,
        })
    }

    pub fn admissibility(&self) -> &AdmissibilityReport {
        &self.report
    }

    pub fn triple(&self) -> &JumpInTriple {
        &self.triple
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn excursion_measure(&self, v: usize) -> &SharedMeasure {
        &self.excursions[v]
    }

    pub fn law(&self, v: usize) -> PowerLaw {
        self.laws[v]
    }

    pub fn r_min(&self, eps: f64) -> f64 {
        if eps > 0.0 {
            libm::pow(eps, self.alpha)
        } else {
            0.0
        }
    }

    /// `∫_{|x| <= r} j_v(dx) / σ_v(x)` for `σ_v(x) = δ_v |x|^{-κ}`.
    pub fn rho_truncated(&self, v: usize, r: f64) -> f64 {
        let law = self.laws[v];
        self.triple.marks[v].j.moment_upto(law.kappa, r) / law.delta
    }

    pub fn rho_effective(&self, v: usize, eps: f64) -> f64 {
        self.triple.marks[v].rho + self.rho_truncated(v, self.r_min(eps))
    }

    /// Mixture weights of all components at truncation `eps`.
    pub fn component_masses(&self, eps: f64) -> Vec<(Component, f64)> {
        let r = self.r_min(eps);
        let mut out = Vec::with_capacity(2 * self.triple.marks.len());
        for (v, m) in self.triple.marks.iter().enumerate() {
            let rho = self.rho_effective(v, eps);
            let em = if rho > 0.0 {
                if eps > 0.0 {
                    rho * self.excursions[v].tail_mass(eps)
                } else {
                    self.excursions[v]
                        .total_mass()
                        .map_or(f64::INFINITY, |t| rho * t)
                }
            } else {
                0.0
            };
            out.push((Component::Excursion(v), em));
            out.push((Component::JumpIn(v), m.j.tail(r)));
        }
        out
    }

    fn embed(&self, v: usize, q: CadlagPath) -> CadlagPath {
        match self.triple.ray(v) {
            None => q,
            Some(ray) => embed_on_ray(&q, ray).expect("rays are validated unit vectors"),
        }
    }

    /// One draw from the given component.
    pub fn sample_component(
        &self,
        c: Component,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> Result<CadlagPath> {
        let v = c.ray();
        let q = match c {
            Component::Excursion(_) => self.excursions[v].sample_big(eps, res, rng).0,
            Component::JumpIn(_) => {
                let x = self.triple.marks[v].j.sample_above(self.r_min(eps), rng)?;
                self.stopped[v].sample_from(x, res, rng)?
            }
        };
        Ok(self.embed(v, q))
    }
}

fn pick(weights: &[f64], rng: &mut dyn RngCore) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return i;
            }
            u -= w;
        }
    }
    last
}

impl ExcursionMeasure for JumpInMeasure {
    fn label(&self) -> &str {
        &self.label
    }

    fn dim(&self) -> usize {
        self.triple.dim()
    }

    fn total_mass(&self) -> Option<f64> {
        let t: f64 = self.component_masses(0.0).iter().map(|c| c.1).sum();
        t.is_finite().then_some(t)
    }

    fn tail_mass(&self, eps: f64) -> f64 {
        self.component_masses(eps).iter().map(|c| c.1).sum()
    }

    fn small_duration_mean(&self, eps: f64) -> f64 {
        (0..self.triple.marks.len())
            .map(|v| {
                let rho = self.rho_effective(v, eps);
                if rho > 0.0 {
                    rho * self.excursions[v].small_duration_mean(eps)
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Jump-ins below `r` reach `r` with probability `(|x| / r)^κ`, the
    /// diffusion hitting probability for `σ(x) = δ |x|^{-κ}`.
    fn sup_tail_mass(&self, r: f64) -> f64 {
        self.triple
            .marks
            .iter()
            .enumerate()
            .map(|(v, m)| {
                let k = self.laws[v].kappa;
                let exc = if m.rho > 0.0 {
                    m.rho * self.excursions[v].sup_tail_mass(r)
                } else {
                    0.0
                };
                exc + m.j.tail(r) + m.j.moment_upto(k, r) / libm::pow(r, k)
            })
            .sum()
    }

    fn sample_big(
        &self,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> (CadlagPath, Option<Mark>) {
        let masses = self.component_masses(eps);
        let w: Vec<f64> = masses.iter().map(|c| c.1).collect();
        let c = masses[pick(&w, rng)].0;
        let path = self
            .sample_component(c, eps, res, rng)
            .expect("components with positive mass can be sampled");
        (path, Some(c.mark()))
    }

    /// A jump-in from `x < r` that reaches `r` is the post-`T_x` part of an
    /// excursion of `ν_{ψ(x)}` conditioned on reaching `r`.
    fn sample_sup_conditioned(
        &self,
        r: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> CadlagPath {
        let mut w = Vec::with_capacity(3 * self.triple.marks.len());
        for (v, m) in self.triple.marks.iter().enumerate() {
            let k = self.laws[v].kappa;
            w.push(if m.rho > 0.0 {
                m.rho * self.excursions[v].sup_tail_mass(r)
            } else {
                0.0
            });
            w.push(m.j.tail(r));
            w.push(m.j.moment_upto(k, r) / libm::pow(r, k));
        }
        let i = pick(&w, rng);
        let (v, kind) = (i / 3, i % 3);
        let m = &self.triple.marks[v];
        let q = match kind {
            0 => self.excursions[v].sample_sup_conditioned(r, res, rng),
            1 => {
                let x = m.j.sample_above(r, rng).expect("positive tail");
                self.stopped[v]
                    .sample_from(x, res, rng)
                    .expect("start is positive")
            }
            _ => {
                let x =
                    m.j.sample_weighted_below(self.laws[v].kappa, r, rng)
                        .expect("positive weighted mass");
                let e = self.excursions[v].sample_sup_conditioned(r, res, rng);
                let t = e.hitting_time(&[x]).expect("scalar level");
                e.shift(t)
            }
        };
        self.embed(v, q)
    }

    fn power_law(&self) -> Option<PowerLaw> {
        None
    }
}
