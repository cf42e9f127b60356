//! Poisson point processes of excursions indexed by local time.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::error::{param, Error, Result};
use crate::measures::{ExcursionMeasure, Mark, Resolution};
use crate::path::{CadlagPath, ScalingScheme};
use crate::rng::RngCore;

#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub location: f64,
    pub excursion: CadlagPath,
    pub mark: Option<Mark>,
}

/// Points on `[0, l_max]` with strictly increasing locations.
///
/// `truncation_eps` is the lifetime cutoff used when sampling and
/// `compensator_rate` the drift that replaces the discarded small excursions.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkedPointProcess {
    points: Vec<Point>,
    l_max: f64,
    truncation_eps: f64,
    compensator_rate: f64,
    dim: usize,
}

impl MarkedPointProcess {
    /// Validates and normalises the excursions (an explicit knot at each
    /// lifetime).
    pub fn new(
        dim: usize,
        mut points: Vec<Point>,
        l_max: f64,
        truncation_eps: f64,
        compensator_rate: f64,
    ) -> Result<Self> {
        if !(l_max >= 0.0) || !l_max.is_finite() {
            return Err(param("l_max", "must be finite and >= 0"));
        }
        if !(compensator_rate >= 0.0) || !compensator_rate.is_finite() {
            return Err(param("compensator_rate", "must be finite and >= 0"));
        }
        let mut prev = f64::NEG_INFINITY;
        for p in &mut points {
            if !(p.location > prev) || p.location < 0.0 || p.location > l_max {
                return Err(param(
                    "points",
                    "locations must be strictly increasing within [0, l_max]",
                ));
            }
            prev = p.location;
            let life = p.excursion.lifetime();
            if !(life > 0.0) || !life.is_finite() {
                return Err(param(
                    "points",
                    "excursions need a finite positive lifetime",
                ));
            }
            if p.excursion.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: p.excursion.dim(),
                });
            }
            p.excursion =
                core::mem::replace(&mut p.excursion, CadlagPath::zero(dim)).with_terminal_knot();
        }
        Ok(Self {
            points,
            l_max,
            truncation_eps,
            compensator_rate,
            dim,
        })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn truncation_eps(&self) -> f64 {
        self.truncation_eps
    }

    pub fn compensator_rate(&self) -> f64 {
        self.compensator_rate
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Σ T_0` over points with location `<= l`.
    pub fn total_lifetime(&self, l: f64) -> f64 {
        self.points
            .iter()
            .take_while(|p| p.location <= l)
            .map(|p| p.excursion.lifetime())
            .sum()
    }

    /// Keeps the points with location `<= l` and shrinks the window to
    /// `[0, l]`.
    pub fn restrict(&mut self, l: f64) -> Result<()> {
        if !(l >= 0.0) || !(l <= self.l_max) {
            return Err(param("l_max", "restriction must lie in [0, l_max]"));
        }
        self.points.retain(|p| p.location <= l);
        self.l_max = l;
        Ok(())
    }

    /// Appends an independent sample on `(l_max, new_l_max]`, which keeps the
    /// whole a sample on `[0, new_l_max]`.
    pub fn extend(
        &mut self,
        spec: &dyn ExcursionMeasure,
        new_l_max: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> Result<()> {
        if !(new_l_max >= self.l_max) {
            return Err(param("l_max", "extension must not shrink the window"));
        }
        let elapsed = self.compensator_rate * self.l_max + self.total_lifetime(self.l_max);
        let extra = sample_window(
            spec,
            self.l_max,
            new_l_max,
            self.truncation_eps,
            self.compensator_rate,
            elapsed,
            res,
            rng,
        )?;
        self.points.extend(extra);
        self.l_max = new_l_max;
        Ok(())
    }
}

fn kept_mass(spec: &dyn ExcursionMeasure, eps: f64) -> Result<f64> {
    if eps > 0.0 {
        return Ok(spec.tail_mass(eps));
    }
    if eps == 0.0 {
        if let Some(m) = spec.total_mass() {
            return Ok(m);
        }
    }
    Err(param(
        "eps",
        "must be > 0 for an infinite excursion measure",
    ))
}

/// Points on `(lo, hi]`, generated in location order so that each
/// excursion is resolved only as far as the time window still requires.
#[allow(clippy::too_many_arguments)]
fn sample_window(
    spec: &dyn ExcursionMeasure,
    lo: f64,
    hi: f64,
    eps: f64,
    compensator: f64,
    mut elapsed: f64,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<Vec<Point>> {
    let mass = kept_mass(spec, eps)?;
    let mean = (hi - lo) * mass;
    if !mean.is_finite() {
        return Err(param("eps", "kept mass is not finite"));
    }
    let count = if mean > 0.0 {
        let p = Poisson::new(mean).map_err(|_| param("eps", "invalid Poisson mean"))?;
        let k: f64 = p.sample(rng);
        k as usize
    } else {
        0
    };
    let mut locs: Vec<f64> = (0..count)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    locs.sort_by(f64::total_cmp);
    // Redraw the (measure-zero) collisions and the excluded left end.
    loop {
        let mut fixed = true;
        for i in 0..locs.len() {
            let bad = (i > 0 && locs[i] == locs[i - 1]) || (lo > 0.0 && locs[i] <= lo);
            if bad {
                locs[i] = lo + (hi - lo) * rng.random::<f64>();
                fixed = false;
            }
        }
        if fixed {
            break;
        }
        locs.sort_by(f64::total_cmp);
    }
    let mut points = Vec::with_capacity(count);
    let mut prev_loc = lo;
    for loc in locs {
        elapsed += compensator * (loc - prev_loc);
        prev_loc = loc;
        let local = res.after(elapsed);
        let (path, mark) = spec.sample_big(eps, &local, rng);
        elapsed += path.lifetime();
        points.push(Point {
            location: loc,
            excursion: path.with_terminal_knot(),
            mark,
        });
    }
    Ok(points)
}

/// Samples the excursions with `T_0 > eps` on `[0, l_max]`. The discarded
/// small excursions contribute `small_duration_mean(eps)` to the drift.
pub fn sample_ppp(
    spec: &dyn ExcursionMeasure,
    l_max: f64,
    eps: f64,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<MarkedPointProcess> {
    if !(l_max >= 0.0) || !l_max.is_finite() {
        return Err(param("l_max", "must be finite and >= 0"));
    }
    kept_mass(spec, eps)?;
    let compensator = if eps > 0.0 {
        spec.small_duration_mean(eps)
    } else {
        0.0
    };
    let points = sample_window(spec, 0.0, l_max, eps, compensator, 0.0, res, rng)?;
    Ok(MarkedPointProcess {
        points,
        l_max,
        truncation_eps: eps,
        compensator_rate: compensator,
        dim: spec.dim(),
    })
}

/// Union of two independent processes on the same window.
pub fn superpose(
    a: &MarkedPointProcess,
    b: &MarkedPointProcess,
    rng: &mut dyn RngCore,
) -> Result<MarkedPointProcess> {
    if a.l_max != b.l_max {
        return Err(Error::Mismatch("different l_max".into()));
    }
    if a.dim != b.dim {
        return Err(Error::Dimension {
            expected: a.dim,
            got: b.dim,
        });
    }
    let mut points: Vec<Point> = a.points.iter().chain(&b.points).cloned().collect();
    points.sort_by(|x, y| x.location.total_cmp(&y.location));
    loop {
        let mut tie = None;
        for i in 1..points.len() {
            if points[i].location == points[i - 1].location {
                tie = Some(i);
                break;
            }
        }
        match tie {
            None => break,
            Some(i) => {
                points[i].location = a.l_max * rng.random::<f64>();
                points.sort_by(|x, y| x.location.total_cmp(&y.location));
            }
        }
    }
    Ok(MarkedPointProcess {
        points,
        l_max: a.l_max,
        truncation_eps: a.truncation_eps.max(b.truncation_eps),
        compensator_rate: a.compensator_rate + b.compensator_rate,
        dim: a.dim,
    })
}

/// Image of `p` under `(l, e) ↦ (c^{-γn} l, Ψ_α^n e)`.
pub fn rescale_point_process(
    p: &MarkedPointProcess,
    scheme: &ScalingScheme,
    gamma: f64,
    n: i32,
) -> MarkedPointProcess {
    let nf = f64::from(n);
    let lf = scheme.pow(gamma * nf);
    let points = p
        .points
        .iter()
        .map(|pt| Point {
            location: pt.location / lf,
            excursion: pt.excursion.apply_psi(scheme, scheme.alpha, n),
            mark: pt.mark,
        })
        .collect();
    MarkedPointProcess {
        points,
        l_max: p.l_max / lf,
        truncation_eps: p.truncation_eps / scheme.pow(nf),
        compensator_rate: p.compensator_rate * scheme.pow(gamma * nf) / scheme.pow(nf),
        dim: p.dim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::BrownianIto;
    use crate::rng::stream;
    use proptest::prelude::*;

    fn res() -> Resolution {
        Resolution::new(1e-3, 0.5).unwrap()
    }

    #[test]
    fn empty_and_error_cases() {
        let m = BrownianIto::new(1.0).unwrap();
        let p = sample_ppp(&m, 0.0, 0.01, &res(), &mut stream(1, 0)).unwrap();
        assert!(p.is_empty());
        assert!(sample_ppp(&m, 1.0, 0.0, &res(), &mut stream(1, 0)).is_err());
        assert!(sample_ppp(&m, -1.0, 0.1, &res(), &mut stream(1, 0)).is_err());
    }

    #[test]
    fn counts_are_poisson() {
        let m = BrownianIto::new(1.0).unwrap();
        let eps = 0.05;
        let lam = m.tail_mass(eps);
        let mut rng = stream(2, 0);
        let reps = 2000;
        let counts: Vec<f64> = (0..reps)
            .map(|_| {
                sample_ppp(&m, 1.0, eps, &Resolution::new(0.01, 0.0).unwrap(), &mut rng)
                    .unwrap()
                    .len() as f64
            })
            .collect();
        let mean = counts.iter().sum::<f64>() / reps as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (reps - 1) as f64;
        assert!(
            (mean - lam).abs() < 4.0 * libm::sqrt(lam / reps as f64),
            "{mean} vs {lam}"
        );
        assert!((var / lam - 1.0).abs() < 0.15, "dispersion {}", var / lam);
    }

    #[test]
    fn points_are_ordered_and_truncated() {
        let m = BrownianIto::new(1.0).unwrap();
        let p = sample_ppp(&m, 3.0, 0.01, &res(), &mut stream(3, 0)).unwrap();
        assert!(p.points().windows(2).all(|w| w[0].location < w[1].location));
        assert!(p.points().iter().all(|q| q.excursion.lifetime() > 0.01));
        assert_eq!(p.compensator_rate(), m.small_duration_mean(0.01));
    }

    #[test]
    fn superpose_requires_same_window() {
        let m = BrownianIto::new(1.0).unwrap();
        let a = sample_ppp(&m, 1.0, 0.1, &res(), &mut stream(4, 0)).unwrap();
        let b = sample_ppp(&m, 2.0, 0.1, &res(), &mut stream(4, 1)).unwrap();
        assert!(superpose(&a, &b, &mut stream(4, 2)).is_err());
        let c = sample_ppp(&m, 1.0, 0.1, &res(), &mut stream(4, 3)).unwrap();
        let s = superpose(&a, &c, &mut stream(4, 4)).unwrap();
        assert_eq!(s.len(), a.len() + c.len());
        assert_eq!(
            s.compensator_rate(),
            a.compensator_rate() + c.compensator_rate()
        );
    }

    #[test]
    fn rescale_identity_and_composition() {
        let m = BrownianIto::new(1.0).unwrap();
        let p = sample_ppp(&m, 1.0, 0.01, &res(), &mut stream(5, 0)).unwrap();
        let s = ScalingScheme::new(2.0, 0.5).unwrap();
        assert_eq!(rescale_point_process(&p, &s, 0.5, 0), p);
        let twice = rescale_point_process(&rescale_point_process(&p, &s, 0.5, 1), &s, 0.5, 2);
        let once = rescale_point_process(&p, &s, 0.5, 3);
        assert_eq!(twice.len(), once.len());
        for (a, b) in twice.points().iter().zip(once.points()) {
            assert!((a.location - b.location).abs() < 1e-12 * b.location.max(1.0));
            assert!(a.excursion.approx_eq(&b.excursion, 1e-12));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn superpose_is_commutative(seed in 0u64..1000) {
            let m = BrownianIto::new(1.0).unwrap();
            let r = Resolution::new(0.05, 0.0).unwrap();
            let a = sample_ppp(&m, 1.0, 0.1, &r, &mut stream(seed, 0)).unwrap();
            let b = sample_ppp(&m, 1.0, 0.1, &r, &mut stream(seed, 1)).unwrap();
            let ab = superpose(&a, &b, &mut stream(seed, 2)).unwrap();
            let ba = superpose(&b, &a, &mut stream(seed, 2)).unwrap();
            let key = |p: &MarkedPointProcess| p.points().iter().map(|q| q.location).collect::<Vec<_>>();
            prop_assert_eq!(key(&ab), key(&ba));
        }
    }
}
