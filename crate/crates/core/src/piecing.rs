//! Piecing excursions together into `(X, L, η)`.
//!
//! `η(l) = ς l + Σ_{ℓ <= l} T_0(p^{(ℓ)})` with `ς` the effective drift (the
//! requested `ς` plus the compensator of truncated excursions),
//! `L = η^{-1}` and `X(t) = p^{(ℓ)}(t - η(ℓ-))` on excursion intervals.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::path::{CadlagPath, PathBuilder, ScalingScheme, SegmentMode};
use crate::point_process::{MarkedPointProcess, Point};

use SegmentMode::{ConstantRight, Linear};

/// Inverse local time on `[0, l_max]`: drift plus jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct Eta {
    locations: Vec<f64>,
    sizes: Vec<f64>,
    cumulative: Vec<f64>,
    drift: f64,
    l_max: f64,
}

impl Eta {
    pub fn new(locations: Vec<f64>, sizes: Vec<f64>, drift: f64, l_max: f64) -> Result<Self> {
        if locations.len() != sizes.len() {
            return Err(param("sizes", "one size per location"));
        }
        if !(drift >= 0.0) || !drift.is_finite() {
            return Err(param("drift", "must be finite and >= 0"));
        }
        if locations.windows(2).any(|w| !(w[1] > w[0])) || sizes.iter().any(|&s| !(s > 0.0)) {
            return Err(param(
                "locations",
                "must increase strictly, with positive sizes",
            ));
        }
        let mut acc = 0.0;
        let cumulative = sizes
            .iter()
            .map(|&s| {
                acc += s;
                acc
            })
            .collect();
        Ok(Self {
            locations,
            sizes,
            cumulative,
            drift,
            l_max,
        })
    }

    pub fn from_process(p: &MarkedPointProcess, varsigma: f64) -> Result<Self> {
        let locations = p.points().iter().map(|q| q.location).collect();
        let sizes = p.points().iter().map(|q| q.excursion.lifetime()).collect();
        Self::new(locations, sizes, varsigma + p.compensator_rate(), p.l_max())
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn locations(&self) -> &[f64] {
        &self.locations
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    fn cum_before(&self, k: usize) -> f64 {
        if k == 0 {
            0.0
        } else {
            self.cumulative[k - 1]
        }
    }

    /// `η(ℓ_i-)`.
    pub fn before(&self, i: usize) -> f64 {
        self.drift * self.locations[i] + self.cum_before(i)
    }

    /// `η(ℓ_i)`.
    pub fn after(&self, i: usize) -> f64 {
        self.before(i) + self.sizes[i]
    }

    pub fn eval(&self, l: f64) -> f64 {
        let k = self.locations.partition_point(|&s| s <= l);
        self.drift * l + self.cum_before(k)
    }

    pub fn left_limit(&self, l: f64) -> f64 {
        let k = self.locations.partition_point(|&s| s < l);
        self.drift * l + self.cum_before(k)
    }

    /// `Ψ̂_γ^n η(l) = c^{-n} η(c^{γn} l)`.
    pub fn apply_psi_hat(&self, scheme: &ScalingScheme, gamma: f64, n: i32) -> Eta {
        let nf = f64::from(n);
        let (tf, sf) = (scheme.pow(gamma * nf), scheme.pow(nf));
        Eta::new(
            self.locations.iter().map(|&l| l / tf).collect(),
            self.sizes.iter().map(|&s| s / sf).collect(),
            self.drift * tf / sf,
            self.l_max / tf,
        )
        .expect("scaling preserves validity")
    }

    /// `η` as a path in the variable `l`, held after `l_max`.
    pub fn to_path(&self) -> CadlagPath {
        let mode = if self.drift > 0.0 {
            Linear
        } else {
            ConstantRight
        };
        let mut b = PathBuilder::with_capacity(1, 2 * self.locations.len() + 2);
        b.push_scalar(0.0, 0.0, mode);
        for i in 0..self.locations.len() {
            let l = self.locations[i];
            if l > 0.0 {
                b.push_scalar(l, self.before(i), mode);
            }
            b.push_scalar(l, self.after(i), mode);
        }
        if self.l_max > b.last_time().unwrap_or(0.0) {
            b.push_scalar(self.l_max, self.eval(self.l_max), ConstantRight);
        }
        b.set_last_mode(ConstantRight);
        b.finish(f64::INFINITY).expect("η knots are ordered")
    }

    pub fn approx_eq(&self, other: &Eta, tol: f64) -> bool {
        let close = |a: f64, b: f64| (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        self.locations.len() == other.locations.len()
            && close(self.drift, other.drift)
            && close(self.l_max, other.l_max)
            && self
                .locations
                .iter()
                .zip(&other.locations)
                .all(|(&a, &b)| close(a, b))
            && self
                .sizes
                .iter()
                .zip(&other.sizes)
                .all(|(&a, &b)| close(a, b))
    }
}

/// Local time `L = η^{-1}` as a path.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalTime {
    pub path: CadlagPath,
    /// Without drift `L` is a step function only known up to `η(l_max)`.
    pub censored_after: Option<f64>,
}

pub fn build_local_time(eta: &Eta) -> Result<LocalTime> {
    let n = eta.locations.len();
    let mut b = PathBuilder::with_capacity(1, 2 * n + 2);
    if eta.drift > 0.0 {
        b.push_scalar(0.0, 0.0, Linear);
        for i in 0..n {
            let (a, e) = (eta.before(i), eta.after(i));
            let l = eta.locations[i];
            if b.last_time() == Some(a) && b.len() == 1 {
                b.pop();
            }
            b.push_scalar(a, l, ConstantRight);
            b.push_scalar(e, l, Linear);
        }
        let end = eta.eval(eta.l_max);
        if end > b.last_time().unwrap_or(0.0) {
            b.push_scalar(end, eta.l_max, ConstantRight);
        }
        b.set_last_mode(ConstantRight);
        Ok(LocalTime {
            path: b.finish(f64::INFINITY)?,
            censored_after: None,
        })
    } else {
        if n == 0 {
            return Err(Error::Degenerate(
                "no excursions and no drift: local time undefined".into(),
            ));
        }
        b.push_scalar(0.0, eta.locations[0], ConstantRight);
        for i in 0..n {
            let next = if i + 1 < n {
                eta.locations[i + 1]
            } else {
                eta.l_max
            };
            b.push_scalar(eta.after(i), next, ConstantRight);
        }
        Ok(LocalTime {
            path: b.finish(f64::INFINITY)?,
            censored_after: Some(eta.eval(eta.l_max)),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PiecedTriple {
    pub x: CadlagPath,
    pub local_time: CadlagPath,
    pub eta: Eta,
    /// `η(l_max)`: the pieced path is determined on `[0, valid_until)`.
    pub valid_until: f64,
    /// `L` is a right-censored step function when `ς_eff = 0`.
    pub censored: bool,
}

impl PiecedTriple {
    pub fn varsigma_eff(&self) -> f64 {
        self.eta.drift()
    }

    /// `|∫_0^t 1{X = 0} ds - ς_eff L(t)|`.
    pub fn occupation_error(&self, t: f64) -> f64 {
        (self.x.occupation_of_zero(t) - self.varsigma_eff() * self.local_time.evaluate_scalar(t))
            .abs()
    }
}

fn push_guarded(b: &mut PathBuilder, t: f64, v: &[f64], mode: SegmentMode) {
    if b.last_time() == Some(t) && b.trailing_ties() >= 2 {
        b.pop();
    }
    b.push(t, v, mode);
}

/// Glues the excursions of `p` along `η` with the extra drift `varsigma`.
pub fn piece_together(p: &MarkedPointProcess, varsigma: f64) -> Result<PiecedTriple> {
    if !(varsigma >= 0.0) || !varsigma.is_finite() {
        return Err(param("varsigma", "must be finite and >= 0"));
    }
    let eta = Eta::from_process(p, varsigma)?;
    let lt = build_local_time(&eta)?;
    let d = p.dim();
    let zero = vec![0.0; d];
    let mut b = PathBuilder::with_capacity(
        d,
        p.points()
            .iter()
            .map(|q| q.excursion.len() + 2)
            .sum::<usize>()
            + 1,
    );
    for (i, pt) in p.points().iter().enumerate() {
        let (a, end) = (eta.before(i), eta.after(i));
        let e = &pt.excursion;
        if i == 0 && a > 0.0 {
            b.push(0.0, &zero, ConstantRight);
        }
        if b.last_time() == Some(a) && b.trailing_ties() == 2 {
            // Drop the reset to zero between abutting excursions.
            b.pop();
        }
        let life = e.lifetime();
        let mut terminal = e.value(e.len() - 1);
        for k in 0..e.len() {
            let tk = e.time(k);
            if tk >= life {
                terminal = e.value(k);
                break;
            }
            let t = a + tk;
            if k > 0 && t >= end {
                continue;
            }
            push_guarded(&mut b, t, e.value(k), e.mode(k));
        }
        push_guarded(&mut b, end, terminal, ConstantRight);
        if terminal.iter().any(|&v| v != 0.0) {
            push_guarded(&mut b, end, &zero, ConstantRight);
        }
    }
    if b.is_empty() {
        b.push(0.0, &zero, ConstantRight);
    }
    let x = b.finish(f64::INFINITY)?;
    let valid_until = eta.eval(eta.l_max());
    Ok(PiecedTriple {
        x,
        local_time: lt.path,
        censored: lt.censored_after.is_some(),
        eta,
        valid_until,
    })
}

/// Recovers the excursions from `X` and `L`: each interval on which `L` is
/// flat and positive-length carries one excursion at location `L`.
///
/// The drift cannot be separated from the compensator, so the result has a
/// zero compensator and truncation.
pub fn extract_excursions(x: &CadlagPath, local_time: &CadlagPath) -> Result<MarkedPointProcess> {
    let d = x.dim();
    let mut flats = Vec::new();
    for i in 0..local_time.len().saturating_sub(1) {
        let (a, b) = (local_time.time(i), local_time.time(i + 1));
        if local_time.mode(i) == ConstantRight && b > a {
            flats.push((a, b, local_time.value(i)[0]));
        }
    }
    let l_max = local_time.value(local_time.len() - 1)[0];
    let xt = x.times();
    let mut points = Vec::with_capacity(flats.len());
    let mut covered = vec![false; x.len()];
    for &(a, b, loc) in &flats {
        let start = xt.partition_point(|&t| t <= a);
        if start == 0 || xt[start - 1] != a {
            return Err(Error::InconsistentZeroSet(
                "no knot at an excursion start".into(),
            ));
        }
        let start = start - 1;
        let mut pb = PathBuilder::new(d);
        pb.push(0.0, x.value(start), x.mode(start));
        covered[start] = true;
        let mut j = start + 1;
        while j < x.len() && xt[j] < b {
            let v = x.value(j);
            if v.iter().all(|&c| c == 0.0) {
                return Err(Error::InconsistentZeroSet(
                    "zero inside an excursion".into(),
                ));
            }
            pb.push(xt[j] - a, v, x.mode(j));
            covered[j] = true;
            j += 1;
        }
        if j >= x.len() || xt[j] != b {
            return Err(Error::InconsistentZeroSet(
                "no knot at an excursion end".into(),
            ));
        }
        pb.push(b - a, x.value(j), ConstantRight);
        covered[j] = true;
        if start > 0 && xt[start - 1] == a {
            covered[start - 1] = true;
        }
        points.push(Point {
            location: loc,
            excursion: pb.finish(b - a)?,
            mark: None,
        });
    }
    for (k, &c) in covered.iter().enumerate() {
        if !c && x.value(k).iter().any(|&v| v != 0.0) {
            return Err(Error::InconsistentZeroSet(
                "non-zero value outside the excursion intervals".into(),
            ));
        }
    }
    MarkedPointProcess::new(d, points, l_max, 0.0, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(loc: f64, life: f64, l_max: f64) -> MarkedPointProcess {
        let e = CadlagPath::scalar(
            &[
                (0.0, 0.0, Linear),
                (life / 2.0, 1.0, Linear),
                (life, 0.0, ConstantRight),
            ],
            life,
        )
        .unwrap();
        MarkedPointProcess::new(
            1,
            vec![Point {
                location: loc,
                excursion: e,
                mark: None,
            }],
            l_max,
            0.0,
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn single_point_with_drift() {
        let t = piece_together(&single(1.0, 2.0, 3.0), 0.5).unwrap();
        assert_eq!(t.eta.eval(0.5), 0.25);
        assert_eq!(t.eta.eval(1.0), 2.5);
        assert_eq!(t.eta.left_limit(1.0), 0.5);
        assert_eq!(t.local_time.evaluate_scalar(0.25), 0.5);
        assert_eq!(t.local_time.evaluate_scalar(1.0), 1.0);
        assert_eq!(t.local_time.evaluate_scalar(2.4), 1.0);
        assert_eq!(t.x.evaluate_scalar(0.3), 0.0);
        assert_eq!(t.x.evaluate_scalar(1.5), 1.0);
        assert_eq!(t.valid_until, 3.5);
        assert!(!t.censored);
    }

    #[test]
    fn empty_process() {
        let p = MarkedPointProcess::new(1, vec![], 2.0, 0.0, 0.0).unwrap();
        let t = piece_together(&p, 1.0).unwrap();
        assert_eq!(t.x.evaluate_scalar(1.3), 0.0);
        assert_eq!(t.local_time.evaluate_scalar(1.5), 1.5);
        assert!(piece_together(&p, 0.0).is_err());
        assert!(piece_together(&p, -1.0).is_err());
    }

    #[test]
    fn abutting_excursions_without_drift() {
        let e1 = CadlagPath::scalar(&[(0.0, 1.0, Linear), (1.0, 0.0, ConstantRight)], 1.0).unwrap();
        let e2 = CadlagPath::scalar(&[(0.0, 2.0, ConstantRight), (0.5, 3.0, ConstantRight)], 1.0)
            .unwrap();
        let p = MarkedPointProcess::new(
            1,
            vec![
                Point {
                    location: 0.5,
                    excursion: e1,
                    mark: None,
                },
                Point {
                    location: 1.0,
                    excursion: e2,
                    mark: None,
                },
            ],
            1.5,
            0.0,
            0.0,
        )
        .unwrap();
        let t = piece_together(&p, 0.0).unwrap();
        assert!(t.censored);
        assert_eq!(t.x.evaluate_scalar(1.0), 2.0);
        assert_eq!(t.x.left_limit(1.0), vec![0.0]);
        assert_eq!(t.x.evaluate_scalar(1.6), 3.0);
        assert_eq!(t.x.left_limit(2.0), vec![3.0]);
        assert_eq!(t.x.evaluate_scalar(2.0), 0.0);
        assert_eq!(t.local_time.evaluate_scalar(0.2), 0.5);
        assert_eq!(t.local_time.evaluate_scalar(1.2), 1.0);
        let back = extract_excursions(&t.x, &t.local_time).unwrap();
        assert_eq!(back.points(), p.points());
    }

    #[test]
    fn eta_path_and_scaling() {
        let t = piece_together(&single(1.0, 2.0, 3.0), 0.5).unwrap();
        let path = t.eta.to_path();
        for l in [0.0, 0.5, 1.0, 2.0, 3.0] {
            assert_eq!(path.evaluate_scalar(l), t.eta.eval(l));
        }
        let s = ScalingScheme::new(2.0, 0.5).unwrap();
        let h = t.eta.apply_psi_hat(&s, 0.5, 2);
        for l in [0.1, 0.4, 0.6] {
            assert!((h.eval(l) - t.eta.eval(2.0 * l) / 4.0).abs() < 1e-15);
        }
    }

    #[test]
    fn extraction_detects_inconsistent_zero_sets() {
        let t = piece_together(&single(1.0, 2.0, 3.0), 0.5).unwrap();
        let bad_l = CadlagPath::scalar(
            &[(0.0, 0.0, ConstantRight), (0.7, 1.0, ConstantRight)],
            f64::INFINITY,
        )
        .unwrap();
        assert!(extract_excursions(&t.x, &bad_l).is_err());
    }

    fn dyadic() -> impl Strategy<Value = f64> {
        (1u32..(1 << 20)).prop_map(|k| f64::from(k) / f64::from(1u32 << 20))
    }

    fn dyadic_process() -> impl Strategy<Value = MarkedPointProcess> {
        prop::collection::vec((dyadic(), dyadic(), dyadic()), 0..12).prop_map(|raw| {
            let mut pts: Vec<(f64, f64, f64)> = raw;
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            pts.dedup_by(|a, b| a.0 == b.0);
            let points = pts
                .into_iter()
                .map(|(loc, life, h)| {
                    let life = 4.0 * life;
                    let e = CadlagPath::scalar(
                        &[
                            (0.0, 0.0, Linear),
                            (life / 2.0, h, Linear),
                            (life, 0.0, ConstantRight),
                        ],
                        life,
                    )
                    .unwrap();
                    Point {
                        location: 4.0 * loc,
                        excursion: e,
                        mark: None,
                    }
                })
                .collect();
            MarkedPointProcess::new(1, points, 4.0, 0.0, 0.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn exact_round_trip_on_dyadic_data(p in dyadic_process(), drift_k in 0u32..8) {
            let varsigma = f64::from(drift_k) / 4.0;
            prop_assume!(varsigma > 0.0 || !p.is_empty());
            let t = piece_together(&p, varsigma).unwrap();
            let back = extract_excursions(&t.x, &t.local_time).unwrap();
            prop_assert_eq!(back.points(), p.points());
            prop_assert_eq!(back.l_max(), p.l_max());
        }

        #[test]
        fn occupation_identity(p in dyadic_process(), drift_k in 1u32..8) {
            let t = piece_together(&p, f64::from(drift_k) / 4.0).unwrap();
            for k in 0..=100 {
                let s = t.valid_until * f64::from(k) / 100.0;
                prop_assert!(t.occupation_error(s) < 1e-10);
            }
        }

        #[test]
        fn local_time_inverts_eta(p in dyadic_process(), drift_k in 1u32..8) {
            let t = piece_together(&p, f64::from(drift_k) / 4.0).unwrap();
            for k in 0..=50 {
                let l = p.l_max() * f64::from(k) / 50.0;
                // L(η(l)) = l and η(L(t)-) <= t <= η(L(t)).
                prop_assert!((t.local_time.evaluate_scalar(t.eta.eval(l)) - l).abs() < 1e-12);
                let s = t.valid_until * f64::from(k) / 50.0;
                let lt = t.local_time.evaluate_scalar(s);
                prop_assert!(t.eta.left_limit(lt) <= s + 1e-12 && s <= t.eta.eval(lt) + 1e-12);
            }
        }

        #[test]
        fn general_float_round_trip(seed in 0u64..500) {
            use crate::measures::{BrownianIto, Resolution};
            let m = BrownianIto::new(1.0).unwrap();
            let r = Resolution::new(0.01, 2.0).unwrap();
            let p = crate::point_process::sample_ppp(&m, 1.0, 0.05, &r, &mut crate::rng::stream(seed, 0)).unwrap();
            let t = piece_together(&p, 0.1).unwrap();
            let back = extract_excursions(&t.x, &t.local_time).unwrap();
            prop_assert_eq!(back.len(), p.len());
            for (a, b) in back.points().iter().zip(p.points()) {
                prop_assert_eq!(a.location, b.location);
                // Knot times pass through the global clock, so errors scale with it.
                prop_assert!(a.excursion.approx_eq(&b.excursion, 1e-12 * t.valid_until.max(1.0)));
            }
        }
    }
}
