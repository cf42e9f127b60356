//! Skorokhod J1 distance on `D[0, H]`.
//!
//! Time changes are increasing homeomorphisms of `[0, H]`. The distance is an
//! upper bound obtained from a family of piecewise linear time changes
//! anchored at matched jump times and at lifetime shifts. The
//! cost of each candidate is computed exactly: between breakpoints both paths
//! are affine in the running time, so the uniform error is attained at
//! breakpoint values or left limits. A bottleneck dynamic programme picks the
//! best anchor chain, and the identity is always a candidate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::path::{norm, CadlagPath};

/// Increasing piecewise linear bijection of `[0, ∞)` through anchors
/// `(s_k, λ(s_k))`, with slope one after the last anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeChange {
    anchors: Vec<(f64, f64)>,
}

impl TimeChange {
    pub fn identity() -> Self {
        Self {
            anchors: vec![(0.0, 0.0)],
        }
    }

    pub fn from_anchors(mut anchors: Vec<(f64, f64)>) -> Result<Self> {
        if anchors.first() != Some(&(0.0, 0.0)) {
            anchors.insert(0, (0.0, 0.0));
        }
        for w in anchors.windows(2) {
            if !(w[1].0 > w[0].0 && w[1].1 > w[0].1) || !w[1].0.is_finite() || !w[1].1.is_finite() {
                return Err(param(
                    "anchors",
                    "must be strictly increasing in both coordinates",
                ));
            }
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    fn eval_with(anchors: &[(f64, f64)], t: f64, fwd: bool) -> f64 {
        let key = |p: &(f64, f64)| if fwd { p.0 } else { p.1 };
        let out = |p: &(f64, f64)| if fwd { p.1 } else { p.0 };
        let k = anchors.partition_point(|p| key(p) <= t).saturating_sub(1);
        let p = &anchors[k];
        if k + 1 == anchors.len() {
            return out(p) + (t - key(p));
        }
        let q = &anchors[k + 1];
        out(p) + (t - key(p)) * ((out(q) - out(p)) / (key(q) - key(p)))
    }

    pub fn eval(&self, t: f64) -> f64 {
        Self::eval_with(&self.anchors, t, true)
    }

    pub fn inverse_eval(&self, u: f64) -> f64 {
        Self::eval_with(&self.anchors, u, false)
    }

    pub fn inverse(&self) -> Self {
        Self {
            anchors: self.anchors.iter().map(|&(s, u)| (u, s)).collect(),
        }
    }

    /// `sup_{t <= horizon} |λ(t) - t|`.
    pub fn displacement(&self, horizon: f64) -> f64 {
        let mut d = (self.eval(horizon) - horizon).abs();
        for &(s, u) in &self.anchors {
            if s <= horizon {
                d = d.max((u - s).abs());
            }
        }
        d
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct J1Result {
    pub distance: f64,
    pub witness: TimeChange,
}

/// Exact cost `max(sup|λ - id|, sup|a - b∘λ|)` on `[0, horizon]`.
pub fn j1_cost(a: &CadlagPath, b: &CadlagPath, lambda: &TimeChange, horizon: f64) -> f64 {
    let mut cost = lambda.displacement(horizon);
    let anchors = lambda.anchors();
    let mut k = 0;
    while k < anchors.len() && anchors[k].0 < horizon {
        let (s0, u0) = anchors[k];
        let end = if k + 1 < anchors.len() && anchors[k + 1].0 <= horizon {
            anchors[k + 1]
        } else {
            (horizon, lambda.eval(horizon))
        };
        cost = cost.max(window_cost(a, b, (s0, u0), end));
        k += 1;
    }
    cost
}

/// Uniform error on `[p.0, q.0]` for the affine time change through `p`, `q`.
fn window_cost(a: &CadlagPath, b: &CadlagPath, p: (f64, f64), q: (f64, f64)) -> f64 {
    let (s0, u0) = p;
    let (s1, u1) = q;
    if s1 <= s0 {
        return 0.0;
    }
    let slope = (u1 - u0) / (s1 - s0);
    let mut pts: Vec<(f64, f64)> = Vec::new();
    pts.push(p);
    pts.push(q);
    let ta = a.times();
    let lo = ta.partition_point(|&t| t <= s0);
    let hi = ta.partition_point(|&t| t < s1);
    for &t in &ta[lo..hi] {
        pts.push((t, u0 + (t - s0) * slope));
    }
    if a.lifetime() > s0 && a.lifetime() < s1 {
        let t = a.lifetime();
        pts.push((t, u0 + (t - s0) * slope));
    }
    let tb = b.times();
    let lo = tb.partition_point(|&u| u <= u0);
    let hi = tb.partition_point(|&u| u < u1);
    for &u in &tb[lo..hi] {
        pts.push((s0 + (u - u0) / slope, u));
    }
    if b.lifetime() > u0 && b.lifetime() < u1 {
        let u = b.lifetime();
        pts.push((s0 + (u - u0) / slope, u));
    }
    pts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    pts.dedup();

    let d = a.dim();
    let (mut va, mut vb) = (vec![0.0; d], vec![0.0; d]);
    let diff = |va: &[f64], vb: &[f64]| {
        let mut s = 0.0;
        for k in 0..va.len() {
            let x = va[k] - vb[k];
            s += x * x;
        }
        libm::sqrt(s)
    };
    let mut cost = 0.0f64;
    for (i, &(t, u)) in pts.iter().enumerate() {
        if t < s1 {
            a.evaluate_into(t, &mut va);
            b.evaluate_into(u, &mut vb);
            cost = cost.max(diff(&va, &vb));
        }
        if i > 0 && t > s0 {
            a.left_limit_into(t, &mut va);
            b.left_limit_into(u, &mut vb);
            cost = cost.max(diff(&va, &vb));
        }
    }
    // The right endpoint belongs to the window when it is the horizon.
    a.evaluate_into(s1, &mut va);
    b.evaluate_into(u1, &mut vb);
    cost.max(diff(&va, &vb))
}

fn directional(a: &CadlagPath, b: &CadlagPath, horizon: f64) -> (f64, TimeChange) {
    let identity = TimeChange::identity();
    let bound = j1_cost(a, b, &identity, horizon);
    if bound == 0.0 {
        return (0.0, identity);
    }

    let mut cand: Vec<(f64, f64)> = Vec::new();
    let ja = a.jump_times(horizon);
    let jb = b.jump_times(horizon);
    for &s in &ja {
        for &u in &jb {
            if (u - s).abs() < bound {
                cand.push((s, u));
            }
        }
    }
    let mut shifts: Vec<f64> = Vec::new();
    let (za, zb) = (a.hitting_zero(), b.hitting_zero());
    if za.is_finite() && zb.is_finite() {
        shifts.push(zb - za);
    }
    let (ma, mb) = (argmax_time(a, horizon), argmax_time(b, horizon));
    shifts.push(mb - ma);
    for &tau in &shifts {
        if tau == 0.0 || tau.abs() >= bound {
            continue;
        }
        for m in [0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0, 10.0] {
            let r = tau.abs() * m;
            if r + tau > 0.0 && r < horizon && r + tau < horizon {
                cand.push((r, r + tau));
            }
        }
        if ma > 0.0 && mb > 0.0 && ma < horizon {
            cand.push((ma, mb));
        }
    }
    cand.retain(|&(s, u)| s > 0.0 && u > 0.0 && s < horizon && u < horizon);
    cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    cand.dedup();
    if cand.len() > 96 {
        cand.sort_by(|x, y| (x.1 - x.0).abs().total_cmp(&(y.1 - y.0).abs()));
        cand.truncate(96);
        cand.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    }

    let mut nodes = vec![(0.0, 0.0)];
    nodes.extend(cand);
    let m = nodes.len();
    let mut best = vec![f64::INFINITY; m];
    let mut prev = vec![usize::MAX; m];
    best[0] = 0.0;
    for i in 1..m {
        let (si, ui) = nodes[i];
        let disp = (ui - si).abs();
        if disp >= bound {
            continue;
        }
        for j in 0..i {
            let (sj, uj) = nodes[j];
            if !(sj < si && uj < ui) {
                continue;
            }
            let base = best[j].max(disp);
            if base >= best[i] || base >= bound {
                continue;
            }
            let c = base.max(window_cost(a, b, nodes[j], nodes[i]));
            if c < best[i] {
                best[i] = c;
                prev[i] = j;
            }
        }
    }
    let mut total = bound;
    let mut end = usize::MAX;
    for i in 0..m {
        if best[i] >= total {
            continue;
        }
        let c = best[i].max(window_cost(a, b, nodes[i], (horizon, horizon)));
        if c < total {
            total = c;
            end = i;
        }
    }
    if end == usize::MAX {
        return (bound, identity);
    }
    let mut chain = Vec::new();
    let mut i = end;
    while i != 0 && i != usize::MAX {
        chain.push(nodes[i]);
        i = prev[i];
    }
    chain.push((0.0, 0.0));
    chain.reverse();
    chain.push((horizon, horizon));
    let witness = TimeChange::from_anchors(chain).unwrap_or_else(|_| TimeChange::identity());
    (total, witness)
}

fn argmax_time(w: &CadlagPath, until: f64) -> f64 {
    let mut best = (0.0, 0.0);
    for i in 0..w.len() {
        let t = w.time(i);
        if t > until {
            break;
        }
        let v = norm(w.value(i));
        if v > best.1 {
            best = (t, v);
        }
    }
    best.0
}

/// J1 distance bound between `a` and `b` on `[0, horizon]`, with the
/// witnessing time change expressed on the clock of `a`. The witness fixes
/// `horizon`.
pub fn j1_distance(a: &CadlagPath, b: &CadlagPath, horizon: f64) -> Result<J1Result> {
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(param("horizon", "must be finite and > 0"));
    }
    if a.dim() != b.dim() {
        return Err(Error::Dimension {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let (dab, wab) = directional(a, b, horizon);
    if dab == 0.0 {
        return Ok(J1Result {
            distance: 0.0,
            witness: wab,
        });
    }
    let (dba, wba) = directional(b, a, horizon);
    Ok(if dba < dab {
        J1Result {
            distance: dba,
            witness: wba.inverse(),
        }
    } else {
        J1Result {
            distance: dab,
            witness: wab,
        }
    })
}

/// Uniform distance on `[0, horizon]`.
pub fn uniform_distance(a: &CadlagPath, b: &CadlagPath, horizon: f64) -> f64 {
    j1_cost(a, b, &TimeChange::identity(), horizon)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::SegmentMode::*;
    use proptest::prelude::*;

    fn unit_step(at: f64) -> CadlagPath {
        CadlagPath::scalar(
            &[(0.0, 0.0, ConstantRight), (at, 1.0, ConstantRight)],
            f64::INFINITY,
        )
        .unwrap()
    }

    #[test]
    fn identical_paths_are_at_distance_zero() {
        let w = unit_step(1.0);
        let r = j1_distance(&w, &w, 2.0).unwrap();
        assert_eq!(r.distance, 0.0);
        assert_eq!(r.witness, TimeChange::identity());
    }

    #[test]
    fn shifted_unit_steps() {
        let r = j1_distance(&unit_step(1.0), &unit_step(1.1), 2.0).unwrap();
        assert!((r.distance - 0.1).abs() < 1e-12, "{}", r.distance);
        assert!((r.witness.eval(1.0) - 1.1).abs() < 1e-12);
        assert_eq!(uniform_distance(&unit_step(1.0), &unit_step(1.1), 2.0), 1.0);
    }

    #[test]
    fn rescaled_origin_path() {
        let s = crate::path::ScalingScheme::new(2.0, 0.5).unwrap();
        let w = CadlagPath::zero_forever(1);
        let r = j1_distance(&w.apply_psi(&s, 0.5, 1), &w, 1.0).unwrap();
        assert_eq!(r.distance, 0.0);
    }

    #[test]
    fn argument_errors() {
        let w = unit_step(1.0);
        assert!(j1_distance(&w, &w, 0.0).is_err());
        assert!(j1_distance(&w, &CadlagPath::zero(2), 1.0).is_err());
    }

    #[test]
    fn continuous_excursions_with_shifted_lifetimes() {
        let tent = |peak: f64, life: f64| {
            CadlagPath::scalar(
                &[
                    (0.0, 0.0, Linear),
                    (peak, 1.0, Linear),
                    (life, 0.0, ConstantRight),
                ],
                life,
            )
            .unwrap()
        };
        let (a, b) = (tent(0.5, 1.0), tent(0.55, 1.1));
        let d = j1_distance(&a, &b, 2.0).unwrap().distance;
        assert!(d <= uniform_distance(&a, &b, 2.0));
        assert!(d <= 0.1 + 1e-12, "{d}");
    }

    fn step_path() -> impl Strategy<Value = CadlagPath> {
        prop::collection::vec((0.05f64..1.9, -2.0f64..2.0), 0..4).prop_map(|mut jumps| {
            jumps.sort_by(|a, b| a.0.total_cmp(&b.0));
            jumps.dedup_by(|a, b| a.0 == b.0);
            let mut knots = vec![(0.0, 0.0, ConstantRight)];
            for (t, v) in jumps {
                knots.push((t, v, ConstantRight));
            }
            CadlagPath::scalar(&knots, f64::INFINITY).unwrap()
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_below_uniform(a in step_path(), b in step_path()) {
            let dab = j1_distance(&a, &b, 2.0).unwrap().distance;
            let dba = j1_distance(&b, &a, 2.0).unwrap().distance;
            prop_assert_eq!(dab, dba);
            prop_assert!(dab <= uniform_distance(&a, &b, 2.0) + 1e-12);
            prop_assert!(dab >= 0.0);
        }

        #[test]
        fn triangle_inequality(a in step_path(), b in step_path(), c in step_path()) {
            let ab = j1_distance(&a, &b, 2.0).unwrap().distance;
            let bc = j1_distance(&b, &c, 2.0).unwrap().distance;
            let ac = j1_distance(&a, &c, 2.0).unwrap().distance;
            prop_assert!(ac <= ab + bc + 1e-9, "{} > {} + {}", ac, ab, bc);
        }

        #[test]
        fn witness_cost_matches_distance(a in step_path(), b in step_path()) {
            let r = j1_distance(&a, &b, 2.0).unwrap();
            let direct = j1_cost(&a, &b, &r.witness, 2.0);
            let reverse = j1_cost(&b, &a, &r.witness.inverse(), 2.0);
            prop_assert!((direct.min(reverse) - r.distance).abs() < 1e-9);
        }
    }
}
