//! Piecewise càdlàg paths with a lifetime.
//!
//! A path is a list of knots `(t_i, w_i, mode_i)`. The mode of knot `i`
//! describes the segment `[t_i, t_{i+1})`: held constant, or linearly
//! interpolated towards `w_{i+1}`. After the last knot the value is held until
//! the lifetime, and from the lifetime on the path sits at the origin.
//!
//! Two knots may share a time. The first of such a pair only supplies the
//! left limit, the second the value, which is how a jump at the end of a
//! linear segment is stored.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SegmentMode {
    ConstantRight,
    Linear,
}

/// Scaling constant `c > 1` and self-similarity index `alpha > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingScheme {
    pub c: f64,
    pub alpha: f64,
}

impl ScalingScheme {
    pub fn new(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 1.0) || !c.is_finite() {
            return Err(param("c", "must be finite and > 1"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(param("alpha", "must be finite and > 0"));
        }
        Ok(Self { c, alpha })
    }

    /// `c^x`.
    pub fn pow(&self, x: f64) -> f64 {
        libm::pow(self.c, x)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CadlagPath {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    modes: Vec<SegmentMode>,
    lifetime: f64,
}

/// Incremental knot writer used by the samplers.
#[derive(Clone, Debug)]
pub struct PathBuilder {
    dim: usize,
    times: Vec<f64>,
    values: Vec<f64>,
    modes: Vec<SegmentMode>,
}

impl PathBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            times: Vec::new(),
            values: Vec::new(),
            modes: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        Self {
            dim,
            times: Vec::with_capacity(n),
            values: Vec::with_capacity(n * dim),
            modes: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> Option<f64> {
        self.times.last().copied()
    }

    pub fn last_value(&self) -> Option<&[f64]> {
        let n = self.times.len();
        (n > 0).then(|| &self.values[(n - 1) * self.dim..n * self.dim])
    }

    /// Number of trailing knots sharing the last time.
    pub fn trailing_ties(&self) -> usize {
        match self.times.last() {
            None => 0,
            Some(&t) => self.times.iter().rev().take_while(|&&s| s == t).count(),
        }
    }

    pub fn push(&mut self, t: f64, value: &[f64], mode: SegmentMode) {
        debug_assert_eq!(value.len(), self.dim);
        self.times.push(t);
        self.values.extend_from_slice(value);
        self.modes.push(mode);
    }

    pub fn push_scalar(&mut self, t: f64, value: f64, mode: SegmentMode) {
        self.push(t, &[value], mode);
    }

    pub fn pop(&mut self) {
        if self.times.pop().is_some() {
            self.modes.pop();
            let n = self.values.len() - self.dim;
            self.values.truncate(n);
        }
    }

    pub fn set_last_mode(&mut self, mode: SegmentMode) {
        if let Some(m) = self.modes.last_mut() {
            *m = mode;
        }
    }

    /// Appends the knots of `path` translated by `offset`, optionally
    /// skipping its first knot. The lifetime of `path` is not carried over.
    pub fn append_shifted(&mut self, path: &CadlagPath, offset: f64, skip_first: bool) {
        let start = usize::from(skip_first);
        for i in start..path.len() {
            self.push(offset + path.time(i), path.value(i), path.mode(i));
        }
    }

    pub fn finish(self, lifetime: f64) -> Result<CadlagPath> {
        CadlagPath::new(self.dim, self.times, self.values, self.modes, lifetime)
    }
}

impl CadlagPath {
    pub fn new(
        dim: usize,
        times: Vec<f64>,
        values: Vec<f64>,
        modes: Vec<SegmentMode>,
        lifetime: f64,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPath("dimension must be positive".into()));
        }
        if times.is_empty() {
            return Err(Error::InvalidPath("no knots".into()));
        }
        if values.len() != times.len() * dim || modes.len() != times.len() {
            return Err(Error::InvalidPath(
                "knot arrays have inconsistent lengths".into(),
            ));
        }
        if times[0] != 0.0 {
            return Err(Error::InvalidPath("first knot must be at time 0".into()));
        }
        if lifetime.is_nan() || lifetime < 0.0 {
            return Err(Error::InvalidPath("lifetime must be >= 0".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPath("non-finite knot value".into()));
        }
        let mut run = 1;
        for w in times.windows(2) {
            if !w[1].is_finite() {
                return Err(Error::InvalidPath("non-finite knot time".into()));
            }
            if w[1] < w[0] {
                return Err(Error::InvalidPath(
                    "knot times must be non-decreasing".into(),
                ));
            }
            if w[1] == w[0] {
                run += 1;
                if run > 2 {
                    return Err(Error::InvalidPath("more than two knots at one time".into()));
                }
            } else {
                run = 1;
            }
        }
        if *times.last().unwrap() > lifetime {
            return Err(Error::InvalidPath("knot beyond lifetime".into()));
        }
        Ok(Self {
            dim,
            times,
            values,
            modes,
            lifetime,
        })
    }

    /// Scalar convenience constructor.
    pub fn scalar(knots: &[(f64, f64, SegmentMode)], lifetime: f64) -> Result<Self> {
        let times = knots.iter().map(|k| k.0).collect();
        let values = knots.iter().map(|k| k.1).collect();
        let modes = knots.iter().map(|k| k.2).collect();
        Self::new(1, times, values, modes, lifetime)
    }

    /// The absorbed path `o`.
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            times: vec![0.0],
            values: vec![0.0; dim],
            modes: vec![SegmentMode::ConstantRight],
            lifetime: 0.0,
        }
    }

    /// The path identically at the origin forever.
    pub fn zero_forever(dim: usize) -> Self {
        Self {
            lifetime: f64::INFINITY,
            ..Self::zero(dim)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn is_absorbed(&self) -> bool {
        self.lifetime == 0.0
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn modes(&self) -> &[SegmentMode] {
        &self.modes
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    pub fn value(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn mode(&self, i: usize) -> SegmentMode {
        self.modes[i]
    }

    /// Index of the knot governing time `t`: the last knot with time `<= t`.
    fn segment_at(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s <= t).saturating_sub(1)
    }

    fn interpolate_into(&self, i: usize, t: f64, out: &mut [f64]) {
        let v0 = self.value(i);
        if self.modes[i] == SegmentMode::Linear && i + 1 < self.len() {
            let (t0, t1) = (self.times[i], self.times[i + 1]);
            let v1 = self.value(i + 1);
            if t >= t1 {
                out.copy_from_slice(v1);
                return;
            }
            let s = (t - t0) / (t1 - t0);
            for k in 0..self.dim {
                out[k] = v0[k] + (v1[k] - v0[k]) * s;
            }
        } else {
            out.copy_from_slice(v0);
        }
    }

    pub fn evaluate_into(&self, t: f64, out: &mut [f64]) {
        if t >= self.lifetime || t < 0.0 {
            out.fill(0.0);
            return;
        }
        self.interpolate_into(self.segment_at(t), t, out);
    }

    pub fn evaluate(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.evaluate_into(t, &mut out);
        out
    }

    /// Value of the first coordinate, for scalar paths.
    pub fn evaluate_scalar(&self, t: f64) -> f64 {
        if t >= self.lifetime || t < 0.0 {
            return 0.0;
        }
        let i = self.segment_at(t);
        let v0 = self.values[i * self.dim];
        if self.modes[i] == SegmentMode::Linear && i + 1 < self.len() {
            let (t0, t1) = (self.times[i], self.times[i + 1]);
            let v1 = self.values[(i + 1) * self.dim];
            if t >= t1 {
                return v1;
            }
            v0 + (v1 - v0) * ((t - t0) / (t1 - t0))
        } else {
            v0
        }
    }

    pub fn norm_at(&self, t: f64) -> f64 {
        if self.dim == 1 {
            return self.evaluate_scalar(t).abs();
        }
        norm(&self.evaluate(t))
    }

    pub fn left_limit_into(&self, t: f64, out: &mut [f64]) {
        if t <= 0.0 {
            self.evaluate_into(0.0, out);
            return;
        }
        if t > self.lifetime {
            out.fill(0.0);
            return;
        }
        let i = self.times.partition_point(|&s| s < t).saturating_sub(1);
        self.interpolate_into(i, t, out);
    }

    pub fn left_limit(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.left_limit_into(t, &mut out);
        out
    }

    /// Times in `(0, until]` where the path jumps, including the lifetime
    /// when the left limit there is not the origin.
    pub fn jump_times(&self, until: f64) -> Vec<f64> {
        let mut out = Vec::new();
        let mut left = vec![0.0; self.dim];
        let mut right = vec![0.0; self.dim];
        let mut last = f64::NAN;
        let mut check = |t: f64, out: &mut Vec<f64>| {
            if t > 0.0 && t <= until && t != last {
                self.left_limit_into(t, &mut left);
                self.evaluate_into(t, &mut right);
                if left != right {
                    out.push(t);
                }
                last = t;
            }
        };
        for &t in &self.times {
            check(t, &mut out);
        }
        if self.lifetime.is_finite() {
            check(self.lifetime, &mut out);
        }
        out
    }

    /// First time `t > 0` (or `t = 0` on a constant segment) with `w(t) = x`.
    /// Returns `+inf` when `x` is never reached.
    pub fn hitting_time(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                got: x.len(),
            });
        }
        let n = self.len();
        for i in 0..n {
            let t0 = self.times[i];
            if t0 >= self.lifetime {
                break;
            }
            let t1 = if i + 1 < n {
                self.times[i + 1]
            } else {
                self.lifetime
            };
            if t1 <= t0 {
                continue;
            }
            let v0 = self.value(i);
            let linear = self.modes[i] == SegmentMode::Linear && i + 1 < n;
            if !linear {
                if v0 == x {
                    return Ok(t0);
                }
                continue;
            }
            let v1 = self.value(i + 1);
            if v0 == x && v1 == x {
                return Ok(t0);
            }
            if let Some(s) = segment_solve(v0, v1, x) {
                let t = if s == 0.0 { t0 } else { t0 + s * (t1 - t0) };
                if t > 0.0 {
                    return Ok(t);
                }
            }
        }
        if x.iter().all(|&v| v == 0.0) && self.lifetime.is_finite() {
            return Ok(self.lifetime);
        }
        Ok(f64::INFINITY)
    }

    /// `T_0`: the lifetime for paths that leave the origin immediately.
    pub fn hitting_zero(&self) -> f64 {
        let zero = vec![0.0; self.dim];
        self.hitting_time(&zero).unwrap_or(f64::INFINITY)
    }

    /// Supremum of the Euclidean norm over the whole path, left limits
    /// included.
    pub fn sup_norm(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.len() {
            m = m.max(norm(self.value(i)));
        }
        if self.lifetime == 0.0 {
            return 0.0;
        }
        m
    }

    /// Supremum of the norm over `[0, t]`.
    pub fn sup_norm_until(&self, t: f64) -> f64 {
        if t >= self.lifetime {
            return self.sup_norm();
        }
        let mut m = self.norm_at(t);
        for i in 0..self.len() {
            if self.times[i] > t {
                break;
            }
            m = m.max(norm(self.value(i)));
        }
        m
    }

    /// Lebesgue measure of `{s in [0, t] : w(s) = 0}`.
    pub fn occupation_of_zero(&self, t: f64) -> f64 {
        let n = self.len();
        let end = t.min(self.lifetime);
        let mut total = 0.0;
        for i in 0..n {
            let a = self.times[i];
            if a >= end {
                break;
            }
            let b = if i + 1 < n {
                self.times[i + 1]
            } else {
                self.lifetime
            };
            let b = b.min(end);
            if b <= a {
                continue;
            }
            let zero_here = self.value(i).iter().all(|&v| v == 0.0);
            let zero_seg = match self.modes[i] {
                SegmentMode::Linear if i + 1 < n => {
                    zero_here && self.value(i + 1).iter().all(|&v| v == 0.0)
                }
                _ => zero_here,
            };
            if zero_seg {
                total += b - a;
            }
        }
        if t > self.lifetime {
            total += t - self.lifetime;
        }
        total
    }

    /// The shifted path `θ_t w`.
    pub fn shift(&self, t: f64) -> CadlagPath {
        if t <= 0.0 {
            return self.clone();
        }
        if t >= self.lifetime {
            return CadlagPath::zero(self.dim);
        }
        let i = self.segment_at(t);
        let mut b = PathBuilder::with_capacity(self.dim, self.len() - i);
        if self.times[i] == t {
            b.push(0.0, self.value(i), self.modes[i]);
        } else {
            let mut v = vec![0.0; self.dim];
            self.interpolate_into(i, t, &mut v);
            b.push(0.0, &v, self.modes[i]);
        }
        for j in i + 1..self.len() {
            b.push(self.times[j] - t, self.value(j), self.modes[j]);
        }
        let lifetime = self.lifetime - t;
        let times_ok = b.times.windows(2).all(|w| w[0] <= w[1]);
        debug_assert!(times_ok);
        CadlagPath {
            dim: self.dim,
            times: b.times,
            values: b.values,
            modes: b.modes,
            lifetime,
        }
    }

    /// Divides times by `time_div` and multiplies values by `value_mul`.
    pub fn rescale(&self, time_div: f64, value_mul: f64) -> CadlagPath {
        CadlagPath {
            dim: self.dim,
            times: self.times.iter().map(|&t| t / time_div).collect(),
            values: self.values.iter().map(|&v| v * value_mul).collect(),
            modes: self.modes.clone(),
            lifetime: self.lifetime / time_div,
        }
    }

    /// `Ψ_γ^n w(t) = c^{-γn} w(c^n t)`.
    pub fn apply_psi(&self, scheme: &ScalingScheme, gamma: f64, n: i32) -> CadlagPath {
        let nf = f64::from(n);
        self.rescale(scheme.pow(nf), scheme.pow(-gamma * nf))
    }

    /// `Ψ̂_γ^n w(t) = c^{-n} w(c^{γn} t)`.
    pub fn apply_psi_hat(&self, scheme: &ScalingScheme, gamma: f64, n: i32) -> CadlagPath {
        let nf = f64::from(n);
        self.rescale(scheme.pow(gamma * nf), scheme.pow(-nf))
    }

    /// Applies `f` to every knot value, producing a path of dimension `dim`.
    pub fn map_values(&self, dim: usize, f: impl Fn(&[f64], &mut [f64])) -> CadlagPath {
        let mut values = vec![0.0; self.len() * dim];
        for i in 0..self.len() {
            f(self.value(i), &mut values[i * dim..(i + 1) * dim]);
        }
        CadlagPath {
            dim,
            times: self.times.clone(),
            values,
            modes: self.modes.clone(),
            lifetime: self.lifetime,
        }
    }

    /// Same representation up to a tolerance on times and values, relative
    /// for magnitudes above one and absolute below.
    pub fn approx_eq(&self, other: &CadlagPath, tol: f64) -> bool {
        let close = |a: f64, b: f64| a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0);
        self.dim == other.dim
            && self.len() == other.len()
            && self.modes == other.modes
            && close(self.lifetime, other.lifetime)
            && self
                .times
                .iter()
                .zip(&other.times)
                .all(|(&a, &b)| close(a, b))
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(&a, &b)| close(a, b))
    }

    /// Adds an explicit knot at the lifetime when the path ends on a held
    /// value, and makes the terminal knot constant. Evaluation is unchanged.
    pub fn with_terminal_knot(mut self) -> CadlagPath {
        if !self.lifetime.is_finite() || self.lifetime == 0.0 {
            return self;
        }
        let last = self.len() - 1;
        if self.times[last] < self.lifetime {
            let v = self.value(last).to_vec();
            self.times.push(self.lifetime);
            self.values.extend_from_slice(&v);
            self.modes.push(SegmentMode::ConstantRight);
        } else {
            self.modes[last] = SegmentMode::ConstantRight;
        }
        self
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    if v.len() == 1 {
        return v[0].abs();
    }
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// Parameter `s in [0, 1)` at which the segment from `v0` to `v1` meets `x`.
fn segment_solve(v0: &[f64], v1: &[f64], x: &[f64]) -> Option<f64> {
    let mut k = 0;
    let mut best = 0.0;
    for j in 0..v0.len() {
        let d = (v1[j] - v0[j]).abs();
        if d > best {
            best = d;
            k = j;
        }
    }
    if best == 0.0 {
        return None;
    }
    let s = (x[k] - v0[k]) / (v1[k] - v0[k]);
    if !(0.0..1.0).contains(&s) {
        return None;
    }
    for j in 0..v0.len() {
        if j == k {
            continue;
        }
        let y = v0[j] + (v1[j] - v0[j]) * s;
        let scale = x[j].abs().max(v0[j].abs()).max(v1[j].abs()).max(1.0);
        if (y - x[j]).abs() > 1e-12 * scale {
            return None;
        }
    }
    Some(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use SegmentMode::*;

    fn step_path() -> CadlagPath {
        CadlagPath::scalar(&[(0.0, 1.0, ConstantRight), (1.0, 2.0, ConstantRight)], 2.0).unwrap()
    }

    #[test]
    fn evaluate_step_path() {
        let w = step_path();
        assert_eq!(w.evaluate_scalar(0.5), 1.0);
        assert_eq!(w.evaluate_scalar(1.0), 2.0);
        assert_eq!(w.evaluate_scalar(1.999), 2.0);
        assert_eq!(w.evaluate_scalar(2.0), 0.0);
        assert_eq!(w.evaluate_scalar(5.0), 0.0);
        assert_eq!(w.left_limit(1.0), vec![1.0]);
        assert_eq!(w.left_limit(2.0), vec![2.0]);
    }

    #[test]
    fn validation() {
        assert!(CadlagPath::scalar(&[(0.5, 1.0, Linear)], 1.0).is_err());
        assert!(CadlagPath::scalar(
            &[(0.0, 1.0, Linear), (0.3, 1.0, Linear), (0.2, 0.0, Linear)],
            1.0
        )
        .is_err());
        assert!(CadlagPath::scalar(&[(0.0, 1.0, Linear), (2.0, 0.0, Linear)], 1.0).is_err());
        assert!(CadlagPath::scalar(
            &[
                (0.0, 1.0, Linear),
                (0.5, 0.0, Linear),
                (0.5, 1.0, Linear),
                (0.5, 2.0, Linear)
            ],
            1.0
        )
        .is_err());
        assert!(CadlagPath::scalar(
            &[(0.0, 1.0, Linear), (0.5, 0.0, Linear), (0.5, 1.0, Linear)],
            1.0
        )
        .is_ok());
    }

    #[test]
    fn jump_pair_semantics() {
        let w = CadlagPath::scalar(
            &[
                (0.0, 1.0, Linear),
                (1.0, 0.0, ConstantRight),
                (1.0, 3.0, Linear),
                (2.0, 0.0, ConstantRight),
            ],
            2.0,
        )
        .unwrap();
        assert_eq!(w.evaluate_scalar(0.5), 0.5);
        assert_eq!(w.evaluate_scalar(1.0), 3.0);
        assert_eq!(w.left_limit(1.0), vec![0.0]);
        assert_eq!(w.evaluate_scalar(1.5), 1.5);
        assert_eq!(w.jump_times(10.0), vec![1.0]);
        // T_0 is reached as a left limit only, so the first time w = 0 is the end.
        assert_eq!(w.hitting_zero(), 2.0);
    }

    #[test]
    fn hitting_times_of_step_path() {
        let w = step_path();
        assert_eq!(w.hitting_time(&[2.0]).unwrap(), 1.0);
        assert_eq!(w.hitting_time(&[0.0]).unwrap(), 2.0);
        assert_eq!(w.hitting_time(&[1.5]).unwrap(), f64::INFINITY);
        assert!(w.hitting_time(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn hitting_times_of_linear_excursion() {
        let w = CadlagPath::scalar(
            &[
                (0.0, 0.0, Linear),
                (1.0, 1.0, Linear),
                (2.0, 0.0, ConstantRight),
            ],
            2.0,
        )
        .unwrap();
        assert_eq!(w.hitting_time(&[0.5]).unwrap(), 0.5);
        assert_eq!(w.hitting_time(&[1.0]).unwrap(), 1.0);
        assert_eq!(w.hitting_zero(), 2.0);
        assert_eq!(w.hitting_time(&[1.1]).unwrap(), f64::INFINITY);
        assert_eq!(w.sup_norm(), 1.0);
        assert_eq!(w.sup_norm_until(0.25), 0.25);
    }

    #[test]
    fn absorbed_path() {
        let o = CadlagPath::zero(1);
        assert_eq!(o.hitting_zero(), 0.0);
        assert_eq!(o.sup_norm(), 0.0);
        assert_eq!(o.evaluate_scalar(0.0), 0.0);
        assert!(o.is_absorbed());
    }

    #[test]
    fn planar_hitting_checks_both_coordinates() {
        let w = CadlagPath::new(
            2,
            vec![0.0, 1.0],
            vec![0.0, 0.0, 2.0, 1.0],
            vec![Linear, ConstantRight],
            1.0,
        )
        .unwrap();
        assert_eq!(w.hitting_time(&[1.0, 0.5]).unwrap(), 0.5);
        assert_eq!(w.hitting_time(&[1.0, 0.4]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn psi_examples() {
        let s = ScalingScheme::new(2.0, 0.5).unwrap();
        let w = step_path();
        let p = w.apply_psi(&s, 1.0, 1);
        assert_eq!(p.evaluate_scalar(0.25), 0.5);
        assert_eq!(p.evaluate_scalar(0.5), 1.0);
        assert_eq!(p.lifetime(), 1.0);
        assert_eq!(w.apply_psi(&s, 0.5, 0), w);
        let s8 = ScalingScheme::new(8.0, 0.5).unwrap();
        assert_eq!(w.apply_psi(&s, 1.0, 3), w.apply_psi(&s8, 1.0, 1));
        let h = w.apply_psi_hat(&s, 0.5, 2);
        assert_eq!(h.lifetime(), 1.0);
        assert_eq!(h.evaluate_scalar(0.75), 0.5);
    }

    #[test]
    fn shift_examples() {
        let w = step_path();
        let s = w.shift(1.0);
        assert_eq!(s.evaluate_scalar(0.0), 2.0);
        assert_eq!(s.lifetime(), 1.0);
        assert!(w.shift(2.0).is_absorbed());
        assert!(w.shift(3.0).is_absorbed());
        assert_eq!(w.shift(0.0), w);
        let lin = CadlagPath::scalar(
            &[
                (0.0, 0.0, Linear),
                (1.0, 1.0, Linear),
                (2.0, 0.0, ConstantRight),
            ],
            2.0,
        )
        .unwrap();
        let s = lin.shift(0.5);
        assert_eq!(s.evaluate_scalar(0.0), 0.5);
        assert_eq!(s.evaluate_scalar(0.5), 1.0);
        assert_eq!(s.evaluate_scalar(1.0), 0.5);
    }

    #[test]
    fn occupation_counts_zero_segments() {
        let w = CadlagPath::scalar(
            &[
                (0.0, 0.0, ConstantRight),
                (1.0, 1.0, Linear),
                (2.0, 0.0, ConstantRight),
                (3.5, 0.0, Linear),
                (4.0, 0.0, ConstantRight),
            ],
            5.0,
        )
        .unwrap();
        assert_eq!(w.occupation_of_zero(10.0), 1.0 + 1.5 + 0.5 + 1.0 + 5.0);
        assert_eq!(w.occupation_of_zero(0.5), 0.5);
    }

    #[test]
    fn terminal_knot_normalisation_keeps_values() {
        let w = CadlagPath::scalar(&[(0.0, 1.0, Linear), (1.0, 2.0, Linear)], 3.0).unwrap();
        let v = w.clone().with_terminal_knot();
        assert_eq!(v.len(), 3);
        for t in [0.0, 0.5, 1.0, 2.0, 2.999, 3.0, 4.0] {
            assert_eq!(w.evaluate_scalar(t), v.evaluate_scalar(t));
        }
    }
}
