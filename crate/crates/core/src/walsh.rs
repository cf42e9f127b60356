//! Walsh-type planar processes: scalar excursions laid on rays.

use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{param, Error, Result};
use crate::jumping_in::{Disintegration, Geometry, JumpInMeasure, JumpInTriple, MarkData};
use crate::measures::{BrownianIto, BrownianStopped, SharedMeasure, SharedStopped};
use crate::path::CadlagPath;

pub fn unit_vector(angle: f64) -> [f64; 2] {
    [libm::cos(angle), libm::sin(angle)]
}

/// `t ↦ q(t) v` for a nonnegative scalar path `q` and a unit vector `v`.
pub fn embed_on_ray(q: &CadlagPath, v: [f64; 2]) -> Result<CadlagPath> {
    if libm::fabs(libm::hypot(v[0], v[1]) - 1.0) > 1e-12 {
        return Err(param("ray", "must be a unit vector"));
    }
    if q.dim() != 1 {
        return Err(Error::Dimension {
            expected: 1,
            got: q.dim(),
        });
    }
    if q.values().iter().any(|&x| x < 0.0) {
        return Err(param("q", "radial path must be nonnegative"));
    }
    Ok(q.map_values(2, |x, out| {
        out[0] = x[0] * v[0];
        out[1] = x[0] * v[1];
    }))
}

/// `x = s v` with `s = ⟨x, v⟩ > 0`, coordinatewise to `tol · |x|`.
fn on_ray(x: &[f64], v: &[f64; 2], r: f64, tol: f64) -> bool {
    let s = x[0] * v[0] + x[1] * v[1];
    s > 0.0 && libm::fabs(x[0] - s * v[0]) <= tol * r && libm::fabs(x[1] - s * v[1]) <= tol * r
}

/// Index of the ray carrying every nonzero knot of `w`, or `None` for a path
/// that never leaves the origin.
pub fn ray_of(w: &CadlagPath, rays: &[[f64; 2]], tol: f64) -> Result<Option<usize>> {
    if w.dim() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: w.dim(),
        });
    }
    let mut found: Option<usize> = None;
    for i in 0..w.len() {
        let x = w.value(i);
        let r = libm::hypot(x[0], x[1]);
        if r == 0.0 {
            continue;
        }
        let on = |v: &[f64; 2]| on_ray(x, v, r, tol);
        match found {
            Some(k) if on(&rays[k]) => {}
            Some(_) => return Err(Error::NotOnRay(alloc::format!("knot {i} leaves its ray"))),
            None => match rays.iter().position(on) {
                Some(k) => found = Some(k),
                None => return Err(Error::NotOnRay(alloc::format!("knot {i} is on no ray"))),
            },
        }
    }
    Ok(found)
}

/// Splits a pieced planar path at its visits to the origin and returns the
/// ray of each excursion in order.
pub fn excursion_rays(x: &CadlagPath, rays: &[[f64; 2]], tol: f64) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Option<usize> = None;
    for i in 0..x.len() {
        let v = x.value(i);
        let r = libm::hypot(v[0], v[1]);
        if r == 0.0 {
            if let Some(k) = current.take() {
                out.push(k);
            }
            continue;
        }
        let on = |u: &[f64; 2]| on_ray(v, u, r, tol);
        match current {
            Some(k) if on(&rays[k]) => {}
            Some(_) => {
                // A jump between rays without passing through the origin is
                // only allowed at an excursion boundary (jump-in after death).
                let prev_zero = i > 0 && x.time(i - 1) == x.time(i) && {
                    let p = x.value(i - 1);
                    p[0] == 0.0 && p[1] == 0.0
                };
                if !prev_zero {
                    return Err(Error::NotOnRay(alloc::format!("knot {i} switches ray")));
                }
            }
            None => match rays.iter().position(on) {
                Some(k) => current = Some(k),
                None => return Err(Error::NotOnRay(alloc::format!("knot {i} is on no ray"))),
            },
        }
    }
    if let Some(k) = current {
        out.push(k);
    }
    Ok(out)
}

/// Reflecting-Brownian Walsh family: on every ray the excursion measure is
/// the Itô measure of `|B|` with normalisation `delta` and jump-ins run a
/// Brownian motion stopped at zero. Jumps into ray `v` follow
/// `ρ_j(v) j_v`. Here `α = 1/2` and `κ = 1`.
pub fn walsh_jumpin_family(
    rays: &[[f64; 2]],
    rho: &[f64],
    disint: &Disintegration,
    varsigma: f64,
    delta: f64,
) -> Result<JumpInMeasure> {
    if rho.len() != rays.len() || disint.rays.len() != rays.len() {
        return Err(param("rays", "rho, rays and the disintegration must agree"));
    }
    let marks = rho
        .iter()
        .zip(disint.recompose())
        .map(|(&r, j)| MarkData { rho: r, j })
        .collect();
    let triple = JumpInTriple {
        marks,
        varsigma,
        geometry: Geometry::Rays(rays.to_vec()),
    };
    let bm: SharedMeasure = Arc::new(BrownianIto::new(delta)?);
    let stopped: SharedStopped = Arc::new(BrownianStopped::standard());
    JumpInMeasure::assemble(
        triple,
        alloc::vec![bm; rays.len()],
        alloc::vec![stopped; rays.len()],
        0.5,
        1.0,
    )
}

/// `ρ*(v) = ρ(v) + π(v) ρ_j(v) / δ`.
pub fn walsh_rho_star(rho: &[f64], disint: &Disintegration, delta: f64) -> Vec<f64> {
    rho.iter()
        .enumerate()
        .map(|(v, &r)| r + disint.pi(v) * disint.angular[v] / delta)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jumping_in::{disintegrate, Component, RadialMeasure};
    use crate::measures::{ExcursionMeasure, Resolution};
    use crate::path::SegmentMode::ConstantRight;
    use crate::piecing::piece_together;
    use crate::point_process::sample_ppp;
    use crate::rng::stream;

    #[test]
    fn embedding_examples() {
        let o = CadlagPath::zero(1);
        assert!(embed_on_ray(&o, [0.0, 1.0]).unwrap().is_absorbed());
        let q = CadlagPath::scalar(&[(0.0, 1.0, ConstantRight)], 1.0).unwrap();
        let w = embed_on_ray(&q, [0.0, 1.0]).unwrap();
        assert_eq!(w.evaluate(0.5), vec![0.0, 1.0]);
        assert_eq!(w.lifetime(), 1.0);
        let v = unit_vector(0.7);
        let w = embed_on_ray(&q, v).unwrap();
        assert!((w.sup_norm() - q.sup_norm()).abs() < 1e-15);
        assert!(embed_on_ray(&q, [1.0, 1.0]).is_err());
        assert_eq!(ray_of(&w, &[[1.0, 0.0], v], 1e-15).unwrap(), Some(1));
    }

    #[test]
    fn single_ray_matches_the_scalar_family() {
        let rays = [[1.0, 0.0]];
        let j = RadialMeasure::Atomic(alloc::vec![(2.0, 1.0)]);
        let d = disintegrate(&rays, &[j]).unwrap();
        assert_eq!(d.pi(0), 2.0);
        let m = walsh_jumpin_family(&rays, &[1.0], &d, 0.0, 1.0).unwrap();
        let res = Resolution::new(1e-3, 1.0).unwrap();
        let (mut a, mut b) = (stream(2, 0), stream(2, 0));
        let scalar = crate::jumping_in::JumpInMeasure::assemble(
            crate::jumping_in::JumpInTriple::half_line(
                1.0,
                RadialMeasure::Atomic(alloc::vec![(2.0, 1.0)]),
                0.0,
            ),
            alloc::vec![Arc::new(BrownianIto::new(1.0).unwrap()) as SharedMeasure],
            alloc::vec![Arc::new(BrownianStopped::standard()) as SharedStopped],
            0.5,
            1.0,
        )
        .unwrap();
        for _ in 0..20 {
            let (p, _) = m.sample_big(0.01, &res, &mut a);
            let (q, _) = scalar.sample_big(0.01, &res, &mut b);
            assert_eq!(p, embed_on_ray(&q, rays[0]).unwrap());
        }
        assert_eq!(walsh_rho_star(&[1.0], &d, 1.0), alloc::vec![3.0]);
    }

    #[test]
    fn pieced_paths_stay_on_rays() {
        let rays = [unit_vector(0.3), unit_vector(2.0), unit_vector(4.0)];
        let js = [
            RadialMeasure::Atomic(alloc::vec![(1.0, 1.0)]),
            RadialMeasure::zero(),
            RadialMeasure::Exponential {
                mass: 2.0,
                rate: 1.0,
            },
        ];
        let d = disintegrate(&rays, &js).unwrap();
        let m = walsh_jumpin_family(&rays, &[1.0, 1.0, 0.0], &d, 0.2, 1.0).unwrap();
        let res = Resolution::new(1e-2, 2.0).unwrap();
        let mut rng = stream(3, 0);
        for _ in 0..20 {
            let p = sample_ppp(&m, 1.0, 0.01, &res, &mut rng).unwrap();
            for pt in p.points() {
                let k = ray_of(&pt.excursion, &rays, 1e-15).unwrap().unwrap();
                assert_eq!(Component::from_mark(pt.mark.unwrap()).ray(), k);
            }
            let t = piece_together(&p, 0.2).unwrap();
            let ks = excursion_rays(&t.x, &rays, 1e-15).unwrap();
            assert!(ks.len() <= p.len());
        }
    }
}
