//! Exact checks of the piecing construction on random finite point
//! processes: occupation identity, scaling commutation, round trip.

use excursions_core::path::{CadlagPath, ScalingScheme, SegmentMode};
use excursions_core::piecing::{extract_excursions, piece_together};
use excursions_core::point_process::{rescale_point_process, MarkedPointProcess, Point};
use excursions_core::rng::{stream, task_index};
use excursions_core::Result;
use rand::Rng;

/// Random finite point process and stagnancy rate.
///
/// With `dyadic` every time, value and `ς` is a multiple of `2^-10` below
/// `2^6`, so all sums formed while piecing are exact in `f64`.
pub fn random_configuration(rng: &mut impl Rng, dyadic: bool) -> (MarkedPointProcess, f64) {
    let grid = |rng: &mut dyn rand::RngCore, hi: f64| -> f64 {
        if dyadic {
            let k = rng.random_range(1..=(hi * 1024.0) as u32);
            f64::from(k) / 1024.0
        } else {
            hi * (1.0 - rng.random::<f64>())
        }
    };
    let dim = if rng.random::<f64>() < 0.25 { 2 } else { 1 };
    let l_max = grid(rng, 4.0);
    let k = rng.random_range(0..12usize);
    let mut locs: Vec<f64> = (0..k).map(|_| grid(rng, l_max)).collect();
    locs.sort_by(f64::total_cmp);
    locs.dedup();
    let points = locs
        .into_iter()
        .map(|location| {
            // Excursions leave zero at once: a zero start is followed by a
            // linear segment to a non-zero knot.
            let from_zero = rng.random::<bool>();
            let knots = rng.random_range(if from_zero { 2 } else { 1 }..6usize);
            let mut times = Vec::with_capacity(knots);
            let mut values = Vec::with_capacity(knots * dim);
            let mut modes = Vec::with_capacity(knots);
            let mut t = 0.0;
            for i in 0..knots {
                times.push(t);
                for _ in 0..dim {
                    values.push(if i == 0 && from_zero {
                        0.0
                    } else {
                        grid(rng, 2.0)
                    });
                }
                modes.push(if (i == 0 && from_zero) || rng.random::<bool>() {
                    SegmentMode::Linear
                } else {
                    SegmentMode::ConstantRight
                });
                t += grid(rng, 1.0);
            }
            let excursion = CadlagPath::new(dim, times, values, modes, t).expect("ordered knots");
            Point {
                location,
                excursion,
                mark: None,
            }
        })
        .collect::<Vec<_>>();
    let empty = points.is_empty();
    let p = MarkedPointProcess::new(dim, points, l_max, 0.0, 0.0).expect("valid configuration");
    let mut varsigma = if dyadic {
        f64::from(rng.random_range(0..=8u32)) / 4.0
    } else {
        2.0 * rng.random::<f64>()
    };
    if empty && varsigma == 0.0 {
        varsigma = 1.0;
    }
    (p, varsigma)
}

/// Largest `|∫_0^t 1{X=0} ds - ς L(t)|` over `grid + 1` equally spaced
/// times in `[0, η(l_max)]`, across `configurations` random processes.
pub fn occupation_identity(seed: u64, configurations: usize, grid: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..configurations {
        let mut rng = stream(seed, task_index(10, 0, i as u32));
        let (p, varsigma) = random_configuration(&mut rng, false);
        let t = piece_together(&p, varsigma)?;
        let end = t.valid_until;
        for k in 0..=grid {
            worst = worst.max(t.occupation_error(end * k as f64 / grid as f64));
        }
    }
    Ok(worst)
}

/// Counts configurations where pieced-then-scaled and scaled-then-pieced
/// triples differ beyond relative tolerance `tol`, over `c ∈ cs` and
/// `n ∈ ns` with `γ = ακ`.
pub fn scaling_commutation(
    seed: u64,
    configurations: usize,
    alpha: f64,
    gamma: f64,
    cs: &[f64],
    ns: &[i32],
    tol: f64,
) -> Result<usize> {
    let mut bad = 0;
    for i in 0..configurations {
        let mut rng = stream(seed, task_index(11, 0, i as u32));
        let (p, varsigma) = random_configuration(&mut rng, false);
        let base = piece_together(&p, varsigma)?;
        let mut ok = true;
        for &c in cs {
            let s = ScalingScheme::new(c, alpha)?;
            for &n in ns {
                let vn = varsigma * s.pow(-(1.0 - gamma) * f64::from(n));
                let scaled = piece_together(&rescale_point_process(&p, &s, gamma, n), vn)?;
                ok &= scaled.x.approx_eq(&base.x.apply_psi(&s, alpha, n), tol)
                    && scaled
                        .local_time
                        .approx_eq(&base.local_time.apply_psi(&s, gamma, n), tol)
                    && scaled
                        .eta
                        .approx_eq(&base.eta.apply_psi_hat(&s, gamma, n), tol);
            }
        }
        if !ok {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Counts configurations (dyadic data) whose extracted point process is
/// not bit-identical to the one pieced.
pub fn round_trip(seed: u64, configurations: usize) -> Result<usize> {
    let mut bad = 0;
    for i in 0..configurations {
        let mut rng = stream(seed, task_index(12, 0, i as u32));
        let (p, varsigma) = random_configuration(&mut rng, true);
        let t = piece_together(&p, varsigma)?;
        let back = extract_excursions(&t.x, &t.local_time)?;
        if back.points() != p.points() || back.l_max() != p.l_max() {
            bad += 1;
        }
    }
    Ok(bad)
}

/// Largest relative knot error of the round trip on general float data.
pub fn round_trip_float_error(seed: u64, configurations: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 0..configurations {
        let mut rng = stream(seed, task_index(13, 0, i as u32));
        let (p, varsigma) = random_configuration(&mut rng, false);
        let t = piece_together(&p, varsigma)?;
        let back = extract_excursions(&t.x, &t.local_time)?;
        for (a, b) in back.points().iter().zip(p.points()) {
            let scale = t.valid_until.max(1.0);
            for (x, y) in a.excursion.times().iter().zip(b.excursion.times()) {
                worst = worst.max((x - y).abs() / scale);
            }
            for (x, y) in a.excursion.values().iter().zip(b.excursion.values()) {
                worst = worst.max((x - y).abs() / y.abs().max(1.0));
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_runs_are_exact() {
        assert!(occupation_identity(1, 20, 200).unwrap() < 1e-10);
        assert_eq!(
            scaling_commutation(1, 20, 0.5, 0.5, &[2.0, 4.0], &[1, 2, 3], 1e-12).unwrap(),
            0
        );
        assert_eq!(round_trip(1, 20).unwrap(), 0);
        assert!(round_trip_float_error(1, 20).unwrap() < 1e-12);
    }
}
