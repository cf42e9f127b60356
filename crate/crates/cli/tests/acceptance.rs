//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Run with `cargo test -p excursions --test acceptance --release`.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use excursions::config::RunConfig;
use excursions::exec::RayonExecutor;
use excursions::experiments::{self, Outcome};
use excursions::invariants;
use excursions_core::homogenization::{
    phi_dominant_medians, phi_vanishing_medians, DominantCoupling, Report, Verdict,
};
use excursions_core::jumping_in::RadialMeasure;
use excursions_core::measures::{
    estimate_sigma, sample_stopped_path, BrownianIto, BrownianStopped, Resolution,
};
use excursions_core::path::ScalingScheme;
use excursions_core::point_process::sample_ppp;
use excursions_core::rng::{stream, task_index};
use excursions_core::stats::{mean_and_stderr, ols_slope};

const SEED: u64 = 20261015;

// Tolerances and sizes as stated by the criteria.
const OCCUPATION_TOL: f64 = 1e-10;
const SCALING_TOL: f64 = 1e-12;
const CONFIGS: usize = 100;
const GRID: usize = 1000;
const LAPLACE_EPS: f64 = 1e-2;
const LAPLACE_REPLICAS: usize = 10_000;
const LAPLACE_SE: f64 = 3.0;
const SIGMA_SAMPLES: usize = 100_000;
const SIGMA_BAND: (f64, f64) = (0.45, 0.55);
const PT0_XS: [f64; 4] = [0.05, 0.1, 0.2, 0.4];
const PT0_PATHS: usize = 100_000;
const SLOPE_TOL: f64 = 0.1;
const PHI_SAMPLES: usize = 100;
const WALSH_SE: f64 = 3.0;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    limit: Duration,
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn run_config(name: &str, out: &Path, threads: Option<usize>) -> Outcome {
    let cfg = RunConfig::load(&config(name)).expect("config loads");
    let exec = RayonExecutor::new(threads).expect("pool");
    experiments::run(&cfg, out, &exec).expect("experiment runs")
}

fn rows_detail(r: &Report, pred: impl Fn(&str, &str) -> bool) -> String {
    r.rows
        .iter()
        .filter(|row| row.verdict != Verdict::Info && pred(&row.functional, &row.statistic))
        .map(|row| {
            format!(
                "{}@{} {}={:.4}/{:.4}",
                row.functional,
                row.n.map_or("*".into(), |n| n.to_string()),
                row.statistic,
                row.value,
                row.null_band
            )
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn occupation() -> (bool, String) {
    let e = invariants::occupation_identity(SEED, CONFIGS, GRID).unwrap();
    (
        e < OCCUPATION_TOL,
        format!("max error {e:e} < {OCCUPATION_TOL:e}"),
    )
}

fn scaling() -> (bool, String) {
    let bad = invariants::scaling_commutation(
        SEED,
        CONFIGS,
        0.5,
        0.5,
        &[2.0, 4.0],
        &[1, 2, 3],
        SCALING_TOL,
    )
    .unwrap();
    (
        bad == 0,
        format!("{bad} of {CONFIGS} configurations differ"),
    )
}

fn round_trip() -> (bool, String) {
    let bad = invariants::round_trip(SEED, CONFIGS).unwrap();
    let float = invariants::round_trip_float_error(SEED, CONFIGS).unwrap();
    (
        bad == 0,
        format!("{bad} mismatches on dyadic data; general floats max rel error {float:e}"),
    )
}

/// `E exp(-λ η(1))` under the truncated Brownian Itô measure (`δ = 1`):
/// the compensator drift `∫_0^ε t ν(dt) = 2 sqrt(ε / 2π)` and
/// `ν̂[1 - e^{-λT}] = sqrt(2 / πε) ∫_0^1 (1 - e^{-λε/u²}) du` after
/// substituting `t = ε/u²` in `ν(dt) = (2π t³)^{-1/2} dt`.
fn laplace_oracle(lambda: f64, eps: f64) -> f64 {
    let drift = 2.0 * (eps / (2.0 * std::f64::consts::PI)).sqrt();
    let m = 20_000;
    let h = 1.0 / m as f64;
    let f = |u: f64| {
        if u == 0.0 {
            1.0
        } else {
            1.0 - (-lambda * eps / (u * u)).exp()
        }
    };
    let mut s = f(0.0) + f(1.0);
    for k in 1..m {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    let integral = s * h / 3.0;
    let jumps = (2.0 / (std::f64::consts::PI * eps)).sqrt() * integral;
    (-lambda * drift - jumps).exp()
}

fn laplace() -> (bool, String) {
    let nu = BrownianIto::new(1.0).unwrap();
    let res = Resolution::new(1.0, 0.0).unwrap();
    let etas: Vec<f64> = (0..LAPLACE_REPLICAS)
        .map(|i| {
            let mut rng = stream(SEED, task_index(40, 0, i as u32));
            let p = sample_ppp(&nu, 1.0, LAPLACE_EPS, &res, &mut rng).unwrap();
            p.compensator_rate() + p.total_lifetime(1.0)
        })
        .collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let v: Vec<f64> = etas.iter().map(|e| (-lambda * e).exp()).collect();
        let (m, se) = mean_and_stderr(&v);
        let want = laplace_oracle(lambda, LAPLACE_EPS);
        let z = (m - want) / se;
        ok &= z.abs() <= LAPLACE_SE;
        parts.push(format!("lambda={lambda}: {m:.5} vs {want:.5} ({z:+.2} se)"));
    }
    (ok, parts.join("; "))
}

fn sigma_ratio() -> (bool, String) {
    let nu = BrownianIto::new(1.0).unwrap();
    let res = Resolution::new(1e-3, f64::INFINITY).unwrap();
    let (x, r_cond) = (0.5, 0.25);
    let s1 = estimate_sigma(&nu, x, r_cond, SIGMA_SAMPLES, &res, &mut stream(SEED, 41)).unwrap();
    let s2 = estimate_sigma(
        &nu,
        2.0 * x,
        r_cond,
        SIGMA_SAMPLES,
        &res,
        &mut stream(SEED, 42),
    )
    .unwrap();
    let ratio = s2 / s1;
    (
        ratio >= SIGMA_BAND.0 && ratio <= SIGMA_BAND.1,
        format!(
            "sigma(1)/sigma(0.5) = {ratio:.4} in [{}, {}]",
            SIGMA_BAND.0, SIGMA_BAND.1
        ),
    )
}

/// `E_x[T_0 ∧ 1] = ∫_0^1 P_x(T_0 > s) ds = ∫_0^1 erf(x / sqrt(2s)) ds`.
fn pt0_oracle(x: f64) -> f64 {
    let m = 20_000;
    let h = 1.0 / m as f64;
    (0..m)
        .map(|k| {
            let s = (k as f64 + 0.5) * h;
            libm::erf(x / (2.0 * s).sqrt())
        })
        .sum::<f64>()
        * h
}

fn pt0_slope() -> (bool, String) {
    let law = BrownianStopped::standard();
    let res = Resolution::new(1e-3, 1.0).unwrap();
    let mut logs = Vec::new();
    let mut vals = Vec::new();
    for (k, &x) in PT0_XS.iter().enumerate() {
        let mut rng = stream(SEED, task_index(43, k as u16, 0));
        let v: Vec<f64> = (0..PT0_PATHS)
            .map(|_| {
                sample_stopped_path(&law, x, &res, &mut rng)
                    .unwrap()
                    .lifetime()
                    .min(1.0)
            })
            .collect();
        let m = v.iter().sum::<f64>() / v.len() as f64;
        vals.push(m);
        logs.push(m.ln());
    }
    let lx: Vec<f64> = PT0_XS.iter().map(|x| x.ln()).collect();
    let slope = ols_slope(&lx, &logs).unwrap();
    let exact: Vec<f64> = PT0_XS.iter().map(|&x| pt0_oracle(x).ln()).collect();
    let exact_slope = ols_slope(&lx, &exact).unwrap();
    let kappa = 1.0;
    (
        (slope - kappa).abs() <= SLOPE_TOL,
        format!(
            "slope {slope:.4} vs {kappa} +/- {SLOPE_TOL}; quadrature slope {exact_slope:.4}; means {}",
            vals.iter()
                .map(|v| format!("{v:.5}"))
                .collect::<Vec<_>>()
                .join(",")
        ),
    )
}

fn psj(out: &Path) -> (bool, String) {
    let o = run_config("psj.toml", out, None);
    (o.passed(), rows_detail(&o.report, |_, _| true))
}

fn pbj(out: &Path) -> (bool, String) {
    let o = run_config("pbj.toml", out, None);
    let weights_exact = o
        .report
        .rows
        .iter()
        .filter(|r| r.functional == "excursion_weight")
        .all(|r| r.verdict == Verdict::Pass);
    (
        o.passed() && weights_exact,
        format!(
            "weights exact: {weights_exact}; {}",
            rows_detail(&o.report, |f, _| f != "excursion_weight")
        ),
    )
}

fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn phi_medians() -> (bool, String) {
    let nu = BrownianIto::new(1.0).unwrap();
    let scheme = ScalingScheme::new(2.0, 0.5).unwrap();
    let res = Resolution::new(1e-3, 10.0).unwrap();
    let ns: Vec<i32> = (1..=6).collect();
    let van = phi_vanishing_medians(
        &nu,
        &[1.0],
        &scheme,
        &ns,
        PHI_SAMPLES,
        2.0,
        &res,
        &mut stream(SEED, 44),
    )
    .unwrap();
    let coupling = DominantCoupling {
        scheme,
        kappa: 1.0,
        beta: 0.5,
        delta: nu.delta(),
        j: vec![RadialMeasure::PowerTail {
            j0: 1.0,
            beta: 0.5,
            floor: 1.0,
        }],
        j_star: vec![RadialMeasure::PowerTail {
            j0: 1.0,
            beta: 0.5,
            floor: 0.0,
        }],
        rays: None,
    };
    let dom = phi_dominant_medians(
        &nu,
        &coupling,
        0,
        (0.5, 2.0),
        &ns,
        PHI_SAMPLES,
        2.0,
        &res,
        &mut stream(SEED, 45),
    )
    .unwrap();
    let fmt = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.4}"))
            .collect::<Vec<_>>()
            .join(",")
    };
    (
        strictly_decreasing(&van) && strictly_decreasing(&dom),
        format!("vanishing [{}] dominant [{}]", fmt(&van), fmt(&dom)),
    )
}

fn walsh(out: &Path) -> (bool, String) {
    let o = run_config("walsh.toml", out, None);
    let census = o
        .report
        .rows
        .iter()
        .filter(|r| r.functional == "census")
        .last()
        .map_or(0.0, |r| r.value);
    let mut ok = o.passed();
    let mut parts = vec![format!("violations {}", o.measured["ray_violations"])];
    for v in 0..2 {
        let r = o
            .report
            .rows
            .iter()
            .filter(|r| r.functional == format!("ray{v}_share"))
            .last()
            .expect("share row");
        let se = (r.null_band * (1.0 - r.null_band) / census).sqrt();
        ok &= (r.value - r.null_band).abs() <= WALSH_SE * se;
        parts.push(format!(
            "ray{v} share {:.4} vs {:.4} ({:+.2} se)",
            r.value,
            r.null_band,
            (r.value - r.null_band) / se
        ));
    }
    (ok, parts.join("; "))
}

fn determinism(first: &Path, out: &Path) -> (bool, String) {
    run_config("psj.toml", out, Some(1));
    let mut same = true;
    let mut files = Vec::new();
    for f in ["report.csv", "manifest.txt"] {
        let a = std::fs::read(first.join(f)).expect("first run output");
        let b = std::fs::read(out.join(f)).expect("second run output");
        same &= a == b;
        files.push(format!("{f} {} bytes", a.len()));
    }
    (
        same,
        format!(
            "rerun with one thread, identical: {same} ({})",
            files.join(", ")
        ),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temp dir");
    let psj_dir = dir.path().join("psj");
    let mut lines = Vec::new();
    let mut check =
        |id: u32, name: &'static str, limit: Duration, f: &dyn Fn() -> (bool, String)| {
            let t = Instant::now();
            let (pass, detail) = f();
            let elapsed = t.elapsed();
            let line = Line {
                id,
                name,
                pass: pass && elapsed < limit,
                detail,
                elapsed,
                limit,
            };
            println!(
                "criterion {:>2} {:<24} {} [{:.1}s of {}s] {}",
                line.id,
                line.name,
                if line.pass { "PASS" } else { "FAIL" },
                line.elapsed.as_secs_f64(),
                line.limit.as_secs(),
                line.detail
            );
            lines.push(line);
        };
    check(1, "occupation_identity", secs(10), &occupation);
    check(2, "scaling_commutation", secs(10), &scaling);
    check(3, "round_trip", secs(5), &round_trip);
    check(4, "laplace_eta", secs(120), &laplace);
    check(5, "sigma_scaling", secs(300), &sigma_ratio);
    check(6, "pt0_slope", secs(300), &pt0_slope);
    check(7, "psj_homogenization", secs(900), &|| psj(&psj_dir));
    check(8, "pbj_homogenization", secs(900), &|| {
        pbj(&dir.path().join("pbj"))
    });
    check(9, "phi_coupling_medians", secs(300), &phi_medians);
    check(10, "walsh", secs(600), &|| walsh(&dir.path().join("walsh")));
    check(11, "determinism", secs(900), &|| {
        determinism(&psj_dir, &dir.path().join("psj_again"))
    });
    let failed: Vec<u32> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    println!(
        "acceptance: {} of {} criteria pass",
        lines.len() - failed.len(),
        lines.len()
    );
    if !failed.is_empty() {
        println!("failed: {failed:?}");
        std::process::exit(1);
    }
}
