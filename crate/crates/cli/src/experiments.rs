//! Experiment drivers behind `run` and `verify`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use excursions_core::exec::Executor;
use excursions_core::homogenization::{
    build_j_star_power, build_rho_star, run_homogenization_experiment, ExperimentConfig,
    Functional, GammaMode, Report, ReportRow, ScaledFamily, Verdict,
};
use excursions_core::jumping_in::{
    disintegrate, Component, JumpInMeasure, JumpInTriple, RadialMeasure,
};
use excursions_core::measures::lamperti::{LampertiStopped, LevyDriver, PssmpMeasure};
use excursions_core::measures::{
    BrownianIto, BrownianStopped, Resolution, SharedMeasure, SharedStopped,
};
use excursions_core::piecing::piece_together;
use excursions_core::point_process::{rescale_point_process, sample_ppp};
use excursions_core::rng::{stream, task_index};
use excursions_core::stats::Statistic;
use excursions_core::walsh::{
    excursion_rays, ray_of, unit_vector, walsh_jumpin_family, walsh_rho_star,
};

use crate::config::{ConfigError, ExperimentKind, LimitChoice, MeasureParams, RunConfig};
use crate::invariants;
use crate::io::{self, FormatError};
use crate::plot::emit_plots;

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] excursions_core::Error),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<rayon::ThreadPoolBuildError> for RunError {
    fn from(e: rayon::ThreadPoolBuildError) -> Self {
        RunError::Io(std::io::Error::other(e.to_string()))
    }
}

pub struct Outcome {
    pub report: Report,
    /// Measured quantities appended to the manifest.
    pub measured: BTreeMap<String, String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.report.passed()
    }
}

/// Tolerance of the occupation identity.
pub const OCCUPATION_TOL: f64 = 1e-10;
/// Relative tolerance of the scaling commutation.
pub const SCALING_TOL: f64 = 1e-12;

/// Runs `cfg`, writing the manifest, report CSV, plots and experiment
/// specific files into `out`.
pub fn run<E: Executor>(cfg: &RunConfig, out: &Path, exec: &E) -> Result<Outcome, RunError> {
    std::fs::create_dir_all(out)?;
    let mut outcome = match cfg.experiment {
        ExperimentKind::Simulate => simulate(cfg, out)?,
        ExperimentKind::VerifyInvariants => verify_invariants(cfg)?,
        ExperimentKind::HomogenizeVanishing | ExperimentKind::HomogenizeDominant => {
            homogenize(cfg, exec)?
        }
        ExperimentKind::Walsh => walsh(cfg, exec)?,
    };
    let report_path = out.join("report.csv");
    std::fs::write(&report_path, io::report_to_csv(&outcome.report))?;
    outcome.files.push(report_path);
    outcome
        .files
        .extend(emit_plots(&outcome.report, &out.join("plots"))?);
    let mut manifest = cfg.manifest_entries();
    for (k, v) in &outcome.measured {
        manifest.insert(format!("result.{k}"), v.clone());
    }
    manifest.insert(
        "result.verdict".into(),
        if outcome.passed() { "pass" } else { "fail" }.into(),
    );
    let mpath = out.join("manifest.txt");
    io::write_manifest(&mpath, &manifest)?;
    outcome.files.push(mpath);
    Ok(outcome)
}

fn row(
    n: Option<i32>,
    functional: &str,
    statistic: &str,
    value: f64,
    band: f64,
    verdict: Verdict,
) -> ReportRow {
    ReportRow {
        n,
        functional: functional.into(),
        statistic: statistic.into(),
        value,
        null_band: band,
        verdict,
    }
}

fn verdict(b: bool) -> Verdict {
    if b {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Excursion measure and stopped law named by the config.
pub fn base_laws(cfg: &RunConfig) -> Result<(SharedMeasure, SharedStopped), RunError> {
    Ok(match cfg.measure {
        MeasureParams::BrownianIto { normalization }
        | MeasureParams::BesselRay { normalization } => (
            Arc::new(BrownianIto::new(normalization)?),
            Arc::new(BrownianStopped::standard()),
        ),
        MeasureParams::PssmpBmDrift {
            mu,
            sigma,
            normalization,
            du,
            start_frac,
            calibration_samples,
        } => {
            let stopped =
                LampertiStopped::new(LevyDriver::brownian(-mu, sigma)?, cfg.scheme.alpha, du)?;
            let mut rng = stream(cfg.seed, task_index(20, 0, 0));
            let m = PssmpMeasure::calibrated(
                stopped.clone(),
                normalization,
                start_frac,
                calibration_samples,
                &mut rng,
            )?;
            (Arc::new(m), Arc::new(stopped))
        }
    })
}

fn half_line_triple(cfg: &RunConfig) -> JumpInTriple {
    JumpInTriple::half_line(cfg.triple.rho[0], cfg.triple.j.clone(), cfg.triple.varsigma)
}

fn simulate(cfg: &RunConfig, out: &Path) -> Result<Outcome, RunError> {
    let (m, stopped) = base_laws(cfg)?;
    let measure = JumpInMeasure::assemble(
        half_line_triple(cfg),
        vec![m],
        vec![stopped],
        cfg.scheme.alpha,
        cfg.scheme.kappa,
    )?;
    let res = Resolution::new(cfg.sampling.step, cfg.sampling.horizon)?;
    let mut rng = stream(cfg.seed, task_index(21, 0, 0));
    let p = sample_ppp(
        &measure,
        cfg.sampling.l_max,
        cfg.sampling.eps,
        &res,
        &mut rng,
    )?;
    let t = piece_together(&p, cfg.triple.varsigma)?;
    io::write_points(out, &p)?;
    io::write_triple(out, &t)?;
    let grid = cfg.invariants.grid.max(1);
    let mut worst: f64 = 0.0;
    for k in 0..=grid {
        worst = worst.max(t.occupation_error(t.valid_until * k as f64 / grid as f64));
    }
    let mut measured = BTreeMap::new();
    measured.insert("points".into(), p.len().to_string());
    measured.insert("valid_until".into(), t.valid_until.to_string());
    measured.insert("varsigma_eff".into(), t.varsigma_eff().to_string());
    measured.insert("occupation_max_error".into(), worst.to_string());
    for name in measure.admissibility().failures() {
        measured.insert(format!("admissibility.{name}"), "fail".into());
    }
    let report = Report {
        rows: vec![row(
            None,
            "occupation_identity",
            "max_abs_error",
            worst,
            OCCUPATION_TOL,
            verdict(worst < OCCUPATION_TOL),
        )],
    };
    Ok(Outcome {
        report,
        measured,
        files: vec![
            out.join("x.csv"),
            out.join("local_time.csv"),
            out.join("eta.csv"),
            out.join("points.csv"),
        ],
    })
}

fn verify_invariants(cfg: &RunConfig) -> Result<Outcome, RunError> {
    let n = cfg.invariants.configurations;
    let occ = invariants::occupation_identity(cfg.seed, n, cfg.invariants.grid)?;
    let gamma = cfg.scheme.alpha * cfg.scheme.kappa;
    let bad_scaling = invariants::scaling_commutation(
        cfg.seed,
        n,
        cfg.scheme.alpha,
        gamma,
        &[2.0, 4.0],
        &[1, 2, 3],
        SCALING_TOL,
    )?;
    let bad_rt = invariants::round_trip(cfg.seed, n)?;
    let float_rt = invariants::round_trip_float_error(cfg.seed, n)?;
    let mut measured = BTreeMap::new();
    measured.insert("occupation_max_error".into(), occ.to_string());
    measured.insert("scaling_mismatches".into(), bad_scaling.to_string());
    measured.insert("round_trip_mismatches".into(), bad_rt.to_string());
    measured.insert("round_trip_float_error".into(), float_rt.to_string());
    let report = Report {
        rows: vec![
            row(
                None,
                "occupation_identity",
                "max_abs_error",
                occ,
                OCCUPATION_TOL,
                verdict(occ < OCCUPATION_TOL),
            ),
            row(
                None,
                "scaling_commutation",
                "mismatches",
                bad_scaling as f64,
                0.0,
                verdict(bad_scaling == 0),
            ),
            row(
                None,
                "round_trip_dyadic",
                "mismatches",
                bad_rt as f64,
                0.0,
                verdict(bad_rt == 0),
            ),
            row(
                None,
                "round_trip_float",
                "max_rel_error",
                float_rt,
                f64::NAN,
                Verdict::Info,
            ),
        ],
    };
    Ok(Outcome {
        report,
        measured,
        files: Vec::new(),
    })
}

/// Scaled family and limit family of a homogenization run.
pub fn homogenization_families(cfg: &RunConfig) -> Result<(ScaledFamily, ScaledFamily), RunError> {
    let (m, stopped) = base_laws(cfg)?;
    let law = m.power_law().ok_or_else(|| ConfigError::Invalid {
        key: "measure.label".into(),
        reason: "measure has no closed-form sigma".into(),
    })?;
    let (alpha, kappa) = (cfg.scheme.alpha, cfg.scheme.kappa);
    let triple = half_line_triple(cfg);
    let mode = match cfg.experiment {
        ExperimentKind::HomogenizeDominant => GammaMode::Dominant {
            beta: cfg.scheme.beta.expect("validated"),
        },
        _ => GammaMode::Vanishing,
    };
    let base = Arc::new(JumpInMeasure::assemble(
        triple.clone(),
        vec![m.clone()],
        vec![stopped.clone()],
        alpha,
        kappa,
    )?);
    let family = ScaledFamily::new(base.clone(), cfg.scheme.c, mode)?;
    let limit = match cfg.homogenization.limit {
        LimitChoice::SelfLimit => family.clone(),
        LimitChoice::Derived => {
            let lim = match mode {
                GammaMode::Vanishing => build_rho_star(&triple, &[law])?,
                GammaMode::Dominant { beta } => build_j_star_power(&triple, beta, kappa)?,
            };
            let lm = JumpInMeasure::assemble(lim.triple, vec![m], vec![stopped], alpha, kappa)?;
            ScaledFamily::new(Arc::new(lm), cfg.scheme.c, mode)?
        }
    };
    Ok((family, limit))
}

pub fn experiment_config(cfg: &RunConfig) -> Result<ExperimentConfig, RunError> {
    let h = &cfg.homogenization;
    let mut functionals: Vec<Functional> = h.times.iter().map(|&t| Functional::XAt(t)).collect();
    functionals.extend(h.sup_until.map(Functional::SupUntil));
    functionals.extend(h.local_time_at.map(Functional::LocalTimeAt));
    functionals.extend(h.eta_at.map(Functional::EtaAt));
    let t_max = functionals
        .iter()
        .map(|f| f.needs().0)
        .chain(h.joint_time)
        .fold(0.0f64, f64::max)
        .max(cfg.sampling.step);
    Ok(ExperimentConfig {
        n_list: h.n_list.clone(),
        n_paths: h.n_paths,
        eps: cfg.sampling.eps,
        res: Resolution::new(cfg.sampling.step, t_max)?,
        functionals,
        statistics: vec![Statistic::Ks, Statistic::W1, Statistic::W1Log],
        joint_time: h.joint_time,
        joint_cap: h.joint_cap,
        null_reps: h.null_reps,
        level: h.level,
        trend_allowance: h.trend_allowance,
        seed: cfg.seed,
    })
}

fn homogenize<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<Outcome, RunError> {
    let (family, limit) = homogenization_families(cfg)?;
    let report = run_homogenization_experiment(&family, &limit, &experiment_config(cfg)?, exec)?;
    let mut measured = BTreeMap::new();
    measured.insert("gamma".into(), family.gamma().to_string());
    for (k, c) in family.base.admissibility().checks.iter().enumerate() {
        measured.insert(
            format!("admissibility.{k}.{}", c.name),
            if c.passed {
                "ok".into()
            } else {
                c.detail.clone()
            },
        );
    }
    let lim = limit.base.triple();
    let rho: Vec<String> = lim.marks.iter().map(|m| m.rho.to_string()).collect();
    measured.insert("limit.rho".into(), rho.join(";"));
    Ok(Outcome {
        report,
        measured,
        files: Vec::new(),
    })
}

/// Walsh angular census and ray-integrity check.
///
/// The census counts, per ray, the excursions of `X^{(n)}` reaching
/// `sup_level` within local time `census_l_max`. At the last `n` the
/// shares must match `ρ*_v / Σρ*` within three standard errors.
fn walsh<E: Executor>(cfg: &RunConfig, exec: &E) -> Result<Outcome, RunError> {
    let w = cfg.walsh.as_ref().expect("validated");
    let rays: Vec<[f64; 2]> = w.rays.iter().map(|r| unit_vector(r.angle)).collect();
    let rho: Vec<f64> = w.rays.iter().map(|r| r.weight).collect();
    let js: Vec<RadialMeasure> = w.rays.iter().map(|r| r.radial.clone()).collect();
    let disint = disintegrate(&rays, &js)?;
    let delta = cfg.measure.normalization();
    let measure = Arc::new(walsh_jumpin_family(
        &rays,
        &rho,
        &disint,
        cfg.triple.varsigma,
        delta,
    )?);
    let family = ScaledFamily::new(measure.clone(), cfg.scheme.c, GammaMode::Vanishing)?;
    let star = walsh_rho_star(&rho, &disint, delta);
    let total: f64 = star.iter().sum();
    let k = rays.len();
    let res = Resolution::new(cfg.sampling.step, f64::INFINITY)?.with_exit(w.sup_level);
    let mut rows = Vec::new();
    let last = *cfg.homogenization.n_list.last().expect("non-empty");
    for &n in &cfg.homogenization.n_list {
        let counts: Vec<Result<Vec<u64>, excursions_core::Error>> =
            exec.map_indexed(w.census_paths, &|i| {
                let mut rng = stream(cfg.seed, task_index(30, n as u16, i as u32));
                let p = family.sample_base(n, w.census_l_max, cfg.sampling.eps, &res, &mut rng)?;
                let p = rescale_point_process(&p, &family.scheme, family.gamma(), n);
                let mut c = vec![0u64; k];
                for pt in p.points() {
                    if pt.excursion.sup_norm() >= w.sup_level * (1.0 - LEVEL_TOL) {
                        let v = Component::from_mark(
                            pt.mark.expect("jump-in measures mark every point"),
                        )
                        .ray();
                        c[v] += 1;
                    }
                }
                Ok(c)
            });
        let mut tally = vec![0u64; k];
        for c in counts {
            for (t, x) in tally.iter_mut().zip(c?) {
                *t += x;
            }
        }
        let all: u64 = tally.iter().sum();
        for v in 0..k {
            let p = if all > 0 {
                tally[v] as f64 / all as f64
            } else {
                0.0
            };
            let target = star[v] / total;
            let se = (target * (1.0 - target) / (all.max(1)) as f64).sqrt();
            let vd = if n == last {
                verdict(all > 0 && (p - target).abs() <= 3.0 * se)
            } else {
                Verdict::Info
            };
            rows.push(row(
                Some(n),
                &format!("ray{v}_share"),
                "proportion",
                p,
                target,
                vd,
            ));
        }
        rows.push(row(
            Some(n),
            "census",
            "count",
            all as f64,
            f64::NAN,
            Verdict::Info,
        ));
    }

    let ires = Resolution::new(cfg.sampling.step, cfg.sampling.horizon)?;
    let violations: Vec<Result<u64, excursions_core::Error>> =
        exec.map_indexed(w.integrity_paths, &|i| {
            let mut rng = stream(cfg.seed, task_index(31, 0, i as u32));
            let p = sample_ppp(
                measure.as_ref(),
                w.integrity_l_max,
                cfg.sampling.eps,
                &ires,
                &mut rng,
            )?;
            let mut bad = 0u64;
            for pt in p.points() {
                let want = Component::from_mark(pt.mark.expect("marked")).ray();
                match ray_of(&pt.excursion, &rays, RAY_TOL) {
                    Ok(Some(v)) if v == want => {}
                    Ok(None) => {}
                    _ => bad += 1,
                }
            }
            if cfg.triple.varsigma > 0.0 || !p.is_empty() {
                let t = piece_together(&p, cfg.triple.varsigma)?;
                if excursion_rays(&t.x, &rays, RAY_TOL).is_err() {
                    bad += 1;
                }
            }
            Ok(bad)
        });
    let mut bad = 0;
    for v in violations {
        bad += v?;
    }
    rows.push(row(
        None,
        "ray_integrity",
        "violations",
        bad as f64,
        0.0,
        verdict(bad == 0),
    ));
    let mut measured = BTreeMap::new();
    let s: Vec<String> = star.iter().map(|x| x.to_string()).collect();
    measured.insert("rho_star".into(), s.join(";"));
    let a: Vec<String> = disint.angular.iter().map(|x| x.to_string()).collect();
    measured.insert("angular".into(), a.join(";"));
    measured.insert("ray_violations".into(), bad.to_string());
    Ok(Outcome {
        report: Report { rows },
        measured,
        files: Vec::new(),
    })
}

/// Relative collinearity tolerance of the ray checks.
pub const RAY_TOL: f64 = 1e-15;

/// Paths stopped at the census level land on it only up to the rounding of
/// the ray embedding.
pub const LEVEL_TOL: f64 = 1e-12;
