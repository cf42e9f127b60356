//! Scaled jumping-in processes, their homogenization limits, the coupling
//! maps `Φ_n`, and the experiment comparing the two in law.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{param, Error, Result};
use crate::exec::Executor;
use crate::jumping_in::{validate_triple, JumpInMeasure, JumpInTriple, MarkData, RadialMeasure};
use crate::measures::{ExcursionMeasure, Resolution};
use crate::path::{CadlagPath, ScalingScheme};
use crate::piecing::{piece_together, PiecedTriple};
use crate::point_process::{rescale_point_process, sample_ppp, MarkedPointProcess};
use crate::rng::{stream, task_index, RngCore};
use crate::stats::{energy_distance_2d, is_decreasing_trend, null_band, quantile, Statistic};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GammaMode {
    /// `γ = ακ`: jump-ins vanish into continuous entries.
    Vanishing,
    /// `γ = αβ`: jump-ins with tail index `β < κ` dominate.
    Dominant { beta: f64 },
}

/// `ν^{(n)} = c^{γn} ν ∘ (Ψ_α^n)^{-1}` and `ς^{(n)} = c^{-(1-γ)n} ς` for a
/// jumping-in base measure.
#[derive(Clone, Debug)]
pub struct ScaledFamily {
    pub base: Arc<JumpInMeasure>,
    pub scheme: ScalingScheme,
    pub mode: GammaMode,
}

impl ScaledFamily {
    pub fn new(base: Arc<JumpInMeasure>, c: f64, mode: GammaMode) -> Result<Self> {
        let scheme = ScalingScheme::new(c, base.alpha())?;
        if let GammaMode::Dominant { beta } = mode {
            if !(beta > 0.0 && beta < base.kappa()) {
                return Err(param("beta", "need 0 < beta < kappa"));
            }
        }
        Ok(Self { base, scheme, mode })
    }

    pub fn gamma(&self) -> f64 {
        match self.mode {
            GammaMode::Vanishing => self.scheme.alpha * self.base.kappa(),
            GammaMode::Dominant { beta } => self.scheme.alpha * beta,
        }
    }

    pub fn varsigma(&self) -> f64 {
        self.base.triple().varsigma
    }

    pub fn varsigma_n(&self, n: i32) -> f64 {
        self.varsigma() * self.scheme.pow(-(1.0 - self.gamma()) * f64::from(n))
    }

    /// Weight `c^{(γ-ακ)n}` carried by the continuous-entry part of
    /// `ν^{(n)}`; equals `c^{-α(κ-β)n}` in the dominant case.
    pub fn excursion_weight(&self, n: i32) -> f64 {
        self.scheme
            .pow((self.gamma() - self.scheme.alpha * self.base.kappa()) * f64::from(n))
    }

    /// The same weight read off the sampler: `c^{γn} ν_{ρ,0}(T_0 > ε c^n)`
    /// over `ν_{ρ,0}(T_0 > ε)`.
    pub fn measured_excursion_weight(&self, n: i32, eps: f64) -> f64 {
        let nf = f64::from(n);
        let tri = self.base.triple();
        let mass = |e: f64| -> f64 {
            tri.marks
                .iter()
                .enumerate()
                .map(|(v, m)| m.rho * self.base.excursion_measure(v).tail_mass(e))
                .sum()
        };
        self.scheme.pow(self.gamma() * nf) * mass(eps * self.scheme.pow(nf)) / mass(eps)
    }

    fn base_coordinates(
        &self,
        n: i32,
        l_max: f64,
        eps: f64,
        res: &Resolution,
    ) -> (f64, f64, Resolution) {
        let nf = f64::from(n);
        let tf = self.scheme.pow(nf);
        (
            l_max * self.scheme.pow(self.gamma() * nf),
            eps * tf,
            res.rescaled(tf, self.scheme.pow(self.scheme.alpha * nf)),
        )
    }

    /// Point process of the unscaled measure, drawn in the coordinates that
    /// map onto `[0, l_max]`, truncation `eps` and resolution `res` after
    /// scaling.
    pub fn sample_base(
        &self,
        n: i32,
        l_max: f64,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> Result<MarkedPointProcess> {
        let (l, e, r) = self.base_coordinates(n, l_max, eps, res);
        sample_ppp(self.base.as_ref(), l, e, &r, rng)
    }

    /// `(X^{(n)}, L^{(n)}, η^{(n)})` pieced from the rescaled point process.
    pub fn build_scaled_sample(
        &self,
        n: i32,
        l_max: f64,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> Result<PiecedTriple> {
        let p = self.sample_base(n, l_max, eps, res, rng)?;
        piece_together(
            &rescale_point_process(&p, &self.scheme, self.gamma(), n),
            self.varsigma_n(n),
        )
    }

    /// Like [`Self::build_scaled_sample`], extending the local-time window
    /// until the pieced path is determined beyond `t_min` and `l_max >= l_min`.
    pub fn build_valid_sample(
        &self,
        n: i32,
        t_min: f64,
        l_min: f64,
        eps: f64,
        res: &Resolution,
        rng: &mut dyn RngCore,
    ) -> Result<PiecedTriple> {
        let (mut l, e, r) = self.base_coordinates(n, l_min.max(1e-3), eps, res);
        let nf = f64::from(n);
        let t_base = t_min * self.scheme.pow(nf);
        let mut p = sample_ppp(self.base.as_ref(), l, e, &r, rng)?;
        let drift =
            p.compensator_rate() + self.varsigma_n(n) * self.scheme.pow((1.0 - self.gamma()) * nf);
        let mut rounds = 0;
        while !(drift * p.l_max() + p.total_lifetime(p.l_max()) > t_base)
            || p.is_empty() && drift == 0.0
        {
            rounds += 1;
            if rounds > 64 {
                return Err(Error::Degenerate(String::from(
                    "pieced path never reaches the time window",
                )));
            }
            l *= 2.0;
            p.extend(self.base.as_ref(), l, &r, rng)?;
        }
        // Stop at the first excursion ending past the window: a heavy
        // lifetime would otherwise swallow later knot times in rounding.
        let mut elapsed = 0.0;
        let mut cut = None;
        for q in p.points() {
            elapsed += q.excursion.lifetime();
            if drift * q.location + elapsed > t_base {
                cut = Some(q.location);
                break;
            }
        }
        if let Some(c) = cut {
            p.restrict(c)?;
        }
        piece_together(
            &rescale_point_process(&p, &self.scheme, self.gamma(), n),
            self.varsigma_n(n),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitKind {
    RhoStar,
    JStar,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LimitObject {
    pub kind: LimitKind,
    pub triple: JumpInTriple,
}

/// `ρ*(v) = ρ(v) + ∫ j_v(dx) / σ_v(x)` with `σ_v(x) = δ_v |x|^{-κ_v}`.
pub fn build_rho_star(
    triple: &JumpInTriple,
    laws: &[crate::measures::PowerLaw],
) -> Result<LimitObject> {
    if laws.len() != triple.marks.len() {
        return Err(param("specs", "one sigma per mark"));
    }
    let mut marks = Vec::with_capacity(laws.len());
    for (m, law) in triple.marks.iter().zip(laws) {
        let w = m.j.moment_upto(law.kappa, f64::INFINITY) / law.delta;
        if !w.is_finite() {
            return Err(Error::Divergent(String::from("integral of j / sigma")));
        }
        marks.push(MarkData {
            rho: m.rho + w,
            j: RadialMeasure::zero(),
        });
    }
    Ok(LimitObject {
        kind: LimitKind::RhoStar,
        triple: JumpInTriple {
            marks,
            varsigma: 0.0,
            geometry: triple.geometry.clone(),
        },
    })
}

/// `ρ*` for a general `σ`: atoms are summed, densities integrated by
/// quadrature. Used when no closed form for `σ` is available.
pub fn build_rho_star_with(
    triple: &JumpInTriple,
    sigma: &dyn Fn(usize, f64) -> f64,
) -> Result<LimitObject> {
    let mut marks = Vec::with_capacity(triple.marks.len());
    for (v, m) in triple.marks.iter().enumerate() {
        let w = match &m.j {
            RadialMeasure::Atomic(atoms) => atoms.iter().map(|&(x, a)| a / sigma(v, x)).sum(),
            j => {
                let f = |x: f64| {
                    if x > 0.0 {
                        j.density(x) / sigma(v, x)
                    } else {
                        0.0
                    }
                };
                let near = crate::special::integrate(&f, 0.0, 1.0, 1e-10);
                let far = crate::special::integrate_to_infinity(&f, 1.0, 1e-10);
                // A second, finer cut near the origin exposes divergence.
                let nearer = crate::special::integrate(&f, 1e-12, 1e-6, 1e-10);
                let head = crate::special::integrate(&f, 1e-6, 1.0, 1e-10);
                if !(near.is_finite() && far.is_finite())
                    || nearer > 1e-3 * head.max(1e-300) && nearer > 1e-6
                {
                    return Err(Error::Divergent(String::from("integral of j / sigma")));
                }
                near + far
            }
        };
        if !w.is_finite() {
            return Err(Error::Divergent(String::from("integral of j / sigma")));
        }
        marks.push(MarkData {
            rho: m.rho + w,
            j: RadialMeasure::zero(),
        });
    }
    Ok(LimitObject {
        kind: LimitKind::RhoStar,
        triple: JumpInTriple {
            marks,
            varsigma: 0.0,
            geometry: triple.geometry.clone(),
        },
    })
}

/// `j*_v(dr) = π_v β r^{-β-1} dr` with `π_v = lim r^β j_v((r, ∞))`.
pub fn build_j_star_power(triple: &JumpInTriple, beta: f64, kappa: f64) -> Result<LimitObject> {
    if !(beta > 0.0 && beta < kappa) {
        return Err(param("beta", "need 0 < beta < kappa"));
    }
    let mut marks = Vec::with_capacity(triple.marks.len());
    for m in &triple.marks {
        let pi = m.j.tail_index_limit(beta);
        if !pi.is_finite() {
            return Err(param("j", "tail heavier than r^{-beta}"));
        }
        marks.push(MarkData {
            rho: 0.0,
            j: if pi > 0.0 {
                RadialMeasure::PowerTail {
                    j0: pi,
                    beta,
                    floor: 0.0,
                }
            } else {
                RadialMeasure::zero()
            },
        });
    }
    let out = JumpInTriple {
        marks,
        varsigma: 0.0,
        geometry: triple.geometry.clone(),
    };
    if !validate_triple(&out, kappa).passed() {
        return Err(Error::Inadmissible(String::from(
            "limit jump measure is empty",
        )));
    }
    Ok(LimitObject {
        kind: LimitKind::JStar,
        triple: out,
    })
}

fn state_on(ray: Option<[f64; 2]>, r: f64) -> Vec<f64> {
    match ray {
        None => vec![r],
        Some(v) => vec![r * v[0], r * v[1]],
    }
}

/// `θ_{T_x} w` if `w` reaches `x` before dying, else `o`.
pub fn shift_at_hit(w: &CadlagPath, x: &[f64]) -> CadlagPath {
    match w.hitting_time(x) {
        Ok(t) if t < w.lifetime() => w.shift(t),
        _ => CadlagPath::zero(w.dim()),
    }
}

/// Coupling for the vanishing case: `w` when `x = 0`, otherwise `w` shifted
/// to its first visit of `x_n = c^{-αn} x` (or `o` if it dies first).
pub fn apply_phi_vanishing(
    x: &[f64],
    w: &CadlagPath,
    n: i32,
    scheme: &ScalingScheme,
) -> CadlagPath {
    if x.iter().all(|&v| v == 0.0) {
        return w.clone();
    }
    let f = scheme.pow(-scheme.alpha * f64::from(n));
    let xn: Vec<f64> = x.iter().map(|v| v * f).collect();
    shift_at_hit(w, &xn)
}

/// A point of the dominant-case index space: either a continuous entry with
/// label `y > 0`, or a jump-in label `y` on a ray.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DominantPoint {
    Window(f64),
    Jump { ray: usize, y: f64 },
}

/// Data of the dominant coupling: `J_n y = c^{-αn} J(c^{α(κ-β)n} y)` per
/// ray and its limit `J*`.
#[derive(Clone, Debug)]
pub struct DominantCoupling {
    pub scheme: ScalingScheme,
    pub kappa: f64,
    pub beta: f64,
    pub delta: f64,
    pub j: Vec<RadialMeasure>,
    pub j_star: Vec<RadialMeasure>,
    pub rays: Option<Vec<[f64; 2]>>,
}

impl DominantCoupling {
    pub fn window(&self, n: i32) -> f64 {
        self.scheme
            .pow(-self.scheme.alpha * (self.kappa - self.beta) * f64::from(n))
    }

    pub fn j_n(&self, ray: usize, y: f64, n: i32) -> Result<f64> {
        let nf = f64::from(n);
        let a = self.scheme.alpha;
        let inner = self.j[ray].j_inverse(
            self.kappa,
            self.delta,
            self.scheme.pow(a * (self.kappa - self.beta) * nf) * y,
        )?;
        Ok(self.scheme.pow(-a * nf) * inner)
    }

    pub fn j_limit(&self, ray: usize, y: f64) -> Result<f64> {
        self.j_star[ray].j_inverse(self.kappa, self.delta, y)
    }

    /// `Φ_n(y, w)` for finite `n`, `Φ_∞` for `None`.
    pub fn apply(&self, p: DominantPoint, w: &CadlagPath, n: Option<i32>) -> Result<CadlagPath> {
        match p {
            DominantPoint::Window(y) => Ok(match n {
                Some(n) if y > 0.0 && y < self.window(n) => w.clone(),
                _ => CadlagPath::zero(w.dim()),
            }),
            DominantPoint::Jump { ray, y } => {
                let r = match n {
                    Some(n) => self.j_n(ray, y, n)?,
                    None => self.j_limit(ray, y)?,
                };
                if !r.is_finite() {
                    return Ok(CadlagPath::zero(w.dim()));
                }
                let ray_v = self.rays.as_ref().map(|v| v[ray]);
                Ok(shift_at_hit(w, &state_on(ray_v, r)))
            }
        }
    }
}

pub fn apply_phi_dominant(
    p: DominantPoint,
    w: &CadlagPath,
    n: i32,
    coupling: &DominantCoupling,
) -> Result<CadlagPath> {
    coupling.apply(p, w, Some(n))
}

/// A scalar statistic of a pieced triple.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Functional {
    /// `|X(t)|`.
    XAt(f64),
    /// `sup_{s <= t} |X(s)|`.
    SupUntil(f64),
    LocalTimeAt(f64),
    EtaAt(f64),
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::XAt(t) => format!("x({t})"),
            Functional::SupUntil(t) => format!("sup({t})"),
            Functional::LocalTimeAt(t) => format!("L({t})"),
            Functional::EtaAt(l) => format!("eta({l})"),
        }
    }

    pub fn eval(&self, t: &PiecedTriple) -> f64 {
        match *self {
            Functional::XAt(s) => t.x.norm_at(s),
            Functional::SupUntil(s) => t.x.sup_norm_until(s),
            Functional::LocalTimeAt(s) => t.local_time.evaluate_scalar(s),
            Functional::EtaAt(l) => t.eta.eval(l),
        }
    }

    /// Time window and local-time window the functional needs.
    pub fn needs(&self) -> (f64, f64) {
        match *self {
            Functional::XAt(s) | Functional::SupUntil(s) | Functional::LocalTimeAt(s) => (s, 0.0),
            Functional::EtaAt(l) => (0.0, l),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n_list: Vec<i32>,
    pub n_paths: usize,
    pub eps: f64,
    pub res: Resolution,
    pub functionals: Vec<Functional>,
    pub statistics: Vec<Statistic>,
    /// Time of the joint `(|X(t)|, L(t))` energy-distance row.
    pub joint_time: Option<f64>,
    /// Largest sample fed to the quadratic-cost energy distance.
    pub joint_cap: usize,
    pub null_reps: usize,
    pub level: f64,
    pub trend_allowance: usize,
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Info,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Info => "info",
        }
    }

    fn from_bool(b: bool) -> Self {
        if b {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    /// `None` for rows that summarise all `n` (trend rows).
    pub n: Option<i32>,
    pub functional: String,
    pub statistic: String,
    pub value: f64,
    pub null_band: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Report {
    pub rows: Vec<ReportRow>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.verdict != Verdict::Fail)
    }

    pub fn find(&self, n: Option<i32>, functional: &str, statistic: &str) -> Option<&ReportRow> {
        self.rows
            .iter()
            .find(|r| r.n == n && r.functional == functional && r.statistic == statistic)
    }
}

struct Sampled {
    values: Vec<Vec<f64>>,
    joint: Vec<[f64; 2]>,
}

fn sample_functionals<E: Executor>(
    family: &ScaledFamily,
    n: i32,
    cfg: &ExperimentConfig,
    component: u16,
    exec: &E,
) -> Result<Sampled> {
    let (mut t_min, mut l_min) = (0.0f64, 0.0f64);
    for f in &cfg.functionals {
        let (t, l) = f.needs();
        t_min = t_min.max(t);
        l_min = l_min.max(l);
    }
    if let Some(t) = cfg.joint_time {
        t_min = t_min.max(t);
    }
    let level = u16::try_from(n.max(0)).map_err(|_| param("n", "too large"))?;
    let res = cfg.res.with_exit(f64::INFINITY);
    let rows: Vec<Result<(Vec<f64>, [f64; 2])>> = exec.map_indexed(cfg.n_paths, &|i| {
        let mut rng = stream(cfg.seed, task_index(component, level, i as u32));
        let t = family.build_valid_sample(n, t_min, l_min, cfg.eps, &res, &mut rng)?;
        let vals = cfg.functionals.iter().map(|f| f.eval(&t)).collect();
        let joint = cfg
            .joint_time
            .map(|s| [t.x.norm_at(s), t.local_time.evaluate_scalar(s)])
            .unwrap_or([0.0, 0.0]);
        Ok((vals, joint))
    });
    let mut values = vec![Vec::with_capacity(cfg.n_paths); cfg.functionals.len()];
    let mut joint = Vec::with_capacity(cfg.n_paths);
    for r in rows {
        let (v, j) = r?;
        for (k, x) in v.into_iter().enumerate() {
            values[k].push(x);
        }
        joint.push(j);
    }
    Ok(Sampled { values, joint })
}

fn resample(pool: &[f64]) -> impl Fn(&mut dyn RngCore) -> f64 + Sync + '_ {
    move |rng: &mut dyn RngCore| pool[rng.random_range(0..pool.len())]
}

/// Compares `X^{(n)}` for each `n` in the list with the limit process
/// through two-sample statistics of the configured functionals. Thresholds
/// come from a null band computed by resampling the limit sample.
///
/// Verdicts: the first listed statistic at the last `n` must fall below the
/// band, and must decrease over the list up to `trend_allowance`
/// inversions. Other rows are informational.
pub fn run_homogenization_experiment<E: Executor>(
    family: &ScaledFamily,
    limit: &ScaledFamily,
    cfg: &ExperimentConfig,
    exec: &E,
) -> Result<Report> {
    if cfg.n_list.is_empty() || cfg.statistics.is_empty() {
        return Err(param(
            "n_list",
            "need at least one scaling index and one statistic",
        ));
    }
    if cfg.n_paths < 2 {
        return Err(Error::InsufficientSamples {
            need: 2,
            got: cfg.n_paths,
        });
    }
    let lim = sample_functionals(limit, 0, cfg, 0, exec)?;
    let mut bands = Vec::new();
    for (fi, _) in cfg.functionals.iter().enumerate() {
        let pool = &lim.values[fi];
        let mut per_stat = Vec::new();
        for (si, &s) in cfg.statistics.iter().enumerate() {
            let seed = cfg.seed ^ task_index(2, fi as u16, si as u32);
            per_stat.push(null_band(
                &resample(pool),
                s,
                cfg.n_paths,
                cfg.null_reps,
                cfg.level,
                seed,
                exec,
            )?);
        }
        bands.push(per_stat);
    }
    let cap = cfg.joint_cap.min(cfg.n_paths);
    let joint_band = match cfg.joint_time {
        Some(_) => {
            let pool = &lim.joint;
            let reps = exec.map_indexed(cfg.null_reps, &|r| {
                let mut ra = stream(cfg.seed ^ task_index(3, 0, 0), 2 * r as u64);
                let mut rb = stream(cfg.seed ^ task_index(3, 0, 0), 2 * r as u64 + 1);
                let a: Vec<[f64; 2]> = (0..cap)
                    .map(|_| pool[ra.random_range(0..pool.len())])
                    .collect();
                let b: Vec<[f64; 2]> = (0..cap)
                    .map(|_| pool[rb.random_range(0..pool.len())])
                    .collect();
                energy_distance_2d(&a, &b).unwrap_or(f64::NAN)
            });
            Some(quantile(&reps, 1.0 - cfg.level)?)
        }
        None => None,
    };

    let mut report = Report::default();
    let mut series = vec![vec![Vec::new(); cfg.statistics.len()]; cfg.functionals.len()];
    let mut joint_series = Vec::new();
    let last = *cfg.n_list.last().expect("non-empty");
    for &n in &cfg.n_list {
        let s = sample_functionals(family, n, cfg, 1, exec)?;
        for (fi, f) in cfg.functionals.iter().enumerate() {
            for (si, &st) in cfg.statistics.iter().enumerate() {
                let v = st.compute(&s.values[fi], &lim.values[fi])?;
                series[fi][si].push(v);
                let verdict = if si == 0 && n == last {
                    Verdict::from_bool(v <= bands[fi][si])
                } else {
                    Verdict::Info
                };
                report.rows.push(ReportRow {
                    n: Some(n),
                    functional: f.name(),
                    statistic: String::from(st.name()),
                    value: v,
                    null_band: bands[fi][si],
                    verdict,
                });
            }
        }
        if let (Some(t), Some(band)) = (cfg.joint_time, joint_band) {
            let v = energy_distance_2d(&s.joint[..cap], &lim.joint[..cap])?;
            joint_series.push(v);
            report.rows.push(ReportRow {
                n: Some(n),
                functional: format!("x({t})&L({t})"),
                statistic: String::from("energy"),
                value: v,
                null_band: band,
                verdict: Verdict::Info,
            });
        }
        report.rows.push(ReportRow {
            n: Some(n),
            functional: String::from("varsigma_n"),
            statistic: String::from("analytic"),
            value: family.varsigma_n(n),
            null_band: f64::NAN,
            verdict: Verdict::Info,
        });
        if let GammaMode::Dominant { .. } = family.mode {
            let want = family.excursion_weight(n);
            let got = family.measured_excursion_weight(n, cfg.eps);
            report.rows.push(ReportRow {
                n: Some(n),
                functional: String::from("excursion_weight"),
                statistic: String::from("analytic"),
                value: got,
                null_band: want,
                verdict: Verdict::from_bool((got - want).abs() <= 1e-12 * want),
            });
        }
    }
    for (fi, f) in cfg.functionals.iter().enumerate() {
        for (si, st) in cfg.statistics.iter().enumerate() {
            let seq = &series[fi][si];
            report.rows.push(ReportRow {
                n: None,
                functional: f.name(),
                statistic: format!("{}_trend", st.name()),
                value: crate::stats::count_inversions(seq) as f64,
                null_band: cfg.trend_allowance as f64,
                verdict: if si == 0 {
                    Verdict::from_bool(is_decreasing_trend(seq, cfg.trend_allowance))
                } else {
                    Verdict::Info
                },
            });
        }
    }
    let vs: Vec<f64> = cfg.n_list.iter().map(|&n| family.varsigma_n(n)).collect();
    let vanishing =
        vs.windows(2).all(|w| w[1] <= w[0]) && (family.gamma() < 1.0 || family.varsigma() == 0.0);
    report.rows.push(ReportRow {
        n: None,
        functional: String::from("varsigma_n"),
        statistic: String::from("analytic_trend"),
        value: *vs.last().expect("non-empty"),
        null_band: 0.0,
        verdict: Verdict::from_bool(vanishing),
    });
    Ok(report)
}

/// Median over `w` of `d_J1(Φ_n(x, w), w)` on `[0, horizon]` for each `n`,
/// with `w` drawn from `ν` conditioned on reaching `|x_{n_min}|`.
#[allow(clippy::too_many_arguments)]
pub fn phi_vanishing_medians(
    nu: &dyn ExcursionMeasure,
    x: &[f64],
    scheme: &ScalingScheme,
    ns: &[i32],
    n_samples: usize,
    horizon: f64,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    let n0 = *ns.iter().min().ok_or_else(|| param("ns", "empty"))?;
    let r = libm::hypot(x[0], x.get(1).copied().unwrap_or(0.0))
        * scheme.pow(-scheme.alpha * f64::from(n0));
    let ws: Vec<CadlagPath> = (0..n_samples)
        .map(|_| nu.sample_sup_conditioned(r, res, rng))
        .collect();
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut d = Vec::with_capacity(ws.len());
        for w in &ws {
            let phi = apply_phi_vanishing(x, w, n, scheme);
            d.push(crate::j1::j1_distance(&phi, w, horizon)?.distance);
        }
        out.push(crate::stats::median(&d)?);
    }
    Ok(out)
}

/// Median of `d_J1(Φ_n(y, w), Φ_∞(y, w))` over jump-in labels `y` drawn
/// uniformly from `(y_lo, y_hi)` on `ray` and `w` from `ν` conditioned on
/// reaching the largest level involved.
#[allow(clippy::too_many_arguments)]
pub fn phi_dominant_medians(
    nu: &dyn ExcursionMeasure,
    coupling: &DominantCoupling,
    ray: usize,
    (y_lo, y_hi): (f64, f64),
    ns: &[i32],
    n_samples: usize,
    horizon: f64,
    res: &Resolution,
    rng: &mut dyn RngCore,
) -> Result<Vec<f64>> {
    let mut pairs = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let y = y_lo + (y_hi - y_lo) * rng.random::<f64>();
        let mut top = coupling.j_limit(ray, y)?;
        for &n in ns {
            top = top.max(coupling.j_n(ray, y, n)?);
        }
        let w = nu.sample_sup_conditioned(top, res, rng);
        let w = match &coupling.rays {
            Some(r) => crate::walsh::embed_on_ray(&w, r[ray])?,
            None => w,
        };
        pairs.push((DominantPoint::Jump { ray, y }, w));
    }
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let mut d = Vec::with_capacity(pairs.len());
        for (p, w) in &pairs {
            let a = coupling.apply(*p, w, Some(n))?;
            let b = coupling.apply(*p, w, None)?;
            d.push(crate::j1::j1_distance(&a, &b, horizon)?.distance);
        }
        out.push(crate::stats::median(&d)?);
    }
    Ok(out)
}
