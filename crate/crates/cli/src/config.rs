//! TOML run configuration. Every value that can influence a sample is
//! resolved here, defaults included, so that the manifest can list it.

use std::collections::BTreeMap;
use std::path::Path;

use excursions_core::jumping_in::RadialMeasure;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("missing config key `{0}`")]
    Missing(String),
    #[error("invalid config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    Simulate,
    HomogenizeVanishing,
    HomogenizeDominant,
    VerifyInvariants,
    Walsh,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::HomogenizeVanishing => "homogenize_vanishing",
            ExperimentKind::HomogenizeDominant => "homogenize_dominant",
            ExperimentKind::VerifyInvariants => "verify_invariants",
            ExperimentKind::Walsh => "walsh",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ExperimentKind::Simulate,
            ExperimentKind::HomogenizeVanishing,
            ExperimentKind::HomogenizeDominant,
            ExperimentKind::VerifyInvariants,
            ExperimentKind::Walsh,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchemeParams {
    pub c: f64,
    pub alpha: f64,
    pub kappa: f64,
    pub beta: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum MeasureParams {
    BrownianIto {
        normalization: f64,
    },
    /// Lamperti transform of Brownian motion with drift `-mu`.
    PssmpBmDrift {
        mu: f64,
        sigma: f64,
        normalization: f64,
        du: f64,
        start_frac: f64,
        calibration_samples: usize,
    },
    /// Brownian (Bessel-3 excursion) law laid on each ray.
    BesselRay {
        normalization: f64,
    },
}

impl MeasureParams {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureParams::BrownianIto { .. } => "brownian_ito",
            MeasureParams::PssmpBmDrift { .. } => "pssmp_bm_drift",
            MeasureParams::BesselRay { .. } => "bessel_ray",
        }
    }

    pub fn normalization(&self) -> f64 {
        match *self {
            MeasureParams::BrownianIto { normalization }
            | MeasureParams::PssmpBmDrift { normalization, .. }
            | MeasureParams::BesselRay { normalization } => normalization,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TripleParams {
    pub rho: Vec<f64>,
    pub j: RadialMeasure,
    pub varsigma: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SamplingParams {
    pub eps: f64,
    pub l_max: f64,
    pub step: f64,
    /// Excursion age beyond which paths are completed coarsely.
    pub horizon: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitChoice {
    /// `ρ*` or `j*` built from the triple.
    Derived,
    /// The family itself, a same-law control run.
    SelfLimit,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogenizationParams {
    pub n_list: Vec<i32>,
    pub n_paths: usize,
    pub null_reps: usize,
    pub level: f64,
    pub times: Vec<f64>,
    pub sup_until: Option<f64>,
    pub local_time_at: Option<f64>,
    pub eta_at: Option<f64>,
    pub joint_time: Option<f64>,
    pub joint_cap: usize,
    pub trend_allowance: usize,
    pub limit: LimitChoice,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalshRay {
    pub angle: f64,
    pub weight: f64,
    pub radial: RadialMeasure,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WalshParams {
    pub rays: Vec<WalshRay>,
    /// Radius an excursion must reach to be counted in the angular census.
    pub sup_level: f64,
    /// Local time covered by each census sample.
    pub census_l_max: f64,
    pub census_paths: usize,
    /// Pieced paths checked for ray integrity.
    pub integrity_paths: usize,
    pub integrity_l_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvariantParams {
    pub configurations: usize,
    pub grid: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub threads: Option<usize>,
    pub scheme: SchemeParams,
    pub measure: MeasureParams,
    pub triple: TripleParams,
    pub sampling: SamplingParams,
    pub homogenization: HomogenizationParams,
    pub walsh: Option<WalshParams>,
    pub invariants: InvariantParams,
}

struct Section<'a> {
    prefix: String,
    table: Option<&'a Table>,
}

impl<'a> Section<'a> {
    fn root(t: &'a Table) -> Self {
        Self {
            prefix: String::new(),
            table: Some(t),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.prefix.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.prefix)
        }
    }

    fn sub(&self, k: &str) -> Result<Section<'a>, ConfigError> {
        let table = match self.table.and_then(|t| t.get(k)) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(_) => return Err(invalid(&self.key(k), "expected a table")),
        };
        Ok(Section {
            prefix: self.key(k),
            table,
        })
    }

    fn raw(&self, k: &str) -> Option<&'a Value> {
        self.table.and_then(|t| t.get(k))
    }

    fn f64_opt(&self, k: &str) -> Result<Option<f64>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(v) => as_f64(v)
                .map(Some)
                .ok_or_else(|| invalid(&self.key(k), "expected a number")),
        }
    }

    fn f64(&self, k: &str) -> Result<f64, ConfigError> {
        self.f64_opt(k)?
            .ok_or_else(|| ConfigError::Missing(self.key(k)))
    }

    fn f64_or(&self, k: &str, d: f64) -> Result<f64, ConfigError> {
        Ok(self.f64_opt(k)?.unwrap_or(d))
    }

    fn usize_or(&self, k: &str, d: usize) -> Result<usize, ConfigError> {
        match self.raw(k) {
            None => Ok(d),
            Some(Value::Integer(i)) if *i >= 0 => Ok(*i as usize),
            Some(_) => Err(invalid(&self.key(k), "expected a non-negative integer")),
        }
    }

    fn str_opt(&self, k: &str) -> Result<Option<&'a str>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s)),
            Some(_) => Err(invalid(&self.key(k), "expected a string")),
        }
    }

    fn str(&self, k: &str) -> Result<&'a str, ConfigError> {
        self.str_opt(k)?
            .ok_or_else(|| ConfigError::Missing(self.key(k)))
    }

    fn f64_list_opt(&self, k: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        match self.raw(k) {
            None => Ok(None),
            Some(Value::Array(a)) => a
                .iter()
                .map(as_f64)
                .collect::<Option<Vec<_>>>()
                .map(Some)
                .ok_or_else(|| invalid(&self.key(k), "expected a list of numbers")),
            Some(_) => Err(invalid(&self.key(k), "expected a list")),
        }
    }
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, "must be finite and > 0"))
    }
}

fn parse_radial(v: &Value, key: &str) -> Result<RadialMeasure, ConfigError> {
    let t = match v {
        Value::Table(t) => t,
        _ => return Err(invalid(key, "expected a table with a `type`")),
    };
    let s = Section {
        prefix: key.to_string(),
        table: Some(t),
    };
    let j = match s.str("type")? {
        "zero" => RadialMeasure::zero(),
        "atomic" => {
            let atoms = match s.raw("atoms") {
                Some(Value::Array(a)) => a,
                None => return Err(ConfigError::Missing(s.key("atoms"))),
                Some(_) => return Err(invalid(&s.key("atoms"), "expected [[radius, mass], ...]")),
            };
            let mut out = Vec::with_capacity(atoms.len());
            for a in atoms {
                match a {
                    Value::Array(p) if p.len() == 2 => match (as_f64(&p[0]), as_f64(&p[1])) {
                        (Some(r), Some(m)) => out.push((r, m)),
                        _ => return Err(invalid(&s.key("atoms"), "expected numeric pairs")),
                    },
                    _ => return Err(invalid(&s.key("atoms"), "expected [radius, mass] pairs")),
                }
            }
            RadialMeasure::Atomic(out)
        }
        "power_tail" => RadialMeasure::PowerTail {
            j0: s.f64("j0")?,
            beta: s.f64("beta")?,
            floor: s.f64_or("floor", 1.0)?,
        },
        "exponential" => RadialMeasure::Exponential {
            mass: s.f64("mass")?,
            rate: s.f64("rate")?,
        },
        other => {
            return Err(invalid(
                &s.key("type"),
                format!("unknown radial law `{other}`"),
            ))
        }
    };
    j.validate().map_err(|e| invalid(key, e.to_string()))?;
    Ok(j)
}

fn radial_manifest(j: &RadialMeasure) -> String {
    match j {
        RadialMeasure::Atomic(a) => {
            let atoms: Vec<String> = a.iter().map(|(r, m)| format!("{r}:{m}")).collect();
            format!("atomic[{}]", atoms.join(";"))
        }
        RadialMeasure::PowerTail { j0, beta, floor } => {
            format!("power_tail[j0={j0};beta={beta};floor={floor}]")
        }
        RadialMeasure::Exponential { mass, rate } => {
            format!("exponential[mass={mass};rate={rate}]")
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let table: Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        let root = Section::root(&table);
        let experiment = {
            let s = root.str("experiment")?;
            ExperimentKind::parse(s)
                .ok_or_else(|| invalid("experiment", format!("unknown experiment `{s}`")))?
        };
        let seed = match root.raw("seed") {
            None => 0,
            Some(Value::Integer(i)) if *i >= 0 => *i as u64,
            Some(_) => return Err(invalid("seed", "expected a non-negative integer")),
        };
        let threads = match root.raw("threads") {
            None => None,
            Some(Value::Integer(i)) if *i >= 1 => Some(*i as usize),
            Some(_) => return Err(invalid("threads", "expected a positive integer")),
        };

        let sc = root.sub("scheme")?;
        let scheme = SchemeParams {
            c: sc.f64("c")?,
            alpha: sc.f64("alpha")?,
            kappa: sc.f64("kappa")?,
            beta: sc.f64_opt("beta")?,
        };
        if !(scheme.c > 1.0) || !scheme.c.is_finite() {
            return Err(invalid("scheme.c", "must be > 1"));
        }
        positive("scheme.alpha", scheme.alpha)?;
        positive("scheme.kappa", scheme.kappa)?;
        if experiment == ExperimentKind::HomogenizeDominant {
            let b = scheme
                .beta
                .ok_or_else(|| ConfigError::Missing("scheme.beta".into()))?;
            if !(b > 0.0 && b < scheme.kappa) {
                return Err(invalid("scheme.beta", "need 0 < beta < kappa"));
            }
        } else if scheme.beta.is_some() && experiment == ExperimentKind::HomogenizeVanishing {
            return Err(invalid("scheme.beta", "only used by homogenize_dominant"));
        }

        let ms = root.sub("measure")?;
        let label = ms
            .str_opt("label")?
            .unwrap_or(if experiment == ExperimentKind::Walsh {
                "bessel_ray"
            } else {
                "brownian_ito"
            });
        let normalization = positive("measure.normalization", ms.f64_or("normalization", 1.0)?)?;
        let measure = match label {
            "brownian_ito" => MeasureParams::BrownianIto { normalization },
            "bessel_ray" => MeasureParams::BesselRay { normalization },
            "pssmp_bm_drift" => MeasureParams::PssmpBmDrift {
                mu: positive("measure.mu", ms.f64("mu")?)?,
                sigma: positive("measure.sigma", ms.f64_or("sigma", 1.0)?)?,
                normalization,
                du: positive("measure.du", ms.f64_or("du", 1e-3)?)?,
                start_frac: ms.f64_or("start_frac", 1e-3)?,
                calibration_samples: ms.usize_or("calibration_samples", 2000)?,
            },
            other => {
                return Err(invalid(
                    "measure.label",
                    format!("unknown measure `{other}`"),
                ))
            }
        };
        let (m_alpha, m_kappa) = match measure {
            MeasureParams::BrownianIto { .. } | MeasureParams::BesselRay { .. } => (0.5, 1.0),
            MeasureParams::PssmpBmDrift { mu, sigma, .. } => {
                (scheme.alpha, 2.0 * mu / (sigma * sigma))
            }
        };
        if (m_alpha - scheme.alpha).abs() > 1e-12 {
            return Err(invalid(
                "scheme.alpha",
                format!("measure `{label}` is {m_alpha}-self-similar"),
            ));
        }
        if (m_kappa - scheme.kappa).abs() > 1e-9 * m_kappa {
            return Err(invalid(
                "scheme.kappa",
                format!("measure `{label}` has kappa = {m_kappa}"),
            ));
        }
        if experiment == ExperimentKind::Walsh
            && !matches!(measure, MeasureParams::BesselRay { .. })
        {
            return Err(invalid("measure.label", "walsh runs use `bessel_ray`"));
        }

        let ts = root.sub("triple")?;
        let mut rho = vec![0.0];
        if let Some(v) = ts.raw("rho") {
            match v {
                Value::Array(items) => {
                    for (i, it) in items.iter().enumerate() {
                        let key = format!("triple.rho[{i}]");
                        let t = match it {
                            Value::Table(t) => t,
                            _ => return Err(invalid(&key, "expected {mark, weight}")),
                        };
                        let s = Section {
                            prefix: key.clone(),
                            table: Some(t),
                        };
                        let mark = s.usize_or("mark", 0)?;
                        if mark != 0 {
                            return Err(invalid(
                                &s.key("mark"),
                                "half-line triples carry the single mark 0",
                            ));
                        }
                        let w = s.f64("weight")?;
                        if !(w >= 0.0) || !w.is_finite() {
                            return Err(invalid(&s.key("weight"), "must be finite and >= 0"));
                        }
                        rho[mark] += w;
                    }
                }
                Value::Float(_) | Value::Integer(_) => rho[0] = as_f64(v).unwrap_or(0.0),
                _ => return Err(invalid("triple.rho", "expected a list of {mark, weight}")),
            }
        }
        let j = match ts.raw("j") {
            None => RadialMeasure::zero(),
            Some(v) => parse_radial(v, "triple.j")?,
        };
        let varsigma = ts.f64_or("varsigma", 0.0)?;
        if !(varsigma >= 0.0) || !varsigma.is_finite() {
            return Err(invalid("triple.varsigma", "must be finite and >= 0"));
        }
        let triple = TripleParams { rho, j, varsigma };

        let ss = root.sub("sampling")?;
        let sampling = SamplingParams {
            eps: positive("sampling.eps", ss.f64_or("eps", 1e-2)?)?,
            l_max: positive("sampling.l_max", ss.f64_or("l_max", 1.0)?)?,
            step: positive("sampling.step", ss.f64_or("step", 1e-2)?)?,
            horizon: positive("sampling.horizon", ss.f64_or("horizon", 10.0)?)?,
        };

        let hs = root.sub("homogenization")?;
        let n_list: Vec<i32> = match hs.f64_list_opt("n_list")? {
            None => vec![0, 2, 4, 6],
            Some(v) => v
                .into_iter()
                .map(|x| {
                    if x >= 0.0 && x.fract() == 0.0 && x < 64.0 {
                        Ok(x as i32)
                    } else {
                        Err(invalid(
                            "homogenization.n_list",
                            "entries must be integers in [0, 64)",
                        ))
                    }
                })
                .collect::<Result<_, _>>()?,
        };
        if n_list.is_empty() {
            return Err(invalid("homogenization.n_list", "must not be empty"));
        }
        let level = hs.f64_or("level", 0.01)?;
        if !(level > 0.0 && level < 1.0) {
            return Err(invalid("homogenization.level", "must lie in (0, 1)"));
        }
        let limit = match hs.str_opt("limit")?.unwrap_or("derived") {
            "derived" => LimitChoice::Derived,
            "self" => LimitChoice::SelfLimit,
            other => {
                return Err(invalid(
                    "homogenization.limit",
                    format!("`{other}` is not derived|self"),
                ))
            }
        };
        let homogenization = HomogenizationParams {
            n_list,
            n_paths: hs.usize_or("n_paths", 1000)?,
            null_reps: hs.usize_or("null_reps", 100)?,
            level,
            times: hs.f64_list_opt("times")?.unwrap_or_else(|| vec![1.0]),
            sup_until: Some(hs.f64_or("sup_until", 1.0)?).filter(|&t| t > 0.0),
            local_time_at: Some(hs.f64_or("local_time_at", 1.0)?).filter(|&t| t > 0.0),
            eta_at: hs.f64_opt("eta_at")?.filter(|&t| t > 0.0),
            joint_time: hs.f64_opt("joint_time")?.filter(|&t| t > 0.0),
            joint_cap: hs.usize_or("joint_cap", 500)?,
            trend_allowance: hs.usize_or("trend_allowance", 1)?,
            limit,
        };
        if homogenization.n_paths < 2 {
            return Err(invalid("homogenization.n_paths", "need at least 2"));
        }
        for &t in &homogenization.times {
            positive("homogenization.times", t)?;
        }

        let walsh = if experiment == ExperimentKind::Walsh {
            let ws = root.sub("walsh")?;
            let default_radial = ws
                .raw("radial")
                .map(|v| parse_radial(v, "walsh.radial"))
                .transpose()?;
            let items = match ws.raw("rays") {
                Some(Value::Array(a)) if !a.is_empty() => a,
                Some(_) => {
                    return Err(invalid(
                        "walsh.rays",
                        "expected a non-empty list of {angle, weight}",
                    ))
                }
                None => return Err(ConfigError::Missing("walsh.rays".into())),
            };
            let mut rays = Vec::with_capacity(items.len());
            for (i, it) in items.iter().enumerate() {
                let key = format!("walsh.rays[{i}]");
                let t = match it {
                    Value::Table(t) => t,
                    _ => return Err(invalid(&key, "expected {angle, weight}")),
                };
                let s = Section {
                    prefix: key.clone(),
                    table: Some(t),
                };
                let radial = match s.raw("radial") {
                    Some(v) => parse_radial(v, &s.key("radial"))?,
                    None => default_radial.clone().unwrap_or_else(RadialMeasure::zero),
                };
                let weight = s.f64("weight")?;
                if !(weight >= 0.0) || !weight.is_finite() {
                    return Err(invalid(&s.key("weight"), "must be finite and >= 0"));
                }
                rays.push(WalshRay {
                    angle: s.f64("angle")?,
                    weight,
                    radial,
                });
            }
            Some(WalshParams {
                rays,
                sup_level: positive("walsh.sup_level", ws.f64_or("sup_level", 1.0)?)?,
                census_l_max: positive("walsh.census_l_max", ws.f64_or("census_l_max", 1.0)?)?,
                census_paths: ws.usize_or("census_paths", 1000)?,
                integrity_paths: ws.usize_or("integrity_paths", 1000)?,
                integrity_l_max: positive(
                    "walsh.integrity_l_max",
                    ws.f64_or("integrity_l_max", 0.2)?,
                )?,
            })
        } else {
            None
        };

        let is = root.sub("invariants")?;
        let invariants = InvariantParams {
            configurations: is.usize_or("configurations", 100)?,
            grid: is.usize_or("grid", 1000)?,
        };

        Ok(Self {
            experiment,
            seed,
            threads,
            scheme,
            measure,
            triple,
            sampling,
            homogenization,
            walsh,
            invariants,
        })
    }

    /// Defaults of the `verify` subcommand.
    pub fn verify_defaults() -> Self {
        Self::parse("experiment = \"verify_invariants\"\n[scheme]\nc = 2\nalpha = 0.5\nkappa = 1\n")
            .expect("built-in defaults parse")
    }

    /// Every resolved parameter, keyed for the manifest. Worker count is
    /// left out: it does not affect any sample.
    pub fn manifest_entries(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        put("experiment", self.experiment.name().into());
        put("seed", self.seed.to_string());
        put("scheme.c", self.scheme.c.to_string());
        put("scheme.alpha", self.scheme.alpha.to_string());
        put("scheme.kappa", self.scheme.kappa.to_string());
        put(
            "scheme.beta",
            self.scheme.beta.map_or("none".into(), |b| b.to_string()),
        );
        put("measure.label", self.measure.label().into());
        put(
            "measure.normalization",
            self.measure.normalization().to_string(),
        );
        if let MeasureParams::PssmpBmDrift {
            mu,
            sigma,
            du,
            start_frac,
            calibration_samples,
            ..
        } = self.measure
        {
            put("measure.mu", mu.to_string());
            put("measure.sigma", sigma.to_string());
            put("measure.du", du.to_string());
            put("measure.start_frac", start_frac.to_string());
            put(
                "measure.calibration_samples",
                calibration_samples.to_string(),
            );
        }
        let rho: Vec<String> = self.triple.rho.iter().map(|r| r.to_string()).collect();
        put("triple.rho", rho.join(";"));
        put("triple.j", radial_manifest(&self.triple.j));
        put("triple.varsigma", self.triple.varsigma.to_string());
        put("sampling.eps", self.sampling.eps.to_string());
        put("sampling.l_max", self.sampling.l_max.to_string());
        put("sampling.step", self.sampling.step.to_string());
        put("sampling.horizon", self.sampling.horizon.to_string());
        let h = &self.homogenization;
        let ns: Vec<String> = h.n_list.iter().map(|n| n.to_string()).collect();
        put("homogenization.n_list", ns.join(";"));
        put("homogenization.n_paths", h.n_paths.to_string());
        put("homogenization.null_reps", h.null_reps.to_string());
        put("homogenization.level", h.level.to_string());
        let ts: Vec<String> = h.times.iter().map(|t| t.to_string()).collect();
        put("homogenization.times", ts.join(";"));
        let opt = |v: Option<f64>| v.map_or("none".to_string(), |x| x.to_string());
        put("homogenization.sup_until", opt(h.sup_until));
        put("homogenization.local_time_at", opt(h.local_time_at));
        put("homogenization.eta_at", opt(h.eta_at));
        put("homogenization.joint_time", opt(h.joint_time));
        put("homogenization.joint_cap", h.joint_cap.to_string());
        put(
            "homogenization.trend_allowance",
            h.trend_allowance.to_string(),
        );
        put(
            "homogenization.limit",
            match h.limit {
                LimitChoice::Derived => "derived",
                LimitChoice::SelfLimit => "self",
            }
            .into(),
        );
        if let Some(w) = &self.walsh {
            for (i, r) in w.rays.iter().enumerate() {
                put(&format!("walsh.rays.{i}.angle"), r.angle.to_string());
                put(&format!("walsh.rays.{i}.weight"), r.weight.to_string());
                put(
                    &format!("walsh.rays.{i}.radial"),
                    radial_manifest(&r.radial),
                );
            }
            put("walsh.sup_level", w.sup_level.to_string());
            put("walsh.census_l_max", w.census_l_max.to_string());
            put("walsh.census_paths", w.census_paths.to_string());
            put("walsh.integrity_paths", w.integrity_paths.to_string());
            put("walsh.integrity_l_max", w.integrity_l_max.to_string());
        }
        put(
            "invariants.configurations",
            self.invariants.configurations.to_string(),
        );
        put("invariants.grid", self.invariants.grid.to_string());
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
experiment = "homogenize_vanishing"
seed = 3
[scheme]
c = 2
alpha = 0.5
kappa = 1
[triple]
rho = [{ mark = 0, weight = 0.0 }]
j = { type = "atomic", atoms = [[1.0, 1.0]] }
"#;

    #[test]
    fn parses_and_fills_defaults() {
        let c = RunConfig::parse(BASE).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.homogenization.n_list, vec![0, 2, 4, 6]);
        assert_eq!(c.triple.j, RadialMeasure::Atomic(vec![(1.0, 1.0)]));
        let m = c.manifest_entries();
        assert_eq!(m["triple.j"], "atomic[1:1]");
        assert_eq!(m["sampling.eps"], "0.01");
    }

    #[test]
    fn missing_key_is_named() {
        let text = BASE.replace("kappa = 1\n", "");
        match RunConfig::parse(&text) {
            Err(ConfigError::Missing(k)) => assert_eq!(k, "scheme.kappa"),
            other => panic!("{other:?}"),
        }
        let text = BASE.replace(
            "experiment = \"homogenize_vanishing\"",
            "experiment = \"homogenize_dominant\"",
        );
        assert!(
            matches!(RunConfig::parse(&text), Err(ConfigError::Missing(k)) if k == "scheme.beta")
        );
    }

    #[test]
    fn rejects_inconsistent_values() {
        assert!(RunConfig::parse(&BASE.replace("kappa = 1", "kappa = 2")).is_err());
        assert!(RunConfig::parse(&BASE.replace("c = 2", "c = 1")).is_err());
        assert!(RunConfig::parse(&BASE.replace("[1.0, 1.0]", "[-1.0, 1.0]")).is_err());
        assert!(RunConfig::verify_defaults().experiment == ExperimentKind::VerifyInvariants);
    }
}
