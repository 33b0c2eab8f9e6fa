//! The `percmatch` command line: configuration from flags and a flat
//! `key = value` file, experiment dispatch, CSV rows and a JSON summary.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use serde::Serialize;
use serde_json::Value;

use crate::error::Error;
use crate::geometry::{CrossingSpec, Direction, Occupancy};
use crate::lattice::{Annulus, GraphKind, Rect, Site};
use crate::mc::{
    annulus_circuit_estimate, decomposition_checks, estimate_crossing, estimate_nbox, estimate_tau, fit_decay,
    kesten_bound_check, kesten_constants_with, pc_bisect, DeltaBasis, Estimate,
};
use crate::oracle::{rects_up_to, verify_duality};
use crate::report::Report;
use crate::sampler::ENUMERATION_CAP;
use crate::suites::{exact_suites, sampled_duality, SuiteOutcome, DUALITY_SWEEP_SITES};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

pub const SEED_ENV: &str = "PERCMATCH_SEED";

pub const CSV_HEADER: &str = "experiment,graph,param1,param2,p,n_samples,estimate,ci_lo,ci_hi,seed";

/// Command-line flags. Every value flag may also come from `--config`;
/// flags win.
#[derive(Debug, Default, Parser)]
#[command(name = "percmatch", version, about = "Site percolation on the square lattice and its matching graph")]
pub struct Args {
    /// Flat `key = value` file with the same keys as the long flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// cross-prob, duality-verify, pc-bisect, nbox, tau-decay, kesten-check,
    /// annulus, decomposition or rsw-suite.
    #[arg(long)]
    pub experiment: Option<String>,
    /// G (four neighbours) or GStar (eight neighbours).
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long)]
    pub w: Option<String>,
    #[arg(long)]
    pub h: Option<String>,
    /// Scale or list of scales, comma separated.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub l1: Option<String>,
    #[arg(long)]
    pub l2: Option<String>,
    #[arg(long)]
    pub inner: Option<String>,
    #[arg(long)]
    pub outer: Option<String>,
    /// Density or comma-separated densities.
    #[arg(long)]
    pub p: Option<String>,
    /// `start:stop:step`, both ends included.
    #[arg(long = "p-grid")]
    pub p_grid: Option<String>,
    /// Aspect ratio of the rsw-suite rectangles.
    #[arg(long)]
    pub lambda: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    /// Defaults to the PERCMATCH_SEED environment variable, then 1.
    #[arg(long)]
    pub seed: Option<String>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub workers: Option<String>,
    /// CSV destination; the JSON summary goes next to it with a .json extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Run the exhaustive suites; exit 3 if any fails.
    #[arg(long)]
    pub verify: bool,
    /// Allow kesten-check below its width hypothesis.
    #[arg(long)]
    pub relaxed: bool,
    /// occupied or vacant.
    #[arg(long)]
    pub occupancy: Option<String>,
    /// horizontal or vertical.
    #[arg(long)]
    pub direction: Option<String>,
    /// Bisection tolerance.
    #[arg(long)]
    pub tol: Option<String>,
    /// Aspect bound recorded with the kesten-check constants.
    #[arg(long)]
    pub t: Option<String>,
    /// Basis of delta3 in kesten-check: delta1 or delta2.
    #[arg(long = "delta3-basis")]
    pub delta3_basis: Option<String>,
    /// Box size of the pseudo-critical point used by rsw-suite.
    #[arg(long = "pc-n")]
    pub pc_n: Option<String>,
    /// Largest rectangle of the exhaustive duality sweep.
    #[arg(long = "max-sites")]
    pub max_sites: Option<String>,
}

const KEYS: &[&str] = &[
    "experiment",
    "graph",
    "w",
    "h",
    "n",
    "l1",
    "l2",
    "inner",
    "outer",
    "p",
    "p-grid",
    "lambda",
    "samples",
    "seed",
    "workers",
    "out",
    "verify",
    "relaxed",
    "occupancy",
    "direction",
    "tol",
    "t",
    "delta3-basis",
    "pc-n",
    "max-sites",
];

/// Invalid configuration; maps to exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CrossProb,
    DualityVerify,
    PcBisect,
    Nbox,
    TauDecay,
    KestenCheck,
    Annulus,
    Decomposition,
    RswSuite,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::CrossProb,
        Experiment::DualityVerify,
        Experiment::PcBisect,
        Experiment::Nbox,
        Experiment::TauDecay,
        Experiment::KestenCheck,
        Experiment::Annulus,
        Experiment::Decomposition,
        Experiment::RswSuite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::CrossProb => "cross-prob",
            Experiment::DualityVerify => "duality-verify",
            Experiment::PcBisect => "pc-bisect",
            Experiment::Nbox => "nbox",
            Experiment::TauDecay => "tau-decay",
            Experiment::KestenCheck => "kesten-check",
            Experiment::Annulus => "annulus",
            Experiment::Decomposition => "decomposition",
            Experiment::RswSuite => "rsw-suite",
        }
    }
}

impl FromStr for Experiment {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, ConfigError> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| ConfigError(format!("unknown experiment {s:?}")))
    }
}

/// A validated configuration. Optional geometry is resolved per experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub experiment: Option<Experiment>,
    pub graph: GraphKind,
    pub w: Option<i64>,
    pub h: Option<i64>,
    pub n: Vec<i64>,
    pub l1: Option<i64>,
    pub l2: Option<i64>,
    pub inner: Option<i64>,
    pub outer: Option<i64>,
    pub p: Vec<f64>,
    pub lambda: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub verify: bool,
    pub relaxed: bool,
    pub occupancy: Option<Occupancy>,
    pub direction: Direction,
    pub tol: f64,
    pub t: f64,
    pub delta3_basis: DeltaBasis,
    pub pc_n: i64,
    pub max_sites: usize,
}

/// Reads a flat `key = value` file. `#` starts a comment; keys may use `_`
/// or `-`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut map = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return bad(format!("line {}: expected key = value, got {raw:?}", number + 1));
        };
        let key = key.trim().replace('_', "-");
        let key = key.strip_prefix("--").unwrap_or(&key).to_string();
        if !KEYS.contains(&key.as_str()) {
            return bad(format!("line {}: unknown key {key:?}", number + 1));
        }
        map.insert(key, value.trim().to_string());
    }
    Ok(map)
}

impl Args {
    /// Flag values, keyed like the config file.
    fn to_map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        let mut put = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                map.insert(key.to_string(), v.clone());
            }
        };
        put("experiment", &self.experiment);
        put("graph", &self.graph);
        put("w", &self.w);
        put("h", &self.h);
        put("n", &self.n);
        put("l1", &self.l1);
        put("l2", &self.l2);
        put("inner", &self.inner);
        put("outer", &self.outer);
        put("p", &self.p);
        put("p-grid", &self.p_grid);
        put("lambda", &self.lambda);
        put("samples", &self.samples);
        put("seed", &self.seed);
        put("workers", &self.workers);
        put("occupancy", &self.occupancy);
        put("direction", &self.direction);
        put("tol", &self.tol);
        put("t", &self.t);
        put("delta3-basis", &self.delta3_basis);
        put("pc-n", &self.pc_n);
        put("max-sites", &self.max_sites);
        if let Some(out) = &self.out {
            map.insert("out".into(), out.display().to_string());
        }
        if self.verify {
            map.insert("verify".into(), "true".into());
        }
        if self.relaxed {
            map.insert("relaxed".into(), "true".into());
        }
        map
    }

    /// The config file (if any) overlaid with the flags.
    pub fn merged(&self) -> Result<BTreeMap<String, String>, ConfigError> {
        let mut map = match &self.config {
            Some(path) => {
                let text =
                    fs::read_to_string(path).map_err(|e| ConfigError(format!("reading {}: {e}", path.display())))?;
                parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        map.extend(self.to_map());
        Ok(map)
    }
}

fn parse_one<T: FromStr>(key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.trim().parse().map_err(|_| ConfigError(format!("{key}: cannot parse {raw:?}")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>, ConfigError> {
    raw.split(',').map(|part| parse_one(key, part)).collect()
}

fn positive_int(key: &str, raw: &str) -> Result<i64, ConfigError> {
    let v: i64 = parse_one(key, raw)?;
    if v < 1 {
        return bad(format!("{key} must be positive, got {v}"));
    }
    Ok(v)
}

fn flag(key: &str, raw: &str) -> Result<bool, ConfigError> {
    match raw.trim() {
        "true" | "1" | "yes" | "" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        other => bad(format!("{key}: expected true or false, got {other:?}")),
    }
}

/// `start:stop:step` with both ends included; grid points are rounded to 12
/// decimals so that `0.1:0.3:0.1` yields exactly `0.1, 0.2, 0.3`.
pub fn parse_p_grid(raw: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<f64> = raw.split(':').map(|s| parse_one("p-grid", s)).collect::<Result<_, _>>()?;
    let [start, stop, step] = parts[..] else {
        return bad(format!("p-grid: expected start:stop:step, got {raw:?}"));
    };
    if step.is_nan() || step <= 0.0 || stop.is_nan() || stop < start {
        return bad(format!("p-grid: need step > 0 and stop >= start, got {raw:?}"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    if count > 100_000 {
        return bad(format!("p-grid: {count} points is too many"));
    }
    Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
}

impl ExperimentConfig {
    /// Validates merged key/value pairs. `env_seed` is the seed environment
    /// variable, used when no seed is given.
    pub fn from_map(map: &BTreeMap<String, String>, env_seed: Option<&str>) -> Result<Self, ConfigError> {
        let get = |key: &str| map.get(key).map(String::as_str);
        let int = |key: &str| get(key).map(|raw| positive_int(key, raw)).transpose();

        let experiment = get("experiment").map(str::parse).transpose()?;
        let verify = get("verify").map(|raw| flag("verify", raw)).transpose()?.unwrap_or(false);
        if experiment.is_none() && !verify {
            return bad("no experiment given and verify not requested");
        }
        let graph = match get("graph") {
            Some(raw) => raw.parse().map_err(|e: Error| ConfigError(e.to_string()))?,
            None => GraphKind::G,
        };
        let n = match get("n") {
            Some(raw) => {
                let list: Vec<i64> = parse_list("n", raw)?;
                if list.iter().any(|&v| v < 1) {
                    return bad(format!("n must be positive, got {raw:?}"));
                }
                list
            }
            None => Vec::new(),
        };
        let p = match (get("p"), get("p-grid")) {
            (Some(_), Some(_)) => return bad("give either p or p-grid, not both"),
            (Some(raw), None) => parse_list("p", raw)?,
            (None, Some(raw)) => parse_p_grid(raw)?,
            (None, None) => Vec::new(),
        };
        if let Some(&bad_p) = p.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return bad(format!("p = {bad_p} outside [0, 1]"));
        }
        let lambda = match get("lambda") {
            Some(raw) => {
                let v: f64 = parse_one("lambda", raw)?;
                if !(v > 0.0 && v.is_finite()) {
                    return bad(format!("lambda must be positive, got {v}"));
                }
                v
            }
            None => 2.0,
        };
        let samples = match get("samples") {
            Some(raw) => positive_int("samples", raw)? as u64,
            None => 10_000,
        };
        let seed = match get("seed").or(env_seed) {
            Some(raw) => parse_one("seed", raw)?,
            None => 1,
        };
        let workers = int("workers")?.map(|v| v as usize);
        let occupancy = get("occupancy").map(|raw| raw.parse().map_err(|e: Error| ConfigError(e.to_string()))).transpose()?;
        let direction = match get("direction").map(str::trim) {
            None | Some("horizontal") => Direction::Horizontal,
            Some("vertical") => Direction::Vertical,
            Some(other) => return bad(format!("direction: expected horizontal or vertical, got {other:?}")),
        };
        let positive_real = |key: &str, default: f64| -> Result<f64, ConfigError> {
            match get(key) {
                Some(raw) => {
                    let v: f64 = parse_one(key, raw)?;
                    if !(v > 0.0 && v.is_finite()) {
                        return bad(format!("{key} must be positive, got {v}"));
                    }
                    Ok(v)
                }
                None => Ok(default),
            }
        };
        let delta3_basis = match get("delta3-basis").map(str::trim) {
            None | Some("delta1") => DeltaBasis::Delta1,
            Some("delta2") => DeltaBasis::Delta2,
            Some(other) => return bad(format!("delta3-basis: expected delta1 or delta2, got {other:?}")),
        };
        Ok(ExperimentConfig {
            experiment,
            graph,
            w: int("w")?,
            h: int("h")?,
            n,
            l1: int("l1")?,
            l2: int("l2")?,
            inner: int("inner")?,
            outer: int("outer")?,
            p,
            lambda,
            samples,
            seed,
            workers,
            out: get("out").map(PathBuf::from),
            verify,
            relaxed: get("relaxed").map(|raw| flag("relaxed", raw)).transpose()?.unwrap_or(false),
            occupancy,
            direction,
            tol: positive_real("tol", 1e-3)?,
            t: positive_real("t", 1.0)?,
            delta3_basis,
            pc_n: int("pc-n")?.unwrap_or(64),
            max_sites: int("max-sites")?.map_or(DUALITY_SWEEP_SITES, |v| v as usize),
        })
    }

    fn densities(&self) -> Result<&[f64], ConfigError> {
        if self.p.is_empty() {
            return bad("this experiment needs p or p-grid");
        }
        Ok(&self.p)
    }

    fn scales(&self, default: &[i64]) -> Vec<i64> {
        if self.n.is_empty() {
            default.to_vec()
        } else {
            self.n.clone()
        }
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub experiment: String,
    pub graph: String,
    pub param1: String,
    pub param2: String,
    /// Empty for exact checks that do not depend on a density.
    pub p: String,
    pub n_samples: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub seed: u64,
}

impl Row {
    fn from_estimate(experiment: &str, graph: &str, param1: impl ToString, param2: impl ToString, p: f64, e: &Estimate) -> Self {
        Row {
            experiment: experiment.to_string(),
            graph: graph.to_string(),
            param1: param1.to_string(),
            param2: param2.to_string(),
            p: p.to_string(),
            n_samples: e.n_samples,
            estimate: e.p_hat,
            ci_lo: e.ci_lo,
            ci_hi: e.ci_hi,
            seed: e.seed,
        }
    }

    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.experiment,
            self.graph,
            self.param1,
            self.param2,
            self.p,
            self.n_samples,
            self.estimate,
            self.ci_lo,
            self.ci_hi,
            self.seed
        )
    }
}

/// Everything one invocation produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub config: ExperimentConfig,
    pub rows: Vec<Row>,
    pub reports: Vec<Value>,
    /// False when an exhaustive check found a counterexample.
    pub checks_passed: bool,
    pub counterexamples: Vec<String>,
}

impl Outcome {
    pub fn csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.to_csv());
            s.push('\n');
        }
        s
    }

    pub fn json(&self) -> String {
        serde_json::to_string_pretty(self).expect("outcome serializes")
    }

    fn suite(&mut self, experiment: &str, s: &SuiteOutcome) {
        let checked = match &s.verdict {
            crate::oracle::Verdict::Holds { checked } => *checked,
            crate::oracle::Verdict::Fails(_) => 0,
        };
        let value = if s.verdict.holds() { 1.0 } else { 0.0 };
        self.rows.push(Row {
            experiment: format!("{experiment}/{}", s.name),
            graph: s.kind.map_or("both".to_string(), |k| k.name().to_string()),
            param1: s.rect.width().to_string(),
            param2: s.rect.height().to_string(),
            p: String::new(),
            n_samples: checked,
            estimate: value,
            ci_lo: value,
            ci_hi: value,
            seed: self.config.seed,
        });
        if let Some(cx) = s.verdict.counterexample() {
            self.checks_passed = false;
            self.counterexamples.push(format!("{} on {}: {}\n{}", s.name, s.rect, cx.description, cx.config));
        }
    }

    /// One row per quantity of `report`, prefixed by the experiment name.
    fn report_rows(&mut self, report: &Report, param1: impl ToString, param2: impl ToString, p: f64) {
        for q in &report.quantities {
            self.rows.push(Row {
                experiment: format!("{}/{}", report.experiment, q.name),
                graph: self.config.graph.name().to_string(),
                param1: param1.to_string(),
                param2: param2.to_string(),
                p: p.to_string(),
                n_samples: q.n_samples,
                estimate: q.estimate,
                ci_lo: q.ci_lo,
                ci_hi: q.ci_hi,
                seed: self.config.seed,
            });
        }
        self.reports.push(serde_json::to_value(report).expect("report serializes"));
    }
}

/// Why a run stopped early.
#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Library(Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        RunError::Library(e)
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => e.fmt(f),
            RunError::Library(e) => e.fmt(f),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Library(Error::Io(_)) | RunError::Library(Error::Inconsistent(_)) => EXIT_IO,
            RunError::Library(_) => EXIT_CONFIG,
        }
    }
}

/// Runs the configured experiment on the current rayon pool.
pub fn run(config: &ExperimentConfig) -> Result<Outcome, RunError> {
    let mut out =
        Outcome { config: config.clone(), rows: Vec::new(), reports: Vec::new(), checks_passed: true, counterexamples: Vec::new() };
    if config.verify {
        for s in exact_suites(config.max_sites)? {
            out.suite("verify", &s);
        }
    }
    let Some(experiment) = config.experiment else {
        return Ok(out);
    };
    let c = config;
    let name = experiment.name();
    let graph = c.graph.name();
    match experiment {
        Experiment::CrossProb => {
            let (w, h) = match (c.w, c.h, c.n.as_slice()) {
                (Some(w), Some(h), _) => (w, h),
                (None, None, [n]) => (*n, *n),
                _ => return Err(ConfigError("cross-prob needs w and h, or a single n".into()).into()),
            };
            let spec = CrossingSpec::new(c.direction, c.occupancy.unwrap_or(Occupancy::Occupied), c.graph);
            for &p in c.densities()? {
                let e = estimate_crossing(spec, w, h, p, c.samples, c.seed)?;
                out.rows.push(Row::from_estimate(name, graph, w, h, p, &e));
            }
        }
        Experiment::DualityVerify => duality(c, &mut out)?,
        Experiment::PcBisect => {
            for n in c.scales(&[64]) {
                let p_star = pc_bisect(c.graph, n, c.samples, c.seed, c.tol)?;
                let half = c.tol / 2.0;
                out.rows.push(Row {
                    experiment: name.into(),
                    graph: graph.into(),
                    param1: n.to_string(),
                    param2: c.tol.to_string(),
                    p: p_star.to_string(),
                    n_samples: c.samples,
                    estimate: p_star,
                    ci_lo: p_star - half,
                    ci_hi: p_star + half,
                    seed: c.seed,
                });
            }
        }
        Experiment::Nbox => {
            for n in c.scales(&[4]) {
                for &p in c.densities()? {
                    let b = estimate_nbox(c.graph, p, n, c.samples, c.seed)?;
                    let mut row = Row::from_estimate(name, graph, n, b.boundary_size, p, &b.connection);
                    (row.estimate, row.ci_lo, row.ci_hi) = (b.value, b.ci_lo, b.ci_hi);
                    out.rows.push(row);
                }
            }
        }
        Experiment::TauDecay => {
            let distances = c.scales(&[4, 8, 12, 16]);
            for &p in c.densities()? {
                let mut points = Vec::new();
                for &m in &distances {
                    let bounds = Rect::square(Site::ORIGIN, 2 * m)?;
                    let e = estimate_tau(c.graph, p, Site::ORIGIN, Site::new(m, 0), &bounds, c.samples, c.seed)?;
                    out.rows.push(Row::from_estimate(name, graph, m, 2 * m, p, &e));
                    points.push((m as f64, e));
                }
                let fit = |f: fn(&Estimate) -> f64| fit_decay(&points.iter().map(|(m, e)| (*m, f(e))).collect::<Vec<_>>());
                match fit(|e| e.p_hat) {
                    Ok(rate) => out.rows.push(Row {
                        experiment: format!("{name}/fit"),
                        graph: graph.into(),
                        param1: "rate".into(),
                        param2: points.len().to_string(),
                        p: p.to_string(),
                        n_samples: c.samples,
                        estimate: rate,
                        ci_lo: fit(|e| e.ci_hi).unwrap_or(f64::NEG_INFINITY),
                        ci_hi: fit(|e| e.ci_lo).unwrap_or(f64::INFINITY),
                        seed: c.seed,
                    }),
                    Err(e) => out.reports.push(serde_json::json!({ "experiment": name, "p": p, "fit_error": e.to_string() })),
                }
            }
        }
        Experiment::KestenCheck => {
            let l1 = c.l1.unwrap_or(48);
            let l2 = c.l2.unwrap_or(l1);
            for &p in c.densities()? {
                let mut report = kesten_bound_check(c.graph, p, l1, l2, c.samples, c.seed, c.relaxed)?;
                let d1 = report.quantity("delta1").map_or(0.0, |q| q.estimate);
                let d2 = report.quantity("delta2").map_or(0.0, |q| q.estimate);
                let subdivisions = c.n.first().copied().unwrap_or(2).max(2) as u64;
                match kesten_constants_with(d1, d2, subdivisions, 1, c.t, c.delta3_basis) {
                    Ok(k) => {
                        report.parameters.insert("constants".into(), serde_json::to_value(k).expect("serializes"));
                    }
                    Err(e) => report.flags.push(format!("constants unavailable: {e}")),
                }
                out.report_rows(&report, l1, l2, p);
            }
        }
        Experiment::Annulus => {
            let inner = c.inner.unwrap_or(8);
            let outer = c.outer.unwrap_or(3 * inner);
            let a = Annulus::new(Site::ORIGIN, inner, outer)?;
            let occupancy = c.occupancy.unwrap_or(Occupancy::Vacant);
            for &p in c.densities()? {
                let e = annulus_circuit_estimate(c.graph, occupancy, p, &a, c.samples, c.seed)?;
                out.rows.push(Row::from_estimate(&format!("{name}/circuit"), graph, inner, outer, p, &e.circuit));
                out.rows.push(Row::from_estimate(&format!("{name}/band"), graph, inner, outer, p, &e.band));
                out.reports.push(serde_json::json!({
                    "experiment": name,
                    "graph": graph,
                    "occupancy": format!("{occupancy:?}").to_lowercase(),
                    "p": p,
                    "inner": inner,
                    "outer": outer,
                    "estimate": e,
                }));
            }
        }
        Experiment::Decomposition => {
            for n in c.scales(&[8]) {
                for &p in c.densities()? {
                    let report = decomposition_checks(c.graph, p, n, c.samples, c.seed)?;
                    out.report_rows(&report, n, 4 * n, p);
                }
            }
        }
        Experiment::RswSuite => {
            for kind in GraphKind::BOTH {
                let p_star = match c.p.as_slice() {
                    [] => pc_bisect(kind, c.pc_n, c.samples, c.seed, c.tol)?,
                    [p] => *p,
                    _ => return Err(ConfigError("rsw-suite takes at most one p".into()).into()),
                };
                for n in c.scales(&[16, 32, 64]) {
                    let height = (c.lambda * n as f64).round() as i64;
                    let long = if height >= n { Direction::Vertical } else { Direction::Horizontal };
                    let e = estimate_crossing(CrossingSpec::occupied(long, kind), n, height, p_star, c.samples, c.seed)?;
                    out.rows.push(Row::from_estimate(name, kind.name(), n, height, p_star, &e));
                }
            }
        }
    }
    Ok(out)
}

/// Exhaustive on rectangles up to the enumeration cap, sampled above it.
fn duality(c: &ExperimentConfig, out: &mut Outcome) -> Result<(), RunError> {
    let name = Experiment::DualityVerify.name();
    let rects = match (c.w, c.h) {
        (Some(w), Some(h)) => vec![Rect::with_size(w, h)?],
        (None, None) => rects_up_to(c.max_sites),
        _ => return Err(ConfigError("duality-verify needs both w and h, or neither".into()).into()),
    };
    for rect in rects {
        if rect.site_count() <= ENUMERATION_CAP {
            let verdict = verify_duality(&rect)?;
            out.suite(name, &SuiteOutcome { name: "exhaustive".into(), rect, kind: None, verdict });
            continue;
        }
        for &p in c.densities()? {
            let s = sampled_duality(rect.width(), rect.height(), p, c.samples, c.seed)?;
            let clean = (s.checked - s.violations) as f64 / s.checked as f64;
            out.rows.push(Row {
                experiment: format!("{name}/sampled"),
                graph: "both".into(),
                param1: rect.width().to_string(),
                param2: rect.height().to_string(),
                p: p.to_string(),
                n_samples: s.checked,
                estimate: clean,
                ci_lo: clean,
                ci_hi: clean,
                seed: c.seed,
            });
            if let Some(r) = s.first_violation {
                out.checks_passed = false;
                out.counterexamples.push(format!("sampled duality on {rect} at p = {p}: replicate {r}"));
            }
        }
    }
    Ok(())
}

fn json_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn write_outputs(outcome: &Outcome) -> io::Result<()> {
    match &outcome.config.out {
        Some(path) => {
            fs::write(path, outcome.csv())?;
            fs::write(json_path(path), outcome.json())
        }
        None => {
            io::stdout().lock().write_all(outcome.csv().as_bytes())?;
            let mut err = io::stderr().lock();
            err.write_all(outcome.json().as_bytes())?;
            err.write_all(b"\n")
        }
    }
}

/// Full command-line behaviour; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let config = match args.merged().and_then(|m| ExperimentConfig::from_map(&m, env_seed.as_deref())) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("percmatch: {e}");
            return EXIT_CONFIG;
        }
    };
    let result = match config.workers {
        Some(workers) => match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(|| run(&config)),
            Err(e) => {
                eprintln!("percmatch: cannot start {workers} workers: {e}");
                return EXIT_IO;
            }
        },
        None => run(&config),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("percmatch: {e}");
            return e.exit_code();
        }
    };
    if let Err(e) = write_outputs(&outcome) {
        eprintln!("percmatch: writing output: {e}");
        return EXIT_IO;
    }
    for cx in &outcome.counterexamples {
        eprintln!("percmatch: counterexample: {cx}");
    }
    if outcome.checks_passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}
