//! Experiment configuration: flat INI-style sections of `key = value` lines.
//!
//! ```text
//! [experiment]
//! schemes = ppawss, extragradient
//! budget = 1000000
//! seeds = 42, 43
//!
//! [problem]
//! kind = bimatrix
//! lipschitz = 7.05, 70.5, 705
//!
//! [scheme.ppawss]
//! lambda = 3500, 1200, 40
//! ```
//!
//! Each value in `[problem] lipschitz` defines one row of the experiment.
//! Scheme parameters take either one value for all rows or one value per
//! row. `#` and `;` start comments.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use svilab_core::extragradient::step_bound;
use svilab_core::{ExtragradientConfig, PpawssConfig, QRule, VsAveConfig};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Ppawss,
    Extragradient,
    VsAve,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ppawss => "ppawss",
            Scheme::Extragradient => "extragradient",
            Scheme::VsAve => "vs_ave",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ppawss" => Ok(Scheme::Ppawss),
            "extragradient" => Ok(Scheme::Extragradient),
            "vs_ave" => Ok(Scheme::VsAve),
            other => Err(format!(
                "unknown scheme `{other}` (expected ppawss, extragradient or vs_ave)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// Stochastic bimatrix game on Δn × Δm.
    Bimatrix,
    /// Affine strongly monotone map on [−1, 1]ⁿ with Gaussian noise.
    Affine,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub kind: ProblemKind,
    pub n: usize,
    /// Second player's dimension (bimatrix only).
    pub m: usize,
    /// One experiment row per entry.
    pub lipschitz: Vec<f64>,
    /// Entry-noise scale for bimatrix games, Gaussian σ for affine maps.
    pub noise_scale: f64,
    /// Seed of the problem data; run seeds only drive the sampling noise.
    pub instance_seed: u64,
    /// Strong monotonicity modulus (affine only).
    pub mu: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PpawssParams {
    pub lambda: Vec<f64>,
    pub eta: Vec<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub outer_iterations: usize,
    pub min_inner: usize,
    pub warm_start: bool,
    pub q_rule: QRule,
    pub min_batch: u64,
}

impl Default for PpawssParams {
    fn default() -> Self {
        let d = PpawssConfig::default();
        PpawssParams {
            lambda: vec![d.lambda],
            eta: vec![d.eta],
            alpha: d.alpha,
            beta: d.beta,
            outer_iterations: 1_000_000,
            min_inner: d.min_inner,
            warm_start: d.warm_start,
            q_rule: d.q_rule,
            min_batch: d.min_batch,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtragradientParams {
    /// Defaults to 0.99/(√6 L) per row.
    pub stepsize: Option<Vec<f64>>,
    pub theta: f64,
    pub b: f64,
    pub mu_shift: f64,
    pub max_iterations: usize,
    pub ergodic: bool,
}

impl Default for ExtragradientParams {
    fn default() -> Self {
        let d = ExtragradientConfig::for_lipschitz(1.0);
        ExtragradientParams {
            stepsize: None,
            theta: d.theta,
            b: d.b,
            mu_shift: d.mu_shift,
            max_iterations: d.max_iterations,
            ergodic: d.ergodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VsAveParams {
    /// Defaults to q^β per row.
    pub rho: Option<Vec<f64>>,
    pub beta: f64,
    pub q_rule: QRule,
    pub iterations: usize,
    pub min_batch: u64,
}

impl Default for VsAveParams {
    fn default() -> Self {
        VsAveParams {
            rho: None,
            beta: 1.001,
            q_rule: QRule::KappaPlusTwo,
            iterations: 1_000_000_000,
            min_batch: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub schemes: Vec<Scheme>,
    pub budget: u64,
    pub seeds: Vec<u64>,
    pub output: String,
    /// Record metrics every this many iterations instead of the defaults.
    pub trace_every: Option<usize>,
    /// Also trace ‖T_λ‖² at this λ.
    pub yosida_lambda: Option<f64>,
    pub problem: ProblemConfig,
    pub ppawss: PpawssParams,
    pub extragradient: ExtragradientParams,
    pub vs_ave: VsAveParams,
}

/// The solver settings of one experiment row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowSettings {
    pub label: String,
    pub lipschitz: f64,
    pub ppawss: PpawssConfig,
    pub extragradient: ExtragradientConfig,
    pub vs_ave: Option<VsAveConfig>,
}

fn pick<T: Copy>(values: &[T], row: usize) -> T {
    if values.len() == 1 {
        values[0]
    } else {
        values[row]
    }
}

impl ExperimentConfig {
    pub fn rows(&self) -> usize {
        self.problem.lipschitz.len()
    }

    pub fn row_settings(&self, row: usize) -> RowSettings {
        let l = self.problem.lipschitz[row];
        let p = &self.ppawss;
        let ppawss = PpawssConfig {
            lambda: pick(&p.lambda, row),
            eta: pick(&p.eta, row),
            alpha: p.alpha,
            beta: p.beta,
            outer_iterations: p.outer_iterations,
            min_inner: p.min_inner,
            warm_start: p.warm_start,
            q_rule: p.q_rule,
            min_batch: p.min_batch,
        };
        let e = &self.extragradient;
        let extragradient = ExtragradientConfig {
            stepsize: e.stepsize.as_deref().map_or(0.99 * step_bound(l), |s| pick(s, row)),
            theta: e.theta,
            mu_shift: e.mu_shift,
            b: e.b,
            max_iterations: e.max_iterations,
            ergodic: e.ergodic,
        };
        let vs_ave = (self.problem.kind == ProblemKind::Affine).then(|| {
            let v = &self.vs_ave;
            let mu = self.problem.mu;
            let mut cfg = VsAveConfig::with_beta(mu, l, v.beta, v.iterations, v.q_rule);
            if let Some(rho) = &v.rho {
                cfg.rho = pick(rho, row);
            }
            cfg.min_batch = v.min_batch;
            cfg
        });
        let mut label = format!("L{l}");
        if self.schemes.contains(&Scheme::Ppawss) {
            label.push_str(&format!("_lambda{}", ppawss.lambda));
        }
        RowSettings {
            label,
            lipschitz: l,
            ppawss,
            extragradient,
            vs_ave,
        }
    }

    /// Checks every solver constraint for every row.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schemes.is_empty() {
            return Err(CliError::config("[experiment] schemes must list at least one scheme"));
        }
        if self.seeds.is_empty() {
            return Err(CliError::config("[experiment] seeds must list at least one seed"));
        }
        if self.budget == 0 {
            return Err(CliError::config("[experiment] budget must be > 0"));
        }
        let p = &self.problem;
        if p.lipschitz.is_empty() {
            return Err(CliError::config("[problem] lipschitz must list at least one value"));
        }
        if let Some(&l) = p.lipschitz.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return Err(CliError::config(format!("[problem] lipschitz must be > 0; got {l}")));
        }
        if p.n == 0 || (p.kind == ProblemKind::Bimatrix && p.m == 0) {
            return Err(CliError::config("[problem] dimensions must be >= 1"));
        }
        if !(p.noise_scale >= 0.0 && p.noise_scale.is_finite()) {
            return Err(CliError::config(format!(
                "[problem] noise_scale must be >= 0; got {}",
                p.noise_scale
            )));
        }
        if p.kind == ProblemKind::Affine {
            if let Some(&l) = p.lipschitz.iter().find(|l| **l < p.mu) {
                return Err(CliError::config(format!(
                    "[problem] need 0 < mu <= lipschitz; got mu = {}, lipschitz = {l}",
                    p.mu
                )));
            }
            if !(p.mu > 0.0) {
                return Err(CliError::config(format!("[problem] mu must be > 0; got {}", p.mu)));
            }
        }
        if self.schemes.contains(&Scheme::VsAve) && p.kind != ProblemKind::Affine {
            return Err(CliError::config(
                "vs_ave needs a strongly monotone problem (kind = affine)",
            ));
        }
        let rows = self.rows();
        let lists = [
            ("[scheme.ppawss] lambda", self.ppawss.lambda.len()),
            ("[scheme.ppawss] eta", self.ppawss.eta.len()),
            ("[scheme.extragradient] stepsize", self.extragradient.stepsize.as_ref().map_or(1, Vec::len)),
            ("[scheme.vs_ave] rho", self.vs_ave.rho.as_ref().map_or(1, Vec::len)),
        ];
        for (name, len) in lists {
            if len != 1 && len != rows {
                return Err(CliError::config(format!(
                    "{name} has {len} values; expected 1 or one per lipschitz row ({rows})"
                )));
            }
        }
        for row in 0..rows {
            let s = self.row_settings(row);
            let context = |scheme: &str, e: svilab_core::Error| {
                CliError::config(format!("[scheme.{scheme}] row L = {}: {}", s.lipschitz, strip(&e)))
            };
            if self.schemes.contains(&Scheme::Ppawss) {
                s.ppawss.validate().map_err(|e| context("ppawss", e))?;
            }
            if self.schemes.contains(&Scheme::Extragradient) {
                s.extragradient
                    .validate(s.lipschitz)
                    .map_err(|e| context("extragradient", e))?;
            }
            if let (true, Some(v)) = (self.schemes.contains(&Scheme::VsAve), &s.vs_ave) {
                v.validate().map_err(|e| context("vs_ave", e))?;
            }
        }
        Ok(())
    }
}

fn strip(e: &svilab_core::Error) -> String {
    match e {
        svilab_core::Error::InvalidParameter(msg) => msg.clone(),
        other => other.to_string(),
    }
}

/// A `key = value` entry with the line it came from.
#[derive(Debug, Clone)]
struct Entry {
    line: usize,
    value: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn tokenize(text: &str) -> Result<Sections, CliError> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split(['#', ';']).next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| CliError::at(line, "unterminated section header"))?
                .trim();
            if !KNOWN_SECTIONS.contains(&name) {
                return Err(CliError::at(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(CliError::at(line, format!("duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), BTreeMap::new());
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| CliError::at(line, format!("expected `key = value`, found `{content}`")))?;
        let section = current
            .as_ref()
            .ok_or_else(|| CliError::at(line, "key outside of any section"))?;
        let key = key.trim().to_string();
        let entries = sections.get_mut(section).unwrap();
        if entries.contains_key(&key) {
            return Err(CliError::at(line, format!("duplicate key `{key}` in [{section}]")));
        }
        entries.insert(
            key,
            Entry {
                line,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(sections)
}

const KNOWN_SECTIONS: &[&str] = &[
    "experiment",
    "problem",
    "scheme.ppawss",
    "scheme.extragradient",
    "scheme.vs_ave",
];

/// Typed reads from one section; every key read is marked so leftovers can
/// be reported as unknown.
struct Reader<'a> {
    section: &'a str,
    entries: BTreeMap<String, Entry>,
}

impl<'a> Reader<'a> {
    fn new(sections: &mut Sections, section: &'a str) -> Self {
        Reader {
            section,
            entries: sections.remove(section).unwrap_or_default(),
        }
    }

    fn parse<T: FromStr>(&self, entry: &Entry, key: &str, raw: &str) -> Result<T, CliError> {
        raw.parse().map_err(|_| {
            CliError::at(
                entry.line,
                format!("[{}] {key}: cannot parse `{raw}`", self.section),
            )
        })
    }

    fn one<T: FromStr>(&mut self, key: &str) -> Result<Option<T>, CliError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => self.parse(&e, key, &e.value).map(Some),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<Option<Vec<T>>, CliError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| self.parse(&e, key, s))
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    fn named<T, F>(&mut self, key: &str, f: F) -> Result<Option<T>, CliError>
    where
        F: Fn(&str) -> Result<T, String>,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => f(&e.value)
                .map(Some)
                .map_err(|msg| CliError::at(e.line, format!("[{}] {key}: {msg}", self.section))),
        }
    }

    fn finish(self) -> Result<(), CliError> {
        match self.entries.iter().min_by_key(|(_, e)| e.line) {
            None => Ok(()),
            Some((key, e)) => Err(CliError::at(
                e.line,
                format!("unknown key `{key}` in [{}]", self.section),
            )),
        }
    }
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

fn parse_kind(s: &str) -> Result<ProblemKind, String> {
    match s {
        "bimatrix" => Ok(ProblemKind::Bimatrix),
        "affine" => Ok(ProblemKind::Affine),
        other => Err(format!("unknown problem kind `{other}` (expected bimatrix or affine)")),
    }
}

fn parse_schemes(s: &str) -> Result<Vec<Scheme>, String> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let scheme: Scheme = part.parse()?;
        if out.contains(&scheme) {
            return Err(format!("scheme `{part}` listed twice"));
        }
        out.push(scheme);
    }
    Ok(out)
}

/// Budgets may be written as integers or in scientific notation (`1e6`).
fn parse_budget(s: &str) -> Result<u64, String> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 => Ok(v as u64),
        _ => Err(format!("expected a nonnegative integer, found `{s}`")),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, CliError> {
    let mut sections = tokenize(text)?;

    let mut r = Reader::new(&mut sections, "experiment");
    let schemes = r.named("schemes", parse_schemes)?.unwrap_or_default();
    let budget = r.named("budget", parse_budget)?.unwrap_or(1_000_000);
    let seeds = r.list("seeds")?.unwrap_or_else(|| vec![42]);
    let output = r.one("output")?.unwrap_or_else(|| "results".to_string());
    let trace_every = r.one("trace_every")?;
    let yosida_lambda = r.one("yosida_lambda")?;
    r.finish()?;

    let mut r = Reader::new(&mut sections, "problem");
    let kind = r.named("kind", parse_kind)?.unwrap_or(ProblemKind::Bimatrix);
    let problem = ProblemConfig {
        kind,
        n: r.one("n")?.unwrap_or(20),
        m: r.one("m")?.unwrap_or(10),
        lipschitz: r.list("lipschitz")?.unwrap_or_else(|| vec![7.05]),
        noise_scale: r.one("noise_scale")?.unwrap_or(0.1),
        instance_seed: r.one("instance_seed")?.unwrap_or(1),
        mu: r.one("mu")?.unwrap_or(1.0),
    };
    r.finish()?;

    let mut ppawss = PpawssParams::default();
    let mut r = Reader::new(&mut sections, "scheme.ppawss");
    if let Some(v) = r.list("lambda")? {
        ppawss.lambda = v;
    }
    if let Some(v) = r.list("eta")? {
        ppawss.eta = v;
    }
    ppawss.alpha = r.one("alpha")?.unwrap_or(ppawss.alpha);
    ppawss.beta = r.one("beta")?.unwrap_or(ppawss.beta);
    ppawss.outer_iterations = r.one("outer_iterations")?.unwrap_or(ppawss.outer_iterations);
    ppawss.min_inner = r.one("min_inner")?.unwrap_or(ppawss.min_inner);
    ppawss.warm_start = r.named("warm_start", parse_bool)?.unwrap_or(ppawss.warm_start);
    ppawss.q_rule = r.named("q_rule", |s| s.parse())?.unwrap_or(ppawss.q_rule);
    ppawss.min_batch = r.one("min_batch")?.unwrap_or(ppawss.min_batch);
    r.finish()?;

    let mut extragradient = ExtragradientParams::default();
    let mut r = Reader::new(&mut sections, "scheme.extragradient");
    extragradient.stepsize = r.list("stepsize")?;
    extragradient.theta = r.one("theta")?.unwrap_or(extragradient.theta);
    extragradient.b = r.one("b")?.unwrap_or(extragradient.b);
    extragradient.mu_shift = r.one("mu_shift")?.unwrap_or(extragradient.mu_shift);
    extragradient.max_iterations = r.one("max_iterations")?.unwrap_or(extragradient.max_iterations);
    extragradient.ergodic = r.named("ergodic", parse_bool)?.unwrap_or(extragradient.ergodic);
    r.finish()?;

    let mut vs_ave = VsAveParams::default();
    let mut r = Reader::new(&mut sections, "scheme.vs_ave");
    vs_ave.rho = r.list("rho")?;
    vs_ave.beta = r.one("beta")?.unwrap_or(vs_ave.beta);
    vs_ave.q_rule = r.named("q_rule", |s| s.parse())?.unwrap_or(vs_ave.q_rule);
    vs_ave.iterations = r.one("iterations")?.unwrap_or(vs_ave.iterations);
    vs_ave.min_batch = r.one("min_batch")?.unwrap_or(vs_ave.min_batch);
    r.finish()?;

    let config = ExperimentConfig {
        schemes,
        budget,
        seeds,
        output,
        trace_every,
        yosida_lambda,
        problem,
        ppawss,
        extragradient,
        vs_ave,
    };
    config.validate()?;
    Ok(config)
}
