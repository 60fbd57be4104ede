use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Serialize, Serializer};
use serde_json::{Map, Value};

use crate::error::{ConfigIssue, Error, Result};
use crate::hilbert::{ExchangePolicy, ParticleKind, RegionPartition, Sector};
use crate::models::{BiasShape, CouplingShape, ModelName};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Spectrum,
    Transmit,
    Pst,
    Revival,
    Mixed,
    Adiabatic,
    Sweep,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Spectrum,
        Analysis::Transmit,
        Analysis::Pst,
        Analysis::Revival,
        Analysis::Mixed,
        Analysis::Adiabatic,
        Analysis::Sweep,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Analysis::Spectrum => "spectrum",
            Analysis::Transmit => "transmit",
            Analysis::Pst => "pst",
            Analysis::Revival => "revival",
            Analysis::Mixed => "mixed",
            Analysis::Adiabatic => "adiabatic",
            Analysis::Sweep => "sweep",
        }
    }
}

impl FromStr for Analysis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Self::ALL.into_iter().find(|a| a.as_str() == s).ok_or_else(|| format!("unknown analysis `{s}`"))
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A time given as a number or as an expression in `pi`, `J`, `N`, `eps` and `omega = sqrt(J^2 + eps^2)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TimeValue {
    Number(f64),
    Expr(String),
}

impl TimeValue {
    pub fn resolve(&self, j: f64, sites: usize, eps: f64) -> std::result::Result<f64, String> {
        let value = match self {
            TimeValue::Number(x) => *x,
            TimeValue::Expr(e) => {
                let expr: meval::Expr = e.parse().map_err(|err| format!("cannot parse `{e}`: {err}"))?;
                let mut ctx = meval::Context::new();
                ctx.var("J", j).var("N", sites as f64).var("eps", eps).var("omega", (j * j + eps * eps).sqrt());
                expr.eval_with_context(ctx).map_err(|err| format!("cannot evaluate `{e}`: {err}"))?
            }
        };
        if !(value.is_finite() && value >= 0.0) {
            return Err(format!("time must be finite and non-negative, got {value}"));
        }
        Ok(value)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingShapeName {
    Cosine,
    CosineCubed,
}

impl CouplingShapeName {
    pub fn shape(self) -> CouplingShape {
        match self {
            CouplingShapeName::Cosine => CouplingShape::Cosine,
            CouplingShapeName::CosineCubed => CouplingShape::CosineCubed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasShapeName {
    Linear,
    Sine,
}

impl BiasShapeName {
    pub fn shape(self) -> BiasShape {
        match self {
            BiasShapeName::Linear => BiasShape::Linear,
            BiasShapeName::Sine => BiasShape::Sine,
        }
    }
}

fn serialize_sector<S: Serializer>(sector: &Sector, s: S) -> std::result::Result<S::Ok, S::Error> {
    match *sector {
        Sector::Fixed(n) => s.serialize_u64(n as u64),
        Sector::Range(lo, hi) => [lo as u64, hi as u64].serialize(s),
        Sector::All => s.serialize_str("all"),
    }
}

/// A validated run description. Field names are the configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub model: ModelName,
    #[serde(rename = "N")]
    pub sites: usize,
    #[serde(rename = "J")]
    pub j: f64,
    pub eps: f64,
    /// Hopping phase of the phase-dressed model.
    pub theta: f64,
    #[serde(rename = "U")]
    pub repulsion: f64,
    pub kind: ParticleKind,
    #[serde(serialize_with = "serialize_sector")]
    pub sector: Sector,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<u8>,
    #[serde(rename = "A")]
    pub region_a: Vec<usize>,
    #[serde(rename = "B")]
    pub region_b: Vec<usize>,
    pub policy: ExchangePolicy,
    /// Conjugate the exchange operator with the model's dressing.
    pub dressed_exchange: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<TimeValue>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub taus: Vec<TimeValue>,
    pub analysis: Analysis,
    pub tol: f64,
    pub cluster_tol: f64,
    /// Local state on A as `[re, im]` pairs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<Vec<[f64; 2]>>,
    #[serde(rename = "C1")]
    pub c1: [f64; 2],
    #[serde(rename = "C2")]
    pub c2: [f64; 2],
    #[serde(rename = "J0", skip_serializing_if = "Option::is_none")]
    pub j0: Option<f64>,
    pub omega0: f64,
    pub dt: f64,
    pub coupling_shape: CouplingShapeName,
    pub bias_shape: BiasShapeName,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub require_fidelity: Option<f64>,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn partition(&self) -> Result<RegionPartition> {
        RegionPartition::new(self.sites, self.region_a.clone(), self.region_b.clone())
    }

    pub fn tau_value(&self) -> Result<Option<f64>> {
        self.tau
            .as_ref()
            .map(|t| t.resolve(self.j, self.sites, self.eps))
            .transpose()
            .map_err(|m| Error::Config(vec![ConfigIssue::new("tau", m)]))
    }

    pub fn tau_values(&self) -> Result<Vec<f64>> {
        self.taus
            .iter()
            .enumerate()
            .map(|(i, t)| {
                t.resolve(self.j, self.sites, self.eps)
                    .map_err(|m| Error::Config(vec![ConfigIssue::new(format!("taus[{i}]"), m)]))
            })
            .collect()
    }

    pub fn hopping_amplitude(&self) -> f64 {
        self.j0.unwrap_or(self.j)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceFormat {
    Toml,
    Json,
}

impl SourceFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => Some(SourceFormat::Toml),
            Some("json") => Some(SourceFormat::Json),
            _ => None,
        }
    }
}

/// Parses TOML or JSON text. Without a format hint TOML is tried first.
pub fn parse_config(source: &str, format: Option<SourceFormat>) -> Result<RunConfig> {
    parse_config_for(source, format, None)
}

/// Like [`parse_config`], with the analysis supplied by the caller. A
/// configuration that names a different analysis is rejected.
pub fn parse_config_for(source: &str, format: Option<SourceFormat>, analysis: Option<Analysis>) -> Result<RunConfig> {
    let value = match format {
        Some(SourceFormat::Toml) => parse_toml(source)?,
        Some(SourceFormat::Json) => parse_json(source)?,
        None => parse_toml(source).or_else(|toml_err| parse_json(source).map_err(|_| toml_err))?,
    };
    let Value::Object(mut map) = value else {
        return Err(Error::Config(vec![ConfigIssue::new("", "expected a table of keys")]));
    };
    if let Some(a) = analysis {
        match map.get("analysis") {
            None => {
                map.insert("analysis".into(), Value::String(a.as_str().into()));
            }
            Some(Value::String(s)) if s == a.as_str() => {}
            Some(other) => {
                return Err(Error::Config(vec![ConfigIssue::new(
                    "analysis",
                    format!("configuration asks for {other} but `{a}` was requested"),
                )]));
            }
        }
    }
    from_map(map)
}

fn parse_toml(source: &str) -> Result<Value> {
    let table: toml::Table =
        toml::from_str(source).map_err(|e| Error::Config(vec![ConfigIssue::new("", e.message().to_string())]))?;
    serde_json::to_value(table).map_err(|e| Error::Serialize(e.to_string()))
}

fn parse_json(source: &str) -> Result<Value> {
    serde_json::from_str(source).map_err(|e| Error::Config(vec![ConfigIssue::new("", e.to_string())]))
}

pub fn load_config(path: &Path, analysis: Option<Analysis>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config_for(&text, SourceFormat::from_path(path), analysis)
}

/// TOML text that [`parse_config`] maps back to `config`.
pub fn emit_config(config: &RunConfig) -> Result<String> {
    toml::to_string(config).map_err(|e| Error::Serialize(e.to_string()))
}

struct Fields {
    map: Map<String, Value>,
    issues: Vec<ConfigIssue>,
}

impl Fields {
    fn issue(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(ConfigIssue::new(path, message));
    }

    fn take(&mut self, key: &str) -> Option<Value> {
        self.map.remove(key)
    }

    fn number(&mut self, key: &str) -> Option<f64> {
        match self.take(key)? {
            Value::Number(n) => n.as_f64(),
            other => {
                self.issue(key, format!("expected a number, found {other}"));
                None
            }
        }
    }

    fn number_or(&mut self, key: &str, default: f64) -> f64 {
        self.number(key).unwrap_or(default)
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        match self.take(key)? {
            Value::Number(n) if n.as_u64().is_some() => n.as_u64(),
            other => {
                self.issue(key, format!("expected a non-negative integer, found {other}"));
                None
            }
        }
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.take(key)? {
            Value::Bool(b) => Some(b),
            other => {
                self.issue(key, format!("expected true or false, found {other}"));
                None
            }
        }
    }

    fn parsed<T: FromStr>(&mut self, key: &str) -> Option<T>
    where
        T::Err: fmt::Display,
    {
        match self.take(key)? {
            Value::String(s) => match s.parse() {
                Ok(v) => Some(v),
                Err(e) => {
                    self.issue(key, e.to_string());
                    None
                }
            },
            other => {
                self.issue(key, format!("expected a string, found {other}"));
                None
            }
        }
    }

    fn sites(&mut self, key: &str) -> Option<Vec<usize>> {
        match self.take(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    match v.as_u64() {
                        Some(s) => out.push(s as usize),
                        None => self.issue(format!("{key}[{i}]"), format!("expected a site index, found {v}")),
                    }
                }
                Some(out)
            }
            Value::Number(n) if n.as_u64().is_some() => Some(vec![n.as_u64().unwrap_or(0) as usize]),
            other => {
                self.issue(key, format!("expected a list of sites, found {other}"));
                None
            }
        }
    }

    fn complex_pair(&mut self, path: &str, v: &Value) -> Option<[f64; 2]> {
        match v {
            Value::Number(n) => n.as_f64().map(|x| [x, 0.0]),
            Value::Array(a) if a.len() == 2 && a.iter().all(Value::is_number) => {
                Some([a[0].as_f64().unwrap_or(0.0), a[1].as_f64().unwrap_or(0.0)])
            }
            other => {
                self.issue(path, format!("expected a number or [re, im], found {other}"));
                None
            }
        }
    }

    fn complex(&mut self, key: &str) -> Option<[f64; 2]> {
        let v = self.take(key)?;
        self.complex_pair(key, &v)
    }

    fn complex_list(&mut self, key: &str) -> Option<Vec<[f64; 2]>> {
        match self.take(key)? {
            Value::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for (i, v) in items.iter().enumerate() {
                    if let Some(c) = self.complex_pair(&format!("{key}[{i}]"), v) {
                        out.push(c);
                    }
                }
                Some(out)
            }
            other => {
                self.issue(key, format!("expected a list of amplitudes, found {other}"));
                None
            }
        }
    }

    fn time(&mut self, path: &str, v: Value) -> Option<TimeValue> {
        match v {
            Value::Number(n) => n.as_f64().map(TimeValue::Number),
            Value::String(s) => Some(TimeValue::Expr(s)),
            other => {
                self.issue(path, format!("expected a number or an expression, found {other}"));
                None
            }
        }
    }

    fn sector(&mut self, key: &str) -> Option<Sector> {
        match self.take(key)? {
            Value::Number(n) if n.as_u64().is_some() => Some(Sector::Fixed(n.as_u64().unwrap_or(0) as usize)),
            Value::String(s) if s == "all" => Some(Sector::All),
            Value::Array(a) if a.len() == 2 && a.iter().all(|x| x.as_u64().is_some()) => {
                let lo = a[0].as_u64().unwrap_or(0) as usize;
                let hi = a[1].as_u64().unwrap_or(0) as usize;
                if lo > hi {
                    self.issue(key, format!("empty range [{lo}, {hi}]"));
                    None
                } else {
                    Some(Sector::Range(lo, hi))
                }
            }
            other => {
                self.issue(key, format!("expected a particle number, [lo, hi] or \"all\", found {other}"));
                None
            }
        }
    }
}

fn from_map(map: Map<String, Value>) -> Result<RunConfig> {
    let mut f = Fields { map, issues: Vec::new() };

    let model: Option<ModelName> = f.parsed("model");
    if model.is_none() && !f.issues.iter().any(|i| i.path == "model") {
        f.issue("model", "missing required key");
    }
    let sites = f.uint("N").map(|n| n as usize);
    if sites.is_none() && !f.issues.iter().any(|i| i.path == "N") {
        f.issue("N", "missing required key");
    }
    let analysis: Option<Analysis> = f.parsed("analysis");
    if analysis.is_none() && !f.issues.iter().any(|i| i.path == "analysis") {
        f.issue("analysis", "missing required key");
    }

    let j = f.number_or("J", 1.0);
    let eps = f.number_or("eps", 0.0);
    let theta = f.number_or("theta", 0.0);
    let repulsion = f.number_or("U", 0.0);
    let kind = f.parsed("kind").unwrap_or(ParticleKind::Fermion);
    let sector = f.sector("sector").unwrap_or(Sector::Fixed(1));
    let cutoff = f.uint("cutoff").map(|c| c.min(u8::MAX as u64) as u8);
    let n = sites.unwrap_or(0);
    let region_a = f.sites("A").unwrap_or_else(|| vec![1]);
    let region_b = f.sites("B").unwrap_or_else(|| vec![n]);
    let policy = f.parsed("policy").unwrap_or_default();
    let dressed_exchange = f.boolean("dressed_exchange").unwrap_or(false);
    let tau = f.take("tau").and_then(|v| f.time("tau", v));
    let taus = match f.take("taus") {
        None => Vec::new(),
        Some(Value::Array(items)) => {
            items.into_iter().enumerate().filter_map(|(i, v)| f.time(&format!("taus[{i}]"), v)).collect()
        }
        Some(other) => {
            f.issue("taus", format!("expected a list of times, found {other}"));
            Vec::new()
        }
    };
    let tol = f.number_or("tol", 1e-9);
    let cluster_tol = f.number_or("cluster_tol", crate::numerics::DEFAULT_CLUSTER_TOL);
    let input = f.complex_list("input");
    let c1 = f.complex("C1").unwrap_or([std::f64::consts::FRAC_1_SQRT_2, 0.0]);
    let c2 = f.complex("C2").unwrap_or([std::f64::consts::FRAC_1_SQRT_2, 0.0]);
    let j0 = f.number("J0");
    let omega0 = f.number_or("omega0", 1.0);
    let dt = f.number_or("dt", 0.02);
    let coupling_shape = match f.take("coupling_shape") {
        None => CouplingShapeName::Cosine,
        Some(Value::String(s)) if s == "cosine" => CouplingShapeName::Cosine,
        Some(Value::String(s)) if s == "cosine-cubed" => CouplingShapeName::CosineCubed,
        Some(other) => {
            f.issue("coupling_shape", format!("expected \"cosine\" or \"cosine-cubed\", found {other}"));
            CouplingShapeName::Cosine
        }
    };
    let bias_shape = match f.take("bias_shape") {
        None => BiasShapeName::Linear,
        Some(Value::String(s)) if s == "linear" => BiasShapeName::Linear,
        Some(Value::String(s)) if s == "sine" => BiasShapeName::Sine,
        Some(other) => {
            f.issue("bias_shape", format!("expected \"linear\" or \"sine\", found {other}"));
            BiasShapeName::Linear
        }
    };
    let require_fidelity = f.number("require_fidelity");
    let seed = f.uint("seed").unwrap_or(0);
    let out = match f.take("out") {
        None => None,
        Some(Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => {
            f.issue("out", format!("expected a path, found {other}"));
            None
        }
    };

    let unknown: BTreeSet<String> = f.map.keys().cloned().collect();
    for key in unknown {
        f.issue(key, "unknown key");
    }

    let (Some(model), Some(sites), Some(analysis)) = (model, sites, analysis) else {
        return Err(Error::Config(f.issues));
    };
    let config = RunConfig {
        model,
        sites,
        j,
        eps,
        theta,
        repulsion,
        kind,
        sector,
        cutoff,
        region_a,
        region_b,
        policy,
        dressed_exchange,
        tau,
        taus,
        analysis,
        tol,
        cluster_tol,
        input,
        c1,
        c2,
        j0,
        omega0,
        dt,
        coupling_shape,
        bias_shape,
        require_fidelity,
        seed,
        out,
    };
    f.issues.extend(validate(&config));
    if f.issues.is_empty() {
        Ok(config)
    } else {
        Err(Error::Config(f.issues))
    }
}

/// Constraint checks on an assembled configuration.
pub fn validate(c: &RunConfig) -> Vec<ConfigIssue> {
    let mut issues = Vec::new();
    let mut bad = |path: &str, message: String| issues.push(ConfigIssue::new(path, message));
    if c.sites < 2 {
        bad("N", format!("need at least 2 sites, got {}", c.sites));
    }
    if !(c.j > 0.0 && c.j.is_finite()) {
        bad("J", format!("must be positive, got {}", c.j));
    }
    for (key, v) in [("eps", c.eps), ("theta", c.theta), ("U", c.repulsion)] {
        if !v.is_finite() {
            bad(key, "must be finite".into());
        }
    }
    if c.repulsion != 0.0 && c.kind != ParticleKind::Boson {
        bad("U", "on-site repulsion applies to bosons only".into());
    }
    if c.sites >= 2 {
        for (key, region) in [("A", &c.region_a), ("B", &c.region_b)] {
            for (i, &s) in region.iter().enumerate() {
                if s == 0 || s > c.sites {
                    bad(&format!("{key}[{i}]"), format!("site {s} outside 1..{}", c.sites));
                }
            }
        }
        if let Err(e) = c.partition() {
            bad("A", e.to_string());
        } else if c.policy == ExchangePolicy::FullMirror && !c.partition().map(|p| p.is_mirror_symmetric()).unwrap_or(false)
        {
            bad("policy", "full_mirror needs B to mirror A site by site".into());
        }
    }
    if !(c.tol > 0.0) {
        bad("tol", format!("must be positive, got {}", c.tol));
    }
    if !(c.cluster_tol > 0.0) {
        bad("cluster_tol", format!("must be positive, got {}", c.cluster_tol));
    }
    if !(c.dt > 0.0 && c.dt.is_finite()) {
        bad("dt", format!("must be positive, got {}", c.dt));
    }
    if !(c.omega0 > 0.0 && c.omega0.is_finite()) {
        bad("omega0", format!("must be positive, got {}", c.omega0));
    }
    if let Some(j0) = c.j0 {
        if !(j0 >= 0.0 && j0.is_finite()) {
            bad("J0", format!("must be non-negative, got {j0}"));
        }
    }
    if let Some(r) = c.require_fidelity {
        if !(0.0..=1.0).contains(&r) {
            bad("require_fidelity", format!("must lie in [0, 1], got {r}"));
        }
    }
    if c.dressed_exchange && !matches!(c.model, ModelName::DressedPhase | ModelName::DressedCollective) {
        bad("dressed_exchange", format!("{} has no dressing", c.model.as_str()));
    }
    if c.analysis == Analysis::Adiabatic && c.model != ModelName::Adiabatic {
        bad("model", "the adiabatic analysis needs the adiabatic model".into());
    }
    if c.analysis == Analysis::Mixed && c.model != ModelName::DressedCollective {
        bad("model", "the mixed-state benchmark runs on the dressed-collective model".into());
    }
    if c.analysis == Analysis::Sweep && c.taus.is_empty() {
        bad("taus", "a sweep needs a nonempty grid".into());
    }
    let needs_tau = !matches!(c.analysis, Analysis::Mixed | Analysis::Sweep) && c.model != ModelName::SwapNetwork;
    if needs_tau && c.tau.is_none() {
        bad("tau", "missing required key".into());
    }
    if let Some(t) = &c.tau {
        if let Err(m) = t.resolve(c.j, c.sites, c.eps) {
            bad("tau", m);
        }
    }
    for (i, t) in c.taus.iter().enumerate() {
        if let Err(m) = t.resolve(c.j, c.sites, c.eps) {
            bad(&format!("taus[{i}]"), m);
        }
    }
    if c.analysis == Analysis::Mixed {
        let norm = c.c1[0].powi(2) + c.c1[1].powi(2) + c.c2[0].powi(2) + c.c2[1].powi(2);
        if (norm - 1.0).abs() > 1e-12 {
            bad("C2", format!("|C1|^2 + |C2|^2 = {norm}, expected 1"));
        }
    }
    if let Some(input) = &c.input {
        let norm: f64 = input.iter().map(|[re, im]| re * re + im * im).sum();
        if (norm.sqrt() - 1.0).abs() > 1e-10 {
            bad("input", format!("norm is {}, expected 1", norm.sqrt()));
        }
    }
    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "model = \"christandl\"\nN = 4\nJ = 1\ntau = \"pi/J\"\nanalysis = \"pst\"\n";

    fn issues(src: &str) -> Vec<ConfigIssue> {
        match parse_config(src, None) {
            Err(Error::Config(v)) => v,
            other => panic!("expected config issues, got {other:?}"),
        }
    }

    #[test]
    fn minimal_config() {
        let c = parse_config(MINIMAL, None).unwrap();
        assert_eq!(c.model, ModelName::Christandl);
        assert_eq!(c.policy, ExchangePolicy::IdentityOnMedium);
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.region_b, vec![4]);
        assert!((c.tau_value().unwrap().unwrap() - std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn json_source() {
        let c = parse_config(r#"{"model": "uniform", "N": 2, "tau": 0.5, "analysis": "transmit"}"#, None).unwrap();
        assert_eq!(c.model, ModelName::Uniform);
    }

    #[test]
    fn overlapping_partition_rejected() {
        let v = issues(&format!("{MINIMAL}A = [1, 2]\nB = [2, 3]\n"));
        assert!(v.iter().any(|i| i.path == "A"));
    }

    #[test]
    fn missing_sites_reported_by_path() {
        let v = issues("model = \"christandl\"\ntau = 1.0\nanalysis = \"pst\"\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].path, "N");
    }

    #[test]
    fn itemized_issues() {
        let v = issues("model = \"heisenberg\"\nN = 3\nanalysis = \"pst\"\ntau = 1\ncolour = 2\ntol = -1\nA = [0]\n");
        let paths: Vec<&str> = v.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"model") && paths.contains(&"colour"));
        let v = issues(&format!("{MINIMAL}tol = -1\nA = [0]\nB = [4]\n"));
        let paths: Vec<&str> = v.iter().map(|i| i.path.as_str()).collect();
        assert!(paths.contains(&"tol") && paths.contains(&"A[0]"));
    }

    #[test]
    fn round_trip() {
        let src = format!("{MINIMAL}taus = [1.0, \"pi/(2*J)\"]\ninput = [[0.0, 0.0], [0.6, 0.8]]\nsector = [0, 1]\n");
        let c = parse_config(&src, None).unwrap();
        let back = parse_config(&emit_config(&c).unwrap(), Some(SourceFormat::Toml)).unwrap();
        assert_eq!(back, c);
        let json = serde_json::to_string(&c).unwrap();
        assert_eq!(parse_config(&json, Some(SourceFormat::Json)).unwrap(), c);
    }

    #[test]
    fn analysis_override() {
        let src = "model = \"christandl\"\nN = 4\ntau = 1.0\n";
        assert_eq!(parse_config_for(src, None, Some(Analysis::Transmit)).unwrap().analysis, Analysis::Transmit);
        let v = match parse_config_for(MINIMAL, None, Some(Analysis::Spectrum)) {
            Err(Error::Config(v)) => v,
            other => panic!("{other:?}"),
        };
        assert_eq!(v[0].path, "analysis");
    }

    #[test]
    fn bad_expression() {
        let v = issues("model = \"christandl\"\nN = 4\ntau = \"pi/K\"\nanalysis = \"pst\"\n");
        assert_eq!(v[0].path, "tau");
    }
}
