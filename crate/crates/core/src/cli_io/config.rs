//! The run configuration: a TOML document with an explicit schema version.
//!
//! ```toml
//! schema_version = 1
//! command = "exp"
//! seed = 7
//! output_dir = "out"
//!
//! [experiment]
//! kind = "thm-a"
//! family = "gasket"
//! levels = [1, 2, 3]
//! T = 1.0
//! n_trials = 2000
//! ```
//!
//! Every key is checked against the schema before any value is read, so a
//! misspelt key is reported by name instead of being ignored.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::graphs::{Family, FamilySpec, LevelLimits};

pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable naming the output directory when the config has none.
pub const OUTPUT_DIR_ENV: &str = "RESISTWALK_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "resistwalk-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Gen,
    Resist,
    Oracle,
    Walk,
    Exp,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Gen => "gen",
            Command::Resist => "resist",
            Command::Oracle => "oracle",
            Command::Walk => "walk",
            Command::Exp => "exp",
            Command::Validate => "validate",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "gen" => Command::Gen,
            "resist" => Command::Resist,
            "oracle" => Command::Oracle,
            "walk" => Command::Walk,
            "exp" => Command::Exp,
            "validate" => Command::Validate,
            _ => return Err(Error::Range(format!("unknown command `{s}`"))),
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ThmA,
    ThmB,
    SupLocaltime,
    Modulus,
    GasketModulus,
    Gamma,
    Uvd,
    Exponents,
    LocalTimeScaling,
    CoverTimeScaling,
    Carpet,
}

impl ExperimentKind {
    const ALL: [(&'static str, ExperimentKind); 11] = [
        ("thm-a", ExperimentKind::ThmA),
        ("thm-b", ExperimentKind::ThmB),
        ("sup-localtime", ExperimentKind::SupLocaltime),
        ("modulus", ExperimentKind::Modulus),
        ("gasket-modulus", ExperimentKind::GasketModulus),
        ("gamma", ExperimentKind::Gamma),
        ("uvd", ExperimentKind::Uvd),
        ("exponents", ExperimentKind::Exponents),
        ("local-time-scaling", ExperimentKind::LocalTimeScaling),
        ("cover-time-scaling", ExperimentKind::CoverTimeScaling),
        ("carpet", ExperimentKind::Carpet),
    ];

    pub fn is_stochastic(self) -> bool {
        !matches!(self, ExperimentKind::Uvd | ExperimentKind::Exponents | ExperimentKind::Carpet)
    }
}

/// Where the graph for `resist`, `oracle`, `walk` and `validate` comes from.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum GraphSource {
    Family(FamilySpec),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WalkConfig {
    pub start: usize,
    /// Explicit step count; otherwise `floor(T m r)`.
    pub steps: Option<u64>,
    pub t_horizon: f64,
    pub retain: bool,
    pub cover: bool,
    pub cover_cap: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    pub x: usize,
    /// Defaults to the last vertex.
    pub y: Option<usize>,
    pub horizon: usize,
    pub kmax: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub family: Family,
    pub levels: Vec<u32>,
    pub t_horizon: f64,
    pub l_trunc: f64,
    pub lambda_grid: Vec<f64>,
    pub n_trials: u32,
    pub t_values: Vec<f64>,
    /// Volume exponent for `uvd`; the family default when absent.
    pub alpha: Option<f64>,
    pub c_psi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidateConfig {
    pub tolerance: f64,
    pub steps: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub command: Command,
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub graph: Option<GraphSource>,
    pub limits: LevelLimits,
    pub walk: WalkConfig,
    pub oracle: OracleConfig,
    pub experiment: Option<ExperimentSection>,
    pub validate: ValidateConfig,
}

const TOP_KEYS: &[&str] = &[
    "schema_version",
    "command",
    "seed",
    "output_dir",
    "workers",
    "graph",
    "limits",
    "walk",
    "oracle",
    "experiment",
    "validate",
];
const SECTIONS: &[(&str, &[&str])] = &[
    ("graph", &["family", "level", "weight", "input"]),
    ("limits", &["path", "vicsek", "gasket", "carpet", "wired_carpet"]),
    ("walk", &["start", "steps", "T", "retain", "cover", "cover_cap"]),
    ("oracle", &["x", "y", "horizon", "kmax"]),
    (
        "experiment",
        &["kind", "family", "levels", "T", "L", "lambda_grid", "n_trials", "t_values", "alpha", "c_psi"],
    ),
    ("validate", &["tolerance", "steps"]),
];

/// `0, 0.5, ..., 6`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..=12).map(|k| 0.5 * f64::from(k)).collect()
}

impl ExperimentConfig {
    /// Whether the command draws random numbers and so needs a seed.
    pub fn is_stochastic(&self) -> bool {
        match self.command {
            Command::Walk | Command::Validate => true,
            Command::Exp => self.experiment.as_ref().is_some_and(|e| e.kind.is_stochastic()),
            Command::Gen | Command::Resist | Command::Oracle => false,
        }
    }

    /// The configured directory, else [`OUTPUT_DIR_ENV`], else
    /// [`DEFAULT_OUTPUT_DIR`].
    pub fn resolved_output_dir(&self) -> PathBuf {
        if let Some(d) = &self.output_dir {
            return d.clone();
        }
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(d) if !d.is_empty() => PathBuf::from(d),
            _ => PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }

    /// Canonical JSON form, the input to the config hash. Leaves out the
    /// output directory and worker count, which do not affect results.
    pub fn canonical_json(&self) -> String {
        let body = ExperimentConfig {
            output_dir: None,
            workers: None,
            ..self.clone()
        };
        serde_json::to_string(&body).expect("config serializes")
    }
}

/// Parses and validates a config that names its own command.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    parse_config_for(text, None)
}

/// As [`parse_config`], with the command supplied by the caller when the
/// document omits it. A document naming a different command is rejected.
pub fn parse_config_for(text: &str, command: Option<Command>) -> Result<ExperimentConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.message().to_string()))?;
    check_keys(&table)?;
    let version = match table.get("schema_version") {
        Some(v) => uint(v, "schema_version")?,
        None => return Err(Error::Range("schema_version is required".into())),
    };
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::Range(format!(
            "schema_version {version} is not supported (expected {SCHEMA_VERSION})"
        )));
    }
    let named = table.get("command").map(|v| string(v, "command").and_then(Command::parse)).transpose()?;
    let command = match (named, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::Range(format!("config is for `{a}` but `{b}` was requested")))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(Error::Range("command is required".into())),
    };
    let empty = Table::new();
    let section = |name: &str| -> Result<&Table> {
        match table.get(name) {
            None => Ok(&empty),
            Some(Value::Table(t)) => Ok(t),
            Some(_) => Err(Error::Parse(format!("`{name}` must be a table"))),
        }
    };

    let graph = parse_graph(section("graph")?)?;
    let limits = parse_limits(section("limits")?)?;
    let walk = parse_walk(section("walk")?)?;
    let oracle = parse_oracle(section("oracle")?)?;
    let experiment = match table.get("experiment") {
        Some(_) => Some(parse_experiment(section("experiment")?)?),
        None => None,
    };
    let validate = parse_validate(section("validate")?)?;

    let config = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        command,
        seed: table.get("seed").map(|v| uint(v, "seed")).transpose()?,
        output_dir: table.get("output_dir").map(|v| string(v, "output_dir").map(PathBuf::from)).transpose()?,
        workers: table
            .get("workers")
            .map(|v| positive_int(v, "workers").map(|w| w as usize))
            .transpose()?,
        graph,
        limits,
        walk,
        oracle,
        experiment,
        validate,
    };
    match config.command {
        Command::Exp if config.experiment.is_none() => {
            return Err(Error::Range("`exp` needs an [experiment] section".into()))
        }
        Command::Gen | Command::Resist | Command::Oracle | Command::Walk | Command::Validate
            if config.graph.is_none() =>
        {
            return Err(Error::Range(format!("`{}` needs a [graph] section", config.command)))
        }
        _ => {}
    }
    if config.command == Command::Gen && matches!(config.graph, Some(GraphSource::File(_))) {
        return Err(Error::Range("`gen` builds a family graph; `input` is not allowed".into()));
    }
    if config.is_stochastic() && config.seed.is_none() {
        return Err(Error::Range(format!("`{}` is stochastic and needs a seed", config.command)));
    }
    Ok(config)
}

fn check_keys(table: &Table) -> Result<()> {
    for (key, value) in table {
        if !TOP_KEYS.contains(&key.as_str()) {
            return Err(Error::UnknownKey(key.clone()));
        }
        if let (Some((_, allowed)), Value::Table(t)) = (SECTIONS.iter().find(|(s, _)| s == key), value) {
            if let Some(k) = t.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(Error::UnknownKey(format!("{key}.{k}")));
            }
        }
    }
    Ok(())
}

fn int(v: &Value, key: &str) -> Result<i64> {
    v.as_integer().ok_or_else(|| Error::Parse(format!("`{key}` must be an integer")))
}

fn uint(v: &Value, key: &str) -> Result<u64> {
    let i = int(v, key)?;
    u64::try_from(i).map_err(|_| Error::Range(format!("`{key}` must be nonnegative, got {i}")))
}

fn positive_int(v: &Value, key: &str) -> Result<u64> {
    match uint(v, key)? {
        0 => Err(Error::Range(format!("`{key}` must be positive"))),
        n => Ok(n),
    }
}

fn u32_of(v: &Value, key: &str) -> Result<u32> {
    let n = uint(v, key)?;
    u32::try_from(n).map_err(|_| Error::Range(format!("`{key}` = {n} is too large")))
}

fn float(v: &Value, key: &str) -> Result<f64> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(Error::Parse(format!("`{key}` must be a number"))),
    }
}

fn positive_float(v: &Value, key: &str) -> Result<f64> {
    let f = float(v, key)?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::Range(format!("`{key}` must be positive and finite, got {f}")));
    }
    Ok(f)
}

fn string<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Parse(format!("`{key}` must be a string")))
}

fn boolean(v: &Value, key: &str) -> Result<bool> {
    v.as_bool().ok_or_else(|| Error::Parse(format!("`{key}` must be true or false")))
}

fn array<'a>(v: &'a Value, key: &str) -> Result<&'a [Value]> {
    match v {
        Value::Array(a) => Ok(a),
        _ => Err(Error::Parse(format!("`{key}` must be an array"))),
    }
}

fn family(v: &Value, key: &str) -> Result<Family> {
    let s = string(v, key)?;
    Family::deserialize(toml::Value::String(s.replace('-', "_")))
        .map_err(|_| Error::Range(format!("unknown family `{s}`")))
}

fn parse_graph(t: &Table) -> Result<Option<GraphSource>> {
    if t.is_empty() {
        return Ok(None);
    }
    if let Some(input) = t.get("input") {
        if t.len() > 1 {
            return Err(Error::Range("graph.input excludes the family keys".into()));
        }
        return Ok(Some(GraphSource::File(PathBuf::from(string(input, "graph.input")?))));
    }
    let fam = family(
        t.get("family").ok_or_else(|| Error::Range("graph.family is required".into()))?,
        "graph.family",
    )?;
    let level = match t.get("level") {
        Some(v) => u32_of(v, "graph.level")?,
        None => return Err(Error::Range("graph.level is required".into())),
    };
    let weight = t.get("weight").map(|v| positive_float(v, "graph.weight")).transpose()?.unwrap_or(1.0);
    Ok(Some(GraphSource::Family(FamilySpec {
        family: fam,
        level,
        weight,
    })))
}

fn parse_limits(t: &Table) -> Result<LevelLimits> {
    let mut l = LevelLimits::default();
    for (key, slot) in [
        ("path", &mut l.path),
        ("vicsek", &mut l.vicsek),
        ("gasket", &mut l.gasket),
        ("carpet", &mut l.carpet),
        ("wired_carpet", &mut l.wired_carpet),
    ] {
        if let Some(v) = t.get(key) {
            *slot = u32_of(v, key)?;
        }
    }
    Ok(l)
}

fn parse_walk(t: &Table) -> Result<WalkConfig> {
    Ok(WalkConfig {
        start: t.get("start").map(|v| uint(v, "walk.start")).transpose()?.unwrap_or(0) as usize,
        steps: t.get("steps").map(|v| uint(v, "walk.steps")).transpose()?,
        t_horizon: t.get("T").map(|v| positive_float(v, "walk.T")).transpose()?.unwrap_or(1.0),
        retain: t.get("retain").map(|v| boolean(v, "walk.retain")).transpose()?.unwrap_or(false),
        cover: t.get("cover").map(|v| boolean(v, "walk.cover")).transpose()?.unwrap_or(false),
        cover_cap: t.get("cover_cap").map(|v| positive_int(v, "walk.cover_cap")).transpose()?,
    })
}

fn parse_oracle(t: &Table) -> Result<OracleConfig> {
    Ok(OracleConfig {
        x: t.get("x").map(|v| uint(v, "oracle.x")).transpose()?.unwrap_or(0) as usize,
        y: t.get("y").map(|v| uint(v, "oracle.y").map(|y| y as usize)).transpose()?,
        horizon: t.get("horizon").map(|v| positive_int(v, "oracle.horizon")).transpose()?.unwrap_or(1000) as usize,
        kmax: t.get("kmax").map(|v| positive_int(v, "oracle.kmax")).transpose()?.unwrap_or(50) as usize,
    })
}

fn parse_experiment(t: &Table) -> Result<ExperimentSection> {
    let kind_name = string(
        t.get("kind").ok_or_else(|| Error::Range("experiment.kind is required".into()))?,
        "experiment.kind",
    )?;
    let kind = ExperimentKind::ALL
        .iter()
        .find(|(n, _)| *n == kind_name)
        .map(|&(_, k)| k)
        .ok_or_else(|| Error::Range(format!("unknown experiment kind `{kind_name}`")))?;
    let levels = match t.get("levels") {
        Some(v) => array(v, "experiment.levels")?
            .iter()
            .map(|l| u32_of(l, "experiment.levels"))
            .collect::<Result<Vec<_>>>()?,
        None => vec![1, 2, 3],
    };
    if levels.is_empty() {
        return Err(Error::Range("experiment.levels is empty".into()));
    }
    let floats = |key: &str, default: Vec<f64>| -> Result<Vec<f64>> {
        match t.get(key) {
            Some(v) => array(v, key)?.iter().map(|x| float(x, key)).collect(),
            None => Ok(default),
        }
    };
    let lambda_grid = floats("lambda_grid", default_lambda_grid())?;
    crate::experiments::check_grid(&lambda_grid)?;
    let t_values = floats("t_values", vec![1.0])?;
    if t_values.is_empty() || t_values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::Range("experiment.t_values must be positive".into()));
    }
    let n_trials = match t.get("n_trials") {
        Some(v) => {
            let n = int(v, "experiment.n_trials")?;
            if n < 1 {
                return Err(Error::Range(format!("experiment.n_trials must be positive, got {n}")));
            }
            u32::try_from(n).map_err(|_| Error::Range(format!("experiment.n_trials = {n} is too large")))?
        }
        None => 2000,
    };
    let l_trunc = t.get("L").map(|v| float(v, "experiment.L")).transpose()?.unwrap_or(1.0);
    if !(l_trunc >= 1.0 && l_trunc.is_finite()) {
        return Err(Error::Range(format!("experiment.L must be at least 1, got {l_trunc}")));
    }
    Ok(ExperimentSection {
        kind,
        family: t
            .get("family")
            .map(|v| family(v, "experiment.family"))
            .transpose()?
            .unwrap_or(Family::Gasket),
        levels,
        t_horizon: t.get("T").map(|v| positive_float(v, "experiment.T")).transpose()?.unwrap_or(1.0),
        l_trunc,
        lambda_grid,
        n_trials,
        t_values,
        alpha: t.get("alpha").map(|v| positive_float(v, "experiment.alpha")).transpose()?,
        c_psi: t.get("c_psi").map(|v| positive_float(v, "experiment.c_psi")).transpose()?.unwrap_or(1.0),
    })
}

fn parse_validate(t: &Table) -> Result<ValidateConfig> {
    Ok(ValidateConfig {
        tolerance: t
            .get("tolerance")
            .map(|v| positive_float(v, "validate.tolerance"))
            .transpose()?
            .unwrap_or(1e-10),
        steps: t.get("steps").map(|v| positive_int(v, "validate.steps")).transpose()?.unwrap_or(10_000),
    })
}
