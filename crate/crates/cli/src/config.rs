//! Experiment configuration: a TOML document with a top-level `experiment`
//! key and `physics`, `numerics` and `output` sections.
//!
//! Every key is checked against a fixed schema. Presets supply all
//! parameters of their experiment; `custom` supplies none.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    #[serde(rename = "fig2a_dressed_map")]
    DressedMap,
    #[serde(rename = "fig2b_link_scan")]
    LinkScan,
    #[serde(rename = "fig2cd_plaquette")]
    Plaquette,
    #[serde(rename = "fig2e_ladder_spectrum")]
    LadderSpectrum,
    #[serde(rename = "fig2f_flux_sweep")]
    FluxSweep,
    Butterfly,
    Custom,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::DressedMap,
        Experiment::LinkScan,
        Experiment::Plaquette,
        Experiment::LadderSpectrum,
        Experiment::FluxSweep,
        Experiment::Butterfly,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::DressedMap => "fig2a_dressed_map",
            Experiment::LinkScan => "fig2b_link_scan",
            Experiment::Plaquette => "fig2cd_plaquette",
            Experiment::LadderSpectrum => "fig2e_ladder_spectrum",
            Experiment::FluxSweep => "fig2f_flux_sweep",
            Experiment::Butterfly => "butterfly",
            Experiment::Custom => "custom",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::DressedMap => "|F_r| over drive strength and phase difference",
            Experiment::LinkScan => {
                "two-site transfer at t* versus phase difference, effective and exact"
            }
            Experiment::Plaquette => {
                "single-phonon dynamics on a driven plaquette at zero and pi flux"
            }
            Experiment::LadderSpectrum => {
                "rhombic ladder spectrum with flat-band and edge-state reports"
            }
            Experiment::FluxSweep => "rhombic ladder spectrum and band gap versus flux",
            Experiment::Butterfly => "square-lattice spectrum versus flux per plaquette",
            Experiment::Custom => "driven dynamics on a user-defined array (no defaults)",
        }
    }

    pub fn from_name(name: &str) -> Option<Experiment> {
        Experiment::ALL.into_iter().find(|e| e.name() == name)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Value {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Float(x) => write!(f, "{x}"),
            Value::Int(n) => write!(f, "{n}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Text(s) => write!(f, "\"{s}\""),
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Kind {
    /// `lo < x` (or `lo <= x` when `closed`) and `x <= hi`.
    Float {
        lo: f64,
        closed: bool,
        hi: f64,
    },
    Int {
        lo: i64,
        hi: i64,
    },
    Bool,
    Choice(&'static [&'static str]),
    /// A positive number or one of the keywords.
    FloatOr(&'static [&'static str]),
    Text,
}

impl Kind {
    const POSITIVE: Kind = Kind::Float {
        lo: 0.0,
        closed: false,
        hi: f64::INFINITY,
    };
    const NON_NEGATIVE: Kind = Kind::Float {
        lo: 0.0,
        closed: true,
        hi: f64::INFINITY,
    };
    const ANGLE: Kind = Kind::Float {
        lo: -1e3,
        closed: true,
        hi: 1e3,
    };
}

use Experiment::*;

const DRIVEN: &[Experiment] = &[LinkScan, Plaquette, Custom];
const LADDER: &[Experiment] = &[LadderSpectrum, FluxSweep];

struct Field {
    path: &'static str,
    kind: Kind,
    used_by: &'static [Experiment],
    /// Applies only when another choice key has the given value.
    only_if: Option<(&'static str, &'static str)>,
    optional: bool,
}

const fn field(path: &'static str, kind: Kind, used_by: &'static [Experiment]) -> Field {
    Field {
        path,
        kind,
        used_by,
        only_if: None,
        optional: false,
    }
}

const fn laser_field(path: &'static str, kind: Kind) -> Field {
    Field {
        path,
        kind,
        used_by: &[LinkScan, Plaquette, Custom],
        only_if: Some(("physics.drive", "laser")),
        optional: false,
    }
}

const fn cosine_field(path: &'static str, kind: Kind) -> Field {
    Field {
        path,
        kind,
        used_by: &[Custom],
        only_if: Some(("physics.drive", "cosine")),
        optional: false,
    }
}

const fn output_field(path: &'static str, kind: Kind) -> Field {
    Field {
        path,
        kind,
        used_by: &Experiment::ALL,
        only_if: None,
        optional: true,
    }
}

const LAYOUTS: &[&str] = &["link", "plaquette", "rhombic_ladder", "square"];

static SCHEMA: &[Field] = &[
    field("physics.gradient", Kind::POSITIVE, DRIVEN),
    field("physics.beta", Kind::POSITIVE, DRIVEN),
    field(
        "physics.order",
        Kind::Int { lo: 1, hi: 20 },
        &[DressedMap, LinkScan, Plaquette, Custom],
    ),
    field(
        "physics.drive",
        Kind::Choice(&["laser", "cosine"]),
        &[Custom],
    ),
    laser_field(
        "physics.lamb_dicke",
        Kind::Float {
            lo: 0.0,
            closed: true,
            hi: 1.0,
        },
    ),
    laser_field("physics.rabi", Kind::NON_NEGATIVE),
    laser_field("physics.beat", Kind::POSITIVE),
    cosine_field("physics.drive_frequency", Kind::POSITIVE),
    cosine_field("physics.drive_strength", Kind::NON_NEGATIVE),
    field("physics.phase_x", Kind::ANGLE, &[Custom]),
    field("physics.phase_y", Kind::ANGLE, &[Custom]),
    field(
        "physics.plaquette_flux",
        Kind::Choice(&["zero", "pi", "both"]),
        &[Plaquette],
    ),
    field(
        "physics.d_y",
        Kind::FloatOr(&["tuned", "stated"]),
        &[Plaquette, Custom],
    ),
    field("physics.layout", Kind::Choice(LAYOUTS), &[Custom]),
    field("physics.nx", Kind::Int { lo: 0, hi: 64 }, &[Custom]),
    field("physics.ny", Kind::Int { lo: 0, hi: 64 }, &[Custom]),
    field("physics.j1", Kind::POSITIVE, LADDER),
    field("physics.j2", Kind::POSITIVE, LADDER),
    field("physics.flux", Kind::ANGLE, &[LadderSpectrum]),
    field("physics.jx", Kind::POSITIVE, &[Butterfly]),
    field("physics.jy", Kind::POSITIVE, &[Butterfly]),
    field("physics.m_max", Kind::Int { lo: 1, hi: 64 }, &[Butterfly]),
    field(
        "numerics.eta_max",
        Kind::Float {
            lo: 0.0,
            closed: false,
            hi: 25.0,
        },
        &[DressedMap],
    ),
    field(
        "numerics.eta_points",
        Kind::Int { lo: 2, hi: 100_000 },
        &[DressedMap],
    ),
    field(
        "numerics.phase_points",
        Kind::Int { lo: 2, hi: 100_000 },
        &[DressedMap, LinkScan],
    ),
    field("numerics.n_max", Kind::Int { lo: 1, hi: 64 }, DRIVEN),
    field("numerics.steps_per_period", Kind::POSITIVE, DRIVEN),
    field(
        "numerics.exact_model",
        Kind::Choice(&["laser", "cosine"]),
        DRIVEN,
    ),
    field("numerics.counter_rotating", Kind::Bool, DRIVEN),
    field("numerics.window", Kind::POSITIVE, &[Plaquette]),
    field(
        "numerics.samples",
        Kind::Int {
            lo: 1,
            hi: 1_000_000,
        },
        &[Plaquette, Custom],
    ),
    field("numerics.t_final", Kind::POSITIVE, &[Custom]),
    field(
        "numerics.initial_site",
        Kind::Int { lo: 0, hi: 4096 },
        &[Custom],
    ),
    field("numerics.cells", Kind::Int { lo: 1, hi: 2000 }, LADDER),
    field(
        "numerics.boundary",
        Kind::Choice(&["open", "periodic"]),
        &[LadderSpectrum, FluxSweep, Butterfly],
    ),
    field(
        "numerics.flux_points",
        Kind::Int { lo: 1, hi: 100_000 },
        &[FluxSweep, Butterfly],
    ),
    field("numerics.lx", Kind::Int { lo: 1, hi: 200 }, &[Butterfly]),
    field("numerics.ly", Kind::Int { lo: 1, hi: 200 }, &[Butterfly]),
    output_field("output.directory", Kind::Text),
    output_field("output.format", Kind::Choice(&["csv", "json"])),
];

fn schema_field(path: &str) -> Option<&'static Field> {
    SCHEMA.iter().find(|f| f.path == path)
}

/// Default parameters of a preset, written as the equivalent TOML values.
pub fn preset_values(experiment: Experiment) -> Vec<(&'static str, Value)> {
    use Value::*;
    let laser = |rabi: f64, n_max: i64| {
        vec![
            ("physics.gradient", Float(0.05)),
            ("physics.beta", Float(0.002)),
            ("physics.order", Int(1)),
            ("physics.lamb_dicke", Float(0.2)),
            ("physics.rabi", Float(rabi)),
            ("physics.beat", Float(0.05)),
            ("numerics.n_max", Int(n_max)),
            (
                "numerics.steps_per_period",
                Float(phonon_gauge::dynamics::DEFAULT_STEPS_PER_PERIOD),
            ),
            ("numerics.exact_model", Text("laser".into())),
            ("numerics.counter_rotating", Bool(false)),
        ]
    };
    match experiment {
        DressedMap => vec![
            ("physics.order", Int(1)),
            ("numerics.eta_max", Float(2.0)),
            ("numerics.eta_points", Int(101)),
            ("numerics.phase_points", Int(101)),
        ],
        LinkScan => {
            let mut v = laser(0.75, 4);
            v.push(("numerics.phase_points", Int(21)));
            v
        }
        Plaquette => {
            let mut v = laser(0.25, 2);
            v.extend([
                ("physics.plaquette_flux", Text("both".into())),
                ("physics.d_y", Text("tuned".into())),
                ("numerics.window", Float(1.0)),
                ("numerics.samples", Int(400)),
            ]);
            v
        }
        LadderSpectrum => vec![
            ("physics.j1", Float(1.0)),
            ("physics.j2", Float(1.0)),
            ("physics.flux", Float(PI)),
            ("numerics.cells", Int(10)),
            ("numerics.boundary", Text("open".into())),
        ],
        FluxSweep => vec![
            ("physics.j1", Float(1.0)),
            ("physics.j2", Float(1.0)),
            ("numerics.cells", Int(10)),
            ("numerics.boundary", Text("periodic".into())),
            ("numerics.flux_points", Int(41)),
        ],
        Butterfly => vec![
            ("physics.jx", Float(1.0)),
            ("physics.jy", Float(1.0)),
            ("physics.m_max", Int(1)),
            ("numerics.lx", Int(16)),
            ("numerics.ly", Int(16)),
            ("numerics.boundary", Text("open".into())),
            ("numerics.flux_points", Int(201)),
        ],
        Custom => Vec::new(),
    }
}

/// Renders a preset as a complete configuration document.
pub fn preset_document(experiment: Experiment) -> String {
    let mut out = format!("experiment = \"{}\"\n", experiment.name());
    let mut section = "";
    let mut values = preset_values(experiment);
    values.sort_by_key(|(path, _)| path.split_once('.').map(|(sec, _)| sec != "physics"));
    for (path, value) in values {
        let (sec, key) = path.split_once('.').expect("schema paths are dotted");
        if sec != section {
            out.push_str(&format!("\n[{sec}]\n"));
            section = sec;
        }
        let v = match value {
            Value::Float(x) => format!("{x:?}"),
            other => other.to_string(),
        };
        out.push_str(&format!("{key} = {v}\n"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

/// Every violation found in a document.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl ConfigErrors {
    pub fn paths(&self) -> Vec<&str> {
        self.0.iter().map(|e| e.path.as_str()).collect()
    }
}

/// A validated configuration with all parameters of its experiment resolved.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// Resolved physical and numerical parameters by dotted path.
    pub values: BTreeMap<String, Value>,
    pub directory: Option<PathBuf>,
    pub format: Option<Format>,
}

impl ExperimentConfig {
    /// A preset with all defaults.
    pub fn preset(experiment: Experiment) -> ExperimentConfig {
        parse_config(&format!("experiment = \"{}\"", experiment.name()))
            .expect("presets are complete")
    }

    fn get(&self, path: &str) -> &Value {
        self.values
            .get(path)
            .unwrap_or_else(|| panic!("{path} is not part of the {} schema", self.experiment))
    }

    pub fn float(&self, path: &str) -> f64 {
        match self.get(path) {
            Value::Float(x) => *x,
            Value::Int(n) => *n as f64,
            other => panic!("{path} is not numeric: {other}"),
        }
    }

    pub fn int(&self, path: &str) -> usize {
        match self.get(path) {
            Value::Int(n) => *n as usize,
            other => panic!("{path} is not an integer: {other}"),
        }
    }

    pub fn boolean(&self, path: &str) -> bool {
        match self.get(path) {
            Value::Bool(b) => *b,
            other => panic!("{path} is not a boolean: {other}"),
        }
    }

    pub fn text(&self, path: &str) -> &str {
        match self.get(path) {
            Value::Text(s) => s,
            other => panic!("{path} is not text: {other}"),
        }
    }

    /// Replaces one parameter, re-checking it against the schema.
    pub fn set(&mut self, path: &str, value: Value) -> Result<(), ConfigErrors> {
        let Some(f) = schema_field(path).filter(|f| f.used_by.contains(&self.experiment)) else {
            return Err(ConfigErrors(vec![ConfigError {
                path: path.into(),
                reason: format!("not a parameter of experiment {}", self.experiment),
            }]));
        };
        let v = check(f, value).map_err(|reason| {
            ConfigErrors(vec![ConfigError {
                path: path.into(),
                reason,
            }])
        })?;
        self.values.insert(path.into(), v);
        Ok(())
    }
}

fn type_name(v: &toml::Value) -> &'static str {
    v.type_str()
}

fn convert(v: &toml::Value) -> Option<Value> {
    Some(match v {
        toml::Value::Float(x) => Value::Float(*x),
        toml::Value::Integer(n) => Value::Int(*n),
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::String(s) => Value::Text(s.clone()),
        _ => return None,
    })
}

fn check(field: &Field, value: Value) -> Result<Value, String> {
    match (field.kind, value) {
        (Kind::Float { lo, closed, hi }, v @ (Value::Float(_) | Value::Int(_))) => {
            let x = match v {
                Value::Float(x) => x,
                Value::Int(n) => n as f64,
                _ => unreachable!(),
            };
            let above = if closed { x >= lo } else { x > lo };
            if x.is_finite() && above && x <= hi {
                Ok(Value::Float(x))
            } else {
                let lower = if closed { "[" } else { "(" };
                Err(format!("value {x} out of range {lower}{lo}, {hi}]"))
            }
        }
        (Kind::Int { lo, hi }, Value::Int(n)) => {
            if (lo..=hi).contains(&n) {
                Ok(Value::Int(n))
            } else {
                Err(format!("value {n} out of range [{lo}, {hi}]"))
            }
        }
        (Kind::Bool, v @ Value::Bool(_)) => Ok(v),
        (Kind::Choice(options), Value::Text(s)) | (Kind::FloatOr(options), Value::Text(s)) => {
            if options.contains(&s.as_str()) {
                Ok(Value::Text(s))
            } else {
                Err(format!("\"{s}\" is not one of {}", options.join(", ")))
            }
        }
        (Kind::FloatOr(_), v @ (Value::Float(_) | Value::Int(_))) => check(
            &Field {
                kind: Kind::POSITIVE,
                ..*field
            },
            v,
        ),
        (Kind::Text, v @ Value::Text(_)) => Ok(v),
        (kind, v) => Err(format!("expected {}, found {v}", expected(kind))),
    }
}

fn expected(kind: Kind) -> &'static str {
    match kind {
        Kind::Float { .. } => "a number",
        Kind::Int { .. } => "an integer",
        Kind::Bool => "a boolean",
        Kind::Choice(_) => "one of the listed strings",
        Kind::FloatOr(_) => "a number or keyword",
        Kind::Text => "a string",
    }
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut Vec<(String, toml::Value)>) {
    for (key, value) in table {
        let path = if prefix.is_empty() {
            key.clone()
        } else {
            format!("{prefix}.{key}")
        };
        match value {
            toml::Value::Table(t) => flatten(&path, t, out),
            v => out.push((path, v.clone())),
        }
    }
}

/// Parses and validates a configuration document, reporting every problem
/// at once.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigError {
            path: "<document>".into(),
            reason: e.message().to_string(),
        }])
    })?;
    let mut leaves = Vec::new();
    flatten("", &table, &mut leaves);

    let mut errors = Vec::new();
    let mut experiment = None;
    let mut given: BTreeMap<String, Value> = BTreeMap::new();
    for (path, raw) in leaves {
        if path == "experiment" {
            match raw.as_str().map(|s| (s, Experiment::from_name(s))) {
                Some((_, Some(e))) => experiment = Some(e),
                Some((s, None)) => errors.push(ConfigError {
                    path,
                    reason: format!(
                        "unknown experiment \"{s}\"; expected one of {}",
                        experiment_names()
                    ),
                }),
                None => errors.push(ConfigError {
                    path,
                    reason: format!("expected a string, found {}", type_name(&raw)),
                }),
            }
            continue;
        }
        let Some(field) = schema_field(&path) else {
            errors.push(ConfigError {
                path,
                reason: "unknown key".into(),
            });
            continue;
        };
        match convert(&raw) {
            None => errors.push(ConfigError {
                path,
                reason: format!(
                    "expected {}, found {}",
                    expected(field.kind),
                    type_name(&raw)
                ),
            }),
            Some(v) => match check(field, v) {
                Ok(v) => {
                    given.insert(path, v);
                }
                Err(reason) => errors.push(ConfigError { path, reason }),
            },
        }
    }

    let Some(experiment) = experiment else {
        if !errors.iter().any(|e| e.path == "experiment") {
            errors.insert(
                0,
                ConfigError {
                    path: "experiment".into(),
                    reason: format!(
                        "missing required key; expected one of {}",
                        experiment_names()
                    ),
                },
            );
        }
        return Err(ConfigErrors(errors));
    };

    let mut values: BTreeMap<String, Value> = preset_values(experiment)
        .into_iter()
        .map(|(p, v)| (p.to_string(), v))
        .collect();
    for (path, v) in &given {
        let field = schema_field(path).expect("checked above");
        if !field.used_by.contains(&experiment) {
            errors.push(ConfigError {
                path: path.clone(),
                reason: format!("not used by experiment {experiment}"),
            });
        } else {
            values.insert(path.clone(), v.clone());
        }
    }

    let applies = |f: &Field, values: &BTreeMap<String, Value>| {
        f.used_by.contains(&experiment)
            && f.only_if.is_none_or(|(key, want)| {
                let decided_here =
                    schema_field(key).is_some_and(|c| c.used_by.contains(&experiment));
                !decided_here || matches!(values.get(key), Some(Value::Text(s)) if s == want)
            })
    };
    for f in SCHEMA {
        let present = values.contains_key(f.path);
        if applies(f, &values) {
            if !present && !f.optional {
                errors.push(ConfigError {
                    path: f.path.into(),
                    reason: "missing required key".into(),
                });
            }
        } else if present && f.used_by.contains(&experiment) {
            let (key, want) = f
                .only_if
                .expect("inapplicable fields of the experiment are conditional");
            if given.contains_key(f.path) {
                errors.push(ConfigError {
                    path: f.path.into(),
                    reason: format!("only used when {key} = \"{want}\""),
                });
            }
            values.remove(f.path);
        }
    }
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }

    let directory = match values.remove("output.directory") {
        Some(Value::Text(s)) => Some(PathBuf::from(s)),
        _ => None,
    };
    let format = match values.remove("output.format") {
        Some(Value::Text(s)) if s == "json" => Some(Format::Json),
        Some(_) => Some(Format::Csv),
        None => None,
    };
    Ok(ExperimentConfig {
        experiment,
        values,
        directory,
        format,
    })
}

fn experiment_names() -> String {
    Experiment::ALL
        .iter()
        .map(|e| e.name())
        .collect::<Vec<_>>()
        .join(", ")
}
