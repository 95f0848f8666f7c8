//! Flat key/value configuration with defaults, file values and flags.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde_json::Value;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Command {
    Hamsim,
    Gsp,
    Qls,
    AnalogGsp,
    AnalogQls,
    WalksSearch,
    DecompCheck,
    Sweep,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Hamsim,
        Command::Gsp,
        Command::Qls,
        Command::AnalogGsp,
        Command::AnalogQls,
        Command::WalksSearch,
        Command::DecompCheck,
        Command::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Hamsim => "hamsim",
            Command::Gsp => "gsp",
            Command::Qls => "qls",
            Command::AnalogGsp => "analog-gsp",
            Command::AnalogQls => "analog-qls",
            Command::WalksSearch => "walks-search",
            Command::DecompCheck => "decomp-check",
            Command::Sweep => "sweep",
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Hamsim => "Expectation value after Hamiltonian simulation by sampled Taylor segments",
            Command::Gsp => "Ground-state property estimation with the Gaussian filter",
            Command::Qls => "Expectation value of the normalized solution of Hx = b",
            Command::AnalogGsp => "Ground-state preparation through one continuous-variable ancilla",
            Command::AnalogQls => "Linear-system component through two continuous-variable ancillas",
            Command::WalksSearch => "Spatial search by randomly sampled quantum-walk powers",
            Command::DecompCheck => "Build one decomposition and report its size and scalar error",
            Command::Sweep => "Run another command over a list of values of one key",
        }
    }

    fn uses_estimator(self) -> bool {
        matches!(self, Command::Hamsim | Command::Gsp | Command::Qls)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;

    fn from_str(s: &str) -> Result<Command> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Float,
    Int,
    Bool,
    Text,
}

/// One configuration key. `default` returns `None` where the key does not
/// apply to a command and `Some(None)` where it applies without a default.
pub struct KeySpec {
    pub name: &'static str,
    pub kind: Kind,
    pub help: &'static str,
    pub default: fn(Command) -> Option<Option<&'static str>>,
    pub required: bool,
}

impl KeySpec {
    pub fn applies_to(&self, c: Command) -> bool {
        (self.default)(c).is_some()
    }

    /// Flag spelling: underscores become dashes.
    pub fn flag(&self) -> String {
        self.name.replace('_', "-")
    }
}

const GSP_H: &str = "0.5*II - 0.5*ZZ + 0.1*XI";
const QLS_H: &str = "0.6*ZI + 0.4*XX";

fn gsp_like(c: Command) -> bool {
    matches!(c, Command::Gsp | Command::AnalogGsp)
}

fn qls_like(c: Command) -> bool {
    matches!(c, Command::Qls | Command::AnalogQls)
}

pub static KEYS: &[KeySpec] = &[
    KeySpec { name: "seed", kind: Kind::Int, help: "master seed of all random streams", default: |_| Some(Some("0")), required: false },
    KeySpec {
        name: "eps",
        kind: Kind::Float,
        help: "target precision (decomposition error for decomp-check)",
        default: |c| match c {
            Command::Hamsim => Some(Some("0.05")),
            Command::Gsp | Command::Qls => Some(Some("0.1")),
            Command::AnalogGsp | Command::AnalogQls => Some(Some("0.01")),
            Command::DecompCheck => Some(Some("0.001")),
            Command::WalksSearch | Command::Sweep => None,
        },
        required: false,
    },
    KeySpec {
        name: "delta",
        kind: Kind::Float,
        help: "failure probability",
        default: |c| match c {
            Command::Hamsim => Some(Some("0.05")),
            Command::Gsp | Command::Qls => Some(Some("0.1")),
            _ => None,
        },
        required: false,
    },
    KeySpec {
        name: "mode",
        kind: Kind::Text,
        help: "shot (±1 outcomes) or expectation (exact per-sample values)",
        default: |c| c.uses_estimator().then_some(Some("expectation")),
        required: false,
    },
    KeySpec {
        name: "repetitions",
        kind: Kind::Int,
        help: "fixed sample count per phase instead of the Hoeffding count",
        default: |c| c.uses_estimator().then_some(None),
        required: false,
    },
    KeySpec { name: "out", kind: Kind::Text, help: "output file (stdout when absent)", default: |_| Some(None), required: false },
    KeySpec { name: "trace", kind: Kind::Bool, help: "write per-sample records as CSV next to the output", default: |_| Some(Some("false")), required: false },
    KeySpec {
        name: "hamiltonian",
        kind: Kind::Text,
        help: "Pauli sum such as \"0.3*X + 0.4*Z\"",
        default: |c| match c {
            Command::Hamsim => Some(Some("0.3*X + 0.4*Z")),
            c if gsp_like(c) => Some(Some(GSP_H)),
            c if qls_like(c) => Some(Some(QLS_H)),
            _ => None,
        },
        required: false,
    },
    KeySpec {
        name: "observable",
        kind: Kind::Text,
        help: "Pauli sum for the measured observable",
        default: |c| match c {
            Command::Hamsim => Some(Some("Z")),
            Command::Gsp | Command::Qls => Some(Some("ZI")),
            _ => None,
        },
        required: false,
    },
    KeySpec {
        name: "state",
        kind: Kind::Text,
        help: "initial state (or b): product of 0 1 + - per qubit, or comma-separated real amplitudes",
        default: |c| match c {
            Command::Hamsim => Some(Some("0")),
            c if gsp_like(c) => Some(Some("+0")),
            c if qls_like(c) => Some(Some("00")),
            _ => None,
        },
        required: false,
    },
    KeySpec { name: "time", kind: Kind::Float, help: "evolution time", default: |c| (c == Command::Hamsim).then_some(Some("1")), required: false },
    KeySpec { name: "gap", kind: Kind::Float, help: "spectral gap lower bound", default: |c| gsp_like(c).then_some(Some("1")), required: false },
    KeySpec { name: "overlap", kind: Kind::Float, help: "lower bound on the ground-state overlap", default: |c| gsp_like(c).then_some(Some("0.6")), required: false },
    KeySpec { name: "e0", kind: Kind::Float, help: "ground-energy estimate", default: |c| gsp_like(c).then_some(Some("-0.01")), required: false },
    KeySpec { name: "eps_g", kind: Kind::Float, help: "precision of the ground-energy estimate", default: |c| gsp_like(c).then_some(Some("0.01")), required: false },
    KeySpec {
        name: "perturbation",
        kind: Kind::Text,
        help: "none, bound (largest tolerated per-unitary error) or a number",
        default: |c| (c == Command::Gsp).then_some(Some("none")),
        required: false,
    },
    KeySpec {
        name: "kappa",
        kind: Kind::Float,
        help: "condition number bound",
        default: |c| (qls_like(c) || c == Command::DecompCheck).then_some(Some(if c == Command::DecompCheck { "10" } else { "5" })),
        required: false,
    },
    KeySpec { name: "ancilla", kind: Kind::Text, help: "ring or gaussian", default: |c| (c == Command::AnalogQls).then_some(Some("ring")), required: false },
    KeySpec {
        name: "graph",
        kind: Kind::Text,
        help: "cycle:N, complete:N or file:<edge list>",
        default: |c| (c == Command::WalksSearch).then_some(Some("cycle:16")),
        required: false,
    },
    KeySpec { name: "marked", kind: Kind::Text, help: "comma-separated marked nodes", default: |c| (c == Command::WalksSearch).then_some(Some("0")), required: false },
    KeySpec { name: "algo", kind: Kind::Int, help: "1 (walk powers) or 2 (walk exponential)", default: |c| (c == Command::WalksSearch).then_some(Some("1")), required: false },
    KeySpec { name: "trials", kind: Kind::Int, help: "independent search runs", default: |c| (c == Command::WalksSearch).then_some(Some("2000")), required: false },
    KeySpec { name: "c_t", kind: Kind::Float, help: "T = c_t · hitting time", default: |c| (c == Command::WalksSearch).then_some(Some("1")), required: false },
    KeySpec { name: "big_t", kind: Kind::Float, help: "explicit T, overrides c_t", default: |c| (c == Command::WalksSearch).then_some(None), required: false },
    KeySpec {
        name: "kind",
        kind: Kind::Text,
        help: "gaussian, inverse, chebyshev or exp",
        default: |c| (c == Command::DecompCheck).then_some(Some("gaussian")),
        required: false,
    },
    KeySpec { name: "t", kind: Kind::Float, help: "filter time or power", default: |c| (c == Command::DecompCheck).then_some(Some("25")), required: false },
    KeySpec { name: "degree", kind: Kind::Int, help: "Chebyshev truncation degree", default: |c| (c == Command::DecompCheck).then_some(None), required: false },
    KeySpec { name: "points", kind: Kind::Int, help: "grid points of the scalar check", default: |c| (c == Command::DecompCheck).then_some(Some("2001")), required: false },
    KeySpec { name: "target", kind: Kind::Text, help: "command run at each sweep point", default: |c| (c == Command::Sweep).then_some(None), required: true },
    KeySpec { name: "axis", kind: Kind::Text, help: "key varied by the sweep", default: |c| (c == Command::Sweep).then_some(None), required: true },
    KeySpec { name: "values", kind: Kind::Text, help: "comma-separated sweep values", default: |c| (c == Command::Sweep).then_some(None), required: true },
];

pub fn key_spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

fn normalize_key(k: &str) -> String {
    k.trim().trim_start_matches("--").replace('-', "_")
}

fn check_value(spec: &KeySpec, value: &str) -> Result<()> {
    let bad = |what: &str| Error::Config(format!("key {} expects {what}, got {value:?}", spec.name));
    match spec.kind {
        Kind::Float => value.parse::<f64>().ok().filter(|v| v.is_finite()).map(|_| ()).ok_or_else(|| bad("a number")),
        Kind::Int => value.parse::<u64>().map(|_| ()).map_err(|_| bad("a non-negative integer")),
        Kind::Bool => match value {
            "true" | "false" => Ok(()),
            _ => Err(bad("true or false")),
        },
        Kind::Text => Ok(()),
    }
}

/// Parses `key=value` lines; '#' starts a comment line.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config(format!("config line {}: expected key=value", no + 1)))?;
        out.push((normalize_key(k), v.trim().to_string()));
    }
    Ok(out)
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    /// Every applicable key that has a value, after precedence.
    pub values: BTreeMap<String, String>,
    pub master_seed: u64,
    pub out: Option<String>,
    pub trace: bool,
}

fn merge_layer(layer: &[(String, String)], what: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (k, v) in layer {
        let k = normalize_key(k);
        match m.get(&k) {
            Some(prev) if prev != v => return Err(Error::Config(format!("{what} sets {k} twice ({prev:?} and {v:?})"))),
            _ => {
                m.insert(k, v.clone());
            }
        }
    }
    Ok(m)
}

/// Resolves flags over file values over defaults. Sweeps accept the keys of
/// their target command as well as their own.
pub fn parse_config(command: Command, flags: &[(String, String)], file: Option<&str>) -> Result<ExperimentConfig> {
    let flags = merge_layer(flags, "the command line")?;
    let file = match file {
        Some(text) => merge_layer(&parse_config_file(text)?, "the config file")?,
        None => BTreeMap::new(),
    };
    let mut scopes = vec![command];
    if command == Command::Sweep {
        let target = flags.get("target").or_else(|| file.get("target")).ok_or_else(|| Error::Config("sweep needs a target command".into()))?;
        let target: Command = target.parse()?;
        if target == Command::Sweep {
            return Err(Error::Config("a sweep cannot target another sweep".into()));
        }
        scopes.push(target);
    }
    let applies = |spec: &KeySpec| scopes.iter().any(|c| spec.applies_to(*c));
    for k in file.keys().chain(flags.keys()) {
        let spec = key_spec(k).ok_or_else(|| Error::Config(format!("unknown key {k:?}")))?;
        if !applies(spec) {
            return Err(Error::Config(format!("key {k:?} does not apply to {command}")));
        }
    }
    let mut values = BTreeMap::new();
    for spec in KEYS.iter().filter(|s| applies(s)) {
        let default = scopes.iter().rev().find_map(|c| (spec.default)(*c)).flatten();
        let v = flags.get(spec.name).or_else(|| file.get(spec.name)).cloned().or_else(|| default.map(str::to_string));
        match v {
            Some(v) => {
                check_value(spec, &v)?;
                values.insert(spec.name.to_string(), v);
            }
            None if spec.required => return Err(Error::Config(format!("missing required key {}", spec.name))),
            None => {}
        }
    }
    let master_seed = values["seed"].parse().expect("checked above");
    let out = values.get("out").cloned();
    let trace = values["trace"] == "true";
    if command == Command::Sweep {
        let axis = &values["axis"];
        let spec = key_spec(axis).filter(|s| s.applies_to(scopes[1])).ok_or_else(|| Error::Config(format!("sweep axis {axis:?} is not a key of {}", scopes[1])))?;
        for v in values["values"].split(',') {
            check_value(spec, v.trim())?;
        }
    }
    Ok(ExperimentConfig { command, values, master_seed, out, trace })
}

impl ExperimentConfig {
    pub fn text(&self, key: &str) -> Result<&str> {
        self.values.get(key).map(String::as_str).ok_or_else(|| Error::Config(format!("missing key {key}")))
    }

    pub fn float(&self, key: &str) -> Result<f64> {
        Ok(self.text(key)?.parse().expect("validated when parsed"))
    }

    pub fn int(&self, key: &str) -> Result<u64> {
        Ok(self.text(key)?.parse().expect("validated when parsed"))
    }

    pub fn opt_int(&self, key: &str) -> Option<u64> {
        self.values.get(key).map(|v| v.parse().expect("validated when parsed"))
    }

    pub fn opt_float(&self, key: &str) -> Option<f64> {
        self.values.get(key).map(|v| v.parse().expect("validated when parsed"))
    }

    /// Typed echo of the resolved values.
    pub fn echo(&self) -> BTreeMap<String, Value> {
        self.values
            .iter()
            .map(|(k, v)| {
                let typed = match key_spec(k).map(|s| s.kind) {
                    Some(Kind::Float) => serde_json::json!(v.parse::<f64>().expect("validated")),
                    Some(Kind::Int) => serde_json::json!(v.parse::<u64>().expect("validated")),
                    Some(Kind::Bool) => Value::Bool(v == "true"),
                    _ => Value::String(v.clone()),
                };
                (k.clone(), typed)
            })
            .collect()
    }

    /// Copy with one key replaced and re-validated.
    pub fn with_value(&self, key: &str, value: &str) -> Result<ExperimentConfig> {
        let spec = key_spec(key).ok_or_else(|| Error::Config(format!("unknown key {key:?}")))?;
        check_value(spec, value)?;
        let mut c = self.clone();
        c.values.insert(key.to_string(), value.to_string());
        if key == "seed" {
            c.master_seed = value.parse().expect("checked");
        }
        Ok(c)
    }
}
