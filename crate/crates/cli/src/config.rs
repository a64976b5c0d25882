use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    SquidSpectrum,
    SquidTunnel,
    SquidWigner,
    TalbotScan,
    TalbotVisibility,
    BecCat,
    BecTau,
    Envariance,
    Darwinism,
    Chain,
    MacroTable,
}

impl Command {
    pub const ALL: [Command; 11] = [
        Command::SquidSpectrum,
        Command::SquidTunnel,
        Command::SquidWigner,
        Command::TalbotScan,
        Command::TalbotVisibility,
        Command::BecCat,
        Command::BecTau,
        Command::Envariance,
        Command::Darwinism,
        Command::Chain,
        Command::MacroTable,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::SquidSpectrum => "squid-spectrum",
            Command::SquidTunnel => "squid-tunnel",
            Command::SquidWigner => "squid-wigner",
            Command::TalbotScan => "talbot-scan",
            Command::TalbotVisibility => "talbot-visibility",
            Command::BecCat => "bec-cat",
            Command::BecTau => "bec-tau",
            Command::Envariance => "envariance",
            Command::Darwinism => "darwinism",
            Command::Chain => "chain",
            Command::MacroTable => "macro-table",
        }
    }

    /// Accepted parameters with their defaults.
    pub fn schema(self) -> Vec<ParamSpec> {
        use Kind::*;
        let squid = |c: f64| {
            vec![
                ParamSpec::real("c", c, Some(1.0), None),
                ParamSpec::real("beta_l", 1.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("i_c", 1.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("phi_ext", 0.5, None, None),
                ParamSpec::int("n_points", 1024, Some(256), Some(1 << 16)),
            ]
        };
        let mut s = match self {
            Command::SquidSpectrum => {
                let mut v = squid(200.0);
                v.push(ParamSpec::int("n_levels", 4, Some(2), Some(64)));
                v
            }
            Command::SquidTunnel => {
                let mut v = squid(200.0);
                v.extend([
                    ParamSpec::choice("method", "two-level", &["two-level", "full"]),
                    ParamSpec::real("gamma_ratio", 0.0, Some(0.0), None),
                    ParamSpec::real("t_max", 2.0 * std::f64::consts::PI, Some(0.0), None),
                    ParamSpec::int("n_times", 101, Some(2), Some(100_000)),
                    ParamSpec::int("n_levels", 8, Some(2), Some(64)),
                ]);
                v
            }
            Command::SquidWigner => {
                let mut v = squid(800.0);
                v.extend([
                    ParamSpec::real("gamma_ratio", 10.0, Some(0.0), None),
                    ParamSpec::real("gamma_t_max", 5.0, Some(0.0), None),
                    ParamSpec::int("n_snapshots", 6, Some(1), Some(1000)),
                    ParamSpec::int("nx", 97, Some(2), Some(4096)),
                    ParamSpec::int("np", 96, Some(2), Some(4096)),
                ]);
                v
            }
            Command::TalbotScan => vec![
                ParamSpec::real("mass_amu", 840.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("velocity", 150.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("d", 1e-6, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("open_fraction", 0.5, Some(f64::MIN_POSITIVE), Some(1.0)),
                ParamSpec::int("n_slits", 32, Some(16), Some(4096)),
                ParamSpec::real("l_over_talbot", 1.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::int("n_scan", 64, Some(4), Some(100_000)),
                ParamSpec::int("n_angles", 32, Some(1), Some(4096)),
                ParamSpec::real("spread_factor", 1.0, Some(0.0), None),
                ParamSpec::choice("model", "wave", &["wave", "ray"]),
                ParamSpec::int("samples_per_period", 64, Some(8), Some(4096)),
                ParamSpec::int("pad_factor", 4, Some(1), Some(64)),
            ],
            Command::TalbotVisibility => vec![
                ParamSpec::real("v0", 1.0, Some(0.0), Some(1.0)),
                ParamSpec::real("temperature", 300.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("sigma_eff", 1e-18, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("l", 0.38, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("p_max_over_p0", 5.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::int("n_pressures", 51, Some(2), Some(1_000_000)),
            ],
            Command::BecCat => vec![
                ParamSpec::int("n_atoms", 10, Some(1), Some(decohere_core::bec::MAX_ATOMS as i64)),
                ParamSpec::int("n", 0, Some(0), None),
                ParamSpec::real("phi", 0.0, None, None),
                ParamSpec::real("kappa", 1.0, Some(0.0), None),
                ParamSpec::real("omega", 0.0, None, None),
                ParamSpec::real("t_max", 1.0, Some(0.0), None),
                ParamSpec::int("n_times", 11, Some(2), Some(1_000_000)),
            ],
            Command::BecTau => vec![
                ParamSpec::real("scattering_length", 5.3e-9, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("ref_n_nc", 10.0, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("ref_n", 1e3, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("ref_tau_d", 1e-3, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("n_nc", 1e4, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("n", 1e7, Some(f64::MIN_POSITIVE), None),
                ParamSpec::int("n_sweep", 9, Some(2), Some(100_000)),
            ],
            Command::Envariance => vec![ParamSpec { key: "weights", kind: Text, default: Value::Text("1/3,2/3".into()), min: None, max: None }],
            Command::Darwinism => vec![
                ParamSpec::int("n_fragments", 8, Some(1), Some(18)),
                ParamSpec::real("record_overlap", 0.0, Some(0.0), Some(1.0)),
                ParamSpec::int("max_size", 8, Some(1), Some(18)),
            ],
            Command::Chain => vec![
                ParamSpec::real("eps_photon", 0.5, Some(0.0), Some(1.0)),
                ParamSpec::real("eps_rhodopsin", 0.5, Some(0.0), Some(1.0)),
                ParamSpec::real("eps_neurons", 0.5, Some(0.0), Some(1.0)),
                ParamSpec::real("tau", decohere_core::relstate::NEURON_TAU_SECONDS, Some(f64::MIN_POSITIVE), None),
                ParamSpec::real("t_max", 1e-18, Some(0.0), None),
                ParamSpec::int("n_times", 11, Some(2), Some(1_000_000)),
            ],
            Command::MacroTable => vec![],
        };
        s.sort_by_key(|p| p.key);
        s
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::param("command", format!("unknown command {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(CliError::param("format", format!("expected csv or json, got {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Real(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match self {
            Value::Int(i) => *i as f64,
            Value::Real(x) => *x,
            Value::Text(_) => f64::NAN,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(x) => write!(f, "{x:e}"),
            Value::Text(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Kind {
    Real,
    Int,
    Text,
    Choice(&'static [&'static str]),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamSpec {
    pub key: &'static str,
    pub kind: Kind,
    pub default: Value,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

impl ParamSpec {
    fn real(key: &'static str, default: f64, min: Option<f64>, max: Option<f64>) -> Self {
        Self { key, kind: Kind::Real, default: Value::Real(default), min, max }
    }

    fn int(key: &'static str, default: i64, min: Option<i64>, max: Option<i64>) -> Self {
        Self { key, kind: Kind::Int, default: Value::Int(default), min: min.map(|m| m as f64), max: max.map(|m| m as f64) }
    }

    fn choice(key: &'static str, default: &str, options: &'static [&'static str]) -> Self {
        Self { key, kind: Kind::Choice(options), default: Value::Text(default.into()), min: None, max: None }
    }

    fn parse_text(&self, raw: &str) -> Result<Value, CliError> {
        let raw = raw.trim();
        let v = match self.kind {
            Kind::Real => Value::Real(raw.parse().map_err(|_| CliError::param(self.key, format!("expected a real number, got {raw:?}")))?),
            Kind::Int => Value::Int(raw.parse().map_err(|_| CliError::param(self.key, format!("expected an integer, got {raw:?}")))?),
            Kind::Text | Kind::Choice(_) => Value::Text(raw.to_string()),
        };
        self.check(v)
    }

    fn parse_toml(&self, raw: &toml::Value) -> Result<Value, CliError> {
        let v = match (self.kind, raw) {
            (Kind::Real, toml::Value::Float(x)) => Value::Real(*x),
            (Kind::Real, toml::Value::Integer(i)) => Value::Real(*i as f64),
            (Kind::Int, toml::Value::Integer(i)) => Value::Int(*i),
            (Kind::Text | Kind::Choice(_), toml::Value::String(s)) => Value::Text(s.clone()),
            _ => return Err(CliError::param(self.key, format!("wrong type: {raw}"))),
        };
        self.check(v)
    }

    fn check(&self, v: Value) -> Result<Value, CliError> {
        if let Kind::Choice(options) = self.kind {
            if let Value::Text(s) = &v {
                if !options.contains(&s.as_str()) {
                    return Err(CliError::param(self.key, format!("{s:?} is not one of {}", options.join(", "))));
                }
            }
        }
        if matches!(self.kind, Kind::Real | Kind::Int) {
            let x = v.as_f64();
            if !x.is_finite() {
                return Err(CliError::param(self.key, "must be finite"));
            }
            if let Some(min) = self.min {
                if x < min {
                    return Err(CliError::param(self.key, format!("{v} is out of range (minimum {})", Value::fmt_bound(min, self.kind))));
                }
            }
            if let Some(max) = self.max {
                if x > max {
                    return Err(CliError::param(self.key, format!("{v} is out of range (maximum {})", Value::fmt_bound(max, self.kind))));
                }
            }
        }
        Ok(v)
    }
}

impl Value {
    fn fmt_bound(x: f64, kind: Kind) -> String {
        if kind == Kind::Int {
            format!("{}", x as i64)
        } else {
            format!("{x:e}")
        }
    }
}

/// Fully resolved run: command, every parameter including defaults, output
/// format and seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub parameters: BTreeMap<String, Value>,
    /// Destination file; stdout when absent. Not part of the echo.
    #[serde(skip)]
    pub output_path: Option<String>,
    pub format: Format,
    pub seed: u64,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            parameters: command.schema().into_iter().map(|p| (p.key.to_string(), p.default)).collect(),
            output_path: None,
            format: Format::Csv,
            seed: 0,
        }
    }

    pub fn real(&self, key: &str) -> f64 {
        self.parameters[key].as_f64()
    }

    pub fn int(&self, key: &str) -> i64 {
        match self.parameters[key] {
            Value::Int(i) => i,
            _ => unreachable!("schema guarantees an integer for {key}"),
        }
    }

    pub fn usize(&self, key: &str) -> usize {
        self.int(key) as usize
    }

    pub fn text(&self, key: &str) -> &str {
        match &self.parameters[key] {
            Value::Text(s) => s,
            _ => unreachable!("schema guarantees text for {key}"),
        }
    }

    /// Replaces one parameter after schema and range checks.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), CliError> {
        match key {
            "format" => self.format = raw.trim().parse()?,
            "seed" => self.seed = raw.trim().parse().map_err(|_| CliError::param("seed", format!("expected a non-negative integer, got {raw:?}")))?,
            "output_path" => self.output_path = Some(raw.to_string()),
            _ => {
                let spec = self.spec(key)?;
                let v = spec.parse_text(raw)?;
                self.parameters.insert(key.to_string(), v);
            }
        }
        Ok(())
    }

    fn spec(&self, key: &str) -> Result<ParamSpec, CliError> {
        self.command
            .schema()
            .into_iter()
            .find(|p| p.key == key)
            .ok_or_else(|| CliError::param(key, format!("unknown key for {}", self.command)))
    }
}

/// Raw inputs of one invocation, in increasing precedence: config file,
/// `--set` overrides, dedicated flags.
#[derive(Clone, Debug, Default)]
pub struct Invocation {
    pub command: Option<Command>,
    pub config_text: Option<String>,
    pub overrides: Vec<String>,
    pub out: Option<String>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

impl Invocation {
    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let table: toml::Table = match &self.config_text {
            Some(text) => text.parse().map_err(|e: toml::de::Error| CliError::param("config", format!("parse error: {}", e.message())))?,
            None => toml::Table::new(),
        };
        let file_command = match table.get("command") {
            Some(toml::Value::String(s)) => Some(s.parse::<Command>()?),
            Some(other) => return Err(CliError::param("command", format!("wrong type: {other}"))),
            None => None,
        };
        let command = match (self.command, file_command) {
            (Some(a), Some(b)) if a != b => return Err(CliError::param("command", format!("config file is for {b}, not {a}"))),
            (Some(a), _) | (None, Some(a)) => a,
            (None, None) => return Err(CliError::param("command", "no command given")),
        };
        let mut cfg = RunConfig::defaults(command);
        for (key, raw) in &table {
            match key.as_str() {
                "command" => {}
                "format" | "output_path" => match raw {
                    toml::Value::String(s) => cfg.set(key, s)?,
                    _ => return Err(CliError::param(key, format!("wrong type: {raw}"))),
                },
                "seed" => match raw {
                    toml::Value::Integer(i) if *i >= 0 => cfg.seed = *i as u64,
                    _ => return Err(CliError::param(key, format!("expected a non-negative integer, got {raw}"))),
                },
                _ => {
                    let v = cfg.spec(key)?.parse_toml(raw)?;
                    cfg.parameters.insert(key.clone(), v);
                }
            }
        }
        for ov in &self.overrides {
            let (key, raw) = ov.split_once('=').ok_or_else(|| CliError::param(ov, "override must look like key=value"))?;
            cfg.set(key.trim(), raw)?;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inv(cmd: Command, text: &str, sets: &[&str]) -> Invocation {
        Invocation { command: Some(cmd), config_text: Some(text.into()), overrides: sets.iter().map(|s| s.to_string()).collect(), ..Default::default() }
    }

    #[test]
    fn overrides_win() {
        let cfg = inv(Command::SquidSpectrum, "c = 400.0\nn_points = 512\n", &["c=800"]).resolve().unwrap();
        assert_eq!(cfg.real("c"), 800.0);
        assert_eq!(cfg.usize("n_points"), 512);
        assert_eq!(cfg.real("beta_l"), 1.0);
    }

    #[test]
    fn unknown_key_named() {
        let err = inv(Command::SquidSpectrum, "cc = 1.0\n", &[]).resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("cc"));
    }

    #[test]
    fn n_points_range() {
        let err = inv(Command::SquidTunnel, "n_points = 10\n", &[]).resolve().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("n_points") && msg.contains("minimum 256"), "{msg}");
    }

    #[test]
    fn command_conflict() {
        let err = inv(Command::Chain, "command = \"bec-cat\"\n", &[]).resolve().unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let cfg = Invocation { config_text: Some("command = \"bec-cat\"\n".into()), ..Default::default() }.resolve().unwrap();
        assert_eq!(cfg.command, Command::BecCat);
    }

    #[test]
    fn names_round_trip() {
        for c in Command::ALL {
            assert_eq!(c.name().parse::<Command>().unwrap(), c);
            assert_eq!(serde_json::to_string(&c).unwrap(), format!("\"{}\"", c.name()));
        }
    }
}
