//! Flat `key=value` run configuration.
//!
//! A document is one assignment per line with `#` comments. The same
//! grammar is used for `KEY=VALUE` command-line arguments, which override
//! keys from a file.

use crate::error::CliError;
use std::collections::HashMap;
use std::fmt;
use wgqed_core::{Boundary, LatticeSpec, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Bound1,
    Spectrum,
    TwoPhoton,
    Ladder,
    TwoAtom,
    Metaband,
    Selftest,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Rates,
        Command::Bound1,
        Command::Spectrum,
        Command::TwoPhoton,
        Command::Ladder,
        Command::TwoAtom,
        Command::Metaband,
        Command::Selftest,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Bound1 => "bound1",
            Command::Spectrum => "spectrum",
            Command::TwoPhoton => "twophoton",
            Command::Ladder => "ladder",
            Command::TwoAtom => "twoatom",
            Command::Metaband => "metaband",
            Command::Selftest => "selftest",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Unit of every energy-valued output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Units {
    #[default]
    TwoJ,
    J,
}

impl Units {
    pub fn name(self) -> &'static str {
        match self {
            Units::TwoJ => "2J",
            Units::J => "J",
        }
    }

    pub fn scale(self, j: f64) -> f64 {
        match self {
            Units::TwoJ => 2.0 * j,
            Units::J => j,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepField {
    J,
    Delta,
    G,
    GammaA,
    GammaC,
    Spacing,
}

impl SweepField {
    pub fn name(self) -> &'static str {
        match self {
            SweepField::J => "J",
            SweepField::Delta => "delta",
            SweepField::G => "g",
            SweepField::GammaA => "gamma_a",
            SweepField::GammaC => "gamma_c",
            SweepField::Spacing => "spacing",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [Self::J, Self::Delta, Self::G, Self::GammaA, Self::GammaC, Self::Spacing].into_iter().find(|f| f.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub field: SweepField,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    pub scale: Scale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let n = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                let t = i as f64 / n;
                match self.scale {
                    Scale::Linear => self.start + t * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + t * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

impl fmt::Display for Sweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scale = match self.scale {
            Scale::Linear => "linear",
            Scale::Log => "log",
        };
        write!(f, "{},{},{},{},{}", self.field.name(), self.start, self.stop, self.steps, scale)
    }
}

/// A fully validated run description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: SystemParams,
    pub units: Units,
    pub lattice: Option<LatticeSpec>,
    pub n_sites: Option<usize>,
    pub boundary: Boundary,
    pub atoms: Option<Vec<usize>>,
    pub n_atoms: Option<usize>,
    pub spacing: Option<usize>,
    pub sweep: Option<Sweep>,
    pub omega: Option<(f64, f64, usize)>,
    pub max_excitations: usize,
    pub d_range: (usize, usize),
    pub dx_range: (usize, usize),
    pub k: usize,
    pub threshold: f64,
    pub format: Format,
    pub output: Option<String>,
}

/// Where a key came from, for error messages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Position {
    pub source: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.source, self.line, self.column)
    }
}

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    value_pos: Position,
}

const KEYS: &[&str] = &[
    "command",
    "J",
    "delta",
    "g",
    "gamma_a",
    "gamma_c",
    "units",
    "n_sites",
    "boundary",
    "atoms",
    "n_atoms",
    "spacing",
    "sweep",
    "omega_min",
    "omega_max",
    "omega_steps",
    "max_excitations",
    "d_min",
    "d_max",
    "dx_min",
    "dx_max",
    "k",
    "format",
    "output",
    "threshold",
];

/// Raw assignments collected from one or more sources, later sources
/// overriding earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Document {
    entries: HashMap<String, Entry>,
    end: Option<Position>,
}

impl Document {
    /// Adds the assignments of `text`. Repeating a key inside one source
    /// is an error; a later source may override an earlier one.
    pub fn add_text(&mut self, source: &str, text: &str) -> Result<(), CliError> {
        let mut seen: HashMap<String, Position> = HashMap::new();
        let mut last_line = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            last_line = line;
            let content = raw.split('#').next().unwrap_or("");
            if content.trim().is_empty() {
                continue;
            }
            let lead = content.len() - content.trim_start().len();
            let pos = |byte: usize| Position { source: source.into(), line, column: raw[..byte].chars().count() + 1 };
            let Some(eq) = content.find('=') else {
                return Err(CliError::config(pos(lead), "expected `key=value`"));
            };
            let key = content[..eq].trim();
            let value = content[eq + 1..].trim();
            let key_pos = pos(lead);
            if key.is_empty() {
                return Err(CliError::config(key_pos, "missing key before `=`"));
            }
            if !KEYS.contains(&key) {
                return Err(CliError::config(key_pos, format!("unknown key `{key}`")));
            }
            if let Some(first) = seen.get(key) {
                return Err(CliError::config(key_pos, format!("duplicate key `{key}` (first set at {first})")));
            }
            let value_start = eq + 1 + (content[eq + 1..].len() - content[eq + 1..].trim_start().len());
            seen.insert(key.into(), key_pos);
            self.entries.insert(key.into(), Entry { value: value.into(), value_pos: pos(value_start) });
        }
        self.end = Some(Position { source: source.into(), line: last_line + 1, column: 1 });
        Ok(())
    }

    /// Adds `KEY=VALUE` command-line arguments; each is its own line.
    pub fn add_args(&mut self, args: &[String]) -> Result<(), CliError> {
        for (i, a) in args.iter().enumerate() {
            self.add_text(&format!("argument {}", i + 1), a)?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str, source: &str) -> Result<(), CliError> {
        self.add_text(source, &format!("{key}={value}"))
    }

    fn get(&self, key: &str) -> Option<&Entry> {
        self.entries.get(key)
    }

    fn missing(&self, key: &str) -> CliError {
        let pos = self.end.clone().unwrap_or(Position { source: "input".into(), line: 1, column: 1 });
        CliError::config(pos, format!("missing required key `{key}`"))
    }

    fn parse<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|_| {
                CliError::config(e.value_pos.clone(), format!("`{key}` expects {what}, got `{}`", e.value))
            }),
        }
    }

    fn float(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v: Option<f64> = self.parse(key, "a number")?;
        if let (Some(x), Some(e)) = (v, self.get(key)) {
            if !x.is_finite() {
                return Err(CliError::config(e.value_pos.clone(), format!("`{key}` must be finite")));
            }
        }
        Ok(v)
    }

    fn count(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.parse(key, "a non-negative integer")
    }

    fn choice<T: Copy>(&self, key: &str, options: &[(&str, T)]) -> Result<Option<T>, CliError> {
        let Some(e) = self.get(key) else { return Ok(None) };
        options.iter().find(|(n, _)| *n == e.value).map(|(_, v)| Some(*v)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
            CliError::config(
                e.value_pos.clone(),
                format!("`{key}` must be one of {}, got `{}`", names.join("|"), e.value),
            )
        })
    }

    fn invalid(&self, key: &str, msg: impl Into<String>) -> CliError {
        match self.get(key) {
            Some(e) => CliError::config(e.value_pos.clone(), msg),
            None => self.missing(key),
        }
    }

    /// Validates the collected keys into a [`RunConfig`].
    pub fn finish(&self) -> Result<RunConfig, CliError> {
        let command = match self.get("command") {
            None => return Err(self.missing("command")),
            Some(e) => Command::parse(&e.value).ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                CliError::config(
                    e.value_pos.clone(),
                    format!("unknown command `{}` (expected {})", e.value, names.join("|")),
                )
            })?,
        };
        let selftest = command == Command::Selftest;
        let required = |key: &str| -> Result<f64, CliError> {
            match self.float(key)? {
                Some(v) => Ok(v),
                None if selftest => Ok(0.0),
                None => Err(self.missing(key)),
            }
        };
        let j = required("J")?;
        let g = required("g")?;
        let delta = self.float("delta")?.unwrap_or(0.0);
        let gamma_a = self.float("gamma_a")?.unwrap_or(0.0);
        let gamma_c = self.float("gamma_c")?.unwrap_or(0.0);
        let params = SystemParams::new(j, delta, g).with_losses(gamma_a, gamma_c);
        for (key, v) in [("J", j), ("g", g), ("gamma_a", gamma_a), ("gamma_c", gamma_c)] {
            if v < 0.0 {
                return Err(self.invalid(key, format!("`{key}` must be non-negative")));
            }
        }
        let units = self.choice("units", &[("2J", Units::TwoJ), ("J", Units::J)])?.unwrap_or_default();
        if !selftest && j == 0.0 {
            return Err(self.invalid("J", format!("J = 0 leaves no energy unit for units={}", units.name())));
        }
        let boundary = self
            .choice("boundary", &[("periodic", Boundary::Periodic), ("open", Boundary::Open)])?
            .unwrap_or(Boundary::Periodic);
        let n_sites = self.count("n_sites")?;
        let atoms = match self.get("atoms") {
            None => None,
            Some(e) => {
                Some(e.value.split(',').map(|s| s.trim().parse::<usize>()).collect::<Result<Vec<_>, _>>().map_err(
                    |_| CliError::config(e.value_pos.clone(), "`atoms` expects comma-separated site indices"),
                )?)
            }
        };
        let n_atoms = self.count("n_atoms")?;
        let spacing = self.count("spacing")?;
        if spacing == Some(0) {
            return Err(self.invalid("spacing", "`spacing` must be at least 1"));
        }
        let lattice = match (n_sites, &atoms) {
            (Some(n), Some(a)) => {
                Some(LatticeSpec::new(n, boundary, a.clone()).map_err(|e| self.invalid("atoms", e.to_string()))?)
            }
            _ => None,
        };
        let sweep = self.sweep()?;
        if let Some(s) = &sweep {
            if s.field == SweepField::J && s.values().iter().any(|v| *v <= 0.0) {
                return Err(self.invalid("sweep", "a J sweep must stay positive"));
            }
        }
        let omega = match (self.float("omega_min")?, self.float("omega_max")?, self.count("omega_steps")?) {
            (None, None, None) => None,
            (Some(a), Some(b), Some(n)) => {
                if n < 2 || b <= a {
                    return Err(self.invalid("omega_steps", "need omega_min < omega_max and omega_steps ≥ 2"));
                }
                Some((a, b, n))
            }
            _ => return Err(self.invalid("omega_min", "omega_min, omega_max and omega_steps go together")),
        };
        let range = |lo: &str, hi: &str, default: (usize, usize)| -> Result<(usize, usize), CliError> {
            let a = self.count(lo)?.unwrap_or(default.0);
            let b = self.count(hi)?.unwrap_or(default.1.max(a));
            if a == 0 || b < a {
                return Err(self.invalid(lo, format!("need 1 ≤ {lo} ≤ {hi}")));
            }
            Ok((a, b))
        };
        let max_excitations = self.count("max_excitations")?.unwrap_or(3);
        if !(1..=6).contains(&max_excitations) {
            return Err(self.invalid("max_excitations", "`max_excitations` must be between 1 and 6"));
        }
        let k = self.count("k")?.unwrap_or(3);
        if k == 0 {
            return Err(self.invalid("k", "`k` must be at least 1"));
        }
        let threshold = self.float("threshold")?.unwrap_or(wgqed_core::markov::DEFAULT_THRESHOLD);
        let format = self.choice("format", &[("csv", Format::Csv), ("json", Format::Json)])?.unwrap_or_default();
        Ok(RunConfig {
            command,
            params,
            units,
            lattice,
            n_sites,
            boundary,
            atoms,
            n_atoms,
            spacing,
            sweep,
            omega,
            max_excitations,
            d_range: range("d_min", "d_max", (1, 10))?,
            dx_range: range("dx_min", "dx_max", (1, 12))?,
            k,
            threshold,
            format,
            output: self.get("output").map(|e| e.value.clone()),
        })
    }

    fn sweep(&self) -> Result<Option<Sweep>, CliError> {
        let Some(e) = self.get("sweep") else { return Ok(None) };
        let bad = |msg: String| CliError::config(e.value_pos.clone(), msg);
        let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
        let [name, start, stop, steps, scale] = parts.as_slice() else {
            return Err(bad("`sweep` expects name,start,stop,steps,linear|log".into()));
        };
        let field = SweepField::parse(name).ok_or_else(|| bad(format!("cannot sweep `{name}`")))?;
        let num = |s: &str| {
            s.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(format!("`{s}` is not a number")))
        };
        let (start, stop) = (num(start)?, num(stop)?);
        let steps: usize = steps.parse().map_err(|_| bad(format!("`{steps}` is not a step count")))?;
        if steps == 0 {
            return Err(bad("sweep needs at least one step".into()));
        }
        let scale = match *scale {
            "linear" => Scale::Linear,
            "log" => Scale::Log,
            s => return Err(bad(format!("sweep scale must be linear or log, got `{s}`"))),
        };
        if scale == Scale::Log && (start <= 0.0 || stop <= 0.0) {
            return Err(bad("a log sweep needs positive bounds".into()));
        }
        Ok(Some(Sweep { field, start, stop, steps, scale }))
    }
}

/// Parses a configuration document on its own.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    let mut doc = Document::default();
    doc.add_text("config", text)?;
    doc.finish()
}
