//! Configuration files, time-series CSV, raw field dumps and regression pins.
//!
//! # Configuration grammar
//!
//! One `section.key = value` per line; `#` starts a comment; blank lines are
//! ignored. Unknown and repeated keys are errors. Every key is optional:
//!
//! | key | default | meaning |
//! |-----|---------|---------|
//! | `grid.half_extent` | `110` | grid covers `[−X, X]²` |
//! | `grid.n` | `881` | nodes per axis, odd |
//! | `time.T_final` | `100` | final time |
//! | `time.cfl_safety` | `0.9` | fraction of `dx/√2` |
//! | `time.sample_every` | `4` | steps between records |
//! | `damping.kind` | `localized` | `localized`, `constant` or `zero` |
//! | `damping.eps0` | `1` | damping floor `ε₀` |
//! | `damping.L` | `4` | activation radius |
//! | `damping.ramp_width` | `1` | ramp width `δ` |
//! | `damping.c` | `1` | value of the `constant` kind |
//! | `data.u0` | `0,0,2,1` | bumps `x,y,radius,amplitude; …` |
//! | `data.u1` | `0.5,0,1.5,1` | same, for the velocity |
//! | `data.R` | `2` | declared support radius |
//! | `rates.window` | `20,100` | fit window `t₀,t₁` |
//! | `rates.model` | `log-corrected` | `pure-power`, `log-corrected`, `log-growth` |
//! | `multiplier.k` | `auto` | `auto` or a number `> 3` |
//! | `potential.p` | `1.5` | exponent `p ∈ [1, 2)` of the near-field bound |
//! | `poincare.rho` | `1` | radius of the Poincaré ratio |
//! | `poincare.samples` | `1000` | random fields per estimate |
//! | `seeds.rng` | `1` | seed of the Poincaré sampler |

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::geometry::{make_damping, Bump, DampingProfile, Grid2D, InitialData, ScalarField};
use crate::rates::{Model, Window};
use crate::solver::stable_dt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingChoice {
    Localized,
    Constant,
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KChoice {
    Auto,
    Fixed(f64),
}

/// A fully specified experiment. Build with [`ExperimentConfig::default`],
/// [`parse_config`] or [`load_config`], then [`ExperimentConfig::set`] for
/// overrides and [`ExperimentConfig::validate`] before use.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub half_extent: f64,
    pub n: usize,
    pub t_final: f64,
    pub cfl_safety: f64,
    pub sample_every: usize,
    pub damping: DampingChoice,
    pub eps0: f64,
    pub activation_radius: f64,
    pub ramp_width: f64,
    pub damping_c: f64,
    pub u0: Vec<Bump>,
    pub u1: Vec<Bump>,
    pub support_radius: f64,
    pub window: (f64, f64),
    pub model: Model,
    pub k: KChoice,
    pub p: f64,
    pub poincare_rho: f64,
    pub poincare_samples: usize,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            half_extent: 110.0,
            n: 881,
            t_final: 100.0,
            cfl_safety: 0.9,
            sample_every: 4,
            damping: DampingChoice::Localized,
            eps0: 1.0,
            activation_radius: 4.0,
            ramp_width: 1.0,
            damping_c: 1.0,
            u0: vec![Bump::new((0.0, 0.0), 2.0, 1.0)],
            u1: vec![Bump::new((0.5, 0.0), 1.5, 1.0)],
            support_radius: 2.0,
            window: (20.0, 100.0),
            model: Model::LogCorrected,
            k: KChoice::Auto,
            p: 1.5,
            poincare_rho: 1.0,
            poincare_samples: 1000,
            seed: 1,
        }
    }
}

/// Every accepted key, in documentation order.
pub const CONFIG_KEYS: &[&str] = &[
    "grid.half_extent",
    "grid.n",
    "time.T_final",
    "time.cfl_safety",
    "time.sample_every",
    "damping.kind",
    "damping.eps0",
    "damping.L",
    "damping.ramp_width",
    "damping.c",
    "data.u0",
    "data.u1",
    "data.R",
    "rates.window",
    "rates.model",
    "multiplier.k",
    "potential.p",
    "poincare.rho",
    "poincare.samples",
    "seeds.rng",
];

fn cfg_err(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| cfg_err(key, format!("cannot parse `{value}`")))
}

fn parse_bumps(key: &str, value: &str) -> Result<Vec<Bump>> {
    let value = value.trim();
    if value.is_empty() || value == "none" {
        return Ok(Vec::new());
    }
    value
        .split(';')
        .map(|item| {
            let parts: Vec<&str> = item.split(',').collect();
            if parts.len() != 4 {
                return Err(cfg_err(key, format!("bump `{}` needs x,y,radius,amplitude", item.trim())));
            }
            let v: Vec<f64> = parts.iter().map(|p| num(key, p)).collect::<Result<_>>()?;
            Ok(Bump::new((v[0], v[1]), v[2], v[3]))
        })
        .collect()
}

fn format_bumps(bumps: &[Bump]) -> String {
    if bumps.is_empty() {
        return "none".into();
    }
    bumps
        .iter()
        .map(|b| format!("{},{},{},{}", b.center.0, b.center.1, b.radius, b.amplitude))
        .collect::<Vec<_>>()
        .join("; ")
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "grid.half_extent" => self.half_extent = num(key, v)?,
            "grid.n" => self.n = num(key, v)?,
            "time.T_final" => self.t_final = num(key, v)?,
            "time.cfl_safety" => self.cfl_safety = num(key, v)?,
            "time.sample_every" => self.sample_every = num(key, v)?,
            "damping.kind" => {
                self.damping = match v {
                    "localized" => DampingChoice::Localized,
                    "constant" => DampingChoice::Constant,
                    "zero" => DampingChoice::Zero,
                    other => return Err(cfg_err(key, format!("unknown damping kind `{other}`"))),
                }
            }
            "damping.eps0" => self.eps0 = num(key, v)?,
            "damping.L" => self.activation_radius = num(key, v)?,
            "damping.ramp_width" => self.ramp_width = num(key, v)?,
            "damping.c" => self.damping_c = num(key, v)?,
            "data.u0" => self.u0 = parse_bumps(key, v)?,
            "data.u1" => self.u1 = parse_bumps(key, v)?,
            "data.R" => self.support_radius = num(key, v)?,
            "rates.window" => {
                let parts: Vec<&str> = v.split(',').collect();
                if parts.len() != 2 {
                    return Err(cfg_err(key, "expected `t0,t1`"));
                }
                self.window = (num(key, parts[0])?, num(key, parts[1])?);
            }
            "rates.model" => self.model = v.parse().map_err(|e: Error| cfg_err(key, e.to_string()))?,
            "multiplier.k" => {
                self.k = if v == "auto" {
                    KChoice::Auto
                } else {
                    KChoice::Fixed(num(key, v)?)
                }
            }
            "potential.p" => self.p = num(key, v)?,
            "poincare.rho" => self.poincare_rho = num(key, v)?,
            "poincare.samples" => self.poincare_samples = num(key, v)?,
            "seeds.rng" => self.seed = num(key, v)?,
            _ => return Err(cfg_err(key, "unknown key")),
        }
        Ok(())
    }

    /// Checks every invariant, naming the offending key.
    pub fn validate(&self) -> Result<()> {
        let grid = self.grid()?;
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(cfg_err("time.T_final", "must be finite and >= 0"));
        }
        stable_dt(&grid, self.cfl_safety).map_err(|e| cfg_err("time.cfl_safety", e.to_string()))?;
        if self.sample_every == 0 {
            return Err(cfg_err("time.sample_every", "must be >= 1"));
        }
        if let Err(e) = self.damping_profile() {
            let key = if !(self.activation_radius > 0.0) {
                "damping.L"
            } else if self.damping == DampingChoice::Constant {
                "damping.c"
            } else if !(self.eps0 > 0.0) {
                "damping.eps0"
            } else {
                "damping.ramp_width"
            };
            return Err(cfg_err(key, e.to_string()));
        }
        if !(self.support_radius > 0.0) {
            return Err(cfg_err("data.R", "must be positive"));
        }
        for (key, bumps) in [("data.u0", &self.u0), ("data.u1", &self.u1)] {
            for b in bumps {
                if !(b.radius > 0.0 && b.amplitude.is_finite()) {
                    return Err(cfg_err(key, "bump radius must be positive"));
                }
                if b.reach() > self.support_radius * (1.0 + 1e-12) {
                    return Err(cfg_err(
                        key,
                        format!("bump reaches |x| = {} beyond R = {}", b.reach(), self.support_radius),
                    ));
                }
            }
        }
        let reach = self.support_radius + self.t_final + 4.0 * grid.dx();
        if reach > self.half_extent {
            return Err(cfg_err(
                "grid.half_extent",
                format!("R + T + 4dx = {reach} exceeds the half extent"),
            ));
        }
        Window::new(self.window.0, self.window.1).map_err(|e| cfg_err("rates.window", e.to_string()))?;
        if let KChoice::Fixed(k) = self.k {
            if !(k > 3.0) {
                return Err(cfg_err("multiplier.k", "must be > 3 or `auto`"));
            }
        }
        if !(1.0..2.0).contains(&self.p) {
            return Err(cfg_err("potential.p", "must lie in [1, 2)"));
        }
        if !(self.poincare_rho > 0.0) {
            return Err(cfg_err("poincare.rho", "must be positive"));
        }
        if self.poincare_samples == 0 {
            return Err(cfg_err("poincare.samples", "must be >= 1"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<Grid2D> {
        Grid2D::new(self.half_extent, self.n).map_err(|e| {
            let key = if self.n % 2 == 0 || self.n < 3 {
                "grid.n"
            } else {
                "grid.half_extent"
            };
            cfg_err(key, e.to_string())
        })
    }

    pub fn dt(&self) -> Result<f64> {
        stable_dt(&self.grid()?, self.cfl_safety)
    }

    pub fn damping_profile(&self) -> Result<DampingProfile> {
        match self.damping {
            DampingChoice::Localized => {
                DampingProfile::localized(self.eps0, self.activation_radius, self.ramp_width)
            }
            DampingChoice::Constant => DampingProfile::constant(self.damping_c, self.activation_radius),
            DampingChoice::Zero => DampingProfile::zero(self.eps0, self.activation_radius),
        }
    }

    pub fn damping_field(&self) -> Result<ScalarField> {
        make_damping(&self.damping_profile()?, &self.grid()?)
    }

    pub fn initial_data(&self) -> Result<InitialData> {
        InitialData::from_bumps(&self.grid()?, &self.u0, &self.u1, self.support_radius)
    }

    pub fn window(&self) -> Result<Window> {
        Window::new(self.window.0, self.window.1)
    }

    /// The configuration in the file grammar, every key spelled out.
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "grid.half_extent" => self.half_extent.to_string(),
            "grid.n" => self.n.to_string(),
            "time.T_final" => self.t_final.to_string(),
            "time.cfl_safety" => self.cfl_safety.to_string(),
            "time.sample_every" => self.sample_every.to_string(),
            "damping.kind" => match self.damping {
                DampingChoice::Localized => "localized",
                DampingChoice::Constant => "constant",
                DampingChoice::Zero => "zero",
            }
            .into(),
            "damping.eps0" => self.eps0.to_string(),
            "damping.L" => self.activation_radius.to_string(),
            "damping.ramp_width" => self.ramp_width.to_string(),
            "damping.c" => self.damping_c.to_string(),
            "data.u0" => format_bumps(&self.u0),
            "data.u1" => format_bumps(&self.u1),
            "data.R" => self.support_radius.to_string(),
            "rates.window" => format!("{},{}", self.window.0, self.window.1),
            "rates.model" => self.model.to_string(),
            "multiplier.k" => match self.k {
                KChoice::Auto => "auto".into(),
                KChoice::Fixed(k) => k.to_string(),
            },
            "potential.p" => self.p.to_string(),
            "poincare.rho" => self.poincare_rho.to_string(),
            "poincare.samples" => self.poincare_samples.to_string(),
            "seeds.rng" => self.seed.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }
}

/// Parses config text on top of the defaults and validates the result.
/// `path` only labels errors.
pub fn parse_config(text: &str, path: &Path) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    apply_config_text(&mut cfg, text, path)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Applies the keys set in `text` to `cfg` without validating.
pub fn apply_config_text(cfg: &mut ExperimentConfig, text: &str, path: &Path) -> Result<()> {
    let mut seen: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let parse_err = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: line_no,
            msg,
        };
        let Some((key, value)) = line.split_once('=') else {
            return Err(parse_err(format!("expected `section.key = value`, got `{line}`")));
        };
        let key = key.trim();
        if !CONFIG_KEYS.contains(&key) {
            return Err(parse_err(format!("unknown key `{key}`")));
        }
        if let Some((first, _)) = seen.get(key) {
            return Err(parse_err(format!("key `{key}` already set on line {first}")));
        }
        seen.insert(key.to_string(), (line_no, value.trim().to_string()));
    }
    for (key, (line, value)) in &seen {
        cfg.set(key, value).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: *line,
            msg: e.to_string(),
        })?;
    }
    Ok(())
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_config(&text, path)
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:e}")
}

/// Time series as CSV with the fixed header and LF line endings.
pub fn records_to_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(64 + records.len() * 220);
    s.push_str(DiagnosticsRecord::HEADER);
    s.push('\n');
    for r in records {
        let row: Vec<String> = r.to_array().iter().map(|v| format_f64(*v)).collect();
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

pub fn write_records(records: &[DiagnosticsRecord], path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, records_to_csv(records))?;
    Ok(())
}

pub fn parse_records(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == DiagnosticsRecord::HEADER => {}
        other => return Err(Error::Format(format!("unexpected CSV header {other:?}"))),
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("CSV row {}: {e}", i + 2)))?;
            let arr: [f64; 11] = vals
                .try_into()
                .map_err(|_| Error::Format(format!("CSV row {} does not have 11 columns", i + 2)))?;
            Ok(DiagnosticsRecord::from_array(arr))
        })
        .collect()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<DiagnosticsRecord>> {
    parse_records(&fs::read_to_string(path)?)
}

/// Streams records to a CSV file as a run produces them.
pub struct CsvSink {
    out: std::io::BufWriter<fs::File>,
}

impl CsvSink {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let mut out = std::io::BufWriter::new(fs::File::create(path)?);
        writeln!(out, "{}", DiagnosticsRecord::HEADER)?;
        Ok(Self { out })
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

impl crate::solver::RecordSink for CsvSink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        let row: Vec<String> = rec.to_array().iter().map(|v| format_f64(*v)).collect();
        writeln!(self.out, "{}", row.join(","))?;
        Ok(())
    }
}

/// Header line plus `n²` little-endian `f64`, row-major.
pub fn field_to_bytes(field: &ScalarField) -> Vec<u8> {
    let g = field.grid();
    let header = format!(
        "n={} half_extent={} dtype=f64 order=row-major\n",
        g.n(),
        g.half_extent()
    );
    let mut out = Vec::with_capacity(header.len() + 8 * g.len());
    out.extend_from_slice(header.as_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<ScalarField> {
    let nl = bytes
        .iter()
        .position(|b| *b == b'\n')
        .ok_or_else(|| Error::Format("missing header line".into()))?;
    let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("header is not UTF-8".into()))?;
    let mut n = None;
    let mut half_extent = None;
    for tok in header.split_whitespace() {
        match tok.split_once('=') {
            Some(("n", v)) => n = v.parse::<usize>().ok(),
            Some(("half_extent", v)) => half_extent = v.parse::<f64>().ok(),
            Some(("dtype", "f64")) | Some(("order", "row-major")) => {}
            _ => return Err(Error::Format(format!("unexpected header token `{tok}`"))),
        }
    }
    let (Some(n), Some(x)) = (n, half_extent) else {
        return Err(Error::Format(format!("incomplete header `{header}`")));
    };
    let payload = &bytes[nl + 1..];
    if payload.len() != 8 * n * n {
        return Err(Error::Format(format!(
            "payload has {} bytes, expected {}",
            payload.len(),
            8 * n * n
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    ScalarField::from_values(Grid2D::new(x, n)?, values)
}

pub fn dump_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, field_to_bytes(field))?;
    Ok(())
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    field_from_bytes(&fs::read(path)?)
}

/// Outcome of comparing a value with its pin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PinStatus {
    /// No pin existed; the value was stored.
    Created,
    Matched { pinned: f64 },
    Mismatch { pinned: f64 },
}

impl PinStatus {
    pub fn ok(&self) -> bool {
        !matches!(self, PinStatus::Mismatch { .. })
    }
}

/// `key,value` regression pins: the first run stores, later runs compare.
#[derive(Debug, Clone)]
pub struct PinStore {
    path: PathBuf,
    pins: BTreeMap<String, f64>,
}

impl PinStore {
    /// Opens `path`, or starts empty when it does not exist.
    pub fn open(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let mut pins = BTreeMap::new();
        if path.exists() {
            let text = fs::read_to_string(&path)?;
            for (i, line) in text.lines().enumerate() {
                if i == 0 && line == "key,value" {
                    continue;
                }
                if line.trim().is_empty() {
                    continue;
                }
                let (k, v) = line
                    .split_once(',')
                    .ok_or_else(|| Error::Format(format!("pin line {} is not `key,value`", i + 1)))?;
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::Format(format!("pin `{k}` has non-numeric value `{v}`")))?;
                pins.insert(k.to_string(), v);
            }
        }
        Ok(Self { path, pins })
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.pins.get(key).copied()
    }

    /// Compares `value` with the pin under `key` within relative tolerance
    /// `rel_tol`, storing it if absent.
    pub fn check_or_insert(&mut self, key: &str, value: f64, rel_tol: f64) -> PinStatus {
        match self.pins.get(key) {
            None => {
                self.pins.insert(key.to_string(), value);
                PinStatus::Created
            }
            Some(&pinned) => {
                if (value - pinned).abs() <= rel_tol * pinned.abs() {
                    PinStatus::Matched { pinned }
                } else {
                    PinStatus::Mismatch { pinned }
                }
            }
        }
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("key,value\n");
        for (k, v) in &self.pins {
            let _ = writeln!(s, "{k},{}", format_f64(*v));
        }
        s
    }

    pub fn save(&self) -> Result<()> {
        fs::write(&self.path, self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test.cfg")
    }

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(parse_config("", p()).unwrap(), ExperimentConfig::default());
        assert_eq!(parse_config("# only a comment\n\n", p()).unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn missing_eps0_defaults_to_one() {
        let c = parse_config("damping.kind = localized\n", p()).unwrap();
        assert_eq!(c.eps0, 1.0);
    }

    #[test]
    fn even_n_names_the_key() {
        match parse_config("grid.n = 4\n", p()) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "grid.n"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_config("grid.n = 881\n\ngird.n = 3\n", p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_config("grid.n = 881\ngrid.n = 881\n", p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_config("grid.n 881\n", p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
        match parse_config("time.T_final = soon\n", p()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn key_order_does_not_matter() {
        let a = "grid.n = 441\ngrid.half_extent = 60\ntime.T_final = 50\nrates.window = 10,40\n";
        let b = "rates.window = 10,40\ntime.T_final = 50 # trailing comment\ngrid.half_extent = 60\ngrid.n = 441\n";
        assert_eq!(parse_config(a, p()).unwrap(), parse_config(b, p()).unwrap());
    }

    #[test]
    fn invariants_name_their_keys() {
        let cases = [
            ("time.T_final = 200\n", "grid.half_extent"),
            ("data.u0 = 1,0,2,1\n", "data.u0"),
            ("rates.window = 2,10\n", "rates.window"),
            ("multiplier.k = 2\n", "multiplier.k"),
            ("potential.p = 2\n", "potential.p"),
            ("time.cfl_safety = 1.2\n", "time.cfl_safety"),
            ("damping.ramp_width = 5\n", "damping.ramp_width"),
            ("damping.eps0 = -1\n", "damping.eps0"),
        ];
        for (text, want) in cases {
            match parse_config(text, p()) {
                Err(Error::Config { key, .. }) => assert_eq!(key, want, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn config_text_round_trips() {
        let mut c = ExperimentConfig::default();
        c.set("data.u1", "0.1,-0.2,1.2,0.7; -0.3,0.3,0.5,-1").unwrap();
        c.set("multiplier.k", "16").unwrap();
        c.set("damping.kind", "constant").unwrap();
        let back = parse_config(&c.to_config_string(), p()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn csv_shapes() {
        assert_eq!(records_to_csv(&[]), format!("{}\n", DiagnosticsRecord::HEADER));
        let r = DiagnosticsRecord::from_array([0.0; 11]);
        let text = records_to_csv(&[r]);
        assert_eq!(text.lines().count(), 2);
        assert!(!text.contains('\r'));
        assert_eq!(parse_records(&text).unwrap(), vec![r]);
    }

    #[test]
    fn zero_field_payload() {
        let f = ScalarField::zeros(Grid2D::new(1.0, 3).unwrap());
        let bytes = field_to_bytes(&f);
        let header = b"n=3 half_extent=1 dtype=f64 order=row-major\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(bytes.len() - header.len(), 72);
        assert!(bytes[header.len()..].iter().all(|b| *b == 0));
    }

    #[test]
    fn pins_compare_after_first_insert() {
        let mut s = PinStore::open("/nonexistent/pins.csv").unwrap();
        assert_eq!(s.check_or_insert("k", 8.0, 0.0), PinStatus::Created);
        assert_eq!(s.check_or_insert("k", 8.0, 0.0), PinStatus::Matched { pinned: 8.0 });
        assert!(!s.check_or_insert("k", 16.0, 0.1).ok());
        assert_eq!(s.to_csv(), "key,value\nk,8e0\n");
    }
}
