//! Sectioned key-value configuration: parsing, validation, and the
//! canonical form whose content hash keys run directories.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::grid::io::read_field_binary_path;
use crate::grid::{Field, Grid};
use crate::model::{ModelParams, Severity, SourceKind, Tau};
use crate::rational::{parse_rat, rat_to_f64};
use crate::regimes::{OpaqueConstants, RegimeParams};
use crate::solver::StepControl;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {detail}")]
    Io { path: PathBuf, detail: String },
    #[error("line {line}: {detail}")]
    Syntax { line: usize, detail: String },
    #[error("[{section}] is missing required key '{key}'")]
    Missing { section: String, key: String },
    #[error("[{section}] {key}: {detail}")]
    Bad {
        section: String,
        key: String,
        detail: String,
    },
    #[error("unknown key '{key}' in [{section}] (line {line})")]
    UnknownKey {
        section: String,
        key: String,
        line: usize,
    },
    #[error("unknown section [{section}] (line {line})")]
    UnknownSection { section: String, line: usize },
    #[error("model parameters rejected:\n{trace}")]
    Model { trace: String },
}

#[derive(Debug, Clone)]
struct RawEntry {
    key: String,
    value: String,
    line: usize,
}

/// A parsed config file: ordered sections of ordered key-value entries,
/// still strings. Sweeps override entries here, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: Vec<(String, Vec<RawEntry>)>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        let mut current: Option<usize> = None;
        for (idx, line_text) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = line_text.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with(';') {
                continue;
            }
            if let Some(name) = trimmed.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or(ConfigError::Syntax {
                    line,
                    detail: format!("unterminated section header '{trimmed}'"),
                })?;
                let name = name.trim().to_string();
                if name.is_empty() {
                    return Err(ConfigError::Syntax {
                        line,
                        detail: "empty section name".into(),
                    });
                }
                if raw.sections.iter().any(|(existing, _)| *existing == name) {
                    return Err(ConfigError::Syntax {
                        line,
                        detail: format!("section [{name}] appears twice"),
                    });
                }
                raw.sections.push((name, Vec::new()));
                current = Some(raw.sections.len() - 1);
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    detail: format!("expected 'key = value', got '{trimmed}'"),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    detail: "empty key".into(),
                });
            }
            let Some(section) = current else {
                return Err(ConfigError::Syntax {
                    line,
                    detail: format!("'{key}' appears before any [section]"),
                });
            };
            let entries = &mut raw.sections[section].1;
            if entries.iter().any(|e| e.key == key) {
                return Err(ConfigError::Syntax {
                    line,
                    detail: format!("duplicate key '{key}' in [{}]", raw.sections[section].0),
                });
            }
            entries.push(RawEntry { key, value, line });
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.to_path_buf(),
            detail: e.to_string(),
        })?;
        Self::parse(&text)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|(name, _)| name == section)?
            .1
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    /// Replaces or inserts an entry; sweeps use this to derive point
    /// configs from the base.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        let entries = match self.sections.iter_mut().find(|(name, _)| name == section) {
            Some((_, entries)) => entries,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                &mut self.sections.last_mut().expect("just pushed").1
            }
        };
        match entries.iter_mut().find(|e| e.key == key) {
            Some(entry) => entry.value = value.to_string(),
            None => entries.push(RawEntry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }

    /// Deterministic rendering: sections and keys sorted, one entry per
    /// line. Equal configurations produce equal text, hence equal hashes.
    pub fn canonical_text(&self) -> String {
        let mut map: BTreeMap<&str, BTreeMap<&str, &str>> = BTreeMap::new();
        for (name, entries) in &self.sections {
            let section = map.entry(name).or_default();
            for e in entries {
                section.insert(&e.key, &e.value);
            }
        }
        let mut out = String::new();
        for (name, entries) in map {
            let _ = writeln!(out, "[{name}]");
            for (key, value) in entries {
                let _ = writeln!(out, "{key} = {value}");
            }
        }
        out
    }

    /// Section names with their keys and source lines, for callers that
    /// validate files whose key sets are open-ended (sweep axes).
    pub(crate) fn entries(&self) -> Vec<(String, Vec<(String, usize)>)> {
        self.sections
            .iter()
            .map(|(name, entries)| {
                (
                    name.clone(),
                    entries.iter().map(|e| (e.key.clone(), e.line)).collect(),
                )
            })
            .collect()
    }

    fn section<'a>(&'a self, name: &'static str) -> SectionView<'a> {
        let entries = self
            .sections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e.as_slice())
            .unwrap_or(&[]);
        SectionView { name, entries }
    }

    fn has_section(&self, name: &str) -> bool {
        self.sections.iter().any(|(n, _)| n == name)
    }

    fn check_known(&self, known: &[(&str, &[&str])]) -> Result<(), ConfigError> {
        for (name, entries) in &self.sections {
            let Some((_, keys)) = known.iter().find(|(n, _)| n == name) else {
                return Err(ConfigError::UnknownSection {
                    section: name.clone(),
                    line: 0,
                });
            };
            for e in entries {
                if !keys.contains(&e.key.as_str()) {
                    return Err(ConfigError::UnknownKey {
                        section: name.clone(),
                        key: e.key.clone(),
                        line: e.line,
                    });
                }
            }
        }
        Ok(())
    }
}

/// First 16 hex characters of the SHA-256 of the canonical text: the run
/// directory key.
pub fn content_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

struct SectionView<'a> {
    name: &'static str,
    entries: &'a [RawEntry],
}

impl<'a> SectionView<'a> {
    fn bad(&self, key: &str, detail: impl Into<String>) -> ConfigError {
        ConfigError::Bad {
            section: self.name.to_string(),
            key: key.to_string(),
            detail: detail.into(),
        }
    }

    fn optional(&self, key: &str) -> Option<&'a str> {
        self.entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    fn required(&self, key: &str) -> Result<&'a str, ConfigError> {
        self.optional(key).ok_or(ConfigError::Missing {
            section: self.name.to_string(),
            key: key.to_string(),
        })
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.required(key)?;
        raw.parse::<f64>()
            .map_err(|_| self.bad(key, format!("not a number: '{raw}'")))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.optional(key) {
            Some(raw) => raw
                .parse::<f64>()
                .map_err(|_| self.bad(key, format!("not a number: '{raw}'"))),
            None => Ok(default),
        }
    }

    fn rational(&self, key: &str) -> Result<crate::rational::Rat, ConfigError> {
        let raw = self.required(key)?;
        parse_rat(raw).map_err(|e| self.bad(key, e))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, ConfigError> {
        match self.optional(key) {
            Some("true") => Ok(true),
            Some("false") => Ok(false),
            Some(other) => Err(self.bad(key, format!("expected true or false, got '{other}'"))),
            None => Ok(default),
        }
    }

    fn u32_or(&self, key: &str, default: u32) -> Result<u32, ConfigError> {
        match self.optional(key) {
            Some(raw) => raw
                .parse::<u32>()
                .map_err(|_| self.bad(key, format!("expected a nonnegative integer, got '{raw}'"))),
            None => Ok(default),
        }
    }
}

/// Initial data for a field.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    Uniform {
        value: f64,
    },
    Gaussian {
        center: (f64, f64),
        width: f64,
        amplitude: f64,
        background: f64,
    },
    FromFile {
        path: PathBuf,
    },
}

impl InitialData {
    /// Materializes the field on `grid`. File paths resolve against
    /// `base_dir`, the directory of the config file.
    pub fn realize(&self, grid: Grid, base_dir: &Path) -> Result<Field, ConfigError> {
        match self {
            InitialData::Uniform { value } => Ok(Field::constant(grid, *value)),
            InitialData::Gaussian {
                center,
                width,
                amplitude,
                background,
            } => {
                let (cx, cy) = *center;
                let two_w2 = 2.0 * width * width;
                Ok(Field::from_fn(grid, |x, y| {
                    let dy = if grid.dims() == 2 { y - cy } else { 0.0 };
                    let r2 = (x - cx) * (x - cx) + dy * dy;
                    background + amplitude * (-r2 / two_w2).exp()
                }))
            }
            InitialData::FromFile { path } => {
                let resolved = if path.is_absolute() {
                    path.clone()
                } else {
                    base_dir.join(path)
                };
                let field = read_field_binary_path(&resolved).map_err(|e| ConfigError::Io {
                    path: resolved.clone(),
                    detail: e.to_string(),
                })?;
                if field.grid() != &grid {
                    return Err(ConfigError::Io {
                        path: resolved,
                        detail: format!(
                            "field grid {:?} does not match the configured grid {:?}",
                            field.grid(),
                            grid
                        ),
                    });
                }
                Ok(field)
            }
        }
    }
}

/// Step control before the blow-up threshold is resolved against the
/// initial data.
#[derive(Debug, Clone, Copy)]
pub struct ControlSpec {
    pub t_end: f64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub cfl_safety: f64,
    pub blowup_threshold: Option<f64>,
}

impl ControlSpec {
    /// Default threshold: a million times the initial sup-norm (or an
    /// absolute million for vanishing data).
    pub fn resolve(&self, initial_linf: f64) -> StepControl {
        let fallback = if initial_linf > 0.0 {
            1e6 * initial_linf
        } else {
            1e6
        };
        StepControl {
            dt_max: self.dt_max,
            dt_min: self.dt_min,
            cfl_safety: self.cfl_safety,
            t_end: self.t_end,
            blowup_threshold: self.blowup_threshold.unwrap_or(fallback),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputSpec {
    pub cadence: f64,
    pub k_norms: Vec<f64>,
    pub directory: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct ConvergenceSpec {
    pub manufactured: bool,
    pub levels: Vec<usize>,
    pub t_end: f64,
}

/// Integer k range for the exponent table.
#[derive(Debug, Clone, Copy)]
pub struct ExponentTableSpec {
    pub k_min: u32,
    pub k_max: u32,
}

impl Default for ExponentTableSpec {
    fn default() -> Self {
        ExponentTableSpec { k_min: 2, k_max: 12 }
    }
}

/// A fully interpreted configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: ModelParams,
    pub regime: RegimeParams,
    pub constants: Option<OpaqueConstants>,
    pub grid: Grid,
    pub control: ControlSpec,
    pub initial_u: InitialData,
    pub initial_v: Option<InitialData>,
    pub outputs: OutputSpec,
    pub convergence: Option<ConvergenceSpec>,
    pub exponent_table: Option<ExponentTableSpec>,
    /// Canonical text of the raw config; its hash keys the run directory.
    pub canonical: String,
    /// Directory of the config file, for resolving relative paths.
    pub base_dir: PathBuf,
}

const MODEL_KEYS: &[&str] = &[
    "family", "n", "m1", "m2", "chi", "a", "b", "c", "alpha", "beta", "delta", "K", "l", "tau",
    "sources_enabled",
];
const GRID_KEYS: &[&str] = &["dims", "cells", "extent"];
const CONTROL_KEYS: &[&str] = &["t_end", "dt_min", "dt_max", "cfl_safety", "blowup_threshold"];
const CONSTANTS_KEYS: &[&str] = &["C0", "CGN", "CP", "k_star"];
const INITIAL_KEYS: &[&str] = &[
    "kind",
    "value",
    "center",
    "width",
    "amplitude",
    "background",
    "path",
];
const OUTPUT_KEYS: &[&str] = &["cadence", "k_norms", "directory"];
const CONVERGENCE_KEYS: &[&str] = &["manufactured", "levels", "t_end"];
const EXPONENT_KEYS: &[&str] = &["k_min", "k_max"];

const KNOWN_SECTIONS: &[(&str, &[&str])] = &[
    ("model", MODEL_KEYS),
    ("grid", GRID_KEYS),
    ("control", CONTROL_KEYS),
    ("constants", CONSTANTS_KEYS),
    ("initial", INITIAL_KEYS),
    ("initial_v", INITIAL_KEYS),
    ("outputs", OUTPUT_KEYS),
    ("convergence", CONVERGENCE_KEYS),
    ("exponents", EXPONENT_KEYS),
];

fn build_grid(raw: &RawConfig) -> Result<Grid, ConfigError> {
    let s = raw.section("grid");
    let dims = s.required("dims")?;
    match dims {
        "1" => {
            let cells: usize = s
                .required("cells")?
                .parse()
                .map_err(|_| s.bad("cells", "expected a cell count"))?;
            let extent = s.f64("extent")?;
            Grid::line(extent, cells).map_err(|e| s.bad("extent", e.to_string()))
        }
        "2" => {
            let cells = s.required("cells")?;
            let (cx, cy) = cells
                .split_once('x')
                .ok_or_else(|| s.bad("cells", "expected NXxNY, e.g. 64x48"))?;
            let cx: usize = cx
                .trim()
                .parse()
                .map_err(|_| s.bad("cells", "bad cell count"))?;
            let cy: usize = cy
                .trim()
                .parse()
                .map_err(|_| s.bad("cells", "bad cell count"))?;
            let extent = s.required("extent")?;
            let (ex, ey) = extent
                .split_once('x')
                .ok_or_else(|| s.bad("extent", "expected LXxLY, e.g. 2.0x1.5"))?;
            let ex: f64 = ex
                .trim()
                .parse()
                .map_err(|_| s.bad("extent", "bad extent"))?;
            let ey: f64 = ey
                .trim()
                .parse()
                .map_err(|_| s.bad("extent", "bad extent"))?;
            Grid::rect((ex, ey), (cx, cy)).map_err(|e| s.bad("extent", e.to_string()))
        }
        other => Err(s.bad("dims", format!("expected 1 or 2, got '{other}'"))),
    }
}

fn build_model(raw: &RawConfig, measure: f64) -> Result<(ModelParams, RegimeParams), ConfigError> {
    let s = raw.section("model");
    let family = match s.required("family")? {
        "nonlocal" => SourceKind::NonlocalDamping,
        "gradient" => SourceKind::GradientDamping,
        other => {
            return Err(s.bad("family", format!("expected nonlocal or gradient, got '{other}'")))
        }
    };
    let n: u32 = s
        .required("n")?
        .parse()
        .map_err(|_| s.bad("n", "expected a positive integer"))?;
    let tau = match s.required("tau")? {
        "0" => Tau::Elliptic,
        "1" => Tau::Parabolic,
        other => return Err(s.bad("tau", format!("expected 0 or 1, got '{other}'"))),
    };

    // exponents are read once as exact rationals; the float view is derived
    let m1 = s.rational("m1")?;
    let m2 = s.rational("m2")?;
    let l = s.rational("l")?;
    let alpha = s.rational("alpha")?;
    let beta = s.rational("beta")?;
    let delta = s.rational("delta")?;

    let chi = s.f64("chi")?;
    let a = s.f64("a")?;
    let b = s.f64("b")?;
    let c = s.f64("c")?;
    let production_scale = s.f64("K")?;
    let sources_enabled = s.bool_or("sources_enabled", true)?;

    let model = ModelParams {
        n,
        m1: rat_to_f64(&m1),
        m2: rat_to_f64(&m2),
        chi,
        a,
        b,
        c,
        alpha: rat_to_f64(&alpha),
        beta: rat_to_f64(&beta),
        delta: rat_to_f64(&delta),
        tau,
        production_scale,
        production_exponent: rat_to_f64(&l),
        source: family,
        measure,
        sources_enabled,
    };
    let regime = RegimeParams {
        n,
        m1,
        m2,
        l,
        alpha,
        beta,
        delta,
        tau,
        source: family,
        chi,
        a,
        b,
        c,
        production_scale,
        measure,
    };
    Ok((model, regime))
}

fn build_constants(raw: &RawConfig) -> Result<Option<OpaqueConstants>, ConfigError> {
    if !raw.has_section("constants") {
        return Ok(None);
    }
    let s = raw.section("constants");
    Ok(Some(OpaqueConstants {
        c0: s.f64("C0")?,
        c_gn: s.f64("CGN")?,
        c_p: s.f64("CP")?,
        k_star: s.f64("k_star")?,
    }))
}

fn build_control(raw: &RawConfig) -> Result<ControlSpec, ConfigError> {
    let s = raw.section("control");
    let spec = ControlSpec {
        t_end: s.f64("t_end")?,
        dt_min: s.f64_or("dt_min", 1e-10)?,
        dt_max: s.f64_or("dt_max", 1.0)?,
        cfl_safety: s.f64_or("cfl_safety", 0.4)?,
        blowup_threshold: s.optional("blowup_threshold").map(|_| s.f64("blowup_threshold")).transpose()?,
    };
    if !(spec.t_end > 0.0) {
        return Err(s.bad("t_end", "must be positive"));
    }
    Ok(spec)
}

fn build_initial(raw: &RawConfig, section: &'static str, dims: usize) -> Result<InitialData, ConfigError> {
    let s = raw.section(section);
    match s.required("kind")? {
        "uniform" => {
            let value = s.f64("value")?;
            if !(value >= 0.0) {
                return Err(s.bad("value", "must be nonnegative"));
            }
            Ok(InitialData::Uniform { value })
        }
        "gaussian" => {
            let center_raw = s.required("center")?;
            let center = if dims == 2 {
                let (x, y) = center_raw
                    .split_once(',')
                    .ok_or_else(|| s.bad("center", "expected x,y"))?;
                let x: f64 = x.trim().parse().map_err(|_| s.bad("center", "bad number"))?;
                let y: f64 = y.trim().parse().map_err(|_| s.bad("center", "bad number"))?;
                (x, y)
            } else {
                let x: f64 = center_raw
                    .parse()
                    .map_err(|_| s.bad("center", "bad number"))?;
                (x, 0.0)
            };
            let width = s.f64("width")?;
            let amplitude = s.f64("amplitude")?;
            let background = s.f64_or("background", 0.0)?;
            if !(width > 0.0) {
                return Err(s.bad("width", "must be positive"));
            }
            if !(amplitude >= 0.0) || !(background >= 0.0) {
                return Err(s.bad("amplitude", "amplitude and background must be nonnegative"));
            }
            Ok(InitialData::Gaussian {
                center,
                width,
                amplitude,
                background,
            })
        }
        "from-file" => Ok(InitialData::FromFile {
            path: PathBuf::from(s.required("path")?),
        }),
        other => Err(s.bad("kind", format!("expected uniform, gaussian or from-file, got '{other}'"))),
    }
}

fn build_outputs(raw: &RawConfig, t_end: f64) -> Result<OutputSpec, ConfigError> {
    let s = raw.section("outputs");
    let cadence = s.f64_or("cadence", t_end / 10.0)?;
    if !(cadence > 0.0) {
        return Err(s.bad("cadence", "must be positive"));
    }
    let k_norms = match s.optional("k_norms") {
        Some(list) => {
            let mut out = Vec::new();
            for part in list.split(',') {
                let k: f64 = part
                    .trim()
                    .parse()
                    .map_err(|_| s.bad("k_norms", format!("bad number '{}'", part.trim())))?;
                if !(k >= 1.0) {
                    return Err(s.bad("k_norms", "every k must be >= 1"));
                }
                out.push(k);
            }
            out
        }
        None => Vec::new(),
    };
    Ok(OutputSpec {
        cadence,
        k_norms,
        directory: s.optional("directory").map(PathBuf::from),
    })
}

fn build_convergence(raw: &RawConfig) -> Result<Option<ConvergenceSpec>, ConfigError> {
    if !raw.has_section("convergence") {
        return Ok(None);
    }
    let s = raw.section("convergence");
    let manufactured = s.bool_or("manufactured", false)?;
    let levels = match s.optional("levels") {
        Some(list) => {
            let mut out = Vec::new();
            for part in list.split(',') {
                let cells: usize = part
                    .trim()
                    .parse()
                    .map_err(|_| s.bad("levels", format!("bad cell count '{}'", part.trim())))?;
                out.push(cells);
            }
            out
        }
        None => vec![32, 64, 128],
    };
    if levels.len() < 3 {
        return Err(s.bad("levels", "need at least 3 refinement levels"));
    }
    Ok(Some(ConvergenceSpec {
        manufactured,
        levels,
        t_end: s.f64_or("t_end", 0.1)?,
    }))
}

fn build_exponent_table(raw: &RawConfig) -> Result<Option<ExponentTableSpec>, ConfigError> {
    if !raw.has_section("exponents") {
        return Ok(None);
    }
    let s = raw.section("exponents");
    let defaults = ExponentTableSpec::default();
    Ok(Some(ExponentTableSpec {
        k_min: s.u32_or("k_min", defaults.k_min)?,
        k_max: s.u32_or("k_max", defaults.k_max)?,
    }))
}

impl RunConfig {
    pub fn from_raw(raw: &RawConfig, base_dir: &Path) -> Result<Self, ConfigError> {
        raw.check_known(KNOWN_SECTIONS)?;
        let grid = build_grid(raw)?;
        let (model, regime) = build_model(raw, grid.measure())?;
        let control = build_control(raw)?;
        let initial_u = build_initial(raw, "initial", grid.dims())?;
        let initial_v = if raw.has_section("initial_v") {
            Some(build_initial(raw, "initial_v", grid.dims())?)
        } else {
            None
        };
        Ok(RunConfig {
            model,
            regime,
            constants: build_constants(raw)?,
            grid,
            control,
            initial_u,
            initial_v,
            outputs: build_outputs(raw, control.t_end)?,
            convergence: build_convergence(raw)?,
            exponent_table: build_exponent_table(raw)?,
            canonical: raw.canonical_text(),
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let raw = RawConfig::load(path)?;
        let base_dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::from_raw(&raw, &base_dir)
    }

    /// Rejects any error-severity violation, rendering the full trace.
    pub fn require_admissible(&self) -> Result<(), ConfigError> {
        let violations = self.model.validate();
        let errors: Vec<_> = violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
            .collect();
        if errors.is_empty() {
            return Ok(());
        }
        let mut trace = String::new();
        for v in errors {
            let _ = writeln!(trace, "  {}: {}", v.clause, v.message);
        }
        Err(ConfigError::Model {
            trace: trace.trim_end().to_string(),
        })
    }

    /// The weaker gate used by parameter exploration: only structurally
    /// unusable values are fatal (non-finite numbers, negative
    /// coefficients, bad production parameters). Theorem hypotheses like
    /// strict coefficient positivity or exponent orderings are left to the
    /// criteria, which report them as trace rows.
    pub fn require_evaluable(&self) -> Result<(), ConfigError> {
        let m = &self.model;
        let mut trace = String::new();
        let mut bad = |detail: String| {
            let _ = writeln!(trace, "  {detail}");
        };
        for (name, value) in [
            ("m1", m.m1),
            ("m2", m.m2),
            ("chi", m.chi),
            ("a", m.a),
            ("b", m.b),
            ("c", m.c),
            ("alpha", m.alpha),
            ("beta", m.beta),
            ("delta", m.delta),
            ("K", m.production_scale),
            ("l", m.production_exponent),
        ] {
            if !value.is_finite() {
                bad(format!("{name} must be finite, got {value}"));
            }
        }
        if m.n < 1 {
            bad("n must be at least 1".into());
        }
        for (name, value) in [("chi", m.chi), ("a", m.a), ("b", m.b), ("c", m.c)] {
            if value < 0.0 {
                bad(format!("{name} must not be negative, got {value}"));
            }
        }
        if !(m.production_scale > 0.0) {
            bad(format!("K must be positive, got {}", m.production_scale));
        }
        if !(m.production_exponent > 0.0) {
            bad(format!("l must be positive, got {}", m.production_exponent));
        }
        if trace.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Model {
                trace: trace.trim_end().to_string(),
            })
        }
    }
}
