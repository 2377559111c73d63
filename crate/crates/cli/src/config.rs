//! Run configuration: command-line flags layered over an optional TOML
//! file layered over builtin defaults.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Deserialize;

use crate::error::CliError;

pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_MASS: f64 = 0.5;
pub const DEFAULT_COUPLING: f64 = 1.0;
pub const DEFAULT_OUT: &str = "curvop-out";
pub const DEFAULT_NODES: usize = 2000;
pub const DEFAULT_COUNT: usize = 3;
pub const DEFAULT_MODES: RangeInclusive<i32> = 0..=2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Builtin surface: cone, cylinder, plane_ring, sphere, torus, catenoid.
    #[arg(long, value_name = "NAME")]
    pub surface: Option<String>,
    /// Surface definition file.
    #[arg(long, value_name = "PATH")]
    pub surface_file: Option<PathBuf>,
    /// Inline surface definition.
    #[arg(long, value_name = "SOURCE")]
    pub surface_expr: Option<String>,
    /// Parameter overrides, e.g. R=1,phi=0.5 (repeatable).
    #[arg(long = "set", value_name = "K=V[,...]", allow_hyphen_values = true)]
    pub set: Vec<String>,
    /// Sampling grid, e.g. 64x64.
    #[arg(long, value_name = "NxM")]
    pub grid: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub hbar: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub mass: Option<f64>,
    /// Rashba coupling.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Dresselhaus coupling.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// TOML file with defaults for any of these settings.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

/// Flags of the `spectrum` command.
#[derive(Debug, Clone, Default, Args)]
pub struct SpectrumArgs {
    /// Inclusive range of angular modes, e.g. 0..2.
    #[arg(long, value_name = "A..B", allow_hyphen_values = true)]
    pub modes: Option<String>,
    /// Interior radial nodes.
    #[arg(long)]
    pub nodes: Option<usize>,
    /// Levels per mode.
    #[arg(long)]
    pub count: Option<usize>,
    /// Solve each mode both with and without the geometric potential
    /// (always done; accepted for explicitness).
    #[arg(long)]
    pub with_and_without_vg: bool,
}

/// Contents of a `--config` file. Every key is optional.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub surface: Option<String>,
    pub surface_file: Option<PathBuf>,
    pub surface_expr: Option<String>,
    #[serde(default)]
    pub set: BTreeMap<String, f64>,
    pub grid: Option<String>,
    pub hbar: Option<f64>,
    pub mass: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
    pub modes: Option<String>,
    pub nodes: Option<usize>,
    pub count: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read config file {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))?;
        // a surface file named in a config file is relative to that file
        if let (Some(f), Some(dir)) = (&cfg.surface_file, path.parent()) {
            if f.is_relative() {
                cfg.surface_file = Some(dir.join(f));
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SurfaceSource {
    Builtin(String),
    File(PathBuf),
    Inline(String),
}

/// Fully resolved settings. Command-specific values stay optional where the
/// default depends on the command.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub source: Option<SurfaceSource>,
    pub overrides: Vec<(String, f64)>,
    pub grid: Option<(usize, usize)>,
    pub hbar: f64,
    pub mass: f64,
    pub alpha: f64,
    pub beta: f64,
    pub format: Option<Format>,
    pub out: PathBuf,
    pub tol: Option<f64>,
    pub modes: RangeInclusive<i32>,
    pub nodes: usize,
    pub count: usize,
}

fn pick_source(
    surface: &Option<String>,
    file: &Option<PathBuf>,
    expr: &Option<String>,
    origin: &str,
) -> Result<Option<SurfaceSource>, CliError> {
    let mut found = Vec::new();
    if let Some(s) = surface {
        found.push(SurfaceSource::Builtin(s.clone()));
    }
    if let Some(f) = file {
        found.push(SurfaceSource::File(f.clone()));
    }
    if let Some(e) = expr {
        found.push(SurfaceSource::Inline(e.clone()));
    }
    if found.len() > 1 {
        return Err(CliError::config(format!(
            "{origin} gives more than one of surface, surface-file and surface-expr"
        )));
    }
    Ok(found.pop())
}

/// Parses `k=v[,k=v...]`.
pub fn parse_set(text: &str) -> Result<Vec<(String, f64)>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects k=v, got '{item}'")))?;
        let value: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("--set {}: '{}' is not a number", k.trim(), v.trim())))?;
        if !value.is_finite() {
            return Err(CliError::config(format!("--set {}: value must be finite", k.trim())));
        }
        out.push((k.trim().to_string(), value));
    }
    Ok(out)
}

/// Parses `NxM` with both sides at least 2.
pub fn parse_grid(text: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::config(format!("grid must look like NxM with N, M >= 2, got '{text}'"));
    let (a, b) = text.split_once(['x', 'X']).ok_or_else(bad)?;
    let nu: usize = a.trim().parse().map_err(|_| bad())?;
    let nv: usize = b.trim().parse().map_err(|_| bad())?;
    if nu < 2 || nv < 2 {
        return Err(bad());
    }
    Ok((nu, nv))
}

/// Parses `a..b` (inclusive), `a..=b` or a single mode `a`.
pub fn parse_modes(text: &str) -> Result<RangeInclusive<i32>, CliError> {
    let bad = || CliError::config(format!("modes must look like A..B with A <= B, got '{text}'"));
    let t = text.trim();
    let (a, b) = match t.split_once("..") {
        Some((a, b)) => (a, b.strip_prefix('=').unwrap_or(b)),
        None => (t, t),
    };
    let lo: i32 = a.trim().parse().map_err(|_| bad())?;
    let hi: i32 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn merge_overrides(base: &mut Vec<(String, f64)>, extra: Vec<(String, f64)>) {
    for (k, v) in extra {
        match base.iter_mut().find(|(n, _)| *n == k) {
            Some(slot) => slot.1 = v,
            None => base.push((k, v)),
        }
    }
}

fn finite(name: &str, x: f64) -> Result<f64, CliError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(CliError::config(format!("{name} must be finite")))
    }
}

impl RunConfig {
    /// Layers `args` over the config file (if any) over the defaults.
    pub fn resolve(args: &CommonArgs, spectrum: &SpectrumArgs, tol: Option<f64>) -> Result<RunConfig, CliError> {
        let file = match &args.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let cli_source = pick_source(&args.surface, &args.surface_file, &args.surface_expr, "the command line")?;
        let file_source = pick_source(&file.surface, &file.surface_file, &file.surface_expr, "the config file")?;

        let mut overrides: Vec<(String, f64)> = file.set.iter().map(|(k, v)| (k.clone(), *v)).collect();
        for s in &args.set {
            merge_overrides(&mut overrides, parse_set(s)?);
        }

        let grid = match args.grid.as_deref().or(file.grid.as_deref()) {
            Some(g) => Some(parse_grid(g)?),
            None => None,
        };
        let hbar = finite("hbar", args.hbar.or(file.hbar).unwrap_or(DEFAULT_HBAR))?;
        let mass = finite("mass", args.mass.or(file.mass).unwrap_or(DEFAULT_MASS))?;
        if mass <= 0.0 {
            return Err(CliError::config(format!("mass must be positive, got {mass}")));
        }
        let alpha = finite("alpha", args.alpha.or(file.alpha).unwrap_or(DEFAULT_COUPLING))?;
        let beta = finite("beta", args.beta.or(file.beta).unwrap_or(DEFAULT_COUPLING))?;
        let tol = tol.or(file.tol);
        if let Some(t) = tol {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(CliError::config(format!("tolerance must be a non-negative number, got {t}")));
            }
        }
        let modes = match spectrum.modes.as_deref().or(file.modes.as_deref()) {
            Some(m) => parse_modes(m)?,
            None => DEFAULT_MODES,
        };
        Ok(RunConfig {
            source: cli_source.or(file_source),
            overrides,
            grid,
            hbar,
            mass,
            alpha,
            beta,
            format: args.format.or(file.format),
            out: args.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            tol,
            modes,
            nodes: spectrum.nodes.or(file.nodes).unwrap_or(DEFAULT_NODES),
            count: spectrum.count.or(file.count).unwrap_or(DEFAULT_COUNT),
        })
    }
}
