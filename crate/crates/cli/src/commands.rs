//! The five commands. Each writes its files under the output directory and
//! returns the paths it wrote, in order.

use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::value::RawValue;

use curvop_core::format::json_num;
use curvop_core::geometry::{frames_on_grid, grid_sample, GeometryPoint, Quantity};
use curvop_core::grid::{GridField, GridSpec, JsonGrid};
use curvop_core::operators::{
    assemble_dresselhaus, assemble_hamiltonian, assemble_momentum, assemble_oam, assemble_rashba, DiffOp, OpError,
    ValueKind,
};
use curvop_core::oracle::ConeParams;
use curvop_core::spectral::{spectrum_csv, spectrum_table, SpectrumRow};
use curvop_core::spin::reduced_tensors;
use curvop_core::surface::{builtin, parse_surface, Surface};
use curvop_core::verify::{verify_cone, VerifyConfig, DEFAULT_TOLERANCE};

use crate::config::{Format, RunConfig, SurfaceSource};
use crate::error::{Category, CliError};

pub const DEFAULT_GRID: (usize, usize) = (64, 64);
pub const DEFAULT_VERIFY_GRID: (usize, usize) = (20, 20);
pub const VERIFY_REPORT: &str = "verify_report.json";

/// A loaded surface and a label naming where it came from.
pub struct Loaded {
    pub surface: Surface,
    pub label: String,
}

pub fn load_surface(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let source = cfg
        .source
        .as_ref()
        .ok_or_else(|| CliError::config("no surface given: use --surface, --surface-file or --surface-expr"))?;
    let (def, label) = match source {
        SurfaceSource::Builtin(name) => (builtin(name)?, name.clone()),
        SurfaceSource::File(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("cannot read surface file {}: {e}", path.display())))?;
            let origin = path.display().to_string();
            let def = parse_surface(&text).map_err(|e| CliError::surface(&e, &text, &origin))?;
            (def, origin)
        }
        SurfaceSource::Inline(text) => {
            let def = parse_surface(text).map_err(|e| CliError::surface(&e, text, "<surface-expr>"))?;
            (def, "<surface-expr>".to_string())
        }
    };
    Ok(Loaded { surface: Surface::with_overrides(def, &cfg.overrides)?, label })
}

fn write_file(dir: &Path, name: &str, text: &str, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create output directory {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))?;
    written.push(path);
    Ok(())
}

#[derive(Serialize)]
struct JsonParam {
    name: String,
    value: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonUnits {
    hbar: Box<RawValue>,
    mass: Box<RawValue>,
    alpha: Box<RawValue>,
    beta: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonNamedGrid<'a> {
    name: &'a str,
    field: JsonGrid<'a>,
}

/// Document wrapping several named grids with the run's context.
#[derive(Serialize)]
struct JsonDocument<'a> {
    surface: &'a str,
    parameters: Vec<JsonParam>,
    units: JsonUnits,
    fields: Vec<JsonNamedGrid<'a>>,
}

fn document(loaded: &Loaded, cfg: &RunConfig, fields: &[(String, GridField)]) -> String {
    let doc = JsonDocument {
        surface: &loaded.label,
        parameters: loaded
            .surface
            .params()
            .into_iter()
            .map(|(name, value)| JsonParam { name, value: json_num(value) })
            .collect(),
        units: JsonUnits {
            hbar: json_num(cfg.hbar),
            mass: json_num(cfg.mass),
            alpha: json_num(cfg.alpha),
            beta: json_num(cfg.beta),
        },
        fields: fields.iter().map(|(name, f)| JsonNamedGrid { name, field: f.to_json() }).collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("document serializes");
    text.push('\n');
    text
}

fn select(field: &GridField, channels: std::ops::Range<usize>) -> GridField {
    GridField::new(
        field.grid.clone(),
        field.channels[channels.clone()].to_vec(),
        field.data.iter().map(|row| row[channels.clone()].to_vec()).collect(),
    )
}

fn write_fields(
    loaded: &Loaded,
    cfg: &RunConfig,
    fields: &[(String, GridField)],
    json_name: &str,
    written: &mut Vec<PathBuf>,
) -> Result<(), CliError> {
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            for (name, f) in fields {
                write_file(&cfg.out, &format!("{name}.csv"), &f.to_csv(), written)?;
            }
            Ok(())
        }
        Format::Json => write_file(&cfg.out, json_name, &document(loaded, cfg, fields), written),
    }
}

pub fn geometry(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load_surface(cfg)?;
    let (nu, nv) = cfg.grid.unwrap_or(DEFAULT_GRID);
    let pairs = [(0, 0), (0, 1), (1, 1)];
    let groups: Vec<(&str, Vec<Quantity>)> = vec![
        ("mean_curvature", vec![Quantity::MeanCurvature]),
        ("gaussian_curvature", vec![Quantity::GaussianCurvature]),
        ("geometric_potential", vec![Quantity::GeometricPotential]),
        ("rescaled_factor", (0..4).map(Quantity::FactorCoeff).collect()),
        ("metric", pairs.iter().map(|&(a, b)| Quantity::Metric(a, b)).collect()),
        ("inverse_metric", pairs.iter().map(|&(a, b)| Quantity::InvMetric(a, b)).collect()),
        ("normal_derivative_inverse_metric", pairs.iter().map(|&(a, b)| Quantity::G1Inv(a, b)).collect()),
    ];
    let all: Vec<Quantity> = groups.iter().flat_map(|(_, q)| q.iter().copied()).collect();
    let sampled = grid_sample(&loaded.surface, nu, nv, &all, cfg.hbar, cfg.mass)?;
    let mut start = 0;
    let fields: Vec<(String, GridField)> = groups
        .iter()
        .map(|(name, q)| {
            let f = select(&sampled, start..start + q.len());
            start += q.len();
            (name.to_string(), f)
        })
        .collect();
    let mut written = Vec::new();
    write_fields(&loaded, cfg, &fields, "geometry.json", &mut written)?;
    Ok(written)
}

fn csv_dump(op: &DiffOp, nu: usize, nv: usize, dir: &Path, written: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut index = String::from("file,dmu,dnu,provenance\n");
    for (term, field) in op.eval_on_grid(nu, nv)? {
        let name = format!("{}_d{}_{}.csv", op.name(), term.index.0, term.index.1);
        index.push_str(&format!("{name},{},{},\"{}\"\n", term.index.0, term.index.1, term.provenance.join(" + ")));
        write_file(dir, &name, &field.to_csv(), written)?;
    }
    write_file(dir, &format!("{}_terms.csv", op.name()), &index, written)
}

/// Warning lines go to standard error; the operators that could be built
/// are still written.
pub fn operators(cfg: &RunConfig, warn: &mut dyn FnMut(String)) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load_surface(cfg)?;
    let s = &loaded.surface;
    let (nu, nv) = cfg.grid.unwrap_or(DEFAULT_GRID);
    let mut ops = vec![assemble_hamiltonian(s, cfg.hbar, cfg.mass)?];
    for (name, built) in [("momentum", assemble_momentum(s, cfg.hbar)), ("angular momentum", assemble_oam(s, cfg.hbar))] {
        match built {
            Ok(op) => ops.push(op),
            Err(e @ OpError::NonOrthogonalChart { .. }) => warn(format!("skipping {name}: {e}")),
            Err(e) => return Err(e.into()),
        }
    }
    ops.push(assemble_rashba(s, cfg.alpha, cfg.hbar)?);
    ops.push(assemble_dresselhaus(s, cfg.beta, cfg.hbar)?);

    let mut written = Vec::new();
    for op in &ops {
        match cfg.format.unwrap_or(Format::Json) {
            Format::Json => {
                let mut text = op.to_json(nu, nv)?;
                text.push('\n');
                write_file(&cfg.out, &format!("{}.json", op.name()), &text, &mut written)?;
            }
            Format::Csv => csv_dump(op, nu, nv, &cfg.out, &mut written)?,
        }
    }
    Ok(written)
}

const AXES: [&str; 3] = ["u", "v", "n"];

fn tensor_row(t: &[[f64; 3]; 3]) -> Vec<f64> {
    t.iter().flatten().copied().collect()
}

fn tensor_channels() -> Vec<String> {
    AXES.iter().flat_map(|a| AXES.iter().map(move |b| format!("{a}{b}"))).collect()
}

pub fn tensors(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load_surface(cfg)?;
    let (nu, nv) = cfg.grid.unwrap_or(DEFAULT_GRID);
    let grid = GridSpec::for_surface(&loaded.surface, nu, nv);
    let frames: Vec<GeometryPoint> = frames_on_grid(&loaded.surface, &grid)?;
    let mut pauli = Vec::with_capacity(frames.len());
    let mut rashba = Vec::with_capacity(frames.len());
    let mut dresselhaus = Vec::with_capacity(frames.len());
    for pt in &frames {
        let t = reduced_tensors(pt, cfg.alpha, cfg.beta, cfg.hbar)?;
        pauli.push(
            t.sigma
                .iter()
                .flat_map(|s| s.entries().into_iter().flat_map(|z| [z.re, z.im]))
                .collect::<Vec<f64>>(),
        );
        rashba.push(tensor_row(&t.rashba));
        dresselhaus.push(tensor_row(&t.dresselhaus));
    }
    let spin_channels = ValueKind::Spin.channel_names();
    let pauli_channels =
        AXES.iter().flat_map(|a| spin_channels.iter().map(move |c| format!("sigma_{a}_{c}"))).collect();
    let fields = vec![
        ("pauli".to_string(), GridField::new(grid.clone(), pauli_channels, pauli)),
        ("rashba_tensor".to_string(), GridField::new(grid.clone(), tensor_channels(), rashba)),
        ("dresselhaus_tensor".to_string(), GridField::new(grid, tensor_channels(), dresselhaus)),
    ];
    let mut written = Vec::new();
    write_fields(&loaded, cfg, &fields, "tensors.json", &mut written)?;
    Ok(written)
}

#[derive(Serialize)]
struct JsonSpectrumRow {
    m: i32,
    n: usize,
    eigenvalue_without_vg: Box<RawValue>,
    eigenvalue_with_vg: Box<RawValue>,
    shift: Box<RawValue>,
}

fn spectrum_json(rows: &[SpectrumRow]) -> String {
    let rows: Vec<JsonSpectrumRow> = rows
        .iter()
        .map(|r| JsonSpectrumRow {
            m: r.m,
            n: r.n,
            eigenvalue_without_vg: json_num(r.without_vg),
            eigenvalue_with_vg: json_num(r.with_vg),
            shift: json_num(r.shift()),
        })
        .collect();
    let mut text = serde_json::to_string_pretty(&rows).expect("spectrum serializes");
    text.push('\n');
    text
}

pub fn spectrum(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let loaded = load_surface(cfg)?;
    if cfg.count == 0 {
        return Err(CliError::config("count must be at least 1"));
    }
    let rows = spectrum_table(&loaded.surface, cfg.modes.clone(), cfg.count, cfg.nodes, cfg.hbar, cfg.mass)?;
    let mut written = Vec::new();
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => write_file(&cfg.out, "spectrum.csv", &spectrum_csv(&rows), &mut written)?,
        Format::Json => write_file(&cfg.out, "spectrum.json", &spectrum_json(&rows), &mut written)?,
    }
    Ok(written)
}

/// Writes the report, then fails with exit 4 if any check failed.
pub fn verify(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    match &cfg.source {
        None => {}
        Some(SurfaceSource::Builtin(name)) if name == "cone" => {}
        Some(_) => return Err(CliError::config("verify compares against the cone's closed forms and needs --surface cone")),
    }
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::config("verify writes a JSON report only"));
    }
    let surface = Surface::with_overrides(builtin("cone")?, &cfg.overrides)?;
    let param = |name: &str| surface.param(name).expect("cone parameter");
    let (nu, nv) = cfg.grid.unwrap_or(DEFAULT_VERIFY_GRID);
    let vc = VerifyConfig {
        cone: ConeParams::new(param("R"), param("phi"), param("l"))?,
        nu,
        nv,
        tolerance: cfg.tol.unwrap_or(DEFAULT_TOLERANCE),
        hbar: cfg.hbar,
        mass: cfg.mass,
        alpha: cfg.alpha,
        beta: cfg.beta,
    };
    let report = verify_cone(&vc)?;
    let mut written = Vec::new();
    write_file(&cfg.out, VERIFY_REPORT, &report.to_json(), &mut written)?;
    if !report.passed() {
        let failed: Vec<String> =
            report.failures().map(|c| format!("{} / {} / {}", c.case, c.quantity, c.component)).collect();
        return Err(CliError::new(
            Category::Verify,
            format!(
                "{} of {} checks failed ({}); report written to {}",
                failed.len(),
                report.checks.len(),
                failed.join("; "),
                written[0].display()
            ),
        ));
    }
    Ok(written)
}
