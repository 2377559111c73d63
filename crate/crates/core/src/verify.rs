//! Term-by-term comparison of the general pipeline against the cone's
//! closed forms, including the cylinder limit on both the cone chart and
//! the builtin cylinder chart.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::value::RawValue;
use thiserror::Error;

use crate::format::json_num;
use crate::geometry::{frame_at, offset_metric, GeometryError, GeometryPoint};
use crate::grid::GridSpec;
use crate::operators::{
    assemble_dresselhaus, assemble_hamiltonian, assemble_momentum, assemble_oam, assemble_rashba, DiffOp, MultiIndex,
    OpError, Value,
};
use crate::oracle::{table_sum, ConeParams, OracleError, OracleRow};
use crate::spin::{dresselhaus_tensor_ccs, pauli_ccs, rashba_tensor_ccs, SpinError, SpinMatrix, C64};
use crate::surface::{builtin, Surface, SurfaceError};

/// Absolute floor added to every tolerance so exact zeros compare equal.
pub const ABS_FLOOR: f64 = 1e-14;
/// Default relative tolerance.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Operator(#[from] OpError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Spin(#[from] SpinError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("invalid verification setting: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub cone: ConeParams,
    pub nu: usize,
    pub nv: usize,
    pub tolerance: f64,
    pub hbar: f64,
    pub mass: f64,
    pub alpha: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// A localized mismatch attributable to exactly one printed row.
    PrintedRowDiscrepancy,
}

/// Aggregate of one compared quantity over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub case: String,
    pub quantity: String,
    pub component: String,
    /// Printed rows contributing to this term (operators only).
    pub rows: Vec<String>,
    pub status: CheckStatus,
    pub isolated_row: Option<String>,
    pub points: usize,
    pub failures: usize,
    pub worst_point: (f64, f64),
    pub oracle: Value,
    pub pipeline: Value,
    pub abs_err: f64,
    /// `abs_err` relative to the largest oracle magnitude over the grid.
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn count(&self, status: CheckStatus) -> usize {
        self.checks.iter().filter(|c| c.status == status).count()
    }

    /// True when nothing failed outside the printed-row escape hatch.
    pub fn passed(&self) -> bool {
        self.count(CheckStatus::Fail) == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn discrepancies(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| c.status == CheckStatus::PrintedRowDiscrepancy)
    }

    /// Pretty-printed JSON with every float in fixed `%.12e` form.
    pub fn to_json(&self) -> String {
        let c = &self.config;
        let doc = JsonReport {
            surface: "cone",
            parameters: JsonParams { r: json_num(c.cone.r_min), phi: json_num(c.cone.phi), l: json_num(c.cone.l) },
            grid: [c.nu, c.nv],
            tolerance: json_num(c.tolerance),
            absolute_floor: json_num(ABS_FLOOR),
            units: JsonUnits { hbar: json_num(c.hbar), mass: json_num(c.mass), alpha: json_num(c.alpha), beta: json_num(c.beta) },
            summary: JsonSummary {
                checks: self.checks.len(),
                passed: self.count(CheckStatus::Pass),
                printed_row_discrepancies: self.count(CheckStatus::PrintedRowDiscrepancy),
                failed: self.count(CheckStatus::Fail),
                pass: self.passed(),
            },
            checks: self
                .checks
                .iter()
                .map(|r| JsonCheck {
                    case: &r.case,
                    quantity: &r.quantity,
                    component: &r.component,
                    rows: &r.rows,
                    status: r.status,
                    isolated_row: r.isolated_row.as_deref(),
                    pass: r.status != CheckStatus::Fail,
                    points: r.points,
                    failures: r.failures,
                    worst_point: JsonPoint { u: json_num(r.worst_point.0), v: json_num(r.worst_point.1) },
                    value_kind: r.oracle.kind().name(),
                    oracle: r.oracle.channels().into_iter().map(json_num).collect(),
                    pipeline: r.pipeline.channels().into_iter().map(json_num).collect(),
                    abs_err: json_num(r.abs_err),
                    rel_err: json_num(r.rel_err),
                })
                .collect(),
        };
        let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
        text.push('\n');
        text
    }
}

#[derive(Serialize)]
struct JsonReport<'a> {
    surface: &'a str,
    parameters: JsonParams,
    grid: [usize; 2],
    tolerance: Box<RawValue>,
    absolute_floor: Box<RawValue>,
    units: JsonUnits,
    summary: JsonSummary,
    checks: Vec<JsonCheck<'a>>,
}

#[derive(Serialize)]
struct JsonParams {
    #[serde(rename = "R")]
    r: Box<RawValue>,
    phi: Box<RawValue>,
    l: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonUnits {
    hbar: Box<RawValue>,
    mass: Box<RawValue>,
    alpha: Box<RawValue>,
    beta: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonSummary {
    checks: usize,
    passed: usize,
    printed_row_discrepancies: usize,
    failed: usize,
    pass: bool,
}

#[derive(Serialize)]
struct JsonPoint {
    u: Box<RawValue>,
    v: Box<RawValue>,
}

#[derive(Serialize)]
struct JsonCheck<'a> {
    case: &'a str,
    quantity: &'a str,
    component: &'a str,
    rows: &'a [String],
    status: CheckStatus,
    isolated_row: Option<&'a str>,
    pass: bool,
    points: usize,
    failures: usize,
    worst_point: JsonPoint,
    value_kind: &'a str,
    oracle: Vec<Box<RawValue>>,
    pipeline: Vec<Box<RawValue>>,
    abs_err: Box<RawValue>,
    rel_err: Box<RawValue>,
}

/// One pointwise comparison.
#[derive(Debug, Clone)]
struct Sample {
    quantity: String,
    component: String,
    rows: Vec<String>,
    oracle: Value,
    pipeline: Value,
}

fn sample(quantity: &str, component: &str, oracle: Value, pipeline: Value) -> Sample {
    Sample { quantity: quantity.into(), component: component.into(), rows: Vec::new(), oracle, pipeline }
}

const AXES2: [&str; 2] = ["theta", "r"];
const AXES3: [&str; 3] = ["theta", "r", "n"];

fn matrix2_samples(out: &mut Vec<Sample>, quantity: &str, oracle: [[f64; 2]; 2], pipeline: [[f64; 2]; 2]) {
    for a in 0..2 {
        for b in a..2 {
            let comp = format!("{},{}", AXES2[a], AXES2[b]);
            out.push(sample(quantity, &comp, Value::real(oracle[a][b]), Value::real(pipeline[a][b])));
        }
    }
}

fn matrix3_samples(out: &mut Vec<Sample>, quantity: &str, oracle: [[f64; 3]; 3], pipeline: [[f64; 3]; 3], symmetric: bool) {
    for a in 0..3 {
        for b in 0..3 {
            if symmetric && b < a {
                continue;
            }
            let comp = format!("{},{}", AXES3[a], AXES3[b]);
            out.push(sample(quantity, &comp, Value::real(oracle[a][b]), Value::real(pipeline[a][b])));
        }
    }
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn geometry_samples(cfg: &VerifyConfig, p: &ConeParams, pt: &GeometryPoint) -> Result<Vec<Sample>, VerifyError> {
    let (theta, r) = (pt.u, pt.v);
    let mut out = Vec::new();
    matrix2_samples(&mut out, "metric", p.metric(r)?, pt.metric);
    matrix2_samples(&mut out, "inverse metric", p.metric_inv(r)?, pt.metric_inv);
    let q3 = 0.1 * p.r_min;
    matrix3_samples(&mut out, "offset metric at q3 = R/10", p.offset_metric(r, q3)?, offset_metric(pt, q3)?, true);
    out.push(sample(
        "rescaled factor at q3 = R/10",
        "f",
        Value::real(p.rescaled_factor(r, q3)?),
        Value::real(pt.rescaled_factor(q3)),
    ));
    out.push(sample("mean curvature", "M", Value::real(p.mean_curvature(r)?), Value::real(pt.mean_curvature)));
    out.push(sample("gaussian curvature", "K", Value::real(p.gaussian_curvature(r)?), Value::real(pt.gaussian_curvature)));
    matrix2_samples(&mut out, "normal derivative of inverse metric", p.g1_inv(r)?, pt.g1_inv);
    out.push(sample(
        "geometric potential",
        "Vg",
        Value::real(p.geometric_potential(r, cfg.hbar, cfg.mass)?),
        Value::real(crate::geometry::geometric_potential(pt, cfg.hbar, cfg.mass)),
    ));
    let ih_m = C64::new(0.0, cfg.hbar * pt.mean_curvature);
    out.push(sample(
        "geometric momentum",
        "vector",
        Value::Vector(p.geometric_momentum(theta, r, cfg.hbar)?),
        Value::Vector(pt.en.map(|x| ih_m * x)),
    ));
    out.push(sample(
        "geometric angular momentum",
        "vector",
        Value::Vector(p.geometric_angular_momentum(theta, r, cfg.hbar)?),
        Value::Vector(cross(pt.position, pt.en).map(|x| ih_m * x)),
    ));
    let sigma_o = p.reduced_pauli(theta, r)?;
    let sigma_p = pauli_ccs(pt)?;
    for k in 0..3 {
        out.push(sample("reduced pauli matrix", AXES3[k], Value::Spin(sigma_o[k]), Value::Spin(sigma_p[k])));
    }
    matrix3_samples(
        &mut out,
        "reduced rashba tensor",
        p.rashba_tensor(theta, r, cfg.alpha, cfg.hbar)?,
        rashba_tensor_ccs(pt, cfg.alpha, cfg.hbar)?,
        false,
    );
    matrix3_samples(
        &mut out,
        "reduced dresselhaus tensor",
        p.dresselhaus_tensor(theta, r, cfg.beta, cfg.hbar)?,
        dresselhaus_tensor_ccs(pt, cfg.beta, cfg.hbar)?,
        false,
    );
    Ok(out)
}

fn index_name(idx: MultiIndex) -> String {
    format!("d_theta^{} d_r^{}", idx.0, idx.1)
}

fn operator_samples(out: &mut Vec<Sample>, op: &DiffOp, oracle: &[OracleRow], u: f64, v: f64) -> Result<(), VerifyError> {
    let pipeline = op.eval_at(u, v)?;
    let expected = table_sum(oracle);
    let keys: BTreeSet<MultiIndex> = expected.keys().chain(pipeline.keys()).copied().collect();
    let zero = Value::zero(op.kind());
    for idx in keys {
        let rows = oracle.iter().filter(|r| r.terms.contains_key(&idx)).map(|r| r.label.clone()).collect();
        out.push(Sample {
            quantity: op.name().to_string(),
            component: index_name(idx),
            rows,
            oracle: *expected.get(&idx).unwrap_or(&zero),
            pipeline: *pipeline.get(&idx).unwrap_or(&zero),
        });
    }
    Ok(())
}

/// Which closed forms a case is compared against.
#[derive(Debug, Clone, Copy, PartialEq)]
enum OracleForms {
    Cone,
    Cylinder,
}

struct Case {
    name: String,
    surface: Surface,
    params: ConeParams,
    forms: OracleForms,
    /// Whether a printed-row discrepancy may excuse a mismatch.
    escape_hatch: bool,
}

struct Operators {
    hamiltonian: DiffOp,
    momentum: DiffOp,
    oam: DiffOp,
    rashba: DiffOp,
    dresselhaus: DiffOp,
}

fn point_samples(cfg: &VerifyConfig, case: &Case, ops: Option<&Operators>, u: f64, v: f64) -> Result<Vec<Sample>, VerifyError> {
    let p = &case.params;
    let pt = frame_at(&case.surface, u, v)?;
    let mut out = geometry_samples(cfg, p, &pt)?;
    let Some(ops) = ops else {
        return Ok(out);
    };
    operator_samples(&mut out, &ops.hamiltonian, &p.hamiltonian(v, cfg.hbar, cfg.mass)?, u, v)?;
    operator_samples(&mut out, &ops.momentum, &p.momentum(u, v, cfg.hbar)?, u, v)?;
    operator_samples(&mut out, &ops.oam, &p.angular_momentum(u, v, cfg.hbar)?, u, v)?;
    let (rashba, dresselhaus) = match case.forms {
        OracleForms::Cone => (p.rashba(u, v, cfg.alpha)?, p.dresselhaus(u, v, cfg.beta)?),
        OracleForms::Cylinder => (p.cylinder_rashba(u, v, cfg.alpha)?, p.cylinder_dresselhaus(u, v, cfg.beta)?),
    };
    operator_samples(&mut out, &ops.rashba, &rashba, u, v)?;
    operator_samples(&mut out, &ops.dresselhaus, &dresselhaus, u, v)?;
    Ok(out)
}

fn run_case(cfg: &VerifyConfig, case: &Case, with_operators: bool) -> Result<Vec<CheckResult>, VerifyError> {
    let ops = if with_operators {
        Some(Operators {
            hamiltonian: assemble_hamiltonian(&case.surface, cfg.hbar, cfg.mass)?,
            momentum: assemble_momentum(&case.surface, cfg.hbar)?,
            oam: assemble_oam(&case.surface, cfg.hbar)?,
            rashba: assemble_rashba(&case.surface, cfg.alpha, cfg.hbar)?,
            dresselhaus: assemble_dresselhaus(&case.surface, cfg.beta, cfg.hbar)?,
        })
    } else {
        None
    };
    let grid = GridSpec::for_surface(&case.surface, cfg.nu, cfg.nv);
    let points = grid.points();
    let per_point: Vec<Result<Vec<Sample>, VerifyError>> =
        points.par_iter().map(|&(u, v)| point_samples(cfg, case, ops.as_ref(), u, v)).collect();
    let per_point: Vec<Vec<Sample>> = per_point.into_iter().collect::<Result<_, _>>()?;

    let first = &per_point[0];
    let mut results = Vec::with_capacity(first.len());
    for (k, head) in first.iter().enumerate() {
        let column: Vec<&Sample> = per_point.iter().map(|s| &s[k]).collect();
        debug_assert!(column.iter().all(|s| s.quantity == head.quantity && s.component == head.component));
        let scale = column.iter().map(|s| s.oracle.max_abs()).fold(0.0, f64::max);
        let allowed = cfg.tolerance * scale + ABS_FLOOR;
        let mut worst = 0;
        let mut abs_err: f64 = -1.0;
        let mut failures = 0;
        for (n, s) in column.iter().enumerate() {
            let err = s.pipeline.try_add(&s.oracle.scale(C64::from(-1.0)))?.max_abs();
            if !(err <= allowed) {
                failures += 1;
            }
            if err > abs_err || err.is_nan() && !abs_err.is_nan() {
                abs_err = err;
                worst = n;
            }
        }
        let rel_err = if scale > 0.0 {
            abs_err / scale
        } else if abs_err == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        results.push(CheckResult {
            case: case.name.clone(),
            quantity: head.quantity.clone(),
            component: head.component.clone(),
            rows: head.rows.clone(),
            status: if failures == 0 { CheckStatus::Pass } else { CheckStatus::Fail },
            isolated_row: None,
            points: column.len(),
            failures,
            worst_point: points[worst],
            oracle: column[worst].oracle,
            pipeline: column[worst].pipeline,
            abs_err,
            rel_err,
        });
    }
    if case.escape_hatch {
        isolate_rows(&mut results);
    }
    Ok(results)
}

/// Marks a failing operator term as a printed-row discrepancy when exactly
/// one of its rows contributes to no passing term of the same operator.
fn isolate_rows(results: &mut [CheckResult]) {
    let mut passing_rows: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for r in results.iter().filter(|r| r.status == CheckStatus::Pass) {
        passing_rows.entry(r.quantity.clone()).or_default().extend(r.rows.iter().cloned());
    }
    for r in results.iter_mut().filter(|r| r.status == CheckStatus::Fail && !r.rows.is_empty()) {
        let ok = passing_rows.get(&r.quantity).cloned().unwrap_or_default();
        let suspects: Vec<&String> = r.rows.iter().filter(|row| !ok.contains(*row)).collect();
        if let [only] = suspects.as_slice() {
            r.isolated_row = Some((*only).clone());
            r.status = CheckStatus::PrintedRowDiscrepancy;
        }
    }
}

fn cone_surface(p: &ConeParams) -> Result<Surface, VerifyError> {
    let overrides = [("R".to_string(), p.r_min), ("phi".to_string(), p.phi), ("l".to_string(), p.l)];
    Ok(Surface::with_overrides(builtin("cone")?, &overrides)?)
}

fn check_config(cfg: &VerifyConfig) -> Result<(), VerifyError> {
    if cfg.nu < 2 || cfg.nv < 2 {
        return Err(VerifyError::Config(format!("grid must be at least 2x2, got {}x{}", cfg.nu, cfg.nv)));
    }
    if !(cfg.tolerance >= 0.0) {
        return Err(VerifyError::Config(format!("tolerance must be non-negative, got {}", cfg.tolerance)));
    }
    Ok(())
}

/// Geometry-only comparison on the cone chart: metrics, curvatures, the
/// rescaled factor, the geometric potential, momentum and angular momentum
/// and the reduced spin tensors. No operators are assembled.
pub fn verify_cone_geometry(cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    check_config(cfg)?;
    let case = Case {
        name: "cone".into(),
        surface: cone_surface(&cfg.cone)?,
        params: cfg.cone,
        forms: OracleForms::Cone,
        escape_hatch: false,
    };
    Ok(VerifyReport { config: *cfg, checks: run_case(cfg, &case, false)? })
}

/// Runs the full comparison: the cone at the configured angle, the cone
/// chart at a right angle and the builtin cylinder chart. Mismatches in the
/// two cylinder cases are never excused.
pub fn verify_cone(cfg: &VerifyConfig) -> Result<VerifyReport, VerifyError> {
    check_config(cfg)?;
    let cone = cfg.cone;
    let right = ConeParams::cylinder(cone.r_min, cone.l)?;
    let cylinder = Surface::with_overrides(builtin("cylinder")?, &[("R".to_string(), cone.r_min), ("l".to_string(), cone.l)])?;
    let cases = [
        Case { name: "cone".into(), surface: cone_surface(&cone)?, params: cone, forms: OracleForms::Cone, escape_hatch: true },
        Case {
            name: "cone chart at phi = pi/2".into(),
            surface: cone_surface(&right)?,
            params: right,
            forms: OracleForms::Cylinder,
            escape_hatch: false,
        },
        Case { name: "cylinder chart".into(), surface: cylinder, params: right, forms: OracleForms::Cylinder, escape_hatch: false },
    ];
    let mut checks = Vec::new();
    for case in &cases {
        checks.extend(run_case(cfg, case, true)?);
    }
    Ok(VerifyReport { config: *cfg, checks })
}

/// Convenience for callers that only need a spin matrix's distance.
pub fn spin_distance(a: &SpinMatrix, b: &SpinMatrix) -> f64 {
    (*a - *b).max_abs()
}
