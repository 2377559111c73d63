use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::expr::{normal_order, LocalOp, MultiIndex, OpExpr};
use super::value::{Value, ValueKind};
use super::OpError;
use crate::geometry::{frame_at, GeometryPoint};
use crate::grid::{GridField, GridSpec, JsonGrid};
use crate::surface::Surface;

/// A labelled contribution to an operator, before normal ordering.
#[derive(Debug, Clone)]
pub struct Piece {
    pub label: String,
    pub expr: OpExpr,
}

impl Piece {
    pub fn new(label: &str, expr: OpExpr) -> Piece {
        Piece { label: label.to_string(), expr }
    }
}

/// Builds an operator's pieces from the geometry at one chart point.
pub type Builder = dyn Fn(&GeometryPoint) -> Result<Vec<Piece>, OpError> + Send + Sync;

/// Relative size below which a term counts as identically zero.
pub const PRUNE_THRESHOLD: f64 = 1e-14;
/// Probe points per axis used to decide which terms are present.
pub const PROBES_PER_AXIS: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TermInfo {
    pub index: MultiIndex,
    /// Labels of the pieces that contribute to this term.
    pub provenance: Vec<String>,
}

/// A normal-ordered differential operator `Σ c_(m,n)(u, v) ∂_u^m ∂_v^n`
/// whose coefficient fields are evaluated on demand.
#[derive(Clone)]
pub struct DiffOp {
    name: String,
    kind: ValueKind,
    surface: Surface,
    builder: Arc<Builder>,
    terms: Vec<TermInfo>,
}

impl fmt::Debug for DiffOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DiffOp")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("terms", &self.terms)
            .finish()
    }
}

/// Cell-centred probe points avoiding chart edges.
pub fn probe_points(surface: &Surface) -> Vec<(f64, f64)> {
    let (u0, u1) = surface.u_range();
    let (v0, v1) = surface.v_range();
    let n = PROBES_PER_AXIS as f64;
    let mut out = Vec::with_capacity(PROBES_PER_AXIS * PROBES_PER_AXIS);
    for i in 0..PROBES_PER_AXIS {
        for j in 0..PROBES_PER_AXIS {
            out.push((u0 + (i as f64 + 0.5) * (u1 - u0) / n, v0 + (j as f64 + 0.5) * (v1 - v0) / n));
        }
    }
    out
}

fn add_into(map: &mut BTreeMap<MultiIndex, Value>, idx: MultiIndex, v: Value) -> Result<(), OpError> {
    match map.get_mut(&idx) {
        Some(e) => *e = e.try_add(&v)?,
        None => {
            map.insert(idx, v);
        }
    }
    Ok(())
}

impl DiffOp {
    /// Assembles an operator, keeping the terms that are nonzero on the
    /// probe grid.
    pub fn new(name: &str, kind: ValueKind, surface: &Surface, builder: Arc<Builder>) -> Result<DiffOp, OpError> {
        let mut op = DiffOp { name: name.to_string(), kind, surface: surface.clone(), builder, terms: Vec::new() };
        let probes: Vec<_> = probe_points(surface)
            .par_iter()
            .map(|&(u, v)| op.pieces_at(u, v))
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<_, _>>()?;

        let mut totals: BTreeMap<MultiIndex, f64> = BTreeMap::new();
        let mut by_piece: BTreeMap<(MultiIndex, usize), f64> = BTreeMap::new();
        let mut labels: Vec<String> = Vec::new();
        for pieces in &probes {
            let mut sum: BTreeMap<MultiIndex, Value> = BTreeMap::new();
            for (k, (label, local)) in pieces.iter().enumerate() {
                if labels.len() <= k {
                    labels.push(label.clone());
                }
                for (idx, v) in local {
                    if v.kind() != kind {
                        return Err(OpError::KindMismatch { left: kind, right: v.kind() });
                    }
                    let e = by_piece.entry((*idx, k)).or_insert(0.0);
                    *e = e.max(v.max_abs());
                    add_into(&mut sum, *idx, *v)?;
                }
            }
            for (idx, v) in sum {
                let e = totals.entry(idx).or_insert(0.0);
                *e = e.max(v.max_abs());
            }
        }
        let op_max = totals.values().copied().fold(0.0, f64::max);
        let threshold = PRUNE_THRESHOLD * op_max.max(1.0);
        op.terms = totals
            .into_iter()
            .filter(|&(_, m)| m > threshold)
            .map(|(index, _)| TermInfo {
                index,
                provenance: labels
                    .iter()
                    .enumerate()
                    .filter(|(k, _)| by_piece.get(&(index, *k)).is_some_and(|&m| m > threshold))
                    .map(|(_, l)| l.clone())
                    .collect(),
            })
            .collect();
        Ok(op)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn surface(&self) -> &Surface {
        &self.surface
    }

    /// Retained terms in multi-index order.
    pub fn terms(&self) -> &[TermInfo] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_degree(&self) -> u8 {
        self.terms.iter().map(|t| t.index.0 + t.index.1).max().unwrap_or(0)
    }

    fn build(&self, u: f64, v: f64) -> Result<Vec<Piece>, OpError> {
        let pt = frame_at(&self.surface, u, v)?;
        (self.builder)(&pt)
    }

    /// Normal-ordered coefficient values of every piece separately.
    pub fn pieces_at(&self, u: f64, v: f64) -> Result<Vec<(String, BTreeMap<MultiIndex, Value>)>, OpError> {
        self.build(u, v)?
            .into_iter()
            .map(|p| Ok((p.label, normal_order(&p.expr)?.values())))
            .collect()
    }

    /// The whole operator at a point, coefficients kept as local expansions.
    pub fn local_op_at(&self, u: f64, v: f64) -> Result<LocalOp, OpError> {
        let sum = OpExpr::Sum(self.build(u, v)?.into_iter().map(|p| p.expr).collect());
        normal_order(&sum)
    }

    /// Values of all retained coefficients at `(u, v)`.
    pub fn eval_at(&self, u: f64, v: f64) -> Result<BTreeMap<MultiIndex, Value>, OpError> {
        let mut sum: BTreeMap<MultiIndex, Value> = BTreeMap::new();
        for (_, local) in self.pieces_at(u, v)? {
            for (idx, val) in local {
                add_into(&mut sum, idx, val)?;
            }
        }
        Ok(self
            .terms
            .iter()
            .map(|t| (t.index, sum.get(&t.index).copied().unwrap_or(Value::zero(self.kind))))
            .collect())
    }

    pub fn coefficient(&self, index: MultiIndex) -> Option<CoefficientField<'_>> {
        let info = self.terms.iter().find(|t| t.index == index)?;
        Some(CoefficientField { op: self, info })
    }

    /// Samples every coefficient over a grid. The result is ordered by
    /// multi-index; each field has the Re/Im channels of the value kind.
    pub fn eval_on_grid(&self, nu: usize, nv: usize) -> Result<Vec<(TermInfo, GridField)>, OpError> {
        let grid = GridSpec::for_surface(&self.surface, nu, nv);
        let samples: Vec<Result<BTreeMap<MultiIndex, Value>, OpError>> =
            grid.points().par_iter().map(|&(u, v)| self.eval_at(u, v)).collect();
        let samples: Vec<BTreeMap<MultiIndex, Value>> = samples.into_iter().collect::<Result<_, _>>()?;
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let data = samples.iter().map(|s| s[&t.index].channels()).collect();
                (t.clone(), GridField::new(grid.clone(), self.kind.channel_names(), data))
            })
            .collect())
    }

    /// Machine-readable dump: value kind and each term's multi-index,
    /// provenance and sampled coefficient grid, as pretty-printed JSON.
    pub fn to_json(&self, nu: usize, nv: usize) -> Result<String, OpError> {
        let sampled = self.eval_on_grid(nu, nv)?;
        let doc = OperatorDump {
            operator: &self.name,
            value_kind: self.kind,
            terms: sampled
                .iter()
                .map(|(t, field)| TermDump {
                    dmu: t.index.0,
                    dnu: t.index.1,
                    provenance: t.provenance.join(" + "),
                    field: field.to_json(),
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc).expect("operator dump serializes"))
    }
}

#[derive(Serialize)]
struct OperatorDump<'a> {
    operator: &'a str,
    value_kind: ValueKind,
    terms: Vec<TermDump<'a>>,
}

#[derive(Serialize)]
struct TermDump<'a> {
    dmu: u8,
    dnu: u8,
    provenance: String,
    field: JsonGrid<'a>,
}

/// One coefficient of a `DiffOp`, evaluable at any chart point.
#[derive(Debug, Clone, Copy)]
pub struct CoefficientField<'a> {
    op: &'a DiffOp,
    info: &'a TermInfo,
}

impl CoefficientField<'_> {
    pub fn index(&self) -> MultiIndex {
        self.info.index
    }

    pub fn provenance(&self) -> &[String] {
        &self.info.provenance
    }

    pub fn eval(&self, u: f64, v: f64) -> Result<Value, OpError> {
        Ok(self.op.eval_at(u, v)?[&self.info.index])
    }
}
