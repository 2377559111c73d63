//! The five effective operators, written as pre-normal-order expressions in
//! the local geometric fields.

use std::sync::Arc;

use super::diffop::{DiffOp, Piece};
use super::expr::OpExpr;
use super::local::LocalField;
use super::value::{Value, ValueKind};
use super::OpError;
use crate::geometry::{geometric_potential, GeometryPoint, LocalJet, CURVATURE_ORDER, METRIC_ORDER};
use crate::spin::{dresselhaus_tensor_ccs, pauli_ccs, rashba_tensor_ccs, SpinMatrix, C64};
use crate::surface::Surface;

fn jet_field(j: &LocalJet, valid: u8) -> LocalField {
    LocalField::from_jet(j, valid)
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn complex_vector(v: [f64; 3], s: C64) -> Value {
    Value::Vector(v.map(|x| s * x))
}

/// `Σ_c g^{ac} ∂_c`.
fn raised_gradient(pt: &GeometryPoint, a: usize) -> OpExpr {
    OpExpr::sum((0..2).map(|c| {
        OpExpr::compose([OpExpr::field(jet_field(&pt.local.metric_inv[a][c], METRIC_ORDER)), OpExpr::D(c as u8)])
    }))
}

/// `Σ_b g1^{ab} ∂_b` with the normal derivative of the offset inverse metric.
fn normal_gradient(pt: &GeometryPoint, a: usize) -> OpExpr {
    OpExpr::sum((0..2).map(|b| {
        OpExpr::compose([OpExpr::field(jet_field(&pt.local.g1_inv[a][b], CURVATURE_ORDER)), OpExpr::D(b as u8)])
    }))
}

fn check_orthogonal(pt: &GeometryPoint) -> Result<(), OpError> {
    let g = pt.metric;
    let g12 = g[0][1];
    if g12.abs() > 1e-12 * (g[0][0] * g[1][1]).sqrt() {
        return Err(OpError::NonOrthogonalChart { u: pt.u, v: pt.v, g12 });
    }
    Ok(())
}

/// `-ħ²/2m (1/√g) ∂_a (√g g^{ab} ∂_b) - ħ²/2m (M² - K)`.
pub fn assemble_hamiltonian(surface: &Surface, hbar: f64, mass: f64) -> Result<DiffOp, OpError> {
    if !(mass > 0.0) {
        return Err(OpError::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    let prefactor = C64::from(-hbar * hbar / (2.0 * mass));
    let builder = move |pt: &GeometryPoint| -> Result<Vec<Piece>, OpError> {
        let l = &pt.local;
        let inv_root = LocalJet::constant(1.0).checked_div(&l.sqrt_det).map_err(OpError::Jet)?;
        let mut parts = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                parts.push(OpExpr::compose([
                    OpExpr::field(jet_field(&inv_root, METRIC_ORDER)),
                    OpExpr::D(a as u8),
                    OpExpr::field(jet_field(&(l.sqrt_det * l.metric_inv[a][b]), METRIC_ORDER)),
                    OpExpr::D(b as u8),
                ]));
            }
        }
        Ok(vec![
            Piece::new("surface kinetic energy", OpExpr::sum(parts).scaled(prefactor)),
            Piece::new("geometric potential", OpExpr::value(Value::real(geometric_potential(pt, hbar, mass)))),
        ])
    };
    DiffOp::new("hamiltonian", ValueKind::Scalar, surface, Arc::new(builder))
}

/// `-iħ Σ_a e_a g_aa^{-1/2} ∂_a + iħ M en`. Orthogonal charts only.
pub fn assemble_momentum(surface: &Surface, hbar: f64) -> Result<DiffOp, OpError> {
    let minus_ih = C64::new(0.0, -hbar);
    let builder = move |pt: &GeometryPoint| -> Result<Vec<Piece>, OpError> {
        check_orthogonal(pt)?;
        let surface_part = OpExpr::sum((0..2).map(|a| {
            let dir = pt.tangents[a].map(|x| x / pt.metric[a][a]);
            OpExpr::compose([OpExpr::value(complex_vector(dir, minus_ih)), OpExpr::D(a as u8)])
        }));
        let geometric = complex_vector(pt.en, -minus_ih * pt.mean_curvature);
        Ok(vec![
            Piece::new("surface momentum", surface_part),
            Piece::new("geometric momentum", OpExpr::value(geometric)),
        ])
    };
    DiffOp::new("momentum", ValueKind::Vector3, surface, Arc::new(builder))
}

/// `r × P_E`: `-iħ Σ_a (r × e_a) g_aa^{-1/2} ∂_a + iħ (r × en) M`.
pub fn assemble_oam(surface: &Surface, hbar: f64) -> Result<DiffOp, OpError> {
    let minus_ih = C64::new(0.0, -hbar);
    let builder = move |pt: &GeometryPoint| -> Result<Vec<Piece>, OpError> {
        check_orthogonal(pt)?;
        let r = pt.position;
        let surface_part = OpExpr::sum((0..2).map(|a| {
            let dir = cross(r, pt.tangents[a]).map(|x| x / pt.metric[a][a]);
            OpExpr::compose([OpExpr::value(complex_vector(dir, minus_ih)), OpExpr::D(a as u8)])
        }));
        let geometric = complex_vector(cross(r, pt.en), -minus_ih * pt.mean_curvature);
        Ok(vec![
            Piece::new("surface angular momentum", surface_part),
            Piece::new("geometric angular momentum", OpExpr::value(geometric)),
        ])
    };
    DiffOp::new("angular_momentum", ValueKind::Vector3, surface, Arc::new(builder))
}

/// `-iħ S_ia σ^i g^{ab} ∂_b + iħ S_i3 σ^i M`.
pub fn assemble_rashba(surface: &Surface, alpha: f64, hbar: f64) -> Result<DiffOp, OpError> {
    let builder = move |pt: &GeometryPoint| -> Result<Vec<Piece>, OpError> {
        let sigma = pauli_ccs(pt)?;
        let s = rashba_tensor_ccs(pt, alpha, hbar)?;
        let minus_ih = C64::new(0.0, -hbar);
        let surface_part = OpExpr::sum((0..2).map(|b| {
            let mut coeff = SpinMatrix::zero();
            for (i, sig) in sigma.iter().enumerate() {
                for a in 0..2 {
                    coeff = coeff + *sig * C64::from(s[i][a] * pt.metric_inv[a][b]);
                }
            }
            OpExpr::compose([OpExpr::value(Value::Spin(coeff * minus_ih)), OpExpr::D(b as u8)])
        }));
        let mut geo = SpinMatrix::zero();
        for (i, sig) in sigma.iter().enumerate() {
            geo = geo + *sig * C64::from(s[i][2]);
        }
        let geo = geo * (-minus_ih * pt.mean_curvature);
        Ok(vec![
            Piece::new("surface rashba", surface_part),
            Piece::new("geometric rashba", OpExpr::value(Value::Spin(geo))),
        ])
    };
    DiffOp::new("rashba", ValueKind::Spin, surface, Arc::new(builder))
}

/// Cubic Dresselhaus coupling: the surface cubic term plus the four
/// geometric terms generated by the normal derivative, with curvature
/// factors standing to the right of the derivatives.
pub fn assemble_dresselhaus(surface: &Surface, beta: f64, hbar: f64) -> Result<DiffOp, OpError> {
    let builder = move |pt: &GeometryPoint| -> Result<Vec<Piece>, OpError> {
        let sigma = pauli_ccs(pt)?;
        let d = dresselhaus_tensor_ccs(pt, beta, hbar)?;
        let ih3 = C64::new(0.0, hbar * hbar * hbar);
        let spin = |m: SpinMatrix, s: C64| OpExpr::value(Value::Spin(m * s));
        let l = &pt.local;
        let mean = jet_field(&l.mean, CURVATURE_ORDER);
        let gradient_source = jet_field(&(l.mean * l.mean * 3.0 - l.gauss), CURVATURE_ORDER);

        let mut surface_terms = Vec::new();
        let (mut outer, mut inner, mut squared, mut gradient) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for a in 0..2 {
            for b in 0..2 {
                if a != b {
                    surface_terms.push(OpExpr::compose([
                        spin(sigma[a], ih3 * d[a][b]),
                        raised_gradient(pt, a),
                        raised_gradient(pt, b),
                        raised_gradient(pt, b),
                    ]));
                }
            }
            outer.push(OpExpr::compose([spin(sigma[2], ih3 * d[2][a]), normal_gradient(pt, a), raised_gradient(pt, a)]));
            inner.push(OpExpr::compose([spin(sigma[2], -ih3 * d[2][a]), raised_gradient(pt, a), normal_gradient(pt, a)]));
            squared.push(OpExpr::compose([
                spin(sigma[2], -ih3 * d[2][a]),
                raised_gradient(pt, a),
                raised_gradient(pt, a),
                OpExpr::field(mean.clone()),
            ]));
            gradient.push(OpExpr::compose([
                spin(sigma[a], ih3 * d[a][2]),
                raised_gradient(pt, a),
                OpExpr::field(gradient_source.clone()),
            ]));
        }
        Ok(vec![
            Piece::new("surface cubic", OpExpr::sum(surface_terms)),
            Piece::new("normal metric derivative (outer)", OpExpr::sum(outer)),
            Piece::new("normal metric derivative (inner)", OpExpr::sum(inner)),
            Piece::new("mean curvature times square", OpExpr::sum(squared)),
            Piece::new("curvature gradient", OpExpr::sum(gradient)),
        ])
    };
    DiffOp::new("dresselhaus", ValueKind::Spin, surface, Arc::new(builder))
}
