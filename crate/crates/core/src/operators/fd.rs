//! Applying a normal-ordered operator to a sampled wavefunction with
//! central finite differences.

use rayon::prelude::*;

use super::diffop::DiffOp;
use super::value::{Value, ValueKind};
use super::OpError;
use crate::grid::GridSpec;
use crate::spin::C64;

/// Default formal accuracy of the difference stencils.
pub const DEFAULT_ACCURACY: usize = 8;

/// Complex multi-component samples on a grid, stored point-major:
/// `values[grid.index(i, j) * components + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub grid: GridSpec,
    pub components: usize,
    pub values: Vec<C64>,
}

impl ComplexField {
    pub fn zeros(grid: GridSpec, components: usize) -> ComplexField {
        let n = grid.len() * components;
        ComplexField { grid, components, values: vec![C64::new(0.0, 0.0); n] }
    }

    /// Samples `f(u, v)` at every grid point.
    pub fn from_fn<F>(grid: GridSpec, components: usize, f: F) -> ComplexField
    where
        F: Fn(f64, f64) -> Vec<C64>,
    {
        let mut values = Vec::with_capacity(grid.len() * components);
        for (u, v) in grid.points() {
            let s = f(u, v);
            assert_eq!(s.len(), components, "sample has the wrong number of components");
            values.extend(s);
        }
        ComplexField { grid, components, values }
    }

    pub fn at(&self, i: usize, j: usize) -> &[C64] {
        let k = self.grid.index(i, j) * self.components;
        &self.values[k..k + self.components]
    }

    /// Single component `c` as a one-component field.
    pub fn component(&self, c: usize) -> ComplexField {
        let values = self.values.iter().skip(c).step_by(self.components).copied().collect();
        ComplexField { grid: self.grid.clone(), components: 1, values }
    }

    /// `Σ conj(a) b` weighted by `weight(u, v)` times the cell area.
    pub fn inner(&self, other: &ComplexField, weight: impl Fn(f64, f64) -> f64) -> Result<C64, OpError> {
        if self.grid != other.grid || self.components != other.components {
            return Err(OpError::ShapeMismatch("inner product of fields on different grids".into()));
        }
        let cell = self.grid.du() * self.grid.dv();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..self.grid.nu {
            for j in 0..self.grid.nv {
                let w = weight(self.grid.u(i), self.grid.v(j)) * cell;
                for (a, b) in self.at(i, j).iter().zip(other.at(i, j)) {
                    acc += a.conj() * b * w;
                }
            }
        }
        Ok(acc)
    }
}

/// Finite-difference weights for derivatives `0..=m` at `z` on nodes `x`.
pub fn fornberg_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Central stencil `(half_width, weights)` for the `order`-th derivative
/// with unit spacing.
pub fn central_stencil(order: usize, accuracy: usize) -> (usize, Vec<f64>) {
    if order == 0 {
        return (0, vec![1.0]);
    }
    let points = 2 * order.div_ceil(2) - 1 + accuracy;
    let half = (points - 1) / 2;
    let nodes: Vec<f64> = (0..points).map(|k| k as f64 - half as f64).collect();
    (half, fornberg_weights(0.0, &nodes, order).swap_remove(order))
}

/// Applies `op` to `psi` and returns the result on the interior points
/// where every stencil fits; periodic axes keep all their points.
///
/// Scalar operators act componentwise, vector operators on a
/// one-component field give three components, and spin operators act on
/// two-component spinors.
pub fn apply_to_wavefunction(op: &DiffOp, psi: &ComplexField, accuracy: usize) -> Result<ComplexField, OpError> {
    if accuracy < 2 || accuracy % 2 != 0 {
        return Err(OpError::InvalidArgument(format!("stencil accuracy must be even and at least 2, got {accuracy}")));
    }
    let out_components = match (op.kind(), psi.components) {
        (ValueKind::Scalar, c) if c > 0 => c,
        (ValueKind::Vector3, 1) => 3,
        (ValueKind::Spin, 2) => 2,
        (kind, c) => {
            return Err(OpError::ShapeMismatch(format!("a {} operator cannot act on a {c}-component field", kind.name())))
        }
    };
    let g = &psi.grid;
    let max_u = op.terms().iter().map(|t| t.index.0 as usize).max().unwrap_or(0);
    let max_v = op.terms().iter().map(|t| t.index.1 as usize).max().unwrap_or(0);
    let stencils_u: Vec<_> = (0..=max_u).map(|m| central_stencil(m, accuracy)).collect();
    let stencils_v: Vec<_> = (0..=max_v).map(|m| central_stencil(m, accuracy)).collect();
    let margin_u = if g.periodic_u { 0 } else { stencils_u.iter().map(|s| s.0).max().unwrap_or(0) };
    let margin_v = if g.periodic_v { 0 } else { stencils_v.iter().map(|s| s.0).max().unwrap_or(0) };
    let reach_u = stencils_u.iter().map(|s| 2 * s.0 + 1).max().unwrap_or(1);
    let reach_v = stencils_v.iter().map(|s| 2 * s.0 + 1).max().unwrap_or(1);
    if g.nu < reach_u.max(2 * margin_u + 1) || g.nv < reach_v.max(2 * margin_v + 1) {
        return Err(OpError::ShapeMismatch(format!("grid {}x{} is too small for the stencils", g.nu, g.nv)));
    }

    let out_grid = GridSpec {
        nu: g.nu - 2 * margin_u,
        nv: g.nv - 2 * margin_v,
        u_range: if g.periodic_u { g.u_range } else { (g.u(margin_u), g.u(g.nu - 1 - margin_u)) },
        v_range: if g.periodic_v { g.v_range } else { (g.v(margin_v), g.v(g.nv - 1 - margin_v)) },
        periodic_u: g.periodic_u,
        periodic_v: g.periodic_v,
    };
    let (hu, hv) = (g.du(), g.dv());
    let wrap = |k: isize, n: usize| -> usize { k.rem_euclid(n as isize) as usize };

    let points: Vec<(usize, usize)> =
        (0..out_grid.nu).flat_map(|i| (0..out_grid.nv).map(move |j| (i, j))).collect();
    let blocks: Vec<Result<Vec<C64>, OpError>> = points
        .par_iter()
        .map(|&(oi, oj)| {
            let (i, j) = (oi + margin_u, oj + margin_v);
            let coeffs = op.eval_at(g.u(i), g.v(j))?;
            let mut acc = vec![C64::new(0.0, 0.0); out_components];
            for (&(m, n), value) in &coeffs {
                let (half_u, wu) = &stencils_u[m as usize];
                let (half_v, wv) = &stencils_v[n as usize];
                let scale = hu.powi(m as i32) * hv.powi(n as i32);
                let mut deriv = vec![C64::new(0.0, 0.0); psi.components];
                for (a, &wa) in wu.iter().enumerate() {
                    if wa == 0.0 {
                        continue;
                    }
                    let ii = wrap(i as isize + a as isize - *half_u as isize, g.nu);
                    for (b, &wb) in wv.iter().enumerate() {
                        if wb == 0.0 {
                            continue;
                        }
                        let jj = wrap(j as isize + b as isize - *half_v as isize, g.nv);
                        for (d, s) in deriv.iter_mut().zip(psi.at(ii, jj)) {
                            *d += s * (wa * wb);
                        }
                    }
                }
                for d in deriv.iter_mut() {
                    *d /= scale;
                }
                match value {
                    Value::Scalar(c) => {
                        for (o, d) in acc.iter_mut().zip(&deriv) {
                            *o += c * d;
                        }
                    }
                    Value::Vector(vec) => {
                        for (o, c) in acc.iter_mut().zip(vec) {
                            *o += c * deriv[0];
                        }
                    }
                    Value::Spin(s) => {
                        let r = s.apply([deriv[0], deriv[1]]);
                        acc[0] += r[0];
                        acc[1] += r[1];
                    }
                }
            }
            Ok(acc)
        })
        .collect();
    let mut values = Vec::with_capacity(out_grid.len() * out_components);
    for b in blocks {
        values.extend(b?);
    }
    Ok(ComplexField { grid: out_grid, components: out_components, values })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_stencils() {
        let (h, w) = central_stencil(1, 2);
        assert_eq!(h, 1);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let (h, w) = central_stencil(2, 2);
        assert_eq!(h, 1);
        assert!((w[0] - 1.0).abs() < 1e-15 && (w[1] + 2.0).abs() < 1e-15);
        let (h, w) = central_stencil(3, 2);
        assert_eq!(h, 2);
        assert!((w[0] + 0.5).abs() < 1e-14 && (w[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn stencils_are_exact_on_polynomials() {
        for order in 1..=3 {
            for acc in [2, 4, 6] {
                let (half, w) = central_stencil(order, acc);
                // exact for x^p with p <= order + acc - 1
                for p in 0..order + acc {
                    let got: f64 = w.iter().enumerate().map(|(k, wk)| wk * (k as f64 - half as f64 + 0.3).powi(p as i32)).sum();
                    let exact = if p < order {
                        0.0
                    } else {
                        (p - order + 1..=p).map(|x| x as f64).product::<f64>() * 0.3f64.powi((p - order) as i32)
                    };
                    assert!((got - exact).abs() < 1e-9, "order {order} acc {acc} p {p}: {got} vs {exact}");
                }
            }
        }
    }
}
