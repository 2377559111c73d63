//! Pointwise differential geometry of a parametrized surface and of its
//! normal offset layer `R(u, v, q3) = r(u, v) + q3 en(u, v)`.
//!
//! Everything is derived from a single jet evaluation of the embedding per
//! point; no finite differences are involved.

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{GridField, GridSpec};
use crate::jets::{Jet, Jet3, Jet4, JetError};
use crate::surface::Surface;

/// Jet type used for chart-local fields. Order 4 leaves second derivatives
/// of curvature available after the two differentiations that produce it.
pub type LocalJet = Jet4;

/// Number of valid Taylor orders of each family of local fields.
pub const EMBEDDING_ORDER: u8 = 4;
pub const METRIC_ORDER: u8 = 3;
pub const CURVATURE_ORDER: u8 = 2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate metric at (u, v) = ({u}, {v}): det g = {det:e}")]
    DegenerateMetric { u: f64, v: f64, det: f64 },
    #[error("evaluation failed at (u, v) = ({u}, {v}): {source}")]
    Domain {
        u: f64,
        v: f64,
        #[source]
        source: JetError,
    },
    #[error("normal offset q3 = {q3} makes the rescaled factor non-positive (f = {f})")]
    InvalidOffset { q3: f64, f: f64 },
    #[error("bracket order must be 1 or 2, got {0}")]
    InvalidOrder(u8),
}

type V3<T> = [T; 3];
type M2<T> = [[T; 2]; 2];

fn dot<const N: usize>(a: &V3<Jet<N>>, b: &V3<Jet<N>>) -> Jet<N> {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<const N: usize>(a: &V3<Jet<N>>, b: &V3<Jet<N>>) -> V3<Jet<N>> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn values<const N: usize>(a: &V3<Jet<N>>) -> [f64; 3] {
    [a[0].value(), a[1].value(), a[2].value()]
}

fn mat_values<const N: usize>(m: &M2<Jet<N>>) -> [[f64; 2]; 2] {
    [[m[0][0].value(), m[0][1].value()], [m[1][0].value(), m[1][1].value()]]
}

fn matmul<const N: usize>(a: &M2<Jet<N>>, b: &M2<Jet<N>>) -> M2<Jet<N>> {
    let mut out = [[Jet::zero(); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn transpose<T: Copy>(a: &M2<T>) -> M2<T> {
    [[a[0][0], a[1][0]], [a[0][1], a[1][1]]]
}

fn inverse2<const N: usize>(m: &M2<Jet<N>>) -> Result<M2<Jet<N>>, JetError> {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = Jet::constant(1.0).checked_div(&det)?;
    Ok([[m[1][1] * inv, -m[0][1] * inv], [-m[1][0] * inv, m[0][0] * inv]])
}

/// Chart-local Taylor expansions of the geometric fields around one point,
/// in the chart variables (jet variables 0 and 1).
#[derive(Debug, Clone)]
pub struct LocalFields {
    pub position: V3<LocalJet>,
    pub tangents: [V3<LocalJet>; 2],
    pub normal: V3<LocalJet>,
    pub metric: M2<LocalJet>,
    pub metric_inv: M2<LocalJet>,
    pub sqrt_det: LocalJet,
    pub second_form: M2<LocalJet>,
    pub weingarten: M2<LocalJet>,
    pub mean: LocalJet,
    pub gauss: LocalJet,
    /// Normal derivative of the offset inverse metric at the surface.
    pub g1_inv: M2<LocalJet>,
}

/// All pointwise geometric data at a chart point.
#[derive(Debug, Clone)]
pub struct GeometryPoint {
    pub u: f64,
    pub v: f64,
    pub position: [f64; 3],
    /// Coordinate tangents `∂_u r`, `∂_v r` (not normalized).
    pub tangents: [[f64; 3]; 2],
    pub e1: [f64; 3],
    pub e2: [f64; 3],
    pub en: [f64; 3],
    pub metric: [[f64; 2]; 2],
    pub metric_inv: [[f64; 2]; 2],
    pub second_form: [[f64; 2]; 2],
    pub weingarten: [[f64; 2]; 2],
    pub mean_curvature: f64,
    pub gaussian_curvature: f64,
    /// Rescaled factor as a jet in the normal offset (jet variable 2).
    pub f_jet: Jet3,
    pub g1_inv: [[f64; 2]; 2],
    /// `dg_inv[c][a][b] = ∂_c g^{ab}`.
    pub dg_inv: [[[f64; 2]; 2]; 2],
    /// `d2g_inv[c][d][a][b] = ∂_c ∂_d g^{ab}`.
    pub d2g_inv: [[[[f64; 2]; 2]; 2]; 2],
    pub dm: [f64; 2],
    pub dk: [f64; 2],
    pub local: LocalFields,
}

fn unit(a: [f64; 3]) -> [f64; 3] {
    let n = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

fn first_derivative(j: &LocalJet, c: usize) -> f64 {
    if c == 0 {
        j.derivative(1, 0, 0)
    } else {
        j.derivative(0, 1, 0)
    }
}

fn second_derivative(j: &LocalJet, c: usize, d: usize) -> f64 {
    let mut e = [0usize; 2];
    e[c] += 1;
    e[d] += 1;
    j.derivative(e[0], e[1], 0)
}

/// Computes every geometric quantity at `(u, v)`.
pub fn frame_at(surface: &Surface, u: f64, v: f64) -> Result<GeometryPoint, GeometryError> {
    let domain = |source| GeometryError::Domain { u, v, source };
    let uj = LocalJet::seed(0, u).map_err(domain)?;
    let vj = LocalJet::seed(1, v).map_err(domain)?;
    let position = surface.eval_embedding(&uj, &vj).map_err(domain)?;

    let tangents = [position.map(|c| c.partial(0)), position.map(|c| c.partial(1))];
    let mut metric = [[LocalJet::zero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            metric[a][b] = dot(&tangents[a], &tangents[b]);
        }
    }
    let g = mat_values(&metric);
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let trace = g[0][0] + g[1][1];
    if !(det > 1e-14 * trace * trace) || !det.is_finite() {
        return Err(GeometryError::DegenerateMetric { u, v, det });
    }
    let det_jet = metric[0][0] * metric[1][1] - metric[0][1] * metric[1][0];
    let sqrt_det = det_jet.checked_sqrt().map_err(domain)?;
    let area = cross(&tangents[0], &tangents[1]);
    let inv_norm = LocalJet::constant(1.0)
        .checked_div(&dot(&area, &area).checked_sqrt().map_err(domain)?)
        .map_err(domain)?;
    let normal = area.map(|c| c * inv_norm);
    let metric_inv = inverse2(&metric).map_err(domain)?;

    let mut second_form = [[LocalJet::zero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let hess = tangents[a].map(|c| c.partial(b));
            second_form[a][b] = dot(&normal, &hess);
        }
    }

    // Weingarten matrix, entry by entry in the adjugate arrangement.
    let inv_det = LocalJet::constant(1.0).checked_div(&det_jet).map_err(domain)?;
    let (gm, h) = (&metric, &second_form);
    let weingarten = [
        [
            (gm[0][1] * h[1][0] - gm[1][1] * h[0][0]) * inv_det,
            (gm[1][0] * h[0][0] - gm[0][0] * h[1][0]) * inv_det,
        ],
        [
            (gm[0][1] * h[1][1] - gm[1][1] * h[0][1]) * inv_det,
            (gm[0][1] * h[1][0] - gm[0][0] * h[1][1]) * inv_det,
        ],
    ];
    let mean = (weingarten[0][0] + weingarten[1][1]).scale(0.5);
    let gauss = weingarten[0][0] * weingarten[1][1] - weingarten[0][1] * weingarten[1][0];

    // First-order coefficient of the offset metric and of its inverse.
    let alpha_g = matmul(&weingarten, &metric);
    let linear = {
        let t = transpose(&alpha_g);
        [[alpha_g[0][0] + t[0][0], alpha_g[0][1] + t[0][1]], [alpha_g[1][0] + t[1][0], alpha_g[1][1] + t[1][1]]]
    };
    let g1_jet = matmul(&matmul(&metric_inv, &linear), &metric_inv).map(|row| row.map(|c| -c));

    let local = LocalFields {
        position,
        tangents,
        normal,
        metric,
        metric_inv,
        sqrt_det,
        second_form,
        weingarten,
        mean,
        gauss,
        g1_inv: g1_jet,
    };

    let m = mean.value();
    let k = gauss.value();
    let t = Jet3::seed(2, 0.0).expect("variable 2 exists");
    let f_jet = Jet3::constant(1.0) + t.scale(2.0 * m) + (t * t).scale(k);

    let alpha = mat_values(&weingarten);
    let g1_inv = g1_via_offset_metric(&g, &alpha).map_err(domain)?;

    let mut dg_inv = [[[0.0; 2]; 2]; 2];
    let mut d2g_inv = [[[[0.0; 2]; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                dg_inv[c][a][b] = first_derivative(&metric_inv[a][b], c);
                for d in 0..2 {
                    d2g_inv[c][d][a][b] = second_derivative(&metric_inv[a][b], c, d);
                }
            }
        }
    }

    let tan_vals = [values(&tangents[0]), values(&tangents[1])];
    Ok(GeometryPoint {
        u,
        v,
        position: values(&position),
        tangents: tan_vals,
        e1: unit(tan_vals[0]),
        e2: unit(tan_vals[1]),
        en: values(&normal),
        metric: g,
        metric_inv: mat_values(&metric_inv),
        second_form: mat_values(&second_form),
        weingarten: alpha,
        mean_curvature: m,
        gaussian_curvature: k,
        f_jet,
        g1_inv,
        dg_inv,
        d2g_inv,
        dm: [first_derivative(&mean, 0), first_derivative(&mean, 1)],
        dk: [first_derivative(&gauss, 0), first_derivative(&gauss, 1)],
        local,
    })
}

/// Offset metric block `G_ab(q3)` from the polynomial in `q3` built out of
/// `g` and the Weingarten matrix.
fn offset_block<const N: usize>(g: &[[f64; 2]; 2], alpha: &[[f64; 2]; 2], q3: Jet<N>) -> M2<Jet<N>> {
    let c = |x: f64| Jet::<N>::constant(x);
    let gm = [[c(g[0][0]), c(g[0][1])], [c(g[1][0]), c(g[1][1])]];
    let am = [[c(alpha[0][0]), c(alpha[0][1])], [c(alpha[1][0]), c(alpha[1][1])]];
    let ag = matmul(&am, &gm);
    let gt_at = matmul(&transpose(&gm), &transpose(&am));
    let aga = matmul(&ag, &transpose(&am));
    let q2 = q3 * q3;
    let mut out = [[Jet::zero(); 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = gm[a][b] + (ag[a][b] + gt_at[a][b]) * q3 + aga[a][b] * q2;
        }
    }
    out
}

fn g1_via_offset_metric(g: &[[f64; 2]; 2], alpha: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2], JetError> {
    let q3 = Jet3::seed(2, 0.0)?;
    let inv = inverse2(&offset_block(g, alpha, q3))?;
    Ok(inv.map(|row| row.map(|c| c.coeff(0, 0, 1))))
}

impl GeometryPoint {
    /// Normal derivative of the offset inverse metric computed from the
    /// offset embedding `∂_a R = ∂_a r + q3 ∂_a en` directly, independent
    /// of the Weingarten matrix.
    pub fn g1_inv_from_embedding(&self) -> [[f64; 2]; 2] {
        let q3 = Jet3::seed(2, 0.0).expect("variable 2 exists");
        let mut d_r: [V3<Jet3>; 2] = [[Jet3::zero(); 3]; 2];
        for a in 0..2 {
            for s in 0..3 {
                let dn = first_derivative(&self.local.normal[s], a);
                d_r[a][s] = Jet3::constant(self.tangents[a][s]) + q3.scale(dn);
            }
        }
        let mut big = [[Jet3::zero(); 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                big[a][b] = dot(&d_r[a], &d_r[b]);
            }
        }
        let inv = inverse2(&big).expect("metric is non-degenerate at a frame point");
        inv.map(|row| row.map(|c| c.coeff(0, 0, 1)))
    }

    /// Value of the rescaled factor at normal offset `q3`.
    pub fn rescaled_factor(&self, q3: f64) -> f64 {
        1.0 + 2.0 * self.mean_curvature * q3 + self.gaussian_curvature * q3 * q3
    }

    pub fn det_metric(&self) -> f64 {
        self.metric[0][0] * self.metric[1][1] - self.metric[0][1] * self.metric[1][0]
    }
}

/// Full 3×3 metric of the offset layer at normal distance `q3`.
pub fn offset_metric(pt: &GeometryPoint, q3: f64) -> Result<[[f64; 3]; 3], GeometryError> {
    let f = pt.rescaled_factor(q3);
    if !(f > 0.0) {
        return Err(GeometryError::InvalidOffset { q3, f });
    }
    let block = offset_block(&pt.metric, &pt.weingarten, Jet::<1>::constant(q3));
    let mut out = [[0.0; 3]; 3];
    for a in 0..2 {
        for b in 0..2 {
            out[a][b] = block[a][b].value();
        }
    }
    out[2][2] = 1.0;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BracketField {
    /// The rescaled factor `f`.
    Factor,
    /// `1 / sqrt(f)`.
    InvSqrtFactor,
}

/// `n`-th normal derivative of `f` or `1/√f` at the surface.
pub fn reduced_bracket(pt: &GeometryPoint, field: BracketField, order: u8) -> Result<f64, GeometryError> {
    if !(1..=2).contains(&order) {
        return Err(GeometryError::InvalidOrder(order));
    }
    let jet = match field {
        BracketField::Factor => pt.f_jet,
        BracketField::InvSqrtFactor => pt
            .f_jet
            .checked_powf(-0.5)
            .map_err(|source| GeometryError::Domain { u: pt.u, v: pt.v, source })?,
    };
    Ok(jet.derivative(0, 0, order as usize))
}

/// Curvature-induced scalar potential `-ħ²/2m (M² - K)`.
pub fn geometric_potential(pt: &GeometryPoint, hbar: f64, mass: f64) -> f64 {
    let m = pt.mean_curvature;
    -hbar * hbar / (2.0 * mass) * (m * m - pt.gaussian_curvature)
}

/// Scalar geometric quantities that can be sampled over a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    MeanCurvature,
    GaussianCurvature,
    GeometricPotential,
    /// Coefficient of `q3^k` in the rescaled factor, `k` in 0..=3.
    FactorCoeff(u8),
    Metric(u8, u8),
    InvMetric(u8, u8),
    G1Inv(u8, u8),
}

impl Quantity {
    pub fn name(self) -> String {
        let idx = |a: u8, b: u8| format!("{}{}", a + 1, b + 1);
        match self {
            Quantity::MeanCurvature => "M".into(),
            Quantity::GaussianCurvature => "K".into(),
            Quantity::GeometricPotential => "Vg".into(),
            Quantity::FactorCoeff(k) => format!("f{k}"),
            Quantity::Metric(a, b) => format!("g{}", idx(a, b)),
            Quantity::InvMetric(a, b) => format!("ginv{}", idx(a, b)),
            Quantity::G1Inv(a, b) => format!("g1inv{}", idx(a, b)),
        }
    }

    pub fn extract(self, pt: &GeometryPoint, hbar: f64, mass: f64) -> f64 {
        match self {
            Quantity::MeanCurvature => pt.mean_curvature,
            Quantity::GaussianCurvature => pt.gaussian_curvature,
            Quantity::GeometricPotential => geometric_potential(pt, hbar, mass),
            Quantity::FactorCoeff(k) => pt.f_jet.coeff(0, 0, k as usize),
            Quantity::Metric(a, b) => pt.metric[a as usize][b as usize],
            Quantity::InvMetric(a, b) => pt.metric_inv[a as usize][b as usize],
            Quantity::G1Inv(a, b) => pt.g1_inv[a as usize][b as usize],
        }
    }
}

/// Evaluates `frame_at` over the grid, in parallel, keeping row-major order.
/// The first failing point in grid order is reported.
pub fn frames_on_grid(surface: &Surface, grid: &GridSpec) -> Result<Vec<GeometryPoint>, GeometryError> {
    let pts = grid.points();
    let results: Vec<Result<GeometryPoint, GeometryError>> =
        pts.par_iter().map(|&(u, v)| frame_at(surface, u, v)).collect();
    results.into_iter().collect()
}

pub fn grid_sample(
    surface: &Surface,
    nu: usize,
    nv: usize,
    quantities: &[Quantity],
    hbar: f64,
    mass: f64,
) -> Result<GridField, GeometryError> {
    let grid = GridSpec::for_surface(surface, nu, nv);
    let frames = frames_on_grid(surface, &grid)?;
    let channels = quantities.iter().map(|q| q.name()).collect();
    let data = frames
        .iter()
        .map(|pt| quantities.iter().map(|q| q.extract(pt, hbar, mass)).collect())
        .collect();
    Ok(GridField::new(grid, channels, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::builtin;
    use std::f64::consts::PI;

    fn cone(phi: f64) -> Surface {
        Surface::with_overrides(builtin("cone").unwrap(), &[("phi".into(), phi)]).unwrap()
    }

    #[test]
    fn cone_point_values() {
        let pt = frame_at(&cone(PI / 6.0), 0.0, 1.0).unwrap();
        let w = 1.0 + (PI / 6.0).cos();
        assert!((pt.metric[0][0] - w * w).abs() < 1e-12);
        assert!((pt.metric[0][0] - 3.4820508).abs() < 1e-7);
        assert!((pt.metric[1][1] - 1.0).abs() < 1e-14);
        assert!(pt.metric[0][1].abs() < 1e-15);
        assert!((pt.mean_curvature - 0.1339746).abs() < 1e-7);
        assert!(pt.gaussian_curvature.abs() < 1e-15);
        assert!((pt.g1_inv[0][0] + 0.1539031).abs() < 1e-7);
        assert!((pt.g1_inv[0][0] + 2.0 * 0.5 / (w * w * w)).abs() < 1e-14);
        assert!(pt.g1_inv[1][1].abs() < 1e-15);
        let en = [0.5, 0.0, -(3f64.sqrt() / 2.0)];
        for s in 0..3 {
            assert!((pt.en[s] - en[s]).abs() < 1e-15);
        }
    }

    #[test]
    fn plane_ring_is_flat() {
        let s = Surface::new(builtin("plane_ring").unwrap()).unwrap();
        for &(u, v) in &[(0.0, 0.0), (1.0, 0.5), (4.0, 1.0)] {
            let pt = frame_at(&s, u, v).unwrap();
            assert_eq!(pt.mean_curvature, 0.0);
            assert_eq!(pt.gaussian_curvature, 0.0);
            assert_eq!(pt.f_jet.coeff(0, 0, 1), 0.0);
            assert_eq!(geometric_potential(&pt, 1.0, 0.5), 0.0);
        }
    }

    #[test]
    fn brackets_at_cone_point() {
        let pt = frame_at(&cone(PI / 6.0), 0.0, 1.0).unwrap();
        let b = |f, n| reduced_bracket(&pt, f, n).unwrap();
        assert!((b(BracketField::Factor, 1) - 0.2679492).abs() < 1e-7);
        assert!((b(BracketField::InvSqrtFactor, 1) + 0.1339746).abs() < 1e-7);
        assert!((b(BracketField::InvSqrtFactor, 2) - 0.0538476).abs() < 1e-7);
        assert_eq!(reduced_bracket(&pt, BracketField::Factor, 3), Err(GeometryError::InvalidOrder(3)));
    }

    #[test]
    fn offset_metric_values() {
        let pt = frame_at(&cone(PI / 6.0), 0.0, 1.0).unwrap();
        let g0 = offset_metric(&pt, 0.0).unwrap();
        assert_eq!(g0[0][0], pt.metric[0][0]);
        assert_eq!(g0[2][2], 1.0);
        let big = offset_metric(&pt, 0.1).unwrap();
        let ratio = big[0][0] * big[1][1] / pt.det_metric();
        assert!((ratio - 1.0543078).abs() < 1e-7);

        let cyl = Surface::new(builtin("cylinder").unwrap()).unwrap();
        let pt = frame_at(&cyl, 0.3, 0.7).unwrap();
        let big = offset_metric(&pt, -0.1).unwrap();
        assert!((big[0][0] - 0.81).abs() < 1e-12);
        assert!(matches!(offset_metric(&pt, -3.0), Err(GeometryError::InvalidOffset { .. })));
    }

    #[test]
    fn degenerate_metric_detected() {
        let s = Surface::with_overrides(builtin("sphere").unwrap(), &[("cap".into(), 0.0)]).unwrap();
        assert!(matches!(frame_at(&s, 0.3, 0.0), Err(GeometryError::DegenerateMetric { .. })));
    }

    #[test]
    fn two_routes_to_g1_agree() {
        let s = Surface::new(builtin("torus").unwrap()).unwrap();
        let pt = frame_at(&s, 0.4, 1.1).unwrap();
        let other = pt.g1_inv_from_embedding();
        for a in 0..2 {
            for b in 0..2 {
                assert!((pt.g1_inv[a][b] - other[a][b]).abs() < 1e-12);
                assert!((pt.g1_inv[a][b] - pt.local.g1_inv[a][b].value()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn grid_sample_cone_is_axisymmetric() {
        let field = grid_sample(&cone(PI / 6.0), 4, 4, &[Quantity::MeanCurvature, Quantity::GeometricPotential], 1.0, 0.5)
            .unwrap();
        assert_eq!(field.len(), 16);
        for j in 0..4 {
            let first = field.value(0, j, 0);
            for i in 1..4 {
                assert!((field.value(i, j, 0) - first).abs() < 1e-15);
            }
        }
        for j in 1..4 {
            assert!(field.value(0, j, 1) > field.value(0, j - 1, 1));
        }
    }
}
