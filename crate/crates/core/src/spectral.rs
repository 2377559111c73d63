//! Low-lying spectrum of the effective Hamiltonian on surfaces of
//! revolution, one angular mode at a time.
//!
//! With `g = diag(ρ(v)², c²)` and `ψ = e^{i k u} ρ^{-1/2} χ(v)` the radial
//! equation becomes the Schrödinger form
//! `-(ħ²/2m c²) χ'' + [(ħ²/2m)(Q/c² + k²/ρ²) + V_g] χ = E χ`,
//! `Q = (ρ^{1/2})''/ρ^{1/2}`, discretized with second-order central
//! differences and Dirichlet ends.

use thiserror::Error;

use crate::format::sci;
use crate::geometry::{frame_at, geometric_potential, GeometryError};
use crate::surface::Surface;

/// Minimum number of interior nodes.
pub const MIN_NODES: usize = 16;
const AXISYMMETRY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("surface is not a surface of revolution in its chart: {0}")]
    NotAxisymmetric(String),
    #[error("eigenvalue iteration did not converge: {0}")]
    ConvergenceFailure(String),
    #[error("invalid spectral setting: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Symmetric tridiagonal radial problem for one angular mode.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProblem {
    pub m_angular: i32,
    pub include_vg: bool,
    /// Interior node positions along `v`.
    pub nodes: Vec<f64>,
    pub spacing: f64,
    /// Radius `ρ = √g_uu` at the nodes.
    pub radius: Vec<f64>,
    /// `ħ²/(2m c²)`, the coefficient of `-χ''`.
    pub stiffness: f64,
    /// Full potential at the nodes.
    pub potential: Vec<f64>,
}

/// Radius, its fourth-root curvature term `Q`, `g_vv` and `V_g` along `v` at
/// fixed `u`.
struct Profile {
    rho: f64,
    q: f64,
    g_vv: f64,
    vg: f64,
}

fn profile(surface: &Surface, u: f64, v: f64, hbar: f64, mass: f64) -> Result<Profile, SpectralError> {
    let pt = frame_at(surface, u, v)?;
    let g_uu = pt.local.metric[0][0];
    let root = g_uu
        .checked_sqrt()
        .and_then(|r| r.checked_sqrt())
        .map_err(|e| SpectralError::Geometry(GeometryError::Domain { u, v, source: e }))?;
    // second v-derivative of ρ^{1/2} is twice its Taylor coefficient
    let q = 2.0 * root.coeff(0, 2, 0) / root.value();
    Ok(Profile { rho: pt.metric[0][0].sqrt(), q, g_vv: pt.metric[1][1], vg: geometric_potential(&pt, hbar, mass) })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= AXISYMMETRY_TOL * a.abs().max(b.abs()).max(1e-300) + 1e-14
}

/// Samples the chart to confirm that the metric and `V_g` do not depend on
/// `u`, that the chart is orthogonal and that `g_vv` is constant.
pub fn check_axisymmetric(surface: &Surface, hbar: f64, mass: f64) -> Result<f64, SpectralError> {
    if !surface.periodic_u() {
        return Err(SpectralError::NotAxisymmetric("the angular (u) axis must be periodic".into()));
    }
    let (u0, u1) = surface.u_range();
    let (v0, v1) = surface.v_range();
    let reference = frame_at(surface, u0, v0)?.metric[1][1];
    for j in 0..=8 {
        let v = v0 + (v1 - v0) * j as f64 / 8.0;
        let base = frame_at(surface, u0, v)?;
        let base_vg = geometric_potential(&base, hbar, mass);
        if !close(base.metric[1][1], reference) {
            return Err(SpectralError::NotAxisymmetric(format!(
                "g_vv varies along v: {} at v = {v} versus {reference}",
                base.metric[1][1]
            )));
        }
        for i in 0..8 {
            let u = u0 + (u1 - u0) * (i as f64 + 0.37) / 8.0;
            let pt = frame_at(surface, u, v)?;
            let scale = (pt.metric[0][0] * pt.metric[1][1]).sqrt();
            if pt.metric[0][1].abs() > AXISYMMETRY_TOL * scale {
                return Err(SpectralError::NotAxisymmetric(format!("g_uv = {:e} at (u, v) = ({u}, {v})", pt.metric[0][1])));
            }
            let vg = geometric_potential(&pt, hbar, mass);
            if !close(pt.metric[0][0], base.metric[0][0]) || !close(pt.metric[1][1], base.metric[1][1]) || !close(vg, base_vg) {
                return Err(SpectralError::NotAxisymmetric(format!("metric or V_g depends on u at (u, v) = ({u}, {v})")));
            }
        }
    }
    Ok(reference)
}

fn check_settings(nodes: usize, mass: f64) -> Result<(), SpectralError> {
    if nodes < MIN_NODES {
        return Err(SpectralError::InvalidArgument(format!("need at least {MIN_NODES} nodes, got {nodes}")));
    }
    if !(mass > 0.0) {
        return Err(SpectralError::InvalidArgument(format!("mass must be positive, got {mass}")));
    }
    Ok(())
}

/// Angular wave number of mode `m` for the chart's `u` period.
fn wave_number(surface: &Surface, m: i32) -> f64 {
    let (u0, u1) = surface.u_range();
    2.0 * std::f64::consts::PI * m as f64 / (u1 - u0)
}

/// Builds the symmetric radial problem for angular mode `m`.
pub fn radial_reduce(
    surface: &Surface,
    m: i32,
    include_vg: bool,
    nodes: usize,
    hbar: f64,
    mass: f64,
) -> Result<RadialProblem, SpectralError> {
    check_settings(nodes, mass)?;
    let g_vv = check_axisymmetric(surface, hbar, mass)?;
    let (u0, _) = surface.u_range();
    let (v0, v1) = surface.v_range();
    let h = (v1 - v0) / (nodes + 1) as f64;
    let k = wave_number(surface, m);
    let kinetic = hbar * hbar / (2.0 * mass);
    let mut positions = Vec::with_capacity(nodes);
    let mut radius = Vec::with_capacity(nodes);
    let mut potential = Vec::with_capacity(nodes);
    for n in 1..=nodes {
        let v = v0 + n as f64 * h;
        let p = profile(surface, u0, v, hbar, mass)?;
        positions.push(v);
        radius.push(p.rho);
        let mut value = kinetic * (p.q / p.g_vv + k * k / (p.rho * p.rho));
        if include_vg {
            value += p.vg;
        }
        potential.push(value);
    }
    Ok(RadialProblem {
        m_angular: m,
        include_vg,
        nodes: positions,
        spacing: h,
        radius,
        stiffness: kinetic / g_vv,
        potential,
    })
}

/// Symmetric tridiagonal matrix: diagonal and off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    pub fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let coupling = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] / q };
            q = self.diag[i] - x - coupling;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - r);
            hi = hi.max(self.diag[i] + r);
        }
        (lo, hi)
    }

    /// The `k` smallest eigenvalues in ascending order, by bisection.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>, SpectralError> {
        if k > self.len() {
            return Err(SpectralError::InvalidArgument(format!("asked for {k} eigenvalues of a {}x{} matrix", self.len(), self.len())));
        }
        let (glo, ghi) = self.gershgorin();
        let mut out = Vec::with_capacity(k);
        for j in 0..k {
            let (mut lo, mut hi) = (glo, ghi);
            if let Some(&prev) = out.last() {
                lo = lo.max(prev - 1e-12 * (1.0 + f64::abs(prev)));
            }
            let mut iterations = 0;
            while hi - lo > 1e-14 * lo.abs().max(hi.abs()).max(1.0) {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if self.count_below(mid) > j {
                    hi = mid;
                } else {
                    lo = mid;
                }
                iterations += 1;
                if iterations > 300 {
                    return Err(SpectralError::ConvergenceFailure(format!("bisection for eigenvalue {j} stalled in [{lo}, {hi}]")));
                }
            }
            out.push(0.5 * (lo + hi));
        }
        Ok(out)
    }

    /// Solves `(T - s I) x = b` by forward elimination.
    fn solve_shifted(&self, s: f64, b: &[f64]) -> Vec<f64> {
        let n = self.len();
        let tiny = f64::EPSILON * self.diag.iter().map(|d| d.abs()).fold(1.0, f64::max);
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        let mut pivot = self.diag[0] - s;
        if pivot.abs() < tiny {
            pivot = tiny;
        }
        d[0] = b[0] / pivot;
        for i in 1..n {
            c[i - 1] = self.off[i - 1] / pivot;
            pivot = self.diag[i] - s - self.off[i - 1] * c[i - 1];
            if pivot.abs() < tiny {
                pivot = tiny;
            }
            d[i] = (b[i] - self.off[i - 1] * d[i - 1]) / pivot;
        }
        for i in (0..n - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        d
    }

    /// Unit eigenvectors for the given eigenvalues by inverse iteration,
    /// orthogonalized against the previous ones.
    pub fn eigenvectors(&self, eigenvalues: &[f64]) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out: Vec<Vec<f64>> = Vec::with_capacity(eigenvalues.len());
        for (j, &lambda) in eigenvalues.iter().enumerate() {
            let shift = lambda + 1e-10 * (1.0 + lambda.abs());
            let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7 + j * 3) % 11) as f64).collect();
            for _ in 0..4 {
                x = self.solve_shifted(shift, &x);
                for prev in &out {
                    let dot: f64 = prev.iter().zip(&x).map(|(a, b)| a * b).sum();
                    for (xi, pi) in x.iter_mut().zip(prev) {
                        *xi -= dot * pi;
                    }
                }
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                x.iter_mut().for_each(|v| *v /= norm);
            }
            out.push(x);
        }
        out
    }
}

impl RadialProblem {
    pub fn matrix(&self) -> Tridiagonal {
        let a = self.stiffness / (self.spacing * self.spacing);
        Tridiagonal {
            diag: self.potential.iter().map(|v| 2.0 * a + v).collect(),
            off: vec![-a; self.nodes.len().saturating_sub(1)],
        }
    }

    /// The `k` lowest eigenvalues of the discrete problem.
    pub fn solve(&self, k: usize) -> Result<Vec<f64>, SpectralError> {
        if k >= self.nodes.len() {
            return Err(SpectralError::InvalidArgument(format!("k = {k} must be below the node count {}", self.nodes.len())));
        }
        self.matrix().lowest_eigenvalues(k)
    }

    /// Eigenpairs with the wavefunction's radial part `ρ^{-1/2} χ`,
    /// normalized under the `ρ dv` quadrature.
    pub fn eigenpairs(&self, k: usize) -> Result<Vec<(f64, Vec<f64>)>, SpectralError> {
        let values = self.solve(k)?;
        let vectors = self.matrix().eigenvectors(&values);
        let scale = self.spacing.sqrt();
        Ok(values
            .into_iter()
            .zip(vectors)
            .map(|(e, chi)| (e, chi.iter().zip(&self.radius).map(|(c, r)| c / (r.sqrt() * scale)).collect()))
            .collect())
    }
}

/// Eigenvalues from the untransformed equation
/// `-(ħ²/2m)[(1/(ρ c²))(ρ φ')' - k²φ/ρ²] + V_g φ = E φ`, discretized in
/// conservative form. Its matrix is similar to a symmetric one, which is
/// what gets diagonalized.
pub fn solve_direct(
    surface: &Surface,
    m: i32,
    include_vg: bool,
    nodes: usize,
    hbar: f64,
    mass: f64,
    k: usize,
) -> Result<Vec<f64>, SpectralError> {
    check_settings(nodes, mass)?;
    let g_vv = check_axisymmetric(surface, hbar, mass)?;
    let (u0, _) = surface.u_range();
    let (v0, v1) = surface.v_range();
    let h = (v1 - v0) / (nodes + 1) as f64;
    let wave = wave_number(surface, m);
    let kinetic = hbar * hbar / (2.0 * mass);
    let a = kinetic / (g_vv * h * h);
    let rho_at = |v: f64| -> Result<f64, SpectralError> { Ok(frame_at(surface, u0, v)?.metric[0][0].sqrt()) };
    let mut diag = Vec::with_capacity(nodes);
    let mut off = Vec::with_capacity(nodes - 1);
    let mut prev_rho = 0.0;
    for n in 1..=nodes {
        let v = v0 + n as f64 * h;
        let p = profile(surface, u0, v, hbar, mass)?;
        let left = rho_at(v - 0.5 * h)?;
        let right = rho_at(v + 0.5 * h)?;
        let mut d = a * (left + right) / p.rho + kinetic * wave * wave / (p.rho * p.rho);
        if include_vg {
            d += p.vg;
        }
        diag.push(d);
        if n > 1 {
            off.push(-a * left / (prev_rho * p.rho).sqrt());
        }
        prev_rho = p.rho;
    }
    Tridiagonal { diag, off }.lowest_eigenvalues(k)
}

/// One line of the spectrum table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub m: i32,
    /// 1-based level index within the mode.
    pub n: usize,
    pub without_vg: f64,
    pub with_vg: f64,
}

impl SpectrumRow {
    pub fn shift(&self) -> f64 {
        self.with_vg - self.without_vg
    }
}

/// Lowest `count` levels of every mode in `modes`, with and without the
/// geometric potential.
pub fn spectrum_table(
    surface: &Surface,
    modes: std::ops::RangeInclusive<i32>,
    count: usize,
    nodes: usize,
    hbar: f64,
    mass: f64,
) -> Result<Vec<SpectrumRow>, SpectralError> {
    let mut rows = Vec::new();
    for m in modes {
        let without = radial_reduce(surface, m, false, nodes, hbar, mass)?.solve(count)?;
        let with = radial_reduce(surface, m, true, nodes, hbar, mass)?.solve(count)?;
        for (n, (a, b)) in without.into_iter().zip(with).enumerate() {
            rows.push(SpectrumRow { m, n: n + 1, without_vg: a, with_vg: b });
        }
    }
    Ok(rows)
}

pub fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("m,n,eigenvalue_without_Vg,eigenvalue_with_Vg,shift\n");
    for r in rows {
        out.push_str(&format!("{},{},{},{},{}\n", r.m, r.n, sci(r.without_vg), sci(r.with_vg), sci(r.shift())));
    }
    out
}
