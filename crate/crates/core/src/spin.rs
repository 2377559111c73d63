//! Curvilinear Pauli matrices and the reduced Rashba and Dresselhaus
//! tensors, obtained from the Jacobian of the offset embedding at `q3 = 0`.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::Matrix3;
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::GeometryPoint;

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// A 2×2 complex matrix acting on spinors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinMatrix(pub [[C64; 2]; 2]);

impl SpinMatrix {
    pub const fn zero() -> Self {
        SpinMatrix([[ZERO, ZERO], [ZERO, ZERO]])
    }

    pub const fn identity() -> Self {
        SpinMatrix([[ONE, ZERO], [ZERO, ONE]])
    }

    pub const fn sigma_x() -> Self {
        SpinMatrix([[ZERO, ONE], [ONE, ZERO]])
    }

    pub const fn sigma_y() -> Self {
        SpinMatrix([[ZERO, C64::new(0.0, -1.0)], [I, ZERO]])
    }

    pub const fn sigma_z() -> Self {
        SpinMatrix([[ONE, ZERO], [ZERO, C64::new(-1.0, 0.0)]])
    }

    /// `c[0] σx + c[1] σy + c[2] σz` with real weights.
    pub fn from_cartesian(c: [f64; 3]) -> Self {
        let [x, y, z] = cartesian_pauli();
        x * C64::from(c[0]) + y * C64::from(c[1]) + z * C64::from(c[2])
    }

    pub fn scale(self, s: C64) -> Self {
        self * s
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        SpinMatrix([[m[0][0].conj(), m[1][0].conj()], [m[0][1].conj(), m[1][1].conj()]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Entries in row-major order.
    pub fn entries(&self) -> [C64; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn apply(&self, psi: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * psi[0] + self.0[0][1] * psi[1],
            self.0[1][0] * psi[0] + self.0[1][1] * psi[1],
        ]
    }
}

impl Add for SpinMatrix {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for SpinMatrix {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Neg for SpinMatrix {
    type Output = Self;
    fn neg(self) -> Self {
        self * C64::from(-1.0)
    }
}

impl Mul for SpinMatrix {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = SpinMatrix::zero();
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = self.0[i][0] * rhs.0[0][j] + self.0[i][1] * rhs.0[1][j];
            }
        }
        out
    }
}

impl Mul<C64> for SpinMatrix {
    type Output = Self;
    fn mul(self, rhs: C64) -> Self {
        let mut out = self;
        out.0.iter_mut().flatten().for_each(|c| *c *= rhs);
        out
    }
}

pub fn cartesian_pauli() -> [SpinMatrix; 3] {
    [SpinMatrix::sigma_x(), SpinMatrix::sigma_y(), SpinMatrix::sigma_z()]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpinError {
    #[error("singular embedding Jacobian at (u, v) = ({u}, {v}): det = {det:e}")]
    SingularJacobian { u: f64, v: f64, det: f64 },
}

/// `J[s][i] = ∂x^s / ∂q^i` at `q3 = 0`; the columns are `∂_u r`, `∂_v r`, `en`.
pub fn jacobian(pt: &GeometryPoint) -> [[f64; 3]; 3] {
    let mut j = [[0.0; 3]; 3];
    for s in 0..3 {
        j[s][0] = pt.tangents[0][s];
        j[s][1] = pt.tangents[1][s];
        j[s][2] = pt.en[s];
    }
    j
}

fn jacobian_inverse(pt: &GeometryPoint) -> Result<Matrix3<f64>, SpinError> {
    let j = jacobian(pt);
    let m = Matrix3::from_fn(|r, c| j[r][c]);
    let det = m.determinant();
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>();
    if !(det.abs() > 1e-14 * scale.powf(1.5)) {
        return Err(SpinError::SingularJacobian { u: pt.u, v: pt.v, det });
    }
    m.try_inverse().ok_or(SpinError::SingularJacobian { u: pt.u, v: pt.v, det })
}

/// Curvilinear Pauli matrices `σ^i = (∂q^i/∂x^s) σ^s` at the surface.
pub fn pauli_ccs(pt: &GeometryPoint) -> Result<[SpinMatrix; 3], SpinError> {
    let inv = jacobian_inverse(pt)?;
    Ok(std::array::from_fn(|i| SpinMatrix::from_cartesian([inv[(i, 0)], inv[(i, 1)], inv[(i, 2)]])))
}

fn column(j: &[[f64; 3]; 3], i: usize) -> [f64; 3] {
    [j[0][i], j[1][i], j[2][i]]
}

/// Sum of the components of `a × b`: the contraction with a cyclic
/// Cartesian tensor (`T_xy = T_yz = T_zx = 1`, reversed pairs `-1`).
fn cyclic_contraction(a: [f64; 3], b: [f64; 3]) -> f64 {
    (a[1] * b[2] - a[2] * b[1]) + (a[2] * b[0] - a[0] * b[2]) + (a[0] * b[1] - a[1] * b[0])
}

/// Reduced Rashba tensor `S_ij` for a [111]-grown well, `i, j` over
/// `(u, v, normal)`.
pub fn rashba_tensor_ccs(pt: &GeometryPoint, alpha: f64, hbar: f64) -> Result<[[f64; 3]; 3], SpinError> {
    jacobian_inverse(pt)?;
    let j = jacobian(pt);
    let k = alpha / hbar;
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| k * cyclic_contraction(column(&j, a), column(&j, b)))))
}

/// Reduced Dresselhaus tensor for a [100]-grown well: `out[i][j] = S_iijj`.
pub fn dresselhaus_tensor_ccs(pt: &GeometryPoint, beta: f64, hbar: f64) -> Result<[[f64; 3]; 3], SpinError> {
    jacobian_inverse(pt)?;
    let j = jacobian(pt);
    let k = beta / (hbar * hbar * hbar);
    let squares = |i: usize| column(&j, i).map(|x| x * x);
    Ok(std::array::from_fn(|a| std::array::from_fn(|b| k * cyclic_contraction(squares(a), squares(b)))))
}

/// Pauli matrices and both reduced tensors at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTensors {
    pub sigma: [SpinMatrix; 3],
    pub rashba: [[f64; 3]; 3],
    pub dresselhaus: [[f64; 3]; 3],
}

pub fn reduced_tensors(pt: &GeometryPoint, alpha: f64, beta: f64, hbar: f64) -> Result<ReducedTensors, SpinError> {
    Ok(ReducedTensors {
        sigma: pauli_ccs(pt)?,
        rashba: rashba_tensor_ccs(pt, alpha, hbar)?,
        dresselhaus: dresselhaus_tensor_ccs(pt, beta, hbar)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::frame_at;
    use crate::surface::{builtin, Surface};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn cone_point(phi: f64, theta: f64, r: f64) -> GeometryPoint {
        let s = Surface::with_overrides(builtin("cone").unwrap(), &[("phi".into(), phi)]).unwrap();
        frame_at(&s, theta, r).unwrap()
    }

    fn close(a: &SpinMatrix, b: &SpinMatrix, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn cartesian_algebra() {
        for s in cartesian_pauli() {
            assert_eq!(s.adjoint(), s);
            assert_eq!(s.trace(), ZERO);
            assert_eq!(s * s, SpinMatrix::identity());
        }
        let [x, y, z] = cartesian_pauli();
        assert_eq!(x * y, z * I);
    }

    #[test]
    fn cylinder_pauli() {
        let pt = cone_point(FRAC_PI_2, 0.0, 0.4);
        let [st, sr, s3] = pauli_ccs(&pt).unwrap();
        assert!(close(&s3, &SpinMatrix::sigma_x(), 1e-15));
        assert!(close(&sr, &SpinMatrix::sigma_z(), 1e-15));
        assert!(close(&st, &SpinMatrix::sigma_y(), 1e-15));
    }

    #[test]
    fn cone_pauli() {
        let pt = cone_point(PI / 6.0, 0.0, 1.0);
        let [_, sr, s3] = pauli_ccs(&pt).unwrap();
        let c = 3f64.sqrt() / 2.0;
        assert!(close(&sr, &SpinMatrix::from_cartesian([c, 0.0, 0.5]), 1e-15));
        assert!(close(&s3, &SpinMatrix::from_cartesian([0.5, 0.0, -c]), 1e-15));
        assert!(close(&(s3 * s3), &SpinMatrix::identity(), 1e-15));
    }

    #[test]
    fn rashba_values() {
        let pt = cone_point(FRAC_PI_2, 0.0, 0.7);
        let s = rashba_tensor_ccs(&pt, 1.0, 1.0).unwrap();
        assert!((s[0][1] - 1.0).abs() < 1e-15);
        assert!((s[1][2] - 1.0).abs() < 1e-15);
        assert!((s[2][0] - 1.0).abs() < 1e-15);
        let pt = cone_point(0.0, FRAC_PI_4, 0.5);
        let s = rashba_tensor_ccs(&pt, 1.0, 1.0).unwrap();
        assert!((s[0][1] + 1.5).abs() < 1e-14);
    }

    #[test]
    fn dresselhaus_values() {
        let pt = cone_point(0.0, 0.0, 1.0);
        let d = dresselhaus_tensor_ccs(&pt, 1.0, 1.0).unwrap();
        assert!((d[0][1] + 4.0).abs() < 1e-14);
        assert!((d[1][0] - 4.0).abs() < 1e-14);
        let pt = cone_point(FRAC_PI_4, 0.3, 1.0);
        let d = dresselhaus_tensor_ccs(&pt, 1.0, 1.0).unwrap();
        assert!(d.iter().flatten().all(|x| x.abs() < 1e-14));
    }
}
