//! Closed-form geometry and operators of the truncated cone
//! `r(θ, r) = (w cos θ, w sin θ, r sin φ)`, `w = R + r cos φ`, and of its
//! cylinder limit. These are entered term by term as published and serve as
//! ground truth for the general pipeline.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::operators::{MultiIndex, Value};
use crate::spin::{SpinMatrix, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("outside the cone oracle's domain: {0}")]
    OutOfDomain(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    /// Minimum radius `R`.
    pub r_min: f64,
    /// Generatrix inclination `φ`.
    pub phi: f64,
    /// Generatrix length `l`.
    pub l: f64,
}

fn i_times(x: f64) -> C64 {
    C64::new(0.0, x)
}

fn spin(c: [f64; 3], s: C64) -> Value {
    Value::Spin(SpinMatrix::from_cartesian(c) * s)
}

fn vector(c: [f64; 3], s: C64) -> Value {
    Value::Vector(c.map(|x| s * x))
}

/// One printed line of an operator: the coefficients it contributes.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub label: String,
    pub terms: BTreeMap<MultiIndex, Value>,
}

impl OracleRow {
    fn new(label: &str, terms: impl IntoIterator<Item = (MultiIndex, Value)>) -> OracleRow {
        OracleRow { label: label.to_string(), terms: terms.into_iter().collect() }
    }
}

/// Sum of all rows, keyed by derivative multi-index.
pub fn table_sum(rows: &[OracleRow]) -> BTreeMap<MultiIndex, Value> {
    let mut out: BTreeMap<MultiIndex, Value> = BTreeMap::new();
    for row in rows {
        for (idx, v) in &row.terms {
            let entry = out.entry(*idx).or_insert(Value::zero(v.kind()));
            *entry = entry.try_add(v).expect("oracle rows of one operator share a value kind");
        }
    }
    out
}

impl ConeParams {
    pub fn new(r_min: f64, phi: f64, l: f64) -> Result<ConeParams, OracleError> {
        if !(r_min > 0.0) {
            return Err(OracleError::OutOfDomain(format!("R must be positive, got {r_min}")));
        }
        if !(0.0..=std::f64::consts::FRAC_PI_2 + 1e-12).contains(&phi) {
            return Err(OracleError::OutOfDomain(format!("phi must lie in [0, pi/2], got {phi}")));
        }
        if !(l > 0.0) {
            return Err(OracleError::OutOfDomain(format!("l must be positive, got {l}")));
        }
        Ok(ConeParams { r_min, phi, l })
    }

    /// The cylinder limit `φ = π/2` with the same radius and length.
    pub fn cylinder(r_min: f64, l: f64) -> Result<ConeParams, OracleError> {
        ConeParams::new(r_min, std::f64::consts::FRAC_PI_2, l)
    }

    fn check(&self, r: f64) -> Result<(), OracleError> {
        let slack = 1e-12 * self.l;
        if !(-slack..=self.l + slack).contains(&r) {
            return Err(OracleError::OutOfDomain(format!("r = {r} outside [0, {}]", self.l)));
        }
        Ok(())
    }

    fn sc(&self) -> (f64, f64) {
        self.phi.sin_cos()
    }

    pub fn w(&self, r: f64) -> Result<f64, OracleError> {
        self.check(r)?;
        Ok(self.r_min + r * self.phi.cos())
    }

    /// Unit vectors `(e_θ, e_r, e_n)`.
    pub fn frame(&self, theta: f64) -> [[f64; 3]; 3] {
        let (sp, cp) = self.sc();
        let (st, ct) = theta.sin_cos();
        [[-st, ct, 0.0], [cp * ct, cp * st, sp], [sp * ct, sp * st, -cp]]
    }

    pub fn position(&self, theta: f64, r: f64) -> Result<[f64; 3], OracleError> {
        let w = self.w(r)?;
        Ok([w * theta.cos(), w * theta.sin(), r * self.phi.sin()])
    }

    pub fn metric(&self, r: f64) -> Result<[[f64; 2]; 2], OracleError> {
        let w = self.w(r)?;
        Ok([[w * w, 0.0], [0.0, 1.0]])
    }

    pub fn metric_inv(&self, r: f64) -> Result<[[f64; 2]; 2], OracleError> {
        let w = self.w(r)?;
        Ok([[1.0 / (w * w), 0.0], [0.0, 1.0]])
    }

    /// `G_ij` of the layer at normal offset `q3`.
    pub fn offset_metric(&self, r: f64, q3: f64) -> Result<[[f64; 3]; 3], OracleError> {
        let big_w = self.w(r)? + q3 * self.phi.sin();
        Ok([[big_w * big_w, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn rescaled_factor(&self, r: f64, q3: f64) -> Result<f64, OracleError> {
        Ok(1.0 + self.phi.sin() / self.w(r)? * q3)
    }

    pub fn mean_curvature(&self, r: f64) -> Result<f64, OracleError> {
        Ok(self.phi.sin() / (2.0 * self.w(r)?))
    }

    pub fn gaussian_curvature(&self, r: f64) -> Result<f64, OracleError> {
        self.check(r)?;
        Ok(0.0)
    }

    pub fn g1_inv(&self, r: f64) -> Result<[[f64; 2]; 2], OracleError> {
        let w = self.w(r)?;
        Ok([[-2.0 * self.phi.sin() / (w * w * w), 0.0], [0.0, 0.0]])
    }

    pub fn geometric_potential(&self, r: f64, hbar: f64, mass: f64) -> Result<f64, OracleError> {
        let w = self.w(r)?;
        let sp = self.phi.sin();
        Ok(-hbar * hbar / (8.0 * mass) * sp * sp / (w * w))
    }

    pub fn geometric_momentum(&self, theta: f64, r: f64, hbar: f64) -> Result<[C64; 3], OracleError> {
        let s = i_times(hbar * self.phi.sin() / (2.0 * self.w(r)?));
        Ok(self.frame(theta)[2].map(|x| s * x))
    }

    pub fn geometric_angular_momentum(&self, theta: f64, r: f64, hbar: f64) -> Result<[C64; 3], OracleError> {
        let (sp, cp) = self.sc();
        let s = i_times(hbar * (self.r_min * cp + r) * sp / (2.0 * self.w(r)?));
        Ok(self.frame(theta)[0].map(|x| s * x))
    }

    /// Reduced Pauli matrices `(σ^θ, σ^r, σ^3)`.
    pub fn reduced_pauli(&self, theta: f64, r: f64) -> Result<[SpinMatrix; 3], OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let (st, ct) = theta.sin_cos();
        Ok([
            SpinMatrix::from_cartesian([-st / w, ct / w, 0.0]),
            SpinMatrix::from_cartesian([cp * ct, cp * st, sp]),
            SpinMatrix::from_cartesian([sp * ct, sp * st, -cp]),
        ])
    }

    /// Reduced Rashba tensor `S_ij` over `(θ, r, normal)`.
    pub fn rashba_tensor(&self, theta: f64, r: f64, alpha: f64, hbar: f64) -> Result<[[f64; 3]; 3], OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let (st, ct) = theta.sin_cos();
        let k = alpha / hbar;
        let theta_r = k * w * (sp * (st + ct) - cp);
        let r_n = k * (ct - st);
        let n_theta = k * w * (sp + cp * (st + ct));
        Ok([[0.0, theta_r, -n_theta], [-theta_r, 0.0, r_n], [n_theta, -r_n, 0.0]])
    }

    /// Reduced Dresselhaus tensor, `out[i][j] = S_iijj`.
    pub fn dresselhaus_tensor(&self, theta: f64, r: f64, beta: f64, hbar: f64) -> Result<[[f64; 3]; 3], OracleError> {
        let w = self.w(r)?;
        let c = beta / hbar.powi(3) * (2.0 * self.phi).cos() * (2.0 * theta).cos();
        let theta_r = -w * w * c;
        let r_n = -c;
        let n_theta = -w * w * c;
        Ok([[0.0, theta_r, -n_theta], [-theta_r, 0.0, r_n], [n_theta, -r_n, 0.0]])
    }

    /// Effective Hamiltonian, split into kinetic and potential rows.
    pub fn hamiltonian(&self, r: f64, hbar: f64, mass: f64) -> Result<Vec<OracleRow>, OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let k = -hbar * hbar / (2.0 * mass);
        Ok(vec![
            OracleRow::new("cone hamiltonian: theta kinetic", [((2, 0), Value::real(k / (w * w)))]),
            OracleRow::new("cone hamiltonian: radial kinetic", [((0, 2), Value::real(k)), ((0, 1), Value::real(k * cp / w))]),
            OracleRow::new("cone hamiltonian: geometric potential", [((0, 0), Value::real(-hbar * hbar / (8.0 * mass) * sp * sp / (w * w)))]),
        ])
    }

    pub fn momentum(&self, theta: f64, r: f64, hbar: f64) -> Result<Vec<OracleRow>, OracleError> {
        let w = self.w(r)?;
        let [e_theta, e_r, e_n] = self.frame(theta);
        Ok(vec![
            OracleRow::new("cone momentum: theta", [((1, 0), vector(e_theta, i_times(-hbar / w)))]),
            OracleRow::new("cone momentum: radial", [((0, 1), vector(e_r, i_times(-hbar)))]),
            OracleRow::new("cone momentum: geometric", [((0, 0), vector(e_n, i_times(hbar * self.phi.sin() / (2.0 * w))))]),
        ])
    }

    pub fn angular_momentum(&self, theta: f64, r: f64, hbar: f64) -> Result<Vec<OracleRow>, OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let big_r = self.r_min;
        let [e_theta, e_r, e_n] = self.frame(theta);
        let theta_dir: [f64; 3] = std::array::from_fn(|k| e_n[k] * (big_r * cp + r) / w - e_r[k] * big_r * sp / w);
        Ok(vec![
            OracleRow::new("cone angular momentum: theta", [((1, 0), vector(theta_dir, i_times(hbar)))]),
            OracleRow::new("cone angular momentum: radial", [((0, 1), vector(e_theta, i_times(hbar * big_r * sp)))]),
            OracleRow::new(
                "cone angular momentum: geometric",
                [((0, 0), vector(e_theta, i_times(hbar * (big_r * cp + r) * sp / (2.0 * w))))],
            ),
        ])
    }

    /// Rashba coupling, three printed rows.
    pub fn rashba(&self, theta: f64, r: f64, alpha: f64) -> Result<Vec<OracleRow>, OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let (st, ct) = theta.sin_cos();
        let s2p = (2.0 * self.phi).sin();
        Ok(vec![
            OracleRow::new("cone rashba row 1", [((1, 0), spin([ct, st, -(st + ct)], i_times(-alpha / w)))]),
            OracleRow::new("cone rashba row 2", [((0, 1), spin([sp - cp * st, -(sp - cp * ct), -cp * (ct - st)], i_times(alpha)))]),
            OracleRow::new(
                "cone rashba row 3",
                [((0, 0), spin([sp * sp * st - 0.5 * s2p, -(sp * sp * ct + 0.5 * s2p), -sp * sp * (st - ct)], i_times(0.5 * alpha / self.r_min)))],
            ),
        ])
    }

    /// Cubic Dresselhaus coupling, six printed rows.
    pub fn dresselhaus(&self, theta: f64, r: f64, beta: f64) -> Result<Vec<OracleRow>, OracleError> {
        let w = self.w(r)?;
        let (sp, cp) = self.sc();
        let (st, ct) = theta.sin_cos();
        let p = i_times(beta * (2.0 * self.phi).cos() * (2.0 * theta).cos());
        let sigma_r = [cp * ct, cp * st, sp];
        let sigma_n = [sp * ct, sp * st, -cp];
        let (w2, w3) = (w * w, w * w * w);
        Ok(vec![
            OracleRow::new("cone dresselhaus row 1", [((2, 1), spin(sigma_r, p / w2)), ((1, 2), spin([st, -ct, 0.0], p / w))]),
            OracleRow::new("cone dresselhaus row 2", [((2, 0), spin(sigma_n, p * (-4.0 * cp / w3)))]),
            OracleRow::new(
                "cone dresselhaus row 3",
                [((2, 0), spin(sigma_n, p * (0.5 * sp / w3))), ((0, 2), spin(sigma_n, p * (-0.5 * sp / w)))],
            ),
            OracleRow::new("cone dresselhaus row 4", [((1, 0), spin([-st, ct, 0.0], p * (0.75 * sp * sp / w3)))]),
            OracleRow::new(
                "cone dresselhaus row 5",
                [((0, 1), spin([0.25 * sp * cp * ct, 0.25 * sp * cp * st, 0.25 * sp * sp - 1.0], p * (sp / w2)))],
            ),
            OracleRow::new(
                "cone dresselhaus row 6",
                [((0, 0), spin([0.5 * sp * sp * cp * cp * ct, 0.5 * sp * sp * cp * cp * st, sp * cp * (1.0 + 0.5 * sp * sp)], p / w3))],
            ),
        ])
    }

    /// Rashba coupling in the cylinder form; uses only `R`.
    pub fn cylinder_rashba(&self, theta: f64, r: f64, alpha: f64) -> Result<Vec<OracleRow>, OracleError> {
        self.check(r)?;
        let big_r = self.r_min;
        let (st, ct) = theta.sin_cos();
        Ok(vec![
            OracleRow::new(
                "cylinder rashba row 1",
                [((1, 0), spin([ct, st, -(st + ct)], i_times(-alpha / big_r))), ((0, 1), spin([1.0, -1.0, 0.0], i_times(alpha)))],
            ),
            OracleRow::new("cylinder rashba row 2", [((0, 0), spin([st, -ct, -(st - ct)], i_times(0.5 * alpha / big_r)))]),
        ])
    }

    /// Cubic Dresselhaus coupling in the cylinder form; uses only `R`.
    pub fn cylinder_dresselhaus(&self, theta: f64, r: f64, beta: f64) -> Result<Vec<OracleRow>, OracleError> {
        self.check(r)?;
        let big_r = self.r_min;
        let (st, ct) = theta.sin_cos();
        let q = i_times(beta * (2.0 * theta).cos());
        let radial = [ct, st, 0.0];
        Ok(vec![
            OracleRow::new(
                "cylinder dresselhaus row 1",
                [((1, 2), spin([-st, ct, 0.0], q / big_r)), ((2, 1), spin([0.0, 0.0, -1.0], q / (big_r * big_r)))],
            ),
            OracleRow::new(
                "cylinder dresselhaus row 2",
                [
                    ((2, 0), spin(radial, q * (-0.5 / big_r.powi(3)))),
                    ((0, 2), spin(radial, q * (0.5 / big_r))),
                    ((1, 0), spin([st, -ct, 0.0], q * (0.75 / big_r.powi(3)))),
                    ((0, 1), spin([0.0, 0.0, 1.0], q * (0.75 / (big_r * big_r)))),
                ],
            ),
        ])
    }
}
