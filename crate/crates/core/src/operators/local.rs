//! Value-valued Taylor polynomials in the two chart variables, truncated at
//! total degree 3, carrying how many of their orders are trustworthy.

use super::value::{Value, ValueKind};
use super::OpError;
use crate::jets::{Jet, Jet3};
use crate::spin::C64;
use crate::surface::Expr;

pub const LOCAL_ORDER: u8 = 3;
const NCOEF: usize = 10;

/// Storage slot of the monomial `u^i v^j`, graded by total degree.
const fn slot(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const EXPONENTS: [(usize, usize); NCOEF] = {
    let mut out = [(0, 0); NCOEF];
    let mut d = 0;
    while d <= LOCAL_ORDER as usize {
        let mut j = 0;
        while j <= d {
            out[slot(d - j, j)] = (d - j, j);
            j += 1;
        }
        d += 1;
    }
    out
};

/// Taylor expansion of a coefficient field around a chart point.
///
/// `coeffs[slot(i, j)]` is `∂_u^i ∂_v^j c / (i! j!)`; only degrees up to
/// `valid` are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalField {
    kind: ValueKind,
    coeffs: [Value; NCOEF],
    valid: u8,
}

impl LocalField {
    pub fn zero(kind: ValueKind) -> LocalField {
        LocalField { kind, coeffs: [Value::zero(kind); NCOEF], valid: LOCAL_ORDER }
    }

    /// A field that is constant near the point.
    pub fn constant(value: Value) -> LocalField {
        let mut f = LocalField::zero(value.kind());
        f.coeffs[0] = value;
        f
    }

    /// A field known only by its value at the point; it cannot be
    /// differentiated.
    pub fn value_only(value: Value) -> LocalField {
        let mut f = LocalField::constant(value);
        f.valid = 0;
        f
    }

    /// Real scalar field from a chart jet (variables 0 and 1) with `valid`
    /// trustworthy orders.
    pub fn from_jet<const N: usize>(jet: &Jet<N>, valid: u8) -> LocalField {
        let valid = valid.min(LOCAL_ORDER).min(Jet::<N>::ORDER as u8);
        let mut f = LocalField::zero(ValueKind::Scalar);
        for (k, &(i, j)) in EXPONENTS.iter().enumerate() {
            if i + j <= valid as usize {
                f.coeffs[k] = Value::real(jet.coeff(i, j, 0));
            }
        }
        f.valid = valid;
        f
    }

    /// Expands a surface-language expression in `u`, `v` around `(u, v)`.
    pub fn from_expr(expr: &Expr, u: f64, v: f64, params: &[f64]) -> Result<LocalField, OpError> {
        let uj = Jet3::seed(0, u).map_err(OpError::Jet)?;
        let vj = Jet3::seed(1, v).map_err(OpError::Jet)?;
        let jet = expr.eval(&uj, &vj, params).map_err(OpError::Jet)?;
        Ok(LocalField::from_jet(&jet, LOCAL_ORDER))
    }

    /// Real scalar field from any closure over generic reals, expanded to
    /// full local order.
    pub fn from_fn<F>(u: f64, v: f64, f: F) -> Result<LocalField, OpError>
    where
        F: Fn(&Jet3, &Jet3) -> Result<Jet3, crate::jets::JetError>,
    {
        let uj = Jet3::seed(0, u).map_err(OpError::Jet)?;
        let vj = Jet3::seed(1, v).map_err(OpError::Jet)?;
        Ok(LocalField::from_jet(&f(&uj, &vj).map_err(OpError::Jet)?, LOCAL_ORDER))
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn valid(&self) -> u8 {
        self.valid
    }

    pub fn value(&self) -> Value {
        self.coeffs[0]
    }

    /// Taylor coefficient of `u^i v^j`.
    pub fn coeff(&self, i: usize, j: usize) -> Value {
        if i + j > self.valid as usize {
            return Value::zero(self.kind);
        }
        self.coeffs[slot(i, j)]
    }

    pub fn scale(&self, s: C64) -> LocalField {
        LocalField { kind: self.kind, coeffs: self.coeffs.map(|c| c.scale(s)), valid: self.valid }
    }

    pub fn try_add(&self, rhs: &LocalField) -> Result<LocalField, OpError> {
        if self.kind != rhs.kind {
            return Err(OpError::KindMismatch { left: self.kind, right: rhs.kind });
        }
        let mut out = self.clone();
        for k in 0..NCOEF {
            out.coeffs[k] = self.coeffs[k].try_add(&rhs.coeffs[k])?;
        }
        out.valid = self.valid.min(rhs.valid);
        Ok(out)
    }

    /// Truncated product with `self` on the left.
    pub fn try_mul(&self, rhs: &LocalField) -> Result<LocalField, OpError> {
        let valid = self.valid.min(rhs.valid);
        let kind = self.value().try_mul(&rhs.value())?.kind();
        let mut out = LocalField::zero(kind);
        out.valid = valid;
        for (ka, &(ia, ja)) in EXPONENTS.iter().enumerate() {
            for (kb, &(ib, jb)) in EXPONENTS.iter().enumerate() {
                let (i, j) = (ia + ib, ja + jb);
                if i + j > valid as usize {
                    continue;
                }
                let term = self.coeffs[ka].try_mul(&rhs.coeffs[kb])?;
                let k = slot(i, j);
                out.coeffs[k] = out.coeffs[k].try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// First partial derivative along chart variable `var` (0 = u, 1 = v).
    pub fn partial(&self, var: usize) -> Result<LocalField, OpError> {
        if self.valid == 0 {
            return Err(OpError::InsufficientOrder { needed: 1, available: 0 });
        }
        let mut out = LocalField::zero(self.kind);
        out.valid = self.valid - 1;
        for (k, &(i, j)) in EXPONENTS.iter().enumerate() {
            if i + j > out.valid as usize {
                continue;
            }
            let (src, factor) = if var == 0 { (slot(i + 1, j), i + 1) } else { (slot(i, j + 1), j + 1) };
            out.coeffs[k] = self.coeffs[src].scale(C64::from(factor as f64));
        }
        Ok(out)
    }

    /// `∂_u^m ∂_v^n` of the field.
    pub fn derivative(&self, m: u8, n: u8) -> Result<LocalField, OpError> {
        if m + n > self.valid {
            return Err(OpError::InsufficientOrder { needed: m + n, available: self.valid });
        }
        let mut out = self.clone();
        for _ in 0..m {
            out = out.partial(0)?;
        }
        for _ in 0..n {
            out = out.partial(1)?;
        }
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_expr;

    #[test]
    fn slots_are_graded() {
        assert_eq!(EXPONENTS[0], (0, 0));
        assert_eq!(EXPONENTS[1], (1, 0));
        assert_eq!(EXPONENTS[2], (0, 1));
        assert_eq!(EXPONENTS[5], (0, 2));
        assert_eq!(EXPONENTS[9], (0, 3));
    }

    #[test]
    fn product_and_derivatives() {
        let uv = LocalField::from_expr(&parse_expr("u*v", &[]).unwrap(), 2.0, 3.0, &[]).unwrap();
        assert_eq!(uv.value(), Value::real(6.0));
        assert_eq!(uv.partial(0).unwrap().value(), Value::real(3.0));
        assert_eq!(uv.derivative(1, 1).unwrap().value(), Value::real(1.0));
        let sq = uv.try_mul(&uv).unwrap();
        // ∂u∂v (u v)^2 = 4 u v
        assert_eq!(sq.derivative(1, 1).unwrap().value(), Value::real(24.0));
    }

    #[test]
    fn validity_is_enforced() {
        let f = LocalField::value_only(Value::real(1.0));
        assert_eq!(f.partial(0), Err(OpError::InsufficientOrder { needed: 1, available: 0 }));
        let g = LocalField::from_expr(&parse_expr("sin(u)", &[]).unwrap(), 0.0, 0.0, &[]).unwrap();
        assert!(g.derivative(2, 1).is_ok());
        assert!(g.derivative(2, 2).is_err());
    }
}
