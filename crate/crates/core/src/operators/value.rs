use serde::Serialize;

use super::OpError;
use crate::spin::{SpinMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueKind {
    Scalar,
    Vector3,
    Spin,
}

impl ValueKind {
    pub fn name(self) -> &'static str {
        match self {
            ValueKind::Scalar => "scalar",
            ValueKind::Vector3 => "vector3",
            ValueKind::Spin => "spin",
        }
    }

    /// Real channel names used when a value is flattened for export.
    pub fn channel_names(self) -> Vec<String> {
        let parts: &[&str] = match self {
            ValueKind::Scalar => &["c"],
            ValueKind::Vector3 => &["x", "y", "z"],
            ValueKind::Spin => &["s11", "s12", "s21", "s22"],
        };
        parts.iter().flat_map(|p| [format!("re_{p}"), format!("im_{p}")]).collect()
    }
}

/// Coefficient value: a complex scalar, a complex 3-vector, or a spin matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Scalar(C64),
    Vector([C64; 3]),
    Spin(SpinMatrix),
}

impl Value {
    pub fn real(x: f64) -> Value {
        Value::Scalar(C64::from(x))
    }

    pub fn zero(kind: ValueKind) -> Value {
        let z = C64::new(0.0, 0.0);
        match kind {
            ValueKind::Scalar => Value::Scalar(z),
            ValueKind::Vector3 => Value::Vector([z; 3]),
            ValueKind::Spin => Value::Spin(SpinMatrix::zero()),
        }
    }

    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Scalar(_) => ValueKind::Scalar,
            Value::Vector(_) => ValueKind::Vector3,
            Value::Spin(_) => ValueKind::Spin,
        }
    }

    pub fn scale(&self, s: C64) -> Value {
        match *self {
            Value::Scalar(a) => Value::Scalar(a * s),
            Value::Vector(a) => Value::Vector(a.map(|x| x * s)),
            Value::Spin(a) => Value::Spin(a * s),
        }
    }

    pub fn try_add(&self, rhs: &Value) -> Result<Value, OpError> {
        Ok(match (*self, *rhs) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b),
            (Value::Vector(a), Value::Vector(b)) => Value::Vector([a[0] + b[0], a[1] + b[1], a[2] + b[2]]),
            (Value::Spin(a), Value::Spin(b)) => Value::Spin(a + b),
            (a, b) => return Err(OpError::KindMismatch { left: a.kind(), right: b.kind() }),
        })
    }

    /// Product in operator order: `self` stands to the left of `rhs`.
    pub fn try_mul(&self, rhs: &Value) -> Result<Value, OpError> {
        Ok(match (*self, *rhs) {
            (Value::Scalar(a), b) => b.scale(a),
            (a, Value::Scalar(b)) => a.scale(b),
            (Value::Spin(a), Value::Spin(b)) => Value::Spin(a * b),
            (a, b) => return Err(OpError::KindMismatch { left: a.kind(), right: b.kind() }),
        })
    }

    /// Largest modulus over all complex components.
    pub fn max_abs(&self) -> f64 {
        self.components().iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn components(&self) -> Vec<C64> {
        match self {
            Value::Scalar(a) => vec![*a],
            Value::Vector(a) => a.to_vec(),
            Value::Spin(m) => m.entries().to_vec(),
        }
    }

    /// Re/Im pairs of every component, matching `ValueKind::channel_names`.
    pub fn channels(&self) -> Vec<f64> {
        self.components().iter().flat_map(|c| [c.re, c.im]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_counts() {
        assert_eq!(ValueKind::Spin.channel_names().len(), 8);
        assert_eq!(Value::zero(ValueKind::Spin).channels().len(), 8);
        assert_eq!(Value::zero(ValueKind::Vector3).channels().len(), 6);
        assert_eq!(Value::real(2.0).channels(), vec![2.0, 0.0]);
    }

    #[test]
    fn kind_rules() {
        let v = Value::Vector([C64::from(1.0); 3]);
        let s = Value::Spin(SpinMatrix::sigma_x());
        assert!(v.try_mul(&s).is_err());
        assert!(v.try_add(&Value::real(1.0)).is_err());
        assert_eq!(s.try_mul(&s).unwrap(), Value::Spin(SpinMatrix::identity()));
        assert_eq!(Value::real(2.0).try_mul(&v).unwrap(), Value::Vector([C64::from(2.0); 3]));
    }
}
