//! Operator expressions over tangential derivatives and coefficient fields,
//! and their rewriting into normal order (all derivatives to the right).

use std::collections::BTreeMap;

use super::local::{LocalField, LOCAL_ORDER};
use super::value::Value;
use super::OpError;
use crate::spin::C64;

/// Multi-index `(m, n)` of `∂_u^m ∂_v^n`.
pub type MultiIndex = (u8, u8);

/// Maximum total derivative degree of any operator.
pub const MAX_DEGREE: u8 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum OpExpr {
    /// Multiplication by a coefficient field.
    Field(LocalField),
    /// Tangential derivative along chart variable 0 (`u`) or 1 (`v`).
    D(u8),
    Sum(Vec<OpExpr>),
    /// Composition, applied right to left.
    Compose(Vec<OpExpr>),
    Scale(C64, Box<OpExpr>),
}

impl OpExpr {
    pub fn field(f: LocalField) -> OpExpr {
        OpExpr::Field(f)
    }

    pub fn value(v: Value) -> OpExpr {
        OpExpr::Field(LocalField::value_only(v))
    }

    pub fn compose(parts: impl IntoIterator<Item = OpExpr>) -> OpExpr {
        OpExpr::Compose(parts.into_iter().collect())
    }

    pub fn sum(parts: impl IntoIterator<Item = OpExpr>) -> OpExpr {
        OpExpr::Sum(parts.into_iter().collect())
    }

    pub fn scaled(self, s: C64) -> OpExpr {
        OpExpr::Scale(s, Box::new(self))
    }
}

/// A normal-ordered operator at one chart point: `Σ c_(m,n) ∂_u^m ∂_v^n`
/// with each coefficient kept as a local Taylor expansion.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalOp {
    pub terms: BTreeMap<MultiIndex, LocalField>,
}

fn binomial(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl LocalOp {
    fn add_term(&mut self, idx: MultiIndex, field: LocalField) -> Result<(), OpError> {
        let degree = idx.0 + idx.1;
        if degree > MAX_DEGREE {
            return Err(OpError::DegreeOverflow(degree));
        }
        match self.terms.get_mut(&idx) {
            Some(existing) => *existing = existing.try_add(&field)?,
            None => {
                self.terms.insert(idx, field);
            }
        }
        Ok(())
    }

    fn scale(&self, s: C64) -> LocalOp {
        LocalOp { terms: self.terms.iter().map(|(k, f)| (*k, f.scale(s))).collect() }
    }

    /// `self ∘ rhs`, expanded with the Leibniz rule
    /// `∂^α (q ∂^β) = Σ_{γ ≤ α} C(α, γ) (∂^(α-γ) q) ∂^(γ+β)`.
    pub fn compose(&self, rhs: &LocalOp) -> Result<LocalOp, OpError> {
        let mut out = LocalOp::default();
        for (&(a1, a2), p) in &self.terms {
            for (&(b1, b2), q) in &rhs.terms {
                for g1 in 0..=a1 {
                    for g2 in 0..=a2 {
                        let dq = q.derivative(a1 - g1, a2 - g2)?;
                        if (g1, g2) != (a1, a2) && dq.max_abs() == 0.0 {
                            continue;
                        }
                        let weight = binomial(a1, g1) * binomial(a2, g2);
                        let coeff = p.try_mul(&dq)?.scale(C64::from(weight));
                        out.add_term((g1 + b1, g2 + b2), coeff)?;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Coefficient values at the expansion point.
    pub fn values(&self) -> BTreeMap<MultiIndex, Value> {
        self.terms.iter().map(|(k, f)| (*k, f.value())).collect()
    }

    /// Re-embeds the operator as an expression `Σ c ∘ ∂^α`.
    pub fn to_expr(&self) -> OpExpr {
        OpExpr::Sum(
            self.terms
                .iter()
                .map(|(&(m, n), f)| {
                    let mut parts = vec![OpExpr::Field(f.clone())];
                    parts.extend((0..m).map(|_| OpExpr::D(0)));
                    parts.extend((0..n).map(|_| OpExpr::D(1)));
                    OpExpr::Compose(parts)
                })
                .collect(),
        )
    }
}

/// Rewrites an expression so that every derivative stands to the right of
/// every coefficient field.
pub fn normal_order(expr: &OpExpr) -> Result<LocalOp, OpError> {
    Ok(match expr {
        OpExpr::Field(f) => {
            let mut op = LocalOp::default();
            op.add_term((0, 0), f.clone())?;
            op
        }
        OpExpr::D(axis) => {
            let mut op = LocalOp::default();
            let idx = if *axis == 0 { (1, 0) } else { (0, 1) };
            op.add_term(idx, LocalField::constant(Value::real(1.0)))?;
            op
        }
        OpExpr::Sum(parts) => {
            let mut op = LocalOp::default();
            for p in parts {
                for (idx, f) in normal_order(p)?.terms {
                    op.add_term(idx, f)?;
                }
            }
            op
        }
        OpExpr::Compose(parts) => {
            let mut iter = parts.iter().rev();
            let Some(last) = iter.next() else {
                return normal_order(&OpExpr::Field(LocalField::constant(Value::real(1.0))));
            };
            let mut acc = normal_order(last)?;
            for p in iter {
                acc = normal_order(p)?.compose(&acc)?;
            }
            acc
        }
        OpExpr::Scale(s, inner) => normal_order(inner)?.scale(*s),
    })
}

const _: () = assert!(MAX_DEGREE <= LOCAL_ORDER);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::parse_expr;

    fn field(src: &str, u: f64, v: f64) -> LocalField {
        LocalField::from_expr(&parse_expr(src, &[]).unwrap(), u, v, &[]).unwrap()
    }

    fn real(op: &LocalOp, idx: MultiIndex) -> f64 {
        match op.terms[&idx].value() {
            Value::Scalar(c) => c.re,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn product_rule() {
        let op = normal_order(&OpExpr::compose([OpExpr::D(0), OpExpr::Field(field("u*v", 2.0, 3.0))])).unwrap();
        assert_eq!(real(&op, (1, 0)), 6.0);
        assert_eq!(real(&op, (0, 0)), 3.0);
        assert_eq!(op.terms.len(), 2);
    }

    #[test]
    fn leibniz_second_order() {
        let op = normal_order(&OpExpr::compose([OpExpr::D(0), OpExpr::D(0), OpExpr::Field(field("u^2", 1.0, 0.0))]))
            .unwrap();
        assert_eq!(real(&op, (2, 0)), 1.0);
        assert_eq!(real(&op, (1, 0)), 4.0);
        assert_eq!(real(&op, (0, 0)), 2.0);
    }

    #[test]
    fn idempotent() {
        let e = OpExpr::sum([
            OpExpr::compose([OpExpr::Field(field("sin(u)*v", 0.3, 0.7)), OpExpr::D(1), OpExpr::Field(field("u+v^2", 0.3, 0.7)), OpExpr::D(0)]),
            OpExpr::compose([OpExpr::D(0), OpExpr::Field(field("exp(u*v)", 0.3, 0.7))]).scaled(C64::new(0.0, 2.0)),
        ]);
        let once = normal_order(&e).unwrap();
        let twice = normal_order(&once.to_expr()).unwrap();
        assert_eq!(once.terms.len(), twice.terms.len());
        for (idx, f) in &once.terms {
            let diff = f.value().try_add(&twice.terms[idx].value().scale(C64::from(-1.0))).unwrap();
            assert!(diff.max_abs() <= 1e-14);
        }
    }

    #[test]
    fn degree_overflow() {
        let e = OpExpr::compose([OpExpr::D(0), OpExpr::D(1), OpExpr::D(0), OpExpr::D(1)]);
        assert_eq!(normal_order(&e), Err(OpError::DegreeOverflow(4)));
    }
}
