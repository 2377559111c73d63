//! Parametrized surfaces `r(u, v)` described in a small expression language.

mod catalog;
mod expr;
mod parser;

use std::sync::Arc;

use thiserror::Error;

use crate::jets::{JetError, Real};

pub use catalog::{builtin, BUILTIN_NAMES};
pub use expr::{BinOp, Expr, Func, Rational, Var};
pub use parser::{parse_expr, parse_surface};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("syntax error at {line}:{col}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        line: usize,
        col: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier '{name}' at {line}:{col}")]
    UnknownIdentifier { name: String, line: usize, col: usize },
    #[error("bad domain: {0}")]
    BadDomain(String),
    #[error("unknown parameter '{0}'")]
    UnknownParameter(String),
    #[error("unknown surface '{0}' (available: cone, cylinder, plane_ring, sphere, torus, catenoid)")]
    UnknownSurface(String),
}

impl SurfaceError {
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            SurfaceError::Syntax { line, col, .. } | SurfaceError::UnknownIdentifier { line, col, .. } => {
                Some((*line, *col))
            }
            _ => None,
        }
    }

    /// Diagnostic with a single machine-parsable first line
    /// (`origin:line:col: message`) followed by the offending source line
    /// and a caret.
    pub fn render(&self, source: &str, origin: &str) -> String {
        let Some((line, col)) = self.position() else {
            return format!("{origin}: {self}");
        };
        let text = source.lines().nth(line - 1).unwrap_or("");
        let pad: String = text
            .chars()
            .take(col.saturating_sub(1))
            .map(|c| if c == '\t' { '\t' } else { ' ' })
            .collect();
        format!("{origin}:{line}:{col}: {self}\n{text}\n{pad}^")
    }
}

/// One chart axis range. `lo` and `hi` may reference parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Interval {
    pub lo: Expr,
    pub hi: Expr,
    pub closed_hi: bool,
    pub periodic: bool,
}

impl Interval {
    fn to_source(&self, axis: char, names: &[String]) -> String {
        format!(
            "{axis} in [{}, {}{}{}",
            self.lo.to_source(names),
            self.hi.to_source(names),
            if self.closed_hi { "]" } else { ")" },
            if self.periodic { " periodic" } else { "" }
        )
    }
}

/// A parsed surface definition: coordinate expressions, named parameters
/// with defaults, and the chart domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceDef {
    pub components: [Expr; 3],
    pub params: Vec<(String, f64)>,
    pub u_range: Interval,
    pub v_range: Interval,
}

impl SurfaceDef {
    pub fn param_names(&self) -> Vec<String> {
        self.params.iter().map(|(n, _)| n.clone()).collect()
    }

    pub fn default_values(&self) -> Vec<f64> {
        self.params.iter().map(|(_, v)| *v).collect()
    }

    pub fn periodic_u(&self) -> bool {
        self.u_range.periodic
    }

    pub fn periodic_v(&self) -> bool {
        self.v_range.periodic
    }

    /// Evaluates both axis ranges with the given parameter values.
    pub fn resolve_domain(&self, values: &[f64]) -> Result<[(f64, f64); 2], SurfaceError> {
        let mut out = [(0.0, 0.0); 2];
        for (slot, (axis, iv)) in [('u', &self.u_range), ('v', &self.v_range)].into_iter().enumerate() {
            let lo = iv.lo.eval_const(values).map_err(|e| SurfaceError::BadDomain(format!("{axis}: {e}")))?;
            let hi = iv.hi.eval_const(values).map_err(|e| SurfaceError::BadDomain(format!("{axis}: {e}")))?;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(SurfaceError::BadDomain(format!("{axis} range [{lo}, {hi}] is empty or not finite")));
            }
            out[slot] = (lo, hi);
        }
        Ok(out)
    }

    /// Source text that parses back to an identical definition.
    pub fn to_source(&self) -> String {
        let names = self.param_names();
        let mut out = String::new();
        for (axis, e) in ['x', 'y', 'z'].iter().zip(&self.components) {
            out.push_str(&format!("{axis} = {};\n", e.to_source(&names)));
        }
        if !self.params.is_empty() {
            let list: Vec<String> = self.params.iter().map(|(n, v)| format!("{n} = {v}")).collect();
            out.push_str(&format!("params {};\n", list.join(", ")));
        }
        out.push_str(&format!(
            "domain {}, {};\n",
            self.u_range.to_source('u', &names),
            self.v_range.to_source('v', &names)
        ));
        out
    }
}

/// A surface definition with concrete parameter values and a resolved domain.
#[derive(Debug, Clone)]
pub struct Surface {
    def: Arc<SurfaceDef>,
    values: Vec<f64>,
    domain: [(f64, f64); 2],
}

impl Surface {
    pub fn new(def: SurfaceDef) -> Result<Surface, SurfaceError> {
        Surface::with_overrides(def, &[])
    }

    pub fn with_overrides(def: SurfaceDef, overrides: &[(String, f64)]) -> Result<Surface, SurfaceError> {
        let mut values = def.default_values();
        for (name, value) in overrides {
            let slot = def
                .params
                .iter()
                .position(|(n, _)| n == name)
                .ok_or_else(|| SurfaceError::UnknownParameter(name.clone()))?;
            values[slot] = *value;
        }
        let domain = def.resolve_domain(&values)?;
        Ok(Surface { def: Arc::new(def), values, domain })
    }

    pub fn def(&self) -> &SurfaceDef {
        &self.def
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        let slot = self.def.params.iter().position(|(n, _)| n == name)?;
        Some(self.values[slot])
    }

    /// Parameter names paired with their bound values, in declaration order.
    pub fn params(&self) -> Vec<(String, f64)> {
        self.def.param_names().into_iter().zip(self.values.iter().copied()).collect()
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.domain[0]
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.domain[1]
    }

    pub fn periodic_u(&self) -> bool {
        self.def.periodic_u()
    }

    pub fn periodic_v(&self) -> bool {
        self.def.periodic_v()
    }

    pub fn eval_embedding<T: Real>(&self, u: &T, v: &T) -> Result<[T; 3], JetError> {
        let [x, y, z] = &self.def.components;
        Ok([
            x.eval(u, v, &self.values)?,
            y.eval(u, v, &self.values)?,
            z.eval(u, v, &self.values)?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet3;

    fn cone() -> Surface {
        Surface::new(builtin("cone").unwrap()).unwrap()
    }

    #[test]
    fn cone_base_points() {
        let s = cone();
        let p = s.eval_embedding(&0.0, &0.0).unwrap();
        assert_eq!(p, [1.0, 0.0, 0.0]);
        let p = s.eval_embedding(&0.0, &1.0).unwrap();
        assert!((p[0] - 1.8660254037844386).abs() < 1e-15);
        assert_eq!(p[1], 0.0);
        assert!((p[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn cone_jet_derivatives() {
        let s = cone();
        let u = Jet3::seed(0, 0.0).unwrap();
        let v = Jet3::seed(1, 1.0).unwrap();
        let p = s.eval_embedding(&u, &v).unwrap();
        assert!(p[0].derivative(1, 0, 0).abs() < 1e-15);
        assert!((p[1].derivative(1, 0, 0) - 1.8660254037844386).abs() < 1e-15);
    }

    #[test]
    fn overrides() {
        let def = builtin("cone").unwrap();
        let s = Surface::with_overrides(def.clone(), &[("l".into(), 3.0)]).unwrap();
        assert_eq!(s.v_range(), (0.0, 3.0));
        let err = Surface::with_overrides(def.clone(), &[("nope".into(), 1.0)]).unwrap_err();
        assert_eq!(err, SurfaceError::UnknownParameter("nope".into()));
        let err = Surface::with_overrides(def, &[("l".into(), -1.0)]).unwrap_err();
        assert!(matches!(err, SurfaceError::BadDomain(_)));
    }

    #[test]
    fn caret_diagnostic() {
        let src = "x = u;\ny = (v +;\n";
        let err = parse_surface(src).unwrap_err();
        let text = err.render(src, "bad.surf");
        let mut lines = text.lines();
        assert!(lines.next().unwrap().starts_with("bad.surf:2:9: syntax error"));
        assert_eq!(lines.next().unwrap(), "y = (v +;");
        assert_eq!(lines.next().unwrap(), "        ^");
    }
}
