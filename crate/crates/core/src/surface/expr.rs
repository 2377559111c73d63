use std::f64::consts::PI;
use std::fmt;

use crate::jets::{JetError, Real};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }
}

/// Reduced fraction `num / den` with `den > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rational {
    num: i64,
    den: u64,
}

impl Rational {
    pub fn new(num: i64, den: u64) -> Option<Rational> {
        if den == 0 {
            return None;
        }
        let g = gcd(num.unsigned_abs(), den).max(1);
        Some(Rational { num: num / g as i64, den: den / g })
    }

    pub fn integer(n: i64) -> Rational {
        Rational { num: n, den: 1 }
    }

    pub fn num(self) -> i64 {
        self.num
    }

    pub fn den(self) -> u64 {
        self.den
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.den, self.num < 0) {
            (1, false) => write!(f, "{}", self.num),
            (1, true) => write!(f, "({})", self.num),
            _ => write!(f, "({}/{})", self.num, self.den),
        }
    }
}

/// Expression tree over the chart variables `u`, `v` and named parameters.
///
/// Parameters are referenced by index into the owning definition's
/// parameter list.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Param(usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
    Pow(Box<Expr>, Rational),
}

impl Expr {
    pub fn eval<T: Real>(&self, u: &T, v: &T, params: &[f64]) -> Result<T, JetError> {
        Ok(match self {
            Expr::Num(x) => T::from_f64(*x),
            Expr::Pi => T::from_f64(PI),
            Expr::Var(Var::U) => u.clone(),
            Expr::Var(Var::V) => v.clone(),
            Expr::Param(i) => T::from_f64(params[*i]),
            Expr::Neg(a) => -a.eval(u, v, params)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval(u, v, params)?;
                let b = b.eval(u, v, params)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a.checked_div(&b)?,
                }
            }
            Expr::Call(func, a) => {
                let a = a.eval(u, v, params)?;
                match func {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Tan => a.checked_tan()?,
                    Func::Exp => a.exp(),
                    Func::Log => a.checked_ln()?,
                    Func::Sqrt => a.checked_sqrt()?,
                }
            }
            Expr::Pow(a, r) => {
                let a = a.eval(u, v, params)?;
                if r.den() == 1 {
                    a.checked_powi(r.num() as i32)?
                } else if r.num() == 1 && r.den() == 2 {
                    a.checked_sqrt()?
                } else {
                    a.checked_powf(r.to_f64())?
                }
            }
        })
    }

    /// Evaluates an expression that must not depend on `u` or `v`.
    pub fn eval_const(&self, params: &[f64]) -> Result<f64, JetError> {
        self.eval(&f64::NAN, &f64::NAN, params)
    }

    pub fn uses_chart_vars(&self) -> bool {
        match self {
            Expr::Var(_) => true,
            Expr::Num(_) | Expr::Pi | Expr::Param(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.uses_chart_vars(),
            Expr::Binary(_, a, b) => a.uses_chart_vars() || b.uses_chart_vars(),
        }
    }

    pub(crate) fn remap_params(&mut self, map: &[usize]) {
        match self {
            Expr::Param(i) => *i = map[*i],
            Expr::Num(_) | Expr::Pi | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => a.remap_params(map),
            Expr::Binary(_, a, b) => {
                a.remap_params(map);
                b.remap_params(map);
            }
        }
    }

    /// Fully parenthesized source text; parses back to the same tree.
    pub fn to_source(&self, names: &[String]) -> String {
        let mut out = String::new();
        self.write_source(names, &mut out);
        out
    }

    fn write_source(&self, names: &[String], out: &mut String) {
        use std::fmt::Write;
        match self {
            Expr::Num(x) => {
                let _ = write!(out, "{x}");
            }
            Expr::Pi => out.push_str("pi"),
            Expr::Var(Var::U) => out.push('u'),
            Expr::Var(Var::V) => out.push('v'),
            Expr::Param(i) => out.push_str(&names[*i]),
            Expr::Neg(a) => {
                out.push_str("(-");
                a.write_source(names, out);
                out.push(')');
            }
            Expr::Binary(op, a, b) => {
                out.push('(');
                a.write_source(names, out);
                let _ = write!(out, " {} ", op.symbol());
                b.write_source(names, out);
                out.push(')');
            }
            Expr::Call(func, a) => {
                out.push_str(func.name());
                out.push('(');
                a.write_source(names, out);
                out.push(')');
            }
            Expr::Pow(a, r) => {
                out.push('(');
                a.write_source(names, out);
                let _ = write!(out, ")^{r}");
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet3;

    #[test]
    fn rational_reduces() {
        let r = Rational::new(-4, 6).unwrap();
        assert_eq!((r.num(), r.den()), (-2, 3));
        assert!(Rational::new(1, 0).is_none());
        assert_eq!(Rational::integer(3).to_string(), "3");
        assert_eq!(Rational::new(-1, 2).unwrap().to_string(), "(-1/2)");
    }

    #[test]
    fn real_and_jet_evaluation_agree() {
        // (u * v + 2)^(3/2) / sin(v)
        let e = Expr::Binary(
            BinOp::Div,
            Box::new(Expr::Pow(
                Box::new(Expr::Binary(
                    BinOp::Add,
                    Box::new(Expr::Binary(BinOp::Mul, Box::new(Expr::Var(Var::U)), Box::new(Expr::Var(Var::V)))),
                    Box::new(Expr::Num(2.0)),
                )),
                Rational::new(3, 2).unwrap(),
            )),
            Box::new(Expr::Call(Func::Sin, Box::new(Expr::Var(Var::V)))),
        );
        let (u, v) = (0.7, 1.3);
        let real = e.eval(&u, &v, &[]).unwrap();
        let jet = e
            .eval(&Jet3::seed(0, u).unwrap(), &Jet3::seed(1, v).unwrap(), &[])
            .unwrap();
        assert_eq!(real, jet.value());
        // d/du = (3/2) (uv+2)^(1/2) v / sin v
        let du = 1.5 * (u * v + 2.0).sqrt() * v / v.sin();
        assert!((jet.derivative(1, 0, 0) - du).abs() < 1e-13);
    }
}
