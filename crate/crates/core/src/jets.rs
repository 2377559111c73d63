//! Truncated multivariate Taylor jets for forward-mode differentiation.
//!
//! A [`Jet<N>`] carries the Taylor coefficients of a function of three
//! variables `(q1, q2, q3)` about a base point, truncated at a fixed total
//! degree. Coefficients are stored densely in graded order: the constant
//! term first, then the three first-order terms `(1,0,0), (0,1,0), (0,0,1)`,
//! then degree two, and so on. Coefficient `c[α]` is `∂^α f / α!`.
//!
//! `N` is the number of stored coefficients and fixes the order:
//! `N = 20` is order 3 ([`Jet3`]), `N = 35` is order 4 ([`Jet4`]).

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

use thiserror::Error;

/// Errors raised by jet (and plain real) arithmetic.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("division by a value with zero constant term")]
    DivisionByZero,
    #[error("{op} is not defined at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("variable index {0} out of range (expected 0, 1 or 2)")]
    BadVariable(usize),
}

pub const NUM_VARS: usize = 3;
const MAX_ORDER: usize = 5;

const fn order_for_len(n: usize) -> usize {
    match n {
        1 => 0,
        4 => 1,
        10 => 2,
        20 => 3,
        35 => 4,
        56 => 5,
        _ => panic!("jet length must be C(order + 3, 3) for order <= 5"),
    }
}

/// Number of monomials of total degree `< d` in three variables.
const fn degree_offset(d: usize) -> usize {
    d * (d + 1) * (d + 2) / 6
}

struct Tables {
    exps: Vec<[u8; 3]>,
    /// `(a, b, out)` with `exps[a] + exps[b] = exps[out]`.
    mul: Vec<(u16, u16, u16)>,
    /// For each variable: `(from, to, factor)` such that the partial
    /// derivative maps `c[from] * factor` into slot `to`.
    partial: [Vec<(u16, u16, f64)>; NUM_VARS],
}

fn build_tables(order: usize) -> Tables {
    let mut exps = Vec::new();
    for d in 0..=order {
        for i in (0..=d).rev() {
            for j in (0..=d - i).rev() {
                exps.push([i as u8, j as u8, (d - i - j) as u8]);
            }
        }
    }
    let mut mul = Vec::new();
    for (a, ea) in exps.iter().enumerate() {
        for (b, eb) in exps.iter().enumerate() {
            let e = [ea[0] + eb[0], ea[1] + eb[1], ea[2] + eb[2]];
            if (e[0] + e[1] + e[2]) as usize <= order {
                mul.push((a as u16, b as u16, monomial_index(e) as u16));
            }
        }
    }
    let partial = std::array::from_fn(|var| {
        let mut out = Vec::new();
        for (k, e) in exps.iter().enumerate() {
            if e[var] > 0 {
                let mut lowered = *e;
                lowered[var] -= 1;
                out.push((k as u16, monomial_index(lowered) as u16, e[var] as f64));
            }
        }
        out
    });
    Tables { exps, mul, partial }
}

/// Position of the monomial `q1^e0 q2^e1 q3^e2` in graded storage order.
pub const fn monomial_index(e: [u8; 3]) -> usize {
    let d = (e[0] + e[1] + e[2]) as usize;
    let i = e[0] as usize;
    let j = e[1] as usize;
    // Monomials of degree d with first exponent > i come first.
    let mut skip = 0;
    let mut ip = d;
    while ip > i {
        skip += d - ip + 1;
        ip -= 1;
    }
    degree_offset(d) + skip + (d - i - j)
}

fn tables(order: usize) -> &'static Tables {
    static TABLES: [OnceLock<Tables>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    TABLES[order].get_or_init(|| build_tables(order))
}

/// A truncated Taylor jet in three variables with `N` coefficients.
#[derive(Clone, Copy, PartialEq)]
pub struct Jet<const N: usize> {
    coeffs: [f64; N],
}

pub type Jet3 = Jet<20>;
pub type Jet4 = Jet<35>;

impl<const N: usize> Jet<N> {
    pub const ORDER: usize = order_for_len(N);

    pub fn constant(value: f64) -> Self {
        let mut coeffs = [0.0; N];
        coeffs[0] = value;
        Jet { coeffs }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// Independent variable `which` evaluated at `value`.
    pub fn seed(which: usize, value: f64) -> Result<Self, JetError> {
        if which >= NUM_VARS {
            return Err(JetError::BadVariable(which));
        }
        let mut jet = Self::constant(value);
        if Self::ORDER >= 1 {
            jet.coeffs[1 + which] = 1.0;
        }
        Ok(jet)
    }

    pub fn from_coeffs(coeffs: [f64; N]) -> Self {
        Jet { coeffs }
    }

    pub fn coeffs(&self) -> &[f64; N] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Stored coefficient of `q1^i q2^j q3^k` (that is, `∂^(i,j,k) f / (i! j! k!)`).
    pub fn coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        if i + j + k > Self::ORDER {
            return 0.0;
        }
        self.coeffs[monomial_index([i as u8, j as u8, k as u8])]
    }

    /// Partial derivative `∂^(i,j,k) f` at the base point.
    pub fn derivative(&self, i: usize, j: usize, k: usize) -> f64 {
        self.coeff(i, j, k) * (factorial(i) * factorial(j) * factorial(k))
    }

    /// First partial derivative along `var`, as a jet.
    ///
    /// The top-degree coefficients of the result are zero: one order of
    /// accuracy is consumed.
    pub fn partial(&self, var: usize) -> Self {
        let mut out = [0.0; N];
        for &(from, to, factor) in &tables(Self::ORDER).partial[var] {
            out[to as usize] += self.coeffs[from as usize] * factor;
        }
        Jet { coeffs: out }
    }

    /// Exponent triples in storage order.
    pub fn exponents() -> &'static [[u8; 3]] {
        &tables(Self::ORDER).exps
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.coeffs;
        out.iter_mut().for_each(|c| *c *= s);
        Jet { coeffs: out }
    }

    /// Composes with a univariate function given its Taylor coefficients
    /// `t[k] = g^(k)(a0) / k!` at the constant term `a0`.
    fn compose(&self, t: &[f64]) -> Self {
        let mut delta = *self;
        delta.coeffs[0] = 0.0;
        let mut out = Self::constant(t[0]);
        let mut power = delta;
        for tk in t.iter().take(Self::ORDER + 1).skip(1) {
            out += power.scale(*tk);
            power = power * delta;
        }
        // `power` has a zero constant term, but inf * 0 would poison it
        out.coeffs[0] = t[0];
        out
    }

    pub fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        let b0 = rhs.coeffs[0];
        if b0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let mut t = [0.0; MAX_ORDER + 1];
        let inv = 1.0 / b0;
        let mut p = inv;
        for tk in t.iter_mut().take(Self::ORDER + 1) {
            *tk = p;
            p *= -inv;
        }
        let mut q = *self * rhs.compose(&t);
        // keep the constant term identical to plain real division
        q.coeffs[0] = self.coeffs[0] / b0;
        Ok(q)
    }

    pub fn sin(&self) -> Self {
        let a0 = self.coeffs[0];
        let (s, c) = sin_cos(a0);
        let cycle = [s, c, -s, -c];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = cycle[k % 4] / factorial(k);
        }
        self.compose(&t)
    }

    pub fn cos(&self) -> Self {
        let a0 = self.coeffs[0];
        let (s, c) = sin_cos(a0);
        let cycle = [c, -s, -c, s];
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = cycle[k % 4] / factorial(k);
        }
        self.compose(&t)
    }

    pub fn checked_tan(&self) -> Result<Self, JetError> {
        self.sin().checked_div(&self.cos())
    }

    pub fn exp(&self) -> Self {
        let e = self.coeffs[0].exp();
        let mut t = [0.0; MAX_ORDER + 1];
        for (k, tk) in t.iter_mut().enumerate() {
            *tk = e / factorial(k);
        }
        self.compose(&t)
    }

    pub fn checked_ln(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::Domain { op: "log", value: a0 });
        }
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = a0.ln();
        for k in 1..=Self::ORDER {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            t[k] = sign / (k as f64 * a0.powi(k as i32));
        }
        Ok(self.compose(&t))
    }

    pub fn checked_sqrt(&self) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: a0 });
        }
        let root = a0.sqrt();
        // binomial series of a^(1/2), with a0^(1/2 - k) = root / a0^k
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = root;
        let mut binom = 1.0;
        for k in 1..=Self::ORDER {
            binom *= (0.5 - (k as f64 - 1.0)) / k as f64;
            t[k] = binom * root / a0.powi(k as i32);
        }
        Ok(self.compose(&t))
    }

    pub fn checked_powi(&self, n: i32) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if n < 0 && a0 == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = a0.powi(n);
        let mut binom = 1.0;
        for k in 1..=Self::ORDER {
            binom *= (n as f64 - (k as f64 - 1.0)) / k as f64;
            t[k] = if binom == 0.0 { 0.0 } else { binom * a0.powi(n - k as i32) };
        }
        Ok(self.compose(&t))
    }

    pub fn checked_powf(&self, p: f64) -> Result<Self, JetError> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return Err(JetError::Domain { op: "pow", value: a0 });
        }
        let mut t = [0.0; MAX_ORDER + 1];
        t[0] = a0.powf(p);
        let mut binom = 1.0;
        for k in 1..=Self::ORDER {
            binom *= (p - (k as f64 - 1.0)) / k as f64;
            t[k] = binom * a0.powf(p - k as f64);
        }
        Ok(self.compose(&t))
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }
}

/// `(sin x, cos x)` as two separate libm calls. Left to itself the optimizer
/// may fuse them into `sincos`, whose last bit can differ from `sin`, and
/// jets must reproduce plain real evaluation exactly.
fn sin_cos(x: f64) -> (f64, f64) {
    (x.sin(), std::hint::black_box(x).cos())
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * i as f64)
}

impl<const N: usize> Default for Jet<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> fmt::Debug for Jet<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps = Self::exponents();
        let mut m = f.debug_map();
        for (e, c) in exps.iter().zip(self.coeffs.iter()) {
            if *c != 0.0 {
                m.entry(&(e[0], e[1], e[2]), c);
            }
        }
        m.finish()
    }
}

impl<const N: usize> Add for Jet<N> {
    type Output = Self;
    fn add(mut self, rhs: Self) -> Self {
        self += rhs;
        self
    }
}

impl<const N: usize> AddAssign for Jet<N> {
    fn add_assign(&mut self, rhs: Self) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a += b;
        }
    }
}

impl<const N: usize> Sub for Jet<N> {
    type Output = Self;
    fn sub(mut self, rhs: Self) -> Self {
        self -= rhs;
        self
    }
}

impl<const N: usize> SubAssign for Jet<N> {
    fn sub_assign(&mut self, rhs: Self) {
        for (a, b) in self.coeffs.iter_mut().zip(rhs.coeffs.iter()) {
            *a -= b;
        }
    }
}

impl<const N: usize> Neg for Jet<N> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl<const N: usize> Mul for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let mut out = [0.0; N];
        for &(a, b, k) in &tables(Self::ORDER).mul {
            out[k as usize] += self.coeffs[a as usize] * rhs.coeffs[b as usize];
        }
        Jet { coeffs: out }
    }
}

impl<const N: usize> Mul<f64> for Jet<N> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// Numeric types the surface expressions and geometry can be evaluated over:
/// plain reals and jets.
pub trait Real:
    Clone
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn from_f64(x: f64) -> Self;
    fn value(&self) -> f64;
    fn checked_div(&self, rhs: &Self) -> Result<Self, JetError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn checked_tan(&self) -> Result<Self, JetError>;
    fn exp(&self) -> Self;
    fn checked_ln(&self) -> Result<Self, JetError>;
    fn checked_sqrt(&self) -> Result<Self, JetError>;
    fn checked_powi(&self, n: i32) -> Result<Self, JetError>;
    fn checked_powf(&self, p: f64) -> Result<Self, JetError>;
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn value(&self) -> f64 {
        *self
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        if *rhs == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self / rhs)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn checked_tan(&self) -> Result<Self, JetError> {
        let (s, c) = sin_cos(*self);
        s.checked_div(&c)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn checked_ln(&self) -> Result<Self, JetError> {
        if *self <= 0.0 {
            return Err(JetError::Domain { op: "log", value: *self });
        }
        Ok(self.ln())
    }
    fn checked_sqrt(&self) -> Result<Self, JetError> {
        if *self < 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: *self });
        }
        Ok(self.sqrt())
    }
    fn checked_powi(&self, n: i32) -> Result<Self, JetError> {
        if n < 0 && *self == 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(self.powi(n))
    }
    fn checked_powf(&self, p: f64) -> Result<Self, JetError> {
        if *self < 0.0 || (*self == 0.0 && p < 0.0) {
            return Err(JetError::Domain { op: "pow", value: *self });
        }
        Ok(self.powf(p))
    }
}

impl<const N: usize> Real for Jet<N> {
    fn from_f64(x: f64) -> Self {
        Self::constant(x)
    }
    fn value(&self) -> f64 {
        self.coeffs[0]
    }
    fn checked_div(&self, rhs: &Self) -> Result<Self, JetError> {
        Jet::checked_div(self, rhs)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn checked_tan(&self) -> Result<Self, JetError> {
        Jet::checked_tan(self)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn checked_ln(&self) -> Result<Self, JetError> {
        Jet::checked_ln(self)
    }
    fn checked_sqrt(&self) -> Result<Self, JetError> {
        Jet::checked_sqrt(self)
    }
    fn checked_powi(&self, n: i32) -> Result<Self, JetError> {
        Jet::checked_powi(self, n)
    }
    fn checked_powf(&self, p: f64) -> Result<Self, JetError> {
        Jet::checked_powf(self, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn storage_order_is_graded() {
        let e = Jet3::exponents();
        assert_eq!(e.len(), 20);
        assert_eq!(e[0], [0, 0, 0]);
        assert_eq!(&e[1..4], &[[1, 0, 0], [0, 1, 0], [0, 0, 1]]);
        for (k, ex) in e.iter().enumerate() {
            assert_eq!(monomial_index(*ex), k);
        }
        assert_eq!(Jet4::exponents().len(), 35);
    }

    #[test]
    fn seeds() {
        let s = Jet3::seed(0, 2.0).unwrap();
        assert_eq!(s.coeff(0, 0, 0), 2.0);
        assert_eq!(s.coeff(1, 0, 0), 1.0);
        assert_eq!(s.coeffs().iter().filter(|c| **c != 0.0).count(), 2);

        let n = Jet3::seed(2, 0.0).unwrap();
        assert_eq!(n.coeff(0, 0, 1), 1.0);
        assert_eq!(n.coeffs().iter().filter(|c| **c != 0.0).count(), 1);

        let p = Jet3::seed(1, PI).unwrap();
        assert_eq!(p.value(), PI);
        assert_eq!(p.coeff(0, 1, 0), 1.0);

        assert_eq!(Jet3::seed(3, 0.0), Err(JetError::BadVariable(3)));
    }

    #[test]
    fn square_of_seed() {
        let s = Jet3::seed(0, 2.0).unwrap();
        let sq = s * s;
        assert_eq!(sq.coeff(0, 0, 0), 4.0);
        assert_eq!(sq.coeff(1, 0, 0), 4.0);
        assert_eq!(sq.coeff(2, 0, 0), 1.0);
        assert_eq!(sq.coeff(3, 0, 0), 0.0);
    }

    #[test]
    fn sine_series() {
        let s = Jet3::seed(0, 0.0).unwrap().sin();
        assert_eq!(s.coeff(0, 0, 0), 0.0);
        assert_eq!(s.coeff(1, 0, 0), 1.0);
        assert_eq!(s.coeff(2, 0, 0), 0.0);
        assert!((s.coeff(3, 0, 0) + 1.0 / 6.0).abs() < 1e-16);
    }

    #[test]
    fn inverse_sqrt_of_rescaled_factor() {
        // f = 1 + 2 M t + K t^2 with K = 0; coefficient of t^2 in f^(-1/2)
        // is (3 M^2 - K) / 2.
        let m = 0.1339746;
        let t = Jet3::seed(2, 0.0).unwrap();
        let f = Jet3::constant(1.0) + t.scale(2.0 * m);
        let g = f.checked_powf(-0.5).unwrap();
        assert!((g.coeff(0, 0, 2) - 0.0269238).abs() < 1e-7);
        assert!((g.coeff(0, 0, 2) - 1.5 * m * m).abs() < 1e-15);
        assert!((g.coeff(0, 0, 1) + m).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        let z = Jet3::constant(0.0);
        assert_eq!(Jet3::constant(1.0).checked_div(&z), Err(JetError::DivisionByZero));
        assert!(matches!(z.checked_sqrt(), Err(JetError::Domain { op: "sqrt", .. })));
        assert!(matches!(Jet3::constant(-1.0).checked_ln(), Err(JetError::Domain { .. })));
        assert!(matches!(Jet3::constant(-2.0).checked_powf(0.5), Err(JetError::Domain { .. })));
        assert_eq!(z.checked_powi(-1), Err(JetError::DivisionByZero));
        assert!(Real::checked_sqrt(&-1.0_f64).is_err());
    }

    #[test]
    fn integer_power_of_negative_base() {
        let x = Jet3::seed(0, -2.0).unwrap();
        let cube = x.checked_powi(3).unwrap();
        let direct = x * x * x;
        for (a, b) in cube.coeffs().iter().zip(direct.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn division_constant_is_exact() {
        let a = Jet3::constant(1.0) + Jet3::seed(0, 0.3).unwrap();
        let b = Jet3::seed(1, 0.7).unwrap().sin();
        let q = a.checked_div(&b).unwrap();
        assert_eq!(q.value(), a.value() / b.value());
        let back = q * b;
        for (x, y) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn partial_consumes_one_order() {
        let u = Jet3::seed(0, 1.5).unwrap();
        let v = Jet3::seed(1, -0.5).unwrap();
        let f = u * u * v; // u^2 v
        let fu = f.partial(0); // 2uv
        assert!((fu.value() - 2.0 * 1.5 * -0.5).abs() < 1e-15);
        assert!((fu.derivative(0, 1, 0) - 3.0).abs() < 1e-15);
        assert!((fu.derivative(1, 1, 0) - 2.0).abs() < 1e-15);
    }
}
