//! Recursive-descent parser for `.surf` surface definitions.
//!
//! ```text
//! file    := stmt (';' stmt)* ';'?
//! stmt    := ('x' | 'y' | 'z') '=' expr
//!          | 'params' NAME '=' expr (',' NAME '=' expr)*
//!          | 'domain' range (',' range)*
//! range   := ('u' | 'v') 'in' '[' expr ',' expr (']' | ')') 'periodic'?
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' exponent)?
//! exponent:= INT | '(' '-'? INT ('/' INT)? ')'
//! primary := NUMBER | 'pi' | 'u' | 'v' | NAME | FUNC '(' expr ')' | '(' expr ')'
//! ```
//!
//! `#` starts a comment running to the end of the line.

use super::expr::{BinOp, Expr, Func, Rational, Var};
use super::{Interval, SurfaceDef, SurfaceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(u64),
    Ident(String),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(x) => format!("number {x}"),
            Tok::Int(n) => format!("number {n}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(c) => format!("'{c}'"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, SurfaceError> {
    let mut toks = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut is_int = true;
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let tok = match (is_int, text.parse::<u64>()) {
                (true, Ok(n)) => Tok::Int(n),
                _ => Tok::Num(text.parse::<f64>().map_err(|_| SurfaceError::Syntax {
                    line: pos.line,
                    col: pos.col,
                    expected: vec!["number".into()],
                    found: text.clone(),
                })?),
            };
            toks.push((tok, pos));
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            col += i - start;
            let text = if text == "π" { "pi".to_string() } else { text };
            toks.push((Tok::Ident(text), pos));
            continue;
        }
        if "+-*/^()[],;=".contains(c) {
            toks.push((Tok::Sym(c), pos));
            i += 1;
            col += 1;
            continue;
        }
        return Err(SurfaceError::Syntax {
            line: line,
            col,
            expected: vec!["expression or statement".into()],
            found: format!("'{c}'"),
        });
    }
    toks.push((Tok::Eof, Pos { line, col }));
    Ok(toks)
}

const KEYWORDS: &[&str] = &["params", "domain", "in", "periodic", "pi", "u", "v"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    /// Interned parameter names with the position of their first use.
    names: Vec<(String, Pos)>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> SurfaceError {
        let pos = self.pos();
        SurfaceError::Syntax {
            line: pos.line,
            col: pos.col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn is_sym(&self, c: char) -> bool {
        *self.peek() == Tok::Sym(c)
    }

    fn is_ident(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(t) if t == s)
    }

    fn expect_sym(&mut self, c: char) -> Result<(), SurfaceError> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("'{c}'")]))
        }
    }

    fn expect_ident(&mut self, s: &str) -> Result<(), SurfaceError> {
        if self.is_ident(s) {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&[&format!("'{s}'")]))
        }
    }

    fn intern(&mut self, name: &str, pos: Pos) -> usize {
        if let Some(i) = self.names.iter().position(|(n, _)| n == name) {
            return i;
        }
        self.names.push((name.to_string(), pos));
        self.names.len() - 1
    }

    fn expr(&mut self) -> Result<Expr, SurfaceError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.is_sym('+') {
                BinOp::Add
            } else if self.is_sym('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, SurfaceError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.is_sym('*') {
                BinOp::Mul
            } else if self.is_sym('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, SurfaceError> {
        if self.is_sym('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SurfaceError> {
        let base = self.primary()?;
        if !self.is_sym('^') {
            return Ok(base);
        }
        self.bump();
        let exp = self.exponent()?;
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn exponent(&mut self) -> Result<Rational, SurfaceError> {
        const EXPECTED: &[&str] = &["integer exponent", "'(' rational exponent ')'"];
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Rational::integer(n as i64))
            }
            Tok::Sym('(') => {
                self.bump();
                let neg = if self.is_sym('-') {
                    self.bump();
                    true
                } else {
                    false
                };
                let Tok::Int(num) = self.peek().clone() else {
                    return Err(self.error(&["integer"]));
                };
                self.bump();
                let mut den = 1;
                if self.is_sym('/') {
                    self.bump();
                    let Tok::Int(d) = self.peek().clone() else {
                        return Err(self.error(&["integer"]));
                    };
                    if d == 0 {
                        return Err(self.error(&["nonzero denominator"]));
                    }
                    self.bump();
                    den = d;
                }
                self.expect_sym(')')?;
                let num = if neg { -(num as i64) } else { num as i64 };
                Ok(Rational::new(num, den).expect("nonzero denominator"))
            }
            _ => Err(self.error(EXPECTED)),
        }
    }

    fn primary(&mut self) -> Result<Expr, SurfaceError> {
        const EXPECTED: &[&str] = &["number", "identifier", "'('", "'-'"];
        let (tok, pos) = (self.peek().clone(), self.pos());
        match tok {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr::Num(x))
            }
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Num(n as f64))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "pi" => return Ok(Expr::Pi),
                    "u" => return Ok(Expr::Var(Var::U)),
                    "v" => return Ok(Expr::Var(Var::V)),
                    _ => {}
                }
                if self.is_sym('(') {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(SurfaceError::UnknownIdentifier {
                            name,
                            line: pos.line,
                            col: pos.col,
                        });
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_sym(')')?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if KEYWORDS.contains(&name.as_str()) || Func::from_name(&name).is_some() {
                    return Err(SurfaceError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        expected: EXPECTED.iter().map(|s| s.to_string()).collect(),
                        found: format!("'{name}'"),
                    });
                }
                Ok(Expr::Param(self.intern(&name, pos)))
            }
            _ => Err(self.error(EXPECTED)),
        }
    }
}

struct RawRange {
    lo: Expr,
    hi: Expr,
    closed_hi: bool,
    periodic: bool,
}

/// Parses a standalone expression in `u`, `v` and the given parameter names.
pub fn parse_expr(src: &str, param_names: &[&str]) -> Result<Expr, SurfaceError> {
    let mut p = Parser { toks: lex(src)?, at: 0, names: Vec::new() };
    let mut e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["operator", "end of input"]));
    }
    let map = resolve(&p.names, param_names)?;
    e.remap_params(&map);
    Ok(e)
}

fn resolve(used: &[(String, Pos)], declared: &[&str]) -> Result<Vec<usize>, SurfaceError> {
    used.iter()
        .map(|(name, pos)| {
            declared.iter().position(|d| d == name).ok_or_else(|| SurfaceError::UnknownIdentifier {
                name: name.clone(),
                line: pos.line,
                col: pos.col,
            })
        })
        .collect()
}

pub fn parse_surface(src: &str) -> Result<SurfaceDef, SurfaceError> {
    let mut p = Parser { toks: lex(src)?, at: 0, names: Vec::new() };
    let mut comps: [Option<Expr>; 3] = [None, None, None];
    let mut params: Vec<(String, Expr, Pos)> = Vec::new();
    let mut ranges: [Option<RawRange>; 2] = [None, None];

    loop {
        if *p.peek() == Tok::Eof {
            break;
        }
        let (tok, pos) = (p.peek().clone(), p.pos());
        match tok {
            Tok::Ident(ref s) if s == "x" || s == "y" || s == "z" => {
                let slot = match s.as_str() {
                    "x" => 0,
                    "y" => 1,
                    _ => 2,
                };
                p.bump();
                p.expect_sym('=')?;
                if comps[slot].is_some() {
                    return Err(SurfaceError::Syntax {
                        line: pos.line,
                        col: pos.col,
                        expected: vec!["a single definition per coordinate".into()],
                        found: format!("second definition of '{s}'"),
                    });
                }
                comps[slot] = Some(p.expr()?);
            }
            Tok::Ident(ref s) if s == "params" => {
                p.bump();
                loop {
                    let (name_tok, npos) = p.bump();
                    let Tok::Ident(name) = name_tok else {
                        p.at -= 1;
                        return Err(p.error(&["parameter name"]));
                    };
                    if KEYWORDS.contains(&name.as_str())
                        || Func::from_name(&name).is_some()
                        || ["x", "y", "z"].contains(&name.as_str())
                    {
                        return Err(SurfaceError::Syntax {
                            line: npos.line,
                            col: npos.col,
                            expected: vec!["parameter name".into()],
                            found: format!("reserved word '{name}'"),
                        });
                    }
                    p.expect_sym('=')?;
                    let value = p.expr()?;
                    params.push((name, value, npos));
                    if p.is_sym(',') {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            Tok::Ident(ref s) if s == "domain" => {
                p.bump();
                loop {
                    let slot = if p.is_ident("u") {
                        0
                    } else if p.is_ident("v") {
                        1
                    } else {
                        return Err(p.error(&["'u'", "'v'"]));
                    };
                    p.bump();
                    p.expect_ident("in")?;
                    p.expect_sym('[')?;
                    let lo = p.expr()?;
                    p.expect_sym(',')?;
                    let hi = p.expr()?;
                    let closed_hi = if p.is_sym(']') {
                        true
                    } else if p.is_sym(')') {
                        false
                    } else {
                        return Err(p.error(&["']'", "')'"]));
                    };
                    p.bump();
                    let periodic = if p.is_ident("periodic") {
                        p.bump();
                        true
                    } else {
                        false
                    };
                    ranges[slot] = Some(RawRange { lo, hi, closed_hi, periodic });
                    if p.is_sym(',') {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            _ => return Err(p.error(&["'x ='", "'y ='", "'z ='", "'params'", "'domain'"])),
        }
        if p.is_sym(';') {
            p.bump();
        } else if *p.peek() != Tok::Eof {
            return Err(p.error(&["';'", "end of input"]));
        }
    }

    let end = p.pos();
    let missing = |what: &str| SurfaceError::Syntax {
        line: end.line,
        col: end.col,
        expected: vec![what.to_string()],
        found: "end of input".into(),
    };
    let [x, y, z] = comps;
    let mut components = [
        x.ok_or_else(|| missing("'x =' statement"))?,
        y.ok_or_else(|| missing("'y =' statement"))?,
        z.ok_or_else(|| missing("'z =' statement"))?,
    ];
    let [ur, vr] = ranges;
    let ur = ur.ok_or_else(|| SurfaceError::BadDomain("missing range for u".into()))?;
    let vr = vr.ok_or_else(|| SurfaceError::BadDomain("missing range for v".into()))?;

    // Duplicate parameter declarations.
    for (i, (name, _, pos)) in params.iter().enumerate() {
        if params[..i].iter().any(|(n, _, _)| n == name) {
            return Err(SurfaceError::Syntax {
                line: pos.line,
                col: pos.col,
                expected: vec!["distinct parameter names".into()],
                found: format!("duplicate parameter '{name}'"),
            });
        }
    }
    let declared: Vec<&str> = params.iter().map(|(n, _, _)| n.as_str()).collect();
    let map = resolve(&p.names, &declared)?;

    // Defaults may refer to earlier parameters only.
    let mut defaults = Vec::with_capacity(params.len());
    for (k, (name, value, pos)) in params.iter().enumerate() {
        let mut value = value.clone();
        value.remap_params(&map);
        if value.uses_chart_vars() {
            return Err(SurfaceError::Syntax {
                line: pos.line,
                col: pos.col,
                expected: vec!["constant expression".into()],
                found: format!("default of '{name}' depends on u or v"),
            });
        }
        let mut later = None;
        check_params_below(&value, k, &mut later);
        if let Some(j) = later {
            return Err(SurfaceError::UnknownIdentifier {
                name: declared[j].to_string(),
                line: pos.line,
                col: pos.col,
            });
        }
        let x = value
            .eval_const(&defaults)
            .map_err(|e| SurfaceError::BadDomain(format!("default of '{name}': {e}")))?;
        defaults.push(x);
    }

    for c in components.iter_mut() {
        c.remap_params(&map);
    }
    let fix = |r: RawRange| -> Result<Interval, SurfaceError> {
        let (mut lo, mut hi) = (r.lo, r.hi);
        lo.remap_params(&map);
        hi.remap_params(&map);
        if lo.uses_chart_vars() || hi.uses_chart_vars() {
            return Err(SurfaceError::BadDomain("domain bounds must not depend on u or v".into()));
        }
        Ok(Interval { lo, hi, closed_hi: r.closed_hi, periodic: r.periodic })
    };
    let def = SurfaceDef {
        components,
        params: declared.iter().map(|s| s.to_string()).zip(defaults).collect(),
        u_range: fix(ur)?,
        v_range: fix(vr)?,
    };
    def.resolve_domain(&def.default_values())?;
    Ok(def)
}

fn check_params_below(e: &Expr, limit: usize, bad: &mut Option<usize>) {
    match e {
        Expr::Param(i) if *i >= limit => *bad = Some(*i),
        Expr::Param(_) | Expr::Num(_) | Expr::Pi | Expr::Var(_) => {}
        Expr::Neg(a) | Expr::Call(_, a) | Expr::Pow(a, _) => check_params_below(a, limit, bad),
        Expr::Binary(_, a, b) => {
            check_params_below(a, limit, bad);
            check_params_below(b, limit, bad);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONE: &str = "x = (R + v*cos(phi))*cos(u); y = (R + v*cos(phi))*sin(u); z = v*sin(phi); \
                        params R=1, phi=0.5235988; domain u in [0, 2*pi) periodic, v in [0, 2]";

    #[test]
    fn parses_cone() {
        let def = parse_surface(CONE).unwrap();
        assert_eq!(def.params.len(), 2);
        assert_eq!(def.params[0], ("R".to_string(), 1.0));
        assert_eq!(def.params[1], ("phi".to_string(), 0.5235988));
        assert!(def.u_range.periodic);
        assert!(!def.u_range.closed_hi);
        assert!(!def.v_range.periodic);
        assert!(def.v_range.closed_hi);
    }

    #[test]
    fn parses_planar_ring() {
        let def = parse_surface("x = v*cos(u); y = v*sin(u); z = 0; domain u in [0, 2*pi) periodic, v in [0.5, 2]").unwrap();
        assert!(def.params.is_empty());
        assert_eq!(def.components[2], Expr::Num(0.0));
    }

    #[test]
    fn unclosed_paren_is_a_syntax_error() {
        let err = parse_surface("x = (R + v").unwrap_err();
        match err {
            SurfaceError::Syntax { line, col, expected, found } => {
                assert_eq!((line, col), (1, 11));
                assert!(expected.iter().any(|e| e == "')'"));
                assert_eq!(found, "end of input");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_reports_position() {
        let err = parse_surface("x = u;\ny = v*Q;\nz = 0; domain u in [0,1], v in [0,1]").unwrap_err();
        assert_eq!(err, SurfaceError::UnknownIdentifier { name: "Q".into(), line: 2, col: 7 });
        let err = parse_surface("x = foo(u); y = v; z = 0; domain u in [0,1], v in [0,1]").unwrap_err();
        assert!(matches!(err, SurfaceError::UnknownIdentifier { ref name, .. } if name == "foo"));
    }

    #[test]
    fn bad_domain() {
        let err = parse_surface("x = u; y = v; z = 0; domain u in [1, 0], v in [0, 1]").unwrap_err();
        assert!(matches!(err, SurfaceError::BadDomain(_)));
        let err = parse_surface("x = u; y = v; z = 0; domain u in [0, 1]").unwrap_err();
        assert!(matches!(err, SurfaceError::BadDomain(_)));
    }

    #[test]
    fn rational_exponents() {
        let e = parse_expr("u^2 + v^(1/2) - u^(-3/2)", &[]).unwrap();
        let val = e.eval(&4.0, &9.0, &[]).unwrap();
        assert!((val - (16.0 + 3.0 - 0.125)).abs() < 1e-15);
        assert!(parse_expr("u^0.5", &[]).is_err());
        assert!(parse_expr("u^(1/0)", &[]).is_err());
    }

    #[test]
    fn precedence() {
        let e = parse_expr("-u^2 + 2*v/4 - 1", &[]).unwrap();
        assert_eq!(e.eval(&3.0, &2.0, &[]).unwrap(), -9.0 + 1.0 - 1.0);
    }

    #[test]
    fn defaults_may_use_earlier_params() {
        let def = parse_surface("x = a*u; y = b*v; z = 0; params a = pi/2, b = 2*a; domain u in [0,1], v in [0,b]").unwrap();
        assert!((def.params[1].1 - std::f64::consts::PI).abs() < 1e-15);
        assert!(parse_surface("x = a*u; y = v; z = 0; params a = b, b = 1; domain u in [0,1], v in [0,1]").is_err());
    }
}
