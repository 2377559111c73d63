//! Fixed float formatting shared by every text and JSON writer, so identical
//! runs produce byte-identical files.

use serde_json::value::RawValue;

/// C-style `%.12e`: one leading digit, twelve decimals, signed two-digit
/// (or wider) exponent. Non-finite values print as `nan`, `inf`, `-inf`.
pub fn sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

/// A JSON number token in `%.12e` form, or `null` when not finite.
pub fn json_num(x: f64) -> Box<RawValue> {
    let text = if x.is_finite() { sci(x) } else { "null".into() };
    RawValue::from_string(text).expect("valid JSON number")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf() {
        assert_eq!(sci(1.8660254037844386), "1.866025403784e+00");
        assert_eq!(sci(-0.0179492), "-1.794920000000e-02");
        assert_eq!(sci(0.0), "0.000000000000e+00");
        assert_eq!(sci(1e300), "1.000000000000e+300");
        assert_eq!(sci(f64::NAN), "nan");
        assert_eq!(json_num(f64::INFINITY).get(), "null");
        assert_eq!(json_num(2.5).get(), "2.500000000000e+00");
    }
}
