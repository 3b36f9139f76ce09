//! Number formatting and output records.

use serde::Serialize;
use serde_json::{json, Map, Value};

/// C-style `%.{sig}g`: fixed notation for moderate exponents, scientific
/// otherwise, trailing zeros dropped, exponent padded to two digits.
pub fn fmt_g(x: f64, sig: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= sig as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn g15(x: f64) -> String {
    fmt_g(x, 15)
}

/// JSON number, or the string `"inf"` for values JSON cannot carry.
pub fn json_num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(g15(x))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputRecord {
    pub command: String,
    pub parameters: Map<String, Value>,
    pub value: Value,
    pub method: String,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl OutputRecord {
    pub fn new(command: &str, value: f64, method: &str) -> Self {
        Self {
            command: command.into(),
            parameters: Map::new(),
            value: json_num(value),
            method: method.into(),
            extra: Map::new(),
        }
    }

    pub fn param(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.parameters.insert(key.into(), v.into());
        self
    }

    pub fn extra(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.extra.insert(key.into(), v.into());
        self
    }
}
