//! Input and output formatting shared by file readers and the CLI.

use std::fmt;

use serde::{Deserialize, Serialize};

/// A probability or weight written either as a JSON number or as an exact
/// fraction string such as `"5/14"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prob {
    Num(f64),
    Text(String),
}

impl Prob {
    pub fn value(&self) -> std::result::Result<f64, String> {
        match self {
            Prob::Num(x) => Ok(*x),
            Prob::Text(s) => parse_fraction(s),
        }
    }
}

impl From<f64> for Prob {
    fn from(x: f64) -> Self {
        Prob::Num(x)
    }
}

/// Parses `"p/q"` or a plain decimal.
pub fn parse_fraction(s: &str) -> std::result::Result<f64, String> {
    let s = s.trim();
    let parse = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| format!("`{s}` is not a number or fraction"))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let (p, q) = (parse(p)?, parse(q)?);
            if q == 0.0 {
                return Err(format!("`{s}` has a zero denominator"));
            }
            Ok(p / q)
        }
        None => parse(s),
    }
}

/// Rounds to `digits` significant digits and prints the shortest decimal
/// that round-trips the rounded value. Negative zero prints as `0`.
pub fn sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{:.*e}", digits.saturating_sub(1), x)
        .parse()
        .unwrap_or(x);
    if rounded == 0.0 {
        return "0".into();
    }
    format!("{rounded}")
}

/// CSV cell with 9 significant digits.
pub fn csv_num(x: f64) -> String {
    sig(x, 9)
}

/// Minimal CSV builder with LF line endings.
#[derive(Debug, Clone, Default)]
pub struct Csv {
    out: String,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut c = Csv::default();
        c.out.push_str(&header.join(","));
        c.out.push('\n');
        c
    }

    pub fn row(&mut self, cells: &[f64]) {
        let cells: Vec<String> = cells.iter().map(|&x| csv_num(x)).collect();
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }

    pub fn raw_row(&mut self, cells: &[String]) {
        self.out.push_str(&cells.join(","));
        self.out.push('\n');
    }
}

impl fmt::Display for Csv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.out)
    }
}
