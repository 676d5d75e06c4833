//! CSV reports. Every row starts with the schema version and the scenario.

use std::io::{self, Write};

use hidver::{ScenarioConfig, TransferabilityScore};

pub const SCHEMA_VERSION: u32 = 1;

/// Fixed decimal with 9 significant digits.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return "NA".into();
    }
    // exponent after rounding to 9 digits, so 0.9999999999 counts as 1
    let sci = format!("{x:.8e}");
    let mag: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    let prec = (8 - mag).max(0) as usize;
    let s = format!("{x:.prec$}");
    // "-0.000000000" and friends
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        "0".into()
    } else {
        s
    }
}

pub fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".into(), num)
}

pub fn score(s: &TransferabilityScore) -> String {
    opt(s.get())
}

pub struct Csv<W: Write> {
    out: W,
    prefix: String,
}

impl<W: Write> Csv<W> {
    pub fn new(mut out: W, s: &ScenarioConfig, columns: &[&str]) -> io::Result<Self> {
        writeln!(out, "schema_version,c,delta,y_lim,{}", columns.join(","))?;
        let prefix = format!("{SCHEMA_VERSION},{},{},{}", num(s.c), num(s.delta), num(s.y_lim));
        Ok(Self { out, prefix })
    }

    pub fn row(&mut self, fields: &[String]) -> io::Result<()> {
        let fields: Vec<String> = fields.iter().map(|f| quote(f)).collect();
        writeln!(self.out, "{},{}", self.prefix, fields.join(","))
    }
}

fn quote(f: &str) -> String {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}
