//! Bundled per-rate parameter tables (`c_opt`, `gamma`) for the built-in codes.

use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

const TABLES: &str = include_str!("../data/params.toml");

/// Slack when matching a rate against a table range.
const RATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parameter {
    COpt,
    Gamma,
    /// `c_opt` to pair with the `gamma` table.
    CombinedCOpt,
}

#[derive(Debug, Clone, Deserialize)]
struct CodeTables {
    #[serde(default)]
    c_opt: Vec<[f64; 3]>,
    #[serde(default)]
    gamma: Vec<[f64; 3]>,
    #[serde(default)]
    combined_c_opt: Vec<[f64; 3]>,
}

#[derive(Debug, Clone, Deserialize)]
struct Tables {
    codes: BTreeMap<String, CodeTables>,
}

fn tables() -> &'static Tables {
    static PARSED: OnceLock<Tables> = OnceLock::new();
    PARSED.get_or_init(|| toml::from_str(TABLES).expect("bundled parameter tables parse"))
}

/// Table value for `code` at erasure rate `p`: the row whose range contains
/// `p`, else the row with the nearest range. `None` when the code has no
/// such table.
pub fn lookup(code: &str, parameter: Parameter, p: f64) -> Option<f64> {
    let t = tables().codes.get(code)?;
    let rows = match parameter {
        Parameter::COpt => &t.c_opt,
        Parameter::Gamma => &t.gamma,
        Parameter::CombinedCOpt => &t.combined_c_opt,
    };
    if let Some(row) = rows.iter().find(|[lo, hi, _]| p >= lo - RATE_EPS && p <= hi + RATE_EPS) {
        return Some(row[2]);
    }
    let distance = |[lo, hi, _]: &[f64; 3]| if p < *lo { lo - p } else { p - hi };
    rows.iter()
        .min_by(|a, b| distance(a).total_cmp(&distance(b)))
        .map(|row| row[2])
}

/// Codes that have bundled tables.
pub fn tabulated_codes() -> Vec<&'static str> {
    tables().codes.keys().map(String::as_str).collect()
}
