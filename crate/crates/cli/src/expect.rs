//! `--expect` files: `{"key": {"value": v, "tol": t}, ...}` checked against a
//! command summary. A numeric check without `value` compares against
//! `summary.theory.key`.

use std::collections::BTreeMap;

use serde::Deserialize;
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    #[serde(default)]
    pub value: Option<Value>,
    #[serde(default)]
    pub tol: f64,
}

pub type Expectations = BTreeMap<String, Check>;

pub fn parse(text: &str) -> Result<Expectations, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("expect file: {e}")))
}

pub fn check(ex: &Expectations, summary: &Value) -> Result<(), CliError> {
    let mut misses = Vec::new();
    for (key, c) in ex {
        let got = summary
            .get(key)
            .ok_or_else(|| CliError::Config(format!("expect key {key:?} is not in the summary")))?;
        let want = match &c.value {
            Some(v) => v.clone(),
            None => summary
                .get("theory")
                .and_then(|t| t.get(key))
                .cloned()
                .ok_or_else(|| CliError::Config(format!("no value given and no theory value for {key:?}")))?,
        };
        let ok = match (got.as_f64(), want.as_f64()) {
            (Some(g), Some(w)) => (g - w).abs() <= c.tol,
            _ => *got == want,
        };
        if !ok {
            misses.push(format!("{key} = {got}, expected {want} ± {}", c.tol));
        }
    }
    if misses.is_empty() {
        Ok(())
    } else {
        Err(CliError::Expectation(misses.join("; ")))
    }
}
