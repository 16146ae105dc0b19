//! Configuration text plus `key=value` overrides.

use nse_core::harness::RunConfig;
use nse_core::Error;
use toml::{Table, Value};

/// Splits `a.b=value` at the first `=`.
pub fn split(s: &str) -> Result<(String, String), Error> {
    match s.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(Error::InvalidParameter(format!("expected KEY=VALUE, got `{s}`"))),
    }
}

/// A TOML literal, or a bare string when the text is not one.
fn literal(text: &str) -> Value {
    toml::from_str::<Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

fn assign(table: &mut Table, key: &str, value: Value) -> Result<(), String> {
    let mut parts = key.split('.').peekable();
    let mut cur = table;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            cur.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| format!("`{part}` in `{key}` is not a section"))?;
    }
    Err(format!("empty key `{key}`"))
}

/// Parses `text` as a run configuration after applying `sets` in order.
/// Unknown keys are rejected with their name, and with a line number when
/// no overrides are given.
pub fn parse(text: &str, sets: &[(String, String)]) -> Result<RunConfig, String> {
    if sets.is_empty() {
        return toml::from_str(text).map_err(|e| e.to_string());
    }
    let mut table: Table = toml::from_str(text).map_err(|e| e.to_string())?;
    for (k, v) in sets {
        assign(&mut table, k, literal(v))?;
    }
    Value::Table(table).try_into().map_err(|e: toml::de::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[grid]
n = 8
[scheme]
kind = "semi_implicit"
k = 0.01
nu = 1.0
[initial]
kind = "shear"
amplitude = 1.0
[run]
n_steps = 10
"#;

    #[test]
    fn overrides_replace_and_insert() {
        let c =
            parse(BASE, &[("scheme.k".into(), "0.02".into()), ("run.monitor".into(), "semi_small".into())]).unwrap();
        assert_eq!(c.scheme.k, 0.02);
        assert_eq!(c.run.monitor, nse_core::analysis::Monitor::SemiSmall);
        assert_eq!(c.grid.n, 8);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = BASE.replace("nu = 1.0", "viscocity = 1.0");
        let e = parse(&bad, &[]).unwrap_err();
        assert!(e.contains("viscocity"), "{e}");
        let e = parse(BASE, &[("scheme.viscocity".into(), "1".into())]).unwrap_err();
        assert!(e.contains("viscocity"), "{e}");
    }

    #[test]
    fn split_requires_a_key() {
        assert!(split("=1").is_err());
        assert!(split("a").is_err());
        assert_eq!(split("a.b = x=y").unwrap(), ("a.b".into(), "x=y".into()));
    }
}
