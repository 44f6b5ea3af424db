//! Layered configuration: built-in defaults, then a TOML file, then
//! `--set key=value` overrides.
//!
//! The file may hold keys at the top level and in a table named after the
//! subcommand (`[clt]`, `[sweep]`, ...); the subcommand table wins. Nested
//! keys are addressed with dots, as in `--set quadrature.abs_tol=1e-12`.

use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use crate::error::{Error, Result};

pub const SUBCOMMANDS: [&str; 9] = ["constants", "kernel", "simulate", "dual", "limit", "clt", "sweep", "probe2d", "mdc"];

/// Parses the right-hand side of an override as a TOML value, falling back to a bare string.
pub fn parse_value(raw: &str) -> Value {
    match toml::from_str::<Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| Value::String(raw.to_string())),
        Err(_) => Value::String(raw.to_string()),
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::Config(format!("empty key in {key:?}")))?;
    let mut cur = table;
    for part in parts {
        let entry = cur.entry(part.to_string()).or_insert_with(|| Value::Table(Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| Error::Config(format!("key {part:?} in {key:?} is not a table")))?;
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn merge(base: &mut Table, top: Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(t)) => merge(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Keys of `file` that apply to `subcommand`.
pub fn file_layer(file: &Table, subcommand: &str) -> Table {
    let mut out: Table = file
        .iter()
        .filter(|(k, _)| !SUBCOMMANDS.contains(&k.as_str()))
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    if let Some(Value::Table(own)) = file.get(subcommand) {
        merge(&mut out, own.clone());
    }
    out
}

/// Resolves `defaults < file < overrides` and deserializes the result.
///
/// Unknown keys and type mismatches are reported by the target type, which
/// must deny unknown fields.
pub fn resolve<T: DeserializeOwned>(defaults: Table, file: Option<&Table>, subcommand: &str, overrides: &[(String, Value)]) -> Result<(T, Table)> {
    let mut table = defaults;
    if let Some(file) = file {
        merge(&mut table, file_layer(file, subcommand));
    }
    for (k, v) in overrides {
        set_path(&mut table, k, v.clone())?;
    }
    let value: T = Value::Table(table.clone())
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(format!("{subcommand}: {}", e.message())))?;
    Ok((value, table))
}

pub fn to_table<T: Serialize>(value: &T) -> Result<Table> {
    Table::try_from(value).map_err(|e| Error::Config(format!("cannot serialize defaults: {e}")))
}
