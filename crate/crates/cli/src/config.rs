//! Source configuration files: flat TOML tables keyed by the source field
//! names, plus `--set key=value` overrides.

use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use spdc_core::PhysicalSource;
use toml::{Table, Value};

/// Keys accepted in a configuration file, as spelled in the file.
pub const SOURCE_KEYS: [&str; 19] = [
    "lambda_p", "lambda_s", "lambda_i", "n_p", "n_s", "n_i", "np_g", "ns_g", "ni_g", "L", "Lambda", "m_qpm",
    "chi_eff", "epsilon", "N_p", "w_p", "w_s", "w_i", "pump_bw",
];

/// Convenience key: FWHM of the pump intensity spectrum [rad/s], converted
/// to the rms width `pump_bw`.
pub const FWHM_KEY: &str = "pump_bw_fwhm";

pub fn fwhm_to_rms(fwhm: f64) -> f64 {
    fwhm / (8.0 * 2f64.ln()).sqrt()
}

/// Parses one `--set` value as a TOML scalar.
fn parse_value(key: &str, raw: &str) -> Result<Value> {
    let doc: Table = format!("v = {raw}")
        .parse()
        .with_context(|| format!("cannot parse value `{raw}` for `{key}`"))?;
    Ok(doc["v"].clone())
}

fn check_key(key: &str) -> Result<()> {
    if SOURCE_KEYS.contains(&key) || key == FWHM_KEY {
        Ok(())
    } else {
        bail!("unknown configuration key `{key}` (known: {}, {FWHM_KEY})", SOURCE_KEYS.join(", "))
    }
}

/// Applies `key=value` overrides to a parsed table.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let (key, raw) = o
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{o}` is not of the form key=value"))?;
        let key = key.trim();
        check_key(key)?;
        table.insert(key.to_string(), parse_value(key, raw.trim())?);
    }
    Ok(())
}

/// Builds a source from a table, checking keys and converting the FWHM
/// convenience key.
pub fn source_from_table(mut table: Table) -> Result<PhysicalSource> {
    for key in table.keys() {
        check_key(key)?;
    }
    if let Some(fwhm) = table.remove(FWHM_KEY) {
        if table.contains_key("pump_bw") {
            bail!("give either `pump_bw` or `{FWHM_KEY}`, not both");
        }
        let fwhm = as_float(FWHM_KEY, &fwhm)?;
        table.insert("pump_bw".into(), Value::Float(fwhm_to_rms(fwhm)));
    }
    table.entry("pump_bw").or_insert(Value::Float(0.0));
    for (key, value) in table.iter_mut() {
        if key != "m_qpm" {
            *value = Value::Float(as_float(key, value)?);
        }
    }
    let src: PhysicalSource = Value::Table(table).try_into().context("invalid source configuration")?;
    Ok(src)
}

fn as_float(key: &str, v: &Value) -> Result<f64> {
    match v {
        Value::Float(x) => Ok(*x),
        Value::Integer(n) => Ok(*n as f64),
        other => bail!("`{key}` must be a number, got {other}"),
    }
}

/// Reads a configuration file and applies overrides.
pub fn load_source(path: &Path, overrides: &[String]) -> Result<PhysicalSource> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let mut table: Table = text.parse().with_context(|| format!("cannot parse {}", path.display()))?;
    apply_overrides(&mut table, overrides)?;
    source_from_table(table).with_context(|| format!("in {}", path.display()))
}
