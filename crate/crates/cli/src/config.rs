//! Flat `key=value` spec files with optional `[section]` headers.
//!
//! Sections exist only for readability; keys from every section merge into
//! one flat map (later occurrences win), and each key matches the long name
//! of the corresponding CLI flag. `#` starts a comment.

use std::collections::BTreeMap;

use crate::CliError;

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') {
            if !line.ends_with(']') {
                return Err(CliError::Validation(format!(
                    "config line {}: unterminated section header `{line}`",
                    idx + 1
                )));
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Validation(format!(
                "config line {}: expected `key=value`, got `{line}`",
                idx + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}
