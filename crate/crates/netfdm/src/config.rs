//! Flat `key = value` run configuration.
//!
//! One pair per line; `#` starts a comment line; blank lines are ignored.
//! Keys are lower-case words with `-` or `_`; a key may appear once.

use std::collections::BTreeMap;

use netfdm_core::Error;

pub type RunConfig = BTreeMap<String, String>;

fn valid_key(k: &str) -> bool {
    !k.is_empty() && k.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-' || c == '_')
}

pub fn parse(text: &str) -> Result<RunConfig, Error> {
    let mut out = RunConfig::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some((key, value)) = trimmed.split_once('=') else {
            return Err(Error::Parse { line, message: format!("expected 'key = value', got '{trimmed}'") });
        };
        let (key, value) = (key.trim(), value.trim());
        if !valid_key(key) {
            return Err(Error::Parse { line, message: format!("invalid key '{key}'") });
        }
        if out.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Parse { line, message: format!("key '{key}' given twice") });
        }
    }
    Ok(out)
}

pub fn format(config: &RunConfig) -> String {
    config.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
