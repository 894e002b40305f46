//! Flat `key = value` config files with `[section]` headers.
//!
//! Sections are organizational only; keys are globally unique. Lines
//! starting with `#` are comments. Every parse failure carries the line it
//! came from.

use std::collections::HashMap;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: duplicate key `{key}`")]
    Duplicate { line: usize, key: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}`: expected {expected}, got `{value}`")]
    BadValue {
        line: usize,
        key: String,
        expected: &'static str,
        value: String,
    },
    #[error("missing required key `{0}`")]
    Missing(&'static str),
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "dim",
    "n",
    "p",
    "q",
    "m",
    "sigma",
    "N",
    "lambda",
    "alpha",
    "f",
    "g",
    "c_tilde",
    "tol",
    "max_iter",
    "out_dir",
    "seed",
    // witness experiments
    "eps",
    "gamma",
    "cutoff_k_min",
    "cutoff_k_max",
    // sweeps
    "sweep_mode",
    "lambda_min",
    "lambda_max",
    "lambda_steps",
    "alpha_min",
    "alpha_max",
    "alpha_steps",
    "lambda_lo",
    "lambda_hi",
    "bisect_rel_width",
    "bisect_max_steps",
];

/// Raw parsed config: values by key, with source lines for diagnostics.
#[derive(Debug, Clone, Default)]
pub struct Config {
    entries: HashMap<String, (String, usize)>,
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.starts_with('[') && trimmed.ends_with(']') {
                continue;
            }
            let Some((key, value)) = trimmed.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: trimmed.to_string(),
                });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(ConfigError::UnknownKey { line, key });
            }
            if entries.contains_key(&key) {
                return Err(ConfigError::Duplicate { line, key });
            }
            entries.insert(key, (value, line));
        }
        Ok(Config { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.entries.get(key).map(|(_, l)| *l).unwrap_or(0)
    }

    pub fn string(&self, key: &'static str, default: &str) -> String {
        self.raw(key).unwrap_or(default).to_string()
    }

    pub fn required(&self, key: &'static str) -> Result<&str, ConfigError> {
        self.raw(key).ok_or(ConfigError::Missing(key))
    }

    pub fn float(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                line: self.line(key),
                key: key.to_string(),
                expected: "a number",
                value: v.to_string(),
            }),
        }
    }

    pub fn required_float(&self, key: &'static str) -> Result<f64, ConfigError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| ConfigError::BadValue {
            line: self.line(key),
            key: key.to_string(),
            expected: "a number",
            value: v.to_string(),
        })
    }

    pub fn integer(&self, key: &'static str, default: usize) -> Result<usize, ConfigError> {
        match self.raw(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| ConfigError::BadValue {
                line: self.line(key),
                key: key.to_string(),
                expected: "a nonnegative integer",
                value: v.to_string(),
            }),
        }
    }

    pub fn required_integer(&self, key: &'static str) -> Result<usize, ConfigError> {
        let v = self.required(key)?;
        v.parse().map_err(|_| ConfigError::BadValue {
            line: self.line(key),
            key: key.to_string(),
            expected: "a nonnegative integer",
            value: v.to_string(),
        })
    }
}
