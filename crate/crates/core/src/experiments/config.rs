//! Flat INI-style configuration files.
//!
//! ```text
//! # comment
//! [preset]
//! include = fig1a          # built-in preset name, or a path relative to this file
//!
//! [policy]
//! p_max = 2, inf           # lists are comma separated
//! ```
//!
//! Includes are expanded in place, so keys after an `include` override the
//! included values. Every value remembers the file and line it came from for
//! diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use crate::harq::Protocol;
use crate::montecarlo::Traffic;

use super::presets;

const MAX_INCLUDE_DEPTH: usize = 8;

/// A configuration problem, pinned to a file and line where possible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub source: String,
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn at(source: &str, line: usize, message: impl Into<String>) -> Self {
        Self {
            source: source.to_owned(),
            line: Some(line),
            message: message.into(),
        }
    }

    pub(crate) fn global(source: &str, message: impl Into<String>) -> Self {
        Self {
            source: source.to_owned(),
            line: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.source, line, self.message),
            None => write!(f, "{}: {}", self.source, self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub value: String,
    pub source: String,
    pub line: usize,
}

impl Entry {
    pub fn error(&self, message: impl Into<String>) -> ConfigError {
        ConfigError::at(&self.source, self.line, message)
    }

    pub fn items(&self) -> Vec<&str> {
        self.value
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .collect()
    }

    pub fn f64(&self) -> Result<f64, ConfigError> {
        parse_number(self.value.trim()).map_err(|m| self.error(m))
    }

    pub fn f64_list(&self) -> Result<Vec<f64>, ConfigError> {
        let items = self.items();
        if items.is_empty() {
            return Err(self.error("expected at least one number"));
        }
        items
            .into_iter()
            .map(|s| parse_number(s).map_err(|m| self.error(m)))
            .collect()
    }

    pub fn u64(&self) -> Result<u64, ConfigError> {
        self.value
            .trim()
            .replace('_', "")
            .parse()
            .map_err(|_| self.error(format!("expected a nonnegative integer, got `{}`", self.value)))
    }

    pub fn usize_list(&self) -> Result<Vec<usize>, ConfigError> {
        let items = self.items();
        if items.is_empty() {
            return Err(self.error("expected at least one integer"));
        }
        items
            .into_iter()
            .map(|s| {
                s.parse()
                    .map_err(|_| self.error(format!("expected a nonnegative integer, got `{s}`")))
            })
            .collect()
    }

    pub fn protocols(&self) -> Result<Vec<Protocol>, ConfigError> {
        self.items()
            .into_iter()
            .map(|s| s.parse().map_err(|m: String| self.error(m)))
            .collect()
    }

    pub fn traffic(&self) -> Result<Vec<Traffic>, ConfigError> {
        self.items()
            .into_iter()
            .map(|s| s.parse().map_err(|m: String| self.error(m)))
            .collect()
    }
}

fn parse_number(s: &str) -> Result<f64, String> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "+inf" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| !v.is_nan())
            .ok_or_else(|| format!("expected a number, got `{s}`")),
    }
}

/// Parsed `section.key -> value` map with includes expanded.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
    /// Name of the top-level source, for errors not tied to a line.
    pub origin: String,
}

impl RawConfig {
    /// Parses config text. `base_dir` resolves relative include paths.
    pub fn parse(text: &str, origin: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = Self {
            origin: origin.to_owned(),
            ..Self::default()
        };
        config.absorb(text, origin, base_dir, 0)?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let origin = path.display().to_string();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::global(&origin, format!("cannot read file: {e}")))?;
        Self::parse(&text, &origin, path.parent())
    }

    pub fn from_preset(name: &str) -> Result<Self, ConfigError> {
        let text = presets::lookup(name).ok_or_else(|| {
            ConfigError::global(
                name,
                format!(
                    "unknown preset (available: {})",
                    presets::names().collect::<Vec<_>>().join(", ")
                ),
            )
        })?;
        Self::parse(text, &format!("preset:{name}"), None)
    }

    fn absorb(
        &mut self,
        text: &str,
        source: &str,
        base_dir: Option<&Path>,
        depth: usize,
    ) -> Result<(), ConfigError> {
        let mut section = String::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::at(source, line_no, "unterminated section header"))?
                    .trim();
                if name.is_empty() || name.contains(char::is_whitespace) {
                    return Err(ConfigError::at(source, line_no, "invalid section name"));
                }
                section = name.to_ascii_lowercase();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::at(source, line_no, format!("expected `key = value`, got `{line}`"))
            })?;
            let key = key.trim().to_ascii_lowercase();
            let value = value.trim().to_owned();
            if key.is_empty() {
                return Err(ConfigError::at(source, line_no, "missing key before `=`"));
            }
            if section.is_empty() {
                return Err(ConfigError::at(
                    source,
                    line_no,
                    format!("key `{key}` appears before any [section]"),
                ));
            }
            if section == "preset" && key == "include" {
                if depth >= MAX_INCLUDE_DEPTH {
                    return Err(ConfigError::at(source, line_no, "includes nested too deeply"));
                }
                self.include(&value, source, line_no, base_dir, depth)?;
                continue;
            }
            self.entries.insert(
                (section.clone(), key),
                Entry {
                    value,
                    source: source.to_owned(),
                    line: line_no,
                },
            );
        }
        Ok(())
    }

    fn include(
        &mut self,
        target: &str,
        source: &str,
        line: usize,
        base_dir: Option<&Path>,
        depth: usize,
    ) -> Result<(), ConfigError> {
        if let Some(text) = presets::lookup(target) {
            return self.absorb(text, &format!("preset:{target}"), None, depth + 1);
        }
        let path: PathBuf = match base_dir {
            Some(dir) => dir.join(target),
            None => PathBuf::from(target),
        };
        let text = std::fs::read_to_string(&path).map_err(|e| {
            ConfigError::at(
                source,
                line,
                format!("cannot include `{target}`: not a preset and unreadable as a file ({e})"),
            )
        })?;
        let nested = path.display().to_string();
        self.absorb(&text, &nested, path.parent(), depth + 1)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.get(&(section.to_owned(), key.to_owned()))
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&Entry, ConfigError> {
        self.get(section, key).ok_or_else(|| {
            ConfigError::global(&self.origin, format!("missing required key `{key}` in [{section}]"))
        })
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str, &Entry)> {
        self.entries
            .iter()
            .map(|((s, k), e)| (s.as_str(), k.as_str(), e))
    }
}

fn strip_comment(line: &str) -> &str {
    match line.find(['#', ';']) {
        Some(i) => &line[..i],
        None => line,
    }
}
