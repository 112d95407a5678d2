//! Generator configuration and its flat `key = value` file format.
//!
//! ```text
//! # comment
//! seed = 42
//! p_stop = 0.2
//! int_constant_pool = 0, 1, -1, 2, 7
//! weight.scf.while = 0.5
//! ```
//!
//! Keys are exactly the field names; per-op weights use `weight.<dialect>.<op>`.
//! Unknown keys, malformed values, and duplicate keys are load errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::dialects::registry::pooled_kinds;
use crate::ir::OpKind;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    /// Probability of stopping after each successful insertion into a block.
    pub p_stop: f64,
    pub max_region_depth: u32,
    pub max_total_ops: u32,
    pub max_ops_per_block: u32,
    /// Fully-qualified op name -> sampling weight. Missing entries weigh 1.0.
    pub op_weights: BTreeMap<String, f64>,
    pub max_functions: u32,
    pub max_return_values: u32,
    pub allow_unsafe_memory: bool,
    /// Constants sampled for `arith.constant`; the min, max and one uniform
    /// draw of the sampled width are always added on top.
    pub int_constant_pool: Vec<i64>,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            seed: 0,
            p_stop: 0.2,
            max_region_depth: 4,
            max_total_ops: 200,
            max_ops_per_block: 32,
            op_weights: BTreeMap::new(),
            max_functions: 3,
            max_return_values: 2,
            allow_unsafe_memory: false,
            int_constant_pool: vec![0, 1, -1, 2, 7],
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate config key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: invalid value `{value}` for `{key}`")]
    BadValue { line: usize, key: String, value: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

const KEYS: &[&str] = &[
    "seed",
    "p_stop",
    "max_region_depth",
    "max_total_ops",
    "max_ops_per_block",
    "max_functions",
    "max_return_values",
    "allow_unsafe_memory",
    "int_constant_pool",
];

impl GenConfig {
    pub fn weight(&self, kind: OpKind) -> f64 {
        self.op_weights.get(kind.name()).copied().unwrap_or(1.0)
    }

    pub fn set_weight(&mut self, kind: OpKind, w: f64) {
        self.op_weights.insert(kind.name().to_string(), w);
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(self.p_stop > 0.0 && self.p_stop < 1.0) {
            return invalid("p_stop must lie strictly between 0 and 1");
        }
        if self.max_region_depth == 0
            || self.max_total_ops == 0
            || self.max_ops_per_block == 0
            || self.max_functions == 0
        {
            return invalid("depth, op and function limits must be positive");
        }
        for (name, w) in &self.op_weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(ConfigError::Invalid(format!("weight of {name} must be >= 0")));
            }
            match OpKind::from_name(name) {
                Some(k) if pooled_kinds().any(|p| p == k) => {}
                _ => return Err(ConfigError::Invalid(format!("{name} is not a pooled operation"))),
            }
        }
        if !pooled_kinds().any(|k| self.weight(k) > 0.0) {
            return invalid("at least one operation must have positive weight");
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(ConfigError::Syntax {
                    line,
                    text: raw.to_string(),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            if !seen.insert(key.to_string()) {
                return Err(ConfigError::DuplicateKey {
                    line,
                    key: key.to_string(),
                });
            }
            self.set(key, value).map_err(|e| match e {
                SetError::Unknown => ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                },
                SetError::Value => ConfigError::BadValue {
                    line,
                    key: key.to_string(),
                    value: value.to_string(),
                },
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = GenConfig::default();
        cfg.apply_text(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), SetError> {
        fn num<T: std::str::FromStr>(v: &str) -> Result<T, SetError> {
            v.parse().map_err(|_| SetError::Value)
        }
        if let Some(op) = key.strip_prefix("weight.") {
            let kind = OpKind::from_name(op).ok_or(SetError::Unknown)?;
            if !pooled_kinds().any(|k| k == kind) {
                return Err(SetError::Unknown);
            }
            self.op_weights.insert(op.to_string(), num(value)?);
            return Ok(());
        }
        match key {
            "seed" => self.seed = num(value)?,
            "p_stop" => self.p_stop = num(value)?,
            "max_region_depth" => self.max_region_depth = num(value)?,
            "max_total_ops" => self.max_total_ops = num(value)?,
            "max_ops_per_block" => self.max_ops_per_block = num(value)?,
            "max_functions" => self.max_functions = num(value)?,
            "max_return_values" => self.max_return_values = num(value)?,
            "allow_unsafe_memory" => self.allow_unsafe_memory = num(value)?,
            "int_constant_pool" => {
                self.int_constant_pool = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(num)
                    .collect::<Result<_, _>>()?;
            }
            _ => return Err(SetError::Unknown),
        }
        Ok(())
    }

    /// Canonical text form: every key, every pooled op weight, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let value = match *key {
                "seed" => self.seed.to_string(),
                "p_stop" => self.p_stop.to_string(),
                "max_region_depth" => self.max_region_depth.to_string(),
                "max_total_ops" => self.max_total_ops.to_string(),
                "max_ops_per_block" => self.max_ops_per_block.to_string(),
                "max_functions" => self.max_functions.to_string(),
                "max_return_values" => self.max_return_values.to_string(),
                "allow_unsafe_memory" => self.allow_unsafe_memory.to_string(),
                "int_constant_pool" => self
                    .int_constant_pool
                    .iter()
                    .map(i64::to_string)
                    .collect::<Vec<_>>()
                    .join(", "),
                _ => unreachable!(),
            };
            let _ = writeln!(out, "{key} = {value}");
        }
        let mut names: Vec<&str> = pooled_kinds().map(OpKind::name).collect();
        names.sort_unstable();
        for name in names {
            let w = self.op_weights.get(name).copied().unwrap_or(1.0);
            let _ = writeln!(out, "weight.{name} = {w}");
        }
        out
    }
}

enum SetError {
    Unknown,
    Value,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dump_then_load_is_identity() {
        let mut cfg = GenConfig {
            seed: 99,
            p_stop: 0.125,
            allow_unsafe_memory: true,
            int_constant_pool: vec![3, -4],
            ..Default::default()
        };
        cfg.set_weight(OpKind::While, 0.0);
        let text = cfg.to_text();
        let back = GenConfig::parse(&text).unwrap();
        assert_eq!(back.to_text(), text);
        assert_eq!(back.weight(OpKind::While), 0.0);
        assert_eq!(back.seed, 99);
    }

    #[test]
    fn unknown_key_is_error() {
        let err = GenConfig::parse("seed = 1\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { line: 2, ref key } if key == "bogus"));
        let err = GenConfig::parse("weight.arith.fpowi = 1").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }));
        // terminators never enter the pool, so they have no weight key
        let err = GenConfig::parse("weight.scf.yield = 1").unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { .. }));
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(GenConfig::parse("p_stop = 1.0").is_err());
        assert!(GenConfig::parse("p_stop = 0").is_err());
        assert!(GenConfig::parse("seed = -1").is_err());
        assert!(GenConfig::parse("weight.arith.addi = -0.5").is_err());
        assert!(GenConfig::parse("seed = 1\nseed = 2").is_err());
        assert!(GenConfig::parse("just words").is_err());
    }

    #[test]
    fn all_zero_weights_rejected() {
        let text: String = pooled_kinds().map(|k| format!("weight.{} = 0\n", k.name())).collect();
        assert!(matches!(GenConfig::parse(&text), Err(ConfigError::Invalid(_))));
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg = GenConfig::parse("# header\n\nseed = 5 # trailing\n").unwrap();
        assert_eq!(cfg.seed, 5);
    }
}
