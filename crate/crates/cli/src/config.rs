//! Flat key=value run configuration: whitelisted keys, canonical form,
//! and the config hash stamped into every artifact.

use anyhow::{anyhow, bail, Result};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

/// Every key the configuration format accepts (the manual's exact list).
pub const KNOWN_KEYS: &[&str] = &[
    "n",
    "p",
    "k",
    "R",
    "eps",
    "i_max",
    "N",
    "N0",
    "M",
    "nt",
    "nz",
    "tol",
    "eps_lo",
    "eps_hi",
    "count",
    "spacing",
    "seed",
    "family",
    "torus_lengths",
    "sphere_dim",
    "curve_csv",
    "fixture_cache",
    "max_mode",
    "eigs_per_mode",
    "base_count",
    "budget",
    "alpha",
    "threshold_c0",
    "delta_rel",
    "branch_tol",
];

#[derive(Clone, Debug, Default)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("config error: cannot read {}: {e}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config error: line {} is not key=value: {line:?}", lineno + 1))?;
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                bail!("config error: unknown key `{key}`");
            }
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                bail!("config error: duplicate key `{key}`");
            }
        }
        Ok(Self { entries })
    }

    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("config error: override is not key=value: {spec:?}"))?;
        let key = key.trim();
        if !KNOWN_KEYS.contains(&key) {
            bail!("config error: unknown key `{key}`");
        }
        self.entries.insert(key.to_string(), value.trim().to_string());
        Ok(())
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        debug_assert!(KNOWN_KEYS.contains(&key));
        self.entries.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    /// Canonical form: sorted `key=value` lines. Parsing the canonical form
    /// reproduces it byte for byte.
    pub fn canonical(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        hex16(&digest)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| anyhow!("config error: missing required key `{key}`"))
    }

    pub fn require_f64(&self, key: &str) -> Result<f64> {
        self.require(key)?
            .parse::<f64>()
            .map_err(|_| anyhow!("config error: key `{key}` is not a number"))
    }

    pub fn require_usize(&self, key: &str) -> Result<usize> {
        self.require(key)?
            .parse::<usize>()
            .map_err(|_| anyhow!("config error: key `{key}` is not an integer"))
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| anyhow!("config error: key `{key}` is not a number")),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<usize>()
                .map_err(|_| anyhow!("config error: key `{key}` is not an integer")),
        }
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        match self.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse::<u64>()
                .map_err(|_| anyhow!("config error: key `{key}` is not an integer")),
        }
    }
}

fn hex16(bytes: &[u8]) -> String {
    bytes[..8].iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_roundtrip() {
        let cfg = RunConfig::parse("p = 3\nn=1\n# comment\neps=0.1\n").unwrap();
        let canon = cfg.canonical();
        let cfg2 = RunConfig::parse(&canon).unwrap();
        assert_eq!(canon, cfg2.canonical());
        assert_eq!(cfg.hash(), cfg2.hash());
    }

    #[test]
    fn unknown_key_rejected_by_name() {
        let err = RunConfig::parse("bogus=1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn missing_key_named() {
        let cfg = RunConfig::parse("n=1\n").unwrap();
        let err = cfg.require_f64("nz").unwrap_err();
        assert!(err.to_string().contains("nz"));
    }
}
