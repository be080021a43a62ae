//! Search configuration: flat JSON file, then command-line overrides.

use std::fs;
use std::path::Path;

use articand_core::search::SearchConfig;
use articand_core::{Error, Result};
use clap::Args;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Flat JSON file with search settings.
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minimum translation as a fraction of the part's largest extent.
    #[arg(long)]
    pub epsilon_frac: Option<f64>,
    /// Minimum rotation in degrees.
    #[arg(long)]
    pub omega_deg: Option<f64>,
    /// Contact tolerance in normalized units.
    #[arg(long)]
    pub eps_contact: Option<f64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<SearchConfig> {
        let mut cfg = match &self.config {
            Some(path) => read_config(path)?,
            None => SearchConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.epsilon_frac {
            cfg.epsilon_frac = v;
        }
        if let Some(v) = self.omega_deg {
            cfg.omega_deg = v;
        }
        if let Some(v) = self.eps_contact {
            cfg.eps_contact = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn read_config(path: &Path) -> Result<SearchConfig> {
    let text = fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::NotFound(path.to_path_buf()),
        _ => Error::InvalidInput(format!("{}: {e}", path.display())),
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        file: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

/// SHA-256 of the compact JSON form.
pub fn config_hash<T: Serialize>(cfg: &T) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"seed": 3, "omega_deg": 45}"#).unwrap();
        let args = ConfigArgs {
            config: Some(path),
            seed: Some(9),
            ..ConfigArgs::default()
        };
        let cfg = args.resolve().unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.omega_deg, 45.0);
        assert_eq!(cfg.epsilon_frac, 0.1);
    }

    #[test]
    fn unknown_keys_and_bad_values_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        fs::write(&path, r#"{"sead": 3}"#).unwrap();
        let args = ConfigArgs {
            config: Some(path),
            ..ConfigArgs::default()
        };
        assert!(args.resolve().is_err());
        let args = ConfigArgs {
            omega_deg: Some(-1.0),
            ..ConfigArgs::default()
        };
        assert!(args.resolve().is_err());
    }

    #[test]
    fn hash_tracks_values() {
        let a = SearchConfig::default();
        let b = SearchConfig {
            seed: 1,
            ..a
        };
        assert_eq!(config_hash(&a), config_hash(&a));
        assert_ne!(config_hash(&a), config_hash(&b));
        assert_eq!(config_hash(&a).len(), 64);
    }
}
