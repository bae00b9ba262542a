//! Runtime configuration.
//!
//! The KDF profile resolves from command-line flags, then the
//! `HASHMARK_PROFILE` environment variable, then the config file, then the
//! `secure` default. The config file is flat TOML:
//!
//! ```toml
//! profile = "test"          # "secure" | "test"
//! memory_kib = 65536        # optional explicit KdfParams fields
//! iterations = 64
//! parallelism = 1
//! canon = "c1"
//! workers = 4
//! memory_budget_kib = 409600
//! ```
//!
//! Explicit `memory_kib`/`iterations`/`parallelism` keys in the file only
//! apply when the file (or the default) decided the profile; the matching
//! flags always apply.

use std::path::Path;

use serde::Deserialize;

use crate::canon::CanonVersion;
use crate::hashcore::{KdfParams, Profile};
use crate::{Error, Result};

pub const PROFILE_ENV: &str = "HASHMARK_PROFILE";
pub const DEFAULT_CONFIG_FILE: &str = "hashmark.toml";

#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub profile: Option<String>,
    pub memory_kib: Option<u32>,
    pub iterations: Option<u32>,
    pub parallelism: Option<u32>,
    pub canon: Option<String>,
    pub workers: Option<usize>,
    pub memory_budget_kib: Option<u64>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParams(format!("config file: {e}")))
    }

    pub fn load(path: &Path) -> std::io::Result<Option<Self>> {
        match std::fs::read_to_string(path) {
            Ok(text) => Self::parse(&text)
                .map(Some)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Values given on the command line; `None` means "not given".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Overrides {
    pub profile: Option<String>,
    pub memory_kib: Option<u32>,
    pub iterations: Option<u32>,
    pub parallelism: Option<u32>,
    pub canon: Option<String>,
    pub workers: Option<usize>,
    pub memory_budget_kib: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileSource {
    Flag,
    Env,
    File,
    Default,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    pub profile_name: String,
    pub profile_source: ProfileSource,
    pub params: KdfParams,
    pub canon: CanonVersion,
    pub workers: usize,
    pub memory_budget_kib: Option<u64>,
}

pub fn resolve(flags: &Overrides, env_profile: Option<&str>, file: Option<&ConfigFile>) -> Result<Config> {
    let empty = ConfigFile::default();
    let file = file.unwrap_or(&empty);
    let (name, source) = if let Some(p) = &flags.profile {
        (p.clone(), ProfileSource::Flag)
    } else if let Some(p) = env_profile.filter(|p| !p.is_empty()) {
        (p.to_owned(), ProfileSource::Env)
    } else if let Some(p) = &file.profile {
        (p.clone(), ProfileSource::File)
    } else {
        ("secure".to_owned(), ProfileSource::Default)
    };
    let mut params = name.parse::<Profile>()?.params();
    if matches!(source, ProfileSource::File | ProfileSource::Default) {
        apply(&mut params, file.memory_kib, file.iterations, file.parallelism);
    }
    apply(&mut params, flags.memory_kib, flags.iterations, flags.parallelism);
    params.validate()?;

    let canon = match flags.canon.as_ref().or(file.canon.as_ref()) {
        Some(tag) => tag.parse()?,
        None => CanonVersion::CURRENT,
    };
    Ok(Config {
        profile_name: name,
        profile_source: source,
        params,
        canon,
        workers: flags.workers.or(file.workers).unwrap_or(1).max(1),
        memory_budget_kib: flags.memory_budget_kib.or(file.memory_budget_kib),
    })
}

fn apply(params: &mut KdfParams, memory_kib: Option<u32>, iterations: Option<u32>, parallelism: Option<u32>) {
    if let Some(m) = memory_kib {
        params.memory_kib = m;
    }
    if let Some(t) = iterations {
        params.iterations = t;
    }
    if let Some(p) = parallelism {
        params.parallelism = p;
    }
}
