//! `lectern.toml` and how it combines with the environment and flags.

use std::fs;
use std::path::{Path, PathBuf};

use lectern::book_index::{parse_index, parse_nav_tree, BookIndex, NavTree};
use lectern::llm::GatewayConfig;
use lectern::query::{Library, QueryOptions};
use lectern::retrieval::{DEFAULT_CONTEXT_K, DEFAULT_THRESHOLD};
use lectern::terms::PhraseLexicon;
use serde::Deserialize;

use crate::exit::CliError;

/// Read from the working directory when `--config` is not given.
pub const DEFAULT_CONFIG_FILE: &str = "lectern.toml";
pub const DEFAULT_QUERY_LOG: &str = "queries.log.jsonl";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub index_path: Option<PathBuf>,
    pub nav_tree_path: Option<PathBuf>,
    pub transcript_dir: Option<PathBuf>,
    pub analysis_dir: Option<PathBuf>,
    pub lexicon_path: Option<PathBuf>,
    pub stopword_path: Option<PathBuf>,
    pub query_log: PathBuf,
    pub threshold: f64,
    pub context_k: usize,
    pub gateway: GatewayConfig,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            index_path: None,
            nav_tree_path: None,
            transcript_dir: None,
            analysis_dir: None,
            lexicon_path: None,
            stopword_path: None,
            query_log: PathBuf::from(DEFAULT_QUERY_LOG),
            threshold: DEFAULT_THRESHOLD,
            context_k: DEFAULT_CONTEXT_K,
            gateway: GatewayConfig::default(),
        }
    }
}

impl AppConfig {
    pub fn from_toml(body: &str) -> Result<Self, String> {
        toml::from_str(body).map_err(|e| e.to_string())
    }

    /// File settings, then `LECTERN_LLM_URL` / `LECTERN_LLM_MODEL`, then
    /// `--llm-url` / `--model`. An explicit `--config` must exist.
    pub fn load(path: Option<&Path>, llm_url: Option<String>, model: Option<String>) -> Result<Self, CliError> {
        let (path, required) = match path {
            Some(p) => (p.to_path_buf(), true),
            None => (PathBuf::from(DEFAULT_CONFIG_FILE), false),
        };
        let mut cfg = match fs::read_to_string(&path) {
            Ok(body) => Self::from_toml(&body).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?,
            Err(e) if required || e.kind() != std::io::ErrorKind::NotFound => {
                return Err(CliError::usage(format!("{}: {e}", path.display())));
            }
            Err(_) => AppConfig::default(),
        };
        cfg.gateway.apply_env();
        cfg.gateway.apply_overrides(llm_url, model);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.threshold.is_nan() || self.threshold < 0.0 {
            return Err(CliError::usage(format!(
                "threshold must be >= 0, got {}",
                self.threshold
            )));
        }
        if self.context_k == 0 {
            return Err(CliError::usage("context_k must be at least 1"));
        }
        Ok(())
    }

    pub fn query_options(&self) -> QueryOptions {
        QueryOptions {
            threshold: self.threshold,
            context_k: self.context_k,
        }
    }

    pub fn index(&self) -> Result<BookIndex, CliError> {
        let path = required(&self.index_path, "index_path", "--index")?;
        parse_index(path).map_err(CliError::usage)
    }

    pub fn nav(&self) -> Result<NavTree, CliError> {
        let path = required(&self.nav_tree_path, "nav_tree_path", "--nav")?;
        parse_nav_tree(path).map_err(CliError::usage)
    }

    pub fn lexicon(&self) -> Result<PhraseLexicon, CliError> {
        match (&self.lexicon_path, &self.stopword_path) {
            (None, None) => Ok(PhraseLexicon::builtin()),
            (Some(l), Some(s)) => PhraseLexicon::load(l, s).map_err(CliError::usage),
            _ => Err(CliError::usage("set both lexicon_path and stopword_path, or neither")),
        }
    }

    pub fn library(&self) -> Result<Library, CliError> {
        Ok(Library {
            index: self.index()?,
            nav: self.nav()?,
            lexicon: self.lexicon()?,
        })
    }
}

/// A configured path, or a usage error naming the key and the flag.
pub fn required<'a>(value: &'a Option<PathBuf>, key: &str, flag: &str) -> Result<&'a Path, CliError> {
    value.as_deref().ok_or_else(|| {
        CliError::usage(format!(
            "no {key} configured; pass {flag} or set it in {DEFAULT_CONFIG_FILE}"
        ))
    })
}
