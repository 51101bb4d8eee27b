use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use parking_lot::RwLock;

use walkd_core::spec_model::{parse_spec, serialize_spec, GraphicSpec, SpecError};
use walkd_core::table_store::DatasetRegistry;

pub const DEFAULT_DATA_CAP_BYTES: usize = 256 * 1024 * 1024;
pub const DEFAULT_ROW_CAP: usize = 5_000_000;

#[derive(Debug, Clone)]
pub struct Config {
    pub data_cap_bytes: usize,
    pub row_cap: usize,
    pub spec_dir: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            data_cap_bytes: DEFAULT_DATA_CAP_BYTES,
            row_cap: DEFAULT_ROW_CAP,
            spec_dir: None,
        }
    }
}

impl Config {
    /// Reads `DATA_CAP_BYTES` and `SPEC_DIR`; unset or unparsable values
    /// keep the defaults.
    pub fn from_env() -> Config {
        let mut config = Config::default();
        if let Some(cap) = std::env::var("DATA_CAP_BYTES").ok().and_then(|v| v.parse().ok()) {
            config.data_cap_bytes = cap;
        }
        if let Some(dir) = std::env::var_os("SPEC_DIR").filter(|d| !d.is_empty()) {
            config.spec_dir = Some(dir.into());
        }
        config
    }
}

/// Saved specs in canonical text form, optionally mirrored to a directory
/// as `<name>.json`.
#[derive(Debug, Default)]
pub struct SpecStore {
    specs: RwLock<BTreeMap<String, String>>,
    dir: Option<PathBuf>,
}

pub fn valid_spec_name(name: &str) -> bool {
    !name.is_empty()
        && name.len() <= 128
        && !name.starts_with('.')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

impl SpecStore {
    /// Loads every parsable `*.json` spec already in `dir`.
    pub fn open(dir: Option<&Path>) -> std::io::Result<SpecStore> {
        let mut specs = BTreeMap::new();
        if let Some(dir) = dir {
            std::fs::create_dir_all(dir)?;
            for entry in std::fs::read_dir(dir)? {
                let path = entry?.path();
                let (Some(stem), Some("json")) = (
                    path.file_stem().and_then(|s| s.to_str()),
                    path.extension().and_then(|s| s.to_str()),
                ) else {
                    continue;
                };
                if !valid_spec_name(stem) {
                    continue;
                }
                let text = std::fs::read_to_string(&path)?;
                if let Ok(spec) = parse_spec(&text) {
                    specs.insert(stem.to_string(), serialize_spec(&spec));
                }
            }
        }
        Ok(SpecStore {
            specs: RwLock::new(specs),
            dir: dir.map(Path::to_path_buf),
        })
    }

    pub fn get(&self, name: &str) -> Option<String> {
        self.specs.read().get(name).cloned()
    }

    pub fn get_spec(&self, name: &str) -> Option<GraphicSpec> {
        self.get(name).map(|text| parse_spec(&text).expect("stored specs are canonical"))
    }

    pub fn names(&self) -> Vec<String> {
        self.specs.read().keys().cloned().collect()
    }

    /// Parses, canonicalizes and stores; returns the stored text.
    pub fn put(&self, name: &str, text: &str) -> Result<String, PutError> {
        let canonical = serialize_spec(&parse_spec(text)?);
        if let Some(dir) = &self.dir {
            std::fs::write(dir.join(format!("{name}.json")), format!("{canonical}\n"))?;
        }
        self.specs.write().insert(name.to_string(), canonical.clone());
        Ok(canonical)
    }
}

#[derive(Debug)]
pub enum PutError {
    Spec(SpecError),
    Io(std::io::Error),
}

impl From<SpecError> for PutError {
    fn from(e: SpecError) -> PutError {
        PutError::Spec(e)
    }
}

impl From<std::io::Error> for PutError {
    fn from(e: std::io::Error) -> PutError {
        PutError::Io(e)
    }
}

#[derive(Debug)]
pub struct AppState {
    pub config: Config,
    pub registry: DatasetRegistry,
    pub specs: SpecStore,
}

impl AppState {
    pub fn new(config: Config) -> std::io::Result<AppState> {
        let specs = SpecStore::open(config.spec_dir.as_deref())?;
        Ok(AppState {
            config,
            registry: DatasetRegistry::new(),
            specs,
        })
    }
}
