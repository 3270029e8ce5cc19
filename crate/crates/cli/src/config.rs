use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

/// Optional `jspkdm.toml`. Relative paths are taken relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub out: Option<PathBuf>,
    pub context_path: Option<String>,
    #[serde(default)]
    pub source_roots: Vec<PathBuf>,
    #[serde(default)]
    pub include: Vec<String>,
    #[serde(default)]
    pub exclude: Vec<String>,
    pub formats: Option<Vec<String>>,
    pub encoding: Option<String>,
    pub package: Option<String>,
    pub servlet_src_out: Option<PathBuf>,
    pub strict: Option<bool>,
    #[serde(default)]
    pub tag_handlers: BTreeMap<String, String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read config `{}`: {e}", path.display()))?;
        let mut config: FileConfig =
            toml::from_str(&text).map_err(|e| format!("invalid config `{}`: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        config.source_roots.iter_mut().for_each(rebase);
        config.out.as_mut().map(rebase);
        config.servlet_src_out.as_mut().map(rebase);
        Ok(config)
    }
}
