use crate::Result;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

/// Record of one CLI invocation, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: BTreeMap<String, serde_json::Value>,
    pub tool_version: String,
    pub seed: Option<u64>,
    pub outputs: Vec<String>,
    /// Full argument vector, program name first; `replay` re-parses it.
    pub argv: Vec<String>,
}

impl RunManifest {
    pub fn new<A: Serialize>(
        command: &str,
        args: &A,
        argv: &[String],
        seed: Option<u64>,
        outputs: &[&Path],
    ) -> Result<Self> {
        let parameters = match serde_json::to_value(args)? {
            serde_json::Value::Object(map) => map.into_iter().collect(),
            other => BTreeMap::from([("value".to_owned(), other)]),
        };
        Ok(RunManifest {
            command: command.to_owned(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            seed,
            outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
            argv: argv.to_vec(),
        })
    }

    /// `<out>.manifest.json`
    pub fn path_for(out: &Path) -> PathBuf {
        let mut name = out.file_name().unwrap_or_default().to_os_string();
        name.push(".manifest.json");
        out.with_file_name(name)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
