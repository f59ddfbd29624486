use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

/// Record of one invocation, sufficient to replay it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Arguments after the program name, as parsed.
    pub args: Vec<String>,
    pub inputs: Vec<PathBuf>,
    pub seed: Option<u64>,
    pub config: Option<String>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    pub started: String,
    pub finished: String,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let m: Self = serde_json::from_str(text).map_err(|e| format!("manifest: {e}"))?;
        if m.args.first().map(String::as_str) != Some(m.command.as_str()) {
            return Err(format!(
                "manifest: args do not start with command {:?}",
                m.command
            ));
        }
        Ok(m)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}

/// `<dir>/manifest.json` for directory outputs, `<file>.manifest.json`
/// otherwise.
pub fn manifest_path(out: &Path, is_dir: bool) -> PathBuf {
    if is_dir {
        out.join("manifest.json")
    } else {
        let mut name = out.as_os_str().to_owned();
        name.push(".manifest.json");
        PathBuf::from(name)
    }
}
