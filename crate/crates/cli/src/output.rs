//! Atomic output files and the run manifest written next to them.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use gbs::Result;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

/// Everything one subcommand produces; nothing touches disk until
/// [`Run::finish`].
pub struct Run {
    subcommand: String,
    flags: Value,
    inputs: Vec<(PathBuf, String)>,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    manifest_path: PathBuf,
    started: Instant,
}

impl Run {
    pub fn new(subcommand: &str, flags: &impl Serialize, primary_out: &Path) -> Self {
        let mut manifest = primary_out.as_os_str().to_owned();
        manifest.push(".manifest.json");
        Run {
            subcommand: subcommand.into(),
            flags: serde_json::to_value(flags).expect("flags serialize"),
            inputs: Vec::new(),
            outputs: Vec::new(),
            manifest_path: manifest.into(),
            started: Instant::now(),
        }
    }

    /// Reads an input file and records its hash.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path)
            .map_err(|e| std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))?;
        self.inputs.push((path.to_path_buf(), hex::encode(Sha256::digest(&bytes))));
        String::from_utf8(bytes).map_err(|_| gbs::GbsError::Parse(format!("{} is not UTF-8", path.display())))
    }

    pub fn output(&mut self, path: &Path, contents: impl Into<Vec<u8>>) {
        self.outputs.push((path.to_path_buf(), contents.into()));
    }

    pub fn finish(self, threads: Option<usize>) -> Result<()> {
        for (path, bytes) in &self.outputs {
            write_atomic(path, bytes)?;
        }
        let manifest = json!({
            "format_version": gbs::io::FORMAT_VERSION,
            "tool": "gbs",
            "version": env!("CARGO_PKG_VERSION"),
            "subcommand": self.subcommand,
            "flags": self.flags,
            "threads": threads,
            "inputs": self.inputs.iter().map(|(p, h)| json!({"path": p, "sha256": h})).collect::<Vec<_>>(),
            "outputs": self.outputs.iter().map(|(p, b)| json!({"path": p, "sha256": hex::encode(Sha256::digest(b))})).collect::<Vec<_>>(),
            "wall_clock_seconds": self.started.elapsed().as_secs_f64(),
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
        write_atomic(&self.manifest_path, text.as_bytes())
    }
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
