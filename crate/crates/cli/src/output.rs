//! Artifact staging: outputs are rendered in memory first and only written
//! once the whole command has succeeded.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::CliError;

pub struct Artifacts {
    header: String,
    files: Vec<(String, Vec<u8>)>,
    pub summary: Value,
}

impl Artifacts {
    /// `config` is rendered once as the `#` header line of every CSV.
    pub fn new<C: Serialize>(config: &C) -> Self {
        let header = serde_json::to_string(config).expect("config serializes");
        Artifacts {
            header: format!("# {header}\n"),
            files: Vec::new(),
            summary: json!({}),
        }
    }

    /// Adds a file whose body `render` writes after the config header.
    pub fn csv<F>(&mut self, name: &str, render: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut Vec<u8>) -> Result<(), Box<dyn std::error::Error>>,
    {
        let mut buf = self.header.clone().into_bytes();
        render(&mut buf).map_err(|e| CliError::Io {
            path: PathBuf::from(name),
            source: io::Error::other(e.to_string()),
        })?;
        self.files.push((name.to_string(), buf));
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Writes every staged file plus `manifest.json` into `dir`.
    pub fn write(self, dir: &Path, manifest: Manifest<'_>) -> Result<(), CliError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(io_err(&path))?;
        }
        let outputs: Vec<&str> = self.names();
        let timestamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        let doc = json!({
            "command": manifest.command,
            "version": env!("CARGO_PKG_VERSION"),
            "seed": manifest.seed,
            "threads": manifest.threads,
            "inputs": manifest.inputs,
            "config": serde_json::from_str::<Value>(self.header.trim_start_matches("# ")).expect("valid json"),
            "outputs": outputs,
            "summary": self.summary,
            "wall_time_seconds": manifest.started.elapsed().as_secs_f64(),
            "timestamp_unix": timestamp,
        });
        let path = dir.join("manifest.json");
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        serde_json::to_writer_pretty(&mut f, &doc)
            .map_err(io::Error::from)
            .and_then(|_| writeln!(f))
            .map_err(io_err(&path))?;
        Ok(())
    }
}

pub struct Manifest<'a> {
    pub command: &'a str,
    pub seed: u64,
    pub threads: usize,
    pub inputs: Vec<Value>,
    pub started: Instant,
}

/// Path and size of an input file.
pub fn describe_input(role: &str, path: &Path) -> Value {
    let bytes = fs::metadata(path).map(|m| m.len()).ok();
    json!({ "role": role, "path": path.display().to_string(), "bytes": bytes })
}
