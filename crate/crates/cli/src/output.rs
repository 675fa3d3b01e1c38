//! Result files and provenance.

use anyhow::Context;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(root)
            .map_err(|e| crate::config::invalid(format!("cannot create {}: {e}", root.display())))?;
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Buffered writer for `name`; the caller flushes via [`Self::write_with`].
    pub fn write_with(
        &self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
    ) -> anyhow::Result<()> {
        let path = self.path(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut out = BufWriter::new(file);
        body(&mut out).and_then(|_| out.flush()).with_context(|| format!("writing {}", path.display()))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
        let text = serde_json::to_string_pretty(value)?;
        self.write_with(name, |out| writeln!(out, "{text}"))
    }
}

/// Provenance record; the only output allowed to vary between identical runs.
#[derive(Serialize)]
pub struct Provenance<'a, C: Serialize> {
    pub command: &'a str,
    pub config_path: String,
    pub config_sha256: String,
    pub version: &'static str,
    pub output_dir: String,
    /// Results do not depend on wall time, thread count or any seed.
    pub deterministic: bool,
    pub workers: usize,
    pub wall_time_s: f64,
    pub exit_code: i32,
    pub config: &'a C,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}
