//! File formats, a lock-free parallel trainer and the command-line stages of semdrift.
//!
//! The stages communicate only through files:
//!
//! ```text
//! synth ─┐
//!        ├─> corpus dir ─ ingest ─> data dir ─ train ─> model dir ─ analyze ─> reports
//! texts ─┘
//! ```

#![deny(unsafe_code)]

pub use semdrift_core as core;

pub mod cli;
pub mod commands;
pub mod corpus_io;
pub mod error;
pub mod manifest;
pub mod parallel;
pub mod report;
pub mod space_file;
pub mod synth_file;
pub mod tables;

pub use error::{Error, Result};

use std::io::Write;
use std::path::{Path, PathBuf};

use error::IoContext;

pub(crate) fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".tmp");
    path.with_file_name(name)
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    {
        let mut f = std::fs::File::create(&tmp).at(&tmp)?;
        f.write_all(bytes).at(&tmp)?;
        f.sync_all().at(&tmp)?;
    }
    std::fs::rename(&tmp, path).at(path)
}

/// Peak resident set size of this process in KiB, where the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}
