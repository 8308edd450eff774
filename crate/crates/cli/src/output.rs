//! Fingerprints, number formatting and file writers shared by the commands.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use superarray_core::evaluation::SweepRow;

use crate::error::{CliError, Result};

/// WNG values below this are written as the floor and flagged.
pub const WNG_FLOOR_DB: f64 = -100.0;

pub const SWEEP_HEADER: &str = "axis_value,df_db,wng_db,approx_error,flag";

/// SHA-256 over the canonical JSON of every input that shapes an output.
pub fn fingerprint<T: Serialize>(inputs: &T) -> String {
    let bytes = serde_json::to_vec(inputs).expect("inputs serialize");
    hex::encode(Sha256::digest(bytes))
}

/// Nine significant digits; positional notation for moderate magnitudes.
pub fn sig9(v: f64) -> String {
    if !v.is_finite() {
        return v.to_string();
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..10).contains(&exp) {
        format!("{:.*}", (8 - exp) as usize, v)
    } else {
        sci
    }
}

pub fn sweep_csv(fingerprint: &str, meta: &[(String, String)], rows: &[SweepRow]) -> String {
    let mut out = format!("# fingerprint={fingerprint}\n");
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let (wng, flag) = if r.wng_db < WNG_FLOOR_DB {
            (WNG_FLOOR_DB, "wng_floored")
        } else {
            (r.wng_db, "")
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{flag}",
            sig9(r.axis_value),
            sig9(r.df_db),
            sig9(wng),
            sig9(r.approx_error)
        );
    }
    out
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    std::fs::write(path, contents).map_err(CliError::io(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value).expect("output serializes");
    s.push('\n');
    write(path, &s)
}

/// Appends a timestamped line to `run.log` next to the outputs.
pub fn log_run(dir: &Path, command: &str, fingerprint: &str) {
    let path: PathBuf = dir.join("run.log");
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let line = format!("{secs} {command} fingerprint={fingerprint}\n");
    let appended = std::fs::create_dir_all(dir).and_then(|_| {
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)?
            .write_all(line.as_bytes())
    });
    if let Err(e) = appended {
        log::warn!("could not append to {}: {e}", path.display());
    }
}
