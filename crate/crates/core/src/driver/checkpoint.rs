//! Append-only checkpoint log and its lock file.
//!
//! ```text
//! # threecubes checkpoint v1
//! fingerprint <sha256 hex>
//! done direct <solutions>
//! done tile <sub-range> <flagstone> <solutions>
//! ```
//!
//! A trailing line without a newline is an interrupted append and is dropped.

use std::collections::BTreeSet;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use super::{DriverError, WorkUnit};

const HEADER: &str = "# threecubes checkpoint v1";

pub struct Checkpoint {
    path: PathBuf,
    file: File,
    completed: BTreeSet<WorkUnit>,
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn parts_dir(path: &Path) -> PathBuf {
    sibling(path, ".parts")
}

fn parse_done(line: &str) -> Option<WorkUnit> {
    let f: Vec<&str> = line.split_whitespace().collect();
    match f.as_slice() {
        ["done", "direct", _] => Some(WorkUnit::Direct),
        ["done", "tile", r, t, _] => Some(WorkUnit::Tile {
            range: r.parse().ok()?,
            flagstone: t.parse().ok()?,
        }),
        _ => None,
    }
}

impl Checkpoint {
    /// Opens or creates the log. An existing log must carry `fingerprint`.
    pub fn open(path: &Path, fingerprint: &str) -> Result<Self, DriverError> {
        let mut completed = BTreeSet::new();
        if path.exists() {
            let text = fs::read_to_string(path)?;
            let complete_len = text.rfind('\n').map_or(0, |i| i + 1);
            let mut lines = text[..complete_len].lines();
            if lines.next() != Some(HEADER) {
                return Err(DriverError::Checkpoint(format!("{} is not a checkpoint", path.display())));
            }
            let stored = lines
                .next()
                .and_then(|l| l.strip_prefix("fingerprint "))
                .ok_or_else(|| DriverError::Checkpoint("missing fingerprint".into()))?;
            if stored != fingerprint {
                return Err(DriverError::FingerprintMismatch {
                    stored: stored.to_string(),
                    current: fingerprint.to_string(),
                });
            }
            for (n, line) in lines.enumerate() {
                let unit = parse_done(line)
                    .ok_or_else(|| DriverError::Checkpoint(format!("unreadable entry {}: {line}", n + 3)))?;
                completed.insert(unit);
            }
            if complete_len < text.len() {
                let f = OpenOptions::new().write(true).open(path)?;
                f.set_len(complete_len as u64)?;
            }
            let file = OpenOptions::new().append(true).open(path)?;
            Ok(Checkpoint {
                path: path.to_path_buf(),
                file,
                completed,
            })
        } else {
            let mut file = OpenOptions::new().create_new(true).append(true).open(path)?;
            writeln!(file, "{HEADER}")?;
            writeln!(file, "fingerprint {fingerprint}")?;
            file.sync_data()?;
            Ok(Checkpoint {
                path: path.to_path_buf(),
                file,
                completed,
            })
        }
    }

    pub fn completed(&self) -> &BTreeSet<WorkUnit> {
        &self.completed
    }

    pub fn parts_dir(&self) -> PathBuf {
        parts_dir(&self.path)
    }

    pub fn record(&mut self, unit: WorkUnit, solutions: usize) -> io::Result<()> {
        if self.completed.contains(&unit) {
            return Ok(());
        }
        let line = match unit {
            WorkUnit::Direct => format!("done direct {solutions}\n"),
            WorkUnit::Tile { range, flagstone } => format!("done tile {range} {flagstone} {solutions}\n"),
        };
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()?;
        self.completed.insert(unit);
        Ok(())
    }
}

/// Exclusive lock on a checkpoint, released on drop.
pub struct LockGuard {
    path: PathBuf,
}

impl LockGuard {
    pub fn acquire(checkpoint: &Path) -> Result<Self, DriverError> {
        let path = sibling(checkpoint, ".lock");
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", std::process::id())?;
                Ok(LockGuard { path })
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(DriverError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for LockGuard {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
