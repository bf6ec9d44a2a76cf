//! Solution files: one canonical `k x y z` line per solution, sorted by
//! (k, z, y, x). Lines starting with `#` and blank lines are comments.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::arith::{verify_solution, Solution};

pub fn format_solutions(sols: &[Solution]) -> String {
    let mut s = String::with_capacity(sols.len() * 24);
    for sol in sols {
        s.push_str(&sol.to_string());
        s.push('\n');
    }
    s
}

/// Writes through a temporary sibling and renames, so readers never see a
/// partial file.
pub fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = Path::new(&tmp);
    {
        let mut f = fs::File::create(tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(tmp, path)
}

/// A line that did not parse, in 1-based numbering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineError {
    pub line: usize,
    pub text: String,
    pub reason: String,
}

/// Parsed lines with their 1-based numbers, and the lines that failed.
pub type Parsed = (Vec<(usize, Solution)>, Vec<LineError>);

pub fn parse_solutions(text: &str) -> Parsed {
    let mut ok = Vec::new();
    let mut bad = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        match trimmed.parse::<Solution>() {
            Ok(s) => ok.push((i + 1, s)),
            Err(e) => bad.push(LineError {
                line: i + 1,
                text: line.to_string(),
                reason: e.to_string(),
            }),
        }
    }
    (ok, bad)
}

pub fn read_solutions(path: &Path) -> io::Result<Parsed> {
    Ok(parse_solutions(&fs::read_to_string(path)?))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    /// Solution lines examined.
    pub checked: usize,
    pub failures: Vec<LineError>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Re-checks every line exactly: the cube sum must equal k and k must be
/// admissible.
pub fn verify_text(text: &str) -> VerifyReport {
    let (ok, mut failures) = parse_solutions(text);
    let checked = ok.len() + failures.len();
    for (line, s) in ok {
        if !verify_solution(&s) {
            let reason = match crate::arith::cube_sum(s.x, s.y, s.z) {
                Ok(sum) if sum != s.k => format!("cube sum is {sum}, not {}", s.k),
                Ok(_) => format!("k = {} is not admissible", s.k),
                Err(e) => e.to_string(),
            };
            failures.push(LineError {
                line,
                text: s.to_string(),
                reason,
            });
        }
    }
    failures.sort_by_key(|f| f.line);
    VerifyReport { checked, failures }
}

pub fn verify_file(path: &Path) -> io::Result<VerifyReport> {
    Ok(verify_text(&fs::read_to_string(path)?))
}
