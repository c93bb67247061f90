use std::path::PathBuf;

use serde::Serialize;

use crate::CliError;

/// 12 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Runtime(e.to_string()))
}

/// Where reports go: files in the output directory, or stdout for the main
/// table when no directory was given.
pub struct Sink {
    dir: Option<PathBuf>,
}

impl Sink {
    pub fn new(dir: Option<PathBuf>) -> Result<Self, CliError> {
        if let Some(d) = &dir {
            std::fs::create_dir_all(d)?;
        }
        Ok(Self { dir })
    }

    /// Writes a file into the output directory; dropped without one.
    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        if let Some(d) = &self.dir {
            std::fs::write(d.join(name), contents)?;
        }
        Ok(())
    }

    /// Main artifact: written to a file, or printed when there is no directory.
    pub fn primary(&self, name: &str, contents: &str) -> Result<(), CliError> {
        match &self.dir {
            Some(_) => self.write(name, contents),
            None => {
                print!("{contents}");
                Ok(())
            }
        }
    }

    /// Human-readable summary: stdout when files carry the data, stderr otherwise.
    pub fn note(&self, line: &str) {
        if self.dir.is_some() {
            println!("{line}");
        } else {
            eprintln!("{line}");
        }
    }
}

/// Contiguous runs of grid points where `positive` holds, as `[first, last]`
/// phase sums.
pub fn windows(sums: &[f64], positive: &[bool]) -> Vec<[f64; 2]> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    for (k, &p) in positive.iter().enumerate() {
        match (p, start) {
            (true, None) => start = Some(k),
            (false, Some(s)) => {
                out.push([sums[s], sums[k - 1]]);
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push([sums[s], sums[positive.len() - 1]]);
    }
    out
}
