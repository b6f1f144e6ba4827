//! Where payloads go: `--out`, else `$KERRCAT_OUT_DIR/<default name>`, else
//! stdout. Summaries always go to stderr so that stdout stays a clean payload.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

pub const OUT_DIR_ENV: &str = "KERRCAT_OUT_DIR";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sink {
    File(PathBuf),
    Stdout,
}

impl Sink {
    pub fn resolve(out: Option<PathBuf>, default_name: &str) -> Sink {
        match out {
            Some(p) => Sink::File(p),
            None => match std::env::var_os(OUT_DIR_ENV) {
                Some(dir) if !dir.is_empty() => Sink::File(Path::new(&dir).join(default_name)),
                _ => Sink::Stdout,
            },
        }
    }

    /// Like [`Sink::resolve`] but falls back to `default_name` in the working
    /// directory instead of stdout, for commands that write several files.
    pub fn resolve_file(out: Option<PathBuf>, default_name: &str) -> PathBuf {
        match Self::resolve(out, default_name) {
            Sink::File(p) => p,
            Sink::Stdout => PathBuf::from(default_name),
        }
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            Sink::File(p) => Some(p),
            Sink::Stdout => None,
        }
    }

    pub fn write(&self, payload: &str) -> Result<()> {
        match self {
            Sink::File(p) => write_file(p, payload),
            Sink::Stdout => {
                let mut out = std::io::stdout().lock();
                out.write_all(payload.as_bytes()).context("out: cannot write to stdout")?;
                out.flush().context("out: cannot write to stdout")
            }
        }
    }
}

pub fn write_file(path: &Path, payload: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("out: cannot create {}", dir.display()))?;
    }
    std::fs::write(path, payload).with_context(|| format!("out: cannot write {}", path.display()))
}

/// `dir/name.ext` becomes `dir/name<suffix>.ext`; without an extension the
/// suffix is appended.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    path.with_file_name(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sibling_names() {
        assert_eq!(sibling(Path::new("a/grid.csv"), ".series"), PathBuf::from("a/grid.series.csv"));
        assert_eq!(sibling(Path::new("sched"), ".table"), PathBuf::from("sched.table"));
        assert_eq!(sibling(Path::new("s.json"), ".report"), PathBuf::from("s.report.json"));
    }

    #[test]
    fn explicit_out_wins() {
        let s = Sink::resolve(Some(PathBuf::from("x.json")), "state.json");
        assert_eq!(s.path(), Some(Path::new("x.json")));
    }
}
