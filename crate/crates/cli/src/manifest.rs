//! Run record written next to every subcommand's outputs.
//!
//! One `key=value` per line: the subcommand, each input file (name and
//! SHA-256), the effective flags, then the SHA-256 of every output file in
//! path order. Output directory and thread count are left out so reruns into
//! another directory produce the same record.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};
use tendency_core::Error;

pub const FILE_NAME: &str = "manifest.txt";

pub struct Manifest {
    lines: Vec<String>,
    inputs: usize,
}

pub fn sha256_file(path: &Path) -> Result<String, Error> {
    let bytes = fs::read(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

impl Manifest {
    pub fn new(subcommand: &str) -> Self {
        Manifest {
            lines: vec![
                format!("tool=tendency {}", env!("CARGO_PKG_VERSION")),
                format!("subcommand={subcommand}"),
            ],
            inputs: 0,
        }
    }

    pub fn input(&mut self, path: &Path) -> Result<(), Error> {
        let name = path.file_name().map_or_else(
            || path.display().to_string(),
            |n| n.to_string_lossy().into_owned(),
        );
        let hash = sha256_file(path)?;
        self.lines.push(format!("input.{}={name} sha256={hash}", self.inputs));
        self.inputs += 1;
        Ok(())
    }

    pub fn flag(&mut self, name: &str, value: impl std::fmt::Display) {
        self.lines.push(format!("flag.{name}={value}"));
    }

    pub fn flag_opt<T: std::fmt::Display>(&mut self, name: &str, value: Option<T>) {
        match value {
            Some(v) => self.flag(name, v),
            None => self.flag(name, "default"),
        }
    }

    /// Hashes everything under `out` (except an older manifest) and writes the record.
    pub fn finish(self, out: &Path) -> Result<(), Error> {
        let mut files = Vec::new();
        collect(out, out, &mut files)?;
        files.sort();
        let mut text = String::new();
        for l in &self.lines {
            let _ = writeln!(text, "{l}");
        }
        for rel in files {
            let shown = rel.to_string_lossy().replace('\\', "/");
            if shown == FILE_NAME {
                continue;
            }
            let _ = writeln!(text, "output.{shown}={}", sha256_file(&out.join(&rel))?);
        }
        let path = out.join(FILE_NAME);
        fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
    }
}

fn collect(root: &Path, dir: &Path, files: &mut Vec<PathBuf>) -> Result<(), Error> {
    let io = |e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    };
    for entry in fs::read_dir(dir).map_err(io)? {
        let path = entry.map_err(io)?.path();
        if path.is_dir() {
            collect(root, &path, files)?;
        } else if let Ok(rel) = path.strip_prefix(root) {
            files.push(rel.to_path_buf());
        }
    }
    Ok(())
}
