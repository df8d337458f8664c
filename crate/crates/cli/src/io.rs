use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use simt_core::corpus::{attach_alignments, parse_parallel, SentencePair, Vocab};
use simt_core::Program;

/// Reads inputs and remembers a SHA-256 digest of every byte consumed.
#[derive(Debug, Default)]
pub struct Inputs {
    digests: BTreeMap<String, String>,
}

impl Inputs {
    /// Reads `path`, or standard input when the path is `-`.
    pub fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = if path == Path::new("-") {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf).context("reading standard input")?;
            buf
        } else {
            fs::read(path).with_context(|| format!("reading {}", path.display()))?
        };
        self.digests
            .insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        String::from_utf8(bytes).with_context(|| format!("{} is not UTF-8", path.display()))
    }

    pub fn digests(self) -> BTreeMap<String, String> {
        self.digests
    }

    pub fn corpus(&mut self, src: &Path, tgt: &Path) -> Result<(Vec<SentencePair>, Vocab, Vocab)> {
        let (s, t) = (self.read(src)?, self.read(tgt)?);
        let (mut sv, mut tv) = (Vocab::new(), Vocab::new());
        let pairs = parse_parallel(&s, &t, &mut sv, &mut tv)?;
        Ok((pairs, sv, tv))
    }

    pub fn aligned_corpus(&mut self, src: &Path, tgt: &Path, align: &Path) -> Result<(Vec<SentencePair>, Vocab, Vocab)> {
        let (mut pairs, sv, tv) = self.corpus(src, tgt)?;
        attach_alignments(&mut pairs, &self.read(align)?).context("attaching alignments")?;
        Ok((pairs, sv, tv))
    }

    pub fn programs(&mut self, path: &Path) -> Result<Vec<Program>> {
        self.read(path)?
            .lines()
            .enumerate()
            .map(|(k, l)| l.parse().with_context(|| format!("{} line {}", path.display(), k + 1)))
            .collect()
    }
}

pub fn tokens(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

pub fn expect_lines(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        bail!("{what} has {got} lines, expected {expected}");
    }
    Ok(())
}

/// Writes to `path`, or standard output when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

/// Writes to `path`, or standard error when absent.
pub fn emit_side(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            eprint!("{text}");
            Ok(())
        }
    }
}

pub fn lines<I: IntoIterator<Item = String>>(rows: I) -> String {
    rows.into_iter().map(|r| r + "\n").collect()
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: String,
    pub config: serde_json::Value,
    pub inputs: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub status: &'static str,
}

pub fn manifest_path(explicit: Option<&Path>, primary: Option<&Path>) -> Option<PathBuf> {
    explicit.map(Path::to_path_buf).or_else(|| {
        primary.map(|p| {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_sits_next_to_the_output() {
        assert_eq!(
            manifest_path(None, Some(Path::new("out/progs.txt"))),
            Some(PathBuf::from("out/progs.txt.manifest.json"))
        );
        assert_eq!(manifest_path(Some(Path::new("m.json")), Some(Path::new("x"))), Some(PathBuf::from("m.json")));
        assert_eq!(manifest_path(None, None), None);
    }

    #[test]
    fn digests_are_recorded_per_path() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("a.txt");
        fs::write(&f, "abc").unwrap();
        let mut inputs = Inputs::default();
        assert_eq!(inputs.read(&f).unwrap(), "abc");
        let d = inputs.digests();
        assert_eq!(
            d[&f.display().to_string()],
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
