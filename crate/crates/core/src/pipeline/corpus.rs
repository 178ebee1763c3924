//! Corpus directories: `corpus.json` plus one sub-directory per change
//! holding `old.minij`, `new.minij` and `meta.json`.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::change_graph::{change_graph_from_sources, ChangeGraph, ChangeId};
use crate::error::{Error, Result};
use crate::fgpdg::GraphOptions;
use crate::lang::{parse_method, Signatures};
use crate::FORMAT_VERSION;

pub const MANIFEST: &str = "corpus.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeExample {
    pub change_id: ChangeId,
    /// Directory name inside the corpus.
    pub name: String,
    pub old_source: String,
    pub new_source: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    format_version: u32,
    #[serde(default)]
    description: String,
    #[serde(default)]
    signatures: Signatures,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct Meta {
    method_id: String,
    time: u64,
}

/// A change directory that could not be used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Skipped {
    pub name: String,
    pub reason: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub description: String,
    pub signatures: Signatures,
    /// Sorted by `(time, methodId)`, then directory name.
    pub examples: Vec<ChangeExample>,
    pub skipped: Vec<Skipped>,
}

fn format_error(path: &Path, message: impl Into<String>) -> Error {
    Error::CorpusFormat {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn load_example(dir: &Path, name: &str) -> std::result::Result<ChangeExample, String> {
    let meta_text = fs::read_to_string(dir.join("meta.json")).map_err(|e| format!("meta.json: {e}"))?;
    let meta: Meta = serde_json::from_str(&meta_text).map_err(|e| format!("meta.json: {e}"))?;
    let old_source = fs::read_to_string(dir.join("old.minij")).map_err(|e| format!("old.minij: {e}"))?;
    let new_source = fs::read_to_string(dir.join("new.minij")).map_err(|e| format!("new.minij: {e}"))?;
    let old = parse_method(&old_source).map_err(|e| format!("old.minij: {e}"))?;
    let new = parse_method(&new_source).map_err(|e| format!("new.minij: {e}"))?;
    if old.method_name() != new.method_name() {
        return Err(format!(
            "method renamed from `{}` to `{}`",
            old.method_name(),
            new.method_name()
        ));
    }
    Ok(ChangeExample {
        change_id: ChangeId::new(meta.method_id, meta.time),
        name: name.to_string(),
        old_source,
        new_source,
    })
}

/// Reads a corpus directory. An empty directory is an empty corpus; any
/// other directory needs a manifest.
pub fn ingest_corpus(dir: &Path) -> Result<Corpus> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut subdirs: Vec<(String, PathBuf)> = Vec::new();
    let mut any_entry = false;
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        any_entry = true;
        if entry.path().is_dir() {
            subdirs.push((entry.file_name().to_string_lossy().into_owned(), entry.path()));
        }
    }
    let manifest_path = dir.join(MANIFEST);
    if !manifest_path.exists() {
        if !any_entry {
            return Ok(Corpus::default());
        }
        return Err(format_error(&manifest_path, "missing corpus manifest"));
    }
    let manifest: Manifest = serde_json::from_str(&read(&manifest_path)?)
        .map_err(|e| format_error(&manifest_path, e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(format_error(
            &manifest_path,
            format!("unsupported format_version {}", manifest.format_version),
        ));
    }
    subdirs.sort();
    let mut corpus = Corpus {
        description: manifest.description,
        signatures: manifest.signatures,
        ..Corpus::default()
    };
    for (name, path) in subdirs {
        match load_example(&path, &name) {
            Ok(ex) => corpus.examples.push(ex),
            Err(reason) => corpus.skipped.push(Skipped { name, reason }),
        }
    }
    corpus
        .examples
        .sort_by(|a, b| (&a.change_id, &a.name).cmp(&(&b.change_id, &b.name)));
    Ok(corpus)
}

/// Change graphs for a list of examples, in the same order.
pub fn build_change_graphs(
    examples: &[ChangeExample],
    signatures: &Signatures,
    opts: &GraphOptions,
) -> Result<Vec<ChangeGraph>> {
    examples
        .par_iter()
        .map(|ex| {
            change_graph_from_sources(
                ex.change_id.clone(),
                &ex.old_source,
                &ex.new_source,
                signatures,
                opts,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write_change(root: &Path, name: &str, method: &str, time: u64, old: &str, new: &str) {
        let d = root.join(name);
        fs::create_dir_all(&d).unwrap();
        fs::write(d.join("old.minij"), old).unwrap();
        fs::write(d.join("new.minij"), new).unwrap();
        fs::write(
            d.join("meta.json"),
            format!(r#"{{"methodId": "{method}", "time": {time}}}"#),
        )
        .unwrap();
    }

    #[test]
    fn empty_directory_is_empty_corpus() {
        let tmp = tempfile::tempdir().unwrap();
        assert!(ingest_corpus(tmp.path()).unwrap().examples.is_empty());
    }

    #[test]
    fn missing_manifest_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        write_change(tmp.path(), "a", "A#m", 1, "void m() { }", "void m() { f(); }");
        assert!(matches!(ingest_corpus(tmp.path()), Err(Error::CorpusFormat { .. })));
    }

    #[test]
    fn examples_sorted_by_time_and_bad_entries_skipped() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join(MANIFEST), r#"{"format_version": 1}"#).unwrap();
        write_change(tmp.path(), "late", "A#m", 20, "void m() { }", "void m() { f(); }");
        write_change(tmp.path(), "early", "B#m", 10, "void m() { }", "void m() { g(); }");
        write_change(tmp.path(), "broken", "C#m", 5, "void m( { }", "void m() { }");
        write_change(tmp.path(), "renamed", "D#m", 5, "void m() { }", "void n() { }");
        let c = ingest_corpus(tmp.path()).unwrap();
        let names: Vec<&str> = c.examples.iter().map(|e| e.name.as_str()).collect();
        assert_eq!(names, ["early", "late"]);
        assert_eq!(c.examples[0].change_id.time, 10);
        let skipped: Vec<&str> = c.skipped.iter().map(|s| s.name.as_str()).collect();
        assert_eq!(skipped, ["broken", "renamed"]);
    }
}
