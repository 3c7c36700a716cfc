//! Files on disk: `<id>.txt`/`<id>.ann` corpus directories, triple TSV
//! files, and generation JSONL files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::Triple;
use crate::standoff::{parse_document, serialize_document, AnnotatedDocument, StandoffError};
use crate::types::{EntityType, LabelError, Predicate};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Standoff {
        path: PathBuf,
        #[source]
        source: StandoffError,
    },
    #[error("{path}: orphan file without its .txt/.ann partner")]
    Orphan { path: PathBuf },
    #[error("{path}:{line}: {reason}")]
    Record { path: PathBuf, line: usize, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_to_string(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_string(path: &Path, content: &str) -> Result<(), IoError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    fs::write(path, content).map_err(io_err(path))
}

/// Result of scanning a corpus directory.
#[derive(Debug, Default)]
pub struct LoadedCorpus {
    /// Sorted by doc id.
    pub documents: Vec<AnnotatedDocument>,
    /// Files missing their partner (only populated when not strict).
    pub orphans: Vec<PathBuf>,
}

/// Loads every `<id>.txt`/`<id>.ann` pair in `dir` (not recursive).
/// With `strict`, an unpaired file is an error; otherwise it is reported in
/// [`LoadedCorpus::orphans`].
pub fn load_corpus_dir(dir: &Path, strict: bool) -> Result<LoadedCorpus, IoError> {
    let mut txt = BTreeSet::new();
    let mut ann = BTreeSet::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if !path.is_file() {
            continue;
        }
        let (Some(stem), Some(ext)) = (path.file_stem(), path.extension()) else {
            continue;
        };
        let stem = stem.to_string_lossy().to_string();
        match ext.to_str() {
            Some("txt") => {
                txt.insert(stem);
            }
            Some("ann") => {
                ann.insert(stem);
            }
            _ => {}
        }
    }

    let mut out = LoadedCorpus::default();
    for orphan in txt.symmetric_difference(&ann) {
        let ext = if txt.contains(orphan) { "txt" } else { "ann" };
        let path = dir.join(format!("{orphan}.{ext}"));
        if strict {
            return Err(IoError::Orphan { path });
        }
        out.orphans.push(path);
    }
    for id in txt.intersection(&ann) {
        out.documents.push(load_document(dir, id)?);
    }
    Ok(out)
}

pub fn load_document(dir: &Path, doc_id: &str) -> Result<AnnotatedDocument, IoError> {
    let text_path = dir.join(format!("{doc_id}.txt"));
    let ann_path = dir.join(format!("{doc_id}.ann"));
    let text = read_to_string(&text_path)?;
    let ann = read_to_string(&ann_path)?;
    parse_document(&text, &ann, doc_id).map_err(|source| IoError::Standoff { path: ann_path, source })
}

pub fn write_document(dir: &Path, doc: &AnnotatedDocument) -> Result<(), IoError> {
    let (text, ann) = serialize_document(doc);
    write_string(&dir.join(format!("{}.txt", doc.doc_id())), &text)?;
    write_string(&dir.join(format!("{}.ann", doc.doc_id())), &ann)
}

/// Newline-separated doc ids; blank lines and `#` comments ignored.
pub fn read_id_list(path: &Path) -> Result<Vec<String>, IoError> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// Formats one triple record:
/// `doc_id \t subject \t subject_type \t predicate \t object \t object_type`.
pub fn format_triple_record(doc_id: &str, t: &Triple) -> String {
    format!(
        "{doc_id}\t{}\t{}\t{}\t{}\t{}",
        t.subject_text, t.subject_type, t.predicate, t.object_text, t.object_type
    )
}

pub fn parse_triple_record(line: &str) -> Result<(String, Triple), String> {
    let fields: Vec<&str> = line.split('\t').collect();
    let [doc_id, s, st, p, o, ot] = fields[..] else {
        return Err(format!("expected 6 tab-separated fields, found {}", fields.len()));
    };
    let label = |e: LabelError| e.to_string();
    let st: EntityType = st.parse().map_err(label)?;
    let p: Predicate = p.parse().map_err(label)?;
    let ot: EntityType = ot.parse().map_err(label)?;
    if doc_id.is_empty() || s.trim().is_empty() || o.trim().is_empty() {
        return Err("empty doc id or entity text".to_string());
    }
    Ok((doc_id.to_string(), Triple::new(s, st, p, o, ot)))
}

/// Reads a triple file into per-document lists. Documents that appear with
/// no triples are not represented.
pub fn read_triples(path: &Path) -> Result<BTreeMap<String, Vec<Triple>>, IoError> {
    let mut out: BTreeMap<String, Vec<Triple>> = BTreeMap::new();
    for (i, line) in read_to_string(path)?.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (doc_id, triple) = parse_triple_record(line).map_err(|reason| IoError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        })?;
        out.entry(doc_id).or_default().push(triple);
    }
    Ok(out)
}

pub fn format_triples(triples: &BTreeMap<String, Vec<Triple>>) -> String {
    let mut s = String::new();
    for (doc_id, list) in triples {
        for t in list {
            s.push_str(&format_triple_record(doc_id, t));
            s.push('\n');
        }
    }
    s
}

/// One raw model output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generation {
    pub doc_id: String,
    pub generation: String,
}

pub fn read_generations(path: &Path) -> Result<Vec<Generation>, IoError> {
    let mut out = Vec::new();
    for (i, line) in read_to_string(path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let g: Generation = serde_json::from_str(line).map_err(|e| IoError::Record {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(g);
    }
    Ok(out)
}
