//! On-disk model directory.
//!
//! ```text
//! <dir>/manifest.json       fit configuration, epoch count, smoothing trace
//! <dir>/topic_vectors.bose  k × dim
//! <dir>/topic_doc.bose      |D| × k
//! <dir>/assignments.jsonl   {"doc_id": str, "topics": [int, ...]} per document
//! ```

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::em::{FitConfig, ModelState};
use crate::embedding::F32Matrix;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const TOPIC_VECTORS_FILE: &str = "topic_vectors.bose";
pub const TOPIC_DOC_FILE: &str = "topic_doc.bose";
pub const ASSIGNMENTS_FILE: &str = "assignments.jsonl";

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub format_version: u32,
    pub config: FitConfig,
    pub epochs_run: usize,
    /// Smoothing constant of the last M-step.
    pub final_c: f64,
    /// Smoothing constant of every epoch's M-step.
    pub c_trace: Vec<f64>,
    pub n_docs: usize,
    pub n_groups: usize,
    pub dim: usize,
    /// Corpus the model was fitted on, as given to `fit`.
    #[serde(default)]
    pub corpus: Option<PathBuf>,
    #[serde(default)]
    pub embeddings: Option<PathBuf>,
}

/// One line of an assignments file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssignmentRecord {
    pub doc_id: String,
    pub topics: Vec<usize>,
}

pub fn parse_assignments<R: BufRead>(reader: R) -> Result<Vec<AssignmentRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let parse_err = |message: String| Error::Parse { line: i + 1, message };
        let line = line.map_err(|e| parse_err(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?);
    }
    Ok(out)
}

pub fn read_assignments(path: impl AsRef<Path>) -> Result<Vec<AssignmentRecord>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_assignments(BufReader::new(file))
}

pub fn write_assignments<'a, I>(path: impl AsRef<Path>, records: I) -> Result<()>
where
    I: IntoIterator<Item = (&'a str, &'a [usize])>,
{
    #[derive(Serialize)]
    struct Line<'a> {
        doc_id: &'a str,
        topics: &'a [usize],
    }
    let path = path.as_ref();
    let io_err = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    for (doc_id, topics) in records {
        serde_json::to_writer(&mut w, &Line { doc_id, topics }).map_err(|e| Error::Format(e.to_string()))?;
        w.write_all(b"\n").map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// A model directory loaded back into memory. `topic_doc` holds the
/// stored 32-bit values widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SavedModel {
    pub manifest: Manifest,
    pub doc_ids: Vec<String>,
    pub state: ModelState,
}

impl SavedModel {
    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.doc_ids.iter().position(|d| d == doc_id)
    }
}

fn topic_doc_matrix(state: &ModelState) -> Result<F32Matrix> {
    let k = state.k();
    let data = state.topic_doc.iter().flatten().map(|&p| p as f32).collect();
    F32Matrix::new(data, k)
}

/// Writes the model into `dir`, which must not exist yet. Files are written
/// to a sibling staging directory that is renamed into place only after
/// every file succeeded, so a failure leaves nothing at `dir`.
pub fn save_model(dir: impl AsRef<Path>, manifest: &Manifest, doc_ids: &[String], state: &ModelState) -> Result<()> {
    let dir = dir.as_ref();
    if dir.exists() {
        return Err(Error::Validation(format!("{} already exists", dir.display())));
    }
    if doc_ids.len() != state.assignments.len() || doc_ids.len() != state.topic_doc.len() {
        return Err(Error::Validation(format!(
            "{} doc ids for {} assignment rows and {} topic-doc rows",
            doc_ids.len(),
            state.assignments.len(),
            state.topic_doc.len()
        )));
    }
    let name = dir.file_name().ok_or_else(|| Error::Validation(format!("{} has no file name", dir.display())))?;
    let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
    }
    fs::create_dir(&staging).map_err(|e| Error::io(&staging, e))?;

    let result =
        write_files(&staging, manifest, doc_ids, state).and_then(|()| fs::rename(&staging, dir).map_err(|e| Error::io(dir, e)));
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
    }
    result
}

fn write_files(dir: &Path, manifest: &Manifest, doc_ids: &[String], state: &ModelState) -> Result<()> {
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut json = serde_json::to_string_pretty(manifest).map_err(|e| Error::Format(e.to_string()))?;
    json.push('\n');
    fs::write(&manifest_path, json).map_err(|e| Error::io(&manifest_path, e))?;
    state.topic_vectors.write(dir.join(TOPIC_VECTORS_FILE))?;
    topic_doc_matrix(state)?.write(dir.join(TOPIC_DOC_FILE))?;
    write_assignments(
        dir.join(ASSIGNMENTS_FILE),
        doc_ids.iter().map(String::as_str).zip(state.assignments.iter().map(Vec::as_slice)),
    )
}

pub fn load_model(dir: impl AsRef<Path>) -> Result<SavedModel> {
    let dir = dir.as_ref();
    let manifest_path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?;
    let manifest: Manifest = serde_json::from_str(&text)
        .map_err(|e| Error::Parse { line: e.line(), message: format!("{}: {e}", manifest_path.display()) })?;
    if manifest.format_version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!("unsupported model format version {}", manifest.format_version)));
    }

    let topic_vectors = F32Matrix::read(dir.join(TOPIC_VECTORS_FILE))?;
    let topic_doc = F32Matrix::read(dir.join(TOPIC_DOC_FILE))?;
    let records = read_assignments(dir.join(ASSIGNMENTS_FILE))?;
    let k = manifest.config.k;

    let mismatch = |what: String| Err(Error::Validation(format!("{}: {what}", dir.display())));
    if topic_vectors.n_rows() != k || topic_vectors.dim() != manifest.dim {
        return mismatch(format!(
            "topic vectors are {}×{}, expected {k}×{}",
            topic_vectors.n_rows(),
            topic_vectors.dim(),
            manifest.dim
        ));
    }
    if topic_doc.dim() != k || topic_doc.n_rows() != manifest.n_docs || records.len() != manifest.n_docs {
        return mismatch(format!(
            "{} topic-doc rows of width {} and {} assignment lines, expected {} × {k}",
            topic_doc.n_rows(),
            topic_doc.dim(),
            records.len(),
            manifest.n_docs
        ));
    }
    if let Some(r) = records.iter().find(|r| r.topics.iter().any(|&t| t >= k)) {
        return mismatch(format!("document {:?} has a topic id ≥ {k}", r.doc_id));
    }
    let groups: usize = records.iter().map(|r| r.topics.len()).sum();
    if groups != manifest.n_groups {
        return mismatch(format!("{groups} assigned groups, expected {}", manifest.n_groups));
    }

    let (doc_ids, assignments) = records.into_iter().map(|r| (r.doc_id, r.topics)).unzip();
    let state = ModelState {
        topic_vectors,
        topic_doc: topic_doc.rows().map(|r| r.iter().map(|&p| f64::from(p)).collect()).collect(),
        assignments,
        c_current: manifest.final_c,
    };
    Ok(SavedModel { manifest, doc_ids, state })
}
