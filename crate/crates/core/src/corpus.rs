//! Documents as ordered sequences of sentence groups.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{split_sentences, tokenize_words};

pub type WordId = u32;

/// Bidirectional word-string / word-id map. Ids are dense and assigned in
/// order of first occurrence.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    ids: HashMap<String, WordId>,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn id(&self, word: &str) -> Option<WordId> {
        self.ids.get(word).copied()
    }

    pub fn word(&self, id: WordId) -> Option<&str> {
        self.words.get(id as usize).map(String::as_str)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn intern(&mut self, word: &str) -> WordId {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = WordId::try_from(self.words.len()).expect("vocabulary exceeds u32 ids");
        self.words.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        id
    }
}

/// A sentence is an ordered list of word ids; repeated words are kept.
pub type Sentence = Vec<WordId>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentenceGroup {
    pub sentences: Vec<Sentence>,
    /// Row of this group in the embedding matrix.
    pub global_index: usize,
}

impl SentenceGroup {
    pub fn tokens(&self) -> impl Iterator<Item = WordId> + '_ {
        self.sentences.iter().flatten().copied()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub groups: Vec<SentenceGroup>,
    pub label: Option<String>,
}

impl Document {
    pub fn tokens(&self) -> impl Iterator<Item = WordId> + '_ {
        self.groups.iter().flat_map(SentenceGroup::tokens)
    }
}

/// An immutable corpus. Construct it with [`CorpusBuilder`] or [`load_corpus`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vocabulary,
    n_groups: usize,
}

impl Corpus {
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Total number of sentence groups, i.e. the expected embedding row count.
    pub fn n_groups(&self) -> usize {
        self.n_groups
    }

    pub fn n_tokens(&self) -> usize {
        self.documents.iter().map(|d| d.tokens().count()).sum()
    }

    pub fn position(&self, doc_id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.doc_id == doc_id)
    }

    /// Parses the JSON-lines corpus format.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        let mut builder = CorpusBuilder::new();
        for (index, line) in reader.lines().enumerate() {
            let line_no = index + 1;
            let line = line.map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            if line.trim().is_empty() {
                continue;
            }
            let record: DocumentRecord =
                serde_json::from_str(&line).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
            builder.add_tokenized(record.doc_id, record.label, record.groups).map_err(|e| match e {
                Error::Validation(message) => Error::Validation(format!("line {line_no}: {message}")),
                other => other,
            })?;
        }
        Ok(builder.build())
    }

    pub fn from_jsonl_str(text: &str) -> Result<Self> {
        Self::from_reader(text.as_bytes())
    }

    pub fn to_writer<W: Write>(&self, mut writer: W) -> Result<()> {
        let to_io = |e: std::io::Error| Error::io("<writer>", e);
        for doc in &self.documents {
            let groups: Vec<Vec<Vec<&str>>> = doc
                .groups
                .iter()
                .map(|g| {
                    g.sentences.iter().map(|s| s.iter().map(|&w| self.vocabulary.words[w as usize].as_str()).collect()).collect()
                })
                .collect();
            let record = DocumentRecordRef { doc_id: &doc.doc_id, label: doc.label.as_deref(), groups };
            serde_json::to_writer(&mut writer, &record).map_err(|e| Error::Format(format!("serializing {}: {e}", doc.doc_id)))?;
            writer.write_all(b"\n").map_err(to_io)?;
        }
        writer.flush().map_err(to_io)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DocumentRecord {
    doc_id: String,
    #[serde(default)]
    label: Option<String>,
    groups: Vec<Vec<Vec<String>>>,
}

#[derive(Serialize)]
struct DocumentRecordRef<'a> {
    doc_id: &'a str,
    label: Option<&'a str>,
    groups: Vec<Vec<Vec<&'a str>>>,
}

/// Incrementally builds a [`Corpus`], assigning group indices in document
/// order.
#[derive(Debug, Default)]
pub struct CorpusBuilder {
    corpus: Corpus,
    seen: HashMap<String, usize>,
}

impl CorpusBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a document whose group boundaries are already fixed.
    pub fn add_tokenized<S: AsRef<str>>(
        &mut self,
        doc_id: String,
        label: Option<String>,
        groups: Vec<Vec<Vec<S>>>,
    ) -> Result<&mut Self> {
        if self.seen.contains_key(&doc_id) {
            return Err(Error::Validation(format!("duplicate doc_id {doc_id:?}")));
        }
        if groups.is_empty() {
            return Err(Error::Validation(format!("document {doc_id:?} has no sentence groups")));
        }
        if let Some(i) = groups.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!("document {doc_id:?}: group {i} has no sentences")));
        }

        let vocabulary = &mut self.corpus.vocabulary;
        let mut next_index = self.corpus.n_groups;
        let groups: Vec<SentenceGroup> = groups
            .into_iter()
            .map(|sentences| {
                let group = SentenceGroup {
                    sentences: sentences.into_iter().map(|s| s.iter().map(|w| vocabulary.intern(w.as_ref())).collect()).collect(),
                    global_index: next_index,
                };
                next_index += 1;
                group
            })
            .collect();

        self.corpus.n_groups = next_index;
        self.seen.insert(doc_id.clone(), self.corpus.documents.len());
        self.corpus.documents.push(Document { doc_id, groups, label });
        Ok(self)
    }

    /// Splits, tokenizes and groups raw text. Sentences without any word
    /// token are dropped; a document left with no sentences is rejected.
    pub fn add_raw(&mut self, doc_id: String, label: Option<String>, text: &str, n_s: usize) -> Result<&mut Self> {
        let sentences: Vec<Vec<String>> =
            split_sentences(text).iter().map(|s| tokenize_words(s)).filter(|tokens| !tokens.is_empty()).collect();
        let groups = group_sentences(sentences, n_s)?;
        self.add_tokenized(doc_id, label, groups)
    }

    pub fn build(self) -> Corpus {
        self.corpus
    }
}

/// Partitions `sentences` into consecutive groups of `n_s`; the last group
/// keeps the remainder.
pub fn group_sentences<T>(sentences: Vec<T>, n_s: usize) -> Result<Vec<Vec<T>>> {
    if n_s == 0 {
        return Err(Error::InvalidConfig("n_s must be at least 1".into()));
    }
    let mut groups = Vec::with_capacity(sentences.len().div_ceil(n_s));
    let mut iter = sentences.into_iter().peekable();
    while iter.peek().is_some() {
        groups.push(iter.by_ref().take(n_s).collect());
    }
    Ok(groups)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Corpus::from_reader(BufReader::new(file))
}

pub fn save_corpus(corpus: &Corpus, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    corpus.to_writer(BufWriter::new(file))
}
