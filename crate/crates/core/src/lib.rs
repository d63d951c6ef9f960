//! Bag-of-sentences topic modeling.
//!
//! Documents are split into groups of consecutive sentences, each group is
//! represented by one pretrained sentence embedding, and every group is
//! hard-assigned to one topic by an annealed EM loop. Topic words are ranked
//! by a frequency × relevance score computed from the assignments.

pub mod corpus;
pub mod em;
pub mod embedding;
pub mod error;
pub mod init;
pub mod metrics;
pub mod model;
pub mod rng;
pub mod scoring;
pub mod synth;
pub mod text;

pub use corpus::{group_sentences, load_corpus, save_corpus, Corpus, CorpusBuilder, Document, SentenceGroup, Vocabulary, WordId};
pub use em::{
    decay_c, e_step, explore_rank, fit, fit_with_observer, group_posterior, m_step, select_topic, FitConfig, ModelState, Rank,
};
pub use embedding::{cosine, read_embeddings, write_embeddings, EmbeddingMatrix, F32Matrix};
pub use error::{Error, Result};
pub use init::kmeanspp_init;
pub use metrics::{doc_topic_labels, nmi, npmi_coherence, ReferenceIndex};
pub use model::{load_model, save_model, Manifest, SavedModel};
pub use rng::SeedStreams;
pub use scoring::{ScoredWord, TopicScores};
pub use text::{split_sentences, tokenize_words};
