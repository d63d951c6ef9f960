//! The `bos` command line: fit, inspect and evaluate bag-of-sentences topic
//! models. Exposed as a library so the commands can be driven in-process.
//!
//! Exit codes: 0 on success, 1 on runtime or data errors, 2 on usage errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bos_core::model::{write_assignments, AssignmentRecord, MODEL_FORMAT_VERSION};
use bos_core::synth::{self, SynthConfig};
use bos_core::{
    doc_topic_labels, fit_with_observer, group_posterior, load_corpus, load_model, nmi, npmi_coherence, read_embeddings,
    save_corpus, save_model, write_embeddings, Corpus, FitConfig, Manifest, ReferenceIndex, SavedModel, TopicScores,
};
use clap::{value_parser, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(name = "bos", version, about = "Bag-of-sentences topic modeling")]
struct Cli {
    /// Worker threads. Results are identical for any value.
    #[arg(long, global = true, env = "BOS_THREADS", value_parser = value_parser!(u64).range(1..))]
    threads: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a model and write it to a new directory.
    Fit(FitArgs),
    /// List the top words of every topic.
    Topics(TopicsArgs),
    /// Show the topic distribution and per-group diagnostics of one document.
    DocTopics(DocTopicsArgs),
    /// NMI of the model's clustering against ground-truth labels.
    EvalNmi(EvalNmiArgs),
    /// Mean pairwise NPMI of topic top words over a reference corpus.
    EvalCoherence(EvalCoherenceArgs),
    /// Generate a synthetic corpus with planted topics.
    Synth(SynthArgs),
}

#[derive(Debug, clap::Args)]
struct FitArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    /// Number of topics.
    #[arg(long, default_value_t = 50, value_parser = value_parser!(u64).range(1..))]
    k: u64,
    /// Prior pseudo-count per topic; also the floor of the smoothing schedule.
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Sentences per group (recorded; the corpus file fixes group boundaries).
    #[arg(long, default_value_t = 3, value_parser = value_parser!(u64).range(1..))]
    ns: u64,
    #[arg(long, default_value_t = 10, value_parser = value_parser!(u64).range(1..))]
    epochs: u64,
    /// Initial smoothing constant; the first epoch uses max(c0, alpha).
    #[arg(long, default_value_t = 8.0)]
    c0: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output model directory; must not exist.
    #[arg(long)]
    out: PathBuf,
    /// Also print the smoothing constant and exploring documents per epoch.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, clap::Args)]
struct TopicsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    top: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Corpus to count words in; defaults to the one recorded in the model.
    #[arg(long)]
    corpus: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct DocTopicsArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    doc_id: String,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    embeddings: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EvalNmiArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Per-group ground truth in the assignments line format. When given,
    /// group assignments are scored instead of document labels.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct EvalCoherenceArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Reference corpus in the corpus line format.
    #[arg(long)]
    reference: PathBuf,
    #[arg(long, default_value_t = 10)]
    top: usize,
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 5, value_parser = value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value_t = 200, value_parser = value_parser!(u64).range(1..))]
    docs: u64,
    #[arg(long, default_value_t = 20, value_parser = value_parser!(u64).range(1..))]
    groups_per_doc: u64,
    #[arg(long, default_value_t = 64, value_parser = value_parser!(u64).range(1..))]
    dim: u64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Writes `<prefix>.corpus.jsonl`, `<prefix>.bose` and `<prefix>.truth.jsonl`.
    #[arg(long)]
    out_prefix: PathBuf,
}

/// Standard output and standard error of one invocation.
pub struct Streams<'a> {
    pub out: &'a mut (dyn Write + Send),
    pub err: &'a mut (dyn Write + Send),
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn main_with<I, T>(args: I, io: &mut Streams<'_>) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { io.err.write_all(text.as_bytes()) } else { io.out.write_all(text.as_bytes()) };
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli, io) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(io.err, "error: {e:#}");
            1
        }
    }
}

fn run(cli: Cli, io: &mut Streams<'_>) -> Result<()> {
    let threads = match cli.threads {
        Some(n) => n as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().context("building worker pool")?;
    pool.install(|| match cli.command {
        Command::Fit(args) => cmd_fit(args, io),
        Command::Topics(args) => cmd_topics(args, io),
        Command::DocTopics(args) => cmd_doc_topics(args, io),
        Command::EvalNmi(args) => cmd_eval_nmi(args, io),
        Command::EvalCoherence(args) => cmd_eval_coherence(args, io),
        Command::Synth(args) => cmd_synth(args, io),
    })
}

fn print_json(out: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_fit(args: FitArgs, io: &mut Streams<'_>) -> Result<()> {
    let config = FitConfig {
        k: args.k as usize,
        alpha: args.alpha,
        n_s: args.ns as usize,
        epochs: args.epochs as usize,
        c0: args.c0,
        seed: args.seed,
    };
    config.validate()?;
    if args.out.exists() {
        bail!("output directory {} already exists", args.out.display());
    }
    let corpus = load_corpus(&args.corpus).context("loading corpus")?;
    let embeddings = read_embeddings(&args.embeddings).context("loading embeddings")?;

    let started = Instant::now();
    let mut c_trace = Vec::with_capacity(config.epochs);
    let state = fit_with_observer(&corpus, &embeddings, &config, |report, _| {
        c_trace.push(report.c);
        if args.timing {
            let exploring = report.ranks.iter().filter(|r| **r == bos_core::Rank::SecondBest).count();
            let _ = writeln!(io.err, "epoch {:>3}: c = {}, {exploring} documents on second-best topics", report.epoch, report.c);
        }
    })?;
    let seconds = started.elapsed().as_secs_f64();

    let manifest = Manifest {
        format_version: MODEL_FORMAT_VERSION,
        epochs_run: c_trace.len(),
        final_c: state.c_current,
        c_trace,
        n_docs: corpus.len(),
        n_groups: corpus.n_groups(),
        dim: embeddings.dim(),
        corpus: Some(fs::canonicalize(&args.corpus)?),
        embeddings: Some(fs::canonicalize(&args.embeddings)?),
        config,
    };
    let doc_ids: Vec<String> = corpus.documents().iter().map(|d| d.doc_id.clone()).collect();
    save_model(&args.out, &manifest, &doc_ids, &state).context("writing model")?;

    writeln!(
        io.err,
        "fit {} documents, {} groups in {seconds:.3} s; final c = {}",
        corpus.len(),
        corpus.n_groups(),
        state.c_current
    )?;
    print_json(
        io.out,
        &json!({
            "model": args.out,
            "k": manifest.config.k,
            "epochs": manifest.epochs_run,
            "final_c": state.c_current,
            "seconds": seconds,
        }),
    )
}

/// Loads the model and its corpus, checking that they describe the same documents.
fn model_with_corpus(model_dir: &Path, corpus: Option<&Path>) -> Result<(SavedModel, Corpus)> {
    let model = load_model(model_dir).with_context(|| format!("loading model {}", model_dir.display()))?;
    let corpus_path = match corpus {
        Some(p) => p.to_path_buf(),
        None => model.manifest.corpus.clone().context("model does not record its corpus; pass --corpus")?,
    };
    let corpus = load_corpus(&corpus_path).with_context(|| format!("loading corpus {}", corpus_path.display()))?;
    if corpus.len() != model.doc_ids.len() {
        bail!("corpus has {} documents, model has {}", corpus.len(), model.doc_ids.len());
    }
    for (i, (doc, id)) in corpus.documents().iter().zip(&model.doc_ids).enumerate() {
        if &doc.doc_id != id || doc.groups.len() != model.state.assignments[i].len() {
            bail!("corpus document {i} ({:?}) does not match the model ({id:?})", doc.doc_id);
        }
    }
    Ok((model, corpus))
}

fn cmd_topics(args: TopicsArgs, io: &mut Streams<'_>) -> Result<()> {
    let (model, corpus) = model_with_corpus(&args.model, args.corpus.as_deref())?;
    let k = model.state.k();
    let scores = TopicScores::compute(&corpus, &model.state.assignments, k);
    let topics: Vec<_> = (0..k).map(|t| scores.top_words(t, args.top, corpus.vocabulary())).collect();

    let out = &mut *io.out;
    match args.format {
        Format::Json => {
            for (t, words) in topics.iter().enumerate() {
                serde_json::to_writer(&mut *out, &json!({ "topic": t, "words": words }))?;
                writeln!(out)?;
            }
        }
        Format::Table => {
            writeln!(out, "{:>5}  {:<24} {:>10} {:>8}", "topic", "word", "score", "n_wt")?;
            for (t, words) in topics.iter().enumerate() {
                if words.is_empty() {
                    writeln!(out, "{t:>5}  {:<24} {:>10} {:>8}", "-", "", "")?;
                }
                for w in words {
                    writeln!(out, "{t:>5}  {:<24} {:>10.4} {:>8}", w.word, w.score, w.n_wt)?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_doc_topics(args: DocTopicsArgs, io: &mut Streams<'_>) -> Result<()> {
    let (model, corpus) = model_with_corpus(&args.model, args.corpus.as_deref())?;
    let d = model.position(&args.doc_id).with_context(|| format!("unknown doc-id {:?}", args.doc_id))?;
    let embeddings_path = match &args.embeddings {
        Some(p) => p.clone(),
        None => model.manifest.embeddings.clone().context("model does not record its embeddings; pass --embeddings")?,
    };
    let embeddings = read_embeddings(&embeddings_path).with_context(|| format!("loading {}", embeddings_path.display()))?;
    if embeddings.n_rows() != corpus.n_groups() {
        bail!("embeddings have {} rows, corpus has {} groups", embeddings.n_rows(), corpus.n_groups());
    }

    let groups = (0..corpus.documents()[d].groups.len())
        .map(|g| {
            let posterior = group_posterior(&model.state, &corpus, &embeddings, d, g)?;
            Ok(json!({
                "group": g,
                "topic": model.state.assignments[d][g],
                "products": posterior.products,
                "argmax": posterior.argmax,
                "p_g_given_d": posterior.ratio,
                "in_unit_interval": posterior.in_unit_interval,
            }))
        })
        .collect::<Result<Vec<_>>>()?;
    print_json(
        io.out,
        &json!({
            "doc_id": args.doc_id,
            "topic_doc": model.state.topic_doc[d],
            "groups": groups,
        }),
    )
}

fn cmd_eval_nmi(args: EvalNmiArgs, io: &mut Streams<'_>) -> Result<()> {
    let (model, corpus) = model_with_corpus(&args.model, args.corpus.as_deref())?;
    let k = model.state.k();
    let (value, per_topic) = match &args.truth {
        Some(path) => {
            let truth = bos_core::model::read_assignments(path).with_context(|| format!("loading {}", path.display()))?;
            check_truth(&truth, &model)?;
            let pred: Vec<usize> = model.state.assignments.iter().flatten().copied().collect();
            let gold: Vec<usize> = truth.iter().flat_map(|r| r.topics.iter().copied()).collect();
            let mut sizes = vec![0usize; k];
            pred.iter().for_each(|&t| sizes[t] += 1);
            (nmi(&pred, &gold)?, sizes)
        }
        None => {
            let labels: Vec<&str> = corpus
                .documents()
                .iter()
                .map(|doc| doc.label.as_deref().with_context(|| format!("document {:?} has no label", doc.doc_id)))
                .collect::<Result<_>>()?;
            let pred = doc_topic_labels(&model.state);
            let mut sizes = vec![0usize; k];
            pred.iter().for_each(|&t| sizes[t] += 1);
            (nmi(&pred, &labels)?, sizes)
        }
    };
    print_json(io.out, &json!({ "metric": "nmi", "value": value, "per_topic": per_topic }))
}

fn check_truth(truth: &[AssignmentRecord], model: &SavedModel) -> Result<()> {
    if truth.len() != model.doc_ids.len() {
        bail!("truth has {} documents, model has {}", truth.len(), model.doc_ids.len());
    }
    for (r, (id, topics)) in truth.iter().zip(model.doc_ids.iter().zip(&model.state.assignments)) {
        if &r.doc_id != id || r.topics.len() != topics.len() {
            bail!("truth for {:?} does not line up with the model", r.doc_id);
        }
    }
    Ok(())
}

fn cmd_eval_coherence(args: EvalCoherenceArgs, io: &mut Streams<'_>) -> Result<()> {
    let (model, corpus) = model_with_corpus(&args.model, args.corpus.as_deref())?;
    let k = model.state.k();
    let scores = TopicScores::compute(&corpus, &model.state.assignments, k);
    let topics: Vec<Vec<String>> =
        (0..k).map(|t| scores.top_words(t, args.top, corpus.vocabulary()).into_iter().map(|w| w.word).collect()).collect();
    let candidates: Vec<&str> = topics.iter().flatten().map(String::as_str).collect();
    let reference = load_corpus(&args.reference).with_context(|| format!("loading reference {}", args.reference.display()))?;
    let index = ReferenceIndex::from_corpus(&reference, &candidates)?;
    let report = npmi_coherence(&topics, &index)?;
    let value = report.overall.context("no topic has two or more positive-score words; coherence undefined")?;
    print_json(io.out, &json!({ "metric": "npmi", "value": value, "per_topic": report.per_topic }))
}

fn cmd_synth(args: SynthArgs, io: &mut Streams<'_>) -> Result<()> {
    let config = SynthConfig {
        k: args.k as usize,
        docs: args.docs as usize,
        groups_per_doc: args.groups_per_doc as usize,
        dim: args.dim as usize,
        noise: args.noise,
        seed: args.seed,
        ..SynthConfig::default()
    };
    let data = synth::generate(&config)?;
    let prefix = args.out_prefix.to_string_lossy();
    let corpus_path = PathBuf::from(format!("{prefix}.corpus.jsonl"));
    let embeddings_path = PathBuf::from(format!("{prefix}.bose"));
    let truth_path = PathBuf::from(format!("{prefix}.truth.jsonl"));
    if let Some(parent) = corpus_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_corpus(&data.corpus, &corpus_path)?;
    write_embeddings(&data.embeddings, &embeddings_path)?;
    write_assignments(
        &truth_path,
        data.corpus.documents().iter().map(|d| d.doc_id.as_str()).zip(data.truth.iter().map(Vec::as_slice)),
    )?;
    print_json(
        io.out,
        &json!({
            "corpus": corpus_path,
            "embeddings": embeddings_path,
            "truth": truth_path,
            "docs": data.corpus.len(),
            "groups": data.corpus.n_groups(),
        }),
    )
}
