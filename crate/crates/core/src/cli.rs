//! Command-line front end.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration or input error,
//! 3 data error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::classify::{split_terms, LabelSet};
use crate::config::{ConfigBuilder, RunConfig, PRESETS};
use crate::corpus::{read_term_list, Corpus, StopwordSet, TextPipeline};
use crate::embedding::train_word2vec;
use crate::error::{Error, Result};
use crate::eval::{evaluate_records, run_system, EmbeddingSource, Metrics, SystemInputs, TermPrediction};
use crate::termrep::{external_key, TermRecord};

#[derive(Debug, Parser)]
#[command(name = "hypernym", version, about = "Classify financial terms into hypernym labels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train skip-gram embeddings on the corpus and write <out>/embeddings.txt.
    TrainEmbeddings(Common),
    /// Count labels contained in each test term and write <out>/split.tsv.
    Split(Common),
    /// Run a full system and write report.txt, predictions.jsonl and metrics.json.
    RunSystem {
        #[command(flatten)]
        common: Common,
        /// Print the shipped system presets and exit.
        #[arg(long)]
        list_systems: bool,
    },
    /// Recompute metrics from an existing predictions file.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Defaults to <out>/predictions.jsonl.
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Write up to max_sentences corpus sentences per train/test term to
    /// <out>/sentences.tsv (term key<TAB>sentence).
    ExtractSentences {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_sentences: Option<usize>,
    },
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// key = value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Preset name (system1, system2, system3).
    #[arg(long)]
    pub system: Option<String>,
    /// Embedding dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Threads for embedding training and ranking.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Single-worker, seeded, bit-reproducible training.
    #[arg(long)]
    pub deterministic: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory of .txt documents.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Training terms, term<TAB>label per line.
    #[arg(long)]
    pub train: Option<PathBuf>,
    /// Test terms, term[<TAB>label] per line.
    #[arg(long)]
    pub test: Option<PathBuf>,
    /// One label per line.
    #[arg(long)]
    pub labels: Option<PathBuf>,
    /// Stopword list replacing the bundled English one.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Embedding table for the external source.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
}

impl Common {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut b = ConfigBuilder::new();
        if let Some(name) = &self.system {
            b.preset(name)?;
        }
        if let Some(path) = &self.config {
            if !path.exists() {
                return Err(Error::Config(format!("config file {} does not exist", path.display())));
            }
            b.file(path)?;
            // A preset named on the command line wins over one named in the file.
            if let Some(name) = &self.system {
                b.preset(name)?;
                b.file(path)?;
            }
        }
        let path_flags = [
            ("corpus_dir", &self.corpus),
            ("train_file", &self.train),
            ("test_file", &self.test),
            ("labels_file", &self.labels),
            ("stopwords_file", &self.stopwords),
            ("embedding_file", &self.embeddings),
            ("output_dir", &self.out),
        ];
        for (key, value) in path_flags {
            if let Some(p) = value {
                b.set(key, p.to_string_lossy())?;
            }
        }
        if let Some(d) = self.dim {
            b.set("dim", d.to_string())?;
        }
        if let Some(s) = self.seed {
            b.set("seed", s.to_string())?;
        }
        if let Some(w) = self.workers {
            b.set("workers", w.to_string())?;
        }
        if self.deterministic {
            b.set("deterministic", "true")?;
        }
        b.build()
    }
}

/// Parse `args`, run the command and return the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::TrainEmbeddings(common) => cmd_train_embeddings(&common.resolve()?),
        Command::Split(common) => cmd_split(&common.resolve()?),
        Command::RunSystem { list_systems: true, .. } => {
            for (name, text) in PRESETS {
                let summary: Vec<&str> = text
                    .lines()
                    .filter(|l| !l.trim().is_empty() && !l.starts_with('#') && !l.starts_with("name"))
                    .map(str::trim)
                    .collect();
                println!("{name}: {}", summary.join(", "));
            }
            Ok(0)
        }
        Command::RunSystem { common, .. } => cmd_run_system(&common.resolve()?),
        Command::Evaluate { common, predictions } => {
            let config = common.resolve()?;
            let path = predictions.unwrap_or_else(|| config.output_dir.join("predictions.jsonl"));
            cmd_evaluate(&path)
        }
        Command::ExtractSentences { common, max_sentences } => {
            let mut config = common.resolve()?;
            if let Some(m) = max_sentences {
                if m == 0 {
                    return Err(Error::Config("max_sentences must be positive".into()));
                }
                config.max_sentences = m;
            }
            cmd_extract_sentences(&config)
        }
    }
}

fn pipeline(config: &RunConfig) -> Result<TextPipeline> {
    let stopwords = match &config.stopwords_file {
        Some(_) => StopwordSet::load(&config.require("stopwords_file", &config.stopwords_file)?)?,
        None => StopwordSet::english(),
    };
    Ok(TextPipeline::new(stopwords))
}

fn load_corpus(config: &RunConfig, pipeline: &TextPipeline) -> Result<Corpus> {
    let dir = config.require("corpus_dir", &config.corpus_dir)?;
    if !dir.is_dir() {
        return Err(Error::Config(format!(
            "corpus_dir {} is not a directory",
            dir.display()
        )));
    }
    let corpus = Corpus::load_dir(pipeline, &dir)?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus(format!("{} contains no tokens", dir.display())));
    }
    Ok(corpus)
}

fn load_terms(
    key: &str,
    path: &Option<PathBuf>,
    config: &RunConfig,
    pipeline: &TextPipeline,
) -> Result<Vec<TermRecord>> {
    let path = config.require(key, path)?;
    Ok(read_term_list(&path)?
        .into_iter()
        .map(|line| TermRecord::new(pipeline, line.term, line.label))
        .collect())
}

fn check_labels(path: &Path, terms: &[TermRecord], labels: &LabelSet) -> Result<()> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let lines = crate::corpus::parse_term_list(path, &text)?;
    for (line, term) in lines.iter().zip(terms) {
        if let Some(g) = &term.gold_label {
            if labels.index_of(g).is_none() {
                return Err(Error::parse(path, line.line, format!("unknown label {g:?}")));
            }
        }
    }
    Ok(())
}

fn output_dir(config: &RunConfig) -> Result<PathBuf> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

pub fn cmd_train_embeddings(config: &RunConfig) -> Result<i32> {
    let EmbeddingSource::Trained(train) = &config.system.embedding else {
        return Err(Error::Config("train-embeddings needs embedding = trained".into()));
    };
    let pipeline = pipeline(config)?;
    let corpus = load_corpus(config, &pipeline)?;
    let trained = train_word2vec(&corpus, train)?;
    let out = output_dir(config)?.join("embeddings.txt");
    trained.table.save(&out)?;
    println!("vocab size   {}", trained.table.len());
    println!("dim          {}", trained.table.dim());
    println!("epochs       {}", train.epochs);
    println!("final loss   {:.6}", trained.epoch_loss.last().copied().unwrap_or(0.0));
    println!("seed         {}", config.seed);
    println!("wrote        {}", out.display());
    Ok(0)
}

pub fn cmd_split(config: &RunConfig) -> Result<i32> {
    let pipeline = pipeline(config)?;
    let labels = LabelSet::load(&pipeline, &config.require("labels_file", &config.labels_file)?)?;
    let terms = load_terms("test_file", &config.test_file, config, &pipeline)?;
    let split = split_terms(&terms, &labels);

    let mut listing = String::from("term\tmatches\tsubset\tlabels\n");
    for (term, matched) in terms.iter().zip(&split.matches) {
        let subset = if matched.len() == 1 { 1 } else { 2 };
        let names: Vec<&str> = matched.iter().map(|&l| labels.id(l)).collect();
        listing.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            term.surface,
            matched.len(),
            subset,
            names.join(",")
        ));
    }
    let out = output_dir(config)?.join("split.tsv");
    write(&out, listing)?;

    let [zero, one, many] = split.count_table();
    println!("{:<20} {:>6}", "labels within term", "terms");
    println!("{:<20} {:>6}", "0", zero);
    println!("{:<20} {:>6}", "1", one);
    println!("{:<20} {:>6}", "2+", many);
    println!("{:<20} {:>6}", "total", terms.len());
    println!("wrote {}", out.display());
    Ok(0)
}

fn print_metrics(name: &str, m: Option<Metrics>) {
    match m {
        Some(m) => println!("{name:<10} n={:<5} MR={:.4} ACC={:.4}", m.n, m.mean_rank, m.accuracy),
        None => println!("{name:<10} n=0"),
    }
}

pub fn cmd_run_system(config: &RunConfig) -> Result<i32> {
    let pipeline = pipeline(config)?;
    let labels_path = config.require("labels_file", &config.labels_file)?;
    let labels = LabelSet::load(&pipeline, &labels_path)?;
    let train_path = config.require("train_file", &config.train_file)?;
    let test_path = config.require("test_file", &config.test_file)?;
    let train = load_terms("train_file", &config.train_file, config, &pipeline)?;
    let test = load_terms("test_file", &config.test_file, config, &pipeline)?;
    check_labels(&train_path, &train, &labels)?;
    check_labels(&test_path, &test, &labels)?;
    if let Some((line, _)) = read_term_list(&train_path)?
        .iter()
        .map(|l| l.line)
        .zip(&train)
        .find(|(_, t)| t.gold_label.is_none())
    {
        return Err(Error::parse(&train_path, line, "training term without a label"));
    }

    let corpus = match config.system.embedding {
        EmbeddingSource::Trained(_) => Some(load_corpus(config, &pipeline)?),
        EmbeddingSource::External { ref path, .. } => {
            if !path.exists() {
                return Err(Error::Config(format!(
                    "embedding_file {} does not exist",
                    path.display()
                )));
            }
            None
        }
    };
    let inputs = SystemInputs {
        train: &train,
        test: &test,
        labels: &labels,
        seed: config.seed,
        workers: config.workers,
    };
    let run = run_system(&config.system, corpus.as_ref(), &inputs)?;

    let out = output_dir(config)?;
    write(&out.join("report.txt"), run.render_report())?;
    write(&out.join("predictions.jsonl"), run.render_predictions())?;
    let summary = serde_json::to_string_pretty(&run.metrics_summary()).map_err(|e| Error::Internal(e.to_string()))?;
    write(&out.join("metrics.json"), summary + "\n")?;
    for (name, subset) in [("model_subset1.txt", &run.subset1), ("model_subset2.txt", &run.subset2)] {
        if let Some(model) = &subset.model {
            model.save(&out.join(name))?;
        }
    }

    print!("{}", run.render_report());
    println!();
    print_metrics("combined", run.combined);
    println!("wrote {}", out.display());
    match run.failed() {
        Some(e) => {
            eprintln!("error: {e}");
            Ok(e.exit_code())
        }
        None => Ok(0),
    }
}

pub fn read_predictions(path: &Path) -> Result<Vec<TermPrediction>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, i + 1, e.to_string())))
        .collect()
}

pub fn cmd_evaluate(path: &Path) -> Result<i32> {
    let records = read_predictions(path)?;
    let [s1, s2, all] = evaluate_records(&records)?;
    print_metrics("subset 1", s1);
    print_metrics("subset 2", s2);
    print_metrics("combined", all);
    if all.is_none() {
        return Err(Error::NoPredictions);
    }
    Ok(0)
}

pub fn cmd_extract_sentences(config: &RunConfig) -> Result<i32> {
    let pipeline = pipeline(config)?;
    let corpus = load_corpus(config, &pipeline)?;
    let mut terms = Vec::new();
    for (key, path) in [("train_file", &config.train_file), ("test_file", &config.test_file)] {
        if path.is_some() {
            terms.extend(load_terms(key, path, config, &pipeline)?);
        }
    }
    let mut out = String::new();
    let mut seen = std::collections::HashSet::new();
    let mut missing = 0;
    for term in &terms {
        let key = external_key(&term.surface);
        if !seen.insert(key.clone()) {
            continue;
        }
        let matches = corpus.extract_term_sentences(&term.tokens, config.max_sentences);
        if matches.is_empty() {
            missing += 1;
        }
        for m in matches {
            out.push_str(&format!("{key}\t{}\n", m.text));
        }
    }
    let path = output_dir(config)?.join("sentences.tsv");
    write(&path, out)?;
    println!("terms        {}", seen.len());
    println!("without hits {missing}");
    println!("wrote        {}", path.display());
    Ok(0)
}
