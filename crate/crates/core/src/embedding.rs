//! Word embedding tables and skip-gram negative-sampling training.
//!
//! Tables are stored in the word2vec text format: a `<vocab_size> <dim>`
//! header followed by one `<token> <v1> ... <vdim>` row per word.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    vocab: Vec<String>,
    index: HashMap<String, usize>,
    vectors: Vec<f64>,
}

impl EmbeddingTable {
    /// `vectors` is row-major, `vocab.len() * dim` long.
    pub fn new(dim: usize, vocab: Vec<String>, vectors: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("embedding dimension must be positive".into()));
        }
        if vectors.len() != vocab.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: vocab.len() * dim,
                found: vectors.len(),
            });
        }
        if let Some(i) = vectors.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i / dim));
        }
        let mut index = HashMap::with_capacity(vocab.len());
        for (i, token) in vocab.iter().enumerate() {
            if token.is_empty() || token.chars().any(char::is_whitespace) {
                return Err(Error::Config(format!("invalid token {token:?}")));
            }
            if index.insert(token.clone(), i).is_some() {
                return Err(Error::Config(format!("duplicate token {token:?}")));
            }
        }
        Ok(EmbeddingTable {
            dim,
            vocab,
            index,
            vectors,
        })
    }

    /// Build from `(token, vector)` rows.
    pub fn from_rows<I, S>(dim: usize, rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, Vec<f64>)>,
        S: Into<String>,
    {
        let mut vocab = Vec::new();
        let mut vectors = Vec::new();
        for (token, v) in rows {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            vocab.push(token.into());
            vectors.extend(v);
        }
        Self::new(dim, vocab, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vocab.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vocab.is_empty()
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact match on the token; callers normalize first.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.index.get(token).map(|&i| self.row(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f64])> + '_ {
        self.vocab.iter().enumerate().map(|(i, t)| (t.as_str(), self.row(i)))
    }

    /// Apply `f` to every entry.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            self.dim,
            self.vocab.clone(),
            self.vectors.iter().map(|&v| f(v)).collect(),
        )
    }

    /// Write in word2vec text format. Values use the shortest decimal
    /// representation that parses back to the identical `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.len(), self.dim)?;
        for (token, row) in self.iter() {
            w.write_all(token.as_bytes())?;
            for v in row {
                write!(w, " {v}")?;
            }
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file)).map_err(|e| Error::io(path, e))
    }

    /// Parse word2vec text format. `origin` only labels error messages.
    pub fn read_from<R: BufRead>(reader: R, origin: &Path) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| Error::io(origin, e))?,
            None => return Err(Error::parse(origin, 1, "missing header")),
        };
        let (count, dim) = parse_header(&header).ok_or_else(|| {
            Error::parse(
                origin,
                1,
                format!("malformed header {header:?}, expected \"<vocab_size> <dim>\""),
            )
        })?;

        let mut vocab = Vec::with_capacity(count);
        let mut index = HashMap::with_capacity(count);
        let mut vectors = Vec::with_capacity(count * dim);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| Error::io(origin, e))?;
            if line.trim().is_empty() {
                continue;
            }
            if vocab.len() == count {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("more rows than the {count} declared"),
                ));
            }
            let mut fields = line.split_whitespace();
            let token = fields.next().unwrap_or_default().to_owned();
            let start = vectors.len();
            for field in fields {
                let v: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(origin, lineno, format!("invalid number {field:?}")))?;
                if !v.is_finite() {
                    return Err(Error::parse(origin, lineno, format!("non-finite value {field:?}")));
                }
                vectors.push(v);
            }
            let found = vectors.len() - start;
            if found != dim {
                return Err(Error::parse(
                    origin,
                    lineno,
                    format!("row for {token:?} has {found} values, header declares dim {dim}"),
                ));
            }
            if index.insert(token.clone(), vocab.len()).is_some() {
                return Err(Error::parse(origin, lineno, format!("duplicate token {token:?}")));
            }
            vocab.push(token);
        }
        if vocab.len() != count {
            return Err(Error::parse(
                origin,
                vocab.len() + 2,
                format!("header declares {count} rows, found {}", vocab.len()),
            ));
        }
        Ok(EmbeddingTable {
            dim,
            vocab,
            index,
            vectors,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file), path)
    }
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let count = parts.next()?.parse().ok()?;
    let dim: usize = parts.next()?.parse().ok()?;
    if parts.next().is_some() || dim == 0 {
        return None;
    }
    Some((count, dim))
}

/// Skip-gram negative-sampling hyperparameters.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    pub initial_learning_rate: f64,
    pub min_count: usize,
    pub seed: u64,
    /// 1 gives bit-reproducible output. More workers update the shared
    /// matrices without synchronization and are not deterministic.
    pub workers: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            window: 5,
            negatives: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
            min_count: 2,
            seed: 1,
            workers: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::Config(what.to_owned()))
            }
        };
        check((10..=1000).contains(&self.dim), "dim must be in [10, 1000]")?;
        check((1..=20).contains(&self.window), "window must be in [1, 20]")?;
        check((1..=50).contains(&self.negatives), "negatives must be in [1, 50]")?;
        check(self.epochs >= 1, "epochs must be positive")?;
        check(
            self.initial_learning_rate.is_finite() && self.initial_learning_rate > 0.0,
            "initial_learning_rate must be positive",
        )?;
        check(self.workers >= 1, "workers must be positive")
    }
}

/// Result of [`train_word2vec`].
#[derive(Debug, Clone)]
pub struct Trained {
    pub table: EmbeddingTable,
    /// Mean negative-sampling loss per (center, context) pair, per epoch.
    pub epoch_loss: Vec<f64>,
}

/// Vocabulary sorted by descending count, ties lexicographic.
pub fn build_vocab<'a, I>(sentences: I, min_count: usize) -> Vec<(String, usize)>
where
    I: IntoIterator<Item = &'a [String]>,
{
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for sentence in sentences {
        for token in sentence {
            *counts.entry(token.as_str()).or_default() += 1;
        }
    }
    let mut vocab: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .map(|(t, c)| (t.to_owned(), c))
        .collect();
    vocab.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    vocab
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln(sigmoid(x))`, stable for large |x|.
fn neg_log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Negative-sampling loss for one center word against its true context and
/// sampled noise words:
/// `-ln s(u_ctx . v) - sum_k ln s(-u_k . v)`.
pub fn negative_sampling_loss(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> f64 {
    neg_log_sigmoid(dot(context, center)) + negatives.iter().map(|u| neg_log_sigmoid(-dot(u, center))).sum::<f64>()
}

/// Gradients of [`negative_sampling_loss`].
#[derive(Debug, Clone, PartialEq)]
pub struct PairGradient {
    pub loss: f64,
    pub center: Vec<f64>,
    pub context: Vec<f64>,
    pub negatives: Vec<Vec<f64>>,
}

pub fn negative_sampling_gradient(center: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairGradient {
    let dim = center.len();
    let mut grad_center = vec![0.0; dim];
    let mut loss = 0.0;

    let mut target = |u: &[f64], positive: bool| -> Vec<f64> {
        let z = dot(u, center);
        // dL/dz for the positive term is s(z) - 1, for a negative it is s(z).
        let coeff = if positive {
            loss += neg_log_sigmoid(z);
            sigmoid(z) - 1.0
        } else {
            loss += neg_log_sigmoid(-z);
            sigmoid(z)
        };
        for (g, ui) in grad_center.iter_mut().zip(u) {
            *g += coeff * ui;
        }
        center.iter().map(|v| coeff * v).collect()
    };
    let grad_context = target(context, true);
    let grad_negatives = negatives.iter().map(|u| target(u, false)).collect();
    PairGradient {
        loss,
        center: grad_center,
        context: grad_context,
        negatives: grad_negatives,
    }
}

/// Row-major matrix of f64 cells that many workers may read and write at
/// once. Each cell is an atomic word so racing updates lose increments
/// rather than tearing.
struct SharedMatrix {
    cells: Vec<AtomicU64>,
    cols: usize,
}

impl SharedMatrix {
    fn from_values(values: Vec<f64>, cols: usize) -> Self {
        SharedMatrix {
            cells: values.into_iter().map(|v| AtomicU64::new(v.to_bits())).collect(),
            cols,
        }
    }

    fn read_row(&self, row: usize, out: &mut [f64]) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (o, c) in out.iter_mut().zip(cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, row: usize, delta: &[f64], scale: f64) {
        let cells = &self.cells[row * self.cols..(row + 1) * self.cols];
        for (c, d) in cells.iter().zip(delta) {
            let v = f64::from_bits(c.load(Ordering::Relaxed)) + scale * d;
            c.store(v.to_bits(), Ordering::Relaxed);
        }
    }

    fn into_values(self) -> Vec<f64> {
        self.cells.into_iter().map(|c| f64::from_bits(c.into_inner())).collect()
    }
}

struct TrainState<'a> {
    config: &'a TrainConfig,
    input: SharedMatrix,
    output: SharedMatrix,
    noise: WeightedIndex<f64>,
    processed: AtomicUsize,
    total: usize,
}

impl TrainState<'_> {
    fn learning_rate(&self) -> f64 {
        let progress = self.processed.load(Ordering::Relaxed) as f64 / self.total.max(1) as f64;
        self.config.initial_learning_rate * (1.0 - 0.95 * progress.min(1.0))
    }

    /// Runs every epoch over `sentences`; returns per-epoch (loss sum, pairs).
    fn run_worker(&self, sentences: &[Vec<usize>], rng: &mut ChaCha8Rng) -> Vec<(f64, usize)> {
        let dim = self.config.dim;
        let window = self.config.window;
        let mut center = vec![0.0; dim];
        let mut context = vec![0.0; dim];
        let mut noise_rows = vec![vec![0.0; dim]; self.config.negatives];
        let mut noise_ids = Vec::with_capacity(self.config.negatives);
        let mut stats = Vec::with_capacity(self.config.epochs);

        for _ in 0..self.config.epochs {
            let (mut loss_sum, mut pairs) = (0.0, 0usize);
            for sentence in sentences {
                for (pos, &center_id) in sentence.iter().enumerate() {
                    let lr = self.learning_rate();
                    let reach = window - rng.gen_range(0..window);
                    let lo = pos.saturating_sub(reach);
                    let hi = (pos + reach).min(sentence.len() - 1);
                    for (ctx_pos, &context_id) in sentence.iter().enumerate().take(hi + 1).skip(lo) {
                        if ctx_pos == pos {
                            continue;
                        }
                        noise_ids.clear();
                        while noise_ids.len() < self.config.negatives {
                            let id = self.noise.sample(rng);
                            if id != context_id {
                                noise_ids.push(id);
                            }
                        }
                        self.input.read_row(center_id, &mut center);
                        self.output.read_row(context_id, &mut context);
                        for (row, &id) in noise_rows.iter_mut().zip(&noise_ids) {
                            self.output.read_row(id, row);
                        }
                        let negs: Vec<&[f64]> = noise_rows.iter().map(Vec::as_slice).collect();
                        let grad = negative_sampling_gradient(&center, &context, &negs);
                        self.output.add_row(context_id, &grad.context, -lr);
                        for (&id, g) in noise_ids.iter().zip(&grad.negatives) {
                            self.output.add_row(id, g, -lr);
                        }
                        self.input.add_row(center_id, &grad.center, -lr);
                        loss_sum += grad.loss;
                        pairs += 1;
                    }
                    self.processed.fetch_add(1, Ordering::Relaxed);
                }
            }
            stats.push((loss_sum, pairs));
        }
        stats
    }
}

/// Train skip-gram embeddings with negative sampling over the corpus
/// sentences. Context windows never cross sentence boundaries. The noise
/// distribution is unigram count^0.75 and the learning rate decays
/// linearly to 5% of its initial value. Frequent-word subsampling is not
/// applied.
pub fn train_word2vec(corpus: &Corpus, config: &TrainConfig) -> Result<Trained> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus("corpus contains no tokens".into()));
    }
    let vocab = build_vocab(corpus.sentence_tokens(), config.min_count);
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary {
            min_count: config.min_count,
        });
    }
    let ids: HashMap<&str, usize> = vocab.iter().enumerate().map(|(i, (t, _))| (t.as_str(), i)).collect();
    let sentences: Vec<Vec<usize>> = corpus
        .sentence_tokens()
        .map(|s| {
            s.iter()
                .filter_map(|t| ids.get(t.as_str()).copied())
                .collect::<Vec<_>>()
        })
        .filter(|s| s.len() > 1)
        .collect();

    let dim = config.dim;
    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let half = 0.5 / dim as f64;
    let input: Vec<f64> = (0..vocab.len() * dim)
        .map(|_| init_rng.gen_range(-half..half))
        .collect();
    let noise = WeightedIndex::new(vocab.iter().map(|(_, c)| (*c as f64).powf(0.75)))
        .map_err(|e| Error::Internal(format!("noise distribution: {e}")))?;

    let tokens_per_epoch: usize = sentences.iter().map(Vec::len).sum();
    let state = TrainState {
        config,
        input: SharedMatrix::from_values(input, dim),
        output: SharedMatrix::from_values(vec![0.0; vocab.len() * dim], dim),
        noise,
        processed: AtomicUsize::new(0),
        total: tokens_per_epoch * config.epochs,
    };

    let stats: Vec<Vec<(f64, usize)>> = if config.workers == 1 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1));
        vec![state.run_worker(&sentences, &mut rng)]
    } else {
        let chunk = sentences.len().div_ceil(config.workers).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = sentences
                .chunks(chunk)
                .enumerate()
                .map(|(w, part)| {
                    let state = &state;
                    scope.spawn(move || {
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(1 + w as u64));
                        state.run_worker(part, &mut rng)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        })
    };

    let epoch_loss = (0..config.epochs)
        .map(|e| {
            let (sum, n) = stats.iter().fold((0.0, 0), |(s, n), w| (s + w[e].0, n + w[e].1));
            if n == 0 {
                0.0
            } else {
                sum / n as f64
            }
        })
        .collect();

    let table = EmbeddingTable::new(
        dim,
        vocab.into_iter().map(|(t, _)| t).collect(),
        state.input.into_values(),
    )?;
    Ok(Trained { table, epoch_loss })
}
