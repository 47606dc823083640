//! Text ingestion and normalization.
//!
//! Every string that reaches an embedding table or the label matcher goes
//! through the same [`TextPipeline`]: tokenize, lower-case, drop stopwords,
//! stem. Corpus documents additionally keep a sentence index so that term
//! occurrences can be pulled out sentence by sentence.

use std::collections::HashSet;
use std::fs;
use std::ops::Range;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rust_stemmers::{Algorithm, Stemmer};

use crate::error::{Error, Result};

const ENGLISH_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

/// Lower-case stopwords, stored in tokenized form.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StopwordSet {
    words: HashSet<String>,
}

impl StopwordSet {
    /// The English list bundled with the crate.
    pub fn english() -> Self {
        Self::parse(ENGLISH_STOPWORDS)
    }

    /// One word per line, `#` starts a comment. Entries are tokenized and
    /// lower-cased so that e.g. `don't` contributes `don` and `t`.
    pub fn parse(text: &str) -> Self {
        let words = text
            .lines()
            .map(|line| line.split('#').next().unwrap_or(""))
            .flat_map(tokenize)
            .map(|w| w.to_lowercase())
            .collect();
        StopwordSet { words }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

impl<S: Into<String>> FromIterator<S> for StopwordSet {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        StopwordSet {
            words: iter.into_iter().map(|s| s.into().to_lowercase()).collect(),
        }
    }
}

/// Decode bytes as UTF-8, substituting U+FFFD for invalid sequences.
/// Returns the text and the number of substitutions made.
pub fn decode_lossy(bytes: &[u8]) -> (String, usize) {
    let mut warnings = 0;
    let mut out = String::with_capacity(bytes.len());
    for chunk in bytes.utf8_chunks() {
        out.push_str(chunk.valid());
        if !chunk.invalid().is_empty() {
            out.push(char::REPLACEMENT_CHARACTER);
            warnings += 1;
        }
    }
    (out, warnings)
}

/// Split raw text into tokens. Any character that is not alphanumeric acts
/// as a separator; case is preserved.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Split raw text into sentences: a boundary follows `.`, `!` or `?` when
/// the next characters are whitespace and then an upper-case letter.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if !matches!(c, '.' | '!' | '?') {
            continue;
        }
        let end = i + c.len_utf8();
        let rest = &text[end..];
        let trimmed = rest.trim_start();
        if trimmed.len() == rest.len() {
            continue;
        }
        if trimmed.chars().next().is_some_and(char::is_uppercase) {
            out.push(&text[start..end]);
            start = end;
        }
    }
    if start < text.len() {
        out.push(&text[start..]);
    }
    out.into_iter().map(str::trim).filter(|s| !s.is_empty()).collect()
}

/// Tokenize, lower-case, stopword-filter and stem.
pub struct TextPipeline {
    stopwords: StopwordSet,
    stemmer: Stemmer,
    keep_numeric: bool,
}

impl std::fmt::Debug for TextPipeline {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TextPipeline")
            .field("stopwords", &self.stopwords.len())
            .field("keep_numeric", &self.keep_numeric)
            .finish()
    }
}

impl Default for TextPipeline {
    fn default() -> Self {
        Self::new(StopwordSet::english())
    }
}

impl TextPipeline {
    pub fn new(stopwords: StopwordSet) -> Self {
        TextPipeline {
            stopwords,
            stemmer: Stemmer::create(Algorithm::English),
            keep_numeric: true,
        }
    }

    /// Drop purely numeric tokens instead of keeping them.
    pub fn drop_numeric(mut self) -> Self {
        self.keep_numeric = false;
        self
    }

    pub fn stopwords(&self) -> &StopwordSet {
        &self.stopwords
    }

    fn retain(&self, token: &str) -> bool {
        self.keep_numeric || !token.chars().all(|c| c.is_numeric())
    }

    /// The stemmer is iterated until it stops changing the word, which makes
    /// normalization idempotent (`agreed -> agre -> agr`).
    pub fn stem(&self, word: &str) -> String {
        let mut current = word.to_owned();
        loop {
            let next = self.stemmer.stem(&current);
            if next == current || next.is_empty() {
                return current;
            }
            current = next.into_owned();
        }
    }

    /// Normalize already tokenized input. Tokens that still carry separator
    /// characters are re-split first. Stopwords are removed on the surface
    /// form and again after stemming.
    pub fn normalize<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<String> {
        tokens
            .iter()
            .flat_map(|t| tokenize(t.as_ref()))
            .map(|t| t.to_lowercase())
            .filter(|t| !self.stopwords.contains(t) && self.retain(t))
            .map(|t| self.stem(&t))
            .filter(|t| !self.stopwords.contains(t))
            .collect()
    }

    /// `normalize(tokenize(text))`.
    pub fn process(&self, text: &str) -> Vec<String> {
        self.normalize(&tokenize(text))
    }

    pub fn stream<S: AsRef<str>>(&self, tokens: &[S], source_id: impl Into<String>) -> TokenStream {
        TokenStream {
            tokens: self.normalize(tokens),
            source_id: source_id.into(),
        }
    }
}

/// Normalize `tokens` with a fresh pipeline over `stopwords`.
pub fn normalize<S: AsRef<str>>(tokens: &[S], stopwords: &StopwordSet) -> TokenStream {
    TextPipeline::new(stopwords.clone()).stream(tokens, "")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<String>,
    pub source_id: String,
}

/// One sentence of a document: its token span and the raw text it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub span: Range<usize>,
    pub text: String,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub documents: Vec<TokenStream>,
    /// Per document, its sentences in order. Spans are non-overlapping and
    /// index into that document's tokens.
    pub sentences: Vec<Vec<Sentence>>,
    /// Invalid UTF-8 sequences replaced while loading.
    pub decode_warnings: usize,
}

impl Corpus {
    /// Build from `(source_id, raw_text)` pairs, preserving order.
    pub fn from_texts<I, S, T>(pipeline: &TextPipeline, texts: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let mut corpus = Corpus::default();
        for (id, text) in texts {
            let (doc, sentences) = index_document(pipeline, id.into(), text.as_ref());
            corpus.documents.push(doc);
            corpus.sentences.push(sentences);
        }
        corpus
    }

    /// Load every `.txt` file in `dir`, sorted by file name. Files are read
    /// and indexed in parallel; document order is always the sorted order.
    pub fn load_dir(pipeline: &TextPipeline, dir: &Path) -> Result<Self> {
        let files = list_text_files(dir)?;
        let loaded: Vec<(TokenStream, Vec<Sentence>, usize)> = files
            .par_iter()
            .map(|path| {
                let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
                let (text, warnings) = decode_lossy(&bytes);
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_default();
                let (doc, sentences) = index_document(pipeline, id, &text);
                Ok((doc, sentences, warnings))
            })
            .collect::<Result<_>>()?;

        let mut corpus = Corpus::default();
        for (doc, sentences, warnings) in loaded {
            corpus.documents.push(doc);
            corpus.sentences.push(sentences);
            corpus.decode_warnings += warnings;
        }
        if corpus.decode_warnings > 0 {
            log::warn!(
                "{}: replaced {} invalid UTF-8 sequence(s)",
                dir.display(),
                corpus.decode_warnings
            );
        }
        Ok(corpus)
    }

    pub fn is_empty(&self) -> bool {
        self.documents.iter().all(|d| d.tokens.is_empty())
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }

    /// Token slices of every sentence, in document then sentence order.
    pub fn sentence_tokens(&self) -> impl Iterator<Item = &[String]> + '_ {
        self.documents
            .iter()
            .zip(&self.sentences)
            .flat_map(|(doc, sents)| sents.iter().map(move |s| &doc.tokens[s.span.clone()]))
    }

    /// Sentences containing `term_tokens` contiguously, at most
    /// `max_sentences`, in document then sentence order. An empty term
    /// matches nothing.
    pub fn extract_term_sentences(&self, term_tokens: &[String], max_sentences: usize) -> Vec<SentenceMatch<'_>> {
        if term_tokens.is_empty() {
            return Vec::new();
        }
        self.documents
            .iter()
            .zip(&self.sentences)
            .flat_map(|(doc, sents)| {
                sents.iter().filter_map(move |s| {
                    let tokens = &doc.tokens[s.span.clone()];
                    find_subsequence(tokens, term_tokens).map(|offset| SentenceMatch {
                        source_id: &doc.source_id,
                        tokens,
                        text: &s.text,
                        offset,
                    })
                })
            })
            .take(max_sentences)
            .collect()
    }
}

/// A sentence that contains a term.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SentenceMatch<'a> {
    pub source_id: &'a str,
    pub tokens: &'a [String],
    pub text: &'a str,
    /// Token offset of the first occurrence of the term.
    pub offset: usize,
}

impl SentenceMatch<'_> {
    pub fn to_stream(&self) -> TokenStream {
        TokenStream {
            tokens: self.tokens.to_vec(),
            source_id: self.source_id.to_owned(),
        }
    }
}

/// Position of the first contiguous occurrence of `needle` in `haystack`.
pub fn find_subsequence<T: PartialEq>(haystack: &[T], needle: &[T]) -> Option<usize> {
    if needle.is_empty() || needle.len() > haystack.len() {
        return None;
    }
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn index_document(pipeline: &TextPipeline, id: String, text: &str) -> (TokenStream, Vec<Sentence>) {
    let mut tokens = Vec::new();
    let mut sentences = Vec::new();
    for raw in split_sentences(text) {
        let normalized = pipeline.process(raw);
        if normalized.is_empty() {
            continue;
        }
        let start = tokens.len();
        tokens.extend(normalized);
        sentences.push(Sentence {
            span: start..tokens.len(),
            text: raw.split_whitespace().collect::<Vec<_>>().join(" "),
        });
    }
    (TokenStream { tokens, source_id: id }, sentences)
}

fn list_text_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// One entry of a term list file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermLine {
    pub line: usize,
    pub term: String,
    pub label: Option<String>,
}

/// Parse a term list: `term<TAB>label` per line, label optional. Blank
/// lines and `#` comments are skipped.
pub fn parse_term_list(path: &Path, text: &str) -> Result<Vec<TermLine>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim_end_matches('\r');
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split('\t');
        let term = fields.next().unwrap_or("").trim();
        let label = fields.next().map(str::trim).filter(|l| !l.is_empty());
        if fields.next().is_some() {
            return Err(Error::parse(path, line, "expected at most two tab-separated fields"));
        }
        if term.is_empty() {
            return Err(Error::parse(path, line, "empty term"));
        }
        out.push(TermLine {
            line,
            term: term.to_owned(),
            label: label.map(str::to_owned),
        });
    }
    Ok(out)
}

pub fn read_term_list(path: &Path) -> Result<Vec<TermLine>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_term_list(path, &text)
}
