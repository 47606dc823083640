//! C ABI over `hypernym-core`.
//!
//! Every object crosses the boundary as an opaque pointer created by a
//! `*_new`/`*_load` function and released by the matching `*_free`.
//! Fallible calls return a [`HypStatus`]; on failure the message is
//! available from [`hyp_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use hypernym_core::classify::{rank_unsupervised, ClassifierModel, LabelSet, Measure, RankedPrediction};
use hypernym_core::corpus::{StopwordSet, TextPipeline};
use hypernym_core::embedding::EmbeddingTable;
use hypernym_core::termrep::{embed_label, embed_term, embed_term_external, TermRecord};
use hypernym_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Config = 5,
    Data = 6,
    BufferTooSmall = 7,
    Panic = 8,
    Internal = 9,
}

/// Ranking measure for [`hyp_rank_labels`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypMeasure {
    Cosine = 0,
    L1 = 1,
    L2 = 2,
}

impl From<HypMeasure> for Measure {
    fn from(m: HypMeasure) -> Self {
        match m {
            HypMeasure::Cosine => Measure::Cosine,
            HypMeasure::L1 => Measure::L1,
            HypMeasure::L2 => Measure::L2,
        }
    }
}

/// Tokenizer, stopword filter and stemmer.
pub struct HypPipeline(TextPipeline);

pub struct HypTable(EmbeddingTable);

/// Label set plus NUL-terminated copies of the identifiers.
pub struct HypLabels {
    labels: LabelSet,
    ids: Vec<CString>,
}

pub struct HypModel(ClassifierModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into().replace('\0', " ");
    let c = CString::new(message).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(err: &Error) -> HypStatus {
    match err {
        Error::Io { .. } => HypStatus::Io,
        Error::Parse { .. } => HypStatus::Parse,
        Error::Internal(_) => HypStatus::Internal,
        e if e.exit_code() == 2 => HypStatus::Config,
        _ => HypStatus::Data,
    }
}

struct Failure(HypStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn guard(f: impl FnOnce() -> FfiResult<()>) -> HypStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HypStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("panic inside hypernym");
            HypStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(HypStatus::NullArgument, format!("{name} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut()
        .ok_or_else(|| Failure(HypStatus::NullArgument, format!("{name} is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(HypStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(HypStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> FfiResult<&'a [f64]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(HypStatus::NullArgument, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize, needed: usize, name: &str) -> FfiResult<&'a mut [T]> {
    if len < needed {
        return Err(Failure(
            HypStatus::BufferTooSmall,
            format!("{name} holds {len} entries, {needed} required"),
        ));
    }
    if needed == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure(HypStatus::NullArgument, format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn write_ranking(ranking: &RankedPrediction, order: &mut [usize], scores: Option<&mut [f64]>) {
    order[..ranking.len()].copy_from_slice(&ranking.ranking);
    if let Some(scores) = scores {
        scores[..ranking.len()].copy_from_slice(&ranking.scores);
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn hyp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn hyp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Pipeline with the bundled English stopword list, or with the list in
/// `stopwords_path` when it is non-null.
///
/// # Safety
/// `stopwords_path` is null or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn hyp_pipeline_new(stopwords_path: *const c_char, out: *mut *mut HypPipeline) -> HypStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let stopwords = if stopwords_path.is_null() {
            StopwordSet::english()
        } else {
            StopwordSet::load(Path::new(text(stopwords_path, "stopwords_path")?))?
        };
        *out = boxed(HypPipeline(TextPipeline::new(stopwords)));
        Ok(())
    })
}

/// # Safety
/// `p` is null or a pipeline from [`hyp_pipeline_new`].
#[no_mangle]
pub unsafe extern "C" fn hyp_pipeline_free(p: *mut HypPipeline) {
    free(p)
}

/// Normalized tokens of `input`, joined by single spaces. Free the result
/// with [`hyp_string_free`].
///
/// # Safety
/// Pointers must be valid; `input` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hyp_normalize(
    p: *const HypPipeline,
    input: *const c_char,
    out: *mut *mut c_char,
) -> HypStatus {
    guard(|| {
        let p = arg(p, "pipeline")?;
        let out = out_ref(out, "out")?;
        let joined = p.0.process(text(input, "input")?).join(" ");
        *out = CString::new(joined)
            .map_err(|_| Failure(HypStatus::Internal, "token contains NUL".into()))?
            .into_raw();
        Ok(())
    })
}

/// Load a word2vec text file.
///
/// # Safety
/// `path` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn hyp_table_load(path: *const c_char, out: *mut *mut HypTable) -> HypStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(HypTable(EmbeddingTable::load(Path::new(text(path, "path")?))?));
        Ok(())
    })
}

/// # Safety
/// `t` is null or a table from [`hyp_table_load`].
#[no_mangle]
pub unsafe extern "C" fn hyp_table_free(t: *mut HypTable) {
    free(t)
}

/// Vector width, 0 for a null handle.
///
/// # Safety
/// `t` is null or a live table.
#[no_mangle]
pub unsafe extern "C" fn hyp_table_dim(t: *const HypTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.dim())
}

/// Number of rows, 0 for a null handle.
///
/// # Safety
/// `t` is null or a live table.
#[no_mangle]
pub unsafe extern "C" fn hyp_table_len(t: *const HypTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.len())
}

/// Copy the row for `token` into `vector` (capacity `cap`). `found` is set
/// to false and `vector` left untouched when the token has no row.
///
/// # Safety
/// Pointers must be valid; `vector` holds `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hyp_table_lookup(
    t: *const HypTable,
    token: *const c_char,
    vector: *mut f64,
    cap: usize,
    found: *mut bool,
) -> HypStatus {
    guard(|| {
        let t = arg(t, "table")?;
        let found = out_ref(found, "found")?;
        let dst = slice_mut(vector, cap, t.0.dim(), "vector")?;
        match t.0.lookup(text(token, "token")?) {
            Some(row) => {
                dst[..row.len()].copy_from_slice(row);
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}

/// Term vector: the mean of its in-vocabulary token rows. With `external`
/// set, a pre-composed row keyed by the term is preferred. `coverage`
/// receives the fraction of tokens found and may be null.
///
/// # Safety
/// Pointers must be valid; `vector` holds `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn hyp_embed_term(
    t: *const HypTable,
    p: *const HypPipeline,
    term: *const c_char,
    external: bool,
    vector: *mut f64,
    cap: usize,
    coverage: *mut f64,
) -> HypStatus {
    guard(|| {
        let t = arg(t, "table")?;
        let p = arg(p, "pipeline")?;
        let dst = slice_mut(vector, cap, t.0.dim(), "vector")?;
        let record = TermRecord::new(&p.0, text(term, "term")?, None);
        let v = if external {
            embed_term_external(&record, &t.0)
        } else {
            embed_term(&record, &t.0)
        };
        dst[..v.dim()].copy_from_slice(&v.vector);
        if let Some(c) = coverage.as_mut() {
            *c = v.coverage;
        }
        Ok(())
    })
}

/// Load labels, one per line.
///
/// # Safety
/// Pointers must be valid; `path` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hyp_labels_load(
    p: *const HypPipeline,
    path: *const c_char,
    out: *mut *mut HypLabels,
) -> HypStatus {
    guard(|| {
        let p = arg(p, "pipeline")?;
        let out = out_ref(out, "out")?;
        let labels = LabelSet::load(&p.0, Path::new(text(path, "path")?))?;
        let ids = labels
            .iter()
            .map(|l| CString::new(l.id.as_str()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| Failure(HypStatus::Parse, "label contains NUL".into()))?;
        *out = boxed(HypLabels { labels, ids });
        Ok(())
    })
}

/// # Safety
/// `l` is null or a label set from [`hyp_labels_load`].
#[no_mangle]
pub unsafe extern "C" fn hyp_labels_free(l: *mut HypLabels) {
    free(l)
}

/// # Safety
/// `l` is null or a live label set.
#[no_mangle]
pub unsafe extern "C" fn hyp_labels_len(l: *const HypLabels) -> usize {
    l.as_ref().map_or(0, |l| l.labels.len())
}

/// Identifier of label `index`, owned by the label set; null when out of
/// range.
///
/// # Safety
/// `l` is null or a live label set.
#[no_mangle]
pub unsafe extern "C" fn hyp_labels_id(l: *const HypLabels, index: usize) -> *const c_char {
    l.as_ref()
        .and_then(|l| l.ids.get(index))
        .map_or(ptr::null(), |c| c.as_ptr())
}

/// Number of labels literally contained in `term`. 1 puts the term in the
/// rule-decided subset; `matched` (may be null) then receives its label.
///
/// # Safety
/// Pointers must be valid; `term` is NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn hyp_labels_match(
    l: *const HypLabels,
    p: *const HypPipeline,
    term: *const c_char,
    count: *mut usize,
    matched: *mut usize,
) -> HypStatus {
    guard(|| {
        let l = arg(l, "labels")?;
        let p = arg(p, "pipeline")?;
        let count = out_ref(count, "count")?;
        let hits = l.labels.matches(&p.0.process(text(term, "term")?));
        *count = hits.len();
        if let (Some(m), [only]) = (matched.as_mut(), hits.as_slice()) {
            *m = *only;
        }
        Ok(())
    })
}

/// Rank every label by `measure` between the term vector and the label
/// vectors, best first. `order` and `scores` (may be null) hold `cap`
/// entries, at least the number of labels. Distances are reported negated.
///
/// # Safety
/// Pointers must be valid; buffers hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn hyp_rank_labels(
    t: *const HypTable,
    l: *const HypLabels,
    term_vector: *const f64,
    dim: usize,
    measure: HypMeasure,
    order: *mut usize,
    scores: *mut f64,
    cap: usize,
) -> HypStatus {
    guard(|| {
        let t = arg(t, "table")?;
        let l = arg(l, "labels")?;
        let x = slice(term_vector, dim, "term_vector")?;
        let k = l.labels.len();
        let order = slice_mut(order, cap, k, "order")?;
        let scores = if scores.is_null() {
            None
        } else {
            Some(slice_mut(scores, cap, k, "scores")?)
        };
        let label_vectors: Vec<Vec<f64>> = l.labels.iter().map(|lb| embed_label(&lb.tokens, &t.0).vector).collect();
        let ranking = rank_unsupervised(x, &label_vectors, measure.into())?;
        write_ranking(&ranking, order, scores);
        Ok(())
    })
}

/// Load a trained classifier file.
///
/// # Safety
/// `path` is NUL-terminated; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn hyp_model_load(path: *const c_char, out: *mut *mut HypModel) -> HypStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = boxed(HypModel(ClassifierModel::load(Path::new(text(path, "path")?))?));
        Ok(())
    })
}

/// # Safety
/// `m` is null or a model from [`hyp_model_load`].
#[no_mangle]
pub unsafe extern "C" fn hyp_model_free(m: *mut HypModel) {
    free(m)
}

/// # Safety
/// `m` is null or a live model.
#[no_mangle]
pub unsafe extern "C" fn hyp_model_dim(m: *const HypModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.dim())
}

/// # Safety
/// `m` is null or a live model.
#[no_mangle]
pub unsafe extern "C" fn hyp_model_num_labels(m: *const HypModel) -> usize {
    m.as_ref().map_or(0, |m| m.0.labels().len())
}

/// Rank the model's labels for feature vector `x`, best first.
///
/// # Safety
/// Pointers must be valid; buffers hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn hyp_model_rank(
    m: *const HypModel,
    x: *const f64,
    dim: usize,
    order: *mut usize,
    scores: *mut f64,
    cap: usize,
) -> HypStatus {
    guard(|| {
        let m = arg(m, "model")?;
        let x = slice(x, dim, "x")?;
        let k = m.0.labels().len();
        let order = slice_mut(order, cap, k, "order")?;
        let scores = if scores.is_null() {
            None
        } else {
            Some(slice_mut(scores, cap, k, "scores")?)
        };
        let ranking = m.0.rank(x)?;
        write_ranking(&ranking, order, scores);
        Ok(())
    })
}

/// Cosine similarity of two vectors of length `len`; 0 when either is the
/// zero vector.
///
/// # Safety
/// `a` and `b` hold `len` doubles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn hyp_cosine_similarity(a: *const f64, b: *const f64, len: usize, out: *mut f64) -> HypStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = hypernym_core::classify::cosine_similarity(slice(a, len, "a")?, slice(b, len, "b")?)?;
        Ok(())
    })
}
