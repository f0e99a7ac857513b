//! C ABI over `caa-core`.
//!
//! Every fallible function returns a [`CaaStatus`]; on failure the message is
//! kept per thread and read with [`caa_last_error_message`]. Handles are
//! opaque, created by `*_load`/`*_read`/`*_ingest` and released by the
//! matching `*_free`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use caa_core::classifier::{load_model, TrainedConnotationModel};
use caa_core::context::context_loss;
use caa_core::features::{read_features, FeatureFile};
use caa_core::lexicon::{
    aggregate_and_ternarize, filter_annotators, ingest_file, krippendorff_alpha, pairwise_agreement, Dimension,
    DistanceMetric, JudgementMapping, Lexicon,
};
use caa_core::stats::paired_ttest;
use caa_core::Error;
use ndarray::Array1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    InvalidArgument = 5,
    InsufficientData = 6,
    OutOfRange = 7,
    Panic = 8,
    Other = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaaMetric {
    Interval = 0,
    Nominal = 1,
}

/// Result of a two-sided paired t-test.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CaaTTest {
    pub n: usize,
    pub mean_diff: f64,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    /// Nonzero when all differences are equal.
    pub zero_variance: u8,
}

/// Annotated lexicons, one per (language, dimension).
pub struct CaaLexiconSet {
    lexicons: Vec<Lexicon>,
}

pub struct CaaModel {
    model: TrainedConnotationModel,
}

pub struct CaaFeatureFile {
    file: FeatureFile,
    keys: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CaaStatus {
    match err {
        Error::Io { .. } => CaaStatus::Io,
        Error::Csv(_)
        | Error::Json(_)
        | Error::Row { .. }
        | Error::FeatureRecord { .. }
        | Error::FeatureFormat(_)
        | Error::ModelFormat(_)
        | Error::Conllu { .. } => CaaStatus::Format,
        Error::InvalidLanguage(_)
        | Error::UnknownDimension(_)
        | Error::InvalidParameter(_)
        | Error::KeyMismatch(_)
        | Error::Config(_) => CaaStatus::InvalidArgument,
        Error::TooFewJudgements { .. }
        | Error::NotAggregated(_)
        | Error::InsufficientData(_)
        | Error::MissingClass(_)
        | Error::BelowMinVerbs { .. } => CaaStatus::InsufficientData,
        _ => CaaStatus::Other,
    }
}

struct Failure(CaaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> CaaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            CaaStatus::Ok
        }
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            CaaStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(CaaStatus::NullPointer, format!("{what} is null")))
}

fn string_arg(p: *const c_char, what: &str) -> Result<String, Failure> {
    if p.is_null() {
        return Err(Failure(CaaStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: non-null and NUL-terminated per the API contract.
    unsafe { CStr::from_ptr(p) }
        .to_str()
        .map(str::to_owned)
        .map_err(|_| Failure(CaaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(CaaStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn lexicon_at<'a>(set: *const CaaLexiconSet, index: usize) -> Result<&'a Lexicon, Failure> {
    let set: &'a CaaLexiconSet = non_null(set, "lexicon set")?;
    set.lexicons
        .get(index)
        .ok_or_else(|| Failure(CaaStatus::OutOfRange, format!("lexicon index {index} of {}", set.lexicons.len())))
}

/// Message for the last failure on this thread, or null after a success.
/// Valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn caa_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

// ---------------------------------------------------------------- lexicons

/// Reads an annotation CSV into one lexicon per (language, dimension).
#[no_mangle]
pub extern "C" fn caa_lexicon_set_ingest(path: *const c_char, out: *mut *mut CaaLexiconSet) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let path = PathBuf::from(string_arg(path, "path")?);
        let lexicons = ingest_file(&path, &JudgementMapping::default())?;
        // SAFETY: checked non-null above.
        unsafe { *out = Box::into_raw(Box::new(CaaLexiconSet { lexicons })) };
        Ok(())
    })
}

/// Removes outlier annotators in place. `removed_fraction` may be null.
#[no_mangle]
pub extern "C" fn caa_lexicon_set_filter(set: *mut CaaLexiconSet, removed_fraction: *mut f64) -> CaaStatus {
    guard(|| {
        // SAFETY: handle from this library, not shared across threads.
        let set = unsafe { set.as_mut() }.ok_or_else(|| Failure(CaaStatus::NullPointer, "lexicon set is null".into()))?;
        let (filtered, report) = filter_annotators(&set.lexicons);
        set.lexicons = filtered;
        if !removed_fraction.is_null() {
            // SAFETY: checked non-null.
            unsafe { *removed_fraction = report.removed_fraction() };
        }
        Ok(())
    })
}

/// Aggregates judgements and assigns ternary labels, in place.
#[no_mangle]
pub extern "C" fn caa_lexicon_set_aggregate(set: *mut CaaLexiconSet) -> CaaStatus {
    guard(|| {
        // SAFETY: as in caa_lexicon_set_filter.
        let set = unsafe { set.as_mut() }.ok_or_else(|| Failure(CaaStatus::NullPointer, "lexicon set is null".into()))?;
        set.lexicons = set.lexicons.iter().map(aggregate_and_ternarize).collect::<Result<_, _>>()?;
        Ok(())
    })
}

/// Number of lexicons, 0 for null.
#[no_mangle]
pub extern "C" fn caa_lexicon_set_len(set: *const CaaLexiconSet) -> usize {
    // SAFETY: null or a live handle.
    unsafe { set.as_ref() }.map_or(0, |s| s.lexicons.len())
}

/// Index of the lexicon for `language` (e.g. "en") and `dimension`
/// ("power", "agency", "sent_subj", "sent_obj").
#[no_mangle]
pub extern "C" fn caa_lexicon_set_find(
    set: *const CaaLexiconSet,
    language: *const c_char,
    dimension: *const c_char,
    index: *mut usize,
) -> CaaStatus {
    guard(|| {
        out_ptr(index, "index")?;
        let set = non_null(set, "lexicon set")?;
        let language = string_arg(language, "language")?;
        let dimension: Dimension = string_arg(dimension, "dimension")?.parse()?;
        let i = set
            .lexicons
            .iter()
            .position(|l| l.language.as_str() == language && l.dimension == dimension)
            .ok_or_else(|| Failure(CaaStatus::OutOfRange, format!("no {language} {dimension} lexicon")))?;
        // SAFETY: checked non-null.
        unsafe { *index = i };
        Ok(())
    })
}

/// Number of instances in lexicon `index`.
#[no_mangle]
pub extern "C" fn caa_lexicon_instance_count(set: *const CaaLexiconSet, index: usize, out: *mut usize) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let n = lexicon_at(set, index)?.len();
        // SAFETY: checked non-null.
        unsafe { *out = n };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn caa_lexicon_alpha(
    set: *const CaaLexiconSet,
    index: usize,
    metric: CaaMetric,
    out: *mut f64,
) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let metric = match metric {
            CaaMetric::Interval => DistanceMetric::Interval,
            CaaMetric::Nominal => DistanceMetric::Nominal,
        };
        let alpha = krippendorff_alpha(lexicon_at(set, index)?, metric)?;
        // SAFETY: checked non-null.
        unsafe { *out = alpha.value };
        Ok(())
    })
}

/// Pairwise agreement; with `lenient` nonzero, neutral-versus-polar pairs
/// count as agreeing.
#[no_mangle]
pub extern "C" fn caa_lexicon_pairwise(set: *const CaaLexiconSet, index: usize, lenient: u8, out: *mut f64) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let v = pairwise_agreement(lexicon_at(set, index)?, lenient != 0)?;
        // SAFETY: checked non-null.
        unsafe { *out = v };
        Ok(())
    })
}

/// Percentage of instances whose label differs from their verb's label.
/// The set must be aggregated first.
#[no_mangle]
pub extern "C" fn caa_lexicon_context_loss(set: *const CaaLexiconSet, index: usize, out: *mut f64) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let v = context_loss(lexicon_at(set, index)?)?;
        // SAFETY: checked non-null.
        unsafe { *out = v };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn caa_lexicon_set_free(set: *mut CaaLexiconSet) {
    if !set.is_null() {
        // SAFETY: created by Box::into_raw in caa_lexicon_set_ingest.
        drop(unsafe { Box::from_raw(set) });
    }
}

// ---------------------------------------------------------------- models

#[no_mangle]
pub extern "C" fn caa_model_load(path: *const c_char, out: *mut *mut CaaModel) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let model = load_model(&PathBuf::from(string_arg(path, "path")?))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(CaaModel { model })) };
        Ok(())
    })
}

/// Feature dimension the model expects, 0 for null.
#[no_mangle]
pub extern "C" fn caa_model_dim(model: *const CaaModel) -> usize {
    // SAFETY: null or a live handle.
    unsafe { model.as_ref() }.map_or(0, |m| m.model.dim())
}

/// Predicts a label in {-1, 0, 1} for one feature vector of length
/// `len`. `probabilities`, when not null, receives 3 values ordered
/// negative, neutral, positive.
#[no_mangle]
pub extern "C" fn caa_model_predict(
    model: *const CaaModel,
    features: *const f32,
    len: usize,
    label: *mut i8,
    probabilities: *mut f64,
) -> CaaStatus {
    guard(|| {
        out_ptr(label, "label")?;
        let model = &non_null(model, "model")?.model;
        if features.is_null() {
            return Err(Failure(CaaStatus::NullPointer, "features is null".into()));
        }
        if len != model.dim() {
            return Err(Failure(
                CaaStatus::InvalidArgument,
                format!("{len} features, model expects {}", model.dim()),
            ));
        }
        // SAFETY: non-null with `len` readable elements per the contract.
        let x = unsafe { std::slice::from_raw_parts(features, len) };
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Failure(CaaStatus::InvalidArgument, "non-finite feature value".into()));
        }
        let x = Array1::from_iter(x.iter().map(|&v| f64::from(v)));
        // SAFETY: checked non-null.
        unsafe { *label = model.predict(x.view()).value() };
        if !probabilities.is_null() {
            let p = model.probabilities(x.view());
            // SAFETY: caller provides room for 3 values.
            let dst = unsafe { std::slice::from_raw_parts_mut(probabilities, 3) };
            dst.copy_from_slice(p.as_slice().expect("contiguous"));
        }
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn caa_model_free(model: *mut CaaModel) {
    if !model.is_null() {
        // SAFETY: created by Box::into_raw in caa_model_load.
        drop(unsafe { Box::from_raw(model) });
    }
}

// ---------------------------------------------------------------- features

#[no_mangle]
pub extern "C" fn caa_feature_file_read(path: *const c_char, out: *mut *mut CaaFeatureFile) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let file = read_features(&PathBuf::from(string_arg(path, "path")?))?;
        let keys = file
            .records
            .iter()
            .map(|r| CString::new(r.key.as_str()))
            .collect::<Result<_, _>>()
            .map_err(|_| Failure(CaaStatus::Format, "feature key contains NUL".into()))?;
        // SAFETY: checked non-null.
        unsafe { *out = Box::into_raw(Box::new(CaaFeatureFile { file, keys })) };
        Ok(())
    })
}

/// Number of records, 0 for null.
#[no_mangle]
pub extern "C" fn caa_feature_file_len(file: *const CaaFeatureFile) -> usize {
    // SAFETY: null or a live handle.
    unsafe { file.as_ref() }.map_or(0, |f| f.file.len())
}

/// Vector length, 0 for null.
#[no_mangle]
pub extern "C" fn caa_feature_file_dim(file: *const CaaFeatureFile) -> usize {
    // SAFETY: null or a live handle.
    unsafe { file.as_ref() }.map_or(0, |f| f.file.header.dim)
}

/// Borrowed key of record `index`, valid while the handle lives.
#[no_mangle]
pub extern "C" fn caa_feature_file_key(file: *const CaaFeatureFile, index: usize, out: *mut *const c_char) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let f = non_null(file, "feature file")?;
        let key = f
            .keys
            .get(index)
            .ok_or_else(|| Failure(CaaStatus::OutOfRange, format!("record {index} of {}", f.keys.len())))?;
        // SAFETY: checked non-null.
        unsafe { *out = key.as_ptr() };
        Ok(())
    })
}

/// Borrowed vector of record `index` (`dim` floats), valid while the handle
/// lives.
#[no_mangle]
pub extern "C" fn caa_feature_file_vector(
    file: *const CaaFeatureFile,
    index: usize,
    out: *mut *const f32,
) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        let f = non_null(file, "feature file")?;
        let r = f
            .file
            .records
            .get(index)
            .ok_or_else(|| Failure(CaaStatus::OutOfRange, format!("record {index} of {}", f.file.len())))?;
        // SAFETY: checked non-null.
        unsafe { *out = r.vector.as_ptr() };
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn caa_feature_file_free(file: *mut CaaFeatureFile) {
    if !file.is_null() {
        // SAFETY: created by Box::into_raw in caa_feature_file_read.
        drop(unsafe { Box::from_raw(file) });
    }
}

// ---------------------------------------------------------------- statistics

/// Paired t-test of `a[i] - b[i]` over `n` pairs.
#[no_mangle]
pub extern "C" fn caa_paired_ttest(a: *const f64, b: *const f64, n: usize, out: *mut CaaTTest) -> CaaStatus {
    guard(|| {
        out_ptr(out, "out")?;
        if a.is_null() || b.is_null() {
            return Err(Failure(CaaStatus::NullPointer, "sample is null".into()));
        }
        // SAFETY: both non-null with `n` readable elements per the contract.
        let (a, b) = unsafe { (std::slice::from_raw_parts(a, n), std::slice::from_raw_parts(b, n)) };
        let t = paired_ttest(a, b)?;
        // SAFETY: checked non-null.
        unsafe {
            *out = CaaTTest {
                n: t.n,
                mean_diff: t.mean_diff,
                t: t.t,
                df: t.df,
                p: t.p,
                zero_variance: u8::from(t.zero_variance),
            }
        };
        Ok(())
    })
}
