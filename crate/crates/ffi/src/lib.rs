//! C interface to the efdd engine.
//!
//! Objects are opaque handles created by `efdd_*` constructors and released
//! with the matching `*_free` function. Fallible calls return an
//! [`EfddStatus`]; the message of the most recent failure on the calling
//! thread is available from [`efdd_last_error`].

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use efdd::diagnosis::{
    extract_diagnosis, render_dot, render_text, train_tree, DecisionTree, Hyperparams,
    SourceLookup, SourceRoot,
};
use efdd::features::{extract_features, FeatureClass, FeatureMatrix};
use efdd::localize::{localize, Aggregator, Ranking};
use efdd::sbfl::Metric;
use efdd::trace::{load_trace_dir, Verdict};
use efdd::Error;

/// Result of a fallible call. Values 3 to 7 match the command-line exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfddStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Format = 4,
    InsufficientLabels = 5,
    Consistency = 6,
    InvalidArgument = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfddVerdict {
    Pass = 0,
    Fail = 1,
}

/// Labelled feature matrix.
pub struct EfddMatrix(FeatureMatrix);

/// Ranked list of suspicious lines.
pub struct EfddRanking(Ranking);

/// Trained decision tree.
pub struct EfddTree(DecisionTree);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(EfddStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            3 => EfddStatus::Io,
            4 => EfddStatus::Format,
            5 => EfddStatus::InsufficientLabels,
            6 => EfddStatus::Consistency,
            _ => EfddStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> FfiResult<()>) -> EfddStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => EfddStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            EfddStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(Failure(EfddStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure(
            EfddStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> FfiResult<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> FfiResult<&'a T> {
    p.as_ref()
        .ok_or_else(|| Failure(EfddStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> FfiResult<&'a mut T> {
    unsafe { p.as_mut() }.ok_or_else(|| Failure(EfddStatus::NullPointer, format!("{what} is null")))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn efdd_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and must not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn efdd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Reads every `*.trace` file in `dir` and extracts the feature matrix.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_from_traces(
    dir: *const c_char,
    out: *mut *mut EfddMatrix,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let traces = load_trace_dir(text(dir, "dir")?)?;
        let m = extract_features(&traces)?;
        *out = Box::into_raw(Box::new(EfddMatrix(m)));
        Ok(())
    })
}

/// Loads a feature matrix CSV.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_from_csv(
    path: *const c_char,
    out: *mut *mut EfddMatrix,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = FeatureMatrix::from_path(text(path, "path")?)?;
        *out = Box::into_raw(Box::new(EfddMatrix(m)));
        Ok(())
    })
}

/// Writes the matrix as CSV.
///
/// # Safety
/// `matrix` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_save_csv(
    matrix: *const EfddMatrix,
    path: *const c_char,
) -> EfddStatus {
    guard(|| {
        let m = handle(matrix, "matrix")?;
        m.0.to_path(text(path, "path")?)?;
        Ok(())
    })
}

/// Number of runs, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_run_count(matrix: *const EfddMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.runs().len())
}

/// Number of features, or 0 for a null handle.
///
/// # Safety
/// `matrix` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_feature_count(matrix: *const EfddMatrix) -> usize {
    matrix.as_ref().map_or(0, |m| m.0.universe().len())
}

/// # Safety
/// `matrix` must be null or a handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn efdd_matrix_free(matrix: *mut EfddMatrix) {
    if !matrix.is_null() {
        drop(Box::from_raw(matrix));
    }
}

/// Ranks source lines by suspiciousness.
///
/// `metric` is one of tarantula, ochiai, dstar, naish2, gp13. `dstar_exponent`
/// applies to dstar only. `classes` is a comma-separated class list and
/// `aggregator` one of max, mean, median; null selects all classes and max.
///
/// # Safety
/// String arguments must be null or NUL-terminated, `matrix` a live handle and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_localize(
    matrix: *const EfddMatrix,
    metric: *const c_char,
    dstar_exponent: u32,
    classes: *const c_char,
    aggregator: *const c_char,
    out: *mut *mut EfddRanking,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = handle(matrix, "matrix")?;
        let metric = Metric::parse(text(metric, "metric")?, dstar_exponent)?;
        let classes: BTreeSet<FeatureClass> = match optional_text(classes, "classes")? {
            Some(list) => FeatureClass::parse_list(list)?,
            None => FeatureClass::ALL.into_iter().collect(),
        };
        let aggregator: Aggregator = match optional_text(aggregator, "aggregator")? {
            Some(name) => name.parse()?,
            None => Aggregator::Max,
        };
        let r = localize(&m.0, metric, &classes, aggregator)?;
        *out = Box::into_raw(Box::new(EfddRanking(r)));
        Ok(())
    })
}

/// Number of ranked lines, or 0 for a null handle.
///
/// # Safety
/// `ranking` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efdd_ranking_len(ranking: *const EfddRanking) -> usize {
    ranking.as_ref().map_or(0, |r| r.0.len())
}

/// Score and average rank of entry `index`, in listed order.
///
/// # Safety
/// `ranking` must be a live handle; `score` and `rank` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn efdd_ranking_entry(
    ranking: *const EfddRanking,
    index: usize,
    score: *mut f64,
    rank: *mut f64,
) -> EfddStatus {
    guard(|| {
        let r = handle(ranking, "ranking")?;
        let e = r.0.entries.get(index).ok_or_else(|| {
            Failure(
                EfddStatus::InvalidArgument,
                format!("index {index} out of range"),
            )
        })?;
        *out_ptr(score, "score")? = e.score;
        *out_ptr(rank, "rank")? = e.average_rank;
        Ok(())
    })
}

/// `file:line` of entry `index` as a new string, or null when out of range.
/// Release it with [`efdd_string_free`].
///
/// # Safety
/// `ranking` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn efdd_ranking_location(
    ranking: *const EfddRanking,
    index: usize,
) -> *mut c_char {
    match ranking.as_ref().and_then(|r| r.0.entries.get(index)) {
        Some(e) => owned_string(e.loc.to_string()),
        None => ptr::null_mut(),
    }
}

/// Writes the ranking as CSV.
///
/// # Safety
/// `ranking` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn efdd_ranking_save_csv(
    ranking: *const EfddRanking,
    path: *const c_char,
) -> EfddStatus {
    guard(|| {
        let r = handle(ranking, "ranking")?;
        let path = text(path, "path")?;
        let mut bytes = Vec::new();
        r.0.write_csv(&mut bytes)?;
        std::fs::write(path, bytes).map_err(|e| Failure(EfddStatus::Io, format!("{path}: {e}")))
    })
}

/// # Safety
/// `ranking` must be null or a handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn efdd_ranking_free(ranking: *mut EfddRanking) {
    if !ranking.is_null() {
        drop(Box::from_raw(ranking));
    }
}

/// Trains a tree. `max_depth` 0 means unbounded.
///
/// # Safety
/// `matrix` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_train(
    matrix: *const EfddMatrix,
    max_depth: usize,
    min_samples_split: usize,
    out: *mut *mut EfddTree,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let m = handle(matrix, "matrix")?;
        let params = Hyperparams {
            max_depth: (max_depth > 0).then_some(max_depth),
            min_samples_split,
        };
        let tree = train_tree(&m.0, params)?;
        *out = Box::into_raw(Box::new(EfddTree(tree)));
        Ok(())
    })
}

/// # Safety
/// `tree` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_save(tree: *const EfddTree, path: *const c_char) -> EfddStatus {
    guard(|| {
        handle(tree, "tree")?.0.save(text(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_load(
    path: *const c_char,
    out: *mut *mut EfddTree,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tree = DecisionTree::load(text(path, "path")?)?;
        *out = Box::into_raw(Box::new(EfddTree(tree)));
        Ok(())
    })
}

/// Predicts a verdict for every run of `matrix`. Features the tree was not
/// trained on are dropped and missing ones take their default value.
/// `verdicts` must hold at least `capacity` entries, and `capacity` must be
/// at least the run count.
///
/// # Safety
/// `tree` and `matrix` must be live handles; `verdicts` must point to
/// `capacity` writable elements.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_predict(
    tree: *const EfddTree,
    matrix: *const EfddMatrix,
    verdicts: *mut EfddVerdict,
    capacity: usize,
) -> EfddStatus {
    guard(|| {
        let tree = handle(tree, "tree")?;
        let m = handle(matrix, "matrix")?;
        if verdicts.is_null() {
            return Err(Failure(EfddStatus::NullPointer, "verdicts is null".into()));
        }
        let runs = m.0.runs().len();
        if capacity < runs {
            return Err(Failure(
                EfddStatus::BufferTooSmall,
                format!("need room for {runs} verdicts, got {capacity}"),
            ));
        }
        let predicted = tree.0.predict_matrix(&m.0.project(&tree.0.universe))?;
        let out = std::slice::from_raw_parts_mut(verdicts, runs);
        for (slot, v) in out.iter_mut().zip(predicted) {
            *slot = match v {
                Verdict::Pass => EfddVerdict::Pass,
                Verdict::Fail => EfddVerdict::Fail,
            };
        }
        Ok(())
    })
}

/// Renders the failure paths as text. `source_root`, when not null, is used
/// to quote source lines. Release the result with [`efdd_string_free`].
///
/// # Safety
/// `tree` must be a live handle, `source_root` null or NUL-terminated, `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_diagnosis(
    tree: *const EfddTree,
    source_root: *const c_char,
    out: *mut *mut c_char,
) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let tree = handle(tree, "tree")?;
        let root = optional_text(source_root, "source_root")?.map(|r| SourceRoot(r.into()));
        let lookup = root.as_ref().map(|r| r as &dyn SourceLookup);
        *out = owned_string(render_text(&extract_diagnosis(&tree.0), lookup));
        Ok(())
    })
}

/// Graphviz rendering of the tree. Release the result with
/// [`efdd_string_free`].
///
/// # Safety
/// `tree` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_dot(tree: *const EfddTree, out: *mut *mut c_char) -> EfddStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = owned_string(render_dot(&handle(tree, "tree")?.0));
        Ok(())
    })
}

/// # Safety
/// `tree` must be null or a handle that is not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn efdd_tree_free(tree: *mut EfddTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statuses_follow_exit_codes() {
        let io = Error::Io {
            path: "x".into(),
            source: std::io::Error::other("gone"),
        };
        assert_eq!(Failure::from(io).0 as i32, 3);
        let labels = Error::InsufficientLabels {
            passed: 1,
            failed: 0,
        };
        assert_eq!(Failure::from(labels).0, EfddStatus::InsufficientLabels);
        assert_eq!(
            Failure::from(Error::Consistency("c".into())).0,
            EfddStatus::Consistency
        );
        assert_eq!(
            Failure::from(Error::EmptyRanking("e".into())).0,
            EfddStatus::InvalidArgument
        );
    }

    #[test]
    fn guard_records_message_and_catches_panics() {
        assert_eq!(
            guard(|| Err(Failure(EfddStatus::Format, "bad\0input".into()))),
            EfddStatus::Format
        );
        let msg = unsafe { CStr::from_ptr(efdd_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "bad input");
        assert_eq!(guard(|| panic!("boom")), EfddStatus::Panic);
    }
}
