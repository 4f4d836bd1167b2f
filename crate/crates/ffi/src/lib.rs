//! C ABI over the inquest library.
//!
//! Objects cross the boundary as opaque handles that the caller releases
//! with the matching `*_free` function. Every fallible call returns an
//! [`InqStatus`]; on failure [`inq_last_error`] describes the problem.
//! Strings returned through out-parameters are owned by the caller and
//! released with [`inq_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use inquest::dataset::load_dataset;
use inquest::evaluate::{evaluate_all, EvaluationResult};
use inquest::extract::extract_metrics;
use inquest::model::{Dataset, RunId};
use inquest::prioritize::apply_rule;
use inquest::rules::{builtin_catalog, generate_rules, AssumptionCatalog, RuleSet};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InqStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    /// Input could not be read or parsed.
    Input = 3,
    /// Input was read but violates the data model.
    Invalid = 4,
    NotFound = 5,
    /// A computation over valid input failed, e.g. a missing metric.
    Evaluation = 6,
    Panic = 7,
}

pub struct InqDataset(Dataset);

pub struct InqRuleSet(RuleSet);

pub struct InqEvaluation {
    results: Vec<EvaluationResult>,
    rule_ids: Vec<CString>,
    run_ids: Vec<CString>,
}

/// One evaluation. `category` is the ASCII letter A, B, C or D.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InqEvaluationRecord {
    pub category: u8,
    pub effective: bool,
    pub degenerate: bool,
    pub run_order: u32,
    pub effectiveness: f64,
    pub effort_fraction: f64,
    pub selected_count: usize,
    pub defect_prone_count: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct InqSourceMetrics {
    pub loc: usize,
    pub method_count: usize,
    pub mean_method_length: f64,
    pub cyclomatic_max: u32,
    pub cyclomatic_mean: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(InqStatus, String);

impl Failure {
    fn new(status: InqStatus, message: impl ToString) -> Self {
        Failure(status, message.to_string())
    }
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InqStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => InqStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            InqStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(InqStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(InqStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| Failure::new(InqStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(InqStatus::NullArgument, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: String) -> Result<CString, Failure> {
    CString::new(s).map_err(|_| Failure::new(InqStatus::InvalidUtf8, "output contains a NUL byte"))
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn inq_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn inq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn inq_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Load and validate a dataset directory.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_dataset_load(path: *const c_char, out: *mut *mut InqDataset) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let d = load_dataset(Path::new(path)).map_err(|e| {
            let status = match e {
                inquest::dataset::IngestError::Invalid(_) | inquest::dataset::IngestError::NoRuns => InqStatus::Invalid,
                inquest::dataset::IngestError::MissingFile(_) => InqStatus::NotFound,
                _ => InqStatus::Input,
            };
            Failure::new(status, e)
        })?;
        *out = Box::into_raw(Box::new(InqDataset(d)));
        Ok(())
    })
}

/// # Safety
/// `d` must come from [`inq_dataset_load`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn inq_dataset_free(d: *mut InqDataset) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Number of runs; 0 for a null handle.
///
/// # Safety
/// `d` must be null or a live dataset handle.
#[no_mangle]
pub unsafe extern "C" fn inq_dataset_run_count(d: *const InqDataset) -> usize {
    d.as_ref().map_or(0, |d| d.0.runs.len())
}

/// Rules of a bundled catalog (`table1` or `casestudy2`).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_builtin(name: *const c_char, out: *mut *mut InqRuleSet) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let catalog = builtin_catalog(name)
            .ok_or_else(|| Failure::new(InqStatus::NotFound, format!("no builtin catalog {name}")))?;
        let set = generate_rules(&catalog).map_err(|e| Failure::new(InqStatus::Invalid, e))?;
        *out = Box::into_raw(Box::new(InqRuleSet(set)));
        Ok(())
    })
}

/// Rules generated from an assumption catalog given as JSON text.
///
/// # Safety
/// `catalog_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_generate(catalog_json: *const c_char, out: *mut *mut InqRuleSet) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(catalog_json, "catalog_json")?;
        let catalog = AssumptionCatalog::from_json(text).map_err(|e| Failure::new(InqStatus::Input, e))?;
        let set = generate_rules(&catalog).map_err(|e| Failure::new(InqStatus::Invalid, e))?;
        *out = Box::into_raw(Box::new(InqRuleSet(set)));
        Ok(())
    })
}

/// A rule set previously serialized with [`inq_ruleset_to_json`].
///
/// # Safety
/// `rules_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_load(rules_json: *const c_char, out: *mut *mut InqRuleSet) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let text = str_arg(rules_json, "rules_json")?;
        let set = RuleSet::from_json(text).map_err(|e| Failure::new(InqStatus::Input, e))?;
        *out = Box::into_raw(Box::new(InqRuleSet(set)));
        Ok(())
    })
}

/// Number of rules; 0 for a null handle.
///
/// # Safety
/// `r` must be null or a live rule set handle.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_len(r: *const InqRuleSet) -> usize {
    r.as_ref().map_or(0, |r| r.0.len())
}

/// # Safety
/// `r` must be a live rule set handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_to_json(r: *const InqRuleSet, out: *mut *mut c_char) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = handle(r, "rules")?;
        *out = c_string(r.0.to_json())?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `r` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn inq_ruleset_free(r: *mut InqRuleSet) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Evaluate every rule on every run, ordered by run then rule.
///
/// # Safety
/// `d` and `r` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluate(
    d: *const InqDataset,
    r: *const InqRuleSet,
    out: *mut *mut InqEvaluation,
) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (d, r) = (handle(d, "dataset")?, handle(r, "rules")?);
        let results = evaluate_all(&r.0.rules, &d.0).map_err(|e| Failure::new(InqStatus::Evaluation, e))?;
        let rule_ids = results
            .iter()
            .map(|e| c_string(e.rule_id.to_string()))
            .collect::<Result<_, _>>()?;
        let run_ids = results
            .iter()
            .map(|e| c_string(e.run_id.to_string()))
            .collect::<Result<_, _>>()?;
        *out = Box::into_raw(Box::new(InqEvaluation {
            results,
            rule_ids,
            run_ids,
        }));
        Ok(())
    })
}

/// # Safety
/// `e` must be null or a live evaluation handle.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluation_len(e: *const InqEvaluation) -> usize {
    e.as_ref().map_or(0, |e| e.results.len())
}

/// Copy evaluation `index` into `out`.
///
/// # Safety
/// `e` must be a live evaluation handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluation_get(
    e: *const InqEvaluation,
    index: usize,
    out: *mut InqEvaluationRecord,
) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let e = handle(e, "evaluation")?;
        let r = e
            .results
            .get(index)
            .ok_or_else(|| Failure::new(InqStatus::NotFound, format!("index {index} out of range")))?;
        *out = InqEvaluationRecord {
            category: r.category.letter() as u8,
            effective: r.effective,
            degenerate: r.degenerate,
            run_order: r.run_order,
            effectiveness: r.effectiveness,
            effort_fraction: r.effort_fraction,
            selected_count: r.selected_count,
            defect_prone_count: r.defect_prone_count,
        };
        Ok(())
    })
}

/// Rule id of evaluation `index`, owned by the handle; null when out of
/// range.
///
/// # Safety
/// `e` must be null or a live evaluation handle.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluation_rule_id(e: *const InqEvaluation, index: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.rule_ids.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Run id of evaluation `index`, owned by the handle; null when out of
/// range.
///
/// # Safety
/// `e` must be null or a live evaluation handle.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluation_run_id(e: *const InqEvaluation, index: usize) -> *const c_char {
    e.as_ref()
        .and_then(|e| e.run_ids.get(index))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// # Safety
/// `e` must come from [`inq_evaluate`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn inq_evaluation_free(e: *mut InqEvaluation) {
    if !e.is_null() {
        drop(Box::from_raw(e));
    }
}

/// Selections of every rule on one run as CSV with columns
/// `rule_id,run_id,rank,unit_id`.
///
/// # Safety
/// `d` and `r` must be live handles, `run_id` a NUL-terminated string and
/// `out` writable.
#[no_mangle]
pub unsafe extern "C" fn inq_prioritize_csv(
    d: *const InqDataset,
    r: *const InqRuleSet,
    run_id: *const c_char,
    out: *mut *mut c_char,
) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let (d, r) = (handle(d, "dataset")?, handle(r, "rules")?);
        let run_id = RunId::new(str_arg(run_id, "run_id")?);
        let run =
            d.0.run(&run_id)
                .ok_or_else(|| Failure::new(InqStatus::NotFound, format!("no run {run_id}")))?;
        let mut csv = String::from("rule_id,run_id,rank,unit_id\n");
        for rule in &r.0.rules {
            let s = apply_rule(rule, run).map_err(|e| Failure::new(InqStatus::Evaluation, e))?;
            for (rank, unit) in s.selected.iter().enumerate() {
                csv.push_str(&format!("{},{},{},{}\n", rule.id, run_id, rank + 1, unit));
            }
        }
        *out = c_string(csv)?.into_raw();
        Ok(())
    })
}

/// Size and complexity metrics of one source text.
///
/// # Safety
/// `name` and `text` must be NUL-terminated strings; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn inq_extract_source(
    name: *const c_char,
    text: *const c_char,
    out: *mut InqSourceMetrics,
) -> InqStatus {
    guard(|| {
        out_arg(out, "out")?;
        let name = str_arg(name, "name")?;
        let text = str_arg(text, "text")?;
        let m = extract_metrics(name, text).map_err(|e| Failure::new(InqStatus::Input, e))?;
        *out = InqSourceMetrics {
            loc: m.loc,
            method_count: m.method_count,
            mean_method_length: m.mean_method_length,
            cyclomatic_max: m.cyclomatic_max,
            cyclomatic_mean: m.cyclomatic_mean,
        };
        Ok(())
    })
}
