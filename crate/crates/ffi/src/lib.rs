//! C ABI over `glide-core`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`GlideStatus`]; on failure a thread-local message is available
//! from [`glide_last_error`]. Strings returned to the caller are released
//! with [`glide_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use glide_core::dataset::{discretize, read_categorical_csv, ContinuousTable, Dataset};
use glide_core::eval::compare;
use glide_core::graph::{parse_edge_list, write_edge_list, Dag};
use glide_core::{glide, GlideConfig, GlideError, GlideResult};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GlideStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    RunFailure = 5,
    Panic = 6,
}

/// Opaque categorical dataset.
pub struct GlideDataset(Dataset);

/// Opaque run configuration.
pub struct GlideConfigHandle(GlideConfig);

/// Opaque directed acyclic graph.
pub struct GlideGraph(Dag);

/// Opaque discovery result.
pub struct GlideRun(GlideResult);

/// Structural comparison of a predicted graph against the truth.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GlideMetrics {
    pub shd: usize,
    pub spurious_rate: f64,
    pub tpr: f64,
    pub missing: usize,
    pub extra: usize,
    pub reversed: usize,
    pub predicted_edges: usize,
    pub true_edges: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(GlideStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(GlideStatus::InvalidArgument, msg.into())
    }
}

impl From<GlideError> for Failure {
    fn from(e: GlideError) -> Self {
        let status = match e {
            GlideError::Config(_) | GlideError::Data(_) => GlideStatus::InvalidArgument,
            _ => GlideStatus::RunFailure,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, converting errors and panics into a status and the last-error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GlideStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GlideStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GlideStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(GlideStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| Failure(GlideStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_arg<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(GlideStatus::NullPointer, "output pointer is null".into()));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn names_arg(names: *const *const c_char, d: usize) -> Result<Vec<String>, Failure> {
    if names.is_null() {
        return Ok((0..d).map(|j| format!("X{j}")).collect());
    }
    (0..d).map(|j| str_arg(*names.add(j), "column name").map(str::to_string)).collect()
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("interior NULs removed").into_raw()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn glide_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version string (static storage).
#[no_mangle]
pub extern "C" fn glide_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn glide_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Default configuration.
#[no_mangle]
pub extern "C" fn glide_config_new() -> *mut GlideConfigHandle {
    Box::into_raw(Box::new(GlideConfigHandle(GlideConfig::default())))
}

/// Configuration from a JSON object; missing fields take defaults.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glide_config_from_json(json: *const c_char, out: *mut *mut GlideConfigHandle) -> GlideStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let cfg: GlideConfig = serde_json::from_str(text).map_err(|e| Failure(GlideStatus::Parse, e.to_string()))?;
        cfg.validate()?;
        out_arg(out, GlideConfigHandle(cfg))
    })
}

/// Sets the number of environments per family.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_config_set_m(cfg: *mut GlideConfigHandle, m: usize) -> GlideStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(|| Failure(GlideStatus::NullPointer, "config is null".into()))?.0.m = m;
        Ok(())
    })
}

/// Sets the retention floor of every prior.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_config_set_gamma(cfg: *mut GlideConfigHandle, gamma: f64) -> GlideStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(|| Failure(GlideStatus::NullPointer, "config is null".into()))?.0.gamma_o = gamma;
        Ok(())
    })
}

/// Sets the seed of every random stream.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_config_set_seed(cfg: *mut GlideConfigHandle, seed: u64) -> GlideStatus {
    guard(|| {
        cfg.as_mut().ok_or_else(|| Failure(GlideStatus::NullPointer, "config is null".into()))?.0.seed = seed;
        Ok(())
    })
}

/// Configuration as JSON; release with `glide_string_free`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_config_to_json(cfg: *const GlideConfigHandle, out: *mut *mut c_char) -> GlideStatus {
    guard(|| {
        let cfg = ref_arg(cfg, "config")?;
        if out.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "output pointer is null".into()));
        }
        *out = to_c_string(serde_json::to_string(&cfg.0).map_err(|e| Failure(GlideStatus::RunFailure, e.to_string()))?);
        Ok(())
    })
}

/// # Safety
/// `cfg` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glide_config_free(cfg: *mut GlideConfigHandle) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Categorical dataset from row-major category codes (`n_rows * n_vars` values).
/// `names` may be NULL, giving `X0, X1, ...`.
///
/// # Safety
/// `codes` must hold `n_rows * n_vars` values; `names`, if not NULL, `n_vars` strings.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_from_codes(
    codes: *const u32,
    n_rows: usize,
    n_vars: usize,
    names: *const *const c_char,
    out: *mut *mut GlideDataset,
) -> GlideStatus {
    guard(|| {
        if codes.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "codes is null".into()));
        }
        let len = n_rows.checked_mul(n_vars).ok_or_else(|| Failure::invalid("dataset size overflows"))?;
        let flat = std::slice::from_raw_parts(codes, len);
        let columns: Vec<Vec<u32>> = (0..n_vars).map(|j| (0..n_rows).map(|r| flat[r * n_vars + j]).collect()).collect();
        let ds = Dataset::new(names_arg(names, n_vars)?, columns).map_err(|e| Failure::invalid(e.to_string()))?;
        out_arg(out, GlideDataset(ds))
    })
}

/// Dataset from row-major reals discretized into `bins` equal-width bins per column.
///
/// # Safety
/// As for `glide_dataset_from_codes`, with `values` holding `n_rows * n_vars` reals.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_from_continuous(
    values: *const f64,
    n_rows: usize,
    n_vars: usize,
    names: *const *const c_char,
    bins: usize,
    out: *mut *mut GlideDataset,
) -> GlideStatus {
    guard(|| {
        if values.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "values is null".into()));
        }
        let len = n_rows.checked_mul(n_vars).ok_or_else(|| Failure::invalid("dataset size overflows"))?;
        let flat = std::slice::from_raw_parts(values, len);
        let columns: Vec<Vec<f64>> = (0..n_vars).map(|j| (0..n_rows).map(|r| flat[r * n_vars + j]).collect()).collect();
        let table =
            ContinuousTable::new(names_arg(names, n_vars)?, columns).map_err(|e| Failure::invalid(e.to_string()))?;
        let ds = discretize(&table, bins).map_err(|e| Failure::invalid(e.to_string()))?;
        out_arg(out, GlideDataset(ds))
    })
}

/// Categorical dataset from a CSV file with a header row of names.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_from_csv(path: *const c_char, out: *mut *mut GlideDataset) -> GlideStatus {
    guard(|| {
        let path = Path::new(str_arg(path, "path")?);
        let file =
            std::fs::File::open(path).map_err(|e| Failure(GlideStatus::Io, format!("{}: {e}", path.display())))?;
        let ds = read_categorical_csv(std::io::BufReader::new(file))
            .map_err(|e| Failure(GlideStatus::Parse, e.to_string()))?;
        out_arg(out, GlideDataset(ds))
    })
}

/// Number of rows, or 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_rows(ds: *const GlideDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_rows())
}

/// Number of variables, or 0 for NULL.
///
/// # Safety
/// `ds` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_vars(ds: *const GlideDataset) -> usize {
    ds.as_ref().map_or(0, |d| d.0.n_vars())
}

/// # Safety
/// `ds` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glide_dataset_free(ds: *mut GlideDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// Learns a graph; `cfg` may be NULL for defaults.
///
/// # Safety
/// `ds` must be a live handle; `cfg` NULL or live; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_discover(
    ds: *const GlideDataset,
    cfg: *const GlideConfigHandle,
    out: *mut *mut GlideRun,
) -> GlideStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let default = GlideConfig::default();
        let cfg = cfg.as_ref().map_or(&default, |c| &c.0);
        let result = glide(&ds.0, cfg)?;
        out_arg(out, GlideRun(result))
    })
}

/// Number of learned edges, or 0 for NULL.
///
/// # Safety
/// `run` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn glide_run_edge_count(run: *const GlideRun) -> usize {
    run.as_ref().map_or(0, |r| r.0.dag.edge_count())
}

/// Copies up to `capacity` learned edges as (parent, child) column indices;
/// `written` receives the number copied.
///
/// # Safety
/// `parents` and `children` must hold `capacity` values; `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn glide_run_edges(
    run: *const GlideRun,
    parents: *mut usize,
    children: *mut usize,
    capacity: usize,
    written: *mut usize,
) -> GlideStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        if (capacity > 0 && (parents.is_null() || children.is_null())) || written.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "output buffer is null".into()));
        }
        let edges = run.0.dag.edges();
        let k = edges.len().min(capacity);
        for (i, &(p, c)) in edges.iter().take(k).enumerate() {
            *parents.add(i) = p;
            *children.add(i) = c;
        }
        *written = k;
        Ok(())
    })
}

/// Full run report as JSON; release with `glide_string_free`.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_run_report_json(run: *const GlideRun, out: *mut *mut c_char) -> GlideStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        if out.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "output pointer is null".into()));
        }
        let text = serde_json::to_string(&run.0.report).map_err(|e| Failure(GlideStatus::RunFailure, e.to_string()))?;
        *out = to_c_string(text);
        Ok(())
    })
}

/// Copy of the learned graph.
///
/// # Safety
/// `run` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_run_graph(run: *const GlideRun, out: *mut *mut GlideGraph) -> GlideStatus {
    guard(|| {
        let run = ref_arg(run, "run")?;
        out_arg(out, GlideGraph(run.0.dag.clone()))
    })
}

/// # Safety
/// `run` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glide_run_free(run: *mut GlideRun) {
    if !run.is_null() {
        drop(Box::from_raw(run));
    }
}

/// Graph from edge-list text (`# nodes: A,B` header, then `parent<TAB>child` lines).
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_graph_from_edge_list(text: *const c_char, out: *mut *mut GlideGraph) -> GlideStatus {
    guard(|| {
        let dag = parse_edge_list(str_arg(text, "text")?).map_err(|e| Failure(GlideStatus::Parse, e.to_string()))?;
        out_arg(out, GlideGraph(dag))
    })
}

/// Edge-list text of a graph; release with `glide_string_free`.
///
/// # Safety
/// `g` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_graph_to_edge_list(g: *const GlideGraph, out: *mut *mut c_char) -> GlideStatus {
    guard(|| {
        let g = ref_arg(g, "graph")?;
        if out.is_null() {
            return Err(Failure(GlideStatus::NullPointer, "output pointer is null".into()));
        }
        *out = to_c_string(write_edge_list(&g.0).map_err(|e| Failure::invalid(e.to_string()))?);
        Ok(())
    })
}

/// # Safety
/// `g` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn glide_graph_free(g: *mut GlideGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Compares `pred` against `truth`; nodes are matched by name.
///
/// # Safety
/// Both graphs must be live handles; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn glide_eval(
    pred: *const GlideGraph,
    truth: *const GlideGraph,
    out: *mut GlideMetrics,
) -> GlideStatus {
    guard(|| {
        let pred = ref_arg(pred, "pred")?;
        let truth = ref_arg(truth, "truth")?;
        let out = out.as_mut().ok_or_else(|| Failure(GlideStatus::NullPointer, "output pointer is null".into()))?;
        let r = compare(&pred.0, &truth.0).map_err(|e| Failure::invalid(e.to_string()))?;
        *out = GlideMetrics {
            shd: r.shd,
            spurious_rate: r.spurious_rate,
            tpr: r.tpr,
            missing: r.missing,
            extra: r.extra,
            reversed: r.reversed,
            predicted_edges: r.predicted_edges,
            true_edges: r.true_edges,
        };
        Ok(())
    })
}
