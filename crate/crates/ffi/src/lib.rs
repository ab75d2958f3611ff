//! C ABI over `netconc`.
//!
//! Conventions:
//! - every fallible call returns an [`NcStatus`]; results go through out-pointers
//! - on failure, [`nc_last_error`] returns a message for the calling thread
//! - handles are opaque; free them with the matching `*_free`
//! - structured inputs (ensembles, functionals, constraints, schedules, bounds)
//!   are JSON strings in the same format the CLI configs use

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use netconc::bounds::{bound_eval, gamma_star, BoundSpec, ThresholdSpec};
use netconc::ensembles::{self, EnsembleSpec};
use netconc::error::Error;
use netconc::functionals::{self, Functional};
use netconc::graph::{ConstraintSpec, Graph, SpinConfig};
use netconc::optimizers::{optimize_exhaustive, optimize_sa, AnnealSchedule, OptimizeResult};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Panic = 3,
    Input = 10,
    Spec = 11,
    Unsupported = 12,
    Degenerate = 13,
    QMismatch = 14,
    TooLarge = 15,
    Infeasible = 16,
    InvalidMoveKind = 17,
    Config = 18,
    Io = 19,
    Json = 20,
    BufferTooSmall = 21,
}

/// Opaque graph handle.
pub struct NcGraph(Graph);

/// Opaque functional handle.
pub struct NcFunctional(Functional);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Fail {
    Status(NcStatus, String),
    Lib(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail::Lib(Error::Json(e))
    }
}

fn status_of(e: &Error) -> NcStatus {
    match e {
        Error::Input(_) => NcStatus::Input,
        Error::Spec(_) => NcStatus::Spec,
        Error::UnsupportedForQState(_) => NcStatus::Unsupported,
        Error::Degenerate(_) => NcStatus::Degenerate,
        Error::QMismatch { .. } => NcStatus::QMismatch,
        Error::TooLarge { .. } => NcStatus::TooLarge,
        Error::Infeasible(_) => NcStatus::Infeasible,
        Error::InvalidMoveKind(_) => NcStatus::InvalidMoveKind,
        Error::Config(_) => NcStatus::Config,
        Error::Io(_) => NcStatus::Io,
        Error::Json(_) => NcStatus::Json,
    }
}

fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> NcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NcStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Ok(Err(Fail::Lib(e))) => {
            let s = status_of(&e);
            set_error(e.to_string());
            s
        }
        Err(_) => {
            set_error("panic inside netconc".into());
            NcStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(NcStatus::NullPointer, format!("{what} is null"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Status(NcStatus::InvalidUtf8, format!("{what}: {e}")))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn constraint(p: *const c_char) -> Result<ConstraintSpec, Fail> {
    if p.is_null() {
        return Ok(ConstraintSpec::Unconstrained);
    }
    Ok(serde_json::from_str(text(p, "constraint")?)?)
}

unsafe fn spins(f: &Functional, labels: *const usize, n: usize) -> Result<SpinConfig, Fail> {
    let l = slice(labels, n, "labels")?;
    Ok(SpinConfig::new(l.to_vec(), f.q())?)
}

fn boxed<T>(v: T, dst: &mut *mut T) {
    *dst = Box::into_raw(Box::new(v));
}

unsafe fn write_result(
    r: &OptimizeResult,
    labels_out: *mut usize,
    capacity: usize,
    value_out: *mut f64,
) -> Result<(), Fail> {
    let labels = r.best_config.labels();
    if capacity < labels.len() {
        return Err(Fail::Status(
            NcStatus::BufferTooSmall,
            format!("labels buffer holds {capacity}, need {}", labels.len()),
        ));
    }
    if labels_out.is_null() {
        return Err(null("labels_out"));
    }
    *out(value_out, "value_out")? = r.best_value;
    std::slice::from_raw_parts_mut(labels_out, labels.len()).copy_from_slice(labels);
    Ok(())
}

/// Message for the last failed call on this thread. Valid until the next
/// failing call on the same thread. Empty if nothing has failed.
#[no_mangle]
pub extern "C" fn nc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version, static string.
#[no_mangle]
pub extern "C" fn nc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph on `n` nodes from `n_edges` pairs stored flat in `edges`
/// (`edges[2k]`, `edges[2k+1]`).
///
/// # Safety
/// `edges` must point to `2 * n_edges` readable values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_from_edges(
    n: usize,
    edges: *const usize,
    n_edges: usize,
    out_graph: *mut *mut NcGraph,
) -> NcStatus {
    guard(|| {
        let dst = out(out_graph, "out_graph")?;
        let flat = slice(edges, 2 * n_edges, "edges")?;
        let g = Graph::from_edge_list(n, flat.chunks_exact(2).map(|p| (p[0], p[1])))?;
        boxed(NcGraph(g), dst);
        Ok(())
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_free(g: *mut NcGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Node count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_node_count(g: *const NcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.node_count())
}

/// Edge count; 0 for a null handle.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_edge_count(g: *const NcGraph) -> usize {
    g.as_ref().map_or(0, |g| g.0.edge_count())
}

/// # Safety
/// `g` must be a live handle; `out_degree` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_degree(g: *const NcGraph, node: usize, out_degree: *mut usize) -> NcStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        if node >= g.node_count() {
            return Err(Error::Input(format!("node {node} out of range")).into());
        }
        *out(out_degree, "out_degree")? = g.degree(node);
        Ok(())
    })
}

/// Writes 1 to `out_present` if `{i, j}` is an edge, else 0.
///
/// # Safety
/// `g` must be a live handle; `out_present` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_has_edge(g: *const NcGraph, i: usize, j: usize, out_present: *mut i32) -> NcStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        if i >= g.node_count() || j >= g.node_count() {
            return Err(Error::Input(format!("pair ({i}, {j}) out of range")).into());
        }
        *out(out_present, "out_present")? = i32::from(g.has_edge(i, j));
        Ok(())
    })
}

/// New graph with the pair `{i, j}` toggled. The input handle is untouched.
///
/// # Safety
/// `g` must be a live handle; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_flip_edge(
    g: *const NcGraph,
    i: usize,
    j: usize,
    out_graph: *mut *mut NcGraph,
) -> NcStatus {
    guard(|| {
        let dst = out(out_graph, "out_graph")?;
        let h = deref(g, "graph")?.0.flip_edge(i, j)?;
        boxed(NcGraph(h), dst);
        Ok(())
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_load(path: *const c_char, out_graph: *mut *mut NcGraph) -> NcStatus {
    guard(|| {
        let dst = out(out_graph, "out_graph")?;
        let g = Graph::load_edge_list(Path::new(text(path, "path")?))?;
        boxed(NcGraph(g), dst);
        Ok(())
    })
}

/// # Safety
/// `g` must be a live handle; `path` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nc_graph_save(g: *const NcGraph, path: *const c_char) -> NcStatus {
    guard(|| {
        let g = &deref(g, "graph")?.0;
        g.save_edge_list(Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// Draws replicate `index` of the ensemble described by `spec_json`, e.g.
/// `{"variant":"er_sparse","params":{"n":100,"lambda":3},"seed":7}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out_graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_ensemble_sample(
    spec_json: *const c_char,
    index: u64,
    out_graph: *mut *mut NcGraph,
) -> NcStatus {
    guard(|| {
        let dst = out(out_graph, "out_graph")?;
        let spec: EnsembleSpec = serde_json::from_str(text(spec_json, "spec_json")?)?;
        let g = ensembles::sample(&spec, index)?;
        boxed(NcGraph(g), dst);
        Ok(())
    })
}

/// Parses a functional such as `{"kind":"q_potts","params":{"q":3,"j":1,"gamma":0.5}}`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_functional` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_functional_from_json(
    json: *const c_char,
    out_functional: *mut *mut NcFunctional,
) -> NcStatus {
    guard(|| {
        let dst = out(out_functional, "out_functional")?;
        let f: Functional = serde_json::from_str(text(json, "json")?)?;
        f.validate()?;
        boxed(NcFunctional(f), dst);
        Ok(())
    })
}

/// # Safety
/// `f` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn nc_functional_free(f: *mut NcFunctional) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of label states; 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nc_functional_q(f: *const NcFunctional) -> usize {
    f.as_ref().map_or(0, |f| f.0.q())
}

/// `H(G)` at the labelling `labels[0..n]`.
///
/// # Safety
/// Handles must be live; `labels` must hold `n` values; `out_value` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_evaluate(
    f: *const NcFunctional,
    g: *const NcGraph,
    labels: *const usize,
    n: usize,
    out_value: *mut f64,
) -> NcStatus {
    guard(|| {
        let f = &deref(f, "functional")?.0;
        let g = &deref(g, "graph")?.0;
        let s = spins(f, labels, n)?;
        *out(out_value, "out_value")? = functionals::evaluate(f, g, &s)?;
        Ok(())
    })
}

/// Change in `H` when `node` is relabelled to `new_label`.
///
/// # Safety
/// Handles must be live; `labels` must hold `n` values; `out_delta` writable.
#[no_mangle]
pub unsafe extern "C" fn nc_move_delta(
    f: *const NcFunctional,
    g: *const NcGraph,
    labels: *const usize,
    n: usize,
    node: usize,
    new_label: usize,
    out_delta: *mut f64,
) -> NcStatus {
    guard(|| {
        let f = &deref(f, "functional")?.0;
        let g = &deref(g, "graph")?.0;
        let s = spins(f, labels, n)?;
        *out(out_delta, "out_delta")? = functionals::move_delta(f, g, &s, node, new_label)?.delta_h;
        Ok(())
    })
}

/// Exact minimum. `constraint_json` may be null (unconstrained). The argmin
/// is written to `labels_out`, which must hold `capacity >= N` entries.
///
/// # Safety
/// Handles must be live; string pointers null or NUL-terminated; buffers writable.
#[no_mangle]
pub unsafe extern "C" fn nc_optimize_exhaustive(
    f: *const NcFunctional,
    g: *const NcGraph,
    constraint_json: *const c_char,
    labels_out: *mut usize,
    capacity: usize,
    value_out: *mut f64,
) -> NcStatus {
    guard(|| {
        let f = &deref(f, "functional")?.0;
        let g = &deref(g, "graph")?.0;
        let c = constraint(constraint_json)?;
        let r = optimize_exhaustive(f, g, &c)?;
        write_result(&r, labels_out, capacity, value_out)
    })
}

/// Simulated annealing. `schedule_json` may be null for the default schedule
/// (swap moves when the constraint fixes group sizes).
///
/// # Safety
/// Handles must be live; string pointers null or NUL-terminated; buffers writable.
#[no_mangle]
pub unsafe extern "C" fn nc_optimize_sa(
    f: *const NcFunctional,
    g: *const NcGraph,
    constraint_json: *const c_char,
    schedule_json: *const c_char,
    seed: u64,
    labels_out: *mut usize,
    capacity: usize,
    value_out: *mut f64,
) -> NcStatus {
    guard(|| {
        let f = &deref(f, "functional")?.0;
        let g = &deref(g, "graph")?.0;
        let c = constraint(constraint_json)?;
        let schedule: AnnealSchedule = if schedule_json.is_null() {
            AnnealSchedule::for_constraint(&c)
        } else {
            serde_json::from_str(text(schedule_json, "schedule_json")?)?
        };
        let r = optimize_sa(f, g, &c, &schedule, seed)?;
        write_result(&r, labels_out, capacity, value_out)
    })
}

/// Tail bound at deviation `t`, e.g. `{"theorem":"T1","params":{"c":1}}`.
///
/// # Safety
/// `spec_json` must be NUL-terminated; out-pointers writable.
#[no_mangle]
pub unsafe extern "C" fn nc_bound_eval(
    spec_json: *const c_char,
    t: f64,
    out_raw: *mut f64,
    out_clamped: *mut f64,
) -> NcStatus {
    guard(|| {
        let spec: BoundSpec = serde_json::from_str(text(spec_json, "spec_json")?)?;
        let v = bound_eval(&spec, t)?;
        *out(out_raw, "out_raw")? = v.raw;
        *out(out_clamped, "out_clamped")? = v.clamped;
        Ok(())
    })
}

/// Outlink-density threshold for two communities of sizes `n1`, `n2` joined
/// by `m12` edges.
///
/// # Safety
/// `out_gamma` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nc_gamma_star(j: f64, n1: usize, n2: usize, m12: usize, out_gamma: *mut f64) -> NcStatus {
    guard(|| {
        let th = ThresholdSpec { j, n1, n2, m12 };
        th.validate()?;
        *out(out_gamma, "out_gamma")? = gamma_star(&th);
        Ok(())
    })
}
