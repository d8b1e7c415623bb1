//! C ABI for embedding the simulator in other languages.
//!
//! Handles are opaque pointers created and destroyed by this library;
//! every fallible call returns a [`LinkloopStatus`] and leaves a
//! human-readable message retrievable via [`linkloop_last_error_message`].
//! Strings returned as `*mut c_char` are owned by the caller and must be
//! released with [`linkloop_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::path::Path;
use std::str::FromStr;

use linkloop::config::ExperimentSpec;
use linkloop::engine::{run_simulation, SimOutput};
use linkloop::graph::Group;
use linkloop::io;
use linkloop::netgen::{build_network, NetConfig, NetworkStats, Preset, DEFAULT_TOLERANCE};
use linkloop::LabeledDigraph;

/// Result codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkloopStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    RuntimeError = 3,
    IndexOutOfRange = 4,
    /// The requested metric is undefined at that iteration.
    MissingValue = 5,
}

/// Opaque handle to a labeled directed graph.
pub struct LinkloopGraph {
    inner: LabeledDigraph,
}

/// Opaque handle to a finished simulation run.
pub struct LinkloopResult {
    output: SimOutput,
    percentiles: Vec<f64>,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let sanitized = msg.into().replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn fail(status: LinkloopStatus, msg: impl Into<String>) -> LinkloopStatus {
    set_error(msg);
    status
}

/// Message for the most recent error on this thread. The pointer stays
/// valid until the next failing call on the same thread; do not free it.
#[no_mangle]
pub extern "C" fn linkloop_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn linkloop_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Frees a string allocated by this library.
///
/// # Safety
/// `s` must be a pointer previously returned by a `linkloop_*` function
/// that transfers string ownership, and must not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn linkloop_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, LinkloopStatus> {
    if ptr.is_null() {
        return Err(fail(LinkloopStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        fail(
            LinkloopStatus::InvalidArgument,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn write_handle<T>(out: *mut *mut T, value: T, what: &str) -> LinkloopStatus {
    if out.is_null() {
        return fail(
            LinkloopStatus::NullPointer,
            format!("{what} out-pointer is null"),
        );
    }
    *out = Box::into_raw(Box::new(value));
    LinkloopStatus::Ok
}

/// Generates a network for one of the named presets G0..G4.
///
/// # Safety
/// `preset` must be a valid NUL-terminated string and `out` a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_generate_preset(
    preset: *const c_char,
    n: usize,
    avg_out_degree: f64,
    seed: u64,
    out: *mut *mut LinkloopGraph,
) -> LinkloopStatus {
    let name = match read_str(preset, "preset") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let preset = match Preset::from_str(name) {
        Ok(p) => p,
        Err(e) => return fail(LinkloopStatus::InvalidArgument, e),
    };
    match build_network(&preset.config(n, avg_out_degree, seed)) {
        Ok(graph) => write_handle(out, LinkloopGraph { inner: graph }, "graph"),
        Err(e) => fail(LinkloopStatus::RuntimeError, e.to_string()),
    }
}

/// Generates a network with explicit share and homophily targets.
///
/// # Safety
/// `out` must be a valid pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_generate(
    n: usize,
    avg_out_degree: f64,
    s_m: f64,
    h_m: f64,
    h_maj: f64,
    seed: u64,
    out: *mut *mut LinkloopGraph,
) -> LinkloopStatus {
    let config = NetConfig {
        n_nodes: n,
        avg_out_degree,
        s_m_target: s_m,
        h_m_target: h_m,
        h_maj_target: h_maj,
        tolerance: DEFAULT_TOLERANCE,
        rng_seed: seed,
    };
    match build_network(&config) {
        Ok(graph) => write_handle(out, LinkloopGraph { inner: graph }, "graph"),
        Err(e) => fail(LinkloopStatus::RuntimeError, e.to_string()),
    }
}

/// Loads a graph from an edge-list file and a label file.
///
/// # Safety
/// Both paths must be valid NUL-terminated strings; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_load(
    edges_path: *const c_char,
    labels_path: *const c_char,
    out: *mut *mut LinkloopGraph,
) -> LinkloopStatus {
    let edges = match read_str(edges_path, "edges_path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let labels = match read_str(labels_path, "labels_path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    match io::load_graph(Path::new(edges), Path::new(labels)) {
        Ok(loaded) => write_handle(
            out,
            LinkloopGraph {
                inner: loaded.graph,
            },
            "graph",
        ),
        Err(e) => fail(LinkloopStatus::RuntimeError, e.to_string()),
    }
}

/// Writes the graph in canonical edge-list plus label-file form.
///
/// # Safety
/// `graph` must be a live handle; both paths must be valid strings.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_save(
    graph: *const LinkloopGraph,
    edges_path: *const c_char,
    labels_path: *const c_char,
) -> LinkloopStatus {
    let Some(graph) = graph.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "graph is null");
    };
    let edges = match read_str(edges_path, "edges_path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let labels = match read_str(labels_path, "labels_path") {
        Ok(s) => s,
        Err(status) => return status,
    };
    if let Err(e) = io::write_edge_list(Path::new(edges), &graph.inner)
        .and_then(|_| io::write_labels(Path::new(labels), &graph.inner))
    {
        return fail(LinkloopStatus::RuntimeError, e.to_string());
    }
    LinkloopStatus::Ok
}

/// Node count of a graph handle; 0 for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_node_count(graph: *const LinkloopGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.node_count())
}

/// Edge count of a graph handle; 0 for a null handle.
///
/// # Safety
/// `graph` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_edge_count(graph: *const LinkloopGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.edge_count())
}

/// Measured minority share and per-group homophily of the graph.
///
/// # Safety
/// `graph` must be a live handle; out-pointers must be valid or null
/// (null out-pointers are skipped).
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_stats(
    graph: *const LinkloopGraph,
    out_s_m: *mut f64,
    out_h_m: *mut f64,
    out_h_maj: *mut f64,
) -> LinkloopStatus {
    let Some(graph) = graph.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "graph is null");
    };
    let stats = match NetworkStats::measure(&graph.inner) {
        Ok(stats) => stats,
        Err(e) => return fail(LinkloopStatus::RuntimeError, e.to_string()),
    };
    if !out_s_m.is_null() {
        *out_s_m = stats.s_m;
    }
    if !out_h_m.is_null() {
        *out_h_m = stats.h_m;
    }
    if !out_h_maj.is_null() {
        *out_h_maj = stats.h_maj;
    }
    LinkloopStatus::Ok
}

/// Releases a graph handle.
///
/// # Safety
/// `graph` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn linkloop_graph_free(graph: *mut LinkloopGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Runs the feedback-loop simulation on a copy of `graph`.
///
/// `config_text` uses the same `key=value` grammar as the CLI config file
/// (pass an empty string or null for all defaults); `seed` overrides any
/// seed given there.
///
/// # Safety
/// `graph` must be a live handle; `config_text` must be null or a valid
/// NUL-terminated string; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linkloop_simulate(
    graph: *const LinkloopGraph,
    config_text: *const c_char,
    seed: u64,
    out: *mut *mut LinkloopResult,
) -> LinkloopStatus {
    let Some(graph) = graph.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "graph is null");
    };
    let mut spec = ExperimentSpec::default();
    if !config_text.is_null() {
        let text = match read_str(config_text, "config_text") {
            Ok(s) => s,
            Err(status) => return status,
        };
        if let Err(e) = spec.apply_text(text, Path::new("config")) {
            return fail(LinkloopStatus::InvalidArgument, e.to_string());
        }
    }
    let mut sim = spec.sim.clone();
    sim.seed = seed;
    match run_simulation(graph.inner.clone(), &sim) {
        Ok(output) => write_handle(
            out,
            LinkloopResult {
                output,
                percentiles: sim.percentiles,
            },
            "result",
        ),
        Err(e) => fail(LinkloopStatus::RuntimeError, e.to_string()),
    }
}

/// Number of iteration records in a result; 0 for a null handle.
///
/// # Safety
/// `result` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_iterations(result: *const LinkloopResult) -> usize {
    result.as_ref().map_or(0, |r| r.output.records.len())
}

/// Reads one metric at iteration `t` (1-based) by its CSV column name
/// (e.g. "e_min", "gini_maj", "h_m", "edges_added").
///
/// # Safety
/// `result` must be a live handle, `name` a valid string, `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_metric(
    result: *const LinkloopResult,
    t: usize,
    name: *const c_char,
    out: *mut f64,
) -> LinkloopStatus {
    let Some(result) = result.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "result is null");
    };
    if out.is_null() {
        return fail(LinkloopStatus::NullPointer, "out is null");
    }
    let name = match read_str(name, "name") {
        Ok(s) => s,
        Err(status) => return status,
    };
    let Some(record) = t.checked_sub(1).and_then(|i| result.output.records.get(i)) else {
        return fail(
            LinkloopStatus::IndexOutOfRange,
            format!("iteration {t} outside 1..={}", result.output.records.len()),
        );
    };
    let value = match name {
        "recs_issued" => Some(record.recs_issued as f64),
        "edges_added" => Some(record.edges_added as f64),
        "growth_pct" => Some(record.cumulative_edge_growth * 100.0),
        "e_min" => record.exposure.as_ref().map(|e| e.e_min),
        "e_maj" => record.exposure.as_ref().map(|e| e.e_maj),
        "gini_min" => Some(record.gini_minority),
        "gini_maj" => Some(record.gini_majority),
        "h_m" => record.h_m,
        "h_M" => record.h_maj,
        "e_mm" => record.e_mm,
        other => {
            return fail(
                LinkloopStatus::InvalidArgument,
                format!("unknown metric '{other}'"),
            )
        }
    };
    match value {
        Some(v) => {
            *out = v;
            LinkloopStatus::Ok
        }
        None => fail(
            LinkloopStatus::MissingValue,
            format!("metric '{name}' undefined at iteration {t}"),
        ),
    }
}

/// Final minority share of recommendation slots, convenience accessor.
///
/// # Safety
/// `result` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_final_exposure(
    result: *const LinkloopResult,
    out: *mut f64,
) -> LinkloopStatus {
    let Some(r) = result.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "result is null");
    };
    let t = r.output.records.len();
    linkloop_result_metric(result, t, c"e_min".as_ptr(), out)
}

/// Renders the full per-iteration metrics table as CSV. Free the returned
/// string with [`linkloop_string_free`].
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_metrics_csv(result: *const LinkloopResult) -> *mut c_char {
    let Some(result) = result.as_ref() else {
        set_error("result is null");
        return std::ptr::null_mut();
    };
    let csv = io::metrics_csv(&result.output.records, &result.percentiles);
    CString::new(csv).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// Final graph of the run as a new graph handle.
///
/// # Safety
/// `result` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_final_graph(
    result: *const LinkloopResult,
    out: *mut *mut LinkloopGraph,
) -> LinkloopStatus {
    let Some(result) = result.as_ref() else {
        return fail(LinkloopStatus::NullPointer, "result is null");
    };
    write_handle(
        out,
        LinkloopGraph {
            inner: result.output.graph.clone(),
        },
        "graph",
    )
}

/// Releases a result handle.
///
/// # Safety
/// `result` must be a handle from this library, not yet freed, or null.
#[no_mangle]
pub unsafe extern "C" fn linkloop_result_free(result: *mut LinkloopResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Label code used for the majority group in label files.
#[no_mangle]
pub extern "C" fn linkloop_group_majority_code() -> u8 {
    Group::Majority.code()
}

/// Label code used for the minority group in label files.
#[no_mangle]
pub extern "C" fn linkloop_group_minority_code() -> u8 {
    Group::Minority.code()
}
