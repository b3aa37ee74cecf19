//! C ABI over the `imverde` core: opaque graph and model handles, integer
//! status codes and a thread-local message for the last error.
//!
//! Every function returns an [`ImvStatus`]; outputs go through pointers.
//! Handles are released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use imverde::eval::{average_precision, roc_auc};
use imverde::graph::{
    build_transition, karate_fixture, load_edge_list, AttributedGraph, LabeledSplit,
};
use imverde::model::{node_inputs, predict_node, train, Hyper, ModelParams, TrainSetup};
use imverde::rng::Streams;
use imverde::sampling::{build_negative_sampler, ContextConfig};
use imverde::walk::{walk, VisitingFunction};
use imverde::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImvStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Io = 3,
    Numeric = 4,
    Panic = 5,
    BufferTooSmall = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImvVisiting {
    Constant = 0,
    Linear = 1,
    Exponential = 2,
}

/// Opaque graph handle.
pub struct ImvGraph {
    inner: AttributedGraph,
}

/// Opaque trained-model handle.
pub struct ImvModel {
    params: ModelParams,
}

/// Training settings. Fill with [`imv_train_options_default`] and adjust.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ImvTrainOptions {
    pub dim: usize,
    pub negatives: usize,
    pub hidden: usize,
    pub iters_unsup: usize,
    pub iters_sup: usize,
    pub batch_size: usize,
    pub walk_length: usize,
    pub window: usize,
    pub alpha: f64,
    pub jump_prob: f64,
    pub lambda: f64,
    pub lr_unsup: f64,
    pub lr_sup: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> ImvStatus {
    match err.exit_code() {
        3 => ImvStatus::Io,
        4 => ImvStatus::Numeric,
        _ => ImvStatus::InvalidInput,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard<F: FnOnce() -> Result<(), (ImvStatus, String)>>(f: F) -> ImvStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ImvStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            ImvStatus::Panic
        }
    }
}

fn core<T>(r: imverde::Result<T>) -> Result<T, (ImvStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, (ImvStatus, String)> {
    Err((ImvStatus::InvalidInput, msg.into()))
}

fn null(what: &str) -> (ImvStatus, String) {
    (ImvStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a, T>(
    p: *const T,
    len: usize,
    what: &str,
) -> Result<&'a [T], (ImvStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(
    p: *mut T,
    len: usize,
    what: &str,
) -> Result<&'a mut [T], (ImvStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), (ImvStatus, String)> {
    if out.is_null() {
        return Err(null("output handle pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn graph_ref<'a>(g: *const ImvGraph) -> Result<&'a AttributedGraph, (ImvStatus, String)> {
    g.as_ref().map(|g| &g.inner).ok_or_else(|| null("graph"))
}

unsafe fn model_ref<'a>(m: *const ImvModel) -> Result<&'a ModelParams, (ImvStatus, String)> {
    m.as_ref().map(|m| &m.params).ok_or_else(|| null("model"))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn imv_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn imv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from `m` edges `(src[k], dst[k])`. `weights` may be null
/// for unit weights.
///
/// # Safety
/// `src` and `dst` must hold `m` elements, `weights` null or `m` elements;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_from_edges(
    n: usize,
    src: *const usize,
    dst: *const usize,
    weights: *const f64,
    m: usize,
    directed: bool,
    out: *mut *mut ImvGraph,
) -> ImvStatus {
    guard(|| {
        let src = slice(src, m, "src")?;
        let dst = slice(dst, m, "dst")?;
        let w = if weights.is_null() {
            None
        } else {
            Some(slice(weights, m, "weights")?)
        };
        let edges = (0..m).map(|k| (src[k], dst[k], w.map_or(1.0, |w| w[k])));
        let g = core(AttributedGraph::from_edges(n, edges, directed))?;
        put(out, ImvGraph { inner: g })
    })
}

/// The labeled karate-club graph.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_karate(out: *mut *mut ImvGraph) -> ImvStatus {
    guard(|| {
        put(
            out,
            ImvGraph {
                inner: karate_fixture(),
            },
        )
    })
}

/// Reads a whitespace edge list (`src dst [weight]` per line).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_load_edge_list(
    path: *const c_char,
    directed: bool,
    weighted: bool,
    out: *mut *mut ImvGraph,
) -> ImvStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = match CStr::from_ptr(path).to_str() {
            Ok(p) => p,
            Err(_) => return invalid("path is not valid UTF-8"),
        };
        let g = core(load_edge_list(Path::new(path), directed, weighted))?;
        put(out, ImvGraph { inner: g })
    })
}

/// Replaces node labels. `labels[v] < 0` marks `v` unlabeled.
///
/// # Safety
/// `graph` must be a live handle and `labels` must hold `n` elements.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_set_labels(
    graph: *mut ImvGraph,
    labels: *const i64,
    n: usize,
) -> ImvStatus {
    guard(|| {
        let g = graph.as_mut().ok_or_else(|| null("graph"))?;
        let labels = slice(labels, n, "labels")?;
        if n != g.inner.n() {
            return invalid(format!("expected {} labels, got {n}", g.inner.n()));
        }
        let labels: Vec<Option<usize>> = labels.iter().map(|&l| usize::try_from(l).ok()).collect();
        let classes = labels.iter().flatten().max().map_or(0, |c| c + 1);
        g.inner = core(g.inner.clone().with_labels(labels, classes))?;
        Ok(())
    })
}

/// # Safety
/// `graph` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_size(
    graph: *const ImvGraph,
    nodes: *mut usize,
    edges: *mut usize,
) -> ImvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        if nodes.is_null() || edges.is_null() {
            return Err(null("output"));
        }
        *nodes = g.n();
        *edges = g.num_edges();
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imv_graph_free(graph: *mut ImvGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

fn visiting(kind: ImvVisiting, alpha: f64) -> Result<VisitingFunction, (ImvStatus, String)> {
    match kind {
        ImvVisiting::Constant => Ok(VisitingFunction::Constant),
        ImvVisiting::Linear => Ok(VisitingFunction::Linear),
        ImvVisiting::Exponential => core(VisitingFunction::exponential(alpha)),
    }
}

/// One reweighted walk of `length` steps from `start`, written to `path`
/// (`length + 1` nodes including the start).
///
/// # Safety
/// `graph` must be a live handle and `path` must hold `path_len` elements.
#[no_mangle]
pub unsafe extern "C" fn imv_walk(
    graph: *const ImvGraph,
    kind: ImvVisiting,
    alpha: f64,
    start: usize,
    length: usize,
    seed: u64,
    path: *mut usize,
    path_len: usize,
) -> ImvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let f = visiting(kind, alpha)?;
        if start >= g.n() {
            return invalid(format!("start node {start} out of range"));
        }
        if path_len < length + 1 {
            return Err((
                ImvStatus::BufferTooSmall,
                format!("path needs {} slots", length + 1),
            ));
        }
        let out = slice_mut(path, path_len, "path")?;
        let r = build_transition(g);
        let p = walk(
            &r,
            &f,
            start,
            length,
            &mut Streams::new(seed).stream("walk"),
        );
        out[..p.len()].copy_from_slice(&p);
        Ok(())
    })
}

/// Defaults: d 50, k 10, alpha 0.7, r 0.2, walk length 10.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_train_options_default(out: *mut ImvTrainOptions) -> ImvStatus {
    guard(|| {
        let h = Hyper::default();
        let c = ContextConfig::default();
        let alpha = match c.visiting {
            VisitingFunction::Exponential { alpha } => alpha,
            _ => 0.7,
        };
        let out = out.as_mut().ok_or_else(|| null("options"))?;
        *out = ImvTrainOptions {
            dim: h.dim,
            negatives: h.negatives,
            hidden: h.hidden,
            iters_unsup: h.iters_unsup,
            iters_sup: h.iters_sup,
            batch_size: h.batch_size,
            walk_length: c.walk_length,
            window: c.window,
            alpha,
            jump_prob: c.jump_prob,
            lambda: h.lambda,
            lr_unsup: h.lr_unsup,
            lr_sup: h.lr_sup,
        };
        Ok(())
    })
}

/// Trains on a labeled graph. Nodes in `labeled` supply training labels,
/// nodes in `test` are held out; all others are unlabeled.
///
/// # Safety
/// `graph` must be a live handle, `labeled`/`test` must hold the given
/// counts, `options` must be null (defaults) or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn imv_train(
    graph: *const ImvGraph,
    labeled: *const usize,
    n_labeled: usize,
    test: *const usize,
    n_test: usize,
    minority_class: usize,
    options: *const ImvTrainOptions,
    seed: u64,
    out: *mut *mut ImvModel,
) -> ImvStatus {
    guard(|| {
        let g = graph_ref(graph)?;
        let mut opts = std::mem::MaybeUninit::<ImvTrainOptions>::uninit();
        let opts = match options.as_ref() {
            Some(o) => *o,
            None => {
                imv_train_options_default(opts.as_mut_ptr());
                opts.assume_init()
            }
        };
        let labeled = slice(labeled, n_labeled, "labeled")?.to_vec();
        let test = slice(test, n_test, "test")?.to_vec();
        let mut taken = vec![false; g.n()];
        for &v in labeled.iter().chain(&test) {
            match taken.get_mut(v) {
                Some(t) => *t = true,
                None => return invalid(format!("node {v} out of range")),
            }
        }
        let split = LabeledSplit {
            labeled_train: labeled,
            unlabeled_train: (0..g.n()).filter(|&v| !taken[v]).collect(),
            test,
            minority_class,
        };
        let hyper = Hyper {
            dim: opts.dim,
            negatives: opts.negatives,
            hidden: opts.hidden,
            iters_unsup: opts.iters_unsup,
            iters_sup: opts.iters_sup,
            batch_size: opts.batch_size,
            lambda: opts.lambda,
            lr_unsup: opts.lr_unsup,
            lr_sup: opts.lr_sup,
            ..Hyper::default()
        };
        let context = ContextConfig {
            jump_prob: opts.jump_prob,
            walk_length: opts.walk_length,
            window: opts.window,
            visiting: core(VisitingFunction::exponential(opts.alpha))?,
        };
        let r = build_transition(g);
        let sampler = core(build_negative_sampler(
            g,
            hyper.neg_exponent,
            hyper.negatives,
        ))?;
        let setup = TrainSetup {
            transition: &r,
            context: &context,
            sampler: &sampler,
            hyper: &hyper,
            streams: Streams::new(seed),
            parallel: true,
        };
        let (params, report) = core(train(g, &split, &setup))?;
        if let Some(msg) = report.aborted {
            return Err((ImvStatus::Numeric, msg));
        }
        put(out, ImvModel { params })
    })
}

/// # Safety
/// `model` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_model_shape(
    model: *const ImvModel,
    nodes: *mut usize,
    dim: *mut usize,
    classes: *mut usize,
) -> ImvStatus {
    guard(|| {
        let m = model_ref(model)?;
        if nodes.is_null() || dim.is_null() || classes.is_null() {
            return Err(null("output"));
        }
        *nodes = m.n;
        *dim = m.dim;
        *classes = m.classes;
        Ok(())
    })
}

/// Copies the embedding of `node` into `out` (`len >= dim`).
///
/// # Safety
/// `model` must be a live handle and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn imv_model_embedding(
    model: *const ImvModel,
    node: usize,
    out: *mut f64,
    len: usize,
) -> ImvStatus {
    guard(|| {
        let m = model_ref(model)?;
        if node >= m.n {
            return invalid(format!("node {node} out of range"));
        }
        if len < m.dim {
            return Err((
                ImvStatus::BufferTooSmall,
                format!("embedding needs {} slots", m.dim),
            ));
        }
        slice_mut(out, len, "out")?[..m.dim].copy_from_slice(m.embedding(node));
        Ok(())
    })
}

/// Class probabilities for `node` of the graph the model was trained on.
///
/// # Safety
/// Handles must be live and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn imv_model_predict(
    model: *const ImvModel,
    graph: *const ImvGraph,
    node: usize,
    out: *mut f64,
    len: usize,
) -> ImvStatus {
    guard(|| {
        let m = model_ref(model)?;
        let g = graph_ref(graph)?;
        if g.n() != m.n {
            return invalid("graph does not match the model");
        }
        if node >= m.n {
            return invalid(format!("node {node} out of range"));
        }
        if len < m.classes {
            return Err((
                ImvStatus::BufferTooSmall,
                format!("prediction needs {} slots", m.classes),
            ));
        }
        let inputs = node_inputs(g);
        if inputs.dim() != m.feature_dim {
            return invalid("graph features do not match the model");
        }
        let p = predict_node(m, &inputs, node);
        slice_mut(out, len, "out")?[..p.len()].copy_from_slice(&p);
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn imv_model_free(model: *mut ImvModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

unsafe fn scored(
    scores: *const f64,
    labels: *const u8,
    n: usize,
) -> Result<Vec<(f64, bool)>, (ImvStatus, String)> {
    let s = slice(scores, n, "scores")?;
    let l = slice(labels, n, "labels")?;
    Ok(s.iter().zip(l).map(|(&s, &y)| (s, y != 0)).collect())
}

/// Mann-Whitney ROC AUC. `labels[i] != 0` marks a positive.
///
/// # Safety
/// `scores` and `labels` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_roc_auc(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> ImvStatus {
    guard(|| {
        let v = scored(scores, labels, n)?;
        let auc = core(roc_auc(&v))?.auc;
        *out.as_mut().ok_or_else(|| null("out"))? = auc;
        Ok(())
    })
}

/// Rank-based average precision; ties keep input order.
///
/// # Safety
/// `scores` and `labels` must hold `n` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn imv_average_precision(
    scores: *const f64,
    labels: *const u8,
    n: usize,
    out: *mut f64,
) -> ImvStatus {
    guard(|| {
        let v = scored(scores, labels, n)?;
        let ap = core(average_precision(&v))?;
        *out.as_mut().ok_or_else(|| null("out"))? = ap;
        Ok(())
    })
}
