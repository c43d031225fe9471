//! C ABI over the kacward library. Graphs live behind opaque handles; every
//! call returns an `i32` status and writes results through out-pointers.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use kacward::io::GraphInput;
use kacward::{double, ising, surface, Graph};

pub const KW_OK: i32 = 0;
pub const KW_ERR_NULL: i32 = -1;
pub const KW_ERR_INPUT: i32 = -2;
pub const KW_ERR_NUMERICAL: i32 = -3;
pub const KW_ERR_PANIC: i32 = -4;

/// Opaque graph handle.
pub struct KwGraph {
    graph: Graph,
}

fn code(e: &kacward::Error) -> i32 {
    if e.is_numerical() {
        KW_ERR_NUMERICAL
    } else {
        KW_ERR_INPUT
    }
}

fn guard(f: impl FnOnce() -> i32) -> i32 {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(KW_ERR_PANIC)
}

fn write<T>(out: *mut T, r: kacward::Result<T>) -> i32 {
    match r {
        Ok(v) => {
            // SAFETY: callers check `out` for null before computing `r`.
            unsafe { out.write(v) };
            KW_OK
        }
        Err(e) => code(&e),
    }
}

fn boxed(out: *mut *mut KwGraph, r: kacward::Result<Graph>) -> i32 {
    write(out, r.map(|graph| Box::into_raw(Box::new(KwGraph { graph }))))
}

/// Static description of a status code.
#[no_mangle]
pub extern "C" fn kw_status_message(status: i32) -> *const c_char {
    let s: &'static CStr = match status {
        KW_OK => c"ok",
        KW_ERR_NULL => c"null pointer argument",
        KW_ERR_INPUT => c"invalid input",
        KW_ERR_NUMERICAL => c"numerical failure",
        KW_ERR_PANIC => c"internal panic",
        _ => c"unknown status",
    };
    s.as_ptr()
}

/// Builds a plane graph from vertex coordinates and edges given as vertex
/// index pairs.
///
/// # Safety
/// `xs`, `ys` must hold `n_vertices` values; `us`, `vs`, `weights` must hold
/// `n_edges` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_graph_new(
    n_vertices: usize,
    xs: *const f64,
    ys: *const f64,
    n_edges: usize,
    us: *const u32,
    vs: *const u32,
    weights: *const f64,
    out: *mut *mut KwGraph,
) -> i32 {
    if xs.is_null() || ys.is_null() || us.is_null() || vs.is_null() || weights.is_null() || out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| {
        let xs = std::slice::from_raw_parts(xs, n_vertices);
        let ys = std::slice::from_raw_parts(ys, n_vertices);
        let us = std::slice::from_raw_parts(us, n_edges);
        let vs = std::slice::from_raw_parts(vs, n_edges);
        let w = std::slice::from_raw_parts(weights, n_edges);
        let pos = xs.iter().zip(ys).map(|(&x, &y)| [x, y]).collect();
        let edges = us.iter().zip(vs).map(|(&u, &v)| (u as usize, v as usize)).collect();
        boxed(out, Graph::planar(pos, edges, w.to_vec()))
    })
}

/// Builds a graph from the JSON schema used by the command-line tool.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_graph_from_json(json: *const c_char, out: *mut *mut KwGraph) -> i32 {
    if json.is_null() || out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| {
        let Ok(text) = CStr::from_ptr(json).to_str() else { return KW_ERR_INPUT };
        match GraphInput::from_json(text) {
            Ok(input) => boxed(out, input.build()),
            Err(_) => KW_ERR_INPUT,
        }
    })
}

/// Square-lattice torus with uniform weight.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_graph_torus(width: usize, height: usize, weight: f64, out: *mut *mut KwGraph) -> i32 {
    if out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| boxed(out, Graph::torus(width, height, weight)))
}

/// # Safety
/// `graph` must come from a constructor above and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn kw_graph_free(graph: *mut KwGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle; the out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_graph_size(graph: *const KwGraph, n_vertices: *mut usize, n_edges: *mut usize, n_faces: *mut usize) -> i32 {
    if graph.is_null() || n_vertices.is_null() || n_edges.is_null() || n_faces.is_null() {
        return KW_ERR_NULL;
    }
    let g = &(*graph).graph;
    *n_vertices = g.n_vertices();
    *n_edges = g.n_edges();
    *n_faces = g.faces().len();
    KW_OK
}

/// Face containing the point `(x, y)`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_face_at_point(graph: *const KwGraph, x: f64, y: f64, out: *mut usize) -> i32 {
    if graph.is_null() || out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| write(out, (*graph).graph.face_at_point([x, y])))
}

/// Ising partition function `|Pf K̂|`.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_partition(graph: *const KwGraph, out: *mut f64) -> i32 {
    if graph.is_null() || out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| write(out, ising::partition_function(&(*graph).graph)))
}

/// Spin correlation of `n` inner faces.
///
/// # Safety
/// `faces` must hold `n` values (or be null with `n == 0`); `graph` must be a
/// live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_spin_correlation(graph: *const KwGraph, faces: *const usize, n: usize, out: *mut f64) -> i32 {
    if graph.is_null() || out.is_null() || (faces.is_null() && n > 0) {
        return KW_ERR_NULL;
    }
    guard(|| {
        let f = if n == 0 { &[][..] } else { std::slice::from_raw_parts(faces, n) };
        write(out, ising::spin_correlation(&(*graph).graph, f))
    })
}

/// Pfaffian minor of `K̂⁻¹` at `n` oriented edges (`2k` and `2k+1` for edge `k`).
///
/// # Safety
/// `labels` must hold `n` values; `graph` must be a live handle; `out` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_fermion_pfaffian(graph: *const KwGraph, labels: *const usize, n: usize, out: *mut f64) -> i32 {
    if graph.is_null() || out.is_null() || (labels.is_null() && n > 0) {
        return KW_ERR_NULL;
    }
    guard(|| {
        let l = if n == 0 { &[][..] } else { std::slice::from_raw_parts(labels, n) };
        write(out, ising::fermion_pfaffian(&(*graph).graph, l, None))
    })
}

/// Double-Ising partition function.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_double_partition(graph: *const KwGraph, out: *mut f64) -> i32 {
    if graph.is_null() || out.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| write(out, double::double_partition(&(*graph).graph)))
}

/// Torus partition functions: all even subgraphs (`high`) and the
/// null-homologous ones (`low`).
///
/// # Safety
/// `graph` must be a live handle; `high` and `low` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kw_torus_partition(graph: *const KwGraph, high: *mut f64, low: *mut f64) -> i32 {
    if graph.is_null() || high.is_null() || low.is_null() {
        return KW_ERR_NULL;
    }
    guard(|| match surface::torus_partition(&(*graph).graph) {
        Ok(t) => {
            *high = t.high;
            *low = t.low;
            KW_OK
        }
        Err(e) => code(&e),
    })
}
