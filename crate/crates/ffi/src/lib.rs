//! C ABI over `paredlab`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released by the matching `*_free`. Every fallible call
//! returns a [`PlStatus`]; the message of the last failure on the calling
//! thread is available from [`paredlab_last_error`]. Strings returned to the
//! caller are owned by it and released with [`paredlab_string_free`].

use paredlab::blaschke::AntiBlaschke;
use paredlab::lamination::{self, Angle, Chord};
use paredlab::monodromy::{self as mono, TracedPath};
use paredlab::mp::{self, Cx};
use paredlab::planegraph::{self as pg, GraphJson, PlaneGraph};
use paredlab::tischler::{self, fixtures, Verdict};
use paredlab::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Working precision (bits) for maps built through this interface.
pub const PL_PRECISION: u32 = 128;

/// Status codes. Validation, numerical and size-limit failures share the
/// command-line exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlStatus {
    Ok = 0,
    NullArgument = 1,
    Validation = 2,
    Numerical = 3,
    SizeLimit = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Plane graph handle.
pub struct PlGraph(PlaneGraph);

/// Anti-Blaschke product handle.
pub struct PlMap(AntiBlaschke);

/// Traced path handle.
pub struct PlTrace(TracedPath);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> PlStatus {
    match e.exit_code() {
        3 => PlStatus::Numerical,
        4 => PlStatus::SizeLimit,
        _ => PlStatus::Validation,
    }
}

/// Runs `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), PlStatus>) -> PlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic".into());
            PlStatus::Panic
        }
    }
}

fn lib<T>(r: paredlab::Result<T>) -> Result<T, PlStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn invalid(msg: &str) -> PlStatus {
    set_error(msg.into());
    PlStatus::Validation
}

unsafe fn cstr<'a>(p: *const c_char) -> Result<&'a str, PlStatus> {
    if p.is_null() {
        set_error("null string argument".into());
        return Err(PlStatus::NullArgument);
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid("string is not UTF-8"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, PlStatus> {
    p.as_mut().ok_or_else(|| {
        set_error("null output argument".into());
        PlStatus::NullArgument
    })
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, PlStatus> {
    p.as_ref().ok_or_else(|| {
        set_error("null handle".into());
        PlStatus::NullArgument
    })
}

fn give_string(s: String, dst: &mut *mut c_char) -> Result<(), PlStatus> {
    *dst = CString::new(s).map_err(|_| invalid("string contains NUL"))?.into_raw();
    Ok(())
}

/// Message of the last failure on this thread; valid until the next call
/// that fails. Never null.
#[no_mangle]
pub extern "C" fn paredlab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn paredlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

// Plane graphs

/// Parses a plane graph from its JSON wire format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_from_json(json: *const c_char, graph: *mut *mut PlGraph) -> PlStatus {
    guard(|| {
        let dst = out(graph)?;
        let j: GraphJson = serde_json::from_str(cstr(json)?).map_err(|e| invalid(&e.to_string()))?;
        *dst = Box::into_raw(Box::new(PlGraph(lib(PlaneGraph::from_json(&j))?)));
        Ok(())
    })
}

/// Built-in graph by name: `C<n>`, `K4`, `C4+chord`, `nsb`, `sb2`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `graph` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_fixture(name: *const c_char, graph: *mut *mut PlGraph) -> PlStatus {
    guard(|| {
        let dst = out(graph)?;
        let g = match cstr(name)? {
            "K4" => PlaneGraph::k4(),
            "C4+chord" => PlaneGraph::c4_chord(),
            "nsb" => fixtures::nsb(),
            "sb2" => fixtures::sb2().0,
            other => match other.strip_prefix('C').and_then(|n| n.parse::<usize>().ok()) {
                Some(n) if n >= 3 => PlaneGraph::cycle(n),
                _ => return Err(invalid("unknown fixture")),
            },
        };
        *dst = Box::into_raw(Box::new(PlGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_free(graph: *mut PlGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_counts(
    graph: *const PlGraph,
    vertices: *mut usize,
    edges: *mut usize,
    faces: *mut usize,
) -> PlStatus {
    guard(|| {
        let g = &handle(graph)?.0;
        *out(vertices)? = g.vertex_count();
        *out(edges)? = g.edge_count();
        *out(faces)? = g.face_count();
        Ok(())
    })
}

/// JSON wire format of the graph, owned by the caller.
///
/// # Safety
/// `graph` must be a live handle; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_to_json(graph: *const PlGraph, json: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let s = serde_json::to_string(&handle(graph)?.0.to_json()).map_err(|e| invalid(&e.to_string()))?;
        give_string(s, out(json)?)
    })
}

/// Sets `bounded` to 1 when the deformation space is bounded, 0 otherwise.
///
/// # Safety
/// `graph` must be a live handle; `bounded` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_verdict(graph: *const PlGraph, bounded: *mut i32) -> PlStatus {
    guard(|| {
        let v = lib(tischler::boundedness_verdict(&handle(graph)?.0))?;
        *out(bounded)? = i32::from(matches!(v, Verdict::Bounded));
        Ok(())
    })
}

/// Whether `gamma` bifurcates into `gamma2`, and the number of embedding
/// classes `N(Γ ↪ Γ′)`.
///
/// # Safety
/// Both handles must be live; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_graph_bifurcates(
    gamma: *const PlGraph,
    gamma2: *const PlGraph,
    bifurcates: *mut i32,
    classes: *mut usize,
) -> PlStatus {
    guard(|| {
        let (a, b) = (&handle(gamma)?.0, &handle(gamma2)?.0);
        let r = lib(tischler::bifurcates(a, b))?;
        *out(bifurcates)? = i32::from(r.bifurcates);
        *out(classes)? = tischler::embedding_class_count(a, b);
        Ok(())
    })
}

/// Number of plane graph classes in the atlas on `n` vertices.
///
/// # Safety
/// `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_atlas_count(n: usize, count: *mut usize) -> PlStatus {
    guard(|| {
        *out(count)? = lib(pg::enumerate_atlas(n))?.len();
        Ok(())
    })
}

// Laminations

/// Pullback lamination from generators `"a:b,c:d"`, as JSON owned by the caller.
///
/// # Safety
/// `gens` must be a NUL-terminated string; `json` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_lamination_json(d: usize, gens: *const c_char, depth: usize, json: *mut *mut c_char) -> PlStatus {
    guard(|| {
        let dst = out(json)?;
        let chords = cstr(gens)?
            .split(',')
            .map(|leaf| {
                let (a, b) = leaf.split_once(':').ok_or_else(|| invalid("leaf is not a:b"))?;
                lib(Chord::new(lib(Angle::parse(a.trim()))?, lib(Angle::parse(b.trim()))?))
            })
            .collect::<Result<Vec<_>, PlStatus>>()?;
        let lam = lib(lamination::generate(&chords, d, depth))?;
        let s = serde_json::to_string(&lam.to_json()).map_err(|e| invalid(&e.to_string()))?;
        give_string(s, dst)
    })
}

// Anti-Blaschke products

/// Normalized map with a zero at the origin and at each `(re, im)` pair of
/// `zeros` (`2 * count` doubles).
///
/// # Safety
/// `zeros` must hold `2 * count` doubles (or be null when `count` is 0);
/// `map` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_new(zeros: *const f64, count: usize, map: *mut *mut PlMap) -> PlStatus {
    guard(|| {
        let dst = out(map)?;
        if zeros.is_null() && count > 0 {
            return Err(invalid("null zeros"));
        }
        let raw = if count == 0 { &[][..] } else { std::slice::from_raw_parts(zeros, 2 * count) };
        let _g = mp::push_precision(PL_PRECISION);
        let zs = raw.chunks(2).map(|c| Cx::from_f64(c[0], c[1])).collect();
        *dst = Box::into_raw(Box::new(PlMap(lib(AntiBlaschke::from_zeros(zs))?)));
        Ok(())
    })
}

/// # Safety
/// `map` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_free(map: *mut PlMap) {
    if !map.is_null() {
        drop(Box::from_raw(map));
    }
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_degree(map: *const PlMap) -> usize {
    map.as_ref().map(|m| m.0.degree()).unwrap_or(0)
}

unsafe fn fill(values: &[f64], buf: *mut f64, cap: usize) -> Result<(), PlStatus> {
    if cap < values.len() {
        set_error(format!("buffer holds {cap}, need {}", values.len()));
        return Err(PlStatus::BufferTooSmall);
    }
    if buf.is_null() {
        set_error("null buffer".into());
        return Err(PlStatus::NullArgument);
    }
    ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    Ok(())
}

/// Boundary fixed points in turns, labels `0..=d`; `buf` holds `d + 1` doubles.
///
/// # Safety
/// `map` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_fixed_points(map: *const PlMap, buf: *mut f64, cap: usize) -> PlStatus {
    guard(|| {
        let _g = mp::push_precision(PL_PRECISION);
        let fix = lib(handle(map)?.0.boundary_fixed_points())?;
        fill(&fix.turns_f64(), buf, cap)
    })
}

/// Log-multipliers at the fixed points, labels `0..=d`.
///
/// # Safety
/// `map` must be a live handle; `buf` must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_multipliers(map: *const PlMap, buf: *mut f64, cap: usize) -> PlStatus {
    guard(|| {
        let _g = mp::push_precision(PL_PRECISION);
        fill(&lib(handle(map)?.0.multipliers())?, buf, cap)
    })
}

/// Largest hyperbolic displacement of a critical point.
///
/// # Safety
/// `map` must be a live handle; `value` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_map_critical_displacement(map: *const PlMap, value: *mut f64) -> PlStatus {
    guard(|| {
        let _g = mp::push_precision(PL_PRECISION);
        *out(value)? = lib(handle(map)?.0.critical_displacement())?;
        Ok(())
    })
}

// Monodromy

/// Traces period-`period` points around `turns` turns of `e^{2πiθ} z̄^d`
/// sampled at `steps` points.
///
/// # Safety
/// `trace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_rotation_trace(d: usize, turns: i64, steps: usize, period: usize, trace: *mut *mut PlTrace) -> PlStatus {
    guard(|| {
        let dst = out(trace)?;
        if d < 2 || steps == 0 {
            return Err(invalid("need d ≥ 2 and at least one step"));
        }
        let _g = mp::push_precision(PL_PRECISION);
        let maps = mono::rotation_loop(d, turns, steps);
        let seeds = mono::seeds_from_angles(&lib(mono::seed_periodic_points(d, period))?);
        *dst = Box::into_raw(Box::new(PlTrace(lib(mono::trace(&maps, &seeds, period))?)));
        Ok(())
    })
}

/// `a` followed by `b` as a new handle.
///
/// # Safety
/// Both handles must be live; `trace` must be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_trace_compose(a: *const PlTrace, b: *const PlTrace, trace: *mut *mut PlTrace) -> PlStatus {
    guard(|| {
        let dst = out(trace)?;
        let _g = mp::push_precision(PL_PRECISION);
        *dst = Box::into_raw(Box::new(PlTrace(lib(mono::compose(&handle(a)?.0, &handle(b)?.0))?)));
        Ok(())
    })
}

/// # Safety
/// `trace` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn paredlab_trace_free(trace: *mut PlTrace) {
    if !trace.is_null() {
        drop(Box::from_raw(trace));
    }
}

/// Piece permutation in one-line notation; `buf` holds `d + 1` entries.
///
/// # Safety
/// `trace` must be a live handle; `buf` must hold `cap` entries.
#[no_mangle]
pub unsafe extern "C" fn paredlab_trace_permutation(trace: *const PlTrace, buf: *mut usize, cap: usize) -> PlStatus {
    guard(|| {
        let p = &handle(trace)?.0.permutation;
        if cap < p.len() {
            set_error(format!("buffer holds {cap}, need {}", p.len()));
            return Err(PlStatus::BufferTooSmall);
        }
        if buf.is_null() {
            return Err(invalid("null buffer"));
        }
        ptr::copy_nonoverlapping(p.as_ptr(), buf, p.len());
        Ok(())
    })
}

/// Braid word as signed generator indices. `len` receives the word length
/// even when `cap` is too small, so callers can size the buffer.
///
/// # Safety
/// `trace` must be a live handle; `buf` must hold `cap` entries; `len` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn paredlab_trace_braid(trace: *const PlTrace, buf: *mut i32, cap: usize, len: *mut usize) -> PlStatus {
    guard(|| {
        let w = &handle(trace)?.0.braid;
        *out(len)? = w.len();
        if cap < w.len() {
            set_error(format!("buffer holds {cap}, need {}", w.len()));
            return Err(PlStatus::BufferTooSmall);
        }
        if !w.is_empty() {
            if buf.is_null() {
                return Err(invalid("null buffer"));
            }
            ptr::copy_nonoverlapping(w.as_ptr(), buf, w.len());
        }
        Ok(())
    })
}
