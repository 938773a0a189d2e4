//! C ABI over the `netdesign` crate.
//!
//! Graphs and betweenness profiles cross the boundary as opaque handles
//! that the caller releases with the matching `*_free` function. Every
//! fallible call returns an [`NdStatus`]; on failure a message is kept per
//! thread and can be read with [`nd_last_error_message`]. Panics never
//! unwind into the caller; they surface as [`NdStatus::Panic`].
//!
//! Routing and scheme selectors are plain `uint32_t` values from
//! [`NdRouting`] and [`NdScheme`] so out-of-range input is rejected rather
//! than undefined.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use netdesign::capacity::{assign_combo, evaluate_combo, Combo, Profiles, Scheme};
use netdesign::simulator::{EtaConfig, RcSearch, SimOptions, Simulation};
use netdesign::{
    load_edge_list, save_edge_list, BetweennessProfile, Error, Family, ForwardingTable, Graph,
    RoutingAlgorithm, RoutingSystem, SuccessorChoice,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Parse = 3,
    InvalidParameter = 4,
    NotConnected = 5,
    Generation = 6,
    Search = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdRouting {
    Spr = 0,
    Efr = 1,
}

#[repr(u32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NdScheme {
    Uniform = 0,
    Degree = 1,
    Betweenness = 2,
    EffectiveBetweenness = 3,
}

/// Opaque graph handle.
pub struct NdGraph(Graph);

/// Opaque effective-betweenness profile handle.
pub struct NdProfile(BetweennessProfile);

/// Analytic evaluation of one capability/routing design.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NdEvaluation {
    pub rc_analytic: f64,
    pub c_max: f64,
    pub argmin_node: usize,
}

/// Window layout for the order-parameter measurement.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NdEtaConfig {
    pub warmup: usize,
    pub delta_t: usize,
    pub windows: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn fail(status: NdStatus, message: impl Into<String>) -> NdStatus {
    set_error(message.into());
    status
}

fn status_of(err: &Error) -> NdStatus {
    match err {
        Error::Input(_) => NdStatus::InvalidInput,
        Error::Parse { .. } => NdStatus::Parse,
        Error::Parameter(_) => NdStatus::InvalidParameter,
        Error::NotConnected => NdStatus::NotConnected,
        Error::Generation { .. } => NdStatus::Generation,
        Error::Search(_) => NdStatus::Search,
        Error::PartialSweep { source, .. } => status_of(source),
        Error::Io(_) => NdStatus::Io,
    }
}

impl From<Error> for NdStatus {
    fn from(err: Error) -> Self {
        let status = status_of(&err);
        set_error(err.to_string());
        status
    }
}

/// Runs `body`, clearing the last error first and turning panics into
/// [`NdStatus::Panic`].
fn guard(body: impl FnOnce() -> Result<(), NdStatus>) -> NdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => NdStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(NdStatus::Panic, format!("internal panic: {message}"))
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, NdStatus> {
    p.as_ref()
        .ok_or_else(|| fail(NdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NdStatus> {
    p.as_mut()
        .ok_or_else(|| fail(NdStatus::NullPointer, format!("{what} is null")))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, NdStatus> {
    if p.is_null() {
        return Err(fail(NdStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(NdStatus::InvalidInput, format!("{what} is not valid UTF-8")))
}

fn routing(code: u32) -> Result<RoutingAlgorithm, NdStatus> {
    match code {
        0 => Ok(RoutingAlgorithm::Spr),
        1 => Ok(RoutingAlgorithm::Efr),
        _ => Err(fail(NdStatus::InvalidParameter, format!("unknown routing code {code}"))),
    }
}

fn scheme(code: u32) -> Result<Scheme, NdStatus> {
    match code {
        0 => Ok(Scheme::Uc),
        1 => Ok(Scheme::Dc),
        2 => Ok(Scheme::Bc),
        3 => Ok(Scheme::Ebc),
        _ => Err(fail(NdStatus::InvalidParameter, format!("unknown scheme code {code}"))),
    }
}

fn copy_out<T: Copy>(src: &[T], dst: *mut T, len: usize) -> Result<(), NdStatus> {
    if dst.is_null() {
        return Err(fail(NdStatus::NullPointer, "output buffer is null"));
    }
    if len < src.len() {
        return Err(fail(
            NdStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    unsafe { ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len()) };
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn nd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Generates a benchmark topology (`"ring"`, `"lattice"`, `"ws"`, `"er"`,
/// `"ba"`, `"pa"`, `"hot"`) with `n` nodes.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_generate(
    family: *const c_char,
    n: usize,
    seed: u64,
    out: *mut *mut NdGraph,
) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let family: Family = text(family, "family")?.parse()?;
        let g = family.spec(n, seed).generate()?;
        *out = Box::into_raw(Box::new(NdGraph(g)));
        Ok(())
    })
}

/// Parses a whitespace-separated edge list (`#` starts a comment line).
///
/// # Safety
/// `edge_list` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_from_edge_list(
    edge_list: *const c_char,
    out: *mut *mut NdGraph,
) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let g = load_edge_list(text(edge_list, "edge_list")?)?;
        *out = Box::into_raw(Box::new(NdGraph(g)));
        Ok(())
    })
}

/// Builds a graph on `n` nodes from `edge_count` pairs stored flat in
/// `pairs` (`u0, v0, u1, v1, ...`).
///
/// # Safety
/// `pairs` must hold `2 * edge_count` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_from_edges(
    n: usize,
    pairs: *const u32,
    edge_count: usize,
    out: *mut *mut NdGraph,
) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if pairs.is_null() && edge_count > 0 {
            return Err(fail(NdStatus::NullPointer, "pairs is null"));
        }
        let flat = if edge_count == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(pairs, 2 * edge_count)
        };
        let edges: Vec<(usize, usize)> = flat
            .chunks_exact(2)
            .map(|p| (p[0] as usize, p[1] as usize))
            .collect();
        let g = Graph::new(n, edges)?;
        *out = Box::into_raw(Box::new(NdGraph(g)));
        Ok(())
    })
}

/// Releases a graph. NULL is ignored.
///
/// # Safety
/// `graph` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_free(graph: *mut NdGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Node count, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_node_count(graph: *const NdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Edge count, 0 for NULL.
///
/// # Safety
/// `graph` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_edge_count(graph: *const NdGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

/// Copies node degrees into `out`, which must hold `node_count` values.
///
/// # Safety
/// `graph` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_degrees(graph: *const NdGraph, out: *mut u32, len: usize) -> NdStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let degrees: Vec<u32> = g.0.degrees().into_iter().map(|d| d as u32).collect();
        copy_out(&degrees, out, len)
    })
}

/// Diameter and average shortest path length of a connected graph.
///
/// # Safety
/// `graph` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_metrics(
    graph: *const NdGraph,
    diameter: *mut u32,
    avg_path_length: *mut f64,
) -> NdStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let diameter = out_ref(diameter, "diameter")?;
        let avg = out_ref(avg_path_length, "avg_path_length")?;
        let m = g.0.metrics()?;
        *diameter = m.diameter;
        *avg = m.avg_path_length;
        Ok(())
    })
}

/// Serialises a graph as an edge list. Release the string with
/// [`nd_string_free`].
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_graph_to_edge_list(graph: *const NdGraph, out: *mut *mut c_char) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let g = get(graph, "graph")?;
        let s = CString::new(save_edge_list(&g.0)).expect("edge list has no NUL");
        *out = s.into_raw();
        Ok(())
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Effective betweenness of every node under a routing algorithm.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_compute(
    graph: *const NdGraph,
    routing_code: u32,
    out: *mut *mut NdProfile,
) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let g = get(graph, "graph")?;
        let rs = RoutingSystem::build(&g.0, routing(routing_code)?)?;
        *out = Box::into_raw(Box::new(NdProfile(rs.effective_betweenness())));
        Ok(())
    })
}

/// Releases a profile. NULL is ignored.
///
/// # Safety
/// `profile` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_free(profile: *mut NdProfile) {
    if !profile.is_null() {
        drop(Box::from_raw(profile));
    }
}

/// Number of nodes covered, 0 for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_node_count(profile: *const NdProfile) -> usize {
    profile.as_ref().map_or(0, |p| p.0.node_count())
}

/// Largest betweenness value, NaN for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_b_max(profile: *const NdProfile) -> f64 {
    profile.as_ref().map_or(f64::NAN, |p| p.0.b_max)
}

/// Average candidate-path length, NaN for NULL.
///
/// # Safety
/// `profile` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_avg_path_length(profile: *const NdProfile) -> f64 {
    profile.as_ref().map_or(f64::NAN, |p| p.0.avg_path_length)
}

/// Copies per-node betweenness into `out`.
///
/// # Safety
/// `profile` must be a live handle; `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn nd_profile_values(profile: *const NdProfile, out: *mut f64, len: usize) -> NdStatus {
    guard(|| {
        let p = get(profile, "profile")?;
        copy_out(&p.0.values, out, len)
    })
}

/// Analytic critical rate and `C_max` of a design. BC capabilities come
/// from shortest-path betweenness, EBC from the evaluated routing.
///
/// # Safety
/// `graph` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_evaluate(
    graph: *const NdGraph,
    scheme_code: u32,
    routing_code: u32,
    out: *mut NdEvaluation,
) -> NdStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let g = get(graph, "graph")?;
        let combo = Combo::new(scheme(scheme_code)?, routing(routing_code)?);
        let profiles = Profiles::compute(&g.0)?;
        let e = evaluate_combo(&g.0, combo, &profiles)?;
        *out = NdEvaluation {
            rc_analytic: e.rc_analytic,
            c_max: e.c_max,
            argmin_node: e.argmin_node,
        };
        Ok(())
    })
}

fn eta_config(cfg: *const NdEtaConfig) -> EtaConfig {
    match unsafe { cfg.as_ref() } {
        Some(c) => EtaConfig {
            warmup: c.warmup,
            delta_t: c.delta_t,
            windows: c.windows,
            record_series: false,
        },
        None => EtaConfig::default(),
    }
}

/// Order parameter of a design at generation rate `rate`. `config` may be
/// NULL for the defaults (1000 warm-up steps, 10 windows of 100 steps).
///
/// # Safety
/// `graph` must be a live handle; `config` NULL or readable; `eta` writable.
#[no_mangle]
pub unsafe extern "C" fn nd_measure_eta(
    graph: *const NdGraph,
    scheme_code: u32,
    routing_code: u32,
    rate: f64,
    config: *const NdEtaConfig,
    seed: u64,
    eta: *mut f64,
) -> NdStatus {
    guard(|| {
        let eta = out_ref(eta, "eta")?;
        let g = get(graph, "graph")?;
        let combo = Combo::new(scheme(scheme_code)?, routing(routing_code)?);
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(fail(NdStatus::InvalidParameter, "rate must be a non-negative number"));
        }
        let profiles = Profiles::compute(&g.0)?;
        let ca = assign_combo(&g.0, combo, &profiles)?;
        let rs = RoutingSystem::build(&g.0, combo.routing)?;
        let table = ForwardingTable::new(&rs, SuccessorChoice::PathWeighted);
        let sim = Simulation::new(&table, &ca, SimOptions::default())?;
        *eta = sim.measure_eta(rate, eta_config(config), seed)?.eta;
        Ok(())
    })
}

/// Simulated critical rate by bisection over `[1, 4 R_c]` around the analytic
/// rate, three runs per decision. Either output may be NULL.
///
/// # Safety
/// `graph` must be a live handle; non-NULL outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn nd_estimate_rc(
    graph: *const NdGraph,
    scheme_code: u32,
    routing_code: u32,
    seed: u64,
    rc_sim: *mut f64,
    rc_analytic: *mut f64,
) -> NdStatus {
    guard(|| {
        let g = get(graph, "graph")?;
        let combo = Combo::new(scheme(scheme_code)?, routing(routing_code)?);
        let profiles = Profiles::compute(&g.0)?;
        let analytic = evaluate_combo(&g.0, combo, &profiles)?.rc_analytic;
        let ca = assign_combo(&g.0, combo, &profiles)?;
        let rs = RoutingSystem::build(&g.0, combo.routing)?;
        let table = ForwardingTable::new(&rs, SuccessorChoice::PathWeighted);
        let sim = Simulation::new(&table, &ca, SimOptions::default())?;
        let estimate = sim.estimate_rc(&RcSearch::around(analytic, seed))?;
        if let Some(out) = rc_sim.as_mut() {
            *out = estimate.rc;
        }
        if let Some(out) = rc_analytic.as_mut() {
            *out = analytic;
        }
        Ok(())
    })
}
