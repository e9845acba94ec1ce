//! C ABI for the solvers: opaque handles, integer status codes, and a
//! cbindgen-generated header (`include/winpibt.h`).
//!
//! Ownership rules: every `*_new`-style constructor hands the caller an
//! opaque pointer that must be released with the matching `*_free`; strings
//! returned by `winpibt_result_to_json` go back through
//! `winpibt_string_free`. All functions tolerate null pointers and report
//! `WINPIBT_STATUS_NULL_POINTER` instead of crashing.

use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;

use winpibt::graph::{Graph, NodeId, PibtCondition};
use winpibt::io::parse_map;
use winpibt::scenario::{Instance, Mode, RunResult};
use winpibt::SolverKind;

/// Status codes returned by fallible calls. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinpibtStatus {
    Ok = 0,
    NullPointer = -1,
    InvalidArgument = -2,
    ParseFailed = -3,
    InvalidInstance = -4,
    InvalidUtf8 = -5,
    OutOfRange = -6,
    SolverPanicked = -7,
}

/// Solver selector for the solve entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinpibtSolverKind {
    Pibt = 0,
    Winpibt = 1,
    WinpibtIter = 2,
}

/// Opaque graph handle.
pub struct WinpibtGraph {
    inner: Arc<Graph>,
}

/// Opaque run-result handle.
pub struct WinpibtResult {
    inner: RunResult,
}

fn solver_kind(kind: WinpibtSolverKind, window: u32) -> Option<SolverKind> {
    match kind {
        WinpibtSolverKind::Pibt => Some(SolverKind::Pibt),
        WinpibtSolverKind::Winpibt if window >= 1 => {
            Some(SolverKind::WinPibt { window: window as usize })
        }
        WinpibtSolverKind::WinpibtIter if window >= 1 => {
            Some(SolverKind::WinPibtIter { window: window as usize })
        }
        _ => None,
    }
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> WinpibtStatus {
    if out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    unsafe { *out = Box::into_raw(Box::new(value)) };
    WinpibtStatus::Ok
}

/// Parse MovingAI map text into a graph handle.
///
/// # Safety
/// `text` must be a valid NUL-terminated string; `out` must be a valid
/// pointer to receive the handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_from_map_text(
    text: *const c_char,
    out: *mut *mut WinpibtGraph,
) -> WinpibtStatus {
    if text.is_null() || out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let Ok(text) = unsafe { CStr::from_ptr(text) }.to_str() else {
        return WinpibtStatus::InvalidUtf8;
    };
    let Ok(map) = parse_map(text) else {
        return WinpibtStatus::ParseFailed;
    };
    let Ok(graph) = map.to_graph() else {
        return WinpibtStatus::InvalidInstance;
    };
    unsafe { write_out(out, WinpibtGraph { inner: Arc::new(graph) }) }
}

/// Build a 4-connected grid graph from a row-major passable mask
/// (`width * height` bytes, nonzero = passable).
///
/// # Safety
/// `passable` must point to `width * height` readable bytes; `out` must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_build_grid(
    width: u32,
    height: u32,
    passable: *const u8,
    out: *mut *mut WinpibtGraph,
) -> WinpibtStatus {
    if passable.is_null() || out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let len = width as usize * height as usize;
    let mask: Vec<bool> = unsafe { std::slice::from_raw_parts(passable, len) }
        .iter()
        .map(|&b| b != 0)
        .collect();
    let Ok(graph) = Graph::build_grid(width as usize, height as usize, &mask) else {
        return WinpibtStatus::InvalidInstance;
    };
    unsafe { write_out(out, WinpibtGraph { inner: Arc::new(graph) }) }
}

/// # Safety
/// `graph` must be a live handle from a constructor, or null.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_free(graph: *mut WinpibtGraph) {
    if !graph.is_null() {
        drop(unsafe { Box::from_raw(graph) });
    }
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_node_count(graph: *const WinpibtGraph) -> u32 {
    if graph.is_null() {
        return 0;
    }
    unsafe { &*graph }.inner.node_count() as u32
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_edge_count(graph: *const WinpibtGraph) -> u64 {
    if graph.is_null() {
        return 0;
    }
    unsafe { &*graph }.inner.edge_count() as u64
}

/// Node id at grid cell (x, y), or -1 when blocked, out of bounds, or the
/// graph is not grid-backed.
///
/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_node_at(graph: *const WinpibtGraph, x: u32, y: u32) -> i64 {
    if graph.is_null() {
        return -1;
    }
    let g = &unsafe { &*graph }.inner;
    match g.grid().and_then(|grid| grid.node_at(x as usize, y as usize)) {
        Some(node) => node.index() as i64,
        None => -1,
    }
}

/// Grid cell of a node id.
///
/// # Safety
/// All pointers must be valid; `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_node_xy(
    graph: *const WinpibtGraph,
    node: u32,
    x: *mut u32,
    y: *mut u32,
) -> WinpibtStatus {
    if graph.is_null() || x.is_null() || y.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let g = &unsafe { &*graph }.inner;
    if node as usize >= g.node_count() {
        return WinpibtStatus::OutOfRange;
    }
    let Some(grid) = g.grid() else {
        return WinpibtStatus::InvalidArgument;
    };
    let (cx, cy) = grid.cell_of(NodeId::new(node as usize));
    unsafe {
        *x = cx as u32;
        *y = cy as u32;
    }
    WinpibtStatus::Ok
}

/// Returns 1 when every adjacent pair lies on a simple cycle of length at
/// least 3, otherwise 0 with one violating edge written to the out
/// parameters (when non-null). Null graph returns -1.
///
/// # Safety
/// `graph` must be a live handle; out pointers may be null.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_check_condition(
    graph: *const WinpibtGraph,
    witness_from: *mut u32,
    witness_to: *mut u32,
) -> i32 {
    if graph.is_null() {
        return -1;
    }
    match unsafe { &*graph }.inner.check_pibt_condition() {
        PibtCondition::Satisfied => 1,
        PibtCondition::Violated { from, to } => {
            if !witness_from.is_null() {
                unsafe { *witness_from = from.index() as u32 };
            }
            if !witness_to.is_null() {
                unsafe { *witness_to = to.index() as u32 };
            }
            0
        }
    }
}

/// Shortest-path hop count between two nodes.
///
/// # Safety
/// Pointers must be valid; `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_graph_dist(
    graph: *const WinpibtGraph,
    from: u32,
    to: u32,
    out: *mut u32,
) -> WinpibtStatus {
    if graph.is_null() || out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let g = &unsafe { &*graph }.inner;
    match g.dist(NodeId::new(from as usize), NodeId::new(to as usize)) {
        Ok(d) => {
            unsafe { *out = d as u32 };
            WinpibtStatus::Ok
        }
        Err(_) => WinpibtStatus::OutOfRange,
    }
}

unsafe fn nodes_from(ptr: *const u32, n: usize, limit: usize) -> Option<Vec<NodeId>> {
    let raw = unsafe { std::slice::from_raw_parts(ptr, n) };
    raw.iter()
        .map(|&v| if (v as usize) < limit { Some(NodeId::new(v as usize)) } else { None })
        .collect()
}

fn run_guarded(instance: Instance, kind: SolverKind, out: *mut *mut WinpibtResult) -> WinpibtStatus {
    let outcome = catch_unwind(AssertUnwindSafe(|| winpibt::run(instance, kind)));
    match outcome {
        Ok(Ok(result)) => unsafe { write_out(out, WinpibtResult { inner: result }) },
        Ok(Err(_)) => WinpibtStatus::InvalidInstance,
        Err(_) => WinpibtStatus::SolverPanicked,
    }
}

/// Solve a fixed-goal instance. The run may end at the timestep limit; that
/// is reported through `winpibt_result_success`, not the status code.
///
/// # Safety
/// `starts` and `goals` must point to `n_agents` node ids each; `graph` must
/// be a live handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn winpibt_solve_classical(
    graph: *const WinpibtGraph,
    starts: *const u32,
    goals: *const u32,
    n_agents: usize,
    solver: WinpibtSolverKind,
    window: u32,
    timestep_limit: u32,
    seed: u64,
    out: *mut *mut WinpibtResult,
) -> WinpibtStatus {
    if graph.is_null() || starts.is_null() || goals.is_null() || out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let Some(kind) = solver_kind(solver, window) else {
        return WinpibtStatus::InvalidArgument;
    };
    let g = unsafe { &*graph }.inner.clone();
    let limit = g.node_count();
    let (Some(starts), Some(goals)) = (unsafe { nodes_from(starts, n_agents, limit) }, unsafe {
        nodes_from(goals, n_agents, limit)
    }) else {
        return WinpibtStatus::OutOfRange;
    };
    let instance = Instance {
        graph: g,
        starts,
        mode: Mode::Classical { goals },
        timestep_limit: timestep_limit as usize,
        seed,
    };
    run_guarded(instance, kind, out)
}

/// Solve a task-stream instance: every arrival issues a fresh random goal
/// drawn from `goal_seed`, until `task_count` tasks have completed.
///
/// # Safety
/// `starts` must point to `n_agents` node ids; `graph` must be a live
/// handle; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn winpibt_solve_task_stream(
    graph: *const WinpibtGraph,
    starts: *const u32,
    n_agents: usize,
    task_count: u32,
    goal_seed: u64,
    solver: WinpibtSolverKind,
    window: u32,
    timestep_limit: u32,
    out: *mut *mut WinpibtResult,
) -> WinpibtStatus {
    if graph.is_null() || starts.is_null() || out.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let Some(kind) = solver_kind(solver, window) else {
        return WinpibtStatus::InvalidArgument;
    };
    let g = unsafe { &*graph }.inner.clone();
    let limit = g.node_count();
    let Some(starts) = (unsafe { nodes_from(starts, n_agents, limit) }) else {
        return WinpibtStatus::OutOfRange;
    };
    let instance = Instance {
        graph: g,
        starts,
        mode: Mode::Iterative { task_count: task_count as usize, goal_seed },
        timestep_limit: timestep_limit as usize,
        seed: goal_seed,
    };
    run_guarded(instance, kind, out)
}

/// # Safety
/// `result` must be a live handle from a solve call, or null.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_free(result: *mut WinpibtResult) {
    if !result.is_null() {
        drop(unsafe { Box::from_raw(result) });
    }
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_success(result: *const WinpibtResult) -> i32 {
    if result.is_null() {
        return 0;
    }
    unsafe { &*result }.inner.success as i32
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_soc(result: *const WinpibtResult) -> u64 {
    if result.is_null() {
        return 0;
    }
    unsafe { &*result }.inner.soc as u64
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_makespan(result: *const WinpibtResult) -> u64 {
    if result.is_null() {
        return 0;
    }
    unsafe { &*result }.inner.makespan as u64
}

/// Mean service time of the terminating tasks; NaN for classical runs.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_service_mean(result: *const WinpibtResult) -> f64 {
    if result.is_null() {
        return f64::NAN;
    }
    unsafe { &*result }.inner.service_mean.unwrap_or(f64::NAN)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_agent_count(result: *const WinpibtResult) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { &*result }.inner.paths.len()
}

/// Number of recorded timesteps (path length) for one agent; 0 when out of
/// range.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_path_len(result: *const WinpibtResult, agent: usize) -> usize {
    if result.is_null() {
        return 0;
    }
    unsafe { &*result }.inner.paths.get(agent).map_or(0, Vec::len)
}

/// Copy one agent's executed node ids into `buf` (up to `cap` entries);
/// the number written lands in `written` when non-null.
///
/// # Safety
/// `buf` must point to at least `cap` writable u32s; `result` must be a
/// live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_path_nodes(
    result: *const WinpibtResult,
    agent: usize,
    buf: *mut u32,
    cap: usize,
    written: *mut usize,
) -> WinpibtStatus {
    if result.is_null() || buf.is_null() {
        return WinpibtStatus::NullPointer;
    }
    let Some(path) = unsafe { &*result }.inner.paths.get(agent) else {
        return WinpibtStatus::OutOfRange;
    };
    let count = path.len().min(cap);
    unsafe { std::ptr::copy_nonoverlapping(path.as_ptr(), buf, count) };
    if !written.is_null() {
        unsafe { *written = count };
    }
    if count < path.len() {
        WinpibtStatus::InvalidArgument
    } else {
        WinpibtStatus::Ok
    }
}

/// Full result record as a JSON string; null on error. Free with
/// `winpibt_string_free`.
///
/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn winpibt_result_to_json(result: *const WinpibtResult) -> *mut c_char {
    if result.is_null() {
        return std::ptr::null_mut();
    }
    let Ok(json) = serde_json::to_string(&unsafe { &*result }.inner) else {
        return std::ptr::null_mut();
    };
    CString::new(json).map_or(std::ptr::null_mut(), CString::into_raw)
}

/// # Safety
/// `s` must have been returned by `winpibt_result_to_json` and not yet
/// freed.
#[no_mangle]
pub unsafe extern "C" fn winpibt_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn demo_graph() -> *mut WinpibtGraph {
        let text = CString::new("type octile\nheight 2\nwidth 3\nmap\n...\n...\n").unwrap();
        let mut out: *mut WinpibtGraph = std::ptr::null_mut();
        let status = unsafe { winpibt_graph_from_map_text(text.as_ptr(), &mut out) };
        assert_eq!(status, WinpibtStatus::Ok);
        out
    }

    #[test]
    fn graph_handle_roundtrip() {
        let g = demo_graph();
        unsafe {
            assert_eq!(winpibt_graph_node_count(g), 6);
            assert_eq!(winpibt_graph_edge_count(g), 7);
            assert_eq!(winpibt_graph_node_at(g, 2, 1), 5);
            let (mut x, mut y) = (0u32, 0u32);
            assert_eq!(winpibt_graph_node_xy(g, 5, &mut x, &mut y), WinpibtStatus::Ok);
            assert_eq!((x, y), (2, 1));
            let mut d = 0u32;
            assert_eq!(winpibt_graph_dist(g, 0, 5, &mut d), WinpibtStatus::Ok);
            assert_eq!(d, 3);
            assert_eq!(winpibt_graph_check_condition(g, std::ptr::null_mut(), std::ptr::null_mut()), 1);
            winpibt_graph_free(g);
        }
    }

    #[test]
    fn condition_witness_is_reported() {
        let text = CString::new("type octile\nheight 1\nwidth 3\nmap\n...\n").unwrap();
        let mut g: *mut WinpibtGraph = std::ptr::null_mut();
        unsafe {
            assert_eq!(winpibt_graph_from_map_text(text.as_ptr(), &mut g), WinpibtStatus::Ok);
            let (mut from, mut to) = (u32::MAX, u32::MAX);
            assert_eq!(winpibt_graph_check_condition(g, &mut from, &mut to), 0);
            assert!(from != u32::MAX && to != u32::MAX);
            winpibt_graph_free(g);
        }
    }

    #[test]
    fn classical_solve_reproduces_the_demo_paths() {
        let g = demo_graph();
        let starts = [0u32, 4, 5, 2];
        let goals = [5u32, 1, 2, 3];
        let mut result: *mut WinpibtResult = std::ptr::null_mut();
        unsafe {
            let status = winpibt_solve_classical(
                g,
                starts.as_ptr(),
                goals.as_ptr(),
                4,
                WinpibtSolverKind::Winpibt,
                3,
                1000,
                0,
                &mut result,
            );
            assert_eq!(status, WinpibtStatus::Ok);
            assert_eq!(winpibt_result_success(result), 1);
            assert_eq!(winpibt_result_makespan(result), 3);
            assert_eq!(winpibt_result_agent_count(result), 4);
            let mut buf = [0u32; 8];
            let mut written = 0usize;
            assert_eq!(
                winpibt_result_path_nodes(result, 0, buf.as_mut_ptr(), buf.len(), &mut written),
                WinpibtStatus::Ok
            );
            assert_eq!(&buf[..written], &[0, 1, 2, 5]);
            let json = winpibt_result_to_json(result);
            assert!(!json.is_null());
            let text = CStr::from_ptr(json).to_str().unwrap();
            assert!(text.contains("\"solver\":\"winpibt-w3\""));
            winpibt_string_free(json);
            winpibt_result_free(result);
            winpibt_graph_free(g);
        }
    }

    #[test]
    fn task_stream_solve_completes() {
        let g = demo_graph();
        let starts = [0u32, 5];
        let mut result: *mut WinpibtResult = std::ptr::null_mut();
        unsafe {
            let status = winpibt_solve_task_stream(
                g,
                starts.as_ptr(),
                2,
                5,
                9,
                WinpibtSolverKind::WinpibtIter,
                3,
                1000,
                &mut result,
            );
            assert_eq!(status, WinpibtStatus::Ok);
            assert_eq!(winpibt_result_success(result), 1);
            assert!(winpibt_result_service_mean(result) >= 0.0);
            winpibt_result_free(result);
            winpibt_graph_free(g);
        }
    }

    #[test]
    fn errors_are_status_codes_not_crashes() {
        unsafe {
            let mut out: *mut WinpibtGraph = std::ptr::null_mut();
            assert_eq!(
                winpibt_graph_from_map_text(std::ptr::null(), &mut out),
                WinpibtStatus::NullPointer
            );
            let bad = CString::new("not a map").unwrap();
            assert_eq!(
                winpibt_graph_from_map_text(bad.as_ptr(), &mut out),
                WinpibtStatus::ParseFailed
            );
            let g = demo_graph();
            let starts = [0u32];
            let goals = [99u32];
            let mut result: *mut WinpibtResult = std::ptr::null_mut();
            assert_eq!(
                winpibt_solve_classical(
                    g,
                    starts.as_ptr(),
                    goals.as_ptr(),
                    1,
                    WinpibtSolverKind::Winpibt,
                    3,
                    100,
                    0,
                    &mut result,
                ),
                WinpibtStatus::OutOfRange
            );
            // Duplicate starts are an instance validation error.
            let starts = [0u32, 0];
            let goals = [1u32, 2];
            assert_eq!(
                winpibt_solve_classical(
                    g,
                    starts.as_ptr(),
                    goals.as_ptr(),
                    2,
                    WinpibtSolverKind::Winpibt,
                    3,
                    100,
                    0,
                    &mut result,
                ),
                WinpibtStatus::InvalidInstance
            );
            // Window 0 is rejected up front.
            assert_eq!(
                winpibt_solve_classical(
                    g,
                    starts.as_ptr(),
                    goals.as_ptr(),
                    2,
                    WinpibtSolverKind::Winpibt,
                    0,
                    100,
                    0,
                    &mut result,
                ),
                WinpibtStatus::InvalidArgument
            );
            winpibt_graph_free(g);
        }
    }
}
