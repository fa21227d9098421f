//! C ABI over `bottleneck-lab`.
//!
//! Objects are opaque handles created by the `bl_state_from_*` and `bl_*_compute` calls and
//! released with the matching `*_free`. Every fallible call returns a
//! [`BlStatus`]; the message of the last failure on the calling thread is
//! available through [`bl_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bottleneck_lab::classical::{
    classical_ib_curve, classical_ib_dual_curve, classical_pf_curve, classical_pf_dual_curve, ClassicalConfig,
};
use bottleneck_lab::cli::state::StateSpec;
use bottleneck_lab::curve::{log_grid, Curve};
use bottleneck_lab::quantum::linalg::CMat;
use bottleneck_lab::quantum::{mutual_information, purify, subsystem_entropy, DensityOperator};
use bottleneck_lab::rate_region::{wak_boundary, RegionBoundary};
use bottleneck_lab::solver::{
    normalize_curve, quantum_ib_curve, quantum_ib_dual_curve, quantum_pf_curve, quantum_pf_dual_curve, SolverConfig,
};
use bottleneck_lab::Error;
use num_complex::Complex64;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Validation = 3,
    Dimension = 4,
    Infeasible = 5,
    ScaleLimit = 6,
    Numerical = 7,
    Io = 8,
    OutOfRange = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlCurveKind {
    /// `R(a)`: minimal compression at relevant information `a`.
    Ib = 0,
    /// `I_Y(R)`.
    IbDual = 1,
    /// `G(t)`.
    Pf = 2,
    /// `P(a)`.
    PfDual = 3,
}

/// Solver settings. Zero `d_w`/`d_v` select the defaults.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlSolverConfig {
    pub restarts: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub d_w: usize,
    pub d_v: usize,
    /// Log-spaced multiplier grid `[beta_lo, beta_hi]` with `beta_count` points.
    pub beta_lo: f64,
    pub beta_hi: f64,
    pub beta_count: usize,
    /// Nonzero: solve the classical problem on the diagonal of the state.
    pub classical: c_int,
    /// Nonzero: rescale the curve to the unit square.
    pub normalize: c_int,
}

/// Density operator on `X ⊗ Y`.
pub struct BlState {
    rho: DensityOperator,
}

pub struct BlCurve {
    curve: Curve,
}

pub struct BlRegion {
    boundary: RegionBoundary,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(s).ok());
}

fn status_of(e: &Error) -> BlStatus {
    match e {
        Error::Validation(_) | Error::UnknownSubsystem(_) | Error::LabelCollision(_) | Error::Json(_) | Error::Csv(_) => {
            BlStatus::Validation
        }
        Error::Dimension(_) => BlStatus::Dimension,
        Error::Infeasible(_) => BlStatus::Infeasible,
        Error::ScaleLimit(_) => BlStatus::ScaleLimit,
        Error::Numerical(_) => BlStatus::Numerical,
        Error::Io(_) => BlStatus::Io,
    }
}

/// Run `f`, recording its error or panic.
fn guard(f: impl FnOnce() -> Result<(), (BlStatus, String)>) -> BlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            BlStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            BlStatus::Panic
        }
    }
}

fn lib<T>(r: bottleneck_lab::Result<T>) -> Result<T, (BlStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (BlStatus, String) {
    (BlStatus::NullPointer, format!("{what} is null"))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], (BlStatus, String)> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call on the same thread.
#[no_mangle]
pub extern "C" fn bl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn bl_solver_config_default() -> BlSolverConfig {
    let d = SolverConfig::default();
    BlSolverConfig {
        restarts: d.restarts,
        seed: d.seed,
        max_iters: d.max_iters,
        d_w: 0,
        d_v: 0,
        beta_lo: 1e-2,
        beta_hi: 1e2,
        beta_count: d.beta_grid.len(),
        classical: 0,
        normalize: 0,
    }
}

/// Parse a state description such as `rho3:p=0.4` or `bsc:delta=0.1`.
///
/// # Safety
/// `spec` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bl_state_from_spec(spec: *const c_char, out: *mut *mut BlState) -> BlStatus {
    guard(|| {
        if spec.is_null() || out.is_null() {
            return Err(null("argument"));
        }
        let s = CStr::from_ptr(spec).to_str().map_err(|_| (BlStatus::InvalidUtf8, "spec is not UTF-8".to_string()))?;
        let st = lib(lib(s.parse::<StateSpec>())?.load())?;
        *out = Box::into_raw(Box::new(BlState { rho: st.rho }));
        Ok(())
    })
}

/// Build a state from a row-major `(d_x·d_y)²` matrix of interleaved
/// `re, im` pairs (`2·(d_x·d_y)²` doubles).
///
/// # Safety
/// `re_im` must point to that many doubles and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bl_state_from_matrix(
    re_im: *const f64,
    d_x: usize,
    d_y: usize,
    out: *mut *mut BlState,
) -> BlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let n = d_x.checked_mul(d_y).filter(|n| *n > 0 && *n <= 4096).ok_or((
            BlStatus::Validation,
            format!("unsupported dimensions {d_x} x {d_y}"),
        ))?;
        let v = slice(re_im, 2 * n * n, "matrix")?;
        let m = CMat::from_fn(n, n, |i, j| Complex64::new(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]));
        let rho = lib(DensityOperator::with_labels(m, &[d_x, d_y], &["X", "Y"]))?;
        *out = Box::into_raw(Box::new(BlState { rho }));
        Ok(())
    })
}

/// # Safety
/// `state` must come from a `bl_state_*` constructor or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_state_free(state: *mut BlState) {
    if !state.is_null() {
        drop(Box::from_raw(state));
    }
}

/// `S(X)`, `S(Y)` and `I(X;Y)` in bits. Any output pointer may be null.
///
/// # Safety
/// `state` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_state_entropies(state: *const BlState, s_x: *mut f64, s_y: *mut f64, i_xy: *mut f64) -> BlStatus {
    guard(|| {
        let st = state.as_ref().ok_or_else(|| null("state"))?;
        let vals = [
            lib(subsystem_entropy(&st.rho, &["X"]))?,
            lib(subsystem_entropy(&st.rho, &["Y"]))?,
            lib(mutual_information(&st.rho, &["X"], &["Y"]))?,
        ];
        for (p, v) in [s_x, s_y, i_xy].into_iter().zip(vals) {
            if !p.is_null() {
                *p = v;
            }
        }
        Ok(())
    })
}

fn solver_config(cfg: &BlSolverConfig) -> SolverConfig {
    SolverConfig {
        restarts: cfg.restarts,
        seed: cfg.seed,
        max_iters: cfg.max_iters,
        d_w: (cfg.d_w > 0).then_some(cfg.d_w),
        d_v: (cfg.d_v > 0).then_some(cfg.d_v),
        beta_grid: log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_count),
        ..SolverConfig::default()
    }
}

fn compute_curve(st: &BlState, kind: BlCurveKind, cfg: &BlSolverConfig, grid: &[f64]) -> bottleneck_lab::Result<Curve> {
    if !(cfg.beta_lo > 0.0 && cfg.beta_hi >= cfg.beta_lo) {
        return Err(Error::Validation("multiplier range must satisfy 0 < beta_lo ≤ beta_hi".into()));
    }
    let curve = if cfg.classical != 0 {
        let p = bottleneck_lab::cli::state::LoadedState { rho: st.rho.clone(), joint: None, bsc_delta: None }.classical()?;
        let ccfg = ClassicalConfig {
            restarts: cfg.restarts,
            seed: cfg.seed,
            max_iters: cfg.max_iters,
            beta_grid: log_grid(cfg.beta_lo, cfg.beta_hi, cfg.beta_count),
            ..ClassicalConfig::default()
        };
        let dw = if cfg.d_w > 0 { cfg.d_w } else { p.shape().0 + 1 };
        match kind {
            BlCurveKind::Ib => classical_ib_curve(&p, dw, grid, &ccfg)?,
            BlCurveKind::IbDual => classical_ib_dual_curve(&p, dw, grid, &ccfg)?,
            BlCurveKind::Pf => classical_pf_curve(&p, dw, grid, &ccfg)?,
            BlCurveKind::PfDual => classical_pf_dual_curve(&p, dw, grid, &ccfg)?,
        }
    } else {
        let scfg = solver_config(cfg);
        match kind {
            BlCurveKind::Ib => quantum_ib_curve(&st.rho, &scfg, grid)?,
            BlCurveKind::IbDual => quantum_ib_dual_curve(&st.rho, &scfg, grid)?,
            BlCurveKind::Pf => quantum_pf_curve(&st.rho, &scfg, grid)?,
            BlCurveKind::PfDual => quantum_pf_dual_curve(&st.rho, &scfg, grid)?,
        }
    };
    if cfg.normalize != 0 {
        normalize_curve(&curve, &st.rho)
    } else {
        Ok(curve)
    }
}

/// Compute a trade-off curve on the given abscissae (in bits).
///
/// # Safety
/// `state` and `cfg` must be valid, `grid` must hold `n` doubles and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn bl_curve_compute(
    state: *const BlState,
    kind: BlCurveKind,
    cfg: *const BlSolverConfig,
    grid: *const f64,
    n: usize,
    out: *mut *mut BlCurve,
) -> BlStatus {
    guard(|| {
        let st = state.as_ref().ok_or_else(|| null("state"))?;
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = slice(grid, n, "grid")?;
        let curve = lib(compute_curve(st, kind, cfg, grid))?;
        *out = Box::into_raw(Box::new(BlCurve { curve }));
        Ok(())
    })
}

/// # Safety
/// `curve` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bl_curve_len(curve: *const BlCurve) -> usize {
    curve.as_ref().map_or(0, |c| c.curve.points.len())
}

/// Read point `i`. Any output pointer may be null.
///
/// # Safety
/// `curve` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_curve_point(
    curve: *const BlCurve,
    i: usize,
    abscissa: *mut f64,
    value: *mut f64,
    achieved_constraint: *mut f64,
    converged: *mut c_int,
) -> BlStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        let p = c.curve.points.get(i).ok_or((BlStatus::OutOfRange, format!("point {i} out of range")))?;
        for (ptr, v) in [(abscissa, p.abscissa), (value, p.value), (achieved_constraint, p.achieved_constraint)] {
            if !ptr.is_null() {
                *ptr = v;
            }
        }
        if !converged.is_null() {
            *converged = c_int::from(p.converged);
        }
        Ok(())
    })
}

/// Full curve, witnesses included, as a JSON string released with
/// [`bl_string_free`].
///
/// # Safety
/// `curve` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn bl_curve_to_json(curve: *const BlCurve, out: *mut *mut c_char) -> BlStatus {
    guard(|| {
        let c = curve.as_ref().ok_or_else(|| null("curve"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let s = lib(serde_json::to_string(&c.curve).map_err(Error::from))?;
        *out = CString::new(s).map_err(|e| (BlStatus::Validation, e.to_string()))?.into_raw();
        Ok(())
    })
}

/// # Safety
/// `curve` must come from [`bl_curve_compute`] or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_curve_free(curve: *mut BlCurve) {
    if !curve.is_null() {
        drop(Box::from_raw(curve));
    }
}

/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Rate-region boundary `Q_Y(Q_X)` at the given `Q_X` values.
///
/// # Safety
/// As for [`bl_curve_compute`].
#[no_mangle]
pub unsafe extern "C" fn bl_region_compute(
    state: *const BlState,
    cfg: *const BlSolverConfig,
    q_x: *const f64,
    n: usize,
    out: *mut *mut BlRegion,
) -> BlStatus {
    guard(|| {
        let st = state.as_ref().ok_or_else(|| null("state"))?;
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let grid = slice(q_x, n, "q_x")?;
        let psi = lib(purify(&st.rho, "R"))?;
        let boundary = lib(wak_boundary(&psi, grid, &solver_config(cfg)))?;
        *out = Box::into_raw(Box::new(BlRegion { boundary }));
        Ok(())
    })
}

/// # Safety
/// `region` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn bl_region_len(region: *const BlRegion) -> usize {
    region.as_ref().map_or(0, |r| r.boundary.points.len())
}

/// # Safety
/// `region` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn bl_region_point(region: *const BlRegion, i: usize, q_x: *mut f64, q_y: *mut f64) -> BlStatus {
    guard(|| {
        let r = region.as_ref().ok_or_else(|| null("region"))?;
        let p = r.boundary.points.get(i).ok_or((BlStatus::OutOfRange, format!("point {i} out of range")))?;
        if !q_x.is_null() {
            *q_x = p.q_x;
        }
        if !q_y.is_null() {
            *q_y = p.q_y;
        }
        Ok(())
    })
}

/// # Safety
/// `region` must come from [`bl_region_compute`] or be null.
#[no_mangle]
pub unsafe extern "C" fn bl_region_free(region: *mut BlRegion) {
    if !region.is_null() {
        drop(Box::from_raw(region));
    }
}
