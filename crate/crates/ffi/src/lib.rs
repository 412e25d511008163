//! C ABI over `asep-core`.
//!
//! Every fallible call returns an [`AsepStatus`]; results go through out
//! pointers. Handles are opaque and must be released with their `_free`
//! function. The message of the most recent failure on the calling thread is
//! available from [`asep_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use asep_core::dynamics::{line_hitting_time, HitOutcome, SegmentChain, SimulationParams};
use asep_core::hecke::{distribution_identity_check, DEFAULT_WALK_CAP};
use asep_core::lattice::{make_named_config, ConfigName, LineConfig};
use asep_core::rng::{rng_from, SimRng};
use asep_core::stationary::stationary_law;
use asep_core::tracy_widom::{f_gue, QuadratureSpec};
use asep_core::Error;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AsepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    OutOfRange = 3,
    CapExceeded = 4,
    NumericalFailure = 5,
    Panic = 6,
}

/// Exact transition law of the segment process from `xi^0`.
pub struct AsepMixing {
    chain: SegmentChain,
    pi: Vec<f64>,
    init: Vec<f64>,
}

/// Sampler of the line hitting time of `zeta^1` from `zeta^0`.
pub struct AsepHitSampler {
    params: SimulationParams,
    start: LineConfig,
    target: LineConfig,
    rng: SimRng,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AsepStatus {
    match e {
        Error::OutOfRange { .. } => AsepStatus::OutOfRange,
        Error::CapExceeded { .. } => AsepStatus::CapExceeded,
        Error::Quadrature(_) => AsepStatus::NumericalFailure,
        _ => AsepStatus::InvalidParameter,
    }
}

/// Run `f`, mapping errors and panics to status codes.
fn guard(f: impl FnOnce() -> Result<(), AsepStatus>) -> AsepStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AsepStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            AsepStatus::Panic
        }
    }
}

fn check<T>(r: asep_core::Result<T>) -> Result<T, AsepStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn non_null<T>(p: *const T) -> Result<(), AsepStatus> {
    if p.is_null() {
        set_error("null pointer argument");
        Err(AsepStatus::NullPointer)
    } else {
        Ok(())
    }
}

/// Crate version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn asep_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, valid until the next failing
/// call on the same thread. Empty if nothing failed yet.
#[no_mangle]
pub extern "C" fn asep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// `F_GUE(s)` by Nystrom discretisation with `nodes` Gauss-Legendre nodes.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn asep_f_gue(s: f64, nodes: usize, out: *mut f64) -> AsepStatus {
    guard(|| {
        non_null(out)?;
        let v = check(f_gue(s, &QuadratureSpec::with_nodes(nodes)))?;
        *out = v;
        Ok(())
    })
}

/// Sup-norm deviation of the exact walk/Mallows distribution identity with
/// jump rate `p = 1/(1+Q)`.
///
/// # Safety
/// `out` must be valid for a write of one `double`.
#[no_mangle]
pub unsafe extern "C" fn asep_hecke_deviation(
    s: usize,
    r: usize,
    m: usize,
    q: f64,
    t: f64,
    out: *mut f64,
) -> AsepStatus {
    guard(|| {
        non_null(out)?;
        let v = check(distribution_identity_check(
            s,
            r,
            m,
            t,
            1.0 / (1.0 + q),
            q,
            DEFAULT_WALK_CAP,
        ))?;
        *out = v;
        Ok(())
    })
}

/// Build the exact chain on `N` sites with `k` particles and jump rate `p`.
/// At most `cap` states are allowed.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn asep_mixing_new(
    n: usize,
    k: usize,
    p: f64,
    cap: u64,
    out: *mut *mut AsepMixing,
) -> AsepStatus {
    guard(|| {
        non_null(out)?;
        *out = ptr::null_mut();
        let params = check(SimulationParams::new(p))?;
        let chain = check(SegmentChain::new(n, k, params, cap))?;
        let pi = check(stationary_law(&chain))?;
        let xi0 = check(make_named_config(ConfigName::Xi0, n, k))?;
        let xi0 = xi0.into_segment().expect("segment configuration");
        let init = check(chain.point_mass(&xi0))?;
        *out = Box::into_raw(Box::new(AsepMixing { chain, pi, init }));
        Ok(())
    })
}

/// Number of states of the chain.
///
/// # Safety
/// `h` must come from [`asep_mixing_new`] and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn asep_mixing_len(h: *const AsepMixing, out: *mut usize) -> AsepStatus {
    guard(|| {
        non_null(h)?;
        non_null(out)?;
        *out = (*h).chain.len();
        Ok(())
    })
}

/// Exact `||P_t(xi^0, .) - pi||_TV` for each of the `len` times.
///
/// # Safety
/// `times` must point to `len` readable doubles and `out` to `len` writable ones.
#[no_mangle]
pub unsafe extern "C" fn asep_mixing_tv(
    h: *const AsepMixing,
    times: *const f64,
    len: usize,
    out: *mut f64,
) -> AsepStatus {
    guard(|| {
        non_null(h)?;
        if len == 0 {
            return Ok(());
        }
        non_null(times)?;
        non_null(out)?;
        let h = &*h;
        let ts = std::slice::from_raw_parts(times, len);
        let laws = check(h.chain.transient(&h.init, ts, 1e-15))?;
        let dst = std::slice::from_raw_parts_mut(out, len);
        for (d, law) in dst.iter_mut().zip(&laws) {
            *d = 0.5
                * law
                    .iter()
                    .zip(&h.pi)
                    .map(|(a, b)| (a - b).abs())
                    .sum::<f64>();
        }
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`asep_mixing_new`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn asep_mixing_free(h: *mut AsepMixing) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Create a seeded sampler of the line hitting time.
///
/// # Safety
/// `out` must be valid for a write of one pointer.
#[no_mangle]
pub unsafe extern "C" fn asep_hit_sampler_new(
    n: usize,
    k: usize,
    p: f64,
    seed: u64,
    out: *mut *mut AsepHitSampler,
) -> AsepStatus {
    guard(|| {
        non_null(out)?;
        *out = ptr::null_mut();
        let params = check(SimulationParams::new(p))?;
        let line = |name| {
            check(make_named_config(name, n, k)).map(|c| c.into_line().expect("line configuration"))
        };
        let (start, target) = (line(ConfigName::Zeta0)?, line(ConfigName::Zeta1)?);
        *out = Box::into_raw(Box::new(AsepHitSampler {
            params,
            start,
            target,
            rng: rng_from(seed),
        }));
        Ok(())
    })
}

/// Draw one hitting time censored at `t_cap`. `hit` is set to 0 on censoring,
/// in which case `time` is `t_cap`.
///
/// # Safety
/// `h` must come from [`asep_hit_sampler_new`]; `time` and `hit` must be writable.
#[no_mangle]
pub unsafe extern "C" fn asep_hit_sampler_draw(
    h: *mut AsepHitSampler,
    t_cap: f64,
    time: *mut f64,
    hit: *mut i32,
) -> AsepStatus {
    guard(|| {
        non_null(h)?;
        non_null(time)?;
        non_null(hit)?;
        let h = &mut *h;
        match check(line_hitting_time(
            &h.start, &h.target, h.params, &mut h.rng, t_cap,
        ))? {
            HitOutcome::Hit(t) => {
                *time = t;
                *hit = 1;
            }
            HitOutcome::Timeout => {
                *time = t_cap;
                *hit = 0;
            }
        }
        Ok(())
    })
}

/// # Safety
/// `h` must come from [`asep_hit_sampler_new`] and not be used afterwards. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn asep_hit_sampler_free(h: *mut AsepHitSampler) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
