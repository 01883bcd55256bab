//! C ABI for the bound pipeline: opaque channel handles, flat result
//! structs, and integer status codes. Every value-bearing call reports
//! failure through its return status; `isi_last_error` then yields a
//! human-readable reason for the current thread.
//!
//! All rates and bound values cross the boundary in nats; use
//! `isi_nats_to_bits` for bits per channel use.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;

use isi_bounds::bounds::QuadratureRule;
use isi_bounds::channel::{channel_by_name, ChannelResponse};
use isi_bounds::{bound_point, estimate_sir, Alphabet};
use num_complex::Complex64;

/// Outcome of an interface call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsiStatus {
    /// The call succeeded and any output struct is fully written.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was malformed (bad name, empty taps, zero energy, ...).
    InvalidArgument = 2,
    /// The bound pipeline rejected the request or failed numerically.
    Pipeline = 3,
    /// The trellis simulation rejected the request or failed.
    Simulation = 4,
}

/// Opaque channel handle; create with `isi_channel_builtin` or
/// `isi_channel_from_taps`, release with `isi_channel_free`.
pub struct IsiChannel {
    inner: ChannelResponse,
}

/// One evaluated grid point. Mirrors the library's bound record; all
/// entropy-like fields are in nats.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsiBoundPoint {
    pub snr_db: f64,
    /// Cluster count that was asked for.
    pub requested_m: usize,
    /// Cluster count actually used (clipped to the retained tap count).
    pub m: usize,
    /// Signal-to-distortion ratio at the equalizer output.
    pub r: f64,
    /// Gaussian fraction of the equalizer-output disturbance, in (0, 1].
    pub phi: f64,
    /// Certified bound on the normalized interference magnitude sum.
    pub rho_max: f64,
    /// Normalized interference standard deviation.
    pub sigma_rho: f64,
    /// Certified magnitude-sum bound on the truncated tap tail.
    pub tail_bound: f64,
    /// Number of equalizer taps retained by the truncation rule.
    pub k_used: usize,
    /// Conjectured-baseline objective.
    pub f_slc: f64,
    /// Lower bound on the mismatched objective.
    pub f_l: f64,
    /// Chord upper bound on the mismatched objective.
    pub f_u1: f64,
    /// Slope upper bound on the mismatched objective.
    pub f_u2: f64,
    /// log|alphabet| minus `f_slc`.
    pub c_slc: f64,
    /// Certified rate lower bound from `f_u1`.
    pub c_l1: f64,
    /// Certified rate lower bound from `f_u2`.
    pub c_l2: f64,
    /// log|alphabet|, the rate ceiling.
    pub log_alphabet: f64,
}

/// Monte-Carlo information-rate estimate, in nats per channel use.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct IsiSirEstimate {
    pub rate_nats: f64,
    pub stderr_nats: f64,
    pub n_symbols: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Display) {
    let owned = CString::new(msg.to_string())
        .unwrap_or_else(|_| CString::new("error message contained NUL").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = owned);
}

/// Returns the error message recorded by the most recent failing call on
/// this thread, or an empty string.
///
/// The pointer stays valid until the next failing call on the same
/// thread; copy the string if it must outlive that.
#[no_mangle]
pub extern "C" fn isi_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn isi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Converts nats to bits.
#[no_mangle]
pub extern "C" fn isi_nats_to_bits(nats: f64) -> f64 {
    isi_bounds::nats_to_bits(nats)
}

/// Looks up a built-in channel by name or alias (`dicode`, `ch1`, ...,
/// as listed by the CLI `channels` verb). Returns null and records an
/// error if the name is unknown.
///
/// # Safety
/// `name` must be a valid NUL-terminated C string, readable for its full
/// length.
#[no_mangle]
pub unsafe extern "C" fn isi_channel_builtin(name: *const c_char) -> *mut IsiChannel {
    if name.is_null() {
        set_error("channel name pointer is null");
        return std::ptr::null_mut();
    }
    let name = match unsafe { CStr::from_ptr(name) }.to_str() {
        Ok(s) => s,
        Err(e) => {
            set_error(format!("channel name is not UTF-8: {e}"));
            return std::ptr::null_mut();
        }
    };
    match channel_by_name(name) {
        Some(inner) => Box::into_raw(Box::new(IsiChannel { inner })),
        None => {
            set_error(format!("no built-in channel named `{name}`"));
            std::ptr::null_mut()
        }
    }
}

/// Builds a channel from tap arrays. `taps_im` may be null for a purely
/// real response; `quaternary` selects the four-point complex input
/// alphabet instead of the binary one. Returns null and records an error
/// on invalid input (empty taps, all-zero taps, or complex taps with the
/// binary alphabet).
///
/// # Safety
/// `taps_re` (and `taps_im` when non-null) must point to `n_taps`
/// readable doubles.
#[no_mangle]
pub unsafe extern "C" fn isi_channel_from_taps(
    taps_re: *const f64,
    taps_im: *const f64,
    n_taps: usize,
    quaternary: bool,
) -> *mut IsiChannel {
    if taps_re.is_null() {
        set_error("tap array pointer is null");
        return std::ptr::null_mut();
    }
    if n_taps == 0 {
        set_error("channel needs at least one tap");
        return std::ptr::null_mut();
    }
    let re = unsafe { std::slice::from_raw_parts(taps_re, n_taps) };
    let taps: Vec<Complex64> = if taps_im.is_null() {
        re.iter().map(|&r| Complex64::new(r, 0.0)).collect()
    } else {
        let im = unsafe { std::slice::from_raw_parts(taps_im, n_taps) };
        re.iter()
            .zip(im)
            .map(|(&r, &i)| Complex64::new(r, i))
            .collect()
    };
    let alphabet = if quaternary {
        Alphabet::Qpsk
    } else {
        Alphabet::Bpsk
    };
    match ChannelResponse::new(taps, alphabet, "caller-supplied") {
        Ok(inner) => Box::into_raw(Box::new(IsiChannel { inner })),
        Err(e) => {
            set_error(e);
            std::ptr::null_mut()
        }
    }
}

/// Releases a channel handle. Null is accepted and ignored.
///
/// # Safety
/// `ch` must be null or a pointer obtained from `isi_channel_builtin` or
/// `isi_channel_from_taps` that has not been freed already.
#[no_mangle]
pub unsafe extern "C" fn isi_channel_free(ch: *mut IsiChannel) {
    if !ch.is_null() {
        drop(unsafe { Box::from_raw(ch) });
    }
}

/// Evaluates the bound family for one channel at one SNR and cluster
/// count. `adaptive` swaps the fixed Gauss-Hermite rule for adaptive
/// integration (slower, used for cross-checks).
///
/// # Safety
/// `ch` must be a live channel handle and `out` a writable pointer to an
/// `IsiBoundPoint`.
#[no_mangle]
pub unsafe extern "C" fn isi_bound_point(
    ch: *const IsiChannel,
    snr_db: f64,
    m: usize,
    adaptive: bool,
    out: *mut IsiBoundPoint,
) -> IsiStatus {
    if ch.is_null() || out.is_null() {
        set_error("channel or output pointer is null");
        return IsiStatus::NullPointer;
    }
    let rule = if adaptive {
        QuadratureRule::Adaptive
    } else {
        QuadratureRule::GaussHermite96
    };
    match bound_point(&unsafe { &*ch }.inner, snr_db, m, rule) {
        Ok(p) => {
            unsafe {
                *out = IsiBoundPoint {
                    snr_db: p.snr_db,
                    requested_m: p.requested_m,
                    m: p.m,
                    r: p.r,
                    phi: p.phi,
                    rho_max: p.rho_max,
                    sigma_rho: p.sigma_rho,
                    tail_bound: p.tail_bound,
                    k_used: p.k_used,
                    f_slc: p.f_slc,
                    f_l: p.f_l,
                    f_u1: p.f_u1,
                    f_u2: p.f_u2,
                    c_slc: p.c_slc,
                    c_l1: p.c_l1,
                    c_l2: p.c_l2,
                    log_alphabet: p.log_alphabet,
                };
            }
            IsiStatus::Ok
        }
        Err(e) => {
            set_error(e);
            IsiStatus::Pipeline
        }
    }
}

/// Runs the seeded trellis simulation and writes the information-rate
/// estimate. Results are deterministic in (channel, snr_db, n_symbols,
/// seed).
///
/// # Safety
/// `ch` must be a live channel handle and `out` a writable pointer to an
/// `IsiSirEstimate`.
#[no_mangle]
pub unsafe extern "C" fn isi_sir_estimate(
    ch: *const IsiChannel,
    snr_db: f64,
    n_symbols: u64,
    seed: u64,
    out: *mut IsiSirEstimate,
) -> IsiStatus {
    if ch.is_null() || out.is_null() {
        set_error("channel or output pointer is null");
        return IsiStatus::NullPointer;
    }
    match estimate_sir(&unsafe { &*ch }.inner, snr_db, n_symbols, seed) {
        Ok(est) => {
            unsafe {
                *out = IsiSirEstimate {
                    rate_nats: est.rate,
                    stderr_nats: est.stderr,
                    n_symbols: est.n_symbols,
                    seed: est.seed,
                };
            }
            IsiStatus::Ok
        }
        Err(e) => {
            set_error(e);
            IsiStatus::Simulation
        }
    }
}
