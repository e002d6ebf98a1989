//! C ABI over `pinch-core`.
//!
//! Results come back through opaque handles that the caller releases with the
//! matching `*_free` function. Every entry point returns a [`PinchStatus`];
//! the message for the last failure on the calling thread is available from
//! [`pinch_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pinch_core::certify::{
    certificate_json, certify_with, to_canonical_json, Certificate, CertifyOptions,
};
use pinch_core::certify::{DEFAULT_BUDGET, DEFAULT_SEED};
use pinch_core::exactalg::PolySpec;
use pinch_core::spectra::{roots_closed_form, Spectrum};
use pinch_core::Error;

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PinchStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    PipelineError = 3,
    Panic = 4,
}

/// A finished certificate for one dimension.
pub struct PinchCertificate {
    inner: Certificate,
}

/// Root data of one polynomial from the family.
pub struct PinchSpectrum {
    inner: Spectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PinchStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::InvalidSpec(_) | Error::InvalidArgument(_) | Error::DimensionMismatch { .. } => {
            PinchStatus::InvalidArgument
        }
        _ => PinchStatus::PipelineError,
    }
}

fn guarded<F>(f: F) -> PinchStatus
where
    F: FnOnce() -> Result<(), (PinchStatus, String)>,
{
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PinchStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            PinchStatus::Panic
        }
    }
}

fn core_err(e: Error) -> (PinchStatus, String) {
    (status_of(&e), e.to_string())
}

fn into_c_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => ptr::null_mut(),
    }
}

/// Certifies dimension `n`.
///
/// `h == 0` selects the lattice refinement automatically, `budget == 0` uses
/// the default number of curvature restarts. With `paper_mode` the automatic
/// refinement is chosen against the coarser base-diameter estimate.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certify(
    n: u32,
    h: u64,
    budget: u64,
    seed: u64,
    paper_mode: bool,
    out: *mut *mut PinchCertificate,
) -> PinchStatus {
    if out.is_null() {
        set_error("out is null".into());
        return PinchStatus::NullPointer;
    }
    *out = ptr::null_mut();
    guarded(|| {
        let opts = CertifyOptions {
            h: (h != 0).then_some(h),
            budget: if budget == 0 {
                DEFAULT_BUDGET
            } else {
                usize::try_from(budget)
                    .map_err(|_| (PinchStatus::InvalidArgument, "budget too large".into()))?
            },
            seed,
            paper_mode,
        };
        let cert = certify_with(n as usize, &opts).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PinchCertificate { inner: cert }));
        Ok(())
    })
}

/// The seed used when the caller has no preference.
#[no_mangle]
pub extern "C" fn pinch_default_seed() -> u64 {
    DEFAULT_SEED
}

/// # Safety
/// `cert` must be null or a handle from [`pinch_certify`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_free(cert: *mut PinchCertificate) {
    if !cert.is_null() {
        drop(Box::from_raw(cert));
    }
}

unsafe fn cert_ref<'a>(cert: *const PinchCertificate) -> Option<&'a Certificate> {
    cert.as_ref().map(|c| &c.inner)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_passes(cert: *const PinchCertificate) -> bool {
    cert_ref(cert).is_some_and(|c| c.passes)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_passes_paper_mode(
    cert: *const PinchCertificate,
) -> bool {
    cert_ref(cert).is_some_and(|c| c.passes_paper_mode)
}

/// Dimension, or 0 for a null handle.
///
/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_dim(cert: *const PinchCertificate) -> u32 {
    cert_ref(cert).map_or(0, |c| c.n as u32)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_h(cert: *const PinchCertificate) -> u64 {
    cert_ref(cert).map_or(0, |c| c.h)
}

/// `curv_bound · diam_upper²`, NaN for a null handle.
///
/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_product(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.product)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_target(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.target)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_lambda_max(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.lambda_max)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_curvature_bound(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.curv_bound)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_curvature_sampled(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.curv_sampled_max)
}

/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_diam_upper(cert: *const PinchCertificate) -> f64 {
    cert_ref(cert).map_or(f64::NAN, |c| c.diam_upper)
}

/// Canonical JSON for the certificate. Release with [`pinch_string_free`].
/// Returns null for a null handle.
///
/// # Safety
/// `cert` must be null or a live certificate handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_certificate_to_json(cert: *const PinchCertificate) -> *mut c_char {
    let Some(c) = cert_ref(cert) else {
        set_error("certificate is null".into());
        return ptr::null_mut();
    };
    match certificate_json(c) {
        Ok(s) => into_c_string(s),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// Closed-form roots of `x^{2k} + sign·3x^k + 1`, times `(x - 1)` when `odd`.
/// `sign == 0` picks the default sign for `k`.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_closed_form(
    k: u32,
    sign: i8,
    odd: bool,
    out: *mut *mut PinchSpectrum,
) -> PinchStatus {
    if out.is_null() {
        set_error("out is null".into());
        return PinchStatus::NullPointer;
    }
    *out = ptr::null_mut();
    guarded(|| {
        let sign = if sign == 0 {
            PolySpec::default_sign(k)
        } else {
            sign
        };
        let spec = PolySpec::new(k, sign, odd).map_err(core_err)?;
        let s = roots_closed_form(&spec).map_err(core_err)?;
        *out = Box::into_raw(Box::new(PinchSpectrum { inner: s }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`pinch_spectrum_closed_form`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_free(s: *mut PinchSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Polynomial degree, or 0 for a null handle.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_dim(s: *const PinchSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.inner.n)
}

/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_lambda_max(s: *const PinchSpectrum) -> f64 {
    s.as_ref().map_or(f64::NAN, |s| s.inner.lambda_max)
}

/// Number of conjugate pairs.
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_pair_count(s: *const PinchSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.inner.pairs.len())
}

/// Writes `ln|z|` and `arg z` of pair `i`.
///
/// # Safety
/// `s` must be null or a live spectrum handle; `lambda` and `phi` must be
/// null or valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_pair(
    s: *const PinchSpectrum,
    i: usize,
    lambda: *mut f64,
    phi: *mut f64,
) -> PinchStatus {
    let Some(s) = s.as_ref() else {
        set_error("spectrum is null".into());
        return PinchStatus::NullPointer;
    };
    if lambda.is_null() || phi.is_null() {
        set_error("output pointer is null".into());
        return PinchStatus::NullPointer;
    }
    let Some(p) = s.inner.pairs.get(i) else {
        set_error(format!(
            "pair index {i} out of range ({} pairs)",
            s.inner.pairs.len()
        ));
        return PinchStatus::InvalidArgument;
    };
    clear_error();
    *lambda = p.lambda;
    *phi = p.phi;
    PinchStatus::Ok
}

/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn pinch_spectrum_to_json(s: *const PinchSpectrum) -> *mut c_char {
    let Some(s) = s.as_ref() else {
        set_error("spectrum is null".into());
        return ptr::null_mut();
    };
    match to_canonical_json("spectrum", &s.inner) {
        Ok(j) => into_c_string(j),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// # Safety
/// `s` must be null or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pinch_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn pinch_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pinch_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"0",
        };
    VERSION.as_ptr()
}
