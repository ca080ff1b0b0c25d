//! C interface to `kmnsym`.
//!
//! Objects cross the boundary as opaque handles that the caller frees with
//! the matching `*_free`. Every fallible call returns a [`KmnStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`kmn_last_error`]. Strings returned to the caller are freed with
//! [`kmn_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use kmnsym::classification::{lookup_case, EquationSpec};
use kmnsym::numerics::{bvp_pipeline, integrate_ivp, ODEProblem, PipelineConfig, ProfileGrid};
use kmnsym::prolongation::is_symmetry;
use kmnsym::reduction::bvp_reduce;
use kmnsym::symkernel::Rational;
use kmnsym::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KmnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidSpec = 3,
    LinearEquation = 4,
    GuardViolation = 5,
    Numerics = 6,
    OutOfRange = 7,
    Internal = 8,
    /// The call completed but a check it ran failed.
    CheckFailed = 9,
}

/// An equation `u_t + eps*(u^m)_x + f(t)*(u^n)_xxx = 0`.
pub struct KmnSpec(EquationSpec);

/// A sampled solution of the reduced boundary-value problem.
pub struct KmnProfile(ProfileGrid);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> KmnStatus {
    match e {
        Error::LinearEquation { .. } => KmnStatus::LinearEquation,
        Error::GuardViolation(_) | Error::SpecMismatch(_) | Error::DegenerateScaling => KmnStatus::GuardViolation,
        Error::InvalidSpec(_) | Error::Kernel(_) => KmnStatus::InvalidSpec,
        Error::StepUnderflow { .. }
        | Error::NonFiniteState { .. }
        | Error::CflViolation { .. }
        | Error::Domain { .. }
        | Error::NoOverlap => KmnStatus::Numerics,
        Error::ExtrapolationRequest(_) => KmnStatus::OutOfRange,
        _ => KmnStatus::Internal,
    }
}

/// Runs `f`, recording any error or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (KmnStatus, String)>) -> KmnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KmnStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("panic inside kmnsym".into());
            KmnStatus::Internal
        }
    }
}

fn lib(e: Error) -> (KmnStatus, String) {
    (status_of(&e), e.to_string())
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (KmnStatus, String)> {
    if p.is_null() {
        return Err((KmnStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (KmnStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

fn out_string(s: String, out: *mut *mut c_char) -> Result<(), (KmnStatus, String)> {
    let c = CString::new(s).map_err(|_| (KmnStatus::Internal, "interior nul in output".to_string()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

macro_rules! nonnull {
    ($($p:ident),*) => {
        $(if $p.is_null() {
            return Err((KmnStatus::NullPointer, concat!(stringify!($p), " is null").to_string()));
        })*
    };
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn kmn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kmn_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Builds a spec from expression strings; `f` may be `"f"` for arbitrary f.
///
/// # Safety
/// String arguments must be null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_spec_new(
    m: *const c_char,
    n: *const c_char,
    eps: i32,
    f: *const c_char,
    out: *mut *mut KmnSpec,
) -> KmnStatus {
    guard(|| {
        nonnull!(out);
        let (m, n, f) = (text(m, "m")?, text(n, "n")?, text(f, "f")?);
        let eps = i8::try_from(eps).map_err(|_| (KmnStatus::InvalidSpec, format!("eps = {eps}")))?;
        let spec = EquationSpec::parse(m, n, eps, f).map_err(lib)?;
        *out = Box::into_raw(Box::new(KmnSpec(spec)));
        Ok(())
    })
}

/// # Safety
/// `spec` must come from [`kmn_spec_new`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kmn_spec_free(spec: *mut KmnSpec) {
    if !spec.is_null() {
        drop(Box::from_raw(spec));
    }
}

/// JSON description of the matching table rows.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_classify_json(spec: *const KmnSpec, out: *mut *mut c_char) -> KmnStatus {
    guard(|| {
        nonnull!(spec, out);
        let v = kmnsym::cli::classify_report(&(*spec).0).map_err(lib)?;
        out_string(v.to_string(), out)
    })
}

/// Checks every generator of every matching row by prolongation.
/// `count` receives the number of generators checked.
///
/// # Safety
/// `spec` must be a live handle; `count` may be null.
#[no_mangle]
pub unsafe extern "C" fn kmn_verify(spec: *const KmnSpec, count: *mut usize) -> KmnStatus {
    let mut failed = Vec::new();
    let s = guard(|| {
        nonnull!(spec);
        let spec = &(*spec).0;
        let form = spec.form().map_err(lib)?;
        let mut n = 0;
        for m in lookup_case(spec).map_err(lib)? {
            for (i, g) in m.generators.iter().enumerate() {
                n += 1;
                if !is_symmetry(g, &form).map_err(lib)?.is_zero() {
                    failed.push(format!("{} generator {}", m.record.id, i + 1));
                }
            }
        }
        if !count.is_null() {
            *count = n;
        }
        Ok(())
    });
    if s == KmnStatus::Ok && !failed.is_empty() {
        set_error(format!("not a symmetry: {}", failed.join(", ")));
        return KmnStatus::CheckFailed;
    }
    s
}

/// Integrates the reduced boundary-value problem of a `t^k` spec with
/// `u(0, t) = gamma_num/gamma_den * t^c2` from `omega = 0` to `omega_end`.
///
/// # Safety
/// `spec` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_profile_solve(
    spec: *const KmnSpec,
    gamma_num: i64,
    gamma_den: i64,
    omega_end: f64,
    tol: f64,
    out: *mut *mut KmnProfile,
) -> KmnStatus {
    guard(|| {
        nonnull!(spec, out);
        if gamma_den == 0 {
            return Err((KmnStatus::InvalidSpec, "gamma_den = 0".into()));
        }
        let gamma = Rational::new(gamma_num as i128, gamma_den as i128);
        let red = bvp_reduce(&(*spec).0, &gamma).map_err(lib)?;
        let p = ODEProblem::from_bvp(&red, omega_end).map_err(lib)?;
        let g = integrate_ivp(&p, tol).map_err(lib)?;
        *out = Box::into_raw(Box::new(KmnProfile(g)));
        Ok(())
    })
}

/// # Safety
/// `p` must come from [`kmn_profile_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn kmn_profile_free(p: *mut KmnProfile) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Number of stored samples; 0 for null.
///
/// # Safety
/// `p` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn kmn_profile_len(p: *const KmnProfile) -> usize {
    p.as_ref().map_or(0, |p| p.0.omega.len())
}

/// Sample `i`: `omega` and `phi, phi', phi''` into `phi3[0..3]`.
///
/// # Safety
/// `p` must be a live handle; `omega` and `phi3` (3 doubles) must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_profile_sample(p: *const KmnProfile, i: usize, omega: *mut f64, phi3: *mut f64) -> KmnStatus {
    guard(|| {
        nonnull!(p, omega, phi3);
        let g = &(*p).0;
        let (Some(w), Some(v)) = (g.omega.get(i), g.phi.get(i)) else {
            return Err((KmnStatus::OutOfRange, format!("sample {i} of {}", g.omega.len())));
        };
        *omega = *w;
        ptr::copy_nonoverlapping(v.as_ptr(), phi3, 3);
        Ok(())
    })
}

/// Interpolated `phi(omega)`; zero past a compacton edge.
///
/// # Safety
/// `p` must be a live handle; `phi` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_profile_eval(p: *const KmnProfile, omega: f64, phi: *mut f64) -> KmnStatus {
    guard(|| {
        nonnull!(p, phi);
        *phi = (*p).0.value(omega).map_err(lib)?;
        Ok(())
    })
}

/// Runs the boundary-value cross-check. `config_json` holds any subset of
/// the pipeline settings (null for defaults); the report is written as JSON
/// to `out`. Returns `KMN_STATUS_CHECK_FAILED` when the relative
/// L-infinity discrepancy exceeds 1e-2, with the report still written.
///
/// # Safety
/// `config_json` must be null or null-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kmn_pipeline_json(config_json: *const c_char, out: *mut *mut c_char) -> KmnStatus {
    let mut passed = true;
    let s = guard(|| {
        nonnull!(out);
        let cfg: PipelineConfig = if config_json.is_null() {
            PipelineConfig::default()
        } else {
            serde_json::from_str(text(config_json, "config_json")?)
                .map_err(|e| (KmnStatus::InvalidSpec, format!("config: {e}")))?
        };
        let run = bvp_pipeline(&cfg).map_err(lib)?;
        passed = run.report.metrics.linf_rel <= kmnsym::cli::PIPELINE_BOUND;
        let text = serde_json::to_string(&run.report).map_err(|e| (KmnStatus::Internal, e.to_string()))?;
        out_string(text, out)
    });
    if s == KmnStatus::Ok && !passed {
        set_error("pipeline discrepancy above bound".into());
        return KmnStatus::CheckFailed;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(m: &str, n: &str, f: &str) -> (KmnStatus, *mut KmnSpec) {
        let (m, n, f) = (CString::new(m).unwrap(), CString::new(n).unwrap(), CString::new(f).unwrap());
        let mut h = ptr::null_mut();
        let s = unsafe { kmn_spec_new(m.as_ptr(), n.as_ptr(), 1, f.as_ptr(), &mut h) };
        (s, h)
    }

    fn last_error() -> String {
        unsafe { CStr::from_ptr(kmn_last_error()) }.to_string_lossy().into_owned()
    }

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(spec("1", "1", "t").0, KmnStatus::LinearEquation);
        assert!(last_error().contains("linear"));
        assert_eq!(spec("2", "1", "t^").0, KmnStatus::InvalidSpec);
        let mut h = ptr::null_mut();
        let s = unsafe { kmn_spec_new(ptr::null(), ptr::null(), 1, ptr::null(), &mut h) };
        assert_eq!(s, KmnStatus::NullPointer);
        assert!(h.is_null());
    }

    #[test]
    fn classify_and_verify_round_trip() {
        let (s, h) = spec("2", "1", "t^3");
        assert_eq!(s, KmnStatus::Ok);
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { kmn_classify_json(h, &mut out) }, KmnStatus::Ok);
        let json = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_owned();
        unsafe { kmn_string_free(out) };
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["matches"][0]["id"], "T2-7");
        let mut count = 0;
        assert_eq!(unsafe { kmn_verify(h, &mut count) }, KmnStatus::Ok);
        assert!(count >= 3);
        unsafe { kmn_spec_free(h) };
    }

    #[test]
    fn profile_handle() {
        let (_, h) = spec("2", "1", "t");
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { kmn_profile_solve(h, 1, 1, 5.0, 1e-9, &mut p) }, KmnStatus::Ok);
        let n = unsafe { kmn_profile_len(p) };
        assert!(n > 100);
        let (mut w, mut phi) = (0.0, [0.0; 3]);
        assert_eq!(unsafe { kmn_profile_sample(p, 0, &mut w, phi.as_mut_ptr()) }, KmnStatus::Ok);
        assert_eq!((w, phi), (0.0, [1.0, 0.0, 0.0]));
        assert_eq!(unsafe { kmn_profile_sample(p, n, &mut w, phi.as_mut_ptr()) }, KmnStatus::OutOfRange);
        let mut v = 0.0;
        assert_eq!(unsafe { kmn_profile_eval(p, 5.0, &mut v) }, KmnStatus::Ok);
        assert!((v - 2.65698185).abs() < 1e-6);
        assert_eq!(unsafe { kmn_profile_eval(p, 6.0, &mut v) }, KmnStatus::OutOfRange);
        unsafe {
            kmn_profile_free(p);
            kmn_spec_free(h);
        }
        let (_, h) = spec("2", "1", "exp(t)");
        assert_eq!(unsafe { kmn_profile_solve(h, 1, 1, 5.0, 1e-9, &mut p) }, KmnStatus::GuardViolation);
        unsafe { kmn_spec_free(h) };
    }

    #[test]
    fn pipeline_report() {
        let cfg = CString::new(r#"{"grid_n": 50}"#).unwrap();
        let mut out = ptr::null_mut();
        assert_eq!(unsafe { kmn_pipeline_json(cfg.as_ptr(), &mut out) }, KmnStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
        unsafe { kmn_string_free(out) };
        assert!(v["metrics"]["linf_rel"].as_f64().unwrap() < 1e-2);
        let bad = CString::new(r#"{"grid_n": "x"}"#).unwrap();
        assert_eq!(unsafe { kmn_pipeline_json(bad.as_ptr(), &mut out) }, KmnStatus::InvalidSpec);
    }

    #[test]
    fn errors_are_per_thread() {
        assert_eq!(spec("1", "1", "t").0, KmnStatus::LinearEquation);
        std::thread::spawn(|| assert!(kmn_last_error().is_null())).join().unwrap();
    }
}
