//! C ABI for the `bpe_delay` library.
//!
//! Every fallible function returns a [`BpdStatus`]; `BPD_STATUS_OK` is zero.
//! On failure a message for the calling thread is available from
//! [`bpd_last_error`]. Handles are opaque and must be released with their
//! `_free` function. Points are passed row-major as `n * dim` doubles.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use bpe_delay::algorithms::build_schedule;
use bpe_delay::confidence::{beta, psi, u_t, ConfidenceParams, DelayParams};
use bpe_delay::harness::{emit_csv, run_suite, AggregateCurve, ExperimentConfig, SuiteResults};
use bpe_delay::{Error, KernelFamily, KernelSpec, MaternNu, Predictor};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    NotPositiveDefinite = 4,
    Config = 5,
    Io = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BpdKernelFamily {
    SquaredExponential = 0,
    Matern = 1,
    Linear = 2,
}

/// Opaque kernel handle.
pub struct BpdKernel(KernelSpec);

/// Opaque fitted posterior.
pub struct BpdPredictor(Predictor);

/// Opaque experiment configuration.
pub struct BpdConfig(ExperimentConfig);

/// Opaque results of a finished experiment suite.
pub struct BpdResults(SuiteResults);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(status: BpdStatus, msg: impl Into<String>) -> BpdStatus {
    set_error(msg.into());
    status
}

fn from_error(e: Error) -> BpdStatus {
    let status = match &e {
        Error::DimensionMismatch { .. } => BpdStatus::DimensionMismatch,
        Error::InvalidArgument(_) => BpdStatus::InvalidArgument,
        Error::NotPositiveDefinite { .. } => BpdStatus::NotPositiveDefinite,
        Error::Config(_) => BpdStatus::Config,
        Error::Io(_) | Error::Csv(_) => BpdStatus::Io,
    };
    fail(status, e.to_string())
}

/// Runs `f`, turning panics into `BPD_STATUS_PANIC`.
fn guard(f: impl FnOnce() -> Result<(), BpdStatus>) -> BpdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BpdStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            fail(BpdStatus::Panic, msg)
        }
    }
}

fn lift<T>(r: bpe_delay::Result<T>) -> Result<T, BpdStatus> {
    r.map_err(from_error)
}

fn non_null<T>(p: *const T, name: &str) -> Result<(), BpdStatus> {
    if p.is_null() {
        Err(fail(BpdStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, BpdStatus> {
    non_null(p, name)?;
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BpdStatus::InvalidArgument, format!("{name} is not UTF-8")))
}

unsafe fn rows(data: *const f64, n: usize, dim: usize, name: &str) -> Result<Vec<Vec<f64>>, BpdStatus> {
    if n == 0 {
        return Ok(Vec::new());
    }
    non_null(data, name)?;
    let flat = std::slice::from_raw_parts(data, n * dim);
    Ok(flat.chunks(dim.max(1)).map(<[f64]>::to_vec).collect())
}

unsafe fn put<T>(out: *mut T, v: T, name: &str) -> Result<(), BpdStatus> {
    non_null(out, name)?;
    out.write(v);
    Ok(())
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn bpd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bpd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `family` is a `BpdKernelFamily` value; `nu` is read only for the Matérn
/// family (0.5, 1.5 or 2.5).
#[no_mangle]
pub unsafe extern "C" fn bpd_kernel_new(
    family: i32,
    nu: f64,
    lengthscale: f64,
    output_scale: f64,
    dim: usize,
    out: *mut *mut BpdKernel,
) -> BpdStatus {
    guard(|| {
        let fam = match family {
            f if f == BpdKernelFamily::SquaredExponential as i32 => KernelFamily::SquaredExponential,
            f if f == BpdKernelFamily::Matern as i32 => KernelFamily::Matern(lift(MaternNu::from_value(nu))?),
            f if f == BpdKernelFamily::Linear as i32 => KernelFamily::Linear,
            f => return Err(fail(BpdStatus::InvalidArgument, format!("unknown kernel family {f}"))),
        };
        let k = lift(KernelSpec::new(fam, lengthscale, output_scale, dim))?;
        put(out, Box::into_raw(Box::new(BpdKernel(k))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bpd_kernel_free(kernel: *mut BpdKernel) {
    if !kernel.is_null() {
        drop(Box::from_raw(kernel));
    }
}

#[no_mangle]
pub unsafe extern "C" fn bpd_kernel_eval(
    kernel: *const BpdKernel,
    x: *const f64,
    y: *const f64,
    out: *mut f64,
) -> BpdStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        let k = &(*kernel).0;
        let x = rows(x, 1, k.dim(), "x")?;
        let y = rows(y, 1, k.dim(), "y")?;
        put(out, lift(k.eval(&x[0], &y[0]))?, "out")
    })
}

/// Fits the posterior on `n` points with observations `values`.
#[no_mangle]
pub unsafe extern "C" fn bpd_predictor_fit(
    kernel: *const BpdKernel,
    lambda: f64,
    points: *const f64,
    values: *const f64,
    n: usize,
    out: *mut *mut BpdPredictor,
) -> BpdStatus {
    guard(|| {
        non_null(kernel, "kernel")?;
        let k = (*kernel).0;
        let pts = rows(points, n, k.dim(), "points")?;
        let ys = if n == 0 {
            Vec::new()
        } else {
            non_null(values, "values")?;
            std::slice::from_raw_parts(values, n).to_vec()
        };
        let p = lift(Predictor::fit(k, lambda, &pts, &ys))?;
        put(out, Box::into_raw(Box::new(BpdPredictor(p))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bpd_predictor_free(predictor: *mut BpdPredictor) {
    if !predictor.is_null() {
        drop(Box::from_raw(predictor));
    }
}

/// Posterior mean and standard deviation at one point.
#[no_mangle]
pub unsafe extern "C" fn bpd_predictor_predict(
    predictor: *const BpdPredictor,
    x: *const f64,
    mean: *mut f64,
    std_dev: *mut f64,
) -> BpdStatus {
    guard(|| {
        non_null(predictor, "predictor")?;
        non_null(mean, "mean")?;
        non_null(std_dev, "std_dev")?;
        let p = &(*predictor).0;
        let x = rows(x, 1, p.tracker().kernel().dim(), "x")?;
        let (m, s) = p.predict(&x[0]);
        mean.write(m);
        std_dev.write(s);
        Ok(())
    })
}

/// Writes the round schedule into `q` and `t` (capacity `cap` each) and the
/// round count into `rounds`. With too small a buffer nothing is written
/// except `rounds`, and `BPD_STATUS_BUFFER_TOO_SMALL` is returned.
#[no_mangle]
pub unsafe extern "C" fn bpd_schedule(
    horizon: u64,
    u: f64,
    q: *mut u64,
    t: *mut u64,
    cap: usize,
    rounds: *mut usize,
) -> BpdStatus {
    guard(|| {
        let s = lift(build_schedule(horizon, u))?;
        let r = s.rounds();
        put(rounds, r, "rounds")?;
        if cap < r {
            return Err(fail(BpdStatus::BufferTooSmall, format!("need room for {r} rounds, got {cap}")));
        }
        non_null(q, "q")?;
        non_null(t, "t")?;
        ptr::copy_nonoverlapping(s.q.as_ptr(), q, r);
        ptr::copy_nonoverlapping(s.t.as_ptr(), t, r);
        Ok(())
    })
}

fn delay_params(xi: f64, b: f64, mean_delay: f64) -> Result<DelayParams, BpdStatus> {
    lift(DelayParams::new(xi, b, mean_delay))
}

/// Delay deviation bound ψ_t(δ) for sub-exponential parameters `(xi, b)`.
#[no_mangle]
pub unsafe extern "C" fn bpd_psi(t: u64, delta: f64, xi: f64, b: f64, out: *mut f64) -> BpdStatus {
    guard(|| {
        if t == 0 || !(delta > 0.0 && delta < 1.0) {
            return Err(fail(BpdStatus::InvalidArgument, "need t >= 1 and delta in (0, 1)"));
        }
        let dp = delay_params(xi, b, 0.0)?;
        put(out, psi(t, delta, &dp), "out")
    })
}

/// Round padding `E[τ] + ψ_T(δ/2)`.
#[no_mangle]
pub unsafe extern "C" fn bpd_u_t(
    horizon: u64,
    delta: f64,
    xi: f64,
    b: f64,
    mean_delay: f64,
    out: *mut f64,
) -> BpdStatus {
    guard(|| {
        if horizon == 0 || !(delta > 0.0 && delta < 1.0) {
            return Err(fail(BpdStatus::InvalidArgument, "need horizon >= 1 and delta in (0, 1)"));
        }
        let dp = delay_params(xi, b, mean_delay)?;
        put(out, u_t(horizon, delta, Some(&dp)), "out")
    })
}

/// Confidence width `C_k + (σ/λ)·sqrt(2 ln(1/δ))`.
#[no_mangle]
pub unsafe extern "C" fn bpd_beta(c_k: f64, sigma: f64, lambda: f64, delta: f64, out: *mut f64) -> BpdStatus {
    guard(|| {
        let p = ConfidenceParams {
            c_k,
            sigma,
            lambda,
            delta,
            domain_card: 1,
            dim: 1,
            disc_c: 1.0,
            k_max: 1.0,
        };
        lift(p.validate())?;
        put(out, beta(&p), "out")
    })
}

/// Parses a TOML experiment config.
#[no_mangle]
pub unsafe extern "C" fn bpd_config_from_toml(text: *const c_char, out: *mut *mut BpdConfig) -> BpdStatus {
    guard(|| {
        let c = lift(ExperimentConfig::from_toml_str(str_arg(text, "text")?))?;
        put(out, Box::into_raw(Box::new(BpdConfig(c))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bpd_config_load(path: *const c_char, out: *mut *mut BpdConfig) -> BpdStatus {
    guard(|| {
        let c = lift(ExperimentConfig::load(Path::new(str_arg(path, "path")?)))?;
        put(out, Box::into_raw(Box::new(BpdConfig(c))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bpd_config_free(config: *mut BpdConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs every algorithm and trial of the config.
#[no_mangle]
pub unsafe extern "C" fn bpd_run(config: *const BpdConfig, out: *mut *mut BpdResults) -> BpdStatus {
    guard(|| {
        non_null(config, "config")?;
        let r = lift(run_suite(&(*config).0))?;
        put(out, Box::into_raw(Box::new(BpdResults(r))), "out")
    })
}

#[no_mangle]
pub unsafe extern "C" fn bpd_results_free(results: *mut BpdResults) {
    if !results.is_null() {
        drop(Box::from_raw(results));
    }
}

unsafe fn curve<'a>(results: *const BpdResults, index: usize) -> Result<&'a AggregateCurve, BpdStatus> {
    non_null(results, "results")?;
    let r = &*results;
    r.0.curves
        .get(index)
        .ok_or_else(|| fail(BpdStatus::InvalidArgument, "curve index out of range"))
}

/// Number of aggregated curves (one per distinct algorithm).
#[no_mangle]
pub unsafe extern "C" fn bpd_results_curve_count(results: *const BpdResults, out: *mut usize) -> BpdStatus {
    guard(|| {
        non_null(results, "results")?;
        put(out, (*results).0.curves.len(), "out")
    })
}

/// Algorithm name of curve `index` as a static NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bpd_results_algorithm(
    results: *const BpdResults,
    index: usize,
    out: *mut *const c_char,
) -> BpdStatus {
    guard(|| {
        let c = curve(results, index)?;
        let name: &'static [u8] = match c.algorithm {
            bpe_delay::Algorithm::BpeDelay => b"bpe_delay\0",
            bpe_delay::Algorithm::Bpe => b"bpe\0",
            bpe_delay::Algorithm::GpUcbDelayed => b"gp_ucb_delayed\0",
            bpe_delay::Algorithm::GpUcbSdf => b"gp_ucb_sdf\0",
        };
        put(out, name.as_ptr().cast(), "out")
    })
}

/// Copies the mean cumulative-regret curve of `index` into `buf` (capacity
/// `cap`) and its length into `len`.
#[no_mangle]
pub unsafe extern "C" fn bpd_results_mean_curve(
    results: *const BpdResults,
    index: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> BpdStatus {
    guard(|| {
        let c = curve(results, index)?;
        put(len, c.mean.len(), "len")?;
        if cap < c.mean.len() {
            return Err(fail(BpdStatus::BufferTooSmall, format!("need {} values, got {cap}", c.mean.len())));
        }
        non_null(buf, "buf")?;
        ptr::copy_nonoverlapping(c.mean.as_ptr(), buf, c.mean.len());
        Ok(())
    })
}

/// Writes traces.csv, summary.csv and rounds.csv into `dir`.
#[no_mangle]
pub unsafe extern "C" fn bpd_results_write_csv(results: *const BpdResults, dir: *const c_char) -> BpdStatus {
    guard(|| {
        non_null(results, "results")?;
        lift(emit_csv(&(*results).0, Path::new(str_arg(dir, "dir")?)))?;
        Ok(())
    })
}
