//! C ABI for the darkstate toolkit.
//!
//! Every fallible function returns a [`DsStatus`]; on failure the message of
//! the most recent error on the calling thread is available through
//! [`ds_last_error_message`]. Objects are opaque handles created by
//! `*_new`/`*_run` functions and released with the matching `*_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use darkstate::cli::parse_config_str;
use darkstate::experiments::{run_sweep, write_sweep_csvs, Mode, ScenarioConfig, ScenarioResult};
use darkstate::optical_gate::ccp_success_probability;
use darkstate::protocol::{coherence_factor, success_probability, CouplingStrength};
use darkstate::qmath::{concurrence, entanglement_of_formation, CMatrix, DensityMatrix, MubState, PureState, C64};
use darkstate::{selftest, Error};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidState = 3,
    DimensionMismatch = 4,
    DegenerateCoupling = 5,
    IncompleteMeasurements = 6,
    Config = 7,
    Output = 8,
    Io = 9,
    BudgetRequired = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DsMode {
    Protocol = 0,
    Reference = 1,
    GateTomography = 2,
}

impl From<DsMode> for Mode {
    fn from(m: DsMode) -> Self {
        match m {
            DsMode::Protocol => Mode::Protocol,
            DsMode::Reference => Mode::Reference,
            DsMode::GateTomography => Mode::GateTomography,
        }
    }
}

/// One `(phi, signal state)` row of a sweep. `state` indexes the labels
/// `0, 1, +, -, +i, -i`.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct DsStatePoint {
    pub phi: f64,
    pub state: u32,
    pub purity: f64,
    pub purity_std: f64,
    pub fidelity: f64,
    pub fidelity_std: f64,
    pub success: f64,
    pub success_std: f64,
    pub p1_env: f64,
    pub p1_env_std: f64,
}

pub struct DsDensityMatrix(DensityMatrix);
pub struct DsScenarioConfig(ScenarioConfig);
pub struct DsScenarioResult(ScenarioResult);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DsStatus {
    match e {
        Error::DimensionMismatch { .. } | Error::NotQubitDimension(_) | Error::InvalidQubits(_) => {
            DsStatus::DimensionMismatch
        }
        Error::InvalidState(_) | Error::InvalidOperator(_) => DsStatus::InvalidState,
        Error::CouplingOutOfRange(_) | Error::InvalidArgument(_) | Error::ZeroCounts => DsStatus::InvalidArgument,
        Error::DegenerateCoupling(_) => DsStatus::DegenerateCoupling,
        Error::IncompleteMeasurements(_) => DsStatus::IncompleteMeasurements,
        Error::Format { .. } | Error::Config { .. } => DsStatus::Config,
        Error::Output { .. } => DsStatus::Output,
        Error::Io(_) => DsStatus::Io,
        Error::BudgetRequired(_) => DsStatus::BudgetRequired,
    }
}

enum Failure {
    Null,
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> DsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => DsStatus::Ok,
        Ok(Err(Failure::Null)) => {
            set_last_error("null pointer argument");
            DsStatus::NullPointer
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(&e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_last_error("internal panic");
            DsStatus::Panic
        }
    }
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null)
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::Null);
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::Lib(Error::InvalidArgument("string is not UTF-8".into())))
}

fn coupling(phi: f64) -> Result<CouplingStrength, Failure> {
    Ok(CouplingStrength::new(phi)?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ds_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncated and
/// NUL-terminated) and returns the full message length in bytes.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ds_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow().as_bytes().to_vec();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Creates a density matrix from row-major real and imaginary parts of a
/// `dim x dim` matrix.
///
/// # Safety
/// `re` and `im` must point to `dim * dim` doubles; `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_density_new(
    re: *const f64,
    im: *const f64,
    dim: usize,
    result: *mut *mut DsDensityMatrix,
) -> DsStatus {
    guard(|| {
        let result = out(result)?;
        if re.is_null() || im.is_null() {
            return Err(Failure::Null);
        }
        let n = dim.checked_mul(dim).ok_or(Failure::Lib(Error::InvalidArgument("dimension overflow".into())))?;
        let (re, im) = (std::slice::from_raw_parts(re, n), std::slice::from_raw_parts(im, n));
        let m = CMatrix::from_fn(dim, dim, |i, j| C64::new(re[i * dim + j], im[i * dim + j]));
        *result = Box::into_raw(Box::new(DsDensityMatrix(DensityMatrix::new(m)?)));
        Ok(())
    })
}

/// # Safety
/// `rho` must be null or a handle from `ds_density_new` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ds_density_free(rho: *mut DsDensityMatrix) {
    if !rho.is_null() {
        drop(Box::from_raw(rho));
    }
}

/// # Safety
/// `rho` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_density_purity(rho: *const DsDensityMatrix, result: *mut f64) -> DsStatus {
    guard(|| {
        *out(result)? = handle(rho)?.0.purity();
        Ok(())
    })
}

/// Fidelity with the product of the given single-qubit labels, written as a
/// space-separated list such as `"+ -i"`.
///
/// # Safety
/// `rho` must be a live handle, `labels` a NUL-terminated string and `result`
/// writable.
#[no_mangle]
pub unsafe extern "C" fn ds_density_fidelity(
    rho: *const DsDensityMatrix,
    labels: *const c_char,
    result: *mut f64,
) -> DsStatus {
    guard(|| {
        let rho = &handle(rho)?.0;
        let labels = text(labels)?
            .split_whitespace()
            .map(str::parse::<MubState>)
            .collect::<Result<Vec<_>, _>>()?;
        *out(result)? = rho.fidelity(&PureState::product(&labels))?;
        Ok(())
    })
}

/// # Safety
/// `rho` must be a live two-qubit handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_density_concurrence(rho: *const DsDensityMatrix, result: *mut f64) -> DsStatus {
    guard(|| {
        *out(result)? = concurrence(&handle(rho)?.0)?;
        Ok(())
    })
}

/// # Safety
/// `rho` must be a live two-qubit handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_density_entanglement_of_formation(
    rho: *const DsDensityMatrix,
    result: *mut f64,
) -> DsStatus {
    guard(|| {
        *out(result)? = entanglement_of_formation(&handle(rho)?.0)?;
        Ok(())
    })
}

/// Dephasing factor `q` of an environment with `|0>` population `p0`.
///
/// # Safety
/// `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_coherence_factor(p0: f64, phi: f64, re: *mut f64, im: *mut f64) -> DsStatus {
    guard(|| {
        let rho = DensityMatrix::diagonal(&[p0, 1.0 - p0])?;
        let q = coherence_factor(&rho, coupling(phi)?)?;
        *out(re)? = q.re;
        *out(im)? = q.im;
        Ok(())
    })
}

/// Probability of heralding the dark state in one attempt.
///
/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_herald_success_probability(p0: f64, phi: f64, result: *mut f64) -> DsStatus {
    guard(|| {
        if !(0.0..=1.0).contains(&p0) {
            return Err(Error::InvalidArgument(format!("p0 = {p0} outside [0, 1]")).into());
        }
        *out(result)? = success_probability(p0, coupling(phi)?);
        Ok(())
    })
}

/// Success probability of the post-selected CCP gate.
///
/// # Safety
/// `result` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_ccp_success_probability(phi: f64, result: *mut f64) -> DsStatus {
    guard(|| {
        *out(result)? = ccp_success_probability(coupling(phi)?);
        Ok(())
    })
}

/// Parses a TOML configuration (may be empty) for `mode`.
///
/// # Safety
/// `toml` must be a NUL-terminated string and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_config_parse(
    toml: *const c_char,
    mode: DsMode,
    result: *mut *mut DsScenarioConfig,
) -> DsStatus {
    guard(|| {
        let result = out(result)?;
        let c = parse_config_str(text(toml)?, mode.into(), &[])?;
        *result = Box::into_raw(Box::new(DsScenarioConfig(c)));
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_set_seed(config: *mut DsScenarioConfig, seed: u64) -> DsStatus {
    guard(|| {
        out(config)?.0.seed = seed;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_set_bootstrap_samples(config: *mut DsScenarioConfig, samples: usize) -> DsStatus {
    guard(|| {
        let c = out(config)?;
        let mut next = c.0.clone();
        next.bootstrap_samples = samples;
        next.validate()?;
        c.0 = next;
        Ok(())
    })
}

/// Coincidences per second at maximal transmittance.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_set_rate(config: *mut DsScenarioConfig, rate: f64) -> DsStatus {
    guard(|| {
        let c = out(config)?;
        let mut next = c.0.clone();
        next.rate = rate;
        next.validate()?;
        c.0 = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be a live handle and `phi` point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ds_config_set_phi_grid(config: *mut DsScenarioConfig, phi: *const f64, len: usize) -> DsStatus {
    guard(|| {
        let c = out(config)?;
        if phi.is_null() {
            return Err(Failure::Null);
        }
        let grid = std::slice::from_raw_parts(phi, len)
            .iter()
            .map(|&p| coupling(p))
            .collect::<Result<Vec<_>, _>>()?;
        let mut next = c.0.clone();
        next.phi_grid = grid;
        next.validate()?;
        c.0 = next;
        Ok(())
    })
}

/// # Safety
/// `config` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_config_free(config: *mut DsScenarioConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a protocol or reference sweep.
///
/// # Safety
/// `config` must be a live handle and `result` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_run_sweep(config: *const DsScenarioConfig, result: *mut *mut DsScenarioResult) -> DsStatus {
    guard(|| {
        let result = out(result)?;
        let r = run_sweep(&handle(config)?.0)?;
        *result = Box::into_raw(Box::new(DsScenarioResult(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_result_point_count(result: *const DsScenarioResult, count: *mut usize) -> DsStatus {
    guard(|| {
        *out(count)? = handle(result)?.0.points.len();
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle and `point` writable.
#[no_mangle]
pub unsafe extern "C" fn ds_result_point(
    result: *const DsScenarioResult,
    index: usize,
    point: *mut DsStatePoint,
) -> DsStatus {
    guard(|| {
        let r = &handle(result)?.0;
        let p = r
            .points
            .get(index)
            .ok_or_else(|| Error::InvalidArgument(format!("point {index} out of range")))?;
        *out(point)? = DsStatePoint {
            phi: p.phi,
            state: p.state.index() as u32,
            purity: p.purity.value,
            purity_std: p.purity.std,
            fidelity: p.fidelity.value,
            fidelity_std: p.fidelity.std,
            success: p.success.value,
            success_std: p.success.std,
            p1_env: p.p1_env.value,
            p1_env_std: p.p1_env.std,
        };
        Ok(())
    })
}

/// Writes the sweep tables into an existing directory.
///
/// # Safety
/// `result` must be a live handle and `dir` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn ds_result_write_csvs(result: *const DsScenarioResult, dir: *const c_char) -> DsStatus {
    guard(|| {
        write_sweep_csvs(&handle(result)?.0, Path::new(text(dir)?))?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ds_result_free(result: *mut DsScenarioResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Runs the acceptance suite and reports how many criteria passed.
///
/// # Safety
/// `passed` and `total` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ds_selftest(passed: *mut u32, total: *mut u32) -> DsStatus {
    guard(|| {
        let reports = selftest::run_all();
        *out(passed)? = reports.iter().filter(|r| r.passed).count() as u32;
        *out(total)? = reports.len() as u32;
        Ok(())
    })
}
