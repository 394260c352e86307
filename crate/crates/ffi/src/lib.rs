//! C ABI for `mwion`.
//!
//! Objects cross the boundary as opaque handles created by `*_new`/`*_from_*`
//! functions and released with the matching `*_free`. Every fallible call
//! returns an [`MwionStatus`]; on failure [`mwion_last_error`] gives a
//! message for the calling thread. Strings returned through `char **` are
//! owned by the caller and released with [`mwion_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mwion::addressing::{epsilon_c, lamb_dicke, required_gradient, DriveField};
use mwion::config::{ConfigDocument, DriveSettings};
use mwion::crystal::{solve_chain, ExtraForces};
use mwion::fidelity::{estimate_spread, gate_error_closed_form, ForceConvention, SamplingPlan};
use mwion::report::{
    design_report, drive_for, reference_table, table_entries, write_table_csv, DesignOptions,
};
use mwion::{ChainSolution, Error, IonSpecies, Level, QubitLevels, TrapConfig};

pub const MWION_LEVEL_LOWER: u32 = 0;
pub const MWION_LEVEL_UPPER: u32 = 1;
pub const MWION_CONVENTION_MEAN_FORCE: u32 = 0;
pub const MWION_CONVENTION_ION_IN_LOWER_STATE: u32 = 1;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MwionStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    InvalidArgument = 4,
    NumericalError = 5,
    Io = 6,
    Panic = 7,
}

/// Trap configuration plus optional drive settings.
pub struct MwionConfig {
    trap: TrapConfig,
    drive: DriveSettings,
}

/// Equilibrium positions and normal modes of a chain.
pub struct MwionChain {
    chain: ChainSolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> MwionStatus {
    match e {
        _ if e.is_config_error() => MwionStatus::ConfigError,
        Error::Io(_) => MwionStatus::Io,
        Error::NoConvergence { .. }
        | Error::NotAMinimum { .. }
        | Error::Truncation { .. }
        | Error::StepSizeUnderflow { .. }
        | Error::Configuration { .. } => MwionStatus::NumericalError,
        _ => MwionStatus::InvalidArgument,
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard<F: FnOnce() -> Result<(), (MwionStatus, String)>>(f: F) -> MwionStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => MwionStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside mwion".into());
            MwionStatus::Panic
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (MwionStatus, String)>;
}

impl<T> IntoFfi<T> for mwion::Result<T> {
    fn ffi(self) -> Result<T, (MwionStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (MwionStatus, String) {
    (MwionStatus::NullPointer, format!("{what} is NULL"))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MwionStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (MwionStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), (MwionStatus, String)> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        return Err((
            MwionStatus::InvalidArgument,
            format!("output buffer holds {len} values, {} needed", src.len()),
        ));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

unsafe fn string_out(s: String, out: *mut *mut c_char) -> Result<(), (MwionStatus, String)> {
    let c = CString::new(s).map_err(|e| (MwionStatus::InvalidArgument, e.to_string()))?;
    write_out(out, c.into_raw())
}

fn convention(code: u32) -> Result<ForceConvention, (MwionStatus, String)> {
    match code {
        MWION_CONVENTION_MEAN_FORCE => Ok(ForceConvention::MeanForce),
        MWION_CONVENTION_ION_IN_LOWER_STATE => Ok(ForceConvention::IonInLowerState),
        other => Err((
            MwionStatus::InvalidArgument,
            format!("unknown convention {other}"),
        )),
    }
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn mwion_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mwion_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a TOML or JSON configuration document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_config_from_str(
    text: *const c_char,
    out: *mut *mut MwionConfig,
) -> MwionStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| (MwionStatus::InvalidUtf8, e.to_string()))?;
        let doc = ConfigDocument::parse(s).ffi()?;
        let cfg = MwionConfig {
            trap: doc.trap_config().ffi()?,
            drive: doc.drive_settings().ffi()?,
        };
        write_out(out, Box::into_raw(Box::new(cfg)))
    })
}

/// ¹⁷¹Yb⁺ chain. Frequencies in rad/s; `omega_r <= 0` selects the default
/// radial frequency.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_config_yb171(
    n_ions: usize,
    omega_z: f64,
    omega_r: f64,
    gradient_b: f64,
    offset_b0: f64,
    out: *mut *mut MwionConfig,
) -> MwionStatus {
    guard(|| {
        let radial = (omega_r > 0.0).then_some(omega_r);
        let trap = TrapConfig::new(
            IonSpecies::yb171(),
            n_ions,
            omega_z,
            radial,
            gradient_b,
            offset_b0,
        )
        .ffi()?;
        let cfg = MwionConfig {
            trap,
            drive: DriveSettings::default(),
        };
        write_out(out, Box::into_raw(Box::new(cfg)))
    })
}

/// # Safety
/// `cfg` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwion_config_free(cfg: *mut MwionConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Number of ions, or 0 for NULL.
///
/// # Safety
/// `cfg` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mwion_config_n_ions(cfg: *const MwionConfig) -> usize {
    cfg.as_ref().map_or(0, |c| c.trap.n_ions)
}

/// Copy of the configuration with a different gradient.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_config_with_gradient(
    cfg: *const MwionConfig,
    gradient_b: f64,
    out: *mut *mut MwionConfig,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let copy = MwionConfig {
            trap: c.trap.with_gradient(gradient_b).ffi()?,
            drive: c.drive,
        };
        write_out(out, Box::into_raw(Box::new(copy)))
    })
}

/// Solves equilibrium positions and normal modes without extra forces.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_solve(
    cfg: *const MwionConfig,
    out: *mut *mut MwionChain,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let chain = solve_chain(&c.trap, &ExtraForces::zero(c.trap.n_ions)).ffi()?;
        write_out(out, Box::into_raw(Box::new(MwionChain { chain })))
    })
}

/// # Safety
/// `chain` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_free(chain: *mut MwionChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// # Safety
/// `chain` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_n_ions(chain: *const MwionChain) -> usize {
    chain.as_ref().map_or(0, |c| c.chain.n_ions())
}

/// Equilibrium positions in m, ascending.
///
/// # Safety
/// `chain` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_positions(
    chain: *const MwionChain,
    out: *mut f64,
    len: usize,
) -> MwionStatus {
    guard(|| copy_out(&deref(chain, "chain")?.chain.positions, out, len))
}

/// Axial mode frequencies in rad/s, ascending.
///
/// # Safety
/// `chain` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_mode_frequencies(
    chain: *const MwionChain,
    out: *mut f64,
    len: usize,
) -> MwionStatus {
    guard(|| copy_out(&deref(chain, "chain")?.chain.mode_frequencies, out, len))
}

/// Normalized eigenvector of `mode`, one component per ion.
///
/// # Safety
/// `chain` must be a live handle; `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mwion_chain_mode_vector(
    chain: *const MwionChain,
    mode: usize,
    out: *mut f64,
    len: usize,
) -> MwionStatus {
    guard(|| {
        let c = &deref(chain, "chain")?.chain;
        c.mode_frequency(mode).ffi()?;
        copy_out(&c.mode_vectors[mode], out, len)
    })
}

fn matching<'a>(cfg: &'a MwionConfig, chain: &'a MwionChain) -> Result<(), (MwionStatus, String)> {
    if cfg.trap.n_ions != chain.chain.n_ions() {
        return Err((
            MwionStatus::InvalidArgument,
            format!(
                "chain has {} ions, config {}",
                chain.chain.n_ions(),
                cfg.trap.n_ions
            ),
        ));
    }
    Ok(())
}

/// Smallest gradient (T/m) separating neighbouring resonances by the
/// highest mode frequency.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_required_gradient(cfg: *const MwionConfig, out: *mut f64) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let b = required_gradient(&c.trap, &QubitLevels::for_config(&c.trap)).ffi()?;
        write_out(out, b)
    })
}

/// Spin–phonon coupling ε_c of `ion` to `mode`.
///
/// # Safety
/// `cfg` and `chain` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_epsilon_c(
    cfg: *const MwionConfig,
    chain: *const MwionChain,
    ion: usize,
    mode: usize,
    out: *mut f64,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let ch = deref(chain, "chain")?;
        matching(c, ch)?;
        let levels = QubitLevels::for_config(&c.trap);
        write_out(out, epsilon_c(&c.trap, &ch.chain, &levels, ion, mode).ffi()?)
    })
}

/// Lamb–Dicke parameter η of `ion` in `mode` for a drive at `drive_frequency`
/// (rad/s) incident at `incidence_angle` (rad) to the trap axis.
///
/// # Safety
/// `cfg` and `chain` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_lamb_dicke(
    cfg: *const MwionConfig,
    chain: *const MwionChain,
    ion: usize,
    mode: usize,
    drive_frequency: f64,
    incidence_angle: f64,
    out: *mut f64,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let ch = deref(chain, "chain")?;
        matching(c, ch)?;
        let drive = DriveField::new(drive_frequency, incidence_angle, 0.1 * c.trap.omega_z).ffi()?;
        write_out(out, lamb_dicke(&c.trap, &ch.chain, &drive, ion, mode).ffi()?)
    })
}

/// Dimensionless field derivative κ = −(∂E/∂B)/μ_B of a qubit level at
/// field `field` (T). `level` is `MWION_LEVEL_LOWER` or `MWION_LEVEL_UPPER`.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_kappa(
    cfg: *const MwionConfig,
    field: f64,
    level: u32,
    out: *mut f64,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let level = match level {
            MWION_LEVEL_LOWER => Level::Lower,
            MWION_LEVEL_UPPER => Level::Upper,
            other => return Err((MwionStatus::InvalidArgument, format!("unknown level {other}"))),
        };
        write_out(out, QubitLevels::for_config(&c.trap).kappa(field, level))
    })
}

/// 1 − f = (41/120)(σ/Ω_R)².
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_gate_error_closed_form(
    sigma: f64,
    rabi_frequency: f64,
    out: *mut f64,
) -> MwionStatus {
    guard(|| write_out(out, gate_error_closed_form(sigma, rabi_frequency).ffi()?))
}

/// Mean frequency spread σ (rad/s) over the internal states of the other
/// ions, with the default sampling rules and the given seed.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mwion_frequency_spread(
    cfg: *const MwionConfig,
    seed: u64,
    convention_code: u32,
    out: *mut f64,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let conv = convention(convention_code)?;
        let s = estimate_spread(
            &c.trap,
            &QubitLevels::for_config(&c.trap),
            &SamplingPlan::with_seed(seed),
            conv,
        )
        .ffi()?;
        write_out(out, s.mean_sigma)
    })
}

/// Full design report as JSON.
///
/// # Safety
/// `cfg` must be a live handle; `out` must be writable. Free the result with
/// [`mwion_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mwion_design_report_json(
    cfg: *const MwionConfig,
    seed: u64,
    with_fidelity: bool,
    out: *mut *mut c_char,
) -> MwionStatus {
    guard(|| {
        let c = deref(cfg, "cfg")?;
        let drive = drive_for(&c.trap, &c.drive).ffi()?;
        let opts = DesignOptions {
            fidelity: with_fidelity,
            sampling: SamplingPlan::with_seed(seed),
            ..Default::default()
        };
        let report = design_report(&c.trap, &drive, &opts).ffi()?;
        string_out(report.to_json(), out)
    })
}

/// Reference table as CSV (computed vs reference with relative deviation).
///
/// # Safety
/// `out` must be writable. Free the result with [`mwion_string_free`].
#[no_mangle]
pub unsafe extern "C" fn mwion_table1_csv(
    with_fidelity: bool,
    seed: u64,
    out: *mut *mut c_char,
) -> MwionStatus {
    guard(|| {
        let conventions: &[ForceConvention] = if with_fidelity { &ForceConvention::ALL } else { &[] };
        let cells = reference_table(conventions, &SamplingPlan::with_seed(seed)).ffi()?;
        let mut buf = Vec::new();
        write_table_csv(&table_entries(&cells), &mut buf).ffi()?;
        string_out(String::from_utf8(buf).expect("csv output is UTF-8"), out)
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn mwion_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
