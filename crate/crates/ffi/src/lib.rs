//! C interface to `exact_transfer`.
//!
//! Every fallible call returns an [`EtStatus`]. On failure the message is
//! kept per thread and read with [`et_last_error`]. Handles are opaque and
//! released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use exact_transfer::cli::{execute, parse_config};
use exact_transfer::hilbert::{
    BasisRef, ExchangePolicy, FockBasis, Operator, ParticleKind, RegionPartition, Sector,
};
use exact_transfer::models::{hopping_hamiltonian, ChainModel};
use exact_transfer::numerics::{expm_skew, CVector};
use exact_transfer::transmission::{pst_fidelity, transmission_set_with, QuasiEvolution};
use exact_transfer::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotUnitary = 3,
    NoConvergence = 4,
    Config = 5,
    Io = 6,
    /// The run finished but at least one gate failed.
    GateFailed = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtParticleKind {
    Hardcore = 0,
    Fermion = 1,
    Boson = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtChainModel {
    /// Equal couplings `J` on every bond.
    Uniform = 0,
    /// `J_j = J sqrt(j (N - j)) / 2`.
    Christandl = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtExchangePolicy {
    IdentityOnMedium = 0,
    FullMirror = 1,
}

/// A chain Hamiltonian on one particle-number sector.
pub struct EtChain {
    basis: BasisRef,
    hamiltonian: Operator,
}

/// `G = P exp(-i H tau)` for a chain and a region partition.
pub struct EtQuasiEvolution {
    q: QuasiEvolution,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> EtStatus {
    match e {
        Error::NotUnitary { .. } => EtStatus::NotUnitary,
        Error::NoConvergence => EtStatus::NoConvergence,
        Error::Config(_) => EtStatus::Config,
        Error::Io(_) => EtStatus::Io,
        _ => EtStatus::InvalidArgument,
    }
}

fn guard(f: impl FnOnce() -> Result<EtStatus, Error>) -> EtStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(status)) => status,
        Ok(Err(e)) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            EtStatus::Panic
        }
    }
}

fn null_error(what: &str) -> Error {
    Error::InvalidArgument(format!("{what} is null"))
}

unsafe fn sites_from(ptr: *const usize, len: usize, what: &str) -> Result<Vec<usize>, Error> {
    if len == 0 {
        return Ok(Vec::new());
    }
    if ptr.is_null() {
        return Err(null_error(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len).to_vec())
}

impl From<EtParticleKind> for ParticleKind {
    fn from(k: EtParticleKind) -> Self {
        match k {
            EtParticleKind::Hardcore => ParticleKind::Hardcore,
            EtParticleKind::Fermion => ParticleKind::Fermion,
            EtParticleKind::Boson => ParticleKind::Boson,
        }
    }
}

impl From<EtExchangePolicy> for ExchangePolicy {
    fn from(p: EtExchangePolicy) -> Self {
        match p {
            EtExchangePolicy::IdentityOnMedium => ExchangePolicy::IdentityOnMedium,
            EtExchangePolicy::FullMirror => ExchangePolicy::FullMirror,
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn et_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or NULL. Valid until the next call.
#[no_mangle]
pub extern "C" fn et_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a chain of `sites` sites holding exactly `particles` particles.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn et_chain_new(
    model: EtChainModel,
    kind: EtParticleKind,
    sites: usize,
    j: f64,
    particles: usize,
    out: *mut *mut EtChain,
) -> EtStatus {
    if out.is_null() {
        return EtStatus::NullPointer;
    }
    guard(|| {
        let kind = ParticleKind::from(kind);
        let m = match model {
            EtChainModel::Uniform => ChainModel::uniform(kind, sites, j)?,
            EtChainModel::Christandl => ChainModel::christandl(kind, sites, j)?,
        };
        let basis = FockBasis::new(kind, sites, Sector::Fixed(particles), None)?;
        let hamiltonian = hopping_hamiltonian(&m, &basis)?;
        *out = Box::into_raw(Box::new(EtChain { basis, hamiltonian }));
        Ok(EtStatus::Ok)
    })
}

/// Dimension of the chain's sector.
///
/// # Safety
/// `chain` must be NULL or a live handle from [`et_chain_new`]; `dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_chain_dim(chain: *const EtChain, dim: *mut usize) -> EtStatus {
    if chain.is_null() || dim.is_null() {
        return EtStatus::NullPointer;
    }
    *dim = (*chain).basis.dim();
    EtStatus::Ok
}

/// # Safety
/// `chain` must be NULL or a handle from [`et_chain_new`] that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn et_chain_free(chain: *mut EtChain) {
    if !chain.is_null() {
        drop(Box::from_raw(chain));
    }
}

/// Forms `G = P U(tau)` for 1-based site lists `a` and `b`.
///
/// # Safety
/// `chain` must be a live handle, `a` and `b` must point to `a_len` and
/// `b_len` readable values, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn et_quasi_evolution_new(
    chain: *const EtChain,
    tau: f64,
    a: *const usize,
    a_len: usize,
    b: *const usize,
    b_len: usize,
    policy: EtExchangePolicy,
    out: *mut *mut EtQuasiEvolution,
) -> EtStatus {
    if chain.is_null() || out.is_null() {
        return EtStatus::NullPointer;
    }
    guard(|| {
        let chain = &*chain;
        let partition = RegionPartition::new(chain.basis.sites(), sites_from(a, a_len, "a")?, sites_from(b, b_len, "b")?)?;
        let q = QuasiEvolution::from_hamiltonian(&chain.hamiltonian, tau, &partition, policy.into())?;
        *out = Box::into_raw(Box::new(EtQuasiEvolution { q }));
        Ok(EtStatus::Ok)
    })
}

/// # Safety
/// `qe` must be a live handle and `dim` writable.
#[no_mangle]
pub unsafe extern "C" fn et_quasi_evolution_dim(qe: *const EtQuasiEvolution, dim: *mut usize) -> EtStatus {
    if qe.is_null() || dim.is_null() {
        return EtStatus::NullPointer;
    }
    *dim = (*qe).q.g.dim();
    EtStatus::Ok
}

/// # Safety
/// `qe` must be NULL or a handle that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn et_quasi_evolution_free(qe: *mut EtQuasiEvolution) {
    if !qe.is_null() {
        drop(Box::from_raw(qe));
    }
}

/// Writes the eigenphases of `G` and the transmission residual
/// `||rho_A(Psi_k) - rho_B(U Psi_k)||` of each eigenvector. Both buffers
/// need room for the dimension of `G`.
///
/// # Safety
/// `qe` must be a live handle; `phases` and `residuals` must each point to `capacity` writable values.
#[no_mangle]
pub unsafe extern "C" fn et_transmission_set(
    qe: *const EtQuasiEvolution,
    cluster_tol: f64,
    phases: *mut f64,
    residuals: *mut f64,
    capacity: usize,
) -> EtStatus {
    if qe.is_null() || phases.is_null() || residuals.is_null() {
        return EtStatus::NullPointer;
    }
    let q = &(*qe).q;
    if capacity < q.g.dim() {
        set_error(format!("buffers hold {capacity} values, {} needed", q.g.dim()));
        return EtStatus::BufferTooSmall;
    }
    guard(|| {
        let report = transmission_set_with(q, cluster_tol)?;
        for (k, s) in report.states.iter().enumerate() {
            *phases.add(k) = s.phase;
            *residuals.add(k) = s.residual;
        }
        Ok(EtStatus::Ok)
    })
}

/// Transfer fidelity of one particle from the first site of `a` to the
/// region `b` after time `tau`. `phase` receives the transfer phase, or NaN
/// when the transfer is not perfect.
///
/// # Safety
/// `chain` must be a live handle, the site arrays readable for their lengths, and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn et_pst_fidelity(
    chain: *const EtChain,
    tau: f64,
    a: *const usize,
    a_len: usize,
    b: *const usize,
    b_len: usize,
    fidelity: *mut f64,
    phase: *mut f64,
) -> EtStatus {
    if chain.is_null() || fidelity.is_null() || phase.is_null() {
        return EtStatus::NullPointer;
    }
    guard(|| {
        let chain = &*chain;
        let partition = RegionPartition::new(chain.basis.sites(), sites_from(a, a_len, "a")?, sites_from(b, b_len, "b")?)?;
        let u = Operator::new(chain.basis.clone(), expm_skew(&chain.hamiltonian.matrix, tau)?)?;
        let d = chain.basis.local_dim();
        let mut input = CVector::zeros(d.pow(a_len as u32));
        input[d.pow(a_len.saturating_sub(1) as u32)] = 1.0.into();
        let r = pst_fidelity(&u, &input, &partition)?;
        *fidelity = r.fidelity;
        *phase = r.phase.unwrap_or(f64::NAN);
        Ok(EtStatus::Ok)
    })
}

/// Runs a TOML or JSON run configuration and returns the JSON report in
/// `report`, to be released with [`et_string_free`]. Returns
/// `ET_STATUS_GATE_FAILED` with the report still set when a gate fails.
///
/// # Safety
/// `config` must be a NUL-terminated string and `report` writable.
#[no_mangle]
pub unsafe extern "C" fn et_run_config(config: *const c_char, report: *mut *mut c_char) -> EtStatus {
    if config.is_null() || report.is_null() {
        return EtStatus::NullPointer;
    }
    *report = ptr::null_mut();
    guard(|| {
        let text = CStr::from_ptr(config)
            .to_str()
            .map_err(|_| Error::InvalidArgument("configuration is not UTF-8".into()))?;
        let doc = execute(&parse_config(text, None)?, None)?;
        let json = CString::new(doc.to_json()?).map_err(|e| Error::Serialize(e.to_string()))?;
        *report = json.into_raw();
        Ok(if doc.passed { EtStatus::Ok } else { EtStatus::GateFailed })
    })
}

/// # Safety
/// `s` must be NULL or a string returned by this library that has not been freed.
#[no_mangle]
pub unsafe extern "C" fn et_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
