//! C ABI over the `antisym` crate.
//!
//! Objects cross the boundary as opaque handles created and destroyed by
//! this library. Every fallible call returns an [`AntisymStatus`]; on a
//! nonzero status the message is available from [`antisym_last_error`] on
//! the same thread until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use antisym::builder::{build, BuildOptions, OrbitalSet, Variant};
use antisym::circuit::text::{from_text, to_text};
use antisym::circuit::{Circuit, GateCounts};
use antisym::lower::{lower_circuit, LoweringOptions};
use antisym::resources::{avg_phase_corrections, n_comp, n_ctrl};
use antisym::synth::synthesize_ry;
use antisym::verify::verify_circuit;
use antisym::{Error, C64};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntisymStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Layout = 3,
    Parse = 4,
    NotOrthogonal = 5,
    QubitCap = 6,
    Synthesis = 7,
    Io = 8,
    Utf8 = 9,
    Panic = 10,
}

impl From<&Error> for AntisymStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Layout(_) | Error::Dimension(..) => AntisymStatus::Layout,
            Error::Parse { .. } | Error::Json(_) => AntisymStatus::Parse,
            Error::NotOrthogonal { .. } => AntisymStatus::NotOrthogonal,
            Error::QubitCap { .. } => AntisymStatus::QubitCap,
            Error::SynthesisFailed { .. } => AntisymStatus::Synthesis,
            Error::Io(_) => AntisymStatus::Io,
            _ => AntisymStatus::InvalidArgument,
        }
    }
}

/// Opaque set of single-particle orbitals.
pub struct AntisymOrbitals(OrbitalSet);

/// Opaque circuit.
pub struct AntisymCircuit(Circuit);

/// Gate tallies, mirroring the Rust `GateCounts`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AntisymGateCounts {
    pub clifford: usize,
    pub t_like: usize,
    pub rotations: usize,
    pub measurements: usize,
    pub resets: usize,
    pub two_qubit: usize,
    pub other: usize,
}

impl From<GateCounts> for AntisymGateCounts {
    fn from(c: GateCounts) -> Self {
        AntisymGateCounts {
            clifford: c.clifford,
            t_like: c.t_like,
            rotations: c.rotations,
            measurements: c.measurements,
            resets: c.resets,
            two_qubit: c.two_qubit,
            other: c.other,
        }
    }
}

/// Results of checking a circuit against its orbitals.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AntisymVerifyReport {
    pub branches: usize,
    pub overlap: f64,
    pub fidelity: f64,
    pub ancilla_zero_probability: f64,
}

/// Variant selector for [`antisym_build`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AntisymVariant {
    Recursive = 0,
    Measurement = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

enum Failure {
    Status(AntisymStatus, String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(AntisymStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> AntisymStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AntisymStatus::Ok,
        Ok(Err(Failure::Lib(e))) => {
            let s = AntisymStatus::from(&e);
            set_error(e.to_string());
            s
        }
        Ok(Err(Failure::Status(s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal panic".into());
            AntisymStatus::Panic
        }
    }
}

/// # Safety
/// `p` must be null or valid for reads.
unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

/// # Safety
/// `p` must be null or valid for writes.
unsafe fn write<T>(p: *mut T, value: T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    p.write(value);
    Ok(())
}

/// Message of the last failure on this thread; empty if none. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn antisym_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn antisym_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Orbitals `|r⟩` for each of `n` integers.
///
/// # Safety
/// `values` must point to `n` readable integers; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_orbitals_from_integers(
    eta: usize,
    values: *const usize,
    n: usize,
    out: *mut *mut AntisymOrbitals,
) -> AntisymStatus {
    guard(|| {
        if values.is_null() {
            return Err(null("values"));
        }
        let v = std::slice::from_raw_parts(values, n);
        let set = OrbitalSet::from_integers(eta, v)?;
        write(out, Box::into_raw(Box::new(AntisymOrbitals(set))), "out")
    })
}

/// Orbitals from interleaved `(re, im)` amplitudes, `2^eta` per orbital.
///
/// # Safety
/// `re_im` must point to `2 · n · 2^eta` readable doubles; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_orbitals_from_amplitudes(
    eta: usize,
    re_im: *const f64,
    n: usize,
    out: *mut *mut AntisymOrbitals,
) -> AntisymStatus {
    guard(|| {
        if re_im.is_null() {
            return Err(null("re_im"));
        }
        if eta == 0 || eta > 16 {
            return Err(Failure::Status(
                AntisymStatus::InvalidArgument,
                format!("eta {eta} out of range"),
            ));
        }
        let d = 1usize << eta;
        let raw = std::slice::from_raw_parts(re_im, 2 * n * d);
        let vectors = raw
            .chunks(2 * d)
            .map(|o| o.chunks(2).map(|z| C64::new(z[0], z[1])).collect())
            .collect();
        let set = OrbitalSet::from_amplitudes(eta, vectors)?;
        write(out, Box::into_raw(Box::new(AntisymOrbitals(set))), "out")
    })
}

/// Seeded random orthonormal orbitals.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_orbitals_random(
    n: usize,
    eta: usize,
    seed: u64,
    out: *mut *mut AntisymOrbitals,
) -> AntisymStatus {
    guard(|| {
        let set = OrbitalSet::random(n, eta, seed)?;
        write(out, Box::into_raw(Box::new(AntisymOrbitals(set))), "out")
    })
}

/// # Safety
/// `o` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn antisym_orbitals_free(o: *mut AntisymOrbitals) {
    if !o.is_null() {
        drop(Box::from_raw(o));
    }
}

/// Antisymmetrizing circuit for `orbitals`; `variant` takes an
/// [`AntisymVariant`] value.
///
/// # Safety
/// `orbitals` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_build(
    orbitals: *const AntisymOrbitals,
    variant: u32,
    reuse_ancillas: bool,
    out: *mut *mut AntisymCircuit,
) -> AntisymStatus {
    guard(|| {
        let o = as_ref(orbitals, "orbitals")?;
        let opts = BuildOptions {
            variant: match variant {
                v if v == AntisymVariant::Recursive as u32 => Variant::Recursive,
                v if v == AntisymVariant::Measurement as u32 => Variant::Measurement,
                v => {
                    return Err(Failure::Status(
                        AntisymStatus::InvalidArgument,
                        format!("unknown variant {v}"),
                    ))
                }
            },
            reuse_ancillas,
            sort_by_cost: false,
        };
        let c = build(&o.0, &opts)?.circuit;
        write(out, Box::into_raw(Box::new(AntisymCircuit(c))), "out")
    })
}

/// Clifford+T lowering with default options; rotations are kept.
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_lower(
    c: *const AntisymCircuit,
    out: *mut *mut AntisymCircuit,
) -> AntisymStatus {
    guard(|| {
        let c = as_ref(c, "circuit")?;
        let l = lower_circuit(&c.0, &LoweringOptions::default())?;
        write(
            out,
            Box::into_raw(Box::new(AntisymCircuit(l.circuit))),
            "out",
        )
    })
}

/// Parses the text circuit format.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_from_text(
    text: *const c_char,
    out: *mut *mut AntisymCircuit,
) -> AntisymStatus {
    guard(|| {
        if text.is_null() {
            return Err(null("text"));
        }
        let s = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Failure::Status(AntisymStatus::Utf8, e.to_string()))?;
        let c = from_text(s)?;
        write(out, Box::into_raw(Box::new(AntisymCircuit(c))), "out")
    })
}

/// Serializes to the text format; free the result with
/// [`antisym_string_free`].
///
/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_to_text(
    c: *const AntisymCircuit,
    out: *mut *mut c_char,
) -> AntisymStatus {
    guard(|| {
        let c = as_ref(c, "circuit")?;
        let s = CString::new(to_text(&c.0))
            .map_err(|e| Failure::Status(AntisymStatus::InvalidArgument, e.to_string()))?;
        write(out, s.into_raw(), "out")
    })
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn antisym_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `c` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_counts(
    c: *const AntisymCircuit,
    out: *mut AntisymGateCounts,
) -> AntisymStatus {
    guard(|| {
        let c = as_ref(c, "circuit")?;
        write(out, c.0.counts().into(), "out")
    })
}

/// Total qubit count of the circuit, or 0 for a null handle.
///
/// # Safety
/// `c` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_qubits(c: *const AntisymCircuit) -> usize {
    c.as_ref().map_or(0, |c| c.0.n_qubits())
}

/// # Safety
/// `c` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn antisym_circuit_free(c: *mut AntisymCircuit) {
    if !c.is_null() {
        drop(Box::from_raw(c));
    }
}

/// Ideal simulation of `c` compared with the antisymmetrized orbitals.
///
/// # Safety
/// Both handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_verify(
    c: *const AntisymCircuit,
    orbitals: *const AntisymOrbitals,
    out: *mut AntisymVerifyReport,
) -> AntisymStatus {
    guard(|| {
        let c = as_ref(c, "circuit")?;
        let o = as_ref(orbitals, "orbitals")?;
        let r = verify_circuit(&c.0, &o.0)?;
        let report = AntisymVerifyReport {
            branches: r.branches,
            overlap: r.min_overlap,
            fidelity: r.fidelity,
            ancilla_zero_probability: r.ancilla_zero_probability,
        };
        write(out, report, "out")
    })
}

/// Sorting-network comparator count for `n ≥ 2` keys.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_n_comp(n: u64, out: *mut u64) -> AntisymStatus {
    guard(|| write(out, n_comp(n)?, "out"))
}

#[no_mangle]
pub extern "C" fn antisym_n_ctrl(n: u64) -> u64 {
    n_ctrl(n)
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_avg_phase_corrections(n: u64, out: *mut f64) -> AntisymStatus {
    guard(|| write(out, avg_phase_corrections(n)?, "out"))
}

/// Clifford+T approximation of `Ry(theta)` within `epsilon`.
///
/// # Safety
/// The three output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn antisym_synthesize_ry(
    theta: f64,
    epsilon: f64,
    t_count: *mut usize,
    total_count: *mut usize,
    error: *mut f64,
) -> AntisymStatus {
    guard(|| {
        if t_count.is_null() || total_count.is_null() || error.is_null() {
            return Err(null("output"));
        }
        let r = synthesize_ry(theta, epsilon)?;
        t_count.write(r.t_count);
        total_count.write(r.total_count);
        error.write(r.error);
        Ok(())
    })
}
