use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use antisym_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(antisym_last_error()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn orbitals(eta: usize, ints: &[usize]) -> *mut AntisymOrbitals {
    let mut o = ptr::null_mut();
    let s = antisym_orbitals_from_integers(eta, ints.as_ptr(), ints.len(), &mut o);
    assert_eq!(s, AntisymStatus::Ok, "{}", last_error());
    o
}

#[test]
fn build_lower_and_count() {
    unsafe {
        let o = orbitals(3, &[0, 1, 2]);
        let mut c = ptr::null_mut();
        let s = antisym_build(o, AntisymVariant::Measurement as u32, true, &mut c);
        assert_eq!(s, AntisymStatus::Ok);
        let mut low = ptr::null_mut();
        assert_eq!(antisym_circuit_lower(c, &mut low), AntisymStatus::Ok);
        let mut counts = AntisymGateCounts::default();
        assert_eq!(antisym_circuit_counts(low, &mut counts), AntisymStatus::Ok);
        assert_eq!(counts.measurements, 3);
        assert_eq!(counts.other, 0);

        let mut report = AntisymVerifyReport::default();
        assert_eq!(antisym_verify(c, o, &mut report), AntisymStatus::Ok);
        assert!(report.overlap > 1.0 - 1e-10);
        assert!(report.branches > 1);

        antisym_circuit_free(low);
        antisym_circuit_free(c);
        antisym_orbitals_free(o);
    }
}

#[test]
fn text_round_trip() {
    unsafe {
        let mut o = ptr::null_mut();
        assert_eq!(antisym_orbitals_random(3, 2, 9, &mut o), AntisymStatus::Ok);
        let mut c = ptr::null_mut();
        assert_eq!(antisym_build(o, 0, true, &mut c), AntisymStatus::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(antisym_circuit_to_text(c, &mut text), AntisymStatus::Ok);
        let mut back = ptr::null_mut();
        assert_eq!(
            antisym_circuit_from_text(text, &mut back),
            AntisymStatus::Ok
        );
        let mut a = AntisymGateCounts::default();
        let mut b = AntisymGateCounts::default();
        antisym_circuit_counts(c, &mut a);
        antisym_circuit_counts(back, &mut b);
        assert_eq!(a, b);
        antisym_string_free(text);
        antisym_circuit_free(back);
        antisym_circuit_free(c);
        antisym_orbitals_free(o);
    }
}

#[test]
fn amplitudes_from_interleaved_pairs() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    // (|0⟩ + |1⟩)/√2 and (|0⟩ − |1⟩)/√2.
    let raw = [h, 0.0, h, 0.0, h, 0.0, -h, 0.0];
    unsafe {
        let mut o = ptr::null_mut();
        let s = antisym_orbitals_from_amplitudes(1, raw.as_ptr(), 2, &mut o);
        assert_eq!(s, AntisymStatus::Ok, "{}", last_error());
        antisym_orbitals_free(o);
    }
}

#[test]
fn error_codes() {
    unsafe {
        let mut o = ptr::null_mut();
        let s = antisym_orbitals_from_integers(2, [3usize, 3].as_ptr(), 2, &mut o);
        assert_eq!(s, AntisymStatus::NotOrthogonal);
        assert!(o.is_null());
        assert!(last_error().contains("orthogonal"));

        let s = antisym_orbitals_from_integers(2, ptr::null(), 2, &mut o);
        assert_eq!(s, AntisymStatus::NullPointer);

        let good = orbitals(2, &[0, 1]);
        let mut c = ptr::null_mut();
        assert_eq!(
            antisym_build(good, 7, true, &mut c),
            AntisymStatus::InvalidArgument
        );
        assert_eq!(
            antisym_build(ptr::null(), 0, true, &mut c),
            AntisymStatus::NullPointer
        );
        antisym_orbitals_free(good);

        let bad = CString::new("not a circuit").unwrap();
        assert_eq!(
            antisym_circuit_from_text(bad.as_ptr(), &mut c),
            AntisymStatus::Parse
        );

        let mut x = 0u64;
        assert_eq!(antisym_n_comp(1, &mut x), AntisymStatus::InvalidArgument);
        assert_eq!(antisym_circuit_qubits(ptr::null()), 0);
        antisym_circuit_free(ptr::null_mut());
    }
}

#[test]
fn resource_and_synthesis_calls() {
    unsafe {
        let mut x = 0u64;
        assert_eq!(antisym_n_comp(64, &mut x), AntisymStatus::Ok);
        assert_eq!(x, 543);
        assert_eq!(antisym_n_ctrl(65), 2080);
        let mut avg = 0.0;
        assert_eq!(
            antisym_avg_phase_corrections(2, &mut avg),
            AntisymStatus::Ok
        );
        assert_eq!(avg, 0.5);

        let theta = 2.0 * (1.0f64 / 3.0).sqrt().acos();
        let (mut t, mut total, mut err) = (0usize, 0usize, 0.0f64);
        let s = antisym_synthesize_ry(theta, 0.1, &mut t, &mut total, &mut err);
        assert_eq!(s, AntisymStatus::Ok);
        assert!(err <= 0.1 && t > 0 && total >= t);
        let s = antisym_synthesize_ry(theta, 1e-9, &mut t, &mut total, &mut err);
        assert_ne!(s, AntisymStatus::Ok);
    }
}

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(crate_dir().join("include/antisym.h")).unwrap();
    let src = std::fs::read_to_string(crate_dir().join("src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
}

/// Compiles the C smoke program against the shared library, when a C
/// compiler is available.
#[test]
fn c_program_links_and_runs() {
    let exe = std::env::current_exe().unwrap();
    let lib_dir: PathBuf = exe.parent().unwrap().parent().unwrap().to_path_buf();
    if !lib_dir.join("libantisym_ffi.so").exists()
        || Command::new("cc").arg("--version").output().is_err()
    {
        eprintln!("skipping: no shared library or C compiler");
        return;
    }
    let out = std::env::temp_dir().join(format!("antisym_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(crate_dir().join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lantisym_ffi")
        .arg("-o")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
