use std::ffi::{CStr, CString};
use std::ptr;

use gsqc_ffi::*;

const CNOT: &str = r#"{
  "qubits": 2, "steps": 2,
  "gates": [{ "kind": "cnot", "row": 1, "control": 0, "target": 1 }],
  "pins": [{ "qubit": 0, "bit": 1 }, { "qubit": 1, "bit": 0 }]
}"#;

fn program(json: &str) -> *mut GsqcProgram {
    let text = CString::new(json).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { gsqc_program_from_json(text.as_ptr(), &mut p) }, GsqcStatus::Ok);
    p
}

fn last_error() -> String {
    let msg = gsqc_last_error();
    assert!(!msg.is_null());
    unsafe { CStr::from_ptr(msg) }.to_string_lossy().into_owned()
}

#[test]
fn run_round_trip() {
    let p = program(CNOT);
    let mut dim = 0u64;
    let mut m = 0usize;
    unsafe {
        assert_eq!(gsqc_program_dimension(p, &mut dim), GsqcStatus::Ok);
        assert_eq!(gsqc_program_num_qubits(p, &mut m), GsqcStatus::Ok);
    }
    assert_eq!((dim, m), (36, 2));

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { gsqc_run(p, &mut r) }, GsqcStatus::Ok);
    let mut d = GsqcDiagnostics::default();
    assert_eq!(unsafe { gsqc_run_result_diagnostics(r, &mut d) }, GsqcStatus::Ok);
    assert!(d.residual < 1e-8 && (d.fidelity - 1.0).abs() < 1e-10);
    assert!(d.gap > 0.0 && d.dimension == 36);

    let (mut re, mut im, mut n) = ([0.0; 4], [0.0; 4], 0usize);
    let s = unsafe { gsqc_run_result_output(r, re.as_mut_ptr(), im.as_mut_ptr(), 4, &mut n) };
    assert_eq!(s, GsqcStatus::Ok);
    assert_eq!(n, 4);
    // |11> has index 3
    assert!((re[3] - 1.0).abs() < 1e-10 && im.iter().all(|x| x.abs() < 1e-10));

    unsafe {
        gsqc_run_result_free(r);
        gsqc_program_free(p);
    }
}

#[test]
fn buffer_too_small_reports_length() {
    let (mut buf, mut n) = ([0.0; 2], 0usize);
    let s = unsafe { gsqc_analytic_levels(3, 1.0, buf.as_mut_ptr(), 2, &mut n) };
    assert_eq!(s, GsqcStatus::BufferTooSmall);
    assert_eq!(n, 8);
    let mut full = vec![0.0; n];
    let s = unsafe { gsqc_analytic_levels(3, 1.0, full.as_mut_ptr(), n, &mut n) };
    assert_eq!(s, GsqcStatus::Ok);
    assert_eq!(full[0], 0.0);
    assert!(full.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn spectrum_and_scalars() {
    let p = program(r#"{ "qubits": 1, "steps": 3 }"#);
    let (mut buf, mut n) = ([0.0; 3], 0usize);
    assert_eq!(unsafe { gsqc_spectrum(p, 3, buf.as_mut_ptr(), 3, &mut n) }, GsqcStatus::Ok);
    assert_eq!(n, 3);
    assert!(buf[0].abs() < 1e-12 && buf[1].abs() < 1e-12);
    let want = 2.0 * (1.0 - (std::f64::consts::PI / 4.0).cos());
    assert!((buf[2] - want).abs() < 1e-10);
    assert_eq!(unsafe { gsqc_spectrum(p, 0, buf.as_mut_ptr(), 3, &mut n) }, GsqcStatus::Validation);
    unsafe { gsqc_program_free(p) };

    let mut det = f64::NAN;
    assert_eq!(unsafe { gsqc_char_det(want, 3, 1.0, 1.0, &mut det) }, GsqcStatus::Ok);
    assert!(det.abs() < 1e-10);
    assert_eq!(unsafe { gsqc_char_det(5.0, 3, 1.0, 1.0, &mut det) }, GsqcStatus::Validation);

    let mut beta = 0.0;
    assert_eq!(unsafe { gsqc_choose_beta(2, 8, &mut beta) }, GsqcStatus::Ok);
    assert_eq!(beta, 0.25);
    assert_eq!(unsafe { gsqc_choose_beta(0, 8, &mut beta) }, GsqcStatus::Validation);
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    let bad = CString::new(r#"{ "qubits": 1 }"#).unwrap();
    assert_eq!(unsafe { gsqc_program_from_json(bad.as_ptr(), &mut p) }, GsqcStatus::Validation);
    assert!(p.is_null());
    assert!(last_error().contains("steps"), "{}", last_error());

    assert_eq!(unsafe { gsqc_program_from_json(ptr::null(), &mut p) }, GsqcStatus::NullPointer);
    let mut m = 0usize;
    assert_eq!(unsafe { gsqc_program_num_qubits(ptr::null(), &mut m) }, GsqcStatus::NullPointer);

    // unpinned programs cannot run
    let free = program(r#"{ "qubits": 1, "steps": 2 }"#);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { gsqc_run(free, &mut r) }, GsqcStatus::Validation);
    assert!(r.is_null());
    assert!(last_error().contains("pinned"));
    unsafe {
        gsqc_program_free(free);
        gsqc_program_free(ptr::null_mut());
        gsqc_run_result_free(ptr::null_mut());
    }

    let bytes = [0xffu8, 0xfe, 0];
    let s = unsafe { gsqc_program_from_json(bytes.as_ptr().cast(), &mut p) };
    assert_eq!(s, GsqcStatus::InvalidString);
}

#[test]
fn version_is_crate_version() {
    let v = unsafe { CStr::from_ptr(gsqc_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/gsqc.h");
    assert!(std::path::Path::new(header).exists());
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let status = std::process::Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .status();
        match status {
            Ok(s) => assert!(s.success(), "{compiler} rejected the header"),
            Err(_) => eprintln!("{compiler} not found; header syntax check skipped"),
        }
    }
}
