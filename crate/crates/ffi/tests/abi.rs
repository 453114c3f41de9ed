use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use onebit_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(onebit_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn ensemble_round_trip_and_quantize() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(onebit_ensemble_new(40, 5, OnebitShift::GaussianDither, 2.0, 9, &mut e), OnebitStatus::Ok);
        let (mut m, mut n) = (0, 0);
        assert_eq!(onebit_ensemble_dims(e, &mut m, &mut n), OnebitStatus::Ok);
        assert_eq!((m, n), (40, 5));

        let mut a = vec![0.0; 200];
        let mut b = vec![0.0; 40];
        assert_eq!(onebit_ensemble_matrix(e, a.as_mut_ptr(), a.len()), OnebitStatus::Ok);
        assert_eq!(onebit_ensemble_shifts(e, b.as_mut_ptr(), b.len()), OnebitStatus::Ok);
        assert_eq!(onebit_ensemble_matrix(e, a.as_mut_ptr(), 199), OnebitStatus::DimensionMismatch);

        let core = onebit::measurement::build_ensemble(40, 5, onebit::measurement::ShiftKind::GaussianDither { tau: 2.0 }, 9).unwrap();
        assert_eq!(a, core.matrix());
        assert_eq!(b, core.shifts());

        let x = [1.0, -2.0, 0.0, 0.5, 3.0];
        let mut y = ptr::null_mut();
        assert_eq!(onebit_ensemble_quantize(e, x.as_ptr(), 5, &mut y), OnebitStatus::Ok);
        assert_eq!(onebit_signs_len(y), 40);
        let mut bits = vec![0i8; 40];
        assert_eq!(onebit_signs_copy(y, bits.as_mut_ptr(), 40), OnebitStatus::Ok);
        assert_eq!(bits, core.quantize(&x).unwrap().bits());

        let mut copy = ptr::null_mut();
        assert_eq!(onebit_ensemble_from_parts(40, 5, a.as_ptr(), b.as_ptr(), OnebitShift::GaussianDither, 2.0, &mut copy), OnebitStatus::Ok);
        let mut y2 = ptr::null_mut();
        assert_eq!(onebit_ensemble_quantize(copy, x.as_ptr(), 5, &mut y2), OnebitStatus::Ok);
        let mut bits2 = vec![0i8; 40];
        onebit_signs_copy(y2, bits2.as_mut_ptr(), 40);
        assert_eq!(bits, bits2);

        onebit_signs_free(y);
        onebit_signs_free(y2);
        onebit_ensemble_free(e);
        onebit_ensemble_free(copy);
        onebit_ensemble_free(ptr::null_mut());
        onebit_signs_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_reported_with_codes_and_messages() {
    unsafe {
        let mut e = ptr::null_mut();
        assert_eq!(onebit_ensemble_new(0, 5, OnebitShift::Zero, 0.0, 1, &mut e), OnebitStatus::InvalidDimension);
        assert!(e.is_null());
        assert!(!last_error().is_empty());
        assert_eq!(onebit_ensemble_new(4, 2, OnebitShift::ConstantThreshold, -1.0, 1, &mut e), OnebitStatus::InvalidParameter);
        assert_eq!(onebit_ensemble_new(4, 2, OnebitShift::Zero, 0.0, 1, ptr::null_mut()), OnebitStatus::NullPointer);
        assert!(last_error().contains("null"));

        let mut out = 0.0;
        assert_eq!(onebit_erfinv(1.5, &mut out), OnebitStatus::Domain);
        assert_eq!(onebit_erfinv(0.5, &mut out), OnebitStatus::Ok);
        assert!(last_error().is_empty());
        assert!((out - 0.4769362762044699).abs() < 1e-15);

        let mut y = ptr::null_mut();
        assert_eq!(onebit_signs_new([1i8, 0, -1].as_ptr(), 3, &mut y), OnebitStatus::InvalidParameter);
        assert_eq!(onebit_signs_new(ptr::null(), 3, &mut y), OnebitStatus::NullPointer);
        assert_eq!(onebit_signs_new(ptr::null(), 0, &mut y), OnebitStatus::Ok);
        let mut est = OnebitNormEstimate {
            lambda: 0.0,
            f_m: 0.0,
            status: OnebitNormStatus::Ok,
        };
        assert_eq!(onebit_estimate_norm(y, 1.0, &mut est), OnebitStatus::EmptyMeasurement);
        onebit_signs_free(y);
        assert_eq!(onebit_signs_len(ptr::null()), 0);
    }
}

#[test]
fn norm_estimation_matches_core() {
    unsafe {
        let x = [9.0, 12.0];
        let mut y = ptr::null_mut();
        assert_eq!(onebit_quantize_streaming(50_000, 2, OnebitShift::ConstantThreshold, 10.0, 3, x.as_ptr(), &mut y), OnebitStatus::Ok);
        let mut est = OnebitNormEstimate {
            lambda: 0.0,
            f_m: 0.0,
            status: OnebitNormStatus::BelowHalf,
        };
        assert_eq!(onebit_estimate_norm(y, 10.0, &mut est), OnebitStatus::Ok);
        let signs = onebit::measurement::quantize_streaming(50_000, 2, onebit::measurement::ShiftKind::ConstantThreshold { tau: 10.0 }, 3, &x).unwrap();
        let core = onebit::edf::estimate_norm(&signs, 10.0).unwrap();
        assert_eq!(est.status, OnebitNormStatus::Ok);
        assert_eq!(Some(est.lambda), core.lambda);
        assert_eq!(est.f_m, core.f_m);
        onebit_signs_free(y);

        let below = [1i8, 1, 1, -1];
        let mut y = ptr::null_mut();
        onebit_signs_new(below.as_ptr(), 4, &mut y);
        assert_eq!(onebit_estimate_norm(y, 1.0, &mut est), OnebitStatus::Ok);
        assert_eq!(est.status, OnebitNormStatus::BelowHalf);
        assert!(est.lambda.is_nan());
        onebit_signs_free(y);
    }
}

#[test]
fn recovery_through_handles() {
    unsafe {
        let x = [0.0, 2.0, 0.0, -1.0];
        let mut e = ptr::null_mut();
        onebit_ensemble_new(200, 4, OnebitShift::GaussianDither, 2.0, 5, &mut e);
        let mut y = ptr::null_mut();
        onebit_ensemble_quantize(e, x.as_ptr(), 4, &mut y);
        let mut est = [0.0; 4];
        let mut info = OnebitRecoveryInfo {
            status: OnebitRecoveryStatus::NumericalFailure,
            objective: 0.0,
            t_sharp: 0.0,
            iterations: 0,
            has_estimate: 0,
        };
        assert_eq!(onebit_recover_augmented(e, y, est.as_mut_ptr(), 4, &mut info), OnebitStatus::Ok, "{}", last_error());
        assert_eq!(info.status, OnebitRecoveryStatus::Optimal);
        assert_eq!(info.has_estimate, 1);
        assert!(info.t_sharp > 0.0);
        let err: f64 = est.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err < 1.0, "error {err}");
        assert_eq!(onebit_recover_direction(e, y, est.as_mut_ptr(), 4, &mut info), OnebitStatus::InvalidParameter);
        assert_eq!(onebit_recover_augmented(e, y, est.as_mut_ptr(), 3, &mut info), OnebitStatus::DimensionMismatch);
        onebit_signs_free(y);
        onebit_ensemble_free(e);

        let mut e = ptr::null_mut();
        onebit_ensemble_new(300, 4, OnebitShift::Zero, 0.0, 6, &mut e);
        let mut y = ptr::null_mut();
        onebit_ensemble_quantize(e, x.as_ptr(), 4, &mut y);
        assert_eq!(onebit_recover_direction(e, y, est.as_mut_ptr(), 4, &mut info), OnebitStatus::Ok);
        assert!(info.t_sharp.is_nan());
        let norm: f64 = est.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() < 1e-12);
        onebit_signs_free(y);
        onebit_ensemble_free(e);
    }
}

#[test]
fn sample_sizes_and_special_functions() {
    unsafe {
        let mut m = 0u64;
        assert_eq!(onebit_sample_size_fixed_signal(10.0, 20.0, 1.0, 0.05, &mut m), OnebitStatus::Ok);
        assert_eq!(m, 548042);
        assert_eq!(onebit_sample_size_uniform(10.0, 20.0, 1.0, 300, 10, 1.0, &mut m), OnebitStatus::Ok);
        assert_eq!(m, 113442);
        assert_eq!(onebit_sample_size_fixed_signal(10.0, 20.0, 1.0, 2.0, &mut m), OnebitStatus::InvalidParameter);
    }
    assert_eq!(onebit_erf(1.0), onebit::special::erf(1.0));
    assert_eq!(onebit_erfc(2.0), onebit::special::erfc(2.0));
}

fn header() -> String {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/onebit.h")).unwrap()
}

#[test]
fn header_declares_every_export() {
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let h = header();
    let exports: Vec<&str> = src
        .split("extern \"C\" fn ")
        .skip(1)
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exports.len() >= 15);
    for name in exports {
        assert!(h.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(h.contains("typedef struct OnebitEnsemble OnebitEnsemble;"));
    assert!(h.contains("ONEBIT_STATUS_OK = 0"));
}

#[test]
fn c_program_links_against_the_static_library() {
    let deps = std::env::current_exe().unwrap();
    let profile_dir: PathBuf = deps.parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libonebit_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = env!("CARGO_MANIFEST_DIR");
    let status = Command::new("cc")
        .arg(format!("{manifest}/tests/c/smoke.c"))
        .arg(format!("-I{manifest}/include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("a C compiler on PATH");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("m=548042 erf1=0.842700792949715"), "{stdout}");
}
