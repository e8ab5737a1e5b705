use std::ffi::{c_char, CString};
use std::ptr;

use alignlab_ffi::*;

fn function(spec: &str) -> *mut AlFunction {
    let s = CString::new(spec).unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { al_function_parse(s.as_ptr(), &mut f) }, AlStatus::AlOk);
    f
}

fn activation(spec: &str) -> *mut AlActivation {
    let s = CString::new(spec).unwrap();
    let mut a = ptr::null_mut();
    assert_eq!(unsafe { al_activation_parse(s.as_ptr(), &mut a) }, AlStatus::AlOk);
    a
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let len = unsafe { al_last_error_message(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..len.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn function_round_trip() {
    let f = function("maj:n=3");
    unsafe {
        assert_eq!(al_function_n(f), 3);
        let mut y = 0i8;
        assert_eq!(al_function_eval(f, [1i8, -1, -1].as_ptr(), 3, &mut y), AlStatus::AlOk);
        assert_eq!(y, -1);
        let mut w = [0.0; 4];
        assert_eq!(al_function_degree_weights(f, w.as_mut_ptr(), 4), AlStatus::AlOk);
        assert_eq!(w, [0.0, 0.75, 0.0, 0.25]);
        assert_eq!(al_function_degree_weights(f, w.as_mut_ptr(), 2), AlStatus::AlBufferTooSmall);
        al_function_free(f);
    }
}

#[test]
fn errors_are_reported() {
    let s = CString::new("maj:n=").unwrap();
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { al_function_parse(s.as_ptr(), &mut f) }, AlStatus::AlParseError);
    assert!(f.is_null());
    assert!(!last_error().is_empty());
    let mut p = 0.0;
    assert_eq!(unsafe { al_survival_probability(3, 9, 4, &mut p) }, AlStatus::AlInvalidArgument);
    assert_eq!(unsafe { al_function_eval(ptr::null(), ptr::null(), 0, ptr::null_mut()) }, AlStatus::AlNullPointer);
    assert!(last_error().contains("null"));
    let big = function("maj:n=20");
    let relu = activation("relu");
    let mut e = AlEstimate::default();
    assert_eq!(unsafe { al_inal_exact(big, relu, 10, 1, true, &mut e) }, AlStatus::AlCapExceeded);
    unsafe {
        al_function_free(big);
        al_activation_free(relu);
        al_function_free(ptr::null_mut());
    }
}

#[test]
fn estimators() {
    let f = function("maj:n=9");
    let relu = activation("relu");
    let sign = activation("sign");
    unsafe {
        let mut d = 0.0;
        assert_eq!(al_smoothing_derivative(relu, 1.0, 1, &mut d), AlStatus::AlOk);
        assert!((d - 0.5).abs() < 1e-12);
        let mut h = [0.0; 3];
        assert_eq!(al_hermite_coeffs(sign, 2, h.as_mut_ptr(), 3), AlStatus::AlOk);
        assert!((h[1] - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-10);
        let mut ok = -1;
        assert_eq!(al_is_expressive(sign, 10, 1e-7, &mut ok), AlStatus::AlOk);
        assert_eq!(ok, 1);

        let (mut k, mut m, mut x) = (AlEstimate::default(), AlEstimate::default(), AlEstimate::default());
        assert_eq!(al_inal_dual_kernel(f, relu, true, &mut k), AlStatus::AlOk);
        assert_eq!(al_inal_mc_paired(f, relu, 2000, 200, 3, true, &mut m), AlStatus::AlOk);
        assert_eq!(al_inal_exact(f, relu, 2000, 3, true, &mut x), AlStatus::AlOk);
        assert!((m.value - k.value).abs() <= 4.0 * m.std_error);
        assert!((x.value - k.value).abs() <= 4.0 * x.std_error);
        assert!(k.std_error < 1e-12);

        let (mut v, mut c) = (0.0, 0.0);
        assert_eq!(al_moment(2, 1, 16, [1i8, 1].as_ptr(), 1, &mut v, &mut c), AlStatus::AlOk);
        assert_eq!(v, 0.0);
        assert_eq!(al_moment(2, 2, 16, [1i8, 1].as_ptr(), 1, &mut v, &mut c), AlStatus::AlOk);
        // 2·E|w_1|·E|w_2| with Var w = 1/16
        assert!((v - 4.0 / (std::f64::consts::PI * 16.0)).abs() < 1e-15, "{v}");

        let m1 = function("parity:S=1;n=4");
        let mut e = AlEstimate::default();
        assert_eq!(al_cp_exact(m1, 16, &mut e), AlStatus::AlOk);
        assert_eq!(e.value, 1.0 / 16.0);
        assert_eq!(al_cp_spectral(m1, 16, 4000, 2, &mut e), AlStatus::AlOk);
        assert!((e.value - 0.0625).abs() <= 4.0 * e.std_error);
        al_function_free(m1);
        al_function_free(f);
        al_activation_free(relu);
        al_activation_free(sign);
    }
}

#[test]
fn header_declares_every_symbol() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/alignlab.h")).unwrap();
    for name in [
        "al_last_error_message",
        "al_function_parse",
        "al_function_free",
        "al_function_eval",
        "al_function_degree_weights",
        "al_activation_parse",
        "al_smoothing_derivative",
        "al_hermite_coeffs",
        "al_is_expressive",
        "al_inal_exact",
        "al_inal_mc_paired",
        "al_inal_dual_kernel",
        "al_moment",
        "al_survival_probability",
        "al_cp_spectral",
        "al_cp_exact",
        "typedef struct AlFunction AlFunction",
        "AL_CAP_EXCEEDED = 4",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

/// Compiles a C program against the generated header and the static
/// library; skipped when no C compiler or archive is around.
#[test]
fn c_program_links_and_runs() {
    use std::path::PathBuf;
    use std::process::Command;
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf();
    let lib = profile_dir.join("libalignlab_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C toolchain or {}", lib.display());
        return;
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("smoke");
    let status = Command::new(&cc)
        .arg(root.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8(run.stdout).unwrap().starts_with("ok "));
}
