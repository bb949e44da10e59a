use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use treelike_ffi::*;

fn last_error() -> String {
    let p = tl_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn square() -> *mut TlDistanceMatrix {
    let pts = [0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0];
    let mut m = ptr::null_mut();
    let st = unsafe { tl_matrix_from_embeddings(pts.as_ptr(), 4, 2, TlMetric::Euclidean as i32, 0.0, &mut m) };
    assert_eq!(st, TlStatus::Ok);
    m
}

#[test]
fn delta_of_unit_square() {
    let m = square();
    assert_eq!(unsafe { tl_matrix_n(m) }, 4);
    let mut s = TlDeltaStats::default();
    assert_eq!(unsafe { tl_delta_exact(m, TlFormula::FourPoint as i32, &mut s) }, TlStatus::Ok);
    assert!((s.delta_max - (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert_eq!((s.samples_evaluated, s.exact), (1, 1));

    let mut sampled = TlDeltaStats::default();
    assert_eq!(unsafe { tl_delta_sample(m, 10, 7, TlFormula::Slack as i32, &mut sampled) }, TlStatus::Ok);
    assert_eq!(sampled.exact, 0);
    assert!(sampled.delta_max <= s.delta_max + 1e-12);

    let mut nj = TlNjStats::default();
    assert_eq!(unsafe { tl_nj_scores(m, &mut nj) }, TlStatus::Ok);
    assert_eq!(nj.n, 4);
    unsafe { tl_matrix_free(m) };
}

#[test]
fn buffer_round_trip_and_ultra() {
    let d = [0.0, 2.0, 2.0, 2.0, 0.0, 1.0, 2.0, 1.0, 0.0];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tl_matrix_from_buffer(d.as_ptr(), 3, 0.0, &mut m) }, TlStatus::Ok);
    let mut copy = [0.0; 9];
    assert_eq!(unsafe { tl_matrix_copy(m, copy.as_mut_ptr(), 9) }, TlStatus::Ok);
    assert_eq!(copy, d);
    assert_eq!(unsafe { tl_matrix_copy(m, copy.as_mut_ptr(), 4) }, TlStatus::Shape);

    let mut u = TlUltraStats::default();
    assert_eq!(unsafe { tl_ultra_exact(m, 1e-9, &mut u) }, TlStatus::Ok);
    assert_eq!((u.num_violations, u.total_triples), (0, 1));
    assert_eq!(unsafe { tl_ultra_sample(m, 10, 1e-9, 1, &mut u) }, TlStatus::Ok);
    unsafe { tl_matrix_free(m) };
}

#[test]
fn errors_are_reported() {
    let bad = [0.0, 1.0, 2.0, 0.0];
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tl_matrix_from_buffer(bad.as_ptr(), 2, 0.0, &mut m) }, TlStatus::Validation);
    assert!(m.is_null());
    assert!(last_error().contains("Asymmetry"));

    assert_eq!(unsafe { tl_matrix_from_buffer(ptr::null(), 2, 0.0, &mut m) }, TlStatus::NullPointer);

    let outside = [0.0, 0.0, 2.0, 0.0];
    let st = unsafe { tl_matrix_from_embeddings(outside.as_ptr(), 2, 2, TlMetric::Poincare as i32, 0.0, &mut m) };
    assert_eq!(st, TlStatus::Domain);
    let st = unsafe { tl_matrix_from_embeddings(outside.as_ptr(), 2, 2, 9, 0.0, &mut m) };
    assert_eq!(st, TlStatus::InvalidArgument);

    let sq = square();
    let mut s = TlDeltaStats::default();
    assert_eq!(unsafe { tl_delta_exact(sq, 5, &mut s) }, TlStatus::InvalidArgument);
    assert_eq!(unsafe { tl_delta_exact(ptr::null(), 0, &mut s) }, TlStatus::NullPointer);
    assert_eq!(unsafe { tl_delta_exact(sq, 0, ptr::null_mut()) }, TlStatus::NullPointer);
    unsafe { tl_matrix_free(sq) };
    unsafe { tl_matrix_free(ptr::null_mut()) };
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "treelike.h"

int main(void) {
    double pts[] = {0, 0, 1, 0, 1, 1, 0, 1};
    TlDistanceMatrix *m = NULL;
    if (tl_matrix_from_embeddings(pts, 4, 2, TL_METRIC_EUCLIDEAN, 0.0, &m) != TL_STATUS_OK) return 1;
    TlDeltaStats s;
    if (tl_delta_exact(m, TL_FORMULA_FOUR_POINT, &s) != TL_STATUS_OK) return 2;
    tl_matrix_free(m);
    double bad[] = {0, 1, 2, 0};
    if (tl_matrix_from_buffer(bad, 2, 0.0, &m) != TL_STATUS_VALIDATION) return 3;
    printf("%.12f %s %s\n", s.delta_max, tl_version(), tl_last_error_message() ? "err" : "none");
    return 0;
}
"#;

#[test]
fn header_compiles_and_links_from_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let ffi_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let target = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = target.join("libtreelike_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let exe = dir.path().join("smoke");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new(cc)
        .args(["-std=c11", "-Wall", "-Werror", "-I"])
        .arg(ffi_dir.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("0.414213562373 "), "{text}");
    assert!(text.trim_end().ends_with("err"));
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc).arg("--version").output().is_ok_and(|o| o.status.success()) {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
