use std::ffi::{CStr, CString};
use std::ptr;

use tvd_ffi::*;

fn matrix(rows: usize, cols: usize, data: &[f64]) -> *mut TvdMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { tvd_matrix_new(rows, cols, data.as_ptr(), &mut m) }, TvdStatus::Ok);
    m
}

fn values(m: *const TvdMatrix) -> Vec<f64> {
    let len = unsafe { tvd_matrix_rows(m) * tvd_matrix_cols(m) };
    let mut buf = vec![0.0; len];
    assert_eq!(unsafe { tvd_matrix_copy_data(m, buf.as_mut_ptr(), len) }, TvdStatus::Ok);
    buf
}

fn last_error() -> String {
    let p = tvd_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn matrix_round_trip_and_tv() {
    let m = matrix(2, 3, &[0.0, 1.0, 3.0, 1.0, 1.0, 1.0]);
    assert_eq!(unsafe { (tvd_matrix_rows(m), tvd_matrix_cols(m)) }, (2, 3));
    assert_eq!(values(m), vec![0.0, 1.0, 3.0, 1.0, 1.0, 1.0]);
    let mut t = 0.0;
    assert_eq!(unsafe { tvd_tv(m, &mut t) }, TvdStatus::Ok);
    assert_eq!(t, 1.0 + 2.0 + 0.0 + 0.0 + 1.0 + 0.0 + 2.0);
    assert!(tvd_last_error_message().is_null());
    unsafe { tvd_matrix_free(m) };
}

#[test]
fn estimators_match_the_library() {
    let data: Vec<f64> = (0..36).map(|k| ((k * 7919) % 13) as f64 / 13.0).collect();
    let y = matrix(6, 6, &data);
    let lib_y = tvd::ImageMatrix::new(6, 6, data.clone()).unwrap();
    let cfg = tvd_solver_config_default();
    assert_eq!(cfg, tvd::SolverConfig::default().into());

    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tvd_denoise_penalized(y, 0.7, &cfg, &mut out) }, TvdStatus::Ok);
    let lib = tvd::denoise_penalized(&lib_y, 0.7, &tvd::SolverConfig::default()).unwrap();
    assert_eq!(values(out), lib.estimate.values());
    unsafe { tvd_matrix_free(out) };

    assert_eq!(unsafe { tvd_project_tv_ball(y, 2.0, ptr::null(), &mut out) }, TvdStatus::Ok);
    let mut t = 0.0;
    unsafe { tvd_tv(out, &mut t) };
    assert!((t - 2.0).abs() <= 1e-4 * 2.0);
    unsafe { tvd_matrix_free(out) };

    let mut s = 0.0;
    assert_eq!(unsafe { tvd_denoise_notuning(y, ptr::null(), &mut out, &mut s) }, TvdStatus::Ok);
    let mut s2 = 0.0;
    assert_eq!(unsafe { tvd_sigma_hat(y, &mut s2) }, TvdStatus::Ok);
    assert_eq!(s, s2);
    assert_eq!(s, tvd::sigma_hat(&lib_y).unwrap());
    unsafe { tvd_matrix_free(out) };
    unsafe { tvd_matrix_free(y) };
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();
    let bad = [1.0, 2.0];
    assert_eq!(unsafe { tvd_matrix_new(0, 2, bad.as_ptr(), &mut out) }, TvdStatus::Argument);
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    assert_eq!(unsafe { tvd_matrix_new(1, 2, ptr::null(), &mut out) }, TvdStatus::NullPointer);
    assert_eq!(unsafe { tvd_tv(ptr::null(), ptr::null_mut()) }, TvdStatus::NullPointer);

    let y = matrix(1, 2, &bad);
    assert_eq!(unsafe { tvd_denoise_penalized(y, -1.0, ptr::null(), &mut out) }, TvdStatus::Argument);
    assert_eq!(unsafe { tvd_sigma_hat(y, &mut 0.0) }, TvdStatus::Argument);
    let mut small = [0.0; 1];
    assert_eq!(unsafe { tvd_matrix_copy_data(y, small.as_mut_ptr(), 1) }, TvdStatus::Argument);

    let path = CString::new("/nonexistent/m.csv").unwrap();
    assert_eq!(unsafe { tvd_matrix_read_csv(path.as_ptr(), &mut out) }, TvdStatus::Io);
    assert!(last_error().contains("/nonexistent/m.csv"));
    unsafe { tvd_matrix_free(y) };
    unsafe { tvd_matrix_free(ptr::null_mut()) };
}

#[test]
fn convergence_failure_returns_best_iterate() {
    let data: Vec<f64> = (0..16).map(|k| ((k * 31) % 7) as f64).collect();
    let y = matrix(4, 4, &data);
    let cfg = TvdSolverConfig { max_bisect: 1, ..tvd_solver_config_default() };
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { tvd_project_tv_ball(y, 1.0, &cfg, &mut out) }, TvdStatus::Convergence);
    assert!(!out.is_null());
    assert_eq!(values(out).len(), 16);
    unsafe { tvd_matrix_free(out) };
    unsafe { tvd_matrix_free(y) };
}

#[test]
fn csv_and_signals() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.csv").to_str().unwrap()).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { tvd_make_signal(TvdSignal::Four, 4, &mut s) }, TvdStatus::Ok);
    assert_eq!(unsafe { tvd_matrix_write_csv(s, path.as_ptr()) }, TvdStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { tvd_matrix_read_csv(path.as_ptr(), &mut back) }, TvdStatus::Ok);
    assert_eq!(values(s), values(back));
    let mut t = 0.0;
    unsafe { tvd_tv(back, &mut t) };
    assert_eq!(t, 8.0);
    assert_eq!(unsafe { tvd_make_signal(TvdSignal::Two, 3, &mut s) }, TvdStatus::Argument);
    unsafe { tvd_matrix_free(back) };
}
