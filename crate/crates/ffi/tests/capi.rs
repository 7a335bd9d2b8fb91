use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use lidar_upsample::synth::{gen_synthetic, write_frame, SyntheticScene};
use lidar_upsample_ffi::*;

fn last_error() -> String {
    let p = lu_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn sparse(width: u32, height: u32, samples: &[(u32, u32, f64)]) -> *mut LuSparseMap {
    let u: Vec<u32> = samples.iter().map(|s| s.0).collect();
    let v: Vec<u32> = samples.iter().map(|s| s.1).collect();
    let r: Vec<f64> = samples.iter().map(|s| s.2).collect();
    let mut out = ptr::null_mut();
    let st = unsafe { lu_sparse_map_from_samples(width, height, u.as_ptr(), v.as_ptr(), r.as_ptr(), u.len(), &mut out) };
    assert_eq!(st, LuStatus::Ok);
    out
}

#[test]
fn upsample_constant_field() {
    let samples: Vec<_> = (0..8).flat_map(|v| (0..8).map(move |u| (u * 2, v * 2, 7.5))).collect();
    let map = sparse(16, 16, &samples);
    assert_eq!(unsafe { lu_sparse_map_len(map) }, 64);
    assert_eq!(unsafe { lu_sparse_map_set_horizon(map, 0) }, LuStatus::Ok);

    let params = lu_default_params();
    let params = LuParams { mr: 3, ..params };
    for method in [LuMethod::Ave, LuMethod::Idw, LuMethod::Bf, LuMethod::BfStar, LuMethod::DelLin] {
        let mut dense = ptr::null_mut();
        assert_eq!(unsafe { lu_upsample(map, method, &params, &mut dense) }, LuStatus::Ok, "{method:?}");
        let (mut w, mut h) = (0, 0);
        assert_eq!(unsafe { lu_dense_map_dims(dense, &mut w, &mut h) }, LuStatus::Ok);
        assert_eq!((w, h), (16, 16));
        let mut values = vec![0.0; 256];
        assert_eq!(unsafe { lu_dense_map_copy_values(dense, values.as_mut_ptr(), values.len()) }, LuStatus::Ok);
        assert_eq!(values[0], 7.5, "{method:?}");
        assert!(values.iter().filter(|x| !x.is_nan()).all(|x| (x - 7.5).abs() < 1e-12));
        unsafe { lu_dense_map_free(dense) };
    }
    unsafe { lu_sparse_map_free(map) };
}

#[test]
fn null_and_invalid_arguments_report_status() {
    let mut out = ptr::null_mut();
    let st = unsafe { lu_sparse_map_from_samples(4, 4, ptr::null(), ptr::null(), ptr::null(), 3, &mut out) };
    assert_eq!(st, LuStatus::NullPointer);
    assert!(last_error().contains("null"));
    assert!(out.is_null());

    let map = sparse(8, 8, &[(1, 1, 2.0)]);
    let bad = LuParams { mr: 4, ..lu_default_params() };
    let mut dense = ptr::null_mut();
    assert_eq!(unsafe { lu_upsample(map, LuMethod::Ave, &bad, &mut dense) }, LuStatus::InvalidArgument);
    assert!(dense.is_null());
    assert!(!last_error().is_empty());

    // Success clears the message.
    assert_eq!(unsafe { lu_sparse_map_set_horizon(map, 0) }, LuStatus::Ok);
    assert!(lu_last_error_message().is_null());

    let mut d = 0.0;
    assert_eq!(unsafe { lu_df_distance(-1.0, 2.0, &mut d) }, LuStatus::InvalidArgument);
    let mut buf = [0.0; 3];
    let good = LuParams { mr: 3, ..lu_default_params() };
    assert_eq!(unsafe { lu_upsample(map, LuMethod::Ave, &good, &mut dense) }, LuStatus::Ok);
    assert_eq!(unsafe { lu_dense_map_copy_values(dense, buf.as_mut_ptr(), 3) }, LuStatus::InvalidArgument);
    unsafe {
        lu_dense_map_free(dense);
        lu_sparse_map_free(map);
        lu_sparse_map_free(ptr::null_mut());
        lu_dense_map_free(ptr::null_mut());
    }
    assert_eq!(unsafe { lu_sparse_map_len(ptr::null()) }, 0);
}

#[test]
fn missing_files_map_to_io() {
    let scan = CString::new("/nonexistent/000000.bin").unwrap();
    let calib = CString::new("/nonexistent/000000.txt").unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { lu_sparse_map_from_kitti(scan.as_ptr(), calib.as_ptr(), 1242, 375, 2, &mut out) };
    assert_eq!(st, LuStatus::Io);
    assert!(last_error().contains("/nonexistent/000000.bin"));
}

#[test]
fn bf_star_window_and_empty_window() {
    let du = [-1, 0, 1, -1, 1];
    let dv = [0, -1, 0, 1, 1];
    let r = [10.0, 10.2, 10.1, 30.0, 30.5];
    let mut est = 0.0;
    let p = lu_default_params();
    let st = unsafe { lu_bf_star(du.as_ptr(), dv.as_ptr(), r.as_ptr(), 5, p.epsilon, p.min_pts, p.thr, &mut est) };
    assert_eq!(st, LuStatus::Ok);
    assert!((10.0..=10.2).contains(&est), "{est}");

    let st = unsafe { lu_bf_star(ptr::null(), ptr::null(), ptr::null(), 0, p.epsilon, p.min_pts, p.thr, &mut est) };
    assert_eq!(st, LuStatus::NoEstimate);

    let mut d = 0.0;
    assert_eq!(unsafe { lu_df_distance(1.0, 3.0, &mut d) }, LuStatus::Ok);
    assert_eq!(d, 0.5);
}

#[test]
fn kitti_frame_round_trip_and_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let scene = SyntheticScene::street(2, 0.07, 3);
    let frame = gen_synthetic(&scene).unwrap();
    let paths = write_frame(&scene, &frame, dir.path(), "000000").unwrap();
    let c = |p: &Path| CString::new(p.to_str().unwrap()).unwrap();

    let mut map = ptr::null_mut();
    let st = unsafe {
        lu_sparse_map_from_kitti(c(&paths.scan).as_ptr(), c(&paths.calib).as_ptr(), 1242, 375, 2, &mut map)
    };
    assert_eq!(st, LuStatus::Ok, "{}", last_error());
    assert_eq!(unsafe { lu_sparse_map_len(map) }, frame.sparse.len());

    let params = LuParams { mr: 7, ..lu_default_params() };
    let mut dense = ptr::null_mut();
    assert_eq!(unsafe { lu_upsample(map, LuMethod::BfStar, &params, &mut dense) }, LuStatus::Ok);

    let mut report = LuEvalReport::default();
    let f = scene.focal;
    let st = unsafe {
        lu_evaluate(
            dense,
            c(&paths.disparity).as_ptr(),
            c(&paths.fg_mask).as_ptr(),
            scene.baseline,
            f,
            &mut report,
        )
    };
    assert_eq!(st, LuStatus::Ok, "{}", last_error());
    assert!(report.n_gt > 0);
    assert!(report.d1_all >= 0.0 && report.d1_all < 100.0);
    assert!(!report.d1_fg.is_nan() && !report.d1_bg.is_nan());
    assert!(report.density > 50.0);

    let png = dir.path().join("dense.png");
    assert_eq!(unsafe { lu_dense_map_write_png(dense, c(&png).as_ptr()) }, LuStatus::Ok);
    assert!(png.metadata().unwrap().len() > 0);

    let st = unsafe { lu_evaluate(dense, c(&paths.disparity).as_ptr(), ptr::null(), scene.baseline, f, &mut report) };
    assert_eq!(st, LuStatus::Ok);
    assert!(report.d1_fg.is_nan());
    unsafe {
        lu_dense_map_free(dense);
        lu_sparse_map_free(map);
    }
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(lu_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/lidar_upsample.h")
}

fn has_cc() -> bool {
    Command::new("cc").arg("--version").output().is_ok_and(|o| o.status.success())
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "lu_sparse_map_from_samples",
        "lu_sparse_map_from_kitti",
        "lu_upsample",
        "lu_dense_map_copy_values",
        "lu_evaluate",
        "lu_bf_star",
        "lu_last_error_message",
        "LU_STATUS_NO_ESTIMATE",
        "LU_METHOD_BF_STAR",
        "typedef struct LuSparseMap LuSparseMap",
    ] {
        assert!(text.contains(name), "header lacks {name}");
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "lidar_upsample.h"

int main(void) {
    uint32_t u[4] = {1, 3, 1, 3};
    uint32_t v[4] = {1, 1, 3, 3};
    double r[4] = {4.0, 4.0, 4.0, 4.0};
    LuSparseMap *map = NULL;
    if (lu_sparse_map_from_samples(5, 5, u, v, r, 4, &map) != LU_STATUS_OK) return 1;
    lu_sparse_map_set_horizon(map, 0);
    LuParams p = lu_default_params();
    p.mr = 3;
    LuDenseMap *dense = NULL;
    if (lu_upsample(map, LU_METHOD_BF_STAR, &p, &dense) != LU_STATUS_OK) return 2;
    double values[25];
    if (lu_dense_map_copy_values(dense, values, 25) != LU_STATUS_OK) return 3;
    if (values[2 * 5 + 2] != 4.0) return 4;
    if (lu_upsample(map, LU_METHOD_AVE, NULL, &dense) != LU_STATUS_NULL_POINTER) return 5;
    if (lu_last_error_message() == NULL) return 6;
    lu_dense_map_free(dense);
    lu_sparse_map_free(map);
    printf("ok %s\n", lu_version());
    return 0;
}
"#;

#[test]
fn header_compiles_as_c() {
    if !has_cc() {
        eprintln!("cc not found, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("check.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn c_program_links_against_staticlib() {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    let lib = exe.parent().and_then(Path::parent).unwrap().join("liblidar_upsample_ffi.a");
    if !has_cc() || !lib.exists() {
        eprintln!("cc or static library not available, skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let out = Command::new("cc")
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&src)
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl"])
        .arg("-o")
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
