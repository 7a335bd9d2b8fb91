//! C ABI for `lidar_upsample`.
//!
//! Maps are opaque handles created and freed through this interface. Every
//! fallible call returns an [`LuStatus`]; on failure a message describing
//! the error is available from [`lu_last_error_message`] on the same
//! thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lidar_upsample::bfstar::{bf_star, df_distance, BfStarParams};
use lidar_upsample::eval::{d1_metrics, OutlierRule};
use lidar_upsample::io::{self, Camera};
use lidar_upsample::pipeline::{estimate_dense, Method, MethodParams};
use lidar_upsample::projection::{compute_horizon_line, project, RangeMode, SparseDepthMap};
use lidar_upsample::window::{DenseDepthMap, WindowPoint, WindowSample};
use lidar_upsample::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Format = 3,
    Io = 4,
    Degenerate = 5,
    /// The window held no samples.
    NoEstimate = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LuMethod {
    Ave = 0,
    Min = 1,
    Max = 2,
    Med = 3,
    Nea = 4,
    Idw = 5,
    Kri = 6,
    Bf = 7,
    BfStar = 8,
    DelLin = 9,
    DelNea = 10,
    DelNat = 11,
}

impl From<LuMethod> for Method {
    fn from(m: LuMethod) -> Self {
        match m {
            LuMethod::Ave => Method::Ave,
            LuMethod::Min => Method::Min,
            LuMethod::Max => Method::Max,
            LuMethod::Med => Method::Med,
            LuMethod::Nea => Method::Nea,
            LuMethod::Idw => Method::Idw,
            LuMethod::Kri => Method::Kri,
            LuMethod::Bf => Method::Bf,
            LuMethod::BfStar => Method::BfStar,
            LuMethod::DelLin => Method::DelLin,
            LuMethod::DelNea => Method::DelNea,
            LuMethod::DelNat => Method::DelNat,
        }
    }
}

/// Upsampling parameters. Start from [`lu_default_params`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LuParams {
    /// Odd mask side length in pixels.
    pub mr: u32,
    pub idw_p: f64,
    pub epsilon: f64,
    pub min_pts: u32,
    pub thr: f64,
    pub passthrough_case1: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LuEvalReport {
    /// Percentages; the foreground/background pair is NaN without a mask.
    pub d1_fg: f64,
    pub d1_bg: f64,
    pub d1_all: f64,
    pub density: f64,
    /// Valid ground-truth pixels.
    pub n_gt: u64,
    pub n_outliers: u64,
}

/// Sparse depth map handle.
pub struct LuSparseMap(SparseDepthMap);

/// Dense depth map handle.
pub struct LuDenseMap(DenseDepthMap);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> LuStatus {
    match e {
        Error::Io { .. } => LuStatus::Io,
        Error::Format(_) | Error::Image(_) | Error::Csv(_) => LuStatus::Format,
        Error::InvalidArgument(_) | Error::Config(_) => LuStatus::InvalidArgument,
        Error::Degenerate(_) => LuStatus::Degenerate,
    }
}

struct Fail(LuStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(LuStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            LuStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic");
            LuStatus::Panic
        }
    }
}

unsafe fn path_arg(p: *const c_char, what: &str) -> Result<PathBuf, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller passes a NUL-terminated string.
    let s = unsafe { CStr::from_ptr(p) }
        .to_str()
        .map_err(|_| Fail(LuStatus::InvalidArgument, format!("{what} is not valid UTF-8")))?;
    Ok(PathBuf::from(s))
}

unsafe fn slice_arg<'a, T>(p: *const T, n: usize, what: &str) -> Result<&'a [T], Fail> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    // SAFETY: caller guarantees `n` readable elements.
    Ok(unsafe { std::slice::from_raw_parts(p, n) })
}

fn into_handle<T>(value: T, out: *mut *mut T) {
    // SAFETY: `out` was checked for null by the caller of this helper.
    unsafe { *out = Box::into_raw(Box::new(value)) };
}

/// Message of the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn lu_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn lu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[no_mangle]
pub extern "C" fn lu_default_params() -> LuParams {
    let p = MethodParams::default();
    LuParams {
        mr: 13,
        idw_p: p.idw_p,
        epsilon: p.epsilon,
        min_pts: p.min_pts as u32,
        thr: p.thr,
        passthrough_case1: p.passthrough_case1,
    }
}

/// Builds a sparse map from `n` samples at integer pixels `(u[i], v[i])`
/// with range `r[i]` meters.
///
/// # Safety
/// `u`, `v` and `r` must each point to `n` readable elements; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_from_samples(
    width: u32,
    height: u32,
    u: *const u32,
    v: *const u32,
    r: *const f64,
    n: usize,
    out: *mut *mut LuSparseMap,
) -> LuStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (u, v, r) = unsafe { (slice_arg(u, n, "u")?, slice_arg(v, n, "v")?, slice_arg(r, n, "r")?) };
        let cells = (0..n).map(|i| (u[i] as usize, v[i] as usize, r[i]));
        let map = SparseDepthMap::from_cells(width as usize, height as usize, cells)?;
        into_handle(LuSparseMap(map), out);
        Ok(())
    })
}

/// Projects a Velodyne scan into a `width x height` image of KITTI camera
/// 2 or 3 and sets the horizon row.
///
/// # Safety
/// Paths must be NUL-terminated UTF-8; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_from_kitti(
    scan_path: *const c_char,
    calib_path: *const c_char,
    width: u32,
    height: u32,
    camera: u8,
    out: *mut *mut LuSparseMap,
) -> LuStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let scan = unsafe { path_arg(scan_path, "scan_path")? };
        let calib = unsafe { path_arg(calib_path, "calib_path")? };
        let cloud = io::load_point_cloud(scan)?;
        let calib = io::load_calibration(calib)?.with_camera(Camera::from_index(camera)?)?;
        let mut map = project(&cloud, &calib, width as usize, height as usize, RangeMode::Depth);
        let horizon = compute_horizon_line(&map)?;
        map.set_horizon_row(horizon);
        into_handle(LuSparseMap(map), out);
        Ok(())
    })
}

/// Computes and stores the horizon row; also written to `row` when not
/// NULL.
///
/// # Safety
/// `map` must be a live handle; `row` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_compute_horizon(map: *mut LuSparseMap, row: *mut u32) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_mut() }.ok_or_else(|| null("map"))?;
        let h = compute_horizon_line(&map.0)?;
        map.0.set_horizon_row(h);
        if !row.is_null() {
            unsafe { *row = h as u32 };
        }
        Ok(())
    })
}

/// # Safety
/// `map` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_set_horizon(map: *mut LuSparseMap, row: u32) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_mut() }.ok_or_else(|| null("map"))?;
        map.0.set_horizon_row(row as usize);
        Ok(())
    })
}

/// Number of samples, 0 for NULL.
///
/// # Safety
/// `map` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_len(map: *const LuSparseMap) -> usize {
    unsafe { map.as_ref() }.map_or(0, |m| m.0.len())
}

/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lu_sparse_map_free(map: *mut LuSparseMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Dense estimate of `map` with `method`. The map needs a horizon row.
///
/// # Safety
/// `map` must be a live handle, `params` readable and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lu_upsample(
    map: *const LuSparseMap,
    method: LuMethod,
    params: *const LuParams,
    out: *mut *mut LuDenseMap,
) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_ref() }.ok_or_else(|| null("map"))?;
        let p = unsafe { params.as_ref() }.ok_or_else(|| null("params"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mp = MethodParams {
            idw_p: p.idw_p,
            variogram: None,
            epsilon: p.epsilon,
            min_pts: p.min_pts as usize,
            thr: p.thr,
            passthrough_case1: p.passthrough_case1,
        };
        mp.validate()?;
        let dense = estimate_dense(&map.0, method.into(), p.mr as usize, &mp)?;
        into_handle(LuDenseMap(dense), out);
        Ok(())
    })
}

/// # Safety
/// `map` must be a live handle; `width` and `height` writable.
#[no_mangle]
pub unsafe extern "C" fn lu_dense_map_dims(map: *const LuDenseMap, width: *mut u32, height: *mut u32) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_ref() }.ok_or_else(|| null("map"))?;
        if width.is_null() || height.is_null() {
            return Err(null("width/height"));
        }
        unsafe {
            *width = map.0.width() as u32;
            *height = map.0.height() as u32;
        }
        Ok(())
    })
}

/// Copies `width * height` row-major depths into `out`; pixels without an
/// estimate are NaN.
///
/// # Safety
/// `map` must be a live handle and `out` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn lu_dense_map_copy_values(map: *const LuDenseMap, out: *mut f64, len: usize) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_ref() }.ok_or_else(|| null("map"))?;
        let values = map.0.values();
        if len != values.len() {
            return Err(Fail(
                LuStatus::InvalidArgument,
                format!("buffer holds {len} values, map has {}", values.len()),
            ));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (d, v) in dst.iter_mut().zip(values) {
            *d = v.unwrap_or(f64::NAN);
        }
        Ok(())
    })
}

/// Writes a 16-bit depth PNG (meters times 256, 0 for no estimate).
///
/// # Safety
/// `map` must be a live handle; `path` NUL-terminated UTF-8.
#[no_mangle]
pub unsafe extern "C" fn lu_dense_map_write_png(map: *const LuDenseMap, path: *const c_char) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_ref() }.ok_or_else(|| null("map"))?;
        let path = unsafe { path_arg(path, "path")? };
        io::write_depth_image(&map.0, path)?;
        Ok(())
    })
}

/// # Safety
/// `map` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn lu_dense_map_free(map: *mut LuDenseMap) {
    if !map.is_null() {
        drop(unsafe { Box::from_raw(map) });
    }
}

/// Scores `map` against a KITTI ground-truth disparity PNG. `fg_mask_path`
/// may be NULL.
///
/// # Safety
/// `map` must be a live handle, paths NUL-terminated UTF-8 (or NULL where
/// allowed) and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn lu_evaluate(
    map: *const LuDenseMap,
    gt_disparity_path: *const c_char,
    fg_mask_path: *const c_char,
    baseline: f64,
    focal: f64,
    out: *mut LuEvalReport,
) -> LuStatus {
    guard(|| {
        let map = unsafe { map.as_ref() }.ok_or_else(|| null("map"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let gt = io::load_groundtruth_disparity(unsafe { path_arg(gt_disparity_path, "gt_disparity_path")? })?;
        let fg = if fg_mask_path.is_null() {
            None
        } else {
            Some(io::load_fg_mask(unsafe { path_arg(fg_mask_path, "fg_mask_path")? })?)
        };
        let r = d1_metrics(&map.0, &gt, fg.as_ref(), baseline, focal, &OutlierRule::default())?;
        unsafe {
            *out = LuEvalReport {
                d1_fg: r.d1_fg().unwrap_or(f64::NAN),
                d1_bg: r.d1_bg().unwrap_or(f64::NAN),
                d1_all: r.d1_all(),
                density: r.density(),
                n_gt: r.counts.all_total,
                n_outliers: r.counts.all_outliers,
            };
        }
        Ok(())
    })
}

/// BF* estimate of one window given as `n` points with pixel offsets
/// `(du[i], dv[i])` from the center and ranges `r[i]`. Returns
/// `NoEstimate` for an empty window.
///
/// # Safety
/// Arrays must hold `n` readable elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_bf_star(
    du: *const i32,
    dv: *const i32,
    r: *const f64,
    n: usize,
    epsilon: f64,
    min_pts: u32,
    thr: f64,
    out: *mut f64,
) -> LuStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let (du, dv, r) = unsafe { (slice_arg(du, n, "du")?, slice_arg(dv, n, "dv")?, slice_arg(r, n, "r")?) };
        if let Some(bad) = r.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Fail(LuStatus::InvalidArgument, format!("ranges must be positive, got {bad}")));
        }
        let params = BfStarParams::new(epsilon, min_pts as usize, thr)?;
        let reach = du.iter().chain(dv).map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
        let points = (0..n).map(|i| WindowPoint { du: du[i], dv: dv[i], r: r[i] }).collect();
        let window = WindowSample::new((0, 0), 2 * reach + 1, points);
        let value = bf_star(&window, &params).ok_or(Fail(LuStatus::NoEstimate, "empty window".into()))?;
        unsafe { *out = value };
        Ok(())
    })
}

/// Normalized range gap `|a - b| / (a + b)`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lu_df_distance(a: f64, b: f64, out: *mut f64) -> LuStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = df_distance(a, b)?;
        unsafe { *out = d };
        Ok(())
    })
}
