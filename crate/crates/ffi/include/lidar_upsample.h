#ifndef LIDAR_UPSAMPLE_H
#define LIDAR_UPSAMPLE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LuStatus {
  LU_STATUS_OK = 0,
  LU_STATUS_NULL_POINTER = 1,
  LU_STATUS_INVALID_ARGUMENT = 2,
  LU_STATUS_FORMAT = 3,
  LU_STATUS_IO = 4,
  LU_STATUS_DEGENERATE = 5,
  /**
   * The window held no samples.
   */
  LU_STATUS_NO_ESTIMATE = 6,
  LU_STATUS_PANIC = 7,
} LuStatus;

typedef enum LuMethod {
  LU_METHOD_AVE = 0,
  LU_METHOD_MIN = 1,
  LU_METHOD_MAX = 2,
  LU_METHOD_MED = 3,
  LU_METHOD_NEA = 4,
  LU_METHOD_IDW = 5,
  LU_METHOD_KRI = 6,
  LU_METHOD_BF = 7,
  LU_METHOD_BF_STAR = 8,
  LU_METHOD_DEL_LIN = 9,
  LU_METHOD_DEL_NEA = 10,
  LU_METHOD_DEL_NAT = 11,
} LuMethod;

/**
 * Dense depth map handle.
 */
typedef struct LuDenseMap LuDenseMap;

/**
 * Sparse depth map handle.
 */
typedef struct LuSparseMap LuSparseMap;

/**
 * Upsampling parameters. Start from [`lu_default_params`].
 */
typedef struct LuParams {
  /**
   * Odd mask side length in pixels.
   */
  uint32_t mr;
  double idw_p;
  double epsilon;
  uint32_t min_pts;
  double thr;
  bool passthrough_case1;
} LuParams;

typedef struct LuEvalReport {
  /**
   * Percentages; the foreground/background pair is NaN without a mask.
   */
  double d1_fg;
  double d1_bg;
  double d1_all;
  double density;
  /**
   * Valid ground-truth pixels.
   */
  uint64_t n_gt;
  uint64_t n_outliers;
} LuEvalReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *lu_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lu_version(void);

struct LuParams lu_default_params(void);

/**
 * Builds a sparse map from `n` samples at integer pixels `(u[i], v[i])`
 * with range `r[i]` meters.
 *
 * # Safety
 * `u`, `v` and `r` must each point to `n` readable elements; `out` must be
 * writable.
 */
enum LuStatus lu_sparse_map_from_samples(uint32_t width,
                                         uint32_t height,
                                         const uint32_t *u,
                                         const uint32_t *v,
                                         const double *r,
                                         size_t n,
                                         struct LuSparseMap **out);

/**
 * Projects a Velodyne scan into a `width x height` image of KITTI camera
 * 2 or 3 and sets the horizon row.
 *
 * # Safety
 * Paths must be NUL-terminated UTF-8; `out` must be writable.
 */
enum LuStatus lu_sparse_map_from_kitti(const char *scan_path,
                                       const char *calib_path,
                                       uint32_t width,
                                       uint32_t height,
                                       uint8_t camera,
                                       struct LuSparseMap **out);

/**
 * Computes and stores the horizon row; also written to `row` when not
 * NULL.
 *
 * # Safety
 * `map` must be a live handle; `row` NULL or writable.
 */
enum LuStatus lu_sparse_map_compute_horizon(struct LuSparseMap *map, uint32_t *row);

/**
 * # Safety
 * `map` must be a live handle.
 */
enum LuStatus lu_sparse_map_set_horizon(struct LuSparseMap *map, uint32_t row);

/**
 * Number of samples, 0 for NULL.
 *
 * # Safety
 * `map` must be NULL or a live handle.
 */
size_t lu_sparse_map_len(const struct LuSparseMap *map);

/**
 * # Safety
 * `map` must be NULL or a handle not yet freed.
 */
void lu_sparse_map_free(struct LuSparseMap *map);

/**
 * Dense estimate of `map` with `method`. The map needs a horizon row.
 *
 * # Safety
 * `map` must be a live handle, `params` readable and `out` writable.
 */
enum LuStatus lu_upsample(const struct LuSparseMap *map,
                          enum LuMethod method,
                          const struct LuParams *params,
                          struct LuDenseMap **out);

/**
 * # Safety
 * `map` must be a live handle; `width` and `height` writable.
 */
enum LuStatus lu_dense_map_dims(const struct LuDenseMap *map, uint32_t *width, uint32_t *height);

/**
 * Copies `width * height` row-major depths into `out`; pixels without an
 * estimate are NaN.
 *
 * # Safety
 * `map` must be a live handle and `out` must hold `len` writable doubles.
 */
enum LuStatus lu_dense_map_copy_values(const struct LuDenseMap *map, double *out, size_t len);

/**
 * Writes a 16-bit depth PNG (meters times 256, 0 for no estimate).
 *
 * # Safety
 * `map` must be a live handle; `path` NUL-terminated UTF-8.
 */
enum LuStatus lu_dense_map_write_png(const struct LuDenseMap *map, const char *path);

/**
 * # Safety
 * `map` must be NULL or a handle not yet freed.
 */
void lu_dense_map_free(struct LuDenseMap *map);

/**
 * Scores `map` against a KITTI ground-truth disparity PNG. `fg_mask_path`
 * may be NULL.
 *
 * # Safety
 * `map` must be a live handle, paths NUL-terminated UTF-8 (or NULL where
 * allowed) and `out` writable.
 */
enum LuStatus lu_evaluate(const struct LuDenseMap *map,
                          const char *gt_disparity_path,
                          const char *fg_mask_path,
                          double baseline,
                          double focal,
                          struct LuEvalReport *out);

/**
 * BF* estimate of one window given as `n` points with pixel offsets
 * `(du[i], dv[i])` from the center and ranges `r[i]`. Returns
 * `NoEstimate` for an empty window.
 *
 * # Safety
 * Arrays must hold `n` readable elements; `out` must be writable.
 */
enum LuStatus lu_bf_star(const int32_t *du,
                         const int32_t *dv,
                         const double *r,
                         size_t n,
                         double epsilon,
                         uint32_t min_pts,
                         double thr,
                         double *out);

/**
 * Normalized range gap `|a - b| / (a + b)`.
 *
 * # Safety
 * `out` must be writable.
 */
enum LuStatus lu_df_distance(double a, double b, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIDAR_UPSAMPLE_H */
