//! Sliding-window machinery shared by every local interpolator.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::projection::SparseDepthMap;

/// A sample inside a window, as an offset from the window center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowPoint {
    pub du: i32,
    pub dv: i32,
    pub r: f64,
}

impl WindowPoint {
    /// Euclidean distance from the window center, in pixels.
    #[inline]
    pub fn offset_norm(&self) -> f64 {
        f64::from(self.du).hypot(f64::from(self.dv))
    }

    #[inline]
    pub fn offset_norm_sq(&self) -> i64 {
        i64::from(self.du).pow(2) + i64::from(self.dv).pow(2)
    }
}

/// Contents of one `mr x mr` mask.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowSample {
    pub center: (usize, usize),
    pub mr: usize,
    pub points: Vec<WindowPoint>,
}

impl WindowSample {
    pub fn new(center: (usize, usize), mr: usize, points: Vec<WindowPoint>) -> Self {
        WindowSample { center, mr, points }
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn ranges(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.r)
    }

    pub fn min_range(&self) -> Option<f64> {
        self.ranges().reduce(f64::min)
    }

    pub fn max_range(&self) -> Option<f64> {
        self.ranges().reduce(f64::max)
    }
}

/// A window-local range estimator. `None` means no estimate.
pub trait Interpolator: Sync {
    fn estimate(&self, window: &WindowSample) -> Option<f64>;
}

impl<F> Interpolator for F
where
    F: Fn(&WindowSample) -> Option<f64> + Sync,
{
    fn estimate(&self, window: &WindowSample) -> Option<f64> {
        self(window)
    }
}

pub fn check_mask_size(mr: usize) -> Result<()> {
    if mr == 0 || mr.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "mask size must be odd and positive, got {mr}"
        )));
    }
    Ok(())
}

// Points are appended row by row (top to bottom), left to right within a
// row, and in storage order within a cell. Upsampling and the reference
// tests depend on this order for bit-identical sums.
fn gather_into(map: &SparseDepthMap, u0: usize, v0: usize, half: usize, out: &mut Vec<WindowPoint>) {
    out.clear();
    let u_lo = u0.saturating_sub(half);
    let u_hi = (u0 + half).min(map.width() - 1);
    let v_lo = v0.saturating_sub(half);
    let v_hi = (v0 + half).min(map.height() - 1);
    for v in v_lo..=v_hi {
        let dv = v as i32 - v0 as i32;
        for u in u_lo..=u_hi {
            let du = u as i32 - u0 as i32;
            out.extend(map.cell(u, v).iter().map(|p| WindowPoint { du, dv, r: p.r }));
        }
    }
}

/// Every sample whose cell lies in the `mr x mr` square around `center`,
/// clipped at the image border.
pub fn gather_window(map: &SparseDepthMap, center: (usize, usize), mr: usize) -> Result<WindowSample> {
    check_mask_size(mr)?;
    let (u0, v0) = center;
    if u0 >= map.width() || v0 >= map.height() {
        return Err(Error::InvalidArgument(format!(
            "window center ({u0}, {v0}) outside {}x{}",
            map.width(),
            map.height()
        )));
    }
    let mut points = Vec::new();
    gather_into(map, u0, v0, mr / 2, &mut points);
    Ok(WindowSample::new(center, mr, points))
}

/// Dense per-pixel range estimates. Pixels above the horizon row are
/// always invalid.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseDepthMap {
    width: usize,
    height: usize,
    horizon_row: usize,
    values: Vec<Option<f64>>,
}

impl DenseDepthMap {
    pub fn empty(width: usize, height: usize, horizon_row: usize) -> Self {
        DenseDepthMap {
            width,
            height,
            horizon_row,
            values: vec![None; width * height],
        }
    }

    pub fn from_values(
        width: usize,
        height: usize,
        horizon_row: usize,
        values: Vec<Option<f64>>,
    ) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "depth buffer has {} values for a {width}x{height} image",
                values.len()
            )));
        }
        if values.iter().flatten().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidArgument("valid depths must be positive and finite".into()));
        }
        if values[..(horizon_row.min(height) * width)].iter().any(Option::is_some) {
            return Err(Error::InvalidArgument("estimate above the horizon row".into()));
        }
        Ok(DenseDepthMap {
            width,
            height,
            horizon_row,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn horizon_row(&self) -> usize {
        self.horizon_row
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.values[v * self.width + u]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().flatten().count()
    }

    pub(crate) fn rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [Option<f64>])> {
        let start = self.horizon_row.min(self.height);
        let w = self.width.max(1);
        self.values[start * self.width..]
            .par_chunks_mut(w)
            .enumerate()
            .map(move |(i, row)| (start + i, row))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct UpsampleOptions {
    /// Copy the sample of single-sample pixels instead of re-estimating it.
    pub passthrough_case1: bool,
}

/// Applies `interp` to the window of every pixel at or below the horizon.
pub fn upsample<I: Interpolator + ?Sized>(map: &SparseDepthMap, interp: &I, mr: usize) -> Result<DenseDepthMap> {
    upsample_with(map, interp, mr, UpsampleOptions::default())
}

pub fn upsample_with<I: Interpolator + ?Sized>(
    map: &SparseDepthMap,
    interp: &I,
    mr: usize,
    options: UpsampleOptions,
) -> Result<DenseDepthMap> {
    check_mask_size(mr)?;
    let horizon = map.require_horizon()?;
    let mut out = DenseDepthMap::empty(map.width(), map.height(), horizon);
    let half = mr / 2;
    out.rows_mut().for_each_init(
        || WindowSample::new((0, 0), mr, Vec::new()),
        |window, (v, row)| {
            for (u, value) in row.iter_mut().enumerate() {
                if options.passthrough_case1 {
                    if let [only] = map.cell(u, v) {
                        *value = Some(only.r);
                        continue;
                    }
                }
                window.center = (u, v);
                gather_into(map, u, v, half, &mut window.points);
                if window.points.is_empty() {
                    continue;
                }
                *value = interp
                    .estimate(window)
                    .filter(|r| *r > 0.0 && r.is_finite());
            }
        },
    );
    Ok(out)
}

/// Window statistics over all placements at or below the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityStats {
    pub mr: usize,
    /// Most samples seen in any window.
    pub n_max: usize,
    /// Mean samples per window.
    pub n_ave: f64,
    /// Percentage of windows holding at least one sample.
    pub d_ens: f64,
}

/// Counts are read from a summed-area table, so this costs O(1) per window.
pub fn density_stats(map: &SparseDepthMap, mr: usize) -> Result<DensityStats> {
    check_mask_size(mr)?;
    let horizon = map.require_horizon()?;
    let (w, h) = (map.width(), map.height());
    let stride = w + 1;
    let mut table = vec![0u64; stride * (h + 1)];
    for v in 0..h {
        let mut row = 0u64;
        for u in 0..w {
            row += map.count(u, v) as u64;
            table[(v + 1) * stride + u + 1] = table[v * stride + u + 1] + row;
        }
    }
    let half = mr / 2;
    let (mut n_max, mut total, mut hit, mut windows) = (0u64, 0u64, 0u64, 0u64);
    for v in horizon.min(h)..h {
        let (v_lo, v_hi) = (v.saturating_sub(half), (v + half + 1).min(h));
        for u in 0..w {
            let (u_lo, u_hi) = (u.saturating_sub(half), (u + half + 1).min(w));
            let n = table[v_hi * stride + u_hi] + table[v_lo * stride + u_lo]
                - table[v_lo * stride + u_hi]
                - table[v_hi * stride + u_lo];
            n_max = n_max.max(n);
            total += n;
            hit += u64::from(n > 0);
            windows += 1;
        }
    }
    let (n_ave, d_ens) = if windows == 0 {
        (0.0, 0.0)
    } else {
        (total as f64 / windows as f64, 100.0 * hit as f64 / windows as f64)
    };
    Ok(DensityStats {
        mr,
        n_max: n_max as usize,
        n_ave,
        d_ens,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn average(w: &WindowSample) -> Option<f64> {
        Some(w.ranges().sum::<f64>() / w.len() as f64)
    }

    #[test]
    fn single_cell_window() {
        let map = SparseDepthMap::from_cells(5, 5, [(2, 2, 7.0)]).unwrap();
        let w = gather_window(&map, (2, 2), 1).unwrap();
        assert_eq!(w.points, vec![WindowPoint { du: 0, dv: 0, r: 7.0 }]);
    }

    #[test]
    fn neighbour_offset() {
        let map = SparseDepthMap::from_cells(5, 5, [(3, 1, 4.0)]).unwrap();
        let w = gather_window(&map, (2, 2), 3).unwrap();
        assert_eq!(w.points, vec![WindowPoint { du: 1, dv: -1, r: 4.0 }]);
    }

    #[test]
    fn border_windows_are_clipped() {
        let map = SparseDepthMap::from_cells(3, 3, [(0, 0, 1.0), (2, 2, 2.0)]).unwrap();
        let w = gather_window(&map, (0, 0), 5).unwrap();
        assert_eq!(w.len(), 2);
        assert!(w.points.iter().all(|p| p.du >= 0 && p.dv >= 0));
    }

    #[test]
    fn bad_mask_sizes() {
        let map = SparseDepthMap::from_cells(3, 3, []).unwrap();
        assert!(gather_window(&map, (1, 1), 4).is_err());
        assert!(gather_window(&map, (1, 1), 0).is_err());
        assert!(gather_window(&map, (3, 1), 3).is_err());
    }

    #[test]
    fn average_spreads_over_chebyshev_ball() {
        let map = SparseDepthMap::from_cells(9, 9, [(4, 5, 3.5)]).unwrap().with_horizon_row(0);
        let dense = upsample(&map, &average, 5).unwrap();
        for v in 0..9 {
            for u in 0..9 {
                let near = (u as i32 - 4).abs() <= 2 && (v as i32 - 5).abs() <= 2;
                assert_eq!(dense.get(u, v), near.then_some(3.5), "({u},{v})");
            }
        }
    }

    #[test]
    fn rows_above_horizon_stay_invalid() {
        let map = SparseDepthMap::from_cells(4, 6, [(1, 1, 2.0), (1, 4, 2.0)]).unwrap().with_horizon_row(3);
        let dense = upsample(&map, &average, 3).unwrap();
        assert!(dense.values()[..12].iter().all(Option::is_none));
        assert_eq!(dense.get(1, 3), Some(2.0));
    }

    #[test]
    fn upsample_requires_horizon() {
        let map = SparseDepthMap::from_cells(4, 4, [(1, 1, 2.0)]).unwrap();
        assert!(upsample(&map, &average, 3).is_err());
    }

    #[test]
    fn passthrough_keeps_single_samples() {
        let map = SparseDepthMap::from_cells(3, 1, [(0, 0, 2.0), (1, 0, 4.0)]).unwrap().with_horizon_row(0);
        let opts = UpsampleOptions { passthrough_case1: true };
        let dense = upsample_with(&map, &average, 3, opts).unwrap();
        assert_eq!(dense.values(), &[Some(2.0), Some(4.0), Some(4.0)]);
        let plain = upsample(&map, &average, 3).unwrap();
        assert_eq!(plain.values(), &[Some(3.0), Some(3.0), Some(4.0)]);
    }

    #[test]
    fn density_of_saturated_map() {
        let cells = (0..7).flat_map(|v| (0..7).map(move |u| (u, v, 1.0)));
        let map = SparseDepthMap::from_cells(7, 7, cells).unwrap().with_horizon_row(0);
        let s = density_stats(&map, 3).unwrap();
        assert_eq!(s.d_ens, 100.0);
        assert_eq!(s.n_max, 9);
        // 25 interior windows of 9, 20 edge windows of 6, 4 corners of 4.
        assert!((s.n_ave - (25.0 * 9.0 + 20.0 * 6.0 + 4.0 * 4.0) / 49.0).abs() < 1e-12);
    }
}
