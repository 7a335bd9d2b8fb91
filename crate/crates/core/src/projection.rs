//! Point cloud to image-plane projection, producing the sparse depth map.

use nalgebra::{Matrix3x4, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Calibration, PointCloud};

/// A sample in pixel coordinates with its range in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedPoint {
    pub u: f64,
    pub v: f64,
    pub r: f64,
}

/// What the stored range of a projected point measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RangeMode {
    /// Depth along the optical axis of the rectified camera. Matches depth
    /// derived from stereo disparity.
    #[default]
    Depth,
    /// Euclidean distance from the sensor origin.
    Euclidean,
}

/// Image-plane grid where each pixel holds zero or more range samples.
///
/// Samples are stored cell by cell in row-major order; within a cell they
/// keep the order in which they were inserted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDepthMap {
    width: usize,
    height: usize,
    offsets: Vec<u32>,
    samples: Vec<ProjectedPoint>,
    horizon_row: Option<usize>,
}

/// Rounding used to bin real pixel coordinates, half away from zero.
#[inline]
pub fn pixel_index(x: f64) -> i64 {
    x.round() as i64
}

impl SparseDepthMap {
    /// Builds a map from real-valued samples, binning each at
    /// `(round(u), round(v))`.
    pub fn from_points(
        width: usize,
        height: usize,
        points: impl IntoIterator<Item = ProjectedPoint>,
    ) -> Result<Self> {
        let points: Vec<ProjectedPoint> = points.into_iter().collect();
        let mut cells = Vec::with_capacity(points.len());
        for p in &points {
            if !(p.r > 0.0 && p.r.is_finite()) {
                return Err(Error::InvalidArgument(format!("range must be positive, got {}", p.r)));
            }
            let (cu, cv) = (pixel_index(p.u), pixel_index(p.v));
            if cu < 0 || cv < 0 || cu >= width as i64 || cv >= height as i64 {
                return Err(Error::InvalidArgument(format!(
                    "sample ({}, {}) outside {width}x{height}",
                    p.u, p.v
                )));
            }
            cells.push(cv as usize * width + cu as usize);
        }
        Ok(Self::bin(width, height, &cells, &points))
    }

    /// Builds a map from samples that already sit on integer pixels.
    pub fn from_cells(
        width: usize,
        height: usize,
        cells: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        Self::from_points(
            width,
            height,
            cells.into_iter().map(|(u, v, r)| ProjectedPoint {
                u: u as f64,
                v: v as f64,
                r,
            }),
        )
    }

    // Counting sort on the cell index keeps insertion order inside a cell.
    fn bin(width: usize, height: usize, cells: &[usize], points: &[ProjectedPoint]) -> Self {
        let mut offsets = vec![0u32; width * height + 1];
        for &c in cells {
            offsets[c + 1] += 1;
        }
        for i in 1..offsets.len() {
            offsets[i] += offsets[i - 1];
        }
        let mut cursor = offsets.clone();
        let mut samples = vec![ProjectedPoint { u: 0.0, v: 0.0, r: 0.0 }; points.len()];
        for (&c, p) in cells.iter().zip(points) {
            samples[cursor[c] as usize] = *p;
            cursor[c] += 1;
        }
        SparseDepthMap {
            width,
            height,
            offsets,
            samples,
            horizon_row: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Total number of stored samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples binned at pixel `(u, v)`.
    #[inline]
    pub fn cell(&self, u: usize, v: usize) -> &[ProjectedPoint] {
        let i = v * self.width + u;
        &self.samples[self.offsets[i] as usize..self.offsets[i + 1] as usize]
    }

    #[inline]
    pub fn count(&self, u: usize, v: usize) -> usize {
        let i = v * self.width + u;
        (self.offsets[i + 1] - self.offsets[i]) as usize
    }

    /// All samples with their integer cell, in storage order.
    pub fn iter_cells(&self) -> impl Iterator<Item = (usize, usize, &ProjectedPoint)> + '_ {
        (0..self.width * self.height).flat_map(move |i| {
            let (u, v) = (i % self.width, i / self.width);
            self.samples[self.offsets[i] as usize..self.offsets[i + 1] as usize]
                .iter()
                .map(move |p| (u, v, p))
        })
    }

    pub fn horizon_row(&self) -> Option<usize> {
        self.horizon_row
    }

    pub fn set_horizon_row(&mut self, row: usize) {
        self.horizon_row = Some(row);
    }

    pub fn with_horizon_row(mut self, row: usize) -> Self {
        self.horizon_row = Some(row);
        self
    }

    pub(crate) fn require_horizon(&self) -> Result<usize> {
        self.horizon_row
            .ok_or_else(|| Error::InvalidArgument("horizon row has not been computed".into()))
    }
}

/// Where each input point ended up.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ProjectionCounts {
    pub stored: usize,
    pub behind_camera: usize,
    pub outside_image: usize,
}

impl ProjectionCounts {
    pub fn total(&self) -> usize {
        self.stored + self.behind_camera + self.outside_image
    }
}

/// Projects a scan into the image of `calib.camera`.
pub fn project(
    cloud: &PointCloud,
    calib: &Calibration,
    width: usize,
    height: usize,
    mode: RangeMode,
) -> SparseDepthMap {
    project_counted(cloud, calib, width, height, mode).0
}

pub fn project_counted(
    cloud: &PointCloud,
    calib: &Calibration,
    width: usize,
    height: usize,
    mode: RangeMode,
) -> (SparseDepthMap, ProjectionCounts) {
    let mut rect = Matrix4::identity();
    rect.fixed_view_mut::<3, 3>(0, 0).copy_from(&calib.r_rect);
    let velo_to_rect = rect * calib.t_velo_cam;
    let to_image: Matrix3x4<f64> = calib.projection() * velo_to_rect;

    let mut counts = ProjectionCounts::default();
    let mut cells = Vec::with_capacity(cloud.len());
    let mut points = Vec::with_capacity(cloud.len());
    for p in &cloud.points {
        let x = Vector4::new(f64::from(p.x), f64::from(p.y), f64::from(p.z), 1.0);
        let cam = velo_to_rect * x;
        let img = to_image * x;
        if cam.z <= 0.0 || img.z <= 0.0 {
            counts.behind_camera += 1;
            continue;
        }
        let (u, v) = (img.x / img.z, img.y / img.z);
        let (cu, cv) = (pixel_index(u), pixel_index(v));
        // A pixel covers [c - 0.5, c + 0.5).
        let inside = cu >= 0 && cv >= 0 && (cu as u64) < width as u64 && (cv as u64) < height as u64;
        if !inside {
            counts.outside_image += 1;
            continue;
        }
        let r = match mode {
            RangeMode::Depth => cam.z,
            RangeMode::Euclidean => x.xyz().norm(),
        };
        if r.is_nan() || r <= 0.0 {
            counts.behind_camera += 1;
            continue;
        }
        cells.push(cv as usize * width + cu as usize);
        points.push(ProjectedPoint { u, v, r });
    }
    counts.stored = points.len();
    (SparseDepthMap::bin(width, height, &cells, &points), counts)
}

/// Row of the horizon line: the mean, over columns holding samples, of the
/// topmost sampled row in that column.
pub fn compute_horizon_line(map: &SparseDepthMap) -> Result<usize> {
    let mut sum = 0u64;
    let mut columns = 0u64;
    for u in 0..map.width() {
        if let Some(v) = (0..map.height()).find(|&v| map.count(u, v) > 0) {
            sum += v as u64;
            columns += 1;
        }
    }
    if columns == 0 {
        return Err(Error::Degenerate("horizon of an empty depth map".into()));
    }
    Ok((sum as f64 / columns as f64).round() as usize)
}

/// Occupancy of the pixels at or below the horizon row, in percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaseStats {
    /// Exactly one sample.
    pub pct_case1: f64,
    /// More than one sample.
    pub pct_case2: f64,
    /// Empty.
    pub pct_case3: f64,
}

pub fn occupancy_stats(map: &SparseDepthMap) -> Result<CaseStats> {
    let horizon = map.require_horizon()?;
    let (mut single, mut multi, mut total) = (0usize, 0usize, 0usize);
    for v in horizon.min(map.height())..map.height() {
        for u in 0..map.width() {
            match map.count(u, v) {
                0 => {}
                1 => single += 1,
                _ => multi += 1,
            }
            total += 1;
        }
    }
    if total == 0 {
        return Ok(CaseStats { pct_case1: 0.0, pct_case2: 0.0, pct_case3: 100.0 });
    }
    let pct = |n: usize| 100.0 * n as f64 / total as f64;
    Ok(CaseStats {
        pct_case1: pct(single),
        pct_case2: pct(multi),
        pct_case3: pct(total - single - multi),
    })
}
