//! Synthetic street scenes with exact ground truth.
//!
//! A pinhole camera looks at a ground plane, a background wall and a set of
//! fronto-parallel boxes standing on the ground. Every non-sky pixel has an
//! exact depth; a seeded random subset of them becomes the sparse LIDAR map.

use std::fs;
use std::path::Path;

use nalgebra::{Matrix3, Matrix3x4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::FgMask;
use crate::io::{self, Calibration, DisparityMap, LidarPoint, PointCloud};
use crate::projection::{compute_horizon_line, SparseDepthMap};

/// A fronto-parallel box face standing on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    /// Distance from the camera, meters.
    pub depth: f64,
    /// Lateral extent in camera x, meters.
    pub x_min: f64,
    pub x_max: f64,
    /// Height above the ground, meters.
    pub height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticScene {
    pub width: usize,
    pub height: usize,
    pub focal: f64,
    pub cx: f64,
    pub cy: f64,
    pub baseline: f64,
    /// Camera height above the ground plane, meters.
    pub camera_height: f64,
    /// Whether the ground plane is visible; without it the wall fills
    /// every row below its top edge.
    pub ground: bool,
    pub wall_depth: f64,
    /// Wall height above the ground, meters. Rows above it are sky.
    pub wall_height: f64,
    pub boxes: Vec<BoxSpec>,
    /// Fraction of non-sky pixels that receive a sample.
    pub rate: f64,
    pub seed: u64,
}

impl Default for SyntheticScene {
    fn default() -> Self {
        SyntheticScene::street(2, 0.07, 0)
    }
}

impl SyntheticScene {
    /// KITTI color-camera intrinsics and mounting height.
    fn base(rate: f64, seed: u64) -> Self {
        SyntheticScene {
            width: 1242,
            height: 375,
            focal: 721.5377,
            cx: 609.5593,
            cy: 172.854,
            baseline: 0.54,
            camera_height: 1.65,
            ground: true,
            wall_depth: 40.0,
            wall_height: 8.0,
            boxes: Vec::new(),
            rate,
            seed,
        }
    }

    /// A single box at 8 m in front of a wall at 40 m, no ground.
    pub fn step_edge(rate: f64, seed: u64) -> Self {
        SyntheticScene {
            ground: false,
            boxes: vec![BoxSpec { depth: 8.0, x_min: -0.9, x_max: 0.9, height: 1.5 }],
            ..Self::base(rate, seed)
        }
    }

    /// Ground, wall and `k` boxes at distinct depths, alternating sides.
    pub fn street(k: usize, rate: f64, seed: u64) -> Self {
        let boxes = (0..k)
            .map(|i| {
                let depth = 8.0 + 6.0 * i as f64;
                let side = if i % 2 == 0 { -1.0 } else { 1.0 };
                let center = side * (1.5 + (i / 2) as f64);
                BoxSpec { depth, x_min: center - 1.0, x_max: center + 1.0, height: 1.5 }
            })
            .collect();
        SyntheticScene { boxes, ..Self::base(rate, seed) }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(Error::InvalidArgument(format!("sampling rate must be in (0, 1], got {}", self.rate)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("scene image must be non-empty".into()));
        }
        let positive = [self.focal, self.baseline, self.camera_height, self.wall_depth];
        if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidArgument("scene geometry must be positive".into()));
        }
        if self.boxes.iter().any(|b| !(b.depth > 0.0 && b.x_max > b.x_min && b.height > 0.0)) {
            return Err(Error::InvalidArgument("box extents must be positive".into()));
        }
        Ok(())
    }

    /// Camera-frame y (downward) of the ray through row `v` at depth `z`.
    fn ray_y(&self, v: f64, z: f64) -> f64 {
        (v - self.cy) * z / self.focal
    }

    fn ray_x(&self, u: f64, z: f64) -> f64 {
        (u - self.cx) * z / self.focal
    }

    /// Exact depth and foreground flag of the visible surface at a pixel.
    pub fn surface_at(&self, u: usize, v: usize) -> Option<(f64, bool)> {
        let (uf, vf) = (u as f64, v as f64);
        let h = self.camera_height;
        let mut best: Option<(f64, bool)> = None;
        let mut consider = |z: f64, fg: bool| {
            if best.is_none_or(|(bz, _)| z < bz) {
                best = Some((z, fg));
            }
        };
        for b in &self.boxes {
            let (x, y) = (self.ray_x(uf, b.depth), self.ray_y(vf, b.depth));
            if x >= b.x_min && x <= b.x_max && y >= h - b.height && (y <= h || !self.ground) {
                consider(b.depth, true);
            }
        }
        let wy = self.ray_y(vf, self.wall_depth);
        if wy >= h - self.wall_height && (wy <= h || !self.ground) {
            consider(self.wall_depth, false);
        }
        if self.ground && vf > self.cy {
            let z = h * self.focal / (vf - self.cy);
            if z < self.wall_depth {
                consider(z, false);
            }
        }
        best
    }

    /// Dense ground-truth depth and foreground mask.
    pub fn render(&self) -> Result<(Vec<Option<f64>>, FgMask)> {
        self.validate()?;
        let mut depth = Vec::with_capacity(self.width * self.height);
        let mut fg = Vec::with_capacity(self.width * self.height);
        for v in 0..self.height {
            for u in 0..self.width {
                let s = self.surface_at(u, v);
                depth.push(s.map(|(z, _)| z));
                fg.push(s.is_some_and(|(_, f)| f));
            }
        }
        Ok((depth, FgMask::new(self.width, self.height, fg)?))
    }

    /// Camera matrices matching the scene: camera 2 at the origin, camera 3
    /// one baseline to the right, and a KITTI-style axis swap from the
    /// sensor frame (x forward, y left, z up).
    pub fn calibration(&self) -> Result<Calibration> {
        let f = self.focal;
        let p2 = Matrix3x4::new(f, 0.0, self.cx, 0.0, 0.0, f, self.cy, 0.0, 0.0, 0.0, 1.0, 0.0);
        let mut p3 = p2;
        p3[(0, 3)] = -f * self.baseline;
        let velo_to_cam = Matrix3x4::new(0.0, -1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0);
        Ok(Calibration::new(p2, Matrix3::identity(), velo_to_cam)?.with_p3(p3))
    }
}

/// Everything [`gen_synthetic`] produces.
#[derive(Debug, Clone)]
pub struct SyntheticFrame {
    pub sparse: SparseDepthMap,
    pub depth: Vec<Option<f64>>,
    pub disparity: DisparityMap,
    pub fg: FgMask,
    pub calibration: Calibration,
}

/// Renders the scene and samples exactly `floor(rate * n)` of its `n`
/// non-sky pixels without replacement.
pub fn gen_synthetic(scene: &SyntheticScene) -> Result<SyntheticFrame> {
    let (depth, fg) = scene.render()?;
    let valid: Vec<usize> = (0..depth.len()).filter(|&i| depth[i].is_some()).collect();
    let k = (scene.rate * valid.len() as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(scene.seed);
    let mut picked = rand::seq::index::sample(&mut rng, valid.len(), k).into_vec();
    picked.sort_unstable();
    let w = scene.width;
    let mut sparse = SparseDepthMap::from_cells(
        w,
        scene.height,
        picked.iter().map(|&j| {
            let i = valid[j];
            (i % w, i / w, depth[i].expect("valid pixel"))
        }),
    )?;
    if !sparse.is_empty() {
        sparse.set_horizon_row(compute_horizon_line(&sparse)?);
    }
    let bf = scene.baseline * scene.focal;
    let disparity = DisparityMap::new(w, scene.height, depth.iter().map(|d| d.map(|z| bf / z)).collect())?;
    Ok(SyntheticFrame {
        sparse,
        depth,
        disparity,
        fg,
        calibration: scene.calibration()?,
    })
}

/// Back-projects the sampled pixels into sensor coordinates.
pub fn to_point_cloud(scene: &SyntheticScene, sparse: &SparseDepthMap) -> PointCloud {
    let points = sparse
        .iter_cells()
        .map(|(u, v, p)| {
            let z = p.r;
            let (x, y) = (scene.ray_x(u as f64, z), scene.ray_y(v as f64, z));
            LidarPoint {
                x: z as f32,
                y: -x as f32,
                z: -y as f32,
                reflectance: 0.5,
            }
        })
        .collect();
    PointCloud { points }
}

/// Dataset layout written by [`write_frame`], relative to the root.
pub fn frame_paths(root: &Path, id: &str) -> FramePaths {
    FramePaths {
        scan: root.join("velodyne").join(format!("{id}.bin")),
        calib: root.join("calib").join(format!("{id}.txt")),
        disparity: root.join("disp_noc_0").join(format!("{id}_10.png")),
        fg_mask: root.join("obj_map").join(format!("{id}_10.png")),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FramePaths {
    pub scan: std::path::PathBuf,
    pub calib: std::path::PathBuf,
    pub disparity: std::path::PathBuf,
    pub fg_mask: std::path::PathBuf,
}

/// Writes scan, calibration, ground-truth disparity and foreground mask
/// for one synthetic frame.
pub fn write_frame(scene: &SyntheticScene, frame: &SyntheticFrame, root: &Path, id: &str) -> Result<FramePaths> {
    let paths = frame_paths(root, id);
    for p in [&paths.scan, &paths.calib, &paths.disparity, &paths.fg_mask] {
        if let Some(dir) = p.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    io::write_point_cloud(&to_point_cloud(scene, &frame.sparse), &paths.scan)?;
    io::write_calibration(&frame.calibration, &paths.calib)?;
    io::write_disparity_image(&frame.disparity, &paths.disparity)?;
    io::write_fg_mask(&frame.fg, &paths.fg_mask)?;
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Camera;
    use crate::projection::{project, RangeMode};

    #[test]
    fn rate_bounds() {
        assert!(gen_synthetic(&SyntheticScene::street(1, 0.0, 1)).is_err());
        assert!(gen_synthetic(&SyntheticScene::street(1, 1.5, 1)).is_err());
        assert!(gen_synthetic(&SyntheticScene::street(1, 1.0, 1)).is_ok());
    }

    #[test]
    fn exact_sample_count() {
        let scene = SyntheticScene::street(2, 0.07, 3);
        let f = gen_synthetic(&scene).unwrap();
        let n = f.depth.iter().filter(|d| d.is_some()).count();
        assert_eq!(f.sparse.len(), (0.07 * n as f64).floor() as usize);
    }

    #[test]
    fn full_rate_reproduces_ground_truth() {
        let scene = SyntheticScene::step_edge(1.0, 0);
        let f = gen_synthetic(&scene).unwrap();
        for v in 0..scene.height {
            for u in 0..scene.width {
                let cell: Vec<f64> = f.sparse.cell(u, v).iter().map(|p| p.r).collect();
                assert_eq!(cell, f.depth[v * scene.width + u].into_iter().collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn seeded_generation_is_repeatable() {
        let scene = SyntheticScene::street(3, 0.1, 42);
        let (a, b) = (gen_synthetic(&scene).unwrap(), gen_synthetic(&scene).unwrap());
        assert_eq!(a.sparse, b.sparse);
        assert_eq!(a.disparity, b.disparity);
        let c = gen_synthetic(&SyntheticScene { seed: 43, ..scene }).unwrap();
        assert_ne!(a.sparse, c.sparse);
    }

    #[test]
    fn step_edge_layout() {
        let scene = SyntheticScene::step_edge(0.07, 0);
        let (depth, fg) = scene.render().unwrap();
        let at = |u: usize, v: usize| depth[v * scene.width + u];
        assert_eq!(at(609, 300), Some(8.0));
        assert!(fg.get(609, 300));
        assert_eq!(at(10, 300), Some(40.0));
        assert!(!fg.get(10, 300));
        assert_eq!(at(10, 0), None);
    }

    #[test]
    fn back_projection_lands_on_the_same_pixels() {
        let scene = SyntheticScene::street(2, 0.05, 9);
        let f = gen_synthetic(&scene).unwrap();
        let cloud = to_point_cloud(&scene, &f.sparse);
        let calib = f.calibration.clone().with_camera(Camera::Left).unwrap();
        let reproj = project(&cloud, &calib, scene.width, scene.height, RangeMode::Depth);
        assert_eq!(reproj.len(), f.sparse.len());
        for ((u, v, p), (u2, v2, q)) in f.sparse.iter_cells().zip(reproj.iter_cells()) {
            assert_eq!((u, v), (u2, v2));
            assert!((p.r - q.r).abs() < 1e-4 * p.r);
        }
        assert!((calib.require_baseline().unwrap() - scene.baseline).abs() < 1e-12);
    }
}
