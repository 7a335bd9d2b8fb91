//! Dense depth maps from a single sparse LIDAR point cloud.
//!
//! The pipeline projects a scan into the camera image plane ([`projection`]),
//! slides an `mr x mr` window over every pixel below the horizon line
//! ([`window`]) and estimates a range from the samples that fall inside it
//! ([`interp`], [`bfstar`]). Triangulation-based baselines live in
//! [`delaunay`], and [`eval`] scores estimates against KITTI disparity ground
//! truth with the D1 outlier metrics.
//!
//! ```
//! use lidar_upsample::projection::SparseDepthMap;
//! use lidar_upsample::window::upsample;
//! use lidar_upsample::bfstar::{BfStar, BfStarParams};
//!
//! let mut map = SparseDepthMap::from_cells(8, 8, [(2, 4, 10.0), (5, 4, 30.0), (3, 5, 10.5)]).unwrap();
//! map.set_horizon_row(3);
//! let dense = upsample(&map, &BfStar(BfStarParams::default()), 3).unwrap();
//! // The near pair stays together; the far return does not bleed in.
//! let r = dense.get(3, 4).unwrap();
//! assert!((10.0..=10.5).contains(&r));
//! ```

pub mod bfstar;
pub mod delaunay;
pub mod error;
pub mod eval;
pub mod interp;
pub mod io;
pub mod pipeline;
pub mod projection;
pub mod synth;
pub mod window;

pub use error::{Error, Result};
