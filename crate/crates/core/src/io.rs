//! KITTI file formats: raw Velodyne scans, calibration text files and
//! 16-bit PNG disparity / depth images.
//!
//! Images follow the KITTI convention: a stored value of 0 marks an invalid
//! pixel and any other value `v` encodes `v / 256` (pixels for disparity,
//! meters for depth).

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use image::{DynamicImage, ImageBuffer, Luma};
use nalgebra::{Matrix3, Matrix3x4, Matrix4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::FgMask;
use crate::window::DenseDepthMap;

/// Bytes per point in a raw Velodyne scan: four little-endian `f32`.
pub const POINT_STRIDE: usize = 16;

/// Fixed-point scale of KITTI 16-bit images.
pub const PNG_SCALE: f64 = 256.0;

/// One return of the scanner, in the sensor frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LidarPoint {
    pub x: f32,
    pub y: f32,
    pub z: f32,
    pub reflectance: f32,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PointCloud {
    pub points: Vec<LidarPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.points.len() * POINT_STRIDE);
        for p in &self.points {
            for f in [p.x, p.y, p.z, p.reflectance] {
                out.extend_from_slice(&f.to_le_bytes());
            }
        }
        out
    }
}

/// Decodes a raw Velodyne buffer.
pub fn parse_point_cloud(bytes: &[u8]) -> Result<PointCloud> {
    if !bytes.len().is_multiple_of(POINT_STRIDE) {
        return Err(Error::Format(format!(
            "point cloud size {} is not a multiple of {POINT_STRIDE} bytes",
            bytes.len()
        )));
    }
    let mut points = Vec::with_capacity(bytes.len() / POINT_STRIDE);
    for (index, chunk) in bytes.chunks_exact(POINT_STRIDE).enumerate() {
        let f = |k: usize| f32::from_le_bytes(chunk[4 * k..4 * k + 4].try_into().unwrap());
        let p = LidarPoint {
            x: f(0),
            y: f(1),
            z: f(2),
            reflectance: f(3),
        };
        if ![p.x, p.y, p.z, p.reflectance].iter().all(|v| v.is_finite()) {
            return Err(Error::Format(format!("non-finite value in point {index}")));
        }
        points.push(p);
    }
    Ok(PointCloud { points })
}

pub fn load_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_point_cloud(&bytes).map_err(|e| with_path(e, path))
}

pub fn write_point_cloud(cloud: &PointCloud, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, cloud.to_bytes()).map_err(|e| Error::io(path, e))
}

/// Which rectified camera of the stereo pair anchors the projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Camera {
    /// Left color camera, `P2`.
    #[default]
    Left,
    /// Right color camera, `P3`.
    Right,
}

impl Camera {
    pub fn from_index(index: u8) -> Result<Self> {
        match index {
            2 => Ok(Camera::Left),
            3 => Ok(Camera::Right),
            other => Err(Error::InvalidArgument(format!(
                "camera must be 2 or 3, got {other}"
            ))),
        }
    }
}

/// Sensor-to-image calibration of one KITTI frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub p2: Matrix3x4<f64>,
    pub p3: Option<Matrix3x4<f64>>,
    pub r_rect: Matrix3<f64>,
    /// Rigid transform from the Velodyne frame to the reference camera.
    pub t_velo_cam: Matrix4<f64>,
    pub camera: Camera,
    /// Stereo baseline in meters. Derived from `P2`/`P3` when both are
    /// present, otherwise supplied by the caller.
    pub baseline: Option<f64>,
}

const ORTHONORMAL_TOL: f64 = 1e-6;

impl Calibration {
    pub fn new(
        p2: Matrix3x4<f64>,
        r_rect: Matrix3<f64>,
        velo_to_cam: Matrix3x4<f64>,
    ) -> Result<Self> {
        let mut t_velo_cam = Matrix4::identity();
        t_velo_cam.fixed_view_mut::<3, 4>(0, 0).copy_from(&velo_to_cam);
        let calib = Calibration {
            p2,
            p3: None,
            r_rect,
            t_velo_cam,
            camera: Camera::Left,
            baseline: None,
        };
        calib.validate()?;
        Ok(calib)
    }

    fn validate(&self) -> Result<()> {
        let dev = (self.r_rect * self.r_rect.transpose() - Matrix3::identity()).amax();
        if dev > ORTHONORMAL_TOL {
            return Err(Error::Format(format!(
                "R0_rect is not orthonormal (deviation {dev:e})"
            )));
        }
        if self.focal() <= 0.0 {
            return Err(Error::Format("focal length P[0][0] must be positive".into()));
        }
        if let Some(b) = self.baseline {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "baseline must be positive, got {b}"
                )));
            }
        }
        Ok(())
    }

    /// Projection matrix of the selected camera.
    pub fn projection(&self) -> &Matrix3x4<f64> {
        match (self.camera, &self.p3) {
            (Camera::Right, Some(p3)) => p3,
            _ => &self.p2,
        }
    }

    /// Focal length `f_c` in pixels.
    pub fn focal(&self) -> f64 {
        self.projection()[(0, 0)]
    }

    pub fn with_baseline(mut self, baseline: f64) -> Result<Self> {
        self.baseline = Some(baseline);
        self.validate()?;
        Ok(self)
    }

    pub fn with_camera(mut self, camera: Camera) -> Result<Self> {
        if camera == Camera::Right && self.p3.is_none() {
            return Err(Error::InvalidArgument(
                "camera 3 selected but the calibration has no P3".into(),
            ));
        }
        self.camera = camera;
        Ok(self)
    }

    pub fn with_p3(mut self, p3: Matrix3x4<f64>) -> Self {
        self.p3 = Some(p3);
        self.baseline = derive_baseline(&self.p2, &p3).or(self.baseline);
        self
    }

    /// Baseline or an error telling the caller to supply one.
    pub fn require_baseline(&self) -> Result<f64> {
        self.baseline.ok_or_else(|| {
            Error::InvalidArgument(
                "stereo baseline unknown: pass --baseline or provide P3 in the calibration".into(),
            )
        })
    }
}

// P_rect[0][3] = -f * b_x for each rectified camera.
fn derive_baseline(p2: &Matrix3x4<f64>, p3: &Matrix3x4<f64>) -> Option<f64> {
    let b = (p2[(0, 3)] - p3[(0, 3)]) / p2[(0, 0)];
    (b > 0.0 && b.is_finite()).then_some(b)
}

fn find_key<'a>(text: &'a str, key: &str) -> Option<&'a str> {
    text.lines().find_map(|line| {
        let (k, rest) = line.split_once(':')?;
        (k.trim() == key).then_some(rest)
    })
}

fn parse_floats(text: &str, key: &str, expected: usize) -> Result<Option<Vec<f64>>> {
    let Some(rest) = find_key(text, key) else {
        return Ok(None);
    };
    let values = rest
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>()
                .map_err(|_| Error::Format(format!("{key}: cannot parse '{tok}' as a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.len() != expected {
        return Err(Error::Format(format!(
            "{key}: expected {expected} values, found {}",
            values.len()
        )));
    }
    Ok(Some(values))
}

fn required(text: &str, key: &str, expected: usize) -> Result<Vec<f64>> {
    parse_floats(text, key, expected)?
        .ok_or_else(|| Error::Format(format!("missing calibration key {key}")))
}

/// Parses a KITTI calibration file with `P2:`, `R0_rect:` and
/// `Tr_velo_to_cam:` lines (and optionally `P3:`).
pub fn parse_calibration(text: &str) -> Result<Calibration> {
    let p2 = Matrix3x4::from_row_slice(&required(text, "P2", 12)?);
    let r_rect = Matrix3::from_row_slice(&required(text, "R0_rect", 9)?);
    let tr = Matrix3x4::from_row_slice(&required(text, "Tr_velo_to_cam", 12)?);
    let mut calib = Calibration::new(p2, r_rect, tr)?;
    if let Some(p3) = parse_floats(text, "P3", 12)? {
        calib = calib.with_p3(Matrix3x4::from_row_slice(&p3));
    }
    Ok(calib)
}

pub fn load_calibration(path: impl AsRef<Path>) -> Result<Calibration> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_calibration(&text).map_err(|e| with_path(e, path))
}

fn push_row(out: &mut String, key: &str, values: impl IntoIterator<Item = f64>) {
    out.push_str(key);
    out.push(':');
    for v in values {
        // Shortest representation that parses back to the same f64.
        write!(out, " {v:e}").unwrap();
    }
    out.push('\n');
}

fn row_major<const R: usize, const C: usize>(
    m: &nalgebra::SMatrix<f64, R, C>,
) -> impl Iterator<Item = f64> + '_ {
    (0..R).flat_map(move |r| (0..C).map(move |c| m[(r, c)]))
}

pub fn format_calibration(calib: &Calibration) -> String {
    let mut out = String::new();
    push_row(&mut out, "P2", row_major(&calib.p2));
    if let Some(p3) = &calib.p3 {
        push_row(&mut out, "P3", row_major(p3));
    }
    push_row(&mut out, "R0_rect", row_major(&calib.r_rect));
    let tr: Matrix3x4<f64> = calib.t_velo_cam.fixed_view::<3, 4>(0, 0).into();
    push_row(&mut out, "Tr_velo_to_cam", row_major(&tr));
    out
}

pub fn write_calibration(calib: &Calibration, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_calibration(calib)).map_err(|e| Error::io(path, e))
}

/// Per-pixel disparity in pixels; `None` marks pixels without ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    values: Vec<Option<f64>>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, values: Vec<Option<f64>>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::InvalidArgument(format!(
                "disparity buffer has {} values for a {width}x{height} image",
                values.len()
            )));
        }
        if values.iter().flatten().any(|d| !(*d > 0.0 && d.is_finite())) {
            return Err(Error::InvalidArgument("valid disparities must be positive".into()));
        }
        Ok(DisparityMap {
            width,
            height,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, u: usize, v: usize) -> Option<f64> {
        self.values[v * self.width + u]
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn valid_count(&self) -> usize {
        self.values.iter().flatten().count()
    }
}

fn decode_u16(v: u16) -> Option<f64> {
    (v != 0).then(|| f64::from(v) / PNG_SCALE)
}

fn encode_u16(x: Option<f64>) -> u16 {
    match x {
        // Valid values never collapse onto the invalid marker.
        Some(x) => (x * PNG_SCALE).round().clamp(1.0, f64::from(u16::MAX)) as u16,
        None => 0,
    }
}

fn load_luma16(path: &Path) -> Result<(usize, usize, Vec<u16>)> {
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })?;
    match img {
        DynamicImage::ImageLuma16(buf) => {
            let (w, h) = buf.dimensions();
            Ok((w as usize, h as usize, buf.into_raw()))
        }
        other => Err(Error::Format(format!(
            "{}: expected a 16-bit single-channel PNG, found {:?}",
            path.display(),
            other.color()
        ))),
    }
}

fn save_luma16(path: &Path, width: usize, height: usize, data: Vec<u16>) -> Result<()> {
    let buf: ImageBuffer<Luma<u16>, Vec<u16>> =
        ImageBuffer::from_raw(width as u32, height as u32, data)
            .expect("buffer length matches dimensions");
    buf.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })
}

/// Loads a KITTI ground-truth disparity PNG (`disp_noc_0/*.png`).
pub fn load_groundtruth_disparity(path: impl AsRef<Path>) -> Result<DisparityMap> {
    let (width, height, raw) = load_luma16(path.as_ref())?;
    let values = raw.into_iter().map(decode_u16).collect();
    DisparityMap::new(width, height, values)
}

pub fn write_disparity_image(map: &DisparityMap, path: impl AsRef<Path>) -> Result<()> {
    let data = map.values.iter().map(|d| encode_u16(*d)).collect();
    save_luma16(path.as_ref(), map.width, map.height, data)
}

/// Writes depth as `round(depth * 256)` saturated to `u16`; 0 = no estimate.
pub fn write_depth_image(map: &DenseDepthMap, path: impl AsRef<Path>) -> Result<()> {
    let data = map.values().iter().map(|d| encode_u16(*d)).collect();
    save_luma16(path.as_ref(), map.width(), map.height(), data)
}

/// Reads a depth PNG written by [`write_depth_image`]. The horizon row is
/// taken as the first row holding a valid pixel.
pub fn load_depth_image(path: impl AsRef<Path>) -> Result<DenseDepthMap> {
    let (width, height, raw) = load_luma16(path.as_ref())?;
    let values: Vec<Option<f64>> = raw.into_iter().map(decode_u16).collect();
    let horizon = values
        .iter()
        .position(Option::is_some)
        .map_or(height, |i| i / width.max(1));
    DenseDepthMap::from_values(width, height, horizon, values)
}

/// Foreground masks are 8-bit images (KITTI `obj_map`), any nonzero pixel is
/// foreground.
pub fn load_fg_mask(path: impl AsRef<Path>) -> Result<FgMask> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })?;
    let luma = img.to_luma16();
    let (w, h) = luma.dimensions();
    let mask = luma.into_raw().into_iter().map(|v| v != 0).collect();
    FgMask::new(w as usize, h as usize, mask)
}

pub fn write_fg_mask(mask: &FgMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let data: Vec<u8> = mask.as_slice().iter().map(|&m| u8::from(m) * 255).collect();
    let buf: ImageBuffer<Luma<u8>, Vec<u8>> =
        ImageBuffer::from_raw(mask.width() as u32, mask.height() as u32, data)
            .expect("buffer length matches dimensions");
    buf.save(path).map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Image(other),
    })
}

fn with_path(err: Error, path: &Path) -> Error {
    match err {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hex_bytes(hex: &str) -> Vec<u8> {
        let clean: String = hex.chars().filter(|c| !c.is_whitespace()).collect();
        (0..clean.len())
            .step_by(2)
            .map(|i| u8::from_str_radix(&clean[i..i + 2], 16).unwrap())
            .collect()
    }

    #[test]
    fn empty_scan_has_no_points() {
        assert!(parse_point_cloud(&[]).unwrap().is_empty());
    }

    #[test]
    fn two_hand_assembled_points() {
        // IEEE-754 single precision, little endian:
        // 1.0 = 3f800000, 2.0 = 40000000, 3.0 = 40400000, 0.5 = 3f000000,
        // -1.0 = bf800000, 0.0 = 00000000, 4.0 = 40800000, 0.1 = 3dcccccd
        let bytes = hex_bytes(
            "0000803f 00000040 00004040 0000003f
             000080bf 00000000 00008040 cdcccc3d",
        );
        assert_eq!(bytes.len(), 32);
        let cloud = parse_point_cloud(&bytes).unwrap();
        assert_eq!(
            cloud.points,
            vec![
                LidarPoint { x: 1.0, y: 2.0, z: 3.0, reflectance: 0.5 },
                LidarPoint { x: -1.0, y: 0.0, z: 4.0, reflectance: 0.1 },
            ]
        );
        assert_eq!(cloud.to_bytes(), bytes);
    }

    #[test]
    fn ragged_scan_is_rejected() {
        assert!(matches!(parse_point_cloud(&[0u8; 17]), Err(Error::Format(_))));
    }

    #[test]
    fn nan_reports_point_index() {
        let mut bytes = vec![0u8; 48];
        bytes[32 + 8..32 + 12].copy_from_slice(&f32::NAN.to_le_bytes());
        let err = parse_point_cloud(&bytes).unwrap_err().to_string();
        assert!(err.contains("point 2"), "{err}");
    }

    const SAMPLE_CALIB: &str = "\
P0: 7.215377e+02 0.000000e+00 6.095593e+02 0.000000e+00 0.000000e+00 7.215377e+02 1.728540e+02 0.000000e+00 0.000000e+00 0.000000e+00 1.000000e+00 0.000000e+00
P2: 7.215377e+02 0.000000e+00 6.095593e+02 4.485728e+01 0.000000e+00 7.215377e+02 1.728540e+02 2.163791e-01 0.000000e+00 0.000000e+00 1.000000e+00 2.745884e-03
P3: 7.215377e+02 0.000000e+00 6.095593e+02 -3.395242e+02 0.000000e+00 7.215377e+02 1.728540e+02 2.199936e+00 0.000000e+00 0.000000e+00 1.000000e+00 2.729905e-03
R0_rect: 9.999239e-01 9.837760e-03 -7.445048e-03 -9.869795e-03 9.999421e-01 -4.278459e-03 7.402527e-03 4.351614e-03 9.999631e-01
Tr_velo_to_cam: 7.533745e-03 -9.999714e-01 -6.166020e-04 -4.069766e-03 1.480249e-02 7.280733e-04 -9.998902e-01 -7.631618e-02 9.998621e-01 7.523790e-03 1.480755e-02 -2.717806e-01
Tr_imu_to_velo: 9.999976e-01 7.553071e-04 -2.035826e-03 -8.086759e-01 -7.854027e-04 9.998898e-01 -1.482298e-02 3.195559e-01 2.024406e-03 1.482454e-02 9.998881e-01 -7.997231e-01
";

    #[test]
    fn kitti_calibration_parses() {
        let calib = parse_calibration(SAMPLE_CALIB).unwrap();
        assert_eq!(calib.focal(), 721.5377);
        let b = calib.baseline.unwrap();
        assert!((b - 0.532_725).abs() < 1e-5, "{b}");
        assert_eq!(calib.t_velo_cam.row(3).iter().copied().collect::<Vec<_>>(), [0.0, 0.0, 0.0, 1.0]);
        let right = calib.clone().with_camera(Camera::Right).unwrap();
        assert_eq!(right.projection()[(0, 3)], -339.5242);
    }

    #[test]
    fn identity_like_p2_gives_focal() {
        let text = "P2: 700 0 320 0 0 700 240 0 0 0 1 0\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n";
        let calib = parse_calibration(text).unwrap();
        assert_eq!(calib.focal(), 700.0);
        assert_eq!(calib.baseline, None);
        assert!(calib.clone().with_camera(Camera::Right).is_err());
    }

    #[test]
    fn missing_key_is_named() {
        let text = SAMPLE_CALIB.replace("R0_rect", "R9_rect");
        let err = parse_calibration(&text).unwrap_err().to_string();
        assert!(err.contains("R0_rect"), "{err}");
    }

    #[test]
    fn wrong_count_is_rejected() {
        let text = "P2: 1 2 3\nR0_rect: 1 0 0 0 1 0 0 0 1\nTr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n";
        let err = parse_calibration(text).unwrap_err().to_string();
        assert!(err.contains("P2") && err.contains("12"), "{err}");
    }

    #[test]
    fn non_orthonormal_rectification_is_rejected() {
        let text = "P2: 700 0 320 0 0 700 240 0 0 0 1 0\nR0_rect: 1 0 0 0 2 0 0 0 1\nTr_velo_to_cam: 0 -1 0 0 0 0 -1 0 1 0 0 0\n";
        assert!(parse_calibration(text).is_err());
    }

    #[test]
    fn calibration_round_trips_through_text() {
        let calib = parse_calibration(SAMPLE_CALIB).unwrap();
        let again = parse_calibration(&format_calibration(&calib)).unwrap();
        assert_eq!(calib, again);
    }

    #[test]
    fn png_scale_convention() {
        assert_eq!(decode_u16(0), None);
        assert_eq!(decode_u16(256), Some(1.0));
        assert_eq!(decode_u16(12800), Some(50.0));
        assert_eq!(encode_u16(Some(1.0)), 256);
        assert_eq!(encode_u16(None), 0);
        assert_eq!(encode_u16(Some(300.0)), 65535);
        assert_eq!(encode_u16(Some(1e-4)), 1);
    }
}
